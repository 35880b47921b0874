use std::path::Path;

use crate::error::{IoContext, Result, ToolError};

/// Tab-separated table with a header row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Table { header: header.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push<S: Into<String>>(&mut self, row: impl IntoIterator<Item = S>) {
        let row: Vec<String> = row.into_iter().map(Into::into).collect();
        assert_eq!(row.len(), self.header.len(), "row width must match the header");
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for line in std::iter::once(&self.header).chain(&self.rows) {
            out.push_str(&line.join("\t"));
            out.push('\n');
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.render()).at(path)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header: Vec<String> = lines.next().unwrap_or("").split('\t').map(String::from).collect();
        let mut table = Table { header, rows: Vec::new() };
        for (n, line) in lines.enumerate() {
            let row: Vec<String> = line.split('\t').map(String::from).collect();
            if row.len() != table.header.len() {
                return Err(ToolError::Format(format!("line {}: {} fields, header has {}", n + 2, row.len(), table.header.len())));
            }
            table.rows.push(row);
        }
        Ok(table)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Table::parse(&std::fs::read_to_string(path).at(path)?)
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }
}

/// Fixed six-decimal rendering; non-finite values print as `nan`, `inf`
/// or `-inf`.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        let s = format!("{x:.6}");
        if s == "-0.000000" { "0.000000".to_string() } else { s }
    }
}

pub fn fmt_opt(x: Option<f64>) -> String {
    x.map_or_else(|| "na".to_string(), fmt_f64)
}
