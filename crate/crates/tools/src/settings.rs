//! Flat `key = value` run configuration.
//!
//! One entry per line; blank lines and lines starting with `#` are
//! skipped. Values are read through typed getters that record the
//! effective value of every key, so a run can write its resolved
//! configuration back out. Keys that no getter asked for are an error.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use crate::error::{config_err, Result, ToolError};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Settings {
    entries: BTreeMap<String, String>,
    consumed: BTreeSet<String>,
    resolved: BTreeMap<String, String>,
}

impl Settings {
    pub fn new() -> Self {
        Settings::default()
    }

    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(config_err!("{origin}:{}: expected `key = value`, got {line:?}", n + 1));
            };
            let key = key.trim();
            if key.is_empty() || !key.chars().all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_') {
                return Err(config_err!("{origin}:{}: invalid key {key:?}", n + 1));
            }
            if entries.insert(key.to_string(), value.trim().to_string()).is_some() {
                return Err(config_err!("{origin}:{}: duplicate key `{key}`", n + 1));
            }
        }
        Ok(Settings { entries, ..Settings::default() })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => config_err!("config file not found: {}", path.display()),
            _ => ToolError::Io { path: path.to_path_buf(), source: e },
        })?;
        Settings::parse(&text, &path.display().to_string())
    }

    /// Sets `key`, replacing any value from the file.
    pub fn set(&mut self, key: &str, value: impl Display) {
        self.entries.insert(key.to_string(), value.to_string());
    }

    pub fn contains(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    fn raw(&mut self, key: &str) -> Option<String> {
        self.consumed.insert(key.to_string());
        self.entries.get(key).cloned()
    }

    fn record(&mut self, key: &str, value: String) {
        self.resolved.insert(key.to_string(), value);
    }

    pub fn get<T>(&mut self, key: &str, default: T) -> Result<T>
    where
        T: FromStr + Display,
        T::Err: Display,
    {
        let value = match self.raw(key) {
            Some(s) => s.parse().map_err(|e| config_err!("invalid value {s:?} for `{key}`: {e}"))?,
            None => default,
        };
        self.record(key, value.to_string());
        Ok(value)
    }

    /// Like [`Settings::get`] with `none` standing for an absent value.
    pub fn get_opt<T>(&mut self, key: &str, default: Option<T>) -> Result<Option<T>>
    where
        T: FromStr + Display,
        T::Err: Display,
    {
        let value = match self.raw(key) {
            Some(s) if s == "none" => None,
            Some(s) => Some(s.parse().map_err(|e| config_err!("invalid value {s:?} for `{key}`: {e}"))?),
            None => default,
        };
        self.record(key, value.as_ref().map_or_else(|| "none".to_string(), T::to_string));
        Ok(value)
    }

    /// Comma-separated list; an empty value is an empty list.
    pub fn get_list<T>(&mut self, key: &str, default: &[T]) -> Result<Vec<T>>
    where
        T: FromStr + Display + Clone,
        T::Err: Display,
    {
        let values = match self.raw(key) {
            Some(s) => s
                .split(',')
                .map(str::trim)
                .filter(|p| !p.is_empty())
                .map(|p| p.parse().map_err(|e| config_err!("invalid list item {p:?} for `{key}`: {e}")))
                .collect::<Result<Vec<T>>>()?,
            None => default.to_vec(),
        };
        let text: Vec<String> = values.iter().map(T::to_string).collect();
        self.record(key, text.join(","));
        Ok(values)
    }

    /// Path-valued key without a default.
    pub fn get_path(&mut self, key: &str) -> Option<std::path::PathBuf> {
        let value = self.raw(key).filter(|s| !s.is_empty() && s != "none");
        self.record(key, value.clone().unwrap_or_else(|| "none".to_string()));
        value.map(Into::into)
    }

    /// Fails on keys that no getter consumed.
    pub fn finish(&self) -> Result<()> {
        let unknown: Vec<&str> = self.entries.keys().filter(|k| !self.consumed.contains(*k)).map(String::as_str).collect();
        if unknown.is_empty() {
            Ok(())
        } else {
            let known: Vec<&str> = self.consumed.iter().map(String::as_str).collect();
            Err(config_err!("unknown configuration key(s): {}; known keys: {}", unknown.join(", "), known.join(", ")))
        }
    }

    /// Effective value of every key read so far.
    pub fn resolved(&self) -> &BTreeMap<String, String> {
        &self.resolved
    }

    /// The resolved configuration in the file syntax.
    pub fn render(&self) -> String {
        self.resolved.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }
}
