use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use scenegraph_core::weaksg::{Frame, Span, SrlDocument};

use crate::error::{Result, ToolError};

pub const SRL_FORMAT: &str = "srl-document";
pub const SRL_VERSION: u32 = 1;

/// Semantic-role frames and coreference clusters of one document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SrlDocumentFile {
    pub format: String,
    pub version: u32,
    pub id: String,
    pub sentences: Vec<Vec<String>>,
    pub frames: Vec<FrameRecord>,
    pub coref_clusters: Vec<Vec<SpanRecord>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameRecord {
    pub verb_lemma: String,
    pub arguments: BTreeMap<String, SpanRecord>,
}

/// Token range `[start, end)` of one sentence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpanRecord {
    pub sentence: usize,
    pub start: usize,
    pub end: usize,
}

impl From<Span> for SpanRecord {
    fn from(s: Span) -> Self {
        SpanRecord { sentence: s.sentence, start: s.start, end: s.end }
    }
}

impl From<SpanRecord> for Span {
    fn from(s: SpanRecord) -> Self {
        Span::new(s.sentence, s.start, s.end)
    }
}

impl SrlDocumentFile {
    pub fn from_document(doc: &SrlDocument) -> Self {
        SrlDocumentFile {
            format: SRL_FORMAT.to_string(),
            version: SRL_VERSION,
            id: doc.id.clone(),
            sentences: doc.sentences.clone(),
            frames: doc
                .frames
                .iter()
                .map(|f| FrameRecord {
                    verb_lemma: f.verb_lemma.clone(),
                    arguments: f.arguments.iter().map(|(r, s)| (r.clone(), (*s).into())).collect(),
                })
                .collect(),
            coref_clusters: doc.coref_clusters.iter().map(|c| c.iter().map(|&s| s.into()).collect()).collect(),
        }
    }

    /// Validated document.
    pub fn to_document(&self) -> Result<SrlDocument> {
        if self.format != SRL_FORMAT || self.version != SRL_VERSION {
            return Err(ToolError::Format(format!(
                "document {}: expected format `{SRL_FORMAT}` version {SRL_VERSION}, got `{}` version {}",
                self.id, self.format, self.version
            )));
        }
        let doc = SrlDocument {
            id: self.id.clone(),
            sentences: self.sentences.clone(),
            frames: self
                .frames
                .iter()
                .map(|f| Frame {
                    verb_lemma: f.verb_lemma.clone(),
                    arguments: f.arguments.iter().map(|(r, &s)| (r.clone(), s.into())).collect(),
                })
                .collect(),
            coref_clusters: self.coref_clusters.iter().map(|c| c.iter().map(|&s| s.into()).collect()).collect(),
        };
        doc.validate()?;
        Ok(doc)
    }
}
