use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::lexicon::{pronoun_gender, Lexicon};
use crate::error::{bail, Result};

/// Token range `[start, end)` inside one sentence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Span {
    pub sentence: usize,
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(sentence: usize, start: usize, end: usize) -> Self {
        Span { sentence, start, end }
    }

    pub fn overlaps(&self, other: &Span) -> bool {
        self.sentence == other.sentence && self.start < other.end && other.start < self.end
    }
}

/// One predicate-argument structure. `arguments` includes the `V` span.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    pub verb_lemma: String,
    pub arguments: BTreeMap<String, Span>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SrlDocument {
    pub id: String,
    pub sentences: Vec<Vec<String>>,
    pub frames: Vec<Frame>,
    pub coref_clusters: Vec<Vec<Span>>,
}

impl SrlDocument {
    pub fn validate(&self) -> Result<()> {
        let check = |s: &Span| -> Result<()> {
            let Some(sentence) = self.sentences.get(s.sentence) else {
                bail!(Validation, "document {}: span {:?} names a missing sentence", self.id, s);
            };
            if s.start >= s.end || s.end > sentence.len() {
                bail!(Validation, "document {}: span {:?} outside sentence of {} tokens", self.id, s, sentence.len());
            }
            Ok(())
        };
        for (i, frame) in self.frames.iter().enumerate() {
            if !frame.arguments.contains_key("V") {
                bail!(Validation, "document {}: frame {} has no V", self.id, i);
            }
            frame.arguments.values().try_for_each(check)?;
        }
        for (c, cluster) in self.coref_clusters.iter().enumerate() {
            cluster.iter().try_for_each(check)?;
            for (i, a) in cluster.iter().enumerate() {
                if cluster[i + 1..].iter().any(|b| a.overlaps(b)) {
                    bail!(Validation, "document {}: cluster {} has overlapping spans", self.id, c);
                }
            }
        }
        Ok(())
    }

    pub fn tokens(&self, span: &Span) -> &[String] {
        &self.sentences[span.sentence][span.start..span.end]
    }

    /// Last token of the span, which is the head for noun phrases.
    pub fn head(&self, span: &Span) -> &str {
        self.tokens(span).last().map_or("", String::as_str)
    }
}

/// Splits text into sentences at `.` tokens. A trailing period attached to
/// a word is split off.
fn sentences(text: &str) -> Vec<Vec<String>> {
    let mut out = Vec::new();
    let mut current: Vec<String> = Vec::new();
    for raw in text.split_whitespace() {
        let word = raw.to_lowercase();
        let (word, ends) = match word.strip_suffix('.') {
            Some(w) => (w.to_string(), true),
            None => (word, false),
        };
        if !word.is_empty() {
            current.push(word);
        }
        if ends && !current.is_empty() {
            out.push(core::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        out.push(current);
    }
    out
}

struct Mention {
    span: Span,
    pronoun: Option<super::lexicon::Gender>,
    gender: super::lexicon::Gender,
}

/// Parses caption text following the templates
/// `NP is V-ing [NP [PREP NP]]` where `NP` is `the <noun>` or a pronoun.
/// Each pronoun joins a cluster with the nearest preceding noun mention of
/// the same gender.
pub fn parse_templated(id: &str, text: &str, lexicon: &Lexicon) -> Result<SrlDocument> {
    let sentences = sentences(text);
    let mut frames = Vec::new();
    let mut mentions: Vec<Mention> = Vec::new();
    for (si, words) in sentences.iter().enumerate() {
        let fail = || -> crate::Error {
            crate::Error::Parse(alloc::format!("sentence {} does not match the templates: {:?}", si, words.join(" ")))
        };
        let mut pos = 0;
        let np = |pos: &mut usize| -> Option<Mention> {
            let w = words.get(*pos)?;
            if let Some(g) = pronoun_gender(w) {
                *pos += 1;
                return Some(Mention { span: Span::new(si, *pos - 1, *pos), pronoun: Some(g), gender: g });
            }
            if w != "the" {
                return None;
            }
            let (_, gender) = lexicon.noun(words.get(*pos + 1)?)?;
            *pos += 2;
            Some(Mention { span: Span::new(si, *pos - 2, *pos), pronoun: None, gender })
        };
        let subject = np(&mut pos).ok_or_else(fail)?;
        if words.get(pos).map(String::as_str) != Some("is") {
            return Err(fail());
        }
        pos += 1;
        let verb = words.get(pos).and_then(|w| lexicon.verb_lemma(w)).ok_or_else(fail)?;
        let mut arguments = BTreeMap::new();
        arguments.insert("V".to_string(), Span::new(si, pos, pos + 1));
        arguments.insert("ARG0".to_string(), subject.span);
        pos += 1;
        let mut found = alloc::vec![subject];
        if pos < words.len() {
            let object = np(&mut pos).ok_or_else(fail)?;
            arguments.insert("ARG1".to_string(), object.span);
            found.push(object);
            if pos < words.len() {
                if !lexicon.is_preposition(&words[pos]) {
                    return Err(fail());
                }
                let start = pos;
                pos += 1;
                let extra = np(&mut pos).ok_or_else(fail)?;
                arguments.insert("ARG2".to_string(), Span::new(si, start, extra.span.end));
                found.push(extra);
            }
        }
        if pos != words.len() {
            return Err(fail());
        }
        frames.push(Frame { verb_lemma: verb.to_string(), arguments });
        mentions.extend(found);
    }
    // antecedent index -> cluster
    let mut clusters: BTreeMap<usize, Vec<Span>> = BTreeMap::new();
    for (i, m) in mentions.iter().enumerate() {
        let Some(gender) = m.pronoun else { continue };
        let antecedent = mentions[..i].iter().rposition(|a| a.pronoun.is_none() && a.gender == gender);
        let Some(a) = antecedent else {
            bail!(Parse, "pronoun {:?} in sentence {} has no antecedent", sentences[m.span.sentence][m.span.start], m.span.sentence);
        };
        clusters.entry(a).or_insert_with(|| alloc::vec![mentions[a].span]).push(m.span);
    }
    let doc = SrlDocument { id: id.to_string(), sentences, frames, coref_clusters: clusters.into_values().collect() };
    doc.validate()?;
    Ok(doc)
}
