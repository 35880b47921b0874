use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::{bail, Result};
use crate::weaksg::{Lexicon, PRONOUNS};

const FUNCTION_WORDS: [&str; 6] = ["the", "is", ".", "what", "doing", "?"];

/// Word ids for captions, questions and answers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CaptionVocab {
    words: Vec<String>,
}

impl CaptionVocab {
    pub fn new(lexicon: &Lexicon) -> Self {
        let mut words: Vec<String> = FUNCTION_WORDS.iter().map(|w| w.to_string()).collect();
        words.extend(lexicon.nouns.iter().map(|n| n.lemma.clone()));
        words.extend(lexicon.verbs.iter().map(|v| v.progressive.clone()));
        words.extend(lexicon.prepositions.iter().cloned());
        words.extend(PRONOUNS.iter().map(|(p, _)| p.to_string()));
        CaptionVocab { words }
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn id(&self, word: &str) -> Option<usize> {
        self.words.iter().position(|w| w == word)
    }

    pub fn word(&self, id: usize) -> Option<&str> {
        self.words.get(id).map(String::as_str)
    }

    /// Whitespace tokenization into word ids.
    pub fn encode(&self, text: &str) -> Result<Vec<usize>> {
        text.split_whitespace()
            .map(|w| match self.id(w) {
                Some(id) => Ok(id),
                None => bail!(Validation, "word {:?} is not in the caption vocabulary", w),
            })
            .collect()
    }

    pub fn decode(&self, ids: &[usize]) -> String {
        let words: Vec<&str> = ids.iter().map(|&i| self.word(i).unwrap_or("<unk>")).collect();
        words.join(" ")
    }
}

impl Default for CaptionVocab {
    fn default() -> Self {
        CaptionVocab::new(&Lexicon::default())
    }
}
