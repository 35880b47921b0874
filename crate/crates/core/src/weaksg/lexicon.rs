use alloc::string::String;
use alloc::vec::Vec;

/// Grammatical gender used for pronoun agreement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Gender {
    Masculine,
    Feminine,
    Neuter,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NounEntry {
    pub lemma: String,
    pub plural: String,
    pub gender: Gender,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerbEntry {
    pub lemma: String,
    pub progressive: String,
}

/// Closed word lists for the caption templates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lexicon {
    pub nouns: Vec<NounEntry>,
    pub verbs: Vec<VerbEntry>,
    pub prepositions: Vec<String>,
}

const NOUNS: [(&str, &str, Gender); 18] = [
    ("man", "men", Gender::Masculine),
    ("woman", "women", Gender::Feminine),
    ("dog", "dogs", Gender::Neuter),
    ("horse", "horses", Gender::Neuter),
    ("ball", "balls", Gender::Neuter),
    ("rope", "ropes", Gender::Neuter),
    ("table", "tables", Gender::Neuter),
    ("chair", "chairs", Gender::Neuter),
    ("bike", "bikes", Gender::Neuter),
    ("cup", "cups", Gender::Neuter),
    ("hat", "hats", Gender::Neuter),
    ("kite", "kites", Gender::Neuter),
    ("boy", "boys", Gender::Masculine),
    ("girl", "girls", Gender::Feminine),
    ("cat", "cats", Gender::Neuter),
    ("tree", "trees", Gender::Neuter),
    ("car", "cars", Gender::Neuter),
    ("bench", "benches", Gender::Neuter),
];

const VERBS: [(&str, &str); 14] = [
    ("ride", "riding"),
    ("hold", "holding"),
    ("throw", "throwing"),
    ("pull", "pulling"),
    ("watch", "watching"),
    ("carry", "carrying"),
    ("chase", "chasing"),
    ("wear", "wearing"),
    ("sit", "sitting"),
    ("eat", "eating"),
    ("sleep", "sleeping"),
    ("stand", "standing"),
    ("have", "having"),
    ("use", "using"),
];

const PREPOSITIONS: [&str; 6] = ["on", "with", "near", "under", "in", "behind"];

pub const PRONOUNS: [(&str, Gender); 3] = [("he", Gender::Masculine), ("she", Gender::Feminine), ("it", Gender::Neuter)];

impl Default for Lexicon {
    fn default() -> Self {
        Lexicon {
            nouns: NOUNS
                .iter()
                .map(|&(l, p, g)| NounEntry { lemma: l.into(), plural: p.into(), gender: g })
                .collect(),
            verbs: VERBS.iter().map(|&(l, p)| VerbEntry { lemma: l.into(), progressive: p.into() }).collect(),
            prepositions: PREPOSITIONS.iter().map(|&p| p.into()).collect(),
        }
    }
}

impl Lexicon {
    /// Lemma and gender of a noun in singular or plural form.
    pub fn noun(&self, word: &str) -> Option<(&str, Gender)> {
        self.nouns
            .iter()
            .find(|n| n.lemma == word || n.plural == word)
            .map(|n| (n.lemma.as_str(), n.gender))
    }

    /// Lemma of a progressive (`-ing`) verb form.
    pub fn verb_lemma(&self, progressive: &str) -> Option<&str> {
        self.verbs.iter().find(|v| v.progressive == progressive).map(|v| v.lemma.as_str())
    }

    pub fn is_preposition(&self, word: &str) -> bool {
        self.prepositions.iter().any(|p| p == word)
    }

    /// Lowercase lemma of any known word; unknown words are lowercased.
    pub fn lemmatize(&self, word: &str) -> String {
        let lower = word.to_lowercase();
        if let Some((lemma, _)) = self.noun(&lower) {
            return lemma.into();
        }
        if let Some(lemma) = self.verb_lemma(&lower) {
            return lemma.into();
        }
        lower
    }
}

pub fn pronoun_gender(word: &str) -> Option<Gender> {
    PRONOUNS.iter().find(|(p, _)| *p == word).map(|&(_, g)| g)
}

pub fn is_pronoun(word: &str) -> bool {
    pronoun_gender(word).is_some()
}
