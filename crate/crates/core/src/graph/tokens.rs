use alloc::vec::Vec;

use super::{NodeRef, SceneGraph};
use crate::error::{bail, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Modality {
    Text,
    Entity,
    Predicate,
    Special,
}

impl Modality {
    pub const COUNT: usize = 4;

    pub fn index(self) -> usize {
        match self {
            Modality::Text => 0,
            Modality::Entity => 1,
            Modality::Predicate => 2,
            Modality::Special => 3,
        }
    }

    pub fn is_visual(self) -> bool {
        matches!(self, Modality::Entity | Modality::Predicate)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SpecialToken {
    Start,
    Separator,
    Mask,
}

impl SpecialToken {
    pub const COUNT: usize = 3;

    pub fn index(self) -> usize {
        match self {
            SpecialToken::Start => 0,
            SpecialToken::Separator => 1,
            SpecialToken::Mask => 2,
        }
    }
}

/// One input position. Visual tokens point back at a graph node; text
/// tokens carry a vocabulary index; special tokens carry neither.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Token {
    Text(usize),
    Entity(usize),
    Predicate(usize),
    Special(SpecialToken),
}

impl Token {
    pub fn modality(&self) -> Modality {
        match self {
            Token::Text(_) => Modality::Text,
            Token::Entity(_) => Modality::Entity,
            Token::Predicate(_) => Modality::Predicate,
            Token::Special(_) => Modality::Special,
        }
    }

    pub fn node(&self) -> Option<NodeRef> {
        match *self {
            Token::Entity(i) => Some(NodeRef::Entity(i)),
            Token::Predicate(j) => Some(NodeRef::Predicate(j)),
            _ => None,
        }
    }

    pub fn vocab_id(&self) -> Option<usize> {
        match *self {
            Token::Text(v) => Some(v),
            _ => None,
        }
    }
}

/// Role of a query token when picking the attention kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QueryRole {
    Entity,
    Predicate,
    Other,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenSequence {
    tokens: Vec<Token>,
}

impl TokenSequence {
    pub fn new(tokens: Vec<Token>) -> Self {
        TokenSequence { tokens }
    }

    /// `[START] text [SEP] entities... predicates...`
    pub fn build(text: &[usize], g: &SceneGraph) -> Self {
        Self::with_segments(&[text], g)
    }

    /// `[START] seg0 [SEP] seg1 [SEP] ... entities... predicates...`
    pub fn with_segments(segments: &[&[usize]], g: &SceneGraph) -> Self {
        let text_len: usize = segments.iter().map(|s| s.len() + 1).sum();
        let mut tokens = Vec::with_capacity(1 + text_len + g.node_count());
        tokens.push(Token::Special(SpecialToken::Start));
        for seg in segments {
            tokens.extend(seg.iter().map(|&v| Token::Text(v)));
            tokens.push(Token::Special(SpecialToken::Separator));
        }
        tokens.extend((0..g.entities().len()).map(Token::Entity));
        tokens.extend((0..g.predicates().len()).map(Token::Predicate));
        TokenSequence { tokens }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    pub fn position_of(&self, node: NodeRef) -> Option<usize> {
        self.tokens.iter().position(|t| t.node() == Some(node))
    }

    pub fn roles(&self) -> Vec<QueryRole> {
        self.tokens
            .iter()
            .map(|t| match t.modality() {
                Modality::Entity => QueryRole::Entity,
                Modality::Predicate => QueryRole::Predicate,
                _ => QueryRole::Other,
            })
            .collect()
    }

    /// Checks that every visual token resolves in `g`.
    pub fn validate_against(&self, g: &SceneGraph) -> Result<()> {
        for (i, t) in self.tokens.iter().enumerate() {
            if let Some(node) = t.node() {
                if !g.contains(node) {
                    bail!(Validation, "token {} references missing node {:?}", i, node);
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::test_support::toy_graph;

    #[test]
    fn layout_is_deterministic() {
        let g = toy_graph(2, 1, &[(0, 0, 1)]);
        let seq = TokenSequence::build(&[5, 6], &g);
        assert_eq!(
            seq.tokens(),
            &[
                Token::Special(SpecialToken::Start),
                Token::Text(5),
                Token::Text(6),
                Token::Special(SpecialToken::Separator),
                Token::Entity(0),
                Token::Entity(1),
                Token::Predicate(0),
            ]
        );
        assert_eq!(seq, TokenSequence::build(&[5, 6], &g));
        assert_eq!(seq.position_of(NodeRef::Predicate(0)), Some(6));
        assert!(seq.validate_against(&g).is_ok());
        assert!(TokenSequence::new(alloc::vec![Token::Entity(9)]).validate_against(&g).is_err());
    }
}
