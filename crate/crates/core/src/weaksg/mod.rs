//! Weakly supervised scene graphs from text.
//!
//! Semantic-role frames with coreference clusters are merged, filtered and
//! turned into label-typed graphs. A small parser for templated captions
//! produces such documents without a neural SRL model; documents from a
//! real parser go through the same pipeline.

mod lexicon;
mod pipeline;
mod srl;

#[cfg(test)]
mod tests;

pub use lexicon::{is_pronoun, pronoun_gender, Gender, Lexicon, NounEntry, VerbEntry, PRONOUNS};
pub use pipeline::{
    build_pseudo_graph, corpus_stats, extract_pseudo_graphs, filter_abstract_verbs, filter_frequency, filter_roles,
    merge_coreferent, CorpusStats, Extraction, FilterConfig, PseudoGraph,
};
pub use srl::{parse_templated, Frame, Span, SrlDocument};

/// Twelve-sentence caption corpus used for end-to-end checks of the
/// pipeline, as `(document id, text)`.
pub const TOY_CORPUS: [(&str, &str); 6] = [
    ("doc01", "the man is riding the horse . he is holding the rope ."),
    ("doc02", "the woman is riding the horse . she is holding the rope ."),
    ("doc03", "the dog is chasing the cat . it is sleeping ."),
    ("doc04", "the man is holding the cup . the man is using the rope ."),
    ("doc05", "the girl is throwing the ball near the dog . the dog is chasing the ball ."),
    ("doc06", "the boy is having the kite . he is sleeping ."),
];
