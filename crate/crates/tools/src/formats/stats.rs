use scenegraph_core::weaksg::CorpusStats;

use super::tsv::Table;

/// Corpus statistics as a `kind, label, count` table: summary counts,
/// then the entity and predicate histograms in label order, then the
/// `top_k` most frequent verbs in rank order.
pub fn stats_table(stats: &CorpusStats, top_k: usize) -> Table {
    let mut t = Table::new(["kind", "label", "count"]);
    let summary = [
        ("graphs", stats.graphs),
        ("triplets", stats.triplets),
        ("distinct_entities", stats.distinct_entities() as u64),
        ("distinct_predicates", stats.distinct_predicates() as u64),
    ];
    for (label, count) in summary {
        t.push(["summary".to_string(), label.to_string(), count.to_string()]);
    }
    for (label, count) in &stats.entity_counts {
        t.push(["entity".to_string(), label.clone(), count.to_string()]);
    }
    for (label, count) in &stats.predicate_counts {
        t.push(["predicate".to_string(), label.clone(), count.to_string()]);
    }
    for (label, count) in stats.top_verbs(top_k) {
        t.push(["top_verb".to_string(), label, count.to_string()]);
    }
    t
}
