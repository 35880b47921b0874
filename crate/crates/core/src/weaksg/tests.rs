use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use super::*;
use crate::graph::{Role, RoleEdge, Triplet};

fn parse(text: &str) -> SrlDocument {
    parse_templated("d", text, &Lexicon::default()).unwrap()
}

fn args(doc: &SrlDocument, frame: usize) -> BTreeMap<String, String> {
    doc.frames[frame].arguments.iter().map(|(r, s)| (r.clone(), doc.tokens(s).join(" "))).collect()
}

fn strings(items: &[&str]) -> Vec<String> {
    items.iter().map(|s| s.to_string()).collect()
}

fn edge(predicate: usize, role: Role, entity: usize) -> RoleEdge {
    RoleEdge { predicate, entity, role }
}

#[test]
fn parses_transitive_sentence() {
    let doc = parse("the man is riding the horse");
    assert_eq!(doc.frames.len(), 1);
    assert_eq!(doc.frames[0].verb_lemma, "ride");
    let a = args(&doc, 0);
    assert_eq!(a["ARG0"], "the man");
    assert_eq!(a["ARG1"], "the horse");
    assert_eq!(a["V"], "riding");
    assert!(doc.coref_clusters.is_empty());
}

#[test]
fn parses_intransitive_sentence() {
    let doc = parse("the dog is sleeping");
    assert_eq!(doc.frames[0].verb_lemma, "sleep");
    assert_eq!(doc.frames[0].arguments.keys().cloned().collect::<Vec<_>>(), strings(&["ARG0", "V"]));
}

#[test]
fn pronoun_joins_nearest_agreeing_noun() {
    let doc = parse("the man is riding the horse . he is holding the rope");
    assert_eq!(doc.frames.len(), 2);
    assert_eq!(doc.coref_clusters, vec![vec![Span::new(0, 0, 2), Span::new(1, 0, 1)]]);
    let doc = parse("the woman is riding the horse . it is eating the cup");
    assert_eq!(doc.coref_clusters, vec![vec![Span::new(0, 4, 6), Span::new(1, 0, 1)]]);
}

#[test]
fn prepositional_argument_becomes_arg2() {
    let doc = parse("the girl is throwing the ball near the dog");
    assert_eq!(args(&doc, 0)["ARG2"], "near the dog");
}

#[test]
fn nonconforming_text_names_the_sentence() {
    for bad in ["the man riding the horse", "a man is riding", "the man is jumping", "the man is riding the horse quickly", "he is sleeping"] {
        let err = parse_templated("d", &alloc::format!("the dog is sleeping . {bad}"), &Lexicon::default()).unwrap_err();
        assert!(matches!(err, crate::Error::Parse(_)), "{bad}: {err}");
        if bad != "he is sleeping" {
            assert!(err.to_string().contains("sentence 1"), "{err}");
        }
    }
}

#[test]
fn merge_rewrites_pronoun_arguments() {
    let merged = merge_coreferent(&parse("the man is riding the horse . he is holding the rope"));
    let a = args(&merged, 1);
    assert_eq!(a["ARG0"], "the man");
    assert_eq!(a["ARG1"], "the rope");
    assert_eq!(merged.frames[1].verb_lemma, "hold");
}

#[test]
fn merge_without_clusters_is_identity() {
    let doc = parse("the man is riding the horse . the dog is sleeping");
    assert_eq!(merge_coreferent(&doc), doc);
}

#[test]
fn merge_is_independent_of_cluster_order() {
    let doc = parse("the man is riding the horse . he is holding the rope . it is sleeping");
    assert_eq!(doc.coref_clusters.len(), 2);
    let mut reversed = doc.clone();
    reversed.coref_clusters.reverse();
    for c in &mut reversed.coref_clusters {
        c.reverse();
    }
    let (a, b) = (merge_coreferent(&doc), merge_coreferent(&reversed));
    assert_eq!(a.frames, b.frames);
    assert_eq!(args(&a, 2)["ARG0"], "the rope");
}

#[test]
fn pronoun_only_cluster_left_unmerged() {
    let mut doc = parse("the man is riding the horse . he is holding the rope . he is sleeping");
    doc.coref_clusters = vec![vec![Span::new(1, 0, 1), Span::new(2, 0, 1)]];
    assert_eq!(merge_coreferent(&doc).frames, doc.frames);
}

#[test]
fn role_filter() {
    let mut doc = parse("the man is riding the horse . the dog is sleeping");
    doc.frames[0].arguments.insert("ARGM-TMP".into(), Span::new(0, 5, 6));
    doc.frames[1].arguments.remove("ARG0");
    let cfg = FilterConfig::default();
    let out = filter_roles(&doc, &cfg);
    assert_eq!(out.frames.len(), 1);
    assert_eq!(out.frames[0].arguments.keys().cloned().collect::<Vec<_>>(), strings(&["ARG0", "ARG1", "V"]));
    let clean = parse("the man is riding the horse");
    assert_eq!(filter_roles(&clean, &cfg), clean);
}

#[test]
fn filter_config_requires_v() {
    let mut cfg = FilterConfig::default();
    cfg.allowed_roles.remove("V");
    assert!(cfg.validate().is_err());
}

#[test]
fn builds_single_triplet() {
    let g = build_pseudo_graph(&parse("the man is riding the horse"), &Lexicon::default());
    assert_eq!(g.entities, strings(&["man", "horse"]));
    assert_eq!(g.predicates, strings(&["ride"]));
    assert_eq!(g.triplets, vec![Triplet::new(0, 0, 1)]);
    assert_eq!(g.edges, vec![edge(0, Role::Subject, 0), edge(0, Role::Object, 1)]);
}

#[test]
fn shared_canonical_mention_gives_one_entity() {
    let doc = merge_coreferent(&parse("the man is riding the horse . he is holding the rope"));
    let g = build_pseudo_graph(&doc, &Lexicon::default());
    assert_eq!(g.entities, strings(&["man", "horse", "rope"]));
    assert_eq!(g.triplets, vec![Triplet::new(0, 0, 1), Triplet::new(0, 1, 2)]);
}

#[test]
fn subject_only_frame_has_no_triplet() {
    let g = build_pseudo_graph(&parse("the dog is sleeping"), &Lexicon::default());
    assert_eq!(g.predicates, strings(&["sleep"]));
    assert_eq!(g.edges, vec![edge(0, Role::Subject, 0)]);
    assert!(g.triplets.is_empty());
}

#[test]
fn arg2_is_an_extra_object_edge() {
    let g = build_pseudo_graph(&parse("the girl is throwing the ball near the dog"), &Lexicon::default());
    assert_eq!(g.entities, strings(&["girl", "ball", "dog"]));
    assert_eq!(g.edges, vec![edge(0, Role::Subject, 0), edge(0, Role::Object, 1), edge(0, Role::Object, 2)]);
    assert_eq!(g.triplets, vec![Triplet::new(0, 0, 1)]);
}

fn graph(id: &str, text: &str) -> PseudoGraph {
    let lex = Lexicon::default();
    build_pseudo_graph(&merge_coreferent(&parse_templated(id, text, &lex).unwrap()), &lex)
}

#[test]
fn stoplist_filter() {
    let corpus = vec![
        graph("a", "the man is having the cup . the man is riding the horse"),
        graph("b", "the man is having the cup"),
    ];
    let cfg = FilterConfig { verb_stoplist: ["be", "have"].iter().map(|s| s.to_string()).collect(), ..FilterConfig::default() };
    let out = filter_abstract_verbs(&corpus, &cfg);
    assert_eq!(out.len(), 1);
    assert_eq!(out[0].predicates, strings(&["ride"]));
    assert_eq!(out[0].entities, strings(&["man", "horse"]));
    assert_eq!(filter_abstract_verbs(&corpus, &FilterConfig::default()), corpus);
}

#[test]
fn frequency_boundary_is_inclusive() {
    let corpus = vec![
        graph("a", "the man is riding the horse"),
        graph("b", "the man is riding the horse"),
        graph("c", "the woman is riding the horse"),
    ];
    let cfg = FilterConfig { min_frequency: 2, ..FilterConfig::default() };
    let (out, stats) = filter_frequency(&corpus, &cfg);
    // man appears exactly twice and stays; woman once and goes
    assert_eq!(stats.entity_counts.get("man"), Some(&2));
    assert!(!stats.entity_counts.contains_key("woman"));
    assert_eq!(out[2].entities, strings(&["horse"]));
    assert!(out[2].triplets.is_empty());
    let cfg3 = FilterConfig { min_frequency: 3, ..FilterConfig::default() };
    let (out3, _) = filter_frequency(&corpus, &cfg3);
    assert!(out3.iter().all(|g| !g.entities.contains(&"man".to_string())));
}

#[test]
fn frequency_filter_identity_and_idempotence() {
    let corpus: Vec<PseudoGraph> = TOY_CORPUS.iter().map(|(id, t)| graph(id, t)).collect();
    let everything = FilterConfig { min_frequency: 1, ..FilterConfig::default() };
    assert_eq!(filter_frequency(&corpus, &everything).0, corpus);
    for min in 1..5 {
        let cfg = FilterConfig { min_frequency: min, ..FilterConfig::default() };
        let once = filter_frequency(&corpus, &cfg).0;
        assert_eq!(filter_frequency(&once, &cfg).0, once);
    }
}

#[test]
fn stats_of_empty_and_duplicated_corpora() {
    assert_eq!(corpus_stats(&[]), CorpusStats::default());
    let corpus: Vec<PseudoGraph> = TOY_CORPUS.iter().map(|(id, t)| graph(id, t)).collect();
    let once = corpus_stats(&corpus);
    let doubled: Vec<PseudoGraph> = corpus.iter().chain(&corpus).cloned().collect();
    let twice = corpus_stats(&doubled);
    assert_eq!(once.distinct_entities(), twice.distinct_entities());
    assert_eq!(once.distinct_predicates(), twice.distinct_predicates());
    for (k, v) in &once.entity_counts {
        assert_eq!(twice.entity_counts[k], 2 * v);
    }
    assert_eq!(twice.graphs, 2 * once.graphs);
}

#[test]
fn top_verbs_order() {
    let corpus: Vec<PseudoGraph> = TOY_CORPUS.iter().map(|(id, t)| graph(id, t)).collect();
    let top = corpus_stats(&corpus).top_verbs(3);
    assert_eq!(top, vec![("hold".to_string(), 3), ("chase".to_string(), 2), ("ride".to_string(), 2)]);
}

fn toy_documents() -> Vec<SrlDocument> {
    let lex = Lexicon::default();
    TOY_CORPUS.iter().map(|(id, t)| parse_templated(id, t, &lex).unwrap()).collect()
}

#[test]
fn toy_corpus_matches_hand_derived_graphs() {
    let docs = toy_documents();
    assert_eq!(docs.iter().map(|d| d.sentences.len()).sum::<usize>(), 12);
    let out = extract_pseudo_graphs(&docs, &FilterConfig::toy(), &Lexicon::default()).unwrap();
    let expected = vec![
        PseudoGraph {
            id: "doc01".into(),
            entities: strings(&["man", "horse", "rope"]),
            predicates: strings(&["ride", "hold"]),
            edges: vec![edge(0, Role::Subject, 0), edge(0, Role::Object, 1), edge(1, Role::Subject, 0), edge(1, Role::Object, 2)],
            triplets: vec![Triplet::new(0, 0, 1), Triplet::new(0, 1, 2)],
        },
        PseudoGraph {
            id: "doc02".into(),
            entities: strings(&["horse", "rope"]),
            predicates: strings(&["ride", "hold"]),
            edges: vec![edge(0, Role::Object, 0), edge(1, Role::Object, 1)],
            triplets: vec![],
        },
        PseudoGraph {
            id: "doc03".into(),
            entities: strings(&["dog"]),
            predicates: strings(&["chase"]),
            edges: vec![edge(0, Role::Subject, 0)],
            triplets: vec![],
        },
        PseudoGraph {
            id: "doc04".into(),
            entities: strings(&["man"]),
            predicates: strings(&["hold"]),
            edges: vec![edge(0, Role::Subject, 0)],
            triplets: vec![],
        },
        PseudoGraph {
            id: "doc05".into(),
            entities: strings(&["dog"]),
            predicates: strings(&["chase"]),
            edges: vec![edge(0, Role::Subject, 0)],
            triplets: vec![],
        },
    ];
    assert_eq!(out.graphs, expected);
    let counts = |pairs: &[(&str, u64)]| pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect::<BTreeMap<_, _>>();
    assert_eq!(out.stats.graphs, 5);
    assert_eq!(out.stats.triplets, 2);
    assert_eq!(out.stats.entity_counts, counts(&[("dog", 2), ("horse", 2), ("man", 2), ("rope", 2)]));
    assert_eq!(out.stats.predicate_counts, counts(&[("chase", 2), ("hold", 3), ("ride", 2)]));
}

#[test]
fn pipeline_is_order_invariant() {
    let docs = toy_documents();
    let cfg = FilterConfig::toy();
    let forward = extract_pseudo_graphs(&docs, &cfg, &Lexicon::default()).unwrap();
    let mut rev = docs.clone();
    rev.reverse();
    let backward = extract_pseudo_graphs(&rev, &cfg, &Lexicon::default()).unwrap();
    let mut b = backward.graphs.clone();
    b.sort_by(|x, y| x.id.cmp(&y.id));
    assert_eq!(forward.graphs, b);
    assert_eq!(forward.stats, backward.stats);
    for g in &forward.graphs {
        g.validate().unwrap();
    }
}

#[test]
fn document_validation() {
    let mut doc = parse("the man is riding the horse");
    doc.frames[0].arguments.remove("V");
    assert!(doc.validate().is_err());
    let mut doc = parse("the man is riding the horse");
    doc.frames[0].arguments.insert("ARG1".into(), Span::new(0, 4, 9));
    assert!(doc.validate().is_err());
    let mut doc = parse("the man is riding the horse . he is sleeping");
    doc.coref_clusters[0].push(Span::new(0, 1, 2));
    assert!(doc.validate().is_err());
}
