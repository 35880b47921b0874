//! Hand-derived values and randomized properties, exercised through the
//! public API only.

use std::collections::BTreeMap;

use proptest::prelude::*;

use scenegraph_core::encoder::{kernel_value, KernelKind, KernelParams};
use scenegraph_core::graph::{
    add_skip_edges, compute_distance_matrix, graph_diameter_visual, BBox, EntityNode, NodeRef, PredicateNode,
    QueryRole, SceneGraph, TokenSequence, Triplet,
};
use scenegraph_core::numerics::{renormalize_rows, softmax_rows, Tensor};
use scenegraph_core::pretrain::{plan_masks, MaskTask};
use scenegraph_core::weaksg::{extract_pseudo_graphs, parse_templated, FilterConfig, Lexicon, TOY_CORPUS};

fn graph(entities: usize, predicates: usize, triplets: &[(usize, usize, usize)]) -> SceneGraph {
    let entity = |i: usize| EntityNode { class_id: i, bbox: BBox::new(0.1, 0.1, 0.5, 0.5).unwrap(), feature: vec![0.0; 2] };
    let predicate = |j: usize| PredicateNode { class_id: j, union_bbox: BBox::new(0.0, 0.0, 1.0, 1.0).unwrap(), feature: vec![0.0; 2] };
    SceneGraph::new(
        (0..entities).map(entity).collect(),
        (0..predicates).map(predicate).collect(),
        triplets.iter().map(|&(s, p, o)| Triplet::new(s, p, o)).collect(),
    )
    .unwrap()
}

fn position(seq: &TokenSequence, node: NodeRef) -> usize {
    seq.tokens().iter().position(|t| t.node() == Some(node)).unwrap()
}

#[test]
fn distances_on_the_four_node_example() {
    // o1, o2, o3 and p1 linking o1 and o2
    let g = graph(3, 1, &[(0, 0, 1)]);
    let seq = TokenSequence::build(&[4, 7], &g);
    let eg = add_skip_edges(&g);
    let d = compute_distance_matrix(&seq, &eg, None).unwrap();
    let (o1, o3, p1) = (position(&seq, NodeRef::Entity(0)), position(&seq, NodeRef::Entity(2)), position(&seq, NodeRef::Predicate(0)));
    assert_eq!(d.get(p1, o1), 1);
    assert_eq!(d.get(p1, o3), 2);
    assert_eq!(d.get(o1, o3), 1);
    assert_eq!(d.get(p1, p1), 1);
    assert_eq!(graph_diameter_visual(&eg), 2);
    let text = seq.tokens().iter().position(|t| t.node().is_none()).unwrap();
    assert_eq!(d.get(text, p1), 1);
}

#[test]
fn predicates_meet_through_the_entity_clique() {
    let g = graph(3, 2, &[(0, 0, 1), (2, 1, 1)]);
    let seq = TokenSequence::build(&[], &g);
    let d = compute_distance_matrix(&seq, &add_skip_edges(&g), None).unwrap();
    let (p1, p2) = (position(&seq, NodeRef::Predicate(0)), position(&seq, NodeRef::Predicate(1)));
    assert_eq!(d.get(p1, p2), 2);
}

#[test]
fn kernels_at_non_unit_scalars() {
    // entity queries use (alpha 2, l 0.5), predicate queries (alpha 1, l 1)
    let p = KernelParams { alpha_o: 2.0, l_o: 0.5, alpha_p: 1.0, l_p: 1.0 };
    let rq = |d, role| kernel_value(d, role, &p, KernelKind::RationalQuadratic);
    let gauss = |d, role| kernel_value(d, role, &p, KernelKind::Gaussian);
    // (1 + r^2 / (2 alpha l^2))^-alpha with r = d - 1
    assert!((rq(2, QueryRole::Entity) - 0.25).abs() < 1e-15);
    assert!((rq(3, QueryRole::Entity) - 0.04).abs() < 1e-15);
    assert!((rq(3, QueryRole::Predicate) - 1.0 / 3.0).abs() < 1e-15);
    // exp(-r^2 / (2 l^2))
    assert!((gauss(2, QueryRole::Entity) - (-2.0f64).exp()).abs() < 1e-15);
    assert!((gauss(3, QueryRole::Entity) - (-8.0f64).exp()).abs() < 1e-15);
    assert!((gauss(3, QueryRole::Predicate) - (-2.0f64).exp()).abs() < 1e-15);
    assert_eq!(kernel_value(5, QueryRole::Entity, &p, KernelKind::LinearIdentity), 5.0);
    assert_eq!(kernel_value(5, QueryRole::Entity, &p, KernelKind::Off), 1.0);
}

#[test]
fn softmax_and_renormalize_examples() {
    let x = Tensor::matrix(1, 2, vec![1.0, 2.0]).unwrap();
    let s = softmax_rows(&x, &Tensor::zeros(&[1, 2])).unwrap();
    let e = std::f64::consts::E;
    assert!((s.at(0, 0) - 1.0 / (1.0 + e)).abs() < 1e-15);
    assert!((s.at(0, 1) - e / (1.0 + e)).abs() < 1e-15);
    let r = renormalize_rows(&Tensor::matrix(2, 3, vec![1.0, 1.0, 2.0, 0.0, 0.0, 0.0]).unwrap()).unwrap();
    assert_eq!(r.data(), &[0.25, 0.25, 0.5, 0.0, 0.0, 0.0]);
}

#[test]
fn toy_corpus_statistics() {
    let lex = Lexicon::default();
    let docs: Vec<_> = TOY_CORPUS.iter().map(|(id, text)| parse_templated(id, text, &lex).unwrap()).collect();
    let out = extract_pseudo_graphs(&docs, &FilterConfig::toy(), &lex).unwrap();
    let counts = |pairs: &[(&str, u64)]| pairs.iter().map(|&(k, v)| (k.to_string(), v)).collect::<BTreeMap<_, _>>();
    assert_eq!(out.stats.graphs, 5);
    assert_eq!(out.stats.entity_counts, counts(&[("dog", 2), ("horse", 2), ("man", 2), ("rope", 2)]));
    assert_eq!(out.stats.predicate_counts, counts(&[("chase", 2), ("hold", 3), ("ride", 2)]));
    assert_eq!(out.stats.top_verbs(3), vec![("hold".to_string(), 3), ("chase".to_string(), 2), ("ride".to_string(), 2)]);
}

fn arb_graph() -> impl Strategy<Value = SceneGraph> {
    (2usize..8, 1usize..6)
        .prop_flat_map(|(e, p)| {
            let triplet = (0..e, 0..p, 1..e).prop_map(move |(s, pr, off)| (s, pr, (s + off) % e));
            (Just(e), Just(p), prop::collection::vec(triplet, 0..10))
        })
        .prop_map(|(e, p, ts)| graph(e, p, &ts))
}

proptest! {
    #[test]
    fn distance_matrix_shape_rules(g in arb_graph(), text in prop::collection::vec(0usize..9, 0..4)) {
        let seq = TokenSequence::build(&text, &g);
        let d = compute_distance_matrix(&seq, &add_skip_edges(&g), None).unwrap();
        let tokens = seq.tokens();
        for i in 0..seq.len() {
            for j in 0..seq.len() {
                prop_assert_eq!(d.get(i, j), d.get(j, i));
                prop_assert!(d.get(i, j) >= 1);
                if i == j || tokens[i].node().is_none() || tokens[j].node().is_none() {
                    prop_assert_eq!(d.get(i, j), 1);
                }
            }
        }
    }

    #[test]
    fn masking_never_hits_a_triplet_twice(g in arb_graph(), task in 0usize..3, seed in any::<u64>()) {
        let plan = plan_masks(&g, MaskTask::ALL[task], 0.3, seed).unwrap();
        prop_assert!(plan.len() <= plan.target_count);
        for t in g.triplets() {
            let hits = t.nodes().iter().filter(|n| plan.masked_node_ids.contains(n)).count();
            prop_assert!(hits <= 1);
        }
    }
}
