use alloc::vec;
use alloc::vec::Vec;

use super::*;
use crate::encoder::{EmbeddingConfig, Encoder, EncoderConfig, KernelKind};
use crate::numerics::{class_balanced_weights, ParamStore};
use crate::rng::rng_from;
use crate::weaksg::{merge_coreferent, parse_templated, Lexicon};
use crate::Error;

fn small_synth(samples: usize, seed: u64) -> SyntheticConfig {
    SyntheticConfig { samples, seed, ..SyntheticConfig::default() }
}

#[test]
fn corpus_is_deterministic_per_seed() {
    let a = generate_corpus(&small_synth(40, 3)).unwrap();
    let b = generate_corpus(&small_synth(40, 3)).unwrap();
    let c = generate_corpus(&small_synth(40, 4)).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn neighbor_labels_are_recomputable_from_endpoints() {
    let cfg = small_synth(200, 11);
    let world = SyntheticWorld::new(&cfg);
    for s in generate_corpus(&cfg).unwrap() {
        let g = &s.graph;
        for t in g.triplets() {
            let expect = world.table.get(g.entities()[t.subject].class_id, g.entities()[t.object].class_id);
            assert_eq!(g.predicates()[t.predicate].class_id, expect);
        }
    }
}

#[test]
fn neighbor_table_is_symmetric() {
    let t = NeighborTable::random(12, 8, 5);
    for a in 0..12 {
        for b in 0..12 {
            assert_eq!(t.get(a, b), t.get(b, a));
            assert!(t.get(a, b) < 8);
        }
    }
}

#[test]
fn union_boxes_contain_both_endpoints() {
    for rule in [LabelRule::Random, LabelRule::NeighborDetermined] {
        let cfg = SyntheticConfig { label_rule: rule, ..small_synth(200, 2) };
        for s in generate_corpus(&cfg).unwrap() {
            let g = &s.graph;
            for t in g.triplets() {
                let u = &g.predicates()[t.predicate].union_bbox;
                assert!(u.contains(&g.entities()[t.subject].bbox));
                assert!(u.contains(&g.entities()[t.object].bbox));
            }
        }
    }
}

#[test]
fn graph_sizes_respect_ranges() {
    let cfg = small_synth(200, 9);
    for s in generate_corpus(&cfg).unwrap() {
        let (e, p) = (s.graph.entities().len(), s.graph.predicates().len());
        assert!((cfg.entities_per_graph.0..=cfg.entities_per_graph.1).contains(&e));
        assert!((cfg.predicates_per_graph.0..=cfg.predicates_per_graph.1).contains(&p));
        assert!(s.graph.triplets().iter().all(|t| t.subject != t.object));
    }
}

#[test]
fn invalid_synthetic_configs_are_rejected() {
    let lex = Lexicon::default();
    let bad = [
        SyntheticConfig { entities_per_graph: (4, 3), ..SyntheticConfig::default() },
        SyntheticConfig { entities_per_graph: (1, 1), ..SyntheticConfig::default() },
        SyntheticConfig { entities_per_graph: (3, MAX_ENTITIES + 1), ..SyntheticConfig::default() },
        SyntheticConfig { predicates_per_graph: (1, MAX_PREDICATES + 1), ..SyntheticConfig::default() },
        SyntheticConfig { entity_class_count: lex.nouns.len() + 1, ..SyntheticConfig::default() },
        SyntheticConfig { predicate_class_count: 1, ..SyntheticConfig::default() },
    ];
    for cfg in bad {
        assert!(matches!(cfg.validate(&lex), Err(Error::Config(_))), "{:?}", cfg);
        assert!(generate_corpus(&cfg).is_err());
    }
}

#[test]
fn captions_parse_back_to_the_graph_labels() {
    let lex = Lexicon::default();
    let cfg = small_synth(150, 21);
    let mut pronouns = 0;
    for (i, s) in generate_corpus(&cfg).unwrap().iter().enumerate() {
        let doc = parse_templated(&alloc::format!("s{i}"), &s.caption, &lex).unwrap();
        pronouns += doc.coref_clusters.len();
        let doc = merge_coreferent(&doc);
        let g = &s.graph;
        let expected: Vec<_> = g.triplets().iter().take(cfg.max_caption_sentences).collect();
        assert_eq!(doc.frames.len(), expected.len());
        for (frame, t) in doc.frames.iter().zip(expected) {
            assert_eq!(frame.verb_lemma, lex.verbs[g.predicates()[t.predicate].class_id].lemma);
            assert_eq!(doc.head(&frame.arguments["ARG0"]), lex.nouns[g.entities()[t.subject].class_id].lemma);
            assert_eq!(doc.head(&frame.arguments["ARG1"]), lex.nouns[g.entities()[t.object].class_id].lemma);
        }
    }
    assert!(pronouns > 0, "the pronoun templates were never exercised");
}

#[test]
fn vocab_round_trips_captions() {
    let vocab = CaptionVocab::default();
    assert_eq!(vocab.len(), 47);
    for s in generate_corpus(&small_synth(30, 1)).unwrap() {
        assert_eq!(vocab.decode(&s.tokens), s.caption);
    }
    assert!(matches!(vocab.encode("the zebra"), Err(Error::Validation(_))));
}

#[test]
fn mean_std_matches_hand_values() {
    let (m, s) = mean_std(&[1.0, 2.0, 3.0, 4.0]);
    assert_eq!(m, 2.5);
    assert!((s - libm::sqrt(5.0 / 3.0)).abs() < 1e-15);
    assert_eq!(mean_std(&[0.7]), (0.7, 0.0));
    assert!(mean_std(&[]).0.is_nan());
}

#[test]
fn longtail_profile_counts() {
    let cfg = LongTailConfig::default();
    assert_eq!(cfg.class_counts(), vec![500, 300, 180, 108, 65, 39, 23, 14, 8, 5]);
    let balanced = LongTailConfig { profile: ClassProfile::Balanced, ..cfg };
    assert_eq!(balanced.class_counts(), vec![500; 10]);
}

#[test]
fn class_balanced_settings_use_the_weight_function_exactly() {
    let cfg = LongTailConfig::default();
    let expect = class_balanced_weights(&cfg.class_counts(), cfg.beta).unwrap();
    for kind in [LossKind::CrossEntropyCb, LossKind::FocalCb] {
        let (_, w) = loss_settings(&cfg, kind).unwrap();
        assert_eq!(w.as_deref(), Some(expect.data()));
    }
    assert_eq!(loss_settings(&cfg, LossKind::CrossEntropy).unwrap(), (0.0, None));
    assert_eq!(loss_settings(&cfg, LossKind::Focal).unwrap(), (cfg.gamma, None));
}

#[test]
fn zero_gamma_zero_beta_training_reduces_to_cross_entropy() {
    let cfg = LongTailConfig { gamma: 0.0, beta: 0.0, epochs: 30, ..LongTailConfig::default() };
    let (train, _) = longtail_data(&cfg, 4).unwrap();
    let (gamma, weights) = loss_settings(&cfg, LossKind::FocalCb).unwrap();
    let (w_cb, b_cb) = train_linear_probe(&train, cfg.classes, gamma, weights, cfg.epochs, cfg.learning_rate).unwrap();
    let (w_ce, b_ce) = train_linear_probe(&train, cfg.classes, 0.0, None, cfg.epochs, cfg.learning_rate).unwrap();
    let diff = w_cb.data().iter().chain(b_cb.data()).zip(w_ce.data().iter().chain(b_ce.data())).map(|(a, b)| (a - b).abs());
    assert!(diff.fold(0.0, f64::max) <= 1e-12);
}

#[test]
fn balanced_profile_puts_all_losses_within_noise() {
    let cfg = LongTailConfig { profile: ClassProfile::Balanced, head_count: 200, epochs: 100, ..LongTailConfig::default() };
    let table = run_longtail_study(&cfg, &[LossKind::CrossEntropy, LossKind::Focal, LossKind::CrossEntropyCb, LossKind::FocalCb], &[0, 1]).unwrap();
    let acc: Vec<f64> = table.rows.iter().map(|r| r.accuracy_mean).collect();
    let spread = acc.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - acc.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(spread < 0.03, "accuracies {:?}", acc);
    // equal counts give unit weights, so class balancing is a no-op
    assert_eq!(table.rows[0].runs, table.rows[2].runs);
}

#[test]
fn tail_classes_are_the_rarest() {
    let cfg = LongTailConfig { epochs: 1, ..LongTailConfig::default() };
    let table = run_longtail_study(&cfg, &[LossKind::CrossEntropy], &[0]).unwrap();
    assert_eq!(table.tail, vec![7, 8, 9]);
}

fn tiny_scorer(store: &mut ParamStore) -> ChoiceScorer {
    let emb = EmbeddingConfig { hidden_dim: 8, ..EmbeddingConfig::default() };
    let enc = EncoderConfig { heads: 2, ff_dim: Some(12), ..EncoderConfig::default() };
    ChoiceScorer::new(store, emb, enc, 3).unwrap()
}

#[test]
fn choice_samples_name_the_gold_predicate() {
    let lex = Lexicon::default();
    let vocab = CaptionVocab::default();
    let cfg = choice_data_config(60, 5);
    for s in generate_choice_samples(&cfg).unwrap() {
        s.validate().unwrap();
        let g = &s.graph;
        let gold_verb = vocab.id(&lex.verbs[g.predicates()[g.triplets()[0].predicate].class_id].progressive).unwrap();
        assert_eq!(s.candidates[s.gold][0], gold_verb);
        for (i, c) in s.candidates.iter().enumerate() {
            let present = g.predicates().iter().any(|p| vocab.id(&lex.verbs[p.class_id].progressive) == Some(c[0]));
            assert_eq!(present, i == s.gold);
        }
    }
}

#[test]
fn identical_candidates_score_uniformly() {
    let mut store = ParamStore::new();
    let scorer = tiny_scorer(&mut store);
    let mut s = generate_choice_samples(&choice_data_config(1, 0)).unwrap().remove(0);
    s.candidates = vec![s.candidates[0].clone(); CHOICES];
    assert_eq!(score_choices(&store, &scorer, &s).unwrap(), [0.25; CHOICES]);
}

#[test]
fn choice_probabilities_sum_to_one() {
    let mut store = ParamStore::new();
    let scorer = tiny_scorer(&mut store);
    for s in generate_choice_samples(&choice_data_config(10, 1)).unwrap() {
        let p = score_choices(&store, &scorer, &s).unwrap();
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn wrong_candidate_count_is_rejected() {
    let mut store = ParamStore::new();
    let scorer = tiny_scorer(&mut store);
    let mut s = generate_choice_samples(&choice_data_config(1, 0)).unwrap().remove(0);
    s.candidates.pop();
    assert!(matches!(score_choices(&store, &scorer, &s), Err(Error::Validation(_))));
}

#[test]
fn choice_data_rejects_too_few_distractor_classes() {
    let cfg = SyntheticConfig { predicates_per_graph: (2, 6), ..choice_data_config(5, 0) };
    assert!(matches!(generate_choice_samples(&cfg), Err(Error::Config(_))));
}

#[test]
fn grid_mirrors_hops_by_kernel_rows() {
    let grid = hop_kernel_grid();
    assert_eq!(grid.len(), 10);
    assert_eq!(grid[0], GridCell::baseline());
    for h in [1, 3, 6] {
        for k in [KernelKind::LinearIdentity, KernelKind::Gaussian, KernelKind::RationalQuadratic] {
            assert!(grid.contains(&GridCell { hop_limit: Some(h), kernel: k }));
        }
    }
}

#[test]
fn zero_hop_limit_is_rejected() {
    let cfg = RelationalConfig::default();
    let cell = GridCell { hop_limit: Some(0), kernel: KernelKind::RationalQuadratic };
    assert!(matches!(run_relational_task(&cfg, &[cell], &[0]), Err(Error::Config(_))));
}

#[test]
fn relational_task_requires_neighbor_labels() {
    let mut cfg = RelationalConfig::default();
    cfg.data.label_rule = LabelRule::Random;
    assert!(matches!(run_relational_task(&cfg, &[GridCell::baseline()], &[0]), Err(Error::Config(_))));
}

#[test]
fn relational_examples_mask_every_predicate() {
    let cfg = RelationalConfig::default();
    let mut store = ParamStore::new();
    let model = RelationalModel::new(&mut store, &cfg, GridCell::baseline(), 0).unwrap();
    let (train, _) = relational_data(&RelationalConfig { data: SyntheticConfig { samples: 8, ..cfg.data.clone() }, ..cfg.clone() }, 0).unwrap();
    for g in &train {
        let ex = relational_example(&model.encoder, g).unwrap();
        assert_eq!(ex.rows.len(), g.predicates().len());
        for &r in &ex.rows {
            assert_eq!(ex.inputs.predicate_content[r], None);
            assert!(ex.inputs.box_rows[r].is_some());
        }
    }
}

#[test]
fn larger_hop_limit_zeroes_a_subset_in_attention_dumps() {
    let emb = EmbeddingConfig { hidden_dim: 8, ..EmbeddingConfig::default() };
    let enc = |h| EncoderConfig { heads: 2, ff_dim: Some(12), hop_limit: Some(h), ..EncoderConfig::default() };
    let mut rng = rng_from(17);
    let cfg = small_synth(0, 0);
    let world = SyntheticWorld::new(&cfg);
    let mut strict = 0;
    for _ in 0..10 {
        let g = generate_graph(&cfg, &world, &mut rng).unwrap();
        for (lo, hi) in [(1, 2), (2, 3), (3, 6)] {
            let (mut s_lo, mut s_hi) = (ParamStore::new(), ParamStore::new());
            let e_lo = Encoder::new(&mut s_lo, emb.clone(), enc(lo), 1).unwrap();
            let e_hi = Encoder::new(&mut s_hi, emb.clone(), enc(hi), 1).unwrap();
            let a_lo = attention_maps(&s_lo, &e_lo, &g, &[0, 1]).unwrap();
            let a_hi = attention_maps(&s_hi, &e_hi, &g, &[0, 1]).unwrap();
            for (l_lo, l_hi) in a_lo.iter().zip(&a_hi) {
                for (m_lo, m_hi) in l_lo.iter().zip(l_hi) {
                    for (x_lo, x_hi) in m_lo.data().iter().zip(m_hi.data()) {
                        assert!(*x_hi != 0.0 || *x_lo == 0.0);
                        strict += (*x_lo == 0.0 && *x_hi != 0.0) as usize;
                    }
                }
            }
        }
    }
    assert!(strict > 0);
}

#[test]
fn relational_training_is_reproducible() {
    let mut cfg = RelationalConfig::default();
    cfg.data.samples = 24;
    cfg.optimizer.epochs = 2;
    cfg.optimizer.decay_epochs.clear();
    let cell = GridCell { hop_limit: Some(3), kernel: KernelKind::RationalQuadratic };
    let a = run_relational_task(&cfg, &[cell], &[0, 1]).unwrap();
    let b = run_relational_task(&cfg, &[cell], &[0, 1]).unwrap();
    assert_eq!(a, b);
    assert!(a.rows[0].accuracies.iter().all(|x| (0.0..=1.0).contains(x)));
}
