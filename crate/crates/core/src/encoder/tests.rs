use alloc::vec;
use alloc::vec::Vec;

use proptest::prelude::*;
use rand::Rng;

use super::*;
use crate::graph::test_support::random_graph;
use crate::graph::{add_skip_edges, graph_diameter_visual, DistanceMatrix, QueryRole, SceneGraph, TokenSequence};
use crate::numerics::{finite_difference_check_with, GradCheckOptions, ParamStore, Tape, Tensor};
use crate::rng::rng_from;

fn small_embedding(dim: usize) -> EmbeddingConfig {
    EmbeddingConfig { hidden_dim: 8, text_vocab_size: 12, visual_feature_dim: dim, max_text_positions: 8, ..EmbeddingConfig::default() }
}

/// Conventional multi-head attention written with plain loops.
fn reference_attention(store: &ParamStore, params: &AttentionParams, x: &Tensor) -> Tensor {
    let n = x.rows();
    let mut concat: Vec<Vec<f64>> = vec![Vec::new(); n];
    for head in &params.heads {
        let proj = |w, b| {
            let w: &Tensor = store.value(w);
            let b: &Tensor = store.value(b);
            let mut out = vec![vec![0.0; w.cols()]; n];
            for i in 0..n {
                for c in 0..w.cols() {
                    let mut acc = b.data()[c];
                    for r in 0..w.rows() {
                        acc += x.at(i, r) * w.at(r, c);
                    }
                    out[i][c] = acc;
                }
            }
            out
        };
        let (q, k, v) = (proj(head.wq, head.bq), proj(head.wk, head.bk), proj(head.wv, head.bv));
        let dk = q[0].len() as f64;
        for i in 0..n {
            let logits: Vec<f64> = (0..n).map(|j| q[i].iter().zip(&k[j]).map(|(a, b)| a * b).sum::<f64>() / libm::sqrt(dk)).collect();
            let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let exps: Vec<f64> = logits.iter().map(|l| libm::exp(l - max)).collect();
            let z: f64 = exps.iter().sum();
            for c in 0..v[0].len() {
                concat[i].push((0..n).map(|j| exps[j] / z * v[j][c]).sum());
            }
        }
    }
    let wo = store.value(params.wo);
    let bo = store.value(params.bo);
    let mut out = Tensor::zeros(&[n, wo.cols()]);
    for i in 0..n {
        for c in 0..wo.cols() {
            let mut acc = bo.data()[c];
            for r in 0..wo.rows() {
                acc += concat[i][r] * wo.at(r, c);
            }
            out.set(i, c, acc);
        }
    }
    out
}

fn max_rel_diff(a: &Tensor, b: &Tensor) -> f64 {
    a.data()
        .iter()
        .zip(b.data())
        .map(|(x, y)| (x - y).abs() / x.abs().max(y.abs()).max(1e-300))
        .fold(0.0, f64::max)
}

fn attention_case(seed: u64, kernel: KernelKind, clique_only: bool) -> (Tensor, Tensor) {
    let mut rng = rng_from(seed);
    let g = if clique_only {
        crate::graph::test_support::toy_graph(4, 0, &[])
    } else {
        random_graph(&mut rng, 6, 4, 3)
    };
    let eg = add_skip_edges(&g);
    let seq = TokenSequence::build(&[1, 2, 3], &g);
    let d = crate::graph::compute_distance_matrix(&seq, &eg, None).unwrap();
    let diameter = graph_diameter_visual(&eg).max(1);
    let hop = if clique_only { 1 } else { diameter };
    let mut store = ParamStore::new();
    let cfg = EncoderConfig { layers: 1, heads: 2, kernel, hop_limit: Some(hop), ..EncoderConfig::default() };
    let enc = Encoder::new(&mut store, small_embedding(3), cfg, seed).unwrap();
    let params = &enc.layers[0].attention;
    for head in &params.heads {
        let raw: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..1.0)).collect();
        store.value_mut(head.kernel).data_mut().copy_from_slice(&raw);
    }
    let n = seq.len();
    let x = Tensor::matrix(n, 8, (0..n * 8).map(|_| rng.random_range(-2.0..2.0)).collect()).unwrap();
    // isolated nodes stay masked at any hop limit, so compare on the
    // fully reachable structure only
    let reachable = !d.as_slice().contains(&d.unreachable());
    let ctx = AttentionContext::new(d, seq.roles(), if reachable { Some(hop) } else { None }).unwrap();
    let mut tape = Tape::new(&store);
    let input = tape.constant(x.clone());
    let out = multihop_attention(&mut tape, input, &ctx, params, kernel).unwrap();
    (tape.value(out.output).clone(), reference_attention(&store, params, &x))
}

#[test]
fn kernel_off_matches_conventional_attention() {
    for seed in 0..50 {
        let (ours, reference) = attention_case(seed, KernelKind::Off, false);
        assert!(max_rel_diff(&ours, &reference) < 1e-10, "seed {seed}");
    }
}

#[test]
fn clique_distances_make_kernel_inert() {
    for kind in [KernelKind::RationalQuadratic, KernelKind::Gaussian] {
        for seed in 0..10 {
            let (ours, reference) = attention_case(seed, kind, true);
            assert!(max_rel_diff(&ours, &reference) < 1e-10, "{kind} seed {seed}");
        }
    }
}

#[test]
fn three_token_rescaling_example() {
    // uniform A (zero query/key weights), identity values and output
    let d = DistanceMatrix::from_rows(3, vec![1, 1, 2, 1, 1, 1, 2, 1, 1], 4).unwrap();
    let ctx = AttentionContext::new(d, vec![QueryRole::Entity; 3], Some(3)).unwrap();
    let mut store = ParamStore::new();
    let z = |s: &mut ParamStore, r, c| s.add("z", Tensor::zeros(&[r, c]));
    let head = HeadParams {
        wq: z(&mut store, 3, 3),
        bq: z(&mut store, 1, 3),
        wk: z(&mut store, 3, 3),
        bk: z(&mut store, 1, 3),
        wv: store.add("wv", Tensor::identity(3)),
        bv: z(&mut store, 1, 3),
        kernel: z(&mut store, 1, 4),
    };
    let params = AttentionParams { heads: vec![head], wo: store.add("wo", Tensor::identity(3)), bo: z(&mut store, 1, 3) };
    let mut tape = Tape::new(&store);
    let x = tape.constant(Tensor::identity(3));
    let out = multihop_attention(&mut tape, x, &ctx, &params, KernelKind::RationalQuadratic).unwrap();
    let row0 = tape.value(out.output).row(0).to_vec();
    let expected = [0.375, 0.375, 0.25];
    for (a, b) in row0.iter().zip(expected) {
        assert!((a - b).abs() < 1e-15, "{row0:?}");
    }
    let a = tape.value(out.weights[0]);
    for r in 0..3 {
        assert!((a.row(r).iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}

fn sample_graph() -> SceneGraph {
    // three entities, two predicates, and a chain so some distances are 2 and 3
    crate::graph::test_support::toy_graph(3, 2, &[(0, 0, 1), (1, 1, 2)])
}

#[test]
fn zero_layers_return_embeddings() {
    let g = sample_graph();
    let seq = TokenSequence::build(&[4, 5], &g);
    let mut store = ParamStore::new();
    let cfg = EncoderConfig { layers: 0, ..EncoderConfig::default() };
    let enc = Encoder::new(&mut store, small_embedding(2), EncoderConfig { heads: 2, ..cfg }, 3).unwrap();
    let out = encoder_forward(&seq, &g, &enc, &store).unwrap();
    let emb = embed_tokens(&seq, &g, &enc.embedding_config, &store, &enc.embedding).unwrap();
    assert_eq!(out, emb);
}

#[test]
fn forward_is_bitwise_deterministic() {
    let g = sample_graph();
    let seq = TokenSequence::build(&[4, 5], &g);
    let run = || {
        let mut store = ParamStore::new();
        let enc = Encoder::new(&mut store, small_embedding(2), EncoderConfig { heads: 2, ..EncoderConfig::default() }, 11).unwrap();
        encoder_forward(&seq, &g, &enc, &store).unwrap()
    };
    let (a, b) = (run(), run());
    assert!(a.data().iter().zip(b.data()).all(|(x, y)| x.to_bits() == y.to_bits()));
}

fn pooled_loss_check(seed: u64, kernel: KernelKind, share: bool) {
    let mut rng = rng_from(seed);
    let g = random_graph(&mut rng, 4, 3, 2);
    let seq = TokenSequence::build(&[1, 7], &g);
    let mut store = ParamStore::new();
    let cfg = EncoderConfig { layers: 2, heads: 2, kernel, hop_limit: Some(3), ff_dim: Some(12), share_kernels: share };
    let enc = Encoder::new(&mut store, small_embedding(2), cfg, seed).unwrap();
    for l in &enc.layers {
        for h in &l.attention.heads {
            let raw: Vec<f64> = (0..4).map(|_| rng.random_range(-0.5..0.5)).collect();
            store.value_mut(h.kernel).data_mut().copy_from_slice(&raw);
        }
    }
    let inputs = enc.inputs(&seq, &g).unwrap();
    let ctx = enc.context(&seq, &g).unwrap();
    let probe = Tensor::matrix(1, 8, (0..8).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap();
    let opts = GradCheckOptions { max_coords_per_param: Some(6), seed, ..GradCheckOptions::default() };
    let report = finite_difference_check_with(
        &mut store,
        |t| {
            let trace = enc.forward(t, &inputs, &ctx)?;
            let n = t.value(trace.hidden).rows();
            let pool = t.constant(Tensor::filled(&[1, n], 1.0 / n as f64));
            let pooled = t.matmul(pool, trace.hidden)?;
            let p = t.constant(probe.clone());
            let weighted = t.mul(pooled, p)?;
            Ok(t.sum(weighted))
        },
        &opts,
    )
    .unwrap();
    assert!(report.passed, "seed {seed} {kernel}: {report}");
}

#[test]
fn encoder_gradients_pass_finite_differences() {
    for seed in 0..10 {
        pooled_loss_check(seed, KernelKind::RationalQuadratic, false);
    }
    pooled_loss_check(20, KernelKind::Gaussian, false);
    pooled_loss_check(21, KernelKind::LinearIdentity, false);
    pooled_loss_check(22, KernelKind::RationalQuadratic, true);
}

#[test]
fn kernel_parameters_receive_gradient() {
    let g = sample_graph();
    let seq = TokenSequence::build(&[], &g);
    let mut store = ParamStore::new();
    let cfg = EncoderConfig { layers: 1, heads: 2, ..EncoderConfig::default() };
    let enc = Encoder::new(&mut store, small_embedding(2), cfg, 5).unwrap();
    let inputs = enc.inputs(&seq, &g).unwrap();
    let ctx = enc.context(&seq, &g).unwrap();
    assert!(ctx.distances.as_slice().contains(&2));
    let mut tape = Tape::new(&store);
    let trace = enc.forward(&mut tape, &inputs, &ctx).unwrap();
    let visual = tape.select_rows(trace.hidden, vec![2, 3, 4, 5, 6]).unwrap();
    let sq = tape.mul(visual, visual).unwrap();
    let loss = tape.sum(sq);
    let grads = tape.backward(loss).unwrap();
    for head in &enc.layers[0].attention.heads {
        let g = grads.get(head.kernel).unwrap();
        assert!(g.data().iter().any(|v| v.abs() > 1e-12), "{:?}", g.data());
    }
}

#[test]
fn invalid_configs_rejected() {
    let mut store = ParamStore::new();
    let bad_heads = EncoderConfig { heads: 3, ..EncoderConfig::default() };
    assert!(Encoder::new(&mut store, small_embedding(2), bad_heads, 0).is_err());
    let bad_hops = EncoderConfig { hop_limit: Some(0), ..EncoderConfig::default() };
    assert!(Encoder::new(&mut store, small_embedding(2), bad_hops, 0).is_err());
}

#[test]
fn kernel_peak_and_monotone_on_grid() {
    for kind in [KernelKind::RationalQuadratic, KernelKind::Gaussian] {
        for a in [0.1, 0.5, 1.0, 2.0, 10.0] {
            for l in [0.5, 1.0, 3.0, 8.0] {
                let p = KernelParams { alpha_o: a, l_o: l, alpha_p: a, l_p: l };
                for role in [QueryRole::Entity, QueryRole::Predicate] {
                    assert!((kernel_value(1, role, &p, kind) - 1.0).abs() < 1e-12);
                    for d in 1..10 {
                        assert!(kernel_value(d + 1, role, &p, kind) < kernel_value(d, role, &p, kind));
                    }
                }
            }
        }
    }
}

proptest! {
    #[test]
    fn larger_hop_limit_never_masks_more(seed in 0u64..500, h in 1u32..6) {
        let mut rng = rng_from(seed);
        let g = random_graph(&mut rng, 7, 5, 1);
        let seq = TokenSequence::build(&[0], &g);
        let d = crate::graph::compute_distance_matrix(&seq, &add_skip_edges(&g), None).unwrap();
        let (m1, m2) = (hop_mask(&d, h), hop_mask(&d, h + 1));
        for (a, b) in m1.data().iter().zip(m2.data()) {
            // zero in mask(h) implies zero in mask(h + 1)
            prop_assert!(*a != 0.0 || *b == 0.0);
        }
    }

    #[test]
    fn rescaled_rows_sum_to_one(seed in 0u64..200) {
        let mut rng = rng_from(seed);
        let g = random_graph(&mut rng, 6, 4, 3);
        let seq = TokenSequence::build(&[1], &g);
        let mut store = ParamStore::new();
        let cfg = EncoderConfig { layers: 1, heads: 2, hop_limit: Some(2), ..EncoderConfig::default() };
        let enc = Encoder::new(&mut store, small_embedding(3), cfg, seed).unwrap();
        let inputs = enc.inputs(&seq, &g).unwrap();
        let ctx = enc.context(&seq, &g).unwrap();
        let mut tape = Tape::new(&store);
        let trace = enc.forward(&mut tape, &inputs, &ctx).unwrap();
        for &w in &trace.attention[0] {
            let a = tape.value(w);
            for r in 0..a.rows() {
                prop_assert!((a.row(r).iter().sum::<f64>() - 1.0).abs() < 1e-9);
            }
        }
    }
}
