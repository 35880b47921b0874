use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::seq::SliceRandom;
use rand_distr::{Distribution, Normal};

use super::stats::mean_std;
use crate::error::{bail, Error, Result};
use crate::numerics::{class_balanced_weights, ParamStore, Tape, Tensor};
use crate::pretrain::argmax_row;
use crate::rng::{mix, rng_from};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LossKind {
    CrossEntropy,
    Focal,
    CrossEntropyCb,
    FocalCb,
}

impl LossKind {
    pub const ALL: [LossKind; 4] = [LossKind::CrossEntropy, LossKind::Focal, LossKind::CrossEntropyCb, LossKind::FocalCb];

    pub fn as_str(self) -> &'static str {
        match self {
            LossKind::CrossEntropy => "ce",
            LossKind::Focal => "focal",
            LossKind::CrossEntropyCb => "ce+cb",
            LossKind::FocalCb => "focal+cb",
        }
    }

    pub fn is_focal(self) -> bool {
        matches!(self, LossKind::Focal | LossKind::FocalCb)
    }

    pub fn is_class_balanced(self) -> bool {
        matches!(self, LossKind::CrossEntropyCb | LossKind::FocalCb)
    }
}

impl fmt::Display for LossKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LossKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        LossKind::ALL.into_iter().find(|k| k.as_str() == s).ok_or_else(|| Error::Parse(alloc::format!("unknown loss {:?}", s)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ClassProfile {
    /// Counts fall geometrically from the head class to the tail class,
    /// `head / tail = ratio`.
    Exponential { ratio: f64 },
    Balanced,
}

impl fmt::Display for ClassProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClassProfile::Exponential { .. } => f.write_str("exponential"),
            ClassProfile::Balanced => f.write_str("balanced"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LongTailConfig {
    pub classes: usize,
    pub profile: ClassProfile,
    /// Training samples of the most frequent class.
    pub head_count: usize,
    pub test_per_class: usize,
    pub feature_dim: usize,
    /// Standard deviation of the class means around the origin; the
    /// within-class noise has unit variance.
    pub class_separation: f64,
    pub gamma: f64,
    pub beta: f64,
    pub epochs: usize,
    pub learning_rate: f64,
    /// Number of lowest-count classes averaged into the tail recall.
    pub tail_classes: usize,
}

impl Default for LongTailConfig {
    fn default() -> Self {
        LongTailConfig {
            classes: 10,
            profile: ClassProfile::Exponential { ratio: 100.0 },
            head_count: 500,
            test_per_class: 100,
            feature_dim: 8,
            class_separation: 1.0,
            gamma: 2.0,
            beta: 0.999,
            epochs: 200,
            learning_rate: 0.5,
            tail_classes: 3,
        }
    }
}

impl LongTailConfig {
    pub fn validate(&self) -> Result<()> {
        if self.classes < 2 || self.tail_classes == 0 || self.tail_classes > self.classes {
            bail!(Config, "need >= 2 classes and 1..=classes tail classes");
        }
        if let ClassProfile::Exponential { ratio } = self.profile {
            if !(ratio >= 1.0) {
                bail!(Config, "imbalance ratio must be >= 1, got {}", ratio);
            }
        }
        if self.head_count == 0 || self.test_per_class == 0 || self.feature_dim == 0 || self.epochs == 0 {
            bail!(Config, "counts, dimension and epochs must be positive");
        }
        Ok(())
    }

    /// Training samples per class; at least one each.
    pub fn class_counts(&self) -> Vec<u64> {
        (0..self.classes)
            .map(|c| match self.profile {
                ClassProfile::Balanced => self.head_count as u64,
                ClassProfile::Exponential { ratio } => {
                    let t = c as f64 / (self.classes - 1) as f64;
                    let n = self.head_count as f64 * libm::pow(ratio, -t);
                    (libm::round(n) as u64).max(1)
                }
            })
            .collect()
    }
}

/// Features and labels of one split.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledFeatures {
    pub features: Tensor,
    pub labels: Vec<usize>,
}

/// Train split following the class profile and a balanced test split.
pub fn longtail_data(cfg: &LongTailConfig, seed: u64) -> Result<(LabeledFeatures, LabeledFeatures)> {
    cfg.validate()?;
    let mut rng = rng_from(mix(seed, 0));
    let spread = Normal::new(0.0, cfg.class_separation).map_err(|_| Error::Config("class separation must be finite and >= 0".into()))?;
    let noise = Normal::new(0.0, 1.0).expect("unit normal");
    let means: Vec<Vec<f64>> = (0..cfg.classes).map(|_| (0..cfg.feature_dim).map(|_| spread.sample(&mut rng)).collect()).collect();
    let split = |counts: &[u64], rng: &mut crate::rng::Rng| {
        let mut rows: Vec<(usize, Vec<f64>)> = Vec::new();
        for (c, &n) in counts.iter().enumerate() {
            for _ in 0..n {
                rows.push((c, means[c].iter().map(|m| m + noise.sample(rng)).collect()));
            }
        }
        rows.shuffle(rng);
        let labels = rows.iter().map(|r| r.0).collect();
        let data = rows.into_iter().flat_map(|r| r.1).collect::<Vec<f64>>();
        let n = data.len() / cfg.feature_dim;
        LabeledFeatures { features: Tensor::matrix(n, cfg.feature_dim, data).expect("consistent shape"), labels }
    };
    let train = split(&cfg.class_counts(), &mut rng);
    let test = split(&vec![cfg.test_per_class as u64; cfg.classes], &mut rng);
    Ok((train, test))
}

/// Focusing parameter and class weights that a loss kind trains with.
pub fn loss_settings(cfg: &LongTailConfig, kind: LossKind) -> Result<(f64, Option<Vec<f64>>)> {
    let gamma = if kind.is_focal() { cfg.gamma } else { 0.0 };
    let weights = if kind.is_class_balanced() {
        Some(class_balanced_weights(&cfg.class_counts(), cfg.beta)?.data().to_vec())
    } else {
        None
    };
    Ok((gamma, weights))
}

/// Full-batch gradient descent on a linear softmax classifier. Returns
/// the weight and bias matrices.
pub fn train_linear_probe(
    train: &LabeledFeatures,
    classes: usize,
    gamma: f64,
    weights: Option<Vec<f64>>,
    epochs: usize,
    learning_rate: f64,
) -> Result<(Tensor, Tensor)> {
    let d = train.features.cols();
    let mut store = ParamStore::new();
    let w = store.add("probe.weight", Tensor::zeros(&[d, classes]));
    let b = store.add("probe.bias", Tensor::zeros(&[1, classes]));
    for _ in 0..epochs {
        let grads = {
            let mut tape = Tape::new(&store);
            let x = tape.constant(train.features.clone());
            let (wn, bn) = (tape.param(w), tape.param(b));
            let logits = tape.linear(x, wn, Some(bn))?;
            let loss = tape.focal_cross_entropy(logits, train.labels.clone(), gamma, weights.clone())?;
            tape.backward(loss)?
        };
        store.zero_grad();
        store.accumulate(&grads);
        for p in store.iter_mut() {
            for (v, g) in p.value.data_mut().iter_mut().zip(p.grad.data()) {
                *v -= learning_rate * g;
            }
        }
    }
    Ok((store.value(w).clone(), store.value(b).clone()))
}

pub fn predict_linear(features: &Tensor, weight: &Tensor, bias: &Tensor) -> Vec<usize> {
    let logits = features.matmul(weight).expect("matching dims");
    (0..logits.rows())
        .map(|r| {
            let row: Vec<f64> = logits.row(r).iter().zip(bias.data()).map(|(a, b)| a + b).collect();
            argmax_row(&row)
        })
        .collect()
}

/// Recall per class of `predicted` against `labels`.
pub fn per_class_recall(labels: &[usize], predicted: &[usize], classes: usize) -> Vec<f64> {
    let mut hit = vec![0usize; classes];
    let mut total = vec![0usize; classes];
    for (&l, &p) in labels.iter().zip(predicted) {
        total[l] += 1;
        hit[l] += (l == p) as usize;
    }
    hit.iter().zip(&total).map(|(&h, &t)| if t == 0 { f64::NAN } else { h as f64 / t as f64 }).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct LongTailRun {
    pub seed: u64,
    pub per_class_recall: Vec<f64>,
    pub tail_recall: f64,
    pub distinct_predicted: usize,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LongTailRow {
    pub loss: LossKind,
    pub gamma: f64,
    /// Class weights the runs trained with.
    pub class_weights: Option<Vec<f64>>,
    pub runs: Vec<LongTailRun>,
    /// Per-class recall averaged over seeds.
    pub mean_recall: Vec<f64>,
    pub tail_recall_mean: f64,
    pub tail_recall_std: f64,
    pub distinct_predicted_mean: f64,
    pub accuracy_mean: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LongTailTable {
    pub class_counts: Vec<u64>,
    /// Indices of the classes averaged into the tail recall.
    pub tail: Vec<usize>,
    pub rows: Vec<LongTailRow>,
}

impl LongTailTable {
    pub fn row(&self, loss: LossKind) -> Option<&LongTailRow> {
        self.rows.iter().find(|r| r.loss == loss)
    }
}

/// Trains one linear probe per loss and seed on the same data per seed.
pub fn run_longtail_study(cfg: &LongTailConfig, losses: &[LossKind], seeds: &[u64]) -> Result<LongTailTable> {
    cfg.validate()?;
    let counts = cfg.class_counts();
    let mut order: Vec<usize> = (0..cfg.classes).collect();
    order.sort_by_key(|&c| (counts[c], usize::MAX - c));
    let mut tail: Vec<usize> = order[..cfg.tail_classes].to_vec();
    tail.sort_unstable();
    let data: Vec<_> = seeds.iter().map(|&s| longtail_data(cfg, s)).collect::<Result<_>>()?;
    let mut rows = Vec::with_capacity(losses.len());
    for &loss in losses {
        let (gamma, weights) = loss_settings(cfg, loss)?;
        let mut runs = Vec::with_capacity(seeds.len());
        for (&seed, (train, test)) in seeds.iter().zip(&data) {
            let (w, b) = train_linear_probe(train, cfg.classes, gamma, weights.clone(), cfg.epochs, cfg.learning_rate)?;
            let predicted = predict_linear(&test.features, &w, &b);
            let recall = per_class_recall(&test.labels, &predicted, cfg.classes);
            let tail_recall = tail.iter().map(|&c| recall[c]).sum::<f64>() / tail.len() as f64;
            let mut seen = vec![false; cfg.classes];
            for &p in &predicted {
                seen[p] = true;
            }
            let accuracy = test.labels.iter().zip(&predicted).filter(|(l, p)| l == p).count() as f64 / test.labels.len() as f64;
            runs.push(LongTailRun {
                seed,
                per_class_recall: recall,
                tail_recall,
                distinct_predicted: seen.iter().filter(|&&s| s).count(),
                accuracy,
            });
        }
        let mean_recall = (0..cfg.classes).map(|c| mean_std(&runs.iter().map(|r| r.per_class_recall[c]).collect::<Vec<_>>()).0).collect();
        let (tail_recall_mean, tail_recall_std) = mean_std(&runs.iter().map(|r| r.tail_recall).collect::<Vec<_>>());
        let distinct_predicted_mean = mean_std(&runs.iter().map(|r| r.distinct_predicted as f64).collect::<Vec<_>>()).0;
        let accuracy_mean = mean_std(&runs.iter().map(|r| r.accuracy).collect::<Vec<_>>()).0;
        rows.push(LongTailRow {
            loss,
            gamma,
            class_weights: weights,
            runs,
            mean_recall,
            tail_recall_mean,
            tail_recall_std,
            distinct_predicted_mean,
            accuracy_mean,
        });
    }
    Ok(LongTailTable { class_counts: counts, tail, rows })
}
