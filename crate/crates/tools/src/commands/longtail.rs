use scenegraph_core::harness::{run_longtail_study, ClassProfile, LongTailConfig, LossKind};

use super::RunContext;
use crate::error::{config_err, Result};
use crate::formats::{fmt_f64, Table};

/// Linear-probe loss study on a long-tailed synthetic class profile.
pub fn longtail(mut ctx: RunContext) -> Result<()> {
    let s = &mut ctx.settings;
    let d = LongTailConfig::default();
    let profile = match s.get("profile", "exponential".to_string())?.as_str() {
        "exponential" => ClassProfile::Exponential { ratio: s.get("ratio", 100.0)? },
        "balanced" => ClassProfile::Balanced,
        other => return Err(config_err!("unknown profile `{other}` (expected exponential or balanced)")),
    };
    let cfg = LongTailConfig {
        classes: s.get("classes", d.classes)?,
        profile,
        head_count: s.get("head_count", d.head_count)?,
        test_per_class: s.get("test_per_class", d.test_per_class)?,
        feature_dim: s.get("feature_dim", d.feature_dim)?,
        class_separation: s.get("class_separation", d.class_separation)?,
        gamma: s.get("gamma", d.gamma)?,
        beta: s.get("beta", d.beta)?,
        epochs: s.get("epochs", d.epochs)?,
        learning_rate: s.get("lr", d.learning_rate)?,
        tail_classes: s.get("tail_classes", d.tail_classes)?,
    };
    let losses: Vec<LossKind> = s
        .get_list("losses", &LossKind::ALL.map(|k| k.to_string()))?
        .iter()
        .map(|k| k.parse().map_err(|e| config_err!("`losses`: {e}")))
        .collect::<Result<_>>()?;
    let n_seeds = s.get("seeds", 5u64)?;
    s.finish()?;
    let seeds: Vec<u64> = (0..n_seeds).map(|k| ctx.seed + k).collect();
    let table = run_longtail_study(&cfg, &losses, &seeds)?;

    let mut summary = Table::new(["loss", "gamma", "tail_recall_mean", "tail_recall_std", "distinct_predicted_mean", "accuracy_mean"]);
    for r in &table.rows {
        summary.push([
            r.loss.to_string(),
            fmt_f64(r.gamma),
            fmt_f64(r.tail_recall_mean),
            fmt_f64(r.tail_recall_std),
            fmt_f64(r.distinct_predicted_mean),
            fmt_f64(r.accuracy_mean),
        ]);
    }
    let mut recall = Table::new(["loss", "class", "train_count", "tail", "weight", "mean_recall"]);
    for r in &table.rows {
        for (c, &count) in table.class_counts.iter().enumerate() {
            let weight = r.class_weights.as_ref().map_or(1.0, |w| w[c]);
            recall.push([
                r.loss.to_string(),
                c.to_string(),
                count.to_string(),
                table.tail.contains(&c).to_string(),
                fmt_f64(weight),
                fmt_f64(r.mean_recall[c]),
            ]);
        }
    }
    ctx.write_table("table.tsv", &summary)?;
    ctx.write_table("recall.tsv", &recall)?;
    ctx.finish()
}
