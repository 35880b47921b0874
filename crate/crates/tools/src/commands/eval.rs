use scenegraph_core::harness::{choice_accuracy, evaluate_relational};
use scenegraph_core::pretrain::{evaluate_mnm, MaskTask};

use super::pretrain::pretrain_setup;
use super::train::{choice_setup, relational_setup, summary_table, task, Task};
use super::{PreviousRun, RunContext};
use crate::error::{config_err, Result};

/// Re-scores a finished `pretrain` or `train` run on its own data.
pub fn eval(mut ctx: RunContext) -> Result<()> {
    let dir = ctx.settings.get_path("run").ok_or_else(|| config_err!("eval needs `run` (a pretrain or train output directory)"))?;
    ctx.settings.finish()?;
    let run = PreviousRun::open(&dir)?;
    let checkpoint = run.checkpoint()?;
    let PreviousRun { manifest, mut settings, .. } = run;
    let seed = manifest.seed;
    let rows: Vec<(&str, f64)> = match manifest.command.as_str() {
        "pretrain" => {
            let mut setup = pretrain_setup(&mut settings, seed)?;
            checkpoint.restore(&mut setup.store, true)?;
            let m = evaluate_mnm(&setup.store, &setup.model, &setup.heldout, &setup.config, seed)?;
            let mut rows = vec![("l_mnm", m.l_mnm), ("l_sbj", m.l_sbj), ("l_obj", m.l_obj), ("l_rel", m.l_rel)];
            for (name, t) in [("acc_sbj", MaskTask::Sbj), ("acc_obj", MaskTask::Obj), ("acc_rel", MaskTask::Rel)] {
                rows.push((name, m.accuracy(t).unwrap_or(f64::NAN)));
            }
            rows
        }
        "train" => match task(&mut settings)? {
            Task::Relational => {
                settings.get_path("init");
                let mut setup = relational_setup(&mut settings, seed)?;
                checkpoint.restore(&mut setup.store, true)?;
                vec![
                    ("train_accuracy", evaluate_relational(&mut setup.store, &setup.model, &setup.train)?),
                    ("validation_accuracy", evaluate_relational(&mut setup.store, &setup.model, &setup.validation)?),
                ]
            }
            Task::Choice => {
                settings.get_path("init");
                let mut setup = choice_setup(&mut settings, seed)?;
                checkpoint.restore(&mut setup.store, true)?;
                vec![
                    ("train_accuracy", choice_accuracy(&setup.store, &setup.scorer, &setup.train)?),
                    ("test_accuracy", choice_accuracy(&setup.store, &setup.scorer, &setup.test)?),
                ]
            }
        },
        other => return Err(config_err!("{}: cannot evaluate a `{other}` run", dir.display())),
    };
    ctx.write_table("eval.tsv", &summary_table(&rows))?;
    ctx.finish()
}
