use scenegraph_core::encoder::Encoder;
use scenegraph_core::graph::{QueryRole, Token, TokenSequence};
use scenegraph_core::encoder::kernel_value;
use scenegraph_core::harness::{attention_maps, generate_corpus, CaptionVocab, SyntheticConfig};
use scenegraph_core::numerics::ParamStore;
use scenegraph_core::rng::mix;
use scenegraph_core::weaksg::Lexicon;

use super::pretrain::pretrain_setup;
use super::train::{choice_setup, relational_setup, task, Task};
use super::{data_config, model_config, PreviousRun, RunContext, DATA_STREAM, MODEL_STREAM};
use crate::error::{config_err, Result};
use crate::formats::{fmt_f64, Table};
use crate::settings::Settings;

/// The trained encoder of a `pretrain` or `train` run.
fn encoder_from_run(dir: &std::path::Path) -> Result<(Encoder, ParamStore)> {
    let run = PreviousRun::open(dir)?;
    let checkpoint = run.checkpoint()?;
    let PreviousRun { manifest, mut settings, .. } = run;
    let (encoder, mut store) = match manifest.command.as_str() {
        "pretrain" => {
            let setup = pretrain_setup(&mut settings, manifest.seed)?;
            (setup.model.encoder, setup.store)
        }
        "train" => {
            let t = task(&mut settings)?;
            settings.get_path("init");
            match t {
                Task::Relational => {
                    let setup = relational_setup(&mut settings, manifest.seed)?;
                    (setup.model.encoder, setup.store)
                }
                Task::Choice => {
                    let setup = choice_setup(&mut settings, manifest.seed)?;
                    (setup.scorer.encoder, setup.store)
                }
            }
        }
        other => return Err(config_err!("{}: a `{other}` run has no encoder", dir.display())),
    };
    checkpoint.restore(&mut store, true)?;
    Ok((encoder, store))
}

/// Encoder of `run` when given, otherwise freshly initialized from the
/// model keys and `seed`.
fn load_encoder(s: &mut Settings, seed: u64, data: &SyntheticConfig) -> Result<(Encoder, ParamStore)> {
    match s.get_path("run") {
        Some(dir) => encoder_from_run(&dir),
        None => {
            let (embedding, encoder) = model_config(s, data, 64, None)?;
            let mut store = ParamStore::new();
            let enc = Encoder::new(&mut store, embedding, encoder, mix(seed, MODEL_STREAM))?;
            Ok((enc, store))
        }
    }
}

/// Sampled kernel values per layer, head and query role.
pub fn dump_kernels(mut ctx: RunContext) -> Result<()> {
    let s = &mut ctx.settings;
    let data = data_config(s, mix(ctx.seed, DATA_STREAM), SyntheticConfig::default())?;
    let (encoder, store) = load_encoder(s, ctx.seed, &data)?;
    let max_d = s.get("max_distance", encoder.config.hop_limit.unwrap_or(6))?;
    s.finish()?;
    if max_d == 0 {
        return Err(config_err!("`max_distance` must be at least 1"));
    }
    let kind = encoder.config.kernel;
    let mut table = Table::new(
        ["layer", "head", "query", "kernel", "alpha", "l"].into_iter().map(String::from).chain((1..=max_d).map(|d| format!("f_{d}"))),
    );
    for layer in 0..encoder.layers.len() {
        for head in 0..encoder.config.heads {
            let params = encoder.kernel_params(&store, layer, head);
            for (name, role) in [("entity", QueryRole::Entity), ("predicate", QueryRole::Predicate)] {
                let (alpha, l) = params.for_role(role).expect("visual role");
                let mut row = vec![layer.to_string(), head.to_string(), name.to_string(), kind.to_string(), fmt_f64(alpha), fmt_f64(l)];
                row.extend((1..=max_d).map(|d| fmt_f64(kernel_value(d, role, &params, kind))));
                table.push(row);
            }
        }
    }
    ctx.write_table("kernels.tsv", &table)?;
    ctx.finish()
}

fn token_label(t: &Token, g: &scenegraph_core::graph::SceneGraph, vocab: &CaptionVocab, lexicon: &Lexicon) -> (String, String) {
    match *t {
        Token::Text(v) => ("text".into(), vocab.word(v).unwrap_or("<unk>").into()),
        Token::Special(sp) => ("special".into(), format!("{sp:?}").to_lowercase()),
        Token::Entity(i) => {
            let c = g.entities()[i].class_id;
            ("entity".into(), format!("{i}:{}", lexicon.nouns.get(c).map_or("?", |n| n.lemma.as_str())))
        }
        Token::Predicate(j) => {
            let c = g.predicates()[j].class_id;
            ("predicate".into(), format!("{j}:{}", lexicon.verbs.get(c).map_or("?", |v| v.lemma.as_str())))
        }
    }
}

/// Rescaled attention matrices of every layer and head for one sample.
pub fn dump_attention(mut ctx: RunContext) -> Result<()> {
    let s = &mut ctx.settings;
    let index = s.get("sample", 0usize)?;
    let with_text = s.get("text", true)?;
    let defaults = SyntheticConfig { samples: index + 1, ..SyntheticConfig::default() };
    let data = data_config(s, mix(ctx.seed, DATA_STREAM), defaults)?;
    let (encoder, store) = load_encoder(s, ctx.seed, &data)?;
    s.finish()?;
    if index >= data.samples {
        return Err(config_err!("sample {} is outside the {} generated samples", index, data.samples));
    }
    let sample = generate_corpus(&SyntheticConfig { samples: index + 1, ..data })?.swap_remove(index);
    let text = if with_text { sample.tokens.clone() } else { Vec::new() };
    let maps = attention_maps(&store, &encoder, &sample.graph, &text)?;

    let seq = TokenSequence::build(&text, &sample.graph);
    let (vocab, lexicon) = (CaptionVocab::default(), Lexicon::default());
    let mut tokens = Table::new(["index", "kind", "label"]);
    for (i, t) in seq.tokens().iter().enumerate() {
        let (kind, label) = token_label(t, &sample.graph, &vocab, &lexicon);
        tokens.push([i.to_string(), kind, label]);
    }
    let mut weights = Table::new(["layer", "head", "query", "key", "weight"]);
    for (l, heads) in maps.iter().enumerate() {
        for (h, m) in heads.iter().enumerate() {
            for q in 0..m.rows() {
                for (k, &w) in m.row(q).iter().enumerate() {
                    weights.push([l.to_string(), h.to_string(), q.to_string(), k.to_string(), fmt_f64(w)]);
                }
            }
        }
    }
    ctx.write_table("tokens.tsv", &tokens)?;
    ctx.write_table("attention.tsv", &weights)?;
    ctx.finish()
}
