use std::path::Path;

use scenegraph_core::graph::SceneGraph;
use scenegraph_core::harness::{generate_corpus, CaptionVocab, SyntheticConfig};
use scenegraph_core::rng::mix;
use scenegraph_core::weaksg::Lexicon;

use super::{data_config, RunContext, DATA_STREAM};
use crate::error::{Result, ToolError};
use crate::formats::{read_json, SceneGraphFile, Table};

/// Writes a synthetic corpus: one scene-graph file per sample plus a
/// caption table.
pub fn gen_data(mut ctx: RunContext) -> Result<()> {
    let cfg = data_config(&mut ctx.settings, mix(ctx.seed, DATA_STREAM), SyntheticConfig::default())?;
    ctx.settings.finish()?;
    let lexicon = Lexicon::default();
    let corpus = generate_corpus(&cfg)?;
    let mut captions = Table::new(["id", "caption"]);
    for (i, sample) in corpus.iter().enumerate() {
        let id = format!("sample_{i:05}");
        ctx.write_json(&format!("graphs/{id}.json"), &SceneGraphFile::from_scene_graph(&id, &sample.graph, Some(&lexicon)))?;
        captions.push([id, sample.caption.clone()]);
    }
    ctx.write_table("captions.tsv", &captions)?;
    log::info!("wrote {} samples to {}", corpus.len(), ctx.out.display());
    ctx.finish()
}

/// Graphs and encoded captions of a `gen-data` output directory, in
/// caption-table order.
pub fn load_generated(dir: &Path) -> Result<Vec<(SceneGraph, Vec<usize>)>> {
    let vocab = CaptionVocab::default();
    let table = Table::read(&dir.join("captions.tsv"))?;
    if table.header != ["id", "caption"] {
        return Err(ToolError::Format(format!("{}: expected columns id, caption", dir.join("captions.tsv").display())));
    }
    table
        .rows
        .iter()
        .map(|row| {
            let file: SceneGraphFile = read_json(&dir.join("graphs").join(format!("{}.json", row[0])))?;
            Ok((file.to_scene_graph()?, vocab.encode(&row[1])?))
        })
        .collect()
}
