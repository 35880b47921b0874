use std::collections::BTreeSet;
use std::path::Path;

use scenegraph_core::weaksg::{extract_pseudo_graphs, FilterConfig, Lexicon, SrlDocument};

use super::RunContext;
use crate::error::{config_err, IoContext, Result};
use crate::formats::{read_json, stats_table, SceneGraphFile, SrlDocumentFile};

/// Every `*.json` document of `dir` in file-name order.
pub fn read_documents(dir: &Path) -> Result<Vec<SrlDocument>> {
    let mut paths: Vec<_> = std::fs::read_dir(dir)
        .at(dir)?
        .map(|e| e.map(|e| e.path()))
        .collect::<std::io::Result<_>>()
        .at(dir)?;
    paths.retain(|p| p.extension().is_some_and(|e| e == "json"));
    paths.sort();
    paths.iter().map(|p| read_json::<SrlDocumentFile>(p)?.to_document()).collect()
}

/// Pseudo scene graphs and corpus statistics from SRL documents.
pub fn extract_sg(mut ctx: RunContext) -> Result<()> {
    let s = &mut ctx.settings;
    let d = FilterConfig::default();
    let input = s.get_path("input").ok_or_else(|| config_err!("extract-sg needs `input` (a directory of SRL documents)"))?;
    let to_set = |v: Vec<String>| v.into_iter().collect::<BTreeSet<_>>();
    let cfg = FilterConfig {
        allowed_roles: to_set(s.get_list("roles", &d.allowed_roles.iter().cloned().collect::<Vec<_>>())?),
        min_frequency: s.get("min_frequency", d.min_frequency)?,
        verb_stoplist: to_set(s.get_list("stoplist", &d.verb_stoplist.iter().cloned().collect::<Vec<_>>())?),
        top_k_verbs_reviewed: s.get("top_k", d.top_k_verbs_reviewed)?,
    };
    s.finish()?;
    let docs = read_documents(&input)?;
    let out = extract_pseudo_graphs(&docs, &cfg, &Lexicon::default())?;
    for g in &out.graphs {
        ctx.write_json(&format!("graphs/{}.json", g.id), &SceneGraphFile::from_pseudo_graph(g))?;
    }
    ctx.write_table("stats.tsv", &stats_table(&out.stats, cfg.top_k_verbs_reviewed))?;
    log::info!("{} documents -> {} graphs", docs.len(), out.graphs.len());
    ctx.finish()
}
