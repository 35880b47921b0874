use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::lexicon::{is_pronoun, Lexicon};
use super::srl::{Span, SrlDocument};
use crate::error::{bail, Result};
use crate::graph::{Role, RoleEdge, Triplet};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FilterConfig {
    pub allowed_roles: BTreeSet<String>,
    /// Labels seen fewer times than this across the corpus are removed.
    pub min_frequency: u64,
    pub verb_stoplist: BTreeSet<String>,
    pub top_k_verbs_reviewed: usize,
}

impl Default for FilterConfig {
    fn default() -> Self {
        FilterConfig {
            allowed_roles: ["V", "ARG0", "ARG1", "ARG2"].iter().map(|r| r.to_string()).collect(),
            min_frequency: 100,
            verb_stoplist: BTreeSet::new(),
            top_k_verbs_reviewed: 20,
        }
    }
}

impl FilterConfig {
    /// Settings for small corpora: threshold 2 and a stoplist of
    /// possession and usage verbs.
    pub fn toy() -> Self {
        FilterConfig {
            min_frequency: 2,
            verb_stoplist: ["be", "have", "use"].iter().map(|r| r.to_string()).collect(),
            ..FilterConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.allowed_roles.contains("V") {
            bail!(Config, "allowed roles must include V");
        }
        Ok(())
    }
}

/// Rewrites every argument that refers to a clustered mention into the
/// cluster's first non-pronoun mention.
pub fn merge_coreferent(doc: &SrlDocument) -> SrlDocument {
    let mut canonical: BTreeMap<Span, Span> = BTreeMap::new();
    for cluster in &doc.coref_clusters {
        let mut ordered = cluster.clone();
        ordered.sort();
        match ordered.iter().find(|s| !is_pronoun(doc.head(s))) {
            Some(&head) => {
                for s in &ordered {
                    canonical.insert(*s, head);
                }
            }
            None => log::warn!("document {}: cluster {:?} has only pronouns, left unmerged", doc.id, ordered),
        }
    }
    let mut out = doc.clone();
    for frame in &mut out.frames {
        for (role, span) in frame.arguments.iter_mut() {
            if role == "V" {
                continue;
            }
            // an argument refers to a mention that ends it (prepositional
            // arguments start with the preposition)
            let hit = canonical
                .iter()
                .find(|(m, _)| m.sentence == span.sentence && m.end == span.end && m.start >= span.start);
            if let Some((_, head)) = hit {
                *span = *head;
            }
        }
    }
    out
}

/// Drops arguments whose role is not allowed, then frames left with only `V`.
pub fn filter_roles(doc: &SrlDocument, cfg: &FilterConfig) -> SrlDocument {
    let mut out = doc.clone();
    for frame in &mut out.frames {
        frame.arguments.retain(|role, _| cfg.allowed_roles.contains(role));
    }
    out.frames.retain(|f| f.arguments.keys().any(|r| r != "V"));
    out
}

/// Label-typed scene graph distilled from text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PseudoGraph {
    pub id: String,
    /// Canonical lemma of each entity.
    pub entities: Vec<String>,
    /// Verb lemma of each predicate.
    pub predicates: Vec<String>,
    pub edges: Vec<RoleEdge>,
    pub triplets: Vec<Triplet>,
}

impl PseudoGraph {
    pub fn is_empty(&self) -> bool {
        self.predicates.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        for e in &self.edges {
            if e.entity >= self.entities.len() || e.predicate >= self.predicates.len() {
                bail!(Validation, "graph {}: edge {:?} out of range", self.id, e);
            }
        }
        for t in &self.triplets {
            if t.subject >= self.entities.len() || t.object >= self.entities.len() || t.predicate >= self.predicates.len() {
                bail!(Validation, "graph {}: triplet {:?} out of range", self.id, t);
            }
        }
        for p in 0..self.predicates.len() {
            if !self.edges.iter().any(|e| e.predicate == p) {
                bail!(Validation, "graph {}: predicate {} has no argument", self.id, p);
            }
        }
        for label in self.entities.iter().chain(&self.predicates) {
            if label.is_empty() || label.chars().any(|c| c.is_uppercase()) {
                bail!(Validation, "graph {}: label {:?} is not a lowercase lemma", self.id, label);
            }
        }
        Ok(())
    }

    /// Keeps the selected nodes, then removes predicates without arguments
    /// and entities without edges. Indices are compacted in order.
    fn retain(&self, keep_entity: impl Fn(&str) -> bool, keep_predicate: impl Fn(&str) -> bool) -> PseudoGraph {
        let ent_ok: Vec<bool> = self.entities.iter().map(|l| keep_entity(l)).collect();
        let pred_ok: Vec<bool> = self.predicates.iter().map(|l| keep_predicate(l)).collect();
        let edges: Vec<RoleEdge> = self.edges.iter().copied().filter(|e| ent_ok[e.entity] && pred_ok[e.predicate]).collect();
        let pred_live: Vec<bool> = (0..self.predicates.len()).map(|p| edges.iter().any(|e| e.predicate == p)).collect();
        let ent_live: Vec<bool> = (0..self.entities.len())
            .map(|i| edges.iter().any(|e| e.entity == i && pred_live[e.predicate]))
            .collect();
        let remap = |live: &[bool]| {
            let mut next = 0;
            live.iter()
                .map(|&l| {
                    let idx = l.then_some(next);
                    next += l as usize;
                    idx
                })
                .collect::<Vec<Option<usize>>>()
        };
        let (ent_map, pred_map) = (remap(&ent_live), remap(&pred_live));
        let edges = edges
            .iter()
            .filter_map(|e| Some(RoleEdge { predicate: pred_map[e.predicate]?, entity: ent_map[e.entity]?, role: e.role }))
            .collect();
        let triplets = self
            .triplets
            .iter()
            .filter_map(|t| Some(Triplet::new(ent_map[t.subject]?, pred_map[t.predicate]?, ent_map[t.object]?)))
            .collect();
        let pick = |labels: &[String], live: &[bool]| labels.iter().zip(live).filter(|(_, &l)| l).map(|(s, _)| s.clone()).collect();
        PseudoGraph {
            id: self.id.clone(),
            entities: pick(&self.entities, &ent_live),
            predicates: pick(&self.predicates, &pred_live),
            edges,
            triplets,
        }
    }
}

/// One predicate per frame and one entity per distinct canonical lemma.
/// ARG0 links as subject, ARG1 and ARG2 as objects; triplets come only
/// from (ARG0, V, ARG1). Arguments still headed by a pronoun are skipped.
pub fn build_pseudo_graph(doc: &SrlDocument, lexicon: &Lexicon) -> PseudoGraph {
    let mut entities: Vec<String> = Vec::new();
    let mut predicates = Vec::new();
    let mut edges: BTreeSet<RoleEdge> = BTreeSet::new();
    let mut triplets = Vec::new();
    let mut entity_of = |label: String| match entities.iter().position(|e| *e == label) {
        Some(i) => i,
        None => {
            entities.push(label);
            entities.len() - 1
        }
    };
    for frame in &doc.frames {
        let mut args: Vec<(Role, usize, &str)> = Vec::new();
        for (role_name, role) in [("ARG0", Role::Subject), ("ARG1", Role::Object), ("ARG2", Role::Object)] {
            let Some(span) = frame.arguments.get(role_name) else { continue };
            let head = doc.head(span);
            if is_pronoun(head) {
                continue;
            }
            args.push((role, entity_of(lexicon.lemmatize(head)), role_name));
        }
        if args.is_empty() {
            continue;
        }
        let p = predicates.len();
        predicates.push(frame.verb_lemma.to_lowercase());
        for &(role, entity, _) in &args {
            edges.insert(RoleEdge { predicate: p, entity, role });
        }
        let find = |name: &str| args.iter().find(|a| a.2 == name).map(|a| a.1);
        if let (Some(s), Some(o)) = (find("ARG0"), find("ARG1")) {
            if s != o {
                triplets.push(Triplet::new(s, p, o));
            }
        }
    }
    let mut edges: Vec<RoleEdge> = edges.into_iter().collect();
    edges.sort_by_key(|e| (e.predicate, e.role, e.entity));
    PseudoGraph { id: doc.id.clone(), entities, predicates, edges, triplets }
}

/// Removes predicates whose verb is in the stoplist, cascading to orphaned
/// entities and then to graphs left without predicates.
pub fn filter_abstract_verbs(corpus: &[PseudoGraph], cfg: &FilterConfig) -> Vec<PseudoGraph> {
    corpus
        .iter()
        .map(|g| g.retain(|_| true, |v| !cfg.verb_stoplist.contains(v)))
        .filter(|g| !g.is_empty())
        .collect()
}

/// Label frequencies over a corpus. A label counts once per node.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CorpusStats {
    pub graphs: u64,
    pub triplets: u64,
    pub entity_counts: BTreeMap<String, u64>,
    pub predicate_counts: BTreeMap<String, u64>,
}

impl CorpusStats {
    pub fn distinct_entities(&self) -> usize {
        self.entity_counts.len()
    }

    pub fn distinct_predicates(&self) -> usize {
        self.predicate_counts.len()
    }

    /// The `k` most frequent verbs, ties broken alphabetically.
    pub fn top_verbs(&self, k: usize) -> Vec<(String, u64)> {
        let mut all: Vec<(String, u64)> = self.predicate_counts.iter().map(|(v, c)| (v.clone(), *c)).collect();
        all.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        all.truncate(k);
        all
    }
}

pub fn corpus_stats(corpus: &[PseudoGraph]) -> CorpusStats {
    let mut stats = CorpusStats::default();
    for g in corpus {
        stats.graphs += 1;
        stats.triplets += g.triplets.len() as u64;
        for e in &g.entities {
            *stats.entity_counts.entry(e.clone()).or_default() += 1;
        }
        for p in &g.predicates {
            *stats.predicate_counts.entry(p.clone()).or_default() += 1;
        }
    }
    stats
}

/// Drops labels seen fewer than `min_frequency` times, repeating until no
/// label falls below the threshold, and returns the statistics of the
/// surviving corpus.
pub fn filter_frequency(corpus: &[PseudoGraph], cfg: &FilterConfig) -> (Vec<PseudoGraph>, CorpusStats) {
    let mut current: Vec<PseudoGraph> = corpus.to_vec();
    loop {
        let stats = corpus_stats(&current);
        let min = cfg.min_frequency;
        let next: Vec<PseudoGraph> = current
            .iter()
            .map(|g| g.retain(|e| stats.entity_counts[e] >= min, |p| stats.predicate_counts[p] >= min))
            .filter(|g| !g.is_empty())
            .collect();
        if next == current {
            return (current, stats);
        }
        current = next;
    }
}

/// Result of the full text-to-graph pipeline.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Extraction {
    pub graphs: Vec<PseudoGraph>,
    pub stats: CorpusStats,
}

/// Merge, role filter, graph construction, stoplist and frequency filter.
pub fn extract_pseudo_graphs(docs: &[SrlDocument], cfg: &FilterConfig, lexicon: &Lexicon) -> Result<Extraction> {
    cfg.validate()?;
    let mut graphs = Vec::with_capacity(docs.len());
    for doc in docs {
        doc.validate()?;
        let merged = merge_coreferent(doc);
        let filtered = filter_roles(&merged, cfg);
        let g = build_pseudo_graph(&filtered, lexicon);
        if !g.is_empty() {
            graphs.push(g);
        }
    }
    let graphs = filter_abstract_verbs(&graphs, cfg);
    let (graphs, stats) = filter_frequency(&graphs, cfg);
    for g in &graphs {
        g.validate()?;
    }
    Ok(Extraction { graphs, stats })
}
