use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::vocab::CaptionVocab;
use crate::error::{bail, Error, Result};
use crate::graph::{BBox, EntityNode, PredicateNode, SceneGraph, Triplet};
use crate::rng::{mix, rng_from, Rng as ChaRng};
use crate::weaksg::{Gender, Lexicon, PRONOUNS};

/// Most entities per graph.
pub const MAX_ENTITIES: usize = 36;
/// Most predicates per graph.
pub const MAX_PREDICATES: usize = 18;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LabelRule {
    Random,
    /// Predicate class is a fixed symmetric function of the endpoint classes.
    NeighborDetermined,
}

impl LabelRule {
    pub fn as_str(self) -> &'static str {
        match self {
            LabelRule::Random => "random",
            LabelRule::NeighborDetermined => "neighbor",
        }
    }
}

impl FromStr for LabelRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(LabelRule::Random),
            "neighbor" | "neighbor_determined" => Ok(LabelRule::NeighborDetermined),
            other => bail!(Parse, "unknown label rule {:?}", other),
        }
    }
}

impl fmt::Display for LabelRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaptionTemplates {
    /// One `the <s> is <verb> the <o> .` sentence per triplet.
    Plain,
    /// As `Plain`, but a repeated subject becomes a pronoun when the
    /// pronoun would resolve to it.
    Pronouns,
}

impl CaptionTemplates {
    pub fn as_str(self) -> &'static str {
        match self {
            CaptionTemplates::Plain => "plain",
            CaptionTemplates::Pronouns => "pronouns",
        }
    }
}

impl fmt::Display for CaptionTemplates {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CaptionTemplates {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plain" => Ok(CaptionTemplates::Plain),
            "pronouns" => Ok(CaptionTemplates::Pronouns),
            other => bail!(Parse, "unknown caption template set {:?}", other),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticConfig {
    pub samples: usize,
    pub entity_class_count: usize,
    pub predicate_class_count: usize,
    /// Inclusive range.
    pub entities_per_graph: (usize, usize),
    /// Inclusive range.
    pub predicates_per_graph: (usize, usize),
    pub caption_templates: CaptionTemplates,
    /// Upper bound on caption sentences.
    pub max_caption_sentences: usize,
    pub label_rule: LabelRule,
    pub feature_dim: usize,
    /// Per-coordinate variance of the features around their class mean.
    pub feature_variance: f64,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            samples: 500,
            entity_class_count: 12,
            predicate_class_count: 8,
            entities_per_graph: (3, 8),
            predicates_per_graph: (2, 6),
            caption_templates: CaptionTemplates::Pronouns,
            max_caption_sentences: 3,
            label_rule: LabelRule::NeighborDetermined,
            feature_dim: 16,
            feature_variance: 0.1,
            seed: 0,
        }
    }
}

impl SyntheticConfig {
    pub fn validate(&self, lexicon: &Lexicon) -> Result<()> {
        let (e0, e1) = self.entities_per_graph;
        let (p0, p1) = self.predicates_per_graph;
        if e0 > e1 || p0 > p1 {
            bail!(Config, "empty per-graph range: entities {:?}, predicates {:?}", self.entities_per_graph, self.predicates_per_graph);
        }
        if e0 < 2 {
            bail!(Config, "graphs need at least 2 entities to form a triplet");
        }
        if e1 > MAX_ENTITIES || p1 > MAX_PREDICATES {
            bail!(Config, "at most {} entities and {} predicates per graph", MAX_ENTITIES, MAX_PREDICATES);
        }
        if self.entity_class_count < 2 || self.entity_class_count > lexicon.nouns.len() {
            bail!(Config, "entity class count must lie in [2, {}]", lexicon.nouns.len());
        }
        if self.predicate_class_count < 2 || self.predicate_class_count > lexicon.verbs.len() {
            bail!(Config, "predicate class count must lie in [2, {}]", lexicon.verbs.len());
        }
        if self.feature_dim == 0 || !(self.feature_variance >= 0.0) {
            bail!(Config, "feature dimension must be positive and variance >= 0");
        }
        Ok(())
    }
}

/// Symmetric lookup from an unordered pair of entity classes to a
/// predicate class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NeighborTable {
    classes: usize,
    table: Vec<usize>,
}

impl NeighborTable {
    pub fn random(entity_classes: usize, predicate_classes: usize, seed: u64) -> Self {
        let mut rng = rng_from(seed);
        let mut table = alloc::vec![0; entity_classes * entity_classes];
        for a in 0..entity_classes {
            for b in a..entity_classes {
                let p = rng.random_range(0..predicate_classes);
                table[a * entity_classes + b] = p;
                table[b * entity_classes + a] = p;
            }
        }
        NeighborTable { classes: entity_classes, table }
    }

    pub fn get(&self, subject_class: usize, object_class: usize) -> usize {
        self.table[subject_class * self.classes + object_class]
    }
}

/// Class means shared by every sample drawn from the same seed.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticWorld {
    pub entity_means: Vec<Vec<f64>>,
    pub predicate_means: Vec<Vec<f64>>,
    pub table: NeighborTable,
}

const WORLD_STREAM: u64 = 0x574f_524c;

impl SyntheticWorld {
    pub fn new(cfg: &SyntheticConfig) -> Self {
        let mut rng = rng_from(mix(cfg.seed, WORLD_STREAM));
        let unit = Normal::new(0.0, 1.0).expect("unit normal");
        let mut means = |k: usize| -> Vec<Vec<f64>> {
            (0..k).map(|_| (0..cfg.feature_dim).map(|_| unit.sample(&mut rng)).collect()).collect()
        };
        let entity_means = means(cfg.entity_class_count);
        let predicate_means = means(cfg.predicate_class_count);
        let table = NeighborTable::random(cfg.entity_class_count, cfg.predicate_class_count, mix(cfg.seed, WORLD_STREAM + 1));
        SyntheticWorld { entity_means, predicate_means, table }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSample {
    pub graph: SceneGraph,
    pub caption: String,
    pub tokens: Vec<usize>,
}

fn noisy(mean: &[f64], std: f64, rng: &mut ChaRng) -> Vec<f64> {
    if std == 0.0 {
        return mean.to_vec();
    }
    let noise = Normal::new(0.0, std).expect("finite std");
    mean.iter().map(|m| m + noise.sample(rng)).collect()
}

fn random_box(rng: &mut ChaRng) -> BBox {
    let w = rng.random_range(0.1..0.4);
    let h = rng.random_range(0.1..0.4);
    let x = rng.random_range(0.0..1.0 - w);
    let y = rng.random_range(0.0..1.0 - h);
    BBox([x, y, x + w, y + h])
}

/// Draws one graph: entities with class-conditioned features and boxes,
/// and predicates wired to distinct entity pairs.
pub fn generate_graph(cfg: &SyntheticConfig, world: &SyntheticWorld, rng: &mut ChaRng) -> Result<SceneGraph> {
    let std = libm::sqrt(cfg.feature_variance);
    let n_ent = rng.random_range(cfg.entities_per_graph.0..=cfg.entities_per_graph.1);
    let n_pred = rng.random_range(cfg.predicates_per_graph.0..=cfg.predicates_per_graph.1);
    let entities: Vec<EntityNode> = (0..n_ent)
        .map(|_| {
            let class_id = rng.random_range(0..cfg.entity_class_count);
            let bbox = random_box(rng);
            EntityNode { class_id, bbox, feature: noisy(&world.entity_means[class_id], std, rng) }
        })
        .collect();
    let mut predicates = Vec::with_capacity(n_pred);
    let mut triplets = Vec::with_capacity(n_pred);
    for p in 0..n_pred {
        let s = rng.random_range(0..n_ent);
        let mut o = rng.random_range(0..n_ent - 1);
        if o >= s {
            o += 1;
        }
        let class_id = match cfg.label_rule {
            LabelRule::Random => rng.random_range(0..cfg.predicate_class_count),
            LabelRule::NeighborDetermined => world.table.get(entities[s].class_id, entities[o].class_id),
        };
        predicates.push(PredicateNode {
            class_id,
            union_bbox: entities[s].bbox.union(&entities[o].bbox),
            feature: noisy(&world.predicate_means[class_id], std, rng),
        });
        triplets.push(Triplet::new(s, p, o));
    }
    SceneGraph::new(entities, predicates, triplets)
}

/// Renders captions naming the graph's labels, one sentence per triplet
/// in triplet order.
pub fn render_caption(g: &SceneGraph, cfg: &SyntheticConfig, lexicon: &Lexicon) -> String {
    let mut sentences: Vec<String> = Vec::new();
    // (entity index, gender) of every noun mentioned so far
    let mut mentions: Vec<(usize, Gender)> = Vec::new();
    let mut previous_subject = None;
    for t in g.triplets().iter().take(cfg.max_caption_sentences) {
        let noun = |e: usize| &lexicon.nouns[g.entities()[e].class_id];
        let verb = &lexicon.verbs[g.predicates()[t.predicate].class_id].progressive;
        let (s, o) = (noun(t.subject), noun(t.object));
        let pronoun = (cfg.caption_templates == CaptionTemplates::Pronouns && previous_subject == Some(t.subject))
            .then(|| {
                let resolves = mentions.iter().rev().find(|(_, g)| *g == s.gender).map(|(e, _)| *e) == Some(t.subject);
                resolves.then(|| PRONOUNS.iter().find(|(_, g)| *g == s.gender).map(|(p, _)| *p)).flatten()
            })
            .flatten();
        let subject = match pronoun {
            Some(p) => String::from(p),
            None => {
                mentions.push((t.subject, s.gender));
                alloc::format!("the {}", s.lemma)
            }
        };
        mentions.push((t.object, o.gender));
        sentences.push(alloc::format!("{} is {} the {} .", subject, verb, o.lemma));
        previous_subject = Some(t.subject);
    }
    sentences.join(" ")
}

/// Deterministic corpus of graphs with captions.
pub fn generate_corpus(cfg: &SyntheticConfig) -> Result<Vec<SyntheticSample>> {
    let lexicon = Lexicon::default();
    cfg.validate(&lexicon)?;
    let vocab = CaptionVocab::new(&lexicon);
    let world = SyntheticWorld::new(cfg);
    (0..cfg.samples)
        .map(|i| {
            let mut rng = rng_from(mix(cfg.seed, i as u64));
            let graph = generate_graph(cfg, &world, &mut rng)?;
            let caption = render_caption(&graph, cfg, &lexicon);
            let tokens = vocab.encode(&caption)?;
            Ok(SyntheticSample { graph, caption, tokens })
        })
        .collect()
}
