use serde::{Deserialize, Serialize};

use scenegraph_core::graph::{BBox, EntityNode, PredicateNode, Role, RoleEdge, SceneGraph, Triplet};
use scenegraph_core::weaksg::{Lexicon, PseudoGraph};

use crate::error::{Result, ToolError};

pub const SCENE_GRAPH_FORMAT: &str = "scene-graph";
pub const SCENE_GRAPH_VERSION: u32 = 1;

/// One scene graph per document. Visual graphs carry classes, boxes and
/// features; graphs distilled from text carry labels and explicit role
/// edges instead.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneGraphFile {
    pub format: String,
    pub version: u32,
    pub id: String,
    pub entities: Vec<EntityRecord>,
    pub predicates: Vec<PredicateRecord>,
    pub triplets: Vec<TripletRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edges: Option<Vec<EdgeRecord>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntityRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bbox: Option<[f64; 4]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub feature: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PredicateRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub union_bbox: Option<[f64; 4]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub feature: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TripletRecord {
    pub s: usize,
    pub p: usize,
    pub o: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RoleName {
    Subject,
    Object,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeRecord {
    pub p: usize,
    pub e: usize,
    pub role: RoleName,
}

fn missing(id: &str, what: &str, i: usize, field: &str) -> ToolError {
    ToolError::Format(format!("scene graph {id}: {what} {i} has no `{field}`"))
}

impl SceneGraphFile {
    /// Visual graph; `lexicon` adds the class names as labels.
    pub fn from_scene_graph(id: &str, g: &SceneGraph, lexicon: Option<&Lexicon>) -> Self {
        let entities = g
            .entities()
            .iter()
            .map(|e| EntityRecord {
                class: Some(e.class_id),
                label: lexicon.and_then(|l| l.nouns.get(e.class_id)).map(|n| n.lemma.clone()),
                bbox: Some(e.bbox.0),
                feature: Some(e.feature.clone()),
            })
            .collect();
        let predicates = g
            .predicates()
            .iter()
            .map(|p| PredicateRecord {
                class: Some(p.class_id),
                label: lexicon.and_then(|l| l.verbs.get(p.class_id)).map(|v| v.lemma.clone()),
                union_bbox: Some(p.union_bbox.0),
                feature: Some(p.feature.clone()),
            })
            .collect();
        SceneGraphFile {
            format: SCENE_GRAPH_FORMAT.to_string(),
            version: SCENE_GRAPH_VERSION,
            id: id.to_string(),
            entities,
            predicates,
            triplets: g.triplets().iter().map(|t| TripletRecord { s: t.subject, p: t.predicate, o: t.object }).collect(),
            edges: None,
        }
    }

    /// Label-only graph with explicit role edges.
    pub fn from_pseudo_graph(g: &PseudoGraph) -> Self {
        let label = |l: &String| Some(l.clone());
        SceneGraphFile {
            format: SCENE_GRAPH_FORMAT.to_string(),
            version: SCENE_GRAPH_VERSION,
            id: g.id.clone(),
            entities: g.entities.iter().map(|l| EntityRecord { class: None, label: label(l), bbox: None, feature: None }).collect(),
            predicates: g
                .predicates
                .iter()
                .map(|l| PredicateRecord { class: None, label: label(l), union_bbox: None, feature: None })
                .collect(),
            triplets: g.triplets.iter().map(|t| TripletRecord { s: t.subject, p: t.predicate, o: t.object }).collect(),
            edges: Some(
                g.edges
                    .iter()
                    .map(|e| EdgeRecord {
                        p: e.predicate,
                        e: e.entity,
                        role: match e.role {
                            Role::Subject => RoleName::Subject,
                            Role::Object => RoleName::Object,
                        },
                    })
                    .collect(),
            ),
        }
    }

    fn check_header(&self) -> Result<()> {
        if self.format != SCENE_GRAPH_FORMAT || self.version != SCENE_GRAPH_VERSION {
            return Err(ToolError::Format(format!(
                "scene graph {}: expected format `{SCENE_GRAPH_FORMAT}` version {SCENE_GRAPH_VERSION}, got `{}` version {}",
                self.id, self.format, self.version
            )));
        }
        Ok(())
    }

    /// Validated visual graph. Every node needs a class, a box and a feature.
    pub fn to_scene_graph(&self) -> Result<SceneGraph> {
        self.check_header()?;
        let id = &self.id;
        let entities = self
            .entities
            .iter()
            .enumerate()
            .map(|(i, e)| {
                Ok(EntityNode {
                    class_id: e.class.ok_or_else(|| missing(id, "entity", i, "class"))?,
                    bbox: BBox(e.bbox.ok_or_else(|| missing(id, "entity", i, "bbox"))?),
                    feature: e.feature.clone().ok_or_else(|| missing(id, "entity", i, "feature"))?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let predicates = self
            .predicates
            .iter()
            .enumerate()
            .map(|(i, p)| {
                Ok(PredicateNode {
                    class_id: p.class.ok_or_else(|| missing(id, "predicate", i, "class"))?,
                    union_bbox: BBox(p.union_bbox.ok_or_else(|| missing(id, "predicate", i, "union_bbox"))?),
                    feature: p.feature.clone().ok_or_else(|| missing(id, "predicate", i, "feature"))?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let triplets = self.triplets.iter().map(|t| Triplet::new(t.s, t.p, t.o)).collect();
        Ok(SceneGraph::new(entities, predicates, triplets)?)
    }

    /// Validated label graph. Every node needs a label and the edge list
    /// must be present.
    pub fn to_pseudo_graph(&self) -> Result<PseudoGraph> {
        self.check_header()?;
        let id = &self.id;
        let entities = self
            .entities
            .iter()
            .enumerate()
            .map(|(i, e)| e.label.clone().ok_or_else(|| missing(id, "entity", i, "label")))
            .collect::<Result<Vec<_>>>()?;
        let predicates = self
            .predicates
            .iter()
            .enumerate()
            .map(|(i, p)| p.label.clone().ok_or_else(|| missing(id, "predicate", i, "label")))
            .collect::<Result<Vec<_>>>()?;
        let edges = self
            .edges
            .as_ref()
            .ok_or_else(|| ToolError::Format(format!("scene graph {id}: label graphs need `edges`")))?
            .iter()
            .map(|e| RoleEdge {
                predicate: e.p,
                entity: e.e,
                role: match e.role {
                    RoleName::Subject => Role::Subject,
                    RoleName::Object => Role::Object,
                },
            })
            .collect();
        let g = PseudoGraph {
            id: id.clone(),
            entities,
            predicates,
            edges,
            triplets: self.triplets.iter().map(|t| Triplet::new(t.s, t.p, t.o)).collect(),
        };
        g.validate()?;
        Ok(g)
    }
}
