//! Scene-graph data model.
//!
//! A scene graph is bipartite: entity (object) nodes on one side, predicate
//! (relation) nodes on the other. Every triplet `(subject, predicate, object)`
//! contributes a SUBJECT edge and an OBJECT edge between its predicate and
//! the two entities.

mod distance;
mod enhanced;
mod tokens;

use alloc::format;
use alloc::vec::Vec;

use crate::error::{bail, Result};

pub use distance::{compute_distance_matrix, graph_diameter_visual, DistanceMatrix};
pub use enhanced::{add_skip_edges, EnhancedGraph};
pub use tokens::{Modality, QueryRole, SpecialToken, Token, TokenSequence};

const BOX_TOLERANCE: f64 = 1e-9;

/// Normalized box `[x1, y1, x2, y2]` with `x1 <= x2`, `y1 <= y2`, all in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BBox(pub [f64; 4]);

impl BBox {
    pub fn new(x1: f64, y1: f64, x2: f64, y2: f64) -> Result<Self> {
        let b = BBox([x1, y1, x2, y2]);
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        let [x1, y1, x2, y2] = self.0;
        if self.0.iter().any(|v| !v.is_finite() || *v < 0.0 || *v > 1.0) {
            bail!(Validation, "box {:?} has coordinates outside [0, 1]", self.0);
        }
        if x1 > x2 || y1 > y2 {
            bail!(Validation, "box {:?} is not ordered (x1 <= x2, y1 <= y2)", self.0);
        }
        Ok(())
    }

    pub fn union(&self, other: &BBox) -> BBox {
        let [a1, b1, a2, b2] = self.0;
        let [c1, d1, c2, d2] = other.0;
        BBox([a1.min(c1), b1.min(d1), a2.max(c2), b2.max(d2)])
    }

    pub fn contains(&self, inner: &BBox) -> bool {
        let [a1, b1, a2, b2] = self.0;
        let [c1, d1, c2, d2] = inner.0;
        a1 <= c1 + BOX_TOLERANCE
            && b1 <= d1 + BOX_TOLERANCE
            && a2 + BOX_TOLERANCE >= c2
            && b2 + BOX_TOLERANCE >= d2
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntityNode {
    pub class_id: usize,
    pub bbox: BBox,
    pub feature: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PredicateNode {
    pub class_id: usize,
    pub union_bbox: BBox,
    pub feature: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Role {
    Subject,
    Object,
}

/// A graph node addressed by its role-local dense index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NodeRef {
    Entity(usize),
    Predicate(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Triplet {
    pub subject: usize,
    pub predicate: usize,
    pub object: usize,
}

impl Triplet {
    pub fn new(subject: usize, predicate: usize, object: usize) -> Self {
        Triplet { subject, predicate, object }
    }

    pub fn nodes(&self) -> [NodeRef; 3] {
        [
            NodeRef::Entity(self.subject),
            NodeRef::Predicate(self.predicate),
            NodeRef::Entity(self.object),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RoleEdge {
    pub predicate: usize,
    pub entity: usize,
    pub role: Role,
}

/// Validated bipartite scene graph. Edges are derived from the triplets.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneGraph {
    entities: Vec<EntityNode>,
    predicates: Vec<PredicateNode>,
    triplets: Vec<Triplet>,
    edges: Vec<RoleEdge>,
}

impl SceneGraph {
    pub fn new(
        entities: Vec<EntityNode>,
        predicates: Vec<PredicateNode>,
        triplets: Vec<Triplet>,
    ) -> Result<Self> {
        let feature_dim = entities
            .first()
            .map(|e| e.feature.len())
            .or_else(|| predicates.first().map(|p| p.feature.len()));
        for (i, e) in entities.iter().enumerate() {
            e.bbox.validate().map_err(|err| context(err, "entity", i))?;
            check_feature(&e.feature, feature_dim, "entity", i)?;
        }
        for (i, p) in predicates.iter().enumerate() {
            p.union_bbox.validate().map_err(|err| context(err, "predicate", i))?;
            check_feature(&p.feature, feature_dim, "predicate", i)?;
        }
        let mut edges = Vec::with_capacity(triplets.len() * 2);
        for t in &triplets {
            if t.subject >= entities.len() || t.object >= entities.len() {
                bail!(Validation, "triplet {:?} references a missing entity", t);
            }
            if t.predicate >= predicates.len() {
                bail!(Validation, "triplet {:?} references a missing predicate", t);
            }
            if t.subject == t.object {
                bail!(Validation, "triplet {:?} relates an entity to itself", t);
            }
            let union = &predicates[t.predicate].union_bbox;
            for endpoint in [t.subject, t.object] {
                if !union.contains(&entities[endpoint].bbox) {
                    bail!(
                        Validation,
                        "predicate {} union box does not contain entity {} box",
                        t.predicate,
                        endpoint
                    );
                }
            }
            edges.push(RoleEdge { predicate: t.predicate, entity: t.subject, role: Role::Subject });
            edges.push(RoleEdge { predicate: t.predicate, entity: t.object, role: Role::Object });
        }
        edges.sort_unstable();
        edges.dedup();
        Ok(SceneGraph { entities, predicates, triplets, edges })
    }

    pub fn entities(&self) -> &[EntityNode] {
        &self.entities
    }

    pub fn predicates(&self) -> &[PredicateNode] {
        &self.predicates
    }

    pub fn triplets(&self) -> &[Triplet] {
        &self.triplets
    }

    pub fn edges(&self) -> &[RoleEdge] {
        &self.edges
    }

    pub fn node_count(&self) -> usize {
        self.entities.len() + self.predicates.len()
    }

    /// Dense index of a node in the combined `entities ++ predicates` space.
    pub fn dense_index(&self, node: NodeRef) -> Option<usize> {
        match node {
            NodeRef::Entity(i) if i < self.entities.len() => Some(i),
            NodeRef::Predicate(j) if j < self.predicates.len() => Some(self.entities.len() + j),
            _ => None,
        }
    }

    pub fn contains(&self, node: NodeRef) -> bool {
        self.dense_index(node).is_some()
    }

    pub fn class_of(&self, node: NodeRef) -> Option<usize> {
        match node {
            NodeRef::Entity(i) => self.entities.get(i).map(|e| e.class_id),
            NodeRef::Predicate(j) => self.predicates.get(j).map(|p| p.class_id),
        }
    }

    /// Visual feature dimension, `None` for a graph without nodes.
    pub fn feature_dim(&self) -> Option<usize> {
        self.entities
            .first()
            .map(|e| e.feature.len())
            .or_else(|| self.predicates.first().map(|p| p.feature.len()))
    }
}

fn check_feature(feature: &[f64], dim: Option<usize>, kind: &str, i: usize) -> Result<()> {
    if Some(feature.len()) != dim {
        bail!(
            Shape,
            "{} {} has feature length {}, expected {}",
            kind,
            i,
            feature.len(),
            dim.unwrap_or(0)
        );
    }
    if feature.iter().any(|v| !v.is_finite()) {
        bail!(Numeric, "{} {} has a non-finite feature value", kind, i);
    }
    Ok(())
}

fn context(err: crate::Error, kind: &str, i: usize) -> crate::Error {
    match err {
        crate::Error::Validation(m) => crate::Error::Validation(format!("{kind} {i}: {m}")),
        other => other,
    }
}
