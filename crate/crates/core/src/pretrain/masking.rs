use alloc::collections::BTreeSet;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::encoder::{position_of, TokenInputs};
use crate::error::{bail, Error, Result};
use crate::graph::{NodeRef, SceneGraph, TokenSequence};
use crate::rng::rng_from;

/// Which semantic role is masked for a sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MaskTask {
    Sbj,
    Obj,
    Rel,
}

impl MaskTask {
    pub const ALL: [MaskTask; 3] = [MaskTask::Sbj, MaskTask::Obj, MaskTask::Rel];

    pub fn index(self) -> usize {
        match self {
            MaskTask::Sbj => 0,
            MaskTask::Obj => 1,
            MaskTask::Rel => 2,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            MaskTask::Sbj => "sbj",
            MaskTask::Obj => "obj",
            MaskTask::Rel => "rel",
        }
    }

    /// Nodes that play this task's role in at least one triplet, sorted.
    pub fn eligible_nodes(self, g: &SceneGraph) -> Vec<NodeRef> {
        let set: BTreeSet<NodeRef> = g
            .triplets()
            .iter()
            .map(|t| match self {
                MaskTask::Sbj => NodeRef::Entity(t.subject),
                MaskTask::Obj => NodeRef::Entity(t.object),
                MaskTask::Rel => NodeRef::Predicate(t.predicate),
            })
            .collect();
        set.into_iter().collect()
    }
}

impl fmt::Display for MaskTask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MaskTask {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sbj" => Ok(MaskTask::Sbj),
            "obj" => Ok(MaskTask::Obj),
            "rel" => Ok(MaskTask::Rel),
            other => bail!(Parse, "unknown mask task {:?}", other),
        }
    }
}

/// Uniform draw over the three tasks.
pub fn assign_task(seed: u64) -> MaskTask {
    MaskTask::ALL[rng_from(seed).random_range(0..3)]
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaskingPlan {
    pub task: MaskTask,
    pub masked_node_ids: BTreeSet<NodeRef>,
    pub ratio: f64,
    /// Number of eligible nodes for the task.
    pub eligible_count: usize,
    /// Requested count before conflicting candidates were dropped.
    pub target_count: usize,
}

impl MaskingPlan {
    pub fn is_empty(&self) -> bool {
        self.masked_node_ids.is_empty()
    }

    pub fn len(&self) -> usize {
        self.masked_node_ids.len()
    }
}

/// `max(1, floor(ratio * eligible))`, or 0 when nothing is eligible.
pub fn target_mask_count(eligible: usize, ratio: f64) -> usize {
    if eligible == 0 {
        return 0;
    }
    (libm::floor(ratio * eligible as f64) as usize).clamp(1, eligible)
}

/// Samples the nodes to mask for `task`. Candidates are visited in random
/// order and skipped when they share a triplet with an already masked node.
pub fn plan_masks(g: &SceneGraph, task: MaskTask, ratio: f64, seed: u64) -> Result<MaskingPlan> {
    if !(ratio > 0.0 && ratio <= 1.0) {
        bail!(Config, "mask ratio must lie in (0, 1], got {}", ratio);
    }
    let mut candidates = task.eligible_nodes(g);
    let eligible_count = candidates.len();
    let target_count = target_mask_count(eligible_count, ratio);
    candidates.shuffle(&mut rng_from(seed));
    let mut masked = BTreeSet::new();
    for node in candidates {
        if masked.len() == target_count {
            break;
        }
        let conflict = g.triplets().iter().any(|t| {
            let nodes = t.nodes();
            nodes.contains(&node) && nodes.iter().any(|n| masked.contains(n))
        });
        if !conflict {
            masked.insert(node);
        }
    }
    Ok(MaskingPlan { task, masked_node_ids: masked, ratio, eligible_count, target_count })
}

/// A masked node and the class it must be recovered as.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MaskTarget {
    pub node: NodeRef,
    pub position: usize,
    pub task: MaskTask,
    pub class_id: usize,
}

/// Swaps the content of every planned node for `[MASK]` in `inputs`.
/// Position (box) and modality contributions of a masked token are kept.
pub fn apply_masks(
    seq: &TokenSequence,
    inputs: &mut TokenInputs,
    g: &SceneGraph,
    plan: &MaskingPlan,
) -> Result<Vec<MaskTarget>> {
    if inputs.len() != seq.len() {
        bail!(Validation, "inputs describe {} tokens, sequence has {}", inputs.len(), seq.len());
    }
    let mut targets = Vec::with_capacity(plan.len());
    for &node in &plan.masked_node_ids {
        let Some(class_id) = g.class_of(node) else {
            bail!(Validation, "planned node {:?} is not in the graph", node);
        };
        let position = position_of(seq, node)?;
        targets.push(MaskTarget { node, position, task: plan.task, class_id });
    }
    for t in &targets {
        inputs.mask_row(t.position);
    }
    Ok(targets)
}
