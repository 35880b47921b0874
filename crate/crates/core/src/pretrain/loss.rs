use alloc::format;
use alloc::vec::Vec;

use super::masking::{MaskTarget, MaskTask};
use crate::encoder::normal;
use crate::error::Result;
use crate::numerics::{NodeId, ParamId, ParamStore, Tape, Tensor};
use crate::rng::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LinearHead {
    pub weight: ParamId,
    pub bias: ParamId,
}

impl LinearHead {
    pub fn new(store: &mut ParamStore, name: &str, input: usize, classes: usize, rng: &mut Rng) -> Self {
        let std = 1.0 / libm::sqrt(input as f64);
        LinearHead {
            weight: store.add(format!("{name}.weight"), normal(rng, input, classes, std)),
            bias: store.add(format!("{name}.bias"), Tensor::zeros(&[1, classes])),
        }
    }

    pub fn apply(&self, tape: &mut Tape<'_>, x: NodeId) -> Result<NodeId> {
        let w = tape.param(self.weight);
        let b = tape.param(self.bias);
        tape.linear(x, w, Some(b))
    }
}

/// Separate classifiers for masked subjects, objects and predicates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MnmHeads {
    pub subject: LinearHead,
    pub object: LinearHead,
    pub relation: LinearHead,
}

impl MnmHeads {
    pub fn new(store: &mut ParamStore, hidden: usize, entity_classes: usize, predicate_classes: usize, rng: &mut Rng) -> Self {
        MnmHeads {
            subject: LinearHead::new(store, "mnm.subject", hidden, entity_classes, rng),
            object: LinearHead::new(store, "mnm.object", hidden, entity_classes, rng),
            relation: LinearHead::new(store, "mnm.relation", hidden, predicate_classes, rng),
        }
    }

    pub fn for_task(&self, task: MaskTask) -> &LinearHead {
        match task {
            MaskTask::Sbj => &self.subject,
            MaskTask::Obj => &self.object,
            MaskTask::Rel => &self.relation,
        }
    }
}

/// Loss and logits for the masked tokens of one role.
#[derive(Debug, Clone)]
pub struct RoleTerm {
    pub loss: NodeId,
    pub logits: NodeId,
    pub gold: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct MnmLoss {
    pub total: NodeId,
    /// Indexed by `MaskTask::index`; `None` when the role has no targets.
    pub terms: [Option<RoleTerm>; 3],
}

/// Scalar view of an [`MnmLoss`].
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MnmValues {
    pub total: f64,
    pub sbj: f64,
    pub obj: f64,
    pub rel: f64,
}

impl MnmValues {
    pub fn role(&self, task: MaskTask) -> f64 {
        match task {
            MaskTask::Sbj => self.sbj,
            MaskTask::Obj => self.obj,
            MaskTask::Rel => self.rel,
        }
    }
}

impl MnmLoss {
    pub fn values(&self, tape: &Tape<'_>) -> MnmValues {
        let term = |t: MaskTask| self.terms[t.index()].as_ref().map_or(0.0, |r| tape.value(r.loss).item());
        MnmValues {
            total: tape.value(self.total).item(),
            sbj: term(MaskTask::Sbj),
            obj: term(MaskTask::Obj),
            rel: term(MaskTask::Rel),
        }
    }

    /// `(correct, count)` of argmax predictions per role.
    pub fn accuracy_counts(&self, tape: &Tape<'_>) -> [(usize, usize); 3] {
        let mut out = [(0, 0); 3];
        for (slot, term) in out.iter_mut().zip(&self.terms) {
            if let Some(term) = term {
                let logits = tape.value(term.logits);
                let correct = term.gold.iter().enumerate().filter(|&(r, &g)| argmax(logits.row(r)) == g).count();
                *slot = (correct, term.gold.len());
            }
        }
        out
    }
}

pub fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in row.iter().enumerate() {
        if v > row[best] {
            best = i;
        }
    }
    best
}

/// Sum over roles of the mean negative log-likelihood of the gold class
/// under that role's head, evaluated at the masked positions.
pub fn mnm_loss(tape: &mut Tape<'_>, hidden: NodeId, targets: &[MaskTarget], heads: &MnmHeads) -> Result<MnmLoss> {
    let mut terms: [Option<RoleTerm>; 3] = [None, None, None];
    let mut total: Option<NodeId> = None;
    for task in MaskTask::ALL {
        let (rows, gold): (Vec<usize>, Vec<usize>) =
            targets.iter().filter(|t| t.task == task).map(|t| (t.position, t.class_id)).unzip();
        if rows.is_empty() {
            continue;
        }
        let x = tape.select_rows(hidden, rows)?;
        let logits = heads.for_task(task).apply(tape, x)?;
        let loss = tape.cross_entropy(logits, gold.clone())?;
        total = Some(match total {
            Some(acc) => tape.add(acc, loss)?,
            None => loss,
        });
        terms[task.index()] = Some(RoleTerm { loss, logits, gold });
    }
    let total = match total {
        Some(t) => t,
        None => tape.constant(Tensor::scalar(0.0)),
    };
    Ok(MnmLoss { total, terms })
}
