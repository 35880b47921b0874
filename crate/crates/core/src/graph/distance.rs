use alloc::vec;
use alloc::vec::Vec;

use super::{EnhancedGraph, TokenSequence};
use crate::error::{bail, Result};

/// Per-sequence hop distances. Diagonal, cross-modality and text/special
/// pairs are 1; visual pairs are shortest-path hop counts on the enhanced
/// graph, or [`DistanceMatrix::unreachable`] when disconnected.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistanceMatrix {
    n: usize,
    data: Vec<u32>,
    unreachable: u32,
}

impl DistanceMatrix {
    /// Builds a matrix from raw row-major values; rejects asymmetric input.
    pub fn from_rows(n: usize, data: Vec<u32>, unreachable: u32) -> Result<Self> {
        if data.len() != n * n {
            bail!(Shape, "distance data has {} entries, expected {}", data.len(), n * n);
        }
        for i in 0..n {
            for j in 0..i {
                if data[i * n + j] != data[j * n + i] {
                    bail!(Validation, "distance matrix is not symmetric at ({}, {})", i, j);
                }
            }
        }
        Ok(DistanceMatrix { n, data, unreachable })
    }

    /// All-ones matrix: every token one hop from every other.
    pub fn fully_connected(n: usize) -> Self {
        DistanceMatrix { n, data: vec![1; n * n], unreachable: n as u32 + 1 }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.data[i * self.n + j]
    }

    pub fn unreachable(&self) -> u32 {
        self.unreachable
    }

    #[inline]
    pub fn is_unreachable(&self, i: usize, j: usize) -> bool {
        self.get(i, j) == self.unreachable
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.data
    }
}

/// Hop-distance matrix for `seq` over the enhanced graph `g`.
///
/// `unreachable` defaults to `max(n, V) + 1`, which exceeds every finite hop
/// count. An explicit sentinel must be at least the number of graph nodes.
pub fn compute_distance_matrix(
    seq: &TokenSequence,
    g: &EnhancedGraph<'_>,
    unreachable: Option<u32>,
) -> Result<DistanceMatrix> {
    let base = g.base();
    seq.validate_against(base)?;
    let n = seq.len();
    let v = base.node_count();
    let sentinel = match unreachable {
        Some(s) if (s as usize) < v.max(1) => {
            bail!(Config, "unreachable sentinel {} does not exceed the largest possible hop count {}", s, v.saturating_sub(1))
        }
        Some(s) => s,
        None => (n.max(v) + 1) as u32,
    };
    let hops = g.hop_counts();
    let dense: Vec<Option<usize>> = seq
        .tokens()
        .iter()
        .map(|t| t.node().and_then(|node| base.dense_index(node)))
        .collect();
    let mut data = vec![1u32; n * n];
    for i in 0..n {
        let Some(a) = dense[i] else { continue };
        for j in 0..n {
            if i == j {
                continue;
            }
            if let Some(b) = dense[j] {
                data[i * n + j] = hops[a * v + b].unwrap_or(sentinel).max(1);
            }
        }
    }
    Ok(DistanceMatrix { n, data, unreachable: sentinel })
}

/// Largest finite hop count between any two graph nodes; 0 for graphs with
/// at most one node or no connected pair.
pub fn graph_diameter_visual(g: &EnhancedGraph<'_>) -> u32 {
    g.hop_counts().into_iter().flatten().max().unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::test_support::toy_graph;
    use crate::graph::{add_skip_edges, NodeRef, Token};

    fn example_graph() -> crate::graph::SceneGraph {
        // o1,o2,o3 and p1 wired to o1 (subject) and o2 (object)
        toy_graph(3, 1, &[(0, 0, 1)])
    }

    #[test]
    fn worked_example() {
        let g = example_graph();
        let eg = add_skip_edges(&g);
        let seq = TokenSequence::build(&[3], &g);
        let d = compute_distance_matrix(&seq, &eg, None).unwrap();
        let pos = |node| seq.position_of(node).unwrap();
        let (p1, o1, o3) = (pos(NodeRef::Predicate(0)), pos(NodeRef::Entity(0)), pos(NodeRef::Entity(2)));
        assert_eq!(d.get(p1, o1), 1);
        assert_eq!(d.get(p1, o3), 2);
        assert_eq!(d.get(o1, o3), 1);
        // text and special tokens
        for i in 0..seq.len() {
            assert_eq!(d.get(i, i), 1);
            assert_eq!(d.get(0, i), 1);
            assert_eq!(d.get(1, i), 1);
        }
        assert_eq!(graph_diameter_visual(&eg), 2);
    }

    #[test]
    fn predicates_two_apart_through_clique() {
        let g = toy_graph(3, 2, &[(0, 0, 1), (2, 1, 1)]);
        let eg = add_skip_edges(&g);
        let seq = TokenSequence::build(&[], &g);
        let d = compute_distance_matrix(&seq, &eg, None).unwrap();
        let p1 = seq.position_of(NodeRef::Predicate(0)).unwrap();
        let p2 = seq.position_of(NodeRef::Predicate(1)).unwrap();
        assert_eq!(d.get(p1, p2), 2);
    }

    #[test]
    fn isolated_predicate_gets_sentinel() {
        let g = toy_graph(2, 2, &[(0, 0, 1)]);
        let eg = add_skip_edges(&g);
        let seq = TokenSequence::build(&[], &g);
        let d = compute_distance_matrix(&seq, &eg, None).unwrap();
        let iso = seq.position_of(NodeRef::Predicate(1)).unwrap();
        let e0 = seq.position_of(NodeRef::Entity(0)).unwrap();
        assert_eq!(d.unreachable(), seq.len() as u32 + 1);
        assert!(d.is_unreachable(iso, e0));
        assert_eq!(d.get(iso, iso), 1);
        assert_eq!(d.get(0, iso), 1);
    }

    #[test]
    fn dangling_token_is_rejected() {
        let g = example_graph();
        let eg = add_skip_edges(&g);
        let seq = TokenSequence::new(alloc::vec![Token::Entity(0), Token::Predicate(4)]);
        assert!(matches!(compute_distance_matrix(&seq, &eg, None), Err(crate::Error::Validation(_))));
    }

    #[test]
    fn sentinel_too_small_is_rejected() {
        let g = example_graph();
        let eg = add_skip_edges(&g);
        let seq = TokenSequence::build(&[], &g);
        assert!(compute_distance_matrix(&seq, &eg, Some(2)).is_err());
        assert!(compute_distance_matrix(&seq, &eg, Some(100)).is_ok());
    }

    #[test]
    fn diameter_conventions() {
        let clique = toy_graph(3, 0, &[]);
        assert_eq!(graph_diameter_visual(&add_skip_edges(&clique)), 1);
        let single = toy_graph(0, 1, &[]);
        assert_eq!(graph_diameter_visual(&add_skip_edges(&single)), 0);
    }
}
