use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use super::SceneGraph;

/// Scene graph plus a skip edge between every pair of distinct entities.
#[derive(Debug, Clone)]
pub struct EnhancedGraph<'g> {
    base: &'g SceneGraph,
    skip_edges: Vec<(usize, usize)>,
}

/// Adds the entity clique. The base graph is borrowed, never modified.
pub fn add_skip_edges(g: &SceneGraph) -> EnhancedGraph<'_> {
    let n = g.entities().len();
    let mut skip_edges = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for a in 0..n {
        for b in a + 1..n {
            skip_edges.push((a, b));
        }
    }
    EnhancedGraph { base: g, skip_edges }
}

impl<'g> EnhancedGraph<'g> {
    pub fn base(&self) -> &'g SceneGraph {
        self.base
    }

    pub fn skip_edges(&self) -> &[(usize, usize)] {
        &self.skip_edges
    }

    /// Undirected adjacency over dense node indices (entities first).
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let n_ent = self.base.entities().len();
        let mut adj = vec![Vec::new(); self.base.node_count()];
        for e in self.base.edges() {
            let p = n_ent + e.predicate;
            adj[p].push(e.entity);
            adj[e.entity].push(p);
        }
        for &(a, b) in &self.skip_edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        adj
    }

    /// All-pairs unit-weight shortest paths by repeated BFS; row-major `V x V`,
    /// `None` where no path exists.
    pub fn hop_counts(&self) -> Vec<Option<u32>> {
        let adj = self.adjacency();
        let v = adj.len();
        let mut out = vec![None; v * v];
        let mut queue = VecDeque::new();
        for src in 0..v {
            let row = &mut out[src * v..(src + 1) * v];
            row[src] = Some(0);
            queue.clear();
            queue.push_back(src);
            while let Some(u) = queue.pop_front() {
                let du = row[u].unwrap_or(0);
                for &w in &adj[u] {
                    if row[w].is_none() {
                        row[w] = Some(du + 1);
                        queue.push_back(w);
                    }
                }
            }
        }
        out
    }
}
