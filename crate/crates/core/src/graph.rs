//! Directed graphs on features: strongly connected components and
//! reachability.

use nalgebra::DMatrix;
use petgraph::graph::NodeIndex;

use crate::model::SubsetMask;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiGraph {
    succ: Vec<Vec<usize>>,
}

impl DiGraph {
    pub fn new(n: usize) -> Self {
        DiGraph { succ: vec![Vec::new(); n] }
    }

    /// Edge `y -> x` whenever `m[(x, y)] > 0`: column `y` feeds row `x`.
    pub fn from_matrix(m: &DMatrix<f64>) -> Self {
        let n = m.nrows();
        let mut g = DiGraph::new(n);
        for y in 0..n {
            for x in 0..n {
                if m[(x, y)] > 0.0 {
                    g.succ[y].push(x);
                }
            }
        }
        g
    }

    pub fn add_edge(&mut self, from: usize, to: usize) {
        if !self.succ[from].contains(&to) {
            self.succ[from].push(to);
        }
    }

    pub fn len(&self) -> usize {
        self.succ.len()
    }

    pub fn is_empty(&self) -> bool {
        self.succ.is_empty()
    }

    pub fn successors(&self, v: usize) -> &[usize] {
        &self.succ[v]
    }

    pub fn has_edge(&self, from: usize, to: usize) -> bool {
        self.succ[from].contains(&to)
    }

    pub fn edge_count(&self) -> usize {
        self.succ.iter().map(Vec::len).sum()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.succ.iter().enumerate().flat_map(|(y, xs)| xs.iter().map(move |&x| (y, x)))
    }

    /// Vertices reachable from `sources` by a possibly empty path.
    pub fn reachable(&self, sources: &SubsetMask) -> SubsetMask {
        let mut seen = sources.clone();
        let mut stack: Vec<usize> = sources.indices().collect();
        while let Some(v) = stack.pop() {
            for &w in &self.succ[v] {
                if !seen.contains(w) {
                    seen.insert(w);
                    stack.push(w);
                }
            }
        }
        seen
    }

    /// Strongly connected components. Each component is sorted;
    /// components are ordered by their smallest vertex.
    pub fn strongly_connected_components(&self) -> Vec<Vec<usize>> {
        let mut g = petgraph::graph::DiGraph::<(), ()>::with_capacity(self.len(), self.edge_count());
        for _ in 0..self.len() {
            g.add_node(());
        }
        for (from, to) in self.edges() {
            g.add_edge(NodeIndex::new(from), NodeIndex::new(to), ());
        }
        let mut comps: Vec<Vec<usize>> = petgraph::algo::tarjan_scc(&g)
            .into_iter()
            .map(|c| {
                let mut c: Vec<usize> = c.into_iter().map(NodeIndex::index).collect();
                c.sort_unstable();
                c
            })
            .collect();
        comps.sort_unstable_by_key(|c| c[0]);
        comps
    }
}
