use alloc::collections::BTreeSet;
use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Undirected simple graph over nodes `0..p`; edges are stored as `(min, max)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Graph {
    p: usize,
    edges: BTreeSet<(usize, usize)>,
}

impl Graph {
    pub fn empty(p: usize) -> Self {
        Graph { p, edges: BTreeSet::new() }
    }

    pub fn from_edges<I: IntoIterator<Item = (usize, usize)>>(p: usize, edges: I) -> Result<Self> {
        let mut g = Graph::empty(p);
        for (i, j) in edges {
            g.insert(i, j)?;
        }
        Ok(g)
    }

    pub fn complete(p: usize) -> Self {
        let mut g = Graph::empty(p);
        for i in 0..p {
            for j in (i + 1)..p {
                g.edges.insert((i, j));
            }
        }
        g
    }

    /// Insert an undirected edge; returns whether it was new.
    pub fn insert(&mut self, i: usize, j: usize) -> Result<bool> {
        if i == j {
            return Err(Error::InvalidParameter(format!("self-loop at node {i}")));
        }
        if i >= self.p || j >= self.p {
            return Err(Error::InvalidParameter(format!(
                "edge ({i}, {j}) out of range for {} nodes",
                self.p
            )));
        }
        Ok(self.edges.insert(canonical(i, j)))
    }

    pub fn remove(&mut self, i: usize, j: usize) -> bool {
        self.edges.remove(&canonical(i, j))
    }

    #[inline]
    pub fn p(&self) -> usize {
        self.p
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        i != j && self.edges.contains(&canonical(i, j))
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn neighbors(&self, i: usize) -> Vec<usize> {
        self.edges
            .iter()
            .filter_map(|&(a, b)| if a == i { Some(b) } else if b == i { Some(a) } else { None })
            .collect()
    }

    pub fn degree(&self, i: usize) -> usize {
        self.edges.iter().filter(|&&(a, b)| a == i || b == i).count()
    }

    pub fn is_subgraph_of(&self, other: &Graph) -> bool {
        self.p == other.p && self.edges.is_subset(&other.edges)
    }

    /// Relabel nodes: node `k` of the result is node `perm[k]` of `self`.
    pub fn permute(&self, perm: &[usize]) -> Result<Graph> {
        if perm.len() != self.p {
            return Err(Error::DimensionMismatch { expected: self.p, found: perm.len() });
        }
        let mut inverse = alloc::vec![usize::MAX; self.p];
        for (k, &old) in perm.iter().enumerate() {
            inverse[old] = k;
        }
        Graph::from_edges(self.p, self.edges.iter().map(|&(a, b)| (inverse[a], inverse[b])))
    }

    /// Symmetric 0/1 adjacency, row-major.
    pub fn adjacency(&self) -> Vec<f64> {
        let mut a = alloc::vec![0.0; self.p * self.p];
        for &(i, j) in &self.edges {
            a[i * self.p + j] = 1.0;
            a[j * self.p + i] = 1.0;
        }
        a
    }
}

#[inline]
fn canonical(i: usize, j: usize) -> (usize, usize) {
    if i < j {
        (i, j)
    } else {
        (j, i)
    }
}
