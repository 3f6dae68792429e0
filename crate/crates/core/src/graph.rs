//! Simple undirected graphs with dense bit-matrix adjacency.

use std::fmt;

#[inline]
pub(crate) fn words_for(n: usize) -> usize {
    n.div_ceil(64)
}

/// Iterates the set bits of a bitset row in ascending order.
pub(crate) fn iter_bits(row: &[u64]) -> impl Iterator<Item = usize> + '_ {
    row.iter().enumerate().flat_map(|(wi, &w)| {
        let mut w = w;
        std::iter::from_fn(move || {
            if w == 0 {
                None
            } else {
                let b = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * 64 + b)
            }
        })
    })
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Graph {
    n: usize,
    words: usize,
    adj: Vec<u64>,
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Graph")
            .field("vertices", &self.n)
            .field("edges", &self.edge_count())
            .finish()
    }
}

impl Graph {
    pub fn empty(n: usize) -> Self {
        let words = words_for(n);
        Graph {
            n,
            words,
            adj: vec![0; n * words],
        }
    }

    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut g = Graph::empty(n);
        for (u, v) in edges {
            g.add_edge(u, v);
        }
        g
    }

    pub fn complete(n: usize) -> Self {
        Graph::from_edges(n, (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))))
    }

    pub fn cycle(n: usize) -> Self {
        Graph::from_edges(n, (0..n).map(|u| (u, (u + 1) % n)))
    }

    /// Builds a graph row by row; `row(v, bits)` fills the neighbor bitset of `v`.
    /// The caller must produce a symmetric, loop-free relation.
    pub(crate) fn from_rows_par(n: usize, row: impl Fn(usize, &mut [u64]) + Sync) -> Self {
        use rayon::prelude::*;
        let words = words_for(n);
        let mut adj = vec![0u64; n * words];
        if words > 0 {
            adj.par_chunks_mut(words)
                .enumerate()
                .for_each(|(v, bits)| row(v, bits));
        }
        Graph { n, words, adj }
    }

    #[inline]
    pub fn vertex_count(&self) -> usize {
        self.n
    }

    /// Adds edge `{u, v}`; self-loops are ignored.
    pub fn add_edge(&mut self, u: usize, v: usize) {
        assert!(u < self.n && v < self.n, "vertex out of range");
        if u == v {
            return;
        }
        self.adj[u * self.words + v / 64] |= 1 << (v % 64);
        self.adj[v * self.words + u / 64] |= 1 << (u % 64);
    }

    #[inline]
    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u * self.words + v / 64] >> (v % 64) & 1 == 1
    }

    #[inline]
    pub fn row(&self, v: usize) -> &[u64] {
        &self.adj[v * self.words..(v + 1) * self.words]
    }

    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        iter_bits(self.row(v))
    }

    pub fn degree(&self, v: usize) -> usize {
        self.row(v).iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn edge_count(&self) -> usize {
        self.adj
            .iter()
            .map(|w| w.count_ones() as usize)
            .sum::<usize>()
            / 2
    }

    /// Edges `(u, v)` with `u < v`, in ascending order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |u| {
            self.neighbors(u)
                .filter(move |&v| v > u)
                .map(move |v| (u, v))
        })
    }

    pub fn complement(&self) -> Graph {
        let mut c = self.clone();
        for v in 0..self.n {
            let row = &mut c.adj[v * self.words..(v + 1) * self.words];
            for w in row.iter_mut() {
                *w = !*w;
            }
            let tail = self.n % 64;
            if tail != 0 {
                row[self.words - 1] &= (1u64 << tail) - 1;
            }
            row[v / 64] &= !(1u64 << (v % 64));
        }
        c
    }

    pub fn union_with(&mut self, other: &Graph) {
        assert_eq!(self.n, other.n);
        for (a, b) in self.adj.iter_mut().zip(&other.adj) {
            *a |= *b;
        }
    }

    pub fn is_independent(&self, vertices: &[usize]) -> bool {
        vertices.iter().enumerate().all(|(i, &u)| {
            vertices[i + 1..]
                .iter()
                .all(|&v| u != v && !self.has_edge(u, v))
        })
    }

    pub fn is_clique(&self, vertices: &[usize]) -> bool {
        vertices
            .iter()
            .enumerate()
            .all(|(i, &u)| vertices[i + 1..].iter().all(|&v| self.has_edge(u, v)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_structure() {
        let c5 = Graph::cycle(5);
        assert_eq!(c5.edge_count(), 5);
        assert!(c5.has_edge(0, 4) && c5.has_edge(4, 0));
        assert!(!c5.has_edge(0, 2));
        assert_eq!(c5.neighbors(0).collect::<Vec<_>>(), vec![1, 4]);
        assert_eq!(
            c5.edges().collect::<Vec<_>>(),
            vec![(0, 1), (0, 4), (1, 2), (2, 3), (3, 4)]
        );
    }

    #[test]
    fn complement_of_cycle() {
        let c = Graph::cycle(5).complement();
        assert_eq!(c.edge_count(), 5);
        assert!(c.has_edge(0, 2) && !c.has_edge(0, 0) && !c.has_edge(0, 1));
        let big = Graph::empty(130).complement();
        assert_eq!(big, Graph::complete(130));
    }

    #[test]
    fn self_loops_ignored() {
        let mut g = Graph::empty(3);
        g.add_edge(1, 1);
        assert_eq!(g.edge_count(), 0);
    }
}
