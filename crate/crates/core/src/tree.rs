//! Linearized dependency trees and exact arrangement statistics.
//!
//! A [`LinearizedTree`] stores its edges over vertex positions `1..=n`, so the
//! tree and its observed linear arrangement are the same object. Edge direction
//! is not kept.

use std::collections::BTreeMap;
use std::fmt;

use num_rational::Rational64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default upper bound on `n` for exhaustive enumeration (`10!` arrangements).
pub const DEFAULT_ENUMERATION_CAP: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TreeError {
    #[error("a tree needs at least one vertex")]
    Empty,
    #[error("expected {expected} edges for {n} vertices, got {got}")]
    EdgeCount {
        n: usize,
        expected: usize,
        got: usize,
    },
    #[error("edge ({0}, {1}) is out of range or a self loop")]
    BadEdge(usize, usize),
    #[error("edges do not form a connected acyclic graph")]
    NotATree,
    #[error("head list is not a single rooted tree")]
    BadHeads,
    #[error("n = {n} exceeds the enumeration cap of {cap}; use Monte Carlo sampling instead")]
    TooLarge { n: usize, cap: usize },
    #[error("no closed-form minimum for shape {0}")]
    UnsupportedShape(TreeShape),
}

/// An undirected tree whose vertices are identified with their sentence positions.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LinearizedTree {
    n: usize,
    edges: Vec<(usize, usize)>,
}

impl LinearizedTree {
    /// Builds a tree from undirected edges over positions `1..=n`.
    pub fn new(
        n: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self, TreeError> {
        if n == 0 {
            return Err(TreeError::Empty);
        }
        let mut normalized = Vec::with_capacity(n - 1);
        for (u, v) in edges {
            if u == v || u == 0 || v == 0 || u > n || v > n {
                return Err(TreeError::BadEdge(u, v));
            }
            normalized.push((u.min(v), u.max(v)));
        }
        if normalized.len() != n - 1 {
            return Err(TreeError::EdgeCount {
                n,
                expected: n - 1,
                got: normalized.len(),
            });
        }
        // n - 1 edges and no cycle implies connected.
        let mut dsu = DisjointSets::new(n + 1);
        for &(u, v) in &normalized {
            if !dsu.union(u, v) {
                return Err(TreeError::NotATree);
            }
        }
        normalized.sort_unstable();
        Ok(Self {
            n,
            edges: normalized,
        })
    }

    /// Builds a tree from a head list: `heads[i]` is the head position of the
    /// word at position `i + 1`, with `0` marking the root.
    pub fn from_heads(heads: &[usize]) -> Result<Self, TreeError> {
        let n = heads.len();
        if n == 0 {
            return Err(TreeError::Empty);
        }
        if heads.iter().filter(|&&h| h == 0).count() != 1 {
            return Err(TreeError::BadHeads);
        }
        let edges = heads
            .iter()
            .enumerate()
            .filter(|(_, &h)| h != 0)
            .map(|(i, &h)| (i + 1, h));
        Self::new(n, edges).map_err(|e| match e {
            TreeError::BadEdge(..) | TreeError::NotATree => TreeError::BadHeads,
            other => other,
        })
    }

    /// Star tree with its hub at `hub`.
    pub fn star(n: usize, hub: usize) -> Result<Self, TreeError> {
        Self::new(n, (1..=n).filter(|&v| v != hub).map(|v| (hub, v)))
    }

    /// Path visiting the positions in `order`.
    pub fn path(order: &[usize]) -> Result<Self, TreeError> {
        Self::new(order.len(), order.windows(2).map(|w| (w[0], w[1])))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Edges as `(lower position, higher position)`, sorted.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Degree of every vertex, indexed by position minus one.
    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n];
        for &(u, v) in &self.edges {
            deg[u - 1] += 1;
            deg[v - 1] += 1;
        }
        deg
    }

    pub fn hub_degree(&self) -> usize {
        self.degrees().into_iter().max().unwrap_or(0)
    }

    /// Moves the vertex at position `p` to position `new_position[p - 1]`.
    ///
    /// `new_position` must be a permutation of `1..=n`.
    pub fn rearranged(&self, new_position: &[usize]) -> Self {
        assert_eq!(new_position.len(), self.n, "permutation length mismatch");
        let mut edges: Vec<_> = self
            .edges
            .iter()
            .map(|&(u, v)| {
                let (a, b) = (new_position[u - 1], new_position[v - 1]);
                (a.min(b), a.max(b))
            })
            .collect();
        edges.sort_unstable();
        Self { n: self.n, edges }
    }

    /// The same tree read right to left.
    pub fn reversed(&self) -> Self {
        let perm: Vec<usize> = (1..=self.n).map(|p| self.n + 1 - p).collect();
        self.rearranged(&perm)
    }
}

struct DisjointSets {
    parent: Vec<usize>,
}

impl DisjointSets {
    fn new(size: usize) -> Self {
        Self {
            parent: (0..size).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra] = rb;
        true
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TreeShape {
    Star,
    Linear,
    /// Trees with at most three vertices are paths and stars at once.
    Both,
    Other,
}

impl fmt::Display for TreeShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TreeShape::Star => "star",
            TreeShape::Linear => "linear",
            TreeShape::Both => "both",
            TreeShape::Other => "other",
        })
    }
}

pub fn classify(tree: &LinearizedTree) -> TreeShape {
    let n = tree.n();
    if n <= 3 {
        return TreeShape::Both;
    }
    match tree.hub_degree() {
        d if d == n - 1 => TreeShape::Star,
        2 => TreeShape::Linear,
        _ => TreeShape::Other,
    }
}

/// Sum of edge distances `D`.
pub fn sum_of_distances(tree: &LinearizedTree) -> u64 {
    tree.edges().iter().map(|&(u, v)| (v - u) as u64).sum()
}

/// Number of edge pairs whose spans strictly interleave.
pub fn count_crossings(tree: &LinearizedTree) -> u64 {
    count_span_crossings(tree.edges().iter().copied())
}

fn count_span_crossings(spans: impl Iterator<Item = (usize, usize)> + Clone) -> u64 {
    let spans: Vec<(usize, usize)> = spans.collect();
    let mut crossings = 0;
    for (i, &(a, b)) in spans.iter().enumerate() {
        for &(c, d) in &spans[i + 1..] {
            if (a < c && c < b && b < d) || (c < a && a < d && d < b) {
                crossings += 1;
            }
        }
    }
    crossings
}

/// Closed-form minimum of `D` for paths (`n - 1`) and stars (`(n^2 - n mod 2) / 4`).
pub fn min_d_formula(shape: TreeShape, n: usize) -> Result<u64, TreeError> {
    let n = n as u64;
    match shape {
        TreeShape::Linear | TreeShape::Both => Ok(n.saturating_sub(1)),
        TreeShape::Star => Ok((n * n - n % 2) / 4),
        TreeShape::Other => Err(TreeError::UnsupportedShape(shape)),
    }
}

/// Exact counts of `D` over a set of linear arrangements of one tree.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistanceDistribution {
    pub counts: BTreeMap<u64, u64>,
    pub total: u64,
}

impl DistanceDistribution {
    pub fn from_counts(counts: impl IntoIterator<Item = (u64, u64)>) -> Self {
        let counts: BTreeMap<u64, u64> = counts.into_iter().filter(|&(_, c)| c > 0).collect();
        let total = counts.values().sum();
        Self { counts, total }
    }

    pub fn count(&self, d: u64) -> u64 {
        self.counts.get(&d).copied().unwrap_or(0)
    }

    pub fn min(&self) -> Option<u64> {
        self.counts.keys().next().copied()
    }

    pub fn max(&self) -> Option<u64> {
        self.counts.keys().next_back().copied()
    }

    /// Exact mean of `D`; `None` for an empty distribution.
    pub fn mean(&self) -> Option<Rational64> {
        if self.total == 0 {
            return None;
        }
        let weighted: u64 = self.counts.iter().map(|(&d, &c)| d * c).sum();
        Some(Rational64::new(weighted as i64, self.total as i64))
    }

    /// Probability mass strictly above `threshold`.
    pub fn mass_above(&self, threshold: Rational64) -> Rational64 {
        self.mass_where(|d| Rational64::from_integer(d as i64) > threshold)
    }

    /// Probability mass strictly below `threshold`.
    pub fn mass_below(&self, threshold: Rational64) -> Rational64 {
        self.mass_where(|d| Rational64::from_integer(d as i64) < threshold)
    }

    pub fn probability(&self, d: u64) -> Rational64 {
        self.mass_where(|x| x == d)
    }

    fn mass_where(&self, pred: impl Fn(u64) -> bool) -> Rational64 {
        if self.total == 0 {
            return Rational64::from_integer(0);
        }
        let hits: u64 = self
            .counts
            .iter()
            .filter(|(&d, _)| pred(d))
            .map(|(_, &c)| c)
            .sum();
        Rational64::new(hits as i64, self.total as i64)
    }
}

/// Exhaustive distribution of `D` over all `n!` arrangements, or only over the
/// crossing-free ones when `restrict_noncrossing` is set.
pub fn enumerate_arrangements(
    tree: &LinearizedTree,
    restrict_noncrossing: bool,
) -> Result<DistanceDistribution, TreeError> {
    enumerate_arrangements_capped(tree, restrict_noncrossing, DEFAULT_ENUMERATION_CAP)
}

pub fn enumerate_arrangements_capped(
    tree: &LinearizedTree,
    restrict_noncrossing: bool,
    cap: usize,
) -> Result<DistanceDistribution, TreeError> {
    let n = tree.n();
    if n > cap {
        return Err(TreeError::TooLarge { n, cap });
    }
    let edges = tree.edges();
    let mut counts: BTreeMap<u64, u64> = BTreeMap::new();
    let mut position: Vec<usize> = (1..=n).collect();
    let mut visit = |position: &[usize]| {
        let spans = edges.iter().map(|&(u, v)| {
            let (a, b) = (position[u - 1], position[v - 1]);
            (a.min(b), a.max(b))
        });
        if restrict_noncrossing && count_span_crossings(spans.clone()) > 0 {
            return;
        }
        let d: u64 = spans.map(|(a, b)| (b - a) as u64).sum();
        *counts.entry(d).or_insert(0) += 1;
    };

    // Heap's algorithm, iterative form.
    visit(&position);
    let mut stack = vec![0usize; n];
    let mut i = 1;
    while i < n {
        if stack[i] < i {
            if i % 2 == 0 {
                position.swap(0, i);
            } else {
                position.swap(stack[i], i);
            }
            visit(&position);
            stack[i] += 1;
            i = 1;
        } else {
            stack[i] = 0;
            i += 1;
        }
    }

    let total = counts.values().sum();
    Ok(DistanceDistribution { counts, total })
}
