//! Undirected graphs on ranked vertices `1..=n`.

use crate::error::{check_probability, invalid, Error, Result};
use crate::rng::{KeepThreshold, RandomStream};

/// A vertex rank, 1-based.
pub type Vertex = u32;

/// An immutable undirected simple graph on the ranks `1..=n`.
///
/// Edges are stored as `(i, j)` with `i < j`, sorted lexicographically. The
/// weight of `(i, j)` is `j - i` unless an explicit weight table is attached,
/// in which case `weights[k]` belongs to `edges[k]`.
#[derive(Clone, Debug, PartialEq)]
pub struct RankGraph {
    n: u32,
    edges: Vec<(Vertex, Vertex)>,
    weights: Option<Vec<f64>>,
}

/// Forward (higher-rank) adjacency in compressed row form.
#[derive(Clone, Debug)]
pub struct ForwardAdjacency {
    offsets: Vec<usize>,
    targets: Vec<Vertex>,
}

impl ForwardAdjacency {
    /// Neighbours of `i` with rank greater than `i`, ascending.
    #[inline]
    pub fn successors(&self, i: Vertex) -> &[Vertex] {
        let i = i as usize;
        &self.targets[self.offsets[i - 1]..self.offsets[i]]
    }
}

/// Index of the pair `(i, j)`, `1 <= i < j <= n`, in the lexicographic
/// enumeration of all pairs of `1..=n`.
#[inline]
pub fn pair_index(n: u32, i: Vertex, j: Vertex) -> u64 {
    let (n, i, j) = (u64::from(n), u64::from(i), u64::from(j));
    (i - 1) * n - (i - 1) * i / 2 + (j - i - 1)
}

pub fn pair_count(n: u32) -> u64 {
    let n = u64::from(n);
    n * n.saturating_sub(1) / 2
}

impl RankGraph {
    pub fn empty(n: u32) -> Self {
        RankGraph { n, edges: Vec::new(), weights: None }
    }

    /// Builds a graph from an edge list, rejecting self-loops, reversed or
    /// out-of-range pairs, and duplicates.
    pub fn from_edges(n: u32, mut edges: Vec<(Vertex, Vertex)>) -> Result<Self> {
        for &(i, j) in &edges {
            check_edge(n, i, j)?;
        }
        edges.sort_unstable();
        if let Some(w) = edges.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidEdge { i: w[0].0, j: w[0].1, reason: "duplicate edge" });
        }
        Ok(RankGraph { n, edges, weights: None })
    }

    /// Builds a weighted graph; `weights[k]` is the weight of `edges[k]`.
    pub fn from_weighted_edges(n: u32, edges: Vec<(Vertex, Vertex)>, weights: Vec<f64>) -> Result<Self> {
        if edges.len() != weights.len() {
            return Err(invalid("weights", "length differs from the edge list"));
        }
        let mut tagged: Vec<((Vertex, Vertex), f64)> = edges.into_iter().zip(weights).collect();
        for &((i, j), w) in &tagged {
            check_edge(n, i, j)?;
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::InvalidEdge { i, j, reason: "weight must be positive and finite" });
            }
        }
        tagged.sort_unstable_by_key(|&(e, _)| e);
        if let Some(w) = tagged.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidEdge { i: w[0].0 .0, j: w[0].0 .1, reason: "duplicate edge" });
        }
        let (edges, weights) = tagged.into_iter().unzip();
        Ok(RankGraph { n, edges, weights: Some(weights) })
    }

    /// Internal constructor for edge lists that are already valid, possibly
    /// unsorted and with repeats.
    pub(crate) fn from_edges_unchecked(n: u32, mut edges: Vec<(Vertex, Vertex)>) -> Self {
        debug_assert!(edges.iter().all(|&(i, j)| 1 <= i && i < j && j <= n));
        edges.sort_unstable();
        edges.dedup();
        RankGraph { n, edges, weights: None }
    }

    /// Attaches a weight table computed from the endpoints.
    pub(crate) fn with_weights_from(mut self, weight: impl Fn(Vertex, Vertex) -> f64) -> Self {
        self.weights = Some(self.edges.iter().map(|&(i, j)| weight(i, j)).collect());
        self
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(Vertex, Vertex)] {
        &self.edges
    }

    pub fn weights(&self) -> Option<&[f64]> {
        self.weights.as_deref()
    }

    pub fn is_weighted(&self) -> bool {
        self.weights.is_some()
    }

    /// Weight of the `k`-th edge.
    pub fn weight_at(&self, k: usize) -> f64 {
        match &self.weights {
            Some(w) => w[k],
            None => f64::from(self.edges[k].1 - self.edges[k].0),
        }
    }

    fn position(&self, i: Vertex, j: Vertex) -> Option<usize> {
        let key = if i < j { (i, j) } else { (j, i) };
        self.edges.binary_search(&key).ok()
    }

    pub fn contains(&self, i: Vertex, j: Vertex) -> bool {
        self.position(i, j).is_some()
    }

    pub fn weight(&self, i: Vertex, j: Vertex) -> Option<f64> {
        self.position(i, j).map(|k| self.weight_at(k))
    }

    /// Edge-set inclusion.
    pub fn is_subgraph_of(&self, other: &RankGraph) -> bool {
        self.n == other.n && self.edges.iter().all(|&(i, j)| other.contains(i, j))
    }

    pub fn forward_adjacency(&self) -> ForwardAdjacency {
        let mut offsets = vec![0usize; self.n as usize + 1];
        for &(i, _) in &self.edges {
            offsets[i as usize] += 1;
        }
        for v in 1..offsets.len() {
            offsets[v] += offsets[v - 1];
        }
        let targets = self.edges.iter().map(|&(_, j)| j).collect();
        ForwardAdjacency { offsets, targets }
    }

    pub(crate) fn check_vertex(&self, v: u64) -> Result<Vertex> {
        if v >= 1 && v <= u64::from(self.n) {
            Ok(v as Vertex)
        } else {
            Err(Error::VertexOutOfRange { vertex: v, n: self.n })
        }
    }

    /// Keeps each edge independently with probability `psi`.
    ///
    /// Edge `(i, j)` survives iff the draw of `rng` at position
    /// [`pair_index`]`(n, i, j)` passes the `psi` threshold. Two graphs on
    /// the same `n` filtered with equal streams therefore agree on every
    /// shared edge; in particular the filtered subgraph of `G` is the
    /// filtered clique intersected with `G`.
    pub fn filter_edges(&self, psi: f64, rng: &mut RandomStream) -> Result<RankGraph> {
        check_probability("psi", psi)?;
        let threshold = KeepThreshold::new(psi);
        if threshold.always() {
            return Ok(self.clone());
        }
        if threshold.never() {
            return Ok(RankGraph { n: self.n, edges: Vec::new(), weights: self.weights.as_ref().map(|_| Vec::new()) });
        }
        let mut edges = Vec::with_capacity((self.edges.len() as f64 * psi * 1.1) as usize + 16);
        let mut weights = self.weights.as_ref().map(|_| Vec::with_capacity(edges.capacity()));
        for (k, &(i, j)) in self.edges.iter().enumerate() {
            if threshold.accepts(rng.u64_at(pair_index(self.n, i, j))) {
                edges.push((i, j));
                if let (Some(out), Some(src)) = (weights.as_mut(), self.weights.as_ref()) {
                    out.push(src[k]);
                }
            }
        }
        Ok(RankGraph { n: self.n, edges, weights })
    }

    /// Returns this graph plus the single edge `(i, j)` (a no-op if present).
    pub fn with_edge(&self, i: Vertex, j: Vertex) -> Result<RankGraph> {
        check_edge(self.n, i.min(j), i.max(j))?;
        if self.is_weighted() {
            return Err(invalid("graph", "with_edge is only defined for rank-weighted graphs"));
        }
        let mut edges = self.edges.clone();
        edges.push((i.min(j), i.max(j)));
        Ok(RankGraph::from_edges_unchecked(self.n, edges))
    }
}

fn check_edge(n: u32, i: Vertex, j: Vertex) -> Result<()> {
    if i == j {
        return Err(Error::InvalidEdge { i, j, reason: "self-loop" });
    }
    if i > j {
        return Err(Error::InvalidEdge { i, j, reason: "endpoints must satisfy i < j" });
    }
    if i < 1 || j > n {
        return Err(Error::InvalidEdge { i, j, reason: "endpoint out of range" });
    }
    Ok(())
}

/// `K_n`.
pub fn complete_graph(n: u32) -> Result<RankGraph> {
    interval_graph_checked(n, n.saturating_sub(1))
}

/// All pairs at rank distance `1..=radius`. A radius of at least `n - 1`
/// gives `K_n`.
pub fn interval_graph(n: u32, radius: u32) -> Result<RankGraph> {
    interval_graph_checked(n, radius)
}

fn interval_graph_checked(n: u32, radius: u32) -> Result<RankGraph> {
    if n == 0 {
        return Err(invalid("n", "must be at least 1"));
    }
    let radius = radius.min(n - 1);
    let mut edges = Vec::with_capacity(n as usize * radius as usize);
    for i in 1..=n {
        let hi = (u64::from(i) + u64::from(radius)).min(u64::from(n)) as u32;
        edges.extend((i + 1..=hi).map(|j| (i, j)));
    }
    Ok(RankGraph { n, edges, weights: None })
}

/// Edge-set union. Weight tables, when both graphs carry one, must agree on
/// shared edges; mixing a weighted and an unweighted graph is rejected.
pub fn graph_union(g1: &RankGraph, g2: &RankGraph) -> Result<RankGraph> {
    if g1.n != g2.n {
        return Err(Error::VertexCountMismatch { left: g1.n, right: g2.n });
    }
    if g1.is_weighted() != g2.is_weighted() {
        return Err(invalid("graph", "cannot union a weighted with an unweighted graph"));
    }
    let (a, b) = (&g1.edges, &g2.edges);
    let mut edges = Vec::with_capacity(a.len() + b.len());
    let mut weights = g1.weights.as_ref().map(|_| Vec::with_capacity(a.len() + b.len()));
    let (mut x, mut y) = (0, 0);
    while x < a.len() || y < b.len() {
        let take_a = y == b.len() || (x < a.len() && a[x] <= b[y]);
        let take_b = x == a.len() || (y < b.len() && b[y] <= a[x]);
        if take_a && take_b {
            let (wa, wb) = (g1.weight_at(x), g2.weight_at(y));
            if let Some(w) = weights.as_mut() {
                if wa != wb {
                    return Err(Error::WeightConflict { i: a[x].0, j: a[x].1, left: wa, right: wb });
                }
                w.push(wa);
            }
            edges.push(a[x]);
            x += 1;
            y += 1;
        } else if take_a {
            if let Some(w) = weights.as_mut() {
                w.push(g1.weight_at(x));
            }
            edges.push(a[x]);
            x += 1;
        } else {
            if let Some(w) = weights.as_mut() {
                w.push(g2.weight_at(y));
            }
            edges.push(b[y]);
            y += 1;
        }
    }
    Ok(RankGraph { n: g1.n, edges, weights })
}
