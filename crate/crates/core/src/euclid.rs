//! Euclidean dependable `(1+ε)`-spanners.
//!
//! A point set is ordered by every ordering of a locality-sensitive family
//! ([`crate::lso`]); each ordering turns the points into ranks `1..=n`, a
//! one-dimensional bounded-hop construction is built on the ranks, and the
//! rank edges are mapped back to point pairs. The spanner is the union over
//! the family, weighted by Euclidean distance.
//!
//! Families for small `ε` are large, while a union over many orderings of a
//! few hundred points quickly becomes the complete graph. Orderings are
//! therefore visited in a fixed order and the union stops as soon as it
//! contains every pair, which yields exactly the full union.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::graph::{RankGraph, Vertex};
use crate::lso::{build_lso_family, sort_by_ordering, Ordering};
use crate::rng::RandomStream;
use crate::spanner1d::{connector_construction, DerivedParams};

/// Normalised coordinates land in `[0, 1 - NORMALIZE_MARGIN]`.
pub const NORMALIZE_MARGIN: f64 = 1.0 / 65536.0;

/// Relative slack when comparing a path length against `(1+ε)|uv|`.
pub const STRETCH_SLACK: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PointSet {
    d: u32,
    points: Vec<Vec<f64>>,
    scale: f64,
}

impl PointSet {
    /// Points already in `[0,1)^d`, with scale 1.
    pub fn new(points: Vec<Vec<f64>>) -> Result<Self> {
        Self::with_scale(points, 1.0)
    }

    pub fn with_scale(points: Vec<Vec<f64>>, scale: f64) -> Result<Self> {
        let d = check_shape(&points)?;
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(invalid("scale", format!("{scale} must be positive")));
        }
        for (index, p) in points.iter().enumerate() {
            if let Some(&value) = p.iter().find(|x| !(0.0..1.0).contains(*x)) {
                return Err(Error::CoordinateOutOfRange { index, value });
            }
        }
        let dups = duplicate_pairs(&points);
        if !dups.is_empty() {
            return Err(Error::DuplicatePoints(dups));
        }
        Ok(PointSet { d, points, scale })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dimension(&self) -> u32 {
        self.d
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i]
    }

    /// Input units per normalised unit.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Normalised Euclidean distance.
    pub fn distance(&self, i: usize, j: usize) -> f64 {
        distance(&self.points[i], &self.points[j])
    }

    pub fn to_input_units(&self, length: f64) -> f64 {
        length * self.scale
    }
}

fn check_shape(points: &[Vec<f64>]) -> Result<u32> {
    if points.len() < 2 {
        return Err(invalid("points", format!("need at least 2 points, got {}", points.len())));
    }
    let d = points[0].len();
    if d == 0 {
        return Err(invalid("points", "dimension must be at least 1"));
    }
    if let Some(i) = points.iter().position(|p| p.len() != d) {
        return Err(invalid("points", format!("point {i} has {} coordinates, expected {d}", points[i].len())));
    }
    if let Some(i) = points.iter().position(|p| p.iter().any(|x| !x.is_finite())) {
        return Err(invalid("points", format!("point {i} has a non-finite coordinate")));
    }
    Ok(d as u32)
}

/// Pairs `(first, later)` of indices with identical coordinates.
fn duplicate_pairs(points: &[Vec<f64>]) -> Vec<(usize, usize)> {
    let mut idx: Vec<usize> = (0..points.len()).collect();
    let cmp = |a: &usize, b: &usize| {
        points[*a]
            .iter()
            .zip(&points[*b])
            .map(|(x, y)| x.partial_cmp(y).expect("finite"))
            .find(|c| c.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(b))
    };
    idx.sort_by(cmp);
    let mut pairs = Vec::new();
    let mut first = 0;
    for k in 1..idx.len() {
        if points[idx[k]] == points[idx[first]] {
            pairs.push((idx[first], idx[k]));
        } else {
            first = k;
        }
    }
    pairs.sort_unstable();
    pairs
}

/// Maps raw coordinates into `[0,1)^d`.
///
/// Sets that already lie in `[0, 1 - NORMALIZE_MARGIN]^d` are kept as they
/// are (scale 1). Otherwise the bounding box minimum moves to the origin and
/// the largest box extent `E` is scaled to `1 - NORMALIZE_MARGIN`, giving
/// scale `E / (1 - NORMALIZE_MARGIN)`.
pub fn normalize_points(raw: Vec<Vec<f64>>) -> Result<PointSet> {
    let d = check_shape(&raw)? as usize;
    let top = 1.0 - NORMALIZE_MARGIN;
    if raw.iter().flatten().all(|&x| (0.0..=top).contains(&x)) {
        return PointSet::with_scale(raw, 1.0);
    }
    let mut lo = vec![f64::INFINITY; d];
    let mut hi = vec![f64::NEG_INFINITY; d];
    for p in &raw {
        for a in 0..d {
            lo[a] = lo[a].min(p[a]);
            hi[a] = hi[a].max(p[a]);
        }
    }
    let extent = (0..d).map(|a| hi[a] - lo[a]).fold(0.0, f64::max);
    if extent == 0.0 {
        return Err(Error::DuplicatePoints((1..raw.len()).map(|i| (0, i)).collect()));
    }
    let factor = top / extent;
    let points: Vec<Vec<f64>> =
        raw.iter().map(|p| (0..d).map(|a| ((p[a] - lo[a]) * factor).min(top)).collect()).collect();
    PointSet::with_scale(points, extent / top)
}

pub fn distance(p: &[f64], q: &[f64]) -> f64 {
    p.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
}

/// A graph on point indices `0..n` weighted by Euclidean distance. Point `i`
/// is vertex `i + 1` of the underlying [`RankGraph`].
#[derive(Clone, Debug, PartialEq)]
pub struct GeometricGraph {
    graph: RankGraph,
}

impl GeometricGraph {
    /// The edges of `g` weighted by the distances between `points`.
    pub fn on_points(points: &PointSet, g: &RankGraph) -> Result<Self> {
        if g.n() as usize != points.len() {
            return Err(Error::VertexCountMismatch { left: g.n(), right: points.len() as u32 });
        }
        let unweighted = RankGraph::from_edges_unchecked(g.n(), g.edges().to_vec());
        Ok(GeometricGraph {
            graph: unweighted.with_weights_from(|i, j| points.distance(i as usize - 1, j as usize - 1)),
        })
    }

    /// Wraps a weighted graph as is.
    pub fn from_weighted(graph: RankGraph) -> Result<Self> {
        if !graph.is_weighted() {
            return Err(invalid("graph", "a geometric graph needs edge weights"));
        }
        Ok(GeometricGraph { graph })
    }

    pub fn n(&self) -> usize {
        self.graph.n() as usize
    }

    pub fn graph(&self) -> &RankGraph {
        &self.graph
    }

    pub fn into_graph(self) -> RankGraph {
        self.graph
    }

    pub fn edge_count(&self) -> usize {
        self.graph.edge_count()
    }

    pub fn contains(&self, u: usize, v: usize) -> bool {
        let (a, b) = (u.min(v) as Vertex + 1, u.max(v) as Vertex + 1);
        u != v && self.graph.contains(a, b)
    }

    pub fn weight(&self, u: usize, v: usize) -> Option<f64> {
        if u == v {
            return None;
        }
        self.graph.weight(u.min(v) as Vertex + 1, u.max(v) as Vertex + 1)
    }

    /// `(u, v, weight)` with `u < v`, 0-based.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.graph
            .edges()
            .iter()
            .enumerate()
            .map(|(k, &(i, j))| (i as usize - 1, j as usize - 1, self.graph.weight_at(k)))
    }

    /// Keeps every edge independently with probability `psi`.
    pub fn filtered(&self, psi: f64, rng: &mut RandomStream) -> Result<Self> {
        Ok(GeometricGraph { graph: self.graph.filter_edges(psi, rng)? })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpannerMode {
    FourHop,
    LogHop,
}

impl SpannerMode {
    /// Hop budget of the one-dimensional construction: 4, or
    /// `max(3, ceil(log2(1/psi)))` in log-hop mode.
    pub fn hops(self, psi: f64) -> u32 {
        match self {
            SpannerMode::FourHop => 4,
            SpannerMode::LogHop => ((1.0 / psi).log2().ceil() as u32).max(3),
        }
    }

    /// Locality parameter of the ordering family.
    pub fn family_eps(self, eps: f64, psi: f64) -> f64 {
        match self {
            SpannerMode::FourHop => eps / 8.0,
            SpannerMode::LogHop => eps / (2.0 * f64::from(self.hops(psi))),
        }
    }
}

impl std::str::FromStr for SpannerMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "four-hop" | "fourhop" | "4" => Ok(SpannerMode::FourHop),
            "log-hop" | "loghop" => Ok(SpannerMode::LogHop),
            other => Err(invalid("mode", format!("unknown mode {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EuclidConfig {
    pub eps: f64,
    pub psi: f64,
    pub c7: f64,
    pub mode: SpannerMode,
    pub seed: u64,
    /// Stop after this many orderings even if the union is not complete.
    pub ordering_limit: Option<u64>,
}

impl EuclidConfig {
    pub fn new(eps: f64, psi: f64, mode: SpannerMode, seed: u64) -> Self {
        EuclidConfig { eps, psi, c7: crate::spanner1d::DEFAULT_C7, mode, seed, ordering_limit: None }
    }
}

/// What a Euclidean build did.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BuildInfo {
    pub mode: SpannerMode,
    pub eps: f64,
    pub psi: f64,
    pub c7: f64,
    pub seed: u64,
    pub hops: u32,
    pub family_eps: f64,
    pub family_size: u64,
    /// Orderings whose graphs went into the union.
    pub orderings_used: u64,
    /// The union reached the complete graph.
    pub saturated: bool,
    pub derived: DerivedParams,
}

#[derive(Clone, Debug)]
pub struct EuclidSpanner {
    pub graph: GeometricGraph,
    pub info: BuildInfo,
}

pub fn euclidean_dependable_spanner(
    points: &PointSet,
    eps: f64,
    psi: f64,
    c7: f64,
    mode: SpannerMode,
    seed: u64,
) -> Result<EuclidSpanner> {
    build_euclidean(points, &EuclidConfig { c7, ..EuclidConfig::new(eps, psi, mode, seed) })
}

pub fn build_euclidean(points: &PointSet, cfg: &EuclidConfig) -> Result<EuclidSpanner> {
    if !(cfg.eps > 0.0 && cfg.eps < 1.0) {
        return Err(invalid("eps", format!("{} is not in (0, 1)", cfg.eps)));
    }
    let n = u32::try_from(points.len()).map_err(|_| invalid("points", "too many points"))?;
    let hops = cfg.mode.hops(cfg.psi);
    let derived = match cfg.mode {
        SpannerMode::FourHop => DerivedParams::four_hop(n, cfg.psi, cfg.c7)?,
        SpannerMode::LogHop => DerivedParams::k_hop(n, cfg.psi, hops, cfg.c7)?,
    };
    let family_eps = cfg.mode.family_eps(cfg.eps, cfg.psi);
    let family = build_lso_family(family_eps, points.dimension())?;
    let limit = cfg.ordering_limit.unwrap_or(u64::MAX).min(family.len());

    let mut union = PairSet::new(points.len());
    let mut used = 0u64;
    let batch = 2 * rayon::current_num_threads().max(1);
    let mut orderings = family.iter_interleaved().take(limit as usize).peekable();
    while orderings.peek().is_some() && !union.is_full() {
        let chunk: Vec<Ordering> = orderings.by_ref().take(batch).collect();
        let built = chunk
            .par_iter()
            .map(|o| ordering_edges(points, o, &derived, cfg.seed))
            .collect::<Result<Vec<_>>>()?;
        for edges in built {
            if union.is_full() {
                break;
            }
            union.extend(&edges);
            used += 1;
        }
    }
    let saturated = union.is_full();
    let graph = GeometricGraph::on_points(points, &RankGraph::from_edges_unchecked(n, union.into_edges()))?;
    let info = BuildInfo {
        mode: cfg.mode,
        eps: cfg.eps,
        psi: cfg.psi,
        c7: cfg.c7,
        seed: cfg.seed,
        hops,
        family_eps,
        family_size: family.len(),
        orderings_used: used,
        saturated,
        derived,
    };
    Ok(EuclidSpanner { graph, info })
}

/// Rank construction for one ordering, as 1-based point-vertex pairs.
fn ordering_edges(points: &PointSet, o: &Ordering, derived: &DerivedParams, seed: u64) -> Result<Vec<(Vertex, Vertex)>> {
    let order = sort_by_ordering(o, points.points())?;
    let n = points.len() as u32;
    let ranks = connector_construction(n, derived, RandomStream::child_seed(seed, o.id))?;
    Ok(ranks
        .edges()
        .iter()
        .map(|&(a, b)| {
            let (p, q) = (order[a as usize - 1] as Vertex + 1, order[b as usize - 1] as Vertex + 1);
            (p.min(q), p.max(q))
        })
        .collect())
}

/// Upper-triangular bit matrix of vertex pairs.
struct PairSet {
    n: usize,
    words: usize,
    bits: Vec<u64>,
    count: u64,
}

impl PairSet {
    fn new(n: usize) -> Self {
        let words = n / 64 + 1;
        PairSet { n, words, bits: vec![0; (n + 1) * words], count: 0 }
    }

    fn is_full(&self) -> bool {
        self.count == (self.n as u64) * (self.n as u64 - 1) / 2
    }

    fn extend(&mut self, edges: &[(Vertex, Vertex)]) {
        for &(i, j) in edges {
            let slot = &mut self.bits[i as usize * self.words + j as usize / 64];
            let mask = 1u64 << (j % 64);
            if *slot & mask == 0 {
                *slot |= mask;
                self.count += 1;
            }
        }
    }

    fn into_edges(self) -> Vec<(Vertex, Vertex)> {
        let mut edges = Vec::with_capacity(self.count as usize);
        for i in 1..=self.n {
            let row = &self.bits[i * self.words..(i + 1) * self.words];
            for (w, &word) in row.iter().enumerate() {
                let mut x = word;
                while x != 0 {
                    let j = w * 64 + x.trailing_zeros() as usize;
                    edges.push((i as Vertex, j as Vertex));
                    x &= x - 1;
                }
            }
        }
        edges
    }
}

/// Undirected weighted adjacency on 0-based vertices.
struct Adjacency {
    offsets: Vec<usize>,
    targets: Vec<u32>,
    weights: Vec<f64>,
}

impl Adjacency {
    fn new(h: &GeometricGraph) -> Self {
        let n = h.n();
        let mut degree = vec![0usize; n + 1];
        for (u, v, _) in h.edges() {
            degree[u + 1] += 1;
            degree[v + 1] += 1;
        }
        for i in 0..n {
            degree[i + 1] += degree[i];
        }
        let offsets = degree.clone();
        let mut fill = degree;
        let mut targets = vec![0u32; offsets[n]];
        let mut weights = vec![0.0; offsets[n]];
        for (u, v, w) in h.edges() {
            for (a, b) in [(u, v), (v, u)] {
                targets[fill[a]] = b as u32;
                weights[fill[a]] = w;
                fill[a] += 1;
            }
        }
        Adjacency { offsets, targets, weights }
    }

    fn neighbours(&self, u: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.offsets[u]..self.offsets[u + 1];
        self.targets[r.clone()].iter().map(|&t| t as usize).zip(self.weights[r].iter().copied())
    }
}

const NO_PRED: u32 = u32::MAX;

/// Shortest paths from one source using at most `k` edges, with the
/// predecessor of every improvement kept per round.
#[derive(Clone, Debug)]
pub struct HopTree {
    n: usize,
    k: u32,
    source: usize,
    /// `dist[t * n + v]`: shortest length with at most `t` edges.
    dist: Vec<f64>,
    /// `pred[t * n + v]`: last hop of the round-`t` improvement, or none if
    /// round `t` inherited round `t - 1`.
    pred: Vec<u32>,
}

impl HopTree {
    pub fn distance(&self, v: usize) -> f64 {
        self.dist[self.k as usize * self.n + v]
    }

    /// Vertices of a path realising [`HopTree::distance`], from the source
    /// to `v`, or `None` if `v` is out of reach.
    pub fn path(&self, v: usize) -> Option<Vec<usize>> {
        if !self.distance(v).is_finite() {
            return None;
        }
        let mut path = vec![v];
        let mut x = v;
        let mut t = self.k as usize;
        while x != self.source {
            let p = self.pred[t * self.n + x];
            if p != NO_PRED {
                x = p as usize;
                path.push(x);
            }
            t -= 1;
        }
        path.reverse();
        Some(path)
    }
}

fn check_vertex(h: &GeometricGraph, u: usize) -> Result<()> {
    if u < h.n() {
        Ok(())
    } else {
        Err(Error::VertexOutOfRange { vertex: u as u64, n: h.n() as u32 })
    }
}

fn hop_tree(adj: &Adjacency, n: usize, source: usize, k: u32) -> HopTree {
    let rounds = k as usize;
    let mut dist = vec![f64::INFINITY; (rounds + 1) * n];
    let mut pred = vec![NO_PRED; (rounds + 1) * n];
    dist[source] = 0.0;
    let mut frontier = vec![source];
    for t in 1..=rounds {
        let (prev, cur) = dist.split_at_mut(t * n);
        let prev = &prev[(t - 1) * n..];
        let cur = &mut cur[..n];
        cur.copy_from_slice(prev);
        let mut next = Vec::new();
        for &x in &frontier {
            for (y, w) in adj.neighbours(x) {
                let cand = prev[x] + w;
                if cand < cur[y] {
                    if cur[y] == prev[y] {
                        next.push(y);
                    }
                    cur[y] = cand;
                    pred[t * n + y] = x as u32;
                }
            }
        }
        if next.is_empty() {
            // Later rounds inherit everything.
            for s in t + 1..=rounds {
                dist.copy_within(t * n..(t + 1) * n, s * n);
            }
            break;
        }
        frontier = next;
    }
    HopTree { n, k, source, dist, pred }
}

/// Shortest paths from `u` using at most `k` edges.
pub fn bounded_hop_tree(h: &GeometricGraph, u: usize, k: u32) -> Result<HopTree> {
    check_vertex(h, u)?;
    if k == 0 {
        return Err(invalid("k", "hop bound must be at least 1"));
    }
    Ok(hop_tree(&Adjacency::new(h), h.n(), u, k))
}

/// Minimum total weight of a `u`–`v` path with at most `k` edges, or
/// infinity.
pub fn bounded_hop_distance(h: &GeometricGraph, u: usize, v: usize, k: u32) -> Result<f64> {
    check_vertex(h, v)?;
    Ok(bounded_hop_tree(h, u, k)?.distance(v))
}

/// Whether a path length meets the `(1+eps)` stretch for distance `d`.
pub fn within_stretch(length: f64, d: f64, eps: f64) -> bool {
    length <= (1.0 + eps) * d * (1.0 + STRETCH_SLACK)
}

/// Unordered pairs without a path of at most `k` edges and length at most
/// `(1+eps)` times their distance.
pub fn count_stretch_failures(h: &GeometricGraph, points: &PointSet, eps: f64, k: u32) -> Result<u64> {
    Ok(stretch_report(h, points, eps, k, false)?.failures)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct StretchReport {
    pub failures: u64,
    /// Successful pairs whose extracted path does not re-sum to the reported
    /// length within `1e-9`, has more than `k` edges, uses a missing edge, or
    /// exceeds the stretch. Only filled when paths are checked.
    pub unsound: u64,
    pub pairs: u64,
}

/// Failure count plus, if `check_paths`, an audit of the path behind every
/// successful pair.
pub fn stretch_report(h: &GeometricGraph, points: &PointSet, eps: f64, k: u32, check_paths: bool) -> Result<StretchReport> {
    let n = h.n();
    if n != points.len() {
        return Err(Error::VertexCountMismatch { left: n as u32, right: points.len() as u32 });
    }
    if k == 0 {
        return Err(invalid("k", "hop bound must be at least 1"));
    }
    let adj = Adjacency::new(h);
    let per_source: Vec<(u64, u64)> = (0..n)
        .into_par_iter()
        .map(|u| {
            let tree = hop_tree(&adj, n, u, k);
            let mut failed = 0;
            let mut unsound = 0;
            for v in u + 1..n {
                let d = points.distance(u, v);
                let len = tree.distance(v);
                if !within_stretch(len, d, eps) {
                    failed += 1;
                } else if check_paths && !path_is_sound(h, &tree, v, len, d, eps, k) {
                    unsound += 1;
                }
            }
            (failed, unsound)
        })
        .collect();
    let (failures, unsound) = per_source.iter().fold((0, 0), |(a, b), &(x, y)| (a + x, b + y));
    Ok(StretchReport { failures, unsound, pairs: (n as u64) * (n as u64 - 1) / 2 })
}

fn path_is_sound(h: &GeometricGraph, tree: &HopTree, v: usize, len: f64, d: f64, eps: f64, k: u32) -> bool {
    let Some(path) = tree.path(v) else { return false };
    if path.len() < 2 || path.len() - 1 > k as usize {
        return false;
    }
    let mut total = 0.0;
    for w in path.windows(2) {
        match h.weight(w[0], w[1]) {
            Some(x) => total += x,
            None => return false,
        }
    }
    (total - len).abs() <= 1e-9 * len.max(f64::MIN_POSITIVE) && within_stretch(total, d, eps * (1.0 + 1e-9))
}
