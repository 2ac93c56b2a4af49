//! One-dimensional dependable exact spanners on `1..=n`.
//!
//! All constructions contain a *band*: every pair at rank distance at most
//! `L`. The band alone already has near-optimal deficiency after filtering
//! ([`dependable_interval_spanner`]) but long pairs need many hops. The
//! bounded-hop constructions cut `1..=n` into blocks of size `M`, build the
//! 2-hop median hierarchy on the blocks, and realise each hierarchy edge
//! either as a full biclique ([`biclique_block_spanner`]) or as a random
//! bipartite connector ([`four_hop_spanner`], [`khop_spanner`]).
//!
//! Parameter formulas use natural logarithms throughout:
//!
//! * `nu  = psi^(-1/(k-1))` (`k = 4` for the 4-hop construction),
//! * `M   = min(n, ceil((c7 * nu / psi) * ln n))`,
//! * `L   = min(n - 1, 6M)` for the 4-hop construction and
//!   `min(n - 1, (k + 4) M)` for the `k`-hop construction,
//! * `tau = min(1, c7^2 * nu / (psi * M))`.
//!
//! With `M = n` the block structure degenerates to a single block and the
//! band is `K_n`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{check_probability, invalid, Error, Result};
use crate::graph::{interval_graph, RankGraph, Vertex};
use crate::rng::{KeepThreshold, RandomStream};

pub const DEFAULT_C6: f64 = 4.0;
pub const DEFAULT_C7: f64 = 4.0;

/// User-facing parameters of a one-dimensional construction.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpannerParams {
    pub n: u32,
    pub psi: f64,
    pub k: u32,
    pub c6: f64,
    pub c7: f64,
    pub seed: u64,
}

impl SpannerParams {
    pub fn new(n: u32, psi: f64, k: u32, seed: u64) -> Result<Self> {
        let p = SpannerParams { n, psi, k, c6: DEFAULT_C6, c7: DEFAULT_C7, seed };
        p.validate()?;
        Ok(p)
    }

    pub fn with_constants(mut self, c6: f64, c7: f64) -> Result<Self> {
        self.c6 = c6;
        self.c7 = c7;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        check_n(self.n)?;
        check_psi(self.psi)?;
        if self.k < 3 {
            return Err(invalid("k", format!("hop budget {} is below 3", self.k)));
        }
        check_constant("c6", self.c6)?;
        check_constant("c7", self.c7)
    }

    pub fn derived(&self) -> Result<DerivedParams> {
        if self.k == 4 {
            DerivedParams::four_hop(self.n, self.psi, self.c7)
        } else {
            DerivedParams::k_hop(self.n, self.psi, self.k, self.c7)
        }
    }
}

fn check_n(n: u32) -> Result<()> {
    if n < 2 {
        return Err(invalid("n", format!("{n} is below 2")));
    }
    Ok(())
}

/// `psi = 1` is allowed: it is the failure-free design point (`nu = 1`).
fn check_psi(psi: f64) -> Result<()> {
    if psi > 0.0 && psi <= 1.0 {
        Ok(())
    } else {
        Err(invalid("psi", format!("{psi} is not in (0, 1]")))
    }
}

fn check_constant(name: &'static str, c: f64) -> Result<()> {
    if c > 0.0 && c.is_finite() {
        Ok(())
    } else {
        Err(invalid(name, format!("{c} must be positive")))
    }
}

/// Quantities derived from `(n, psi, k, c7)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DerivedParams {
    pub k: u32,
    /// Expansion base `nu`.
    pub nu: f64,
    /// Block size `M`.
    pub block_size: u32,
    /// Band radius `L`.
    pub radius: u32,
    /// Connector sampling rate `tau`.
    pub tau: f64,
}

impl DerivedParams {
    /// Parameters of the 4-hop construction (`L = 6M`).
    pub fn four_hop(n: u32, psi: f64, c7: f64) -> Result<Self> {
        Self::build(n, psi, 4, c7, 6)
    }

    /// Parameters of the `k`-hop construction (`L = (k + 4) M`).
    pub fn k_hop(n: u32, psi: f64, k: u32, c7: f64) -> Result<Self> {
        if k < 3 {
            return Err(invalid("k", format!("hop budget {k} is below 3")));
        }
        Self::build(n, psi, k, c7, k + 4)
    }

    fn build(n: u32, psi: f64, k: u32, c7: f64, radius_blocks: u32) -> Result<Self> {
        check_n(n)?;
        check_psi(psi)?;
        check_constant("c7", c7)?;
        let nu = psi.powf(-1.0 / f64::from(k - 1));
        let raw_m = (c7 * nu / psi * f64::from(n).ln()).ceil();
        let block_size = raw_m.clamp(1.0, f64::from(n)) as u32;
        let radius = (u64::from(radius_blocks) * u64::from(block_size)).min(u64::from(n - 1)) as u32;
        let tau = (c7 * c7 * nu / (psi * f64::from(block_size))).min(1.0);
        Ok(DerivedParams { k, nu, block_size, radius, tau })
    }
}

/// Band radius of the interval spanner: `min(n - 1, ceil((c6 / psi) ln n))`.
pub fn interval_radius(n: u32, psi: f64, c6: f64) -> Result<u32> {
    check_n(n)?;
    check_psi(psi)?;
    check_constant("c6", c6)?;
    let l = (c6 / psi * f64::from(n).ln()).ceil();
    Ok(l.min(f64::from(n - 1)).max(1.0) as u32)
}

/// The band of radius [`interval_radius`]. Values of `psi` below `1/n` are
/// accepted but logged, since the band is then the whole clique anyway.
pub fn dependable_interval_spanner(n: u32, psi: f64, c6: f64) -> Result<RankGraph> {
    let radius = interval_radius(n, psi, c6)?;
    if psi < 1.0 / f64::from(n) {
        log::warn!("psi = {psi} is below 1/n = {}; the interval spanner is K_n", 1.0 / f64::from(n));
    }
    interval_graph(n, radius)
}

/// Consecutive rank intervals `[lo, hi]` covering `1..=n`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BlockPartition {
    block_size: u32,
    blocks: Vec<(Vertex, Vertex)>,
}

impl BlockPartition {
    pub fn blocks(&self) -> &[(Vertex, Vertex)] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// 0-based index of the block holding `v`.
    pub fn block_of(&self, v: Vertex) -> usize {
        (((v - 1) / self.block_size) as usize).min(self.blocks.len() - 1)
    }
}

/// `floor(n / M)` blocks of size `M`, the remainder merged into the last
/// block; a single block when `M >= n`.
pub fn block_partition(n: u32, block_size: u32) -> Result<BlockPartition> {
    if n == 0 {
        return Err(invalid("n", "must be at least 1"));
    }
    if block_size == 0 {
        return Err(invalid("M", "block size must be at least 1"));
    }
    let m = block_size.min(n);
    let count = n / m;
    let mut blocks: Vec<(Vertex, Vertex)> = (0..count).map(|b| (b * m + 1, (b + 1) * m)).collect();
    if let Some(last) = blocks.last_mut() {
        last.1 = n;
    }
    Ok(BlockPartition { block_size: m, blocks })
}

/// The 2-hop median hierarchy on `[a, b]`: the median `m = floor((a + b) / 2)`
/// is joined to every other vertex of the range, then both sides recurse.
/// Every pair in the range gets a straight path of at most two hops.
pub fn two_hop_hierarchy(a: Vertex, b: Vertex) -> Result<Vec<(Vertex, Vertex)>> {
    if a > b {
        return Err(invalid("range", format!("[{a}, {b}] is empty")));
    }
    let mut edges = Vec::new();
    let mut stack = vec![(a, b)];
    while let Some((lo, hi)) = stack.pop() {
        if lo >= hi {
            continue;
        }
        let mid = ((u64::from(lo) + u64::from(hi)) / 2) as Vertex;
        edges.extend((lo..mid).map(|v| (v, mid)));
        edges.extend((mid + 1..=hi).map(|v| (mid, v)));
        if mid > lo {
            stack.push((lo, mid - 1));
        }
        stack.push((mid + 1, hi));
    }
    edges.sort_unstable();
    Ok(edges)
}

/// A random bipartite graph between blocks `x` and `y`: each of the
/// `|x| * |y|` cross pairs is drawn, in row-major order, with probability
/// `tau`.
pub fn bipartite_connector(
    x: (Vertex, Vertex),
    y: (Vertex, Vertex),
    tau: f64,
    rng: &mut RandomStream,
) -> Result<Vec<(Vertex, Vertex)>> {
    check_probability("tau", tau)?;
    if x.0 > x.1 || y.0 > y.1 {
        return Err(invalid("block", "empty interval"));
    }
    if x.0 <= y.1 && y.0 <= x.1 {
        return Err(Error::OverlappingBlocks { a_lo: x.0, a_hi: x.1, b_lo: y.0, b_hi: y.1 });
    }
    let threshold = KeepThreshold::new(tau);
    let mut edges = Vec::new();
    if threshold.never() {
        return Ok(edges);
    }
    for u in x.0..=x.1 {
        for v in y.0..=y.1 {
            if rng.bernoulli(threshold) {
                edges.push((u.min(v), u.max(v)));
            }
        }
    }
    Ok(edges)
}

/// Stream index of the connector realising hierarchy edge `(a, b)` between
/// 0-based block indices.
pub fn connector_stream_index(blocks: usize, a: usize, b: usize) -> u64 {
    (a as u64) * (blocks as u64) + b as u64
}

/// Band of radius `L` plus full bicliques over the block hierarchy. The
/// reference construction; parameters as for the 4-hop construction.
pub fn biclique_block_spanner(n: u32, psi: f64, c7: f64) -> Result<RankGraph> {
    let params = DerivedParams::four_hop(n, psi, c7)?;
    let partition = block_partition(n, params.block_size)?;
    let blocks = partition.blocks();
    let extra: Vec<(Vertex, Vertex)> = block_edges(&partition)?
        .into_iter()
        .flat_map(|(a, b)| {
            let (x, y) = (blocks[a], blocks[b]);
            (x.0..=x.1).flat_map(move |u| (y.0..=y.1).map(move |v| (u, v)))
        })
        .collect();
    Ok(band_plus(n, params.radius, extra))
}

/// The 4-hop construction: band of radius `6M` plus a bipartite connector
/// at rate `tau` for every edge of the block hierarchy.
pub fn four_hop_spanner(n: u32, psi: f64, c7: f64, seed: u64) -> Result<RankGraph> {
    let params = DerivedParams::four_hop(n, psi, c7)?;
    connector_construction(n, &params, seed)
}

/// The `k`-hop construction: as [`four_hop_spanner`] with `nu` and `L`
/// taken from `k`.
pub fn khop_spanner(n: u32, psi: f64, k: u32, c7: f64, seed: u64) -> Result<RankGraph> {
    let params = DerivedParams::k_hop(n, psi, k, c7)?;
    connector_construction(n, &params, seed)
}

/// Builds band plus connectors for already-derived parameters.
pub fn connector_construction(n: u32, params: &DerivedParams, seed: u64) -> Result<RankGraph> {
    let partition = block_partition(n, params.block_size)?;
    let blocks = partition.blocks();
    let hierarchy = block_edges(&partition)?;
    let per_edge = hierarchy
        .par_iter()
        .map(|&(a, b)| {
            let mut rng = RandomStream::derive(seed, connector_stream_index(blocks.len(), a, b));
            bipartite_connector(blocks[a], blocks[b], params.tau, &mut rng)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(band_plus(n, params.radius, per_edge.into_iter().flatten().collect()))
}

/// Edges of the 2-hop hierarchy on 0-based block indices.
pub fn block_edges(partition: &BlockPartition) -> Result<Vec<(usize, usize)>> {
    let count = partition.len() as Vertex;
    Ok(two_hop_hierarchy(1, count)?
        .into_iter()
        .map(|(a, b)| (a as usize - 1, b as usize - 1))
        .collect())
}

/// Band of radius `radius` merged with `extra` (pairs `i < j`, any order,
/// repeats allowed).
fn band_plus(n: u32, radius: u32, mut extra: Vec<(Vertex, Vertex)>) -> RankGraph {
    extra.retain(|&(i, j)| j - i > radius);
    extra.sort_unstable();
    extra.dedup();
    let band = interval_graph(n, radius).expect("n >= 1");
    if extra.is_empty() {
        return band;
    }
    let mut edges = Vec::with_capacity(band.edge_count() + extra.len());
    let mut rest = extra.as_slice();
    let mut band_edges = band.edges();
    for i in 1..=n {
        let split = band_edges.partition_point(|&(a, _)| a == i);
        edges.extend_from_slice(&band_edges[..split]);
        band_edges = &band_edges[split..];
        let split = rest.partition_point(|&(a, _)| a == i);
        edges.extend_from_slice(&rest[..split]);
        rest = &rest[split..];
    }
    RankGraph::from_edges_unchecked(n, edges)
}

/// Number of vertices of `target` adjacent (in `edges`) to at least one
/// vertex of `sources`.
pub fn neighbourhood_size(edges: &[(Vertex, Vertex)], sources: &[Vertex], target: (Vertex, Vertex)) -> usize {
    let src: std::collections::HashSet<Vertex> = sources.iter().copied().collect();
    let in_target = |v: Vertex| v >= target.0 && v <= target.1;
    let mut hit: Vec<Vertex> = edges
        .iter()
        .filter_map(|&(u, v)| {
            if src.contains(&u) && in_target(v) {
                Some(v)
            } else if src.contains(&v) && in_target(u) {
                Some(u)
            } else {
                None
            }
        })
        .collect();
    hit.sort_unstable();
    hit.dedup();
    hit.len()
}
