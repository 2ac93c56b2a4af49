//! Straight-path reachability, deficiency counting and Monte Carlo
//! estimation of expected deficiency under edge failure.
//!
//! A straight path visits strictly increasing ranks. The deficiency of a
//! graph is the number of pairs `i < j` with no straight path from `i` to
//! `j`; the `k`-hop deficiency counts pairs whose shortest straight path has
//! more than `k` edges.

use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::bitrows::BitRows;
use crate::error::{check_probability, invalid, Result};
use crate::graph::{pair_count, RankGraph, Vertex};
use crate::rng::RandomStream;

/// Minimum number of edges on a straight path; [`Hops::INFINITE`] when no
/// straight path exists.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Hops(u32);

impl Hops {
    pub const INFINITE: Hops = Hops(u32::MAX);

    pub fn finite(h: u32) -> Hops {
        assert!(h != u32::MAX);
        Hops(h)
    }

    pub fn get(self) -> Option<u32> {
        (self != Hops::INFINITE).then_some(self.0)
    }

    pub fn is_finite(self) -> bool {
        self != Hops::INFINITE
    }
}

impl fmt::Display for Hops {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.get() {
            Some(h) => write!(f, "{h}"),
            None => f.write_str("inf"),
        }
    }
}

/// For source `i`, entry `k` tells whether `j = i + 1 + k` is reachable by a
/// straight path. One forward sweep, `O(|E|)`.
pub fn straight_reachable(g: &RankGraph, i: u64) -> Result<Vec<bool>> {
    let i = g.check_vertex(i)?;
    let adj = g.forward_adjacency();
    let n = g.n();
    let mut reach = vec![false; (n - i) as usize];
    let offset = |v: Vertex| (v - i - 1) as usize;
    for &j in adj.successors(i) {
        reach[offset(j)] = true;
    }
    for t in i + 1..=n {
        if reach[offset(t)] {
            for &j in adj.successors(t) {
                reach[offset(j)] = true;
            }
        }
    }
    Ok(reach)
}

/// For source `i`, entry `k` is the minimum hop count of a straight path to
/// `j = i + 1 + k`.
pub fn straight_hops(g: &RankGraph, i: u64) -> Result<Vec<Hops>> {
    let i = g.check_vertex(i)?;
    Ok(hops_from(g.n(), &g.forward_adjacency(), i))
}

fn hops_from(n: u32, adj: &crate::graph::ForwardAdjacency, i: Vertex) -> Vec<Hops> {
    let mut hops = vec![Hops::INFINITE; (n - i) as usize];
    let offset = |v: Vertex| (v - i - 1) as usize;
    for &j in adj.successors(i) {
        hops[offset(j)] = Hops(1);
    }
    for t in i + 1..=n {
        let Some(h) = hops[offset(t)].get() else { continue };
        for &j in adj.successors(t) {
            let slot = &mut hops[offset(j)];
            if h + 1 < slot.0 {
                *slot = Hops(h + 1);
            }
        }
    }
    hops
}

/// Number of pairs `i < j` without a straight path.
pub fn deficiency(g: &RankGraph) -> u64 {
    failure_counts(g, None, None).total()
}

/// Number of pairs `i < j` without a straight path of at most `k` edges.
pub fn khop_deficiency(g: &RankGraph, k: u32) -> Result<u64> {
    if k == 0 {
        return Err(invalid("k", "hop bound must be at least 1"));
    }
    Ok(failure_counts(g, Some(k), None).total())
}

/// Failed pairs split by rank distance: `short` have `j - i <= radius`,
/// `long` the rest.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct FailureSplit {
    pub short: u64,
    pub long: u64,
}

impl FailureSplit {
    pub fn total(self) -> u64 {
        self.short + self.long
    }
}

/// Like [`khop_deficiency`] (or [`deficiency`] when `hop_bound` is `None`)
/// but split into short and long pairs around `radius`.
pub fn split_failures(g: &RankGraph, hop_bound: Option<u32>, radius: u32) -> Result<FailureSplit> {
    if hop_bound == Some(0) {
        return Err(invalid("k", "hop bound must be at least 1"));
    }
    Ok(failure_counts(g, hop_bound, Some(radius)))
}

/// All-sources reachability with bit rows. Row `i` holds the set of `j > i`
/// reachable from `i` (within the hop bound). The unbounded case is one
/// descending pass; the bounded case runs `k - 1` layered rounds and stops
/// early at a fixpoint. Cost `O(rounds * |E| * n / 64)` word operations.
fn failure_counts(g: &RankGraph, hop_bound: Option<u32>, radius: Option<u32>) -> FailureSplit {
    let n = g.n() as usize;
    if n < 2 {
        return FailureSplit::default();
    }
    let adj = g.forward_adjacency();
    let bounded = hop_bound.filter(|&k| (k as usize) < n - 1);

    let rows = match bounded {
        None => {
            let mut r = BitRows::new(n + 1, n);
            for i in (1..=n).rev() {
                for &j in adj.successors(i as Vertex) {
                    r.set(i, j as usize);
                    r.or_into_lower(i, j as usize, j as usize);
                }
            }
            r
        }
        Some(k) => {
            let mut prev = BitRows::new(n + 1, n);
            for i in 1..=n {
                for &j in adj.successors(i as Vertex) {
                    prev.set(i, j as usize);
                }
            }
            let mut cur = prev.clone();
            for _ in 1..k {
                cur.clear();
                for i in 1..=n {
                    for &j in adj.successors(i as Vertex) {
                        cur.set(i, j as usize);
                        cur.or_from(i, &prev, j as usize, j as usize);
                    }
                }
                if cur == prev {
                    break;
                }
                std::mem::swap(&mut cur, &mut prev);
            }
            prev
        }
    };

    let radius = radius.map_or(n, |r| r as usize);
    let mut split = FailureSplit::default();
    for i in 1..n {
        let short_hi = (i + radius).min(n);
        let short_reached = rows.count_range(i, i + 1, short_hi);
        split.short += (short_hi - i) as u64 - short_reached;
        if short_hi < n {
            let long_reached = rows.count_range(i, short_hi + 1, n);
            split.long += (n - short_hi) as u64 - long_reached;
        }
    }
    split
}

/// Unbiased deficiency estimate from `sources` source vertices drawn
/// uniformly with replacement: the sampled per-source failure counts summed
/// and scaled by `n / sources`.
pub fn sampled_deficiency(g: &RankGraph, hop_bound: Option<u32>, sources: u32, rng: &mut RandomStream) -> Result<f64> {
    if sources == 0 {
        return Err(invalid("sources", "must be at least 1"));
    }
    if hop_bound == Some(0) {
        return Err(invalid("k", "hop bound must be at least 1"));
    }
    let n = g.n();
    if n < 2 {
        return Ok(0.0);
    }
    let adj = g.forward_adjacency();
    let picks: Vec<Vertex> = (0..sources).map(|_| rng.below(u64::from(n)) as Vertex + 1).collect();
    let failed: u64 = picks
        .par_iter()
        .map(|&i| {
            let bound = hop_bound.unwrap_or(u32::MAX - 1);
            hops_from(n, &adj, i).iter().filter(|h| h.0 > bound).count() as u64
        })
        .sum();
    Ok(failed as f64 * f64::from(n) / f64::from(sources))
}

/// Probability that two vertices at rank distance `delta` have neither a
/// direct edge nor a 2-hop straight path in a filtered clique. The direct
/// edge and the `delta - 1` two-hop paths use disjoint edges, so this is
/// exactly `(1 - psi) * (1 - psi^2)^(delta - 1)`.
pub fn no_two_hop_probability(delta: u64, psi: f64) -> Result<f64> {
    if delta == 0 {
        return Err(invalid("delta", "rank distance must be at least 1"));
    }
    check_probability("psi", psi)?;
    Ok((1.0 - psi) * (1.0 - psi * psi).powf((delta - 1) as f64))
}

/// Expected number of 2-hop failures of the filtered `K_n`.
pub fn expected_two_hop_deficiency(n: u32, psi: f64) -> Result<f64> {
    if n < 2 {
        return Err(invalid("n", "must be at least 2"));
    }
    if !(psi > 0.0 && psi <= 1.0) {
        return Err(invalid("psi", format!("{psi} is not in (0, 1]")));
    }
    let mut total = 0.0;
    for delta in 1..u64::from(n) {
        total += (u64::from(n) - delta) as f64 * no_two_hop_probability(delta, psi)?;
    }
    Ok(total)
}

/// How each trial counts failed pairs.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum CountMode {
    /// Every source, exact.
    #[default]
    Exact,
    /// This many uniformly sampled sources per trial, scaled by `n / s`.
    SampledSources(u32),
}

/// Aggregate of a Monte Carlo deficiency run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DeficiencyReport {
    pub n: u32,
    pub psi: f64,
    pub seed: u64,
    pub trials: u64,
    pub hop_bound: Option<u32>,
    pub mean_failed_pairs: f64,
    pub stderr: f64,
    pub per_trial_counts: Vec<f64>,
}

impl DeficiencyReport {
    pub fn from_counts(n: u32, psi: f64, seed: u64, hop_bound: Option<u32>, per_trial_counts: Vec<f64>) -> Self {
        let (mean, stderr) = mean_and_stderr(&per_trial_counts);
        DeficiencyReport {
            n,
            psi,
            seed,
            trials: per_trial_counts.len() as u64,
            hop_bound,
            mean_failed_pairs: mean,
            stderr,
            per_trial_counts,
        }
    }

    pub const CSV_HEADER: [&'static str; 7] = ["n", "psi", "hop_bound", "trials", "mean", "stderr", "seed"];

    /// The report as a CSV record in [`Self::CSV_HEADER`] order.
    pub fn csv_record(&self) -> [String; 7] {
        [
            self.n.to_string(),
            self.psi.to_string(),
            self.hop_bound.map_or_else(|| "inf".to_string(), |k| k.to_string()),
            self.trials.to_string(),
            self.mean_failed_pairs.to_string(),
            self.stderr.to_string(),
            self.seed.to_string(),
        ]
    }
}

/// Mean and standard error (sample standard deviation over `sqrt(len)`;
/// zero for fewer than two values).
pub fn mean_and_stderr(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let len = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / len;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (len - 1.0);
    (mean, (var / len).sqrt())
}

/// Estimates the expected deficiency of `g` filtered at `psi`. Trial `t`
/// filters with stream `t` of `master`, so results do not depend on how
/// trials are scheduled.
pub fn monte_carlo_deficiency(g: &RankGraph, psi: f64, trials: u64, hop_bound: Option<u32>, master: u64) -> Result<DeficiencyReport> {
    monte_carlo_deficiency_with(g, psi, trials, hop_bound, master, CountMode::Exact)
}

pub fn monte_carlo_deficiency_with(
    g: &RankGraph,
    psi: f64,
    trials: u64,
    hop_bound: Option<u32>,
    master: u64,
    mode: CountMode,
) -> Result<DeficiencyReport> {
    if trials == 0 {
        return Err(invalid("trials", "must be at least 1"));
    }
    check_probability("psi", psi)?;
    if hop_bound == Some(0) {
        return Err(invalid("k", "hop bound must be at least 1"));
    }
    let counts = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut stream = RandomStream::derive(master, t);
            let h = g.filter_edges(psi, &mut stream)?;
            match mode {
                CountMode::Exact => Ok(failure_counts(&h, hop_bound, None).total() as f64),
                CountMode::SampledSources(s) => sampled_deficiency(&h, hop_bound, s, &mut stream),
            }
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(DeficiencyReport::from_counts(g.n(), psi, master, hop_bound, counts))
}

/// Sanity bound used by tests: every count lies in `[0, C(n, 2)]`.
pub fn max_failed_pairs(n: u32) -> u64 {
    pair_count(n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{complete_graph, interval_graph};
    use proptest::prelude::*;

    fn g(n: u32, edges: &[(u32, u32)]) -> RankGraph {
        RankGraph::from_edges(n, edges.to_vec()).unwrap()
    }

    fn path(n: u32) -> RankGraph {
        interval_graph(n, 1).unwrap()
    }

    /// Independent oracle: depth-first enumeration of every increasing
    /// vertex sequence that is a path of the graph.
    fn brute_min_hops(gr: &RankGraph) -> Vec<Vec<Option<u32>>> {
        let n = gr.n() as usize;
        let mut best = vec![vec![None; n + 1]; n + 1];
        fn walk(gr: &RankGraph, src: usize, at: usize, len: u32, best: &mut [Vec<Option<u32>>]) {
            for next in at + 1..=gr.n() as usize {
                if gr.contains(at as u32, next as u32) {
                    let slot = &mut best[src][next];
                    if slot.is_none_or(|b| len + 1 < b) {
                        *slot = Some(len + 1);
                    }
                    walk(gr, src, next, len + 1, best);
                }
            }
        }
        for s in 1..=n {
            walk(gr, s, s, 0, &mut best);
        }
        best
    }

    fn brute_khop(gr: &RankGraph, k: Option<u32>) -> u64 {
        let best = brute_min_hops(gr);
        let n = gr.n() as usize;
        let mut fails = 0;
        for i in 1..=n {
            for j in i + 1..=n {
                let ok = match (best[i][j], k) {
                    (None, _) => false,
                    (Some(_), None) => true,
                    (Some(h), Some(k)) => h <= k,
                };
                fails += u64::from(!ok);
            }
        }
        fails
    }

    #[test]
    fn reachable_examples() {
        let a = g(4, &[(1, 2), (2, 4)]);
        assert_eq!(straight_reachable(&a, 1).unwrap(), vec![true, false, true]);
        let b = g(4, &[(1, 2), (3, 4)]);
        assert_eq!(straight_reachable(&b, 1).unwrap(), vec![true, false, false]);
        let k = complete_graph(7).unwrap();
        for i in 1..=7 {
            assert!(straight_reachable(&k, i).unwrap().iter().all(|&x| x));
        }
        assert!(straight_reachable(&k, 0).is_err());
        assert!(straight_reachable(&k, 8).is_err());
    }

    #[test]
    fn hops_examples() {
        let k = complete_graph(6).unwrap();
        assert!(straight_hops(&k, 1).unwrap().iter().all(|&h| h == Hops::finite(1)));
        let p = path(6);
        let hops = straight_hops(&p, 1).unwrap();
        for (idx, h) in hops.iter().enumerate() {
            assert_eq!(h.get(), Some(idx as u32 + 1));
        }
        let s = g(6, &[(1, 3), (3, 6), (1, 6)]);
        let hops = straight_hops(&s, 1).unwrap();
        let inf = Hops::INFINITE;
        assert_eq!(hops, vec![inf, Hops::finite(1), inf, inf, Hops::finite(1)]);
        assert!(straight_hops(&s, 7).is_err());
        assert_eq!(Hops::INFINITE.to_string(), "inf");
    }

    #[test]
    fn deficiency_examples() {
        assert_eq!(deficiency(&complete_graph(9).unwrap()), 0);
        assert_eq!(deficiency(&RankGraph::empty(5)), 10);
        assert_eq!(deficiency(&g(3, &[(1, 3)])), 2);
        assert_eq!(deficiency(&RankGraph::empty(1)), 0);
    }

    #[test]
    fn khop_examples() {
        assert_eq!(khop_deficiency(&complete_graph(9).unwrap(), 1).unwrap(), 0);
        assert_eq!(khop_deficiency(&path(4), 1).unwrap(), 3);
        assert_eq!(khop_deficiency(&path(4), 3).unwrap(), 0);
        assert!(khop_deficiency(&path(4), 0).is_err());
    }

    #[test]
    fn split_counts_by_distance() {
        let p = path(6);
        let s = split_failures(&p, Some(2), 2).unwrap();
        // pairs at distance 3, 4, 5 fail: 3 + 2 + 1, all long
        assert_eq!(s, FailureSplit { short: 0, long: 6 });
        let e = RankGraph::empty(5);
        let s = split_failures(&e, None, 1).unwrap();
        assert_eq!(s, FailureSplit { short: 4, long: 6 });
    }

    #[test]
    fn exhaustive_small_graphs_match_brute_force() {
        for n in 1..=5u32 {
            let pairs: Vec<(u32, u32)> = (1..=n).flat_map(|i| (i + 1..=n).map(move |j| (i, j))).collect();
            for mask in 0u32..(1 << pairs.len()) {
                let edges = pairs.iter().enumerate().filter(|(b, _)| mask >> b & 1 == 1).map(|(_, e)| *e).collect();
                let gr = RankGraph::from_edges(n, edges).unwrap();
                assert_eq!(deficiency(&gr), brute_khop(&gr, None));
                for k in 1..=4 {
                    assert_eq!(khop_deficiency(&gr, k).unwrap(), brute_khop(&gr, Some(k)));
                }
            }
        }
    }

    #[test]
    fn sampled_sources_close_to_exact() {
        let gr = complete_graph(300).unwrap().filter_edges(0.05, &mut RandomStream::derive(3, 0)).unwrap();
        let exact = deficiency(&gr) as f64;
        let mut rng = RandomStream::derive(3, 99);
        let reps: Vec<f64> = (0..40).map(|_| sampled_deficiency(&gr, None, 60, &mut rng).unwrap()).collect();
        let (mean, se) = mean_and_stderr(&reps);
        assert!((mean - exact).abs() <= 4.0 * se + 1.0, "{mean} vs {exact} (se {se})");
    }

    #[test]
    fn two_hop_probability_examples() {
        assert_eq!(no_two_hop_probability(1, 0.5).unwrap(), 0.5);
        assert!((no_two_hop_probability(2, 0.5).unwrap() - 0.375).abs() < 1e-15);
        for d in 1..20 {
            assert_eq!(no_two_hop_probability(d, 1.0).unwrap(), 0.0);
        }
        assert!(no_two_hop_probability(0, 0.5).is_err());
        assert!(no_two_hop_probability(3, 1.5).is_err());
    }

    #[test]
    fn two_hop_probability_matches_enumeration() {
        // Enumerate all survival patterns of the 2*delta - 1 relevant edges.
        for delta in 1..=5u32 {
            for &psi in &[0.2f64, 0.5, 0.7] {
                let m = 2 * delta - 1;
                let mut p_fail = 0.0;
                for mask in 0u32..(1 << m) {
                    let alive = |b: u32| mask >> b & 1 == 1;
                    // bit 0: direct edge; bits 2t-1, 2t: the two halves of the path via i + t
                    let connected = alive(0) || (1..delta).any(|t| alive(2 * t - 1) && alive(2 * t));
                    if !connected {
                        let k = mask.count_ones() as i32;
                        p_fail += psi.powi(k) * (1.0 - psi).powi(m as i32 - k);
                    }
                }
                let got = no_two_hop_probability(u64::from(delta), psi).unwrap();
                assert!((got - p_fail).abs() < 1e-12, "delta {delta} psi {psi}");
            }
        }
    }

    #[test]
    fn sandwich_bounds() {
        for delta in 1..=64u64 {
            for step in 0..=20 {
                let psi = step as f64 / 20.0;
                let p = no_two_hop_probability(delta, psi).unwrap();
                let lower = (1.0 - psi).powf(delta as f64);
                let upper = (1.0 - psi) * (1.0 - psi * psi).powf((delta - 1) as f64);
                assert!(lower <= p + 1e-15);
                assert_eq!(p, upper);
            }
        }
    }

    #[test]
    fn expected_two_hop_examples() {
        assert!((expected_two_hop_deficiency(2, 0.5).unwrap() - 0.5).abs() < 1e-15);
        assert!((expected_two_hop_deficiency(3, 0.5).unwrap() - 1.375).abs() < 1e-15);
        assert_eq!(expected_two_hop_deficiency(100, 1.0).unwrap(), 0.0);
        for &psi in &[0.1, 0.3, 0.5, 0.9] {
            let v = expected_two_hop_deficiency(500, psi).unwrap();
            assert!(v <= 500.0 / (psi * psi));
        }
        assert!(expected_two_hop_deficiency(1, 0.5).is_err());
        assert!(expected_two_hop_deficiency(5, 0.0).is_err());
    }

    #[test]
    fn monte_carlo_degenerate_cases() {
        let k = complete_graph(10).unwrap();
        let r = monte_carlo_deficiency(&k, 1.0, 5, None, 1).unwrap();
        assert_eq!((r.mean_failed_pairs, r.stderr), (0.0, 0.0));
        let r = monte_carlo_deficiency(&k, 0.0, 5, None, 1).unwrap();
        assert_eq!((r.mean_failed_pairs, r.stderr), (45.0, 0.0));
        assert!(monte_carlo_deficiency(&k, 0.5, 0, None, 1).is_err());
        assert!(monte_carlo_deficiency(&k, 0.5, 3, Some(0), 1).is_err());
    }

    #[test]
    fn report_invariants() {
        let gr = interval_graph(40, 5).unwrap();
        let r = monte_carlo_deficiency(&gr, 0.4, 30, Some(3), 77).unwrap();
        let (m, se) = mean_and_stderr(&r.per_trial_counts);
        assert_eq!(r.mean_failed_pairs, m);
        assert_eq!(r.stderr, se);
        assert_eq!(r.trials, 30);
        assert!(r.per_trial_counts.iter().all(|&c| c >= 0.0 && c <= max_failed_pairs(40) as f64));
        assert_eq!(r.csv_record()[2], "3");
        let unbounded = monte_carlo_deficiency(&gr, 0.4, 2, None, 77).unwrap();
        assert_eq!(unbounded.csv_record()[2], "inf");
    }

    #[test]
    fn two_hop_monte_carlo_matches_oracle() {
        let k = complete_graph(200).unwrap();
        let r = monte_carlo_deficiency(&k, 0.5, 2000, Some(2), 2024).unwrap();
        let oracle = expected_two_hop_deficiency(200, 0.5).unwrap();
        assert!((r.mean_failed_pairs - oracle).abs() <= 3.0 * r.stderr, "{} vs {oracle}", r.mean_failed_pairs);
    }

    fn arb_graph(n: u32) -> impl Strategy<Value = RankGraph> {
        let pairs: Vec<(u32, u32)> = (1..=n).flat_map(|i| (i + 1..=n).map(move |j| (i, j))).collect();
        proptest::collection::vec(proptest::bool::weighted(0.3), pairs.len()).prop_map(move |mask| {
            let edges = pairs.iter().zip(mask).filter(|(_, m)| *m).map(|(e, _)| *e).collect();
            RankGraph::from_edges(n, edges).unwrap()
        })
    }

    proptest! {
        #[test]
        fn adding_an_edge_never_hurts(gr in arb_graph(11), i in 1u32..=11, j in 1u32..=11, k in 1u32..6) {
            prop_assume!(i != j);
            let more = gr.with_edge(i, j).unwrap();
            prop_assert!(deficiency(&more) <= deficiency(&gr));
            prop_assert!(khop_deficiency(&more, k).unwrap() <= khop_deficiency(&gr, k).unwrap());
        }

        #[test]
        fn khop_is_monotone_and_converges(gr in arb_graph(10)) {
            let mut last = u64::MAX;
            for k in 1..=9 {
                let c = khop_deficiency(&gr, k).unwrap();
                prop_assert!(c <= last);
                last = c;
            }
            prop_assert_eq!(last, deficiency(&gr));
            prop_assert_eq!(khop_deficiency(&gr, 50).unwrap(), deficiency(&gr));
        }

        #[test]
        fn reachable_iff_finite_hops(gr in arb_graph(12), i in 1u64..=12) {
            let r = straight_reachable(&gr, i).unwrap();
            let h = straight_hops(&gr, i).unwrap();
            for (a, b) in r.iter().zip(&h) {
                prop_assert_eq!(*a, b.is_finite());
            }
        }

        #[test]
        fn deficiency_is_sum_of_per_source_failures(gr in arb_graph(12)) {
            let total: u64 = (1..=12u64)
                .map(|i| straight_reachable(&gr, i).unwrap().iter().filter(|&&x| !x).count() as u64)
                .sum();
            prop_assert_eq!(total, deficiency(&gr));
        }

        #[test]
        fn random_graphs_up_to_seven_match_brute_force(gr in arb_graph(7), k in 1u32..5) {
            prop_assert_eq!(deficiency(&gr), brute_khop(&gr, None));
            prop_assert_eq!(khop_deficiency(&gr, k).unwrap(), brute_khop(&gr, Some(k)));
        }
    }
}
