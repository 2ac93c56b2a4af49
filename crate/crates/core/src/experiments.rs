//! Seeded experiment harness.
//!
//! Every experiment is a pure function of its [`ExperimentConfig`]: trial
//! `t` filters with stream `t` of the master seed, constructions draw from
//! a separate child seed, and rows come out in input order. Output is CSV
//! whose first column names the schema version.

use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::euclid::{build_euclidean, stretch_report, EuclidConfig, PointSet, SpannerMode};
use crate::graph::{complete_graph, interval_graph, RankGraph};
use crate::lso::{build_lso_family, family_size_bound, locality_witness};
use crate::reach::{
    deficiency, expected_two_hop_deficiency, mean_and_stderr, monte_carlo_deficiency_with, split_failures,
    CountMode,
};
use crate::rng::RandomStream;
use crate::spanner1d::{
    bipartite_connector, dependable_interval_spanner, four_hop_spanner, interval_radius, khop_spanner,
    neighbourhood_size, DerivedParams, DEFAULT_C6, DEFAULT_C7,
};

/// Stream index reserved for construction randomness.
const CONSTRUCTION_STREAM: u64 = u64::MAX;
/// Stream index reserved for generated point sets.
const POINTS_STREAM: u64 = u64::MAX - 1;
/// Stream index reserved for the second stage of two-stage sampling.
const SECOND_STAGE_STREAM: u64 = u64::MAX - 2;

/// Seed for the random choices of a construction, independent of the
/// per-trial filtering streams.
pub fn construction_seed(seed: u64) -> u64 {
    RandomStream::child_seed(seed, CONSTRUCTION_STREAM)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    CliqueScaling,
    SpannerVsClique,
    SparseFailure,
    HopSurvival,
    EdgeScaling,
    ConnectorExpansion,
    EuclidStretch,
    LsoLocality,
}

impl Experiment {
    pub const ALL: [Experiment; 8] = [
        Experiment::CliqueScaling,
        Experiment::SpannerVsClique,
        Experiment::SparseFailure,
        Experiment::HopSurvival,
        Experiment::EdgeScaling,
        Experiment::ConnectorExpansion,
        Experiment::EuclidStretch,
        Experiment::LsoLocality,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::CliqueScaling => "clique-scaling",
            Experiment::SpannerVsClique => "spanner-vs-clique",
            Experiment::SparseFailure => "sparse-failure",
            Experiment::HopSurvival => "hop-survival",
            Experiment::EdgeScaling => "edge-scaling",
            Experiment::ConnectorExpansion => "connector-expansion",
            Experiment::EuclidStretch => "euclid-stretch",
            Experiment::LsoLocality => "lso-locality",
        }
    }

    pub fn schema(self) -> &'static str {
        match self {
            Experiment::CliqueScaling => "clique-scaling.v1",
            Experiment::SpannerVsClique => "spanner-vs-clique.v1",
            Experiment::SparseFailure => "sparse-failure.v1",
            Experiment::HopSurvival => "hop-survival.v1",
            Experiment::EdgeScaling => "edge-scaling.v1",
            Experiment::ConnectorExpansion => "connector-expansion.v1",
            Experiment::EuclidStretch => "euclid-stretch.v1",
            Experiment::LsoLocality => "lso-locality.v1",
        }
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| invalid("experiment", format!("unknown experiment {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub n: Vec<u32>,
    pub psi: Vec<f64>,
    pub k: Vec<u32>,
    pub eps: Vec<f64>,
    pub d: Vec<u32>,
    pub trials: u64,
    pub seed: u64,
    /// Sources sampled per trial instead of exact counting.
    pub sources: Option<u32>,
    /// Hop bound for the clique experiments; `None` is unbounded.
    pub hops: Option<u32>,
    /// Pairs sampled by the locality experiment.
    pub pairs: u64,
    pub c6: f64,
    pub c7: f64,
}

impl ExperimentConfig {
    pub fn new(experiment: Experiment) -> Self {
        ExperimentConfig {
            experiment,
            n: vec![1024],
            psi: vec![0.5],
            k: vec![4],
            eps: vec![0.25],
            d: vec![2],
            trials: 20,
            seed: 1,
            sources: None,
            hops: None,
            pairs: 10_000,
            c6: DEFAULT_C6,
            c7: DEFAULT_C7,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let lists = [
            ("n", self.n.is_empty()),
            ("psi", self.psi.is_empty()),
            ("k", self.k.is_empty()),
            ("eps", self.eps.is_empty()),
            ("d", self.d.is_empty()),
        ];
        if let Some((name, _)) = lists.iter().find(|(_, empty)| *empty) {
            return Err(invalid(name, "list must not be empty"));
        }
        if self.trials == 0 {
            return Err(invalid("trials", "must be at least 1"));
        }
        if let Some(&n) = self.n.iter().find(|&&n| n < 2) {
            return Err(invalid("n", format!("{n} is below 2")));
        }
        if let Some(&p) = self.psi.iter().find(|&&p| !(p > 0.0 && p <= 1.0)) {
            return Err(invalid("psi", format!("{p} is not in (0, 1]")));
        }
        let min_k = if self.experiment == Experiment::HopSurvival || self.experiment == Experiment::EdgeScaling {
            3
        } else {
            1
        };
        if let Some(&k) = self.k.iter().find(|&&k| k < min_k) {
            return Err(invalid("k", format!("{k} is below {min_k}")));
        }
        if let Some(&e) = self.eps.iter().find(|&&e| !(e > 0.0 && e < 1.0)) {
            return Err(invalid("eps", format!("{e} is not in (0, 1)")));
        }
        if self.d.contains(&0) {
            return Err(invalid("d", "dimension must be at least 1"));
        }
        if self.sources == Some(0) {
            return Err(invalid("sources", "must be at least 1"));
        }
        if self.hops == Some(0) {
            return Err(invalid("hops", "must be at least 1"));
        }
        if self.pairs == 0 {
            return Err(invalid("pairs", "must be at least 1"));
        }
        for (name, c) in [("c6", self.c6), ("c7", self.c7)] {
            if !(c > 0.0 && c.is_finite()) {
                return Err(invalid(name, format!("{c} must be positive")));
            }
        }
        Ok(())
    }

    fn count_mode(&self) -> CountMode {
        self.sources.map_or(CountMode::Exact, CountMode::SampledSources)
    }
}

/// CSV text of one experiment plus the threshold checks it failed.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub csv: String,
    pub violations: Vec<String>,
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Outcome> {
    cfg.validate()?;
    match cfg.experiment {
        Experiment::CliqueScaling => {
            let rows = clique_scaling(cfg)?;
            Ok(Outcome { violations: check_clique_scaling(&rows), csv: to_csv(&rows)? })
        }
        Experiment::SpannerVsClique => {
            let rows = spanner_vs_clique(cfg)?;
            let violations = rows
                .iter()
                .filter(|r| !r.within_bound)
                .map(|r| format!("n={} psi={}: difference {} above bound", r.n, r.psi, r.diff_mean))
                .collect();
            Ok(Outcome { violations, csv: to_csv(&rows)? })
        }
        Experiment::SparseFailure => {
            let rows = sparse_failure(cfg)?;
            let violations = rows
                .iter()
                .filter(|r| r.psi < 1.0 && !r.meets_threshold)
                .map(|r| format!("n={} psi={}: mean {} below {}", r.n, r.psi, r.mean, r.threshold))
                .collect();
            Ok(Outcome { violations, csv: to_csv(&rows)? })
        }
        Experiment::HopSurvival => {
            let rows = hop_survival(cfg)?;
            Ok(Outcome { violations: check_hop_survival(&rows), csv: to_csv(&rows)? })
        }
        Experiment::EdgeScaling => {
            let rows = edge_scaling(cfg)?;
            Ok(Outcome { violations: check_edge_scaling(&rows), csv: to_csv(&rows)? })
        }
        Experiment::ConnectorExpansion => {
            let rows = connector_expansion(cfg)?;
            let violations = rows
                .iter()
                .filter(|r| r.single_pass.min(r.half_pass).min(r.large_pass) < 0.95)
                .map(|r| format!("n={} psi={} c7={}: a reach threshold held in under 95% of trials", r.n, r.psi, r.c7))
                .collect();
            Ok(Outcome { violations, csv: to_csv(&rows)? })
        }
        Experiment::EuclidStretch => {
            let rows = euclid_stretch(cfg)?;
            let violations = rows
                .iter()
                .filter(|r| r.max_failure_fraction >= 0.25 || r.unsound_paths > 0)
                .map(|r| {
                    format!(
                        "n={} d={} eps={} psi={}: failure fraction {} with {} unsound paths",
                        r.n, r.d, r.eps, r.psi, r.max_failure_fraction, r.unsound_paths
                    )
                })
                .collect();
            Ok(Outcome { violations, csv: to_csv(&rows)? })
        }
        Experiment::LsoLocality => {
            let rows = lso_locality(cfg)?;
            let violations = rows
                .iter()
                .filter(|r| r.passed != r.pairs || !r.within_bound)
                .map(|r| format!("d={} eps={}: {} of {} pairs local", r.d, r.eps, r.passed, r.pairs))
                .collect();
            Ok(Outcome { violations, csv: to_csv(&rows)? })
        }
    }
}

pub fn to_csv<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

fn hop_label(h: Option<u32>) -> String {
    h.map_or_else(|| "inf".to_string(), |k| k.to_string())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CliqueScalingRow {
    pub schema: &'static str,
    pub n: u32,
    pub psi: f64,
    pub hop_bound: String,
    pub count_mode: String,
    pub trials: u64,
    pub seed: u64,
    pub mean: f64,
    pub stderr: f64,
    /// `(n / psi) ln(1 / psi)`.
    pub normalizer: f64,
    pub ratio: Option<f64>,
    /// Exact expectation, for 2-hop rows.
    pub two_hop_expected: Option<f64>,
}

/// Deficiency of the filtered `K_n` per `(n, psi)`.
pub fn clique_scaling(cfg: &ExperimentConfig) -> Result<Vec<CliqueScalingRow>> {
    let mut rows = Vec::new();
    for &n in &cfg.n {
        let g = complete_graph(n)?;
        for &psi in &cfg.psi {
            let r = monte_carlo_deficiency_with(&g, psi, cfg.trials, cfg.hops, cfg.seed, cfg.count_mode())?;
            let normalizer = f64::from(n) / psi * (1.0 / psi).ln();
            rows.push(CliqueScalingRow {
                schema: Experiment::CliqueScaling.schema(),
                n,
                psi,
                hop_bound: hop_label(cfg.hops),
                count_mode: match cfg.count_mode() {
                    CountMode::Exact => "exact".to_string(),
                    CountMode::SampledSources(s) => format!("sampled-{s}"),
                },
                trials: cfg.trials,
                seed: cfg.seed,
                mean: r.mean_failed_pairs,
                stderr: r.stderr,
                normalizer,
                ratio: (psi < 1.0).then(|| r.mean_failed_pairs / normalizer),
                two_hop_expected: (cfg.hops == Some(2)).then(|| expected_two_hop_deficiency(n, psi)).transpose()?,
            });
        }
    }
    Ok(rows)
}

fn check_clique_scaling(rows: &[CliqueScalingRow]) -> Vec<String> {
    let mut out = Vec::new();
    let ratios: Vec<f64> = rows.iter().filter_map(|r| r.ratio).collect();
    if let (Some(lo), Some(hi)) = (ratios.iter().copied().reduce(f64::min), ratios.iter().copied().reduce(f64::max)) {
        if hi > 4.0 * lo {
            out.push(format!("normalized ratios span {lo}..{hi}, more than a factor 4"));
        }
    }
    for r in rows {
        if let Some(e) = r.two_hop_expected {
            if (r.mean - e).abs() > 3.0 * r.stderr {
                out.push(format!("n={} psi={}: mean {} vs expected {e}", r.n, r.psi, r.mean));
            }
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpannerVsCliqueRow {
    pub schema: &'static str,
    pub n: u32,
    pub psi: f64,
    pub c6: f64,
    pub radius: u32,
    pub spanner_edges: usize,
    pub clique_edges: usize,
    pub trials: u64,
    pub seed: u64,
    pub spanner_mean: f64,
    pub spanner_stderr: f64,
    pub clique_mean: f64,
    pub clique_stderr: f64,
    pub diff_mean: f64,
    /// Standard error of the per-trial differences.
    pub diff_stderr: f64,
    /// `sqrt(spanner_stderr^2 + clique_stderr^2)`.
    pub combined_stderr: f64,
    /// `diff_mean <= 3 * combined_stderr + 1`.
    pub within_bound: bool,
}

/// Per-trial paired deficiencies `(spanner, clique)`. Both graphs are
/// filtered with the same stream, so the spanner's survivors are exactly
/// the clique's survivors inside the band.
pub fn paired_interval_trials(n: u32, psi: f64, c6: f64, trials: u64, seed: u64) -> Result<Vec<(f64, f64)>> {
    let spanner = dependable_interval_spanner(n, psi, c6)?;
    let clique = complete_graph(n)?;
    (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut s = RandomStream::derive(seed, t);
            let a = deficiency(&spanner.filter_edges(psi, &mut s)?);
            let b = deficiency(&clique.filter_edges(psi, &mut s)?);
            Ok((a as f64, b as f64))
        })
        .collect()
}

pub fn spanner_vs_clique(cfg: &ExperimentConfig) -> Result<Vec<SpannerVsCliqueRow>> {
    let mut rows = Vec::new();
    for &n in &cfg.n {
        for &psi in &cfg.psi {
            let pairs = paired_interval_trials(n, psi, cfg.c6, cfg.trials, cfg.seed)?;
            let sp: Vec<f64> = pairs.iter().map(|p| p.0).collect();
            let cl: Vec<f64> = pairs.iter().map(|p| p.1).collect();
            let diff: Vec<f64> = pairs.iter().map(|p| p.0 - p.1).collect();
            let (sm, sse) = mean_and_stderr(&sp);
            let (cm, cse) = mean_and_stderr(&cl);
            let (dm, dse) = mean_and_stderr(&diff);
            let combined = sse.hypot(cse);
            let radius = interval_radius(n, psi, cfg.c6)?;
            rows.push(SpannerVsCliqueRow {
                schema: Experiment::SpannerVsClique.schema(),
                n,
                psi,
                c6: cfg.c6,
                radius,
                spanner_edges: interval_graph(n, radius)?.edge_count(),
                clique_edges: (u64::from(n) * u64::from(n - 1) / 2) as usize,
                trials: cfg.trials,
                seed: cfg.seed,
                spanner_mean: sm,
                spanner_stderr: sse,
                clique_mean: cm,
                clique_stderr: cse,
                diff_mean: dm,
                diff_stderr: dse,
                combined_stderr: combined,
                within_bound: dm <= 3.0 * combined + 1.0,
            });
        }
    }
    Ok(rows)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SparseFailureRow {
    pub schema: &'static str,
    pub n: u32,
    pub psi: f64,
    pub trials: u64,
    pub seed: u64,
    pub mean: f64,
    pub stderr: f64,
    /// `n^{3/2} / 8`.
    pub threshold: f64,
    pub meets_threshold: bool,
    /// Fraction of trials with at least one failed pair.
    pub positive_fraction: f64,
}

/// Deficiency of the filtered path `1 - 2 - … - n`.
pub fn sparse_failure(cfg: &ExperimentConfig) -> Result<Vec<SparseFailureRow>> {
    let mut rows = Vec::new();
    for &n in &cfg.n {
        let path = interval_graph(n, 1)?;
        for &psi in &cfg.psi {
            let r = monte_carlo_deficiency_with(&path, psi, cfg.trials, None, cfg.seed, cfg.count_mode())?;
            let threshold = f64::from(n).powf(1.5) / 8.0;
            let positive = r.per_trial_counts.iter().filter(|&&c| c > 0.0).count();
            rows.push(SparseFailureRow {
                schema: Experiment::SparseFailure.schema(),
                n,
                psi,
                trials: cfg.trials,
                seed: cfg.seed,
                mean: r.mean_failed_pairs,
                stderr: r.stderr,
                threshold,
                meets_threshold: r.mean_failed_pairs >= threshold,
                positive_fraction: positive as f64 / cfg.trials as f64,
            });
        }
    }
    Ok(rows)
}

/// The bounded-hop construction for hop budget `k`: the 4-hop construction
/// for `k = 4`, the `k`-hop construction otherwise.
pub fn hop_construction(n: u32, psi: f64, k: u32, c7: f64, seed: u64) -> Result<(DerivedParams, RankGraph)> {
    if k == 4 {
        Ok((DerivedParams::four_hop(n, psi, c7)?, four_hop_spanner(n, psi, c7, seed)?))
    } else {
        Ok((DerivedParams::k_hop(n, psi, k, c7)?, khop_spanner(n, psi, k, c7, seed)?))
    }
}

/// Per-trial `k`-hop failures of a filtered construction, split at its
/// band radius.
pub fn hop_survival_trials(
    g: &RankGraph,
    params: &DerivedParams,
    psi: f64,
    trials: u64,
    seed: u64,
) -> Result<Vec<crate::reach::FailureSplit>> {
    (0..trials)
        .into_par_iter()
        .map(|t| {
            let h = g.filter_edges(psi, &mut RandomStream::derive(seed, t))?;
            split_failures(&h, Some(params.k), params.radius)
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HopSurvivalRow {
    pub schema: &'static str,
    pub n: u32,
    pub psi: f64,
    pub k: u32,
    pub c7: f64,
    pub nu: f64,
    pub block_size: u32,
    pub radius: u32,
    pub tau: f64,
    pub edges: usize,
    pub trials: u64,
    pub seed: u64,
    pub short_mean: f64,
    pub long_mean: f64,
    pub total_mean: f64,
    pub total_stderr: f64,
    /// `n / psi^2 + 1`.
    pub reference: f64,
    pub long_zero_trials: u64,
    pub total_within_twice_reference: u64,
}

pub fn hop_survival(cfg: &ExperimentConfig) -> Result<Vec<HopSurvivalRow>> {
    let mut rows = Vec::new();
    for &n in &cfg.n {
        for &psi in &cfg.psi {
            for &k in &cfg.k {
                let (params, g) = hop_construction(n, psi, k, cfg.c7, construction_seed(cfg.seed))?;
                let splits = hop_survival_trials(&g, &params, psi, cfg.trials, cfg.seed)?;
                let short: Vec<f64> = splits.iter().map(|s| s.short as f64).collect();
                let long: Vec<f64> = splits.iter().map(|s| s.long as f64).collect();
                let total: Vec<f64> = splits.iter().map(|s| s.total() as f64).collect();
                let reference = f64::from(n) / (psi * psi) + 1.0;
                let (tm, tse) = mean_and_stderr(&total);
                rows.push(HopSurvivalRow {
                    schema: Experiment::HopSurvival.schema(),
                    n,
                    psi,
                    k,
                    c7: cfg.c7,
                    nu: params.nu,
                    block_size: params.block_size,
                    radius: params.radius,
                    tau: params.tau,
                    edges: g.edge_count(),
                    trials: cfg.trials,
                    seed: cfg.seed,
                    short_mean: mean_and_stderr(&short).0,
                    long_mean: mean_and_stderr(&long).0,
                    total_mean: tm,
                    total_stderr: tse,
                    reference,
                    long_zero_trials: splits.iter().filter(|s| s.long == 0).count() as u64,
                    total_within_twice_reference: total.iter().filter(|&&t| t <= 2.0 * reference).count() as u64,
                });
            }
        }
    }
    Ok(rows)
}

fn check_hop_survival(rows: &[HopSurvivalRow]) -> Vec<String> {
    let mut out = Vec::new();
    for r in rows {
        let t = r.trials as f64;
        if (r.long_zero_trials as f64) < 0.95 * t {
            out.push(format!("n={} psi={} k={}: long pairs clean in {} of {} trials", r.n, r.psi, r.k, r.long_zero_trials, r.trials));
        }
        if (r.total_within_twice_reference as f64) < 0.9 * t {
            out.push(format!(
                "n={} psi={} k={}: total within 2(n/psi^2+1) in {} of {} trials",
                r.n, r.psi, r.k, r.total_within_twice_reference, r.trials
            ));
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EdgeScalingRow {
    pub schema: &'static str,
    pub n: u32,
    pub psi: f64,
    pub k: u32,
    pub c7: f64,
    pub seed: u64,
    pub nu: f64,
    pub block_size: u32,
    pub radius: u32,
    pub tau: f64,
    pub edges: usize,
    pub band_edges: usize,
    pub connector_edges: usize,
    /// `edges / (n ln n)`.
    pub per_n_ln_n: f64,
}

pub fn edge_scaling(cfg: &ExperimentConfig) -> Result<Vec<EdgeScalingRow>> {
    let mut rows = Vec::new();
    for &n in &cfg.n {
        for &psi in &cfg.psi {
            for &k in &cfg.k {
                let (p, g) = hop_construction(n, psi, k, cfg.c7, construction_seed(cfg.seed))?;
                let band = band_edge_count(n, p.radius);
                rows.push(EdgeScalingRow {
                    schema: Experiment::EdgeScaling.schema(),
                    n,
                    psi,
                    k,
                    c7: cfg.c7,
                    seed: cfg.seed,
                    nu: p.nu,
                    block_size: p.block_size,
                    radius: p.radius,
                    tau: p.tau,
                    edges: g.edge_count(),
                    band_edges: band,
                    connector_edges: g.edge_count() - band,
                    per_n_ln_n: g.edge_count() as f64 / (f64::from(n) * f64::from(n).ln()),
                });
            }
        }
    }
    Ok(rows)
}

/// Edges of the band `{(i, j) : 0 < j - i <= radius}` on `n` vertices.
pub fn band_edge_count(n: u32, radius: u32) -> usize {
    let n = n as usize;
    let l = (radius as usize).min(n.saturating_sub(1));
    l * (n - l) + l * l.saturating_sub(1) / 2
}

fn check_edge_scaling(rows: &[EdgeScalingRow]) -> Vec<String> {
    let mut out = Vec::new();
    let mut keys: Vec<(u64, u32)> = rows.iter().map(|r| (r.psi.to_bits(), r.k)).collect();
    keys.sort_unstable();
    keys.dedup();
    for (bits, k) in keys {
        let v: Vec<f64> = rows.iter().filter(|r| r.psi.to_bits() == bits && r.k == k).map(|r| r.per_n_ln_n).collect();
        let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = v.iter().copied().fold(0.0, f64::max);
        if hi > 2.0 * lo {
            out.push(format!("psi={} k={k}: edges/(n ln n) spans {lo}..{hi}", f64::from_bits(bits)));
        }
    }
    out
}

/// Least-squares fits of `value ≈ C * psi^(-a)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ExponentFit {
    /// Best `a`.
    pub exponent: f64,
    /// RMS log-residual with `a = 4/3` and the best `C`.
    pub rms_four_thirds: f64,
    /// RMS log-residual with `a = 3/2` and the best `C`.
    pub rms_three_halves: f64,
}

pub fn psi_exponent_fit(psi: &[f64], value: &[f64]) -> Result<ExponentFit> {
    if psi.len() != value.len() || psi.len() < 2 {
        return Err(invalid("fit", "need at least two (psi, value) points"));
    }
    let x: Vec<f64> = psi.iter().map(|p| (1.0 / p).ln()).collect();
    let y: Vec<f64> = value.iter().map(|v| v.ln()).collect();
    let len = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / len, y.iter().sum::<f64>() / len);
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    if sxx == 0.0 {
        return Err(invalid("fit", "need at least two distinct psi values"));
    }
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let rms = |a: f64| {
        let r: Vec<f64> = x.iter().zip(&y).map(|(xi, yi)| yi - a * xi).collect();
        let c = r.iter().sum::<f64>() / len;
        (r.iter().map(|ri| (ri - c) * (ri - c)).sum::<f64>() / len).sqrt()
    };
    Ok(ExponentFit { exponent: sxy / sxx, rms_four_thirds: rms(4.0 / 3.0), rms_three_halves: rms(1.5) })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConnectorExpansionRow {
    pub schema: &'static str,
    pub n: u32,
    pub psi: f64,
    pub c7: f64,
    pub nu: f64,
    pub block_size: u32,
    pub tau: f64,
    pub trials: u64,
    pub seed: u64,
    /// Singleton source set.
    pub single_threshold: f64,
    pub single_mean: f64,
    pub single_pass: f64,
    /// Source set of size `ceil(psi M / 2)`.
    pub half_size: u32,
    pub half_threshold: f64,
    pub half_mean: f64,
    pub half_pass: f64,
    /// Source set of size `ceil(psi^{2/3} M)`.
    pub large_size: u32,
    pub large_threshold: f64,
    pub large_mean: f64,
    pub large_pass: f64,
    /// `tau * M`.
    pub expected_degree: f64,
    /// Mean over trials of unfiltered connector edges per vertex of `X`.
    pub measured_degree: f64,
}

/// One filtered connector: reach counts of the three source sets, and the
/// connector's edge count before filtering.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ConnectorTrial {
    pub reach: [usize; 3],
    pub edges: usize,
}

/// Per-trial reach counts of the three source sets through one filtered
/// connector between two blocks of size `M`.
pub fn connector_reach_trials(params: &DerivedParams, psi: f64, trials: u64, seed: u64) -> Result<Vec<ConnectorTrial>> {
    let m = params.block_size;
    let (x, y) = ((1, m), (m + 1, 2 * m));
    let sizes = expansion_set_sizes(m, psi);
    let second = RandomStream::child_seed(seed, SECOND_STAGE_STREAM);
    (0..trials)
        .into_par_iter()
        .map(|t| {
            let edges = bipartite_connector(x, y, params.tau, &mut RandomStream::derive(seed, t))?;
            let count = edges.len();
            let g = RankGraph::from_edges(2 * m, edges)?.filter_edges(psi, &mut RandomStream::derive(second, t))?;
            let mut reach = [0; 3];
            for (slot, &s) in reach.iter_mut().zip(&sizes) {
                let sources: Vec<u32> = (1..=s).collect();
                *slot = neighbourhood_size(g.edges(), &sources, y);
            }
            Ok(ConnectorTrial { reach, edges: count })
        })
        .collect()
}

fn expansion_set_sizes(m: u32, psi: f64) -> [u32; 3] {
    let mf = f64::from(m);
    [1, ((psi * mf / 2.0).ceil() as u32).clamp(1, m), ((psi.powf(2.0 / 3.0) * mf).ceil() as u32).clamp(1, m)]
}

/// Reach thresholds `psi M / 4`, `psi^{2/3} M / 4`, `psi^{1/3} M / 4`.
pub fn expansion_thresholds(m: u32, psi: f64) -> [f64; 3] {
    let mf = f64::from(m);
    [psi * mf / 4.0, psi.powf(2.0 / 3.0) * mf / 4.0, psi.powf(1.0 / 3.0) * mf / 4.0]
}

pub fn connector_expansion(cfg: &ExperimentConfig) -> Result<Vec<ConnectorExpansionRow>> {
    let mut rows = Vec::new();
    for &n in &cfg.n {
        for &psi in &cfg.psi {
            let params = DerivedParams::four_hop(n, psi, cfg.c7)?;
            let m = params.block_size;
            let reach = connector_reach_trials(&params, psi, cfg.trials, cfg.seed)?;
            let th = expansion_thresholds(m, psi);
            let sizes = expansion_set_sizes(m, psi);
            let stat = |i: usize| {
                let v: Vec<f64> = reach.iter().map(|r| r.reach[i] as f64).collect();
                let pass = reach.iter().filter(|r| r.reach[i] as f64 >= th[i]).count() as f64 / cfg.trials as f64;
                (mean_and_stderr(&v).0, pass)
            };
            let (s0, s1, s2) = (stat(0), stat(1), stat(2));
            rows.push(ConnectorExpansionRow {
                schema: Experiment::ConnectorExpansion.schema(),
                n,
                psi,
                c7: cfg.c7,
                nu: params.nu,
                block_size: m,
                tau: params.tau,
                trials: cfg.trials,
                seed: cfg.seed,
                single_threshold: th[0],
                single_mean: s0.0,
                single_pass: s0.1,
                half_size: sizes[1],
                half_threshold: th[1],
                half_mean: s1.0,
                half_pass: s1.1,
                large_size: sizes[2],
                large_threshold: th[2],
                large_mean: s2.0,
                large_pass: s2.1,
                expected_degree: params.tau * f64::from(m),
                measured_degree: reach.iter().map(|r| r.edges as f64).sum::<f64>() / (cfg.trials as f64 * f64::from(m)),
            });
        }
    }
    Ok(rows)
}

/// `n` points uniform in `[0,1)^d` from the point stream of `seed`.
pub fn random_points(n: u32, d: u32, seed: u64) -> Result<PointSet> {
    let mut s = RandomStream::derive(RandomStream::child_seed(seed, POINTS_STREAM), u64::from(d));
    PointSet::new((0..n).map(|_| (0..d).map(|_| s.next_f64()).collect()).collect())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EuclidStretchRow {
    pub schema: &'static str,
    pub n: u32,
    pub d: u32,
    pub eps: f64,
    pub psi: f64,
    pub mode: SpannerMode,
    pub hops: u32,
    pub c7: f64,
    pub seed: u64,
    pub block_size: u32,
    pub radius: u32,
    pub tau: f64,
    pub family_eps: f64,
    pub family_size: u64,
    pub orderings_used: u64,
    pub saturated: bool,
    pub edges: usize,
    pub trials: u64,
    pub pairs: u64,
    pub failures_mean: f64,
    pub failures_stderr: f64,
    pub max_failure_fraction: f64,
    pub unsound_paths: u64,
    /// `n psi^{-4/3} ln(1/psi)`: failures allowed if the constant covers a
    /// single ordering.
    pub per_ordering_reference: f64,
    /// The per-ordering reference times the orderings used: failures
    /// allowed if the constant is a union over orderings.
    pub union_reference: f64,
}

/// Per `(n, d, eps, psi)`: build the Euclidean spanner on random points,
/// filter it `trials` times and audit every pair. `k` selects the mode: 4
/// is four-hop, anything else log-hop.
pub fn euclid_stretch(cfg: &ExperimentConfig) -> Result<Vec<EuclidStretchRow>> {
    let mut rows = Vec::new();
    for &n in &cfg.n {
        for &d in &cfg.d {
            let points = random_points(n, d, cfg.seed)?;
            for &eps in &cfg.eps {
                for &psi in &cfg.psi {
                    for &k in &cfg.k {
                        let mode = if k == 4 { SpannerMode::FourHop } else { SpannerMode::LogHop };
                        let built = build_euclidean(
                            &points,
                            &EuclidConfig { c7: cfg.c7, ..EuclidConfig::new(eps, psi, mode, construction_seed(cfg.seed)) },
                        )?;
                        let hops = built.info.hops;
                        let reports = (0..cfg.trials)
                            .map(|t| {
                                let h = built.graph.filtered(psi, &mut RandomStream::derive(cfg.seed, t))?;
                                stretch_report(&h, &points, eps, hops, true)
                            })
                            .collect::<Result<Vec<_>>>()?;
                        let fails: Vec<f64> = reports.iter().map(|r| r.failures as f64).collect();
                        let (fm, fse) = mean_and_stderr(&fails);
                        let pairs = reports[0].pairs;
                        let per_ordering = f64::from(n) * psi.powf(-4.0 / 3.0) * (1.0 / psi).ln();
                        rows.push(EuclidStretchRow {
                            schema: Experiment::EuclidStretch.schema(),
                            n,
                            d,
                            eps,
                            psi,
                            mode,
                            hops,
                            c7: cfg.c7,
                            seed: cfg.seed,
                            block_size: built.info.derived.block_size,
                            radius: built.info.derived.radius,
                            tau: built.info.derived.tau,
                            family_eps: built.info.family_eps,
                            family_size: built.info.family_size,
                            orderings_used: built.info.orderings_used,
                            saturated: built.info.saturated,
                            edges: built.graph.edge_count(),
                            trials: cfg.trials,
                            pairs,
                            failures_mean: fm,
                            failures_stderr: fse,
                            max_failure_fraction: fails.iter().copied().fold(0.0, f64::max) / pairs as f64,
                            unsound_paths: reports.iter().map(|r| r.unsound).sum(),
                            per_ordering_reference: per_ordering,
                            union_reference: per_ordering * built.info.orderings_used as f64,
                        });
                    }
                }
            }
        }
    }
    Ok(rows)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LsoLocalityRow {
    pub schema: &'static str,
    pub n: u32,
    pub d: u32,
    pub eps: f64,
    pub seed: u64,
    pub family_size: u64,
    pub size_bound: f64,
    pub within_bound: bool,
    pub pairs: u64,
    pub passed: u64,
}

/// Samples `cfg.pairs` distinct-point pairs from random point sets and
/// looks for an ε-local ordering for each.
pub fn lso_locality(cfg: &ExperimentConfig) -> Result<Vec<LsoLocalityRow>> {
    let mut rows = Vec::new();
    for &n in &cfg.n {
        for &d in &cfg.d {
            let points = random_points(n, d, cfg.seed)?;
            for &eps in &cfg.eps {
                let family = build_lso_family(eps, d)?;
                let mut s = RandomStream::derive(cfg.seed, u64::from(d));
                let pairs: Vec<(usize, usize)> = (0..cfg.pairs)
                    .map(|_| {
                        let u = s.below(u64::from(n)) as usize;
                        let v = (u + 1 + s.below(u64::from(n) - 1) as usize) % n as usize;
                        (u, v)
                    })
                    .collect();
                let passed = pairs
                    .par_iter()
                    .map(|&(u, v)| locality_witness(&family, points.points(), u, v).map(|w| u64::from(w.is_some())))
                    .collect::<Result<Vec<u64>>>()?
                    .into_iter()
                    .sum();
                let bound = family_size_bound(eps, d);
                rows.push(LsoLocalityRow {
                    schema: Experiment::LsoLocality.schema(),
                    n,
                    d,
                    eps,
                    seed: cfg.seed,
                    family_size: family.len(),
                    size_bound: bound,
                    within_bound: family.len() as f64 <= bound,
                    pairs: cfg.pairs,
                    passed,
                });
            }
        }
    }
    Ok(rows)
}
