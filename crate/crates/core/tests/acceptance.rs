//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

use std::time::Instant;

use dspan_core::euclid::{build_euclidean, count_stretch_failures, EuclidConfig, SpannerMode};
use dspan_core::experiments::{
    clique_scaling, connector_expansion, edge_scaling, euclid_stretch, hop_survival, lso_locality, psi_exponent_fit,
    random_points, run_experiment, spanner_vs_clique, sparse_failure, to_csv, Experiment, ExperimentConfig,
};
use dspan_core::io::format_edge_list;
use dspan_core::reach::{deficiency, expected_two_hop_deficiency, khop_deficiency};
use dspan_core::spanner1d::{four_hop_spanner, two_hop_hierarchy, DerivedParams};
use dspan_core::{RankGraph, Vertex};

const SEED: u64 = 20_240_601;

// Pinned tolerances.
const ORACLE_STDERRS: f64 = 3.0;
const THETA_FACTOR: f64 = 4.0;
const PAIRED_STDERRS: f64 = 3.0;
const PAIRED_SLACK: f64 = 1.0;
const EXPANSION_PASS_RATE: f64 = 0.95;
const EDGE_RATIO_SPREAD: f64 = 2.0;
const FILTERED_FAILURE_FRACTION: f64 = 0.25;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

fn cfg(e: Experiment) -> ExperimentConfig {
    ExperimentConfig { seed: SEED, ..ExperimentConfig::new(e) }
}

fn oracle_agreement() -> Verdict {
    let mut pass = true;
    let mut notes = Vec::new();
    for psi in [0.3, 0.5] {
        let c = ExperimentConfig { n: vec![200], psi: vec![psi], hops: Some(2), trials: 2000, ..cfg(Experiment::CliqueScaling) };
        let r = &clique_scaling(&c).unwrap()[0];
        let e = expected_two_hop_deficiency(200, psi).unwrap();
        let z = (r.mean - e).abs() / r.stderr;
        pass &= z <= ORACLE_STDERRS && e <= 200.0 / (psi * psi);
        notes.push(format!("psi={psi}: mc={:.3} oracle={e:.3} z={z:.2} n/psi^2={:.0}", r.mean, 200.0 / (psi * psi)));
    }
    verdict(pass, notes.join("; "))
}

/// Pairs `i < j` joined by an increasing path of at most `k` edges, by
/// enumerating every increasing path.
fn brute_failures(n: u32, edges: &[(Vertex, Vertex)], k: Option<u32>) -> u64 {
    let adj = |a: Vertex, b: Vertex| edges.contains(&(a, b));
    let mut failed = 0;
    for i in 1..=n {
        for j in i + 1..=n {
            let mut found = false;
            // stack of (vertex, hops used)
            let mut stack = vec![(i, 0u32)];
            while let Some((v, h)) = stack.pop() {
                if v == j {
                    found = true;
                    break;
                }
                if k.is_some_and(|k| h >= k) {
                    continue;
                }
                for w in v + 1..=j {
                    if adj(v, w) {
                        stack.push((w, h + 1));
                    }
                }
            }
            failed += u64::from(!found);
        }
    }
    failed
}

fn brute_force_equivalence() -> Verdict {
    let mut checked = 0u64;
    let mut mismatches = 0u64;
    for n in 1..=5u32 {
        let all: Vec<(Vertex, Vertex)> = (1..=n).flat_map(|i| (i + 1..=n).map(move |j| (i, j))).collect();
        for mask in 0u32..(1 << all.len()) {
            let edges: Vec<_> = all.iter().enumerate().filter(|(b, _)| mask >> b & 1 == 1).map(|(_, &e)| e).collect();
            let g = RankGraph::from_edges(n, edges.clone()).unwrap();
            mismatches += u64::from(deficiency(&g) != brute_failures(n, &edges, None));
            for k in 1..=4 {
                mismatches += u64::from(khop_deficiency(&g, k).unwrap() != brute_failures(n, &edges, Some(k)));
            }
            checked += 1;
        }
    }
    verdict(mismatches == 0, format!("{checked} graphs, {mismatches} mismatches"))
}

fn theta_law() -> Verdict {
    let mut ratios = Vec::new();
    for (psi, n) in [(0.5, 1024), (0.25, 2048), (0.125, 4096)] {
        let c = ExperimentConfig { n: vec![n], psi: vec![psi], trials: 30, ..cfg(Experiment::CliqueScaling) };
        ratios.push(clique_scaling(&c).unwrap()[0].ratio.unwrap());
    }
    let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ratios.iter().copied().fold(0.0, f64::max);
    verdict(hi <= THETA_FACTOR * lo, format!("ratios {ratios:.4?}, spread {:.3}", hi / lo))
}

fn interval_near_optimal() -> Verdict {
    let c = ExperimentConfig { n: vec![1024], psi: vec![0.5], c6: 4.0, trials: 500, ..cfg(Experiment::SpannerVsClique) };
    let r = &spanner_vs_clique(&c).unwrap()[0];
    let bound = PAIRED_STDERRS * r.combined_stderr + PAIRED_SLACK;
    verdict(
        r.diff_mean <= bound,
        format!(
            "L={} spanner={:.3} clique={:.3} diff={:.4} bound={bound:.3} paired stderr={:.4}",
            r.radius, r.spanner_mean, r.clique_mean, r.diff_mean, r.diff_stderr
        ),
    )
}

fn sparse_lower_bound() -> Verdict {
    let c = ExperimentConfig { n: vec![256], psi: vec![0.5], trials: 200, ..cfg(Experiment::SparseFailure) };
    let r = &sparse_failure(&c).unwrap()[0];
    verdict(r.mean >= r.threshold, format!("mean={:.1} threshold={}", r.mean, r.threshold))
}

fn two_hop_hierarchy_check() -> Verdict {
    let mut pass = true;
    let mut notes = Vec::new();
    for n in [7u32, 64, 256] {
        let edges = two_hop_hierarchy(1, n).unwrap();
        let g = RankGraph::from_edges(n, edges.clone()).unwrap();
        let adj = g.forward_adjacency();
        let mut missing = 0;
        for i in 1..=n {
            for j in i + 1..=n {
                let direct = g.contains(i, j);
                let via = adj.successors(i).iter().any(|&m| m < j && g.contains(m, j));
                missing += u32::from(!(direct || via));
            }
        }
        let cap = n as usize * (32 - (n - 1).leading_zeros()) as usize;
        pass &= missing == 0 && edges.len() <= cap;
        notes.push(format!("n={n}: {} edges (cap {cap}), {missing} pairs without 2-hop path", edges.len()));
    }
    verdict(pass, notes.join("; "))
}

fn four_hop_survival() -> Verdict {
    let c = ExperimentConfig { n: vec![4096], psi: vec![0.5], k: vec![4], c7: 4.0, trials: 20, ..cfg(Experiment::HopSurvival) };
    let r = &hop_survival(&c).unwrap()[0];
    verdict(
        r.long_zero_trials >= 19 && r.total_within_twice_reference >= 18,
        format!(
            "M={} L={} tau={:.3}: long clean in {}/20, total within 2(n/psi^2+1) in {}/20, mean total {:.1} (reference {})",
            r.block_size, r.radius, r.tau, r.long_zero_trials, r.total_within_twice_reference, r.total_mean, r.reference
        ),
    )
}

fn connector_expansion_check() -> Verdict {
    let c = ExperimentConfig { n: vec![1 << 16], psi: vec![0.5], c7: 8.0, trials: 100, ..cfg(Experiment::ConnectorExpansion) };
    let r = &connector_expansion(&c).unwrap()[0];
    let pass = r.block_size >= 200
        && r.single_pass >= EXPANSION_PASS_RATE
        && r.half_pass >= EXPANSION_PASS_RATE
        && r.large_pass >= EXPANSION_PASS_RATE;

    // Reading at the default constant, not asserted.
    let info = ExperimentConfig { n: vec![1 << 29], psi: vec![0.5], c7: 4.0, trials: 100, ..cfg(Experiment::ConnectorExpansion) };
    let i = &connector_expansion(&info).unwrap()[0];
    println!(
        "  info: c7=4 n=2^29 M={} tau={:.3}: pass rates {:.2}/{:.2}/{:.2}, singleton mean {:.1} vs {:.1}",
        i.block_size, i.tau, i.single_pass, i.half_pass, i.large_pass, i.single_mean, i.single_threshold
    );
    println!("  info: connector degree measured {:.2}, tau*M {:.2}", r.measured_degree, r.expected_degree);
    verdict(
        pass,
        format!(
            "c7=8 n=2^16 M={} tau={:.3}: pass rates {:.2}/{:.2}/{:.2}, means {:.1}/{:.1}/{:.1} vs {:.1}/{:.1}/{:.1}",
            r.block_size,
            r.tau,
            r.single_pass,
            r.half_pass,
            r.large_pass,
            r.single_mean,
            r.half_mean,
            r.large_mean,
            r.single_threshold,
            r.half_threshold,
            r.large_threshold
        ),
    )
}

fn edge_count_scaling() -> Verdict {
    let c = ExperimentConfig { n: vec![1 << 10, 1 << 12, 1 << 14], psi: vec![0.5], k: vec![4], ..cfg(Experiment::EdgeScaling) };
    let rows = edge_scaling(&c).unwrap();
    let v: Vec<f64> = rows.iter().map(|r| r.per_n_ln_n).collect();
    let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = v.iter().copied().fold(0.0, f64::max);

    let fit_cfg = ExperimentConfig { n: vec![1 << 14], psi: vec![0.5, 0.25, 0.125], k: vec![4], ..cfg(Experiment::EdgeScaling) };
    let fit_rows = edge_scaling(&fit_cfg).unwrap();
    let psis: Vec<f64> = fit_rows.iter().map(|r| r.psi).collect();
    let total: Vec<f64> = fit_rows.iter().map(|r| r.edges as f64).collect();
    let conn: Vec<f64> = fit_rows.iter().map(|r| r.connector_edges as f64).collect();
    for (label, values) in [("all edges", &total), ("connector edges", &conn)] {
        let f = psi_exponent_fit(&psis, values).unwrap();
        println!(
            "  info: n=2^14 {label} ~ psi^-a: a={:.3}, rms(a=4/3)={:.4}, rms(a=3/2)={:.4}",
            f.exponent, f.rms_four_thirds, f.rms_three_halves
        );
    }
    verdict(hi <= EDGE_RATIO_SPREAD * lo, format!("edges/(n ln n) = {v:.3?}, spread {:.3}", hi / lo))
}

fn lso_gate() -> Verdict {
    let c = ExperimentConfig { n: vec![512], d: vec![1, 2], eps: vec![0.5, 0.25], pairs: 10_000, ..cfg(Experiment::LsoLocality) };
    let rows = lso_locality(&c).unwrap();
    let pass = rows.iter().all(|r| r.passed == r.pairs && r.within_bound);
    let notes: Vec<String> = rows
        .iter()
        .map(|r| format!("d={} eps={}: {}/{} local, size {} <= {:.0}", r.d, r.eps, r.passed, r.pairs, r.family_size, r.size_bound))
        .collect();
    verdict(pass, notes.join("; "))
}

fn unfiltered_euclid() -> Verdict {
    let points = random_points(256, 2, SEED).unwrap();
    let cfg = EuclidConfig::new(0.25, 1.0, SpannerMode::FourHop, SEED);
    let a = build_euclidean(&points, &cfg).unwrap();
    let b = build_euclidean(&points, &cfg).unwrap();
    let failures = count_stretch_failures(&a.graph, &points, 0.25, 4).unwrap();
    let same = a.graph == b.graph;
    verdict(
        failures == 0 && same,
        format!(
            "{} edges from {} of {} orderings, {failures} failures, rebuild identical: {same}",
            a.graph.edge_count(),
            a.info.orderings_used,
            a.info.family_size
        ),
    )
}

fn filtered_euclid() -> Verdict {
    let c = ExperimentConfig {
        n: vec![512],
        d: vec![2],
        eps: vec![0.25],
        psi: vec![0.5],
        k: vec![4],
        trials: 10,
        ..cfg(Experiment::EuclidStretch)
    };
    let r = &euclid_stretch(&c).unwrap()[0];
    println!(
        "  info: mean failures {:.1} vs per-ordering reference {:.1} and union reference {:.1}",
        r.failures_mean, r.per_ordering_reference, r.union_reference
    );
    verdict(
        r.max_failure_fraction < FILTERED_FAILURE_FRACTION && r.unsound_paths == 0,
        format!(
            "worst failure fraction {:.4}, mean failures {:.1} of {}, unsound paths {}",
            r.max_failure_fraction, r.failures_mean, r.pairs, r.unsound_paths
        ),
    )
}

fn snapshot() -> Vec<String> {
    let mut out = Vec::new();
    let small = |e: Experiment| ExperimentConfig { n: vec![96], psi: vec![0.5, 0.25], trials: 6, ..cfg(e) };
    for e in [Experiment::CliqueScaling, Experiment::SpannerVsClique, Experiment::SparseFailure, Experiment::ConnectorExpansion] {
        out.push(run_experiment(&small(e)).unwrap().csv);
    }
    let hop = ExperimentConfig { n: vec![700], k: vec![3, 4, 5], ..small(Experiment::HopSurvival) };
    out.push(run_experiment(&hop).unwrap().csv);
    let sampled = ExperimentConfig { sources: Some(7), ..small(Experiment::CliqueScaling) };
    out.push(run_experiment(&sampled).unwrap().csv);
    let eu = ExperimentConfig { n: vec![120], eps: vec![0.5], psi: vec![0.5], k: vec![4, 3], trials: 2, ..small(Experiment::EuclidStretch) };
    out.push(run_experiment(&eu).unwrap().csv);
    let lso = ExperimentConfig { n: vec![200], d: vec![1, 2], eps: vec![0.5], pairs: 500, ..small(Experiment::LsoLocality) };
    out.push(run_experiment(&lso).unwrap().csv);
    out.push(format_edge_list(&four_hop_spanner(3000, 0.5, 4.0, SEED).unwrap()));
    let pts = random_points(150, 2, SEED).unwrap();
    let built = build_euclidean(&pts, &EuclidConfig::new(0.25, 0.5, SpannerMode::FourHop, SEED)).unwrap();
    out.push(format_edge_list(built.graph.graph()));
    out.push(to_csv(&[DerivedParams::four_hop(3000, 0.5, 4.0).unwrap()]).unwrap());
    out
}

fn reproducibility() -> Verdict {
    let run = |threads: usize| rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(snapshot);
    let one = run(1);
    let four = run(4);
    let again = run(1);
    let bytes: usize = one.iter().map(String::len).sum();
    verdict(one == four && one == again, format!("{} artifacts, {bytes} bytes, 1 vs 4 threads and re-run", one.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Verdict); 13] = [
        ("oracle agreement", oracle_agreement),
        ("brute-force equivalence", brute_force_equivalence),
        ("theta-law scaling", theta_law),
        ("interval spanner near-optimality", interval_near_optimal),
        ("sparse lower bound", sparse_lower_bound),
        ("2-hop hierarchy", two_hop_hierarchy_check),
        ("4-hop survivability", four_hop_survival),
        ("connector expansion", connector_expansion_check),
        ("edge-count scaling", edge_count_scaling),
        ("LSO locality", lso_gate),
        ("unfiltered Euclidean stretch", unfiltered_euclid),
        ("filtered Euclidean behavior", filtered_euclid),
        ("reproducibility", reproducibility),
    ];
    let filter: Option<usize> = std::env::args().skip(1).find_map(|a| a.parse().ok());
    let mut failed = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        let id = k + 1;
        if filter.is_some_and(|x| x != id) {
            continue;
        }
        let start = Instant::now();
        let v = f();
        let status = if v.pass { "PASS" } else { "FAIL" };
        failed += usize::from(!v.pass);
        println!("criterion {id:>2} {status} {name} ({:.1}s): {}", start.elapsed().as_secs_f64(), v.detail);
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
