//! Text formats.
//!
//! Edge lists: a header line `n m`, then `m` lines `i j` or `i j w` with
//! 1-based vertices and `i < j`. Either every edge has a weight or none
//! does. Point files: a header line `n d`, then `n` lines of `d`
//! coordinates. Blank lines are ignored; lines end in `\n`. Floats are
//! written in Rust's shortest round-trip form (`0.1`, `-3.0`, `1e-300`), so
//! emitting and parsing round-trips exactly. An edge list without edges
//! reads back as unweighted.
//!
//! Graph outputs carry a JSON sidecar next to them (`<path>.json`).

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{RankGraph, Vertex};

fn parse_error(line: usize, reason: impl Into<String>) -> Error {
    Error::Parse { line, reason: reason.into() }
}

/// Non-blank lines with their 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines()
        .enumerate()
        .map(|(k, l)| (k + 1, l.split_whitespace().collect::<Vec<_>>()))
        .filter(|(_, f)| !f.is_empty())
}

fn parse_float(line: usize, s: &str) -> Result<f64> {
    let x: f64 = s.parse().map_err(|_| parse_error(line, format!("bad number {s:?}")))?;
    if x.is_finite() {
        Ok(x)
    } else {
        Err(parse_error(line, format!("non-finite number {s:?}")))
    }
}

pub fn parse_edge_list(text: &str) -> Result<RankGraph> {
    let mut lines = content_lines(text);
    let (hline, fields) = lines.next().ok_or_else(|| parse_error(1, "missing \"n m\" header"))?;
    if fields.len() != 2 {
        return Err(parse_error(hline, "header must be \"n m\""));
    }
    let n: u32 = fields[0].parse().map_err(|_| parse_error(hline, format!("bad vertex count {:?}", fields[0])))?;
    let m: usize = fields[1].parse().map_err(|_| parse_error(hline, format!("bad edge count {:?}", fields[1])))?;
    let mut edges = Vec::with_capacity(m);
    let mut weights = Vec::new();
    let mut weighted = None;
    let mut seen: HashMap<(Vertex, Vertex), usize> = HashMap::with_capacity(m);
    for (line, f) in lines {
        if f.len() != 2 && f.len() != 3 {
            return Err(parse_error(line, "expected \"i j\" or \"i j w\""));
        }
        let has_weight = f.len() == 3;
        match weighted {
            None => weighted = Some(has_weight),
            Some(w) if w != has_weight => return Err(parse_error(line, "weighted and unweighted edges mixed")),
            _ => {}
        }
        let vertex = |s: &str| -> Result<Vertex> {
            let v: u64 = s.parse().map_err(|_| parse_error(line, format!("bad vertex {s:?}")))?;
            if v == 0 || v > u64::from(n) {
                return Err(parse_error(line, format!("vertex {v} out of range 1..={n}")));
            }
            Ok(v as Vertex)
        };
        let (i, j) = (vertex(f[0])?, vertex(f[1])?);
        if i == j {
            return Err(parse_error(line, format!("self-loop at {i}")));
        }
        if i > j {
            return Err(parse_error(line, format!("edge {i} {j} must be written with i < j")));
        }
        if let Some(first) = seen.insert((i, j), line) {
            return Err(parse_error(line, format!("duplicate edge {i} {j} (first on line {first})")));
        }
        edges.push((i, j));
        if has_weight {
            let w = parse_float(line, f[2])?;
            if w <= 0.0 {
                return Err(parse_error(line, format!("weight {w} must be positive")));
            }
            weights.push(w);
        }
    }
    if edges.len() != m {
        return Err(parse_error(hline, format!("header announces {m} edges, found {}", edges.len())));
    }
    if weighted == Some(true) {
        RankGraph::from_weighted_edges(n, edges, weights)
    } else {
        RankGraph::from_edges(n, edges)
    }
}

pub fn format_edge_list(g: &RankGraph) -> String {
    let mut out = String::with_capacity(16 * g.edge_count() + 16);
    writeln!(out, "{} {}", g.n(), g.edge_count()).unwrap();
    for (k, &(i, j)) in g.edges().iter().enumerate() {
        if g.is_weighted() {
            writeln!(out, "{i} {j} {:?}", g.weight_at(k)).unwrap();
        } else {
            writeln!(out, "{i} {j}").unwrap();
        }
    }
    out
}

pub fn read_edge_list(path: &Path) -> Result<RankGraph> {
    parse_edge_list(&fs::read_to_string(path)?)
}

pub fn write_edge_list(path: &Path, g: &RankGraph) -> Result<()> {
    fs::write(path, format_edge_list(g))?;
    Ok(())
}

/// Raw coordinates; see [`crate::euclid::normalize_points`].
pub fn parse_points(text: &str) -> Result<Vec<Vec<f64>>> {
    let mut lines = content_lines(text);
    let (hline, fields) = lines.next().ok_or_else(|| parse_error(1, "missing \"n d\" header"))?;
    if fields.len() != 2 {
        return Err(parse_error(hline, "header must be \"n d\""));
    }
    let n: usize = fields[0].parse().map_err(|_| parse_error(hline, format!("bad point count {:?}", fields[0])))?;
    let d: usize = fields[1].parse().map_err(|_| parse_error(hline, format!("bad dimension {:?}", fields[1])))?;
    if d == 0 {
        return Err(parse_error(hline, "dimension must be at least 1"));
    }
    let mut points = Vec::with_capacity(n);
    let mut seen: HashMap<Vec<u64>, usize> = HashMap::with_capacity(n);
    for (line, f) in lines {
        if f.len() != d {
            return Err(parse_error(line, format!("expected {d} coordinates, found {}", f.len())));
        }
        let p = f.iter().map(|s| parse_float(line, s)).collect::<Result<Vec<f64>>>()?;
        // +0.0 and -0.0 are the same point.
        let key = p.iter().map(|x| (x + 0.0).to_bits()).collect();
        if let Some(first) = seen.insert(key, line) {
            return Err(parse_error(line, format!("duplicate point (first on line {first})")));
        }
        points.push(p);
    }
    if points.len() != n {
        return Err(parse_error(hline, format!("header announces {n} points, found {}", points.len())));
    }
    Ok(points)
}

pub fn format_points(points: &[Vec<f64>]) -> String {
    let d = points.first().map_or(0, Vec::len);
    let mut out = String::new();
    writeln!(out, "{} {d}", points.len()).unwrap();
    for p in points {
        let row: Vec<String> = p.iter().map(|x| format!("{x:?}")).collect();
        writeln!(out, "{}", row.join(" ")).unwrap();
    }
    out
}

pub fn read_points(path: &Path) -> Result<Vec<Vec<f64>>> {
    parse_points(&fs::read_to_string(path)?)
}

pub fn write_points(path: &Path, points: &[Vec<f64>]) -> Result<()> {
    fs::write(path, format_points(points))?;
    Ok(())
}

/// `<path>.json`.
pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

pub fn write_sidecar(path: &Path, meta: &impl Serialize) -> Result<PathBuf> {
    let side = sidecar_path(path);
    let mut text = serde_json::to_string_pretty(meta)?;
    text.push('\n');
    fs::write(&side, text)?;
    Ok(side)
}
