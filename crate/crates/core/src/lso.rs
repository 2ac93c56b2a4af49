//! Locality-sensitive orderings of `[0,1)^d`.
//!
//! An ordering is *ε-local* for a pair `u, v` of a point set `P` if every
//! point of `P` strictly between `u` and `v` lies within distance `ε|uv|` of
//! `u` or of `v`. [`build_lso_family`] returns a finite family such that
//! every pair of every point set has an ε-local ordering in it.
//!
//! # Realisation
//!
//! Orderings are depth-first traversals of shifted, compressed quadtrees:
//!
//! * **Shifts.** Let `D` be `d` rounded up to an even number. Points are
//!   translated by `j/(D+1) * (1,…,1)` for `j = 0..=D` into `[0,2)^d`, the
//!   root cell of a quadtree (cells half-open per axis). For every pair some
//!   shift puts both points into a common cell of side at most
//!   `2(D+1)‖u−v‖∞`.
//! * **Compression.** With `m = 2^h` the smallest power of two at least
//!   `2√d(D+1)/ε`, the quadtree levels are grouped `h` at a time, giving a
//!   tree whose nodes have `m^d` children. The `h` possible alignments of the
//!   groups (phases) make every quadtree cell a node of one of the trees.
//! * **Child orders.** The `N = m^d` children of a node are visited along
//!   one of the `N/2` zigzag Hamiltonian paths `p, p+1, p−1, p+2, … (mod N)`
//!   that partition the edges of `K_N`, so any two children are adjacent in
//!   one of them.
//!
//! A pair is then local in the ordering whose tree has their lowest common
//! cell as a node and whose child order makes their two subcells adjacent:
//! everything in between lies in one of the two subcells, each of diameter
//! at most `ε‖u−v‖∞`.
//!
//! The family holds `1 + (D+1) · h · N/2` orderings; ordering 0 is the
//! lexicographic order of coordinates (the natural order for `d = 1`).
//! Coordinates are compared in 62-bit fixed point; points with identical
//! fixed-point images fall back to lexicographic comparison.

use std::cmp::Ordering as Cmp;

use serde::Serialize;

use crate::error::{invalid, Error, Result};

const FRACTION_BITS: u32 = 62;
/// Quadtree levels resolved by the fixed-point representation.
const LEVELS: u32 = 63;
/// `m^d` must stay below this many children.
const MAX_CHILD_BITS: u32 = 62;

/// Number of diagonal shifts for dimension `d`.
pub fn shift_count(d: u32) -> u32 {
    d + d % 2 + 1
}

/// `2√d(D+1)`: cell-side-to-distance slack of the shifted quadtrees times
/// the diameter factor of a cell.
fn kappa(d: u32) -> f64 {
    2.0 * f64::from(d).sqrt() * f64::from(shift_count(d))
}

/// The documented constant with `|family| ≤ c_lso(d) · ε^{-d} · log2(2/ε) + 1`
/// for `ε ∈ (0, 1/2]`: `(D+1)/2 · (2κ)^d · (1 + log2(κ)/2)` with
/// `κ = 2√d(D+1)`.
pub fn c_lso(d: u32) -> f64 {
    let k = kappa(d);
    f64::from(shift_count(d)) / 2.0 * (2.0 * k).powi(d as i32) * (1.0 + k.log2() / 2.0)
}

/// Right-hand side of the family size bound.
pub fn family_size_bound(eps: f64, d: u32) -> f64 {
    c_lso(d) * eps.powi(-(d as i32)) * (2.0 / eps).log2() + 1.0
}

/// Traversal parameters of one shifted compressed quadtree ordering.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct TreeOrder {
    pub shift_index: u32,
    pub shift_count: u32,
    /// Levels per tree node (`m = 2^h`).
    pub h: u32,
    /// Group alignment: tree nodes sit at quadtree levels `≡ phase (mod h)`.
    pub phase: u32,
    /// Zigzag path used to order the `m^d` children of every node.
    pub path: u64,
}

impl TreeOrder {
    fn shift_fixed(&self) -> u64 {
        ((u128::from(self.shift_index) << FRACTION_BITS) / u128::from(self.shift_count)) as u64
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum OrderKind {
    Lexicographic,
    Tree(TreeOrder),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Ordering {
    pub id: u64,
    pub d: u32,
    pub kind: OrderKind,
}

impl Ordering {
    /// The translation applied before the quadtree is laid over the points.
    pub fn shift_vector(&self) -> Vec<f64> {
        let s = match self.kind {
            OrderKind::Lexicographic => 0.0,
            OrderKind::Tree(t) => f64::from(t.shift_index) / f64::from(t.shift_count),
        };
        vec![s; self.d as usize]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrderingFamily {
    eps: f64,
    d: u32,
    h: u32,
    shifts: u32,
    len: u64,
}

impl OrderingFamily {
    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn dimension(&self) -> u32 {
        self.d
    }

    /// Grid refinement `m` per tree level.
    pub fn refinement(&self) -> u64 {
        1 << self.h
    }

    pub fn phases(&self) -> u32 {
        self.h
    }

    pub fn shifts(&self) -> u32 {
        self.shifts
    }

    /// Children per tree node, `m^d`.
    pub fn children(&self) -> u64 {
        1 << (self.h * self.d)
    }

    fn paths(&self) -> u64 {
        self.children() / 2
    }

    pub fn len(&self) -> u64 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, id: u64) -> Option<Ordering> {
        if id >= self.len {
            return None;
        }
        let kind = if id == 0 {
            OrderKind::Lexicographic
        } else {
            let rest = id - 1;
            let path = rest % self.paths();
            let group = rest / self.paths();
            OrderKind::Tree(TreeOrder {
                shift_index: (group / u64::from(self.h)) as u32,
                shift_count: self.shifts,
                h: self.h,
                phase: (group % u64::from(self.h)) as u32,
                path,
            })
        };
        Some(Ordering { id, d: self.d, kind })
    }

    fn tree_id(&self, shift_index: u32, phase: u32, path: u64) -> u64 {
        1 + (u64::from(shift_index) * u64::from(self.h) + u64::from(phase)) * self.paths() + path
    }

    pub fn iter(&self) -> impl Iterator<Item = Ordering> + '_ {
        (0..self.len).map(|id| self.get(id).expect("id in range"))
    }

    /// Every ordering once: ordering 0, then paths in turn, cycling through
    /// all shifts and phases for each path.
    pub fn iter_interleaved(&self) -> impl Iterator<Item = Ordering> + '_ {
        let (shifts, h) = (self.shifts, self.h);
        let trees = (0..self.paths()).flat_map(move |p| {
            (0..shifts).flat_map(move |j| (0..h).map(move |r| self.tree_id(j, r, p)))
        });
        std::iter::once(0).chain(trees).map(|id| self.get(id).expect("id in range"))
    }
}

/// The ordering family for locality `eps ∈ (0, 1/2]` in dimension `d ≥ 1`.
pub fn build_lso_family(eps: f64, d: u32) -> Result<OrderingFamily> {
    if !(eps > 0.0 && eps <= 0.5) {
        return Err(invalid("eps", format!("{eps} is not in (0, 1/2]")));
    }
    if d == 0 {
        return Err(invalid("d", "dimension must be at least 1"));
    }
    let m = (kappa(d) / eps).ceil();
    if m >= 2f64.powi(MAX_CHILD_BITS as i32) {
        return Err(invalid("eps", format!("{eps} needs an unrepresentable refinement")));
    }
    let h = (m as u64).next_power_of_two().trailing_zeros();
    if h > 32 || h * d > MAX_CHILD_BITS {
        return Err(invalid("eps", format!("family for eps = {eps}, d = {d} is too large")));
    }
    let shifts = shift_count(d);
    let len = (u64::from(shifts) * u64::from(h))
        .checked_mul(1 << (h * d - 1))
        .and_then(|x| x.checked_add(1))
        .ok_or_else(|| invalid("eps", format!("family for eps = {eps}, d = {d} is too large")))?;
    Ok(OrderingFamily { eps, d, h, shifts, len })
}

fn check_point(p: &[f64], d: u32) -> Result<()> {
    if p.len() != d as usize {
        return Err(invalid("point", format!("has {} coordinates, expected {d}", p.len())));
    }
    for &x in p {
        if !(0.0..1.0).contains(&x) {
            return Err(Error::CoordinateOutOfRange { index: 0, value: x });
        }
    }
    Ok(())
}

fn lexicographic(p: &[f64], q: &[f64]) -> Cmp {
    p.iter()
        .zip(q)
        .map(|(a, b)| a.partial_cmp(b).expect("coordinates are finite"))
        .find(|c| c.is_ne())
        .unwrap_or(Cmp::Equal)
}

/// `floor(x * 2^62)`, exact for `x ∈ [0,1)`.
fn to_fixed(x: f64) -> u64 {
    (x * (1u64 << FRACTION_BITS) as f64) as u64
}

/// Position of child `c` on zigzag path `p` of `K_n` (`n` even).
pub fn zigzag_position(n: u64, p: u64, c: u64) -> u64 {
    let w = (c + n - p) % n;
    if w == 0 {
        0
    } else if w <= n / 2 {
        2 * w - 1
    } else {
        2 * (n - w)
    }
}

/// The zigzag path containing edge `{a, b}` of `K_n`.
pub fn zigzag_path_of(n: u64, a: u64, b: u64) -> u64 {
    ((a + b) % n) / 2
}

/// Shifted fixed-point coordinates of a point, one per axis, each `< 2^63`.
fn shifted(t: &TreeOrder, p: &[f64]) -> Vec<u64> {
    let s = t.shift_fixed();
    p.iter().map(|&x| to_fixed(x) + s).collect()
}

/// Tree traversal digits: group `g` of the padded level string.
struct Groups {
    pad: u32,
    h: u32,
    count: u32,
}

impl Groups {
    fn new(h: u32, phase: u32) -> Self {
        let pad = (h - phase) % h;
        Groups { pad, h, count: (LEVELS + pad).div_ceil(h) }
    }

    /// Child index of the node at group `g`: the `h`-bit digit of each axis,
    /// axis 0 least significant.
    fn child(&self, coords: &[u64], g: u32) -> u64 {
        let mask = (1u128 << self.h) - 1;
        let drop = 128 - (g + 1) * self.h;
        coords.iter().enumerate().fold(0u64, |acc, (a, &x)| {
            let digit = ((u128::from(x) << (128 - LEVELS - self.pad)) >> drop) & mask;
            acc | ((digit as u64) << (a as u32 * self.h))
        })
    }
}

/// Sort key of a point under a tree ordering.
fn tree_key(t: &TreeOrder, d: u32, p: &[f64]) -> Vec<u64> {
    let coords = shifted(t, p);
    let groups = Groups::new(t.h, t.phase);
    let n = 1u64 << (t.h * d);
    (0..groups.count).map(|g| zigzag_position(n, t.path, groups.child(&coords, g))).collect()
}

/// Compares two points of `[0,1)^d` under ordering `o`; `Equal` only for
/// identical coordinates.
pub fn compare_points(o: &Ordering, p: &[f64], q: &[f64]) -> Result<Cmp> {
    check_point(p, o.d)?;
    check_point(q, o.d)?;
    Ok(compare_unchecked(o, p, q))
}

fn compare_unchecked(o: &Ordering, p: &[f64], q: &[f64]) -> Cmp {
    match o.kind {
        OrderKind::Lexicographic => lexicographic(p, q),
        OrderKind::Tree(t) => {
            let (cp, cq) = (shifted(&t, p), shifted(&t, q));
            let groups = Groups::new(t.h, t.phase);
            let n = 1u64 << (t.h * o.d);
            for g in 0..groups.count {
                let (a, b) = (groups.child(&cp, g), groups.child(&cq, g));
                if a != b {
                    return zigzag_position(n, t.path, a).cmp(&zigzag_position(n, t.path, b));
                }
            }
            lexicographic(p, q)
        }
    }
}

/// Indices of `points` sorted by ordering `o`.
pub fn sort_by_ordering<P: AsRef<[f64]> + Sync>(o: &Ordering, points: &[P]) -> Result<Vec<usize>> {
    for (i, p) in points.iter().enumerate() {
        check_point(p.as_ref(), o.d).map_err(|e| match e {
            Error::CoordinateOutOfRange { value, .. } => Error::CoordinateOutOfRange { index: i, value },
            other => other,
        })?;
    }
    let mut idx: Vec<usize> = (0..points.len()).collect();
    match o.kind {
        OrderKind::Lexicographic => {
            idx.sort_by(|&a, &b| lexicographic(points[a].as_ref(), points[b].as_ref()));
        }
        OrderKind::Tree(t) => {
            let keys: Vec<Vec<u64>> = points.iter().map(|p| tree_key(&t, o.d, p.as_ref())).collect();
            idx.sort_by(|&a, &b| {
                keys[a].cmp(&keys[b]).then_with(|| lexicographic(points[a].as_ref(), points[b].as_ref()))
            });
        }
    }
    Ok(idx)
}

/// Deepest quadtree level at which `u` and `v` share a cell under shift
/// `shift_index`, or `None` if their fixed-point images coincide.
/// Level `l` cells have side `2^(1-l)`.
pub fn common_cell_level(shift_index: u32, shift_count: u32, u: &[f64], v: &[f64]) -> Option<u32> {
    let t = TreeOrder { shift_index, shift_count, h: 1, phase: 0, path: 0 };
    let (a, b) = (shifted(&t, u), shifted(&t, v));
    let top = a.iter().zip(&b).map(|(x, y)| x ^ y).max().unwrap_or(0);
    (top != 0).then(|| top.leading_zeros() - 1)
}

fn euclid(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
}

/// Whether ordering `o` is `eps`-local for `(u, v)` within `points`.
pub fn is_local<P: AsRef<[f64]>>(o: &Ordering, eps: f64, points: &[P], u: usize, v: usize) -> bool {
    let (pu, pv) = (points[u].as_ref(), points[v].as_ref());
    let (lo, hi) = match compare_unchecked(o, pu, pv) {
        Cmp::Less => (pu, pv),
        _ => (pv, pu),
    };
    let reach = eps * euclid(pu, pv);
    points.iter().enumerate().all(|(i, w)| {
        let w = w.as_ref();
        if i == u || i == v {
            return true;
        }
        let between = compare_unchecked(o, lo, w) == Cmp::Less && compare_unchecked(o, w, hi) == Cmp::Less;
        !between || euclid(w, pu) <= reach || euclid(w, pv) <= reach
    })
}

/// Id of an ordering of `family` that is local for points `u` and `v` of
/// `points`, or `None` if the family has none.
///
/// Tries the lexicographic ordering, then the ordering the construction
/// predicts (deepest common cell over all shifts, matching phase, path
/// joining the two subcells), then every ordering in id order. Each
/// candidate is checked against all points.
pub fn locality_witness<P: AsRef<[f64]>>(
    family: &OrderingFamily,
    points: &[P],
    u: usize,
    v: usize,
) -> Result<Option<u64>> {
    let n = points.len();
    for i in [u, v] {
        if i >= n {
            return Err(invalid("point", format!("index {i} is not in a set of {n} points")));
        }
    }
    for (i, p) in points.iter().enumerate() {
        check_point(p.as_ref(), family.d).map_err(|e| match e {
            Error::CoordinateOutOfRange { value, .. } => Error::CoordinateOutOfRange { index: i, value },
            other => other,
        })?;
    }
    let (pu, pv) = (points[u].as_ref(), points[v].as_ref());
    if lexicographic(pu, pv).is_eq() {
        return Err(invalid("pair", format!("points {u} and {v} coincide")));
    }
    let eps = family.eps;
    let first = family.get(0).expect("family is never empty");
    if is_local(&first, eps, points, u, v) {
        return Ok(Some(0));
    }
    if let Some(o) = predicted_ordering(family, pu, pv) {
        if is_local(&o, eps, points, u, v) {
            return Ok(Some(o.id));
        }
    }
    Ok(family.iter().skip(1).find(|o| is_local(o, eps, points, u, v)).map(|o| o.id))
}

/// The ordering in which `u` and `v` land in adjacent children of their
/// lowest common cell.
pub fn predicted_ordering(family: &OrderingFamily, u: &[f64], v: &[f64]) -> Option<Ordering> {
    let (shift, level) = (0..family.shifts)
        .filter_map(|j| common_cell_level(j, family.shifts, u, v).map(|l| (j, l)))
        .max_by_key(|&(j, l)| (l, std::cmp::Reverse(j)))?;
    let h = family.h;
    let phase = level % h;
    let probe = TreeOrder { shift_index: shift, shift_count: family.shifts, h, phase, path: 0 };
    let groups = Groups::new(h, phase);
    let g = (level + groups.pad) / h;
    let (a, b) = (groups.child(&shifted(&probe, u), g), groups.child(&shifted(&probe, v), g));
    debug_assert_ne!(a, b);
    let path = zigzag_path_of(family.children(), a, b);
    family.get(family.tree_id(shift, phase, path))
}
