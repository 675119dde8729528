//! Counting and probability bounds for abstract van Kampen diagrams.
//!
//! Diagrams appear only through their statistics (faces, boundary length,
//! relator length) and, for tiny sizes, as rooted combinatorial maps: darts
//! `0..2n` with the edge involution `alpha(d) = d ^ 1` and a vertex rotation
//! `sigma`; faces are the cycles of `sigma . alpha`.

use std::collections::HashSet;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest edge count the brute-force census accepts by default; `8!`
/// rotations at four edges.
pub const DEFAULT_CENSUS_EDGES: usize = 4;
/// Hard cap; five edges means `10!` rotations.
pub const MAX_CENSUS_EDGES: usize = 5;

fn factorial(n: u64) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, i| acc * i)
}

/// Number of rooted planar maps with `n` edges, `2 (2n)! 3^n / (n! (n+2)!)`.
pub fn tutte_count(n: u64) -> Result<BigUint> {
    if n == 0 {
        return Err(Error::InvalidParams("tutte_count needs n >= 1".into()));
    }
    let num = BigUint::from(2u32) * factorial(2 * n) * BigUint::from(3u32).pow(n as u32);
    let den = factorial(n) * factorial(n + 2);
    let (q, r) = num.div_rem(&den);
    if !r.is_zero() {
        return Err(Error::Precondition(format!("Tutte quotient for n = {n} is not integral")));
    }
    Ok(q)
}

/// A rooted map given by its rotation; the root is dart 0.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RootedMap {
    pub sigma: Vec<usize>,
}

impl RootedMap {
    pub fn edges(&self) -> usize {
        self.sigma.len() / 2
    }

    /// Vertex degrees, one entry per cycle of `sigma`.
    pub fn vertex_degrees(&self) -> Vec<usize> {
        cycles(&self.sigma).into_iter().map(|c| c.len()).collect()
    }

    fn face_perm(&self) -> Vec<usize> {
        (0..self.sigma.len()).map(|d| self.sigma[d ^ 1]).collect()
    }

    /// Face cycles of `sigma . alpha`, each a list of darts.
    pub fn faces(&self) -> Vec<Vec<usize>> {
        cycles(&self.face_perm())
    }

    pub fn vertices(&self) -> usize {
        cycles(&self.sigma).len()
    }
}

fn cycles(perm: &[usize]) -> Vec<Vec<usize>> {
    let mut seen = vec![false; perm.len()];
    let mut out = Vec::new();
    for start in 0..perm.len() {
        if seen[start] {
            continue;
        }
        let mut c = Vec::new();
        let mut d = start;
        while !seen[d] {
            seen[d] = true;
            c.push(d);
            d = perm[d];
        }
        out.push(c);
    }
    out
}

fn connected(sigma: &[usize]) -> bool {
    let mut seen = vec![false; sigma.len()];
    let mut stack = vec![0];
    seen[0] = true;
    let mut count = 1;
    while let Some(d) = stack.pop() {
        for e in [sigma[d], d ^ 1] {
            if !seen[e] {
                seen[e] = true;
                count += 1;
                stack.push(e);
            }
        }
    }
    count == sigma.len()
}

/// Relabels darts in breadth-first order from `root`, following `sigma`
/// then `alpha`; equal codes mean isomorphic rooted maps.
fn canonical_code(sigma: &[usize], root: usize) -> Vec<usize> {
    let n = sigma.len();
    let mut label = vec![usize::MAX; n];
    let mut order = Vec::with_capacity(n);
    label[root] = 0;
    order.push(root);
    let mut head = 0;
    while head < order.len() {
        let d = order[head];
        head += 1;
        for e in [sigma[d], d ^ 1] {
            if label[e] == usize::MAX {
                label[e] = order.len();
                order.push(e);
            }
        }
    }
    order.iter().flat_map(|&d| [label[sigma[d]], label[d ^ 1]]).collect()
}

fn rebuild(code: &[usize]) -> RootedMap {
    // in the canonical labelling alpha need not be d ^ 1; re-pair darts so it is
    let n = code.len() / 2;
    let alpha: Vec<usize> = (0..n).map(|d| code[2 * d + 1]).collect();
    let mut pos = vec![usize::MAX; n];
    let mut next = 0;
    for d in 0..n {
        if pos[d] == usize::MAX {
            pos[d] = next;
            pos[alpha[d]] = next + 1;
            next += 2;
        }
    }
    let mut sigma = vec![0; n];
    for d in 0..n {
        sigma[pos[d]] = pos[code[2 * d]];
    }
    RootedMap { sigma }
}

/// Lexicographic successor of `p`; false at the last permutation.
fn next_permutation(p: &mut [usize]) -> bool {
    let Some(i) = (1..p.len()).rev().find(|&i| p[i - 1] < p[i]) else {
        return false;
    };
    let j = (i..p.len()).rev().find(|&j| p[j] > p[i - 1]).expect("successor exists");
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// All rooted planar maps with `n` edges, found by running over every
/// rotation of `2n` darts and keeping connected genus-0 ones up to rooted
/// isomorphism.
pub fn rooted_map_census(n: usize, max_edges: usize) -> Result<Vec<RootedMap>> {
    if n == 0 {
        return Err(Error::InvalidParams("census needs n >= 1".into()));
    }
    let cap = max_edges.min(MAX_CENSUS_EDGES);
    if n > cap {
        let needed = (1..=2 * n as u128).product::<u128>();
        let budget = (1..=2 * cap as u128).product::<u128>();
        return Err(Error::ResourceLimit { what: "rotations", needed, budget });
    }
    let darts = 2 * n;
    let mut sigma: Vec<usize> = (0..darts).collect();
    let mut seen: HashSet<Vec<usize>> = HashSet::new();
    let mut maps = Vec::new();
    loop {
        if connected(&sigma) {
            let v = cycles(&sigma).len();
            let f = cycles(&(0..darts).map(|d| sigma[d ^ 1]).collect::<Vec<_>>()).len();
            if v + f == n + 2 {
                for root in 0..darts {
                    let code = canonical_code(&sigma, root);
                    if seen.insert(code.clone()) {
                        maps.push(rebuild(&code));
                    }
                }
            }
        }
        if !next_permutation(&mut sigma) {
            break;
        }
    }
    Ok(maps)
}

/// Size of [`rooted_map_census`].
pub fn enumerate_rooted_maps(n: usize) -> Result<u64> {
    Ok(rooted_map_census(n, DEFAULT_CENSUS_EDGES)?.len() as u64)
}

/// A census map read as the skeleton of a diagram: the face holding the root
/// is the outside, vertices of degree one are spur tips.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Skeleton {
    pub edges: usize,
    /// Inner faces.
    pub faces: usize,
    pub spurs: usize,
    /// No vertex of degree two and at most one spur tip per inner face, none
    /// on the outside.
    pub admissible: bool,
}

pub fn skeleton(map: &RootedMap) -> Skeleton {
    let faces = map.faces();
    let mut face_of = vec![0; map.sigma.len()];
    for (i, f) in faces.iter().enumerate() {
        for &d in f {
            face_of[d] = i;
        }
    }
    let outer = face_of[0];
    let mut spur_faces = vec![0usize; faces.len()];
    let mut degree_two = false;
    let mut spurs = 0;
    for v in cycles(&map.sigma) {
        match v.len() {
            1 => {
                spurs += 1;
                spur_faces[face_of[v[0]]] += 1;
            }
            2 => degree_two = true,
            _ => {}
        }
    }
    let admissible = !degree_two && spur_faces[outer] == 0 && spur_faces.iter().all(|&c| c <= 1);
    Skeleton { edges: map.edges(), faces: faces.len() - 1, spurs, admissible }
}

/// Counts of census maps and the Tutte formula, per edge count.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CensusRow {
    pub n: usize,
    pub count: u64,
    pub oracle: String,
    pub admissible_skeletons: u64,
    /// Admissible skeletons violating `E <= 5F`.
    pub edge_bound_violations: u64,
}

pub fn census_table(max_n: usize) -> Result<Vec<CensusRow>> {
    (1..=max_n)
        .map(|n| {
            let maps = rooted_map_census(n, max_n)?;
            let sk: Vec<Skeleton> = maps.iter().map(skeleton).filter(|s| s.admissible).collect();
            Ok(CensusRow {
                n,
                count: maps.len() as u64,
                oracle: tutte_count(n as u64)?.to_string(),
                admissible_skeletons: sk.len() as u64,
                edge_bound_violations: sk.iter().filter(|s| s.edges > 5 * s.faces).count() as u64,
            })
        })
        .collect()
}

fn log_base(m: u32) -> Result<f64> {
    if m < 2 {
        return Err(Error::InvalidParams(format!("m = {m} must be at least 2")));
    }
    Ok(f64::from(2 * m - 1).ln())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiagramBound {
    /// `log (2l)^F F^F l^(5F) 3^(25F)`.
    pub log_bound: f64,
    /// `6F log l + 2F log F`.
    pub headline: f64,
}

/// Upper bound on the number of abstract diagrams with at most `faces`
/// faces of length `ell`, in log base `2m-1`.
pub fn log_diagram_bound(faces: u64, ell: u64, m: u32) -> Result<DiagramBound> {
    if faces == 0 || ell == 0 {
        return Err(Error::InvalidParams("need faces >= 1 and ell >= 1".into()));
    }
    let base = log_base(m)?;
    let (f, l) = (faces as f64, ell as f64);
    let log_bound = (f * (2.0 * l).ln() + f * f.ln() + 5.0 * f * l.ln() + 25.0 * f * 3f64.ln()) / base;
    let headline = (6.0 * f * l.ln() + 2.0 * f * f.ln()) / base;
    Ok(DiagramBound { log_bound, headline })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiagramStats {
    pub faces: u64,
    pub boundary: u64,
    pub ell: u64,
}

impl DiagramStats {
    pub fn new(faces: u64, boundary: u64, ell: u64) -> Result<DiagramStats> {
        if faces == 0 || ell == 0 {
            return Err(Error::InvalidParams("need faces >= 1 and ell >= 1".into()));
        }
        if u128::from(boundary) > u128::from(ell) * u128::from(faces) {
            return Err(Error::InvalidParams(format!(
                "boundary {boundary} exceeds the total perimeter {ell} x {faces}"
            )));
        }
        Ok(DiagramStats { faces, boundary, ell })
    }
}

/// Exponent (base `2m-1`) of the bound on the probability that a diagram is
/// fulfillable at density `density`: `(|dD|/|D| - l (1 - 2 density)) / 2`.
pub fn fulfillability_bound(stats: &DiagramStats, density: f64) -> f64 {
    let ratio = stats.boundary as f64 / stats.faces as f64;
    0.5 * (ratio - stats.ell as f64 * (1.0 - 2.0 * density))
}

/// Exponent for a diagram inside the window that fails the quadratic
/// inequality: `10^4 l / K - l f`.
pub fn window_fulfillability_exponent(ell: f64, k: f64, f: f64) -> f64 {
    1e4 * ell / k - ell * f
}

/// Scale at which the local-global principle applies; below `10^10` it is
/// usable for desk-scale checks only.
pub const CONFORMING_K: u64 = 10_000_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowParams {
    pub k: u64,
    pub conforming: bool,
}

impl WindowParams {
    pub fn new(k: u64, allow_small: bool) -> Result<WindowParams> {
        if k == 0 {
            return Err(Error::InvalidParams("K must be positive".into()));
        }
        let conforming = k >= CONFORMING_K;
        if !conforming && !allow_small {
            return Err(Error::Precondition(format!(
                "K = {k} is below 10^10; pass the exploration flag to evaluate anyway"
            )));
        }
        Ok(WindowParams { k, conforming })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IsoConclusion {
    /// `l |D| / (10^4 K)`.
    pub min_boundary: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LocalGlobal {
    /// `K^2/4 <= |D| <= 480 K^2`.
    pub in_window: bool,
    /// `|dD|^2 >= 2 10^4 l^2 |D|`.
    pub satisfies_j: bool,
    /// Linear inequality for `|D| >= K^2`; absent for smaller diagrams.
    pub conclusion: Option<IsoConclusion>,
    pub conforming: bool,
}

/// Exact evaluation of the window predicates.
pub fn local_global(stats: &DiagramStats, win: &WindowParams) -> LocalGlobal {
    let d = BigUint::from(stats.faces);
    let b = BigUint::from(stats.boundary);
    let l = BigUint::from(stats.ell);
    let k = BigUint::from(win.k);
    let k2 = &k * &k;
    let in_window = k2 <= BigUint::from(4u32) * &d && d <= BigUint::from(480u32) * &k2;
    let satisfies_j = &b * &b >= BigUint::from(20_000u32) * &l * &l * &d;
    let conclusion = (d >= k2).then(|| IsoConclusion {
        min_boundary: stats.ell as f64 * stats.faces as f64 / (1e4 * win.k as f64),
        holds: BigUint::from(10_000u32) * &k * &b >= &l * &d,
    });
    LocalGlobal { in_window, satisfies_j, conclusion, conforming: win.conforming }
}

/// Exhaustive count of disk-shaped gluings of up to `faces` labelled
/// `ell`-gons, weighted by orientations and face labellings (`2^F F^F`).
/// Only tiny inputs (`faces * ell <= 6`) are accepted.
pub fn fillable_configurations(faces: usize, ell: usize) -> Result<u64> {
    if faces == 0 || ell == 0 {
        return Err(Error::InvalidParams("need faces >= 1 and ell >= 1".into()));
    }
    if faces * ell > 6 {
        return Err(Error::ResourceLimit {
            what: "polygon sides",
            needed: (faces * ell) as u128,
            budget: 6,
        });
    }
    let mut total = 0u64;
    for f in 1..=faces {
        let disks = disk_gluings(f, ell);
        total += disks * 2u64.pow(f as u32) * (f as u64).pow(f as u32);
    }
    Ok(total)
}

/// Partial side matchings of `f` labelled `ell`-gons that yield a disk.
fn disk_gluings(f: usize, ell: usize) -> u64 {
    let sides = f * ell;
    let mut partner = vec![usize::MAX; sides];
    let mut count = 0;
    fn next(i: usize, ell: usize) -> usize {
        (i / ell) * ell + (i % ell + 1) % ell
    }
    fn visit(i: usize, partner: &mut Vec<usize>, f: usize, ell: usize, count: &mut u64) {
        let sides = partner.len();
        if i == sides {
            if is_disk(partner, f, ell) {
                *count += 1;
            }
            return;
        }
        if partner[i] != usize::MAX {
            return visit(i + 1, partner, f, ell, count);
        }
        // side i stays on the boundary
        partner[i] = i;
        visit(i + 1, partner, f, ell, count);
        partner[i] = usize::MAX;
        for j in i + 1..sides {
            if partner[j] == usize::MAX {
                partner[i] = j;
                partner[j] = i;
                visit(i + 1, partner, f, ell, count);
                partner[i] = usize::MAX;
                partner[j] = usize::MAX;
            }
        }
    }
    fn is_disk(partner: &[usize], f: usize, ell: usize) -> bool {
        let sides = partner.len();
        let mut corners: Vec<usize> = (0..sides).collect();
        fn find(p: &mut [usize], mut i: usize) -> usize {
            while p[i] != i {
                p[i] = p[p[i]];
                i = p[i];
            }
            i
        }
        let mut polys: Vec<usize> = (0..f).collect();
        let mut edges = 0;
        for i in 0..sides {
            let j = partner[i];
            if j == i {
                edges += 1;
                continue;
            }
            if i < j {
                edges += 1;
                // side i runs corner i -> next(i); j is glued reversed
                let (a, b) = (find(&mut corners, i), find(&mut corners, next(j, ell)));
                corners[a] = b;
                let (a, b) = (find(&mut corners, next(i, ell)), find(&mut corners, j));
                corners[a] = b;
                let (a, b) = (find(&mut polys, i / ell), find(&mut polys, j / ell));
                polys[a] = b;
            }
        }
        if (0..f).filter(|&p| find(&mut polys, p) == p).count() != 1 {
            return false;
        }
        let vertices = (0..sides).filter(|&c| find(&mut corners, c) == c).count();
        if vertices + f != edges + 1 {
            return false;
        }
        // boundary must be a single cycle
        let boundary: Vec<usize> = (0..sides).filter(|&i| partner[i] == i).collect();
        let Some(&start) = boundary.first() else {
            return false;
        };
        let mut steps = 0;
        let mut s = start;
        loop {
            let mut t = next(s, ell);
            while partner[t] != t {
                t = next(partner[t], ell);
            }
            s = t;
            steps += 1;
            if s == start || steps > sides {
                break;
            }
        }
        steps == boundary.len()
    }
    visit(0, &mut partner, f, ell, &mut count);
    count
}

/// Natural-log helper shared with the CLI.
pub fn biguint_log(x: &BigUint, m: u32) -> Result<f64> {
    let base = log_base(m)?;
    if x.is_zero() {
        return Ok(f64::NEG_INFINITY);
    }
    let bits = x.bits();
    let shift = bits.saturating_sub(60);
    let top = (x >> shift).to_f64().unwrap_or(f64::INFINITY);
    Ok((top.ln() + shift as f64 * std::f64::consts::LN_2) / base)
}
