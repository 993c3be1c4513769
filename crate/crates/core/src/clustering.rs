//! Exhaustive threshold search over colorings, and the combinatorial
//! quantities behind its analysis.
//!
//! A coloring holds one bit per time label. Bit `σ_t = 1` colours the pair
//! `(t, ·)` as (A, B) in the fixed node order, `σ_t = 0` as (B, A). The search
//! fixes `σ_1 = 1` (the global swap is unidentifiable) and walks the remaining
//! `2^{n−1}` colorings in lexicographic order of `(σ_2, …, σ_n)`, which is a
//! binary counter with `σ_n` as least significant bit. Each increment flips an
//! amortised two bits, and flipping `σ_t` only changes the status of edges
//! incident to pair `t`, so `M` is maintained incrementally.

use std::sync::atomic::{AtomicU64, Ordering};

use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::statistics::overlap;
use crate::tree::{Shape, TimeLabelledTree};

/// Largest `n` searched by default.
pub const DEFAULT_CAP: usize = 24;

/// Hard ceiling: masks are 64-bit.
const MAX_CAP: usize = 40;

/// Colorings per parallel work unit.
const CHUNK: u64 = 1 << 14;

/// Largest `n` accepted by [`worst_case_f`].
pub const WORST_CASE_CAP: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Coloring {
    bits: Vec<bool>,
}

impl Coloring {
    pub fn from_bits(bits: Vec<bool>) -> Self {
        Coloring { bits }
    }

    /// The generating coloring `π` in the fixed node order: all ones.
    pub fn truth(n: usize) -> Self {
        Coloring {
            bits: vec![true; n],
        }
    }

    /// `σ_1 = 1` and `σ_t = bit (n − t)` of `mask` for `t ≥ 2`.
    pub fn from_mask(n: usize, mask: u64) -> Self {
        let mut bits = vec![true; n];
        for (i, b) in bits.iter_mut().enumerate().skip(1) {
            *b = (mask >> (n - 1 - i)) & 1 == 1;
        }
        Coloring { bits }
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn complement(&self) -> Self {
        Coloring {
            bits: self.bits.iter().map(|b| !b).collect(),
        }
    }
}

impl std::fmt::Display for Coloring {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl Serialize for Coloring {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterResult {
    /// First coloring reaching the threshold, if any.
    pub coloring: Option<Coloring>,
    /// `M` of the returned coloring; without one, the largest `M` seen.
    pub mono_edges: u64,
    pub threshold: i64,
    /// `max(m, n − m)` against the generating coloring.
    pub overlap: Option<usize>,
    /// Colorings up to and including the hit, in search order.
    pub searched: u64,
}

/// `⌈2(1 − q)(n − 1) − n^{2/3}⌉`.
pub fn threshold_s(n: usize, q: f64) -> Result<i64> {
    if n < 2 {
        return Err(Error::TooSmall("threshold_s needs n >= 2".into()));
    }
    if !(0.0..=0.5).contains(&q) {
        return Err(Error::param("q", format!("{q} not in [0, 1/2]")));
    }
    let c = (n as f64).cbrt();
    let raw = 2.0 * (1.0 - q) * (n as f64 - 1.0) - c * c;
    // snap representation noise around integers before taking the ceiling
    let near = raw.round();
    Ok(if (raw - near).abs() < 1e-9 { near } else { raw.ceil() } as i64)
}

/// Per-pair incidence: `(other pair, parity)`; the edge is monochromatic iff
/// `σ_self ⊕ σ_other = parity`.
struct PairGraph {
    offsets: Vec<u32>,
    adj: Vec<(u32, bool)>,
}

impl PairGraph {
    fn new(tree: &TimeLabelledTree) -> Self {
        let n = tree.n();
        let parent = tree.parents();
        let mut deg = vec![0u32; n];
        for (v, &p) in parent.iter().enumerate().skip(2) {
            deg[v / 2] += 1;
            deg[p as usize / 2] += 1;
        }
        let mut offsets = vec![0u32; n + 1];
        for i in 0..n {
            offsets[i + 1] = offsets[i] + deg[i];
        }
        let mut fill = offsets.clone();
        let mut adj = vec![(0u32, false); offsets[n] as usize];
        for (v, &p) in parent.iter().enumerate().skip(2) {
            let (i, j) = (v / 2, p as usize / 2);
            let parity = (v as u32 ^ p) & 1 == 1;
            adj[fill[i] as usize] = (j as u32, parity);
            fill[i] += 1;
            adj[fill[j] as usize] = (i as u32, parity);
            fill[j] += 1;
        }
        PairGraph { offsets, adj }
    }

    fn incident(&self, i: usize) -> &[(u32, bool)] {
        &self.adj[self.offsets[i] as usize..self.offsets[i + 1] as usize]
    }

    fn count(&self, sigma: &[bool]) -> u64 {
        let mut twice = 0u64;
        for (i, &s) in sigma.iter().enumerate() {
            for &(j, parity) in self.incident(i) {
                twice += ((s ^ sigma[j as usize]) == parity) as u64;
            }
        }
        twice / 2
    }
}

/// Scans masks `start..end`; returns the first mask with `M ≥ s`.
fn scan_chunk(g: &PairGraph, n: usize, start: u64, end: u64, s: i64, best: &AtomicU64) -> Option<(u64, u64)> {
    let mut sigma = Coloring::from_mask(n, start).bits;
    let mut m = g.count(&sigma) as i64;
    let mut local_best = m;
    let mut x = start;
    loop {
        if m >= s {
            return Some((x, m as u64));
        }
        local_best = local_best.max(m);
        x += 1;
        if x == end {
            break;
        }
        // x − 1 → x flips bits 0..=trailing_zeros(x)
        for b in 0..=x.trailing_zeros() as usize {
            let i = n - 1 - b;
            for &(j, parity) in g.incident(i) {
                let mono = (sigma[i] ^ sigma[j as usize]) == parity;
                m += if mono { -1 } else { 1 };
            }
            sigma[i] = !sigma[i];
        }
    }
    best.fetch_max(local_best as u64, Ordering::Relaxed);
    None
}

/// First coloring (with `σ_1 = 1`, lexicographic order) having at least
/// `threshold_s(n, q)` monochromatic edges.
pub fn search_colorings(tree: &TimeLabelledTree, q: f64) -> Result<ClusterResult> {
    search_colorings_capped(tree, q, DEFAULT_CAP)
}

pub fn search_colorings_capped(tree: &TimeLabelledTree, q: f64, cap: usize) -> Result<ClusterResult> {
    let n = tree.n();
    let cap = cap.min(MAX_CAP);
    if n > cap {
        return Err(Error::Infeasible {
            what: "coloring search",
            requested: n,
            cap,
        });
    }
    let s = threshold_s(n, q)?;
    let g = PairGraph::new(tree);
    let total = 1u64 << (n - 1);
    let chunks = total.div_ceil(CHUNK);
    let best = AtomicU64::new(0);
    let hit = (0..chunks).into_par_iter().find_map_first(|c| {
        let start = c * CHUNK;
        scan_chunk(&g, n, start, (start + CHUNK).min(total), s, &best)
    });
    Ok(match hit {
        Some((mask, m)) => {
            let coloring = Coloring::from_mask(n, mask);
            let agree = overlap(&coloring, &Coloring::truth(n))?;
            ClusterResult {
                coloring: Some(coloring),
                mono_edges: m,
                threshold: s,
                overlap: Some(agree.max(n - agree)),
                searched: mask + 1,
            }
        }
        None => ClusterResult {
            coloring: None,
            mono_edges: best.load(Ordering::Relaxed),
            threshold: s,
            overlap: None,
            searched: total,
        },
    })
}

// ---------------------------------------------------------------------------
// analysis constants

/// `p̄ = 1 + 2ε − ln2/2 − q(1 − ln 2)`.
pub fn p_bar(q: f64, eps: f64) -> f64 {
    let ln2 = std::f64::consts::LN_2;
    1.0 + 2.0 * eps - ln2 / 2.0 - q * (1.0 - ln2)
}

/// `(1−q) ln((1−p̄)(1−q)/(p̄q)) − ln((1−p̄)/q) − ln2/2`; positive values make
/// the union bound over far-from-truth colorings vanish.
pub fn rate_margin(q: f64, eps: f64) -> Result<f64> {
    if !(q > 0.0 && q < 0.5) {
        return Err(Error::param("q", format!("{q} not in (0, 1/2)")));
    }
    if eps.is_nan() || eps <= 0.0 {
        return Err(Error::param("eps", format!("{eps} must be positive")));
    }
    let p = p_bar(q, eps);
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::param("eps", format!("p_bar = {p} leaves (0, 1)")));
    }
    let ln2 = std::f64::consts::LN_2;
    Ok((1.0 - q) * ((1.0 - p) * (1.0 - q) / (p * q)).ln() - ((1.0 - p) / q).ln() - ln2 / 2.0)
}

/// Largest `q ∈ (0, ½)` with a positive margin at `eps`, by bisection.
pub fn max_feasible_q(eps: f64) -> Result<f64> {
    let (mut lo, mut hi) = (1e-9, 0.5 - 1e-12);
    if rate_margin(lo, eps)? <= 0.0 {
        return Err(Error::param("eps", "margin is not positive even for tiny q"));
    }
    if rate_margin(hi, eps)? > 0.0 {
        return Ok(hi);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if rate_margin(mid, eps)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    Ok(lo)
}

/// `F(x) = Σ_{i=2}^n x_i ω_{i−1} + (1 − x_i)(1 − ω_{i−1})`, `ω_i` the mean of
/// the first `i` entries. Each term is evaluated as (matching count)/(i − 1),
/// which makes `F(x̄) = F(x)` hold exactly in floating point.
pub fn f_value(x: &[u8]) -> f64 {
    let mut ones = 0usize;
    let mut total = 0.0;
    for (i, &b) in x.iter().enumerate() {
        if i > 0 {
            let matching = if b == 1 { ones } else { i - ones };
            total += matching as f64 / i as f64;
        }
        ones += b as usize;
    }
    total
}

/// Ones-first block when `2m ≥ n`, zeros-first otherwise.
pub fn block_vector(n: usize, m: usize) -> Vec<u8> {
    if 2 * m >= n {
        (0..n).map(|i| (i < m) as u8).collect()
    } else {
        (0..n).map(|i| (i >= n - m) as u8).collect()
    }
}

/// Exhaustive maximum of `F` over vectors with `m` ones. Among maximisers
/// (ties within rounding), the lexicographically largest is returned.
pub fn worst_case_f(n: usize, m: usize) -> Result<(Vec<u8>, f64)> {
    if n == 0 || n > WORST_CASE_CAP {
        return Err(Error::Infeasible {
            what: "exhaustive F maximisation",
            requested: n,
            cap: WORST_CASE_CAP,
        });
    }
    if m == 0 || m > n {
        return Err(Error::param("m", format!("{m} not in [1, {n}]")));
    }
    let to_vec = |mask: u64| -> Vec<u8> { (0..n).map(|i| ((mask >> (n - 1 - i)) & 1) as u8).collect() };
    let mut best: Option<(u64, f64)> = None;
    // Gosper's hack: masks with m bits in increasing (= lexicographic) order
    let mut mask: u64 = (1u64 << m) - 1;
    let limit = 1u64 << n;
    while mask < limit {
        let v = f_value(&to_vec(mask));
        match best {
            Some((_, b)) if v < b - 1e-12 * b.abs().max(1.0) => {}
            _ => best = Some((mask, v)),
        }
        let c = mask & mask.wrapping_neg();
        let r = mask + c;
        mask = (((r ^ mask) >> 2) / c) | r;
    }
    let (mask, _) = best.expect("at least one vector");
    let x = to_vec(mask);
    let v = f_value(&x);
    Ok((x, v))
}
