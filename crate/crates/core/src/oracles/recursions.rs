//! Exact expectation recursions, run forward from `n = 1`.
//!
//! With `x = q(1 − q)` and `m` the current number of time steps:
//!
//! * degrees: `N_k ← N_k(1 − 1/m + x/m²) + N_{k−1}(1/m − 2x/m²) + x N_{k−2}/m²`,
//!   plus the two new leaves in `N_1`; start `N_1(1) = 2`;
//! * root split: `f ← a f + b g`, `g ← c g + d f`, start `f = g = 1`;
//! * all edges: `S ← a S + b K + 2(2m + 1)`, `K ← c K + d S + 2(m + 1)`,
//!   start `S = K = 1`;
//!
//! with `a = 1 + 2/m + 2x/m²`, `b = (1 − 2q)²/m²`, `c = (1 + (1 − 2q)/m)²`
//! and `d = 2q/m + 2x/m²`.

use serde::Serialize;

use super::precision::{DoubleDouble, Real};
use crate::error::{check_probability, Error, Result};

/// Which recursion a table holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum MomentKind {
    /// `E[N_1(m)]`.
    Leaf,
    /// `E[N_1(m)], …, E[N_k(m)]`.
    Degree { k_max: usize },
    /// `f_q(m) = E|T⁺||T⁻|`, `g_q(m) = E[R_m]`.
    Rooted,
    /// `E[S_m]`, `E[K_m]`.
    Unrooted,
}

impl MomentKind {
    pub fn columns(self) -> Vec<String> {
        match self {
            MomentKind::Leaf => vec!["N1".into()],
            MomentKind::Degree { k_max } => (1..=k_max).map(|k| format!("N{k}")).collect(),
            MomentKind::Rooted => vec!["f".into(), "g".into()],
            MomentKind::Unrooted => vec!["S".into(), "K".into()],
        }
    }

    fn width(self) -> usize {
        match self {
            MomentKind::Leaf => 1,
            MomentKind::Degree { k_max } => k_max,
            MomentKind::Rooted | MomentKind::Unrooted => 2,
        }
    }

    fn initial<R: Real>(self) -> Vec<R> {
        match self {
            MomentKind::Leaf => vec![R::from_f64(2.0)],
            MomentKind::Degree { k_max } => {
                let mut v = vec![R::from_f64(0.0); k_max];
                v[0] = R::from_f64(2.0);
                v
            }
            MomentKind::Rooted | MomentKind::Unrooted => vec![R::from_f64(1.0); 2],
        }
    }

    /// Row `m + 1` from row `m`.
    fn step<R: Real>(self, q: f64, m: u64, row: &[R], out: &mut [R]) {
        let one = R::from_f64(1.0);
        let two = R::from_f64(2.0);
        let q = R::from_f64(q);
        let x = q * (one - q);
        let mm = R::from_u64(m);
        let inv = one / mm;
        let inv2 = inv * inv;
        match self {
            MomentKind::Leaf | MomentKind::Degree { .. } => {
                let stay = one - inv + x * inv2;
                let one_child = inv - two * x * inv2;
                let two_children = x * inv2;
                let zero = R::from_f64(0.0);
                for k in 0..row.len() {
                    let prev1 = if k >= 1 { row[k - 1] } else { zero };
                    let prev2 = if k >= 2 { row[k - 2] } else { zero };
                    let mut v = row[k] * stay + prev1 * one_child + prev2 * two_children;
                    if k == 0 {
                        v = v + two;
                    }
                    out[k] = v;
                }
            }
            MomentKind::Rooted | MomentKind::Unrooted => {
                let r = one - two * q;
                let a = one + two * inv + two * x * inv2;
                let b = r * r * inv2;
                let c = (one + r * inv) * (one + r * inv);
                let d = two * q * inv + two * x * inv2;
                let (f, g) = (row[0], row[1]);
                out[0] = a * f + b * g;
                out[1] = c * g + d * f;
                if self == MomentKind::Unrooted {
                    out[0] = out[0] + R::from_u64(2 * (2 * m + 1));
                    out[1] = out[1] + R::from_u64(2 * (m + 1));
                }
            }
        }
    }
}

/// Expectations for every `m ≤ n_max`, one row per `m`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentTable {
    pub kind: MomentKind,
    pub q: f64,
    pub n_max: usize,
    values: Vec<f64>,
}

impl MomentTable {
    /// Row of `m`, `1 ≤ m ≤ n_max`.
    pub fn row(&self, m: usize) -> &[f64] {
        let w = self.kind.width();
        &self.values[(m - 1) * w..m * w]
    }

    pub fn last(&self) -> &[f64] {
        self.row(self.n_max)
    }

    pub fn rows(&self) -> impl Iterator<Item = (usize, &[f64])> {
        self.values
            .chunks_exact(self.kind.width())
            .enumerate()
            .map(|(i, r)| (i + 1, r))
    }

    /// Largest relative residual when re-applying one recursion step to every
    /// stored row; rounding-level when the table is consistent.
    pub fn residual(&self) -> f64 {
        let w = self.kind.width();
        let mut out = vec![0.0; w];
        let mut worst: f64 = 0.0;
        let init = self.kind.initial::<f64>();
        for (a, b) in self.row(1).iter().zip(&init) {
            worst = worst.max((a - b).abs() / b.abs().max(1.0));
        }
        for m in 1..self.n_max {
            self.kind.step(self.q, m as u64, self.row(m), &mut out);
            for (got, want) in self.row(m + 1).iter().zip(&out) {
                worst = worst.max((got - want).abs() / want.abs().max(1.0));
            }
        }
        worst
    }
}

fn check(n: usize, q: f64) -> Result<()> {
    check_probability("q", q)?;
    if n == 0 {
        return Err(Error::TooSmall("recursions start at n = 1".into()));
    }
    Ok(())
}

/// Runs a recursion in the given arithmetic; only the final row is kept.
pub fn run_final<R: Real>(kind: MomentKind, q: f64, n: usize) -> Result<Vec<f64>> {
    check(n, q)?;
    let mut row = kind.initial::<R>();
    let mut next = row.clone();
    for m in 1..n as u64 {
        kind.step(q, m, &row, &mut next);
        std::mem::swap(&mut row, &mut next);
    }
    Ok(row.into_iter().map(Real::to_f64).collect())
}

/// Full table in double precision.
pub fn moment_table(kind: MomentKind, q: f64, n: usize) -> Result<MomentTable> {
    check(n, q)?;
    if let MomentKind::Degree { k_max } = kind {
        if k_max == 0 {
            return Err(Error::param("k", "degree index starts at 1"));
        }
    }
    let w = kind.width();
    let mut values = Vec::with_capacity(n * w);
    values.extend(kind.initial::<f64>());
    let mut out = vec![0.0; w];
    for m in 1..n {
        kind.step(q, m as u64, &values[(m - 1) * w..m * w], &mut out);
        values.extend_from_slice(&out);
    }
    Ok(MomentTable {
        kind,
        q,
        n_max: n,
        values,
    })
}

/// Final row in double-double arithmetic, for drift checks.
pub fn moment_final_extended(kind: MomentKind, q: f64, n: usize) -> Result<Vec<f64>> {
    run_final::<DoubleDouble>(kind, q, n)
}

/// `E[N_1(n)]`.
pub fn leaf_expectation(n: usize, q: f64) -> Result<f64> {
    Ok(run_final::<f64>(MomentKind::Leaf, q, n)?[0])
}

/// `E[N_k(n)]`.
pub fn degree_expectation(n: usize, k: usize, q: f64) -> Result<f64> {
    match k {
        0 => Err(Error::param("k", "degree index starts at 1")),
        1 => leaf_expectation(n, q),
        _ => Ok(run_final::<f64>(MomentKind::Degree { k_max: k }, q, n)?[k - 1]),
    }
}

/// `(f_q(m), g_q(m))` for `m ≤ n`.
pub fn rooted_moments(n: usize, q: f64) -> Result<MomentTable> {
    moment_table(MomentKind::Rooted, q, n)
}

/// `(E[S_m], E[K_m])` for `m ≤ n`.
pub fn unrooted_moments(n: usize, q: f64) -> Result<MomentTable> {
    moment_table(MomentKind::Unrooted, q, n)
}

/// `f_q(n)` alone, without storing the table.
pub fn split_product_expectation(n: usize, q: f64) -> Result<f64> {
    Ok(run_final::<f64>(MomentKind::Rooted, q, n)?[0])
}

/// `E_q[S_n]` alone.
pub fn sum_distance_expectation(n: usize, q: f64) -> Result<f64> {
    Ok(run_final::<f64>(MomentKind::Unrooted, q, n)?[0])
}
