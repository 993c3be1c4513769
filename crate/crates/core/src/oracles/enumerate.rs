//! Exhaustive enumeration of all generation histories for tiny `n`.
//!
//! The node `(t, Λ)` has `2(t − 1)` possible records, so there are
//! `Π_{t=2}^n (2(t − 1))²` histories: 4, 64, 2304 and 147456 for n = 2..5.
//! A history with `c` cross records has probability
//! `q^c (1 − q)^{2(n−1)−c} / Π_{t=2}^n (t − 1)²`.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{check_probability, Error, Result};
use crate::tree::{TimeLabelledTree, NO_PARENT};

/// How far enumeration may go.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EnumerationLimit {
    /// n ≤ 4 (2304 histories).
    #[default]
    Default,
    /// n ≤ 5 (147456 histories); slow when combined with canonicalisation.
    Extended,
}

impl EnumerationLimit {
    pub fn max_n(self) -> usize {
        match self {
            EnumerationLimit::Default => 4,
            EnumerationLimit::Extended => 5,
        }
    }
}

/// Exact finite law of an integer statistic.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExactDistribution {
    pub probs: BTreeMap<i128, f64>,
}

impl ExactDistribution {
    pub fn total_mass(&self) -> f64 {
        self.probs.values().sum()
    }

    pub fn mean(&self) -> f64 {
        self.probs.iter().map(|(&v, &p)| v as f64 * p).sum()
    }

    pub fn variance(&self) -> f64 {
        let mu = self.mean();
        self.probs
            .iter()
            .map(|(&v, &p)| (v as f64 - mu).powi(2) * p)
            .sum()
    }

    pub fn prob(&self, v: i128) -> f64 {
        self.probs.get(&v).copied().unwrap_or(0.0)
    }
}

/// Probability of one history with `crosses` cross records.
pub fn history_weight(n: usize, crosses: usize, q: f64) -> f64 {
    let records = 2 * (n - 1);
    let denom: f64 = (2..=n).map(|t| ((t - 1) * (t - 1)) as f64).product();
    q.powi(crosses as i32) * (1.0 - q).powi((records - crosses) as i32) / denom
}

/// Calls `visit(tree, crosses)` once per history, in a fixed order.
pub fn for_each_history<F>(n: usize, limit: EnumerationLimit, mut visit: F) -> Result<()>
where
    F: FnMut(&TimeLabelledTree, usize),
{
    if n == 0 {
        return Err(Error::TooSmall("n must be at least 1".into()));
    }
    if n > limit.max_n() {
        return Err(Error::Infeasible {
            what: "exhaustive enumeration",
            requested: n,
            cap: limit.max_n(),
        });
    }
    let slots = 2 * (n - 1);
    // choice c of the node at slot i: cross = c / (t − 1), u = c % (t − 1) + 1
    let radix: Vec<usize> = (0..slots).map(|i| 2 * (i / 2 + 1)).collect();
    let mut choice = vec![0usize; slots];
    loop {
        let mut parent = vec![NO_PARENT; 2 * n];
        let mut crosses = 0;
        for (i, &c) in choice.iter().enumerate() {
            let child = i + 2;
            let span = radix[i] / 2;
            let cross = c / span;
            let u = c % span + 1;
            crosses += cross;
            parent[child] = (2 * (u - 1) + ((child & 1) ^ cross)) as u32;
        }
        visit(&TimeLabelledTree::from_parents_unchecked(n, parent), crosses);

        // odometer increment
        let mut i = 0;
        loop {
            if i == slots {
                return Ok(());
            }
            choice[i] += 1;
            if choice[i] < radix[i] {
                break;
            }
            choice[i] = 0;
            i += 1;
        }
    }
}

/// Exact law of `statistic` under BCMRT(q) at size `n`.
pub fn brute_force_enumerate<F>(n: usize, q: f64, limit: EnumerationLimit, statistic: F) -> Result<ExactDistribution>
where
    F: Fn(&TimeLabelledTree) -> i128,
{
    check_probability("q", q)?;
    let mut probs = BTreeMap::new();
    for_each_history(n, limit, |tree, crosses| {
        let w = history_weight(n, crosses, q);
        if w > 0.0 {
            *probs.entry(statistic(tree)).or_insert(0.0) += w;
        }
    })?;
    Ok(ExactDistribution { probs })
}
