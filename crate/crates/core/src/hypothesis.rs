//! Testing `H₀: q = q₀` against `H₁: q = q₁` in each observation setting.
//!
//! Every test reports `decision = statistic > threshold`. The rooted and
//! unrooted tests reject for *small* values of their statistic (larger `q`
//! shrinks both the split product and the distance sum), so they report the
//! negated statistic against the negated midpoint of the two exact means.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::canonical::CanonicalForm;
use crate::error::{check_hypotheses, check_probability, Error, Result};
use crate::generator::sample_tree;
use crate::observe::{project, ObservedTree, Setting};
use crate::oracles::{for_each_history, history_weight, split_product_expectation, sum_distance_expectation, EnumerationLimit};
use crate::rng::replicate_seed;
use crate::special::harmonic;
use crate::tree::TimeLabelledTree;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TestOutcome {
    /// `true` selects `H₁`.
    pub decision: bool,
    pub statistic: f64,
    pub threshold: f64,
}

impl TestOutcome {
    fn threshold_rule(statistic: f64, threshold: f64) -> Self {
        TestOutcome {
            decision: statistic > threshold,
            statistic,
            threshold,
        }
    }
}

/// `½(P_{q₀}(φ = 1) + P_{q₁}(φ = 0))` estimated over paired replicates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RiskEstimate {
    pub risk: f64,
    pub reps: usize,
    /// Binomial standard error of `risk`.
    pub se: f64,
    pub type_one: f64,
    pub type_two: f64,
}

/// A test prepared for a fixed size and hypothesis pair.
pub trait TreeTest: Sync {
    /// Setting the test observes.
    fn setting(&self) -> Setting;

    fn apply(&self, tree: &ObservedTree) -> Result<TestOutcome>;

    /// Projects a realised tree onto [`TreeTest::setting`] and applies the test.
    fn apply_to_tree(&self, tree: &TimeLabelledTree) -> Result<TestOutcome> {
        self.apply(&project(tree, self.setting()))
    }
}

fn check_size(expected: usize, tree: &ObservedTree) -> Result<()> {
    if tree.steps() != expected {
        return Err(Error::Length {
            expected,
            found: tree.steps(),
        });
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// labelled

/// `φ_n = 1{Z_n / H_{n−1} > x₀ + x₁}` with `x_i = q_i(1 − q_i)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabelledTest {
    pub n: usize,
    pub q0: f64,
    pub q1: f64,
    harmonic: f64,
    threshold: f64,
}

impl LabelledTest {
    pub fn new(n: usize, q0: f64, q1: f64) -> Result<Self> {
        check_hypotheses(q0, q1)?;
        if n < 2 {
            return Err(Error::TooSmall("the labelled test needs n >= 2".into()));
        }
        Ok(LabelledTest {
            n,
            q0,
            q1,
            harmonic: harmonic(n as u64 - 1),
            threshold: q0 * (1.0 - q0) + q1 * (1.0 - q1),
        })
    }

    /// Decision from a raw collision count.
    pub fn decide(&self, z: u64) -> TestOutcome {
        TestOutcome::threshold_rule(z as f64 / self.harmonic, self.threshold)
    }
}

impl TreeTest for LabelledTest {
    fn setting(&self) -> Setting {
        Setting::Labelled
    }

    fn apply(&self, tree: &ObservedTree) -> Result<TestOutcome> {
        check_size(self.n, tree)?;
        Ok(self.decide(tree.collision_count()?))
    }
}

pub fn labelled_test(tree: &ObservedTree, q0: f64, q1: f64) -> Result<TestOutcome> {
    LabelledTest::new(tree.steps(), q0, q1)?.apply(tree)
}

// ---------------------------------------------------------------------------
// rooted

/// Selects `H₁` when `|T⁺||T⁻|` falls below the midpoint of `f_{q₀}(n)` and
/// `f_{q₁}(n)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitProductTest {
    pub n: usize,
    pub mean0: f64,
    pub mean1: f64,
}

impl SplitProductTest {
    pub fn new(n: usize, q0: f64, q1: f64) -> Result<Self> {
        check_hypotheses(q0, q1)?;
        if n < 2 {
            return Err(Error::TooSmall("the split-product test needs n >= 2".into()));
        }
        Ok(SplitProductTest {
            n,
            mean0: split_product_expectation(n, q0)?,
            mean1: split_product_expectation(n, q1)?,
        })
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.mean0 + self.mean1)
    }

    pub fn decide(&self, product: u64) -> TestOutcome {
        TestOutcome::threshold_rule(-(product as f64), -self.midpoint())
    }
}

impl TreeTest for SplitProductTest {
    fn setting(&self) -> Setting {
        Setting::RootedUnlabelled
    }

    fn apply(&self, tree: &ObservedTree) -> Result<TestOutcome> {
        check_size(self.n, tree)?;
        Ok(self.decide(tree.root_split()?.product))
    }
}

pub fn split_product_test(tree: &ObservedTree, q0: f64, q1: f64) -> Result<TestOutcome> {
    SplitProductTest::new(tree.steps(), q0, q1)?.apply(tree)
}

// ---------------------------------------------------------------------------
// unrooted

/// Selects `H₁` when `S_n` falls below the midpoint of `E_{q₀}[S_n]` and
/// `E_{q₁}[S_n]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SumDistanceTest {
    pub n: usize,
    pub mean0: f64,
    pub mean1: f64,
}

impl SumDistanceTest {
    pub fn new(n: usize, q0: f64, q1: f64) -> Result<Self> {
        check_hypotheses(q0, q1)?;
        if n < 2 {
            return Err(Error::TooSmall("the sum-distance test needs n >= 2".into()));
        }
        Ok(SumDistanceTest {
            n,
            mean0: sum_distance_expectation(n, q0)?,
            mean1: sum_distance_expectation(n, q1)?,
        })
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.mean0 + self.mean1)
    }

    pub fn decide(&self, s: u128) -> TestOutcome {
        TestOutcome::threshold_rule(-(s as f64), -self.midpoint())
    }
}

impl TreeTest for SumDistanceTest {
    fn setting(&self) -> Setting {
        Setting::UnrootedUnlabelled
    }

    fn apply(&self, tree: &ObservedTree) -> Result<TestOutcome> {
        check_size(self.n, tree)?;
        Ok(self.decide(tree.sum_distance()))
    }
}

pub fn sum_distance_test(tree: &ObservedTree, q0: f64, q1: f64) -> Result<TestOutcome> {
    SumDistanceTest::new(tree.steps(), q0, q1)?.apply(tree)
}

// ---------------------------------------------------------------------------
// risk and total variation

/// Monte Carlo risk over `reps` pairs; replicate `i` draws its `q₀` tree from
/// stream `2i` and its `q₁` tree from stream `2i + 1` of `seed`.
pub fn risk_mc<T: TreeTest + ?Sized>(test: &T, q0: f64, q1: f64, n: usize, reps: usize, seed: u64) -> Result<RiskEstimate> {
    check_probability("q0", q0)?;
    check_probability("q1", q1)?;
    if reps == 0 {
        return Err(Error::param("reps", "need at least one replicate"));
    }
    let errors: Vec<(u64, u64)> = (0..reps as u64)
        .into_par_iter()
        .map(|i| {
            let t0 = sample_tree(n, q0, replicate_seed(seed, 2 * i))?;
            let t1 = sample_tree(n, q1, replicate_seed(seed, 2 * i + 1))?;
            let e0 = test.apply_to_tree(&t0)?.decision as u64;
            let e1 = !test.apply_to_tree(&t1)?.decision as u64;
            Ok((e0, e1))
        })
        .collect::<Result<_>>()?;
    let (e0, e1) = errors
        .iter()
        .fold((0u64, 0u64), |(a, b), &(x, y)| (a + x, b + y));
    let r = reps as f64;
    let (p0, p1) = (e0 as f64 / r, e1 as f64 / r);
    Ok(RiskEstimate {
        risk: 0.5 * (p0 + p1),
        reps,
        se: 0.5 * ((p0 * (1.0 - p0) + p1 * (1.0 - p1)) / r).sqrt(),
        type_one: p0,
        type_two: p1,
    })
}

/// `Δ² / (Δ² + 2 var_P + 2 var_Q)`.
pub fn tv_lower_bound(delta: f64, var_p: f64, var_q: f64) -> Result<f64> {
    if var_p < 0.0 || var_q < 0.0 || var_p.is_nan() || var_q.is_nan() {
        return Err(Error::param("variance", "variances must be non-negative"));
    }
    let d2 = delta * delta;
    if d2 == 0.0 {
        return Ok(0.0);
    }
    Ok(d2 / (d2 + 2.0 * var_p + 2.0 * var_q))
}

/// `½ √((1 + ε²)^{2(n−1)} − 1)`, clamped to 1: the chi-square bound on the
/// labelled-setting distance between `q = (1 − ε)/2` and `q = ½`.
pub fn chi2_upper_bound(n: usize, eps: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::param("eps", format!("{eps} not in [0, 1]")));
    }
    if n == 0 {
        return Err(Error::TooSmall("chi2_upper_bound needs n >= 1".into()));
    }
    let chi2 = (2.0 * (n as f64 - 1.0) * (eps * eps).ln_1p()).exp_m1();
    Ok((0.5 * chi2.sqrt()).min(1.0))
}

/// `R* = (1 − tv)/2`, the optimal risk for a given total variation.
pub fn optimal_risk(tv: f64) -> f64 {
    0.5 * (1.0 - tv)
}

/// Exact total variation between the observed laws under `q₀` and `q₁`,
/// aggregating history probabilities per isomorphism class of the setting.
pub fn exact_tv(n: usize, q0: f64, q1: f64, setting: Setting, limit: EnumerationLimit) -> Result<f64> {
    check_probability("q0", q0)?;
    check_probability("q1", q1)?;
    let mut mass: BTreeMap<CanonicalForm, (f64, f64)> = BTreeMap::new();
    for_each_history(n, limit, |tree, crosses| {
        let w0 = history_weight(n, crosses, q0);
        let w1 = history_weight(n, crosses, q1);
        if w0 == 0.0 && w1 == 0.0 {
            return;
        }
        let slot = mass.entry(project(tree, setting).key()).or_insert((0.0, 0.0));
        slot.0 += w0;
        slot.1 += w1;
    })?;
    let tv: f64 = 0.5 * mass.values().map(|(a, b)| (a - b).abs()).sum::<f64>();
    Ok(tv.clamp(0.0, 1.0))
}
