//! Estimator, tests and clustering against exact laws computed independently
//! here (collision-count lattice, enumeration of tiny trees).

use bcmrt::clustering::{
    block_vector, f_value, max_feasible_q, rate_margin, search_colorings, threshold_s, worst_case_f, Coloring,
};
use bcmrt::estimators::{estimate_q, phi, Regime};
use bcmrt::generator::sample_tree;
use bcmrt::hypothesis::{
    exact_tv, labelled_test, optimal_risk, risk_mc, LabelledTest, SplitProductTest, SumDistanceTest, TestOutcome,
    TreeTest,
};
use bcmrt::oracles::{brute_force_enumerate, collision_law, rooted_moments, EnumerationLimit};
use bcmrt::rng::replicate_seed;
use bcmrt::statistics::{collision_count, monochromatic_count, overlap, root_split};
use bcmrt::{project, ObservedTree, Setting, TimeLabelledTree};
use rayon::prelude::*;

/// Exact law of `|q̂ − q|` as sorted (value, probability) atoms.
fn error_law(n: usize, q: f64) -> Vec<(f64, f64)> {
    let pmf = collision_law(n, q).unwrap();
    let denom = 2.0 * (n as f64).ln();
    let mut atoms: Vec<(f64, f64)> = pmf
        .iter()
        .enumerate()
        .map(|(z, &p)| ((phi(z as f64 / denom).unwrap() - q).abs(), p))
        .collect();
    atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
    atoms
}

fn quantile(atoms: &[(f64, f64)], level: f64) -> f64 {
    let mut acc = 0.0;
    for &(v, p) in atoms {
        acc += p;
        if acc >= level {
            return v;
        }
    }
    atoms.last().unwrap().0
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let k = xs.len();
    if k % 2 == 1 {
        xs[k / 2]
    } else {
        0.5 * (xs[k / 2 - 1] + xs[k / 2])
    }
}

fn q_hats(n: usize, q: f64, reps: usize, seed: u64) -> Vec<f64> {
    (0..reps as u64)
        .into_par_iter()
        .map(|i| estimate_q(&sample_tree(n, q, replicate_seed(seed, i)).unwrap()).unwrap().q_hat)
        .collect()
}

#[test]
fn q_zero_estimates_exactly_zero() {
    for n in [2usize, 10, 1000, 100_000] {
        for s in 0..5 {
            let r = estimate_q(&sample_tree(n, 0.0, s).unwrap()).unwrap();
            assert_eq!(r.q_hat, 0.0);
            assert_eq!(r.regime, Regime::BoundaryZero);
        }
    }
}

#[test]
fn error_medians_follow_the_exact_lattice_law() {
    // The error lives on a lattice indexed by Z_n, so medians need not shrink
    // monotonically in n; compare each empirical median with the exact
    // quantile band instead.
    let reps = 1000;
    for q in [0.1, 0.25, 0.4] {
        for (k, n) in [1_000usize, 10_000, 100_000].into_iter().enumerate() {
            let errs: Vec<f64> = q_hats(n, q, reps, 100 + k as u64).iter().map(|x| (x - q).abs()).collect();
            let law = error_law(n, q);
            let band = 3.0 * 0.5 / (reps as f64).sqrt();
            let (lo, hi) = (quantile(&law, 0.5 - band), quantile(&law, 0.5 + band));
            let m = median(errs);
            assert!(m >= lo - 1e-12 && m <= hi + 1e-12, "q={q} n={n}: median {m} outside [{lo}, {hi}]");
        }
    }
}

#[test]
fn boundary_half_mass_matches_exact_law() {
    let (n, reps) = (1_000_000usize, 500usize);
    let denom = 2.0 * (n as f64).ln();
    let pmf = collision_law(n, 0.5).unwrap();
    let exact: f64 = pmf
        .iter()
        .enumerate()
        .filter(|(z, _)| *z as f64 / denom >= 0.25)
        .map(|(_, p)| p)
        .sum();
    let hits = q_hats(n, 0.5, reps, 7).iter().filter(|&&x| x == 0.5).count() as f64 / reps as f64;
    let se = (exact * (1.0 - exact) / reps as f64).sqrt();
    assert!((hits - exact).abs() < 3.0 * se, "{hits} vs exact {exact}");
}

#[test]
fn estimator_spread_at_one_million() {
    let (n, q) = (1_000_000usize, 0.25);
    let xs = q_hats(n, q, 1000, 8);
    let m = xs.iter().sum::<f64>() / xs.len() as f64;
    let sd = (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64).sqrt();
    let predicted = (q * (1.0 - q) / (2.0 * (n as f64).ln())).sqrt() / (1.0 - 2.0 * q);
    assert!((sd / predicted - 1.0).abs() <= 0.25, "sd {sd} vs {predicted}");
}

// ---------------------------------------------------------------------------
// tests and risk

struct AlwaysZero;

impl TreeTest for AlwaysZero {
    fn setting(&self) -> Setting {
        Setting::Labelled
    }
    fn apply(&self, _: &ObservedTree) -> bcmrt::Result<TestOutcome> {
        Ok(TestOutcome { decision: false, statistic: 0.0, threshold: 0.0 })
    }
}

/// Parity of the parent time label of the last node. That label is uniform on
/// `1..n` whatever `q` is, so with `n − 1` even this is a fair coin.
struct Coin;

impl TreeTest for Coin {
    fn setting(&self) -> Setting {
        Setting::Labelled
    }
    fn apply(&self, tree: &ObservedTree) -> bcmrt::Result<TestOutcome> {
        let p = tree.as_shape().parents();
        let u = p[p.len() - 1] / 2 + 1;
        let bit = (u & 1) as f64;
        Ok(TestOutcome { decision: bit > 0.5, statistic: bit, threshold: 0.5 })
    }
}

struct Complement<T>(T);

impl<T: TreeTest> TreeTest for Complement<T> {
    fn setting(&self) -> Setting {
        self.0.setting()
    }
    fn apply(&self, tree: &ObservedTree) -> bcmrt::Result<TestOutcome> {
        let o = self.0.apply(tree)?;
        Ok(TestOutcome { decision: !o.decision, statistic: -o.statistic, threshold: -o.threshold })
    }
}

#[test]
fn trivial_tests_have_chance_risk() {
    let r = risk_mc(&AlwaysZero, 0.0, 0.3, 50, 500, 1).unwrap();
    assert_eq!(r.risk, 0.5);
    let c = risk_mc(&Coin, 0.0, 0.3, 51, 4000, 2).unwrap();
    assert!((c.risk - 0.5).abs() < 3.0 * c.se);
}

#[test]
fn complement_risks_sum_to_one() {
    let t = LabelledTest::new(200, 0.1, 0.4).unwrap();
    let a = risk_mc(&t, 0.1, 0.4, 200, 1000, 3).unwrap();
    let b = risk_mc(&Complement(t), 0.1, 0.4, 200, 1000, 3).unwrap();
    assert!((a.risk + b.risk - 1.0).abs() < 1e-12);
}

/// Exact risk of the labelled test from the collision law.
fn exact_labelled_risk(n: usize, q0: f64, q1: f64) -> f64 {
    let t = LabelledTest::new(n, q0, q1).unwrap();
    let p_one = |q: f64| -> f64 {
        collision_law(n, q)
            .unwrap()
            .iter()
            .enumerate()
            .filter(|(z, _)| t.decide(*z as u64).decision)
            .map(|(_, p)| p)
            .sum()
    };
    0.5 * (p_one(q0) + 1.0 - p_one(q1))
}

#[test]
fn labelled_risk_matches_exact_risk() {
    let (n, reps) = (10_000usize, 4000usize);
    let t = LabelledTest::new(n, 0.0, 0.3).unwrap();
    let mc = risk_mc(&t, 0.0, 0.3, n, reps, 4).unwrap();
    let exact = exact_labelled_risk(n, 0.0, 0.3);
    assert!((mc.risk - exact).abs() < 3.0 * mc.se.max(1e-3), "{} vs {exact}", mc.risk);
    let near = risk_mc(&LabelledTest::new(n, 0.49, 0.5).unwrap(), 0.49, 0.5, n, 2000, 5).unwrap();
    assert!((near.risk - 0.5).abs() < 0.05, "{}", near.risk);
}

#[test]
fn labelled_test_on_observed_tree() {
    let tree = sample_tree(500, 0.0, 1).unwrap();
    let o = project(&tree, Setting::Labelled);
    assert!(!labelled_test(&o, 0.0, 0.3).unwrap().decision);
    assert!(labelled_test(&project(&tree, Setting::RootedUnlabelled), 0.0, 0.3).is_err());
}

#[test]
fn split_product_risk_matches_enumeration_at_n4() {
    let (n, q0, q1) = (4usize, 0.0, 0.5);
    let t = SplitProductTest::new(n, q0, q1).unwrap();
    let law = |q| brute_force_enumerate(n, q, EnumerationLimit::Default, |tr| root_split(tr).unwrap().product as i128).unwrap();
    let below = |q| -> f64 { law(q).probs.iter().filter(|(&v, _)| (v as f64) < t.midpoint()).map(|(_, p)| p).sum() };
    let exact = 0.5 * (below(q0) + 1.0 - below(q1));
    let mc = risk_mc(&t, q0, q1, n, 20_000, 6).unwrap();
    assert!((mc.risk - exact).abs() < 3.0 * mc.se, "{} vs {exact}", mc.risk);
    // the midpoint sits strictly between the exact means
    let f = |q| rooted_moments(n, q).unwrap().row(n)[0];
    assert!(f(q1) < t.midpoint() && t.midpoint() < f(q0));
}

#[test]
fn sum_distance_risk_matches_enumeration_at_n4() {
    let (n, q0, q1) = (4usize, 0.1, 0.5);
    let t = SumDistanceTest::new(n, q0, q1).unwrap();
    let below = |q| -> f64 {
        brute_force_enumerate(n, q, EnumerationLimit::Default, |tr| bcmrt::statistics::sum_distance(tr) as i128)
            .unwrap()
            .probs
            .iter()
            .filter(|(&v, _)| (v as f64) < t.midpoint())
            .map(|(_, p)| p)
            .sum()
    };
    let exact = 0.5 * (below(q0) + 1.0 - below(q1));
    let mc = risk_mc(&t, q0, q1, n, 20_000, 7).unwrap();
    assert!((mc.risk - exact).abs() < 3.0 * mc.se, "{} vs {exact}", mc.risk);
}

#[test]
fn exact_tv_respects_information_order() {
    for n in 2..=4 {
        let l = exact_tv(n, 0.0, 0.5, Setting::Labelled, EnumerationLimit::Default).unwrap();
        let r = exact_tv(n, 0.0, 0.5, Setting::RootedUnlabelled, EnumerationLimit::Default).unwrap();
        let u = exact_tv(n, 0.0, 0.5, Setting::UnrootedUnlabelled, EnumerationLimit::Default).unwrap();
        assert!(l >= r - 1e-12 && r >= u - 1e-12, "n={n}: {l} {r} {u}");
        assert!((0.0..=1.0).contains(&u));
    }
}

#[test]
fn exact_tv_rooted_n2_by_hand() {
    // at n = 2 the only observable event is "both new nodes share a parent",
    // with probability 2q(1−q): tv(0, ½) = 2 · ¼ = ½
    let tv = exact_tv(2, 0.0, 0.5, Setting::RootedUnlabelled, EnumerationLimit::Default).unwrap();
    assert!((tv - 0.5).abs() < 1e-15);
    assert!((optimal_risk(tv) - 0.25).abs() < 1e-15);
}

#[test]
fn exact_tv_grows_with_separation() {
    for setting in Setting::ALL {
        for n in 2..=4 {
            let mut prev = 0.0;
            for k in 0..=5 {
                let tv = exact_tv(n, 0.0, k as f64 / 10.0, setting, EnumerationLimit::Default).unwrap();
                assert!(tv >= prev - 1e-12, "{setting} n={n} q={}", k as f64 / 10.0);
                prev = tv;
            }
        }
    }
}

#[test]
fn exact_tv_cap() {
    assert!(exact_tv(5, 0.0, 0.5, Setting::Labelled, EnumerationLimit::Default).is_err());
}

// ---------------------------------------------------------------------------
// clustering

#[test]
fn q_zero_search_always_returns_a_coloring() {
    // M^π = 2(n − 1) ≥ s_n at q = 0, so the sweep always hits; the first hit
    // in lexicographic order need not be π itself because s_n leaves slack
    let mut exact = 0;
    for n in 2..=10usize {
        for s in 0..20 {
            let tree = sample_tree(n, 0.0, s).unwrap();
            assert_eq!(monochromatic_count(&tree, &Coloring::truth(n)).unwrap() as usize, 2 * (n - 1));
            let r = search_colorings(&tree, 0.0).unwrap();
            let c = r.coloring.expect("truth always qualifies at q = 0");
            assert!(r.mono_edges as i64 >= r.threshold);
            let m = overlap(&c, &Coloring::truth(n)).unwrap();
            assert_eq!(r.overlap, Some(m.max(n - m)));
            exact += (m == n) as usize;
        }
    }
    // n = 2 has a single coloring; recovery is exact there
    assert!(exact >= 20);
}

#[test]
fn truth_concentration() {
    let (n, q) = (1000usize, 0.2);
    let pi = Coloring::truth(n);
    let dev = (n as f64).powf(2.0 / 3.0);
    let far = (0..10_000u64)
        .into_par_iter()
        .filter(|&s| {
            let m = monochromatic_count(&sample_tree(n, q, replicate_seed(21, s)).unwrap(), &pi).unwrap();
            (m as f64 - 2.0 * (1.0 - q) * (n as f64 - 1.0)).abs() >= dev
        })
        .count();
    assert!(far < 100, "{far}");
}

#[test]
fn search_output_is_valid_and_complement_symmetric() {
    for s in 0..30 {
        let tree: TimeLabelledTree = sample_tree(16, 0.02, s).unwrap();
        let r = search_colorings(&tree, 0.02).unwrap();
        if let Some(c) = &r.coloring {
            assert!(r.mono_edges as i64 >= r.threshold);
            assert_eq!(monochromatic_count(&tree, c).unwrap(), monochromatic_count(&tree, &c.complement()).unwrap());
            let m = overlap(c, &Coloring::truth(16)).unwrap();
            assert_eq!(overlap(&c.complement(), &Coloring::truth(16)).unwrap(), 16 - m);
        }
    }
    assert_eq!(threshold_s(2, 0.0).unwrap(), 1);
}

#[test]
fn block_vectors_maximise_f() {
    for n in 1..=14 {
        for m in 1..=n {
            let (_, best) = worst_case_f(n, m).unwrap();
            let block = f_value(&block_vector(n, m));
            assert!((best - block).abs() <= 1e-12 * best.max(1.0), "n={n} m={m}");
        }
    }
}

#[test]
fn margin_shape() {
    let q = 1.0 / 50.0;
    assert!(rate_margin(q, 1e-4).unwrap() > 0.0);
    let h = 1e-6;
    assert!(rate_margin(q, 1e-4 + h).unwrap() < rate_margin(q, 1e-4 - h).unwrap());
    let qmax = max_feasible_q(1e-4).unwrap();
    assert!(qmax >= q);
    assert!(rate_margin(qmax * 1.01, 1e-4).unwrap() < 0.0);
    let _ = collision_count(&sample_tree(3, 0.1, 0).unwrap());
}
