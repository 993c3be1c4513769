//! Exact recursions and closed forms against exhaustive enumeration and
//! independently coded references.

use bcmrt::oracles::{
    brute_force_enumerate, collision_law, degree_expectation, delta_lower, efron_stein_bound,
    gamma_product, gamma_product_asymptotic, leaf_expectation, level_moments, moment_final_extended,
    moment_table, rooted_moments, unrooted_moments, EnumerationLimit, MomentKind,
};
use bcmrt::statistics::{collision_count, cross_type_k, degree_counts, node_level, root_split, sum_distance};
use bcmrt::TimeLabelledTree;

const GRID: [f64; 5] = [0.0, 0.1, 0.25, 0.4, 0.5];

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

fn exact_mean(n: usize, q: f64, stat: impl Fn(&TimeLabelledTree) -> i128) -> f64 {
    brute_force_enumerate(n, q, EnumerationLimit::Default, stat).unwrap().mean()
}

#[test]
fn recursions_match_enumeration() {
    for q in GRID {
        let rooted = rooted_moments(4, q).unwrap();
        let unrooted = unrooted_moments(4, q).unwrap();
        for n in 1..=4 {
            let n1 = exact_mean(n, q, |t| degree_counts(t).get(1) as i128);
            let n2 = exact_mean(n, q, |t| degree_counts(t).get(2) as i128);
            let n3 = exact_mean(n, q, |t| degree_counts(t).get(3) as i128);
            let f = exact_mean(n, q, |t| root_split(t).unwrap().product as i128);
            let g = exact_mean(n, q, |t| root_split(t).unwrap().r.unwrap() as i128);
            let s = exact_mean(n, q, |t| sum_distance(t) as i128);
            let k = exact_mean(n, q, |t| cross_type_k(t) as i128);
            assert!(rel(leaf_expectation(n, q).unwrap(), n1) < 1e-10, "N1 n={n} q={q}");
            assert!(rel(degree_expectation(n, 2, q).unwrap(), n2.max(1e-300)) < 1e-10 || n2 == 0.0);
            if n3 > 0.0 {
                assert!(rel(degree_expectation(n, 3, q).unwrap(), n3) < 1e-10, "N3 n={n} q={q}");
            }
            assert!(rel(rooted.row(n)[0], f) < 1e-10, "f n={n} q={q}");
            assert!(rel(rooted.row(n)[1], g) < 1e-10, "g n={n} q={q}");
            assert!(rel(unrooted.row(n)[0], s) < 1e-10, "S n={n} q={q}");
            assert!(rel(unrooted.row(n)[1], k) < 1e-10, "K n={n} q={q}");
        }
    }
}

#[test]
fn n2_laws_by_hand() {
    for q in GRID {
        let x = q * (1.0 - q);
        let d = brute_force_enumerate(2, q, EnumerationLimit::Default, |t| root_split(t).unwrap().product as i128).unwrap();
        assert!((d.prob(3) - 2.0 * x).abs() < 1e-15);
        assert!((d.prob(4) - (1.0 - 2.0 * x)).abs() < 1e-15);
        let n2 = brute_force_enumerate(2, q, EnumerationLimit::Default, |t| degree_counts(t).get(2) as i128).unwrap();
        assert!((n2.mean() - 2.0 * (1.0 - 2.0 * x)).abs() < 1e-15);
    }
}

#[test]
fn level_moments_match_enumeration() {
    for n in 1..=4usize {
        let (m1, m2) = level_moments(n).unwrap();
        for v in [2 * (n - 1), 2 * (n - 1) + 1] {
            let d = brute_force_enumerate(n, 0.3, EnumerationLimit::Default, |t| node_level(t, v) as i128).unwrap();
            assert!((d.mean() - m1).abs() < 1e-12);
            assert!((d.variance() + d.mean() * d.mean() - m2).abs() < 1e-12);
        }
    }
}

#[test]
fn collision_law_matches_enumeration() {
    for q in GRID {
        let d = brute_force_enumerate(4, q, EnumerationLimit::Default, |t| collision_count(t) as i128).unwrap();
        let pmf = collision_law(4, q).unwrap();
        for (z, p) in pmf.iter().enumerate() {
            assert!((d.prob(z as i128) - p).abs() < 1e-14, "q={q} z={z}");
        }
    }
}

#[test]
fn extended_enumeration_reaches_n5() {
    let d = brute_force_enumerate(5, 0.25, EnumerationLimit::Extended, |t| sum_distance(t) as i128).unwrap();
    assert!((d.total_mass() - 1.0).abs() < 1e-12);
    let want = unrooted_moments(5, 0.25).unwrap().row(5)[0];
    assert!(rel(want, d.mean()) < 1e-10);
}

#[test]
fn gamma_product_matches_direct_product() {
    for q in GRID {
        let x = q * (1.0 - q);
        let mut direct = 1.0f64;
        for n in 1..=1000usize {
            let m = n as f64;
            direct *= 1.0 + 2.0 / m + 2.0 * x / (m * m);
            let got = gamma_product(n, q).unwrap();
            assert!(rel(got, direct) < 1e-12, "n={n} q={q}: {got} vs {direct}");
        }
    }
    // γ = 1 at q = 0: the product telescopes to (n+1)(n+2)/2
    assert!(rel(gamma_product(2, 0.0).unwrap(), 6.0) < 1e-14);
    for q in GRID {
        let r = gamma_product(1_000_000, q).unwrap() / gamma_product_asymptotic(1_000_000, q);
        assert!((r - 1.0).abs() < 0.01, "q={q} ratio {r}");
    }
}

#[test]
fn delta_and_gap() {
    // Γ(4)Γ(2) = 6 at γ = 1
    assert!((delta_lower(0.0, 0.5).unwrap() - 1.0 / 12.0).abs() < 1e-12);
    for (i, &q0) in GRID.iter().enumerate() {
        for &q1 in &GRID[i + 1..] {
            let d = delta_lower(q0, q1).unwrap();
            assert!(d > 0.0);
            // f_{q0}(2) − f_{q1}(2) = 2(q1 − q0)(1 − q0 − q1)
            let f0 = rooted_moments(2, q0).unwrap().row(2)[0];
            let f1 = rooted_moments(2, q1).unwrap().row(2)[0];
            assert!((f0 - f1 - 2.0 * (q1 - q0) * (1.0 - q0 - q1)).abs() < 1e-14);
        }
    }
}

#[test]
fn oracle_orderings_hold() {
    let tables: Vec<_> = GRID.iter().map(|&q| rooted_moments(100_000, q).unwrap()).collect();
    let sums: Vec<_> = GRID.iter().map(|&q| unrooted_moments(100_000, q).unwrap()).collect();
    for n in (1..=100_000).step_by(997) {
        for w in 0..GRID.len() - 1 {
            let (a, b) = (tables[w].row(n), tables[w + 1].row(n));
            assert!(a[0] >= b[0] - 1e-9 * a[0], "f order n={n}");
            assert!(a[1] >= b[1] - 1e-9 * a[1], "g order n={n}");
            assert!(sums[w].row(n)[0] >= sums[w + 1].row(n)[0] - 1e-9 * sums[w].row(n)[0]);
        }
        for t in &tables {
            assert!(t.row(n)[0] <= 2.0 * t.row(n)[1] * (1.0 + 1e-12));
        }
    }
    for q in [0.0, 0.25, 0.5] {
        let leaf = moment_table(MomentKind::Leaf, q, 100_000).unwrap();
        for (n, row) in leaf.rows() {
            assert!(row[0] >= n as f64 - 1e-9 && row[0] <= n as f64 + 2.0 + 1e-9, "n={n} q={q}");
        }
    }
}

#[test]
fn extended_precision_drift_is_small() {
    for kind in [MomentKind::Leaf, MomentKind::Degree { k_max: 4 }, MomentKind::Rooted, MomentKind::Unrooted] {
        for q in [0.1, 0.25, 0.5] {
            let lo = moment_table(kind, q, 100_000).unwrap();
            let hi = moment_final_extended(kind, q, 100_000).unwrap();
            for (a, b) in lo.last().iter().zip(&hi) {
                assert!(rel(*a, *b) < 1e-8, "{kind:?} q={q}: {a} vs {b}");
            }
            assert!(lo.residual() < 1e-14);
        }
    }
}

#[test]
fn degree_limits_and_insensitivity() {
    for q in [0.0, 0.5] {
        let n3 = degree_expectation(100_000, 3, q).unwrap();
        assert!((n3 / 200_000.0 - 0.125).abs() < 1e-3);
    }
    let a = moment_table(MomentKind::Degree { k_max: 4 }, 0.0, 100_000).unwrap();
    let b = moment_table(MomentKind::Degree { k_max: 4 }, 0.5, 100_000).unwrap();
    let worst = a
        .rows()
        .zip(b.rows())
        .flat_map(|((_, x), (_, y))| x.iter().zip(y).map(|(u, v)| (u - v).abs()).collect::<Vec<_>>())
        .fold(0.0f64, f64::max);
    assert!(worst <= 3.0, "{worst}");
}

#[test]
fn efron_stein_bound_tail() {
    let r = efron_stein_bound(1_000_000).unwrap() / 1e24 / (efron_stein_bound(100_000).unwrap() / 1e20);
    assert!((r - 1.0).abs() < 0.01);
}
