//! Ground truth for the Monte Carlo code: exact recursions, closed forms and
//! brute-force enumeration.

pub mod enumerate;
pub mod precision;
pub mod recursions;

pub use enumerate::{brute_force_enumerate, for_each_history, history_weight, EnumerationLimit, ExactDistribution};
pub use precision::{DoubleDouble, Real};
pub use recursions::{
    degree_expectation, leaf_expectation, moment_final_extended, moment_table, rooted_moments,
    split_product_expectation, sum_distance_expectation, unrooted_moments, MomentKind, MomentTable,
};

use crate::error::{check_hypotheses, check_probability, Error, Result};
use crate::special::{harmonic, harmonic2, ln_gamma, ln_gamma_diff};

/// `γ = √(1 − 2q(1 − q))`.
pub fn gamma_of(q: f64) -> f64 {
    (1.0 - 2.0 * q * (1.0 - q)).sqrt()
}

/// `Π_{i=1}^n a_i(q)` through
/// `Γ(n+2+γ)Γ(n+2−γ) / (Γ(2+γ)Γ(2−γ)Γ(n+1)²)`.
pub fn gamma_product(n: usize, q: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::TooSmall("gamma_product needs n >= 1".into()));
    }
    if !(0.0..=0.5).contains(&q) {
        return Err(Error::param("q", format!("{q} not in [0, 1/2]")));
    }
    let g = gamma_of(q);
    let m = n as f64;
    let log = ln_gamma_diff(m + 2.0 + g, m + 1.0) + ln_gamma_diff(m + 2.0 - g, m + 1.0)
        - ln_gamma(2.0 + g)
        - ln_gamma(2.0 - g);
    Ok(log.exp())
}

/// `n² / (Γ(2+γ)Γ(2−γ))`, the large-`n` equivalent of [`gamma_product`].
pub fn gamma_product_asymptotic(n: usize, q: f64) -> f64 {
    let g = gamma_of(q);
    let m = n as f64;
    m * m * (-(ln_gamma(2.0 + g) + ln_gamma(2.0 - g))).exp()
}

/// `δ(q₀,q₁) = 2(q₁−q₀)(1−q₁−q₀) / (Γ(3+γ₀)Γ(3−γ₀))`, `γ₀ = γ(q₀)`.
pub fn delta_lower(q0: f64, q1: f64) -> Result<f64> {
    check_hypotheses(q0, q1)?;
    let g = gamma_of(q0);
    let log_den = ln_gamma(3.0 + g) + ln_gamma(3.0 - g);
    Ok(2.0 * (q1 - q0) * (1.0 - q1 - q0) * (-log_den).exp())
}

/// `(E[L], E[L²])` for the level of a time-`n` node:
/// `(H_{n−1}, H_{n−1}² + H_{n−1} − Σ_{j<n} 1/j²)`.
pub fn level_moments(n: usize) -> Result<(f64, f64)> {
    if n == 0 {
        return Err(Error::TooSmall("level_moments needs n >= 1".into()));
    }
    let h = harmonic(n as u64 - 1);
    Ok((h, h * h + h - harmonic2(n as u64 - 1)))
}

/// `E_q|T⁺_n(i)|² ≤ 2n²/i²`.
pub fn subtree_second_moment_bound(n: usize, i: usize) -> Result<f64> {
    if i == 0 || i > n {
        return Err(Error::param("i", format!("{i} not in [1, {n}]")));
    }
    let r = n as f64 / i as f64;
    Ok(2.0 * r * r)
}

/// `Σ_{i=2}^n (ln i + 1)² / i²`.
pub fn efron_stein_series(n: usize) -> f64 {
    (2..=n)
        .rev()
        .map(|i| {
            let x = i as f64;
            (x.ln() + 1.0).powi(2) / (x * x)
        })
        .sum()
}

/// `64 n⁴ Σ_{i=2}^n (ln i + 1)²/i²`, an upper bound on `Var_q(S_n)`.
pub fn efron_stein_bound(n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::TooSmall("efron_stein_bound needs n >= 2".into()));
    }
    Ok(64.0 * (n as f64).powi(4) * efron_stein_series(n))
}

/// Exact law of `Z_n`, a sum of independent Bernoulli(2q(1−q)/(k−1)),
/// `k = 2..n`. The support is truncated where the remaining tail mass is far
/// below f64 resolution; `pmf[z] = P(Z_n = z)`.
pub fn collision_law(n: usize, q: f64) -> Result<Vec<f64>> {
    check_probability("q", q)?;
    if n == 0 {
        return Err(Error::TooSmall("collision_law needs n >= 1".into()));
    }
    let x2 = 2.0 * q * (1.0 - q);
    let mean = x2 * harmonic(n as u64 - 1);
    let cap = ((mean + 12.0 * mean.sqrt() + 40.0) as usize).min(n - 1) + 1;
    let mut pmf = vec![0.0; cap];
    pmf[0] = 1.0;
    let mut top = 0;
    for k in 2..=n {
        let p = x2 / (k - 1) as f64;
        if p == 0.0 {
            continue;
        }
        top = (top + 1).min(cap - 1);
        for z in (1..=top).rev() {
            pmf[z] = pmf[z] * (1.0 - p) + pmf[z - 1] * p;
        }
        pmf[0] *= 1.0 - p;
    }
    Ok(pmf)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn delta_at_zero_half() {
        assert!((delta_lower(0.0, 0.5).unwrap() - 1.0 / 12.0).abs() < 1e-15);
        assert!(delta_lower(0.3, 0.3).is_err());
        assert!(delta_lower(0.4, 0.3).is_err());
        assert!(delta_lower(0.2, 0.2 + 1e-9).unwrap() < 1e-8);
    }

    #[test]
    fn gamma_product_small() {
        // q = 0: a_1 a_2 = 3 · 2 = 6
        assert!((gamma_product(2, 0.0).unwrap() - 6.0).abs() < 1e-13);
        assert!((gamma_product(1, 0.25).unwrap() - (3.0 + 2.0 * 0.1875)).abs() < 1e-13);
    }

    #[test]
    fn level_moments_small() {
        assert_eq!(level_moments(1).unwrap(), (0.0, 0.0));
        let (m1, m2) = level_moments(3).unwrap();
        assert!((m1 - 1.5).abs() < 1e-15);
        assert!((m2 - 2.5).abs() < 1e-15);
    }

    #[test]
    fn efron_stein_monotone_and_convergent() {
        assert!(efron_stein_bound(1).is_err());
        let mut prev = 0.0;
        for n in [2usize, 3, 10, 100, 1000] {
            let b = efron_stein_bound(n).unwrap();
            assert!(b > prev);
            prev = b;
        }
        let r = efron_stein_series(1_000_000) / efron_stein_series(100_000);
        assert!((r - 1.0).abs() < 0.01);
    }

    #[test]
    fn subtree_bound() {
        assert_eq!(subtree_second_moment_bound(10, 10).unwrap(), 2.0);
        assert!(subtree_second_moment_bound(10, 11).is_err());
        assert!(subtree_second_moment_bound(10, 0).is_err());
    }

    #[test]
    fn collision_law_moments() {
        for (n, q) in [(2usize, 0.25), (50, 0.1), (1000, 0.5)] {
            let pmf = collision_law(n, q).unwrap();
            let mass: f64 = pmf.iter().sum();
            assert!((mass - 1.0).abs() < 1e-12);
            let mean: f64 = pmf.iter().enumerate().map(|(z, p)| z as f64 * p).sum();
            let want: f64 = (2..=n).map(|k| 2.0 * q * (1.0 - q) / (k - 1) as f64).sum();
            assert!((mean - want).abs() < 1e-10, "n = {n}");
        }
        assert_eq!(collision_law(100, 0.0).unwrap()[0], 1.0);
    }
}
