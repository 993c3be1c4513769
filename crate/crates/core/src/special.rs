//! Harmonic sums and log-Gamma differences.
//!
//! Gamma ratios are only ever formed in log space. [`ln_gamma_diff`] keeps
//! full relative accuracy for `ln Γ(z) − ln Γ(w)` even when both logs are
//! large and nearly cancel, which the closed-form product checks rely on.

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Arguments at or above this use the Stirling series directly.
const STIRLING_MIN: f64 = 20.0;

/// `H_m = Σ_{j=1}^m 1/j`, with `H_0 = 0`.
pub fn harmonic(m: u64) -> f64 {
    if m <= 256 {
        return (1..=m).rev().map(|j| 1.0 / j as f64).sum();
    }
    let x = m as f64;
    let x2 = x * x;
    x.ln() + EULER_GAMMA + 1.0 / (2.0 * x) - 1.0 / (12.0 * x2) + 1.0 / (120.0 * x2 * x2)
        - 1.0 / (252.0 * x2 * x2 * x2)
}

/// `Σ_{j=1}^m 1/j²`.
pub fn harmonic2(m: u64) -> f64 {
    if m <= 256 {
        return (1..=m).rev().map(|j| 1.0 / (j as f64 * j as f64)).sum();
    }
    // ζ(2) − ψ'(m+1), tail from the Euler–Maclaurin expansion
    let x = m as f64;
    let x2 = x * x;
    let tail = 1.0 / x - 1.0 / (2.0 * x2) + 1.0 / (6.0 * x2 * x) - 1.0 / (30.0 * x2 * x2 * x)
        + 1.0 / (42.0 * x2 * x2 * x2 * x);
    std::f64::consts::PI * std::f64::consts::PI / 6.0 - tail
}

/// Stirling correction `ln Γ(z) − [(z − ½) ln z − z + ½ ln 2π]`, z ≥ 20.
fn stirling_tail(z: f64) -> f64 {
    let r = 1.0 / z;
    let r2 = r * r;
    r * (1.0 / 12.0 - r2 * (1.0 / 360.0 - r2 * (1.0 / 1260.0 - r2 * (1.0 / 1680.0))))
}

/// Shift `z` to at least [`STIRLING_MIN`]; returns the shifted argument and
/// `ln Π (z + j)` over the shift so that `ln Γ(z) = ln Γ(shifted) − log_prod`.
fn shift_up(mut z: f64) -> (f64, f64) {
    let mut log_prod = 0.0;
    let mut prod = 1.0;
    while z < STIRLING_MIN {
        prod *= z;
        // keep the running product in range before folding into the log
        if prod > 1e280 {
            log_prod += prod.ln();
            prod = 1.0;
        }
        z += 1.0;
    }
    (z, log_prod + prod.ln())
}

/// `ln Γ(z) − ln Γ(w)` for `z, w > 0`.
pub fn ln_gamma_diff(z: f64, w: f64) -> f64 {
    assert!(z > 0.0 && w > 0.0, "ln_gamma_diff needs positive arguments");
    let (zs, lz) = shift_up(z);
    let (ws, lw) = shift_up(w);
    let d = zs - ws;
    // (zs − ½) ln zs − (ws − ½) ln ws − d, written to avoid cancellation
    let main = (zs - 0.5) * (d / ws).ln_1p() + d * ws.ln() - d;
    main + stirling_tail(zs) - stirling_tail(ws) - lz + lw
}

/// `ln Γ(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    ln_gamma_diff(x, 1.0)
}
