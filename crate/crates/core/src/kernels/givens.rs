//! Givens-vector columns built directly from closed-form generator ratios.
//!
//! A rank-one term `μ_i ν_j` is described by the sign of `μ_i`, the log-ratios
//! `ln|μ_{i+1}| − ln|μ_i|` and the products `ν_i |μ_i|`. None of these
//! over- or underflow when `μ` and `ν` individually do, and the sweep only
//! ever forms bounded quantities.

use crate::repkit::RowMatrix;

pub(crate) struct RatioColumn {
    /// Sign of `μ_i` (±1).
    pub sign: Vec<f64>,
    /// `ln|μ_{i+1}| − ln|μ_i|`, length N−1.
    pub step: Vec<f64>,
    /// `ν_i |μ_i|`.
    pub diag: Vec<f64>,
}

/// `ln hypot(1, e^x)` without overflow.
#[inline]
fn ln_hypot1_exp(x: f64) -> f64 {
    if x > 0.0 {
        x + 0.5 * (-2.0 * x).exp().ln_1p()
    } else {
        0.5 * (2.0 * x).exp().ln_1p()
    }
}

/// Writes column `k` of `(c, s, ν̂)`.
///
/// With `θ_i = ln(r_i / |μ_i|)` and `r_N = μ_N`, the backward sweep is
/// `e_i = θ_{i+1} + step_i`, `θ_i = ln hypot(1, e^{e_i})`, giving
/// `c_i = sign_i e^{−θ_i}`, `s_i = sign(r_{i+1}) e^{e_i − θ_i}` and
/// `ν̂_i = diag_i e^{θ_i}`.
pub(crate) fn write_ratio_column(
    col: &RatioColumn,
    k: usize,
    c: &mut RowMatrix,
    s: &mut RowMatrix,
    nu_hat: &mut RowMatrix,
) {
    let n = col.diag.len();
    debug_assert_eq!(col.sign.len(), n);
    debug_assert_eq!(col.step.len() + 1, n);
    c.set(n - 1, k, 1.0);
    s.set(n - 1, k, 0.0);
    nu_hat.set(n - 1, k, col.sign[n - 1] * col.diag[n - 1]);
    let mut theta = 0.0;
    let mut r_sign = col.sign[n - 1];
    for i in (0..n - 1).rev() {
        let e = theta + col.step[i];
        theta = ln_hypot1_exp(e);
        c.set(i, k, col.sign[i] * (-theta).exp());
        s.set(i, k, r_sign * (e - theta).exp());
        nu_hat.set(i, k, col.diag[i] * theta.exp());
        r_sign = 1.0;
    }
}

/// Closed form on an equispaced grid with `|μ_i| ∝ q^{t_i}`, all `μ_i` of one
/// sign: with `E(m) = expm1(2mT ln q)`,
/// `c_i = sign·√(E(1)/E(N−i+1))`, `s_i = q^T √(E(N−i)/E(N−i+1))`,
/// `ν̂_i = diag_i √(E(N−i+1)/E(1))`.
///
/// Requires `ln q ≠ 0`.
#[allow(clippy::too_many_arguments)]
pub(crate) fn write_geometric_column(
    sign: f64,
    ln_q: f64,
    step: f64,
    diag: &[f64],
    k: usize,
    c: &mut RowMatrix,
    s: &mut RowMatrix,
    nu_hat: &mut RowMatrix,
) {
    let n = diag.len();
    let e = |m: usize| (2.0 * m as f64 * step * ln_q).exp_m1();
    let e1 = e(1);
    let qt = (step * ln_q).exp();
    c.set(n - 1, k, 1.0);
    s.set(n - 1, k, 0.0);
    nu_hat.set(n - 1, k, sign * diag[n - 1]);
    for i in 0..n - 1 {
        let m = n - i;
        let (em, em1) = (e(m), e(m - 1));
        // The last rotation carries the sign of r_N = μ_N.
        let r_sign = if i + 2 == n { sign } else { 1.0 };
        c.set(i, k, sign * (e1 / em).sqrt());
        s.set(i, k, r_sign * qt * (em1 / em).sqrt());
        nu_hat.set(i, k, diag[i] * (em / e1).sqrt());
    }
}

/// `ln|expm1(x)|` for any nonzero `x`, finite even where `expm1` overflows.
pub(crate) fn ln_abs_expm1(x: f64) -> f64 {
    if x > 0.0 {
        x + (-(-x).exp_m1()).ln()
    } else {
        (-x.exp_m1()).ln()
    }
}
