//! Output kernel `Ψ(t,t') = Σ_s Σ_r K(s,r) u(t−s) u(t'−r)` of a DC kernel
//! driven by `u(t) = e^{−αt}`, in continuous (integrals) or discrete (sums)
//! time. With `T = ln(λρ) + α` and `D = ln(λ/ρ) + α` it is rank two:
//! `μ̄₂(t) = e^{−αt}` and `μ̄₁, ν̄₁, ν̄₂` are combinations of
//! `(λρ)^t`, `(λ/ρ)^t`, `λ^{2t}` and `e^{−αt}`.

use super::givens::{ln_abs_expm1, write_ratio_column, RatioColumn};
use super::{InputSignal, KernelSpec, TimeDomain};
use crate::error::{Error, Result};
use crate::repkit::{GRMatrix, GvRMatrix, RowMatrix, TimeGrid};

/// Below this magnitude `T`, `D` or `T + D` is treated as the removable
/// singularity of the closed forms.
pub const EXPONENT_TOL: f64 = 1e-10;

/// Parameters and derived exponents of an output kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutputConstants {
    pub decay: f64,
    pub corr: f64,
    pub alpha: f64,
    pub domain: TimeDomain,
    /// `T = ln(λρ) + α`
    pub t_exp: f64,
    /// `D = ln(λ/ρ) + α`
    pub d_exp: f64,
}

impl OutputConstants {
    pub fn new(spec: &KernelSpec, input: &InputSignal) -> Result<Self> {
        spec.validate()?;
        let (decay, corr) = spec
            .as_dc()
            .ok_or_else(|| Error::Unsupported("output kernel needs a DC or TC kernel".into()))?;
        let (alpha, domain) = match *input {
            InputSignal::Exponential { rate, domain } if rate.is_finite() => (rate, domain),
            InputSignal::Exponential { .. } => return Err(Error::InvalidInput("input rate must be finite".into())),
            InputSignal::UnitImpulse => {
                return Err(Error::Unsupported("closed-form output kernel needs an exponential input".into()))
            }
        };
        let t_exp = decay.ln() + corr.ln() + alpha;
        let d_exp = decay.ln() - corr.ln() + alpha;
        for (name, value) in [("T", t_exp), ("D", d_exp), ("T+D", t_exp + d_exp)] {
            if value.abs() < EXPONENT_TOL {
                return Err(Error::NearDegenerateExponent { name, value });
            }
        }
        Ok(Self { decay, corr, alpha, domain, t_exp, d_exp })
    }

    fn check_grid(&self, grid: &TimeGrid) -> Result<()> {
        let t = grid.as_slice();
        match self.domain {
            TimeDomain::Continuous if t[0] <= 0.0 => {
                Err(Error::InvalidInput("continuous-time output kernel needs t > 0".into()))
            }
            TimeDomain::Discrete if t[0] < 0.0 || t.iter().any(|x| (x - x.round()).abs() > 1e-9) => {
                Err(Error::InvalidInput("discrete-time output kernel needs nonnegative integer times".into()))
            }
            _ => Ok(()),
        }
    }
}

/// Generators `[μ̄₁ μ̄₂]`, `[ν̄₁ ν̄₂]` of the output kernel, evaluated literally.
pub fn output_kernel_gr(spec: &KernelSpec, input: &InputSignal, grid: &TimeGrid) -> Result<GRMatrix> {
    let k = OutputConstants::new(spec, input)?;
    k.check_grid(grid)?;
    let (lam, rho, a, te, de) = (k.decay, k.corr, k.alpha, k.t_exp, k.d_exp);
    let t = grid.as_slice();
    let n = t.len();
    let mut u = RowMatrix::zeros(n, 2);
    let mut v = RowMatrix::zeros(n, 2);
    for (i, &ti) in t.iter().enumerate() {
        let e = (-a * ti).exp();
        let up = (lam * rho).powf(ti);
        let dn = (lam / rho).powf(ti);
        let l2 = lam.powf(2.0 * ti);
        let (mu1, nu1, nu2) = match k.domain {
            TimeDomain::Discrete => {
                let tp = 1.0 - te.exp();
                let dp = 1.0 - de.exp();
                let cp = (de.exp() - te.exp()) / (1.0 - (de + te).exp());
                let mu1 = (e - up * te.exp()) / tp;
                let nu1 = (e - dn * de.exp()) / dp;
                let nu2 = (de.exp() * dn - te.exp() * up + cp * ((de + te).exp() * l2 / e - e)) / (dp * tp);
                (mu1, nu1, nu2)
            }
            TimeDomain::Continuous => {
                let cc = rho.ln() / (lam.ln() + a);
                let mu1 = (up - e) / te;
                let nu1 = (dn - e) / de;
                let nu2 = (dn - up + cc * (l2 / e - e)) / (de * te);
                (mu1, nu1, nu2)
            }
        };
        u.row_mut(i).copy_from_slice(&[mu1, e]);
        v.row_mut(i).copy_from_slice(&[nu1, nu2]);
    }
    GRMatrix::new(u, v)
}

/// Givens-vector form of the output kernel.
///
/// The generators above are nearly collinear: both `μ̄` columns approach
/// multiples of `e^{−αt}` and the `ν̄` parts grow like `(λ/(ρe^{−α}))^s`
/// before cancelling. Summing the double sum (or integral) directly instead
/// gives, with `a = e^{−α}` and `p = e^T`,
///
/// `Ψ(t,s) = a^t ν₁(s) ∓ (λρ)^t ν₂(s)`  for `t ≥ s`,
///
/// where `a^s ν₁(s)` and `(λρ)^s ν₂(s)` are sums of terms
/// `λ^{s+r}(ρa)^{s−r} ≤ 1`. Those products are exactly what the ratio sweep
/// needs, so nothing here over- or underflows or cancels beyond the
/// `1/T`, `1/D` factors.
pub fn output_kernel_gvr(spec: &KernelSpec, input: &InputSignal, grid: &TimeGrid) -> Result<GvRMatrix> {
    let k = OutputConstants::new(spec, input)?;
    k.check_grid(grid)?;
    let t = grid.as_slice();
    let n = t.len();
    let (diag1, diag2, sign2) = match k.domain {
        TimeDomain::Discrete => k.dt_diagonals(t),
        TimeDomain::Continuous => k.ct_diagonals(t),
    };
    let first = RatioColumn {
        sign: vec![1.0; n],
        step: t.windows(2).map(|w| -k.alpha * (w[1] - w[0])).collect(),
        diag: diag1,
    };
    let ln_lr = k.decay.ln() + k.corr.ln();
    let second = RatioColumn {
        sign: vec![sign2; n],
        step: t.windows(2).map(|w| ln_lr * (w[1] - w[0])).collect(),
        diag: diag2,
    };
    let mut c = RowMatrix::zeros(n, 2);
    let mut s = RowMatrix::zeros(n, 2);
    let mut nu = RowMatrix::zeros(n, 2);
    write_ratio_column(&first, 0, &mut c, &mut s, &mut nu);
    write_ratio_column(&second, 1, &mut c, &mut s, &mut nu);
    GvRMatrix::new(c, s, nu)
}

impl OutputConstants {
    /// Discrete time, through positive recurrences over `s = 0..t_N`:
    /// `E(s) = Σ_{r≤s} λ^{s+r}(ρa)^{s−r}`, `F(s) = Σ_{r≤s} λ^{2r}a^{2(s−r)}` and
    /// `J(s) = a²J(s−1) + λρa E(s−1)`. Then
    /// `a^s·a^sν₁ = F/(1−p) + J` and `|μ₂|ν₂ = pE/(1−p)` with `μ₂ < 0`.
    fn dt_diagonals(&self, t: &[f64]) -> (Vec<f64>, Vec<f64>, f64) {
        let a = (-self.alpha).exp();
        let (lam, rho) = (self.decay, self.corr);
        let m = t[t.len() - 1].round() as usize;
        let one_minus_p = -self.t_exp.exp_m1();
        let p = self.t_exp.exp();
        let mut d1 = vec![0.0; m + 1];
        let mut d2 = vec![0.0; m + 1];
        let (mut e, mut f, mut j) = (1.0, 1.0, 0.0);
        let mut lam2s = 1.0;
        for s in 0..=m {
            if s > 0 {
                lam2s *= lam * lam;
                j = a * a * j + lam * rho * a * e;
                e = lam * rho * a * e + lam2s;
                f = a * a * f + lam2s;
            }
            d1[s] = f / one_minus_p + j;
            d2[s] = p * e / one_minus_p;
        }
        let pick = |d: &[f64]| t.iter().map(|&x| d[x.round() as usize]).collect();
        (pick(&d1), pick(&d2), -1.0)
    }

    /// Continuous time, closed forms with `X = T + D`:
    /// `F = e^{−2αs}(e^{Xs}−1)/X`, `Q = e^{−2αs}(e^{Ts}−1)/T`,
    /// `E = λ^{2s}(1−e^{−Ds})/D`; then `a^s·a^sν₁ = (F−Q)/D − F/T` and
    /// `|μ₂|ν₂ = E/T` with `μ₂ > 0`.
    fn ct_diagonals(&self, t: &[f64]) -> (Vec<f64>, Vec<f64>, f64) {
        let (te, de) = (self.t_exp, self.d_exp);
        let x = te + de;
        let l2 = 2.0 * self.decay.ln();
        let a2 = -2.0 * self.alpha;
        let pos = |ln_scale: f64, z: f64, denom: f64| (ln_scale + ln_abs_expm1(z) - denom.abs().ln()).exp();
        let mut d1 = Vec::with_capacity(t.len());
        let mut d2 = Vec::with_capacity(t.len());
        for &s in t {
            let f = pos(a2 * s, x * s, x);
            let q = pos(a2 * s, te * s, te);
            let e = pos(l2 * s, -de * s, de);
            d1.push((f - q) / de - f / te);
            d2.push(e / te);
        }
        (d1, d2, 1.0)
    }
}
