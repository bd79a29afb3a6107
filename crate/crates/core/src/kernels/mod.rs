//! Kernel matrices for impulse-response estimation in generator and
//! Givens-vector form.
//!
//! Three kernels are covered, all with scale fixed to 1:
//!
//! * DC: `K(t,s) = λ^{t+s} ρ^{|t−s|}`
//! * TC: DC with `λ = ρ`
//! * SS: `K(t,s) = ρ^{t+s+max(t,s)}/2 − ρ^{3 max(t,s)}/6`
//!
//! For an exponential input `u(t) = e^{−αt}` the output kernel `Ψ` of a DC
//! kernel is rank two; see [`output_kernel_gr`] and [`output_kernel_gvr`].

pub(crate) mod givens;
mod output;

pub use output::{output_kernel_gr, output_kernel_gvr, OutputConstants};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::repkit::{GRMatrix, GvRMatrix, RowMatrix, TimeGrid};
use givens::{write_geometric_column, write_ratio_column, RatioColumn};

/// Kernel family and hyper-parameters `η`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "UPPERCASE")]
pub enum KernelSpec {
    /// Diagonal-correlated, `λ ∈ (0, 1]`, `ρ ∈ (0, 1)`.
    Dc { decay: f64, corr: f64 },
    /// Tuned-correlated, `ρ ∈ (0, 1)`.
    Tc { corr: f64 },
    /// Stable spline. `ρ = 1` is accepted; its kernel is still well defined.
    Ss { corr: f64 },
}

impl KernelSpec {
    pub fn validate(&self) -> Result<()> {
        let open = |x: f64| x > 0.0 && x < 1.0;
        let ok = match *self {
            KernelSpec::Dc { decay, corr } => decay > 0.0 && decay <= 1.0 && open(corr),
            KernelSpec::Tc { corr } => open(corr),
            KernelSpec::Ss { corr } => corr > 0.0 && corr <= 1.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("kernel parameters out of range: {self:?}")))
        }
    }

    /// `(λ, ρ)` of the equivalent DC kernel, if there is one.
    pub fn as_dc(&self) -> Option<(f64, f64)> {
        match *self {
            KernelSpec::Dc { decay, corr } => Some((decay, corr)),
            KernelSpec::Tc { corr } => Some((corr, corr)),
            KernelSpec::Ss { .. } => None,
        }
    }

    /// Semiseparability rank of the kernel matrix.
    pub fn rank(&self) -> usize {
        match self {
            KernelSpec::Ss { .. } => 2,
            _ => 1,
        }
    }

    /// Direct kernel evaluation `K(t, s)`.
    pub fn entry(&self, t: f64, s: f64) -> f64 {
        match *self {
            KernelSpec::Ss { corr } => {
                let m = t.max(s);
                let l = corr.ln();
                0.5 * ((t + s + m) * l).exp() - ((3.0 * m) * l).exp() / 6.0
            }
            _ => {
                let (lam, rho) = self.as_dc().unwrap();
                ((t + s) * lam.ln() + (t - s).abs() * rho.ln()).exp()
            }
        }
    }
}

/// Whether samples are taken from a continuous- or discrete-time signal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TimeDomain {
    Continuous,
    Discrete,
}

/// Test input driving the system, `u(t) = 0` for `t < 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum InputSignal {
    /// `u(t) = 1(t = 0)`; the output kernel is the kernel itself.
    UnitImpulse,
    /// `u(t) = e^{−αt}` for `t ≥ 0`.
    Exponential { rate: f64, domain: TimeDomain },
}

impl InputSignal {
    pub fn exponential_dt(rate: f64) -> Self {
        InputSignal::Exponential { rate, domain: TimeDomain::Discrete }
    }

    pub fn exponential_ct(rate: f64) -> Self {
        InputSignal::Exponential { rate, domain: TimeDomain::Continuous }
    }

    /// Input sample `u(k)` at an integer lag.
    pub fn sample(&self, k: i64) -> f64 {
        match *self {
            _ if k < 0 => 0.0,
            InputSignal::UnitImpulse => (k == 0) as u8 as f64,
            InputSignal::Exponential { rate, .. } => (-rate * k as f64).exp(),
        }
    }
}

/// Generators of the kernel matrix evaluated directly from the closed forms.
/// Entries of `U` and `V` may over- or underflow; that is inherent to this
/// representation.
pub fn kernel_gr(spec: &KernelSpec, grid: &TimeGrid) -> Result<GRMatrix> {
    spec.validate()?;
    let t = grid.as_slice();
    match *spec {
        KernelSpec::Ss { corr } => {
            let l = corr.ln();
            let u = RowMatrix::from_fn(t.len(), 2, |i, k| match k {
                0 => -(3.0 * t[i] * l).exp() / 6.0,
                _ => (2.0 * t[i] * l).exp() / 2.0,
            });
            let v = RowMatrix::from_fn(t.len(), 2, |i, k| match k {
                0 => 1.0,
                _ => (t[i] * l).exp(),
            });
            GRMatrix::new(u, v)
        }
        _ => {
            let (lam, rho) = spec.as_dc().unwrap();
            let u: Vec<f64> = t.iter().map(|&ti| (lam * rho).powf(ti)).collect();
            let v: Vec<f64> = t.iter().map(|&ti| (lam / rho).powf(ti)).collect();
            GRMatrix::from_vectors(&u, &v)
        }
    }
}

/// One rank-one term `μ_i ν_j` with `|μ_i| = κ q^{t_i}` of constant sign.
struct GeomTerm {
    sign: f64,
    ln_q: f64,
    /// `ν_i |μ_i|` on the grid.
    diag: Vec<f64>,
}

fn kernel_terms(spec: &KernelSpec, t: &[f64]) -> Vec<GeomTerm> {
    match *spec {
        KernelSpec::Ss { corr } => {
            let l = corr.ln();
            let d1 = t.iter().map(|&ti| (3.0 * ti * l).exp() / 6.0).collect();
            let d2 = t.iter().map(|&ti| (3.0 * ti * l).exp() / 2.0).collect();
            vec![
                GeomTerm { sign: -1.0, ln_q: 3.0 * l, diag: d1 },
                GeomTerm { sign: 1.0, ln_q: 2.0 * l, diag: d2 },
            ]
        }
        _ => {
            let (lam, rho) = spec.as_dc().unwrap();
            let diag = t.iter().map(|&ti| (2.0 * ti * lam.ln()).exp()).collect();
            vec![GeomTerm { sign: 1.0, ln_q: lam.ln() + rho.ln(), diag }]
        }
    }
}

/// Givens-vector form of the kernel matrix from closed forms.
///
/// Equispaced grids use the geometric-series expressions; other grids (and
/// the SS kernel at `ρ = 1`, where the series ratio is one) use the
/// log-ratio sweep. Both paths produce only bounded `c`, `s` and entries of
/// `ν̂` no larger than the diagonal of the matrix demands.
pub fn kernel_gvr(spec: &KernelSpec, grid: &TimeGrid) -> Result<GvRMatrix> {
    spec.validate()?;
    let terms = kernel_terms(spec, grid.as_slice());
    let fast = grid.step().filter(|_| terms.iter().all(|g| g.ln_q != 0.0));
    Ok(assemble_terms(&terms, grid.as_slice(), fast))
}

/// Same as [`kernel_gvr`] but always through the general-grid sweep.
pub fn kernel_gvr_general(spec: &KernelSpec, grid: &TimeGrid) -> Result<GvRMatrix> {
    spec.validate()?;
    let terms = kernel_terms(spec, grid.as_slice());
    Ok(assemble_terms(&terms, grid.as_slice(), None))
}

fn assemble_terms(terms: &[GeomTerm], t: &[f64], step: Option<f64>) -> GvRMatrix {
    let (n, p) = (t.len(), terms.len());
    let mut c = RowMatrix::zeros(n, p);
    let mut s = RowMatrix::zeros(n, p);
    let mut nu = RowMatrix::zeros(n, p);
    for (k, g) in terms.iter().enumerate() {
        match step {
            Some(h) => write_geometric_column(g.sign, g.ln_q, h, &g.diag, k, &mut c, &mut s, &mut nu),
            None => {
                let col = RatioColumn {
                    sign: vec![g.sign; n],
                    step: t.windows(2).map(|w| (w[1] - w[0]) * g.ln_q).collect(),
                    diag: g.diag.clone(),
                };
                write_ratio_column(&col, k, &mut c, &mut s, &mut nu);
            }
        }
    }
    GvRMatrix::new(c, s, nu).expect("closed forms give a valid representation")
}

/// Generators of the output kernel `Ψ` for any supported (kernel, input).
pub fn psi_gr(spec: &KernelSpec, input: &InputSignal, grid: &TimeGrid) -> Result<GRMatrix> {
    match input {
        InputSignal::UnitImpulse => kernel_gr(spec, grid),
        InputSignal::Exponential { .. } => output_kernel_gr(spec, input, grid),
    }
}

/// Givens-vector form of the output kernel `Ψ` for any supported (kernel, input).
pub fn psi_gvr(spec: &KernelSpec, input: &InputSignal, grid: &TimeGrid) -> Result<GvRMatrix> {
    match input {
        InputSignal::UnitImpulse => kernel_gvr(spec, grid),
        InputSignal::Exponential { .. } => output_kernel_gvr(spec, input, grid),
    }
}
