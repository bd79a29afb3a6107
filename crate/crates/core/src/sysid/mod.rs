//! Kernel-based impulse-response identification: data simulation, criterion
//! evaluation through the structured algorithms, hyper-parameter search and
//! model fit.

mod optimize;
mod system;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::criteria::CriterionReport;
use crate::error::{check_len, Error, Result};
use crate::fastalg;
use crate::grbase::{gr_cholesky, gr_matvec, gr_trace_inv_columnwise, GrInverse};
use crate::kernels::{kernel_gr, kernel_gvr, psi_gr, psi_gvr, InputSignal, KernelSpec, TimeDomain};
use crate::oracle::{dense_criteria, dense_impulse_map, dense_output_kernel};
use crate::repkit::{gr_to_gvr, DiagVec, GvRMatrix, TimeGrid};

pub use optimize::{optimize_hyperparams, KernelFamily, OptimResult, SearchOptions};
pub use system::{generate_random_system, simulate, LtiSystem, SimData, ENERGY_LAGS};

/// One regularized identification instance with `M = Ψ + γI`.
#[derive(Debug, Clone)]
pub struct IdentProblem {
    pub y: Vec<f64>,
    pub grid: TimeGrid,
    pub input: InputSignal,
    pub kernel: KernelSpec,
    pub gamma: f64,
}

impl IdentProblem {
    pub fn new(y: Vec<f64>, grid: TimeGrid, input: InputSignal, kernel: KernelSpec, gamma: f64) -> Result<Self> {
        check_len(grid.len(), y.len())?;
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::InvalidInput("γ must be positive".into()));
        }
        kernel.validate()?;
        Ok(Self { y, grid, input, kernel, gamma })
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    /// Same data with other hyper-parameters.
    pub fn with_params(&self, kernel: KernelSpec, gamma: f64) -> Result<Self> {
        Self::new(self.y.clone(), self.grid.clone(), self.input, kernel, gamma)
    }
}

/// Implementations compared in the experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    /// Generator form, trace through the generators of `L⁻¹`.
    GR,
    /// Generator form, trace column by column.
    GRs,
    /// Givens-vector form from closed forms.
    GvR,
    /// Givens-vector form converted from the generators.
    GvRt,
    /// Dense reference.
    Ref,
}

impl Method {
    pub const ALL: [Method; 5] = [Method::GR, Method::GRs, Method::GvR, Method::GvRt, Method::Ref];

    /// All four criteria at the problem's hyper-parameters.
    pub fn evaluate(self, prob: &IdentProblem) -> Result<CriterionReport> {
        match self {
            Method::GvR => evaluate_gvr(&psi_gvr(&prob.kernel, &prob.input, &prob.grid)?, prob),
            Method::GvRt => evaluate_gvr(&gr_to_gvr(&psi_gr(&prob.kernel, &prob.input, &prob.grid)?), prob),
            Method::GR | Method::GRs => {
                let gr = psi_gr(&prob.kernel, &prob.input, &prob.grid)?;
                let d = DiagVec::constant(prob.n(), prob.gamma)?;
                let chol = gr_cholesky(&gr, &d)?;
                let alpha = chol.solve(&prob.y)?;
                let y_hat = gr_matvec(&gr, &alpha)?;
                let tr = if self == Method::GR {
                    GrInverse::compute(&chol).trace_inverse()
                } else {
                    gr_trace_inv_columnwise(&chol)
                };
                Ok(CriterionReport::from_parts(&prob.y, alpha, y_hat, chol.logdet(), tr, prob.gamma))
            }
            Method::Ref => {
                let psi = dense_output_kernel(&prob.kernel, &prob.input, &prob.grid)?;
                dense_criteria(&psi, &prob.y, prob.gamma)
            }
        }
    }

    /// `ĝ(t_k) = Σ_i α̂_i ā_i(t_k)` on the grid, through this method's
    /// representation of the kernel matrix.
    pub fn estimate_impulse(self, prob: &IdentProblem, alpha_hat: &[f64]) -> Result<Vec<f64>> {
        check_len(prob.n(), alpha_hat.len())?;
        if self == Method::Ref {
            let g = dense_impulse_map(&prob.kernel, &prob.input, &prob.grid)?;
            return Ok((g * nalgebra::DVector::from_column_slice(alpha_hat)).as_slice().to_vec());
        }
        let (beta, beta0) = impulse_weights(prob, alpha_hat)?;
        let mut g = match self {
            Method::GvR => fastalg::matvec(&kernel_gvr(&prob.kernel, &prob.grid)?, &beta)?,
            Method::GvRt => fastalg::matvec(&gr_to_gvr(&kernel_gr(&prob.kernel, &prob.grid)?), &beta)?,
            _ => gr_matvec(&kernel_gr(&prob.kernel, &prob.grid)?, &beta)?,
        };
        if beta0 != 0.0 {
            for (gk, &t) in g.iter_mut().zip(prob.grid.as_slice()) {
                *gk += prob.kernel.entry(t, 0.0) * beta0;
            }
        }
        Ok(g)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.to_string().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidInput(format!("unknown method {s:?}")))
    }
}

fn evaluate_gvr(psi: &GvRMatrix, prob: &IdentProblem) -> Result<CriterionReport> {
    let d = DiagVec::constant(prob.n(), prob.gamma)?;
    let chol = fastalg::cholesky(psi, &d)?;
    let alpha = fastalg::solve(&chol, &prob.y)?;
    let y_hat = fastalg::matvec(psi, &alpha)?;
    let tr = fastalg::trace_inverse(&chol);
    Ok(CriterionReport::from_parts(&prob.y, alpha, y_hat, fastalg::logdet(&chol), tr, prob.gamma))
}

/// Criteria through the Givens-vector path.
pub fn evaluate_criteria(prob: &IdentProblem) -> Result<CriterionReport> {
    Method::GvR.evaluate(prob)
}

/// Impulse-response estimate through the Givens-vector path.
pub fn estimate_impulse(prob: &IdentProblem, alpha_hat: &[f64]) -> Result<Vec<f64>> {
    Method::GvR.estimate_impulse(prob, alpha_hat)
}

/// Weights with `ĝ(t) = Σ_{r=1}^N K(t, r) β_r + K(t, 0) β₀`.
///
/// For the unit impulse `β = α̂`. For `u(k) = e^{−αk}` on the grid `1..N`,
/// `β_r = Σ_{i ≥ r} α̂_i e^{−α(i−r)}`, accumulated backwards.
fn impulse_weights(prob: &IdentProblem, alpha_hat: &[f64]) -> Result<(Vec<f64>, f64)> {
    match prob.input {
        InputSignal::UnitImpulse => Ok((alpha_hat.to_vec(), 0.0)),
        InputSignal::Exponential { rate, domain: TimeDomain::Discrete } => {
            if !prob.grid.is_unit_lag() {
                return Err(Error::Unsupported("exponential-input impulse estimate needs the grid 1..N".into()));
            }
            let decay = (-rate).exp();
            let mut beta = alpha_hat.to_vec();
            for r in (0..beta.len().saturating_sub(1)).rev() {
                beta[r] += decay * beta[r + 1];
            }
            let beta0 = decay * beta.first().copied().unwrap_or(0.0);
            Ok((beta, beta0))
        }
        InputSignal::Exponential { .. } => Err(Error::Unsupported("impulse estimates are discrete-time only".into())),
    }
}

/// `100(1 − [Σ|g⁰ − ĝ| / Σ|g⁰ − mean(g⁰)|]^{1/2})`.
pub fn model_fit(g0: &[f64], g_hat: &[f64]) -> Result<f64> {
    check_len(g0.len(), g_hat.len())?;
    if g0.is_empty() {
        return Err(Error::DegenerateReference);
    }
    let mean = g0.iter().sum::<f64>() / g0.len() as f64;
    let den: f64 = g0.iter().map(|g| (g - mean).abs()).sum();
    if den == 0.0 {
        return Err(Error::DegenerateReference);
    }
    let num: f64 = g0.iter().zip(g_hat).map(|(a, b)| (a - b).abs()).sum();
    Ok(100.0 * (1.0 - (num / den).sqrt()))
}
