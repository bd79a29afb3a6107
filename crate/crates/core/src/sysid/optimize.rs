//! Grid search followed by Nelder–Mead in transformed coordinates.

use serde::{Deserialize, Serialize};

use super::{IdentProblem, Method};
use crate::criteria::{Criterion, CriterionReport};
use crate::error::{Error, Result};
use crate::kernels::{InputSignal, KernelSpec};
use crate::repkit::TimeGrid;

/// Kernel family whose parameters are searched.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KernelFamily {
    Dc,
    Tc,
    Ss,
}

impl KernelFamily {
    /// Number of kernel parameters (γ excluded).
    fn dim(self) -> usize {
        match self {
            KernelFamily::Dc => 2,
            _ => 1,
        }
    }

    fn build(self, p: &[f64]) -> KernelSpec {
        match self {
            KernelFamily::Dc => KernelSpec::Dc { decay: p[0], corr: p[1] },
            KernelFamily::Tc => KernelSpec::Tc { corr: p[0] },
            KernelFamily::Ss => KernelSpec::Ss { corr: p[0] },
        }
    }
}

#[derive(Debug, Clone)]
pub struct SearchOptions {
    pub method: Method,
    /// Values tried for every kernel parameter (`λ`, `ρ`).
    pub param_grid: Vec<f64>,
    pub gamma_grid: Vec<f64>,
    /// Box for the kernel parameters during the local descent.
    pub param_bounds: (f64, f64),
    pub gamma_bounds: (f64, f64),
    /// Stop when the simplex values spread less than `tol·(1 + |f_best|)`.
    pub tol: f64,
    /// Evaluation budget of one local descent.
    pub max_evals: usize,
    pub restarts: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            method: Method::GvR,
            param_grid: (0..8).map(|k| 0.05 + 0.9 * k as f64 / 7.0).collect(),
            gamma_grid: (0..8).map(|k| 10f64.powf(-8.0 + 8.0 * k as f64 / 7.0)).collect(),
            param_bounds: (1e-3, 0.999),
            gamma_bounds: (1e-10, 1e2),
            tol: 1e-6,
            max_evals: 600,
            restarts: 2,
        }
    }
}

#[derive(Debug, Clone)]
pub struct OptimResult {
    pub kernel: KernelSpec,
    pub gamma: f64,
    pub value: f64,
    pub report: CriterionReport,
    pub evaluations: usize,
}

fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

struct Objective<'a> {
    base: IdentProblem,
    family: KernelFamily,
    criterion: Criterion,
    method: Method,
    /// Bounds in transformed coordinates.
    lo: Vec<f64>,
    hi: Vec<f64>,
    evaluations: &'a mut usize,
}

impl Objective<'_> {
    fn params(&self, x: &[f64]) -> (KernelSpec, f64) {
        let k = self.family.dim();
        let p: Vec<f64> = x[..k].iter().map(|&v| sigmoid(v)).collect();
        (self.family.build(&p), x[k].exp())
    }

    fn report(&mut self, x: &[f64]) -> Result<CriterionReport> {
        *self.evaluations += 1;
        let (kernel, gamma) = self.params(x);
        self.method.evaluate(&self.base.with_params(kernel, gamma)?)
    }

    /// Failed, non-finite or out-of-box evaluations count as `+∞`.
    fn value(&mut self, x: &[f64]) -> f64 {
        if x.iter().zip(&self.lo).zip(&self.hi).any(|((v, lo), hi)| v < lo || v > hi) {
            return f64::INFINITY;
        }
        match self.report(x) {
            Ok(r) if r.value(self.criterion).is_finite() => r.value(self.criterion),
            _ => f64::INFINITY,
        }
    }
}

/// Minimizes `criterion` over the kernel parameters and `γ`.
///
/// Every grid point is evaluated first; the best one seeds a Nelder–Mead
/// descent on `(logit λ, logit ρ, ln γ)`, which is restarted from its own
/// optimum while that still improves the value. Points outside the bounds
/// are walls for the descent, so grid points outside them are never chosen.
pub fn optimize_hyperparams(
    y: &[f64],
    grid: &TimeGrid,
    input: &InputSignal,
    family: KernelFamily,
    criterion: Criterion,
    opts: &SearchOptions,
) -> Result<OptimResult> {
    let seed_kernel = family.build(&[0.5, 0.5]);
    let base = IdentProblem::new(y.to_vec(), grid.clone(), *input, seed_kernel, 1.0)?;
    let k = family.dim();
    let (pl, ph) = opts.param_bounds;
    let (gl, gh) = opts.gamma_bounds;
    if !(0.0 < pl && pl < ph && ph < 1.0 && 0.0 < gl && gl < gh) {
        return Err(Error::InvalidInput("search bounds must satisfy 0 < lo < hi (< 1 for kernel parameters)".into()));
    }
    let mut lo = vec![logit(pl); k];
    lo.push(gl.ln());
    let mut hi = vec![logit(ph); k];
    hi.push(gh.ln());
    let mut evaluations = 0;
    let mut obj = Objective { base, family, criterion, method: opts.method, lo, hi, evaluations: &mut evaluations };

    let mut best: Option<(f64, Vec<f64>)> = None;
    let sizes: Vec<usize> = (0..=k).map(|j| if j < k { opts.param_grid.len() } else { opts.gamma_grid.len() }).collect();
    let total: usize = sizes.iter().product();
    if total == 0 {
        return Err(Error::InvalidInput("empty search grid".into()));
    }
    for flat in 0..total {
        // The last coordinate (γ) varies fastest.
        let mut rem = flat;
        let mut x = vec![0.0; k + 1];
        for j in (0..=k).rev() {
            let i = rem % sizes[j];
            rem /= sizes[j];
            x[j] = if j < k { logit(opts.param_grid[i]) } else { opts.gamma_grid[i].ln() };
        }
        let f = obj.value(&x);
        if f.is_finite() && best.as_ref().is_none_or(|(bf, _)| f < *bf) {
            best = Some((f, x));
        }
    }
    let (mut fbest, mut xbest) = best.ok_or(Error::AllEvaluationsFailed)?;

    for _ in 0..=opts.restarts {
        let (f, x) = nelder_mead(|x| obj.value(x), &xbest, 0.5, opts.tol, opts.max_evals);
        let improved = fbest - f > opts.tol * (1.0 + fbest.abs());
        if f <= fbest {
            fbest = f;
            xbest = x;
        }
        if !improved {
            break;
        }
    }
    let report = obj.report(&xbest)?;
    let (kernel, gamma) = obj.params(&xbest);
    Ok(OptimResult { kernel, gamma, value: report.value(criterion), report, evaluations })
}

/// Plain Nelder–Mead with standard coefficients. Returns the best vertex.
pub(crate) fn nelder_mead(
    mut f: impl FnMut(&[f64]) -> f64,
    x0: &[f64],
    step: f64,
    tol: f64,
    max_evals: usize,
) -> (f64, Vec<f64>) {
    let n = x0.len();
    let mut simplex: Vec<Vec<f64>> = vec![x0.to_vec()];
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += step;
        simplex.push(x);
    }
    let mut values: Vec<f64> = simplex.iter().map(|x| f(x)).collect();
    let mut evals = n + 1;

    while evals < max_evals {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();
        let (lo, hi) = (values[0], values[n]);
        if hi - lo <= tol * (1.0 + lo.abs()) {
            break;
        }
        let centroid: Vec<f64> = (0..n).map(|j| simplex[..n].iter().map(|x| x[j]).sum::<f64>() / n as f64).collect();
        let along = |t: f64| -> Vec<f64> { (0..n).map(|j| centroid[j] + t * (simplex[n][j] - centroid[j])).collect() };

        let xr = along(-1.0);
        let fr = f(&xr);
        evals += 1;
        if fr < values[0] {
            let xe = along(-2.0);
            let fe = f(&xe);
            evals += 1;
            if fe < fr {
                simplex[n] = xe;
                values[n] = fe;
            } else {
                simplex[n] = xr;
                values[n] = fr;
            }
        } else if fr < values[n - 1] {
            simplex[n] = xr;
            values[n] = fr;
        } else {
            let (xc, fc) = if fr < values[n] {
                let xc = along(-0.5);
                let fc = f(&xc);
                (xc, fc)
            } else {
                let xc = along(0.5);
                let fc = f(&xc);
                (xc, fc)
            };
            evals += 1;
            if fc < values[n].min(fr) {
                simplex[n] = xc;
                values[n] = fc;
            } else {
                for i in 1..=n {
                    for j in 0..n {
                        simplex[i][j] = simplex[0][j] + 0.5 * (simplex[i][j] - simplex[0][j]);
                    }
                    values[i] = f(&simplex[i]);
                }
                evals += n;
            }
        }
    }
    let best = (0..=n).min_by(|&a, &b| values[a].total_cmp(&values[b])).unwrap();
    (values[best], simplex[best].clone())
}
