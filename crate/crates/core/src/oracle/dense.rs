//! O(N³) dense references.

use nalgebra::{DMatrix, DVector};

use crate::criteria::CriterionReport;
use crate::error::{check_len, Error, Result};
use crate::kernels::{InputSignal, KernelSpec, TimeDomain};
use crate::repkit::TimeGrid;

/// Largest N accepted by the dense routines.
pub const DENSE_LIMIT: usize = 5000;

fn guard(n: usize) -> Result<()> {
    if n > DENSE_LIMIT {
        Err(Error::TooLarge { n, limit: DENSE_LIMIT })
    } else {
        Ok(())
    }
}

/// Lower Cholesky factor. The dense path does not locate the failing pivot,
/// so a breakdown is reported at index 0.
pub fn dense_cholesky(m: DMatrix<f64>) -> Result<DMatrix<f64>> {
    guard(m.nrows())?;
    m.cholesky().map(|c| c.unpack()).ok_or(Error::NotPositiveDefinite { index: 0 })
}

/// Criteria for `M = Ψ + γI` by dense Cholesky, triangular solves and an
/// explicit `L⁻¹` for `tr(M⁻¹) = ‖L⁻¹‖_F²`.
pub fn dense_criteria(psi: &DMatrix<f64>, y: &[f64], gamma: f64) -> Result<CriterionReport> {
    let n = psi.nrows();
    check_len(n, y.len())?;
    guard(n)?;
    if !(gamma > 0.0) {
        return Err(Error::InvalidInput("γ must be positive".into()));
    }
    let mut m = psi.clone();
    for i in 0..n {
        m[(i, i)] += gamma;
    }
    let l = dense_cholesky(m)?;
    let yv = DVector::from_column_slice(y);
    let z = l.solve_lower_triangular(&yv).ok_or(Error::NotPositiveDefinite { index: 0 })?;
    let alpha = l.tr_solve_lower_triangular(&z).ok_or(Error::NotPositiveDefinite { index: 0 })?;
    let y_hat = psi * &alpha;
    let logdet = 2.0 * l.diagonal().iter().map(|v| v.ln()).sum::<f64>();
    let mut linv = DMatrix::identity(n, n);
    if !l.solve_lower_triangular_mut(&mut linv) {
        return Err(Error::NotPositiveDefinite { index: 0 });
    }
    let tr_minv = linv.norm_squared();
    Ok(CriterionReport::from_parts(y, alpha.as_slice().to_vec(), y_hat.as_slice().to_vec(), logdet, tr_minv, gamma))
}

/// Kernel matrix from direct entry evaluation.
pub fn dense_kernel(spec: &KernelSpec, grid: &TimeGrid) -> Result<DMatrix<f64>> {
    spec.validate()?;
    let t = grid.as_slice();
    guard(t.len())?;
    Ok(DMatrix::from_fn(t.len(), t.len(), |i, j| spec.entry(t[i], t[j])))
}

fn integer_times(grid: &TimeGrid) -> Result<Vec<usize>> {
    grid.as_slice()
        .iter()
        .map(|&x| {
            if x >= 0.0 && (x - x.round()).abs() <= 1e-9 {
                Ok(x.round() as usize)
            } else {
                Err(Error::InvalidInput("discrete-time input needs integer sample times".into()))
            }
        })
        .collect()
}

/// `B(s, t') = Σ_{r=0}^{t'} K(s, r) u(t' − r)` for `s, t' ∈ 0..=m`, through
/// `B(s, t'+1) = e^{−α} B(s, t') + K(s, t'+1)`.
fn convolved_kernel(spec: &KernelSpec, alpha: f64, m: usize) -> DMatrix<f64> {
    let decay = (-alpha).exp();
    let mut b = DMatrix::zeros(m + 1, m + 1);
    for s in 0..=m {
        let mut acc = 0.0;
        for tp in 0..=m {
            acc = decay * acc + spec.entry(s as f64, tp as f64);
            b[(s, tp)] = acc;
        }
    }
    b
}

/// Output kernel `Ψ(t, t') = Σ_s Σ_r K(s, r) u(t − s) u(t' − r)`.
///
/// Unit impulse gives the kernel itself. A discrete exponential input is
/// summed exactly in O(m²) for integer times up to `m`; any kernel family is
/// accepted. Continuous time uses [`ct_output_kernel_quadrature`].
pub fn dense_output_kernel(spec: &KernelSpec, input: &InputSignal, grid: &TimeGrid) -> Result<DMatrix<f64>> {
    spec.validate()?;
    guard(grid.len())?;
    match *input {
        InputSignal::UnitImpulse => dense_kernel(spec, grid),
        InputSignal::Exponential { rate, domain: TimeDomain::Discrete } => {
            let t = integer_times(grid)?;
            let m = *t.last().unwrap();
            let b = convolved_kernel(spec, rate, m);
            let decay = (-rate).exp();
            let mut psi_full = DMatrix::zeros(m + 1, m + 1);
            for tp in 0..=m {
                let mut acc = 0.0;
                for s in 0..=m {
                    acc = decay * acc + b[(s, tp)];
                    psi_full[(s, tp)] = acc;
                }
            }
            let n = t.len();
            Ok(DMatrix::from_fn(n, n, |i, j| {
                let (a, b) = (psi_full[(t[i], t[j])], psi_full[(t[j], t[i])]);
                0.5 * (a + b)
            }))
        }
        InputSignal::Exponential { rate, domain: TimeDomain::Continuous } => {
            let t = grid.as_slice();
            let n = t.len();
            let mut out = DMatrix::zeros(n, n);
            for i in 0..n {
                for j in 0..=i {
                    let v = ct_output_kernel_quadrature(spec, rate, t[i], t[j]);
                    out[(i, j)] = v;
                    out[(j, i)] = v;
                }
            }
            Ok(out)
        }
    }
}

/// `∫₀^t ∫₀^{t'} K(s, r) e^{−α(t−s)} e^{−α(t'−r)} dr ds`.
///
/// For DC and TC kernels the inner integral is a sum of two exponential
/// integrals and only the outer one is done by Gauss–Legendre, with panels
/// narrow enough for the steepest exponential rate. Other kernels use
/// composite quadrature in both variables, split at the kink `s = r`.
pub fn ct_output_kernel_quadrature(spec: &KernelSpec, alpha: f64, t: f64, tp: f64) -> f64 {
    let k = t.min(tp);
    if let Some((lam, rho)) = spec.as_dc() {
        let (l, c) = (lam.ln(), rho.ln());
        let inner = |s: f64| dc_inner_integral(l, c, alpha, s, tp) * (-alpha * (t - s)).exp();
        let rate = (l + c + alpha).abs().max((l - c + alpha).abs()) + alpha.abs();
        let panels = |len: f64| ((rate * len / 2.0).ceil() as usize).max(2);
        return gauss_legendre(inner, 0.0, k, panels(k)) + gauss_legendre(inner, k, t, panels(t - k));
    }
    let f = |s: f64, r: f64| spec.entry(s, r) * (-alpha * (t - s)).exp() * (-alpha * (tp - r)).exp();
    let inner = |s: f64| {
        let k = s.min(tp);
        gauss_legendre(|r| f(s, r), 0.0, k, 4) + gauss_legendre(|r| f(s, r), k, tp, 4)
    };
    gauss_legendre(inner, 0.0, k, 8) + gauss_legendre(inner, k, t, 8)
}

/// `ln ∫₀^len e^{x r} dr`.
fn ln_exp_integral(x: f64, len: f64) -> f64 {
    if len <= 0.0 {
        f64::NEG_INFINITY
    } else if x == 0.0 {
        len.ln()
    } else {
        crate::kernels::givens::ln_abs_expm1(x * len) - x.abs().ln()
    }
}

/// `∫₀^{t'} λ^{s+r} ρ^{|s−r|} e^{−α(t'−r)} dr` with `l = ln λ`, `c = ln ρ`.
fn dc_inner_integral(l: f64, c: f64, alpha: f64, s: f64, tp: f64) -> f64 {
    let m = s.min(tp);
    // r ≤ s: e^{(l+c)s − αt'} ∫₀^m e^{(l−c+α) r} dr
    let below = ((l + c) * s - alpha * tp + ln_exp_integral(l - c + alpha, m)).exp();
    // s < r ≤ t': e^{(l−c)s − αt'} e^{(l+c+α)s} ∫₀^{t'−s} e^{(l+c+α) r} dr
    let above = if s < tp {
        let te = l + c + alpha;
        ((l - c) * s - alpha * tp + te * s + ln_exp_integral(te, tp - s)).exp()
    } else {
        0.0
    };
    below + above
}

const GL_NODES: [f64; 10] = [
    -0.973_906_528_517_171_7,
    -0.865_063_366_688_984_5,
    -0.679_409_568_299_024_4,
    -0.433_395_394_129_247_2,
    -0.148_874_338_981_631_2,
    0.148_874_338_981_631_2,
    0.433_395_394_129_247_2,
    0.679_409_568_299_024_4,
    0.865_063_366_688_984_5,
    0.973_906_528_517_171_7,
];
const GL_WEIGHTS: [f64; 10] = [
    0.066_671_344_308_688_1,
    0.149_451_349_150_580_6,
    0.219_086_362_515_982,
    0.269_266_719_309_996_4,
    0.295_524_224_714_752_9,
    0.295_524_224_714_752_9,
    0.269_266_719_309_996_4,
    0.219_086_362_515_982,
    0.149_451_349_150_580_6,
    0.066_671_344_308_688_1,
];

/// 10-point Gauss–Legendre on `panels` equal sub-intervals of `[a, b]`.
fn gauss_legendre(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    if b <= a {
        return 0.0;
    }
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * h;
        for (x, w) in GL_NODES.iter().zip(GL_WEIGHTS) {
            total += w * f(mid + 0.5 * h * x);
        }
    }
    0.5 * h * total
}

/// Matrix `G` with `ĝ = G α̂` on the grid: `G(t, i) = Σ_{τ=0}^{t_i} K(t, τ) u(t_i − τ)`.
/// For the unit impulse this is the kernel matrix.
pub fn dense_impulse_map(spec: &KernelSpec, input: &InputSignal, grid: &TimeGrid) -> Result<DMatrix<f64>> {
    match *input {
        InputSignal::UnitImpulse => dense_kernel(spec, grid),
        InputSignal::Exponential { rate, domain: TimeDomain::Discrete } => {
            let t = integer_times(grid)?;
            let m = *t.last().unwrap();
            let b = convolved_kernel(spec, rate, m);
            let n = t.len();
            Ok(DMatrix::from_fn(n, n, |i, j| b[(t[i], t[j])]))
        }
        InputSignal::Exponential { .. } => {
            Err(Error::Unsupported("impulse estimates are discrete-time only".into()))
        }
    }
}
