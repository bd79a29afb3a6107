//! Accuracy of each method against the dense reference as the DC decay `λ`
//! grows past the correlation `ρ`.

use anyhow::Result;
use gvr_core::kernels::KernelSpec;
use gvr_core::repkit::TimeGrid;
use gvr_core::sysid::{generate_random_system, simulate, IdentProblem, Method};
use rayon::prelude::*;

use crate::config::Settings;
use crate::csvout::{fmt_f64, Table};
use crate::{derive_seed, finite_mean, with_pool};

pub const DEFAULT_N: usize = 600;
pub const DEFAULT_TRIALS: usize = 80;

/// Absolute errors of one method on one trial; NaN when the method failed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialErrors {
    pub lambda: f64,
    pub trial: usize,
    pub method: Method,
    /// `‖α̂ − α̂_ref‖₂`.
    pub alpha: f64,
    /// `‖ŷ − ŷ_ref‖₂`.
    pub y_hat: f64,
    /// `|tr M⁻¹ − tr_ref|`.
    pub tr: f64,
    pub tr_ref: f64,
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

fn one_trial(s: &Settings, n: usize, lambda: f64, trial: usize) -> Result<Vec<TrialErrors>> {
    let seed = derive_seed(s.seed, trial as u64);
    let input = s.input_signal();
    let system = generate_random_system(s.order, (s.pole_min, s.pole_max), seed)?;
    let data = simulate(&system, &input, n, s.snr, seed.wrapping_add(1))?;
    let prob = IdentProblem::new(
        data.y,
        TimeGrid::integers(n),
        input,
        KernelSpec::Dc { decay: lambda, corr: s.rho },
        s.gamma,
    )?;
    let reference = Method::Ref.evaluate(&prob)?;
    Ok(s.methods
        .iter()
        .filter(|&&m| m != Method::Ref)
        .map(|&method| {
            let nan = TrialErrors { lambda, trial, method, alpha: f64::NAN, y_hat: f64::NAN, tr: f64::NAN, tr_ref: reference.tr_minv };
            match method.evaluate(&prob) {
                Ok(r) => TrialErrors {
                    alpha: dist(&r.alpha_hat, &reference.alpha_hat),
                    y_hat: dist(&r.y_hat, &reference.y_hat),
                    tr: (r.tr_minv - reference.tr_minv).abs(),
                    ..nan
                },
                Err(_) => nan,
            }
        })
        .collect())
}

/// Every `(λ, trial, method)` error, in that order.
pub fn run(s: &Settings, n: usize, trials: usize) -> Result<Vec<TrialErrors>> {
    let jobs: Vec<(f64, usize)> = s.lambdas.iter().flat_map(|&l| (0..trials).map(move |t| (l, t))).collect();
    let out: Result<Vec<Vec<TrialErrors>>> =
        with_pool(s.threads, || jobs.par_iter().map(|&(l, t)| one_trial(s, n, l, t)).collect())?;
    Ok(out?.into_iter().flatten().collect())
}

/// `log₁₀` of an error; an exact zero maps to the smallest normal double
/// and NaN stays NaN.
pub fn log10_err(e: f64) -> f64 {
    if e.is_nan() {
        e
    } else {
        e.max(f64::MIN_POSITIVE).log10()
    }
}

type Getter = fn(&TrialErrors) -> f64;

pub fn table(records: &[TrialErrors], s: &Settings, provenance: String) -> Table {
    let mut t = Table::new(
        provenance,
        &["lambda", "method", "quantity", "mean_log10_err", "max_err", "nan_trials", "trials"],
    );
    for &lambda in &s.lambdas {
        for &method in s.methods.iter().filter(|&&m| m != Method::Ref) {
            let rs: Vec<&TrialErrors> = records.iter().filter(|r| r.lambda == lambda && r.method == method).collect();
            let quantities: [(&str, Getter); 3] =
                [("alpha_hat", |r| r.alpha), ("y_hat", |r| r.y_hat), ("tr_minv", |r| r.tr)];
            for (name, get) in quantities {
                let vals: Vec<f64> = rs.iter().map(|r| get(r)).collect();
                let nan = vals.iter().filter(|v| !v.is_finite()).count();
                let max = vals.iter().copied().filter(|v| v.is_finite()).fold(f64::NAN, f64::max);
                t.push(vec![
                    fmt_f64(lambda),
                    method.to_string(),
                    name.into(),
                    fmt_f64(finite_mean(vals.iter().map(|&v| log10_err(v)))),
                    fmt_f64(max),
                    nan.to_string(),
                    vals.len().to_string(),
                ]);
            }
        }
    }
    t
}
