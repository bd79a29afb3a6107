//! Monte Carlo accuracy study: simulate, select hyper-parameters with each
//! method, and score the impulse-response estimate by its fit.

use anyhow::Result;
use gvr_core::kernels::KernelSpec;
use gvr_core::repkit::TimeGrid;
use gvr_core::sysid::{generate_random_system, model_fit, optimize_hyperparams, simulate, Method, SearchOptions};
use rayon::prelude::*;

use crate::config::Settings;
use crate::csvout::{fmt_f64, Table};
use crate::{derive_seed, finite_mean, with_pool};

pub const DEFAULT_N: usize = 200;
pub const DEFAULT_TRIALS: usize = 80;

#[derive(Debug, Clone, PartialEq)]
pub struct TrialFit {
    pub trial: usize,
    pub method: Method,
    /// NaN when the search or the estimate failed.
    pub fit: f64,
    pub criterion: f64,
    pub kernel: Option<KernelSpec>,
    pub gamma: f64,
}

fn one_trial(s: &Settings, n: usize, trial: usize) -> Result<Vec<TrialFit>> {
    let seed = derive_seed(s.seed, trial as u64);
    let input = s.input_signal();
    let grid = TimeGrid::integers(n);
    let system = generate_random_system(s.order, (s.pole_min, s.pole_max), seed)?;
    let data = simulate(&system, &input, n, s.snr, seed.wrapping_add(1))?;
    Ok(s.methods
        .iter()
        .map(|&method| {
            let opts = SearchOptions { method, ..SearchOptions::default() };
            let attempt = || -> gvr_core::Result<TrialFit> {
                let best = optimize_hyperparams(&data.y, &grid, &input, s.family, s.criterion, &opts)?;
                let prob = gvr_core::sysid::IdentProblem::new(data.y.clone(), grid.clone(), input, best.kernel, best.gamma)?;
                let g = method.estimate_impulse(&prob, &best.report.alpha_hat)?;
                Ok(TrialFit {
                    trial,
                    method,
                    fit: model_fit(&data.g0, &g)?,
                    criterion: best.value,
                    kernel: Some(best.kernel),
                    gamma: best.gamma,
                })
            };
            attempt().unwrap_or(TrialFit { trial, method, fit: f64::NAN, criterion: f64::NAN, kernel: None, gamma: f64::NAN })
        })
        .collect())
}

/// Every `(trial, method)` result, in that order.
pub fn run(s: &Settings, n: usize, trials: usize) -> Result<Vec<TrialFit>> {
    let out: Result<Vec<Vec<TrialFit>>> =
        with_pool(s.threads, || (0..trials).into_par_iter().map(|t| one_trial(s, n, t)).collect())?;
    Ok(out?.into_iter().flatten().collect())
}

/// Mean fit of `method` over the trials where it succeeded.
pub fn mean_fit(records: &[TrialFit], method: Method) -> f64 {
    finite_mean(records.iter().filter(|r| r.method == method).map(|r| r.fit))
}

/// Per-trial rows followed by one `mean` row per method.
pub fn table(records: &[TrialFit], s: &Settings, provenance: String) -> Table {
    let mut t = Table::new(provenance, &["trial", "method", "fit", "criterion", "decay", "corr", "gamma"]);
    for r in records {
        let (decay, corr) = match r.kernel {
            Some(KernelSpec::Dc { decay, corr }) => (decay, corr),
            Some(KernelSpec::Tc { corr }) | Some(KernelSpec::Ss { corr }) => (f64::NAN, corr),
            None => (f64::NAN, f64::NAN),
        };
        t.push(vec![
            r.trial.to_string(),
            r.method.to_string(),
            fmt_f64(r.fit),
            fmt_f64(r.criterion),
            fmt_f64(decay),
            fmt_f64(corr),
            fmt_f64(r.gamma),
        ]);
    }
    for &m in &s.methods {
        let crit = finite_mean(records.iter().filter(|r| r.method == m).map(|r| r.criterion));
        let nan = f64::NAN;
        t.push(vec!["mean".into(), m.to_string(), fmt_f64(mean_fit(records, m)), fmt_f64(crit), fmt_f64(nan), fmt_f64(nan), fmt_f64(nan)]);
    }
    t
}
