//! Wall-clock cost of one criterion evaluation per method as N grows.

use std::time::Instant;

use anyhow::Result;
use gvr_core::kernels::KernelSpec;
use gvr_core::repkit::TimeGrid;
use gvr_core::sysid::{generate_random_system, simulate, IdentProblem, Method};

use crate::config::Settings;
use crate::csvout::{fmt_f64, Table};

/// Decay of the benchmarked DC kernel.
pub const BENCH_DECAY: f64 = 0.8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Timing {
    pub method: Method,
    pub n: usize,
    pub repeat: usize,
    /// Seconds per evaluation, averaged over the repeat.
    pub seconds: f64,
    /// Whether the evaluations returned an error.
    pub failed: bool,
}

/// One problem per size, shared by all methods.
fn problem(s: &Settings, n: usize) -> Result<IdentProblem> {
    let input = s.input_signal();
    let system = generate_random_system(s.order, (s.pole_min, s.pole_max), s.seed)?;
    let data = simulate(&system, &input, n, s.snr, s.seed.wrapping_add(1))?;
    Ok(IdentProblem::new(data.y, TimeGrid::integers(n), input, KernelSpec::Dc { decay: BENCH_DECAY, corr: s.rho }, s.gamma)?)
}

/// Sequential on purpose: timings must not compete for cores.
pub fn run(s: &Settings) -> Result<Vec<Timing>> {
    let mut out = Vec::new();
    for &n in &s.sizes {
        let prob = problem(s, n)?;
        for &method in &s.methods {
            let evals = if method == Method::Ref { s.ref_evals } else { s.evals }.max(1);
            for repeat in 0..s.repeats {
                let start = Instant::now();
                let mut failed = false;
                for _ in 0..evals {
                    // Failures are timed like successes but flagged.
                    failed |= std::hint::black_box(method.evaluate(&prob)).is_err();
                }
                out.push(Timing { method, n, repeat, seconds: start.elapsed().as_secs_f64() / evals as f64, failed });
            }
        }
    }
    Ok(out)
}

/// Median seconds of `method` at size `n`.
pub fn median_seconds(records: &[Timing], method: Method, n: usize) -> Option<f64> {
    let mut v: Vec<f64> = records.iter().filter(|r| r.method == method && r.n == n).map(|r| r.seconds).collect();
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    Some(if v.len() % 2 == 1 { v[m] } else { 0.5 * (v[m - 1] + v[m]) })
}

pub fn growth(records: &[Timing], method: Method, lo: usize, hi: usize) -> Option<f64> {
    Some(median_seconds(records, method, hi)? / median_seconds(records, method, lo)?)
}

/// A timing check with its outcome.
#[derive(Debug, Clone)]
pub struct GrowthCheck {
    pub label: String,
    pub ratio: f64,
    pub pass: bool,
}

/// GvR within 1.5× of linear growth per doubling and ≤ 12 from 600 to
/// 4800; the dense reference at least 30 over that span.
pub fn checks(records: &[Timing], s: &Settings) -> Vec<GrowthCheck> {
    let mut out = Vec::new();
    let mut sizes = s.sizes.clone();
    sizes.sort_unstable();
    if s.methods.contains(&Method::GvR) {
        for w in sizes.windows(2) {
            if let Some(r) = growth(records, Method::GvR, w[0], w[1]) {
                let limit = 1.5 * w[1] as f64 / w[0] as f64;
                out.push(GrowthCheck { label: format!("GvR time({})/time({}) <= {limit}", w[1], w[0]), ratio: r, pass: r <= limit });
            }
        }
        let adjacent = sizes.windows(2).any(|w| w == [600, 4800]);
        if let (false, Some(r)) = (adjacent, growth(records, Method::GvR, 600, 4800)) {
            out.push(GrowthCheck { label: "GvR time(4800)/time(600) <= 12".into(), ratio: r, pass: r <= 12.0 });
        }
    }
    if s.methods.contains(&Method::Ref) {
        if let Some(r) = growth(records, Method::Ref, 600, 4800) {
            out.push(GrowthCheck { label: "Ref time(4800)/time(600) >= 30".into(), ratio: r, pass: r >= 30.0 });
        }
    }
    out
}

pub fn table(records: &[Timing], provenance: String) -> Table {
    let mut t = Table::new(provenance, &["method", "N", "repeat", "seconds"]);
    for r in records {
        t.push(vec![r.method.to_string(), r.n.to_string(), r.repeat.to_string(), fmt_f64(r.seconds)]);
    }
    t
}
