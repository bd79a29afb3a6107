//! Acceptance criteria. Each test prints exactly one `PASS` or `FAIL` line
//! with its measured values, then asserts. Tolerances are pinned here.
//!
//! Tests hold a shared lock so timings never compete for cores.

use std::sync::Mutex;
use std::time::Instant;

use gvr_cli::{bench, fixtures, identify, stability, InputVariant, Settings};
use gvr_core::fastalg;
use gvr_core::kernels::{kernel_gr, kernel_gvr, output_kernel_gr, output_kernel_gvr, psi_gvr, InputSignal, KernelSpec};
use gvr_core::oracle::{dense_kernel, dense_output_kernel};
use gvr_core::repkit::{gr_to_dense, gr_to_gvr, gvr_to_dense, DiagVec, GvRMatrix, TimeGrid};
use gvr_core::sysid::{Method, SearchOptions};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

static SERIAL: Mutex<()> = Mutex::new(());

fn verdict(name: &str, pass: bool, detail: String) {
    println!("{} {name}: {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "{name}: {detail}");
}

fn rel(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
    let den: f64 = b.iter().map(|y| y * y).sum();
    (num / den).sqrt()
}

fn fixture_verdict(name: &str, rows: Vec<fixtures::FixtureRow>, secs: f64) {
    let detail: Vec<String> = rows
        .iter()
        .filter(|r| r.pass().is_some())
        .map(|r| format!("{} {}={:.3e}", r.method, r.quantity, r.value))
        .collect();
    let pass = rows.iter().all(|r| r.pass() != Some(false)) && secs < 1.0;
    verdict(name, pass, format!("{}; {secs:.3}s (limit 1s)", detail.join(", ")));
}

#[test]
fn fixture_1_matvec() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let rows = fixtures::example1();
    fixture_verdict("fixture 1 (GvR <= 1e-7, GR >= 1e5)", rows, start.elapsed().as_secs_f64());
}

#[test]
fn fixture_2_inverse_factor() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let rows = fixtures::example2();
    fixture_verdict(
        "fixture 2 (kappa(M) within 1% of 3.191245e4, kappa(YW) >= 1e15, GvR <= 1e-9, GR >= 0.5)",
        rows,
        start.elapsed().as_secs_f64(),
    );
}

#[derive(Clone, Copy, Debug)]
enum Family {
    Dc,
    Tc,
    Ss,
    OutputS2,
}

/// Failing checks on one random instance, by name.
fn equivalence_failures(family: Family, n: usize, gamma: f64, rng: &mut ChaCha8Rng) -> Vec<&'static str> {
    const RTOL: f64 = 1e-8;
    let grid = TimeGrid::integers(n);
    let (a, dense) = match family {
        Family::Dc => {
            let s = KernelSpec::Dc { decay: rng.random_range(0.2..0.99), corr: rng.random_range(0.2..0.99) };
            (kernel_gvr(&s, &grid).unwrap(), dense_kernel(&s, &grid).unwrap())
        }
        Family::Tc => {
            let s = KernelSpec::Tc { corr: rng.random_range(0.2..0.99) };
            (kernel_gvr(&s, &grid).unwrap(), dense_kernel(&s, &grid).unwrap())
        }
        Family::Ss => {
            let s = KernelSpec::Ss { corr: rng.random_range(0.2..0.99) };
            (kernel_gvr(&s, &grid).unwrap(), dense_kernel(&s, &grid).unwrap())
        }
        Family::OutputS2 => {
            let s = KernelSpec::Dc { decay: rng.random_range(0.2..0.99), corr: rng.random_range(0.2..0.99) };
            let u = InputSignal::exponential_dt(rng.random_range(0.3..1.5));
            (output_kernel_gvr(&s, &u, &grid).unwrap(), dense_output_kernel(&s, &u, &grid).unwrap())
        }
    };
    let x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let xv = DVector::from_column_slice(&x);
    let m = &dense + DMatrix::identity(n, n) * gamma;
    let l = m.clone().cholesky().unwrap().unpack();
    let minv = m.cholesky().unwrap().inverse();
    let chol = fastalg::cholesky(&a, &DiagVec::constant(n, gamma).unwrap()).unwrap();
    let other = KernelSpec::Ss { corr: rng.random_range(0.3..0.95) };
    let at = kernel_gvr(&other, &grid).unwrap();
    let dt: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..2.0)).collect();
    let tf_ref = (&minv * (dense_kernel(&other, &grid).unwrap() + DMatrix::from_diagonal(&DVector::from_vec(dt.clone())))).trace();
    let z_ref = l.solve_lower_triangular(&xv).unwrap();
    let ld_ref = 2.0 * l.diagonal().iter().map(|v| v.ln()).sum::<f64>();

    let mut bad = Vec::new();
    let mut check = |name, ok: bool| {
        if !ok {
            bad.push(name);
        }
    };
    check("matvec", rel(&fastalg::matvec(&a, &x).unwrap(), (&dense * &xv).as_slice()) < RTOL);
    check("cholesky", (chol.to_dense() - &l).norm() < RTOL * l.norm());
    check("solve_lower", rel(&fastalg::solve_lower(&chol, &x).unwrap(), z_ref.as_slice()) < RTOL);
    check("solve_upper", rel(&fastalg::solve_upper(&chol, &x).unwrap(), l.tr_solve_lower_triangular(&xv).unwrap().as_slice()) < RTOL);
    check("solve", rel(&fastalg::solve(&chol, &x).unwrap(), l.tr_solve_lower_triangular(&z_ref).unwrap().as_slice()) < RTOL);
    check("logdet", (fastalg::logdet(&chol) - ld_ref).abs() < RTOL * (1.0 + ld_ref.abs()));
    check("diag_inverse", rel(&fastalg::diag_inverse(&chol), minv.diagonal().as_slice()) < RTOL);
    check("trace_form", (fastalg::trace_form(&chol, &at, &dt).unwrap() - tf_ref).abs() < RTOL * tf_ref.abs());
    bad
}

#[test]
fn oracle_equivalence_suite() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let mut counts = Vec::new();
    let mut failures = Vec::new();
    for (seed, family) in [Family::Dc, Family::Tc, Family::Ss, Family::OutputS2].into_iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(100 + seed as u64);
        let mut count = 0;
        for n in [5, 20, 100, 200] {
            for gamma in [1e-6, 1e-3, 1.0] {
                for _ in 0..9 {
                    for name in equivalence_failures(family, n, gamma, &mut rng) {
                        failures.push(format!("{family:?} n={n} gamma={gamma} {name}"));
                    }
                    count += 1;
                }
            }
        }
        counts.push(format!("{family:?}={count}"));
    }
    let secs = start.elapsed().as_secs_f64();
    let pass = failures.is_empty() && secs < 60.0;
    verdict(
        "oracle equivalence (rtol 1e-8, >= 100 instances per family)",
        pass,
        format!("instances {}; {} failing checks {:?}; {secs:.1}s (limit 60s)", counts.join(" "), failures.len(), failures.first()),
    );
}

#[test]
fn cross_form_consistency() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let mut draw = || loop {
        let lam: f64 = rng.random_range(0.2..0.95);
        let rho: f64 = rng.random_range(0.2..0.95);
        let alpha: f64 = rng.random_range(0.3..1.5);
        let t = (lam * rho).ln() + alpha;
        let d = (lam / rho).ln() + alpha;
        if t.abs() > 0.05 && d.abs() > 0.05 && (t + d).abs() > 0.05 {
            return (lam, rho, alpha);
        }
    };
    // Discrete-time draws: the setting of every experiment.
    let mut worst_cross = 0.0f64;
    for _ in 0..20 {
        let (lam, rho, alpha) = draw();
        let spec = KernelSpec::Dc { decay: lam, corr: rho };
        let (u, grid) = (InputSignal::exponential_dt(alpha), TimeGrid::integers(50));
        let a = gvr_to_dense(&output_kernel_gvr(&spec, &u, &grid).unwrap());
        let b = gr_to_dense(&output_kernel_gr(&spec, &u, &grid).unwrap());
        worst_cross = worst_cross.max((&a - &b).norm() / b.norm());
    }
    let mut worst_sum = 0.0f64;
    for _ in 0..20 {
        let (lam, rho, alpha) = draw();
        let spec = KernelSpec::Dc { decay: lam, corr: rho };
        let n = 10;
        let psi = gr_to_dense(&output_kernel_gr(&spec, &InputSignal::exponential_dt(alpha), &TimeGrid::integers(n)).unwrap());
        for i in 1..=n {
            for j in 1..=n {
                let mut acc = 0.0;
                for s in 0..=i {
                    for r in 0..=j {
                        acc += spec.entry(s as f64, r as f64) * (-alpha * (i - s) as f64).exp() * (-alpha * (j - r) as f64).exp();
                    }
                }
                worst_sum = worst_sum.max((psi[(i - 1, j - 1)] - acc).abs() / acc.abs());
            }
        }
    }
    verdict(
        "cross-form consistency (GvR vs GR <= 1e-10 at N=50, GR vs double sum rtol 1e-8 at N=10)",
        worst_cross <= 1e-10 && worst_sum <= 1e-8,
        format!("GvR vs GR {worst_cross:.3e} over 20 DT draws; GR vs double sum {worst_sum:.3e}"),
    );
}

#[test]
fn stability_sweep_ordering() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let mut s = Settings { lambdas: vec![0.9], methods: vec![Method::GR, Method::GvR], ..Settings::default() };
    let mut details = Vec::new();
    let mut pass = true;
    for input in [InputVariant::S1, InputVariant::S2] {
        s.input = input;
        let records = stability::run(&s, 600, 10).unwrap();
        let mut ok = 0;
        let (mut worst_gvr, mut best_gap) = (0.0f64, f64::INFINITY);
        let mut gr_nan = 0;
        for trial in 0..10 {
            let get = |m| records.iter().find(|r| r.trial == trial && r.method == m).unwrap();
            let (gvr, gr) = (get(Method::GvR), get(Method::GR));
            let gvr_ok = gvr.tr.is_finite() && gvr.tr <= 1e-6 * gvr.tr_ref.abs();
            let gr_bad = !gr.tr.is_finite() || gr.tr >= 1e3 * gvr.tr;
            gr_nan += usize::from(!gr.tr.is_finite());
            worst_gvr = worst_gvr.max(gvr.tr / gvr.tr_ref.abs());
            if gr.tr.is_finite() {
                best_gap = best_gap.min(gr.tr / gvr.tr.max(f64::MIN_POSITIVE));
            }
            ok += usize::from(gvr_ok && gr_bad);
        }
        pass &= ok == 10;
        details.push(format!(
            "{input:?}: {ok}/10 trials, GvR rel tr err <= {worst_gvr:.1e}, GR NaN in {gr_nan}, smallest finite GR/GvR ratio {best_gap:.1e}"
        ));
    }
    verdict(
        "stability sweep at lambda=0.9 (GvR tr err <= 1e-6|tr|, GR >= 1e3x larger or NaN; N=600, 10 trials)",
        pass,
        details.join("; "),
    );
}

#[test]
fn trace_identity() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let n = 600;
    let grid = TimeGrid::integers(n);
    let o = SearchOptions::default();
    let mut worst = 0.0f64;
    let mut points = 0;
    for input in [InputSignal::UnitImpulse, InputSignal::exponential_dt(0.5)] {
        for &decay in &o.param_grid {
            for &corr in &o.param_grid {
                for &gamma in &o.gamma_grid {
                    let psi = psi_gvr(&KernelSpec::Dc { decay, corr }, &input, &grid).unwrap();
                    let chol = fastalg::cholesky(&psi, &DiagVec::constant(n, gamma).unwrap()).unwrap();
                    let tr_h = fastalg::trace_form(&chol, &psi, &vec![0.0; n]).unwrap();
                    let rhs = gamma * fastalg::trace_inverse(&chol) / n as f64;
                    worst = worst.max((1.0 - tr_h / n as f64 - rhs).abs());
                    points += 1;
                }
            }
        }
    }
    verdict(
        "trace identity 1 - tr(H)/N = gamma tr(M^-1)/N (<= 1e-10 over the default grid)",
        worst <= 1e-10,
        format!("worst {worst:.3e} over {points} grid points, S1 and S2, N={n}"),
    );
}

#[test]
fn complexity_and_fits() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let mut s = Settings {
        sizes: vec![600, 4800],
        methods: vec![Method::GvR, Method::Ref],
        repeats: 3,
        evals: 200,
        ref_evals: 1,
        threads: 1,
        ..Settings::default()
    };
    let timings = bench::run(&s).unwrap();
    let g_gvr = bench::growth(&timings, Method::GvR, 600, 4800).unwrap();
    let g_ref = bench::growth(&timings, Method::Ref, 600, 4800).unwrap();

    let mut fit_detail = Vec::new();
    let mut fits_ok = true;
    s.methods = vec![Method::GvR, Method::GvRt, Method::Ref];
    for input in [InputVariant::S1, InputVariant::S2] {
        s.input = input;
        let records = identify::run(&s, 200, 20).unwrap();
        let (gvr, gvrt, reference) = (
            identify::mean_fit(&records, Method::GvR),
            identify::mean_fit(&records, Method::GvRt),
            identify::mean_fit(&records, Method::Ref),
        );
        fits_ok &= (gvr - reference).abs() <= 0.5 && (gvrt - gvr).abs() <= 0.5;
        fit_detail.push(format!("{input:?} fits GvR {gvr:.2} GvRt {gvrt:.2} Ref {reference:.2}"));
    }
    verdict(
        "complexity and fits (GvR time ratio 4800/600 <= 12, Ref >= 30; |GvR-Ref|, |GvRt-GvR| <= 0.5 over 20 trials)",
        g_gvr <= 12.0 && g_ref >= 30.0 && fits_ok,
        format!("GvR ratio {g_gvr:.2}, Ref ratio {g_ref:.1}; {}", fit_detail.join("; ")),
    );
}

fn problem() -> impl Strategy<Value = (GvRMatrix, Vec<f64>)> {
    let spec = prop_oneof![
        (0.2f64..1.0, 0.05f64..0.99).prop_map(|(decay, corr)| KernelSpec::Dc { decay, corr }),
        (0.05f64..0.99).prop_map(|corr| KernelSpec::Tc { corr }),
        (0.2f64..1.0).prop_map(|corr| KernelSpec::Ss { corr }),
    ];
    (spec, 1usize..=40).prop_flat_map(|(spec, n)| {
        (Just(kernel_gvr(&spec, &TimeGrid::integers(n)).unwrap()), prop::collection::vec(1e-3f64..1.0, n))
    })
}

#[test]
fn property_suite() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let mut runner = TestRunner::new_with_rng(Config::with_cases(256), TestRng::deterministic_rng(RngAlgorithm::ChaCha));
    let mut results = Vec::new();

    results.push(("c^2+s^2=1", runner.run(&problem(), |(a, _)| {
        let b = gr_to_gvr(&kernel_gr(&KernelSpec::Ss { corr: 0.7 }, &TimeGrid::integers(a.n())).unwrap());
        for m in [&a, &b] {
            for i in 0..m.n() - 1 {
                for k in 0..m.rank() {
                    let (c, s) = (m.c().get(i, k), m.s().get(i, k));
                    prop_assert!((c * c + s * s - 1.0).abs() <= 1e-12);
                }
            }
        }
        Ok(())
    })));

    results.push(("LL^T=A+D rtol 1e-10", runner.run(&problem(), |(a, d)| {
        let chol = fastalg::cholesky(&a, &DiagVec::new(d.clone()).unwrap()).unwrap();
        let l = chol.to_dense();
        let m = gvr_to_dense(&a) + DMatrix::from_diagonal(&DVector::from_vec(d));
        prop_assert!((&l * l.transpose() - &m).norm() <= 1e-10 * m.norm());
        Ok(())
    })));

    results.push(("solve residual <= 1e-12", runner.run(&problem(), |(a, d)| {
        let n = a.n();
        let y: Vec<f64> = (0..n).map(|i| ((i * 37 % 11) as f64 - 5.0) / 5.0).collect();
        let chol = fastalg::cholesky(&a, &DiagVec::new(d.clone()).unwrap()).unwrap();
        let x = DVector::from_vec(fastalg::solve(&chol, &y).unwrap());
        let m = gvr_to_dense(&a) + DMatrix::from_diagonal(&DVector::from_vec(d));
        let yv = DVector::from_vec(y);
        prop_assert!((&m * &x - &yv).norm() <= 1e-12 * (m.norm() * x.norm() + yv.norm()));
        Ok(())
    })));

    results.push(("S-bar w-bar = S w / f <= 1e-12", runner.run(&problem(), |(a, d)| {
        let dv = DiagVec::new(d).unwrap();
        let chol = fastalg::cholesky(&a, &dv).unwrap();
        let inv = fastalg::inv_chol_rep(&chol, &dv).unwrap();
        for i in 0..a.n() - 1 {
            let lhs = &inv.s_bar[i] * DVector::from_row_slice(inv.w_bar.row(i));
            for k in 0..a.rank() {
                let rhs = a.s().get(i, k) * chol.w().get(i, k) / chol.f()[i];
                prop_assert!((lhs[k] - rhs).abs() <= 1e-12 * (1.0 + rhs.abs()));
            }
        }
        Ok(())
    })));

    results.push(("diag_inverse = trace_form(0, I) <= 1e-12", runner.run(&problem(), |(a, d)| {
        let n = a.n();
        let chol = fastalg::cholesky(&a, &DiagVec::new(d).unwrap()).unwrap();
        let diag: f64 = fastalg::diag_inverse(&chol).iter().sum();
        let tr = fastalg::trace_form(&chol, &GvRMatrix::zero(n, 1), &vec![1.0; n]).unwrap();
        prop_assert!((diag - tr).abs() <= 1e-12 * tr.abs());
        Ok(())
    })));

    let failed: Vec<String> =
        results.iter().filter_map(|(name, r)| r.as_ref().err().map(|e| format!("{name}: {e}"))).collect();
    let names: Vec<&str> = results.iter().map(|(n, _)| *n).collect();
    verdict(
        "property suite (256 cases each)",
        failed.is_empty(),
        if failed.is_empty() { names.join(", ") } else { failed.join("; ") },
    );
}
