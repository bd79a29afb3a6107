//! Algebraic invariants of the representations and the structured
//! algorithms, checked on generated instances.

use gvr_core::fastalg;
use gvr_core::kernels::{kernel_gr, kernel_gvr, kernel_gvr_general, output_kernel_gvr, InputSignal, KernelSpec};
use gvr_core::oracle::extended::{EXAMPLE1_KERNEL, FIXTURE_N};
use gvr_core::repkit::{gr_to_dense, gr_to_gvr, gvr_to_dense, DiagVec, GRMatrix, GvRMatrix, RowMatrix, TimeGrid};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

fn kernel_strategy() -> impl Strategy<Value = KernelSpec> {
    prop_oneof![
        (0.2f64..1.0, 0.05f64..0.99).prop_map(|(decay, corr)| KernelSpec::Dc { decay, corr }),
        (0.05f64..0.99).prop_map(|corr| KernelSpec::Tc { corr }),
        (0.2f64..1.0).prop_map(|corr| KernelSpec::Ss { corr }),
    ]
}

/// Strictly increasing grid with gaps in `[0.2, 2]`.
fn grid_strategy(max_n: usize) -> impl Strategy<Value = TimeGrid> {
    prop::collection::vec(0.2f64..2.0, 1..=max_n).prop_map(|gaps| {
        let t = gaps
            .iter()
            .scan(0.0, |acc, g| {
                *acc += g;
                Some(*acc)
            })
            .collect();
        TimeGrid::new(t).unwrap()
    })
}

/// Kernel matrix plus a positive diagonal.
fn problem_strategy() -> impl Strategy<Value = (GvRMatrix, Vec<f64>)> {
    (kernel_strategy(), grid_strategy(40))
        .prop_flat_map(|(spec, grid)| {
            let n = grid.len();
            (Just(kernel_gvr(&spec, &grid).unwrap()), prop::collection::vec(1e-3f64..1.0, n))
        })
}

fn gr_strategy() -> impl Strategy<Value = GRMatrix> {
    (1usize..=50, 1usize..=3).prop_flat_map(|(n, p)| {
        let entry = prop_oneof![-1.0f64..-0.05, 0.05f64..1.0];
        (prop::collection::vec(entry.clone(), n * p), prop::collection::vec(entry, n * p)).prop_map(
            move |(u, v)| {
                GRMatrix::new(RowMatrix::from_row_major(n, p, u).unwrap(), RowMatrix::from_row_major(n, p, v).unwrap())
                    .unwrap()
            },
        )
    })
}

fn rel_fro(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).norm() / b.norm()
}

fn assert_normalized(a: &GvRMatrix) -> Result<(), TestCaseError> {
    for i in 0..a.n() - 1 {
        for k in 0..a.rank() {
            let (c, s) = (a.c().get(i, k), a.s().get(i, k));
            prop_assert!((c * c + s * s - 1.0).abs() <= 1e-12, "row {i} col {k}");
        }
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn kernels_are_normalized(spec in kernel_strategy(), grid in grid_strategy(60)) {
        assert_normalized(&kernel_gvr(&spec, &grid).unwrap())?;
        assert_normalized(&gr_to_gvr(&kernel_gr(&spec, &grid).unwrap()))?;
    }

    #[test]
    fn output_kernels_are_normalized(
        lam in 0.2f64..0.95, rho in 0.2f64..0.95, alpha in 0.3f64..1.5, n in 1usize..60
    ) {
        let spec = KernelSpec::Dc { decay: lam, corr: rho };
        let t = (lam * rho).ln() + alpha;
        let d = (lam / rho).ln() + alpha;
        prop_assume!(t.abs() > 1e-6 && d.abs() > 1e-6 && (t + d).abs() > 1e-6);
        let a = output_kernel_gvr(&spec, &InputSignal::exponential_dt(alpha), &TimeGrid::integers(n)).unwrap();
        assert_normalized(&a)?;
    }

    #[test]
    fn conversion_round_trip(gr in gr_strategy()) {
        let a = gr_to_gvr(&gr);
        assert_normalized(&a)?;
        prop_assert!(rel_fro(&gvr_to_dense(&a), &gr_to_dense(&gr)) <= 1e-12);
    }

    #[test]
    fn conversion_suffix_norms(gr in gr_strategy()) {
        // ν̂_i = r_i ν_i below the last row, and r_N = μ_N.
        let a = gr_to_gvr(&gr);
        let (n, p) = (gr.n(), gr.rank());
        for k in 0..p {
            let mu = gr.u().column(k);
            for i in 0..n {
                let v = gr.v().get(i, k);
                let r = if i + 1 == n { mu[i] } else { mu[i..].iter().map(|x| x * x).sum::<f64>().sqrt() };
                prop_assert!((a.nu_hat().get(i, k) - r * v).abs() <= 1e-12 * (r * v).abs().max(1e-300));
            }
        }
    }

    #[test]
    fn cholesky_reconstructs((a, d) in problem_strategy()) {
        let dv = DiagVec::new(d.clone()).unwrap();
        let chol = fastalg::cholesky(&a, &dv).unwrap();
        prop_assert!(chol.f().iter().all(|&f| f > 0.0));
        let l = chol.to_dense();
        let m = gvr_to_dense(&a) + DMatrix::from_diagonal(&DVector::from_vec(d));
        prop_assert!(rel_fro(&(&l * l.transpose()), &m) <= 1e-10);
    }

    #[test]
    fn solve_round_trip((a, d) in problem_strategy(), seed in any::<u64>()) {
        let n = a.n();
        let y: Vec<f64> = (0..n).map(|i| ((seed.wrapping_add(i as u64) % 1000) as f64 / 500.0) - 1.0).collect();
        let chol = fastalg::cholesky(&a, &DiagVec::new(d.clone()).unwrap()).unwrap();
        let x = fastalg::solve(&chol, &y).unwrap();
        let m = gvr_to_dense(&a) + DMatrix::from_diagonal(&DVector::from_vec(d));
        let xv = DVector::from_vec(x);
        let yv = DVector::from_vec(y);
        let resid = (&m * &xv - &yv).norm();
        prop_assert!(resid <= 1e-12 * (m.norm() * xv.norm() + yv.norm()), "{resid:e}");
    }

    #[test]
    fn inverse_factor_identity((a, d) in problem_strategy()) {
        // S̄_i w̄_i = S_i w_i / f_i.
        let dv = DiagVec::new(d).unwrap();
        let chol = fastalg::cholesky(&a, &dv).unwrap();
        let inv = fastalg::inv_chol_rep(&chol, &dv).unwrap();
        let p = a.rank();
        for i in 0..a.n() - 1 {
            let lhs = &inv.s_bar[i] * DVector::from_row_slice(inv.w_bar.row(i));
            for k in 0..p {
                let rhs = a.s().get(i, k) * chol.w().get(i, k) / chol.f()[i];
                prop_assert!((lhs[k] - rhs).abs() <= 1e-12 * (1.0 + rhs.abs()), "i={i} k={k}: {} vs {rhs}", lhs[k]);
            }
        }
    }

    #[test]
    fn diag_inverse_matches_trace_form((a, d) in problem_strategy()) {
        let n = a.n();
        let chol = fastalg::cholesky(&a, &DiagVec::new(d).unwrap()).unwrap();
        let diag: f64 = fastalg::diag_inverse(&chol).iter().sum();
        let tr = fastalg::trace_form(&chol, &GvRMatrix::zero(n, 1), &vec![1.0; n]).unwrap();
        prop_assert!((diag - tr).abs() <= 1e-12 * tr.abs());
    }

    #[test]
    fn trace_form_of_own_matrix_is_n((a, d) in problem_strategy()) {
        let n = a.n();
        let chol = fastalg::cholesky(&a, &DiagVec::new(d.clone()).unwrap()).unwrap();
        let tr = fastalg::trace_form(&chol, &a, &d).unwrap();
        prop_assert!((tr - n as f64).abs() <= 1e-10 * n as f64);
    }

    #[test]
    fn kernels_are_psd(spec in kernel_strategy(), grid in grid_strategy(50)) {
        let k = gvr_to_dense(&kernel_gvr(&spec, &grid).unwrap());
        let scale = k.diagonal().max();
        let eig = k.symmetric_eigenvalues();
        prop_assert!(eig.min() >= -1e-10 * scale);
    }

    #[test]
    fn general_and_equispaced_paths_agree(spec in kernel_strategy(), n in 1usize..50, step in 0.2f64..2.0) {
        let grid = TimeGrid::uniform(n, step).unwrap();
        let a = gvr_to_dense(&kernel_gvr(&spec, &grid).unwrap());
        let b = gvr_to_dense(&kernel_gvr_general(&spec, &grid).unwrap());
        prop_assert!((&a - &b).amax() <= 1e-12 * b.amax());
    }

    #[test]
    fn dc_entries(decay in 0.2f64..1.0, corr in 0.05f64..0.99, grid in grid_strategy(40)) {
        let spec = KernelSpec::Dc { decay, corr };
        let k = gvr_to_dense(&kernel_gvr(&spec, &grid).unwrap());
        let t = grid.as_slice();
        for i in 0..t.len() {
            for j in 0..t.len() {
                let e = decay.powf(t[i] + t[j]) * corr.powf((t[i] - t[j]).abs());
                prop_assert!((k[(i, j)] - e).abs() <= 1e-12 * e.max(f64::MIN_POSITIVE) + 1e-300);
            }
        }
    }

    #[test]
    fn tc_is_dc_with_equal_parameters(corr in 0.05f64..0.99, grid in grid_strategy(40)) {
        let a = gvr_to_dense(&kernel_gvr(&KernelSpec::Tc { corr }, &grid).unwrap());
        let b = gvr_to_dense(&kernel_gvr(&KernelSpec::Dc { decay: corr, corr }, &grid).unwrap());
        prop_assert!((&a - &b).amax() <= 1e-15 * b.amax());
    }
}

#[test]
fn converted_example1_generators_stay_bounded() {
    let gr = kernel_gr(&EXAMPLE1_KERNEL, &TimeGrid::integers(FIXTURE_N)).unwrap();
    let a = gr_to_gvr(&gr);
    let bound = gr.u().max_abs() * gr.v().max_abs() * FIXTURE_N as f64;
    assert!(a.is_finite());
    for m in [a.c(), a.s(), a.nu_hat()] {
        assert!(m.max_abs() <= bound.max(1.0));
    }
}
