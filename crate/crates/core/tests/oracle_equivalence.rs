//! Structured algorithms against the dense O(N³) oracle on random instances
//! of every kernel family.

use gvr_core::fastalg;
use gvr_core::kernels::{kernel_gvr, output_kernel_gvr, InputSignal, KernelSpec};
use gvr_core::oracle::{dense_kernel, dense_output_kernel};
use gvr_core::repkit::{DiagVec, GvRMatrix, TimeGrid};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const RTOL: f64 = 1e-8;
const SIZES: [usize; 4] = [5, 20, 100, 200];
const GAMMAS: [f64; 3] = [1e-6, 1e-3, 1.0];
const DRAWS: usize = 9;

#[derive(Clone, Copy, Debug)]
enum Family {
    Dc,
    Tc,
    Ss,
    OutputDc,
}

fn draw(family: Family, rng: &mut ChaCha8Rng, n: usize) -> (KernelSpec, GvRMatrix, DMatrix<f64>) {
    let grid = TimeGrid::integers(n);
    match family {
        Family::Dc => {
            let spec = KernelSpec::Dc { decay: rng.random_range(0.2..0.99), corr: rng.random_range(0.2..0.99) };
            (spec, kernel_gvr(&spec, &grid).unwrap(), dense_kernel(&spec, &grid).unwrap())
        }
        Family::Tc => {
            let spec = KernelSpec::Tc { corr: rng.random_range(0.2..0.99) };
            (spec, kernel_gvr(&spec, &grid).unwrap(), dense_kernel(&spec, &grid).unwrap())
        }
        Family::Ss => {
            let spec = KernelSpec::Ss { corr: rng.random_range(0.2..0.99) };
            (spec, kernel_gvr(&spec, &grid).unwrap(), dense_kernel(&spec, &grid).unwrap())
        }
        Family::OutputDc => {
            let spec = KernelSpec::Dc { decay: rng.random_range(0.2..0.99), corr: rng.random_range(0.2..0.99) };
            let input = InputSignal::exponential_dt(rng.random_range(0.3..1.5));
            (
                spec,
                output_kernel_gvr(&spec, &input, &grid).unwrap(),
                dense_output_kernel(&spec, &input, &grid).unwrap(),
            )
        }
    }
}

fn rel(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
    let den: f64 = b.iter().map(|y| y * y).sum();
    (num / den).sqrt()
}

fn check_family(family: Family, seed: u64) -> usize {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut count = 0;
    for &n in &SIZES {
        for &gamma in &GAMMAS {
            for _ in 0..DRAWS {
                let (spec, a, dense) = draw(family, &mut rng, n);
                let ctx = format!("{family:?} {spec:?} n={n} γ={gamma}");
                let x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
                let xv = DVector::from_column_slice(&x);

                let y = fastalg::matvec(&a, &x).unwrap();
                assert!(rel(&y, (&dense * &xv).as_slice()) < RTOL, "matvec {ctx}");

                let d = DiagVec::constant(n, gamma).unwrap();
                let m = &dense + DMatrix::identity(n, n) * gamma;
                let chol = fastalg::cholesky(&a, &d).unwrap();
                let l_ref = m.clone().cholesky().expect("oracle factorization").unpack();
                let l = chol.to_dense();
                assert!((&l - &l_ref).norm() < RTOL * l_ref.norm(), "cholesky {ctx}");

                let z = fastalg::solve_lower(&chol, &x).unwrap();
                let z_ref = l_ref.solve_lower_triangular(&xv).unwrap();
                assert!(rel(&z, z_ref.as_slice()) < RTOL, "solve_lower {ctx}");
                let w = fastalg::solve_upper(&chol, &x).unwrap();
                let w_ref = l_ref.tr_solve_lower_triangular(&xv).unwrap();
                assert!(rel(&w, w_ref.as_slice()) < RTOL, "solve_upper {ctx}");
                let s = fastalg::solve(&chol, &x).unwrap();
                let s_ref = l_ref.tr_solve_lower_triangular(&z_ref).unwrap();
                assert!(rel(&s, s_ref.as_slice()) < RTOL, "solve {ctx}");

                let ld_ref = 2.0 * l_ref.diagonal().iter().map(|v| v.ln()).sum::<f64>();
                assert!((fastalg::logdet(&chol) - ld_ref).abs() < RTOL * (1.0 + ld_ref.abs()), "logdet {ctx}");

                let minv = m.clone().cholesky().unwrap().inverse();
                let di = fastalg::diag_inverse(&chol);
                assert!(rel(&di, minv.diagonal().as_slice()) < RTOL, "diag_inverse {ctx}");

                // tr(M⁻¹(Ã + D̃)) with an unrelated SS kernel and a random diagonal.
                let other = KernelSpec::Ss { corr: rng.random_range(0.3..0.95) };
                let grid = TimeGrid::integers(n);
                let at = kernel_gvr(&other, &grid).unwrap();
                let dt: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..2.0)).collect();
                let tf = fastalg::trace_form(&chol, &at, &dt).unwrap();
                let tf_ref = (&minv * (dense_kernel(&other, &grid).unwrap() + DMatrix::from_diagonal(&DVector::from_vec(dt))))
                    .trace();
                assert!((tf - tf_ref).abs() < RTOL * tf_ref.abs(), "trace_form {ctx}: {tf} vs {tf_ref}");
                count += 1;
            }
        }
    }
    count
}

#[test]
fn dc_family() {
    assert!(check_family(Family::Dc, 1) >= 100);
}

#[test]
fn tc_family() {
    assert!(check_family(Family::Tc, 2) >= 100);
}

#[test]
fn ss_family() {
    assert!(check_family(Family::Ss, 3) >= 100);
}

#[test]
fn output_kernel_family() {
    assert!(check_family(Family::OutputDc, 4) >= 100);
}
