//! Double-double evaluation of the two five-point instability fixtures.
//!
//! The first fixture is a DC kernel whose generators span 10⁻⁴⁰…10³⁰; the
//! second is an SS kernel with a tiny regularization, where the generator
//! form of `L⁻¹` is ill-conditioned. About 32 significant digits are carried,
//! which comfortably covers the dynamic range of both.

use nalgebra::DMatrix;
use twofloat::TwoFloat;

use crate::kernels::KernelSpec;

type Dd = TwoFloat;

/// The first fixture: DC kernel, `λ = 0.1`, `ρ = 10⁻⁷`, `t = 1..5`.
pub const EXAMPLE1_KERNEL: KernelSpec = KernelSpec::Dc { decay: 0.1, corr: 1e-7 };
/// The second fixture: SS kernel, `ρ = 0.5`, `t = 1..5`, `γ = 10⁻⁸`.
pub const EXAMPLE2_KERNEL: KernelSpec = KernelSpec::Ss { corr: 0.5 };
pub const EXAMPLE2_GAMMA: f64 = 1e-8;
pub const FIXTURE_N: usize = 5;

/// `x = (−1, 1, −1, 1, −1)`.
pub fn example1_x() -> Vec<f64> {
    (0..FIXTURE_N).map(|i| if i % 2 == 0 { -1.0 } else { 1.0 }).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FixtureId {
    Example1Matvec,
    Example2InvChol,
}

#[derive(Debug, Clone)]
pub struct Example1Reference {
    pub x: Vec<f64>,
    /// `K x` rounded to double.
    pub y: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct Example2Reference {
    /// 2-norm condition number of `M = K + γI`.
    pub kappa_m: f64,
    /// 2-norm condition number of `YᵀW − I₂`.
    pub kappa_yw: f64,
    /// `tril(L⁻¹, −1)` rounded to double.
    pub tril_linv: DMatrix<f64>,
    /// `Y = L⁻¹U` and `Z = L⁻ᵀW(YᵀW − I)⁻¹`, rounded to double.
    pub y_high: DMatrix<f64>,
    pub z_high: DMatrix<f64>,
    /// `|y_i|ᵀ|z_j| / |y_iᵀz_j|` for `j < i`, zero elsewhere.
    pub inner_cond: DMatrix<f64>,
}

#[derive(Debug, Clone)]
pub enum FixtureReference {
    Example1(Example1Reference),
    Example2(Example2Reference),
}

pub fn extended_eval_fixture(id: FixtureId) -> FixtureReference {
    match id {
        FixtureId::Example1Matvec => FixtureReference::Example1(example1_reference()),
        FixtureId::Example2InvChol => FixtureReference::Example2(example2_reference()),
    }
}

fn dd(x: f64) -> Dd {
    Dd::from(x)
}

fn to_f64(x: Dd) -> f64 {
    f64::from(x)
}

/// `10^{−k}` to double-double accuracy.
fn tenth_pow(k: i32) -> Dd {
    dd(10.0).powi(k).recip()
}

pub fn example1_reference() -> Example1Reference {
    let x = example1_x();
    // K(i,j) = 0.1^{i+j} (10⁻⁷)^{|i−j|} = 10^{−(i+j) − 7|i−j|}
    let y = (1..=FIXTURE_N as i32)
        .map(|i| {
            let mut acc = dd(0.0);
            for (j, &xj) in (1..=FIXTURE_N as i32).zip(&x) {
                acc += tenth_pow(i + j + 7 * (i - j).abs()) * dd(xj);
            }
            to_f64(acc)
        })
        .collect();
    Example1Reference { x, y }
}

/// `M = K + γI` for the second fixture in double-double.
fn example2_matrix() -> Vec<Vec<Dd>> {
    let half = dd(0.5);
    let gamma = dd(1.0) / dd(1e8);
    let n = FIXTURE_N;
    let mut m = vec![vec![dd(0.0); n]; n];
    for i in 1..=n {
        for j in 1..=n {
            let mx = i.max(j) as i32;
            let v = half.powi(i as i32 + j as i32 + mx) / dd(2.0) - half.powi(3 * mx) / dd(6.0);
            m[i - 1][j - 1] = if i == j { v + gamma } else { v };
        }
    }
    m
}

/// Generators `U = [−ρ^{3t}/6, ρ^{2t}/2]`, `V = [1, ρ^t]` in double-double.
fn example2_generators() -> (Vec<[Dd; 2]>, Vec<[Dd; 2]>) {
    let half = dd(0.5);
    let u = (1..=FIXTURE_N as i32).map(|t| [-(half.powi(3 * t) / dd(6.0)), half.powi(2 * t) / dd(2.0)]).collect();
    let v = (1..=FIXTURE_N as i32).map(|t| [dd(1.0), half.powi(t)]).collect();
    (u, v)
}

fn dot2(a: &[Dd; 2], b: &[Dd; 2]) -> Dd {
    a[0] * b[0] + a[1] * b[1]
}

pub fn example2_reference() -> Example2Reference {
    let n = FIXTURE_N;
    let gamma = dd(1.0) / dd(1e8);
    let (u, v) = example2_generators();

    // Generator-form Cholesky: c_i² = u_iᵀ(v_i − P u_i) + γ, w_i = (v_i − P u_i)/c_i.
    let mut w = vec![[dd(0.0); 2]; n];
    let mut c = vec![dd(0.0); n];
    let mut p = [[dd(0.0); 2]; 2];
    for i in 0..n {
        let pu = [dot2(&p[0], &u[i]), dot2(&p[1], &u[i])];
        let wt = [v[i][0] - pu[0], v[i][1] - pu[1]];
        let ci = (dot2(&u[i], &wt) + gamma).sqrt();
        c[i] = ci;
        w[i] = [wt[0] / ci, wt[1] / ci];
        for k in 0..2 {
            for l in 0..2 {
                p[k][l] += w[i][k] * w[i][l];
            }
        }
    }
    let l = |i: usize, j: usize| -> Dd {
        if i == j {
            c[i]
        } else if i > j {
            dot2(&u[i], &w[j])
        } else {
            dd(0.0)
        }
    };

    // Y = L⁻¹U by forward substitution.
    let mut y = vec![[dd(0.0); 2]; n];
    for k in 0..2 {
        for i in 0..n {
            let mut acc = u[i][k];
            for j in 0..i {
                acc -= l(i, j) * y[j][k];
            }
            y[i][k] = acc / c[i];
        }
    }
    // X = L⁻ᵀW by backward substitution.
    let mut x = vec![[dd(0.0); 2]; n];
    for k in 0..2 {
        for i in (0..n).rev() {
            let mut acc = w[i][k];
            for j in i + 1..n {
                acc -= l(j, i) * x[j][k];
            }
            x[i][k] = acc / c[i];
        }
    }
    // core = YᵀW − I
    let mut core = [[dd(0.0); 2]; 2];
    for a in 0..2 {
        for b in 0..2 {
            let mut acc = if a == b { dd(-1.0) } else { dd(0.0) };
            for i in 0..n {
                acc += y[i][a] * w[i][b];
            }
            core[a][b] = acc;
        }
    }
    let det = core[0][0] * core[1][1] - core[0][1] * core[1][0];
    let inv = [[core[1][1] / det, -core[0][1] / det], [-core[1][0] / det, core[0][0] / det]];
    let z: Vec<[Dd; 2]> = x
        .iter()
        .map(|xi| [xi[0] * inv[0][0] + xi[1] * inv[1][0], xi[0] * inv[0][1] + xi[1] * inv[1][1]])
        .collect();

    // κ₂ of a 2×2 matrix: σ_max² / |det| with σ_max² from the Frobenius norm.
    let fro2: f64 = core.iter().flatten().map(|&e| to_f64(e * e)).sum();
    let det_abs = to_f64(det).abs();
    let smax2 = 0.5 * (fro2 + (fro2 * fro2 - 4.0 * det_abs * det_abs).max(0.0).sqrt());
    let kappa_yw = smax2 / det_abs;

    // Reference L⁻¹ by column-wise forward substitution on the identity.
    let mut linv = vec![vec![dd(0.0); n]; n];
    for col in 0..n {
        for i in col..n {
            let mut acc = if i == col { dd(1.0) } else { dd(0.0) };
            for j in col..i {
                acc -= l(i, j) * linv[j][col];
            }
            linv[i][col] = acc / c[i];
        }
    }
    let tril_linv = DMatrix::from_fn(n, n, |i, j| if i > j { to_f64(linv[i][j]) } else { 0.0 });

    let inner_cond = DMatrix::from_fn(n, n, |i, j| {
        if i > j {
            let abs = to_f64(y[i][0].abs() * z[j][0].abs() + y[i][1].abs() * z[j][1].abs());
            abs / to_f64(dot2(&y[i], &z[j])).abs()
        } else {
            0.0
        }
    });

    let m = example2_matrix();
    let md = DMatrix::from_fn(n, n, |i, j| to_f64(m[i][j]));
    let ev = md.symmetric_eigenvalues();
    let kappa_m = ev.max() / ev.min();

    Example2Reference {
        kappa_m,
        kappa_yw,
        tril_linv,
        y_high: DMatrix::from_fn(n, 2, |i, k| to_f64(y[i][k])),
        z_high: DMatrix::from_fn(n, 2, |i, k| to_f64(z[i][k])),
        inner_cond,
    }
}
