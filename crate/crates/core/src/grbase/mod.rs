//! Generator-based baselines: `Ax` by partial sums, the Cholesky factor
//! `L = tril(UWᵀ, −1) + diag(c)` of `A + D`, and `L⁻¹ = tril(YZᵀ, −1) + diag(1/c)`
//! with `Y = L⁻¹U`, `Z = L⁻ᵀW(YᵀW − I)⁻¹`.
//!
//! These are the reference points for the stability comparison. Overflow,
//! cancellation and NaN are deliberately allowed to propagate.

use nalgebra::DMatrix;

use crate::error::{check_len, Error, Result};
use crate::repkit::{dot, DiagVec, GRMatrix, RowMatrix};

/// Condition number above which `YᵀW − I` counts as singular.
pub const YW_COND_LIMIT: f64 = 1e15;

/// `y = A x` through the running sums `μ̄_i = Σ_{j>i} μ_j x_j` and
/// `ν̄_i = Σ_{j≤i} ν_j x_j`, with `y_i = μ_iᵀν̄_i + ν_iᵀμ̄_i`.
pub fn gr_matvec(gr: &GRMatrix, x: &[f64]) -> Result<Vec<f64>> {
    let (n, p) = (gr.n(), gr.rank());
    check_len(n, x.len())?;
    let (u, v) = (gr.u(), gr.v());
    let mut mu_bar = vec![0.0; p];
    for i in 0..n {
        for k in 0..p {
            mu_bar[k] += u.get(i, k) * x[i];
        }
    }
    let mut nu_bar = vec![0.0; p];
    let mut y = vec![0.0; n];
    for i in 0..n {
        for k in 0..p {
            mu_bar[k] -= u.get(i, k) * x[i];
            nu_bar[k] += v.get(i, k) * x[i];
        }
        y[i] = dot(u.row(i), &nu_bar) + dot(v.row(i), &mu_bar);
    }
    Ok(y)
}

/// `L = tril(UWᵀ, −1) + diag(c)` with `L Lᵀ = A + D`.
#[derive(Debug, Clone)]
pub struct GrCholesky<'a> {
    gr: &'a GRMatrix,
    w: RowMatrix,
    diag: Vec<f64>,
}

/// Cholesky factor in generator form. With `P_i = Σ_{j<i} w_j w_jᵀ`:
/// `c_i² = u_iᵀ(v_i − P_i u_i) + d_i` and `w_i = (v_i − P_i u_i)/c_i`.
pub fn gr_cholesky<'a>(gr: &'a GRMatrix, d: &DiagVec) -> Result<GrCholesky<'a>> {
    let (n, p) = (gr.n(), gr.rank());
    check_len(n, d.len())?;
    let (u, v) = (gr.u(), gr.v());
    let d = d.as_slice();
    let mut w = RowMatrix::zeros(n, p);
    let mut diag = vec![0.0; n];
    let mut pm = vec![0.0; p * p];
    for i in 0..n {
        let ui = u.row(i);
        let wi = w.row_mut(i);
        for k in 0..p {
            wi[k] = v.get(i, k) - dot(&pm[k * p..(k + 1) * p], ui);
        }
        let rad = dot(ui, wi) + d[i];
        let scale = dot(ui, v.row(i)).abs() + d[i];
        if !rad.is_finite() || rad <= crate::fastalg::PD_EPS * scale {
            return Err(Error::NotPositiveDefinite { index: i });
        }
        let ci = rad.sqrt();
        diag[i] = ci;
        for x in wi.iter_mut() {
            *x /= ci;
        }
        for k in 0..p {
            for l in 0..p {
                pm[k * p + l] += wi[k] * wi[l];
            }
        }
    }
    Ok(GrCholesky { gr, w, diag })
}

impl GrCholesky<'_> {
    pub fn n(&self) -> usize {
        self.diag.len()
    }

    pub fn u(&self) -> &RowMatrix {
        self.gr.u()
    }

    pub fn w(&self) -> &RowMatrix {
        &self.w
    }

    /// Diagonal `c` of `L`.
    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn logdet(&self) -> f64 {
        2.0 * self.diag.iter().map(|c| c.ln()).sum::<f64>()
    }

    /// Solves `L x = b`.
    pub fn solve_lower(&self, b: &[f64]) -> Result<Vec<f64>> {
        check_len(self.n(), b.len())?;
        Ok(self.forward_from(b, 0))
    }

    /// Solves `Lᵀ x = b`.
    pub fn solve_upper(&self, b: &[f64]) -> Result<Vec<f64>> {
        let (n, p) = (self.n(), self.w.ncols());
        check_len(n, b.len())?;
        let u = self.u();
        let mut x = vec![0.0; n];
        let mut chi = vec![0.0; p];
        for i in (0..n).rev() {
            x[i] = (b[i] - dot(self.w.row(i), &chi)) / self.diag[i];
            for (h, &uk) in chi.iter_mut().zip(u.row(i)) {
                *h += uk * x[i];
            }
        }
        Ok(x)
    }

    /// `(A + D)⁻¹ b`.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        self.solve_upper(&self.solve_lower(b)?)
    }

    /// Forward substitution with `b` zero above `start`; entries before
    /// `start` of the result are zero.
    fn forward_from(&self, b: &[f64], start: usize) -> Vec<f64> {
        let (n, p) = (self.n(), self.w.ncols());
        let u = self.u();
        let mut x = vec![0.0; n];
        let mut chi = vec![0.0; p];
        for i in start..n {
            x[i] = (b[i] - dot(u.row(i), &chi)) / self.diag[i];
            for (h, &wk) in chi.iter_mut().zip(self.w.row(i)) {
                *h += wk * x[i];
            }
        }
        x
    }

    /// Dense `L`.
    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.n();
        DMatrix::from_fn(n, n, |i, j| match i.cmp(&j) {
            std::cmp::Ordering::Equal => self.diag[i],
            std::cmp::Ordering::Greater => dot(self.u().row(i), self.w.row(j)),
            std::cmp::Ordering::Less => 0.0,
        })
    }

    fn solve_lower_block(&self, b: &RowMatrix) -> RowMatrix {
        let cols: Vec<Vec<f64>> = (0..b.ncols()).map(|k| self.forward_from(&b.column(k), 0)).collect();
        RowMatrix::from_columns(&cols).expect("equal lengths")
    }

    fn solve_upper_block(&self, b: &RowMatrix) -> RowMatrix {
        let cols: Vec<Vec<f64>> =
            (0..b.ncols()).map(|k| self.solve_upper(&b.column(k)).expect("length checked")).collect();
        RowMatrix::from_columns(&cols).expect("equal lengths")
    }
}

/// Generators of `L⁻¹ = tril(YZᵀ, −1) + diag(1/c)`.
#[derive(Debug, Clone)]
pub struct GrInverse {
    pub y: RowMatrix,
    pub z: RowMatrix,
    pub inv_diag: Vec<f64>,
    /// 2-norm condition number of `YᵀW − I`.
    pub cond_yw: f64,
}

impl GrInverse {
    /// Computes the inverse generators without a conditioning check; a singular
    /// `YᵀW − I` yields non-finite `Z`.
    pub fn compute(chol: &GrCholesky) -> Self {
        let p = chol.w.ncols();
        let y = chol.solve_lower_block(chol.u());
        let core = y.to_dmatrix().transpose() * chol.w.to_dmatrix() - DMatrix::identity(p, p);
        let cond_yw = cond2(&core);
        let x = chol.solve_upper_block(&chol.w).to_dmatrix();
        let z = match core.clone().try_inverse() {
            Some(inv) => x * inv,
            None => DMatrix::from_element(chol.n(), p, f64::NAN),
        };
        let z = RowMatrix::from_fn(chol.n(), p, |i, k| z[(i, k)]);
        let inv_diag = chol.diag.iter().map(|c| 1.0 / c).collect();
        Self { y, z, inv_diag, cond_yw }
    }

    pub fn n(&self) -> usize {
        self.inv_diag.len()
    }

    /// `tr((A+D)⁻¹) = ‖L⁻¹‖_F² = Σ 1/c_i² + Σ_i y_iᵀ (Σ_{j<i} z_j z_jᵀ) y_i`, O(Np²).
    pub fn trace_inverse(&self) -> f64 {
        let p = self.y.ncols();
        let mut acc = vec![0.0; p * p];
        let mut total = 0.0;
        for i in 0..self.n() {
            let yi = self.y.row(i);
            let mut quad = 0.0;
            for k in 0..p {
                quad += yi[k] * dot(&acc[k * p..(k + 1) * p], yi);
            }
            total += self.inv_diag[i] * self.inv_diag[i] + quad;
            let zi = self.z.row(i);
            for k in 0..p {
                for l in 0..p {
                    acc[k * p + l] += zi[k] * zi[l];
                }
            }
        }
        total
    }

    /// Dense `tril(L⁻¹, −1) = tril(YZᵀ, −1)`.
    pub fn strict_lower_dense(&self) -> DMatrix<f64> {
        let n = self.n();
        DMatrix::from_fn(n, n, |i, j| if i > j { dot(self.y.row(i), self.z.row(j)) } else { 0.0 })
    }
}

/// Inverse generators, failing with [`Error::SingularYW`] when `YᵀW − I` is
/// numerically singular.
pub fn gr_inv_chol(chol: &GrCholesky) -> Result<GrInverse> {
    let inv = GrInverse::compute(chol);
    if !(inv.cond_yw <= YW_COND_LIMIT) {
        return Err(Error::SingularYW { cond: inv.cond_yw });
    }
    Ok(inv)
}

/// `tr((A+D)⁻¹) = Σ_i ‖L⁻¹ e_i‖²` column by column, O(N²p).
pub fn gr_trace_inv_columnwise(chol: &GrCholesky) -> f64 {
    let n = chol.n();
    let mut e = vec![0.0; n];
    let mut total = 0.0;
    for i in 0..n {
        e[i] = 1.0;
        let x = chol.forward_from(&e, i);
        total += x[i..].iter().map(|v| v * v).sum::<f64>();
        e[i] = 0.0;
    }
    total
}

fn cond2(m: &DMatrix<f64>) -> f64 {
    if !m.iter().all(|x| x.is_finite()) {
        return f64::NAN;
    }
    let sv = m.clone().singular_values();
    let max = sv.max();
    let min = sv.min();
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}
