//! Generator and Givens-vector representations of symmetric semiseparable
//! matrices, the Cholesky and inverse-factor containers built on them, and
//! dense reconstruction for testing.
//!
//! Row `i` of every N×p array is stored contiguously, so the algorithms in
//! [`crate::fastalg`] walk memory linearly.

mod csvio;

use nalgebra::DMatrix;

use crate::error::{check_len, Error, Result};

/// Tolerance for `c² + s² = 1` when validating Givens pairs.
pub const GIVENS_TOL: f64 = 1e-12;

/// Dense row-major N×p array.
#[derive(Debug, Clone, PartialEq)]
pub struct RowMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl RowMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        check_len(rows * cols, data.len())?;
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for k in 0..cols {
                data.push(f(i, k));
            }
        }
        Self { rows, cols, data }
    }

    /// A single-column array.
    pub fn from_column(col: &[f64]) -> Self {
        Self { rows: col.len(), cols: 1, data: col.to_vec() }
    }

    /// Stacks equally long columns side by side.
    pub fn from_columns(cols: &[Vec<f64>]) -> Result<Self> {
        let p = cols.len();
        let n = cols.first().map_or(0, Vec::len);
        for c in cols {
            check_len(n, c.len())?;
        }
        Ok(Self::from_fn(n, p, |i, k| cols[k][i]))
    }

    #[inline]
    pub fn nrows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn ncols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn get(&self, i: usize, k: usize) -> f64 {
        self.data[i * self.cols + k]
    }

    #[inline]
    pub fn set(&mut self, i: usize, k: usize, v: f64) {
        self.data[i * self.cols + k] = v;
    }

    pub fn column(&self, k: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, k)).collect()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    pub fn to_dmatrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }
}

/// Strictly increasing sample times.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    t: Vec<f64>,
    step: Option<f64>,
}

impl TimeGrid {
    pub fn new(t: Vec<f64>) -> Result<Self> {
        if t.is_empty() {
            return Err(Error::InvalidInput("time grid is empty".into()));
        }
        if t.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("time grid has non-finite entries".into()));
        }
        if t.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidInput("time grid is not strictly increasing".into()));
        }
        let step = detect_step(&t);
        Ok(Self { t, step })
    }

    /// `t_i = step·i` for `i = 1..=n`.
    pub fn uniform(n: usize, step: f64) -> Result<Self> {
        if !(step > 0.0) {
            return Err(Error::InvalidInput("grid step must be positive".into()));
        }
        Self::new((1..=n).map(|i| step * i as f64).collect())
    }

    /// The discrete-time lag grid `1, 2, …, n`.
    pub fn integers(n: usize) -> Self {
        Self::uniform(n, 1.0).expect("unit step is valid")
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.t
    }

    /// True when `t_i = T·i` for one positive step `T`.
    pub fn is_equispaced(&self) -> bool {
        self.step.is_some()
    }

    pub fn step(&self) -> Option<f64> {
        self.step
    }

    /// True for the discrete-time grid `1, 2, …, N`.
    pub fn is_unit_lag(&self) -> bool {
        self.step == Some(1.0)
    }
}

fn detect_step(t: &[f64]) -> Option<f64> {
    let step = t[0];
    if step <= 0.0 {
        return None;
    }
    let ok = t.iter().enumerate().all(|(i, &ti)| {
        let expect = step * (i + 1) as f64;
        (ti - expect).abs() <= 1e-12 * expect
    });
    ok.then_some(step)
}

/// Nonnegative diagonal `d` of the regularization term.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagVec(Vec<f64>);

impl DiagVec {
    pub fn new(d: Vec<f64>) -> Result<Self> {
        if let Some(i) = d.iter().position(|x| !x.is_finite() || *x < 0.0) {
            return Err(Error::InvalidInput(format!("diagonal entry {i} is negative or non-finite")));
        }
        Ok(Self(d))
    }

    /// `γ·I` of size n.
    pub fn constant(n: usize, gamma: f64) -> Result<Self> {
        Self::new(vec![gamma; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// Index of the first entry that is not strictly positive.
    pub fn first_nonpositive(&self) -> Option<usize> {
        self.0.iter().position(|&x| x <= 0.0)
    }
}

/// Generator representation `A = tril(UVᵀ) + triu(VUᵀ, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GRMatrix {
    u: RowMatrix,
    v: RowMatrix,
}

impl GRMatrix {
    pub fn new(u: RowMatrix, v: RowMatrix) -> Result<Self> {
        check_len(u.nrows(), v.nrows())?;
        check_len(u.ncols(), v.ncols())?;
        if u.nrows() == 0 || u.ncols() == 0 {
            return Err(Error::InvalidInput("generators must be non-empty".into()));
        }
        if !u.is_finite() || !v.is_finite() {
            return Err(Error::InvalidInput("generators contain NaN or Inf".into()));
        }
        Ok(Self { u, v })
    }

    /// Rank-one generators from two vectors.
    pub fn from_vectors(u: &[f64], v: &[f64]) -> Result<Self> {
        Self::new(RowMatrix::from_column(u), RowMatrix::from_column(v))
    }

    pub fn n(&self) -> usize {
        self.u.nrows()
    }

    pub fn rank(&self) -> usize {
        self.u.ncols()
    }

    pub fn u(&self) -> &RowMatrix {
        &self.u
    }

    pub fn v(&self) -> &RowMatrix {
        &self.v
    }
}

/// Givens-vector representation: `A(i,j) = c_iᵀ S_{i−1}⋯S_j ν̂_j` for `j ≤ i`,
/// with `S_k = diag(s_k)`.
///
/// Row `N` of `s` is stored explicitly as zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct GvRMatrix {
    c: RowMatrix,
    s: RowMatrix,
    nu_hat: RowMatrix,
}

impl GvRMatrix {
    pub fn new(c: RowMatrix, s: RowMatrix, nu_hat: RowMatrix) -> Result<Self> {
        let (n, p) = (c.nrows(), c.ncols());
        check_len(n, s.nrows())?;
        check_len(n, nu_hat.nrows())?;
        check_len(p, s.ncols())?;
        check_len(p, nu_hat.ncols())?;
        if n == 0 || p == 0 {
            return Err(Error::InvalidInput("representation must be non-empty".into()));
        }
        if !c.is_finite() || !s.is_finite() || !nu_hat.is_finite() {
            return Err(Error::InvalidInput("representation contains NaN or Inf".into()));
        }
        for i in 0..n - 1 {
            for k in 0..p {
                let (ci, si) = (c.get(i, k), s.get(i, k));
                if (ci * ci + si * si - 1.0).abs() > GIVENS_TOL {
                    return Err(Error::InvalidInput(format!(
                        "row {i}, column {k}: c² + s² = {} is not 1",
                        ci * ci + si * si
                    )));
                }
            }
        }
        if s.row(n - 1).iter().any(|&x| x != 0.0) {
            return Err(Error::InvalidInput("last row of s must be zero".into()));
        }
        Ok(Self { c, s, nu_hat })
    }

    /// The zero matrix: `c = 1`, `s = 0`, `ν̂ = 0`.
    pub fn zero(n: usize, p: usize) -> Self {
        Self {
            c: RowMatrix::from_fn(n, p, |_, _| 1.0),
            s: RowMatrix::zeros(n, p),
            nu_hat: RowMatrix::zeros(n, p),
        }
    }

    pub fn n(&self) -> usize {
        self.c.nrows()
    }

    pub fn rank(&self) -> usize {
        self.c.ncols()
    }

    pub fn c(&self) -> &RowMatrix {
        &self.c
    }

    pub fn s(&self) -> &RowMatrix {
        &self.s
    }

    pub fn nu_hat(&self) -> &RowMatrix {
        &self.nu_hat
    }

    pub fn is_finite(&self) -> bool {
        self.c.is_finite() && self.s.is_finite() && self.nu_hat.is_finite()
    }
}

/// Converts generators to Givens-vector form by a backward Givens sweep per
/// column.
///
/// The suffix norm `r_i = hypot(μ_i, r_{i+1})` starts from the signed value
/// `r_N = μ_N`, so `c_N = 1` and `ν̂_N = μ_N ν_N` while the sign of `μ_N`
/// travels through `s_{N−1}`.
pub fn gr_to_gvr(gr: &GRMatrix) -> GvRMatrix {
    let (n, p) = (gr.n(), gr.rank());
    let (u, v) = (gr.u(), gr.v());
    let mut c = RowMatrix::zeros(n, p);
    let mut s = RowMatrix::zeros(n, p);
    let mut nu_hat = RowMatrix::zeros(n, p);
    for k in 0..p {
        let mut r_next = u.get(n - 1, k);
        c.set(n - 1, k, 1.0);
        nu_hat.set(n - 1, k, r_next * v.get(n - 1, k));
        for i in (0..n - 1).rev() {
            let mu = u.get(i, k);
            let r = mu.hypot(r_next);
            if r == 0.0 {
                c.set(i, k, 1.0);
            } else {
                c.set(i, k, mu / r);
                s.set(i, k, r_next / r);
                nu_hat.set(i, k, v.get(i, k) * r);
            }
            r_next = r;
        }
    }
    GvRMatrix { c, s, nu_hat }
}

/// Dense reconstruction of a Givens-vector matrix in O(N²p).
pub fn gvr_to_dense(a: &GvRMatrix) -> DMatrix<f64> {
    let (n, p) = (a.n(), a.rank());
    let mut out = DMatrix::zeros(n, n);
    let mut prod = vec![0.0; p];
    for j in 0..n {
        prod.copy_from_slice(a.nu_hat().row(j));
        for i in j..n {
            if i > j {
                for (x, s) in prod.iter_mut().zip(a.s().row(i - 1)) {
                    *x *= s;
                }
            }
            let v = dot(a.c().row(i), &prod);
            out[(i, j)] = v;
            out[(j, i)] = v;
        }
    }
    out
}

/// Dense reconstruction `tril(UVᵀ) + triu(VUᵀ, 1)`.
pub fn gr_to_dense(gr: &GRMatrix) -> DMatrix<f64> {
    let n = gr.n();
    let mut out = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let v = dot(gr.u().row(i), gr.v().row(j));
            out[(i, j)] = v;
            out[(j, i)] = v;
        }
    }
    out
}

/// Cholesky factor `L` of `A + D` sharing `(c, s)` with `A`:
/// `L(i,i) = f_i` and `L(i,j) = c_iᵀ S_{i−1}⋯S_j w_j` for `j < i`.
#[derive(Debug, Clone)]
pub struct GvRCholesky<'a> {
    pub(crate) a: &'a GvRMatrix,
    pub(crate) w: RowMatrix,
    pub(crate) f: Vec<f64>,
}

impl<'a> GvRCholesky<'a> {
    /// Assembles a factor from precomputed parts; `w` has one row per index
    /// (the last row is never read by the products).
    pub fn from_parts(a: &'a GvRMatrix, w: RowMatrix, f: Vec<f64>) -> Result<Self> {
        check_len(a.n(), w.nrows())?;
        check_len(a.rank(), w.ncols())?;
        check_len(a.n(), f.len())?;
        if let Some(i) = f.iter().position(|x| !(*x > 0.0) || !x.is_finite()) {
            return Err(Error::NotPositiveDefinite { index: i });
        }
        Ok(Self { a, w, f })
    }

    pub fn n(&self) -> usize {
        self.f.len()
    }

    pub fn rank(&self) -> usize {
        self.w.ncols()
    }

    pub fn source(&self) -> &'a GvRMatrix {
        self.a
    }

    pub fn c(&self) -> &RowMatrix {
        self.a.c()
    }

    pub fn s(&self) -> &RowMatrix {
        self.a.s()
    }

    pub fn w(&self) -> &RowMatrix {
        &self.w
    }

    pub fn f(&self) -> &[f64] {
        &self.f
    }

    /// Dense lower-triangular `L`, O(N²p).
    pub fn to_dense(&self) -> DMatrix<f64> {
        let (n, p) = (self.n(), self.rank());
        let mut out = DMatrix::zeros(n, n);
        let mut prod = vec![0.0; p];
        for j in 0..n {
            out[(j, j)] = self.f[j];
            prod.copy_from_slice(self.w.row(j));
            for i in j + 1..n {
                for (x, s) in prod.iter_mut().zip(self.s().row(i - 1)) {
                    *x *= s;
                }
                out[(i, j)] = dot(self.c().row(i), &prod);
            }
        }
        out
    }
}

/// Implicit representation of `L⁻¹`:
/// `L⁻¹(i,i) = f̄_i` and `L⁻¹(i,j) = c̄_iᵀ S̄_{i−1}⋯S̄_j w̄_j` for `j < i`,
/// with `S̄_k = S_k (I − w_k c_kᵀ / f_k)`.
#[derive(Debug, Clone)]
pub struct InvCholRep {
    pub c_bar: RowMatrix,
    /// `S̄_1 … S̄_{N−1}`, each p×p.
    pub s_bar: Vec<DMatrix<f64>>,
    /// `w̄_1 … w̄_{N−1}`.
    pub w_bar: RowMatrix,
    pub f_bar: Vec<f64>,
}

impl InvCholRep {
    pub fn n(&self) -> usize {
        self.f_bar.len()
    }

    /// Dense lower-triangular `L⁻¹`, O(N²p²).
    pub fn to_dense_lower(&self) -> DMatrix<f64> {
        let n = self.n();
        let p = self.c_bar.ncols();
        let mut out = DMatrix::zeros(n, n);
        for j in 0..n {
            out[(j, j)] = self.f_bar[j];
            if j + 1 == n {
                continue;
            }
            // x = S̄_j w̄_j, then S̄_{i−1} x for later rows.
            let mut x = &self.s_bar[j] * nalgebra::DVector::from_row_slice(self.w_bar.row(j));
            for i in j + 1..n {
                if i > j + 1 {
                    x = &self.s_bar[i - 1] * x;
                }
                let mut v = 0.0;
                for k in 0..p {
                    v += self.c_bar.get(i, k) * x[k];
                }
                out[(i, j)] = v;
            }
        }
        out
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
