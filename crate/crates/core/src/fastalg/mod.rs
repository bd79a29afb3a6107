//! O(Np) and O(Np²) algorithms on Givens-vector matrices: `Ax`, the Cholesky
//! factor of `A + D`, triangular products and solves with it, the implicit
//! inverse factor, `diag((A+D)⁻¹)` and `tr((A+D)⁻¹(Ã+D̃))`.
//!
//! Every routine is a single forward or backward sweep carrying a p-vector
//! `χ` or p×p matrices `P`, `R`; workspaces are allocated once per call.

pub mod counters;

use nalgebra::DMatrix;

use crate::error::{check_len, Error, Result};
use crate::repkit::{dot, DiagVec, GvRCholesky, GvRMatrix, InvCholRep, RowMatrix};

/// Relative breakdown threshold of the Cholesky radicand.
pub const PD_EPS: f64 = 1e-14;

/// `z = A x` in O(Np).
pub fn matvec(a: &GvRMatrix, x: &[f64]) -> Result<Vec<f64>> {
    let (n, p) = (a.n(), a.rank());
    check_len(n, x.len())?;
    let (c, s, nu) = (a.c(), a.s(), a.nu_hat());
    let mut z = vec![0.0; n];
    let mut chi = vec![0.0; p];
    for i in 0..n {
        let ci = c.row(i);
        z[i] = dot(ci, &chi) + x[i] * dot(ci, nu.row(i));
        if i + 1 < n {
            for ((h, &sk), &vk) in chi.iter_mut().zip(s.row(i)).zip(nu.row(i)) {
                *h = sk * (*h + vk * x[i]);
            }
        }
    }
    chi.fill(0.0);
    for i in (0..n).rev() {
        z[i] += dot(nu.row(i), &chi);
        if i > 0 {
            for ((h, &sk), &ck) in chi.iter_mut().zip(s.row(i - 1)).zip(c.row(i)) {
                *h = sk * (*h + ck * x[i]);
            }
        }
    }
    counters::tick(2 * n * p);
    Ok(z)
}

/// Cholesky factor of `A + D` sharing the rotations of `A`.
///
/// Fails with [`Error::NotPositiveDefinite`] when the radicand at some index is
/// not finite or falls below `PD_EPS·(|c_iᵀν̂_i| + d_i)`.
pub fn cholesky<'a>(a: &'a GvRMatrix, d: &DiagVec) -> Result<GvRCholesky<'a>> {
    let (n, p) = (a.n(), a.rank());
    check_len(n, d.len())?;
    let (c, s, nu) = (a.c(), a.s(), a.nu_hat());
    let d = d.as_slice();
    let mut w = RowMatrix::zeros(n, p);
    let mut f = vec![0.0; n];
    let mut pm = vec![0.0; p * p];
    for i in 0..n {
        let ci = c.row(i);
        let wi = w.row_mut(i);
        for k in 0..p {
            wi[k] = nu.get(i, k) - dot(&pm[k * p..(k + 1) * p], ci);
        }
        let rad = dot(ci, wi) + d[i];
        let scale = dot(ci, nu.row(i)).abs() + d[i];
        if !rad.is_finite() || rad <= PD_EPS * scale {
            return Err(Error::NotPositiveDefinite { index: i });
        }
        let fi = rad.sqrt();
        f[i] = fi;
        for x in wi.iter_mut() {
            *x /= fi;
        }
        if i + 1 < n {
            let si = s.row(i);
            for k in 0..p {
                for l in 0..p {
                    let v = &mut pm[k * p + l];
                    *v = si[k] * si[l] * (wi[k] * wi[l] + *v);
                }
            }
        }
    }
    counters::tick(n * p * p);
    GvRCholesky::from_parts(a, w, f)
}

/// `log det(A + D) = 2 Σ ln f_i`.
pub fn logdet(chol: &GvRCholesky) -> f64 {
    2.0 * chol.f().iter().map(|f| f.ln()).sum::<f64>()
}

/// `y = L x`.
pub fn tri_matvec_lower(chol: &GvRCholesky, x: &[f64]) -> Result<Vec<f64>> {
    let (n, p) = (chol.n(), chol.rank());
    check_len(n, x.len())?;
    let (c, s, w, f) = (chol.c(), chol.s(), chol.w(), chol.f());
    let mut y = vec![0.0; n];
    let mut chi = vec![0.0; p];
    for i in 0..n {
        y[i] = dot(c.row(i), &chi) + f[i] * x[i];
        if i + 1 < n {
            advance(&mut chi, s.row(i), w.row(i), x[i]);
        }
    }
    counters::tick(n * p);
    Ok(y)
}

/// `y = Lᵀ x`.
pub fn tri_matvec_upper(chol: &GvRCholesky, x: &[f64]) -> Result<Vec<f64>> {
    let (n, p) = (chol.n(), chol.rank());
    check_len(n, x.len())?;
    let (c, s, w, f) = (chol.c(), chol.s(), chol.w(), chol.f());
    let mut y = vec![0.0; n];
    let mut chi = vec![0.0; p];
    for i in (0..n).rev() {
        y[i] = dot(w.row(i), &chi) + f[i] * x[i];
        if i > 0 {
            advance(&mut chi, s.row(i - 1), c.row(i), x[i]);
        }
    }
    counters::tick(n * p);
    Ok(y)
}

/// Solves `L x = y` by forward substitution.
pub fn solve_lower(chol: &GvRCholesky, y: &[f64]) -> Result<Vec<f64>> {
    let (n, p) = (chol.n(), chol.rank());
    check_len(n, y.len())?;
    let (c, s, w, f) = (chol.c(), chol.s(), chol.w(), chol.f());
    let mut x = vec![0.0; n];
    let mut chi = vec![0.0; p];
    for i in 0..n {
        x[i] = (y[i] - dot(c.row(i), &chi)) / f[i];
        if i + 1 < n {
            advance(&mut chi, s.row(i), w.row(i), x[i]);
        }
    }
    counters::tick(n * p);
    Ok(x)
}

/// Solves `Lᵀ x = y` by backward substitution.
pub fn solve_upper(chol: &GvRCholesky, y: &[f64]) -> Result<Vec<f64>> {
    let (n, p) = (chol.n(), chol.rank());
    check_len(n, y.len())?;
    let (c, s, w, f) = (chol.c(), chol.s(), chol.w(), chol.f());
    let mut x = vec![0.0; n];
    let mut chi = vec![0.0; p];
    for i in (0..n).rev() {
        x[i] = (y[i] - dot(w.row(i), &chi)) / f[i];
        if i > 0 {
            advance(&mut chi, s.row(i - 1), c.row(i), x[i]);
        }
    }
    counters::tick(n * p);
    Ok(x)
}

/// `(A + D)⁻¹ y` through the two triangular solves.
pub fn solve(chol: &GvRCholesky, y: &[f64]) -> Result<Vec<f64>> {
    solve_upper(chol, &solve_lower(chol, y)?)
}

/// `χ ← s ∘ (χ + v·x)`
#[inline]
fn advance(chi: &mut [f64], s: &[f64], v: &[f64], x: f64) {
    for ((h, &sk), &vk) in chi.iter_mut().zip(s).zip(v) {
        *h = sk * (*h + vk * x);
    }
}

/// Implicit representation of `L⁻¹`. The inverse `(I − w cᵀ/f)⁻¹` is applied
/// through the rank-one formula with `f − cᵀw = d/f`, so strictly positive
/// `d` is required.
pub fn inv_chol_rep(chol: &GvRCholesky, d: &DiagVec) -> Result<InvCholRep> {
    let (n, p) = (chol.n(), chol.rank());
    check_len(n, d.len())?;
    if let Some(index) = d.first_nonpositive() {
        return Err(Error::DegenerateDiagonal { index });
    }
    let (c, s, w, f) = (chol.c(), chol.s(), chol.w(), chol.f());
    let d = d.as_slice();
    let c_bar = RowMatrix::from_fn(n, p, |i, k| -c.get(i, k) / f[i]);
    let f_bar = f.iter().map(|x| 1.0 / x).collect();
    let mut s_bar = Vec::with_capacity(n.saturating_sub(1));
    let mut w_bar = RowMatrix::zeros(n.saturating_sub(1), p);
    for i in 0..n.saturating_sub(1) {
        let (ci, si, wi, fi) = (c.row(i), s.row(i), w.row(i), f[i]);
        s_bar.push(DMatrix::from_fn(p, p, |k, l| {
            si[k] * ((k == l) as u8 as f64 - wi[k] * ci[l] / fi)
        }));
        // w̄ = (I − w cᵀ/f)⁻¹ w / f = w / (f − cᵀw) = w·f/d.
        let scale = fi / d[i];
        for (o, &x) in w_bar.row_mut(i).iter_mut().zip(wi) {
            *o = x * scale;
        }
    }
    counters::tick(n * p * p);
    Ok(InvCholRep { c_bar, s_bar, w_bar, f_bar })
}

/// Diagonal of `(A + D)⁻¹` in one backward sweep, without forming `L⁻¹`.
pub fn diag_inverse(chol: &GvRCholesky) -> Vec<f64> {
    let (n, p) = (chol.n(), chol.rank());
    let (c, s, w, f) = (chol.c(), chol.s(), chol.w(), chol.f());
    let mut b = vec![0.0; n];
    let mut pm = vec![0.0; p * p];
    let mut rm = vec![0.0; p * p];
    let mut pv = vec![0.0; p];
    b[n - 1] = 1.0 / (f[n - 1] * f[n - 1]);
    for i in (0..n - 1).rev() {
        let cn = c.row(i + 1);
        let (bn, fn_inv) = (b[i + 1], 1.0 / f[i + 1]);
        for k in 0..p {
            for l in 0..p {
                pm[k * p + l] = bn * cn[k] * cn[l] - fn_inv * (cn[k] * pv[l] + pv[k] * cn[l]) + rm[k * p + l];
            }
        }
        let si = s.row(i);
        for k in 0..p {
            for l in 0..p {
                rm[k * p + l] = si[k] * pm[k * p + l] * si[l];
            }
        }
        let wi = w.row(i);
        for k in 0..p {
            pv[k] = dot(&rm[k * p..(k + 1) * p], wi);
        }
        b[i] = (1.0 + dot(wi, &pv)) / (f[i] * f[i]);
    }
    counters::tick(n * p * p);
    b
}

/// `tr((A + D)⁻¹ (Ã + D̃))` for any rank of `Ã`, in O(N p p̃).
pub fn trace_form(chol: &GvRCholesky, atilde: &GvRMatrix, dtilde: &[f64]) -> Result<f64> {
    let (n, p) = (chol.n(), chol.rank());
    check_len(n, atilde.n())?;
    check_len(n, dtilde.len())?;
    let pt = atilde.rank();
    let (c, s, w, f) = (chol.c(), chol.s(), chol.w(), chol.f());
    let (ct, st, nut) = (atilde.c(), atilde.s(), atilde.nu_hat());
    // P is p×p, R is p̃×p, both row-major.
    let mut pm = vec![0.0; p * p];
    let mut rm = vec![0.0; pt * p];
    let mut pv = vec![0.0; p];
    let mut rv = vec![0.0; p];
    let mut tmp = vec![0.0; pt];
    let mut total = 0.0;
    for i in 0..n {
        let (ci, wi, fi) = (c.row(i), w.row(i), f[i]);
        let (cti, nti) = (ct.row(i), nut.row(i));
        for k in 0..p {
            pv[k] = dot(&pm[k * p..(k + 1) * p], ci);
            rv[k] = (0..pt).map(|m| rm[m * p + k] * cti[m]).sum();
        }
        let q = (dot(ci, &pv) - 2.0 * dot(&rv, ci) + dot(cti, nti) + dtilde[i]) / (fi * fi);
        total += q;
        if i + 1 == n {
            break;
        }
        let (si, sti) = (s.row(i), st.row(i));
        // R ← S̃ [R + (ν̃ − R c) wᵀ / f] S
        for m in 0..pt {
            tmp[m] = (nti[m] - dot(&rm[m * p..(m + 1) * p], ci)) / fi;
        }
        for m in 0..pt {
            for k in 0..p {
                let v = &mut rm[m * p + k];
                *v = sti[m] * (*v + tmp[m] * wi[k]) * si[k];
            }
        }
        // P ← S {P + [(r − p) wᵀ + w (r − p)ᵀ] / f + q w wᵀ} S
        for k in 0..p {
            for l in 0..p {
                let v = &mut pm[k * p + l];
                let sym = ((rv[k] - pv[k]) * wi[l] + wi[k] * (rv[l] - pv[l])) / fi;
                *v = si[k] * (*v + sym + q * wi[k] * wi[l]) * si[l];
            }
        }
    }
    counters::tick(n * p * (p + pt));
    Ok(total)
}

/// `tr((A + D)⁻¹)`.
pub fn trace_inverse(chol: &GvRCholesky) -> f64 {
    let zero = GvRMatrix::zero(chol.n(), 1);
    trace_form(chol, &zero, &vec![1.0; chol.n()]).expect("dimensions agree by construction")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{kernel_gvr, KernelSpec};
    use crate::repkit::{gr_to_gvr, gvr_to_dense, GRMatrix, TimeGrid};

    fn rel(a: &[f64], b: &[f64]) -> f64 {
        let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
        let den: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt();
        num / den
    }

    fn dense_mv(m: &DMatrix<f64>, x: &[f64]) -> Vec<f64> {
        (m * nalgebra::DVector::from_column_slice(x)).as_slice().to_vec()
    }

    #[test]
    fn diagonal_only_matvec() {
        let c = RowMatrix::from_column(&[0.6, 1.0, 1.0]);
        let s = RowMatrix::from_column(&[0.8, 0.0, 0.0]);
        // s_2 = 0 decouples row 3; ν̂ chosen so entries below the diagonal vanish.
        let nu = RowMatrix::from_column(&[0.0, 2.0, 3.0]);
        let a = GvRMatrix::new(c, s, nu).unwrap();
        let z = matvec(&a, &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(z, vec![0.0, 4.0, 9.0]);
    }

    #[test]
    fn zero_matrix_cholesky() {
        let a = GvRMatrix::zero(2, 1);
        let d = DiagVec::new(vec![4.0, 9.0]).unwrap();
        let chol = cholesky(&a, &d).unwrap();
        assert_eq!(chol.f(), &[2.0, 3.0]);
        assert!(chol.w().as_slice().iter().all(|&x| x == 0.0));
        assert!((logdet(&chol) - 36f64.ln()).abs() < 1e-15);
        assert_eq!(tri_matvec_lower(&chol, &[1.0, 1.0]).unwrap(), vec![2.0, 3.0]);
        assert_eq!(solve_lower(&chol, &[2.0, 3.0]).unwrap(), vec![1.0, 1.0]);
        assert_eq!(diag_inverse(&chol), vec![0.25, 1.0 / 9.0]);
        let inv = inv_chol_rep(&chol, &d).unwrap();
        assert_eq!(inv.f_bar, vec![0.5, 1.0 / 3.0]);
        assert_eq!(inv.to_dense_lower()[(1, 0)], 0.0);
    }

    #[test]
    fn dc_pair_factor_matches_dense() {
        let spec = KernelSpec::Dc { decay: 0.5, corr: 0.5 };
        let a = kernel_gvr(&spec, &TimeGrid::integers(2)).unwrap();
        let d = DiagVec::constant(2, 0.1).unwrap();
        let chol = cholesky(&a, &d).unwrap();
        let m = gvr_to_dense(&a) + DMatrix::identity(2, 2) * 0.1;
        let l = m.cholesky().unwrap().l();
        assert!((chol.to_dense() - &l).norm() <= 1e-12 * l.norm());
    }

    #[test]
    fn semiseparable_factor_without_diagonal() {
        let spec = KernelSpec::Dc { decay: 0.9, corr: 0.5 };
        let a = kernel_gvr(&spec, &TimeGrid::integers(6)).unwrap();
        let chol = cholesky(&a, &DiagVec::constant(6, 0.0).unwrap()).unwrap();
        for i in 0..5 {
            let cw = dot(chol.c().row(i), chol.w().row(i));
            assert!((cw - chol.f()[i]).abs() <= 1e-12 * chol.f()[i]);
        }
    }

    #[test]
    fn breakdown_is_reported() {
        let gr = GRMatrix::from_vectors(&[1.0, 1.0], &[1.0, 1.0]).unwrap();
        let a = gr_to_gvr(&gr);
        let err = cholesky(&a, &DiagVec::constant(2, 0.0).unwrap()).unwrap_err();
        assert_eq!(err, Error::NotPositiveDefinite { index: 1 });
        let neg = GRMatrix::from_vectors(&[-1.0], &[1.0]).unwrap();
        let b = gr_to_gvr(&neg);
        assert!(cholesky(&b, &DiagVec::constant(1, 0.5).unwrap()).is_err());
    }

    #[test]
    fn ss_products_and_solves_match_dense() {
        let spec = KernelSpec::Ss { corr: 0.9 };
        let a = kernel_gvr(&spec, &TimeGrid::integers(50)).unwrap();
        let d = DiagVec::constant(50, 1e-3).unwrap();
        let chol = cholesky(&a, &d).unwrap();
        let l = chol.to_dense();
        let x: Vec<f64> = (0..50).map(|i| ((i * 7 % 11) as f64 - 5.0) / 3.0).collect();
        assert!(rel(&tri_matvec_lower(&chol, &x).unwrap(), &dense_mv(&l, &x)) < 1e-12);
        assert!(rel(&tri_matvec_upper(&chol, &x).unwrap(), &dense_mv(&l.transpose(), &x)) < 1e-12);
        let y = tri_matvec_lower(&chol, &x).unwrap();
        assert!(rel(&solve_lower(&chol, &y).unwrap(), &x) < 1e-10);
        let m = gvr_to_dense(&a) + DMatrix::identity(50, 50) * 1e-3;
        assert!(rel(&matvec(&a, &x).unwrap(), &dense_mv(&gvr_to_dense(&a), &x)) < 1e-12);
        let minv = m.clone().try_inverse().unwrap();
        let bd: Vec<f64> = minv.diagonal().iter().copied().collect();
        assert!(rel(&diag_inverse(&chol), &bd) < 1e-9);
        let tr = trace_inverse(&chol);
        assert!((tr - minv.trace()).abs() <= 1e-9 * minv.trace());
        let ident = trace_form(&chol, &a, d.as_slice()).unwrap();
        assert!((ident - 50.0).abs() < 1e-9);
    }

    #[test]
    fn inverse_rep_identity_and_reconstruction() {
        let spec = KernelSpec::Ss { corr: 0.7 };
        let a = kernel_gvr(&spec, &TimeGrid::integers(20)).unwrap();
        let d = DiagVec::constant(20, 0.05).unwrap();
        let chol = cholesky(&a, &d).unwrap();
        let inv = inv_chol_rep(&chol, &d).unwrap();
        for i in 0..19 {
            let wb = nalgebra::DVector::from_row_slice(inv.w_bar.row(i));
            let lhs = &inv.s_bar[i] * wb;
            for k in 0..2 {
                let rhs = chol.s().get(i, k) * chol.w().get(i, k) / chol.f()[i];
                assert!((lhs[k] - rhs).abs() <= 1e-12 * rhs.abs().max(1e-300) + 1e-15);
            }
        }
        let l = chol.to_dense();
        let prod = inv.to_dense_lower() * l;
        assert!((prod - DMatrix::identity(20, 20)).norm() < 1e-9);
        assert!(matches!(
            inv_chol_rep(&chol, &DiagVec::constant(20, 0.0).unwrap()),
            Err(Error::DegenerateDiagonal { index: 0 })
        ));
    }

    #[test]
    fn dimension_checks() {
        let a = GvRMatrix::zero(3, 1);
        assert!(matvec(&a, &[1.0]).is_err());
        assert!(cholesky(&a, &DiagVec::constant(2, 1.0).unwrap()).is_err());
    }
}
