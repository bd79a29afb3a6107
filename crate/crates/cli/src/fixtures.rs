//! The two small instability examples: GR and GvR against the
//! double-double references.

use gvr_core::fastalg;
use gvr_core::grbase::{gr_cholesky, gr_matvec, GrInverse};
use gvr_core::kernels::{kernel_gr, kernel_gvr};
use gvr_core::oracle::extended::{
    example1_reference, example2_reference, EXAMPLE1_KERNEL, EXAMPLE2_GAMMA, EXAMPLE2_KERNEL, FIXTURE_N,
};
use gvr_core::repkit::{DiagVec, TimeGrid};
use nalgebra::DMatrix;

use crate::csvout::{fmt_f64, Table};

/// How a measured value is judged.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bound {
    AtMost(f64),
    AtLeast(f64),
    /// Relative distance to a target.
    Near { target: f64, rtol: f64 },
    /// Reported only.
    None,
}

impl Bound {
    fn check(self, v: f64) -> Option<bool> {
        match self {
            Bound::AtMost(b) => Some(v <= b),
            Bound::AtLeast(b) => Some(v >= b),
            Bound::Near { target, rtol } => Some((v - target).abs() <= rtol * target.abs()),
            Bound::None => None,
        }
    }

    fn describe(self) -> String {
        match self {
            Bound::AtMost(b) => format!("<= {b:e}"),
            Bound::AtLeast(b) => format!(">= {b:e}"),
            Bound::Near { target, rtol } => format!("within {rtol} of {target:e}"),
            Bound::None => String::new(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct FixtureRow {
    pub fixture: &'static str,
    pub method: &'static str,
    pub quantity: &'static str,
    pub value: f64,
    pub bound: Bound,
}

impl FixtureRow {
    pub fn pass(&self) -> Option<bool> {
        self.bound.check(self.value)
    }
}

fn rel2(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
    let den: f64 = b.iter().map(|y| y * y).sum();
    (num / den).sqrt()
}

fn spectral(m: &DMatrix<f64>) -> f64 {
    if m.iter().any(|x| !x.is_finite()) {
        return f64::NAN;
    }
    m.clone().singular_values().max()
}

fn row(fixture: &'static str, method: &'static str, quantity: &'static str, value: f64, bound: Bound) -> FixtureRow {
    FixtureRow { fixture, method, quantity, value, bound }
}

/// Matrix-vector product with the DC kernel `λ = 0.1`, `ρ = 10⁻⁷`.
pub fn example1() -> Vec<FixtureRow> {
    let r = example1_reference();
    let grid = TimeGrid::integers(FIXTURE_N);
    let gvr = kernel_gvr(&EXAMPLE1_KERNEL, &grid).and_then(|a| fastalg::matvec(&a, &r.x));
    let gr = kernel_gr(&EXAMPLE1_KERNEL, &grid).and_then(|g| gr_matvec(&g, &r.x));
    let err = |y: gvr_core::Result<Vec<f64>>| y.map_or(f64::NAN, |y| rel2(&y, &r.y));
    vec![
        row("example1", "GvR", "matvec_relerr", err(gvr), Bound::AtMost(1e-7)),
        row("example1", "GR", "matvec_relerr", err(gr), Bound::AtLeast(1e5)),
    ]
}

/// Inverse Cholesky factor of the SS kernel plus `γ = 10⁻⁸`.
pub fn example2() -> Vec<FixtureRow> {
    let r = example2_reference();
    let grid = TimeGrid::integers(FIXTURE_N);
    let d = DiagVec::constant(FIXTURE_N, EXAMPLE2_GAMMA).expect("positive γ");
    let nref = spectral(&r.tril_linv);

    let e_gvr = (|| -> gvr_core::Result<f64> {
        let a = kernel_gvr(&EXAMPLE2_KERNEL, &grid)?;
        let chol = fastalg::cholesky(&a, &d)?;
        let mut linv = fastalg::inv_chol_rep(&chol, &d)?.to_dense_lower();
        linv.fill_upper_triangle(0.0, 0);
        Ok(spectral(&(&linv - &r.tril_linv)) / nref)
    })()
    .unwrap_or(f64::NAN);

    // The route of the high-precision GR generators rounded to double.
    let mut yz = &r.y_high * r.z_high.transpose();
    yz.fill_upper_triangle(0.0, 0);
    let e_gr_rounded = spectral(&(&yz - &r.tril_linv)) / nref;

    let (e_gr_double, e_z) = (|| -> gvr_core::Result<(f64, f64)> {
        let gr = kernel_gr(&EXAMPLE2_KERNEL, &grid)?;
        let inv = GrInverse::compute(&gr_cholesky(&gr, &d)?);
        let z = DMatrix::from_fn(FIXTURE_N, 2, |i, k| inv.z.get(i, k));
        Ok((spectral(&(&inv.strict_lower_dense() - &r.tril_linv)) / nref, spectral(&(&z - &r.z_high)) / spectral(&r.z_high)))
    })()
    .unwrap_or((f64::NAN, f64::NAN));

    let max_inner = r.inner_cond.iter().copied().fold(0.0, f64::max);
    vec![
        row("example2", "Ref", "kappa_M", r.kappa_m, Bound::Near { target: 3.191245e4, rtol: 0.01 }),
        row("example2", "Ref", "kappa_YW", r.kappa_yw, Bound::AtLeast(1e15)),
        row("example2", "Ref", "max_inner_cond", max_inner, Bound::None),
        row("example2", "GvR", "tril_linv_relerr", e_gvr, Bound::AtMost(1e-9)),
        row("example2", "GR", "tril_linv_relerr", e_gr_rounded, Bound::AtLeast(0.5)),
        row("example2", "GR", "tril_linv_relerr_double", e_gr_double, Bound::None),
        row("example2", "GR", "z_relerr_double", e_z, Bound::None),
    ]
}

pub fn run() -> Vec<FixtureRow> {
    let mut rows = example1();
    rows.extend(example2());
    rows
}

pub fn table(rows: &[FixtureRow], provenance: String) -> Table {
    let mut t = Table::new(provenance, &["fixture", "method", "quantity", "value", "bound", "status"]);
    for r in rows {
        let status = match r.pass() {
            Some(true) => "PASS",
            Some(false) => "FAIL",
            None => "INFO",
        };
        t.push(vec![
            r.fixture.into(),
            r.method.into(),
            r.quantity.into(),
            fmt_f64(r.value),
            r.bound.describe(),
            status.into(),
        ]);
    }
    t
}
