//! Numerically stable algebra for symmetric semiseparable-plus-diagonal
//! matrices stored in Givens-vector form, and its use in kernel-based
//! impulse-response estimation.
//!
//! The crate is layered bottom-up:
//!
//! * [`repkit`] holds the generator (`U`, `V`) and Givens-vector (`c`, `s`, `ν̂`)
//!   representations and the conversion between them.
//! * [`kernels`] builds both representations for the DC, TC and SS kernels and
//!   for the output kernel of an exponential input.
//! * [`fastalg`] contains the O(Np) / O(Np²) algorithms: products, Cholesky,
//!   triangular solves, diagonal of the inverse and trace forms.
//! * [`grbase`] contains the generator-based baselines they are compared with.
//! * [`oracle`] has dense O(N³) references and a double-double evaluator for
//!   the two small instability fixtures.
//! * [`sysid`] ties everything into simulation, criterion evaluation and
//!   hyper-parameter search.

// Index loops mirror the recurrences; negated comparisons reject NaN.
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod criteria;
pub mod error;
pub mod fastalg;
pub mod grbase;
pub mod kernels;
pub mod oracle;
pub mod repkit;
pub mod sysid;

pub use error::{Error, Result};
