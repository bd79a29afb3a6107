//! Reference implementations used to validate the structured algorithms.

pub mod dense;
pub mod extended;

pub use dense::{dense_criteria, dense_impulse_map, dense_kernel, dense_output_kernel, DENSE_LIMIT};
pub use extended::{extended_eval_fixture, FixtureId, FixtureReference};
