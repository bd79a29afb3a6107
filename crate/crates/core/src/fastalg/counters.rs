//! Per-thread tally of inner-loop iterations, used to check that the sweeps
//! scale linearly in N.

use std::cell::Cell;

thread_local! {
    static STEPS: Cell<u64> = const { Cell::new(0) };
}

#[inline]
pub(crate) fn tick(n: usize) {
    STEPS.with(|s| s.set(s.get() + n as u64));
}

pub fn reset() {
    STEPS.with(|s| s.set(0));
}

pub fn read() -> u64 {
    STEPS.with(Cell::get)
}
