//! Thread-local tallies of complex arithmetic.
//!
//! Every operation in `linalg` reports the complex multiplications and
//! complex additions it performs. Tallies are kept per thread and read
//! back as [`FlopCounter`] snapshots; merging counters from worker
//! threads is an ordinary sum, so parallel sweeps stay reproducible.
//!
//! Only complex*complex products and complex additions are counted.
//! Scaling a complex number by a real (two real multiplications) and
//! conjugation are not, which keeps the counts aligned with the usual
//! six-flops-per-multiply, two-flops-per-add convention.

use std::cell::Cell;
use std::ops::{Add, AddAssign, Sub};

/// Counts of complex multiplications and additions.
///
/// One complex multiplication costs six real flops, one complex
/// addition costs two.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct FlopCounter {
    /// Complex multiplications.
    pub cmul: u64,
    /// Complex additions (and subtractions).
    pub cadd: u64,
}

impl FlopCounter {
    /// Total real flops: `6 * cmul + 2 * cadd`.
    pub fn flops(&self) -> u64 {
        6 * self.cmul + 2 * self.cadd
    }
}

impl Add for FlopCounter {
    type Output = FlopCounter;
    fn add(self, rhs: FlopCounter) -> FlopCounter {
        FlopCounter {
            cmul: self.cmul + rhs.cmul,
            cadd: self.cadd + rhs.cadd,
        }
    }
}

impl AddAssign for FlopCounter {
    fn add_assign(&mut self, rhs: FlopCounter) {
        self.cmul += rhs.cmul;
        self.cadd += rhs.cadd;
    }
}

impl Sub for FlopCounter {
    type Output = FlopCounter;
    fn sub(self, rhs: FlopCounter) -> FlopCounter {
        FlopCounter {
            cmul: self.cmul - rhs.cmul,
            cadd: self.cadd - rhs.cadd,
        }
    }
}

thread_local! {
    static CMUL: Cell<u64> = const { Cell::new(0) };
    static CADD: Cell<u64> = const { Cell::new(0) };
}

/// Record `n` complex multiplications on the current thread.
#[inline]
pub fn tally_cmul(n: u64) {
    CMUL.with(|c| c.set(c.get() + n));
}

/// Record `n` complex additions on the current thread.
#[inline]
pub fn tally_cadd(n: u64) {
    CADD.with(|c| c.set(c.get() + n));
}

/// Cumulative tally of the current thread since its last reset.
pub fn thread_counter() -> FlopCounter {
    FlopCounter {
        cmul: CMUL.with(|c| c.get()),
        cadd: CADD.with(|c| c.get()),
    }
}

/// Reset the current thread's tally to zero.
pub fn reset_thread() {
    CMUL.with(|c| c.set(0));
    CADD.with(|c| c.set(0));
}

/// Run `f` and return its result together with the flops it performed
/// on this thread.
pub fn measure<T>(f: impl FnOnce() -> T) -> (T, FlopCounter) {
    let before = thread_counter();
    let out = f();
    (out, thread_counter() - before)
}
