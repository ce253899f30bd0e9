//! Weighted singular integral operators with slowly oscillating shifts on `L^p(R+)`.
//!
//! Everything here is pure computation and builds without `std`. Functions on
//! `R+` are handled in the logarithmic coordinate `x = log t`, so values near
//! the endpoints `0` and `inf` stay representable.
#![no_std]
// `!(x > 0.0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod advisor;
pub mod error;
pub mod expr;
mod fft;
pub mod mellin;
pub mod onesided;
pub mod operators;
pub mod shifts;
pub mod so_core;
pub mod suites;
pub mod symbols;
mod wide;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;

pub(crate) const I: C64 = C64::new(0.0, 1.0);
