//! Kac-Rice statistics of critical points of smooth isotropic planar Gaussian fields.
//!
//! The crate is `no_std` with `alloc`. IO, threading and the command line live in
//! the `kacrice` crate.

#![no_std]
// when std is anywhere in the crate graph its inherent float methods shadow
// the libm-backed `Float` trait, leaving those imports unused
#![allow(unused_imports)]
// NaN must fail the guards, and small fixed matrices read best with indices
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod covariance;
pub mod fieldsim;
pub mod kacrice;
pub mod linalg;
pub mod moments;
pub mod normal;
pub mod types;
mod error;

pub use error::{Error, Result};
