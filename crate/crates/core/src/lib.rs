//! Tensor-train exponential machines and variational quantum classifiers.
//!
//! The crate is `no_std` (it needs `alloc`) and contains only the numerical
//! pieces: dense linear algebra, the tensor-train format and its fixed-rank
//! Riemannian geometry, the exponential-machine classifier, a real/complex
//! statevector simulator, the variational quantum classifier, and the
//! preprocessing used to turn the UCI car data into PCA features. File IO,
//! the experiment grid and the command line live in `tnvqc-bench`.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

mod error;

pub mod data;
pub mod exp_machine;
pub mod linalg;
pub mod metrics;
pub mod optim;
pub mod pca;
pub mod qsim;
pub mod riemannian;
pub mod tt;
pub mod vqc;

pub use error::{Error, Result};

/// Formats a float with 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(x: f64) -> alloc::string::String {
    alloc::format!("{x:.16e}")
}
