//! Numerical laboratory for ternary and senary power inequalities over
//! primes |p_1^c + ... + p_k^c - R| < eps: exponential-sum evaluators, a
//! smoothing kernel with a verifiable Fourier envelope, moment and counting
//! estimates, exact exponent-pair calculus, a combinatorial decomposition
//! of the von Mangoldt weight into bilinear pieces, and direct searches for
//! prime representations.

// Negated comparisons like `!(x > 0.0)` are deliberate NaN guards on
// user-supplied parameters.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bilinear;
pub mod dd;
pub mod error;
pub mod exppairs;
pub mod expsum;
pub mod kernel;
pub mod moments;
pub mod params;
pub mod primes;
pub mod solver;

pub use error::{Error, Result};
pub use kernel::{PhiBand, SmoothingKernel};
pub use params::{derive_params, EpsPreset, Mode, ProblemParams};
pub use primes::{build_table, mangoldt, PrimeTable};
