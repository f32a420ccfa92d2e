//! Exact integer and rational linear algebra.

mod hnf;
mod matrix;
pub mod modp;
mod snf;

pub use hnf::{hnf, is_unimodular, left_kernel, row_basis};
pub use matrix::{rank, IntMatrix, RatMatrix};
pub use modp::{kernel_mod_p, ModMatrix};
pub use snf::{snf, SmithForm};

use num_bigint::BigInt;
use num_rational::BigRational;

/// Shorthand for small integer literals.
pub fn int(x: i64) -> BigInt {
    BigInt::from(x)
}

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}
