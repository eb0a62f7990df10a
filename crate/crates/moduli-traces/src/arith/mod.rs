//! Arbitrary-precision arithmetic with conservative error bounds, plus the
//! elementary number-theoretic functions the rest of the crate builds on.
//!
//! [`BigReal`] and [`BigComplex`] wrap MPFR floating values (via `rug`) of a
//! configurable precision `P` together with a nonnegative absolute error
//! bound.  Every operation propagates the bound by coarse interval
//! arithmetic: the bound is computed in a low-precision float whose own
//! arithmetic always rounds *up*, so a reported bound is never smaller than
//! the true one.  This is cheap, transparent, and sufficient for the
//! tolerances used throughout the crate; it is not a ball-arithmetic
//! replacement.
//!
//! [`DiscriminantSplit`] is the validated parameter triple `(d, D, N)` used
//! by every trace computation: `d` a discriminant, `D` a fundamental
//! discriminant with `dD < 0`, both squares modulo `4N`.

mod complex;
mod integers;
mod real;

pub use complex::BigComplex;
pub use integers::{
    factorize, gcd_i64, index_gamma0, is_fundamental, is_square_mod, kronecker, moebius, phi,
    sigma, sigma_k,
};
pub use real::BigReal;

use crate::{Error, Result};

/// Default working precision in bits.
pub const DEFAULT_PREC: u32 = 256;

/// Precision (bits) of the error-bound accumulators.  Bounds only need a
/// couple of digits; what matters is that their arithmetic rounds up.
pub(crate) const ERR_PREC: u32 = 64;

/// The validated parameter triple `(d, D, N)` of a twisted trace.
///
/// `d ≡ 0, 1 (mod 4)` is a discriminant, `D` a fundamental discriminant
/// (possibly `1`, possibly negative), `dD < 0`, and both `d` and `D` are
/// squares modulo `4N`.  Under these conditions the set of positive definite
/// integral binary quadratic forms of discriminant `dD` whose leading
/// coefficient is divisible by `N` carries a `Γ₀(N)` action with finitely
/// many classes, and the genus character `χ_D` is well defined on them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DiscriminantSplit {
    d: i64,
    big_d: i64,
    level: i64,
}

impl DiscriminantSplit {
    /// Validates and constructs a parameter triple.
    ///
    /// Rejects (with [`Error::InvalidParameters`]) any triple violating:
    /// `d ≡ 0, 1 (mod 4)`; `D` fundamental; `dD < 0`; `N ≥ 1`; `d` and `D`
    /// squares modulo `4N`.
    pub fn new(d: i64, big_d: i64, level: i64) -> Result<Self> {
        if level < 1 {
            return Err(Error::InvalidParameters(format!("level N = {level} must be >= 1")));
        }
        if d.rem_euclid(4) > 1 {
            return Err(Error::InvalidParameters(format!("d = {d} is not a discriminant (d mod 4 must be 0 or 1)")));
        }
        if !is_fundamental(big_d) {
            return Err(Error::InvalidParameters(format!("D = {big_d} is not a fundamental discriminant")));
        }
        let prod = d.checked_mul(big_d).ok_or_else(|| Error::InvalidParameters("d*D overflows".into()))?;
        if prod >= 0 {
            return Err(Error::InvalidParameters(format!("dD = {prod} must be negative")));
        }
        let four_n = 4 * level;
        if !is_square_mod(d, four_n) {
            return Err(Error::InvalidParameters(format!("d = {d} is not a square modulo 4N = {four_n}")));
        }
        if !is_square_mod(big_d, four_n) {
            return Err(Error::InvalidParameters(format!("D = {big_d} is not a square modulo 4N = {four_n}")));
        }
        Ok(Self { d, big_d, level })
    }

    /// The discriminant `d`.
    pub fn d(&self) -> i64 {
        self.d
    }

    /// The fundamental discriminant `D`.
    pub fn big_d(&self) -> i64 {
        self.big_d
    }

    /// The level `N`.
    pub fn level(&self) -> i64 {
        self.level
    }

    /// The (negative) form discriminant `dD`.
    pub fn disc(&self) -> i64 {
        self.d * self.big_d
    }
}
