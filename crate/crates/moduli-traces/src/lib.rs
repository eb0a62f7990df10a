//! Twisted traces of singular moduli and related invariants.
//!
//! This crate computes, by at least two independent routes each:
//!
//! * **twisted traces** `tr_{d,D,N}(g)` of weakly holomorphic modular
//!   functions `g` over Heegner points of discriminant `dD` on `Γ₀(N)`,
//!   twisted by a genus character `χ_D`;
//! * **twisted Hurwitz class numbers** `H(d,D,N) = tr_{d,D,N}(1)`;
//! * **Fourier coefficients** of the weight-2 polar forms `f*_{d,D,N}` whose
//!   holomorphic coefficients are `−tr_{d,D,N}(j_{N,n})`, and of the classical
//!   `f_d = f*_{d,1,1} − H(d,1,1)·E₂*`;
//! * **Niebur–Poincaré coefficients** `c_N(n,m)` via Kloosterman/Bessel
//!   series, cross-checked against exact `q`-expansions;
//! * **regularized inner products** of the `f_d`, evaluated through their
//!   closed forms in terms of `J = j − 744` at CM points.
//!
//! The two routes for each quantity (CM evaluation vs. exponential-sum
//! series, exact `q`-expansion vs. Kloosterman sums, closed form vs.
//! two-precision recomputation) are cross-verified numerically by the test
//! suite and by `verification::run_suite`.
//!
//! # Example
//!
//! ```
//! use moduli_traces::arith::DiscriminantSplit;
//! use moduli_traces::traces;
//!
//! // The twisted Hurwitz class number H(-3, 1, 1) = 1/3: one class of
//! // discriminant -3, represented by [1, 1, 1], with 6 automorphs.
//! let split = DiscriminantSplit::new(-3, 1, 1).unwrap();
//! let h = traces::class_number(&split).unwrap();
//! assert_eq!(h, rug::Rational::from((1, 3)));
//! ```

pub mod algebraicity;
pub mod arith;
pub mod forms;
pub mod genus;
pub mod inner_products;
pub mod kloosterman;
pub mod qseries;
pub mod traces;
pub mod verification;

/// Crate-wide error type.
///
/// Computational routines fail fast with a typed error rather than returning
/// poisoned values; callers distinguish parameter errors (rejected inputs)
/// from computation failures (convergence, precision, truncation).
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Input rejected before any computation started.
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    /// A divisor, logarithm argument, or square-root argument whose interval
    /// contains zero (or a negative number where positivity is required).
    #[error("domain error: {0}")]
    Domain(String),

    /// A truncated series was evaluated at a point where its fitted tail
    /// majorant cannot certify the requested accuracy.
    #[error("insufficient truncation: {0}")]
    InsufficientTruncation(String),

    /// An iterative enumeration failed to stabilize within its configured cap.
    #[error("no convergence: {0}")]
    NoConvergence(String),

    /// A sum that must be real carried a non-negligible imaginary part
    /// (sentinel for character or pairing bugs).
    #[error("imaginary residue: {0}")]
    ImaginaryResidue(String),

    /// Two CM values coincide (or are numerically indistinguishable) where a
    /// difference must be formed.
    #[error("near coincidence: {0}")]
    NearCoincidence(String),

    /// Inner-product parameters covered by none of the closed-form cases.
    #[error("case not covered: {0}")]
    CaseNotCovered(String),

    /// Algebraic recognition found no candidate within tolerance.
    #[error("not recognized: {0}")]
    NotRecognized(String),

    /// Algebraic recognition found two essentially different candidates.
    #[error("ambiguous recognition: {0}")]
    AmbiguousRecognition(String),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
