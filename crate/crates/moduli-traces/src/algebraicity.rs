//! Numerical recognition of computed values as algebraic integers.
//!
//! Twisted traces with a fundamental twist `D > 1` are real algebraic
//! integers of `Q(√D)`, i.e. of the form `(p + q√D)/2` with integers
//! `p ≡ qD (mod 2)`.  [`recognize`] reconstructs `(p, q)` from a single
//! high-precision real embedding; [`recognize_rational_integer`] handles
//! the degenerate `D = 1` case where the value is a plain integer.
//!
//! ## Search strategy
//!
//! The reference procedure is a transparent bounded scan: for every
//! `|q| ≤ q_cap` take `p` as the nearest integer of the correct parity to
//! `2x − q√D` and collect the pair when the residual `|2x − q√D − p|` is
//! small.  The scan alone cannot reach genuinely large values: a twisted
//! trace is typically a pure multiple `q√D/2` whose `q` grows like the
//! trace itself (already `q = 1131520` for `tr_{−4,5,1}(j_{1,1}) =
//! 565760√5`, and astronomically more for higher Fourier indices).  The
//! scan is therefore augmented by an *anchored probe* at `q ≈ 2x/√D`, the
//! exact completion of the search for values whose rational part `p` is
//! small.  A value whose `p` and `q` are both far beyond the scan cap would
//! be reported as unrecognized — an honest finding, not an error.
//!
//! ## Selection: exact-consistency first
//!
//! A fixed tolerance cannot by itself single out a candidate once the
//! magnitudes grow: pairs `(p, q)` and `(p ± p', q ∓ q')` differ by
//! `|q'√D − p'|`, which Pell-type approximations push below any fixed
//! tolerance as `q'` grows, so the tolerance band eventually contains
//! spurious neighbours of every large value.  What *does* single out a
//! candidate is the input's own accuracy, which is far finer than the
//! tolerance for values computed at high precision.  A candidate whose
//! residual is within twice the input's error bound (plus the rounding
//! slack of the residual computation) is *consistent with exact equality*;
//! every other candidate provably differs from the represented value.
//! Hence:
//!
//! - exactly one consistent candidate → it wins, regardless of what else
//!   sits inside the tolerance band;
//! - two or more consistent candidates → recognition is refused as
//!   ambiguous (the cure is more precision);
//! - none → the approximate regime: the tolerance band decides, smallest
//!   `|q|` first, refusing as ambiguous when a second searched pair also
//!   fits within `10·tol`.

use rug::{Float, Integer};

use crate::arith::{is_fundamental, BigReal};
use crate::{Error, Result};

/// Default bound for the transparent `q`-scan.
pub const Q_CAP_DEFAULT: i64 = 1_000_000;

/// A recognized algebraic integer `(p + q√D)/2` with `p ≡ qD (mod 2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Recognition {
    pub p: Integer,
    pub q: Integer,
    /// `|2x − q√D − p|`, evaluated at the input's working precision.
    pub residual: f64,
}

impl Recognition {
    /// Renders the value as `(p + q√D)/2`.
    pub fn describe(&self, big_d: i64) -> String {
        format!("({} + {}·√{big_d})/2", self.p, self.q)
    }
}

/// Recognizes `x` as an algebraic integer `(p + q√D)/2` of the real
/// quadratic field `Q(√D)`, scanning `|q| ≤` [`Q_CAP_DEFAULT`].
///
/// Returns `Ok(None)` when no candidate fits within `tol`; see the module
/// docs for the search set.  Requires `x` to carry an error bound at most
/// `tol/4` and `D > 1` fundamental.
pub fn recognize(x: &BigReal, big_d: i64, tol: f64) -> Result<Option<Recognition>> {
    recognize_with_cap(x, big_d, tol, Q_CAP_DEFAULT)
}

/// [`recognize`] with an explicit scan bound.
pub fn recognize_with_cap(
    x: &BigReal,
    big_d: i64,
    tol: f64,
    q_cap: i64,
) -> Result<Option<Recognition>> {
    if big_d <= 1 || !is_fundamental(big_d) {
        return Err(Error::InvalidParameters(format!(
            "recognition needs a fundamental discriminant D > 1, got {big_d}"
        )));
    }
    if !(tol > 0.0) || q_cap < 0 {
        return Err(Error::InvalidParameters(
            "recognition needs tol > 0 and q_cap ≥ 0".into(),
        ));
    }
    if x.err_bound().to_f64() > tol / 4.0 {
        return Err(Error::InvalidParameters(format!(
            "input error bound {:.3e} exceeds tol/4 = {:.3e}",
            x.err_bound().to_f64(),
            tol / 4.0
        )));
    }
    let prec = x.prec().max(200);
    let sqrt_d = Float::with_val(prec, big_d).sqrt();
    let x2 = Float::with_val(prec, x.value() * 2u32);
    let d_odd = big_d % 2 != 0;
    // collection threshold: wide enough for the 10·tol ambiguity band plus
    // the fast path's rounding slack
    let theta = (10.0 * tol * 1.5).max(1e-5);

    let mut candidates: Vec<Recognition> = Vec::new();
    let mut note = |cand: Option<Recognition>| {
        if let Some(c) = cand {
            if !candidates.iter().any(|e| e.p == c.p && e.q == c.q) {
                candidates.push(c);
            }
        }
    };

    // the bounded scan
    let x2_f = x2.to_f64();
    if x2_f.abs() + q_cap as f64 * sqrt_d.to_f64() < 1e9 {
        // f64 prefilter is safe at this magnitude (rounding ≤ ~3·10⁻⁷,
        // an order below theta); exact verification follows per candidate
        let sd_f = sqrt_d.to_f64();
        for q in -q_cap..=q_cap {
            let z = x2_f - q as f64 * sd_f;
            let parity = d_odd && q % 2 != 0;
            let t = if parity { (z - 1.0) / 2.0 } else { z / 2.0 };
            if 2.0 * (t - t.round()).abs() < theta {
                note(verify_candidate(&x2, &sqrt_d, &Integer::from(q), d_odd, theta, prec));
            }
        }
    } else {
        // exact incremental walk; drift after millions of subtractions
        // stays below the magnitude's ulp scale, and candidates are
        // re-verified from scratch anyway
        note(try_candidate_f(&x2, &x2, &sqrt_d, 0, d_odd, theta, prec));
        let mut z_pos = x2.clone();
        let mut z_neg = x2.clone();
        for qa in 1..=q_cap {
            z_pos -= &sqrt_d;
            z_neg += &sqrt_d;
            note(try_candidate_f(&z_pos, &x2, &sqrt_d, qa, d_odd, theta, prec));
            note(try_candidate_f(&z_neg, &x2, &sqrt_d, -qa, d_odd, theta, prec));
            if qa % (1 << 14) == 0 {
                z_pos = Float::with_val(prec, &x2 - Float::with_val(prec, &sqrt_d * qa));
                z_neg = Float::with_val(prec, &x2 + Float::with_val(prec, &sqrt_d * qa));
            }
        }
    }

    // the anchored probe at q ≈ 2x/√D
    let q0 = Float::with_val(prec, &x2 / &sqrt_d)
        .to_integer()
        .ok_or_else(|| Error::Domain("anchored probe: non-finite quotient".into()))?;
    for j in -4i32..=4 {
        let q = Integer::from(&q0 + j);
        if q.clone().abs() <= q_cap {
            continue; // already covered by the scan
        }
        note(verify_candidate(&x2, &sqrt_d, &q, d_odd, theta, prec));
    }

    candidates.sort_by(|a, b| {
        a.q.clone()
            .abs()
            .cmp(&b.q.clone().abs())
            .then(a.residual.total_cmp(&b.residual))
    });

    // exact-consistency regime: candidates within the input's own accuracy
    let sharp = consistency_threshold(x, prec);
    let consistent: Vec<usize> = candidates
        .iter()
        .enumerate()
        .filter(|(_, c)| c.residual <= sharp)
        .map(|(i, _)| i)
        .collect();
    match consistent.len() {
        1 => return Ok(Some(candidates[consistent[0]].clone())),
        len if len >= 2 => {
            let a = &candidates[consistent[0]];
            let b = &candidates[consistent[1]];
            return Err(Error::AmbiguousRecognition(format!(
                "both {} (residual {:.3e}) and {} (residual {:.3e}) are consistent with \
                 the input's accuracy {:.3e}; raise the working precision",
                a.describe(big_d),
                a.residual,
                b.describe(big_d),
                b.residual,
                sharp
            )));
        }
        _ => {}
    }

    // approximate regime: nothing matches to working accuracy, so the
    // tolerance band decides
    let Some(winner_idx) = candidates.iter().position(|c| c.residual < tol) else {
        return Ok(None);
    };
    let winner = candidates[winner_idx].clone();
    for (i, c) in candidates.iter().enumerate() {
        if i != winner_idx && c.residual < 10.0 * tol {
            return Err(Error::AmbiguousRecognition(format!(
                "both {} (residual {:.3e}) and {} (residual {:.3e}) fit within 10·tol",
                winner.describe(big_d),
                winner.residual,
                c.describe(big_d),
                c.residual
            )));
        }
    }
    Ok(Some(winner))
}

/// Residuals at or below this bound are indistinguishable from an exact
/// match: twice the input's error bound, plus the rounding slack of the
/// `prec`-bit residual computation at the value's magnitude.
fn consistency_threshold(x: &BigReal, prec: u32) -> f64 {
    let slack_scale = 2.0 * x.value().to_f64().abs() + 1.0;
    2.0 * x.err_bound().to_f64() + slack_scale * 2f64.powi(-(prec as i32 - 8))
}

/// Scan step on a precomputed `z ≈ 2x − q√D`: cheap parity-aware residual,
/// then exact verification on passing the loose threshold.
fn try_candidate_f(
    z: &Float,
    x2: &Float,
    sqrt_d: &Float,
    q: i64,
    d_odd: bool,
    theta: f64,
    prec: u32,
) -> Option<Recognition> {
    let parity = d_odd && q % 2 != 0;
    let mut t = Float::with_val(prec, z - i32::from(parity));
    t /= 2u32;
    let r = Float::with_val(32, &t - t.clone().round()).abs().to_f64() * 2.0;
    if r < theta {
        verify_candidate(x2, sqrt_d, &Integer::from(q), d_odd, theta, prec)
    } else {
        None
    }
}

/// Exact residual for one `q`: recomputes `z = 2x − q√D` from scratch and
/// takes the nearest integer `p` of the parity forced by `p ≡ qD (mod 2)`.
fn verify_candidate(
    x2: &Float,
    sqrt_d: &Float,
    q: &Integer,
    d_odd: bool,
    theta: f64,
    prec: u32,
) -> Option<Recognition> {
    let z = Float::with_val(prec, x2 - Float::with_val(prec, sqrt_d * q));
    let parity = d_odd && q.is_odd();
    let t = Float::with_val(prec, &z - i32::from(parity)) / 2u32;
    let k = t.to_integer()?;
    let p = Integer::from(2 * k) + i32::from(parity);
    let residual = Float::with_val(prec, &z - &p).abs().to_f64();
    (residual < theta).then(|| Recognition { p, q: q.clone(), residual })
}

/// Recognizes `x` as a rational integer: the nearest integer when within
/// `tol`, absent otherwise.  Requires an error bound at most `tol/4`.
pub fn recognize_rational_integer(x: &BigReal, tol: f64) -> Result<Option<Integer>> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameters("tolerance must be positive".into()));
    }
    if x.err_bound().to_f64() > tol / 4.0 {
        return Err(Error::InvalidParameters(format!(
            "input error bound {:.3e} exceeds tol/4 = {:.3e}",
            x.err_bound().to_f64(),
            tol / 4.0
        )));
    }
    let n = x
        .value()
        .clone()
        .to_integer()
        .ok_or_else(|| Error::Domain("non-finite input".into()))?;
    let residual = Float::with_val(x.prec(), x.value() - &n).abs().to_f64();
    Ok((residual < tol).then_some(n))
}
