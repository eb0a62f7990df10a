//! Real arbitrary-precision values with conservative absolute error bounds.

use rug::float::{Constant, Round};
use rug::ops::{AddAssignRound, AssignRound};
use rug::{Assign, Float, Rational};

use super::ERR_PREC;
use crate::{Error, Result};

/// Upper bound for the rounding error of a single correctly-rounded
/// operation that produced `f`: two units in the last place.
pub(crate) fn ulp(f: &Float) -> Float {
    if f.is_zero() {
        // The value underflowed or is exactly zero: charge a bound far below
        // every tolerance used in the crate but strictly positive.
        return Float::with_val(ERR_PREC, Float::i_exp(1, -(f.prec() as i32) - 64));
    }
    if !f.is_finite() {
        return Float::with_val(ERR_PREC, f64::INFINITY);
    }
    let e = f.get_exp().expect("finite nonzero float has an exponent");
    Float::with_val(ERR_PREC, Float::i_exp(1, e - f.prec() as i32 + 1))
}

/// Sum of error terms, rounded up.
fn err_sum(terms: &[&Float]) -> Float {
    let mut acc = Float::new(ERR_PREC);
    for t in terms {
        acc.add_assign_round(*t, Round::Up);
    }
    acc
}

/// Product of two nonnegative bounds, rounded up.
fn err_mul(a: &Float, b: &Float) -> Float {
    let mut r = Float::new(ERR_PREC);
    r.assign_round(a * b, Round::Up);
    r
}

/// A radix-2 floating value of precision `P` bits together with a
/// nonnegative absolute error bound.
///
/// The bound is propagated conservatively: for monotone elementary functions
/// (`exp`, `ln`, `sinh`, `sqrt`) by endpoint evaluation, for field operations
/// by first-order interval bounds including the cross terms, and every
/// operation adds a cover for its own rounding.  Bound arithmetic is done in
/// a secondary low-precision float rounding toward `+∞`.
#[derive(Debug, Clone)]
pub struct BigReal {
    val: Float,
    err: Float,
}

impl BigReal {
    /// An exact integer, with zero error.
    pub fn from_i64(v: i64, prec: u32) -> Self {
        Self { val: Float::with_val(prec, v), err: Float::new(ERR_PREC) }
    }

    /// An exact `f64` (dyadic, hence representable), with zero error.
    pub fn from_f64(v: f64, prec: u32) -> Self {
        assert!(v.is_finite());
        Self { val: Float::with_val(prec, v), err: Float::new(ERR_PREC) }
    }

    /// A rational value, rounded to `prec` bits; the error records the
    /// rounding (zero when the value is exactly representable).
    pub fn from_rational(q: &Rational, prec: u32) -> Self {
        let (val, dir) = Float::with_val_round(prec, q, Round::Nearest);
        let err = if dir == std::cmp::Ordering::Equal { Float::new(ERR_PREC) } else { ulp(&val) };
        Self { val, err }
    }

    /// Zero at the given precision.
    pub fn zero(prec: u32) -> Self {
        Self { val: Float::new(prec), err: Float::new(ERR_PREC) }
    }

    /// `π` at the given precision (error: one rounding).
    pub fn pi(prec: u32) -> Self {
        let val = Float::with_val(prec, Constant::Pi);
        let err = ulp(&val);
        Self { val, err }
    }

    /// Wraps a value with an explicit error bound (used by evaluators that
    /// derive their own tail bounds).
    pub fn with_err(val: Float, err: Float) -> Self {
        debug_assert!(!err.is_sign_negative());
        let mut e = Float::new(ERR_PREC);
        e.assign_round(&err, Round::Up);
        Self { val, err: e }
    }

    /// The floating value.
    pub fn value(&self) -> &Float {
        &self.val
    }

    /// Consumes `self`, returning the floating value (the bound is dropped).
    pub(crate) fn into_value(self) -> Float {
        self.val
    }

    /// The absolute error bound.
    pub fn err_bound(&self) -> &Float {
        &self.err
    }

    /// Working precision in bits.
    pub fn prec(&self) -> u32 {
        self.val.prec()
    }

    /// Re-rounds to a new precision, charging the rounding to the bound.
    pub fn to_prec(&self, prec: u32) -> Self {
        let val = Float::with_val(prec, &self.val);
        let err = err_sum(&[&self.err, &ulp(&val)]);
        Self { val, err }
    }

    /// Widens the error bound by `extra` (e.g. a series tail estimate).
    pub fn widen_err(&mut self, extra: &Float) {
        debug_assert!(!extra.is_sign_negative());
        self.err = err_sum(&[&self.err, extra]);
    }

    fn result_prec(&self, rhs: &Self) -> u32 {
        self.prec().max(rhs.prec())
    }

    /// Upper bound on `|x|` over the interval.
    pub(crate) fn abs_upper(&self) -> Float {
        let a = self.val.clone().abs();
        let mut r = Float::new(ERR_PREC);
        r.assign_round(&a + &self.err, Round::Up);
        r
    }

    /// Lower bound on `|x|` over the interval (clamped at zero).
    pub(crate) fn abs_lower(&self) -> Float {
        let a = self.val.clone().abs();
        let mut r = Float::new(ERR_PREC);
        r.assign_round(&a - &self.err, Round::Down);
        if r.is_sign_negative() {
            r.assign(0);
        }
        r
    }

    /// Does the interval `[x − err, x + err]` exclude zero?
    pub fn excludes_zero(&self) -> bool {
        self.abs_lower().is_sign_positive() && !self.abs_lower().is_zero()
    }

    /// `x + y`.
    pub fn add(&self, rhs: &Self) -> Self {
        let val = Float::with_val(self.result_prec(rhs), &self.val + &rhs.val);
        let err = err_sum(&[&self.err, &rhs.err, &ulp(&val)]);
        Self { val, err }
    }

    /// `x − y`.
    pub fn sub(&self, rhs: &Self) -> Self {
        let val = Float::with_val(self.result_prec(rhs), &self.val - &rhs.val);
        let err = err_sum(&[&self.err, &rhs.err, &ulp(&val)]);
        Self { val, err }
    }

    /// `−x`.
    pub fn neg(&self) -> Self {
        Self { val: Float::with_val(self.prec(), -&self.val), err: self.err.clone() }
    }

    /// `|x|`.
    pub fn abs(&self) -> Self {
        Self { val: self.val.clone().abs(), err: self.err.clone() }
    }

    /// `x · y`, with the interval cross term included in the bound.
    pub fn mul(&self, rhs: &Self) -> Self {
        let val = Float::with_val(self.result_prec(rhs), &self.val * &rhs.val);
        // |Δ(xy)| ≤ |x|·e_y + e_x·(|y| + e_y) + rounding
        let t1 = err_mul(&self.abs_upper(), &rhs.err);
        let t2 = err_mul(&self.err, &rhs.abs_upper());
        let err = err_sum(&[&t1, &t2, &ulp(&val)]);
        Self { val, err }
    }

    /// `x · k` for a machine integer `k`.
    pub fn mul_i64(&self, k: i64) -> Self {
        let val = Float::with_val(self.prec(), &self.val * k);
        let mut scaled = Float::new(ERR_PREC);
        scaled.assign_round(&self.err * k.unsigned_abs(), Round::Up);
        let err = err_sum(&[&scaled, &ulp(&val)]);
        Self { val, err }
    }

    /// `x / k` for a nonzero machine integer `k`.
    pub fn div_i64(&self, k: i64) -> Self {
        assert!(k != 0, "division by zero integer");
        let val = Float::with_val(self.prec(), &self.val / k);
        let mut scaled = Float::new(ERR_PREC);
        scaled.assign_round(&self.err / k.unsigned_abs(), Round::Up);
        let err = err_sum(&[&scaled, &ulp(&val)]);
        Self { val, err }
    }

    /// `x / y`; fails if the divisor's interval reaches zero.
    pub fn div(&self, rhs: &Self) -> Result<Self> {
        let denom_low = rhs.abs_lower();
        if denom_low.is_zero() {
            return Err(Error::Domain("divisor indistinguishable from zero".into()));
        }
        let val = Float::with_val(self.result_prec(rhs), &self.val / &rhs.val);
        // |Δ(x/y)| ≤ (e_x + |x/y|·e_y) / (|y| − e_y) + rounding
        let mut q_abs = Float::new(ERR_PREC);
        q_abs.assign_round(&val.clone().abs(), Round::Up);
        let num = err_sum(&[&self.err, &err_mul(&q_abs, &rhs.err)]);
        let mut quot = Float::new(ERR_PREC);
        quot.assign_round(&num / &denom_low, Round::Up);
        let err = err_sum(&[&quot, &ulp(&val)]);
        Ok(Self { val, err })
    }

    /// `√x`; fails if the interval contains negative numbers beyond the
    /// bound's reach.  The lower endpoint is clamped at zero.
    pub fn sqrt(&self) -> Result<Self> {
        let upper = Float::with_val(self.prec(), &self.val + &self.err);
        if upper.is_sign_negative() {
            return Err(Error::Domain("square root of a negative interval".into()));
        }
        let clamped = if self.val.is_sign_negative() { Float::new(self.prec()) } else { self.val.clone() };
        let val = clamped.sqrt();
        let hi = upper.sqrt();
        let lo = {
            let low_end = Float::with_val(self.prec(), &self.val - &self.err);
            if low_end.is_sign_negative() { Float::new(self.prec()) } else { low_end.sqrt() }
        };
        let mut spread = Float::new(ERR_PREC);
        spread.assign_round(&hi - &lo, Round::Up);
        let err = err_sum(&[&spread, &ulp(&val)]);
        Ok(Self { val, err })
    }

    /// `exp(x)` by endpoint evaluation.
    pub fn exp(&self) -> Self {
        let val = Float::with_val(self.prec(), self.val.exp_ref());
        let hi = Float::with_val(self.prec(), &self.val + &self.err).exp();
        let lo = Float::with_val(self.prec(), &self.val - &self.err).exp();
        let mut spread = Float::new(ERR_PREC);
        spread.assign_round(&hi - &lo, Round::Up);
        let err = err_sum(&[&spread, &ulp(&val)]);
        Self { val, err }
    }

    /// `ln(x)`; fails unless the interval is strictly positive.
    pub fn ln(&self) -> Result<Self> {
        let lo_end = Float::with_val(self.prec(), &self.val - &self.err);
        if !lo_end.is_sign_positive() || lo_end.is_zero() {
            return Err(Error::Domain("logarithm of an interval reaching zero".into()));
        }
        let val = Float::with_val(self.prec(), self.val.ln_ref());
        let hi = Float::with_val(self.prec(), &self.val + &self.err).ln();
        let lo = lo_end.ln();
        let mut spread = Float::new(ERR_PREC);
        spread.assign_round(&hi - &lo, Round::Up);
        let err = err_sum(&[&spread, &ulp(&val)]);
        Ok(Self { val, err })
    }

    /// `sinh(x)` by endpoint evaluation.
    ///
    /// For large `|x|` the result is dominated by `e^|x|/2`, and a fixed
    /// relative precision would mean a huge *absolute* error.  The working
    /// precision of the result is therefore raised by `⌈|x|/ln 2⌉` bits so
    /// that the absolute rounding error stays at the scale `2^{−P}` of the
    /// input precision.
    pub fn sinh(&self) -> Self {
        let bump = {
            let a = self.val.to_f64().abs();
            if a.is_finite() && a > 30.0 { (a / std::f64::consts::LN_2).ceil() as u32 + 8 } else { 0 }
        };
        let prec = self.prec() + bump;
        let val = Float::with_val(prec, self.val.sinh_ref());
        let hi = Float::with_val(prec, &self.val + &self.err).sinh();
        let lo = Float::with_val(prec, &self.val - &self.err).sinh();
        let mut spread = Float::new(ERR_PREC);
        spread.assign_round(&hi - &lo, Round::Up);
        let err = err_sum(&[&spread, &ulp(&val)]);
        Self { val, err }
    }

    /// `(sin x, cos x)`; both derivatives are bounded by 1, so the input
    /// bound transfers directly.
    pub fn sin_cos(&self) -> (Self, Self) {
        let (s, c) = Float::with_val(self.prec(), &self.val).sin_cos(Float::new(self.prec()));
        let es = err_sum(&[&self.err, &ulp(&s)]);
        let ec = err_sum(&[&self.err, &ulp(&c)]);
        (Self { val: s, err: es }, Self { val: c, err: ec })
    }

    /// `x^k` for small nonnegative `k`, by repeated multiplication.
    pub fn pow_u32(&self, k: u32) -> Self {
        let mut acc = Self::from_i64(1, self.prec());
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    /// Nearest `f64`.
    pub fn to_f64(&self) -> f64 {
        self.val.to_f64()
    }

    /// `|x − y| ≤ tol`, comparing floating values only (test helper).
    pub fn approx_eq(&self, rhs: &Self, tol: f64) -> bool {
        let diff = Float::with_val(self.result_prec(rhs), &self.val - &rhs.val).abs();
        diff <= tol
    }
}

impl std::fmt::Display for BigReal {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        std::fmt::Display::fmt(&self.val, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_close(x: &BigReal, expected: f64, tol: f64) {
        assert!(
            (x.to_f64() - expected).abs() <= tol,
            "value {} != expected {expected}",
            x.to_f64()
        );
    }

    #[test]
    fn basic_arithmetic_and_bounds() {
        let prec = 128;
        let a = BigReal::from_rational(&Rational::from((1, 3)), prec);
        let b = BigReal::from_rational(&Rational::from((1, 7)), prec);
        let s = a.add(&b);
        assert_close(&s, 1.0 / 3.0 + 1.0 / 7.0, 1e-15);
        assert!(s.err_bound().to_f64() < 1e-30);
        assert!(s.err_bound().to_f64() > 0.0);

        let p = a.mul(&b).div(&b).unwrap();
        assert_close(&p, 1.0 / 3.0, 1e-15);
    }

    #[test]
    fn division_by_uncertain_zero_fails() {
        let prec = 64;
        let tiny = BigReal::with_err(Float::with_val(prec, 1e-30), Float::with_val(ERR_PREC, 1e-29));
        let one = BigReal::from_i64(1, prec);
        assert!(one.div(&tiny).is_err());
        assert!(tiny.ln().is_err());
    }

    #[test]
    fn elementary_functions() {
        let prec = 256;
        let one = BigReal::from_i64(1, prec);
        assert_close(&one.exp(), std::f64::consts::E, 1e-15);
        let l = BigReal::from_i64(1728, prec).ln().unwrap();
        assert_close(&l, 1728f64.ln(), 1e-12);
        let r = BigReal::from_i64(2, prec).sqrt().unwrap();
        assert_close(&r, std::f64::consts::SQRT_2, 1e-15);
        let sh = BigReal::from_f64(2.0, prec).sinh();
        assert_close(&sh, 2f64.sinh(), 1e-12);
        let (s, c) = BigReal::pi(prec).div_i64(3).sin_cos();
        assert_close(&s, 0.8660254037844386, 1e-15);
        assert_close(&c, 0.5, 1e-15);
    }

    #[test]
    fn sinh_raises_precision_for_large_arguments() {
        let prec = 64;
        let x = BigReal::from_f64(100.0, prec);
        let sh = x.sinh();
        assert!(sh.prec() > 64 + 100);
        // absolute error should be far below 1 even though sinh(100) ~ 1.3e43
        assert!(sh.err_bound().to_f64() < 1e-3);
        assert!(sh.to_f64() > 1e43);
    }

    #[test]
    fn interval_discipline_composed_expression() {
        // Evaluate a composed expression at P and 2P; the difference must be
        // within the error bound reported at precision P.
        for prec in [64u32, 128, 192] {
            let eval = |p: u32| {
                let a = BigReal::from_rational(&Rational::from((355, 113)), p);
                let b = BigReal::pi(p);
                let c = a.sub(&b).mul_i64(1_000_000).exp();
                let d = c.add(&BigReal::from_i64(3, p)).sqrt().unwrap();
                d.ln().unwrap().div(&b).unwrap().sinh()
            };
            let lo = eval(prec);
            let hi = eval(2 * prec);
            let diff = Float::with_val(2 * prec, lo.value() - hi.value()).abs();
            let bound = Float::with_val(ERR_PREC, lo.err_bound() + hi.err_bound());
            assert!(diff <= bound, "prec {prec}: diff {diff} > bound {bound}");
        }
    }
}
