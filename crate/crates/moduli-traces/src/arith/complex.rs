//! Complex arbitrary-precision values with a single modulus error bound.

use rug::float::Round;
use rug::ops::{AddAssignRound, AssignRound};
use rug::{Assign, Float};

use super::real::{ulp, BigReal};
use super::ERR_PREC;
use crate::{Error, Result};

/// A complex value of precision `P` bits with a nonnegative bound on the
/// modulus of its error, `|Δz|`.
///
/// The single-bound representation keeps propagation simple: component
/// errors never need to be tracked separately because every consumer in this
/// crate ultimately takes a modulus, a real part of a sum known to be real,
/// or a logarithm of a modulus — all 1-Lipschitz (or interval-bounded) in
/// `|Δz|`.
#[derive(Debug, Clone)]
pub struct BigComplex {
    re: Float,
    im: Float,
    err: Float,
}

fn err_sum(terms: &[&Float]) -> Float {
    let mut acc = Float::new(ERR_PREC);
    for t in terms {
        acc.add_assign_round(*t, Round::Up);
    }
    acc
}

fn err_mul(a: &Float, b: &Float) -> Float {
    let mut r = Float::new(ERR_PREC);
    r.assign_round(a * b, Round::Up);
    r
}

/// Rounding cover for one complex operation: component ulps can combine.
fn ulp2(re: &Float, im: &Float) -> Float {
    err_sum(&[&ulp(re), &ulp(im)])
}

impl BigComplex {
    /// Builds from real and imaginary parts; their bounds combine as
    /// `|Δz| ≤ Δre + Δim`.
    pub fn new(re: BigReal, im: BigReal) -> Self {
        let err = err_sum(&[re.err_bound(), im.err_bound()]);
        let (re, im) = (re.into_value(), im.into_value());
        Self { re, im, err }
    }

    /// A purely real value.
    pub fn from_real(x: &BigReal) -> Self {
        Self { re: x.value().clone(), im: Float::new(x.prec()), err: x.err_bound().clone() }
    }

    /// An exact Gaussian integer.
    pub fn from_i64_pair(re: i64, im: i64, prec: u32) -> Self {
        Self { re: Float::with_val(prec, re), im: Float::with_val(prec, im), err: Float::new(ERR_PREC) }
    }

    /// Zero at the given precision.
    pub fn zero(prec: u32) -> Self {
        Self::from_i64_pair(0, 0, prec)
    }

    /// Wraps raw parts with an explicit modulus error bound.
    pub fn with_err(re: Float, im: Float, err: Float) -> Self {
        debug_assert!(!err.is_sign_negative());
        let mut e = Float::new(ERR_PREC);
        e.assign_round(&err, Round::Up);
        Self { re, im, err: e }
    }

    /// Real part as a float (the full modulus bound applies to it).
    pub fn re(&self) -> &Float {
        &self.re
    }

    /// Imaginary part as a float.
    pub fn im(&self) -> &Float {
        &self.im
    }

    /// Real part as a [`BigReal`] carrying the full bound.
    pub fn re_real(&self) -> BigReal {
        BigReal::with_err(self.re.clone(), self.err.clone())
    }

    /// Imaginary part as a [`BigReal`] carrying the full bound.
    pub fn im_real(&self) -> BigReal {
        BigReal::with_err(self.im.clone(), self.err.clone())
    }

    /// The modulus error bound `|Δz|`.
    pub fn err_bound(&self) -> &Float {
        &self.err
    }

    /// Working precision in bits.
    pub fn prec(&self) -> u32 {
        self.re.prec()
    }

    /// Widens the error bound by `extra`.
    pub fn widen_err(&mut self, extra: &Float) {
        debug_assert!(!extra.is_sign_negative());
        self.err = err_sum(&[&self.err, extra]);
    }

    fn result_prec(&self, rhs: &Self) -> u32 {
        self.prec().max(rhs.prec())
    }

    /// Upper bound on `|z|`: `|re| + |im| + err` (the 1-norm dominates the
    /// 2-norm).
    pub(crate) fn abs_upper(&self) -> Float {
        let ra = self.re.clone().abs();
        let ia = self.im.clone().abs();
        let mut r = Float::new(ERR_PREC);
        r.assign_round(&ra + &ia, Round::Up);
        err_sum(&[&r, &self.err])
    }

    /// Lower bound on `|z|`: `max(|re|, |im|)/√2`-free version — we use
    /// `max(|re|, |im|) − err`, clamped at zero, which underestimates `|z|`.
    pub(crate) fn abs_lower(&self) -> Float {
        let ra = self.re.clone().abs();
        let ia = self.im.clone().abs();
        let m = if ra >= ia { ra } else { ia };
        let mut r = Float::new(ERR_PREC);
        r.assign_round(&m - &self.err, Round::Down);
        if r.is_sign_negative() {
            r.assign(0);
        }
        r
    }

    /// `z + w`.
    pub fn add(&self, rhs: &Self) -> Self {
        let prec = self.result_prec(rhs);
        let re = Float::with_val(prec, &self.re + &rhs.re);
        let im = Float::with_val(prec, &self.im + &rhs.im);
        let err = err_sum(&[&self.err, &rhs.err, &ulp2(&re, &im)]);
        Self { re, im, err }
    }

    /// `z − w`.
    pub fn sub(&self, rhs: &Self) -> Self {
        let prec = self.result_prec(rhs);
        let re = Float::with_val(prec, &self.re - &rhs.re);
        let im = Float::with_val(prec, &self.im - &rhs.im);
        let err = err_sum(&[&self.err, &rhs.err, &ulp2(&re, &im)]);
        Self { re, im, err }
    }

    /// `−z`.
    pub fn neg(&self) -> Self {
        Self { re: Float::with_val(self.prec(), -&self.re), im: Float::with_val(self.prec(), -&self.im), err: self.err.clone() }
    }

    /// Complex conjugate.
    pub fn conj(&self) -> Self {
        Self { re: self.re.clone(), im: Float::with_val(self.prec(), -&self.im), err: self.err.clone() }
    }

    /// `z · w` with `|Δ(zw)| ≤ |z|·e_w + e_z·(|w| + e_w) + rounding`.
    pub fn mul(&self, rhs: &Self) -> Self {
        let prec = self.result_prec(rhs);
        let re = Float::with_val(prec, &self.re * &rhs.re) - Float::with_val(prec, &self.im * &rhs.im);
        let im = Float::with_val(prec, &self.re * &rhs.im) + Float::with_val(prec, &self.im * &rhs.re);
        let t1 = err_mul(&self.abs_upper(), &rhs.err);
        let t2 = err_mul(&self.err, &rhs.abs_upper());
        // four component products and two additions round: cover generously
        let mut round_cover = Float::new(ERR_PREC);
        round_cover.assign_round(ulp2(&re, &im) * 4u32, Round::Up);
        let err = err_sum(&[&t1, &t2, &round_cover]);
        Self { re, im, err }
    }

    /// `z · x` for real `x`.
    pub fn mul_real(&self, x: &BigReal) -> Self {
        self.mul(&Self::from_real(x))
    }

    /// `z · k`.
    pub fn mul_i64(&self, k: i64) -> Self {
        let re = Float::with_val(self.prec(), &self.re * k);
        let im = Float::with_val(self.prec(), &self.im * k);
        let mut scaled = Float::new(ERR_PREC);
        scaled.assign_round(&self.err * k.unsigned_abs(), Round::Up);
        let err = err_sum(&[&scaled, &ulp2(&re, &im)]);
        Self { re, im, err }
    }

    /// `z / k` for nonzero integer `k`.
    pub fn div_i64(&self, k: i64) -> Self {
        assert!(k != 0, "division by zero integer");
        let re = Float::with_val(self.prec(), &self.re / k);
        let im = Float::with_val(self.prec(), &self.im / k);
        let mut scaled = Float::new(ERR_PREC);
        scaled.assign_round(&self.err / k.unsigned_abs(), Round::Up);
        let err = err_sum(&[&scaled, &ulp2(&re, &im)]);
        Self { re, im, err }
    }

    /// `z / w`; fails if `|w|`'s interval reaches zero.
    pub fn div(&self, rhs: &Self) -> Result<Self> {
        let denom_low = rhs.abs_lower();
        if denom_low.is_zero() {
            return Err(Error::Domain("complex divisor indistinguishable from zero".into()));
        }
        let prec = self.result_prec(rhs);
        let norm = Float::with_val(prec, rhs.re.clone().square() + rhs.im.clone().square());
        let re = Float::with_val(prec, &self.re * &rhs.re) + Float::with_val(prec, &self.im * &rhs.im);
        let im = Float::with_val(prec, &self.im * &rhs.re) - Float::with_val(prec, &self.re * &rhs.im);
        let re = re / &norm;
        let im = im / &norm;
        // |Δ(z/w)| ≤ (e_z + |z/w|·e_w) / (|w| − e_w) + rounding
        let mut q_abs = Float::new(ERR_PREC);
        q_abs.assign_round(&re.clone().abs() + &im.clone().abs(), Round::Up);
        let num = err_sum(&[&self.err, &err_mul(&q_abs, &rhs.err)]);
        let mut quot = Float::new(ERR_PREC);
        quot.assign_round(&num / &denom_low, Round::Up);
        let mut round_cover = Float::new(ERR_PREC);
        round_cover.assign_round(ulp2(&re, &im) * 4u32, Round::Up);
        let err = err_sum(&[&quot, &round_cover]);
        Ok(Self { re, im, err })
    }

    /// `exp(z) = e^{Re z}(cos Im z + i sin Im z)`, with
    /// `|Δ exp(z)| ≤ |exp(z)|·(e^{|Δz|} − 1) + rounding`.
    pub fn exp(&self) -> Self {
        let prec = self.prec();
        let scale = Float::with_val(prec, self.re.exp_ref());
        let (s, c) = self.im.clone().sin_cos(Float::new(prec));
        let re = Float::with_val(prec, &scale * &c);
        let im = Float::with_val(prec, &scale * &s);
        // growth factor e^err − 1, computed upward in the bound precision
        let growth = {
            let e = Float::with_val(ERR_PREC, &self.err).exp();
            let mut g = Float::new(ERR_PREC);
            g.assign_round(&e - 1u32, Round::Up);
            g
        };
        let mut mag = Float::new(ERR_PREC);
        mag.assign_round(&scale, Round::Up);
        let t = err_mul(&mag, &growth);
        let mut round_cover = Float::new(ERR_PREC);
        round_cover.assign_round(ulp2(&re, &im) * 4u32, Round::Up);
        let err = err_sum(&[&t, &round_cover]);
        Self { re, im, err }
    }

    /// `e(x) = exp(2πi·x)` for real `x`.
    pub fn e_of(x: &BigReal) -> Self {
        let prec = x.prec();
        let two_pi = BigReal::pi(prec).mul_i64(2);
        let theta = two_pi.mul(x);
        let z = BigComplex::new(BigReal::zero(prec), theta);
        z.exp()
    }

    /// Modulus `|z|` as a [`BigReal`] (the modulus is 1-Lipschitz in `z`).
    pub fn abs(&self) -> BigReal {
        let h = self.re.clone().hypot(&self.im);
        let err = err_sum(&[&self.err, &ulp(&h)]);
        BigReal::with_err(h, err)
    }

    /// `log|z|`; fails if the modulus interval reaches zero.
    pub fn ln_abs(&self) -> Result<BigReal> {
        self.abs().ln()
    }

    /// `z^k` by square-and-multiply.
    pub fn pow_u32(&self, k: u32) -> Self {
        let mut acc = Self::from_i64_pair(1, 0, self.prec());
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// `e(z) = exp(2πi·z)` for complex `z`: `2πi(x+iy) = -2πy + 2πix`.
    pub fn e_of_complex(z: &Self) -> Self {
        let two_pi = BigReal::pi(z.prec()).mul_i64(2);
        let re = z.im_real().mul(&two_pi).neg();
        let im = z.re_real().mul(&two_pi);
        // component construction double-counts the shared |Δz| bound; harmless
        Self::new(re, im).exp()
    }

    /// Principal square root (real part ≥ 0).
    ///
    /// With `z = re + i·im` and `r = |z|`: the root is `u + iv` where
    /// `u = √((r+re)/2)` and `v = sign(im)·√((r−re)/2)`; when the imaginary
    /// interval touches zero, a certainly-positive real part is required
    /// (`v = im/2u` keeps the error bound finite there) — otherwise the value
    /// is too close to the branch cut and the call fails.
    pub fn sqrt(&self) -> Result<Self> {
        let r = self.abs();
        let re = self.re_real();
        let im = self.im_real();
        if im.excludes_zero() {
            let u = r.add(&re).div_i64(2).sqrt()?;
            let v_abs = r.sub(&re).div_i64(2).sqrt()?;
            let v = if im.value().is_sign_positive() {
                v_abs
            } else {
                v_abs.neg()
            };
            Ok(Self::new(u, v))
        } else if re.excludes_zero() && re.value().is_sign_positive() {
            let u = r.add(&re).div_i64(2).sqrt()?;
            let v = im.div(&u.mul_i64(2))?;
            Ok(Self::new(u, v))
        } else {
            Err(Error::Domain(
                "complex square root too close to the branch cut".into(),
            ))
        }
    }

    /// Nearest `(f64, f64)` pair.
    pub fn to_f64_pair(&self) -> (f64, f64) {
        (self.re.to_f64(), self.im.to_f64())
    }
}

impl std::fmt::Display for BigComplex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.im.is_sign_negative() {
            write!(f, "{} - {}i", self.re, self.im.clone().abs())
        } else {
            write!(f, "{} + {}i", self.re, self.im)
        }
    }
}
