//! Exact Laurent `q`-expansions of modular objects and their evaluation.
//!
//! The expansion engine is exact: coefficients are [`rug::Rational`] values
//! and every ring operation tracks the truncation order through which the
//! result is reliable.  On top of the generic [`QSeries`] type this module
//! provides
//!
//! * η-quotients by Euler's pentagonal-number product ([`eta_quotient`]),
//! * the named series `Δ`, `E₄`, `E₂`, `j`, and `J = j − 744`,
//! * the genus-zero Hauptmoduln `J_N` for `Γ₀(N)` from a fixed η-quotient
//!   table, validated at first use by a modular-invariance probe,
//! * Faber polynomials and the Fourier expansions of the Niebur–Poincaré
//!   functions `j_{N,n}` ([`niebur_qexp`]),
//! * high-precision evaluation at points of the upper half-plane with a
//!   certified tail bound ([`QSeries::evaluate`]), and
//! * a fast evaluation path through the Dedekind η-function and its exact
//!   `SL₂(Z)` multiplier system ([`eta_value`], [`hauptmodul_value`]),
//!   cross-validated against the generic series route.

use std::collections::BTreeMap;
use std::sync::{Mutex, OnceLock};

use rug::float::Round;
use rug::ops::{AssignRound, Pow};
use rug::{Complete, Float, Integer, Rational};

use crate::arith::{sigma, sigma_k};
use crate::arith::{BigComplex, BigReal};
use crate::forms::UnimodularMatrix;
use crate::{Error, Result};

/// An exact truncated Laurent series in `q = e(τ)`.
///
/// `coeffs[k]` is the coefficient of `q^{n0+k}`; all coefficients through
/// `q^T` with `T = n0 + coeffs.len() − 1` are exact, and nothing is known
/// beyond `T`.  Ring operations shrink `T` as dictated by the operands, never
/// silently extend it.
#[derive(Debug, Clone)]
pub struct QSeries {
    n0: i64,
    coeffs: Vec<Rational>,
    weight_tag: Option<i32>,
}

impl QSeries {
    /// Builds a series from a leading exponent and coefficient list,
    /// stripping leading zero coefficients.
    pub fn new(mut n0: i64, mut coeffs: Vec<Rational>) -> Self {
        assert!(!coeffs.is_empty(), "a QSeries needs at least one coefficient");
        let lead = coeffs
            .iter()
            .position(|c| *c != 0)
            .unwrap_or(coeffs.len() - 1);
        if lead > 0 {
            coeffs.drain(..lead);
            n0 += lead as i64;
        }
        QSeries { n0, coeffs, weight_tag: None }
    }

    /// The constant series `r + 0·q + … + 0·q^t`.
    pub fn constant(r: Rational, t: i64) -> Self {
        assert!(t >= 0);
        let mut coeffs = vec![Rational::new(); (t + 1) as usize];
        coeffs[0] = r;
        QSeries { n0: 0, coeffs, weight_tag: None }
    }

    /// Leading exponent `n0` (e.g. `−1` for a Hauptmodul).
    pub fn leading_exponent(&self) -> i64 {
        self.n0
    }

    /// Highest exponent through which coefficients are exact.
    pub fn truncation_order(&self) -> i64 {
        self.n0 + self.coeffs.len() as i64 - 1
    }

    /// Raw coefficient slice for `q^{n0}, q^{n0+1}, …`.
    pub fn coefficients(&self) -> &[Rational] {
        &self.coeffs
    }

    /// Modular weight, when the series is tagged with one.
    pub fn weight_tag(&self) -> Option<i32> {
        self.weight_tag
    }

    /// Tags the series with a modular weight.
    pub fn with_weight(mut self, w: i32) -> Self {
        self.weight_tag = Some(w);
        self
    }

    /// Coefficient of `q^m`.  Panics if `m` is beyond the truncation order —
    /// coefficients there are unknown, not zero.
    pub fn coeff(&self, m: i64) -> Rational {
        assert!(
            m <= self.truncation_order(),
            "coefficient of q^{m} requested beyond truncation order {}",
            self.truncation_order()
        );
        if m < self.n0 {
            Rational::new()
        } else {
            self.coeffs[(m - self.n0) as usize].clone()
        }
    }

    /// Coefficient of `q^m`, zero outside the stored range (internal: callers
    /// must ensure `m` is within the truncation of the result they build).
    fn get(&self, m: i64) -> Rational {
        if m < self.n0 || m > self.truncation_order() {
            Rational::new()
        } else {
            self.coeffs[(m - self.n0) as usize].clone()
        }
    }

    /// Restricts the truncation order to `t` (no-op if already shorter).
    pub fn truncate_to(mut self, t: i64) -> Self {
        assert!(t >= self.n0, "truncation below the leading exponent");
        let len = (t - self.n0 + 1) as usize;
        if len < self.coeffs.len() {
            self.coeffs.truncate(len);
        }
        self
    }

    /// Sum; exact through the smaller truncation order.
    pub fn add(&self, rhs: &Self) -> Self {
        let n0 = self.n0.min(rhs.n0);
        let t = self.truncation_order().min(rhs.truncation_order());
        assert!(t >= n0, "disjoint truncation ranges in QSeries::add");
        let coeffs = (n0..=t).map(|m| self.get(m) + rhs.get(m)).collect();
        QSeries::new(n0, coeffs)
    }

    /// Difference; exact through the smaller truncation order.
    pub fn sub(&self, rhs: &Self) -> Self {
        let n0 = self.n0.min(rhs.n0);
        let t = self.truncation_order().min(rhs.truncation_order());
        assert!(t >= n0, "disjoint truncation ranges in QSeries::sub");
        let coeffs = (n0..=t).map(|m| self.get(m) - rhs.get(m)).collect();
        QSeries::new(n0, coeffs)
    }

    /// Product; exact through `min(T_a + n0_b, T_b + n0_a)`.
    pub fn mul(&self, rhs: &Self) -> Self {
        let n0 = self.n0 + rhs.n0;
        let out_len = self.coeffs.len().min(rhs.coeffs.len());
        let mut out = vec![Rational::new(); out_len];
        for (i, a) in self.coeffs.iter().enumerate() {
            if i >= out_len {
                break;
            }
            if *a == 0 {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                if i + j >= out_len {
                    break;
                }
                if *b != 0 {
                    out[i + j] += (a * b).complete();
                }
            }
        }
        QSeries::new(n0, out)
    }

    /// Adds a rational constant (the truncation range must contain `q⁰`).
    pub fn add_scalar(&self, r: &Rational) -> Self {
        assert!(
            self.n0 <= 0 && self.truncation_order() >= 0,
            "constant shift outside the stored range"
        );
        let mut out = self.clone();
        out.coeffs[(-self.n0) as usize] += r;
        QSeries::new(out.n0, out.coeffs)
    }

    /// Multiplies every coefficient by a rational scalar.
    pub fn mul_scalar(&self, r: &Rational) -> Self {
        let coeffs = self.coeffs.iter().map(|c| (c * r).complete()).collect();
        QSeries::new(self.n0, coeffs)
    }

    /// Multiplicative inverse; requires a nonzero leading coefficient.
    pub fn inverse(&self) -> Result<Self> {
        if self.coeffs[0] == 0 {
            return Err(Error::InvalidParameters(
                "cannot invert a series with zero leading coefficient".into(),
            ));
        }
        let len = self.coeffs.len();
        let lead = &self.coeffs[0];
        let mut inv = vec![Rational::new(); len];
        inv[0] = Rational::from(1) / lead;
        for k in 1..len {
            let mut acc = Rational::new();
            for j in 1..=k {
                if self.coeffs[j] != 0 {
                    acc += (&self.coeffs[j] * &inv[k - j]).complete();
                }
            }
            inv[k] = -acc / lead;
        }
        Ok(QSeries::new(-self.n0, inv))
    }

    /// Integer power by square-and-multiply; negative exponents invert first.
    pub fn pow_i32(&self, e: i32) -> Result<Self> {
        if e < 0 {
            return self.inverse()?.pow_i32(-e);
        }
        let t = self.truncation_order();
        let mut acc = QSeries::constant(Rational::from(1), t.max(0));
        if self.n0 < 0 && e == 0 {
            return Ok(acc);
        }
        let mut base = self.clone();
        let mut e = e as u32;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        Ok(acc)
    }

    /// `(q d/dq)^k` applied termwise: the coefficient of `q^m` becomes
    /// `m^k · c_m`.  Evaluating a `z`-derivative additionally multiplies by
    /// `(2πi)^k`; see [`QSeries::evaluate_z_derivative`].
    pub fn derivative(&self, k: u32) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(idx, c)| {
                let m = self.n0 + idx as i64;
                (c * Integer::from(m).pow(k)).complete()
            })
            .collect();
        QSeries::new(self.n0, coeffs)
    }

    /// Evaluates `Σ c_m e(mz)` at precision `prec` with a certified error.
    ///
    /// The rounding error is propagated by interval arithmetic; the
    /// truncation tail is bounded by the fitted majorant
    /// `|c_m| ≤ 10·C·e^{4π√m}` with `C` the maximum of `|c_m|·e^{−4π√m}` over
    /// the last (up to) 20 stored coefficients, summed geometrically against
    /// `|q|^m`.  The call fails with [`Error::InsufficientTruncation`] when
    /// the geometric majorant does not converge at `|q|` or the tail bound
    /// exceeds `2^{−prec/2}`; callers pick the truncation with
    /// [`suggested_truncation`].
    pub fn evaluate(&self, z: &BigComplex, prec: u32) -> Result<BigComplex> {
        let im = z.im_real();
        let im_lower = im.value().to_f64() * (1.0 - 1e-12) - im.err_bound().to_f64();
        if im_lower <= 0.0 {
            return Err(Error::Domain(
                "q-series evaluation requires Im(z) > 0".into(),
            ));
        }
        let tail = self.tail_bound(im_lower, prec)?;

        let zp = BigComplex::new(z.re_real().to_prec(prec), z.im_real().to_prec(prec));
        let q = BigComplex::e_of_complex(&zp);
        // Horner over the regular part P(q) = Σ_k coeffs[k] q^k …
        let mut acc = BigComplex::from_real(&BigReal::from_rational(
            self.coeffs.last().expect("non-empty"),
            prec,
        ));
        for c in self.coeffs.iter().rev().skip(1) {
            acc = acc.mul(&q);
            if *c != 0 {
                acc = acc.add(&BigComplex::from_real(&BigReal::from_rational(c, prec)));
            }
        }
        // … then the Laurent prefix q^{n0}.
        let mut value = if self.n0 >= 0 {
            acc.mul(&q.pow_u32(self.n0 as u32))
        } else {
            acc.div(&q.pow_u32((-self.n0) as u32)).map_err(|_| {
                Error::Domain("q-power interval touches zero".into())
            })?
        };
        value.widen_err(&tail);
        Ok(value)
    }

    /// Tail bound of the fitted majorant at `|q| = e^{−2π·im_lower}`, as a
    /// [`Float`] to be added to the evaluation error.
    fn tail_bound(&self, im_lower: f64, prec: u32) -> Result<Float> {
        const FIT_WINDOW: usize = 20;
        let four_pi = 4.0 * std::f64::consts::PI;
        let mut ln_c = f64::NEG_INFINITY;
        let mut fitted = 0usize;
        for (idx, c) in self.coeffs.iter().enumerate().rev() {
            let m = self.n0 + idx as i64;
            if m < 1 || fitted == FIT_WINDOW {
                break;
            }
            fitted += 1;
            if *c == 0 {
                continue;
            }
            let ln_abs = Float::with_val(64, c).abs().ln().to_f64();
            ln_c = ln_c.max(ln_abs - four_pi * (m as f64).sqrt());
        }
        if fitted < 3 {
            return Err(Error::InsufficientTruncation(
                "series too short to fit a tail majorant".into(),
            ));
        }
        if ln_c == f64::NEG_INFINITY {
            ln_c = 0.0;
        }
        let lambda = 2.0 * std::f64::consts::PI * im_lower;
        let m_star = (self.truncation_order() + 1) as f64;
        // monotone-domination ratio for m ≥ m*: e^{2π/√m* − λ}
        let ratio = (2.0 * std::f64::consts::PI / m_star.sqrt() - lambda).exp();
        if ratio >= 0.999 {
            return Err(Error::InsufficientTruncation(format!(
                "tail majorant does not converge at Im(z) ≈ {im_lower:.4} \
                 with truncation order {}",
                self.truncation_order()
            )));
        }
        let ln_tail = ln_c + 10f64.ln() + four_pi * m_star.sqrt() - lambda * m_star
            - (1.0 - ratio).ln();
        if ln_tail > -(prec as f64) / 2.0 * std::f64::consts::LN_2 {
            return Err(Error::InsufficientTruncation(format!(
                "tail bound exp({ln_tail:.1}) exceeds 2^-{}/2 at truncation order {}",
                prec,
                self.truncation_order()
            )));
        }
        let mut t = Float::new(64);
        t.assign_round(Float::with_val(64, ln_tail).exp_ref(), Round::Up);
        Ok(t)
    }

    /// `d^k/dz^k` of the series evaluated at `z`: `(2πi)^k` times the
    /// termwise [`QSeries::derivative`].
    pub fn evaluate_z_derivative(&self, z: &BigComplex, k: u32, prec: u32) -> Result<BigComplex> {
        let v = self.derivative(k).evaluate(z, prec)?;
        let two_pi_i = BigComplex::new(BigReal::zero(prec), BigReal::pi(prec).mul_i64(2));
        Ok(v.mul(&two_pi_i.pow_u32(k)))
    }
}

/// Smallest truncation order for which [`QSeries::evaluate`] at a point with
/// `Im(z) ≥ im_lower` can certify its tail at precision `prec` (with the
/// universal coefficient majorant `e^{4π√m}` and a safety margin).
pub fn suggested_truncation(im_lower: f64, prec: u32) -> i64 {
    assert!(im_lower > 0.0, "need a positive imaginary lower bound");
    let four_pi = 4.0 * std::f64::consts::PI;
    let lambda = 2.0 * std::f64::consts::PI * im_lower;
    let target = -(prec as f64 / 2.0 * std::f64::consts::LN_2 + 80.0);
    let mut t = 32i64;
    while t < (1 << 24) {
        let tf = t as f64;
        if four_pi * tf.sqrt() - lambda * tf <= target && tf.sqrt() * im_lower > 1.0 {
            break;
        }
        t *= 2;
    }
    t
}

// ---------------------------------------------------------------------------
// Named expansions
// ---------------------------------------------------------------------------

/// `∏_{n≥1}(1 − q^{δn})` through `q^t` by the pentagonal-number theorem.
fn pentagonal_series(delta: i64, t: i64) -> QSeries {
    assert!(delta >= 1 && t >= 0);
    let mut coeffs = vec![Rational::new(); (t + 1) as usize];
    coeffs[0] = Rational::from(1);
    let mut k = 1i64;
    loop {
        let g1 = k * (3 * k - 1) / 2;
        if delta * g1 > t {
            break;
        }
        let sign = if k % 2 == 0 { 1 } else { -1 };
        coeffs[(delta * g1) as usize] += sign;
        let g2 = k * (3 * k + 1) / 2;
        if delta * g2 <= t {
            coeffs[(delta * g2) as usize] += sign;
        }
        k += 1;
    }
    QSeries::new(0, coeffs)
}

/// Expansion of `∏_δ η(δτ)^{r_δ}` through `q^t`.
///
/// The product carries the leading exponent `Σ δ·r_δ / 24`, which must be an
/// integer for the quotient to live in integral `q`-powers.
pub fn eta_quotient(exponents: &BTreeMap<i64, i32>, t: i64) -> Result<QSeries> {
    let mut lead = 0i64;
    for (&delta, &r) in exponents {
        if delta < 1 {
            return Err(Error::InvalidParameters(format!(
                "eta quotient level {delta} must be positive"
            )));
        }
        lead += delta * r as i64;
    }
    if lead % 24 != 0 {
        return Err(Error::InvalidParameters(format!(
            "eta quotient has non-integral leading exponent {lead}/24"
        )));
    }
    let shift = lead / 24;
    let t_prod = t - shift;
    if t_prod < 0 {
        return Err(Error::InvalidParameters(
            "truncation order below the leading exponent".into(),
        ));
    }
    let mut prod = QSeries::constant(Rational::from(1), t_prod);
    for (&delta, &r) in exponents {
        if r == 0 {
            continue;
        }
        prod = prod.mul(&pentagonal_series(delta, t_prod).pow_i32(r)?);
    }
    let weight: i64 = exponents.values().map(|&r| r as i64).sum();
    let mut out = QSeries::new(prod.n0 + shift, prod.coeffs);
    if weight % 2 == 0 {
        out = out.with_weight((weight / 2) as i32);
    }
    Ok(out)
}

/// `Δ = η(τ)^24 = q ∏ (1−q^n)^24`, the discriminant cusp form.
pub fn delta_series(t: i64) -> QSeries {
    eta_quotient(&BTreeMap::from([(1, 24)]), t)
        .expect("η^24 is a valid quotient")
        .with_weight(12)
}

/// Eisenstein series `E₄ = 1 + 240 Σ σ₃(m) q^m`.
pub fn e4_series(t: i64) -> QSeries {
    assert!(t >= 0);
    let mut coeffs = vec![Rational::new(); (t + 1) as usize];
    coeffs[0] = Rational::from(1);
    for m in 1..=t {
        coeffs[m as usize] = Rational::from(240u64 * sigma_k(3, m as u64));
    }
    QSeries::new(0, coeffs).with_weight(4)
}

/// Quasi-modular Eisenstein series `E₂ = 1 − 24 Σ σ(m) q^m`.
pub fn e2_series(t: i64) -> QSeries {
    assert!(t >= 0);
    let mut coeffs = vec![Rational::new(); (t + 1) as usize];
    coeffs[0] = Rational::from(1);
    for m in 1..=t {
        coeffs[m as usize] = -Rational::from(24 * sigma(m as u64));
    }
    QSeries::new(0, coeffs).with_weight(2)
}

/// The modular `j`-invariant `j = E₄³/Δ = q^{−1} + 744 + 196884 q + …`.
pub fn j_series(t: i64) -> QSeries {
    let e4 = e4_series(t + 2);
    let delta = delta_series(t + 2);
    let num = e4.mul(&e4).mul(&e4);
    num.mul(&delta.inverse().expect("Δ starts with q"))
        .truncate_to(t)
        .with_weight(0)
}

/// The normalized `j`-invariant `J = j − 744 = q^{−1} + 0 + 196884 q + …`.
pub fn normalized_j_series(t: i64) -> QSeries {
    j_series(t).add_scalar(&Rational::from(-744)).with_weight(0)
}

/// The genus-zero levels of `Γ₀(N)`.
pub const GENUS_ZERO_LEVELS: [i64; 15] = [1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 12, 13, 16, 18, 25];

/// η-quotient realizations of the Hauptmoduln, `(δ, r_δ)` pairs (level 1 is
/// handled through `J` directly).  Every entry is validated at first use by
/// [`probe_hauptmodul_invariance`]; the probe, not this table, is the source
/// of truth.
fn hauptmodul_exponents(level: i64) -> Option<&'static [(i64, i32)]> {
    Some(match level {
        2 => &[(1, 24), (2, -24)],
        3 => &[(1, 12), (3, -12)],
        4 => &[(1, 8), (4, -8)],
        5 => &[(1, 6), (5, -6)],
        6 => &[(1, 5), (2, -1), (3, 1), (6, -5)],
        7 => &[(1, 4), (7, -4)],
        8 => &[(1, 4), (2, -2), (4, 2), (8, -4)],
        9 => &[(1, 3), (9, -3)],
        10 => &[(1, 3), (2, -1), (5, 1), (10, -3)],
        12 => &[(1, 3), (2, -2), (3, -1), (4, 1), (6, 2), (12, -3)],
        13 => &[(1, 2), (13, -2)],
        16 => &[(1, 2), (2, -1), (8, 1), (16, -2)],
        18 => &[(1, 2), (2, -1), (3, -1), (6, 1), (9, 1), (18, -2)],
        25 => &[(1, 1), (25, -1)],
        _ => return None,
    })
}

fn exponent_map(pairs: &[(i64, i32)]) -> BTreeMap<i64, i32> {
    pairs.iter().copied().collect()
}

/// Constant term of the raw η-quotient for a table level (the amount
/// subtracted to normalize the Hauptmodul to `q^{−1} + 0 + O(q)`).
fn hauptmodul_shift(level: i64) -> Rational {
    let pairs = hauptmodul_exponents(level).expect("table level");
    eta_quotient(&exponent_map(pairs), 2)
        .expect("table quotients are integral")
        .coeff(0)
}

/// The Hauptmodul `J_N` of the genus-zero curve `X₀(N)`, normalized to
/// `q^{−1} + 0 + O(q)`; rejects non-genus-zero levels.
pub fn hauptmodul(level: i64, t: i64) -> Result<QSeries> {
    assert!(t >= 0, "hauptmodul needs the constant term in range");
    if level == 1 {
        return Ok(normalized_j_series(t));
    }
    let pairs = hauptmodul_exponents(level).ok_or_else(|| {
        Error::InvalidParameters(format!(
            "Γ₀({level}) has positive genus: no Hauptmodul exists"
        ))
    })?;
    ensure_table_entry_validated(level);
    let raw = eta_quotient(&exponent_map(pairs), t)?;
    let c0 = raw.coeff(0);
    Ok(raw.add_scalar(&(-c0)).with_weight(0))
}

/// Faber elimination: reduces `H^n` by lower powers until the expansion is
/// `q^{−n} + 0·q⁰ + O(q)`; returns the reduced series and the polynomial
/// coefficients (ascending, length `n+1`, leading 1).
fn faber_elimination(h: &QSeries, n: i64) -> (QSeries, Vec<Rational>) {
    debug_assert_eq!(h.leading_exponent(), -1);
    let t = h.truncation_order();
    let mut powers: Vec<QSeries> = vec![QSeries::constant(Rational::from(1), t)];
    for k in 1..=n {
        let prev = &powers[(k - 1) as usize];
        powers.push(if k == 1 { h.clone() } else { prev.mul(h) });
    }
    let mut reduced = powers[n as usize].clone();
    let mut poly = vec![Rational::new(); (n + 1) as usize];
    poly[n as usize] = Rational::from(1);
    for m in (0..n).rev() {
        let gamma = reduced.coeff(-m);
        if gamma != 0 {
            reduced = reduced.sub(&powers[m as usize].mul_scalar(&gamma));
            poly[m as usize] = -gamma;
        }
    }
    (reduced, poly)
}

/// Coefficients (ascending) of the Faber polynomial `F_n` with
/// `F_n(J_N) = q^{−n} + 0·q⁰ + O(q)`.
pub fn faber_polynomial(level: i64, n: i64) -> Result<Vec<Rational>> {
    if n < 1 {
        return Err(Error::InvalidParameters("Faber index n must be ≥ 1".into()));
    }
    let h = hauptmodul(level, n + 1)?;
    Ok(faber_elimination(&h, n).1)
}

/// Fourier expansion of the Niebur–Poincaré function `j_{N,n}`:
/// the Faber polynomial in the Hauptmodul, `q^{−n} + O(q)`, plus the exact
/// constant `c_N(n,0)`.
pub fn niebur_qexp(level: i64, n: i64, t: i64) -> Result<QSeries> {
    if n < 1 {
        return Err(Error::InvalidParameters(
            "Niebur–Poincaré index n must be ≥ 1".into(),
        ));
    }
    let h = hauptmodul(level, t + n)?;
    let (reduced, _) = faber_elimination(&h, n);
    let c = crate::kloosterman::niebur_constant(level, n)?;
    Ok(reduced.add_scalar(&c).truncate_to(t).with_weight(0))
}

// ---------------------------------------------------------------------------
// Fast evaluation through the Dedekind η-function
// ---------------------------------------------------------------------------

/// Dedekind sum `s(d, c) = Σ_{k=1}^{c−1} ((k/c))((dk/c))` as an exact
/// rational (`c > 0`, `gcd(d, c) = 1`).
pub fn dedekind_sum(d: i64, c: i64) -> Rational {
    assert!(c > 0, "dedekind_sum needs c > 0");
    debug_assert_eq!(crate::arith::gcd_i64(d, c), 1);
    // ((k/c))((dk/c)) = (2k − c)(2(dk mod c) − c) / (4c²); dk mod c ≠ 0 for
    // 0 < k < c since gcd(d, c) = 1.
    let mut num = 0i128;
    let d = d.rem_euclid(c);
    for k in 1..c {
        let r = (d as i128 * k as i128).rem_euclid(c as i128);
        num += (2 * k as i128 - c as i128) * (2 * r - c as i128);
    }
    let den = 4i128 * c as i128 * c as i128;
    Rational::from((Integer::from(num), Integer::from(den)))
}

/// Reduces `z` to the `SL₂(Z)` fundamental domain; returns `(w, M)` with
/// `z = M·w`, `|Re w| ≤ ½ + slop`, `|w| ≥ 1 − slop`.
fn reduce_to_fundamental(z: &BigComplex) -> Result<(BigComplex, UnimodularMatrix)> {
    let mut w = z.clone();
    let mut m = UnimodularMatrix::IDENTITY;
    let s = UnimodularMatrix::new(0, -1, 1, 0).expect("det 1");
    for _ in 0..10_000 {
        let re = w.re().to_f64();
        let n = re.round();
        if n != 0.0 {
            let n = n as i64;
            w = w.sub(&BigComplex::from_i64_pair(n, 0, w.prec()));
            m = m.mul(&UnimodularMatrix::new(1, n, 0, 1).expect("det 1"));
        }
        let (re, im) = w.to_f64_pair();
        if re * re + im * im < 1.0 - 1e-15 {
            // w ← −1/w; the accumulated matrix gains S on the right.
            w = s.moebius(&w).map_err(|_| {
                Error::Domain("point collapsed onto the real axis during reduction".into())
            })?;
            m = m.mul(&s);
        } else {
            return Ok((w, m));
        }
    }
    Err(Error::NoConvergence(
        "SL₂(Z) reduction did not terminate".into(),
    ))
}

/// `η(w)` for `w` in (a slop neighborhood of) the fundamental domain, by the
/// pentagonal series `Σ_k (−1)^k u^{(6k+1)²}` in `u = e(w/24)`.
fn eta_fundamental(w: &BigComplex, prec: u32) -> Result<BigComplex> {
    let u = BigComplex::e_of_complex(&w.div_i64(24));
    let (ur, ui) = u.to_f64_pair();
    let u_abs = ur.hypot(ui);
    if !(u_abs < 0.95) {
        return Err(Error::Domain(format!(
            "η argument too close to the real axis: |e(w/24)| ≈ {u_abs:.4}"
        )));
    }
    let bits_per_term = -u_abs.ln() / std::f64::consts::LN_2;
    let mut k_max = 1i64;
    while ((6 * k_max + 5) * (6 * k_max + 5)) as f64 * bits_per_term < (prec + 48) as f64 {
        k_max += 1;
    }
    let mut sum = BigComplex::zero(prec);
    for k in -k_max..=k_max {
        let e = (6 * k + 1) * (6 * k + 1);
        let term = u.pow_u32(e as u32);
        sum = if k.rem_euclid(2) == 0 {
            sum.add(&term)
        } else {
            sum.sub(&term)
        };
    }
    // remaining exponents are ≥ (6k_max+5)²: dominate by the geometric series
    let e_min = ((6 * k_max + 5) * (6 * k_max + 5)) as f64;
    let ln_tail = e_min * u_abs.ln() - (1.0 - u_abs).ln() + 2f64.ln();
    let mut tail = Float::new(64);
    tail.assign_round(Float::with_val(64, ln_tail).exp_ref(), Round::Up);
    sum.widen_err(&tail);
    Ok(sum)
}

/// `η(z)` anywhere in the upper half-plane, through `SL₂(Z)` reduction and
/// the exact multiplier system
/// `η(Mτ) = exp(πi((a+d)/12c − s(d,c) − 1/4)) √(cτ+d) η(τ)` for `c > 0`.
pub fn eta_value(z: &BigComplex, prec: u32) -> Result<BigComplex> {
    let im_lower = z.im().to_f64() - z.err_bound().to_f64();
    if im_lower <= 0.0 {
        return Err(Error::Domain("η requires Im(z) > 0".into()));
    }
    let zp = BigComplex::new(z.re_real().to_prec(prec), z.im_real().to_prec(prec));
    let (w, m) = reduce_to_fundamental(&zp)?;
    let eta_w = eta_fundamental(&w, prec)?;
    // normalize the matrix so that c > 0, or c = 0 with a = d = 1
    let (a, b, c, d) = {
        let (a, b, c, d) = (m.alpha, m.beta, m.gamma, m.delta);
        if c < 0 || (c == 0 && a < 0) {
            (-a, -b, -c, -d)
        } else {
            (a, b, c, d)
        }
    };
    if c == 0 {
        // z = w + b: η picks up e(b/24)
        let phase = BigComplex::e_of(&BigReal::from_rational(&Rational::from((b, 24)), prec));
        return Ok(phase.mul(&eta_w));
    }
    let mut phase = Rational::from((a + d, 24 * c));
    phase -= dedekind_sum(d, c) / 2u32;
    phase -= Rational::from((1, 8));
    let mult = BigComplex::e_of(&BigReal::from_rational(&phase, prec));
    let cwd = w.mul_i64(c).add(&BigComplex::from_i64_pair(d, 0, prec));
    Ok(mult.mul(&cwd.sqrt()?).mul(&eta_w))
}

/// Value of `∏ η(δz)^{r_δ}` by the η fast path.
pub fn eta_quotient_value(
    exponents: &BTreeMap<i64, i32>,
    z: &BigComplex,
    prec: u32,
) -> Result<BigComplex> {
    let mut num = BigComplex::from_i64_pair(1, 0, prec);
    let mut den = BigComplex::from_i64_pair(1, 0, prec);
    for (&delta, &r) in exponents {
        if r == 0 {
            continue;
        }
        let v = eta_value(&z.mul_i64(delta), prec)?.pow_u32(r.unsigned_abs());
        if r > 0 {
            num = num.mul(&v);
        } else {
            den = den.mul(&v);
        }
    }
    num.div(&den)
        .map_err(|_| Error::Domain("η quotient denominator interval touches zero".into()))
}

/// `j(z)` by the η route: with `t = (η(z)/η(2z))^24`, `j = (t + 256)³ / t²`
/// (an exact identity, verified against `E₄³/Δ` in the test suite).
pub fn j_value(z: &BigComplex, prec: u32) -> Result<BigComplex> {
    let t = eta_quotient_value(&BTreeMap::from([(1, 24), (2, -24)]), z, prec)?;
    let num = t.add(&BigComplex::from_i64_pair(256, 0, prec)).pow_u32(3);
    num.div(&t.pow_u32(2))
        .map_err(|_| Error::Domain("η quotient vanished in j evaluation".into()))
}

/// `J(z) = j(z) − 744` by the η route.
pub fn normalized_j_value(z: &BigComplex, prec: u32) -> Result<BigComplex> {
    Ok(j_value(z, prec)?.sub(&BigComplex::from_i64_pair(744, 0, prec)))
}

fn hauptmodul_value_unchecked(level: i64, z: &BigComplex, prec: u32) -> Result<BigComplex> {
    if level == 1 {
        return normalized_j_value(z, prec);
    }
    let pairs = hauptmodul_exponents(level).ok_or_else(|| {
        Error::InvalidParameters(format!(
            "Γ₀({level}) has positive genus: no Hauptmodul exists"
        ))
    })?;
    let raw = eta_quotient_value(&exponent_map(pairs), z, prec)?;
    let shift = BigReal::from_rational(&hauptmodul_shift(level), prec);
    Ok(raw.sub(&BigComplex::from_real(&shift)))
}

/// Value of the Hauptmodul `J_N` at `z` by the η fast path (any `Im(z) > 0`;
/// the quotient is reduced factor by factor, so small imaginary parts cost
/// nothing).
pub fn hauptmodul_value(level: i64, z: &BigComplex, prec: u32) -> Result<BigComplex> {
    if level != 1 && hauptmodul_exponents(level).is_some() {
        ensure_table_entry_validated(level);
    }
    hauptmodul_value_unchecked(level, z, prec)
}

/// Fixed probe points for the modular-invariance check (spread over the
/// strip with moderate imaginary parts).
const PROBE_POINTS: [(f64, f64); 10] = [
    (0.137, 0.83),
    (-0.41, 1.21),
    (0.25, 0.68),
    (0.472, 0.55),
    (-0.05, 1.9),
    (-0.333, 0.77),
    (0.061, 1.13),
    (0.389, 0.91),
    (-0.218, 0.62),
    (0.018, 0.74),
];

/// Probes the table entry for `level`: evaluates `J_N` at the fixed probe
/// points and at their images under `z ↦ z+1` and `z ↦ z/(Nz+1) ∈ Γ₀(N)`,
/// returning the maximum absolute deviation.  This is the source of truth
/// for the η-quotient table.
pub fn probe_hauptmodul_invariance(level: i64, prec: u32) -> Result<f64> {
    let v = UnimodularMatrix::new(1, 0, level, 1)
        .map_err(|_| Error::InvalidParameters("bad level".into()))?;
    let mut worst = 0f64;
    for &(x, y) in &PROBE_POINTS {
        let z = BigComplex::new(BigReal::from_f64(x, prec), BigReal::from_f64(y, prec));
        let h = hauptmodul_value_unchecked(level, &z, prec)?;
        let z_t = z.add(&BigComplex::from_i64_pair(1, 0, prec));
        let h_t = hauptmodul_value_unchecked(level, &z_t, prec)?;
        let z_v = v.moebius(&z).map_err(|_| Error::Domain("Möbius image degenerate".into()))?;
        let h_v = hauptmodul_value_unchecked(level, &z_v, prec)?;
        worst = worst
            .max(h.sub(&h_t).abs().to_f64().abs())
            .max(h.sub(&h_v).abs().to_f64().abs());
    }
    Ok(worst)
}

/// First-use validation gate for the η-quotient table: a failing entry is a
/// build error (fixed data shipped with the crate), hence the panic.
fn ensure_table_entry_validated(level: i64) {
    static VALIDATED: OnceLock<Mutex<Vec<i64>>> = OnceLock::new();
    let cell = VALIDATED.get_or_init(|| Mutex::new(Vec::new()));
    {
        let done = cell.lock().expect("probe registry poisoned");
        if done.contains(&level) {
            return;
        }
    }
    let worst = probe_hauptmodul_invariance(level, 160)
        .expect("modular-invariance probe must evaluate");
    assert!(
        worst < 1e-10,
        "Hauptmodul table entry for level {level} failed the modular-invariance \
         probe (deviation {worst:.3e}): table bug"
    );
    cell.lock().expect("probe registry poisoned").push(level);
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_coeffs(s: &QSeries, start: i64, expected: &[i64]) {
        for (k, &e) in expected.iter().enumerate() {
            assert_eq!(
                s.coeff(start + k as i64),
                Rational::from(e),
                "coefficient of q^{}",
                start + k as i64
            );
        }
    }

    #[test]
    fn delta_matches_ramanujan_tau() {
        let d = delta_series(8);
        assert_coeffs(&d, 1, &[1, -24, 252, -1472, 4830, -6048, -16744, 84480]);
        assert_eq!(d.leading_exponent(), 1);
        assert_eq!(d.weight_tag(), Some(12));
    }

    #[test]
    fn eta_quotient_level_two_expansion() {
        let t = eta_quotient(&BTreeMap::from([(1, 24), (2, -24)]), 3).unwrap();
        assert_eq!(t.leading_exponent(), -1);
        assert_coeffs(&t, -1, &[1, -24, 276, -2048, 11202]);
    }

    #[test]
    fn eta_quotient_rejects_fractional_lead() {
        assert!(eta_quotient(&BTreeMap::from([(1, 1)]), 5).is_err());
        assert!(eta_quotient(&BTreeMap::from([(1, 12), (2, -10)]), 5).is_err());
    }

    #[test]
    fn empty_eta_quotient_is_one() {
        let s = eta_quotient(&BTreeMap::new(), 4).unwrap();
        assert_coeffs(&s, 0, &[1, 0, 0, 0, 0]);
    }

    #[test]
    fn j_series_classical_coefficients() {
        let j = j_series(3);
        assert_eq!(j.leading_exponent(), -1);
        assert_coeffs(&j, -1, &[1, 744, 196884, 21493760, 864299970]);
        let jj = normalized_j_series(2);
        assert_eq!(jj.coeff(0), Rational::new());
        assert_eq!(jj.coeff(1), Rational::from(196884));
    }

    #[test]
    fn e2_series_coefficients() {
        let e2 = e2_series(3);
        assert_coeffs(&e2, 0, &[1, -24, -72, -96]);
    }

    #[test]
    fn series_inverse_round_trip() {
        let d = delta_series(12);
        let prod = d.mul(&d.inverse().unwrap());
        assert_eq!(prod.coeff(0), Rational::from(1));
        for m in 1..=9 {
            assert_eq!(prod.coeff(m), Rational::new(), "q^{m}");
        }
    }

    #[test]
    fn derivative_scales_by_exponent() {
        let jj = normalized_j_series(2);
        let d1 = jj.derivative(1);
        assert_eq!(d1.coeff(-1), Rational::from(-1));
        assert_eq!(d1.coeff(0), Rational::new());
        assert_eq!(d1.coeff(1), Rational::from(196884));
        let d2 = jj.derivative(2);
        assert_eq!(d2.coeff(-1), Rational::from(1));
        assert_eq!(d2.coeff(1), Rational::from(196884));
        assert_eq!(d2.coeff(2), Rational::from(4u64 * 21493760));
    }

    #[test]
    fn hauptmodul_normalization_and_levels() {
        for level in GENUS_ZERO_LEVELS {
            let h = hauptmodul(level, 2).unwrap();
            assert_eq!(h.leading_exponent(), -1, "level {level}");
            assert_eq!(h.coeff(-1), Rational::from(1), "level {level}");
            assert_eq!(h.coeff(0), Rational::new(), "level {level}");
        }
        let h2 = hauptmodul(2, 2).unwrap();
        assert_eq!(h2.coeff(1), Rational::from(276));
        assert_eq!(h2.coeff(2), Rational::from(-2048));
        // genus-one (and higher) levels are rejected
        for level in [11, 14, 15, 17, 20, 24, 36] {
            assert!(hauptmodul(level, 2).is_err(), "level {level}");
        }
    }

    #[test]
    fn niebur_expansions_match_known_values() {
        let n11 = niebur_qexp(1, 1, 2).unwrap();
        assert_eq!(n11.coeff(-1), Rational::from(1));
        assert_eq!(n11.coeff(0), Rational::from(24));
        assert_eq!(n11.coeff(1), Rational::from(196884));

        let n21 = niebur_qexp(2, 1, 2).unwrap();
        assert_eq!(n21.coeff(0), Rational::from(-8));
        assert_eq!(n21.coeff(1), Rational::from(276));

        let n12 = niebur_qexp(1, 2, 2).unwrap();
        assert_eq!(n12.coeff(-2), Rational::from(1));
        assert_eq!(n12.coeff(-1), Rational::new());
        assert_eq!(n12.coeff(0), Rational::from(72));
        assert_eq!(n12.coeff(1), Rational::from(42987520));
    }

    #[test]
    fn faber_consistency_vanishing_middle_coefficients() {
        for level in [1, 2, 3, 5] {
            for n in 1..=3 {
                let s = niebur_qexp(level, n, 2).unwrap();
                let c = crate::kloosterman::niebur_constant(level, n).unwrap();
                assert_eq!(s.coeff(-n), Rational::from(1), "N={level} n={n}");
                for m in (-n + 1)..0 {
                    assert_eq!(s.coeff(m), Rational::new(), "N={level} n={n} q^{m}");
                }
                assert_eq!(s.coeff(0), c, "N={level} n={n}");
            }
        }
    }

    #[test]
    fn faber_polynomial_reproduces_qexp() {
        // F₂ for level 1 is X² − 393768 (J² has constant 2·196884)
        let f = faber_polynomial(1, 2).unwrap();
        assert_eq!(f.len(), 3);
        assert_eq!(f[2], Rational::from(1));
        assert_eq!(f[1], Rational::new());
        assert_eq!(f[0], Rational::from(-393768));
    }

    #[test]
    fn evaluate_j_at_classical_points() {
        let prec = 256;
        let j = j_series(48);
        // j(i) = 1728
        let i = BigComplex::from_i64_pair(0, 1, prec);
        let v = j.evaluate(&i, prec).unwrap();
        let diff = v.sub(&BigComplex::from_i64_pair(1728, 0, prec)).abs();
        assert!(diff.to_f64().abs() < 1e-20, "j(i) off by {}", diff.to_f64());
        assert!(v.err_bound().to_f64() < 1e-20);

        // j(ρ) = 0 at ρ = (−1+i√3)/2
        let rho = {
            let half = BigReal::from_rational(&Rational::from((-1, 2)), prec);
            let s3 = BigReal::from_i64(3, prec).sqrt().unwrap().div_i64(2);
            BigComplex::new(half, s3)
        };
        let v = j.evaluate(&rho, prec).unwrap();
        assert!(v.abs().to_f64() < 1e-20, "j(ρ) = {}", v.abs().to_f64());

        // J(2i) = 66³ − 744 = 286752
        let jj = normalized_j_series(48);
        let v = jj
            .evaluate(&BigComplex::from_i64_pair(0, 2, prec), prec)
            .unwrap();
        let diff = v.sub(&BigComplex::from_i64_pair(286752, 0, prec)).abs();
        assert!(diff.to_f64().abs() < 1e-15);
    }

    #[test]
    fn evaluate_doubling_agreement() {
        let prec = 192;
        let z = BigComplex::new(BigReal::from_f64(0.1, prec), BigReal::from_f64(0.6, prec));
        let v1 = j_series(80).evaluate(&z, prec).unwrap();
        let v2 = j_series(160).evaluate(&z, prec).unwrap();
        let diff = v1.sub(&v2).abs().to_f64().abs();
        let budget = v1.err_bound().to_f64() + v2.err_bound().to_f64();
        assert!(diff <= budget, "diff {diff:e} exceeds combined bound {budget:e}");
    }

    #[test]
    fn evaluate_signals_insufficient_truncation() {
        let prec = 256;
        // Im(z) = 0.05 needs thousands of terms; T = 48 must refuse
        let z = BigComplex::new(BigReal::from_f64(0.3, prec), BigReal::from_f64(0.05, prec));
        match j_series(48).evaluate(&z, prec) {
            Err(Error::InsufficientTruncation(_)) => {}
            other => panic!("expected InsufficientTruncation, got {other:?}"),
        }
    }

    #[test]
    fn suggested_truncation_certifies_evaluation() {
        let prec = 256;
        for &im in &[0.9, 0.4, 0.18] {
            let t = suggested_truncation(im, prec);
            let z = BigComplex::new(BigReal::from_f64(0.21, prec), BigReal::from_f64(im, prec));
            assert!(
                normalized_j_series(t).evaluate(&z, prec).is_ok(),
                "T = {t} insufficient at Im = {im}"
            );
        }
    }

    #[test]
    fn dedekind_sum_values_and_reciprocity() {
        assert_eq!(dedekind_sum(1, 3), Rational::from((1, 18)));
        for c in 2..20 {
            let expected = Rational::from(((c - 1) * (c - 2), 12 * c));
            assert_eq!(dedekind_sum(1, c), expected, "s(1,{c})");
        }
        // s(d,c) + s(c,d) = −1/4 + (c/d + d/c + 1/(cd))/12
        for &(d, c) in &[(5i64, 7i64), (3, 11), (12, 35), (8, 27)] {
            let lhs = dedekind_sum(d, c) + dedekind_sum(c, d);
            let mut rhs = Rational::from((-1, 4));
            rhs += Rational::from((c, 12 * d));
            rhs += Rational::from((d, 12 * c));
            rhs += Rational::from((1, 12 * c * d));
            assert_eq!(lhs, rhs, "reciprocity for ({d},{c})");
        }
    }

    #[test]
    fn eta_value_at_i_matches_gamma_quarter() {
        let prec = 256;
        let i = BigComplex::from_i64_pair(0, 1, prec);
        let v = eta_value(&i, prec).unwrap();
        // η(i) = Γ(1/4) / (2 π^{3/4})
        let gamma_q = Float::with_val(prec, Float::with_val(prec, 0.25).gamma_ref());
        let pi = Float::with_val(prec, rug::float::Constant::Pi);
        let pi34 = Float::with_val(prec, (&pi * Float::with_val(prec, pi.sqrt_ref())).sqrt_ref());
        let expected = gamma_q / (2 * pi34);
        let diff = Float::with_val(prec, v.re() - &expected).abs().to_f64();
        assert!(diff < 1e-40, "η(i) off by {diff:e}");
        assert!(v.im().clone().abs().to_f64() < 1e-40);
    }

    #[test]
    fn eta_to_the_24_matches_delta_series() {
        let prec = 192;
        let d = delta_series(96);
        for &(x, y) in &[(0.0, 1.0), (0.3, 0.4), (-0.45, 0.71), (0.2, 2.3)] {
            let z = BigComplex::new(BigReal::from_f64(x, prec), BigReal::from_f64(y, prec));
            let via_eta = eta_value(&z, prec).unwrap().pow_u32(24);
            let via_series = d.evaluate(&z, prec).unwrap();
            let diff = via_eta.sub(&via_series).abs().to_f64();
            assert!(diff < 1e-25, "Δ mismatch {diff:e} at ({x},{y})");
        }
    }

    #[test]
    fn j_eta_identity_exact_in_series() {
        // (t + 256)³ / t² = E₄³/Δ with t = (η₁/η₂)^24, checked exactly
        let t = eta_quotient(&BTreeMap::from([(1, 24), (2, -24)]), 34).unwrap();
        let lhs = t
            .add_scalar(&Rational::from(256))
            .pow_i32(3)
            .unwrap()
            .mul(&t.pow_i32(-2).unwrap());
        let j = j_series(30);
        for m in -1..=30 {
            assert_eq!(lhs.coeff(m), j.coeff(m), "q^{m}");
        }
    }

    #[test]
    fn fast_and_generic_hauptmodul_agree() {
        let prec = 192;
        let z = BigComplex::new(BigReal::from_f64(0.21, prec), BigReal::from_f64(0.88, prec));
        for level in GENUS_ZERO_LEVELS {
            let fast = hauptmodul_value(level, &z, prec).unwrap();
            let series = hauptmodul(level, 96).unwrap().evaluate(&z, prec).unwrap();
            let diff = fast.sub(&series).abs().to_f64();
            assert!(diff < 1e-25, "level {level}: fast vs series diff {diff:e}");
        }
    }

    #[test]
    fn hauptmodul_invariance_probe_all_levels() {
        for level in GENUS_ZERO_LEVELS {
            let worst = probe_hauptmodul_invariance(level, 192).unwrap();
            assert!(worst < 1e-10, "level {level}: probe deviation {worst:e}");
        }
    }

    #[test]
    fn generic_route_is_gamma0_invariant_for_small_levels() {
        // the series route itself (no η shortcut) sees the invariance for
        // levels where both z and z/(Nz+1) keep a workable imaginary part
        let prec = 160;
        for level in [2i64, 3, 4] {
            let h = hauptmodul(level, 320).unwrap();
            let y = 1.0 / level as f64;
            let z = BigComplex::new(
                BigReal::from_f64(0.083, prec),
                BigReal::from_f64(y, prec),
            );
            let v = UnimodularMatrix::new(1, 0, level, 1).unwrap();
            let zv = v.moebius(&z).unwrap();
            let a = h.evaluate(&z, prec).unwrap();
            let b = h.evaluate(&zv, prec).unwrap();
            let diff = a.sub(&b).abs().to_f64();
            assert!(diff < 1e-10, "level {level}: {diff:e}");
        }
    }

    #[test]
    fn e2_star_quasi_modularity() {
        // E₂*(τ) = −3/(πv) + E₂(τ) satisfies τ^{−2} E₂*(−1/τ) = E₂*(τ)
        let prec = 192;
        let e2 = e2_series(160);
        let e2_star = |z: &BigComplex| -> BigComplex {
            let v = e2.evaluate(z, prec).unwrap();
            let correction = BigReal::from_i64(3, prec)
                .div(&BigReal::pi(prec).mul(&z.im_real()))
                .unwrap();
            v.sub(&BigComplex::from_real(&correction))
        };
        let s = UnimodularMatrix::new(0, -1, 1, 0).unwrap();
        for &(x, y) in &[(0.3, 1.1), (-0.2, 0.8), (0.05, 1.7)] {
            let z = BigComplex::new(BigReal::from_f64(x, prec), BigReal::from_f64(y, prec));
            let lhs = {
                let w = s.moebius(&z).unwrap();
                let tau_sq = z.mul(&z);
                e2_star(&w).div(&tau_sq).unwrap()
            };
            let rhs = e2_star(&z);
            let diff = lhs.sub(&rhs).abs().to_f64();
            assert!(diff < 1e-10, "E₂* fails at ({x},{y}): {diff:e}");
        }
    }
}
