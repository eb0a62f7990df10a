//! Kloosterman sums, first-order Bessel functions, and the Fourier
//! coefficients `c_N(n, m)` of the Niebur–Poincaré functions.
//!
//! The classical sum `K(m, n; c) = Σ_{ad ≡ 1 (c)} e((md + na)/c)` and its
//! half-integral-weight twist `K*` are evaluated exactly: the inner loop
//! accumulates an integer histogram of phase residues and only then touches
//! roots of unity, so the result carries nothing beyond interval rounding
//! error.  The coefficients
//!
//! `c_N(n, m) = 2π√n Σ_{N|c} K(m, −n; c)/c · {I₁ | 2π√n/c | J₁}`
//!
//! are summed directly: for `m = 0` the numerators collapse to Ramanujan
//! sums and the partial sum is exact rational arithmetic; for `m ≠ 0` the
//! conditionally convergent series is summed in dyadic blocks with Cesàro
//! averaging of the last four block partial sums, in parallel over `c` with
//! a deterministic ordered reduction.

use std::f64::consts::PI;

use rayon::prelude::*;
use rug::ops::Pow;
use rug::{Integer, Rational};

use crate::arith::{factorize, gcd_i64, kronecker, moebius, phi, sigma};
use crate::arith::{BigComplex, BigReal};
use crate::{Error, Result};

/// Extended Euclid: returns `(g, x, y)` with `a·x + b·y = g = gcd(a, b)`.
fn ext_gcd(a: i64, b: i64) -> (i64, i64, i64) {
    if b == 0 {
        (a, 1, 0)
    } else {
        let (g, x, y) = ext_gcd(b, a % b);
        (g, y, x - (a / b) * y)
    }
}

/// Inverse of `a` modulo `c` (requires `gcd(a, c) = 1`).
fn mod_inverse(a: i64, c: i64) -> i64 {
    let (g, x, _) = ext_gcd(a.rem_euclid(c), c);
    debug_assert_eq!(g, 1, "mod_inverse needs a unit");
    x.rem_euclid(c)
}

/// Phase-residue histogram for `Σ_{ad ≡ 1 (c)} weight(d)·e(s(a,d)/c)` with
/// `s(a, d) = (m·d + n·a) mod c`.
fn residue_histogram(m: i64, n: i64, c: i64, mut record: impl FnMut(usize, i64)) {
    let mm = m.rem_euclid(c);
    let nn = n.rem_euclid(c);
    for a in 1..c {
        if gcd_i64(a, c) != 1 {
            continue;
        }
        let d = mod_inverse(a, c);
        let s = (mm * d + nn * a).rem_euclid(c);
        record(s as usize, d);
    }
}

/// The classical Kloosterman sum `K(m, n; c)`, exactly.
///
/// The value is real — the terms for `(a, d)` and `(−a, −d)` are conjugate —
/// so the (interval-tiny) imaginary part is folded into the error bound.
pub fn kloosterman(m: i64, n: i64, c: i64, prec: u32) -> Result<BigReal> {
    if c < 1 {
        return Err(Error::InvalidParameters(format!(
            "Kloosterman modulus c = {c} must be positive"
        )));
    }
    if c == 1 {
        return Ok(BigReal::from_i64(1, prec));
    }
    let mut hist = vec![0i64; c as usize];
    residue_histogram(m, n, c, |s, _| hist[s] += 1);

    let w = BigComplex::e_of(&BigReal::from_rational(&Rational::from((1, c)), prec));
    let mut w_pow = BigComplex::from_i64_pair(1, 0, prec);
    let mut acc = BigComplex::zero(prec);
    for (s, &count) in hist.iter().enumerate() {
        if count != 0 {
            acc = acc.add(&w_pow.mul_i64(count));
        }
        if s + 1 < hist.len() {
            w_pow = w_pow.mul(&w);
        }
    }
    let mut re = acc.re_real();
    re.widen_err(&acc.im_real().abs_upper());
    Ok(re)
}

/// The half-integral-weight Kloosterman sum
/// `K*(m, n; c) = Σ_{ad ≡ 1 (c)} (c/d) (−4/d)^{3/2} e((na + md)/c)` for
/// `4 | c`, with `(−4/d)^{3/2}` read as `ε_d^{−3}`: `1` for `d ≡ 1 (4)` and
/// `i` for `d ≡ 3 (4)`.  The branch is a pinned convention, validated by the
/// exponential-sum identity in the traces module.
pub fn half_integral_kloosterman(m: i64, n: i64, c: i64, prec: u32) -> Result<BigComplex> {
    if c < 4 || c % 4 != 0 {
        return Err(Error::InvalidParameters(format!(
            "half-integral Kloosterman sum needs 4 | c, got c = {c}"
        )));
    }
    // all units mod c are odd; split the histogram by d mod 4
    let mut hist_one = vec![0i64; c as usize];
    let mut hist_three = vec![0i64; c as usize];
    residue_histogram(m, n, c, |s, d| {
        let chi = kronecker(c, d);
        if d % 4 == 1 {
            hist_one[s] += chi as i64;
        } else {
            hist_three[s] += chi as i64;
        }
    });

    let w = BigComplex::e_of(&BigReal::from_rational(&Rational::from((1, c)), prec));
    let mut w_pow = BigComplex::from_i64_pair(1, 0, prec);
    let mut acc = BigComplex::zero(prec);
    for s in 0..c as usize {
        let (h1, h3) = (hist_one[s], hist_three[s]);
        if h1 != 0 || h3 != 0 {
            // weight 1·h1 + i·h3
            acc = acc.add(&w_pow.mul(&BigComplex::from_i64_pair(h1, h3, prec)));
        }
        if s + 1 < c as usize {
            w_pow = w_pow.mul(&w);
        }
    }
    Ok(acc)
}

// ---------------------------------------------------------------------------
// Bessel functions
// ---------------------------------------------------------------------------

/// Switch point between the power series and the asymptotic expansion.
const BESSEL_SWITCH: f64 = 20.0;

/// `I₁(x)` by its power series `Σ_k (x/2)^{2k+1} / (k!(k+1)!)` (positive
/// terms; the tail is dominated by twice the last included term once the
/// term ratio drops below ¼).
fn bessel_i1_series(x: &BigReal) -> BigReal {
    let prec = x.prec();
    let y = x.div_i64(2);
    let y2 = y.mul(&y);
    let mut term = y.clone();
    let mut sum = y;
    let thresh = 2f64.powi(-(prec as i32) - 16);
    let x_f = x.to_f64();
    for k in 1..100_000i64 {
        term = term.mul(&y2).div_i64(k * (k + 1));
        sum = sum.add(&term);
        let scale = sum.abs_upper().to_f64().max(1e-300);
        if (k * (k + 1)) as f64 > x_f * x_f && term.abs_upper().to_f64() < thresh * scale {
            break;
        }
    }
    let mut out = sum;
    let mut tail = term.abs_upper();
    tail *= 2;
    out.widen_err(&tail);
    out
}

/// `J₁(x)` by its alternating power series, computed with a precision bump
/// of ~1.5 bits per unit of `x` to absorb the `e^x`-scale cancellation.
fn bessel_j1_series(x: &BigReal) -> BigReal {
    let prec = x.prec();
    let x_f = x.to_f64().abs();
    let bumped = prec + (1.5 * x_f) as u32 + 16;
    let xb = x.to_prec(bumped);
    let y = xb.div_i64(2);
    let y2 = y.mul(&y);
    let mut term = y.clone();
    let mut sum = y;
    let thresh = 2f64.powi(-(prec as i32) - 16);
    for k in 1..100_000i64 {
        term = term.mul(&y2).div_i64(-(k * (k + 1)));
        sum = sum.add(&term);
        if (k * (k + 1)) as f64 > x_f * x_f && term.abs_upper().to_f64() < thresh {
            break;
        }
    }
    // alternating with decreasing terms past the peak: remainder ≤ |term|
    let mut out = sum.to_prec(prec);
    out.widen_err(&term.abs_upper());
    out
}

/// Asymptotic coefficients `a_k(1)`: `a_0 = 1`,
/// `a_k = a_{k−1} · (4 − (2k−1)²) / (8k)` — exact rationals, folded into the
/// running term below.
fn asymptotic_terms(x: &BigReal, limit: usize) -> (Vec<BigReal>, BigReal) {
    let prec = x.prec();
    let x_inv = BigReal::from_i64(1, prec).div(x).expect("x > 20");
    let mut terms = vec![BigReal::from_i64(1, prec)];
    let mut next = terms[0].mul_i64(4 - 1).div_i64(8).mul(&x_inv);
    for k in 2..=limit {
        terms.push(next.clone());
        let k = k as i64;
        next = next.mul_i64(4 - (2 * k - 1).pow(2)).div_i64(8 * k).mul(&x_inv);
        // stop at the smallest term: beyond it the expansion diverges
        if terms.len() > 4
            && next.abs_upper().to_f64().abs() >= terms.last().unwrap().abs_upper().to_f64().abs()
        {
            break;
        }
    }
    (terms, next)
}

/// `I₁(x)` for large `x`: `e^x/√(2πx) · Σ (−1)^k a_k(1)/x^k`, remainder
/// dominated by twice the first omitted term plus the reflected `e^{−x}`
/// contribution.
fn bessel_i1_asymptotic(x: &BigReal) -> Result<BigReal> {
    let prec = x.prec();
    let (terms, next) = asymptotic_terms(x, 400);
    let mut s = BigReal::zero(prec);
    for (k, t) in terms.iter().enumerate() {
        s = if k % 2 == 0 { s.add(t) } else { s.sub(t) };
    }
    let two_pi_x = BigReal::pi(prec).mul_i64(2).mul(x);
    let pref = x.exp().div(&two_pi_x.sqrt()?)?;
    let mut out = pref.mul(&s);
    let mut tail = pref.mul(&next).abs_upper();
    tail *= 2;
    // reflection term e^{−x}/√(2πx)·Σ a_k/x^k, crudely dominated
    let mut refl = x.neg().exp().div(&two_pi_x.sqrt()?)?.abs_upper();
    refl *= 2;
    tail += refl;
    out.widen_err(&tail);
    Ok(out)
}

/// `J₁(x)` for large `x`:
/// `√(2/(πx)) (cos ω Σ (−1)^k a_{2k}/x^{2k} − sin ω Σ (−1)^k a_{2k+1}/x^{2k+1})`
/// with `ω = x − 3π/4`.
fn bessel_j1_asymptotic(x: &BigReal) -> Result<BigReal> {
    let prec = x.prec();
    let (terms, next) = asymptotic_terms(x, 400);
    let mut p = BigReal::zero(prec);
    let mut q = BigReal::zero(prec);
    for (j, t) in terms.iter().enumerate() {
        let negate = (j / 2) % 2 == 1;
        let target = if j % 2 == 0 { &mut p } else { &mut q };
        *target = if negate { target.sub(t) } else { target.add(t) };
    }
    let omega = x.sub(&BigReal::pi(prec).mul_i64(3).div_i64(4));
    let (sin_w, cos_w) = omega.sin_cos();
    let pref = {
        let pi_x = BigReal::pi(prec).mul(x);
        BigReal::from_i64(2, prec).div(&pi_x)?.sqrt()?
    };
    let mut out = pref.mul(&cos_w.mul(&p).sub(&sin_w.mul(&q)));
    let mut tail = pref.mul(&next).abs_upper();
    tail *= 4;
    out.widen_err(&tail);
    Ok(out)
}

/// First-order modified Bessel function `I₁(x)`, `x ≥ 0`, with error bound.
pub fn bessel_i1(x: &BigReal) -> Result<BigReal> {
    if x.value().is_sign_negative() && x.excludes_zero() {
        return Err(Error::Domain("bessel_I1 requires x ≥ 0".into()));
    }
    if x.to_f64() <= BESSEL_SWITCH {
        Ok(bessel_i1_series(x))
    } else {
        bessel_i1_asymptotic(x)
    }
}

/// First-order Bessel function `J₁(x)`, `x ≥ 0`, with error bound.
pub fn bessel_j1(x: &BigReal) -> Result<BigReal> {
    if x.value().is_sign_negative() && x.excludes_zero() {
        return Err(Error::Domain("bessel_J1 requires x ≥ 0".into()));
    }
    if x.to_f64() <= BESSEL_SWITCH {
        Ok(bessel_j1_series(x))
    } else {
        bessel_j1_asymptotic(x)
    }
}

// ---------------------------------------------------------------------------
// Niebur–Poincaré coefficients
// ---------------------------------------------------------------------------

/// Ramanujan sum `c_c(n) = Σ_{a mod c, (a,c)=1} e(an/c) = μ(c/g)·φ(c)/φ(c/g)`
/// with `g = gcd(c, n)`.
pub fn ramanujan_sum(c: u64, n: u64) -> i64 {
    assert!(c >= 1);
    let g = if n == 0 {
        c
    } else {
        gcd_i64(c as i64, (n % c.max(1)) as i64) as u64
    };
    let g = if g == 0 { c } else { g };
    let q = c / g;
    let mu = moebius(q);
    if mu == 0 {
        0
    } else {
        mu * (phi(c) / phi(q)) as i64
    }
}

/// The exact constant term `c_N(n, 0)` of the Niebur–Poincaré function.
///
/// From `c_N(n,0) = 4π²n Σ_{N|c} c_c(n)/c²` and
/// `Σ_{c≥1} c_c(n)/c² = (6/π²)σ(n)/n` (both absolutely convergent), the
/// restricted sum Euler-factorizes: for `N = ∏ p^{e_p}`,
/// `c_N(n,0) = 24σ(n) ∏_p S_p(e_p)/S_p(0)` with
/// `S_p(e) = Σ_{j ≥ e} c_{p^j}(n) p^{−2j}` (a finite sum — the Ramanujan sum
/// vanishes for `j ≥ v_p(n) + 2`).  This reproduces `24σ(n)` at `N = 1` and
/// `−24/(p²−1)·(σ(n) − p²σ(n/p))` at prime levels.
pub fn niebur_constant(level: i64, n: i64) -> Result<Rational> {
    if level < 1 || n < 1 {
        return Err(Error::InvalidParameters(
            "niebur_constant needs level ≥ 1 and n ≥ 1".into(),
        ));
    }
    let mut out = Rational::from(24 * sigma(n as u64));
    for (p, e) in factorize(level as u64) {
        let v_p = {
            let mut v = 0u32;
            let mut m = n as u64;
            while m % p == 0 {
                v += 1;
                m /= p;
            }
            v
        };
        let local = |start: u32| -> Rational {
            let mut s = Rational::new();
            for j in start..=v_p + 1 {
                let c = Integer::from(p).pow(j);
                let cc = ramanujan_sum(c.to_u64().expect("p^j fits"), n as u64);
                if cc != 0 {
                    s += Rational::from((Integer::from(cc), Integer::from(p).pow(2 * j)));
                }
            }
            s
        };
        let denom = local(0);
        if denom == 0 {
            return Err(Error::Domain(
                "unexpected vanishing local factor in c_N(n,0)".into(),
            ));
        }
        out *= local(e) / denom;
    }
    Ok(out)
}

/// f64 power series for `I₁` (positive terms; fine through x ≈ 600).
fn i1_f64(x: f64) -> f64 {
    if x > BESSEL_SWITCH {
        return i1_asymptotic_f64(x);
    }
    let y = x / 2.0;
    let y2 = y * y;
    let mut term = y;
    let mut sum = y;
    for k in 1..400 {
        term *= y2 / ((k * (k + 1)) as f64);
        sum += term;
        if term < sum.abs() * 1e-18 {
            break;
        }
    }
    sum
}

fn i1_asymptotic_f64(x: f64) -> f64 {
    let mut term = 1.0;
    let mut s = 0.0;
    for k in 0i64.. {
        s += if k % 2 == 0 { term } else { -term };
        let next = term * ((4 - (2 * k + 1).pow(2)) as f64) / ((8 * (k + 1)) as f64) / x;
        if next.abs() >= term.abs() || next.abs() < 1e-19 {
            break;
        }
        term = next;
    }
    x.exp() / (2.0 * PI * x).sqrt() * s
}

/// f64 `J₁`: alternating series below the switch (usable to x ≈ 20),
/// asymptotic cosine form beyond.
fn j1_f64(x: f64) -> f64 {
    if x > BESSEL_SWITCH {
        let mut c = vec![1.0f64];
        for j in 1..40i64 {
            let next = c[(j - 1) as usize] * ((4 - (2 * j - 1).pow(2)) as f64) / ((8 * j) as f64) / x;
            if next.abs() >= c[(j - 1) as usize].abs() {
                break;
            }
            c.push(next);
        }
        let (mut p, mut q) = (0.0, 0.0);
        for (j, t) in c.iter().enumerate() {
            let v = if (j / 2) % 2 == 1 { -t } else { *t };
            if j % 2 == 0 {
                p += v;
            } else {
                q += v;
            }
        }
        let w = x - 3.0 * PI / 4.0;
        return (2.0 / (PI * x)).sqrt() * (w.cos() * p - w.sin() * q);
    }
    let y = x / 2.0;
    let y2 = y * y;
    let mut term = y;
    let mut sum = y;
    for k in 1..400 {
        term *= -y2 / ((k * (k + 1)) as f64);
        sum += term;
        if term.abs() < 1e-18 {
            break;
        }
    }
    sum
}

/// Scratch buffers for the per-`c` Kloosterman histogram (reused across the
/// parallel iteration to avoid churn).
#[derive(Default)]
struct KloostermanScratch {
    unit: Vec<bool>,
    units: Vec<i64>,
    prefix: Vec<i64>,
    hist: Vec<i32>,
}

/// `K(m, n; c)` in f64 via unit sieve, batched modular inversion, and an
/// incrementally rotated root of unity (resynced every 8192 steps).
fn kloosterman_f64(m: i64, n: i64, c: i64, scratch: &mut KloostermanScratch) -> f64 {
    if c == 1 {
        return 1.0;
    }
    let cu = c as usize;
    scratch.unit.clear();
    scratch.unit.resize(cu, true);
    scratch.unit[0] = false;
    for (p, _) in factorize(c as u64) {
        let mut k = 0usize;
        while k < cu {
            scratch.unit[k] = false;
            k += p as usize;
        }
    }
    scratch.units.clear();
    scratch.prefix.clear();
    let mut running = 1i64;
    for a in 1..c {
        if scratch.unit[a as usize] {
            scratch.units.push(a);
            running = ((running as i128 * a as i128) % c as i128) as i64;
            scratch.prefix.push(running);
        }
    }
    let mut inv_suffix = mod_inverse(running, c);
    scratch.hist.clear();
    scratch.hist.resize(cu, 0);
    let mm = m.rem_euclid(c);
    let nn = n.rem_euclid(c);
    for idx in (0..scratch.units.len()).rev() {
        let a = scratch.units[idx];
        let d = if idx == 0 {
            inv_suffix
        } else {
            ((scratch.prefix[idx - 1] as i128 * inv_suffix as i128) % c as i128) as i64
        };
        inv_suffix = ((inv_suffix as i128 * a as i128) % c as i128) as i64;
        let s = ((mm as i128 * d as i128 + nn as i128 * a as i128) % c as i128) as usize;
        scratch.hist[s] += 1;
    }
    let step = 2.0 * PI / c as f64;
    let (wr, wi) = (step.cos(), step.sin());
    let (mut cr, mut ci) = (1.0f64, 0.0f64);
    let mut acc = 0.0;
    for (s, &h) in scratch.hist.iter().enumerate() {
        if h != 0 {
            acc += h as f64 * cr;
        }
        if s % 8192 == 8191 {
            let phase = step * (s + 1) as f64;
            cr = phase.cos();
            ci = phase.sin();
        } else {
            let nr = cr * wr - ci * wi;
            ci = cr * wi + ci * wr;
            cr = nr;
        }
    }
    acc
}

/// Partial sum of the Fourier coefficient `c_N(n, m)` over `N | c ≤ C_max`.
///
/// `m = 0` is summed exactly (Ramanujan-sum numerators, absolutely
/// convergent); `m ≠ 0` uses the f64 fast path with dyadic-block Cesàro
/// averaging.  The reported error is a heuristic tail indicator — the spread
/// of the averaged block partial sums (plus the half-range increment for
/// `m = 0`) — not a rigorous bound.
pub fn niebur_coefficient(level: i64, n: i64, m: i64, c_max: i64, prec: u32) -> Result<BigReal> {
    if level < 1 || n < 1 {
        return Err(Error::InvalidParameters(
            "niebur_coefficient needs level ≥ 1 and n ≥ 1".into(),
        ));
    }
    if c_max < level {
        return Ok(BigReal::zero(prec));
    }

    if m == 0 {
        // 4π²n Σ c_c(n)/c², exact partial sums at C_max and C_max/2
        let mut full = Rational::new();
        let mut half = Rational::new();
        let mut c = level;
        while c <= c_max {
            let cc = ramanujan_sum(c as u64, n as u64);
            if cc != 0 {
                let term = Rational::from((Integer::from(cc), Integer::from(c).pow(2)));
                full += &term;
                if c <= c_max / 2 {
                    half += term;
                }
            }
            c += level;
        }
        let scale = BigReal::pi(prec).pow_u32(2).mul_i64(4 * n);
        let mut out = scale.mul(&BigReal::from_rational(&full, prec));
        let indicator = scale
            .mul(&BigReal::from_rational(&(full - half), prec))
            .abs_upper();
        out.widen_err(&indicator);
        return Ok(out);
    }

    let cs: Vec<i64> = (1..)
        .map(|k| k * level)
        .take_while(|&c| c <= c_max)
        .collect();
    let arg = 4.0 * PI * ((m.abs() as f64) * n as f64).sqrt();
    let terms: Vec<f64> = cs
        .par_iter()
        .map_init(KloostermanScratch::default, |scratch, &c| {
            let k = kloosterman_f64(m, -n, c, scratch);
            let x = arg / c as f64;
            let bessel = if m > 0 {
                i1_f64(x) / (m as f64).sqrt()
            } else {
                j1_f64(x) / ((-m) as f64).sqrt()
            };
            k / c as f64 * bessel
        })
        .collect();

    // dyadic blocks ending at C/8, C/4, C/2, C; Cesàro over whichever exist
    let ends: Vec<i64> = [c_max / 8, c_max / 4, c_max / 2, c_max]
        .into_iter()
        .filter(|&e| e >= level)
        .collect();
    let mut partials = Vec::with_capacity(ends.len());
    let mut acc = 0.0;
    let mut next_end = 0usize;
    for (i, &c) in cs.iter().enumerate() {
        acc += terms[i];
        while next_end < ends.len()
            && (i + 1 == cs.len() || cs[i + 1] > ends[next_end])
            && c <= ends[next_end]
        {
            partials.push(acc);
            next_end += 1;
        }
    }
    while partials.len() < ends.len() {
        partials.push(acc);
    }
    let scale = 2.0 * PI * (n as f64).sqrt();
    let mean = scale * partials.iter().sum::<f64>() / partials.len() as f64;
    let spread = scale
        * (partials.iter().cloned().fold(f64::MIN, f64::max)
            - partials.iter().cloned().fold(f64::MAX, f64::min));
    let mut out = BigReal::from_f64(mean, prec);
    let err = rug::Float::with_val(64, spread.abs() + 1e-8 * (1.0 + mean.abs()));
    out.widen_err(&err);
    Ok(out)
}
