//! Regularized inner products of the weight-2 meromorphic forms `f_d`.
//!
//! For negative discriminants `d` the forms `f_d = f*_{d,1,1} − H(d,1,1)E₂*`
//! have a divergent Petersson pairing whose regularization evaluates in
//! closed form through CM values of the normalized Hauptmodul
//! `J = j − 744` and its derivatives:
//!
//! * **distinct discriminants** (`δ·d` not a perfect square):
//!   `⟨f_d, f_δ⟩ = (1/2π) Σ_{Q,𝒬} log|J(z_Q) − J(z_𝒬)| / (w_Q w_𝒬)`,
//!   a double sum over the class representatives of both discriminants;
//! * **equal discriminants**, `−d/3` and `−d/4` both non-square (so every
//!   class has trivial stabilizer): the double sum over distinct classes
//!   plus the diagonal `Σ_Q log|√|d|·J′(z_Q)/Q(1,0)|`, all over `2π`;
//! * **exceptional diagonal** `d ∈ {−3, −4}`:
//!   `⟨f_{−3}, f_{−3}⟩ = (1/18π) log|(√3/2)·J‴((1+i√3)/2)|` and
//!   `⟨f_{−4}, f_{−4}⟩ = (1/8π) log|2·J″(i)|`.
//!
//! Derivatives are with respect to `z`, so `J⁽ᵏ⁾` carries a `(2πi)ᵏ`
//! factor relative to the `q`-derivative; the representative-independence
//! test below guards that convention (the diagonal summand is invariant
//! under replacing a class representative by any unimodular translate).
//!
//! The closed forms are trusted as given; the defining regularized
//! integrals (analytic continuation in `s` plus a truncated-fundamental-
//! domain limit at the cusp) are *not* re-derived numerically here.
//! Combinations covered by no case — `δ/d` a square, or a diagonal `d`
//! whose classes have extra units — are rejected with
//! [`Error::CaseNotCovered`].

use crate::arith::{BigComplex, BigReal, DiscriminantSplit};
use crate::forms::{enumerate_classes, QuadraticForm};
use crate::qseries::{normalized_j_series, normalized_j_value, suggested_truncation};
use crate::{Error, Result};

/// Which closed-form evaluation produced an inner product.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InnerProductCase {
    /// Distinct discriminants, weighted double sum of Green's logarithms.
    Distinct,
    /// Equal discriminants with trivial stabilizers: diagonal derivative
    /// terms plus off-diagonal logarithms.
    Diagonal,
    /// The unit-rich discriminants −3 and −4, evaluated from a single
    /// higher derivative of `J`.
    Exceptional,
}

impl InnerProductCase {
    /// Report label: `"i"`, `"ii"`, or `"iii"`.
    pub fn label(&self) -> &'static str {
        match self {
            InnerProductCase::Distinct => "i",
            InnerProductCase::Diagonal => "ii",
            InnerProductCase::Exceptional => "iii",
        }
    }
}

/// An evaluated inner product together with the case that produced it.
#[derive(Debug, Clone)]
pub struct InnerProductReport {
    pub value: BigReal,
    pub case: InnerProductCase,
}

/// `log|J(z) − J(z′)|` with propagated error, the building block of the
/// double sums (a Green's function on the modular curve up to `−1/2π`).
///
/// Signals [`Error::NearCoincidence`] when `|J(z) − J(z′)|` is not
/// resolved away from zero (below ten times its own error bound), which
/// happens exactly when the points are equivalent.
pub fn green_log(z1: &BigComplex, z2: &BigComplex, prec: u32) -> Result<BigReal> {
    let j1 = normalized_j_value(z1, prec)?;
    let j2 = normalized_j_value(z2, prec)?;
    let diff = j1.sub(&j2);
    let mag = diff.abs();
    if mag.value().to_f64() < 10.0 * mag.err_bound().to_f64() {
        return Err(Error::NearCoincidence(format!(
            "|J(z) - J(z')| = {:.3e} is below 10x its error bound {:.3e}; \
             the points look equivalent",
            mag.value().to_f64(),
            mag.err_bound().to_f64()
        )));
    }
    diff.ln_abs()
}

/// `J⁽ᵏ⁾(z)` (`z`-derivative, including the `(2πi)ᵏ` factor) from the
/// `q`-expansion at a truncation certified for `Im z`.
fn j_derivative_at(k: u32, z: &BigComplex, prec: u32) -> Result<BigComplex> {
    let im = z.im().to_f64();
    let t = suggested_truncation(im * 0.999, prec);
    normalized_j_series(t).evaluate_z_derivative(z, k, prec)
}

/// The diagonal summand of the equal-discriminant case for one class
/// representative `Q = [a, b, c]`: `log|√|disc|·J′(z_Q)/a|`.
///
/// The value depends only on the class: replacing `Q` by `Q∘M` with
/// unimodular `M` moves `z_Q` and changes `a = Q(1,0)`, but the weight-2
/// transformation of `J′` compensates exactly.
pub fn diagonal_summand(form: &QuadraticForm, prec: u32) -> Result<BigReal> {
    if !form.is_positive_definite() {
        return Err(Error::InvalidParameters(format!(
            "diagonal summand needs a positive definite form, got [{}, {}, {}]",
            form.a, form.b, form.c
        )));
    }
    let z = form.heegner_point(prec)?;
    let jp = j_derivative_at(1, &z, prec)?;
    let root = BigReal::from_i64(-form.disc(), prec).sqrt()?;
    jp.abs().mul(&root).div_i64(form.a).ln()
}

fn is_perfect_square(n: i64) -> bool {
    if n < 0 {
        return false;
    }
    let r = (n as f64).sqrt().round() as i64;
    (r - 1..=r + 1).any(|s| s >= 0 && s * s == n)
}

fn validate_discriminant(d: i64) -> Result<()> {
    if d >= 0 || d.rem_euclid(4) > 1 {
        return Err(Error::InvalidParameters(format!(
            "{d} is not a negative discriminant"
        )));
    }
    Ok(())
}

/// The regularized inner product `⟨f_d, f_δ⟩`, dispatched to the matching
/// closed-form case (see the module docs for the formulas and guards).
pub fn inner_product(d: i64, delta: i64, prec: u32) -> Result<InnerProductReport> {
    validate_discriminant(d)?;
    validate_discriminant(delta)?;
    if d == delta {
        return if d == -3 || d == -4 {
            case_exceptional(d, prec)
        } else if !is_perfect_square(-3 * d) && !is_perfect_square(-d) {
            case_diagonal(d, prec)
        } else {
            Err(Error::CaseNotCovered(format!(
                "the diagonal pairing for d = {d} has classes with extra \
                 units (-d/3 or -d/4 is a square) and no closed form here"
            )))
        };
    }
    if is_perfect_square(d * delta) {
        return Err(Error::CaseNotCovered(format!(
            "delta/d = {delta}/{d} is a square of a rational; the distinct-\
             discriminant closed form requires it not to be"
        )));
    }
    case_distinct(d, delta, prec)
}

fn heegner_points_with_weights(d: i64, prec: u32) -> Result<Vec<(QuadraticForm, BigComplex, i64)>> {
    let split = DiscriminantSplit::new(d, 1, 1)?;
    enumerate_classes(&split)?
        .into_iter()
        .map(|class| {
            let z = class.form.heegner_point(prec)?;
            Ok((class.form, z, class.weight))
        })
        .collect()
}

fn case_distinct(d: i64, delta: i64, prec: u32) -> Result<InnerProductReport> {
    let left = heegner_points_with_weights(d, prec)?;
    let right = heegner_points_with_weights(delta, prec)?;
    let mut acc = BigReal::zero(prec);
    for (_, z_l, w_l) in &left {
        for (_, z_r, w_r) in &right {
            let g = green_log(z_l, z_r, prec)?;
            acc = acc.add(&g.div_i64(w_l * w_r));
        }
    }
    Ok(InnerProductReport {
        value: acc.div(&BigReal::pi(prec).mul_i64(2))?,
        case: InnerProductCase::Distinct,
    })
}

fn case_diagonal(d: i64, prec: u32) -> Result<InnerProductReport> {
    let classes = heegner_points_with_weights(d, prec)?;
    // the non-square guard on −d/3, −d/4 rules out stabilizers
    if let Some((form, _, w)) = classes.iter().find(|(_, _, w)| *w != 1) {
        return Err(Error::CaseNotCovered(format!(
            "class [{}, {}, {}] has weight {w}; the diagonal closed form \
             assumes trivial stabilizers",
            form.a, form.b, form.c
        )));
    }
    let mut acc = BigReal::zero(prec);
    for (form, _, _) in &classes {
        acc = acc.add(&diagonal_summand(form, prec)?);
    }
    for (i, (_, z_i, _)) in classes.iter().enumerate() {
        for (j, (_, z_j, _)) in classes.iter().enumerate() {
            if i != j {
                acc = acc.add(&green_log(z_i, z_j, prec)?);
            }
        }
    }
    Ok(InnerProductReport {
        value: acc.div(&BigReal::pi(prec).mul_i64(2))?,
        case: InnerProductCase::Diagonal,
    })
}

fn case_exceptional(d: i64, prec: u32) -> Result<InnerProductReport> {
    let value = match d {
        -4 => {
            // (1/8π)·log|2J″(i)|
            let i_pt = BigComplex::from_i64_pair(0, 1, prec);
            let j2 = j_derivative_at(2, &i_pt, prec)?;
            j2.abs().mul_i64(2).ln()?.div(&BigReal::pi(prec).mul_i64(8))?
        }
        -3 => {
            // (1/18π)·log|(√3/2)·J‴((1+i√3)/2)|
            let half = BigReal::from_rational(&rug::Rational::from((1, 2)), prec);
            let rho = BigComplex::new(half, BigReal::from_i64(3, prec).sqrt()?.div_i64(2));
            let j3 = j_derivative_at(3, &rho, prec)?;
            let root_half = BigReal::from_i64(3, prec).sqrt()?.div_i64(2);
            j3.abs().mul(&root_half).ln()?.div(&BigReal::pi(prec).mul_i64(18))?
        }
        _ => unreachable!("dispatch guarantees d in {{-3, -4}}"),
    };
    Ok(InnerProductReport { value, case: InnerProductCase::Exceptional })
}
