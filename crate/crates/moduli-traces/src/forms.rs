//! Integral binary quadratic forms, their `SL₂(Z)` action, reduction,
//! automorphs, `Γ₀(N)`-equivalence, and Heegner class enumeration.
//!
//! A form `Q = [a, b, c]` stands for `Q(X, Y) = aX² + bXY + cY²` with
//! discriminant `Δ = b² − 4ac`.  Matrices act on the **right**:
//! `(Q ∘ M)(X, Y) = Q(αX + βY, γX + δY)` for `M = (α β; γ δ)`, so that
//! `Q ∘ (MM') = (Q ∘ M) ∘ M'`.  On Heegner points the action is inverse:
//! `z_{Q∘M} = M⁻¹ z_Q`.
//!
//! For a negative discriminant `Δ = dD` and level `N`, the classes of
//! positive definite forms with `N | a` under `Γ₀(N)` are the Heegner
//! classes over which twisted traces are summed; each carries the weight
//! denominator `w_{N,Q} = |Aut(Q) ∩ Γ₀(N)| / 2 ∈ {1, 2, 3}`.

use crate::arith::{gcd_i64, BigComplex, BigReal, DiscriminantSplit};
use crate::{Error, Result};

/// An integral binary quadratic form `[a, b, c]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct QuadraticForm {
    /// Coefficient of `X²`.
    pub a: i64,
    /// Coefficient of `XY`.
    pub b: i64,
    /// Coefficient of `Y²`.
    pub c: i64,
}

/// An element of `SL₂(Z)`: `(α β; γ δ)` with `αδ − βγ = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct UnimodularMatrix {
    pub alpha: i64,
    pub beta: i64,
    pub gamma: i64,
    pub delta: i64,
}

impl UnimodularMatrix {
    /// The identity.
    pub const IDENTITY: Self = Self { alpha: 1, beta: 0, gamma: 0, delta: 1 };

    /// Constructs after checking `det = 1`.
    pub fn new(alpha: i64, beta: i64, gamma: i64, delta: i64) -> Result<Self> {
        let det = alpha as i128 * delta as i128 - beta as i128 * gamma as i128;
        if det != 1 {
            return Err(Error::InvalidParameters(format!(
                "matrix ({alpha} {beta}; {gamma} {delta}) has determinant {det}, not 1"
            )));
        }
        Ok(Self { alpha, beta, gamma, delta })
    }

    /// Matrix product `self · rhs`.
    pub fn mul(&self, rhs: &Self) -> Self {
        Self {
            alpha: self.alpha * rhs.alpha + self.beta * rhs.gamma,
            beta: self.alpha * rhs.beta + self.beta * rhs.delta,
            gamma: self.gamma * rhs.alpha + self.delta * rhs.gamma,
            delta: self.gamma * rhs.beta + self.delta * rhs.delta,
        }
    }

    /// Inverse `(δ −β; −γ α)`.
    pub fn inverse(&self) -> Self {
        Self { alpha: self.delta, beta: -self.beta, gamma: -self.gamma, delta: self.alpha }
    }

    /// Is the lower-left entry divisible by `N`?
    pub fn in_gamma0(&self, level: i64) -> bool {
        self.gamma.rem_euclid(level) == 0
    }

    /// Möbius action `(αz + β)/(γz + δ)` on the upper half-plane.
    pub fn moebius(&self, z: &BigComplex) -> Result<BigComplex> {
        let prec = z.prec();
        let num = z.mul_i64(self.alpha).add(&BigComplex::from_i64_pair(self.beta, 0, prec));
        let den = z.mul_i64(self.gamma).add(&BigComplex::from_i64_pair(self.delta, 0, prec));
        num.div(&den)
    }
}

impl QuadraticForm {
    /// Constructs `[a, b, c]`.
    pub fn new(a: i64, b: i64, c: i64) -> Self {
        Self { a, b, c }
    }

    /// Discriminant `b² − 4ac`.
    pub fn disc(&self) -> i64 {
        let d = self.b as i128 * self.b as i128 - 4 * self.a as i128 * self.c as i128;
        i64::try_from(d).expect("discriminant overflows i64")
    }

    /// Value `Q(x, y)`.
    pub fn eval(&self, x: i64, y: i64) -> i64 {
        let v = self.a as i128 * (x as i128 * x as i128)
            + self.b as i128 * (x as i128 * y as i128)
            + self.c as i128 * (y as i128 * y as i128);
        i64::try_from(v).expect("form value overflows i64")
    }

    /// Content `gcd(a, b, c)`.
    pub fn content(&self) -> i64 {
        gcd_i64(gcd_i64(self.a, self.b), self.c)
    }

    /// Right action `Q ∘ M`.
    pub fn act(&self, m: &UnimodularMatrix) -> Self {
        let (al, be, ga, de) = (m.alpha, m.beta, m.gamma, m.delta);
        let a = self.eval(al, ga);
        let c = self.eval(be, de);
        let b128 = 2 * self.a as i128 * al as i128 * be as i128
            + self.b as i128 * (al as i128 * de as i128 + be as i128 * ga as i128)
            + 2 * self.c as i128 * ga as i128 * de as i128;
        Self { a, b: i64::try_from(b128).expect("form coefficient overflows i64"), c }
    }

    /// Is this positive definite (`a > 0`, `Δ < 0`)?
    pub fn is_positive_definite(&self) -> bool {
        self.a > 0 && self.disc() < 0
    }

    /// Is `[a, b, c]` reduced? (`|b| ≤ a ≤ c`, with `b ≥ 0` whenever
    /// `|b| = a` or `a = c`.)
    pub fn is_reduced(&self) -> bool {
        if !self.is_positive_definite() {
            return false;
        }
        let ok_basic = self.b.abs() <= self.a && self.a <= self.c;
        let ok_ties = (self.b.abs() != self.a && self.a != self.c) || self.b >= 0;
        ok_basic && ok_ties
    }

    /// Reduces a positive definite form, returning the reduced form `R` and
    /// the matrix `M ∈ SL₂(Z)` with `Q ∘ M = R`.
    pub fn reduce(&self) -> Result<(Self, UnimodularMatrix)> {
        if !self.is_positive_definite() {
            return Err(Error::InvalidParameters(format!(
                "form [{}, {}, {}] is not positive definite",
                self.a, self.b, self.c
            )));
        }
        let mut q = *self;
        let mut m = UnimodularMatrix::IDENTITY;
        loop {
            // Translate b into (−a, a]: Q ∘ (1 k; 0 1) = [a, b + 2ak, *].
            let k = {
                // choose k so that −a < b + 2ak ≤ a
                let a2 = 2 * q.a;
                let mut k = (-q.b).div_euclid(a2);
                if q.b + a2 * k <= -q.a {
                    k += 1;
                }
                k
            };
            if k != 0 {
                let t = UnimodularMatrix { alpha: 1, beta: k, gamma: 0, delta: 1 };
                q = q.act(&t);
                m = m.mul(&t);
            }
            debug_assert!(-q.a < q.b && q.b <= q.a);
            if q.a > q.c {
                // Swap outer coefficients: Q ∘ (0 −1; 1 0) = [c, −b, a].
                let s = UnimodularMatrix { alpha: 0, beta: -1, gamma: 1, delta: 0 };
                q = q.act(&s);
                m = m.mul(&s);
                continue;
            }
            if q.a == q.c && q.b < 0 {
                let s = UnimodularMatrix { alpha: 0, beta: -1, gamma: 1, delta: 0 };
                q = q.act(&s);
                m = m.mul(&s);
            }
            break;
        }
        debug_assert!(q.is_reduced(), "reduction produced non-reduced {q:?}");
        debug_assert_eq!(self.act(&m), q);
        Ok((q, m))
    }

    /// The Heegner point `z_Q = (−b + i√|Δ|)/(2a)`, the root of
    /// `Q(z, 1) = 0` in the upper half-plane.
    pub fn heegner_point(&self, prec: u32) -> Result<BigComplex> {
        if !self.is_positive_definite() {
            return Err(Error::InvalidParameters("Heegner point requires a positive definite form".into()));
        }
        let disc = self.disc();
        let root = BigReal::from_i64(-disc, prec).sqrt()?;
        let re = BigReal::from_i64(-self.b, prec).div_i64(2 * self.a);
        let im = root.div_i64(2 * self.a);
        Ok(BigComplex::new(re, im))
    }

    /// All automorphs of a positive definite form: matrices `M ∈ SL₂(Z)`
    /// with `Q ∘ M = Q`.
    ///
    /// For a primitive `Q` these are
    /// `M = ((t − bu)/2, −cu; au, (t + bu)/2)` over the solutions of
    /// `t² − Δu² = 4`: only `±I` for `Δ < −4`, with orders 4 and 6 for
    /// `Δ = −4` and `Δ = −3`.  An imprimitive form has exactly the
    /// automorphs of its primitive part `Q/g`, so the parameterization is
    /// applied to that part.
    pub fn automorphs(&self) -> Vec<UnimodularMatrix> {
        let disc = self.disc();
        assert!(disc < 0, "automorphs computed for definite forms only");
        let g = self.content();
        let (a0, b0, c0) = (self.a / g, self.b / g, self.c / g);
        let disc0 = b0 * b0 - 4 * a0 * c0;
        let mut tu = vec![(2i64, 0i64), (-2, 0)];
        if disc0 == -4 {
            tu.push((0, 1));
            tu.push((0, -1));
        } else if disc0 == -3 {
            tu.extend_from_slice(&[(1, 1), (-1, -1), (1, -1), (-1, 1)]);
        }
        tu.into_iter()
            .map(|(t, u)| {
                debug_assert_eq!((t - b0 * u).rem_euclid(2), 0);
                let m = UnimodularMatrix {
                    alpha: (t - b0 * u) / 2,
                    beta: -c0 * u,
                    gamma: a0 * u,
                    delta: (t + b0 * u) / 2,
                };
                debug_assert_eq!(self.act(&m), *self);
                m
            })
            .collect()
    }

    /// Finds `M ∈ Γ₀(N)` with `Q ∘ M = Q'`, if one exists.
    ///
    /// Both forms are reduced to their `SL₂(Z)` representatives; if those
    /// coincide, the full solution set of `Q ∘ M = Q'` is
    /// `{ε · M₀ : ε ∈ Aut(Q)}` with `M₀ = M₁ M₂⁻¹`, and it suffices to scan
    /// the automorphs for a product with lower-left entry divisible by `N`.
    pub fn gamma0_equivalent(&self, other: &Self, level: i64) -> Result<Option<UnimodularMatrix>> {
        if self.disc() != other.disc() {
            return Ok(None);
        }
        let (r1, m1) = self.reduce()?;
        let (r2, m2) = other.reduce()?;
        if r1 != r2 {
            return Ok(None);
        }
        let m0 = m1.mul(&m2.inverse());
        debug_assert_eq!(self.act(&m0), *other);
        for eps in self.automorphs() {
            let m = eps.mul(&m0);
            if m.in_gamma0(level) {
                debug_assert_eq!(self.act(&m), *other);
                return Ok(Some(m));
            }
        }
        Ok(None)
    }
}

impl std::fmt::Display for QuadraticForm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[{}, {}, {}]", self.a, self.b, self.c)
    }
}

/// A Heegner class: a representative form (with `N | a`, minimal `a` among
/// those found) and its weight denominator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HeegnerClass {
    /// Class representative `[a, b, c]` with `N | a` and `a > 0`.
    pub form: QuadraticForm,
    /// `w_{N,Q} = |Aut(Q) ∩ Γ₀(N)| / 2 ∈ {1, 2, 3}`.
    pub weight: i64,
}

/// Enumerates the `Γ₀(N)`-classes of positive definite forms of
/// discriminant `dD` with `N | a`, in order of first (smallest-`a`)
/// appearance.
///
/// Candidates are generated for `a = N, 2N, …, A` and `b² ≡ dD (mod 4a)`,
/// deduplicated with [`QuadraticForm::gamma0_equivalent`].  The bound `A`
/// starts at `N(|dD| + 4)` and doubles until one full doubling adds no new
/// class; failure to stabilize within the configured number of doublings is
/// reported as [`Error::NoConvergence`].
pub fn enumerate_classes(split: &DiscriminantSplit) -> Result<Vec<HeegnerClass>> {
    const MAX_DOUBLINGS: u32 = 6;
    let level = split.level();
    let disc = split.disc();
    let mut reps: Vec<QuadraticForm> = Vec::new();
    let mut cap = level * (-disc + 4);
    let mut scanned_to = 0i64;
    let mut doublings = 0;
    loop {
        let mut added = false;
        let mut a = scanned_to + level - scanned_to.rem_euclid(level);
        if a == 0 {
            a = level;
        }
        while a <= cap {
            let four_a = 4 * a;
            for b in 0..(2 * a) {
                if (b as i128 * b as i128 - disc as i128).rem_euclid(four_a as i128) != 0 {
                    continue;
                }
                let c = ((b as i128 * b as i128 - disc as i128) / four_a as i128) as i64;
                let q = QuadraticForm::new(a, b, c);
                debug_assert_eq!(q.disc(), disc);
                let mut known = false;
                for r in &reps {
                    if r.gamma0_equivalent(&q, level)?.is_some() {
                        known = true;
                        break;
                    }
                }
                if !known {
                    reps.push(q);
                    added = true;
                }
            }
            a += level;
        }
        scanned_to = cap;
        if !added && doublings > 0 {
            break;
        }
        doublings += 1;
        if doublings > MAX_DOUBLINGS {
            return Err(Error::NoConvergence(format!(
                "class list for (d, D, N) = ({}, {}, {}) did not stabilize below a ≤ {cap}",
                split.d(),
                split.big_d(),
                split.level()
            )));
        }
        cap *= 2;
    }
    Ok(reps
        .into_iter()
        .map(|form| {
            let w = form.automorphs().iter().filter(|m| m.in_gamma0(level)).count() as i64;
            debug_assert_eq!(w % 2, 0);
            HeegnerClass { form, weight: w / 2 }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::DiscriminantSplit;

    #[test]
    fn act_composes_and_preserves_discriminant() {
        let q = QuadraticForm::new(2, 1, 3);
        let m = UnimodularMatrix::new(1, 2, 1, 3).unwrap();
        let n = UnimodularMatrix::new(2, 1, 1, 1).unwrap();
        assert_eq!(q.act(&m).disc(), q.disc());
        assert_eq!(q.act(&m.mul(&n)), q.act(&m).act(&n));
    }

    #[test]
    fn reduce_example() {
        let q = QuadraticForm::new(1, 2, 2);
        let (r, m) = q.reduce().unwrap();
        assert_eq!(r, QuadraticForm::new(1, 0, 1));
        assert_eq!(m, UnimodularMatrix { alpha: 1, beta: -1, gamma: 0, delta: 1 });
        assert_eq!(q.act(&m), r);
    }

    #[test]
    fn reduction_is_idempotent_on_reduced_forms() {
        let q = QuadraticForm::new(2, 1, 5);
        let (r, m) = q.reduce().unwrap();
        assert_eq!(r, q);
        assert_eq!(m, UnimodularMatrix::IDENTITY);
    }

    #[test]
    fn heegner_point_examples() {
        let prec = 128;
        // [1, 0, 1] -> i
        let z = QuadraticForm::new(1, 0, 1).heegner_point(prec).unwrap();
        let (re, im) = z.to_f64_pair();
        assert!(re.abs() < 1e-30 && (im - 1.0).abs() < 1e-15);
        // [1, 1, 1] -> (-1 + i√3)/2
        let z = QuadraticForm::new(1, 1, 1).heegner_point(prec).unwrap();
        let (re, im) = z.to_f64_pair();
        assert!((re + 0.5).abs() < 1e-15 && (im - 0.75f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn automorph_counts_and_members() {
        let i_stab = QuadraticForm::new(1, 0, 1).automorphs();
        assert_eq!(i_stab.len(), 4);
        assert!(i_stab.contains(&UnimodularMatrix { alpha: 0, beta: -1, gamma: 1, delta: 0 }));

        let rho_stab = QuadraticForm::new(1, 1, 1).automorphs();
        assert_eq!(rho_stab.len(), 6);

        let generic = QuadraticForm::new(1, 1, 2).automorphs();
        assert_eq!(generic.len(), 2);

        // a non-reduced form of discriminant -4 still has 4 automorphs
        let q = QuadraticForm::new(2, 2, 1);
        let stab = q.automorphs();
        assert_eq!(stab.len(), 4);
        assert!(stab.contains(&UnimodularMatrix { alpha: -1, beta: -1, gamma: 2, delta: 1 }));

        // an imprimitive form inherits the stabilizer of its primitive part
        let q = QuadraticForm::new(2, 2, 2);
        assert_eq!(q.automorphs().len(), 6);
    }

    #[test]
    fn gamma0_equivalence_examples() {
        let q = QuadraticForm::new(1, 0, 1);
        // reflexivity
        assert!(q.gamma0_equivalent(&q, 1).unwrap().is_some());
        // [1,0,1] ~ [1,2,2] via (1 1; 0 1) at level 1
        let m = q.gamma0_equivalent(&QuadraticForm::new(1, 2, 2), 1).unwrap().unwrap();
        assert_eq!(q.act(&m), QuadraticForm::new(1, 2, 2));
        assert!(m.in_gamma0(1));
    }

    /// Brute-force oracle: search all M ∈ SL₂(Z) with entries bounded by
    /// `cap` and lower-left divisible by `level`.
    fn brute_equivalent(q: &QuadraticForm, other: &QuadraticForm, level: i64, cap: i64) -> bool {
        for alpha in -cap..=cap {
            for beta in -cap..=cap {
                for gamma in (-cap..=cap).filter(|g| g.rem_euclid(level) == 0) {
                    // delta determined by det = 1 when alpha != 0
                    let num = 1 + beta * gamma;
                    if alpha != 0 {
                        if num % alpha != 0 {
                            continue;
                        }
                        let delta = num / alpha;
                        if delta.abs() > cap {
                            continue;
                        }
                        let m = UnimodularMatrix { alpha, beta, gamma, delta };
                        if q.act(&m) == *other {
                            return true;
                        }
                    } else if num == 0 {
                        // alpha = 0: need βγ = −1
                        for delta in -cap..=cap {
                            let m = UnimodularMatrix { alpha, beta, gamma, delta };
                            if q.act(&m) == *other {
                                return true;
                            }
                        }
                    }
                }
            }
        }
        false
    }

    #[test]
    fn gamma0_equivalence_matches_brute_force_oracle() {
        // [2,2,1] and [2,-2,1] are SL₂(Z)-equivalent; check levels 1 and 2
        // against the brute-force search with entries ≤ 50.
        let q = QuadraticForm::new(2, 2, 1);
        let r = QuadraticForm::new(2, -2, 1);
        for level in [1i64, 2] {
            let fast = q.gamma0_equivalent(&r, level).unwrap().is_some();
            let brute = brute_equivalent(&q, &r, level, 50);
            assert_eq!(fast, brute, "level {level}");
        }
        // A pair that is *not* equivalent: distinct classes of disc -20.
        let q = QuadraticForm::new(1, 0, 5);
        let r = QuadraticForm::new(2, 2, 3);
        for level in [1i64, 2] {
            assert!(q.gamma0_equivalent(&r, level).unwrap().is_none());
            assert!(!brute_equivalent(&q, &r, level, 30));
        }
    }

    #[test]
    fn enumerate_classes_examples() {
        let s = DiscriminantSplit::new(-3, 1, 1).unwrap();
        let classes = enumerate_classes(&s).unwrap();
        assert_eq!(classes.len(), 1);
        assert_eq!(classes[0].form, QuadraticForm::new(1, 1, 1));
        assert_eq!(classes[0].weight, 3);

        let s = DiscriminantSplit::new(-4, 1, 1).unwrap();
        let classes = enumerate_classes(&s).unwrap();
        assert_eq!(classes.len(), 1);
        assert_eq!(classes[0].form, QuadraticForm::new(1, 0, 1));
        assert_eq!(classes[0].weight, 2);

        let s = DiscriminantSplit::new(-4, 5, 1).unwrap();
        let classes = enumerate_classes(&s).unwrap();
        let forms: Vec<_> = classes.iter().map(|c| c.form).collect();
        assert_eq!(forms, vec![QuadraticForm::new(1, 0, 5), QuadraticForm::new(2, 2, 3)]);
        assert!(classes.iter().all(|c| c.weight == 1));
    }

    /// Independent class-count oracle for level 1: reduced forms of
    /// discriminant d are in bijection with SL₂(Z)-classes.
    fn reduced_forms(disc: i64) -> Vec<QuadraticForm> {
        let mut out = Vec::new();
        let mut a = 1i64;
        while a * a * 3 <= -disc {
            for b in -a..=a {
                if (b * b - disc) % (4 * a) != 0 {
                    continue;
                }
                let c = (b * b - disc) / (4 * a);
                let q = QuadraticForm::new(a, b, c);
                if q.is_reduced() {
                    out.push(q);
                }
            }
            a += 1;
        }
        out
    }

    #[test]
    fn level_one_class_counts_match_reduced_form_oracle() {
        for d in [-3i64, -4, -7, -8, -11, -15, -20, -23, -39, -47, -71] {
            let s = DiscriminantSplit::new(d, 1, 1).unwrap();
            let classes = enumerate_classes(&s).unwrap();
            assert_eq!(classes.len(), reduced_forms(d).len(), "d = {d}");
        }
    }

    #[test]
    fn stabilizer_weights_match_special_points() {
        // weight 3 only for the class of [1,1,1] (disc -3), weight 2 only
        // for [1,0,1] (disc -4) at level 1.
        for d in [-3i64, -4, -7, -15, -20] {
            let s = DiscriminantSplit::new(d, 1, 1).unwrap();
            for class in enumerate_classes(&s).unwrap() {
                let expected = match d {
                    -3 => 3,
                    -4 => 2,
                    _ => 1,
                };
                assert_eq!(class.weight, expected, "d = {d}, form {}", class.form);
            }
        }
    }

    #[test]
    fn heegner_point_equivariance() {
        // z_{Q∘M} = M⁻¹ z_Q
        let prec = 192;
        let q = QuadraticForm::new(3, 1, 5);
        for m in [
            UnimodularMatrix::new(1, 1, 0, 1).unwrap(),
            UnimodularMatrix::new(0, -1, 1, 0).unwrap(),
            UnimodularMatrix::new(2, 1, 1, 1).unwrap(),
            UnimodularMatrix::new(3, -2, -1, 1).unwrap(),
        ] {
            let lhs = q.act(&m).heegner_point(prec).unwrap();
            let rhs = m.inverse().moebius(&q.heegner_point(prec).unwrap()).unwrap();
            let (lr, li) = lhs.to_f64_pair();
            let (rr, ri) = rhs.to_f64_pair();
            assert!((lr - rr).abs() < 1e-12 && (li - ri).abs() < 1e-12, "matrix {m:?}");
        }
    }
}
