//! Acceptance gate: every advertised guarantee, one test (and one
//! pass/fail line) each, at the stated tolerances and full grid sizes.
//!
//! Each test prints a `PASS — …` summary with the measured extremes so a
//! log reader can audit margins without re-running; failures carry the
//! offending rows in the panic message.

use moduli_traces::arith::{BigComplex, BigReal, DiscriminantSplit};
use moduli_traces::forms::{QuadraticForm, UnimodularMatrix};
use moduli_traces::genus;
use moduli_traces::kloosterman::{niebur_coefficient, niebur_constant};
use moduli_traces::qseries::{e2_series, niebur_qexp};
use moduli_traces::traces::{class_number, exp_sum, twisted_trace_cm, NieburFunction};
use moduli_traces::verification::{run_suite, SuiteConfig, SuiteName};
use rug::Rational;

fn split(d: i64, big_d: i64, level: i64) -> DiscriminantSplit {
    DiscriminantSplit::new(d, big_d, level).unwrap()
}

fn failing_rows(report: &moduli_traces::verification::SuiteReport) -> String {
    report
        .results
        .iter()
        .filter(|r| r["passed"] != serde_json::Value::Bool(true))
        .map(|r| r.to_string())
        .collect::<Vec<_>>()
        .join("\n")
}

/// Two-route identity on the default grid: CM evaluation against the
/// truncated sinh series at `A_max = 10⁵`, within `max(5%·|cm|, err)`,
/// with the discrepancy shrinking at `2·10⁵` (or already resting below
/// the series' own error estimate) on at least 80% of points.
#[test]
fn two_route_trace_identity_on_the_default_grid() {
    let report = run_suite(SuiteName::Corollary13, &SuiteConfig::default());
    assert!(
        report.summary.total >= 12,
        "grid too small: {} points",
        report.summary.total
    );
    assert_eq!(
        report.summary.failures,
        0,
        "two-route identity failed on:\n{}",
        failing_rows(&report)
    );
    let (improved, measured) = report.summary.trend_improved.unwrap();
    let fraction = improved as f64 / measured as f64;
    assert!(
        fraction >= 0.8,
        "discrepancy shrank on only {improved}/{measured} points at doubled truncation"
    );
    let worst = report
        .results
        .iter()
        .filter_map(|r| {
            Some(r["discrepancy"].as_f64()? / r["allowance"].as_f64()?.max(f64::MIN_POSITIVE))
        })
        .fold(0.0f64, f64::max);
    println!(
        "PASS — two-route identity: {}/{} points within tolerance, trend {improved}/{measured}, \
         worst discrepancy at {:.1}% of allowance",
        report.summary.total,
        report.summary.total,
        100.0 * worst
    );
}

/// Golden traces to `10⁻¹⁰` via CM evaluation.
#[test]
fn golden_traces_via_cm_evaluation() {
    let prec = 256;
    let j11 = NieburFunction::new(1, 1).unwrap();
    let big_j = |z: &BigComplex, p: u32| moduli_traces::qseries::normalized_j_value(z, p);
    let mut worst = 0.0f64;
    for (d, expected, value) in [
        (-3i64, -240.0, twisted_trace_cm(&split(-3, 1, 1), &j11, prec).unwrap()),
        (-4, 504.0, twisted_trace_cm(&split(-4, 1, 1), &j11, prec).unwrap()),
        (-3, -248.0, twisted_trace_cm(&split(-3, 1, 1), &big_j, prec).unwrap()),
        (-4, 492.0, twisted_trace_cm(&split(-4, 1, 1), &big_j, prec).unwrap()),
    ] {
        let diff = (value.value.to_f64() - expected).abs();
        assert!(diff < 1e-10, "trace at d = {d}: got {}, want {expected}", value.value.to_f64());
        worst = worst.max(diff);
    }
    println!("PASS — golden traces −240, 504, −248, 492; worst deviation {worst:.2e}");
}

/// Constant terms from the truncated Ramanujan-sum series: `c_1(n,0) =
/// 24σ(n)` for `n ≤ 5` within `10⁻³` relative at `C_max = 10⁵`, and the
/// level-p closed form (`c_2(1,0) = −8`, `c_3(1,0) = −3`) within 1%.
#[test]
fn constant_terms_from_the_ramanujan_series() {
    let prec = 256;
    let c_max = 100_000;
    let mut worst = 0.0f64;
    for n in 1..=5i64 {
        let series = niebur_coefficient(1, n, 0, c_max, prec).unwrap().to_f64();
        let exact = (24 * moduli_traces::arith::sigma(n as u64)) as f64;
        let rel = (series - exact).abs() / exact;
        assert!(rel < 1e-3, "c_1({n},0): series {series}, exact {exact}, rel {rel:e}");
        worst = worst.max(rel);
    }
    for (level, expected) in [(2i64, -8.0f64), (3, -3.0)] {
        let closed = niebur_constant(level, 1).unwrap();
        assert_eq!(closed.to_f64(), expected, "closed form at level {level}");
        let series = niebur_coefficient(level, 1, 0, c_max, prec).unwrap().to_f64();
        let rel = (series - expected).abs() / expected.abs();
        assert!(rel < 0.01, "c_{level}(1,0): series {series}, want {expected}, rel {rel:e}");
        worst = worst.max(rel);
    }
    println!("PASS — constant terms c_1(n≤5,0) = 24σ(n), c_2(1,0) = −8, c_3(1,0) = −3; worst rel {worst:.2e}");
}

/// Kloosterman–Bessel coefficients against the exact expansions:
/// `N ∈ {1,2,3}`, `n,m ∈ {1,2}`, within 2% at `C_max = 10⁴` and
/// improving at `4·10⁴` (unless already at the convergence floor);
/// the classical `c_1(1,1) = 196884`.
#[test]
fn kloosterman_bessel_coefficients_match_exact_expansions() {
    let prec = 256;
    assert_eq!(niebur_qexp(1, 1, 2).unwrap().coeff(1), Rational::from(196884));
    let mut worst = 0.0f64;
    let mut improved = 0usize;
    let mut rows = Vec::new();
    for level in [1i64, 2, 3] {
        for n in [1i64, 2] {
            for m in [1i64, 2] {
                let exact = niebur_qexp(level, n, m + 1).unwrap().coeff(m).to_f64();
                let v1 = niebur_coefficient(level, n, m, 10_000, prec).unwrap().to_f64();
                let v4 = niebur_coefficient(level, n, m, 40_000, prec).unwrap().to_f64();
                let rel1 = (v1 - exact).abs() / exact.abs().max(1.0);
                let rel4 = (v4 - exact).abs() / exact.abs().max(1.0);
                assert!(
                    rel1 < 0.02,
                    "c_{level}({n},{m}): series {v1}, exact {exact}, rel {rel1:e}"
                );
                // the improvement indicator is only meaningful above the
                // convergence floor; a point already four orders inside the
                // tolerance merely wobbles there
                if rel4 <= rel1 || rel4 < 1e-6 {
                    improved += 1;
                }
                rows.push((level, n, m, rel1, rel4));
                worst = worst.max(rel1);
            }
        }
    }
    assert_eq!(
        improved, 12,
        "quadrupled truncation failed to improve on: {rows:?}"
    );
    println!(
        "PASS — c_N(n,m) within 2% at C = 10⁴ on all 12 points (worst {worst:.2e}), \
         all improved (or at the convergence floor) at 4·10⁴; c_1(1,1) = 196884 exactly"
    );
}

/// Exponential sums equal their half-integral Kloosterman form to `10⁻¹²`
/// for all `a ≤ 50`, `n ≤ 5` on the five pinned splits.
#[test]
fn exponential_sums_match_the_kloosterman_form() {
    let report = run_suite(SuiteName::KstarPin, &SuiteConfig::default());
    assert_eq!(
        report.summary.failures,
        0,
        "identity failed on:\n{}",
        failing_rows(&report)
    );
    let worst = report
        .results
        .iter()
        .filter_map(|r| r["max_delta"].as_f64())
        .fold(0.0f64, f64::max);
    println!(
        "PASS — exponential sums match the K* form on 5 splits × a ≤ 50 × n ≤ 5; \
         worst |Δ| = {worst:.2e} (tolerance 10⁻¹²)"
    );
}

/// Recognition sweep: for every genus-zero level `N ≤ 10` and admissible
/// grid pair, `−tr` is recognized as an algebraic integer of `Q(√D)`
/// (rational integer when `D = 1`), residual `< 10⁻⁸` at 256 bits,
/// `n ∈ {1,2,3}` — except on five documented points at levels 7 and 10.
/// There the constant term `c_N(n,0)` of `j_{N,n}` is a non-integral
/// rational, and against a nonzero class number it shifts the trace off
/// the integers by exactly `c_N(n,0)·H`.  Those five are asserted to fail
/// recognition and to become integral once the shift is added back, so
/// the failure mode itself is pinned.
#[test]
fn algebraic_recognition_sweep() {
    let report = run_suite(SuiteName::Algebraicity, &SuiteConfig::default());
    assert_eq!(
        report.summary.total, 87,
        "expected 87 sweep points (29 admissible triples × 3 indices)"
    );
    // The five points where c_N(n,0)·H(d,D,N) is a non-integral rational:
    // level 10 contributes c = 1/3, −1/3, 4/3 and level 7 contributes
    // c = −1/2, −3/2, each against class number 1.  (Level 7 with d = −3
    // survives because H(−3,1,7) = 2/3 and the Hauptmodul part of the
    // trace absorbs the thirds; D > 1 always survives because H = 0.)
    let exceptions = [
        "d=-4 D=1 N=10 n=1",
        "d=-4 D=1 N=10 n=2",
        "d=-4 D=1 N=10 n=3",
        "d=-7 D=1 N=7 n=1",
        "d=-7 D=1 N=7 n=2",
    ];
    let failing: Vec<&serde_json::Value> = report
        .results
        .iter()
        .filter(|r| r["passed"] != serde_json::Value::Bool(true))
        .collect();
    let failing_ids: Vec<&str> = failing.iter().filter_map(|r| r["id"].as_str()).collect();
    assert_eq!(
        failing_ids, exceptions,
        "recognition failures differ from the documented exception set:\n{}",
        failing_rows(&report)
    );
    for row in &failing {
        assert_eq!(
            row["integral_after_shift"],
            serde_json::Value::Bool(true),
            "exception not explained by the constant shift: {row}"
        );
    }
    let worst = report
        .results
        .iter()
        .filter_map(|r| r["residual"].as_f64())
        .fold(0.0f64, f64::max);
    let largest = report
        .results
        .iter()
        .filter_map(|r| r["value"].as_f64())
        .fold(0.0f64, |a, v| a.max(v.abs()));
    println!(
        "PASS — recognition sweep: 82/87 points recognized (worst residual {worst:.2e}, \
         largest value {largest:.2e}); the five exceptions at levels 7 and 10 fail by \
         exactly the non-integral constant shift c_N(n,0)·H and are integral once it \
         is added back"
    );
}

/// Inner-product closed forms: the golden value `log(1728)/(12π)` to
/// `10⁻¹⁰`, the exceptional diagonal cases stable across precisions `P`
/// and `2P` to `10⁻⁸` and regression-pinned, and representative
/// independence of the diagonal summand at `d = −7` to `10⁻¹⁰`.
#[test]
fn inner_product_closed_forms() {
    let report = run_suite(SuiteName::InnerProducts, &SuiteConfig::default());
    assert_eq!(
        report.summary.failures,
        0,
        "inner products failed on:\n{}",
        failing_rows(&report)
    );
    let golden = report
        .results
        .iter()
        .find(|r| r["id"] == "d=-3 delta=-4")
        .unwrap();
    assert!(golden["discrepancy"].as_f64().unwrap() < 1e-10);
    println!(
        "PASS — inner products: golden value off by {:.2e}, diagonal cases two-precision \
         stable and pinned, representative independence at {:.2e}",
        golden["discrepancy"].as_f64().unwrap(),
        report
            .results
            .iter()
            .find(|r| r["id"] == "representative-independence d=-7")
            .and_then(|r| r["discrepancy"].as_f64())
            .unwrap()
    );
}

/// The per-module property checks, reproduced deterministically: form
/// algebra under the right action, character class-invariance, exponential
/// sum reality, the vanishing class number, Faber consistency of the exact
/// expansions, and E₂* quasi-modularity.
#[test]
fn property_checks_hold_deterministically() {
    // discriminant invariance and the right-action law
    let forms = [
        QuadraticForm::new(1, 1, 1),
        QuadraticForm::new(2, 1, 3),
        QuadraticForm::new(3, -2, 5),
        QuadraticForm::new(5, 3, 7),
    ];
    let mats = [
        UnimodularMatrix::new(1, 1, 0, 1).unwrap(),
        UnimodularMatrix::new(0, -1, 1, 0).unwrap(),
        UnimodularMatrix::new(2, 1, 1, 1).unwrap(),
        UnimodularMatrix::new(1, 0, 3, 1).unwrap(),
    ];
    for q in &forms {
        for m1 in &mats {
            assert_eq!(q.act(m1).disc(), q.disc(), "discriminant not invariant");
            for m2 in &mats {
                assert_eq!(
                    q.act(m1).act(m2),
                    q.act(&m1.mul(m2)),
                    "right action law fails"
                );
            }
        }
    }

    // χ_D class invariance on Γ₀(N)-translates
    for (d, big_d, level) in [(-3i64, 13i64, 1i64), (-4, 5, 1), (-8, 1, 3)] {
        let sp = split(d, big_d, level);
        let gamma = UnimodularMatrix::new(1, 0, level, 1).unwrap();
        let t = UnimodularMatrix::new(1, 1, 0, 1).unwrap();
        for class in moduli_traces::forms::enumerate_classes(&sp).unwrap() {
            let base = genus::chi(&class.form, &sp).unwrap();
            for m in [&gamma, &t] {
                assert_eq!(
                    genus::chi(&class.form.act(m), &sp).unwrap(),
                    base,
                    "χ not class-invariant at ({d},{big_d},{level})"
                );
            }
        }
    }

    // exponential sums are real (the evaluator rejects imaginary residue)
    for (d, big_d) in [(-3i64, 1i64), (-4, 5), (-3, 13)] {
        let sp = split(d, big_d, 1);
        for a in 1..=25 {
            for n in 1..=3 {
                let v = exp_sum(&sp, a, n, 160).unwrap();
                assert!(v.to_f64().is_finite());
            }
        }
    }

    // the vanishing twisted class number
    assert_eq!(class_number(&split(-4, 5, 1)).unwrap(), Rational::new());

    // Faber consistency: principal part q^{−n}, no intermediate poles,
    // constant term equal to the closed form
    for level in [1i64, 2, 3, 5] {
        for n in [1i64, 2, 3] {
            let series = niebur_qexp(level, n, 1).unwrap();
            assert_eq!(series.coeff(-n), Rational::from(1), "leading term at ({level},{n})");
            for k in (-n + 1)..0 {
                assert_eq!(series.coeff(k), Rational::new(), "pole q^{k} at ({level},{n})");
            }
            assert_eq!(
                series.coeff(0),
                niebur_constant(level, n).unwrap(),
                "constant at ({level},{n})"
            );
        }
    }

    // E₂* quasi-modularity at fixed points: τ^{−2}E₂*(−1/τ) = E₂*(τ)
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
        let w = s.moebius(&z).unwrap();
        let lhs = e2_star(&w).div(&z.mul(&z)).unwrap();
        let diff = lhs.sub(&e2_star(&z)).abs().to_f64();
        assert!(diff < 1e-10, "E₂* fails at ({x},{y}): {diff:e}");
    }

    println!(
        "PASS — property checks: form algebra, χ invariance, exp-sum reality, \
         H(−4,5,1) = 0, Faber consistency, E₂* quasi-modularity"
    );
}
