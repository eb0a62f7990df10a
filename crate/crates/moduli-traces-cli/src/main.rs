//! Command-line front end exposing every computation with machine-readable
//! output.
//!
//! * text (default): value ± error, one fact per line;
//! * json: full provenance — method, truncation, precision, and a
//!   40-digit decimal rendering alongside the `f64` view;
//! * csv: flat rows with a sorted header (nested values JSON-encoded).
//!
//! Exit codes: `0` success, `1` computation failure (including a `verify`
//! run with failing rows), `2` invalid parameters.  The optional
//! `MODULI_TRACES_THREADS` environment variable caps the worker pool; no
//! other environment is consulted.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use moduli_traces::arith::{BigReal, DiscriminantSplit};
use moduli_traces::inner_products::inner_product;
use moduli_traces::qseries::niebur_qexp;
use moduli_traces::traces::{
    class_number, exp_sum, exp_sum_via_kstar, fd_coefficient, fstar_coefficient,
    FStarCoefficient, TraceRoute,
};
use moduli_traces::verification::{run_suite, SuiteConfig, SuiteName};
use moduli_traces::{Error, Result};

#[derive(Parser)]
#[command(
    name = "moduli-traces",
    version,
    about = "Twisted traces of singular moduli: traces, class numbers, Fourier \
             coefficients, Niebur–Poincaré expansions, and regularized inner products",
    after_help = "Environment: MODULI_TRACES_THREADS caps the worker pool (default: all cores)."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Working precision in bits.
    #[arg(long, global = true, default_value_t = 256, value_name = "BITS")]
    prec: u32,

    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,

    /// Byte-identical output across runs and thread counts (computations
    /// are already deterministic; this pins the report serialization too).
    #[arg(long, global = true)]
    deterministic: bool,

    /// Write the output to a file instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Cm,
    Series,
    Both,
}

#[derive(Subcommand)]
enum Command {
    /// Twisted trace tr_{d,D,N}(j_{N,n}) by CM evaluation, sinh series, or both.
    Trace {
        /// Discriminant d < 0 of the Heegner points (up to the twist).
        #[arg(long, allow_hyphen_values = true)]
        d: i64,
        /// Fundamental twisting discriminant D ≥ 1 with dD < 0.
        #[arg(long = "D", allow_hyphen_values = true)]
        big_d: i64,
        /// Level N of Γ₀(N); d and D must be squares modulo 4N.
        #[arg(long = "N")]
        level: i64,
        /// Index of the Niebur–Poincaré function j_{N,n}.
        #[arg(long)]
        n: i64,
        /// Evaluation route; `both` prints the two values and their gap.
        #[arg(long, value_enum, default_value_t = Method::Cm)]
        method: Method,
        /// Truncation of the sinh series (series routes only).
        #[arg(long, default_value_t = 100_000)]
        amax: i64,
    },
    /// Twisted Hurwitz class number H(d,D,N) = tr_{d,D,N}(1), exact rational.
    ClassNumber {
        /// Discriminant d < 0 of the Heegner points (up to the twist).
        #[arg(long, allow_hyphen_values = true)]
        d: i64,
        /// Fundamental twisting discriminant D ≥ 1 with dD < 0.
        #[arg(long = "D", allow_hyphen_values = true)]
        big_d: i64,
        /// Level N of Γ₀(N); d and D must be squares modulo 4N.
        #[arg(long = "N")]
        level: i64,
    },
    /// Fourier coefficients of f*_{d,D,N} (or of f_d with --fd, needing D = N = 1).
    Fourier {
        /// Discriminant d < 0 of the Heegner points (up to the twist).
        #[arg(long, allow_hyphen_values = true)]
        d: i64,
        /// Fundamental twisting discriminant D ≥ 1 with dD < 0.
        #[arg(long = "D", allow_hyphen_values = true)]
        big_d: i64,
        /// Level N of Γ₀(N); d and D must be squares modulo 4N.
        #[arg(long = "N")]
        level: i64,
        /// How many coefficients, starting at n = 0.
        #[arg(long)]
        count: i64,
        /// Coefficients of f_d = f*_{d,1,1} − H·E₂* instead.
        #[arg(long)]
        fd: bool,
    },
    /// Exact q-expansion of the Niebur–Poincaré function j_{N,n}.
    Niebur {
        /// Level N of Γ₀(N) (genus zero).
        #[arg(long = "N")]
        level: i64,
        /// Index of the Niebur–Poincaré function j_{N,n}.
        #[arg(long)]
        n: i64,
        /// Truncation order of the expansion.
        #[arg(long)]
        terms: i64,
    },
    /// Twisted exponential sum S_{d,D}(a,n), directly or through its
    /// half-integral Kloosterman form.
    ExpSum {
        /// Discriminant d < 0 of the Heegner points (up to the twist).
        #[arg(long, allow_hyphen_values = true)]
        d: i64,
        /// Fundamental twisting discriminant D ≥ 1 with dD < 0.
        #[arg(long = "D", allow_hyphen_values = true)]
        big_d: i64,
        /// Leading coefficient a > 0 the forms are scanned over.
        #[arg(long)]
        a: i64,
        /// Frequency of the additive character e(nb/2a).
        #[arg(long)]
        n: i64,
        /// Evaluate through the half-integral Kloosterman identity instead
        /// of the direct residue scan.
        #[arg(long)]
        via_kstar: bool,
    },
    /// Regularized inner product ⟨f_d, f_δ⟩ through its closed form.
    InnerProduct {
        /// First discriminant d < 0 (must satisfy d ≡ 0, 1 mod 4).
        #[arg(long, allow_hyphen_values = true)]
        d: i64,
        /// Second discriminant δ < 0; the closed form needs δ/d to avoid
        /// being a rational square, except on the covered diagonal cases.
        #[arg(long, allow_hyphen_values = true)]
        delta: i64,
    },
    /// Run one verification suite and report pass/fail per grid point.
    Verify {
        /// One of: corollary13, kstar_pin, niebur_coeffs, algebraicity,
        /// inner_products, golden.
        #[arg(long)]
        suite: String,
        /// JSON file overriding grid knobs (a_max, blocks, c_max,
        /// c_max_constant, max_level, max_n, kstar_a_max).
        #[arg(long, value_name = "FILE")]
        grid: Option<PathBuf>,
    },
}

/// Everything one command produces, pre-rendered per format.
struct Rendered {
    json: Value,
    text: String,
    /// Flat records for the CSV view.
    csv_records: Vec<Value>,
    /// Verify only: the run completed but rows failed (exit 1).
    failing: bool,
}

fn main() -> ExitCode {
    if let Ok(threads) = std::env::var("MODULI_TRACES_THREADS") {
        match threads.parse::<usize>() {
            Ok(k) if k >= 1 => {
                // build_global errs only if a pool already exists; harmless
                let _ = rayon::ThreadPoolBuilder::new().num_threads(k).build_global();
            }
            _ => {
                eprintln!("MODULI_TRACES_THREADS must be a positive integer, got {threads:?}");
                return ExitCode::from(2);
            }
        }
    }
    let cli = Cli::parse();
    let rendered = match run(&cli) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(match e {
                Error::InvalidParameters(_) => 2,
                _ => 1,
            });
        }
    };
    let payload = match cli.format {
        Format::Text => {
            let mut t = rendered.text;
            if !t.ends_with('\n') {
                t.push('\n');
            }
            t
        }
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&rendered.json)
                .expect("JSON rendering cannot fail");
            s.push('\n');
            s
        }
        Format::Csv => csv_table(&rendered.csv_records),
    };
    if let Some(path) = &cli.out {
        if let Err(e) = std::fs::write(path, &payload) {
            eprintln!("cannot write {}: {e}", path.display());
            return ExitCode::from(1);
        }
    } else {
        print!("{payload}");
    }
    if rendered.failing {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    }
}

fn run(cli: &Cli) -> Result<Rendered> {
    match &cli.command {
        Command::Trace { d, big_d, level, n, method, amax } => {
            trace_cmd(*d, *big_d, *level, *n, *method, *amax, cli.prec)
        }
        Command::ClassNumber { d, big_d, level } => class_number_cmd(*d, *big_d, *level),
        Command::Fourier { d, big_d, level, count, fd } => {
            fourier_cmd(*d, *big_d, *level, *count, *fd, cli.prec)
        }
        Command::Niebur { level, n, terms } => niebur_cmd(*level, *n, *terms),
        Command::ExpSum { d, big_d, a, n, via_kstar } => {
            exp_sum_cmd(*d, *big_d, *a, *n, *via_kstar, cli.prec)
        }
        Command::InnerProduct { d, delta } => inner_product_cmd(*d, *delta, cli.prec),
        Command::Verify { suite, grid } => verify_cmd(suite, grid.as_deref(), cli),
    }
}

// ---------------------------------------------------------------------------
// rendering helpers

/// JSON view of a [`BigReal`]: `f64` value and error plus a 40-digit
/// decimal string for audits beyond double precision.
fn real_json(x: &BigReal) -> Value {
    json!({
        "value": x.to_f64(),
        "value_full": x.value().to_string_radix(10, Some(40)),
        "err": x.err_bound().to_f64(),
        "prec": x.prec(),
    })
}

/// Text view of a [`BigReal`]: `value ± err`.
fn real_text(x: &BigReal) -> String {
    format!("{:.15e} ± {:.1e}", x.to_f64(), x.err_bound().to_f64())
}

/// Minimal RFC-4180 quoting.
fn csv_field(v: &Value) -> String {
    let raw = match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    };
    if raw.contains([',', '"', '\n']) {
        format!("\"{}\"", raw.replace('"', "\"\""))
    } else {
        raw
    }
}

/// Records → CSV with a header from the sorted union of keys.
fn csv_table(records: &[Value]) -> String {
    let mut keys: Vec<String> = Vec::new();
    for r in records {
        if let Value::Object(map) = r {
            for k in map.keys() {
                if !keys.contains(k) {
                    keys.push(k.clone());
                }
            }
        }
    }
    keys.sort();
    let mut out = keys.join(",");
    out.push('\n');
    for r in records {
        let empty = Map::new();
        let map = r.as_object().unwrap_or(&empty);
        let row: Vec<String> = keys
            .iter()
            .map(|k| map.get(k).map(csv_field).unwrap_or_default())
            .collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

// ---------------------------------------------------------------------------
// subcommands

fn trace_cmd(
    d: i64,
    big_d: i64,
    level: i64,
    n: i64,
    method: Method,
    amax: i64,
    prec: u32,
) -> Result<Rendered> {
    let split = DiscriminantSplit::new(d, big_d, level)?;
    let base = json!({ "d": d, "D": big_d, "N": level, "n": n });
    let mut obj = base.as_object().unwrap().clone();
    let mut text = format!("tr_{{{d},{big_d},{level}}}(j_{{{level},{n}}})\n");

    let mut cm_report = None;
    let mut series_report = None;
    if matches!(method, Method::Cm | Method::Both) {
        let r = fstar_trace(&split, n, TraceRoute::Cm, prec)?;
        text.push_str(&format!("  cm:     {}\n", real_text(&r.0)));
        obj.insert(
            "cm".into(),
            with_provenance(real_json(&r.0), "cm", &r.1),
        );
        cm_report = Some(r);
    }
    if matches!(method, Method::Series | Method::Both) {
        let r = fstar_trace(&split, n, TraceRoute::Series { a_max: amax, blocks: 4 }, prec)?;
        text.push_str(&format!("  series: {}\n", real_text(&r.0)));
        obj.insert(
            "series".into(),
            with_provenance(real_json(&r.0), "series", &r.1),
        );
        series_report = Some(r);
    }
    if let (Some(cm), Some(series)) = (&cm_report, &series_report) {
        let disc = (cm.0.to_f64() - series.0.to_f64()).abs();
        text.push_str(&format!("  discrepancy: {disc:.3e}\n"));
        obj.insert("discrepancy".into(), json!(disc));
    }
    let json_value = Value::Object(obj);
    Ok(Rendered {
        csv_records: vec![flatten(&json_value)],
        json: json_value,
        text,
        failing: false,
    })
}

/// The trace behind the f* coefficient: `−(coefficient at n)`.
fn fstar_trace(
    split: &DiscriminantSplit,
    n: i64,
    route: TraceRoute,
    prec: u32,
) -> Result<(BigReal, String)> {
    match fstar_coefficient(split, n, route, prec)? {
        FStarCoefficient::Fourier(report) => Ok((report.value.neg(), report.truncation)),
        FStarCoefficient::ConstantTerm { .. } => Err(Error::InvalidParameters(
            "trace needs n ≥ 1 (n = 0 is the class number; see class-number)".into(),
        )),
    }
}

fn with_provenance(mut real: Value, method: &str, truncation: &str) -> Value {
    let obj = real.as_object_mut().unwrap();
    obj.insert("method".into(), json!(method));
    obj.insert("truncation".into(), json!(truncation));
    real
}

fn class_number_cmd(d: i64, big_d: i64, level: i64) -> Result<Rendered> {
    let split = DiscriminantSplit::new(d, big_d, level)?;
    let h = class_number(&split)?;
    let json_value = json!({
        "d": d, "D": big_d, "N": level,
        "H": h.to_string(),
        "H_float": h.to_f64(),
    });
    Ok(Rendered {
        csv_records: vec![json_value.clone()],
        text: format!("H({d},{big_d},{level}) = {h}"),
        json: json_value,
        failing: false,
    })
}

fn fourier_cmd(
    d: i64,
    big_d: i64,
    level: i64,
    count: i64,
    fd: bool,
    prec: u32,
) -> Result<Rendered> {
    if count < 1 {
        return Err(Error::InvalidParameters("--count must be ≥ 1".into()));
    }
    if fd && (big_d != 1 || level != 1) {
        return Err(Error::InvalidParameters(
            "f_d is only defined for D = 1, N = 1".into(),
        ));
    }
    let split = DiscriminantSplit::new(d, big_d, level)?;
    let mut rows = Vec::new();
    let mut text = if fd {
        format!("f_{d} coefficients (n = 0 … {})\n", count - 1)
    } else {
        format!("f*_{{{d},{big_d},{level}}} coefficients (n = 0 … {})\n", count - 1)
    };
    for n in 0..count {
        if fd {
            let c = fd_coefficient(d, n, prec)?;
            text.push_str(&format!("  n={n}: {}\n", real_text(&c)));
            let mut row = real_json(&c);
            row.as_object_mut().unwrap().insert("n".into(), json!(n));
            rows.push(row);
        } else {
            match fstar_coefficient(&split, n, TraceRoute::Cm, prec)? {
                FStarCoefficient::ConstantTerm {
                    inv_v_coefficient,
                    inv_v_pi_multiple,
                    constant,
                } => {
                    text.push_str(&format!(
                        "  n=0: ({inv_v_pi_multiple})/π · (1/v) + {constant}   [1/v coefficient ≈ {:.15e}]\n",
                        inv_v_coefficient.to_f64()
                    ));
                    rows.push(json!({
                        "n": 0,
                        "inv_v_pi_multiple": inv_v_pi_multiple.to_string(),
                        "inv_v_coefficient": inv_v_coefficient.to_f64(),
                        "constant": constant.to_string(),
                    }));
                }
                FStarCoefficient::Fourier(report) => {
                    text.push_str(&format!("  n={n}: {}\n", real_text(&report.value)));
                    let mut row = real_json(&report.value);
                    let obj = row.as_object_mut().unwrap();
                    obj.insert("n".into(), json!(n));
                    obj.insert("truncation".into(), json!(report.truncation));
                    rows.push(row);
                }
            }
        }
    }
    let json_value = json!({
        "d": d, "D": big_d, "N": level, "form": if fd { "fd" } else { "fstar" },
        "coefficients": rows,
    });
    Ok(Rendered {
        csv_records: json_value["coefficients"].as_array().unwrap().clone(),
        json: json_value,
        text,
        failing: false,
    })
}

fn niebur_cmd(level: i64, n: i64, terms: i64) -> Result<Rendered> {
    if terms < 0 {
        return Err(Error::InvalidParameters("--terms must be ≥ 0".into()));
    }
    let series = niebur_qexp(level, n, terms)?;
    let mut text = format!("j_{{{level},{n}}} q-expansion to order {terms}\n");
    let mut rows = Vec::new();
    for m in series.leading_exponent()..=series.truncation_order() {
        let c = series.coeff(m);
        if c != 0 {
            text.push_str(&format!("  q^{m}: {c}\n"));
        }
        rows.push(json!({ "m": m, "coefficient": c.to_string() }));
    }
    let json_value = json!({
        "N": level, "n": n, "terms": terms,
        "coefficients": rows,
    });
    Ok(Rendered {
        csv_records: json_value["coefficients"].as_array().unwrap().clone(),
        json: json_value,
        text,
        failing: false,
    })
}

fn exp_sum_cmd(
    d: i64,
    big_d: i64,
    a: i64,
    n: i64,
    via_kstar: bool,
    prec: u32,
) -> Result<Rendered> {
    let split = DiscriminantSplit::new(d, big_d, 1)?;
    let (value, route) = if via_kstar {
        (exp_sum_via_kstar(&split, a, n, prec)?, "kstar")
    } else {
        (exp_sum(&split, a, n, prec)?, "direct")
    };
    let mut json_value = json!({ "d": d, "D": big_d, "a": a, "n": n, "route": route });
    json_value
        .as_object_mut()
        .unwrap()
        .insert("sum".into(), real_json(&value));
    Ok(Rendered {
        csv_records: vec![flatten(&json_value)],
        text: format!("S_{{{d},{big_d}}}({a},{n}) = {}  [{route}]", real_text(&value)),
        json: json_value,
        failing: false,
    })
}

fn inner_product_cmd(d: i64, delta: i64, prec: u32) -> Result<Rendered> {
    let report = inner_product(d, delta, prec)?;
    let mut json_value = json!({ "d": d, "delta": delta, "case": report.case.label() });
    json_value
        .as_object_mut()
        .unwrap()
        .insert("product".into(), real_json(&report.value));
    Ok(Rendered {
        csv_records: vec![flatten(&json_value)],
        text: format!(
            "⟨f_{{{d}}}, f_{{{delta}}}⟩ = {}  [case {}]",
            real_text(&report.value),
            report.case.label()
        ),
        json: json_value,
        failing: false,
    })
}

fn verify_cmd(suite: &str, grid: Option<&std::path::Path>, cli: &Cli) -> Result<Rendered> {
    let name: SuiteName = suite.parse()?;
    let mut config = SuiteConfig { prec: cli.prec, ..SuiteConfig::default() };
    config.deterministic = cli.deterministic;
    if let Some(path) = grid {
        apply_grid_overrides(&mut config, path)?;
    }
    let report = run_suite(name, &config);
    let mut text = String::new();
    for row in &report.results {
        let id = row["id"].as_str().unwrap_or("?");
        let passed = row["passed"] == Value::Bool(true);
        text.push_str(if passed { "PASS " } else { "FAIL " });
        text.push_str(id);
        if let Some(note) = row["note"].as_str() {
            text.push_str("  (");
            text.push_str(note);
            text.push(')');
        }
        text.push('\n');
    }
    text.push_str(&format!(
        "{}: {} checks, {} failures\n",
        report.suite,
        report.summary.total,
        report.summary.failures
    ));
    if let Some((improved, measured)) = report.summary.trend_improved {
        text.push_str(&format!(
            "trend: {improved}/{measured} points improved at doubled truncation\n"
        ));
    }
    let failing = !report.all_passed();
    let json_value = serde_json::to_value(&report)
        .map_err(|e| Error::InvalidParameters(format!("report serialization: {e}")))?;
    Ok(Rendered {
        csv_records: report.results.clone(),
        json: json_value,
        text,
        failing,
    })
}

/// Reads a JSON object of grid-knob overrides into the suite config.
fn apply_grid_overrides(config: &mut SuiteConfig, path: &std::path::Path) -> Result<()> {
    let raw = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidParameters(format!("cannot read {}: {e}", path.display())))?;
    let value: Value = serde_json::from_str(&raw)
        .map_err(|e| Error::InvalidParameters(format!("{} is not JSON: {e}", path.display())))?;
    let Value::Object(map) = value else {
        return Err(Error::InvalidParameters(format!(
            "{} must contain a JSON object of grid overrides",
            path.display()
        )));
    };
    for (key, v) in &map {
        let as_i64 = || {
            v.as_i64().ok_or_else(|| {
                Error::InvalidParameters(format!("grid override {key:?} must be an integer"))
            })
        };
        match key.as_str() {
            "a_max" => config.a_max = as_i64()?,
            "blocks" => config.blocks = as_i64()? as usize,
            "c_max" => config.c_max = as_i64()?,
            "c_max_constant" => config.c_max_constant = as_i64()?,
            "max_level" => config.max_level = as_i64()?,
            "max_n" => config.max_n = as_i64()?,
            "kstar_a_max" => config.kstar_a_max = as_i64()?,
            "prec" => config.prec = as_i64()? as u32,
            other => {
                return Err(Error::InvalidParameters(format!(
                    "unknown grid override {other:?}; expected a_max, blocks, c_max, \
                     c_max_constant, max_level, max_n, kstar_a_max, or prec"
                )))
            }
        }
    }
    Ok(())
}

/// One-level flattening for the CSV view: nested objects become
/// dotted columns, everything else is JSON-encoded in place.
fn flatten(v: &Value) -> Value {
    let mut flat = Map::new();
    if let Value::Object(map) = v {
        for (k, val) in map {
            match val {
                Value::Object(inner) => {
                    for (ik, ival) in inner {
                        flat.insert(format!("{k}.{ik}"), ival.clone());
                    }
                }
                other => {
                    flat.insert(k.clone(), other.clone());
                }
            }
        }
    }
    Value::Object(flat)
}
