//! Command-line front end.
//!
//! Subcommands: `field`, `table`, `zeta`, `verify` and `poles`. Output is JSON
//! (pretty-printed) or CSV. Exit codes: 0 success, 1 usage or domain error,
//! 2 unsupported field (N(ε) = +1), 3 verification failure.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::continuation::{
    cross_check, evaluate, pole_grid, residue_at, EvalRecord, Method, Parity,
};
use crate::error::{Error, Result};
use crate::identities::{identity_suite, IdentityReport};
use crate::qfield::{class_number_formula_checks, make_context, ClassNumberCheck, FieldContext};
use crate::sequences::{table_csv, verify_pell, PellCheck, SeqKind, SeqTable};
use crate::special::cnum::{float_to_decimal, parse_float};
use crate::special::CNum;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_UNSUPPORTED: i32 = 2;
pub const EXIT_VERIFY_FAILED: i32 = 3;

/// Largest D covered by the class-number suite.
const CLASS_NUMBER_D_MAX: i64 = 200;
/// Tolerance of the class-number suite.
const CLASS_NUMBER_TOL: f64 = 1e-25;
/// Random samples per identity in the identity suite.
const IDENTITY_SAMPLES: usize = 100;

#[derive(Debug, Parser)]
#[command(name = "fibzeta", version, about = "Generalized Fibonacci zeta functions of real quadratic fields")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Working precision in bits (at least 64).
    #[arg(long, global = true, default_value_t = 128)]
    precision: u32,
    /// Absolute tolerance for truncation and comparisons.
    #[arg(long, global = true, default_value_t = 1e-20)]
    tol: f64,
    /// Output format.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Direct,
    Binomial,
    Spectral,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ParityArg {
    Odd,
    Even,
}

impl From<ParityArg> for Parity {
    fn from(p: ParityArg) -> Self {
        match p {
            ParityArg::Odd => Parity::Odd,
            ParityArg::Even => Parity::Even,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Suite {
    Identities,
    Pell,
    Classnumber,
    Crosscheck,
    All,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the invariants of Q(√D).
    Field {
        #[arg(long = "D", allow_hyphen_values = true)]
        d: i64,
    },
    /// Print L_D(n) and F_D(n) for n = 1..=limit.
    Table {
        #[arg(long = "D", allow_hyphen_values = true)]
        d: i64,
        #[arg(long, default_value_t = 20)]
        limit: u64,
    },
    /// Evaluate Z_odd or Z_even at one point.
    Zeta {
        #[arg(long = "D", allow_hyphen_values = true)]
        d: i64,
        /// Complex argument such as "2", "-1+0.3i" or "0.5-1.3i".
        #[arg(long, allow_hyphen_values = true)]
        s: String,
        #[arg(long, value_enum, default_value_t = ParityArg::Odd)]
        parity: ParityArg,
        #[arg(long, value_enum, default_value_t = MethodArg::All)]
        method: MethodArg,
    },
    /// Run verification suites; exits 3 if anything fails.
    Verify {
        #[arg(long, value_enum, default_value_t = Suite::All)]
        suite: Suite,
        /// Comma-separated list of D.
        #[arg(long = "D", value_delimiter = ',', default_values_t = vec![2, 5, 13, 29])]
        d: Vec<i64>,
        /// Upper limit of n for the Pell suite.
        #[arg(long, default_value_t = 100_000)]
        limit: u64,
        /// Seed for the identity samples.
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Real-part grid "lo..hi:step" for the cross-check suite.
        #[arg(long, allow_hyphen_values = true)]
        re: Option<String>,
        /// Imaginary-part grid "lo..hi:step" for the cross-check suite.
        #[arg(long, allow_hyphen_values = true)]
        im: Option<String>,
    },
    /// List grid poles in a rectangle, with residues of Z_odd on the real axis.
    Poles {
        #[arg(long = "D", allow_hyphen_values = true)]
        d: i64,
        /// Real range "lo..hi".
        #[arg(long, allow_hyphen_values = true)]
        re: String,
        /// Imaginary range "lo..hi".
        #[arg(long, allow_hyphen_values = true)]
        im: String,
    },
}

/// Parse arguments, run the command and write its output. Returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { write!(err, "{text}") } else { write!(out, "{text}") };
            return code;
        }
    };
    match dispatch(&cli) {
        Ok(Outcome { text, passed }) => {
            let _ = write!(out, "{text}");
            if passed {
                EXIT_OK
            } else {
                EXIT_VERIFY_FAILED
            }
        }
        Err(e) => {
            let _ = writeln!(err, "{e}");
            exit_code(&e)
        }
    }
}

/// Exit code for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::UnsupportedField { .. } => EXIT_UNSUPPORTED,
        Error::Consistency(_) => EXIT_VERIFY_FAILED,
        _ => EXIT_USAGE,
    }
}

struct Outcome {
    text: String,
    passed: bool,
}

impl Outcome {
    fn ok(text: String) -> Self {
        Outcome { text, passed: true }
    }
}

fn dispatch(cli: &Cli) -> Result<Outcome> {
    let c = &cli.common;
    if c.precision < 64 {
        return Err(Error::domain("--precision must be at least 64 bits"));
    }
    let floor = (-f64::from(c.precision) + 24.0).exp2();
    if !(c.tol > floor && c.tol.is_finite()) {
        return Err(Error::domain(format!(
            "--tol must exceed 2^(-precision+24) = {floor:e}, got {}",
            c.tol
        )));
    }
    match &cli.command {
        Command::Field { d } => cmd_field(*d, c),
        Command::Table { d, limit } => cmd_table(*d, *limit, c),
        Command::Zeta { d, s, parity, method } => cmd_zeta(*d, s, (*parity).into(), *method, c),
        Command::Verify { suite, d, limit, seed, re, im } => {
            cmd_verify(*suite, d, *limit, *seed, re.as_deref(), im.as_deref(), c)
        }
        Command::Poles { d, re, im } => cmd_poles(*d, re, im, c),
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("serializable output");
    text.push('\n');
    text
}

fn format_or(c: &Common, default: Format) -> Format {
    c.format.unwrap_or(default)
}

fn cmd_field(d: i64, c: &Common) -> Result<Outcome> {
    let ctx = make_context(d, c.precision)?;
    let record = ctx.to_record();
    let text = match format_or(c, Format::Json) {
        Format::Json => to_json(&record),
        Format::Csv => {
            let mut t = String::from("key,value\n");
            let rows = [
                ("D", record.d),
                ("q", record.q),
                ("ell", record.ell),
                ("eps", record.eps.display),
                ("norm_eps", record.norm_eps),
                ("log_eps", record.log_eps.value),
                ("class_number", record.class_number),
                ("divisor_count_D", record.divisor_count_d),
                ("L1_chi_q", record.l1_chi_q.value),
            ];
            for (k, v) in rows {
                let _ = writeln!(t, "{k},{v}");
            }
            t
        }
    };
    Ok(Outcome::ok(text))
}

#[derive(Serialize)]
struct TableRow {
    n: u64,
    #[serde(rename = "L_D")]
    lucas: String,
    #[serde(rename = "F_D")]
    fibonacci: String,
}

fn cmd_table(d: i64, limit: u64, c: &Common) -> Result<Outcome> {
    let ctx = make_context(d, c.precision)?;
    let text = match format_or(c, Format::Csv) {
        Format::Csv => table_csv(&ctx, limit),
        Format::Json => {
            let mut lucas = SeqTable::new(&ctx, SeqKind::Lucas);
            let mut fib = SeqTable::new(&ctx, SeqKind::Fibonacci);
            lucas.extend_to(limit);
            fib.extend_to(limit);
            let rows: Vec<TableRow> = (1..=limit)
                .map(|n| TableRow {
                    n,
                    lucas: lucas.values()[n as usize - 1].to_string(),
                    fibonacci: fib.values()[n as usize - 1].to_string(),
                })
                .collect();
            to_json(&rows)
        }
    };
    Ok(Outcome::ok(text))
}

const EVAL_CSV_HEADER: &str = "D,s_re,s_im,parity,method,value_re,value_im,tail_bound,terms_used\n";

fn eval_csv_row(r: &EvalRecord) -> String {
    format!(
        "{},{},{},{},{},{},{},{:e},{}\n",
        r.d,
        r.s_re,
        r.s_im,
        r.parity.as_str(),
        r.method.as_str(),
        r.value_re,
        r.value_im,
        r.tail_bound,
        r.terms_used
    )
}

#[derive(Serialize)]
struct Skipped {
    method: Method,
    reason: String,
}

#[derive(Serialize)]
struct AllMethods {
    #[serde(rename = "D")]
    d: i64,
    s_re: String,
    s_im: String,
    parity: Parity,
    results: Vec<EvalRecord>,
    skipped: Vec<Skipped>,
    max_discrepancy: f64,
    tol: f64,
    passed: bool,
}

fn cmd_zeta(d: i64, s_text: &str, parity: Parity, method: MethodArg, c: &Common) -> Result<Outcome> {
    let ctx = make_context(d, c.precision)?;
    let s = CNum::parse(c.precision, s_text)?;
    let format = format_or(c, Format::Json);
    let single = match method {
        MethodArg::Direct => Some(Method::Direct),
        MethodArg::Binomial => Some(Method::Binomial),
        MethodArg::Spectral => Some(Method::Spectral),
        MethodArg::All => None,
    };
    if let Some(m) = single {
        let record = evaluate(&ctx, &s, parity, m, c.tol)?.to_record(&ctx, &s, parity);
        let text = match format {
            Format::Json => to_json(&record),
            Format::Csv => format!("{EVAL_CSV_HEADER}{}", eval_csv_row(&record)),
        };
        return Ok(Outcome::ok(text));
    }

    let mut values = Vec::new();
    let mut skipped = Vec::new();
    for m in Method::ALL {
        if !m.applies(&s, parity) {
            let reason = match m {
                Method::Direct => "requires Re s > 0",
                _ => "the even spectral series requires Re s < 0",
            };
            skipped.push(Skipped { method: m, reason: reason.to_string() });
            continue;
        }
        // Evaluators run tighter than the comparison tolerance.
        let r = evaluate(&ctx, &s, parity, m, c.tol / 4.0)?;
        values.push(r);
    }
    let mut max_discrepancy: f64 = 0.0;
    for (i, a) in values.iter().enumerate() {
        for b in &values[i + 1..] {
            max_discrepancy = max_discrepancy.max(a.value.dist(&b.value));
        }
    }
    let passed = max_discrepancy < 2.0 * c.tol;
    let results: Vec<EvalRecord> = values.iter().map(|r| r.to_record(&ctx, &s, parity)).collect();
    let text = match format {
        Format::Json => to_json(&AllMethods {
            d,
            s_re: float_to_decimal(s.re()),
            s_im: float_to_decimal(s.im()),
            parity,
            results,
            skipped,
            max_discrepancy,
            tol: c.tol,
            passed,
        }),
        Format::Csv => {
            let mut t = EVAL_CSV_HEADER.to_string();
            for r in &results {
                t.push_str(&eval_csv_row(r));
            }
            t
        }
    };
    Ok(Outcome { text, passed })
}

/// Parse "lo..hi" or "lo..hi:step".
pub fn parse_range(text: &str) -> Result<(f64, f64, Option<f64>)> {
    let bad = || Error::Parse(format!("expected lo..hi or lo..hi:step, got {text:?}"));
    let (range, step) = match text.split_once(':') {
        Some((r, st)) => (r, Some(st)),
        None => (text, None),
    };
    let (lo, hi) = range.split_once("..").ok_or_else(bad)?;
    let num = |t: &str| parse_float(64, t).map(|f| f.to_f64()).map_err(|_| bad());
    let (lo, hi) = (num(lo)?, num(hi)?);
    let step = step.map(num).transpose()?;
    if lo > hi || step.is_some_and(|st| st.is_nan() || st <= 0.0) {
        return Err(bad());
    }
    Ok((lo, hi, step))
}

/// Grid points lo, lo+step, ... ≤ hi (with a small allowance for rounding).
fn range_points(lo: f64, hi: f64, step: Option<f64>) -> Vec<f64> {
    match step {
        None if lo == hi => vec![lo],
        None => vec![lo, hi],
        Some(st) => {
            let n = ((hi - lo) / st + 1e-9).floor() as usize;
            (0..=n).map(|i| lo + st * i as f64).collect()
        }
    }
}

/// Default cross-check grid: the convergent and continued sample lines.
const DEFAULT_RE: [f64; 10] = [-3.2, -3.1, -1.5, -1.3, -0.7, -0.5, 0.5, 1.0, 2.0, 3.0];
const DEFAULT_IM: [f64; 5] = [0.0, 0.5, -0.9, 1.1, -1.3];

#[derive(Serialize)]
struct CrossCheckSummary {
    #[serde(rename = "D")]
    d: i64,
    points: usize,
    skipped: usize,
    errors: Vec<String>,
    max_delta: f64,
    passed: bool,
}

#[derive(Serialize, Default)]
struct VerifyReport {
    seed: u64,
    precision_bits: u32,
    tol: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    identities: Option<Vec<IdentityReport>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pell: Option<Vec<PellCheck>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    classnumber: Option<Vec<ClassNumberCheck>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    crosscheck: Option<Vec<CrossCheckSummary>>,
    passed: bool,
}

fn contexts(ds: &[i64], prec: u32) -> Result<Vec<FieldContext>> {
    ds.iter().map(|&d| make_context(d, prec)).collect()
}

fn cmd_verify(
    suite: Suite,
    ds: &[i64],
    limit: u64,
    seed: u64,
    re: Option<&str>,
    im: Option<&str>,
    c: &Common,
) -> Result<Outcome> {
    let wants = |s: Suite| suite == s || suite == Suite::All;
    let mut report = VerifyReport { seed, precision_bits: c.precision, tol: c.tol, ..Default::default() };
    let mut passed = true;

    if wants(Suite::Identities) {
        let reports = identity_suite(seed, IDENTITY_SAMPLES, c.precision)?;
        passed &= reports.iter().all(|r| r.passed);
        report.identities = Some(reports);
    }
    if wants(Suite::Pell) {
        let checks: Vec<PellCheck> =
            contexts(ds, c.precision)?.iter().map(|ctx| verify_pell(ctx, limit)).collect();
        passed &= checks.iter().all(|r| r.passed);
        report.pell = Some(checks);
    }
    if wants(Suite::Classnumber) {
        let checks = class_number_formula_checks(CLASS_NUMBER_D_MAX, c.precision, CLASS_NUMBER_TOL)?;
        passed &= checks.iter().all(|r| r.passed);
        report.classnumber = Some(checks);
    }
    if wants(Suite::Crosscheck) {
        let re_points = match re {
            Some(t) => {
                let (lo, hi, st) = parse_range(t)?;
                range_points(lo, hi, st)
            }
            None => DEFAULT_RE.to_vec(),
        };
        let im_points = match im {
            Some(t) => {
                let (lo, hi, st) = parse_range(t)?;
                range_points(lo, hi, st)
            }
            None => DEFAULT_IM.to_vec(),
        };
        let grid: Vec<CNum> = re_points
            .iter()
            .flat_map(|&x| im_points.iter().map(move |&y| (x, y)))
            .map(|(x, y)| CNum::from_f64(c.precision, x, y))
            .collect();
        let mut summaries = Vec::new();
        for ctx in contexts(ds, c.precision)? {
            let r = cross_check(&ctx, &grid, c.tol);
            summaries.push(CrossCheckSummary {
                d: ctx.d,
                points: r.points.len(),
                skipped: r.skipped(),
                errors: r.points.iter().filter_map(|p| p.error.clone()).collect(),
                max_delta: r.max_delta(),
                passed: r.passed(),
            });
        }
        passed &= summaries.iter().all(|s| s.passed);
        report.crosscheck = Some(summaries);
    }
    report.passed = passed;

    let text = match format_or(c, Format::Json) {
        Format::Json => to_json(&report),
        Format::Csv => verify_csv(&report),
    };
    Ok(Outcome { text, passed })
}

fn verify_csv(r: &VerifyReport) -> String {
    let mut t = String::from("suite,item,measure,passed\n");
    for x in r.identities.iter().flatten() {
        let _ = writeln!(t, "identities,{},{:e},{}", x.name, x.max_residual, x.passed);
    }
    for x in r.pell.iter().flatten() {
        let _ = writeln!(t, "pell,D={},{},{}", x.d, x.mismatches.len(), x.passed);
    }
    for x in r.classnumber.iter().flatten() {
        let _ = writeln!(t, "classnumber,D={},{:e},{}", x.d, x.residual, x.passed);
    }
    for x in r.crosscheck.iter().flatten() {
        let _ = writeln!(t, "crosscheck,D={},{:e},{}", x.d, x.max_delta, x.passed);
    }
    t
}

#[derive(Serialize)]
struct PoleRow {
    k: u64,
    m: i64,
    s_re: String,
    s_im: String,
    residue_re: Option<String>,
    residue_im: Option<String>,
}

fn cmd_poles(d: i64, re: &str, im: &str, c: &Common) -> Result<Outcome> {
    let ctx = make_context(d, c.precision)?;
    let (re_lo, re_hi, _) = parse_range(re)?;
    let (im_lo, im_hi, _) = parse_range(im)?;
    let mut rows = Vec::new();
    for pole in pole_grid(&ctx, (re_lo, re_hi), (im_lo, im_hi))? {
        let residue = if pole.m == 0 {
            Some(residue_at(&ctx, &pole, Parity::Odd)?)
        } else {
            None
        };
        rows.push(PoleRow {
            k: pole.k,
            m: pole.m,
            s_re: float_to_decimal(pole.location.re()),
            s_im: float_to_decimal(pole.location.im()),
            residue_re: residue.as_ref().map(|r| float_to_decimal(r.re())),
            residue_im: residue.as_ref().map(|r| float_to_decimal(r.im())),
        });
    }
    let text = match format_or(c, Format::Json) {
        Format::Json => to_json(&rows),
        Format::Csv => {
            let mut t = String::from("k,m,s_re,s_im,residue_re,residue_im\n");
            for r in &rows {
                let _ = writeln!(
                    t,
                    "{},{},{},{},{},{}",
                    r.k,
                    r.m,
                    r.s_re,
                    r.s_im,
                    r.residue_re.as_deref().unwrap_or(""),
                    r.residue_im.as_deref().unwrap_or("")
                );
            }
            t
        }
    };
    Ok(Outcome::ok(text))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_capture(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let mut full = vec!["fibzeta"];
        full.extend_from_slice(args);
        let code = run(full, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn ranges() {
        assert_eq!(parse_range("-5..1").unwrap(), (-5.0, 1.0, None));
        assert_eq!(parse_range("0..1:0.25").unwrap(), (0.0, 1.0, Some(0.25)));
        assert!(parse_range("1..0").is_err());
        assert!(parse_range("0..1:0").is_err());
        assert!(parse_range("abc").is_err());
        assert_eq!(range_points(0.0, 1.0, Some(0.25)).len(), 5);
    }

    #[test]
    fn field_exit_codes() {
        let (code, out, _) = run_capture(&["field", "--D", "5"]);
        assert_eq!(code, 0);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["q"], "5");
        assert_eq!(v["ell"], "4");
        assert_eq!(v["class_number"], "1");
        let (code, _, err) = run_capture(&["field", "--D", "3"]);
        assert_eq!(code, 2);
        assert!(err.contains("UNSUPPORTED: N(eps) = +1"));
        let (code, _, err) = run_capture(&["field", "--D", "12"]);
        assert_eq!(code, 1);
        assert!(err.contains("DomainError"));
    }

    #[test]
    fn usage_errors() {
        assert_eq!(run_capture(&["field"]).0, 1);
        assert_eq!(run_capture(&["bogus"]).0, 1);
        assert_eq!(run_capture(&["--precision", "32", "field", "--D", "5"]).0, 1);
        assert_eq!(run_capture(&["--tol", "1e-40", "field", "--D", "5"]).0, 1);
        assert_eq!(run_capture(&["--help"]).0, 0);
    }
}
