//! Command-line front end. [`run`] is the whole program minus process
//! plumbing, so it can be driven from tests.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use num_rational::BigRational;
use serde_json::{json, Value};

use crate::arith::{parse_rational, Scalar};
use crate::closed_forms::{
    gamma_series, l1_closed_form, log_solution, polynomial_value, stability_mode, Branch, HypersphereSpec,
};
use crate::config::{parse_config, ParamFile};
use crate::determinant::{det_laplacian, eigenvalue, zeta_prime_zero};
use crate::document::{decode_series, number17, AnySeries, DocScalar, SCHEMA_VERSION};
use crate::error::{Error, Result};
use crate::frobenius::{build_master_series, build_series, eval_series, FrobeniusSeries, Indexing, DEFAULT_TERMS};
use crate::oracle::{verify_suite, Status};
use crate::params::{classify_case, time_period, CaseTag, ModeParams, SpacetimeParams};
use crate::radial_ode::indicial_exponents;
use crate::resummation::generating_identity_suite;

/// Environment variable selecting the recurrence arithmetic.
pub const MODE_VAR: &str = "FROBENIUS_MODE";
const CLASSIFY_TOL: f64 = 1e-12;

#[derive(Debug, Parser)]
#[command(name = "tangherlini", version, about = "Radial Laplace modes on Euclidean Schwarzschild-Tangherlini backgrounds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args, Clone)]
struct ParamArgs {
    /// Flat key = value parameter file; inline flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    n: Option<u32>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    rho: Option<f64>,
    #[arg(long = "R_g", global = true, allow_hyphen_values = true)]
    r_g: Option<f64>,
    #[arg(long = "R_h", global = true, allow_hyphen_values = true)]
    r_h: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    lambda: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    mu: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    nu: Option<f64>,
}

#[derive(Debug, Args, Clone)]
struct GridArgs {
    /// Sample grid: x_min x_max count.
    #[arg(long, num_args = 3, value_names = ["X_MIN", "X_MAX", "COUNT"], default_values = ["0.01", "0.95", "200"])]
    grid: Vec<String>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BranchArg {
    Minus,
    Plus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    /// Two-step recurrence with stride m.
    Separated,
    /// Full five-term relation, stride 1.
    Master,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum IndexingArg {
    Resolved,
    Literal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Family {
    /// Terminating `n = 3` solution with leading power `x^(-l)`.
    Polynomial,
    /// `n = 3` solution with the logarithm.
    Logarithmic,
    /// `6(-2 + (1 - 2/x) log(1-x))`.
    L1,
    GammaPlus,
    GammaMinus,
    /// Static mode in `t = r/rho`, sampled at `t = 1/x`.
    Stability,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Figure {
    /// The terminating solutions.
    Polynomial,
    /// The logarithmic solutions.
    Logarithmic,
}

#[derive(Debug, Args, Clone)]
struct SeriesArgs {
    /// Exponent branch when `--e` is not given.
    #[arg(long, value_enum, default_value_t = BranchArg::Plus)]
    branch: BranchArg,
    /// Explicit exponent (`p/q` or decimal).
    #[arg(long, allow_hyphen_values = true)]
    e: Option<String>,
    #[arg(long, default_value_t = DEFAULT_TERMS)]
    terms: usize,
    #[arg(long, value_enum, default_value_t = Method::Separated)]
    method: Method,
    #[arg(long, value_enum, default_value_t = IndexingArg::Resolved)]
    indexing: IndexingArg,
    /// Force the case instead of classifying.
    #[arg(long)]
    case: Option<String>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Case and indicial exponents at infinity.
    Exponents {
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Frobenius coefficients as a series document.
    Series {
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        series: SeriesArgs,
    },
    /// Evaluate a series on a grid.
    Eval {
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        series: SeriesArgs,
        /// Series document to evaluate instead of building one.
        #[arg(long = "series")]
        document: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        derivative: u8,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Sample an explicit hypersphere solution.
    ClosedForm {
        #[arg(long, value_enum)]
        family: Family,
        #[arg(long)]
        l: u32,
        #[arg(long = "dimension", default_value_t = 3)]
        dimension: u32,
        #[arg(long, default_value_t = 200)]
        terms: usize,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Eigenvalues, zeta'(0), determinant and period.
    Determinant {
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Randomized check of the resummed generating series.
    ResummationCheck {
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 12)]
        order: usize,
        #[arg(long, default_value_t = 20240601)]
        seed: u64,
    },
    /// Integrator comparison for every closed form and series family.
    Verify {
        #[arg(long, default_value_t = DEFAULT_TERMS)]
        terms: usize,
    },
    /// Columns of solution values for several `l`, one family at a time.
    PlotData {
        #[arg(long, value_enum)]
        figure: Figure,
        #[arg(long, num_args = 1.., default_values = ["0", "1", "2", "3"])]
        l: Vec<u32>,
        #[command(flatten)]
        grid: GridArgs,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Arithmetic {
    Double,
    Rational,
}

/// Exit status and the text for each stream.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Outcome { code: 0, stdout, stderr: String::new() }
    }

    fn usage(message: String) -> Self {
        Outcome { code: 2, stdout: String::new(), stderr: message }
    }

    fn failure(err: &Error) -> Self {
        let doc = json!({
            "schema_version": SCHEMA_VERSION,
            "error_kind": err.kind(),
            "message": err.to_string(),
            "location": err.location(),
        });
        Outcome { code: 1, stdout: pretty(&doc), stderr: String::new() }
    }
}

enum Failure {
    Usage(String),
    Compute(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Compute(e)
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn usage<T>(message: impl Into<String>) -> CliResult<T> {
    Err(Failure::Usage(message.into()))
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values always serialize");
    s.push('\n');
    s
}

/// Runs one command. `mode` is the value of [`MODE_VAR`], if set.
pub fn run<I, S>(argv: I, mode: Option<&str>) -> Outcome
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            return if code == 0 { Outcome::ok(text) } else { Outcome::usage(text) };
        }
    };
    let arithmetic = match mode.map(str::trim) {
        None | Some("") | Some("double") => Arithmetic::Double,
        Some("rational") => Arithmetic::Rational,
        Some(other) => return Outcome::usage(format!("{MODE_VAR} must be `double` or `rational`, not `{other}`\n")),
    };
    match dispatch(cli.command, arithmetic) {
        Ok(text) => Outcome::ok(text),
        Err(Failure::Usage(msg)) => Outcome::usage(format!("error: {msg}\n")),
        Err(Failure::Compute(e)) => Outcome::failure(&e),
    }
}

fn dispatch(command: Command, arithmetic: Arithmetic) -> CliResult<String> {
    match command {
        Command::Exponents { params } => exponents(&params),
        Command::Series { params, series } => {
            let (p, m) = resolve(&params)?;
            let doc = build(&p, &m, &series, arithmetic)?;
            Ok(pretty(&doc.encode()))
        }
        Command::Eval { params, series, document, derivative, grid } => {
            let doc = match document {
                Some(path) => {
                    let text = std::fs::read_to_string(&path)
                        .map_err(|e| Error::Document(format!("{}: {e}", path.display())))?;
                    decode_series(&text)?
                }
                None => {
                    let (p, m) = resolve(&params)?;
                    build(&p, &m, &series, arithmetic)?
                }
            };
            evaluate(&doc, derivative, &grid)
        }
        Command::ClosedForm { family, l, dimension, terms, grid } => closed_form(family, l, dimension, terms, &grid),
        Command::Determinant { params } => determinant(&params),
        Command::ResummationCheck { trials, order, seed } => {
            if order < 2 {
                return usage("--order must be at least 2");
            }
            let report = generating_identity_suite(trials, order, seed)?;
            let mut v = serde_json::to_value(&report).expect("report serializes");
            v["schema_version"] = json!(SCHEMA_VERSION);
            v["passed_all"] = json!(report.all_passed());
            v["literal_reading_fails"] = json!(!report.literal_reading.is_clean());
            Ok(pretty(&v))
        }
        Command::Verify { terms } => {
            if terms < 2 {
                return usage("--terms must be at least 2");
            }
            let verdicts = verify_suite(terms);
            let checks: Vec<Value> = verdicts
                .iter()
                .map(|v| {
                    json!({
                        "check": v.check,
                        "status": v.status,
                        "deviation": v.deviation.map(number17),
                        "detail": v.detail,
                    })
                })
                .collect();
            let failed = verdicts.iter().filter(|v| v.status == Status::Fail).count();
            Ok(pretty(&json!({
                "schema_version": SCHEMA_VERSION,
                "checks": checks,
                "failed": failed,
                "passed_all": failed == 0,
            })))
        }
        Command::PlotData { figure, l, grid } => plot_data(figure, &l, &grid),
    }
}

fn resolve(args: &ParamArgs) -> CliResult<(SpacetimeParams, ModeParams)> {
    let base = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Config { line: 0, message: format!("{}: {e}", path.display()) })?;
            parse_config(&text)?
        }
        None => ParamFile::default(),
    };
    let inline = ParamFile {
        n: args.n,
        rho: args.rho,
        r_g: args.r_g,
        r_h: args.r_h,
        lambda: args.lambda,
        mu: args.mu,
        nu: args.nu,
    };
    let merged = base.overlay(inline);
    if merged.n.is_none() || merged.rho.is_none() {
        return usage("--n and --rho are required (inline or in --config)");
    }
    Ok(merged.resolve()?)
}

struct Grid {
    points: Vec<f64>,
    format: Format,
}

fn grid(args: &GridArgs) -> CliResult<Grid> {
    let [lo, hi, count] = args.grid.as_slice() else {
        return usage("--grid takes X_MIN X_MAX COUNT");
    };
    let (Ok(lo), Ok(hi), Ok(count)) = (lo.parse::<f64>(), hi.parse::<f64>(), count.parse::<usize>()) else {
        return usage("--grid takes two reals and an integer");
    };
    if !(lo > 0.0 && hi < 1.0 && lo < hi) || count < 2 {
        return usage(format!("grid must satisfy 0 < x_min < x_max < 1 and count >= 2 (got {lo} {hi} {count})"));
    }
    let points = (0..count).map(|k| lo + (hi - lo) * k as f64 / (count - 1) as f64).collect();
    Ok(Grid { points, format: args.format })
}

fn fmt(x: f64) -> String {
    match number17(x) {
        Value::Number(n) => n.to_string(),
        _ => "NaN".into(),
    }
}

fn table(header: &[String], rows: &[Vec<f64>], format: Format) -> String {
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(header).expect("in-memory write");
            for row in rows {
                w.write_record(row.iter().map(|v| fmt(*v))).expect("in-memory write");
            }
            String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ASCII output")
        }
        Format::Json => {
            let columns: serde_json::Map<String, Value> = header
                .iter()
                .enumerate()
                .map(|(k, name)| (name.clone(), Value::Array(rows.iter().map(|r| number17(r[k])).collect())))
                .collect();
            pretty(&json!({"schema_version": SCHEMA_VERSION, "columns": columns}))
        }
    }
}

fn complex_json(z: Complex64) -> Value {
    if z.im == 0.0 {
        number17(z.re)
    } else {
        Value::Array(vec![number17(z.re), number17(z.im)])
    }
}

fn exponents(args: &ParamArgs) -> CliResult<String> {
    let (p, m) = resolve(args)?;
    let case = classify_case(&p, &m, CLASSIFY_TOL)?;
    let data = indicial_exponents(&p, &m, case)?;
    Ok(pretty(&json!({
        "schema_version": SCHEMA_VERSION,
        "case": case.as_str(),
        "l1": number17(data.l1),
        "l2": number17(data.l2),
        "e": [complex_json(data.e_minus), complex_json(data.e_plus)],
        "real": data.is_real(),
    })))
}

/// Nearest `k/d` with `d <= 64` when within 1e-12, for exact mode.
fn rationalize(x: f64) -> Option<BigRational> {
    (1..=64i64).find_map(|d| {
        let k = (x * d as f64).round();
        ((k / d as f64 - x).abs() <= 1e-12 * x.abs().max(1.0)).then(|| crate::arith::rational(k as i64, d))
    })
}

fn case_of(p: &SpacetimeParams, m: &ModeParams, forced: &Option<String>) -> CliResult<CaseTag> {
    match forced {
        Some(text) => text.parse::<CaseTag>().or_else(|_| usage(format!("unknown case `{text}`"))),
        None => Ok(classify_case(p, m, CLASSIFY_TOL)?),
    }
}

fn run_recurrence<T: Scalar + DocScalar>(
    p: &SpacetimeParams,
    m: &ModeParams,
    case: CaseTag,
    e: T,
    args: &SeriesArgs,
) -> Result<FrobeniusSeries<T>> {
    match args.method {
        Method::Separated => {
            let indexing = match args.indexing {
                IndexingArg::Resolved => Indexing::Resolved,
                IndexingArg::Literal => Indexing::Literal,
            };
            build_series(p, m, case, e, args.terms, indexing)
        }
        Method::Master => build_master_series(p, m, case, e, args.terms),
    }
}

fn build(p: &SpacetimeParams, m: &ModeParams, args: &SeriesArgs, arithmetic: Arithmetic) -> CliResult<AnySeries> {
    if args.terms < 2 {
        return usage("--terms must be at least 2");
    }
    let case = case_of(p, m, &args.case)?;
    let root = match &args.e {
        Some(text) => {
            let Some(r) = parse_rational(text) else {
                return usage(format!("cannot read exponent `{text}`"));
            };
            ExponentChoice::Exact(r)
        }
        None => {
            let data = indicial_exponents(p, m, case)?;
            let z = match args.branch {
                BranchArg::Minus => data.e_minus,
                BranchArg::Plus => data.e_plus,
            };
            ExponentChoice::Float(z)
        }
    };
    Ok(match (arithmetic, root) {
        (Arithmetic::Rational, ExponentChoice::Exact(r)) => AnySeries::Rational(run_recurrence(p, m, case, r, args)?),
        (Arithmetic::Rational, ExponentChoice::Float(z)) => {
            let exact = (z.im == 0.0).then(|| rationalize(z.re)).flatten().ok_or_else(|| Error::NotIndicialRoot {
                exponent: format!("{z} (no exact rational form)"),
                residual: 0.0,
            })?;
            AnySeries::Rational(run_recurrence(p, m, case, exact, args)?)
        }
        (Arithmetic::Double, ExponentChoice::Exact(r)) => {
            AnySeries::Double(run_recurrence(p, m, case, crate::arith::rational_to_f64(&r), args)?)
        }
        (Arithmetic::Double, ExponentChoice::Float(z)) if z.im == 0.0 => {
            AnySeries::Double(run_recurrence(p, m, case, z.re, args)?)
        }
        (Arithmetic::Double, ExponentChoice::Float(z)) => AnySeries::Complex(run_recurrence(p, m, case, z, args)?),
    })
}

enum ExponentChoice {
    Exact(BigRational),
    Float(Complex64),
}

fn evaluate(doc: &AnySeries, derivative: u8, args: &GridArgs) -> CliResult<String> {
    if derivative > 2 {
        return usage("--derivative must be 0, 1 or 2");
    }
    let g = grid(args)?;
    let series = doc.to_c64();
    let mut rows = Vec::with_capacity(g.points.len());
    for &x in &g.points {
        let ev = eval_series(&series, x, derivative)?;
        rows.push(vec![x, ev.value.re, ev.value.im, ev.tail]);
    }
    let header = ["x", "value_re", "value_im", "tail"].map(String::from);
    Ok(table(&header, &rows, g.format))
}

fn closed_form(family: Family, l: u32, n: u32, terms: usize, args: &GridArgs) -> CliResult<String> {
    let g = grid(args)?;
    let spec = HypersphereSpec::new(n, l)?;
    let gamma = |branch| -> Result<FrobeniusSeries<f64>> { gamma_series::<f64>(&spec, branch, terms) };
    let series = match family {
        Family::GammaPlus => Some(gamma(Branch::Plus)?),
        Family::GammaMinus => Some(gamma(Branch::Minus)?),
        _ => None,
    };
    let mut rows = Vec::with_capacity(g.points.len());
    for &x in &g.points {
        let v = match family {
            Family::Polynomial => polynomial_value::<f64>(l, &x).0,
            Family::Logarithmic => log_solution(l, x)?,
            Family::L1 => l1_closed_form(x)?,
            Family::Stability => stability_mode(l, 1.0 / x),
            Family::GammaPlus | Family::GammaMinus => {
                eval_series(series.as_ref().expect("built above"), x, 0)?.value.re
            }
        };
        rows.push(vec![x, v]);
    }
    Ok(table(&["x".to_string(), "value".to_string()], &rows, g.format))
}

fn determinant(args: &ParamArgs) -> CliResult<String> {
    let (p, _) = resolve(args)?;
    Ok(pretty(&json!({
        "schema_version": SCHEMA_VERSION,
        "lambda_1": number17(eigenvalue(&p, 1)?),
        "zeta_prime_zero": number17(zeta_prime_zero(&p)?),
        "det": number17(det_laplacian(&p)?),
        "period": number17(time_period(&p)),
    })))
}

fn plot_data(figure: Figure, ls: &[u32], args: &GridArgs) -> CliResult<String> {
    let g = grid(args)?;
    let mut header = vec!["x".to_string()];
    header.extend(ls.iter().map(|l| format!("v_l{l}")));
    let mut rows = Vec::with_capacity(g.points.len());
    for &x in &g.points {
        let mut row = vec![x];
        for &l in ls {
            row.push(match figure {
                Figure::Polynomial => polynomial_value::<f64>(l, &x).0,
                Figure::Logarithmic => log_solution(l, x)?,
            });
        }
        rows.push(row);
    }
    Ok(table(&header, &rows, g.format))
}
