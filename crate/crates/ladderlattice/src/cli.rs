//! Command-line front end. [`run`] returns the process exit code: 0 on success (for `verify`,
//! every cell passed), 1 on a computational failure, 2 on a usage error.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use ladderlattice_core::family::{default_params, CustomDef, FamilySpec, Params, SHIPPED};
use ladderlattice_core::scalar::set_precision_bits;
use ladderlattice_core::verify::{run_suite, Config, Faults, Field, FamilyRequest, IDENTITIES};
use ladderlattice_core::{parse_rational, Error, Rational, Real, Scalar};
use serde_json::{json, Value};

use crate::catalog::load_catalog;
use crate::compute::{self, LadderRow, Point};
use crate::report;
use crate::table::{write_ladder, write_table, TableRow};

pub const PRECISION_ENV: &str = "LADDERLATTICE_PRECISION";

#[derive(Parser, Debug)]
#[command(name = "ladderlattice", version, about = "Generalized orthogonal polynomials on lattices: evaluation, ladders and identity verification")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Print v_mn (and optionally Ω_mn) at the requested points.
    Eval(EvalArgs),
    /// Tabulate s, x(s), v_mn and Ω_mn over a range.
    Table(TableArgs),
    /// Apply the raising or lowering operator to v_mn and compare with its target.
    Ladder(LadderArgs),
    /// Run the identity verification sweep.
    Verify(VerifyArgs),
    /// List shipped (and catalog) families with their parameters.
    Families(FamiliesArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Plain,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FieldArg {
    Auto,
    Rational,
    Float,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Direction {
    Raise,
    Lower,
}

#[derive(Args, Debug, Clone)]
pub struct FamilyArgs {
    /// Family name (shipped or from --families).
    pub family: String,
    #[arg(long)]
    pub alpha: Option<String>,
    #[arg(long)]
    pub beta: Option<String>,
    #[arg(long)]
    pub gamma: Option<String>,
    #[arg(long)]
    pub mu: Option<String>,
    #[arg(long)]
    pub p: Option<String>,
    #[arg(long = "N")]
    pub big_n: Option<String>,
    #[arg(long = "a")]
    pub a: Option<String>,
    #[arg(long = "b")]
    pub b: Option<String>,
    #[arg(long)]
    pub q: Option<String>,
    /// JSON catalog of additional grid families.
    #[arg(long)]
    pub families: Option<PathBuf>,
    /// Arithmetic for v_mn; Ω_mn always uses floats.
    #[arg(long, value_enum, default_value_t = FieldArg::Auto)]
    pub field: FieldArg,
    /// Write to this file instead of standard output.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    #[command(flatten)]
    pub fam: FamilyArgs,
    #[arg(long)]
    pub n: i64,
    #[arg(long, default_value_t = 0)]
    pub m: i64,
    /// Sites s (grid families) or abscissae x (continuous families); comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    pub at: Vec<String>,
    /// Also print Ω_mn.
    #[arg(long)]
    pub omega: bool,
    #[arg(long, value_enum, default_value_t = Format::Plain)]
    pub format: Format,
}

#[derive(Args, Debug, Clone)]
pub struct RangeArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub from: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub to: Option<String>,
    #[arg(long)]
    pub step: Option<String>,
}

#[derive(Args, Debug)]
pub struct TableArgs {
    #[command(flatten)]
    pub fam: FamilyArgs,
    #[arg(long)]
    pub n: i64,
    #[arg(long, default_value_t = 0)]
    pub m: i64,
    #[command(flatten)]
    pub range: RangeArgs,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Args, Debug)]
pub struct LadderArgs {
    #[command(flatten)]
    pub fam: FamilyArgs,
    #[arg(long)]
    pub n: i64,
    #[arg(long, default_value_t = 0)]
    pub m: i64,
    #[arg(long, value_enum, default_value_t = Direction::Raise)]
    pub direction: Direction,
    #[command(flatten)]
    pub range: RangeArgs,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// `default` (all shipped families), a comma-separated list of shipped names, or a path to a
    /// JSON catalog; items may be combined with commas.
    #[arg(long, default_value = "default")]
    pub families: String,
    #[arg(long, default_value_t = 8)]
    pub nmax: i64,
    #[arg(long, default_value_t = 2)]
    pub mmax: i64,
    #[arg(long, value_enum, default_value_t = FieldArg::Auto)]
    pub field: FieldArg,
    /// Float-field tolerance.
    #[arg(long, default_value = "1e-18")]
    pub tolerance: String,
    /// Tolerance of the q → 1 limit cells.
    #[arg(long, default_value = "1e-6")]
    pub limit_tolerance: String,
    /// Restrict to these identity ids (comma separated).
    #[arg(long, value_delimiter = ',')]
    pub identity: Vec<String>,
    /// Fault injection: add this to the constant coefficient of τ.
    #[arg(long, allow_hyphen_values = true)]
    pub fault_tau: Option<String>,
    /// Fault injection: add this to α̃.
    #[arg(long, allow_hyphen_values = true)]
    pub fault_alpha: Option<String>,
    /// Fault injection: add this to β̃ in the recurrence cells.
    #[arg(long, allow_hyphen_values = true)]
    pub fault_beta: Option<String>,
    /// Fault injection: flip the sign of A_mn for m ≥ 1.
    #[arg(long)]
    pub fault_amn_sign: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct FamiliesArgs {
    #[arg(long)]
    pub families: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Plain)]
    pub format: Format,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

/// A failure with its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

fn usage(message: impl Into<String>) -> Failure {
    Failure { code: 2, message: message.into() }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::UnknownFamily(_)
            | Error::ParameterOutOfRange(_)
            | Error::NotAdmissible(_)
            | Error::OutOfSupport(_)
            | Error::FieldUnsupported(_) => 2,
            _ => 1,
        };
        Failure { code, message: e.to_string() }
    }
}

fn number(text: &str, what: &str) -> Result<Rational, Failure> {
    parse_rational(text).ok_or_else(|| usage(format!("{what}: '{text}' is not a number (use 3, -1/4, 0.5 or 1e-8)")))
}

fn apply_precision() -> Result<(), Failure> {
    if let Ok(v) = std::env::var(PRECISION_ENV) {
        let digits: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|d| (10..=10_000).contains(d))
            .ok_or_else(|| usage(format!("{PRECISION_ENV} must be a digit count between 10 and 10000, got '{v}'")))?;
        set_precision_bits((digits as f64 * std::f64::consts::LOG2_10).ceil() as usize);
    }
    Ok(())
}

fn catalog(path: Option<&Path>) -> Result<Vec<CustomDef>, Failure> {
    match path {
        Some(p) => load_catalog(p).map_err(|e| usage(e.to_string())),
        None => Ok(Vec::new()),
    }
}

impl FamilyArgs {
    fn params(&self) -> Result<Params, Failure> {
        let given = [
            ("alpha", &self.alpha),
            ("beta", &self.beta),
            ("gamma", &self.gamma),
            ("mu", &self.mu),
            ("p", &self.p),
            ("N", &self.big_n),
            ("a", &self.a),
            ("b", &self.b),
            ("q", &self.q),
        ];
        given
            .iter()
            .filter_map(|(k, v)| v.as_ref().map(|v| (k, v)))
            .map(|(k, v)| Ok((k.to_string(), number(v, &format!("--{k}"))?)))
            .collect()
    }

    fn request(&self) -> Result<FamilyRequest, Failure> {
        let name = self.family.to_ascii_lowercase();
        let params = self.params()?;
        let defs = catalog(self.families.as_deref())?;
        if let Some(d) = defs.into_iter().find(|d| d.name == name) {
            if !params.is_empty() {
                return Err(usage(format!("catalog family '{name}' takes no parameters")));
            }
            return Ok(FamilyRequest::Custom(d));
        }
        if default_params(&name).is_none() {
            return Err(usage(format!("unknown family '{name}'; run `ladderlattice families` for the list")));
        }
        Ok(FamilyRequest::Catalog { name, params })
    }
}

/// The field used for `v_mn`: exact unless the family needs irrational constants.
enum Built {
    Exact(FamilySpec<Rational>),
    Float(FamilySpec<Real>),
}

fn build(req: &FamilyRequest, field: FieldArg) -> Result<Built, Failure> {
    match field {
        FieldArg::Float => Ok(Built::Float(req.build()?)),
        FieldArg::Rational => Ok(Built::Exact(req.build()?)),
        FieldArg::Auto => match req.build::<Rational>() {
            Ok(f) => Ok(Built::Exact(f)),
            Err(Error::FieldUnsupported(_)) => Ok(Built::Float(req.build()?)),
            Err(e) => Err(e.into()),
        },
    }
}

fn field_name<S: Scalar>() -> String {
    if S::EXACT {
        "rational".into()
    } else {
        format!("float-{}", ladderlattice_core::scalar::precision_bits())
    }
}

fn emit(text: &str, output: Option<&Path>) -> Result<(), Failure> {
    match output {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure { code: 1, message: format!("{}: {e}", p.display()) }),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).map_err(|e| Failure { code: 1, message: e.to_string() })
        }
    }
}

fn points_arg(items: &[String]) -> Result<Vec<Point>, Failure> {
    items.iter().map(|t| number(t, "--at")).collect()
}

fn range<S: Scalar>(fam: &FamilySpec<S>, m: i64, r: &RangeArgs) -> Result<Vec<Point>, Failure> {
    if r.from.is_none() && r.to.is_none() && r.step.is_none() {
        return Ok(compute::default_points(fam, m));
    }
    let defaults = compute::default_points(fam, m);
    let from = match &r.from {
        Some(t) => number(t, "--from")?,
        None => defaults.first().cloned().unwrap_or_default(),
    };
    let to = match &r.to {
        Some(t) => number(t, "--to")?,
        None => defaults.last().cloned().unwrap_or_default(),
    };
    let step = match &r.step {
        Some(t) => number(t, "--step")?,
        None if fam.is_continuous() => Rational::new(1.into(), 10.into()),
        None => Rational::from_integer(1.into()),
    };
    Ok(compute::range_points(&from, &to, &step)?)
}

fn header(req: &FamilyRequest, m: i64, n: i64, field: &str) -> Value {
    let params: serde_json::Map<String, Value> =
        req.shown_params().into_iter().map(|(k, v)| (k, Value::String(v))).collect();
    json!({ "family": req.name(), "params": params, "m": m, "n": n, "field": field })
}

fn table_rows<S: Scalar>(
    fam: &FamilySpec<S>,
    req: &FamilyRequest,
    m: i64,
    n: i64,
    points: &[Point],
    with_omega: bool,
) -> Result<Vec<TableRow<S>>, Failure> {
    let v = compute::values(fam, m, n, points)?;
    let om = if with_omega {
        let ff: FamilySpec<Real> = req.build()?;
        Some(compute::omegas(&ff, m, n, points)?)
    } else {
        None
    };
    points
        .iter()
        .zip(v)
        .enumerate()
        .map(|(i, (p, v))| {
            Ok(TableRow {
                point: p.clone(),
                x: compute::abscissa(fam, p)?,
                v,
                omega: om.as_ref().map(|o| o[i].clone()),
            })
        })
        .collect()
}

fn render_rows<S: Scalar>(rows: &[TableRow<S>], head: Value, format: Format) -> String {
    match format {
        Format::Csv => write_table(rows),
        Format::Json => {
            let values: Vec<Value> = rows
                .iter()
                .map(|r| {
                    json!({
                        "s": r.point.to_string(),
                        "x": r.x.render(),
                        "v": r.v.render(),
                        "omega": r.omega.as_ref().map(Scalar::render),
                    })
                })
                .collect();
            let mut obj = head;
            obj["values"] = Value::Array(values);
            format!("{}\n", serde_json::to_string_pretty(&obj).expect("serializable"))
        }
        Format::Plain => rows
            .iter()
            .map(|r| match &r.omega {
                Some(o) => format!("{}\t{}\t{}\n", r.point, r.v.render(), o.render()),
                None => format!("{}\t{}\n", r.point, r.v.render()),
            })
            .collect(),
    }
}

fn eval_in<S: Scalar>(fam: &FamilySpec<S>, req: &FamilyRequest, a: &EvalArgs) -> Result<String, Failure> {
    let points = points_arg(&a.at)?;
    let rows = table_rows(fam, req, a.m, a.n, &points, a.omega)?;
    Ok(render_rows(&rows, header(req, a.m, a.n, &field_name::<S>()), a.format))
}

fn table_in<S: Scalar>(fam: &FamilySpec<S>, req: &FamilyRequest, a: &TableArgs) -> Result<String, Failure> {
    let points = range(fam, a.m, &a.range)?;
    let rows = table_rows(fam, req, a.m, a.n, &points, true)?;
    Ok(render_rows(&rows, header(req, a.m, a.n, &field_name::<S>()), a.format))
}

fn ladder_in<S: Scalar>(fam: &FamilySpec<S>, req: &FamilyRequest, a: &LadderArgs) -> Result<String, Failure> {
    let points = range(fam, a.m, &a.range)?;
    let raise = a.direction == Direction::Raise;
    let rows: Vec<LadderRow<S>> = compute::ladder_rows(fam, a.m, a.n, raise, &points)?;
    let dev = rows.iter().fold(S::zero(), |w, r| S::max_abs(w, r.after.clone() - r.target.clone()));
    Ok(match a.format {
        Format::Csv => write_ladder(&rows),
        Format::Json => {
            let mut obj = header(req, a.m, a.n, &field_name::<S>());
            obj["direction"] = json!(if raise { "raise" } else { "lower" });
            obj["max_deviation"] = json!(dev.render());
            obj["rows"] = Value::Array(
                rows.iter()
                    .map(|r| {
                        json!({
                            "s": r.point.to_string(),
                            "x": r.x.render(),
                            "before": r.before.render(),
                            "after": r.after.render(),
                            "target": r.target.render(),
                        })
                    })
                    .collect(),
            );
            format!("{}\n", serde_json::to_string_pretty(&obj).expect("serializable"))
        }
        Format::Plain => {
            let mut s: String = rows
                .iter()
                .map(|r| format!("{}\t{}\t{}\t{}\n", r.point, r.before.render(), r.after.render(), r.target.render()))
                .collect();
            s.push_str(&format!("max deviation {}\n", dev.render()));
            s
        }
    })
}

fn with_family<F, G>(fam: &FamilyArgs, exact: F, float: G) -> Result<String, Failure>
where
    F: FnOnce(&FamilySpec<Rational>, &FamilyRequest) -> Result<String, Failure>,
    G: FnOnce(&FamilySpec<Real>, &FamilyRequest) -> Result<String, Failure>,
{
    let req = fam.request()?;
    match build(&req, fam.field)? {
        Built::Exact(f) => exact(&f, &req),
        Built::Float(f) => float(&f, &req),
    }
}

fn verify_config(a: &VerifyArgs) -> Result<Config, Failure> {
    let mut families = Vec::new();
    for item in a.families.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        if item == "default" {
            families.extend(SHIPPED.iter().map(|n| FamilyRequest::catalog(n)));
        } else if default_params(&item.to_ascii_lowercase()).is_some() {
            families.push(FamilyRequest::catalog(&item.to_ascii_lowercase()));
        } else if Path::new(item).exists() {
            families.extend(catalog(Some(Path::new(item)))?.into_iter().map(FamilyRequest::Custom));
        } else {
            return Err(usage(format!("--families: '{item}' is neither a shipped family nor a catalog file")));
        }
    }
    if a.nmax < 0 || a.mmax < 0 {
        return Err(usage("--nmax and --mmax must be non-negative"));
    }
    for id in &a.identity {
        if !IDENTITIES.contains(&id.as_str()) {
            return Err(usage(format!("unknown identity '{id}'; known: {}", IDENTITIES.join(", "))));
        }
    }
    let opt = |v: &Option<String>, what: &str| v.as_deref().map(|t| number(t, what)).transpose();
    Ok(Config {
        families,
        n_max: a.nmax,
        m_max: a.mmax,
        field: match a.field {
            FieldArg::Auto => Field::Auto,
            FieldArg::Rational => Field::Rational,
            FieldArg::Float => Field::Float,
        },
        float_tolerance: number(&a.tolerance, "--tolerance")?,
        limit_tolerance: number(&a.limit_tolerance, "--limit-tolerance")?,
        identities: (!a.identity.is_empty()).then(|| a.identity.clone()),
        faults: Faults {
            tau_shift: opt(&a.fault_tau, "--fault-tau")?,
            alpha_shift: opt(&a.fault_alpha, "--fault-alpha")?,
            beta_shift: opt(&a.fault_beta, "--fault-beta")?,
            flip_amn_sign: a.fault_amn_sign,
        },
        seed: a.seed,
    })
}

fn families_listing(a: &FamiliesArgs) -> Result<String, Failure> {
    let mut entries = Vec::new();
    for name in SHIPPED {
        let fam: FamilySpec<Real> = ladderlattice_core::catalog_get(name, &Params::new())?;
        let params: Vec<(String, String)> =
            default_params(name).unwrap_or_default().into_iter().map(|(k, v)| (k, v.to_string())).collect();
        entries.push((name.to_string(), fam.kind().name(), fam.a, fam.b, params, "shipped"));
    }
    for d in catalog(a.families.as_deref())? {
        entries.push((d.name.clone(), d.kind.name(), d.a, d.b, Vec::new(), "catalog"));
    }
    let support = |kind: &str, a: i64, b: Option<i64>| match (kind, b) {
        ("continuous", _) => "interval".to_string(),
        (_, Some(b)) => format!("{a}..{}", b - 1),
        (_, None) => format!("{a}.."),
    };
    Ok(match a.format {
        Format::Json => {
            let list: Vec<Value> = entries
                .iter()
                .map(|(n, k, lo, hi, p, src)| {
                    let params: serde_json::Map<String, Value> =
                        p.iter().map(|(k, v)| (k.clone(), Value::String(v.clone()))).collect();
                    json!({ "name": n, "lattice": k, "support": support(k, *lo, *hi), "params": params, "source": src })
                })
                .collect();
            format!("{}\n", serde_json::to_string_pretty(&list).expect("serializable"))
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["name", "lattice", "support", "params", "source"]).expect("in-memory write");
            for (n, k, lo, hi, p, src) in &entries {
                let ps = p.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(";");
                w.write_record([n.as_str(), k, &support(k, *lo, *hi), &ps, src]).expect("in-memory write");
            }
            String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
        }
        Format::Plain => entries
            .iter()
            .map(|(n, k, lo, hi, p, src)| {
                let ps = p.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(" ");
                format!("{n:<10} {k:<14} {:<8} {src:<8} {ps}\n", support(k, *lo, *hi))
            })
            .collect(),
    })
}

fn dispatch(cli: Cli) -> Result<i32, Failure> {
    apply_precision()?;
    match cli.command {
        Command::Eval(a) => {
            let text = with_family(&a.fam, |f, r| eval_in(f, r, &a), |f, r| eval_in(f, r, &a))?;
            emit(&text, a.fam.output.as_deref())?;
        }
        Command::Table(a) => {
            let text = with_family(&a.fam, |f, r| table_in(f, r, &a), |f, r| table_in(f, r, &a))?;
            emit(&text, a.fam.output.as_deref())?;
        }
        Command::Ladder(a) => {
            let text = with_family(&a.fam, |f, r| ladder_in(f, r, &a), |f, r| ladder_in(f, r, &a))?;
            emit(&text, a.fam.output.as_deref())?;
        }
        Command::Verify(a) => {
            let cfg = verify_config(&a)?;
            let rep = run_suite(&cfg);
            let text = match a.format {
                Format::Json => format!("{}\n", serde_json::to_string_pretty(&report::to_json(&rep)).expect("serializable")),
                Format::Csv => report::to_csv(&rep),
                Format::Plain => report::to_plain(&rep),
            };
            emit(&text, a.output.as_deref())?;
            if !rep.all_pass() {
                if a.output.is_some() || a.format != Format::Plain {
                    eprintln!("{} of {} cells failed", rep.summary.failed, rep.summary.total);
                }
                return Ok(1);
            }
        }
        Command::Families(a) => {
            let text = families_listing(&a)?;
            emit(&text, a.output.as_deref())?;
        }
    }
    Ok(0)
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}
