//! Verification engine: sweeps identity cells over families, levels `m` and degrees `n`, and
//! collects the residuals into a deterministic report.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::cells::{self, OmegaSet, Outcome, Perturb};
use crate::error::{Error, Result};
use crate::family::{catalog_get, default_params, CustomDef, FamilySpec, Params, SHIPPED};
use crate::ladder::{recurrence, Ladder};
use crate::lattice::Site;
use crate::poly::Poly;
use crate::rodrigues::shifted_poly;
use crate::scalar::{precision_bits, precision_digits, Rational, Real, Scalar};
use crate::spectral::lambda;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Field {
    /// Exact arithmetic; cells needing square roots are skipped.
    Rational,
    /// Everything in binary floating point at the configured precision.
    Float,
    /// Exact arithmetic where the family can be built exactly, floats for orthonormal cells.
    Auto,
}

#[derive(Clone, Debug, PartialEq)]
pub enum FamilyRequest {
    Catalog { name: String, params: Params },
    Custom(CustomDef),
}

impl FamilyRequest {
    pub fn catalog(name: &str) -> Self {
        FamilyRequest::Catalog { name: name.to_string(), params: Params::new() }
    }

    pub fn name(&self) -> &str {
        match self {
            FamilyRequest::Catalog { name, .. } => name,
            FamilyRequest::Custom(d) => &d.name,
        }
    }

    pub fn build<S: Scalar>(&self) -> Result<FamilySpec<S>> {
        match self {
            FamilyRequest::Catalog { name, params } => catalog_get(name, params),
            FamilyRequest::Custom(d) => d.build(),
        }
    }

    /// Parameters as written in the report (defaults filled in for catalog families).
    pub fn shown_params(&self) -> Vec<(String, String)> {
        match self {
            FamilyRequest::Catalog { name, params } => default_params(name)
                .unwrap_or_default()
                .into_iter()
                .map(|(k, d)| {
                    let v = params.iter().find(|(p, _)| *p == k).map_or(d, |(_, v)| v.clone());
                    (k, v.render())
                })
                .collect(),
            FamilyRequest::Custom(d) => {
                let mut v = alloc::vec![("lattice".to_string(), d.kind.name().to_string())];
                if let Some(q) = &d.q {
                    v.push(("q".to_string(), q.render()));
                }
                v
            }
        }
    }
}

/// Deliberate corruptions used to show that the suite detects errors.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Faults {
    /// Added to the constant coefficient of `τ`.
    pub tau_shift: Option<Rational>,
    pub alpha_shift: Option<Rational>,
    pub beta_shift: Option<Rational>,
    pub flip_amn_sign: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Config {
    pub families: Vec<FamilyRequest>,
    pub n_max: i64,
    pub m_max: i64,
    pub field: Field,
    pub float_tolerance: Rational,
    pub limit_tolerance: Rational,
    /// Restricts the sweep to these identity ids when set.
    pub identities: Option<Vec<String>>,
    pub faults: Faults,
    pub seed: u64,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            families: SHIPPED.iter().map(|n| FamilyRequest::catalog(n)).collect(),
            n_max: 8,
            m_max: 2,
            field: Field::Auto,
            float_tolerance: Rational::from_frac(1, 1_000_000_000_000_000_000),
            limit_tolerance: Rational::from_frac(1, 1_000_000),
            identities: None,
            faults: Faults::default(),
            seed: 0,
        }
    }
}

/// Identity ids in sweep order.
pub const IDENTITIES: [&str; 21] = [
    "pearson",
    "lattice-brackets",
    "equation",
    "rodrigues-raise",
    "generalized-equation",
    "tau-linearity",
    "mu-two-path",
    "dual-construction",
    "leading-coefficient",
    "alpha-two-path",
    "recurrence",
    "raise",
    "lower",
    "roundtrip",
    "norm-product",
    "orthogonality",
    "omega-raise",
    "omega-lower",
    "adjointness",
    "factorization",
    "q-limit",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Skipped => "skipped",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Cell {
    pub identity: String,
    pub family: String,
    pub params: Vec<(String, String)>,
    pub m: i64,
    pub n: i64,
    /// `rational` or `float-<bits>`.
    pub field: String,
    pub max_residual: String,
    pub tolerance: String,
    pub status: Status,
    pub note: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
    pub skipped: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Environment {
    pub precision_bits: usize,
    pub precision_digits: usize,
    pub float_tolerance: String,
    pub limit_tolerance: String,
    pub truncation_bound: String,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub cells: Vec<Cell>,
    pub summary: Summary,
    pub environment: Environment,
}

impl Report {
    pub fn all_pass(&self) -> bool {
        self.summary.failed == 0
    }

    pub fn failing(&self) -> impl Iterator<Item = &Cell> {
        self.cells.iter().filter(|c| c.status == Status::Fail)
    }
}

struct Sweep<'a> {
    cfg: &'a Config,
    req: &'a FamilyRequest,
    cells: Vec<Cell>,
}

impl Sweep<'_> {
    fn wanted(&self, id: &str) -> bool {
        self.cfg.identities.as_ref().is_none_or(|ids| ids.iter().any(|i| i == id))
    }

    fn push<S: Scalar>(&mut self, id: &str, m: i64, n: i64, field: &str, tol: &S, out: Outcome<S>) {
        let (residual, status, note) = match out {
            Ok((r, note)) => {
                let st = if r.abs() <= *tol { Status::Pass } else { Status::Fail };
                (r.abs().render(), st, note)
            }
            Err(Error::NotAdmissible(msg)) => ("0".to_string(), Status::Skipped, Some(msg)),
            Err(e) => ("inf".to_string(), Status::Fail, Some(e.to_string())),
        };
        self.cells.push(Cell {
            identity: id.to_string(),
            family: self.req.name().to_string(),
            params: self.req.shown_params(),
            m,
            n,
            field: field.to_string(),
            max_residual: residual,
            tolerance: tol.render(),
            status,
            note,
        });
    }

    fn run<S: Scalar>(&mut self, id: &str, m: i64, n: i64, field: &str, tol: &S, f: impl FnOnce() -> Outcome<S>) {
        if self.wanted(id) {
            let out = f();
            self.push(id, m, n, field, tol, out);
        }
    }
}

fn field_label<S: Scalar>() -> String {
    if S::EXACT {
        "rational".to_string()
    } else {
        format!("float-{}", precision_bits())
    }
}

fn tolerance<S: Scalar>(cfg: &Config) -> S {
    if S::EXACT {
        S::zero()
    } else {
        S::from_rational(&cfg.float_tolerance)
    }
}

fn perturb<S: Scalar>(f: &Faults) -> Perturb<S> {
    let conv = |r: &Option<Rational>| r.as_ref().map_or(S::zero(), S::from_rational);
    Perturb { alpha: conv(&f.alpha_shift), beta: conv(&f.beta_shift), flip_amn_sign: f.flip_amn_sign }
}

fn build_faulty<S: Scalar>(req: &FamilyRequest, faults: &Faults) -> Result<FamilySpec<S>> {
    let mut fam = req.build::<S>()?;
    if let Some(t) = &faults.tau_shift {
        fam.tau = fam.tau.add(&Poly::constant(S::from_rational(t)));
    }
    Ok(fam)
}

/// Cells that need only field arithmetic.
fn algebraic_cells<S: Scalar>(sw: &mut Sweep<'_>, fam: &FamilySpec<S>) {
    let cfg = sw.cfg;
    let field = field_label::<S>();
    let tol = tolerance::<S>(cfg);
    let p = perturb::<S>(&cfg.faults);
    sw.run("pearson", 0, 0, &field, &tol, || cells::pearson(fam));
    if !fam.is_continuous() {
        sw.run("lattice-brackets", 0, 0, &field, &tol, || cells::lattice_brackets(fam));
    }
    let top = fam.n_limit().map_or(cfg.n_max, |l| l.min(cfg.n_max));
    for n in 0..=top {
        sw.run("equation", 0, n, &field, &tol, || cells::equation(fam, 0, n, &p));
        sw.run("rodrigues-raise", 0, n, &field, &tol, || cells::rodrigues_raise(fam, n));
        for m in 0..=cfg.m_max.min(n) {
            if m >= 1 {
                sw.run("generalized-equation", m, n, &field, &tol, || cells::equation(fam, m, n, &p));
            }
            if n == m {
                sw.run("tau-linearity", m, n, &field, &tol, || cells::tau_linearity(fam, m));
            }
            sw.run("mu-two-path", m, n, &field, &tol, || cells::mu_two_path(fam, m, n));
            if m >= 1 {
                sw.run("dual-construction", m, n, &field, &tol, || cells::dual_construction(fam, m, n, &p));
            }
            sw.run("leading-coefficient", m, n, &field, &tol, || cells::leading_coefficient(fam, m, n, &p));
            sw.run("alpha-two-path", m, n, &field, &tol, || cells::alpha_two_path(fam, m, n, &p));
            sw.run("recurrence", m, n, &field, &tol, || cells::recurrence_cell(fam, m, n, &p));
            sw.run("raise", m, n, &field, &tol, || cells::raise(fam, m, n, &p));
            sw.run("lower", m, n, &field, &tol, || cells::lower(fam, m, n));
            sw.run("roundtrip", m, n, &field, &tol, || cells::roundtrip(fam, m, n, &p));
            sw.run("norm-product", m, n, &field, &tol, || cells::norm_product(fam, m, n));
            sw.run("orthogonality", m, n, &field, &tol, || cells::orthogonality(fam, m, n));
        }
    }
}

/// Cells on the orthonormal functions, which need square roots.
fn omega_cells<S: Scalar>(sw: &mut Sweep<'_>, fam: &FamilySpec<S>) {
    let cfg = sw.cfg;
    let field = field_label::<S>();
    let tol = tolerance::<S>(cfg);
    let p = perturb::<S>(&cfg.faults);
    let ids = ["omega-raise", "omega-lower", "adjointness", "factorization"];
    if !ids.iter().any(|i| sw.wanted(i)) {
        return;
    }
    let top = fam.n_limit().map_or(cfg.n_max, |l| l.min(cfg.n_max));
    for m in 0..=cfg.m_max.min(top) {
        let mut set = match OmegaSet::new(fam, m, (top + 1).min(fam.n_limit().unwrap_or(i64::MAX))) {
            Ok(s) => s,
            Err(e) => {
                for n in m..=top {
                    for id in ids {
                        sw.run(id, m, n, &field, &tol, || Err::<(S, _), _>(e.clone()));
                    }
                }
                continue;
            }
        };
        for n in m..=top {
            sw.run("omega-raise", m, n, &field, &tol, || cells::omega_ladder(fam, &mut set, m, n, true, &p));
            sw.run("omega-lower", m, n, &field, &tol, || cells::omega_ladder(fam, &mut set, m, n, false, &p));
            sw.run("adjointness", m, n, &field, &tol, || cells::adjointness(fam, &mut set, m, n));
            sw.run("factorization", m, n, &field, &tol, || cells::factorization(fam, &mut set, m, n));
        }
    }
}

/// The q-lattice family at `q = 1 + 10⁻⁸` against its linear-lattice limit: brackets, `λ_n`
/// and the raising operator applied at ten sites.
pub fn q_limit_residual(params: &Params, n: i64) -> Result<Real> {
    let mut qp: Params = params.iter().filter(|(k, _)| k != "q").cloned().collect();
    let lin = catalog_get::<Real>("hahn", &qp)?;
    qp.push(("q".to_string(), Rational::from_frac(100_000_001, 100_000_000)));
    let ql = catalog_get::<Real>("qhahn", &qp)?;
    lin.check_degree(n + 1)?;
    let rel = |a: Real, b: Real| (a - b.clone()).abs() / Real::max_abs(b, Real::one());
    let mut worst = rel(ql.lattice.bracket(n), Real::from_i64(n));
    worst = Real::max_abs(worst, rel(lambda(&ql, n), lambda(&lin, n)));
    let out = |fam: &FamilySpec<Real>| -> Result<Vec<Real>> {
        let r = recurrence(fam, 0, n)?;
        let lad = Ladder::new(fam, 0, n, r.beta)?;
        let v = shifted_poly(fam, 0, n)?;
        let f = |s: Site| v.at(&fam.lattice, s);
        (0..10).map(|i| lad.raise_at(fam, &f, Site::int(i))).collect()
    };
    let (a, b) = (out(&ql)?, out(&lin)?);
    let scale = b.iter().fold(Real::one(), |w, v| Real::max_abs(w, v.clone()));
    for (x, y) in a.into_iter().zip(b) {
        worst = Real::max_abs(worst, (x - y).abs() / scale.clone());
    }
    Ok(worst)
}

fn sweep_family(cfg: &Config, req: &FamilyRequest) -> Vec<Cell> {
    let mut sw = Sweep { cfg, req, cells: Vec::new() };
    let exact = match cfg.field {
        Field::Float => None,
        _ => Some(build_faulty::<Rational>(req, &cfg.faults)),
    };
    let float = || build_faulty::<Real>(req, &cfg.faults);
    match exact {
        Some(Ok(fam)) => algebraic_cells(&mut sw, &fam),
        Some(Err(e)) if cfg.field == Field::Rational => {
            let tol = Rational::from_i64(0);
            sw.run("pearson", 0, 0, "rational", &tol, || Err::<(Rational, _), _>(e));
        }
        _ => match float() {
            Ok(fam) => algebraic_cells(&mut sw, &fam),
            Err(e) => {
                let tol = tolerance::<Real>(cfg);
                sw.run("pearson", 0, 0, &field_label::<Real>(), &tol, || Err::<(Real, _), _>(e));
                return sw.cells;
            }
        },
    }
    if cfg.field != Field::Rational {
        match float() {
            Ok(fam) => omega_cells(&mut sw, &fam),
            Err(e) => {
                let tol = tolerance::<Real>(cfg);
                sw.run("factorization", 0, 0, &field_label::<Real>(), &tol, || Err::<(Real, _), _>(e));
            }
        }
    }
    if let FamilyRequest::Catalog { name, params } = req {
        if name == "qhahn" && cfg.field != Field::Rational {
            let tol = Real::from_rational(&cfg.limit_tolerance);
            let label = field_label::<Real>();
            for n in 0..=cfg.n_max {
                sw.run("q-limit", 0, n, &label, &tol, || q_limit_residual(params, n).map(|r| (r, None)));
            }
        }
    }
    sw.cells
}

/// Runs every requested cell; construction errors become failed cells and never stop the sweep.
pub fn run_suite(cfg: &Config) -> Report {
    let cells: Vec<Cell> = cfg.families.iter().flat_map(|req| sweep_family(cfg, req)).collect();
    let count = |st: Status| cells.iter().filter(|c| c.status == st).count();
    let summary = Summary {
        total: cells.len(),
        passed: count(Status::Pass),
        failed: count(Status::Fail),
        skipped: count(Status::Skipped),
    };
    Report {
        cells,
        summary,
        environment: Environment {
            precision_bits: precision_bits(),
            precision_digits: precision_digits(),
            float_tolerance: cfg.float_tolerance.render(),
            limit_tolerance: cfg.limit_tolerance.render(),
            truncation_bound: "1/1000000000000000000000000000000".to_string(),
            seed: cfg.seed,
        },
    }
}
