//! User catalogs of grid families, read from JSON.
//!
//! ```json
//! { "families": [ {
//!     "name": "kravchuk-half", "lattice": "linear",
//!     "sigma": [0, 1], "tau": [7, -2],
//!     "a": 0, "b": 8, "sign": -1, "base": 1, "factorial": true
//! } ] }
//! ```
//!
//! Numbers may be JSON integers, decimals or strings holding fractions (`"-3/4"`) or decimals
//! (`"1e-8"`); all are read as exact rationals.

use std::fmt;
use std::path::Path;

use ladderlattice_core::family::CustomDef;
use ladderlattice_core::lattice::LatticeKind;
use ladderlattice_core::{parse_rational, Rational};
use serde::Deserialize;

#[derive(Debug)]
pub enum CatalogError {
    Io(String),
    Syntax(String),
    Invalid { family: String, reason: String },
}

impl fmt::Display for CatalogError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CatalogError::Io(m) => write!(f, "cannot read catalog: {m}"),
            CatalogError::Syntax(m) => write!(f, "malformed catalog: {m}"),
            CatalogError::Invalid { family, reason } => write!(f, "catalog family '{family}': {reason}"),
        }
    }
}

impl std::error::Error for CatalogError {}

#[derive(Deserialize)]
#[serde(untagged)]
enum Num {
    Int(i64),
    Float(f64),
    Text(String),
}

impl Num {
    fn value(&self) -> Option<Rational> {
        match self {
            Num::Int(i) => parse_rational(&i.to_string()),
            Num::Float(x) => parse_rational(&x.to_string()),
            Num::Text(t) => parse_rational(t),
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Entry {
    name: String,
    lattice: String,
    #[serde(default)]
    coeffs: Vec<Num>,
    q: Option<Num>,
    sigma: Vec<Num>,
    tau: Vec<Num>,
    #[serde(default)]
    a: i64,
    b: Option<i64>,
    #[serde(default = "minus_one")]
    sign: i64,
    base: Option<Num>,
    #[serde(default)]
    factorial: bool,
}

fn minus_one() -> i64 {
    -1
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct File {
    families: Vec<Entry>,
}

impl Entry {
    fn into_def(self) -> Result<CustomDef, CatalogError> {
        let bad = |reason: String| CatalogError::Invalid { family: self.name.clone(), reason };
        let nums = |v: &[Num], what: &str| -> Result<Vec<Rational>, CatalogError> {
            v.iter().map(|n| n.value().ok_or_else(|| bad(format!("unreadable number in {what}")))).collect()
        };
        let kind = match self.lattice.as_str() {
            "linear" => LatticeKind::Linear,
            "quadratic" => LatticeKind::Quadratic,
            "q-exponential" | "qexponential" => LatticeKind::QExponential,
            other => return Err(bad(format!("lattice must be linear, quadratic or q-exponential, not '{other}'"))),
        };
        let mut coeffs = nums(&self.coeffs, "coeffs")?;
        if kind != LatticeKind::Linear && coeffs.len() != 3 {
            return Err(bad("non-uniform lattices need three coeffs [c1, c2, c3]".into()));
        }
        coeffs.resize(3, Rational::from_integer(0.into()));
        let q = match &self.q {
            Some(n) => Some(n.value().ok_or_else(|| bad("unreadable q".into()))?),
            None if kind == LatticeKind::QExponential => return Err(bad("q-exponential lattices need q".into())),
            None => None,
        };
        let sigma = nums(&self.sigma, "sigma")?;
        let tau = nums(&self.tau, "tau")?;
        if sigma.len() > 3 || tau.len() > 2 {
            return Err(bad("sigma has at most 3 and tau at most 2 coefficients".into()));
        }
        let base = match &self.base {
            Some(n) => n.value().ok_or_else(|| bad("unreadable base".into()))?,
            None => Rational::from_integer(1.into()),
        };
        if let Some(b) = self.b {
            if b <= self.a {
                return Err(bad("support end b must exceed a".into()));
            }
        }
        let [c1, c2, c3]: [Rational; 3] = coeffs.try_into().expect("resized to three");
        Ok(CustomDef {
            name: self.name.to_ascii_lowercase(),
            kind,
            coeffs: [c1, c2, c3],
            q,
            sigma,
            tau,
            a: self.a,
            b: self.b,
            sign: self.sign,
            base,
            factorial: self.factorial,
        })
    }
}

/// Parses a catalog document.
pub fn parse_catalog(text: &str) -> Result<Vec<CustomDef>, CatalogError> {
    let file: File = serde_json::from_str(text).map_err(|e| CatalogError::Syntax(e.to_string()))?;
    let defs = file.families.into_iter().map(Entry::into_def).collect::<Result<Vec<_>, _>>()?;
    for (i, d) in defs.iter().enumerate() {
        if defs[..i].iter().any(|e| e.name == d.name) {
            return Err(CatalogError::Invalid { family: d.name.clone(), reason: "duplicate name".into() });
        }
    }
    Ok(defs)
}

pub fn load_catalog(path: &Path) -> Result<Vec<CustomDef>, CatalogError> {
    let text = std::fs::read_to_string(path).map_err(|e| CatalogError::Io(format!("{}: {e}", path.display())))?;
    parse_catalog(&text)
}
