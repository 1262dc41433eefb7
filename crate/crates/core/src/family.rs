//! Hypergeometric families: the coefficients `σ`, `τ`, the lattice, the support, the
//! Rodrigues normalization and the weight (Pearson recursion on grids, closed-form density on
//! the line).

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::lattice::{Lattice, LatticeKind, Site};
use crate::poly::{self, Poly};
use crate::scalar::{Rational, Scalar};

/// Closed-form weights of the continuous families.
#[derive(Clone, Debug, PartialEq)]
pub enum Density<S> {
    /// `e^{-x²}` on the real line.
    Hermite,
    /// `x^α e^{-x}` on `[0, ∞)`.
    Laguerre { alpha: S },
    /// `(1−x)^α (1+x)^β` on `[−1, 1]`.
    Jacobi { alpha: S, beta: S },
}

/// Interval carrying a continuous weight.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Interval {
    Line,
    HalfLine,
    Symmetric,
}

impl<S: Scalar> Density<S> {
    pub fn interval(&self) -> Interval {
        match self {
            Density::Hermite => Interval::Line,
            Density::Laguerre { .. } => Interval::HalfLine,
            Density::Jacobi { .. } => Interval::Symmetric,
        }
    }

    /// `ρ(x)`. `lo` and `hi` are the distances `x − left end` and `right end − x` where the
    /// interval is bounded (callers near an endpoint pass them to avoid cancellation).
    pub fn eval(&self, x: &S, lo: Option<&S>, hi: Option<&S>) -> Option<S> {
        match self {
            Density::Hermite => (-(x.clone() * x.clone())).exp(),
            Density::Laguerre { alpha } => {
                let d = lo.cloned().unwrap_or_else(|| x.clone());
                if d <= S::zero() {
                    return Some(S::zero());
                }
                Some(d.powf(alpha)? * (-x.clone()).exp()?)
            }
            Density::Jacobi { alpha, beta } => {
                let l = lo.cloned().unwrap_or_else(|| x.clone() + S::one());
                let h = hi.cloned().unwrap_or_else(|| S::one() - x.clone());
                if l <= S::zero() || h <= S::zero() {
                    return Some(S::zero());
                }
                Some(h.powf(alpha)? * l.powf(beta)?)
            }
        }
    }

    /// `(ln ρ)'(x)` in closed form.
    pub fn log_derivative(&self, x: &S) -> S {
        match self {
            Density::Hermite => -(S::from_i64(2) * x.clone()),
            Density::Laguerre { alpha } => alpha.clone() / x.clone() - S::one(),
            Density::Jacobi { alpha, beta } => {
                beta.clone() / (S::one() + x.clone()) - alpha.clone() / (S::one() - x.clone())
            }
        }
    }

    /// `(ln ρ)''(x)` in closed form.
    pub fn log_second_derivative(&self, x: &S) -> S {
        match self {
            Density::Hermite => -S::from_i64(2),
            Density::Laguerre { alpha } => -(alpha.clone() / (x.clone() * x.clone())),
            Density::Jacobi { alpha, beta } => {
                let p = S::one() + x.clone();
                let m = S::one() - x.clone();
                -(beta.clone() / (p.clone() * p)) - alpha.clone() / (m.clone() * m)
            }
        }
    }

    /// Total mass `∫ρ`, when the field has the needed transcendental functions.
    pub fn mass(&self) -> Option<S> {
        match self {
            Density::Hermite => S::pi()?.sqrt(),
            Density::Laguerre { alpha } => gamma(&(alpha.clone() + S::one())),
            Density::Jacobi { alpha, beta } => {
                let a1 = alpha.clone() + S::one();
                let b1 = beta.clone() + S::one();
                let two = S::from_i64(2);
                Some(
                    two.powf(&(a1.clone() + b1.clone() - S::one()))? * gamma(&a1)? * gamma(&b1)?
                        / gamma(&(a1 + b1))?,
                )
            }
        }
    }

    /// `count` points well inside the interval.
    pub fn sample_points(&self, count: usize) -> Vec<S> {
        (0..count as i64)
            .map(|i| match self {
                Density::Hermite => S::from_frac(4 * i - 2 * count as i64 + 1, 4),
                Density::Laguerre { .. } => S::from_frac(3 * i + 1, 4),
                Density::Jacobi { .. } => S::from_frac(2 * i + 1 - count as i64, count as i64 + 1),
            })
            .collect()
    }
}

/// `Γ(z)` for `z > 0` through the Lanczos-free route `Γ(z) = Γ(z+k)/(z(z+1)…(z+k−1))` and
/// Stirling's series at large argument. Accurate to the working precision of the field.
pub fn gamma<S: Scalar>(z: &S) -> Option<S> {
    if S::EXACT {
        let zf = z.to_f64();
        if zf > 0.0 && zf == zf.trunc() && S::from_i64(zf as i64) == *z {
            return Some((1..zf as i64).fold(S::one(), |acc, k| acc * S::from_i64(k)));
        }
        return None;
    }
    let digits = crate::scalar::precision_digits() as f64;
    let shift_to = (digits * 1.2 + 10.0).ceil();
    let mut w = z.clone();
    let mut denom = S::one();
    while w.to_f64() < shift_to {
        denom = denom * w.clone();
        w = w + S::one();
    }
    let half = S::from_frac(1, 2);
    let two_pi = S::from_i64(2) * S::pi()?;
    let mut ln_g = (w.clone() - half.clone()) * w.ln()? - w.clone() + two_pi.ln()? * half;
    // Stirling series with Bernoulli numbers B_{2k}/(2k(2k−1) w^{2k−1}).
    let bern: [(i64, i64); 14] = [
        (1, 6),
        (-1, 30),
        (1, 42),
        (-1, 30),
        (5, 66),
        (-691, 2730),
        (7, 6),
        (-3617, 510),
        (43867, 798),
        (-174611, 330),
        (854513, 138),
        (-236364091, 2730),
        (8553103, 6),
        (-23749461029, 870),
    ];
    let w2 = w.clone() * w.clone();
    let mut wp = w.clone();
    for (k, (p, q)) in bern.iter().enumerate() {
        let two_k = 2 * (k as i64 + 1);
        let term = S::from_frac(*p, *q) / (S::from_i64(two_k * (two_k - 1)) * wp.clone());
        ln_g = ln_g + term;
        wp = wp * w2.clone();
    }
    Some(ln_g.exp()? / denom)
}

/// How the weight of a grid family is evaluated.
#[derive(Clone, Debug, PartialEq)]
pub enum GridWeight<S> {
    /// Pearson recursion from `ρ(a) = anchor`.
    Pearson { anchor: S },
}

#[derive(Clone, Debug, PartialEq)]
pub enum WeightModel<S> {
    Density(Density<S>),
    Grid(GridWeight<S>),
}

/// Rodrigues normalization `B_n = sign^n · base^n / ([n]!)^{factorial}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Normalization<S> {
    pub sign: i64,
    pub base: S,
    pub factorial: bool,
}

impl<S: Scalar> Normalization<S> {
    pub fn unit() -> Self {
        Normalization { sign: 1, base: S::one(), factorial: false }
    }

    pub fn b(&self, lat: &Lattice<S>, n: i64) -> S {
        let s = if self.sign < 0 && n % 2 == 1 { -S::one() } else { S::one() };
        let v = s * self.base.powi(n);
        if self.factorial {
            v / lat.bracket_factorial(n)
        } else {
            v
        }
    }
}

/// Closed-form weight ratio `ρ(s+1)/ρ(s)` supplied by a catalog entry independently of `σ`
/// and `τ`; construction checks the Pearson ratio against it.
pub type RatioFn<S> = fn(&[(String, S)], &Lattice<S>, Site) -> Option<S>;

/// One hypergeometric family.
#[derive(Clone, Debug)]
pub struct FamilySpec<S> {
    pub name: String,
    pub lattice: Lattice<S>,
    /// `σ̃(x)` on non-uniform lattices, `σ(x)` otherwise.
    pub sigma: Poly<S>,
    pub tau: Poly<S>,
    /// Support start (grid families). Continuous families ignore it.
    pub a: i64,
    /// Support end (exclusive), `None` for an infinite support.
    pub b: Option<i64>,
    pub params: Vec<(String, S)>,
    pub normalization: Normalization<S>,
    pub weight: WeightModel<S>,
}

impl<S: Scalar> FamilySpec<S> {
    pub fn kind(&self) -> LatticeKind {
        self.lattice.kind
    }

    pub fn is_continuous(&self) -> bool {
        self.lattice.kind == LatticeKind::Continuous
    }

    pub fn param(&self, key: &str) -> Option<&S> {
        self.params.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }

    /// `σ''` (twice the quadratic coefficient of the stored polynomial).
    pub fn sigma_pp(&self) -> S {
        self.sigma.coeff(2) * S::from_i64(2)
    }

    /// `τ'`.
    pub fn tau_p(&self) -> S {
        self.tau.coeff(1)
    }

    /// Largest admissible degree (`None` when unbounded).
    pub fn n_limit(&self) -> Option<i64> {
        if self.is_continuous() {
            return None;
        }
        self.b.map(|b| b - self.a - 1)
    }

    pub fn check_degree(&self, n: i64) -> Result<()> {
        if n < 0 {
            return Err(Error::NotAdmissible(format!("degree n = {n} is negative")));
        }
        if let Some(lim) = self.n_limit() {
            if n > lim {
                return Err(Error::NotAdmissible(format!(
                    "{}: degree n = {n} exceeds {lim} for a support of {} points",
                    self.name,
                    lim + 1
                )));
            }
        }
        Ok(())
    }

    /// Coefficient `σ(s)` of the difference equation at a grid site.
    pub fn sigma_at(&self, s: Site) -> S {
        let x = self.lattice.x(s);
        let base = self.sigma.eval(&x);
        if self.lattice.kind.is_nonuniform() {
            base - self.tau.eval(&x) * self.lattice.delta_mean_x(s) / S::from_i64(2)
        } else {
            base
        }
    }

    /// `τ(s) = τ(x(s))`.
    pub fn tau_at(&self, s: Site) -> S {
        self.tau.eval(&self.lattice.x(s))
    }

    /// `σ(s) + τ(s)Δx(s−½)`, the numerator of the Pearson ratio `ρ(s+1)/ρ(s)`.
    pub fn pearson_numerator(&self, s: Site) -> S {
        self.sigma_at(s) + self.tau_at(s) * self.lattice.delta_mean_x(s)
    }

    /// Magnitude of the terms entering `σ(s)` and the Pearson numerator; rounding-error scale.
    pub fn coefficient_scale(&self, s: Site) -> S {
        let x = self.lattice.x(s).abs();
        let abs_eval = |p: &Poly<S>| {
            p.coeffs.iter().rev().fold(S::zero(), |acc, c| acc * x.clone() + c.abs())
        };
        abs_eval(&self.sigma) + abs_eval(&self.tau) * self.lattice.delta_mean_x(s).abs()
    }

    pub fn in_support(&self, s: i64) -> bool {
        s >= self.a && self.b.is_none_or(|b| s < b)
    }

    /// Weight `ρ(a), ρ(a+1), …` for `len` sites (zero past a finite support).
    pub fn weight_table(&self, len: usize) -> Result<WeightTable<S>> {
        let anchor = match &self.weight {
            WeightModel::Grid(GridWeight::Pearson { anchor }) => anchor.clone(),
            WeightModel::Density(_) => {
                return Err(Error::NotAdmissible("continuous family has no grid weight".into()))
            }
        };
        let mut values = Vec::with_capacity(len);
        let mut cur = anchor;
        for i in 0..len as i64 {
            let s = self.a + i;
            if !self.in_support(s) {
                values.push(S::zero());
                continue;
            }
            values.push(cur.clone());
            if self.in_support(s + 1) {
                let den = self.sigma_at(Site::int(s + 1));
                if den.is_zero() {
                    return Err(Error::PearsonFailure(format!("σ({}) = 0 inside the support", s + 1)));
                }
                cur = cur * self.pearson_numerator(Site::int(s)) / den;
            }
        }
        Ok(WeightTable { a: self.a, values })
    }

    /// The continuous density, for continuous families.
    pub fn density(&self) -> Option<&Density<S>> {
        match &self.weight {
            WeightModel::Density(d) => Some(d),
            WeightModel::Grid(_) => None,
        }
    }
}

/// Weight samples on `[a, a+len)`.
#[derive(Clone, Debug)]
pub struct WeightTable<S> {
    pub a: i64,
    pub values: Vec<S>,
}

impl<S: Scalar> WeightTable<S> {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `ρ(s)`; zero below the support, `None` past the end of the table.
    pub fn rho(&self, s: i64) -> Option<S> {
        if s < self.a {
            return Some(S::zero());
        }
        self.values.get((s - self.a) as usize).cloned()
    }

    /// `ρ_m(s) = ρ(s+m) ∏_{i=1}^m σ(s+i)`.
    pub fn rho_m(&self, fam: &FamilySpec<S>, m: i64, s: i64) -> Option<S> {
        let mut r = self.rho(s + m)?;
        if r.is_zero() {
            return Some(r);
        }
        for i in 1..=m {
            r = r * fam.sigma_at(Site::int(s + i));
        }
        Some(r)
    }
}

/// Values of parameters keyed by name.
pub type Params = Vec<(String, Rational)>;

fn get<'a>(params: &'a Params, key: &str) -> Option<&'a Rational> {
    params.iter().find(|(k, _)| k == key).map(|(_, v)| v)
}

fn param_or(params: &Params, key: &str, default: (i64, i64)) -> Rational {
    get(params, key).cloned().unwrap_or_else(|| Rational::from_frac(default.0, default.1))
}

fn integer(r: &Rational, key: &str) -> Result<i64> {
    if !r.is_integer() {
        return Err(Error::ParameterOutOfRange(format!("{key} must be an integer")));
    }
    i64::try_from(r.to_integer()).map_err(|_| Error::ParameterOutOfRange(format!("{key} too large")))
}

fn require(cond: bool, msg: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::ParameterOutOfRange(msg.to_string()))
    }
}

fn conv<S: Scalar>(r: &Rational) -> S {
    S::from_rational(r)
}

fn p<S: Scalar>(c: &[S]) -> Poly<S> {
    Poly::new(c.to_vec())
}

/// Names of the shipped families.
pub const SHIPPED: [&str; 9] =
    ["hermite", "laguerre", "jacobi", "charlier", "meixner", "kravchuk", "hahn", "racah", "qhahn"];

/// Parameter names accepted by each shipped family, with their defaults.
pub fn default_params(name: &str) -> Option<Params> {
    let q = |p: i64, d: i64| Rational::from_frac(p, d);
    let v: Vec<(&str, Rational)> = match name {
        "hermite" => vec![],
        "laguerre" => vec![("alpha", q(1, 2))],
        "jacobi" => vec![("alpha", q(1, 2)), ("beta", q(3, 2))],
        "charlier" => vec![("mu", q(3, 2))],
        "meixner" => vec![("gamma", q(5, 2)), ("mu", q(1, 3))],
        "kravchuk" => vec![("p", q(1, 3)), ("N", q(14, 1))],
        "hahn" => vec![("alpha", q(1, 2)), ("beta", q(1, 1)), ("N", q(16, 1))],
        "racah" => vec![("alpha", q(1, 1)), ("beta", q(0, 1)), ("a", q(1, 1)), ("b", q(16, 1))],
        "qhahn" => vec![("alpha", q(1, 2)), ("beta", q(1, 1)), ("N", q(16, 1)), ("q", q(1, 4))],
        _ => return None,
    };
    Some(v.into_iter().map(|(k, r)| (k.to_string(), r)).collect())
}

/// Builds a shipped family. Missing parameters take their defaults; unknown keys are rejected.
pub fn catalog_get<S: Scalar>(name: &str, params: &Params) -> Result<FamilySpec<S>> {
    let name = name.to_ascii_lowercase();
    let defaults = default_params(&name).ok_or_else(|| Error::UnknownFamily(name.clone()))?;
    for (k, _) in params {
        if !defaults.iter().any(|(d, _)| d == k) {
            return Err(Error::ParameterOutOfRange(format!("{name} has no parameter '{k}'")));
        }
    }
    let full: Params = defaults
        .iter()
        .map(|(k, d)| (k.clone(), get(params, k).cloned().unwrap_or_else(|| d.clone())))
        .collect();
    let fam = match name.as_str() {
        "hermite" => hermite(),
        "laguerre" => laguerre(&full)?,
        "jacobi" => jacobi(&full)?,
        "charlier" => charlier(&full)?,
        "meixner" => meixner(&full)?,
        "kravchuk" => kravchuk(&full)?,
        "hahn" => hahn(&full)?,
        "racah" => racah(&full)?,
        "qhahn" => qhahn(&full)?,
        _ => unreachable!(),
    };
    validate(&fam, closed_ratio(&name))?;
    Ok(fam)
}

fn named<S: Scalar>(params: &Params) -> Vec<(String, S)> {
    params.iter().map(|(k, v)| (k.clone(), conv(v))).collect()
}

fn hermite<S: Scalar>() -> FamilySpec<S> {
    FamilySpec {
        name: "hermite".into(),
        lattice: Lattice::continuous(),
        sigma: p(&[S::one()]),
        tau: p(&[S::zero(), S::from_i64(-2)]),
        a: 0,
        b: None,
        params: vec![],
        normalization: Normalization { sign: -1, base: S::one(), factorial: false },
        weight: WeightModel::Density(Density::Hermite),
    }
}

fn laguerre<S: Scalar>(pr: &Params) -> Result<FamilySpec<S>> {
    let al = param_or(pr, "alpha", (0, 1));
    require(al > Rational::from_i64(-1), "laguerre needs alpha > -1")?;
    let alpha: S = conv(&al);
    Ok(FamilySpec {
        name: "laguerre".into(),
        lattice: Lattice::continuous(),
        sigma: p(&[S::zero(), S::one()]),
        tau: p(&[alpha.clone() + S::one(), -S::one()]),
        a: 0,
        b: None,
        params: named(pr),
        normalization: Normalization { sign: 1, base: S::one(), factorial: true },
        weight: WeightModel::Density(Density::Laguerre { alpha }),
    })
}

fn jacobi<S: Scalar>(pr: &Params) -> Result<FamilySpec<S>> {
    let (al, be) = (param_or(pr, "alpha", (0, 1)), param_or(pr, "beta", (0, 1)));
    require(al > Rational::from_i64(-1) && be > Rational::from_i64(-1), "jacobi needs alpha, beta > -1")?;
    let (alpha, beta): (S, S) = (conv(&al), conv(&be));
    Ok(FamilySpec {
        name: "jacobi".into(),
        lattice: Lattice::continuous(),
        sigma: p(&[S::one(), S::zero(), -S::one()]),
        tau: p(&[beta.clone() - alpha.clone(), -(alpha.clone() + beta.clone() + S::from_i64(2))]),
        a: 0,
        b: None,
        params: named(pr),
        normalization: Normalization { sign: -1, base: S::from_frac(1, 2), factorial: true },
        weight: WeightModel::Density(Density::Jacobi { alpha, beta }),
    })
}

fn charlier<S: Scalar>(pr: &Params) -> Result<FamilySpec<S>> {
    let m = param_or(pr, "mu", (1, 1));
    require(m > Rational::from_i64(0), "charlier needs mu > 0")?;
    let mu: S = conv(&m);
    let anchor = (-mu.clone()).exp().unwrap_or_else(S::one);
    Ok(FamilySpec {
        name: "charlier".into(),
        lattice: Lattice::linear(),
        sigma: p(&[S::zero(), S::one()]),
        tau: p(&[mu, -S::one()]),
        a: 0,
        b: None,
        params: named(pr),
        normalization: Normalization::unit(),
        weight: WeightModel::Grid(GridWeight::Pearson { anchor }),
    })
}

fn meixner<S: Scalar>(pr: &Params) -> Result<FamilySpec<S>> {
    let (g, m) = (param_or(pr, "gamma", (1, 1)), param_or(pr, "mu", (1, 2)));
    require(g > Rational::from_i64(0), "meixner needs gamma > 0")?;
    require(m > Rational::from_i64(0) && m < Rational::from_i64(1), "meixner needs 0 < mu < 1")?;
    let (gamma, mu): (S, S) = (conv(&g), conv(&m));
    Ok(FamilySpec {
        name: "meixner".into(),
        lattice: Lattice::linear(),
        sigma: p(&[S::zero(), S::one()]),
        tau: p(&[mu.clone() * gamma, mu - S::one()]),
        a: 0,
        b: None,
        params: named(pr),
        normalization: Normalization::unit(),
        weight: WeightModel::Grid(GridWeight::Pearson { anchor: S::one() }),
    })
}

fn kravchuk<S: Scalar>(pr: &Params) -> Result<FamilySpec<S>> {
    let pp = param_or(pr, "p", (1, 2));
    let n = integer(&param_or(pr, "N", (4, 1)), "N")?;
    require(pp > Rational::from_i64(0) && pp < Rational::from_i64(1), "kravchuk needs 0 < p < 1")?;
    require(n >= 1, "kravchuk needs N >= 1")?;
    let prob: S = conv(&pp);
    let q = S::one() - prob.clone();
    Ok(FamilySpec {
        name: "kravchuk".into(),
        lattice: Lattice::linear(),
        sigma: p(&[S::zero(), S::one()]),
        tau: p(&[S::from_i64(n) * prob.clone() / q.clone(), -(S::one() / q.clone())]),
        a: 0,
        b: Some(n + 1),
        params: named(pr),
        normalization: Normalization { sign: -1, base: S::one(), factorial: true },
        weight: WeightModel::Grid(GridWeight::Pearson { anchor: q.powi(n) }),
    })
}

fn hahn<S: Scalar>(pr: &Params) -> Result<FamilySpec<S>> {
    let (al, be) = (param_or(pr, "alpha", (0, 1)), param_or(pr, "beta", (0, 1)));
    let n = integer(&param_or(pr, "N", (8, 1)), "N")?;
    require(al > Rational::from_i64(-1) && be > Rational::from_i64(-1), "hahn needs alpha, beta > -1")?;
    require(n >= 1, "hahn needs N >= 1")?;
    let (alpha, beta): (S, S) = (conv(&al), conv(&be));
    let nn = S::from_i64(n);
    Ok(FamilySpec {
        name: "hahn".into(),
        lattice: Lattice::linear(),
        sigma: p(&[S::zero(), nn.clone() + alpha.clone(), -S::one()]),
        tau: p(&[
            (beta.clone() + S::one()) * (nn - S::one()),
            -(alpha + beta + S::from_i64(2)),
        ]),
        a: 0,
        b: Some(n),
        params: named(pr),
        normalization: Normalization { sign: -1, base: S::one(), factorial: true },
        weight: WeightModel::Grid(GridWeight::Pearson { anchor: S::one() }),
    })
}

/// The Racah-type equation coefficient `σ(s) = (s−a)(s+b)(s+a−β)(b+α−s)` on `x(s) = s(s+1)`.
fn racah_sigma<S: Scalar>(pr: &[(String, S)], s: &S) -> S {
    let f = |k: &str| pr.iter().find(|(n, _)| n == k).map(|(_, v)| v.clone()).unwrap_or_else(S::zero);
    let (al, be, a, b) = (f("alpha"), f("beta"), f("a"), f("b"));
    (s.clone() - a.clone()) * (s.clone() + b.clone()) * (s.clone() + a - be) * (b + al - s.clone())
}

fn racah<S: Scalar>(pr: &Params) -> Result<FamilySpec<S>> {
    let a = integer(&param_or(pr, "a", (1, 1)), "a")?;
    let b = integer(&param_or(pr, "b", (14, 1)), "b")?;
    require(a >= 1, "racah needs a >= 1 (keeps the lattice vertex outside the support)")?;
    require(b >= a + 2, "racah needs b >= a + 2")?;
    let nm = named::<S>(pr);
    let lattice = Lattice::quadratic(S::one(), S::one(), S::zero())?;
    let sig = |s: Site| racah_sigma(&nm, &s.value::<S>());
    let num = |s: Site| racah_sigma(&nm, &(-(s.value::<S>()) - S::one()));
    let (sigma, tau) = split_sigma_tau(&lattice, a, sig, num)?;
    Ok(FamilySpec {
        name: "racah".into(),
        lattice,
        sigma,
        tau,
        a,
        b: Some(b),
        params: nm,
        normalization: Normalization { sign: -1, base: S::one(), factorial: true },
        weight: WeightModel::Grid(GridWeight::Pearson { anchor: S::one() }),
    })
}

/// `q^e` computed as `r^{2e}` when `2e` is an integer.
fn qpow<S: Scalar>(r: &S, e: &S) -> Option<S> {
    let two_e = S::from_i64(2) * e.clone();
    let t = two_e.to_f64();
    if t == t.trunc() && S::from_i64(t as i64) == two_e {
        Some(r.powi(t as i64))
    } else {
        r.powf(&two_e)
    }
}

struct QHahnData<S> {
    r: S,
    q: S,
    qa: S,
    qn1: S,
    c: S,
    b1: S,
}

fn qhahn_data<S: Scalar>(pr: &[(String, S)]) -> Option<QHahnData<S>> {
    let f = |k: &str| pr.iter().find(|(n, _)| n == k).map(|(_, v)| v.clone());
    let (al, be, n, q) = (f("alpha")?, f("beta")?, f("N")?, f("q")?);
    let r = q.sqrt()?;
    let qa = qpow(&r, &(n.clone() + al.clone()))?;
    let qn1 = qpow(&r, &(n - S::one()))?;
    let b1 = (be + S::one()) * (q.clone() - S::one());
    let c = qpow(&r, &(al + S::one()))? / (S::one() - b1.clone());
    Some(QHahnData { r, q, qa, qn1, c, b1 })
}

fn qhahn<S: Scalar>(pr: &Params) -> Result<FamilySpec<S>> {
    let (al, be) = (param_or(pr, "alpha", (0, 1)), param_or(pr, "beta", (0, 1)));
    let n = integer(&param_or(pr, "N", (8, 1)), "N")?;
    let qr = param_or(pr, "q", (1, 4));
    require(al > Rational::from_i64(-1) && be > Rational::from_i64(-1), "qhahn needs alpha, beta > -1")?;
    require(n >= 1, "qhahn needs N >= 1")?;
    require(qr > Rational::from_i64(0) && qr != Rational::from_i64(1), "qhahn needs q > 0, q != 1")?;
    let nm = named::<S>(pr);
    let d = qhahn_data(&nm).ok_or_else(|| {
        Error::FieldUnsupported("q-Hahn powers of q (choose q a perfect square and 2α integral, or use the float field)".into())
    })?;
    if (S::one() - d.b1.clone()).is_zero() {
        return Err(Error::ParameterOutOfRange("qhahn: 1 - (beta+1)(q-1) must not vanish".into()));
    }
    let inv = S::one() / (d.q.clone() - S::one());
    let lattice = Lattice::q_exponential_root(inv.clone(), S::zero(), -inv, d.r.clone())?;
    let z = |s: Site| d.r.powi(s.twice());
    let qm1sq = (d.q.clone() - S::one()) * (d.q.clone() - S::one());
    let sig = |s: Site| (z(s) - S::one()) * (d.qa.clone() - z(s)) / qm1sq.clone();
    let num = |s: Site| {
        d.c.clone() * (d.qn1.clone() - z(s)) * (z(s) - S::one() + d.b1.clone()) / qm1sq.clone()
    };
    let (sigma, tau) = split_sigma_tau(&lattice, 0, sig, num)?;
    Ok(FamilySpec {
        name: "qhahn".into(),
        lattice,
        sigma,
        tau,
        a: 0,
        b: Some(n),
        params: nm,
        normalization: Normalization { sign: -1, base: S::one(), factorial: true },
        weight: WeightModel::Grid(GridWeight::Pearson { anchor: S::one() }),
    })
}

/// Recovers `σ̃(x)` (degree ≤ 2) and `τ(x)` (degree ≤ 1) on a non-uniform lattice from the
/// equation coefficient `σ(s)` and the Pearson numerator `σ(s) + τ(s)Δx(s−½)`, both given as
/// functions of `s`: `σ̃ = (σ + num)/2`, `τ = (num − σ)/Δx(s−½)`.
pub fn split_sigma_tau<S: Scalar>(
    lat: &Lattice<S>,
    start: i64,
    sigma: impl Fn(Site) -> S,
    numerator: impl Fn(Site) -> S,
) -> Result<(Poly<S>, Poly<S>)> {
    let sites: Vec<Site> = (0..8).map(|i| Site::int(start + i)).collect();
    let xs: Vec<S> = sites.iter().map(|s| lat.x(*s)).collect();
    let st: Vec<S> = sites.iter().map(|s| (sigma(*s) + numerator(*s)) / S::from_i64(2)).collect();
    let tt: Vec<S> = sites
        .iter()
        .map(|s| (numerator(*s) - sigma(*s)) / lat.delta_mean_x(*s))
        .collect();
    let sig_t = poly::interpolate(&xs[..3], &st[..3]).ok_or_else(|| Error::Singular("σ̃ fit".into()))?;
    let tau = poly::interpolate(&xs[..2], &tt[..2]).ok_or_else(|| Error::Singular("τ fit".into()))?;
    for (i, x) in xs.iter().enumerate() {
        let ds = sig_t.eval(x) - st[i].clone();
        let dt = tau.eval(x) - tt[i].clone();
        let scale = S::max_abs(st[i].clone(), S::one()) + S::max_abs(tt[i].clone(), S::one());
        let cond = lat.cancellation(sites[i]);
        let tol = S::epsilon() * S::from_i64(1 << 20) * scale * cond.clone() * cond;
        if ds.abs() > tol || dt.abs() > tol {
            return Err(Error::PearsonFailure(
                "σ(s) and the Pearson numerator are not of the form σ̃(x) ∓ ½τ(x)Δx(s−½) with deg σ̃ ≤ 2, deg τ ≤ 1".into(),
            ));
        }
    }
    Ok((sig_t, tau))
}

fn ratio_charlier<S: Scalar>(pr: &[(String, S)], _: &Lattice<S>, s: Site) -> Option<S> {
    let mu = pr.iter().find(|(k, _)| k == "mu")?.1.clone();
    Some(mu / (s.value::<S>() + S::one()))
}

fn ratio_meixner<S: Scalar>(pr: &[(String, S)], _: &Lattice<S>, s: Site) -> Option<S> {
    let f = |k: &str| pr.iter().find(|(n, _)| n == k).map(|(_, v)| v.clone());
    let x: S = s.value();
    Some(f("mu")? * (x.clone() + f("gamma")?) / (x + S::one()))
}

fn ratio_kravchuk<S: Scalar>(pr: &[(String, S)], _: &Lattice<S>, s: Site) -> Option<S> {
    let f = |k: &str| pr.iter().find(|(n, _)| n == k).map(|(_, v)| v.clone());
    let (pp, n) = (f("p")?, f("N")?);
    let x: S = s.value();
    Some((n - x.clone()) * pp.clone() / ((x + S::one()) * (S::one() - pp)))
}

fn ratio_hahn<S: Scalar>(pr: &[(String, S)], _: &Lattice<S>, s: Site) -> Option<S> {
    let f = |k: &str| pr.iter().find(|(n, _)| n == k).map(|(_, v)| v.clone());
    let (al, be, n) = (f("alpha")?, f("beta")?, f("N")?);
    let x: S = s.value();
    Some(
        (be + x.clone() + S::one()) * (n.clone() - x.clone() - S::one())
            / ((x.clone() + S::one()) * (n + al - x - S::one())),
    )
}

fn ratio_racah<S: Scalar>(pr: &[(String, S)], _: &Lattice<S>, s: Site) -> Option<S> {
    let v: S = s.value();
    let den = racah_sigma(pr, &(v.clone() + S::one()));
    Some(racah_sigma(pr, &(-v - S::one())) / den)
}

fn ratio_qhahn<S: Scalar>(pr: &[(String, S)], _: &Lattice<S>, s: Site) -> Option<S> {
    let d = qhahn_data(pr)?;
    let z = d.r.powi(s.twice());
    let z1 = z.clone() * d.q.clone();
    Some(
        d.c.clone() * (d.qn1.clone() - z.clone()) * (z - S::one() + d.b1.clone())
            / ((z1.clone() - S::one()) * (d.qa.clone() - z1)),
    )
}

fn closed_ratio<S: Scalar>(name: &str) -> Option<RatioFn<S>> {
    match name {
        "charlier" => Some(ratio_charlier),
        "meixner" => Some(ratio_meixner),
        "kravchuk" => Some(ratio_kravchuk),
        "hahn" => Some(ratio_hahn),
        "racah" => Some(ratio_racah),
        "qhahn" => Some(ratio_qhahn),
        _ => None,
    }
}

/// Re-runs the construction checks on an existing family, including the comparison with the
/// closed-form weight ratio when the family is a shipped one.
pub fn check_invariants<S: Scalar>(fam: &FamilySpec<S>) -> Result<()> {
    validate(fam, closed_ratio(&fam.name))
}

/// Construction-time checks: coefficient degrees, the Pearson relation, positivity of the
/// weight on the support and its vanishing at finite ends.
pub fn validate<S: Scalar>(fam: &FamilySpec<S>, ratio: Option<RatioFn<S>>) -> Result<()> {
    let tol = |scale: S| S::epsilon() * S::from_i64(1 << 40) * S::max_abs(scale, S::one());
    if fam.sigma.degree() > 2 || fam.tau.degree() > 1 {
        return Err(Error::PearsonFailure("need deg σ ≤ 2 and deg τ ≤ 1".into()));
    }
    if fam.tau_p().is_zero() {
        return Err(Error::PearsonFailure("τ' must not vanish".into()));
    }
    match &fam.weight {
        WeightModel::Density(d) => {
            // σ(ln ρ)' = τ − σ' at sample points.
            for x in d.sample_points(7) {
                let lhs = fam.sigma.eval(&x) * d.log_derivative(&x);
                let rhs = fam.tau.eval(&x) - fam.sigma.derivative().eval(&x);
                if (lhs.clone() - rhs.clone()).abs() > tol(rhs.clone()) {
                    return Err(Error::PearsonFailure(format!(
                        "{}: (σρ)' ≠ τρ at x = {}",
                        fam.name,
                        x.render()
                    )));
                }
            }
        }
        WeightModel::Grid(_) => {
            let len = match fam.b {
                Some(b) => (b - fam.a) as usize,
                None => 24,
            };
            if fam.lattice.kind == LatticeKind::Quadratic {
                for s in fam.a..fam.a + len as i64 + 1 {
                    for k in -1..4 {
                        if fam.lattice.dx_k(k, Site::int(s)).is_zero()
                            || fam.lattice.nabla_x_k(k, Site::int(s)).is_zero()
                        {
                            return Err(Error::ParameterOutOfRange(format!(
                                "{}: lattice step vanishes near the support (s = {s})",
                                fam.name
                            )));
                        }
                    }
                }
            }
            let sa = Site::int(fam.a);
            if fam.sigma_at(sa).abs() > tol(fam.coefficient_scale(sa)) {
                return Err(Error::PearsonFailure(format!("{}: σ(a) must vanish at the support start", fam.name)));
            }
            if let Some(b) = fam.b {
                let sb = Site::int(b - 1);
                if fam.pearson_numerator(sb).abs() > tol(fam.coefficient_scale(sb)) {
                    return Err(Error::PearsonFailure(format!(
                        "{}: σ(b)ρ(b) must vanish at the support end",
                        fam.name
                    )));
                }
            }
            let table = fam.weight_table(len)?;
            for (i, w) in table.values.iter().enumerate() {
                if *w <= S::zero() {
                    return Err(Error::PearsonFailure(format!(
                        "{}: weight not positive at s = {}",
                        fam.name,
                        fam.a + i as i64
                    )));
                }
            }
            if let Some(f) = ratio {
                for i in 0..len as i64 - 1 {
                    let s = Site::int(fam.a + i);
                    let expect = f(&fam.params, &fam.lattice, s)
                        .ok_or_else(|| Error::FieldUnsupported("closed-form weight ratio".into()))?;
                    let got = table.values[i as usize + 1].clone() / table.values[i as usize].clone();
                    let cancel = fam.coefficient_scale(s) / fam.pearson_numerator(s).abs()
                        + fam.coefficient_scale(s.steps(1)) / fam.sigma_at(s.steps(1)).abs();
                    if (got - expect.clone()).abs() > tol(expect.abs() * cancel) {
                        return Err(Error::PearsonFailure(format!(
                            "{}: σ, τ disagree with the closed-form weight at s = {s}",
                            fam.name
                        )));
                    }
                }
            }
        }
    }
    Ok(())
}

/// A user-described family on a grid: `σ` (or `σ̃`) and `τ` coefficients, support and
/// normalization. The weight follows from the Pearson recursion with `ρ(a) = 1`.
pub fn custom_grid<S: Scalar>(
    name: &str,
    lattice: Lattice<S>,
    sigma: Vec<S>,
    tau: Vec<S>,
    a: i64,
    b: Option<i64>,
    normalization: Normalization<S>,
    params: Vec<(String, S)>,
) -> Result<FamilySpec<S>> {
    if lattice.kind == LatticeKind::Continuous {
        return Err(Error::ParameterOutOfRange("custom families live on a grid lattice".into()));
    }
    let fam = FamilySpec {
        name: name.to_string(),
        lattice,
        sigma: Poly::new(sigma),
        tau: Poly::new(tau),
        a,
        b,
        params,
        normalization,
        weight: WeightModel::Grid(GridWeight::Pearson { anchor: S::one() }),
    };
    validate(&fam, None)?;
    Ok(fam)
}

/// Field-independent description of a user-registered grid family.
#[derive(Clone, Debug, PartialEq)]
pub struct CustomDef {
    pub name: String,
    pub kind: LatticeKind,
    /// Lattice coefficients `c1, c2, c3` (ignored on the linear lattice).
    pub coeffs: [Rational; 3],
    /// `q` of a q-exponential lattice.
    pub q: Option<Rational>,
    /// `σ̃` (or `σ` on the linear lattice), ascending powers of `x`.
    pub sigma: Vec<Rational>,
    pub tau: Vec<Rational>,
    pub a: i64,
    pub b: Option<i64>,
    pub sign: i64,
    pub base: Rational,
    pub factorial: bool,
}

impl CustomDef {
    pub fn build<S: Scalar>(&self) -> Result<FamilySpec<S>> {
        let c: Vec<S> = self.coeffs.iter().map(conv).collect();
        let lattice = match self.kind {
            LatticeKind::Linear => Lattice::linear(),
            LatticeKind::Quadratic => Lattice::quadratic(c[0].clone(), c[1].clone(), c[2].clone())?,
            LatticeKind::QExponential => {
                let q = self
                    .q
                    .as_ref()
                    .ok_or_else(|| Error::ParameterOutOfRange("q-exponential lattice needs q".into()))?;
                Lattice::q_exponential(c[0].clone(), c[1].clone(), c[2].clone(), conv(q))?
            }
            LatticeKind::Continuous => {
                return Err(Error::ParameterOutOfRange("custom families live on a grid lattice".into()))
            }
        };
        custom_grid(
            &self.name,
            lattice,
            self.sigma.iter().map(conv).collect(),
            self.tau.iter().map(conv).collect(),
            self.a,
            self.b,
            Normalization { sign: self.sign, base: conv(&self.base), factorial: self.factorial },
            vec![],
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Real;

    fn q(p: i64, d: i64) -> Rational {
        Rational::from_frac(p, d)
    }

    #[test]
    fn all_shipped_families_construct_in_both_fields() {
        for name in SHIPPED {
            let r = catalog_get::<Rational>(name, &vec![]);
            assert!(r.is_ok(), "{name}: {:?}", r.err());
            let f = catalog_get::<Real>(name, &vec![]);
            assert!(f.is_ok(), "{name}: {:?}", f.err());
        }
    }

    #[test]
    fn catalog_errors() {
        assert!(matches!(catalog_get::<Rational>("legendre", &vec![]), Err(Error::UnknownFamily(_))));
        let bad = vec![("p".to_string(), q(3, 2))];
        assert!(matches!(catalog_get::<Rational>("kravchuk", &bad), Err(Error::ParameterOutOfRange(_))));
        let bad = vec![("zeta".to_string(), q(1, 2))];
        assert!(catalog_get::<Rational>("charlier", &bad).is_err());
        let bad = vec![("q".to_string(), q(1, 3))];
        assert!(matches!(catalog_get::<Rational>("qhahn", &bad), Err(Error::FieldUnsupported(_))));
        let r = catalog_get::<Real>("qhahn", &bad);
        assert!(r.is_ok(), "{:?}", r.err());
    }

    #[test]
    fn charlier_weight_tower() {
        let one = vec![("mu".to_string(), q(1, 1))];
        let f = catalog_get::<Real>("charlier", &one).unwrap();
        let t = f.weight_table(10).unwrap();
        let e1 = Real::from_i64(-1).exp().unwrap();
        let got = t.rho_m(&f, 1, 0).unwrap();
        assert!((got - e1.clone()).abs() < Real::epsilon() * Real::from_i64(4));
        assert_eq!(t.rho_m(&f, 0, 3).unwrap(), t.rho(3).unwrap());
        let fr = catalog_get::<Rational>("charlier", &one).unwrap();
        let tr = fr.weight_table(6).unwrap();
        assert_eq!(tr.rho(3).unwrap(), q(1, 6));
    }

    #[test]
    fn hermite_and_charlier_data() {
        let h = catalog_get::<Rational>("hermite", &vec![]).unwrap();
        assert_eq!(h.sigma, Poly::constant(q(1, 1)));
        assert_eq!(h.tau_p(), q(-2, 1));
        let c = catalog_get::<Rational>("charlier", &vec![("mu".into(), q(1, 1))]).unwrap();
        assert_eq!(c.sigma_at(Site::int(4)), q(4, 1));
        assert_eq!(c.tau_at(Site::int(0)), q(1, 1));
    }

    #[test]
    fn finite_support_ends() {
        for name in ["kravchuk", "hahn", "racah", "qhahn"] {
            let f = catalog_get::<Rational>(name, &vec![]).unwrap();
            let b = f.b.unwrap();
            assert!(f.sigma_at(Site::int(f.a)).is_zero(), "{name}");
            assert!(f.pearson_numerator(Site::int(b - 1)).is_zero(), "{name}");
        }
    }

    #[test]
    fn corrupted_tau_is_caught() {
        let mut f = catalog_get::<Rational>("meixner", &vec![]).unwrap();
        f.tau.coeffs[0] = f.tau.coeffs[0].clone() + q(1, 1_000_000);
        assert!(validate(&f, Some(ratio_meixner)).is_err());
    }

    #[test]
    fn gamma_values() {
        let g = gamma(&Real::from_frac(1, 2)).unwrap();
        let sp = Real::pi().unwrap().sqrt().unwrap();
        assert!(((g - sp.clone()) / sp).abs().to_f64() < 1e-32);
        let g5 = gamma(&Real::from_i64(5)).unwrap();
        assert!((g5 - Real::from_i64(24)).abs().to_f64() < 1e-28);
        assert_eq!(gamma(&q(5, 1)), Some(q(24, 1)));
    }

    #[test]
    fn custom_family_matches_kravchuk() {
        let k = catalog_get::<Rational>("kravchuk", &vec![("N".into(), q(6, 1))]).unwrap();
        let c = custom_grid(
            "mine",
            Lattice::linear(),
            k.sigma.coeffs.clone(),
            k.tau.coeffs.clone(),
            0,
            Some(7),
            Normalization::unit(),
            vec![],
        )
        .unwrap();
        let (tk, tc) = (k.weight_table(7).unwrap(), c.weight_table(7).unwrap());
        let ratio = tk.values[0].clone() / tc.values[0].clone();
        for i in 0..7 {
            assert_eq!(tk.values[i].clone(), tc.values[i].clone() * ratio.clone());
        }
    }
}
