//! Pointwise evaluation of `v_{mn}`, `Ω_{mn}` and the ladder operators for the `eval`, `table`
//! and `ladder` commands.

use ladderlattice_core::family::FamilySpec;
use ladderlattice_core::family::Interval;
use ladderlattice_core::ladder::{recurrence, triple, Ladder};
use ladderlattice_core::lattice::Site;
use ladderlattice_core::orthonormal::norm;
use ladderlattice_core::rodrigues::{shifted_poly, ShiftedPoly};
use ladderlattice_core::{Error, Rational, Real, Result, Scalar};

/// A sample point: a grid site `s` (integer or half-integer) or an abscissa `x` on the
/// continuous class.
pub type Point = Rational;

/// Checks `0 ≤ m ≤ n` and that the family admits degree `n`.
pub fn check_indices<S: Scalar>(fam: &FamilySpec<S>, m: i64, n: i64) -> Result<()> {
    if m < 0 || n < 0 {
        return Err(Error::ParameterOutOfRange("n and m must be non-negative".into()));
    }
    if m > n {
        return Err(Error::ParameterOutOfRange(format!("m = {m} exceeds n = {n}")));
    }
    fam.check_degree(n)
}

pub fn site_of(p: &Point) -> Result<Site> {
    let twice = p * Rational::from_integer(2.into());
    if !twice.is_integer() {
        return Err(Error::ParameterOutOfRange(format!("grid sites are integers or half-integers, not {p}")));
    }
    let t: i64 = twice
        .to_integer()
        .try_into()
        .map_err(|_| Error::ParameterOutOfRange(format!("site {p} is too large")))?;
    Ok(Site::from_twice(t))
}

/// `x(s)` at a point (the point itself on the continuous class).
pub fn abscissa<S: Scalar>(fam: &FamilySpec<S>, p: &Point) -> Result<S> {
    if fam.is_continuous() {
        return Ok(S::from_rational(p));
    }
    Ok(fam.lattice.x(site_of(p)?))
}

fn value_at<S: Scalar>(fam: &FamilySpec<S>, v: &ShiftedPoly<S>, p: &Point) -> Result<S> {
    if fam.is_continuous() {
        return Ok(v.poly.eval(&S::from_rational(p)));
    }
    Ok(v.at(&fam.lattice, site_of(p)?))
}

/// `v_{mn}` at the points.
pub fn values<S: Scalar>(fam: &FamilySpec<S>, m: i64, n: i64, points: &[Point]) -> Result<Vec<S>> {
    check_indices(fam, m, n)?;
    let v = shifted_poly(fam, m, n)?;
    points.iter().map(|p| value_at(fam, &v, p)).collect()
}

/// `Ω_{mn} = √ρ_m v_{mn} / d_{mn}` at the points; zero off the support of `ρ_m`.
pub fn omegas(fam: &FamilySpec<Real>, m: i64, n: i64, points: &[Point]) -> Result<Vec<Real>> {
    check_indices(fam, m, n)?;
    let v = shifted_poly(fam, m, n)?;
    let d = norm(fam, m, n)?;
    let root = |w: Real| -> Result<Real> {
        if w.is_negative() {
            return Err(Error::FieldUnsupported("negative weight".into()));
        }
        w.sqrt().ok_or_else(|| Error::FieldUnsupported("square root of the weight".into()))
    };
    if let Some(dens) = fam.density() {
        let (lo, hi) = match dens.interval() {
            Interval::Line => (None, None),
            Interval::HalfLine => (Some(Real::zero()), None),
            Interval::Symmetric => (Some(-Real::one()), Some(Real::one())),
        };
        return points
            .iter()
            .map(|p| {
                let x = Real::from_rational(p);
                let inside = lo.as_ref().is_none_or(|l| x > *l) && hi.as_ref().is_none_or(|h| x < *h);
                if !inside {
                    return Ok(Real::zero());
                }
                let w = dens.eval(&x, None, None).unwrap_or_else(Real::zero) * fam.sigma.eval(&x).powi(m);
                Ok(root(w)? * v.poly.eval(&x) / d.clone())
            })
            .collect();
    }
    let sites = points.iter().map(site_of).collect::<Result<Vec<_>>>()?;
    let top = sites.iter().filter(|s| s.is_integer()).map(|s| s.as_int()).max().unwrap_or(fam.a);
    let len = (top - fam.a + m + 2).max(1) as usize;
    let table = fam.weight_table(len)?;
    sites
        .iter()
        .map(|&s| {
            if !s.is_integer() {
                return Ok(Real::zero());
            }
            match table.rho_m(fam, m, s.as_int()) {
                Some(w) => Ok(root(w)? * v.at(&fam.lattice, s) / d.clone()),
                None => Ok(Real::zero()),
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct LadderRow<S> {
    pub point: Point,
    pub x: S,
    /// `v_{mn}`.
    pub before: S,
    /// The ladder applied to `v_{mn}`.
    pub after: S,
    /// The stated multiple of `v_{m,n±1}`.
    pub target: S,
}

/// Applies the raising (or lowering) operator of level `m` to `v_{mn}` at the points.
pub fn ladder_rows<S: Scalar>(
    fam: &FamilySpec<S>,
    m: i64,
    n: i64,
    raise: bool,
    points: &[Point],
) -> Result<Vec<LadderRow<S>>> {
    check_indices(fam, m, n)?;
    if !raise && n == m {
        return Err(Error::NotAdmissible(format!("lowering needs n > m (n = m = {n})")));
    }
    let t = triple(fam, m, n)?;
    let r = recurrence(fam, m, n)?;
    let lad = Ladder::new(fam, m, n, r.beta.clone())?;
    let (c, target) = if raise {
        (r.alpha * lad.k.clone(), t.upper.clone())
    } else {
        (r.gamma * lad.k.clone(), t.lower.clone().expect("n > m has a lower neighbour"))
    };
    let lat = &fam.lattice;
    let moved = fam.is_continuous().then(|| {
        if raise {
            lad.raise_poly(fam, &t.mid.poly)
        } else {
            lad.lower_poly(fam, &t.mid.poly)
        }
    });
    points
        .iter()
        .map(|p| {
            let before = value_at(fam, &t.mid, p)?;
            let after = match &moved {
                Some(poly) => poly.eval(&S::from_rational(p)),
                None => {
                    let f = |s: Site| t.mid.at(lat, s);
                    let s = site_of(p)?;
                    if raise {
                        lad.raise_at(fam, &f, s)?
                    } else {
                        lad.lower_at(fam, &f, s)?
                    }
                }
            };
            Ok(LadderRow {
                point: p.clone(),
                x: abscissa(fam, p)?,
                before,
                after,
                target: c.clone() * value_at(fam, &target, p)?,
            })
        })
        .collect()
}

/// Default sample points: twenty sites from the start of the support of `ρ_m` (fewer on a
/// short support), or a spread of abscissae inside the orthogonality interval.
pub fn default_points<S: Scalar>(fam: &FamilySpec<S>, m: i64) -> Vec<Point> {
    let q = |p: i64, d: i64| Rational::new(p.into(), d.into());
    if let Some(dens) = fam.density() {
        return match dens.interval() {
            Interval::Symmetric => (-9..=9).map(|i| q(i, 10)).collect(),
            Interval::HalfLine => (1..=20).map(|i| q(i, 4)).collect(),
            Interval::Line => (-12..=12).map(|i| q(i, 4)).collect(),
        };
    }
    let end = fam.b.map_or(fam.a + 20, |b| (b - m).min(fam.a + 20));
    (fam.a..end.max(fam.a + 1)).map(|s| q(s, 1)).collect()
}

/// Points `from, from + step, …` up to `to` inclusive.
pub fn range_points(from: &Rational, to: &Rational, step: &Rational) -> Result<Vec<Point>> {
    if *step <= Rational::from_integer(0.into()) {
        return Err(Error::ParameterOutOfRange("step must be positive".into()));
    }
    let mut out = Vec::new();
    let mut p = from.clone();
    while p <= *to {
        if out.len() >= 100_000 {
            return Err(Error::ParameterOutOfRange("range holds more than 100000 points".into()));
        }
        out.push(p.clone());
        p += step;
    }
    Ok(out)
}
