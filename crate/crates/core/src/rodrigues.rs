//! Rodrigues construction of `y_n` and of the difference derivatives `v_{mn}`.
//!
//! On a grid,
//! `v_{mn}(s) = A_{mn} B_n / ρ_m(s) · ∇/∇x_{m+1}(s) ∘ … ∘ ∇/∇x_n(s) [ρ_n(s)]`,
//! with the weight (and every intermediate difference) taken to vanish below the support start.
//! For continuous families `v_{mn} = A_{mn} B_n q_{n−m}`, where `q_0 = 1` and
//! `q_{j+1} = ((n−j−1)σ' + τ) q_j + σ q_j'`.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::family::FamilySpec;
use crate::lattice::{GridFunction, Lattice, Site};
use crate::poly::{self, Poly};
use crate::scalar::Scalar;
use crate::spectral::lambda_over_bracket;

/// `B_n`.
pub fn b_n<S: Scalar>(fam: &FamilySpec<S>, n: i64) -> S {
    fam.normalization.b(&fam.lattice, n)
}

/// `A_{mn} = [n]!/[n−m]! · ∏_{k<m} (−λ_{n+k}/[n+k])`.
pub fn a_mn<S: Scalar>(fam: &FamilySpec<S>, m: i64, n: i64) -> S {
    let lat = &fam.lattice;
    let mut acc = S::one();
    for j in n - m + 1..=n {
        acc = acc * lat.bracket(j);
    }
    for k in 0..m {
        acc = acc * -lambda_over_bracket(fam, n + k);
    }
    acc
}

/// Closed leading coefficient of `y_n` in `x(s)`: `a_n = B_n ∏_{k<n} (−λ_{n+k}/[n+k])`.
pub fn leading_closed<S: Scalar>(fam: &FamilySpec<S>, n: i64) -> S {
    let mut acc = b_n(fam, n);
    for k in 0..n {
        acc = acc * -lambda_over_bracket(fam, n + k);
    }
    acc
}

/// Closed leading coefficient of `v_{mn}` in `x_m(s)`: `a_n [n][n−1]…[n−m+1]`.
pub fn leading_closed_mn<S: Scalar>(fam: &FamilySpec<S>, m: i64, n: i64) -> S {
    let mut acc = leading_closed(fam, n);
    for j in n - m + 1..=n {
        acc = acc * fam.lattice.bracket(j);
    }
    acc
}

fn check_indices<S: Scalar>(fam: &FamilySpec<S>, m: i64, n: i64) -> Result<()> {
    fam.check_degree(n)?;
    if m < 0 || m > n {
        return Err(Error::NotAdmissible(format!("need 0 ≤ m ≤ n, got m = {m}, n = {n}")));
    }
    Ok(())
}

fn require_grid<S: Scalar>(fam: &FamilySpec<S>) -> Result<()> {
    if fam.is_continuous() {
        return Err(Error::NotAdmissible(format!("{} is a continuous family", fam.name)));
    }
    Ok(())
}

/// `v_{mn}(s)` from the Rodrigues formula at the integer sites `start, …, start+count−1`.
/// All sites must lie in the support `[a, b−m)` of `ρ_m`.
pub fn rodrigues_grid<S: Scalar>(
    fam: &FamilySpec<S>,
    m: i64,
    n: i64,
    start: i64,
    count: usize,
) -> Result<GridFunction<S>> {
    require_grid(fam)?;
    check_indices(fam, m, n)?;
    let last = start + count as i64 - 1;
    if start < fam.a || fam.b.is_some_and(|b| last >= b - m) {
        return Err(Error::OutOfSupport(format!(
            "Rodrigues sites [{start}, {last}] leave the support of ρ_{m}"
        )));
    }
    let lat = &fam.lattice;
    let table = fam.weight_table((last + n - fam.a + 1).max(1) as usize)?;
    let rho_m = |fam: &FamilySpec<S>, k: i64, u: i64| -> S {
        if u < fam.a {
            S::zero()
        } else {
            table.rho_m(fam, k, u).unwrap_or_else(S::zero)
        }
    };
    let lo = start - (n - m);
    let mut vals: Vec<S> = (lo..=last).map(|u| rho_m(fam, n, u)).collect();
    let mut first = lo;
    for k in (m + 1..=n).rev() {
        let mut next = Vec::with_capacity(vals.len() - 1);
        for (i, w) in vals.windows(2).enumerate() {
            let u = first + 1 + i as i64;
            if u < fam.a {
                next.push(S::zero());
                continue;
            }
            let den = lat.nabla_x_k(k, Site::int(u));
            if den.is_zero() {
                return Err(Error::DegenerateSite { site2: 2 * u, k });
            }
            next.push((w[1].clone() - w[0].clone()) / den);
        }
        vals = next;
        first += 1;
    }
    let scale = a_mn(fam, m, n) * b_n(fam, n);
    let mut out = Vec::with_capacity(count);
    for (i, v) in vals.into_iter().enumerate() {
        let u = start + i as i64;
        let r = rho_m(fam, m, u);
        if r.is_zero() {
            return Err(Error::OutOfSupport(format!("ρ_{m}({u}) vanishes")));
        }
        out.push(scale.clone() * v / r);
    }
    Ok(GridFunction::new(Site::int(start), out, m))
}

/// `v_{mn}(x)` for a continuous family, as a polynomial in `x`.
pub fn rodrigues_continuous<S: Scalar>(fam: &FamilySpec<S>, m: i64, n: i64) -> Result<Poly<S>> {
    check_indices(fam, m, n)?;
    if !fam.is_continuous() {
        return Err(Error::NotAdmissible(format!("{} is a grid family", fam.name)));
    }
    let sp = fam.sigma.derivative();
    let mut q = Poly::constant(S::one());
    for j in 0..n - m {
        let lin = sp.scale(&S::from_i64(n - j - 1)).add(&fam.tau);
        q = lin.mul(&q).add(&fam.sigma.mul(&q.derivative()));
    }
    Ok(q.scale(&(a_mn(fam, m, n) * b_n(fam, n))))
}

/// `v_{mn}` obtained by differencing `y_n`: `Δ/Δx_{m−1} ∘ … ∘ Δ/Δx_0 [y_n]`, on the sites
/// `start, …, start+count−1`. On continuous families this is `d^m y_n/dx^m` sampled at `x = s`.
pub fn difference_path<S: Scalar>(
    fam: &FamilySpec<S>,
    m: i64,
    n: i64,
    start: i64,
    count: usize,
) -> Result<GridFunction<S>> {
    check_indices(fam, m, n)?;
    if fam.is_continuous() {
        let mut p = rodrigues_continuous(fam, 0, n)?;
        for _ in 0..m {
            p = p.derivative();
        }
        return Ok(GridFunction::sample(Site::int(start), count, m, |s| p.eval(&s.value())));
    }
    let lat = &fam.lattice;
    let mut f = rodrigues_grid(fam, 0, n, start, count + m as usize)?;
    for k in 0..m {
        let vals: Vec<S> = f
            .values
            .windows(2)
            .enumerate()
            .map(|(i, w)| {
                let s = Site::int(start + i as i64);
                let den = lat.dx_k(k, s);
                if den.is_zero() {
                    Err(Error::DegenerateSite { site2: s.twice(), k })
                } else {
                    Ok((w[1].clone() - w[0].clone()) / den)
                }
            })
            .collect::<Result<_>>()?;
        f = GridFunction::new(Site::int(start), vals, k + 1);
    }
    Ok(f)
}

/// `v_{mn}` as a polynomial of degree `n−m` in `x_m(s)` (in `x` for continuous families).
#[derive(Clone, Debug, PartialEq)]
pub struct ShiftedPoly<S> {
    pub m: i64,
    pub n: i64,
    pub poly: Poly<S>,
}

impl<S: Scalar> ShiftedPoly<S> {
    /// Value at a lattice site.
    pub fn at(&self, lat: &Lattice<S>, s: Site) -> S {
        self.poly.eval(&lat.x_k(self.m, s))
    }

    /// Coefficient of `x_m^{n−m}`.
    pub fn leading(&self) -> S {
        self.poly.coeff((self.n - self.m) as usize)
    }

    /// Coefficient of `x_m^{n−m−1}` (zero when `n = m`).
    pub fn subleading(&self) -> S {
        if self.n == self.m {
            S::zero()
        } else {
            self.poly.coeff((self.n - self.m - 1) as usize)
        }
    }
}

/// Builds `v_{mn}` from the Rodrigues formula and expresses it in powers of `x_m(s)`, fitted
/// through the first `n−m+1` support sites.
pub fn shifted_poly<S: Scalar>(fam: &FamilySpec<S>, m: i64, n: i64) -> Result<ShiftedPoly<S>> {
    if fam.is_continuous() {
        return Ok(ShiftedPoly { m, n, poly: rodrigues_continuous(fam, m, n)? });
    }
    let count = (n - m + 1) as usize;
    let g = rodrigues_grid(fam, m, n, fam.a, count)?;
    let xs: Vec<S> = g.sites().map(|s| fam.lattice.x_k(m, s)).collect();
    let poly = poly::interpolate(&xs, &g.values)
        .ok_or_else(|| Error::Singular(format!("fit of v_{m}{n} in x_{m}")))?;
    Ok(ShiftedPoly { m, n, poly })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::{catalog_get, SHIPPED};
    use crate::scalar::{Rational, Real};
    use alloc::string::ToString;
    use alloc::vec;

    fn q(p: i64, d: i64) -> Rational {
        Rational::from_frac(p, d)
    }

    fn p(c: &[i64]) -> Poly<Rational> {
        Poly::new(c.iter().map(|&v| q(v, 1)).collect())
    }

    #[test]
    fn hermite_examples() {
        let h = catalog_get::<Rational>("hermite", &vec![]).unwrap();
        assert_eq!(rodrigues_continuous(&h, 0, 2).unwrap(), p(&[-2, 0, 4]));
        assert_eq!(rodrigues_continuous(&h, 0, 3).unwrap(), p(&[0, -12, 0, 8]));
        assert_eq!(rodrigues_continuous(&h, 1, 2).unwrap(), p(&[0, 8]));
        let sp = shifted_poly(&h, 0, 3).unwrap();
        assert_eq!((sp.leading(), sp.subleading()), (q(8, 1), q(0, 1)));
        assert_eq!(leading_closed(&h, 3), q(8, 1));
    }

    #[test]
    fn charlier_examples() {
        let c = catalog_get::<Rational>("charlier", &vec![("mu".to_string(), q(1, 1))]).unwrap();
        let y1 = rodrigues_grid(&c, 0, 1, 0, 5).unwrap();
        for (i, v) in y1.values.iter().enumerate() {
            assert_eq!(*v, q(1 - i as i64, 1));
        }
        let y2 = shifted_poly(&c, 0, 2).unwrap();
        assert_eq!(y2.poly, Poly::new(vec![q(1, 1), q(-3, 1), q(1, 1)]));
    }

    #[test]
    fn laguerre_and_jacobi_leading() {
        for name in ["laguerre", "jacobi"] {
            let f = catalog_get::<Rational>(name, &vec![]).unwrap();
            for n in 0..7 {
                for m in 0..=n {
                    let sp = shifted_poly(&f, m, n).unwrap();
                    assert_eq!(sp.poly.degree() as i64, n - m);
                    assert_eq!(sp.leading(), leading_closed_mn(&f, m, n), "{name} {m} {n}");
                }
            }
        }
    }

    #[test]
    fn two_paths_agree_exactly() {
        for name in SHIPPED {
            let f = catalog_get::<Rational>(name, &vec![]).unwrap();
            for n in 0..=6 {
                for m in 0..=n {
                    let count = 4usize;
                    let a = difference_path(&f, m, n, f.a, count).unwrap();
                    let b = if f.is_continuous() {
                        let r = rodrigues_continuous(&f, m, n).unwrap();
                        GridFunction::sample(Site::int(f.a), count, m, |s| r.eval(&s.value()))
                    } else {
                        rodrigues_grid(&f, m, n, f.a, count).unwrap()
                    };
                    assert_eq!(a.values, b.values, "{name} m={m} n={n}");
                }
            }
        }
    }

    #[test]
    fn fitted_polynomial_reproduces_rodrigues_and_closed_leading() {
        for name in SHIPPED {
            let f = catalog_get::<Rational>(name, &vec![]).unwrap();
            if f.is_continuous() {
                continue;
            }
            for n in 0..=7 {
                for m in 0..=n.min(3) {
                    let sp = shifted_poly(&f, m, n).unwrap();
                    assert_eq!(sp.leading(), leading_closed_mn(&f, m, n), "{name} {m} {n}");
                    let count = (f.n_limit().unwrap_or(40) - m + 1).min(12) as usize;
                    let g = rodrigues_grid(&f, m, n, f.a, count).unwrap();
                    for s in g.sites() {
                        assert_eq!(sp.at(&f.lattice, s), *g.at(s).unwrap(), "{name} {m} {n} {s}");
                    }
                }
            }
        }
    }

    #[test]
    fn float_leading_matches_closed() {
        let f = catalog_get::<Real>("qhahn", &vec![]).unwrap();
        for n in 0..=8 {
            let sp = shifted_poly(&f, 1.min(n), n).unwrap();
            let c = leading_closed_mn(&f, 1.min(n), n);
            let rel = ((sp.leading() - c.clone()) / c).abs().to_f64();
            assert!(rel < 1e-20, "n={n} rel={rel}");
        }
    }

    #[test]
    fn support_is_enforced() {
        let k = catalog_get::<Rational>("kravchuk", &vec![]).unwrap();
        assert!(matches!(rodrigues_grid(&k, 2, 3, 0, 14), Err(Error::OutOfSupport(_))));
        assert!(matches!(rodrigues_grid(&k, 0, 15, 0, 1), Err(Error::NotAdmissible(_))));
        let h = catalog_get::<Rational>("hermite", &vec![]).unwrap();
        assert!(rodrigues_grid(&h, 0, 1, 0, 2).is_err());
    }
}
