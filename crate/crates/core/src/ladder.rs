//! Three-term recurrence for `v_{mn}` in `x_m(s)` and the raising/lowering operators built from it.
//!
//! With `R(j) = λ_j/[j]`, `K_n = R(2n)` and `P_n(s) = R(n+m) τ_n(s)/τ'_n`:
//!
//! * raise: `P_n v − σ ∇v/∇x_m = α̃_n K_n v_{n+1}`
//! * lower: `(−P_n + K_n(x_m − β̃_n)) v + σ ∇v/∇x_m = γ̃_n K_n v_{n−1}`
//!
//! On continuous families `∇/∇x_m` becomes `d/dx`.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::family::FamilySpec;
use crate::lattice::{LatticeKind, Site};
use crate::poly::Poly;
use crate::rodrigues::{b_n, shifted_poly, ShiftedPoly};
use crate::scalar::Scalar;
use crate::spectral::{lambda_over_bracket, tau_k, tau_k_poly, tau_prime};

/// `R(j) = λ_j/[j]`.
pub fn r_of<S: Scalar>(fam: &FamilySpec<S>, j: i64) -> S {
    lambda_over_bracket(fam, j)
}

/// `K_n = λ_{2n}/[2n]`.
pub fn k_of<S: Scalar>(fam: &FamilySpec<S>, n: i64) -> S {
    lambda_over_bracket(fam, 2 * n)
}

/// `α̃_n = −(B_n/B_{n+1}) R(n) / (K_n R(2n+1)) · [n−m+1]/[n+1]`.
pub fn alpha_closed<S: Scalar>(fam: &FamilySpec<S>, m: i64, n: i64) -> S {
    let lat = &fam.lattice;
    -(b_n(fam, n) / b_n(fam, n + 1)) * r_of(fam, n) / (k_of(fam, n) * r_of(fam, 2 * n + 1))
        * lat.bracket(n - m + 1)
        / lat.bracket(n + 1)
}

/// The lattice-dependent constant subtracted in the closed `β̃` expression.
fn beta_shift<S: Scalar>(fam: &FamilySpec<S>, m: i64) -> S {
    match fam.kind() {
        LatticeKind::Continuous => S::zero(),
        LatticeKind::Linear => S::from_frac(m, 2),
        LatticeKind::Quadratic => S::from_i64(3) / S::from_i64(12).powi(m),
        LatticeKind::QExponential => S::zero(),
    }
}

/// Closed `β̃_n = (b_n/a_n)[n−m]/[n] − (b_{n+1}/a_{n+1})[n−m+1]/[n+1] − shift`, where `a_n`, `b_n`
/// are the two top coefficients of `y_n` in `x(s)` and `shift` is `m/2` on the linear lattice,
/// `3/12^m` on quadratic ones and `0` on q-lattices and continuous families.
pub fn beta_closed<S: Scalar>(fam: &FamilySpec<S>, m: i64, n: i64) -> Result<S> {
    let lat = &fam.lattice;
    let term = |k: i64| -> Result<S> {
        if k == 0 {
            return Ok(S::zero());
        }
        let y = shifted_poly(fam, 0, k)?;
        Ok(y.subleading() / y.leading() * lat.bracket(k - m) / lat.bracket(k))
    };
    Ok(term(n)? - term(n + 1)? - beta_shift(fam, m))
}

/// Recurrence `x_m v_n = α̃ v_{n+1} + β̃ v_n + γ̃ v_{n−1}` for one `(m, n)`.
#[derive(Clone, Debug)]
pub struct Recurrence<S> {
    pub m: i64,
    pub n: i64,
    /// From the fitted leading coefficients.
    pub alpha: S,
    pub alpha_closed: S,
    /// From the fitted top two coefficients (always satisfies the recurrence).
    pub beta: S,
    pub beta_closed: S,
    /// Residual of the recurrence when `β̃` is replaced by the closed expression.
    pub beta_closed_residual: S,
    /// From the top three coefficients (zero when `n = m`).
    pub gamma: S,
    /// Residual of the recurrence with the matched coefficients.
    pub residual: S,
    pub note: Option<&'static str>,
}

/// Polynomials `v_{m,n−1}`, `v_{mn}`, `v_{m,n+1}`.
pub struct Triple<S> {
    pub lower: Option<ShiftedPoly<S>>,
    pub mid: ShiftedPoly<S>,
    pub upper: ShiftedPoly<S>,
}

pub fn triple<S: Scalar>(fam: &FamilySpec<S>, m: i64, n: i64) -> Result<Triple<S>> {
    fam.check_degree(n + 1)?;
    let lower = if n > m { Some(shifted_poly(fam, m, n - 1)?) } else { None };
    Ok(Triple { lower, mid: shifted_poly(fam, m, n)?, upper: shifted_poly(fam, m, n + 1)? })
}

/// Residual polynomial `x v_n − α v_{n+1} − β v_n − γ v_{n−1}` in the variable `x_m`.
fn residual_poly<S: Scalar>(t: &Triple<S>, al: &S, be: &S, ga: &S) -> Poly<S> {
    let mut r = Poly::x().mul(&t.mid.poly).sub(&t.upper.poly.scale(al)).sub(&t.mid.poly.scale(be));
    if let Some(l) = &t.lower {
        r = r.sub(&l.poly.scale(ga));
    }
    r
}

/// Sampled maximum of the residual `x_m v_n − α v_{n+1} − β v_n − γ v_{n−1}`, relative to the
/// largest coefficient of `x_m v_n`.
pub fn recurrence_residual<S: Scalar>(fam: &FamilySpec<S>, t: &Triple<S>, al: &S, be: &S, ga: &S) -> S {
    let r = residual_poly(t, al, be, ga);
    let scale = S::max_abs(Poly::x().mul(&t.mid.poly).max_abs_coeff(), S::one());
    if fam.is_continuous() {
        return r.max_abs_coeff() / scale;
    }
    let top = fam.n_limit().map_or(fam.a + 12, |l| fam.a + l - t.mid.m + 1);
    let mut worst = S::zero();
    for s in fam.a..top.min(fam.a + 12) {
        worst = S::max_abs(worst, r.eval(&fam.lattice.x_k(t.mid.m, Site::int(s))));
    }
    worst / scale
}

pub fn recurrence<S: Scalar>(fam: &FamilySpec<S>, m: i64, n: i64) -> Result<Recurrence<S>> {
    let t = triple(fam, m, n)?;
    let k = (n - m) as usize;
    let (c, u) = (&t.mid.poly, &t.upper.poly);
    if c.coeff(k).is_zero() || u.coeff(k + 1).is_zero() {
        return Err(Error::Singular(format!("vanishing leading coefficient of v_{m}{n}")));
    }
    let alpha = c.coeff(k) / u.coeff(k + 1);
    let beta = (t.mid.subleading() - alpha.clone() * u.coeff(k)) / c.coeff(k);
    let gamma = match &t.lower {
        Some(l) => {
            let c2 = if k >= 2 { c.coeff(k - 2) } else { S::zero() };
            let sub = if k >= 1 { c.coeff(k - 1) } else { S::zero() };
            (c2 - alpha.clone() * u.coeff(k - 1) - beta.clone() * sub) / l.leading()
        }
        None => S::zero(),
    };
    let beta_closed = beta_closed(fam, m, n)?;
    let residual = recurrence_residual(fam, &t, &alpha, &beta, &gamma);
    let beta_closed_residual = recurrence_residual(fam, &t, &alpha, &beta_closed, &gamma);
    let closed_ok = if S::EXACT {
        beta_closed_residual.is_zero()
    } else {
        beta_closed_residual.abs() <= S::epsilon() * S::from_i64(1 << 30)
    };
    let note = (!closed_ok)
        .then_some("closed β̃ does not satisfy the recurrence; using the coefficient-matched value");
    Ok(Recurrence {
        m,
        n,
        alpha,
        alpha_closed: alpha_closed(fam, m, n),
        beta,
        beta_closed,
        beta_closed_residual,
        gamma,
        residual,
        note,
    })
}

/// Constants of the ladder pair at level `(m, n)`.
#[derive(Clone, Debug)]
pub struct Ladder<S> {
    pub m: i64,
    pub n: i64,
    pub k: S,
    /// `R(n+m)/τ'_n`.
    pub p_scale: S,
    pub beta: S,
}

impl<S: Scalar> Ladder<S> {
    pub fn new(fam: &FamilySpec<S>, m: i64, n: i64, beta: S) -> Result<Self> {
        let tp = tau_prime(fam, n)?;
        if tp.is_zero() {
            return Err(Error::Singular(format!("τ'_{n} vanishes")));
        }
        Ok(Ladder { m, n, k: k_of(fam, n), p_scale: r_of(fam, n + m) / tp, beta })
    }

    /// `P_n(s)`.
    pub fn p_at(&self, fam: &FamilySpec<S>, s: Site) -> Result<S> {
        Ok(self.p_scale.clone() * tau_k(fam, self.n, s)?)
    }

    fn nabla<F: Fn(Site) -> S>(&self, fam: &FamilySpec<S>, v: &F, s: Site) -> Result<S> {
        let sg = fam.sigma_at(s);
        if sg.is_zero() {
            return Ok(S::zero());
        }
        let den = fam.lattice.nabla_x_k(self.m, s);
        if den.is_zero() {
            return Err(Error::DegenerateSite { site2: s.twice(), k: self.m });
        }
        Ok(sg * (v(s) - v(s.steps(-1))) / den)
    }

    /// `(raise v)(s) = P_n v(s) − σ(s) ∇v(s)/∇x_m(s)` on a grid.
    pub fn raise_at<F: Fn(Site) -> S>(&self, fam: &FamilySpec<S>, v: &F, s: Site) -> Result<S> {
        Ok(self.p_at(fam, s)? * v(s) - self.nabla(fam, v, s)?)
    }

    /// `(lower v)(s) = (−P_n + K_n(x_m − β̃)) v(s) + σ(s) ∇v(s)/∇x_m(s)` on a grid.
    pub fn lower_at<F: Fn(Site) -> S>(&self, fam: &FamilySpec<S>, v: &F, s: Site) -> Result<S> {
        let xm = fam.lattice.x_k(self.m, s);
        let c = -self.p_at(fam, s)? + self.k.clone() * (xm - self.beta.clone());
        Ok(c * v(s) + self.nabla(fam, v, s)?)
    }

    /// `P_n(x)` for a continuous family.
    pub fn p_poly(&self, fam: &FamilySpec<S>) -> Poly<S> {
        tau_k_poly(fam, self.n).scale(&self.p_scale)
    }

    /// `P_n v − σ v'`.
    pub fn raise_poly(&self, fam: &FamilySpec<S>, v: &Poly<S>) -> Poly<S> {
        self.p_poly(fam).mul(v).sub(&fam.sigma.mul(&v.derivative()))
    }

    /// `(−P_n + K_n(x − β̃)) v + σ v'`.
    pub fn lower_poly(&self, fam: &FamilySpec<S>, v: &Poly<S>) -> Poly<S> {
        let lin = Poly::new(alloc::vec![-self.k.clone() * self.beta.clone(), self.k.clone()]);
        lin.sub(&self.p_poly(fam)).mul(v).add(&fam.sigma.mul(&v.derivative()))
    }
}

/// One step of the Rodrigues raising relation at `m = 0`:
/// `y_{n+1}(s) = (B_{n+1}/B_n)[τ_n(s) y(s) − (τ'_n/R(n)) σ(s) ∇y(s)/∇x(s)]`.
pub fn rodrigues_raise_at<S: Scalar, F: Fn(Site) -> S>(
    fam: &FamilySpec<S>,
    n: i64,
    y: &F,
    s: Site,
) -> Result<S> {
    let tp = tau_prime(fam, n)?;
    let c = tp / r_of(fam, n);
    let sg = fam.sigma_at(s);
    let grad = if sg.is_zero() {
        S::zero()
    } else {
        let den = fam.lattice.nabla_x_k(0, s);
        if den.is_zero() {
            return Err(Error::DegenerateSite { site2: s.twice(), k: 0 });
        }
        sg * (y(s) - y(s.steps(-1))) / den
    };
    Ok(b_n(fam, n + 1) / b_n(fam, n) * (tau_k(fam, n, s)? * y(s) - c * grad))
}

/// Continuous form of [`rodrigues_raise_at`]: `(B_{n+1}/B_n)[τ_n y − (τ'_n/R(n)) σ y']`.
pub fn rodrigues_raise_poly<S: Scalar>(fam: &FamilySpec<S>, n: i64, y: &Poly<S>) -> Result<Poly<S>> {
    let c = tau_prime(fam, n)? / r_of(fam, n);
    let inner = tau_k_poly(fam, n).mul(y).sub(&fam.sigma.mul(&y.derivative()).scale(&c));
    Ok(inner.scale(&(b_n(fam, n + 1) / b_n(fam, n))))
}

/// Sites used to test grid identities: the first `count` points of the `ρ_m` support.
pub fn check_sites<S: Scalar>(fam: &FamilySpec<S>, m: i64, count: i64) -> Vec<Site> {
    let top = fam.b.map_or(fam.a + count, |b| (b - m).min(fam.a + count));
    (fam.a..top).map(Site::int).collect()
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

    #[test]
    fn hermite_and_charlier_coefficients() {
        let h = catalog_get::<Rational>("hermite", &vec![]).unwrap();
        let r = recurrence(&h, 0, 3).unwrap();
        assert_eq!((r.alpha.clone(), r.beta.clone(), r.gamma.clone()), (q(1, 2), q(0, 1), q(3, 1)));
        assert_eq!(r.alpha_closed, q(1, 2));
        let c = catalog_get::<Rational>("charlier", &vec![("mu".to_string(), q(1, 1))]).unwrap();
        let r = recurrence(&c, 0, 2).unwrap();
        assert_eq!((r.alpha.clone(), r.beta.clone(), r.gamma.clone()), (q(-1, 1), q(3, 1), q(-2, 1)));
    }

    #[test]
    fn matched_recurrence_is_exact_and_alpha_paths_agree() {
        for name in SHIPPED {
            let f = catalog_get::<Rational>(name, &vec![]).unwrap();
            for n in 0..=5 {
                for m in 0..=n.min(3) {
                    let r = recurrence(&f, m, n).unwrap();
                    assert!(r.residual.is_zero(), "{name} {m} {n}");
                    assert_eq!(r.alpha, r.alpha_closed, "{name} {m} {n}");
                }
            }
        }
    }

    #[test]
    fn ladders_hit_neighbours_exactly() {
        for name in SHIPPED {
            let f = catalog_get::<Rational>(name, &vec![]).unwrap();
            for n in 1..=4 {
                for m in 0..=n.min(2) {
                    let r = recurrence(&f, m, n).unwrap();
                    let t = triple(&f, m, n).unwrap();
                    let l = Ladder::new(&f, m, n, r.beta.clone()).unwrap();
                    let up = r.alpha.clone() * l.k.clone();
                    let dn = r.gamma.clone() * l.k.clone();
                    if f.is_continuous() {
                        assert_eq!(l.raise_poly(&f, &t.mid.poly), t.upper.poly.scale(&up), "{name}");
                        let low = t.lower.as_ref().map_or(Poly::zero(), |p| p.poly.scale(&dn));
                        assert_eq!(l.lower_poly(&f, &t.mid.poly), low, "{name} {m} {n}");
                        continue;
                    }
                    let lat = f.lattice.clone();
                    let v = |s: Site| t.mid.at(&lat, s);
                    for s in check_sites(&f, m, 8) {
                        assert_eq!(l.raise_at(&f, &v, s).unwrap(), up.clone() * t.upper.at(&lat, s));
                        let low = t.lower.as_ref().map_or(q(0, 1), |p| dn.clone() * p.at(&lat, s));
                        assert_eq!(l.lower_at(&f, &v, s).unwrap(), low, "{name} {m} {n} {s}");
                    }
                }
            }
        }
    }

    #[test]
    fn rodrigues_raise_steps() {
        for name in SHIPPED {
            let f = catalog_get::<Rational>(name, &vec![]).unwrap();
            for n in 0..=4 {
                let y = shifted_poly(&f, 0, n).unwrap();
                let y1 = shifted_poly(&f, 0, n + 1).unwrap();
                if f.is_continuous() {
                    assert_eq!(rodrigues_raise_poly(&f, n, &y.poly).unwrap(), y1.poly, "{name}");
                    continue;
                }
                let lat = f.lattice.clone();
                for s in check_sites(&f, 0, 6) {
                    let got = rodrigues_raise_at(&f, n, &|u| y.at(&lat, u), s).unwrap();
                    assert_eq!(got, y1.at(&lat, s), "{name} {n} {s}");
                }
            }
        }
    }

    #[test]
    fn closed_beta_status() {
        let k = catalog_get::<Rational>("kravchuk", &vec![]).unwrap();
        let r = recurrence(&k, 0, 3).unwrap();
        assert!(r.note.is_none());
        assert_eq!(r.beta, r.beta_closed);
        let f = catalog_get::<Real>("hahn", &vec![]).unwrap();
        let r = recurrence(&f, 1, 3).unwrap();
        assert!(r.residual.to_f64().abs() < 1e-25);
    }
}
