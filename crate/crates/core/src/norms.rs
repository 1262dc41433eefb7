//! Squared norms `d²_{mn} = Σ_s v_{mn}(s)² ρ_m(s) ∇x_{m+1}(s)` (`∫ v_{mn}² σ^m ρ dx` for continuous
//! families), computed directly and through the product law
//! `d²_{mn} = d²_{00} ∏_{j=1}^{n} γ̃_j/α̃_{j−1} · ∏_{k<m} μ_{kn}`.
//!
//! Mass convention: in the float field the weight carries its catalog anchor (for example
//! `ρ(0) = e^{−μ}` for Charlier, or the closed density of a continuous family). In the rational
//! field a finite grid support is summed exactly with the shape weight `ρ(a) = 1`, while infinite
//! supports and continuous families use the unit-mass weight, whose moments are rational.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::family::{FamilySpec, Interval};
use crate::ladder::recurrence;
use crate::lattice::{LatticeKind, Site};
use crate::poly::Poly;
use crate::quadrature::{integrate, Rule};
use crate::rodrigues::{rodrigues_grid, shifted_poly, ShiftedPoly};
use crate::scalar::Scalar;
use crate::spectral::mu;

/// Whether norms of this family are reported against the unit-mass weight.
pub fn uses_unit_mass<S: Scalar>(fam: &FamilySpec<S>) -> bool {
    S::EXACT && (fam.is_continuous() || fam.b.is_none())
}

fn tail_tol<S: Scalar>() -> S {
    S::from_frac(1, 1_000_000_000_000_000) * S::from_frac(1, 1_000_000_000_000_000)
}

fn quad_tol<S: Scalar>() -> S {
    S::max_abs(S::epsilon() * S::from_i64(1 << 16), S::from_frac(1, 1_000_000_000_000) * S::from_frac(1, 1_000_000_000_000_000_000))
}

/// Moments `M_0 = 1, M_1, …, M_{count−1}` of the unit-mass weight, from
/// `E[τ x^j + σ D(x^j)] = 0` with `D = d/dx` (continuous) or `∇` (linear lattice).
pub fn moments<S: Scalar>(fam: &FamilySpec<S>, count: usize) -> Result<Vec<S>> {
    let kind = fam.kind();
    if kind != LatticeKind::Continuous && kind != LatticeKind::Linear {
        return Err(Error::FieldUnsupported(format!(
            "moment recursion is available on continuous and linear families, not {}",
            kind.name()
        )));
    }
    let mut m = vec![S::one()];
    let mut xj = Poly::constant(S::one());
    for j in 0..count.saturating_sub(1) {
        let d = if kind == LatticeKind::Continuous {
            xj.derivative()
        } else {
            xj.sub(&xj.shift(&-S::one()))
        };
        let q = fam.tau.mul(&xj).add(&fam.sigma.mul(&d));
        let lead = q.coeff(j + 1);
        if lead.is_zero() {
            return Err(Error::Singular(format!("moment recursion stalls at order {}", j + 1)));
        }
        let mut acc = S::zero();
        for (k, mk) in m.iter().enumerate() {
            acc = acc + q.coeff(k) * mk.clone();
        }
        m.push(-acc / lead);
        xj = xj.mul(&Poly::x());
    }
    Ok(m)
}

/// `E[p]` under the unit-mass weight.
pub fn expectation<S: Scalar>(fam: &FamilySpec<S>, p: &Poly<S>) -> Result<S> {
    let m = moments(fam, p.coeffs.len())?;
    Ok(p.coeffs.iter().zip(m).fold(S::zero(), |acc, (c, mk)| acc + c.clone() * mk))
}

/// `Σ ρ` (or `∫ ρ`) under the field's mass convention.
pub fn mass<S: Scalar>(fam: &FamilySpec<S>) -> Result<S> {
    if uses_unit_mass(fam) {
        return Ok(S::one());
    }
    if let Some(d) = fam.density() {
        if let Some(v) = d.mass() {
            return Ok(v);
        }
        return continuous_integral(fam, &Poly::constant(S::one()), 0);
    }
    grid_sum(fam, 0, |_| S::one())
}

fn rule_for(iv: Interval) -> Rule {
    match iv {
        Interval::Line => Rule::SinhSinh,
        Interval::HalfLine => Rule::ExpSinh,
        Interval::Symmetric => Rule::TanhSinh,
    }
}

/// `∫ p(x) σ(x)^m ρ(x) dx` by quadrature.
fn continuous_integral<S: Scalar>(fam: &FamilySpec<S>, p: &Poly<S>, m: i64) -> Result<S> {
    let d = fam.density().ok_or_else(|| Error::NotAdmissible("no density".into()))?;
    let iv = d.interval();
    let f = |x: &S, lo: &S, hi: &S| -> S {
        let (lo, hi) = match iv {
            Interval::Symmetric => (Some(lo), Some(hi)),
            Interval::HalfLine => (Some(lo), None),
            Interval::Line => (None, None),
        };
        let r = d.eval(x, lo, hi).unwrap_or_else(S::zero);
        p.eval(x) * fam.sigma.eval(x).powi(m) * r
    };
    integrate(rule_for(iv), f, &quad_tol())
}

/// `Σ_s g(s) ρ_m(s) ∇x_{m+1}(s)` over the support of `ρ_m`, with `g` given per window of Rodrigues
/// values; infinite supports grow the window until the tail is negligible.
fn grid_sum<S: Scalar>(fam: &FamilySpec<S>, m: i64, g: impl Fn(Site) -> S) -> Result<S> {
    let lat = &fam.lattice;
    let term = |table: &crate::family::WeightTable<S>, s: i64| -> S {
        let site = Site::int(s);
        g(site) * table.rho_m(fam, m, s).unwrap_or_else(S::zero) * lat.nabla_x_k(m + 1, site)
    };
    if let Some(b) = fam.b {
        let len = (b - fam.a).max(0) as usize;
        let table = fam.weight_table(len + 1)?;
        return Ok((fam.a..b - m).fold(S::zero(), |acc, s| acc + term(&table, s)));
    }
    let mut window = 64usize;
    while window <= 8192 {
        let table = fam.weight_table(window + m as usize + 1)?;
        let mut sum = S::zero();
        let mut tail = S::zero();
        for (i, s) in (fam.a..fam.a + window as i64).enumerate() {
            let t = term(&table, s);
            if i + 8 >= window {
                tail = S::max_abs(tail, t.clone());
            }
            sum = sum + t;
        }
        if tail <= tail_tol::<S>() * sum.abs() {
            return Ok(sum);
        }
        window *= 2;
    }
    Err(Error::TruncationNotConverged(format!("{}: weight tail above 1e-30", fam.name)))
}

/// `d²_{mn}` computed directly from Rodrigues values.
pub fn norm_sq<S: Scalar>(fam: &FamilySpec<S>, m: i64, n: i64) -> Result<S> {
    let v = shifted_poly(fam, m, n)?;
    let sq = v.poly.mul(&v.poly);
    if fam.is_continuous() {
        if uses_unit_mass(fam) {
            let w = (0..m).fold(Poly::constant(S::one()), |w, _| w.mul(&fam.sigma));
            return expectation(fam, &sq.mul(&w));
        }
        return continuous_integral(fam, &sq, m);
    }
    if uses_unit_mass(fam) {
        // Σ_s ρ_m(s) p(s) = E[∏_{i<m} σ(y−i) · p(y−m)] on the linear lattice, x_m(y−m) = y − m/2.
        let mut w = sq.shift(&-S::from_frac(m, 2));
        for i in 0..m {
            w = w.mul(&fam.sigma.shift(&-S::from_i64(i)));
        }
        return expectation(fam, &w);
    }
    if let Some(b) = fam.b {
        let count = (b - m - fam.a) as usize;
        let g = rodrigues_grid(fam, m, n, fam.a, count)?;
        return grid_sum(fam, m, |s| {
            let x = g.at(s).cloned().unwrap_or_else(S::zero);
            x.clone() * x
        });
    }
    grid_sum(fam, m, |s| {
        let x = v.at(&fam.lattice, s);
        x.clone() * x
    })
}

/// `Σ_s a(s) b(s) ρ_m(s) ∇x_{m+1}(s)` (or `∫ a b σ^m ρ`) for two polynomials of the same level.
pub fn weighted_inner<S: Scalar>(fam: &FamilySpec<S>, a: &ShiftedPoly<S>, b: &ShiftedPoly<S>) -> Result<S> {
    let m = a.m;
    let prod = a.poly.mul(&b.poly);
    if fam.is_continuous() {
        if uses_unit_mass(fam) {
            let w = (0..m).fold(Poly::constant(S::one()), |w, _| w.mul(&fam.sigma));
            return expectation(fam, &prod.mul(&w));
        }
        return continuous_integral(fam, &prod, m);
    }
    if uses_unit_mass(fam) {
        let mut w = prod.shift(&-S::from_frac(m, 2));
        for i in 0..m {
            w = w.mul(&fam.sigma.shift(&-S::from_i64(i)));
        }
        return expectation(fam, &w);
    }
    grid_sum(fam, m, |s| prod.eval(&fam.lattice.x_k(m, s)))
}

/// `d²_{mn}` from the mass, the recurrence coefficients at `m = 0` and the eigenvalue gaps.
pub fn norm_sq_product<S: Scalar>(fam: &FamilySpec<S>, m: i64, n: i64) -> Result<S> {
    let mut d = mass(fam)?;
    let mut prev_alpha = None;
    for j in 0..=n {
        let r = recurrence(fam, 0, j)?;
        if let Some(a) = prev_alpha {
            d = d * r.gamma.clone() / a;
        }
        prev_alpha = Some(r.alpha);
    }
    for k in 0..m {
        d = d * mu(fam, k, n);
    }
    Ok(d)
}
