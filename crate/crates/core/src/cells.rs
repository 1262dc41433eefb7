//! Residual computations behind each verification cell. Every function returns the largest
//! (relative, where a natural scale exists) deviation of one identity at one `(m, n)`.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::family::{check_invariants, FamilySpec};
use crate::ladder::{
    recurrence, recurrence_residual, rodrigues_raise_at, rodrigues_raise_poly, triple, Ladder,
};
use crate::lattice::{GridFunction, Site};
use crate::norms::{expectation, norm_sq, norm_sq_product, weighted_inner};
use crate::orthonormal::{
    continuous_factorization_residual, grid_factorization_residual, norm, pair, ContinuousLevel,
    GridLevel, Jet,
};
use crate::poly::Poly;
use crate::rodrigues::{
    difference_path, leading_closed_mn, rodrigues_continuous, rodrigues_grid, shifted_poly,
};
use crate::scalar::Scalar;
use crate::spectral::{lambda, mu, mu_accumulated, tau_linearity_residual};

/// Perturbations applied while evaluating cells (fault injection).
#[derive(Clone, Debug)]
pub struct Perturb<S> {
    pub alpha: S,
    pub beta: S,
    pub flip_amn_sign: bool,
}

impl<S: Scalar> Default for Perturb<S> {
    fn default() -> Self {
        Perturb { alpha: S::zero(), beta: S::zero(), flip_amn_sign: false }
    }
}

/// Residual with an optional explanatory note.
pub type Outcome<S> = Result<(S, Option<String>)>;

fn plain<S>(v: S) -> Outcome<S> {
    Ok((v, None))
}

fn rel<S: Scalar>(diff: S, scale: S) -> S {
    let scale = scale.abs();
    if scale.is_zero() {
        diff.abs()
    } else {
        diff.abs() / scale
    }
}

fn amn_sign<S: Scalar>(p: &Perturb<S>, m: i64) -> S {
    if p.flip_amn_sign && m >= 1 {
        -S::one()
    } else {
        S::one()
    }
}

/// Number of grid sites used by pointwise checks at level `m`.
fn window<S: Scalar>(fam: &FamilySpec<S>, m: i64) -> usize {
    match fam.b {
        Some(b) => (b - m - fam.a).clamp(0, 22) as usize,
        None => 22,
    }
}

pub fn pearson<S: Scalar>(fam: &FamilySpec<S>) -> Outcome<S> {
    match check_invariants(fam) {
        Ok(()) => plain(S::zero()),
        Err(Error::PearsonFailure(msg)) => Ok((S::one(), Some(msg))),
        Err(e) => Err(e),
    }
}

/// Lattice bracket identities at 20 half-integer sites for `1 ≤ n ≤ 12`.
pub fn lattice_brackets<S: Scalar>(fam: &FamilySpec<S>) -> Outcome<S> {
    let lat = &fam.lattice;
    let mut worst = S::zero();
    for i in 0..20 {
        let s = Site::from_twice(2 * fam.a + i + 1);
        let scale = S::max_abs(lat.delta_mean_x(s), S::one());
        for n in 1..=12 {
            let a = lat.bracket_identity_residual(s, n);
            let b = lat.mean_identity_residual(s, n);
            let sc = scale.clone() * S::max_abs(lat.bracket(n), lat.ch(n));
            worst = S::max_abs(worst, rel(a, sc.clone()));
            worst = S::max_abs(worst, rel(b, sc));
        }
    }
    plain(worst)
}

/// Residual of the level-`m` difference (or differential) equation satisfied by `v_{mn}`:
/// `μ_{mn} v + N_m Δv/(Δx_m ∇x_{m+1}) − σ ∇v/(∇x_m ∇x_{m+1}) = 0`, `N_m = σ + τ_m ∇x_{m+1}`.
pub fn equation<S: Scalar>(fam: &FamilySpec<S>, m: i64, n: i64, p: &Perturb<S>) -> Outcome<S> {
    let mu_mn = mu(fam, m, n);
    if fam.is_continuous() {
        let v = rodrigues_continuous(fam, m, n)?;
        let tm = crate::spectral::tau_k_poly(fam, m);
        let r = fam
            .sigma
            .mul(&v.derivative().derivative())
            .add(&tm.mul(&v.derivative()))
            .add(&v.scale(&mu_mn));
        let scale = v.scale(&mu_mn).max_abs_coeff() + v.max_abs_coeff();
        return plain(rel(r.max_abs_coeff(), scale));
    }
    let lat = &fam.lattice;
    let count = window(fam, m);
    let g = rodrigues_grid(fam, m, n, fam.a, count)?;
    let sign = amn_sign(p, m);
    let v: Vec<S> = g.values.iter().map(|x| x.clone() * sign.clone()).collect();
    let mut worst = S::zero();
    let mut scale = S::zero();
    for i in 0..count.saturating_sub(1) {
        let s = g.site(i);
        let sg = fam.sigma_at(s);
        if i == 0 && !sg.is_zero() {
            continue;
        }
        let nx1 = lat.nabla_x_k(m + 1, s);
        let nn = sg.clone() + crate::spectral::tau_k(fam, m, s)? * nx1.clone();
        let up_w = nn / (lat.dx_k(m, s) * nx1.clone());
        let up = up_w.clone() * (v[i + 1].clone() - v[i].clone());
        let mut size = up_w.abs() * (v[i + 1].abs() + v[i].abs());
        let down = if sg.is_zero() {
            S::zero()
        } else {
            let w = sg / (lat.nabla_x_k(m, s) * nx1);
            size = size + w.abs() * (v[i].abs() + v[i - 1].abs());
            w * (v[i].clone() - v[i - 1].clone())
        };
        let lam = mu_mn.clone() * v[i].clone();
        scale = S::max_abs(scale, lam.abs() + size);
        worst = S::max_abs(worst, lam + up - down);
    }
    plain(rel(worst, scale))
}

pub fn rodrigues_raise<S: Scalar>(fam: &FamilySpec<S>, n: i64) -> Outcome<S> {
    fam.check_degree(n + 1)?;
    if fam.is_continuous() {
        let y = rodrigues_continuous(fam, 0, n)?;
        let y1 = rodrigues_continuous(fam, 0, n + 1)?;
        let got = rodrigues_raise_poly(fam, n, &y)?;
        return plain(rel(got.sub(&y1).max_abs_coeff(), y1.max_abs_coeff()));
    }
    let count = window(fam, 0).min(window(fam, 0));
    let y = rodrigues_grid(fam, 0, n, fam.a, count)?;
    let y1 = rodrigues_grid(fam, 0, n + 1, fam.a, count)?;
    let look = |s: Site| y.at(s).cloned().unwrap_or_else(S::zero);
    let mut worst = S::zero();
    let mut scale = S::zero();
    for i in 0..count {
        let s = y.site(i);
        if i == 0 && !fam.sigma_at(s).is_zero() {
            continue;
        }
        let got = rodrigues_raise_at(fam, n, &look, s)?;
        scale = S::max_abs(scale, y1.values[i].clone());
        worst = S::max_abs(worst, got - y1.values[i].clone());
    }
    plain(rel(worst, scale))
}

pub fn tau_linearity<S: Scalar>(fam: &FamilySpec<S>, m: i64) -> Outcome<S> {
    if fam.is_continuous() {
        return Ok((S::zero(), Some(String::from("τ_m is a polynomial of degree ≤ 1"))));
    }
    let r = tau_linearity_residual(fam, m, 12)?;
    let scale = (0..3).fold(S::zero(), |acc, i| {
        S::max_abs(acc, crate::spectral::tau_k(fam, m, Site::int(fam.a + i)).unwrap_or_else(|_| S::zero()))
    });
    plain(rel(r, scale))
}

pub fn mu_two_path<S: Scalar>(fam: &FamilySpec<S>, m: i64, n: i64) -> Outcome<S> {
    let a = mu(fam, m, n);
    let b = mu_accumulated(fam, m, n)?;
    plain(rel(a.clone() - b, S::max_abs(a, lambda(fam, n))))
}

pub fn dual_construction<S: Scalar>(fam: &FamilySpec<S>, m: i64, n: i64, p: &Perturb<S>) -> Outcome<S> {
    let sign = amn_sign(p, m);
    if fam.is_continuous() {
        let a = rodrigues_continuous(fam, m, n)?.scale(&sign);
        let mut b = rodrigues_continuous(fam, 0, n)?;
        for _ in 0..m {
            b = b.derivative();
        }
        return plain(rel(a.sub(&b).max_abs_coeff(), b.max_abs_coeff()));
    }
    let count = window(fam, m).min(12);
    let a: GridFunction<S> = rodrigues_grid(fam, m, n, fam.a, count)?;
    let b = difference_path(fam, m, n, fam.a, count)?;
    let mut worst = S::zero();
    let mut scale = S::zero();
    for (x, y) in a.values.iter().zip(&b.values) {
        scale = S::max_abs(scale, y.clone());
        worst = S::max_abs(worst, x.clone() * sign.clone() - y.clone());
    }
    plain(rel(worst, scale))
}

pub fn leading_coefficient<S: Scalar>(fam: &FamilySpec<S>, m: i64, n: i64, p: &Perturb<S>) -> Outcome<S> {
    let got = shifted_poly(fam, m, n)?.leading() * amn_sign(p, m);
    let want = leading_closed_mn(fam, m, n);
    plain(rel(got - want.clone(), want))
}

pub fn alpha_two_path<S: Scalar>(fam: &FamilySpec<S>, m: i64, n: i64, p: &Perturb<S>) -> Outcome<S> {
    let r = recurrence(fam, m, n)?;
    plain(rel(r.alpha + p.alpha.clone() - r.alpha_closed.clone(), r.alpha_closed))
}

pub fn recurrence_cell<S: Scalar>(fam: &FamilySpec<S>, m: i64, n: i64, p: &Perturb<S>) -> Outcome<S> {
    let r = recurrence(fam, m, n)?;
    let t = triple(fam, m, n)?;
    let al = r.alpha.clone() + p.alpha.clone();
    let be = r.beta.clone() + p.beta.clone();
    let res = recurrence_residual(fam, &t, &al, &be, &r.gamma);
    let note = r.note.map(|s| format!("{s} (closed-form residual {})", r.beta_closed_residual.render()));
    Ok((res, note))
}

/// Applies `L` at the check sites (or as a polynomial) and compares it with `c · target`.
fn ladder_compare<S: Scalar>(
    fam: &FamilySpec<S>,
    lad: &Ladder<S>,
    raise: bool,
    v: &crate::rodrigues::ShiftedPoly<S>,
    target: Option<&crate::rodrigues::ShiftedPoly<S>>,
    c: &S,
) -> Result<S> {
    let m = v.m;
    if fam.is_continuous() {
        let got = if raise { lad.raise_poly(fam, &v.poly) } else { lad.lower_poly(fam, &v.poly) };
        let want = target.map_or(Poly::zero(), |t| t.poly.scale(c));
        let scale = S::max_abs(want.max_abs_coeff(), got.max_abs_coeff());
        return Ok(rel(got.sub(&want).max_abs_coeff(), scale));
    }
    let lat = &fam.lattice;
    let f = |s: Site| v.at(lat, s);
    let mut worst = S::zero();
    let mut scale = S::zero();
    for s in crate::ladder::check_sites(fam, m, 12) {
        let got = if raise { lad.raise_at(fam, &f, s)? } else { lad.lower_at(fam, &f, s)? };
        let want = target.map_or(S::zero(), |t| c.clone() * t.at(lat, s));
        scale = S::max_abs(S::max_abs(scale, want.clone()), got.clone());
        worst = S::max_abs(worst, got - want);
    }
    Ok(rel(worst, scale))
}

pub fn raise<S: Scalar>(fam: &FamilySpec<S>, m: i64, n: i64, p: &Perturb<S>) -> Outcome<S> {
    let r = recurrence(fam, m, n)?;
    let t = triple(fam, m, n)?;
    let lad = Ladder::new(fam, m, n, r.beta.clone())?;
    let c = (r.alpha + p.alpha.clone()) * lad.k.clone();
    plain(ladder_compare(fam, &lad, true, &t.mid, Some(&t.upper), &c)?)
}

pub fn lower<S: Scalar>(fam: &FamilySpec<S>, m: i64, n: i64) -> Outcome<S> {
    let r = recurrence(fam, m, n)?;
    let t = triple(fam, m, n)?;
    let lad = Ladder::new(fam, m, n, r.beta.clone())?;
    let c = r.gamma * lad.k.clone();
    plain(ladder_compare(fam, &lad, false, &t.mid, t.lower.as_ref(), &c)?)
}

/// `L⁻_{n+1}(L⁺_n v_{mn}) = K_n K_{n+1} α̃_n γ̃_{n+1} v_{mn}`.
pub fn roundtrip<S: Scalar>(fam: &FamilySpec<S>, m: i64, n: i64, p: &Perturb<S>) -> Outcome<S> {
    let pr = pair(fam, m, n)?;
    let v = shifted_poly(fam, m, n)?;
    let factor = pr.up.k.clone() * pr.down.k.clone() * (pr.rec_n.alpha.clone() + p.alpha.clone())
        * pr.rec_n1.gamma.clone();
    if fam.is_continuous() {
        let got = pr.down.lower_poly(fam, &pr.up.raise_poly(fam, &v.poly));
        let want = v.poly.scale(&factor);
        return plain(rel(got.sub(&want).max_abs_coeff(), want.max_abs_coeff()));
    }
    let lat = &fam.lattice;
    let f = |s: Site| v.at(lat, s);
    let up = |s: Site| pr.up.raise_at(fam, &f, s).unwrap_or_else(|_| S::zero());
    let mut worst = S::zero();
    let mut scale = S::zero();
    for s in crate::ladder::check_sites(fam, m, 12) {
        let got = pr.down.lower_at(fam, &up, s)?;
        let want = factor.clone() * f(s);
        scale = S::max_abs(scale, want.clone());
        worst = S::max_abs(worst, got - want);
    }
    plain(rel(worst, scale))
}

pub fn norm_product<S: Scalar>(fam: &FamilySpec<S>, m: i64, n: i64) -> Outcome<S> {
    let a = norm_sq(fam, m, n)?;
    let b = norm_sq_product(fam, m, n)?;
    plain(rel(a.clone() - b, a))
}

/// `⟨v_{mℓ}, v_{mn}⟩ − δ_{ℓn} d²_{mn}` for `m ≤ ℓ ≤ n`, scaled by the larger squared norm.
pub fn orthogonality<S: Scalar>(fam: &FamilySpec<S>, m: i64, n: i64) -> Outcome<S> {
    let vn = shifted_poly(fam, m, n)?;
    let dn = norm_sq(fam, m, n)?;
    let mut worst = S::zero();
    for l in m..=n {
        let vl = shifted_poly(fam, m, l)?;
        let g = weighted_inner(fam, &vl, &vn)?;
        let expect = if l == n { dn.clone() } else { S::zero() };
        let dl = norm_sq(fam, m, l)?;
        worst = S::max_abs(worst, rel(g - expect, S::max_abs(dl, dn.clone())));
    }
    plain(worst)
}

/// Cached orthonormal samples for one family and level.
pub enum OmegaLevel<S> {
    Grid(GridLevel<S>),
    Continuous(ContinuousLevel<S>),
}

pub struct OmegaSet<S> {
    pub level: OmegaLevel<S>,
    pub norms: Vec<(i64, S)>,
    pub grid: Vec<(i64, Vec<S>)>,
    pub jets: Vec<(i64, Vec<Jet<S>>)>,
}

impl<S: Scalar> OmegaSet<S> {
    pub fn new(fam: &FamilySpec<S>, m: i64, top: i64) -> Result<Self> {
        let level = if fam.is_continuous() {
            OmegaLevel::Continuous(ContinuousLevel::new(fam, m, 10)?)
        } else {
            OmegaLevel::Grid(GridLevel::new(fam, m, top)?)
        };
        Ok(OmegaSet { level, norms: Vec::new(), grid: Vec::new(), jets: Vec::new() })
    }

    fn m(&self) -> i64 {
        match &self.level {
            OmegaLevel::Grid(l) => l.m,
            OmegaLevel::Continuous(l) => l.m,
        }
    }

    /// `d_{mn}`, computed once per degree.
    pub fn norm(&mut self, fam: &FamilySpec<S>, n: i64) -> Result<S> {
        if let Some((_, d)) = self.norms.iter().find(|(j, _)| *j == n) {
            return Ok(d.clone());
        }
        let d = norm(fam, self.m(), n)?;
        self.norms.push((n, d.clone()));
        Ok(d)
    }

    fn grid_omega(&mut self, fam: &FamilySpec<S>, k: i64) -> Result<Vec<S>> {
        if let Some((_, v)) = self.grid.iter().find(|(j, _)| *j == k) {
            return Ok(v.clone());
        }
        let d = self.norm(fam, k)?;
        let OmegaLevel::Grid(l) = &self.level else { unreachable!() };
        let v = l.omega_with_norm(fam, k, d)?;
        self.grid.push((k, v.clone()));
        Ok(v)
    }

    fn jet_omega(&mut self, fam: &FamilySpec<S>, k: i64) -> Result<Vec<Jet<S>>> {
        if let Some((_, v)) = self.jets.iter().find(|(j, _)| *j == k) {
            return Ok(v.clone());
        }
        let d = self.norm(fam, k)?;
        let OmegaLevel::Continuous(l) = &self.level else { unreachable!() };
        let v = l.omega_with_norm(fam, k, d)?;
        self.jets.push((k, v.clone()));
        Ok(v)
    }
}

fn max_dev<S: Scalar>(a: &[S], b: &[S], c: &S) -> S {
    a.iter().zip(b).fold(S::zero(), |w, (x, y)| S::max_abs(w, x.clone() - c.clone() * y.clone()))
}

/// `L^±_n Ω_{mn}` against the stated multiple of `Ω_{m,n±1}`.
pub fn omega_ladder<S: Scalar>(
    fam: &FamilySpec<S>,
    set: &mut OmegaSet<S>,
    m: i64,
    n: i64,
    raise: bool,
    p: &Perturb<S>,
) -> Outcome<S> {
    let r = recurrence(fam, m, n)?;
    let lad = Ladder::new(fam, m, n, r.beta.clone())?;
    let dn = set.norm(fam, n)?;
    let (k, c) = if raise {
        (n + 1, (r.alpha.clone() + p.alpha.clone()) * lad.k.clone() * set.norm(fam, n + 1)? / dn)
    } else if n > m {
        (n - 1, r.gamma.clone() * lad.k.clone() * set.norm(fam, n - 1)? / dn)
    } else {
        (n, S::zero())
    };
    if fam.is_continuous() {
        let om = set.jet_omega(fam, n)?;
        let tg = set.jet_omega(fam, k)?;
        let OmegaLevel::Continuous(l) = &set.level else { unreachable!() };
        let mut worst = S::zero();
        for (i, j) in om.iter().enumerate() {
            let (v, _) = l.apply(fam, &lad, raise, i, j);
            worst = S::max_abs(worst, v - c.clone() * tg[i].f.clone());
        }
        return plain(worst);
    }
    let om = set.grid_omega(fam, n)?;
    let tg = set.grid_omega(fam, k)?;
    let OmegaLevel::Grid(l) = &set.level else { unreachable!() };
    let got = if raise { l.raise(fam, &lad, &om)? } else { l.lower(fam, &lad, &om)? };
    plain(max_dev(&got, &tg, &c))
}

/// `⟨L⁺_n Ω_{mn}, Ω_{m,n+1}⟩ − ⟨Ω_{mn}, L⁻_{n+1} Ω_{m,n+1}⟩` under the unit-weight product. On
/// the continuous class the conjugation by `√(ρσ^m)/d` turns both sides into weighted inner
/// products of the polynomial ladders, evaluated from the moments of the unit-mass weight.
pub fn adjointness<S: Scalar>(fam: &FamilySpec<S>, set: &mut OmegaSet<S>, m: i64, n: i64) -> Outcome<S> {
    let pr = pair(fam, m, n)?;
    let (lhs, rhs) = if fam.is_continuous() {
        let a = shifted_poly(fam, m, n)?;
        let b = shifted_poly(fam, m, n + 1)?;
        let up = pr.up.raise_poly(fam, &a.poly);
        let down = pr.down.lower_poly(fam, &b.poly);
        let w = (0..m).fold(Poly::constant(S::one()), |w, _| w.mul(&fam.sigma));
        let e = |f: &Poly<S>, g: &Poly<S>| expectation(fam, &f.mul(g).mul(&w));
        let d = (e(&a.poly, &a.poly)? * e(&b.poly, &b.poly)?)
            .sqrt()
            .ok_or_else(|| Error::FieldUnsupported("square root of squared norms".into()))?;
        (e(&up, &b.poly)? / d.clone(), e(&a.poly, &down)? / d)
    } else {
        let a = set.grid_omega(fam, n)?;
        let b = set.grid_omega(fam, n + 1)?;
        let OmegaLevel::Grid(l) = &set.level else { unreachable!() };
        (l.inner(fam, &l.raise(fam, &pr.up, &a)?, &b), l.inner(fam, &a, &l.lower(fam, &pr.down, &b)?))
    };
    let d = (lhs.clone() - rhs.clone()).abs();
    let note = (!rhs.is_zero()).then(|| {
        format!(
            "ratio ⟨L⁺Ω,Ω⟩/⟨Ω,L⁻Ω⟩ = {}, K_n/K_(n+1) = {}",
            (lhs / rhs).render(),
            (pr.up.k.clone() / pr.down.k.clone()).render()
        )
    });
    Ok((d, note))
}

/// Factorization identities applied to `Ω_{m,n−1}`, `Ω_{mn}`, `Ω_{m,n+1}`.
pub fn factorization<S: Scalar>(fam: &FamilySpec<S>, set: &mut OmegaSet<S>, m: i64, n: i64) -> Outcome<S> {
    let pr = pair(fam, m, n)?;
    let mut worst = S::zero();
    for k in (n - 1).max(m)..=n + 1 {
        let r = if fam.is_continuous() {
            let om = set.jet_omega(fam, k)?;
            let OmegaLevel::Continuous(l) = &set.level else { unreachable!() };
            continuous_factorization_residual(fam, l, &pr, &om)?
        } else {
            let om = set.grid_omega(fam, k)?;
            let OmegaLevel::Grid(l) = &set.level else { unreachable!() };
            grid_factorization_residual(fam, l, &pr, &om)?
        };
        worst = S::max_abs(worst, r);
    }
    plain(worst)
}
