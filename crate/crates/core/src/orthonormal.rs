//! Orthonormal functions `Ω_{mn} = √ρ_m · v_{mn} / d_{mn}` and their ladder operators.
//!
//! On a grid, with `Σ(s) = σ(s) + τ_{m−1}(s)∇x_m(s)` and `√(σΣ)` taken as the geometric mean,
//!
//! * `L⁺_n Ω = P_n Ω − [σ Ω(s) − √(σΣ) Ω(s−1)]/∇x_m(s) = α̃_n K_n (d_{n+1}/d_n) Ω_{n+1}`
//! * `L⁻_n Ω = (−P_n + K_n(x_m − β̃_n)) Ω + [σ Ω(s) − √(σΣ) Ω(s−1)]/∇x_m(s) = γ̃_n K_n (d_{n−1}/d_n) Ω_{n−1}`
//!
//! and the products factor as
//! `L⁻_{n+1} L⁺_n f = μ f − √(σΣ)(s) ∇x_m(s−½)/∇x_m(s) · (H̃_n f)(s−1)`,
//! `L⁺_n L⁻_{n+1} f = μ f − √(σΣ)(s) ∇x_m(s−½)/∇x_m(s) · (H̃_{n+1} f)(s−1)`,
//! where `μ = K_n K_{n+1} α̃_n γ̃_{n+1}` and `H̃_n` is the symmetrised difference operator of which
//! `Ω_{mn}` is a null vector.
//!
//! Continuous families use `ψ = g √ρ_m`, `L⁺ = (P_n + ½τ_{m−1}) − σ d/dx`,
//! `L⁻ = (−P_n + K_n(x − β̃_n) − ½τ_{m−1}) + σ d/dx`, and `−σ H̃` in the factorization.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::family::FamilySpec;
use crate::ladder::{recurrence, Ladder, Recurrence};
use crate::lattice::Site;
use crate::norms::norm_sq;
use crate::rodrigues::{rodrigues_grid, shifted_poly};
use crate::scalar::Scalar;
use crate::spectral::{mu, tau_k, tau_k_poly};

fn need_sqrt<S: Scalar>(v: S, what: &str) -> Result<S> {
    if v.is_negative() {
        if S::EXACT || v.abs() > S::epsilon() * S::from_i64(1 << 20) {
            return Err(Error::FieldUnsupported(format!("square root of a negative {what}")));
        }
        return Ok(S::zero());
    }
    v.sqrt().ok_or_else(|| Error::FieldUnsupported(format!("square root of {what}")))
}

/// `d_{mn}`.
pub fn norm<S: Scalar>(fam: &FamilySpec<S>, m: i64, n: i64) -> Result<S> {
    need_sqrt(norm_sq(fam, m, n)?, "squared norm")
}

/// Window of grid sites `start, …, start+len−1` carrying `√ρ_m`.
#[derive(Clone, Debug)]
pub struct GridLevel<S> {
    pub m: i64,
    pub start: i64,
    pub sqrt_rho: Vec<S>,
}

impl<S: Scalar> GridLevel<S> {
    /// Covers the support of `ρ_m`; infinite supports are cut where `Ω_{m,top}²` has decayed
    /// below `10^{-40}`.
    pub fn new(fam: &FamilySpec<S>, m: i64, top: i64) -> Result<Self> {
        if fam.is_continuous() {
            return Err(Error::NotAdmissible(format!("{} is a continuous family", fam.name)));
        }
        let build = |len: usize| -> Result<GridLevel<S>> {
            let table = fam.weight_table(len + m as usize + 1)?;
            let sqrt_rho = (0..len as i64)
                .map(|i| need_sqrt(table.rho_m(fam, m, fam.a + i).unwrap_or_else(S::zero), "weight"))
                .collect::<Result<Vec<S>>>()?;
            Ok(GridLevel { m, start: fam.a, sqrt_rho })
        };
        if let Some(b) = fam.b {
            return build((b - m - fam.a).max(0) as usize);
        }
        let v = shifted_poly(fam, m, top.max(m))?;
        let lim = S::from_frac(1, 10_000_000_000) * S::from_frac(1, 10_000_000_000);
        let mut len = 64usize;
        while len <= 8192 {
            let lvl = build(len)?;
            let tail = (len - 8..len).fold(S::zero(), |acc, i| {
                let s = Site::int(fam.a + i as i64);
                S::max_abs(acc, lvl.sqrt_rho[i].clone() * v.at(&fam.lattice, s))
            });
            if tail <= lim {
                return Ok(lvl);
            }
            len *= 2;
        }
        Err(Error::TruncationNotConverged(format!("{}: Ω window", fam.name)))
    }

    pub fn len(&self) -> usize {
        self.sqrt_rho.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sqrt_rho.is_empty()
    }

    pub fn site(&self, i: usize) -> Site {
        Site::int(self.start + i as i64)
    }

    /// `Ω_{mn}` on the window.
    pub fn omega(&self, fam: &FamilySpec<S>, n: i64) -> Result<Vec<S>> {
        self.omega_with_norm(fam, n, norm(fam, self.m, n)?)
    }

    /// `Ω_{mn}` on the window for a known `d_{mn}`.
    pub fn omega_with_norm(&self, fam: &FamilySpec<S>, n: i64, d: S) -> Result<Vec<S>> {
        let v = rodrigues_grid(fam, self.m, n, self.start, self.len())?;
        Ok(v.values.into_iter().zip(&self.sqrt_rho).map(|(x, r)| x * r.clone() / d.clone()).collect())
    }

    fn get(f: &[S], i: i64) -> S {
        if i < 0 {
            S::zero()
        } else {
            f.get(i as usize).cloned().unwrap_or_else(S::zero)
        }
    }

    /// `Σ_s f(s) g(s) ∇x_{m+1}(s)`.
    pub fn inner(&self, fam: &FamilySpec<S>, f: &[S], g: &[S]) -> S {
        (0..self.len()).fold(S::zero(), |acc, i| {
            acc + f[i].clone() * g[i].clone() * fam.lattice.nabla_x_k(self.m + 1, self.site(i))
        })
    }

    /// `(√(σΣ)(s), σ(s), ∇x_m(s))`.
    fn geometry(&self, fam: &FamilySpec<S>, s: Site) -> Result<(S, S, S)> {
        let sg = fam.sigma_at(s);
        let den = fam.lattice.nabla_x_k(self.m, s);
        if sg.is_zero() {
            return Ok((S::zero(), sg, den));
        }
        let big = sg.clone() + tau_k(fam, self.m - 1, s)? * den.clone();
        Ok((need_sqrt(sg.clone() * big, "σΣ")?, sg, den))
    }

    /// `[σ f(s) − √(σΣ) f(s−1)]/∇x_m(s)` at window index `i`.
    fn nabla_term(&self, fam: &FamilySpec<S>, f: &[S], i: i64) -> Result<S> {
        let (fi, fp) = (Self::get(f, i), Self::get(f, i - 1));
        if fi.is_zero() && fp.is_zero() {
            return Ok(S::zero());
        }
        let s = Site::int(self.start + i);
        let (root, sg, den) = self.geometry(fam, s)?;
        if sg.is_zero() {
            return Ok(S::zero());
        }
        if den.is_zero() {
            return Err(Error::DegenerateSite { site2: s.twice(), k: self.m });
        }
        Ok((sg * fi - root * fp) / den)
    }

    fn apply(
        &self,
        fam: &FamilySpec<S>,
        lad: &Ladder<S>,
        f: &[S],
        raise: bool,
        lo: i64,
    ) -> Result<Vec<S>> {
        (lo..self.len() as i64)
            .map(|i| {
                let s = Site::int(self.start + i);
                let p = lad.p_at(fam, s)?;
                let t = self.nabla_term(fam, f, i)?;
                if raise {
                    Ok(p * Self::get(f, i) - t)
                } else {
                    let c = -p + lad.k.clone() * (fam.lattice.x_k(self.m, s) - lad.beta.clone());
                    Ok(c * Self::get(f, i) + t)
                }
            })
            .collect()
    }

    /// `L⁺_n f` on the window.
    pub fn raise(&self, fam: &FamilySpec<S>, lad: &Ladder<S>, f: &[S]) -> Result<Vec<S>> {
        self.apply(fam, lad, f, true, 0)
    }

    /// `L⁻_n f` on the window.
    pub fn lower(&self, fam: &FamilySpec<S>, lad: &Ladder<S>, f: &[S]) -> Result<Vec<S>> {
        self.apply(fam, lad, f, false, 0)
    }

    /// `(H̃_n f)(s)` at window index `i` (may be `−1`):
    /// `μ_{mn} f + [√(N σ(s+1)) f(s+1) − N f(s)]/(Δx_m ∇x_{m+1}) − [σ f(s) − √(σΣ) f(s−1)]/(∇x_m ∇x_{m+1})`,
    /// with `N = σ + τ_m ∇x_{m+1}`.
    pub fn h_tilde_at(&self, fam: &FamilySpec<S>, n: i64, f: &[S], i: i64) -> Result<S> {
        let lat = &fam.lattice;
        let m = self.m;
        let s = Site::int(self.start + i);
        let nx1 = lat.nabla_x_k(m + 1, s);
        let dxm = lat.dx_k(m, s);
        if nx1.is_zero() || dxm.is_zero() {
            return Err(Error::DegenerateSite { site2: s.twice(), k: m });
        }
        let big_n = fam.sigma_at(s) + tau_k(fam, m, s)? * nx1.clone();
        let up = if big_n.is_zero() {
            S::zero()
        } else {
            let root = need_sqrt(big_n.clone() * fam.sigma_at(s.steps(1)), "Nσ")?;
            (root * Self::get(f, i + 1) - big_n * Self::get(f, i)) / (dxm * nx1.clone())
        };
        let down = self.nabla_term(fam, f, i)? / nx1;
        Ok(mu(fam, m, n) * Self::get(f, i) + up - down)
    }

    /// `√(σΣ)(s) ∇x_m(s−½)/∇x_m(s)`, the coefficient in front of `(H̃ f)(s−1)`.
    pub fn factor_coefficient(&self, fam: &FamilySpec<S>, i: i64) -> Result<S> {
        let s = Site::int(self.start + i);
        let (root, _, den) = self.geometry(fam, s)?;
        if root.is_zero() {
            return Ok(S::zero());
        }
        if den.is_zero() {
            return Err(Error::DegenerateSite { site2: s.twice(), k: self.m });
        }
        Ok(root * fam.lattice.nabla_x_k(self.m, s.halves(-1)) / den)
    }
}

/// Ladder constants and recurrence data used at level `(m, n)` and `(m, n+1)`.
pub struct Pair<S> {
    pub rec_n: Recurrence<S>,
    pub rec_n1: Recurrence<S>,
    pub up: Ladder<S>,
    pub down: Ladder<S>,
    /// `μ = K_n K_{n+1} α̃_n γ̃_{n+1}`.
    pub mu: S,
}

/// Data for `L⁻_{n+1} L⁺_n` (needs `n+2` admissible for the recurrence at `n+1`).
pub fn pair<S: Scalar>(fam: &FamilySpec<S>, m: i64, n: i64) -> Result<Pair<S>> {
    let rec_n = recurrence(fam, m, n)?;
    let rec_n1 = recurrence(fam, m, n + 1)?;
    let up = Ladder::new(fam, m, n, rec_n.beta.clone())?;
    let down = Ladder::new(fam, m, n + 1, rec_n1.beta.clone())?;
    let mu = up.k.clone() * down.k.clone() * rec_n.alpha.clone() * rec_n1.gamma.clone();
    Ok(Pair { rec_n, rec_n1, up, down, mu })
}

/// Largest deviation of the two factorization identities over the window, applied to `f`.
pub fn grid_factorization_residual<S: Scalar>(
    fam: &FamilySpec<S>,
    lvl: &GridLevel<S>,
    p: &Pair<S>,
    f: &[S],
) -> Result<S> {
    let n = p.up.n;
    let lr = lvl.lower(fam, &p.down, &lvl.raise(fam, &p.up, f)?)?;
    let rl = lvl.raise(fam, &p.up, &lvl.lower(fam, &p.down, f)?)?;
    let mut worst = S::zero();
    for i in 0..lvl.len() as i64 {
        let c = lvl.factor_coefficient(fam, i)?;
        let (h0, h1) = if c.is_zero() {
            (S::zero(), S::zero())
        } else {
            (lvl.h_tilde_at(fam, n, f, i - 1)?, lvl.h_tilde_at(fam, n + 1, f, i - 1)?)
        };
        let base = p.mu.clone() * f[i as usize].clone();
        let e1 = lr[i as usize].clone() - (base.clone() - c.clone() * h0);
        let e2 = rl[i as usize].clone() - (base - c * h1);
        worst = S::max_abs(S::max_abs(worst, e1), e2);
    }
    Ok(worst)
}

/// Second-order jet `(f, f', f'')` at a point.
#[derive(Clone, Debug)]
pub struct Jet<S> {
    pub f: S,
    pub d1: S,
    pub d2: S,
}

/// Continuous orthonormal functions sampled as jets at fixed interior points.
#[derive(Clone, Debug)]
pub struct ContinuousLevel<S> {
    pub m: i64,
    pub points: Vec<S>,
    /// `√ρ_m`, `ℓ = (ln ρ_m)'` and `ℓ'` at each point.
    root: Vec<S>,
    ell: Vec<S>,
    ell_d: Vec<S>,
}

impl<S: Scalar> ContinuousLevel<S> {
    pub fn new(fam: &FamilySpec<S>, m: i64, count: usize) -> Result<Self> {
        let d = fam.density().ok_or_else(|| Error::NotAdmissible(format!("{} is a grid family", fam.name)))?;
        let points = d.sample_points(count);
        let sp = fam.sigma.derivative();
        let mf = S::from_i64(m);
        let mut root = vec![];
        let mut ell = vec![];
        let mut ell_d = vec![];
        for x in &points {
            let sg = fam.sigma.eval(x);
            let rho = d.eval(x, None, None).ok_or_else(|| Error::FieldUnsupported("density".into()))?;
            root.push(need_sqrt(sg.powi(m) * rho, "weight")?);
            let q = sp.eval(x) / sg.clone();
            ell.push(mf.clone() * q.clone() + d.log_derivative(x));
            ell_d.push(mf.clone() * (fam.sigma_pp() / sg - q.clone() * q) + d.log_second_derivative(x));
        }
        Ok(ContinuousLevel { m, points, root, ell, ell_d })
    }

    /// Jets of `Ω_{mn}` at the sample points.
    pub fn omega(&self, fam: &FamilySpec<S>, n: i64) -> Result<Vec<Jet<S>>> {
        self.omega_with_norm(fam, n, norm(fam, self.m, n)?)
    }

    pub fn omega_with_norm(&self, fam: &FamilySpec<S>, n: i64, d: S) -> Result<Vec<Jet<S>>> {
        let g = shifted_poly(fam, self.m, n)?.poly;
        let (g1, g2) = (g.derivative(), g.derivative().derivative());
        let half = S::from_frac(1, 2);
        let quarter = S::from_frac(1, 4);
        Ok(self
            .points
            .iter()
            .enumerate()
            .map(|(i, x)| {
                let (a0, a1, a2) = (g.eval(x), g1.eval(x), g2.eval(x));
                let (l, lp) = (self.ell[i].clone(), self.ell_d[i].clone());
                let s = self.root[i].clone() / d.clone();
                Jet {
                    f: a0.clone() * s.clone(),
                    d1: (a1.clone() + half.clone() * l.clone() * a0.clone()) * s.clone(),
                    d2: (a2 + l.clone() * a1 + half.clone() * lp * a0.clone() + quarter.clone() * l.clone() * l * a0) * s,
                }
            })
            .collect())
    }

    /// Coefficients `(A, A')` of the multiplicative part of `L⁺` (or of `L⁻`) at point `i`.
    fn mult(&self, fam: &FamilySpec<S>, lad: &Ladder<S>, raise: bool, x: &S) -> (S, S) {
        let half = S::from_frac(1, 2);
        let p = lad.p_poly(fam);
        let t = tau_k_poly(fam, self.m - 1);
        if raise {
            (p.eval(x) + half.clone() * t.eval(x), p.derivative().eval(x) + half * t.derivative().eval(x))
        } else {
            let lin = lad.k.clone() * (x.clone() - lad.beta.clone());
            (
                -p.eval(x) + lin - half.clone() * t.eval(x),
                -p.derivative().eval(x) + lad.k.clone() - half * t.derivative().eval(x),
            )
        }
    }

    /// `L⁺_n` (or `L⁻_n`) applied to a jet, returning the value and first derivative.
    pub fn apply(&self, fam: &FamilySpec<S>, lad: &Ladder<S>, raise: bool, i: usize, j: &Jet<S>) -> (S, S) {
        let x = &self.points[i];
        let (a, ad) = self.mult(fam, lad, raise, x);
        let sg = fam.sigma.eval(x);
        let sgd = fam.sigma.derivative().eval(x);
        let sign = if raise { -S::one() } else { S::one() };
        let val = a.clone() * j.f.clone() + sign.clone() * sg.clone() * j.d1.clone();
        let der = ad * j.f.clone() + a * j.d1.clone() + sign * (sgd * j.d1.clone() + sg * j.d2.clone());
        (val, der)
    }

    /// `H̃_n f = σ f'' + (τ_m − σℓ) f' + [μ_{mn} − ½σℓ' + ¼σℓ² − ½τ_m ℓ] f`, the conjugate of
    /// `σ g'' + τ_m g' + μ_{mn} g` under `f = g √ρ_m`.
    pub fn h_tilde(&self, fam: &FamilySpec<S>, n: i64, i: usize, j: &Jet<S>) -> S {
        let x = &self.points[i];
        let (l, lp) = (self.ell[i].clone(), self.ell_d[i].clone());
        let sg = fam.sigma.eval(x);
        let tm = tau_k_poly(fam, self.m).eval(x);
        let half = S::from_frac(1, 2);
        let quarter = S::from_frac(1, 4);
        let c0 = mu(fam, self.m, n) - half.clone() * sg.clone() * lp + quarter * sg.clone() * l.clone() * l.clone()
            - half * tm.clone() * l.clone();
        sg.clone() * j.d2.clone() + (tm - sg * l) * j.d1.clone() + c0 * j.f.clone()
    }
}

/// Largest deviation of the continuous factorization identities at the sample points.
pub fn continuous_factorization_residual<S: Scalar>(
    fam: &FamilySpec<S>,
    lvl: &ContinuousLevel<S>,
    p: &Pair<S>,
    f: &[Jet<S>],
) -> Result<S> {
    let n = p.up.n;
    let mut worst = S::zero();
    for (i, j) in f.iter().enumerate() {
        let x = &lvl.points[i];
        let sg = fam.sigma.eval(x);
        for (first, second, hn) in [(&p.up, &p.down, n), (&p.down, &p.up, n + 1)] {
            let raise_first = core::ptr::eq(first, &p.up);
            let (v, d) = lvl.apply(fam, first, raise_first, i, j);
            // The outer operator needs the jet of the inner result up to first order only.
            let (a, _) = lvl.mult(fam, second, !raise_first, x);
            let sign = if raise_first { S::one() } else { -S::one() };
            let outer = a * v + sign * sg.clone() * d;
            let want = p.mu.clone() * j.f.clone() - sg.clone() * lvl.h_tilde(fam, hn, i, j);
            worst = S::max_abs(worst, outer - want);
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::catalog_get;
    use crate::scalar::Real;

    fn small(v: Real, tol: f64) -> bool {
        v.abs().to_f64() < tol
    }

    fn max_dev(a: &[Real], b: &[Real], c: &Real) -> Real {
        a.iter().zip(b).fold(Real::zero(), |w, (x, y)| Real::max_abs(w, x.clone() - c.clone() * y.clone()))
    }

    #[test]
    fn grid_ladders_orthonormality_and_factorization() {
        for name in ["kravchuk", "hahn", "racah", "qhahn", "charlier", "meixner"] {
            let f = catalog_get::<Real>(name, &alloc::vec![]).unwrap();
            for (m, n) in [(0i64, 2i64), (1, 3)] {
                let lvl = GridLevel::new(&f, m, n + 2).unwrap();
                let om: Vec<Vec<Real>> = (n - 1..=n + 2).map(|k| lvl.omega(&f, k).unwrap()).collect();
                assert!(small(lvl.inner(&f, &om[1], &om[1]) - Real::one(), 1e-25), "{name}");
                assert!(small(lvl.inner(&f, &om[1], &om[2]), 1e-25), "{name}");
                let p = pair(&f, m, n).unwrap();
                let (dn, dn1) = (norm(&f, m, n).unwrap(), norm(&f, m, n + 1).unwrap());
                let up = p.rec_n.alpha.clone() * p.up.k.clone() * dn1.clone() / dn.clone();
                let raised = lvl.raise(&f, &p.up, &om[1]).unwrap();
                assert!(small(max_dev(&raised, &om[2], &up), 1e-25), "{name} raise {m} {n}");
                let dn1m = norm(&f, m, n - 1).unwrap();
                let low = Ladder::new(&f, m, n, p.rec_n.beta.clone()).unwrap();
                let dc = p.rec_n.gamma.clone() * low.k.clone() * dn1m / dn.clone();
                let lowered = lvl.lower(&f, &low, &om[1]).unwrap();
                assert!(small(max_dev(&lowered, &om[0], &dc), 1e-25), "{name} lower {m} {n}");
                for k in 0..3 {
                    let r = grid_factorization_residual(&f, &lvl, &p, &om[k]).unwrap();
                    assert!(small(r, 1e-25), "{name} factorization {m} {n} k={k}");
                }
            }
        }
    }

    #[test]
    fn adjointness_holds_only_for_constant_k() {
        for (name, expect) in [("kravchuk", true), ("charlier", true), ("hahn", false), ("qhahn", false)] {
            let f = catalog_get::<Real>(name, &alloc::vec![]).unwrap();
            let lvl = GridLevel::new(&f, 1, 4).unwrap();
            let (o2, o3) = (lvl.omega(&f, 2).unwrap(), lvl.omega(&f, 3).unwrap());
            let p = pair(&f, 1, 2).unwrap();
            let lhs = lvl.inner(&f, &lvl.raise(&f, &p.up, &o2).unwrap(), &o3);
            let rhs = lvl.inner(&f, &o2, &lvl.lower(&f, &p.down, &o3).unwrap());
            assert_eq!(small(lhs.clone() - rhs.clone(), 1e-25), expect, "{name}");
            let ratio = lhs / rhs;
            assert!(small(ratio - p.up.k.clone() / p.down.k.clone(), 1e-25), "{name}");
        }
    }

    #[test]
    fn continuous_ladders_and_factorization() {
        for name in ["hermite", "laguerre", "jacobi"] {
            let f = catalog_get::<Real>(name, &alloc::vec![]).unwrap();
            for (m, n) in [(0i64, 2i64), (1, 3)] {
                let lvl = ContinuousLevel::new(&f, m, 6).unwrap();
                let om: Vec<Vec<Jet<Real>>> = (n - 1..=n + 2).map(|k| lvl.omega(&f, k).unwrap()).collect();
                let p = pair(&f, m, n).unwrap();
                let (dn, dn1) = (norm(&f, m, n).unwrap(), norm(&f, m, n + 1).unwrap());
                let up = p.rec_n.alpha.clone() * p.up.k.clone() * dn1 / dn;
                for (i, j) in om[1].iter().enumerate() {
                    let (v, _) = lvl.apply(&f, &p.up, true, i, j);
                    assert!(small(v - up.clone() * om[2][i].f.clone(), 1e-25), "{name} raise");
                }
                for k in 0..3 {
                    let r = continuous_factorization_residual(&f, &lvl, &p, &om[k]).unwrap();
                    assert!(small(r, 1e-25), "{name} factorization {m} {n} k={k}");
                }
            }
        }
    }
}
