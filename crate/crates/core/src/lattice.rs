//! Lattice laws `x(s)`, their half-step shifts `x_k(s) = x(s + k/2)`, the q-bracket, and
//! the forward, backward and mean difference operators on half-integer grids.

use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A point `s` of a half-integer grid, stored as `2s`.
#[derive(Copy, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Site(i64);

impl Site {
    /// The integer site `s`.
    pub const fn int(s: i64) -> Self {
        Site(2 * s)
    }
    /// The site `twice / 2`.
    pub const fn from_twice(twice: i64) -> Self {
        Site(twice)
    }
    pub const fn twice(self) -> i64 {
        self.0
    }
    /// `s + k/2`.
    pub const fn halves(self, k: i64) -> Self {
        Site(self.0 + k)
    }
    /// `s + k`.
    pub const fn steps(self, k: i64) -> Self {
        Site(self.0 + 2 * k)
    }
    pub fn is_integer(self) -> bool {
        self.0 % 2 == 0
    }
    /// Integer part for integer sites.
    pub fn as_int(self) -> i64 {
        self.0.div_euclid(2)
    }
    pub fn value<S: Scalar>(self) -> S {
        S::from_frac(self.0, 2)
    }
}

impl fmt::Display for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 % 2 == 0 {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

#[derive(Copy, Clone, PartialEq, Eq, Debug)]
pub enum LatticeKind {
    Continuous,
    Linear,
    Quadratic,
    QExponential,
}

impl LatticeKind {
    pub fn name(self) -> &'static str {
        match self {
            LatticeKind::Continuous => "continuous",
            LatticeKind::Linear => "linear",
            LatticeKind::Quadratic => "quadratic",
            LatticeKind::QExponential => "q-exponential",
        }
    }

    pub fn is_nonuniform(self) -> bool {
        matches!(self, LatticeKind::Quadratic | LatticeKind::QExponential)
    }
}

/// A grid law. `Quadratic` is `c1 s² + c2 s + c3`; `QExponential` is `c1 q^s + c2 q^{-s} + c3`
/// with `q = r²` (the root `r = e^ω` is what the evaluator uses, so half-integer shifts stay in
/// the field). `Linear` and `Continuous` are `x(s) = s`.
#[derive(Clone, Debug, PartialEq)]
pub struct Lattice<S> {
    pub kind: LatticeKind,
    pub c1: S,
    pub c2: S,
    pub c3: S,
    root: S,
}

impl<S: Scalar> Lattice<S> {
    pub fn continuous() -> Self {
        Self::plain(LatticeKind::Continuous)
    }

    pub fn linear() -> Self {
        Self::plain(LatticeKind::Linear)
    }

    fn plain(kind: LatticeKind) -> Self {
        Lattice { kind, c1: S::zero(), c2: S::one(), c3: S::zero(), root: S::one() }
    }

    pub fn quadratic(c1: S, c2: S, c3: S) -> Result<Self> {
        if c1.is_zero() {
            return Err(Error::ParameterOutOfRange("quadratic lattice needs c1 ≠ 0".into()));
        }
        Ok(Lattice { kind: LatticeKind::Quadratic, c1, c2, c3, root: S::one() })
    }

    /// q-exponential lattice from `q` itself; fails when `√q` is not in the field.
    pub fn q_exponential(c1: S, c2: S, c3: S, q: S) -> Result<Self> {
        let r = q
            .sqrt()
            .ok_or_else(|| Error::FieldUnsupported("√q for the q-exponential lattice".into()))?;
        Self::q_exponential_root(c1, c2, c3, r)
    }

    /// q-exponential lattice from `r = √q`.
    pub fn q_exponential_root(c1: S, c2: S, c3: S, r: S) -> Result<Self> {
        if r <= S::zero() || r == S::one() {
            return Err(Error::ParameterOutOfRange("q must be positive and different from 1".into()));
        }
        if c1.is_zero() && c2.is_zero() {
            return Err(Error::ParameterOutOfRange("q-exponential lattice needs c1 or c2 ≠ 0".into()));
        }
        Ok(Lattice { kind: LatticeKind::QExponential, c1, c2, c3, root: r })
    }

    /// `q` (one for the ω = 0 lattices).
    pub fn q(&self) -> S {
        self.root.clone() * self.root.clone()
    }

    /// `√q = e^ω`.
    pub fn root(&self) -> S {
        self.root.clone()
    }

    /// `ω = ½ ln q`, when the field has logarithms.
    pub fn omega(&self) -> Option<S> {
        if self.kind == LatticeKind::QExponential {
            self.root.ln()
        } else {
            Some(S::zero())
        }
    }

    /// `x(s)`.
    pub fn x(&self, s: Site) -> S {
        match self.kind {
            LatticeKind::Continuous | LatticeKind::Linear => s.value(),
            LatticeKind::Quadratic => {
                let v: S = s.value();
                self.c1.clone() * v.clone() * v.clone() + self.c2.clone() * v + self.c3.clone()
            }
            LatticeKind::QExponential => {
                let z = self.root.powi(s.twice());
                let zi = S::one() / z.clone();
                self.c1.clone() * z + self.c2.clone() * zi + self.c3.clone()
            }
        }
    }

    /// Cancellation factor of `x(s)`: the sum of the magnitudes of its terms over `max(|x(s)|, 1)`.
    /// One on the uniform lattices.
    pub fn cancellation(&self, s: Site) -> S {
        if self.kind != LatticeKind::QExponential {
            return S::one();
        }
        let z = self.root.powi(s.twice());
        let zi = S::one() / z.clone();
        let mag = (self.c1.clone() * z).abs() + (self.c2.clone() * zi).abs() + self.c3.abs();
        mag / S::max_abs(self.x(s), S::one())
    }

    /// `x_k(s) = x(s + k/2)`.
    pub fn x_k(&self, k: i64, s: Site) -> S {
        self.x(s.halves(k))
    }

    /// `Δx_k(s) = x_k(s+1) − x_k(s)`.
    pub fn dx_k(&self, k: i64, s: Site) -> S {
        self.x_k(k, s.steps(1)) - self.x_k(k, s)
    }

    /// `∇x_k(s) = x_k(s) − x_k(s−1)`.
    pub fn nabla_x_k(&self, k: i64, s: Site) -> S {
        self.x_k(k, s) - self.x_k(k, s.steps(-1))
    }

    /// `δx(s) = x(s+½) − x(s−½)`.
    pub fn delta_mean_x(&self, s: Site) -> S {
        self.x(s.halves(1)) - self.x(s.halves(-1))
    }

    /// The bracket `[n] = sh(nω)/sh(ω)`; equal to `n` on the ω = 0 lattices. Defined for all
    /// integers (`[−n] = −[n]`).
    pub fn bracket(&self, n: i64) -> S {
        if self.kind != LatticeKind::QExponential {
            return S::from_i64(n);
        }
        let r = &self.root;
        (r.powi(n) - r.powi(-n)) / (r.clone() - S::one() / r.clone())
    }

    /// `ch(nω)`; one on the ω = 0 lattices.
    pub fn ch(&self, n: i64) -> S {
        if self.kind != LatticeKind::QExponential {
            return S::one();
        }
        let r = &self.root;
        (r.powi(n) + r.powi(-n)) / S::from_i64(2)
    }

    /// `[n]! = [1][2]…[n]`.
    pub fn bracket_factorial(&self, n: i64) -> S {
        (1..=n).fold(S::one(), |acc, j| acc * self.bracket(j))
    }

    /// Residual of `δx(s+n/2) − δx(s−n/2) = [n](δx(s+½) − δx(s−½))`.
    pub fn bracket_identity_residual(&self, s: Site, n: i64) -> S {
        let lhs = self.delta_mean_x(s.halves(n)) - self.delta_mean_x(s.halves(-n));
        let rhs = self.bracket(n) * (self.delta_mean_x(s.halves(1)) - self.delta_mean_x(s.halves(-1)));
        lhs - rhs
    }

    /// Residual of `½(δx(s+n/2) + δx(s−n/2)) = ch(nω) δx(s)`.
    pub fn mean_identity_residual(&self, s: Site, n: i64) -> S {
        let lhs = (self.delta_mean_x(s.halves(n)) + self.delta_mean_x(s.halves(-n))) / S::from_i64(2);
        lhs - self.ch(n) * self.delta_mean_x(s)
    }
}

/// Values of a function on the grid `origin, origin+1, …`, paired with the lattice `x_shift`.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction<S> {
    pub origin: Site,
    pub values: Vec<S>,
    pub shift: i64,
}

impl<S: Scalar> GridFunction<S> {
    pub fn new(origin: Site, values: Vec<S>, shift: i64) -> Self {
        GridFunction { origin, values, shift }
    }

    /// Samples `f` at `origin, origin+1, …` (`len` points).
    pub fn sample(origin: Site, len: usize, shift: i64, f: impl Fn(Site) -> S) -> Self {
        GridFunction { origin, values: (0..len as i64).map(|i| f(origin.steps(i))).collect(), shift }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn site(&self, i: usize) -> Site {
        self.origin.steps(i as i64)
    }

    pub fn sites(&self) -> impl Iterator<Item = Site> + '_ {
        (0..self.values.len()).map(|i| self.site(i))
    }

    /// Value at `s`, if `s` lies in the window.
    pub fn at(&self, s: Site) -> Option<&S> {
        let d = s.twice() - self.origin.twice();
        if d < 0 || d % 2 != 0 {
            return None;
        }
        self.values.get((d / 2) as usize)
    }

    fn need_two(&self) -> Result<()> {
        if self.values.len() < 2 {
            Err(Error::WindowTooSmall { needed: 2, got: self.values.len() })
        } else {
            Ok(())
        }
    }

    fn diffs(&self) -> Vec<S> {
        self.values.windows(2).map(|w| w[1].clone() - w[0].clone()).collect()
    }

    /// `Δf(s) = f(s+1) − f(s)`; origin unchanged.
    pub fn delta_fwd(&self) -> Result<Self> {
        self.need_two()?;
        Ok(GridFunction { origin: self.origin, values: self.diffs(), shift: self.shift })
    }

    /// `∇f(s) = f(s) − f(s−1)`; origin moves up by one.
    pub fn delta_bwd(&self) -> Result<Self> {
        self.need_two()?;
        Ok(GridFunction { origin: self.origin.steps(1), values: self.diffs(), shift: self.shift })
    }

    /// `δf(s) = f(s+½) − f(s−½)`; origin moves up by one half.
    pub fn delta_mean(&self) -> Result<Self> {
        self.need_two()?;
        Ok(GridFunction { origin: self.origin.halves(1), values: self.diffs(), shift: self.shift + 1 })
    }

    /// `Δf(s)/Δx_k(s)`; the result is paired with `x_{k+1}`.
    pub fn div_diff(&self, lat: &Lattice<S>, k: i64) -> Result<Self> {
        let d = self.delta_fwd()?;
        let mut values = Vec::with_capacity(d.values.len());
        for (i, v) in d.values.into_iter().enumerate() {
            let s = self.site(i);
            let dx = lat.dx_k(k, s);
            if dx.is_zero() {
                return Err(Error::DegenerateSite { site2: s.twice(), k });
            }
            values.push(v / dx);
        }
        Ok(GridFunction { origin: self.origin, values, shift: k + 1 })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{Rational, Real};

    fn q(p: i64, d: i64) -> Rational {
        Rational::from_frac(p, d)
    }

    #[test]
    fn evaluation_examples() {
        let lin = Lattice::<Rational>::linear();
        assert_eq!(lin.x(Site::int(3)), q(3, 1));
        assert_eq!(lin.x_k(1, Site::int(0)), q(1, 2));
        let quad = Lattice::quadratic(q(1, 1), q(1, 1), q(0, 1)).unwrap();
        assert_eq!(quad.x(Site::int(2)), q(6, 1));
        assert_eq!(quad.x_k(2, Site::int(1)), q(6, 1));
        let qe = Lattice::q_exponential(q(1, 1), q(0, 1), q(0, 1), q(4, 1)).unwrap();
        assert_eq!(qe.x(Site::int(1)), q(4, 1));
        assert_eq!(qe.x(Site::from_twice(1)), q(2, 1));
        assert_eq!(qe.bracket(2), q(5, 2));
        assert_eq!(quad.bracket(7), q(7, 1));
        assert_eq!(qe.bracket(1), q(1, 1));
        assert!(Lattice::q_exponential(q(1, 1), q(0, 1), q(0, 1), q(2, 1)).is_err());
    }

    #[test]
    fn lattice_identities_exact() {
        let lats = [
            Lattice::quadratic(q(1, 1), q(1, 1), q(0, 1)).unwrap(),
            Lattice::quadratic(q(3, 2), q(-1, 3), q(5, 1)).unwrap(),
            Lattice::q_exponential_root(q(2, 1), q(-1, 3), q(1, 7), q(1, 2)).unwrap(),
            Lattice::linear(),
        ];
        for lat in &lats {
            for n in 1..=12 {
                for s2 in -10..10 {
                    let s = Site::from_twice(s2);
                    assert!(lat.bracket_identity_residual(s, n).is_zero());
                    assert!(lat.mean_identity_residual(s, n).is_zero());
                }
            }
        }
    }

    #[test]
    fn bracket_tends_to_n() {
        let eps = 1e-6;
        let r = Real::from_f64(1.0 + eps).sqrt().unwrap();
        let lat = Lattice::q_exponential_root(Real::one(), Real::zero(), Real::zero(), r).unwrap();
        for n in 1..=12i64 {
            let d = (lat.bracket(n) - Real::from_i64(n)).abs().to_f64();
            assert!(d <= (n * n * n) as f64 * eps, "n={n} d={d}");
        }
    }

    #[test]
    fn difference_operators() {
        let f = GridFunction::sample(Site::int(-2), 6, 0, |s| {
            let v: Rational = s.value();
            v.clone() * v
        });
        let c = GridFunction::sample(Site::int(0), 4, 0, |_| q(7, 1));
        assert!(c.delta_fwd().unwrap().values.iter().all(|v| v.is_zero()));
        let id = GridFunction::sample(Site::int(0), 4, 0, |s| s.value::<Rational>());
        assert!(id.delta_fwd().unwrap().values.iter().all(|v| *v == q(1, 1)));
        let dd = f.delta_mean().unwrap().delta_mean().unwrap();
        assert_eq!(dd.at(Site::int(0)), Some(&q(2, 1)));
        let a = f.delta_fwd().unwrap().delta_bwd().unwrap();
        let b = f.delta_bwd().unwrap().delta_fwd().unwrap();
        assert_eq!(a, b);
        let m = f.delta_mean().unwrap();
        let fwd = f.delta_fwd().unwrap();
        for s in m.sites() {
            assert_eq!(m.at(s), fwd.at(s.halves(-1)));
        }
        assert!(GridFunction::new(Site::int(0), alloc::vec![q(1, 1)], 0).delta_fwd().is_err());
    }

    #[test]
    fn divided_difference() {
        let quad = Lattice::quadratic(q(1, 1), q(1, 1), q(0, 1)).unwrap();
        let x2 = GridFunction::sample(Site::int(0), 5, 0, |s| {
            let x = quad.x(s);
            x.clone() * x
        });
        assert_eq!(x2.div_diff(&quad, 0).unwrap().at(Site::int(1)), Some(&q(8, 1)));
        let lin = Lattice::<Rational>::linear();
        let g = GridFunction::sample(Site::int(0), 5, 0, |s| s.value::<Rational>().powi(3));
        assert_eq!(g.div_diff(&lin, 3).unwrap().values, g.delta_fwd().unwrap().values);
        let xs = GridFunction::sample(Site::int(0), 5, 0, |s| quad.x(s));
        assert!(xs.div_diff(&quad, 0).unwrap().values.iter().all(|v| *v == q(1, 1)));
        let vertex = GridFunction::sample(Site::int(-2), 4, 0, |s| quad.x(s));
        assert!(matches!(vertex.div_diff(&quad, 0), Err(Error::DegenerateSite { .. })));
    }
}
