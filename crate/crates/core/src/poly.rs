//! Dense univariate polynomials and small dense linear solves.

use alloc::vec;
use alloc::vec::Vec;

use crate::scalar::Scalar;

/// Polynomial with coefficients in ascending powers.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly<S> {
    pub coeffs: Vec<S>,
}

impl<S: Scalar> Poly<S> {
    pub fn new(mut coeffs: Vec<S>) -> Self {
        while coeffs.len() > 1 && coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(S::zero());
        }
        Poly { coeffs }
    }

    pub fn zero() -> Self {
        Poly::new(vec![S::zero()])
    }

    pub fn constant(c: S) -> Self {
        Poly::new(vec![c])
    }

    /// The monomial `x`.
    pub fn x() -> Self {
        Poly::new(vec![S::zero(), S::one()])
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// Coefficient of `x^k` (zero past the end).
    pub fn coeff(&self, k: usize) -> S {
        self.coeffs.get(k).cloned().unwrap_or_else(S::zero)
    }

    pub fn eval(&self, x: &S) -> S {
        let mut acc = S::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x.clone() + c.clone();
        }
        acc
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() <= 1 {
            return Poly::zero();
        }
        Poly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c.clone() * S::from_i64(k as i64))
                .collect(),
        )
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        Poly::new((0..n).map(|k| self.coeff(k) + other.coeff(k)).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        Poly::new((0..n).map(|k| self.coeff(k) - other.coeff(k)).collect())
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = vec![S::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] = out[i + j].clone() + a.clone() * b.clone();
            }
        }
        Poly::new(out)
    }

    pub fn scale(&self, c: &S) -> Self {
        Poly::new(self.coeffs.iter().map(|a| a.clone() * c.clone()).collect())
    }

    /// `p(x + h)`.
    pub fn shift(&self, h: &S) -> Self {
        let mut acc = Poly::zero();
        let lin = Poly::new(vec![h.clone(), S::one()]);
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(&lin).add(&Poly::constant(c.clone()));
        }
        acc
    }

    /// Largest coefficient magnitude.
    pub fn max_abs_coeff(&self) -> S {
        self.coeffs.iter().fold(S::zero(), |m, c| S::max_abs(m, c.clone()))
    }
}

/// Solves `A x = b` by Gaussian elimination with partial pivoting on magnitude.
/// Returns `None` when the system is singular.
pub fn solve<S: Scalar>(mut a: Vec<Vec<S>>, mut b: Vec<S>) -> Option<Vec<S>> {
    let n = b.len();
    for col in 0..n {
        let mut piv = None;
        let mut best = S::zero();
        for (row, r) in a.iter().enumerate().skip(col) {
            let m = r[col].abs();
            if !r[col].is_zero() && (piv.is_none() || m > best) {
                best = m;
                piv = Some(row);
                if S::EXACT {
                    break;
                }
            }
        }
        let p = piv?;
        a.swap(col, p);
        b.swap(col, p);
        for row in col + 1..n {
            if a[row][col].is_zero() {
                continue;
            }
            let f = a[row][col].clone() / a[col][col].clone();
            for k in col..n {
                let t = a[col][k].clone() * f.clone();
                a[row][k] = a[row][k].clone() - t;
            }
            let t = b[col].clone() * f;
            b[row] = b[row].clone() - t;
        }
    }
    let mut x = vec![S::zero(); n];
    for row in (0..n).rev() {
        let mut acc = b[row].clone();
        for k in row + 1..n {
            acc = acc - a[row][k].clone() * x[k].clone();
        }
        x[row] = acc / a[row][row].clone();
    }
    Some(x)
}

/// Coefficients (ascending powers of `x`) of the interpolating polynomial through `(xs, ys)`,
/// computed with Newton divided differences.
pub fn interpolate<S: Scalar>(xs: &[S], ys: &[S]) -> Option<Poly<S>> {
    let n = xs.len();
    let mut dd: Vec<S> = ys.to_vec();
    for j in 1..n {
        for i in (j..n).rev() {
            let den = xs[i].clone() - xs[i - j].clone();
            if den.is_zero() {
                return None;
            }
            dd[i] = (dd[i].clone() - dd[i - 1].clone()) / den;
        }
    }
    let mut p = Poly::constant(dd[n - 1].clone());
    for i in (0..n - 1).rev() {
        let lin = Poly::new(vec![-xs[i].clone(), S::one()]);
        p = p.mul(&lin).add(&Poly::constant(dd[i].clone()));
    }
    Some(p)
}
