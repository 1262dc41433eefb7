//! Double-exponential quadrature: tanh-sinh on `[−1, 1]`, exp-sinh on `[0, ∞)` and sinh-sinh on
//! the real line.
//!
//! Integrands receive `(x, x − lo, hi − x)`, where the two distances are computed from the
//! substitution rather than by subtraction, so endpoint factors such as `(1 − x)^α` keep full
//! relative accuracy.

use alloc::format;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rule {
    /// `∫_{−1}^{1}`.
    TanhSinh,
    /// `∫_0^∞`.
    ExpSinh,
    /// `∫_{−∞}^{∞}`.
    SinhSinh,
}

struct Node<S> {
    x: S,
    from_lo: S,
    to_hi: S,
    w: S,
}

fn unsupported() -> Error {
    Error::FieldUnsupported("quadrature needs exp and π".into())
}

fn node<S: Scalar>(rule: Rule, t: &S, half_pi: &S) -> Result<Node<S>> {
    let two = S::from_i64(2);
    let et = t.exp().ok_or_else(unsupported)?;
    let eti = S::one() / et.clone();
    let sh = (et.clone() - eti.clone()) / two.clone();
    let chh = (et + eti) / two.clone();
    let u = half_pi.clone() * sh;
    let du = half_pi.clone() * chh;
    let eu = u.exp().ok_or_else(unsupported)?;
    let eui = S::one() / eu.clone();
    Ok(match rule {
        Rule::TanhSinh => {
            // 1 − tanh u = 2/(1 + e^{2u}), 1 + tanh u = 2/(1 + e^{−2u}).
            let e2 = eu.clone() * eu.clone();
            let e2i = eui.clone() * eui.clone();
            let to_hi = two.clone() / (S::one() + e2.clone());
            let from_lo = two.clone() / (S::one() + e2i);
            let cu = (eu + eui) / two;
            Node { x: from_lo.clone() - S::one(), from_lo, to_hi, w: du / (cu.clone() * cu) }
        }
        Rule::ExpSinh => Node { x: eu.clone(), from_lo: eu.clone(), to_hi: S::zero(), w: eu * du },
        Rule::SinhSinh => {
            let x = (eu.clone() - eui.clone()) / two.clone();
            let c = (eu + eui) / two;
            Node { x, from_lo: S::zero(), to_hi: S::zero(), w: du * c }
        }
    })
}

/// Sum of `w f` over the nodes `t = (2j+1)h` (or every `t = jh` when `all`), walking outwards
/// from the centre until the terms are negligible against `scale`.
fn level_sum<S: Scalar, F: Fn(&S, &S, &S) -> S>(
    rule: Rule,
    f: &F,
    h: &S,
    all: bool,
    scale: &S,
    half_pi: &S,
) -> Result<S> {
    let tiny = S::epsilon() * S::epsilon();
    let mut sum = S::zero();
    if all {
        let nd = node(rule, &S::zero(), half_pi)?;
        sum = nd.w.clone() * f(&nd.x, &nd.from_lo, &nd.to_hi);
    }
    for sign in [1i64, -1] {
        let mut small = 0;
        let mut j: i64 = if all { 1 } else { 0 };
        loop {
            let k = if all { j } else { 2 * j + 1 };
            let t = S::from_i64(sign * k) * h.clone();
            if t.abs().to_f64() > 7.0 {
                break;
            }
            let nd = node(rule, &t, half_pi)?;
            if nd.w.is_zero() || (rule == Rule::TanhSinh && (nd.to_hi.is_zero() || nd.from_lo.is_zero())) {
                break;
            }
            let term = nd.w * f(&nd.x, &nd.from_lo, &nd.to_hi);
            let mag = term.abs();
            sum = sum + term;
            let bound = S::max_abs(scale.clone(), sum.clone()) * tiny.clone();
            small = if mag <= bound { small + 1 } else { 0 };
            if small >= 3 {
                break;
            }
            j += 1;
        }
    }
    Ok(sum)
}

/// Integrates `f` with the chosen rule to relative tolerance `tol`, halving the step until two
/// successive estimates agree.
pub fn integrate<S: Scalar, F: Fn(&S, &S, &S) -> S>(rule: Rule, f: F, tol: &S) -> Result<S> {
    let half_pi = S::pi().ok_or_else(unsupported)? / S::from_i64(2);
    let mut h = S::from_frac(1, 2);
    let mut acc = level_sum(rule, &f, &h, true, &S::zero(), &half_pi)?;
    let mut est = acc.clone() * h.clone();
    for _ in 0..14 {
        h = h / S::from_i64(2);
        acc = acc.clone() + level_sum(rule, &f, &h, false, &acc, &half_pi)?;
        let next = acc.clone() * h.clone();
        let diff = (next.clone() - est).abs();
        est = next;
        if diff <= tol.clone() * S::max_abs(est.clone(), S::epsilon()) {
            return Ok(est);
        }
    }
    Err(Error::TruncationNotConverged(format!(
        "double-exponential rule {rule:?} did not reach the tolerance"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Real;

    fn tol() -> Real {
        Real::from_f64(1e-30)
    }

    fn close(a: Real, b: Real) -> bool {
        ((a - b.clone()) / b).abs().to_f64() < 1e-28
    }

    #[test]
    fn gaussian_and_exponential() {
        let pi = Real::pi().unwrap();
        let g = integrate(Rule::SinhSinh, |x: &Real, _: &Real, _: &Real| (-(x.clone() * x.clone())).exp().unwrap(), &tol()).unwrap();
        assert!(close(g, pi.sqrt().unwrap()));
        let e = integrate(Rule::ExpSinh, |x: &Real, _: &Real, _: &Real| (x.clone() * x.clone()) * (-x.clone()).exp().unwrap(), &tol()).unwrap();
        assert!(close(e, Real::from_i64(2)));
    }

    #[test]
    fn endpoint_singularities() {
        // ∫_{−1}^{1} (1 − x)^{−1/2} dx = 2√2.
        let half = Real::from_frac(1, 2);
        let v = integrate(Rule::TanhSinh, |_: &Real, _: &Real, hi: &Real| hi.powf(&(-half.clone())).unwrap(), &tol()).unwrap();
        assert!(close(v, Real::from_i64(8).sqrt().unwrap()));
        // ∫_0^∞ x^{−1/2} e^{−x} dx = √π.
        let v = integrate(Rule::ExpSinh, |x: &Real, _: &Real, _: &Real| x.powf(&(-half.clone())).unwrap() * (-x.clone()).exp().unwrap(), &tol()).unwrap();
        assert!(close(v, Real::pi().unwrap().sqrt().unwrap()));
    }
}
