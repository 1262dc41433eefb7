//! Eigenvalues `λ_n`, shifted coefficients `τ_k`, their slopes `τ'_k`, and `μ_{mn}`.

use crate::error::{Error, Result};
use crate::family::FamilySpec;
use crate::lattice::Site;
use crate::poly::Poly;
use crate::scalar::Scalar;

/// `λ_n/[n] = −(ch((n−1)ω) τ' + ½[n−1] σ'')`, written so that it stays finite at `n = 0`.
pub fn lambda_over_bracket<S: Scalar>(fam: &FamilySpec<S>, n: i64) -> S {
    let lat = &fam.lattice;
    -(lat.ch(n - 1) * fam.tau_p() + lat.bracket(n - 1) * fam.sigma_pp() / S::from_i64(2))
}

/// `λ_n = −[n](ch((n−1)ω) τ' + ½[n−1] σ'')`; on ω = 0 lattices `−n(τ' + ½(n−1)σ'')`.
pub fn lambda<S: Scalar>(fam: &FamilySpec<S>, n: i64) -> S {
    fam.lattice.bracket(n) * lambda_over_bracket(fam, n)
}

/// `μ_{mn} = λ_n − λ_m`.
pub fn mu<S: Scalar>(fam: &FamilySpec<S>, m: i64, n: i64) -> S {
    lambda(fam, n) - lambda(fam, m)
}

/// `μ_{mn}` accumulated as `λ_n + Σ_{j<m} τ'_j`.
pub fn mu_accumulated<S: Scalar>(fam: &FamilySpec<S>, m: i64, n: i64) -> Result<S> {
    let mut acc = lambda(fam, n);
    for j in 0..m {
        acc = acc + tau_prime(fam, j)?;
    }
    Ok(acc)
}

/// `τ_k(x) = τ(x) + kσ'(x)` for continuous families.
pub fn tau_k_poly<S: Scalar>(fam: &FamilySpec<S>, k: i64) -> Poly<S> {
    fam.tau.add(&fam.sigma.derivative().scale(&S::from_i64(k)))
}

/// `τ_k(s) = (σ(s+k) − σ(s) + τ(s+k)Δx(s+k−½)) / Δx_{k−1}(s)` on a grid; continuous families
/// evaluate `τ + kσ'` at `x = s`. Valid for every integer `k`, including `k = −1`.
pub fn tau_k<S: Scalar>(fam: &FamilySpec<S>, k: i64, s: Site) -> Result<S> {
    if fam.is_continuous() {
        return Ok(tau_k_poly(fam, k).eval(&s.value()));
    }
    let lat = &fam.lattice;
    let sk = s.steps(k);
    let num = fam.sigma_at(sk) - fam.sigma_at(s) + fam.tau_at(sk) * lat.delta_mean_x(sk);
    let den = lat.dx_k(k - 1, s);
    if den.is_zero() {
        return Err(Error::DegenerateSite { site2: s.twice(), k: k - 1 });
    }
    Ok(num / den)
}

/// Slope `τ'_k` of `τ_k` with respect to `x_k(s)`.
pub fn tau_prime<S: Scalar>(fam: &FamilySpec<S>, k: i64) -> Result<S> {
    if fam.is_continuous() {
        return Ok(fam.tau_p() + S::from_i64(k) * fam.sigma_pp());
    }
    let (s0, s1) = (Site::int(fam.a + 1), Site::int(fam.a + 2));
    let lat = &fam.lattice;
    Ok((tau_k(fam, k, s1)? - tau_k(fam, k, s0)?) / (lat.x_k(k, s1) - lat.x_k(k, s0)))
}

/// Largest deviation of `τ_k(s)` from the straight line through its first two samples,
/// measured in `x_k(s)` over `count` sites starting at the support start.
pub fn tau_linearity_residual<S: Scalar>(fam: &FamilySpec<S>, k: i64, count: i64) -> Result<S> {
    let lat = &fam.lattice;
    let s0 = Site::int(fam.a + 1);
    let t0 = tau_k(fam, k, s0)?;
    let slope = tau_prime(fam, k)?;
    let mut worst = S::zero();
    for i in 0..count {
        let s = Site::int(fam.a + i);
        let line = t0.clone() + slope.clone() * (lat.x_k(k, s) - lat.x_k(k, s0));
        worst = S::max_abs(worst, tau_k(fam, k, s)? - line);
    }
    Ok(worst)
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
    fn eigenvalue_examples() {
        let h = catalog_get::<Rational>("hermite", &vec![]).unwrap();
        let c = catalog_get::<Rational>("charlier", &vec![("mu".to_string(), q(1, 1))]).unwrap();
        for n in 0..8 {
            assert_eq!(lambda(&h, n), q(2 * n, 1));
            assert_eq!(lambda(&c, n), q(n, 1));
        }
        assert_eq!(mu(&h, 1, 3), q(4, 1));
        assert_eq!(mu(&c, 0, 5), q(5, 1));
        assert_eq!(mu(&c, 4, 4), q(0, 1));
    }

    #[test]
    fn shifted_tau_examples() {
        let h = catalog_get::<Rational>("hermite", &vec![]).unwrap();
        assert_eq!(tau_k_poly(&h, 3), h.tau);
        let c = catalog_get::<Rational>("charlier", &vec![("mu".to_string(), q(7, 3))]).unwrap();
        assert_eq!(tau_k(&c, 1, Site::int(0)).unwrap(), q(7, 3));
        for name in SHIPPED {
            let f = catalog_get::<Rational>(name, &vec![]).unwrap();
            for s in 0..4 {
                let site = Site::int(f.a + s);
                assert_eq!(tau_k(&f, 0, site).unwrap(), f.tau_at(site), "{name}");
            }
        }
    }

    #[test]
    fn uniform_shift_matches_classical_form() {
        let k = catalog_get::<Rational>("hahn", &vec![]).unwrap();
        for m in 0..4 {
            for x in 0..6 {
                let s = Site::int(x);
                let classical =
                    k.tau_at(s.steps(m)) + k.sigma_at(s.steps(m)) - k.sigma_at(s);
                assert_eq!(tau_k(&k, m, s).unwrap(), classical);
            }
        }
    }

    #[test]
    fn two_paths_for_mu_and_linearity() {
        for name in SHIPPED {
            let f = catalog_get::<Rational>(name, &vec![]).unwrap();
            for n in 0..=12 {
                for m in 0..=n {
                    assert_eq!(mu(&f, m, n), mu_accumulated(&f, m, n).unwrap(), "{name} {m} {n}");
                }
            }
            if !f.is_continuous() {
                for k in -1..=6 {
                    assert!(tau_linearity_residual(&f, k, 10).unwrap().is_zero(), "{name} k={k}");
                }
            }
        }
    }

    #[test]
    fn q_to_one_continuity() {
        let pr = |q: Rational| {
            vec![
                ("alpha".to_string(), Rational::from_frac(1, 2)),
                ("beta".to_string(), Rational::from_frac(1, 1)),
                ("N".to_string(), Rational::from_frac(16, 1)),
                ("q".to_string(), q),
            ]
        };
        let qh = catalog_get::<Real>("qhahn", &pr(q(100_000_001, 100_000_000))).unwrap();
        let mut hp = pr(q(0, 1));
        hp.pop();
        let h = catalog_get::<Real>("hahn", &hp).unwrap();
        for n in 1..=12 {
            let (a, b) = (lambda(&qh, n), lambda(&h, n));
            assert!(((a - b.clone()) / b).abs().to_f64() < 1e-6, "n={n}");
        }
    }
}
