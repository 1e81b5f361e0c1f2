//! Continuous dispersion-relation roots and the boundary stability functional.
//!
//! For `Re(s) > 0` the cubic `eps l^3 - alpha s l^2 + c l + s = 0` has exactly
//! one root with negative real part (`lambda1`) and two with positive real
//! part; `lambda1` drives the right transparent boundary condition and the
//! `H^1` stability functional.

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::roots::{cubic_roots_complex, horner, residual_scale};
use num_complex::Complex64;

/// The three roots at a fixed Laplace parameter `s`, labeled by real part
/// (ties broken by imaginary part ascending), so `lambda1` is the decaying
/// mode for `x -> +infinity`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuousRoots {
    pub lambda1: Complex64,
    pub lambda2: Complex64,
    pub lambda3: Complex64,
    pub s: Complex64,
}

impl ContinuousRoots {
    pub fn all(&self) -> [Complex64; 3] {
        [self.lambda1, self.lambda2, self.lambda3]
    }
}

fn dispersion_coeffs(s: Complex64, params: &ModelParams) -> [Complex64; 4] {
    // s + c l - alpha s l^2 + eps l^3, ascending
    [
        s,
        Complex64::new(params.c, 0.0),
        -Complex64::new(params.alpha, 0.0) * s,
        Complex64::new(params.eps, 0.0),
    ]
}

/// Roots of the dispersion cubic at `s`, labeled by real part.
///
/// For strictly `Re(s) > 0` the separation property is enforced: the
/// smallest-real-part root must not have a significantly positive real part.
pub fn cubic_roots(s: Complex64, params: &ModelParams) -> Result<ContinuousRoots> {
    params.validate()?;
    let coeffs = dispersion_coeffs(s, params);
    let mut r = cubic_roots_complex(coeffs[3], coeffs[2], coeffs[1], coeffs[0])?;
    r.sort_by(|a, b| {
        a.re.partial_cmp(&b.re)
            .unwrap()
            .then(a.im.partial_cmp(&b.im).unwrap())
    });
    for root in &r {
        let (p, _) = horner(&coeffs, *root);
        let bound = 1e-10 * (1.0 + s.norm()) * (1.0 + root.norm()).powi(3);
        if !(p.norm() <= bound) {
            return Err(Error::RootFinding(format!(
                "dispersion root residual {:.3e} exceeds bound {:.3e}",
                p.norm(),
                bound
            )));
        }
        let _ = residual_scale(&coeffs, *root);
    }
    if s.re > 0.0 && r[0].re >= 1e-12 {
        return Err(Error::RootSeparation(format!(
            "no root with negative real part at s = {s} (min Re = {:.3e})",
            r[0].re
        )));
    }
    Ok(ContinuousRoots {
        lambda1: r[0],
        lambda2: r[1],
        lambda3: r[2],
        s,
    })
}

/// Boundary value `lambda1(i xi)` as the limit from `Re(s) > 0`.
///
/// Evaluated at `s = eta + i xi` with `eta = 1e-8 max(1, |xi|)` and at
/// `eta/2`, Richardson-extrapolated to `eta = 0`; the two evaluations are
/// matched by continuity so the extrapolation follows one analytic branch.
pub fn boundary_lambda1(xi: f64, params: &ModelParams) -> Result<Complex64> {
    let eta = 1e-8 * xi.abs().max(1.0);
    let l_full = cubic_roots(Complex64::new(eta, xi), params)?.lambda1;
    let half = cubic_roots(Complex64::new(eta / 2.0, xi), params)?;
    let l_half = half
        .all()
        .into_iter()
        .min_by(|a, b| {
            (a - l_full)
                .norm()
                .partial_cmp(&(b - l_full).norm())
                .unwrap()
        })
        .unwrap();
    Ok(2.0 * l_half - l_full)
}

/// Stability functional
/// `I(xi) = c/2 + eps (Re(l1^2) - |l1|^2/2) - alpha Re(i xi l1)`
/// at the boundary value `l1 = lambda1(i xi)`. Nonnegative for all real `xi`.
pub fn stability_functional(xi: f64, params: &ModelParams) -> Result<f64> {
    let l1 = boundary_lambda1(xi, params)?;
    let l1sq = l1 * l1;
    let i_xi = Complex64::new(0.0, xi);
    Ok(params.c / 2.0 + params.eps * (l1sq.re - 0.5 * l1.norm_sqr())
        - params.alpha * (i_xi * l1).re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c64(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn cube_roots_of_minus_one() {
        let p = ModelParams::new(0.0, 0.0, 1.0).unwrap();
        let r = cubic_roots(c64(1.0, 0.0), &p).unwrap();
        assert!((r.lambda1 - c64(-1.0, 0.0)).norm() < 1e-12);
        assert!((r.lambda2 - c64(0.5, -(3.0_f64.sqrt()) / 2.0)).norm() < 1e-12);
        assert!((r.lambda3 - c64(0.5, 3.0_f64.sqrt() / 2.0)).norm() < 1e-12);
    }

    #[test]
    fn boundary_root_pure_kdv() {
        // lambda1(i xi) = xi^{1/3} e^{-5 i pi/6} for c = alpha = 0, eps = 1, xi > 0
        let p = ModelParams::new(0.0, 0.0, 1.0).unwrap();
        for xi in [0.3, 1.0, 7.5, 120.0] {
            let l1 = boundary_lambda1(xi, &p).unwrap();
            let expect = Complex64::from_polar(xi.powf(1.0 / 3.0), -5.0 * std::f64::consts::PI / 6.0);
            assert!(
                (l1 - expect).norm() < 1e-6 * (1.0 + expect.norm()),
                "xi = {xi}: {l1} vs {expect}"
            );
        }
    }

    /// Closed-form root formula (Cardano form with explicit zeta), searched
    /// over the three cube-root branch assignments; cross-checks the
    /// companion-eigensolve route.
    #[test]
    fn closed_form_cross_check() {
        let p = ModelParams::new(2.0, 1e-3, 1e-3).unwrap();
        let samples = [c64(1.0, 1.0), c64(0.5, -3.0), c64(4.0, 0.0), c64(0.2, 10.0)];
        for s in samples {
            let mine = cubic_roots(s, &p).unwrap().all();

            let alpha = p.alpha;
            let eps = p.eps;
            let cc = p.c;
            let pp = cc / eps - 3.0 * (alpha * s / (3.0 * eps)).powu(2);
            let q = s / eps + alpha * s * cc / (3.0 * eps * eps)
                - 2.0 * (alpha * s / (3.0 * eps)).powu(3);
            let zeta = 0.5 * (-q - (q * q + 4.0 / 27.0 * pp.powu(3)).sqrt());
            let j = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0);
            let base = zeta.powf(1.0 / 3.0);
            // all three branches of zeta^{1/3}
            let mut best = f64::INFINITY;
            for b in 0..3 {
                let z13 = base * j.powu(b);
                let mut roots = [Complex64::default(); 3];
                for (k, rk) in roots.iter_mut().enumerate() {
                    let w = j.powu(k as u32) * z13;
                    *rk = alpha * s / (3.0 * eps) + w - (cc / (3.0 * eps) - alpha * alpha * s * s / (9.0 * eps * eps)) / w;
                }
                // max over matched pairs
                let mut worst = 0.0_f64;
                for m in &mine {
                    let d = roots.iter().map(|r| (r - m).norm()).fold(f64::INFINITY, f64::min);
                    worst = worst.max(d);
                }
                best = best.min(worst);
            }
            assert!(best < 1e-7, "closed-form mismatch {best:.3e} at s = {s}");
        }
    }

    #[test]
    fn separation_randomized() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..1000 {
            let s = c64(rng.gen_range(1e-6..10.0), rng.gen_range(-10.0..10.0));
            let params = ModelParams::new(
                rng.gen_range(-3.0..3.0),
                if rng.gen_bool(0.3) { 0.0 } else { 10f64.powf(rng.gen_range(-5.0..-2.0)) },
                10f64.powf(rng.gen_range(-4.0..-1.0)),
            )
            .unwrap();
            let r = cubic_roots(s, &params).unwrap();
            let negs = r.all().iter().filter(|l| l.re < -1e-12).count();
            let poss = r.all().iter().filter(|l| l.re > 1e-12).count();
            assert_eq!((negs, poss), (1, 2), "s = {s}, params = {params:?}");
        }
    }

    #[test]
    fn stability_functional_pure_kdv_is_zero() {
        let p = ModelParams::new(0.0, 0.0, 1.0).unwrap();
        for xi in [-50.0, -1.0, 0.7, 3.0, 800.0] {
            let i = stability_functional(xi, &p).unwrap();
            assert!(i.abs() < 1e-8, "xi = {xi}: I = {i:.3e}");
        }
    }

    #[test]
    fn stability_functional_at_zero_frequency() {
        let p = ModelParams::new(1.0, 0.0, 1.0).unwrap();
        let i = stability_functional(0.0, &p).unwrap();
        assert!(i >= -1e-10, "I(0) = {i:.3e}");
        assert!(i.is_finite());
    }

    #[test]
    fn stability_touches_zero_for_negative_velocity() {
        // I = 0 exactly at xi = +-sqrt(-3 c eps / alpha^2) when c < 0
        let p = ModelParams::new(-1.0, 1e-3, 1e-3).unwrap();
        let xi_star = (-3.0 * p.c * p.eps / (p.alpha * p.alpha)).sqrt();
        for xi in [xi_star, -xi_star] {
            let i = stability_functional(xi, &p).unwrap();
            assert!(i.abs() < 1e-6, "xi = {xi}: I = {i:.3e}");
            assert!(i >= -1e-10);
        }
    }

    #[test]
    fn stability_nonnegative_randomized() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..25 {
            let params = ModelParams::new(
                rng.gen_range(-2.0..2.0),
                10f64.powf(rng.gen_range(-5.0..-2.0)),
                10f64.powf(rng.gen_range(-4.0..-1.0)),
            )
            .unwrap();
            for k in 0..60 {
                let xi = 10f64.powf(-2.0 + 4.0 * k as f64 / 59.0);
                for x in [xi, -xi] {
                    let i = stability_functional(x, &params).unwrap();
                    assert!(i >= -1e-10, "I({x}) = {i:.3e} for {params:?}");
                }
            }
        }
    }
}
