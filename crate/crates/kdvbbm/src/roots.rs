//! Complex polynomial roots via companion-matrix eigensolve plus Newton polish.
//!
//! Closed-form cubic/quartic formulas require cube-root branch management,
//! which is exactly the error-prone step; the companion route is branch-free.

use crate::error::{Error, Result};
use nalgebra::DMatrix;
use num_complex::Complex64;

/// Evaluates `p(x)` and `p'(x)` by Horner, coefficients ascending
/// (`coeffs[k]` multiplies `x^k`).
pub fn horner(coeffs: &[Complex64], x: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        dp = dp * x + p;
        p = p * x + c;
    }
    (p, dp)
}

/// Backward-error scale `sum_k |c_k| |x|^k`; a residual below
/// `~1e-14 * scale` is as good as double precision allows.
pub fn residual_scale(coeffs: &[Complex64], x: Complex64) -> f64 {
    let ax = x.norm();
    let mut s = 0.0;
    let mut pw = 1.0;
    for c in coeffs {
        s += c.norm() * pw;
        pw *= ax;
    }
    s.max(f64::MIN_POSITIVE)
}

/// All roots of a polynomial with ascending complex coefficients.
///
/// The leading coefficient must be nonzero. Roots are polished with a few
/// Newton steps and returned unordered.
pub fn polynomial_roots(coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
    let n = coeffs.len().saturating_sub(1);
    if n == 0 {
        return Err(Error::RootFinding("degree-zero polynomial".into()));
    }
    let lead = coeffs[n];
    if lead.norm() == 0.0 {
        return Err(Error::RootFinding("zero leading coefficient".into()));
    }
    let monic: Vec<Complex64> = coeffs[..n].iter().map(|c| c / lead).collect();

    // Companion matrix: subdiagonal ones, last column -monic coefficients.
    let mut m = DMatrix::<Complex64>::zeros(n, n);
    for i in 1..n {
        m[(i, i - 1)] = Complex64::new(1.0, 0.0);
    }
    for i in 0..n {
        m[(i, n - 1)] = -monic[i];
    }
    let eig = m
        .eigenvalues()
        .ok_or_else(|| Error::RootFinding("companion eigensolve did not converge".into()))?;

    let mut roots: Vec<Complex64> = eig.iter().copied().collect();
    for r in roots.iter_mut() {
        *r = newton_polish(coeffs, *r);
    }

    for &r in &roots {
        let (p, _) = horner(coeffs, r);
        let scale = residual_scale(coeffs, r);
        if !(p.norm() <= 1e-10 * scale) {
            return Err(Error::RootFinding(format!(
                "polished root {r} has residual {:.3e} (scale {:.3e})",
                p.norm(),
                scale
            )));
        }
    }
    Ok(roots)
}

fn newton_polish(coeffs: &[Complex64], start: Complex64) -> Complex64 {
    let mut x = start;
    for _ in 0..4 {
        let (p, dp) = horner(coeffs, x);
        let scale = residual_scale(coeffs, x);
        if p.norm() <= 1e-16 * scale {
            break;
        }
        if dp.norm() <= f64::MIN_POSITIVE * 1e4 {
            break; // nearly multiple root; leave the eigenvalue as is
        }
        let step = p / dp;
        if !step.re.is_finite() || !step.im.is_finite() {
            break;
        }
        x -= step;
    }
    x
}

/// Roots of `c3 x^3 + c2 x^2 + c1 x + c0`.
pub fn cubic_roots_complex(
    c3: Complex64,
    c2: Complex64,
    c1: Complex64,
    c0: Complex64,
) -> Result<[Complex64; 3]> {
    let v = polynomial_roots(&[c0, c1, c2, c3])?;
    Ok([v[0], v[1], v[2]])
}

/// Roots of `c4 x^4 + c3 x^3 + c2 x^2 + c1 x + c0`.
pub fn quartic_roots_complex(
    c4: Complex64,
    c3: Complex64,
    c2: Complex64,
    c1: Complex64,
    c0: Complex64,
) -> Result<[Complex64; 4]> {
    let v = polynomial_roots(&[c0, c1, c2, c3, c4])?;
    Ok([v[0], v[1], v[2], v[3]])
}
