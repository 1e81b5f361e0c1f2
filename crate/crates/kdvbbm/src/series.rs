//! Truncated Laurent series in `z^{-1}` with Cauchy-product arithmetic.
//!
//! A series holds coefficients `c_0..c_N` of `sum_l c_l z^{-l}`. Everything
//! here is plain O(N^2) convolution arithmetic; fractional powers use the
//! logarithmic-derivative recurrence (`gamma G' F = G F'`) instead of
//! composition sums over integer partitions, which is algebraically the same
//! expansion at polynomial cost.

use crate::error::{Error, Result};
use num_complex::Complex64;

#[derive(Debug, Clone, PartialEq)]
pub struct LaurentSeries {
    pub coeffs: Vec<Complex64>,
    pub label: String,
}

impl LaurentSeries {
    pub fn new(coeffs: Vec<Complex64>, label: impl Into<String>) -> Self {
        LaurentSeries {
            coeffs,
            label: label.into(),
        }
    }

    pub fn constant(value: Complex64, n: usize, label: impl Into<String>) -> Self {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); n + 1];
        coeffs[0] = value;
        LaurentSeries::new(coeffs, label)
    }

    pub fn zero(n: usize, label: impl Into<String>) -> Self {
        LaurentSeries::new(vec![Complex64::new(0.0, 0.0); n + 1], label)
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Evaluates the truncated sum at `z` (Horner in `z^{-1}`).
    pub fn eval(&self, z: Complex64) -> Complex64 {
        let x = Complex64::new(1.0, 0.0) / z;
        let mut acc = Complex64::new(0.0, 0.0);
        for &c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn add(&self, other: &LaurentSeries) -> LaurentSeries {
        let n = self.coeffs.len().min(other.coeffs.len());
        let coeffs = (0..n).map(|i| self.coeffs[i] + other.coeffs[i]).collect();
        LaurentSeries::new(coeffs, format!("({} + {})", self.label, other.label))
    }

    pub fn sub(&self, other: &LaurentSeries) -> LaurentSeries {
        let n = self.coeffs.len().min(other.coeffs.len());
        let coeffs = (0..n).map(|i| self.coeffs[i] - other.coeffs[i]).collect();
        LaurentSeries::new(coeffs, format!("({} - {})", self.label, other.label))
    }

    pub fn scale(&self, k: Complex64) -> LaurentSeries {
        LaurentSeries::new(
            self.coeffs.iter().map(|c| c * k).collect(),
            self.label.clone(),
        )
    }

    /// Truncated Cauchy product, keeping `min` lengths.
    pub fn mul(&self, other: &LaurentSeries) -> LaurentSeries {
        let n = self.coeffs.len().min(other.coeffs.len());
        let mut coeffs = vec![Complex64::new(0.0, 0.0); n];
        for l in 0..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..=l {
                acc += self.coeffs[k] * other.coeffs[l - k];
            }
            coeffs[l] = acc;
        }
        LaurentSeries::new(coeffs, format!("({} * {})", self.label, other.label))
    }

    /// `self^gamma` with an explicitly chosen leading value `f0` (a branch of
    /// `c_0^gamma`). Requires `c_0 != 0`.
    pub fn pow_gamma(&self, gamma: f64, f0: Complex64, label: impl Into<String>) -> Result<LaurentSeries> {
        let g0 = self.coeffs[0];
        if g0.norm() == 0.0 {
            return Err(Error::KernelGeneration(
                "degenerate expansion point: leading series coefficient is zero".into(),
            ));
        }
        let n = self.coeffs.len();
        let mut f = vec![Complex64::new(0.0, 0.0); n];
        f[0] = f0;
        for l in 1..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 1..=l {
                let w = gamma * k as f64 - (l - k) as f64;
                acc += w * self.coeffs[k] * f[l - k];
            }
            f[l] = acc / (l as f64 * g0);
        }
        Ok(LaurentSeries::new(f, label))
    }

    /// Series reciprocal (`gamma = -1` with the principal seed).
    pub fn reciprocal(&self) -> Result<LaurentSeries> {
        let g0 = self.coeffs[0];
        if g0.norm() == 0.0 {
            return Err(Error::KernelGeneration(
                "cannot invert a series with zero leading coefficient".into(),
            ));
        }
        self.pow_gamma(-1.0, Complex64::new(1.0, 0.0) / g0, format!("1/({})", self.label))
    }

    pub fn real_coeffs(&self, tol: f64) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(self.coeffs.len());
        for (l, c) in self.coeffs.iter().enumerate() {
            if c.im.abs() > tol * (1.0 + c.re.abs()) {
                return Err(Error::KernelGeneration(format!(
                    "series `{}` coefficient {l} has imaginary residue {:.3e}",
                    self.label, c.im
                )));
            }
            out.push(c.re);
        }
        Ok(out)
    }
}

/// Sign of the binomial base `(1 -+ z^{-1})^gamma`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinomialSign {
    /// `(1 + z^{-1})^gamma`, coefficients `binom(gamma, p)`.
    Plus,
    /// `(1 - z^{-1})^gamma`, coefficients `(-1)^p binom(gamma, p)`.
    Minus,
}

/// Expansion of `(1 +- z^{-1})^gamma` by the stable ratio recurrence
/// `coeff_{p+1} = -+ coeff_p (gamma - p)/(p + 1)`, `coeff_0 = 1`.
pub fn binomial_series(gamma: f64, sign: BinomialSign, n: usize) -> LaurentSeries {
    let mut coeffs = vec![Complex64::new(0.0, 0.0); n + 1];
    let mut c = 1.0;
    coeffs[0] = Complex64::new(1.0, 0.0);
    for p in 0..n {
        c *= (gamma - p as f64) / (p as f64 + 1.0);
        let v = match sign {
            BinomialSign::Plus => c,
            BinomialSign::Minus => {
                if p % 2 == 0 {
                    -c
                } else {
                    c
                }
            }
        };
        coeffs[p + 1] = Complex64::new(v, 0.0);
    }
    let s = match sign {
        BinomialSign::Plus => '+',
        BinomialSign::Minus => '-',
    };
    LaurentSeries::new(coeffs, format!("(1{s}1/z)^{gamma}"))
}

/// Expansion of the Moebius symbol `p(z) = (1 - z^{-1})/(1 + z^{-1})`:
/// `1 + 2 sum_{l>=1} (-1)^l z^{-l}`.
pub fn moebius_series(n: usize) -> LaurentSeries {
    let mut coeffs = vec![Complex64::new(0.0, 0.0); n + 1];
    coeffs[0] = Complex64::new(1.0, 0.0);
    for (l, c) in coeffs.iter_mut().enumerate().skip(1) {
        *c = Complex64::new(if l % 2 == 0 { 2.0 } else { -2.0 }, 0.0);
    }
    LaurentSeries::new(coeffs, "p(z)")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c64(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn binomial_low_order_values() {
        // alpha_0 = beta_0 = 1 for any gamma
        for gamma in [1.0 / 3.0, -1.0 / 3.0, 2.0 / 3.0, 0.5, -1.0, -3.0] {
            let a = binomial_series(gamma, BinomialSign::Minus, 4);
            let b = binomial_series(gamma, BinomialSign::Plus, 4);
            assert_eq!(a.coeffs[0], c64(1.0));
            assert_eq!(b.coeffs[0], c64(1.0));
            // first-order coefficient is -+ gamma
            assert!((a.coeffs[1].re + gamma).abs() < 1e-15);
            assert!((b.coeffs[1].re - gamma).abs() < 1e-15);
        }
        // geometric series: (1 + x)^{-1} has coefficients (-1)^p
        let g = binomial_series(-1.0, BinomialSign::Plus, 8);
        for p in 0..=8 {
            let want = if p % 2 == 0 { 1.0 } else { -1.0 };
            assert!((g.coeffs[p].re - want).abs() < 1e-14);
        }
    }

    #[test]
    fn binomial_matches_direct_binomial() {
        // direct product formula binom(gamma, p) = prod (gamma - j)/(j + 1)
        let gamma = 1.0 / 3.0;
        let s = binomial_series(gamma, BinomialSign::Plus, 20);
        let mut direct = 1.0;
        for p in 0..=20 {
            assert!((s.coeffs[p].re - direct).abs() <= 1e-14 * direct.abs().max(1.0));
            direct *= (gamma - p as f64) / (p as f64 + 1.0);
        }
    }

    #[test]
    fn series_eval_matches_function() {
        // (1 - 1/z)^{1/3} at z = 2 vs direct real evaluation
        let s = binomial_series(1.0 / 3.0, BinomialSign::Minus, 200);
        let z = Complex64::new(2.0, 0.0);
        let got = s.eval(z);
        let want = 0.5_f64.powf(1.0 / 3.0);
        assert!((got - c64(want)).norm() < 1e-12);
    }

    #[test]
    fn moebius_matches_ratio() {
        let n = 220;
        let p = moebius_series(n);
        let ratio = binomial_series(1.0, BinomialSign::Minus, n)
            .mul(&binomial_series(-1.0, BinomialSign::Plus, n));
        for l in 0..=n {
            assert!((p.coeffs[l] - ratio.coeffs[l]).norm() < 1e-13);
        }
        let z = Complex64::new(2.0, 0.5);
        let want = (z - 1.0) / (z + 1.0);
        assert!((p.eval(z) - want).norm() < 1e-12);
    }

    #[test]
    fn pow_gamma_consistent_with_binomial() {
        // ((1 + x))^{1/2} via pow_gamma on the degree-1 polynomial series
        let mut base = LaurentSeries::zero(30, "1 + 1/z");
        base.coeffs[0] = c64(1.0);
        base.coeffs[1] = c64(1.0);
        let p = base.pow_gamma(0.5, c64(1.0), "sqrt").unwrap();
        let b = binomial_series(0.5, BinomialSign::Plus, 30);
        for l in 0..=30 {
            assert!((p.coeffs[l] - b.coeffs[l]).norm() < 1e-13);
        }
    }

    #[test]
    fn pow_gamma_inverse_roundtrip() {
        let s = moebius_series(40);
        let inv = s.reciprocal().unwrap();
        let prod = s.mul(&inv);
        assert!((prod.coeffs[0] - c64(1.0)).norm() < 1e-13);
        for l in 1..=40 {
            assert!(prod.coeffs[l].norm() < 1e-11, "index {l}");
        }
    }
}
