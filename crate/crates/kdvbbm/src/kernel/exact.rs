//! Exact DTBC kernels by the root-relation recurrence.
//!
//! The characteristic quartic of the Z-transformed scheme factors into a
//! stable pair (roots inside the unit disk) and an unstable pair (outside).
//! The tilde symbols `~S^s = (1+z^{-1})(r1+r2)` etc. satisfy four functional
//! equations with polynomial right-hand sides; matching Laurent coefficients
//! turns them into a linear recurrence driven by one constant 4x4 matrix
//! whose entries are the index-0 coefficients. Index 0 itself comes from the
//! quartic at `z = infinity`, where `x = z^{-1} = 0` exactly.

use crate::error::{Error, Result};
use crate::kernel::{Kernels, Provenance};
use crate::linalg::Lu4;
use crate::model::SchemeRatios;
use crate::roots::{horner, quartic_roots_complex};
use num_complex::Complex64;

/// Condition estimate above which generated kernels carry a warning; the
/// 4x4 determinant degenerates as `dx -> 0` and the recurrence loses digits.
pub const CONDITION_WARN: f64 = 1e12;

/// Roots of the characteristic quartic at one `z`, sorted by modulus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuarticRoots {
    pub r1: Complex64,
    pub r2: Complex64,
    pub r3: Complex64,
    pub r4: Complex64,
    /// `p(z)` the quartic was assembled with (`1` for `z = infinity`).
    pub p: Complex64,
}

impl QuarticRoots {
    pub fn all(&self) -> [Complex64; 4] {
        [self.r1, self.r2, self.r3, self.r4]
    }

    pub fn stable_sum(&self) -> Complex64 {
        self.r1 + self.r2
    }

    pub fn stable_product(&self) -> Complex64 {
        self.r1 * self.r2
    }

    pub fn unstable_sum(&self) -> Complex64 {
        self.r3 + self.r4
    }

    pub fn unstable_product(&self) -> Complex64 {
        self.r3 * self.r4
    }
}

/// Ascending coefficients of
/// `r^4 - (2 - a + mu p) r^3 + (4/lambda_d + 2 mu) p r^2 + (2 - a - mu p) r - 1`.
fn quartic_coeffs(p: Complex64, ratios: &SchemeRatios) -> [Complex64; 5] {
    let a = ratios.a;
    let mu = ratios.mu;
    let c0v = ratios.c0(); // 4a/lambda_h + 2 mu, finite for c = 0
    [
        Complex64::new(-1.0, 0.0),
        Complex64::new(2.0 - a, 0.0) - mu * p,
        c0v * p,
        Complex64::new(-(2.0 - a), 0.0) - mu * p,
        Complex64::new(1.0, 0.0),
    ]
}

fn solve_sorted(p: Complex64, ratios: &SchemeRatios) -> Result<[Complex64; 4]> {
    let c = quartic_coeffs(p, ratios);
    let mut roots = quartic_roots_complex(c[4], c[3], c[2], c[1], c[0])?;
    roots.sort_by(|x, y| {
        x.norm()
            .partial_cmp(&y.norm())
            .unwrap()
            .then(x.re.partial_cmp(&y.re).unwrap())
            .then(x.im.partial_cmp(&y.im).unwrap())
    });
    // relative residual check
    for r in &roots {
        let (val, _) = horner(&c, *r);
        let scale: f64 = c
            .iter()
            .zip([0, 1, 2, 3, 4])
            .map(|(ck, k)| ck.norm() * r.norm().powi(k))
            .sum();
        if !(val.norm() <= 1e-10 * scale.max(1.0)) {
            return Err(Error::RootFinding(format!(
                "quartic root residual {:.3e} above 1e-10 relative at p = {p}",
                val.norm() / scale.max(1.0)
            )));
        }
    }
    Ok(roots)
}

fn check_separation(roots: &[Complex64; 4], context: &str) -> Result<()> {
    if !(roots[1].norm() < 1.0 - 1e-12) {
        return Err(Error::RootSeparation(format!(
            "{context}: |r2| = {:.17} not inside the unit disk",
            roots[1].norm()
        )));
    }
    if !(roots[2].norm() > 1.0 + 1e-12) {
        return Err(Error::RootSeparation(format!(
            "{context}: |r3| = {:.17} not outside the unit disk",
            roots[2].norm()
        )));
    }
    Ok(())
}

/// Quartic roots at a finite `|z| > 1`, separation checked.
pub fn quartic_roots_at(z: Complex64, ratios: &SchemeRatios) -> Result<QuarticRoots> {
    if !(z.norm() > 1.0) {
        return Err(Error::InvalidParameter {
            name: "z",
            message: format!("|z| must exceed 1, got {}", z.norm()),
        });
    }
    let p = (z - 1.0) / (z + 1.0);
    let roots = solve_sorted(p, ratios)?;
    check_separation(&roots, &format!("z = {z}"))?;
    Ok(QuarticRoots {
        r1: roots[0],
        r2: roots[1],
        r3: roots[2],
        r4: roots[3],
        p,
    })
}

/// Quartic roots at `z = infinity`, i.e. `p(z) = 1` exactly.
pub fn quartic_roots_at_infinity(ratios: &SchemeRatios) -> Result<QuarticRoots> {
    let p = Complex64::new(1.0, 0.0);
    let roots = solve_sorted(p, ratios)?;
    check_separation(&roots, "z = infinity")?;
    Ok(QuarticRoots {
        r1: roots[0],
        r2: roots[1],
        r3: roots[2],
        r4: roots[3],
        p,
    })
}

/// Right-hand-side sequences of the four functional equations.
///
/// `sigma1 = (2-a+mu) d0 + (2-a-mu) d1`,
/// `sigma2 = (4/lambda_d + 2 mu)(d0 - d2)`,
/// `sigma3 = -(2-a-mu) d0 - 2(2-a) d1 - (2-a+mu) d2`,
/// `sigma4 = -d0 - 2 d1 - d2`.
pub fn sigma(ratios: &SchemeRatios, which: u8, n: usize) -> f64 {
    let a = ratios.a;
    let mu = ratios.mu;
    match (which, n) {
        (1, 0) => 2.0 - a + mu,
        (1, 1) => 2.0 - a - mu,
        (2, 0) => ratios.c0(),
        (2, 2) => -ratios.c0(),
        (3, 0) => -(2.0 - a - mu),
        (3, 1) => -2.0 * (2.0 - a),
        (3, 2) => -(2.0 - a + mu),
        (4, 0) => -1.0,
        (4, 1) => -2.0,
        (4, 2) => -1.0,
        _ => 0.0,
    }
}

/// Index-0 kernel coefficients from the `z = infinity` roots.
///
/// At `x = 0` the tilde factor `1 + x` is 1, so the coefficients are the
/// plain sums/products of the stable and unstable pairs. The nonlinear
/// index-0 system is Vieta for the quartic; its residual is recorded.
pub fn init_kernels(ratios: &SchemeRatios) -> Result<Kernels> {
    let roots = quartic_roots_at_infinity(ratios)?;
    let vals = [
        roots.stable_sum(),
        roots.stable_product(),
        roots.unstable_sum(),
        roots.unstable_product(),
    ];
    let mut real = [0.0; 4];
    for (i, v) in vals.iter().enumerate() {
        if v.im.abs() > 1e-10 * (1.0 + v.re.abs()) {
            return Err(Error::KernelGeneration(format!(
                "index-0 coefficient {i} has imaginary residue {:.3e}; the scheme needs real kernels",
                v.im
            )));
        }
        real[i] = v.re;
    }
    let [ss0, ps0, su0, pu0] = real;

    let mut warnings = Vec::new();
    let sys0_residual = [
        (ss0 + su0 - sigma(ratios, 1, 0)).abs(),
        (ps0 + pu0 + ss0 * su0 - sigma(ratios, 2, 0)).abs(),
        (pu0 * ss0 + ps0 * su0 - sigma(ratios, 3, 0)).abs(),
        (ps0 * pu0 - sigma(ratios, 4, 0)).abs(),
    ]
    .into_iter()
    .fold(0.0_f64, f64::max);
    let scale = 1.0 + ratios.c0().abs() + ratios.a.abs() + ratios.mu.abs();
    if sys0_residual > 1e-8 * scale {
        warnings.push(format!(
            "index-0 nonlinear system residual {sys0_residual:.3e} (scale {scale:.3e})"
        ));
    }

    Ok(Kernels {
        ss: vec![ss0],
        ps: vec![ps0],
        su: vec![su0],
        pu: vec![pu0],
        provenance: Provenance::Exact,
        condition_estimate: None,
        warnings,
    })
}

/// Recurrence matrix for indices `n >= 1`; constant across `n`.
fn recurrence_matrix(k: &Kernels) -> [[f64; 4]; 4] {
    let (ss0, ps0, su0, pu0) = (k.ss[0], k.ps[0], k.su[0], k.pu[0]);
    // unknown order: (ss_n, ps_n, su_n, pu_n)
    [
        [1.0, 0.0, 1.0, 0.0],
        [su0, 1.0, ss0, 1.0],
        [pu0, su0, ps0, ss0],
        [0.0, pu0, 0.0, ps0],
    ]
}

/// Extends the kernel sequences through index `n_target` by solving the 4x4
/// linear system whose right-hand side subtracts the Cauchy-product history
/// from the sigma sequences.
pub fn extend_kernels(kernels: &mut Kernels, n_target: usize, ratios: &SchemeRatios) -> Result<()> {
    if kernels.provenance != Provenance::Exact {
        return Err(Error::KernelGeneration(
            "extend_kernels only applies to exact kernels".into(),
        ));
    }
    if kernels.is_empty() {
        return Err(Error::KernelGeneration("index 0 must be initialized first".into()));
    }
    if kernels.len() > n_target + 1 {
        return Ok(());
    }
    let lu = Lu4::new(recurrence_matrix(kernels)).map_err(|_| {
        Error::KernelGeneration(
            "singular recurrence matrix; use asymptotic kernels for this step regime".into(),
        )
    })?;
    let cond = lu.condition_estimate();
    kernels.condition_estimate = Some(cond);
    if cond > CONDITION_WARN && !kernels.warnings.iter().any(|w| w.contains("condition")) {
        kernels.warnings.push(format!(
            "recurrence condition estimate {cond:.3e} exceeds {CONDITION_WARN:.0e}; \
             coefficients degrade for small dx — prefer asymptotic kernels"
        ));
    }

    for n in kernels.len()..=n_target {
        let (ss, ps, su, pu) = (&kernels.ss, &kernels.ps, &kernels.su, &kernels.pu);
        let mut rhs = [
            sigma(ratios, 1, n),
            sigma(ratios, 2, n) - pu[n - 1] - ps[n - 1],
            sigma(ratios, 3, n),
            sigma(ratios, 4, n),
        ];
        for k in 1..n {
            rhs[1] -= ss[k] * su[n - k];
            rhs[2] -= pu[k] * ss[n - k] + ps[k] * su[n - k];
            rhs[3] -= ps[k] * pu[n - k];
        }
        let x = lu.solve(rhs);
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::KernelGeneration(format!(
                "non-finite kernel coefficients at index {n}"
            )));
        }
        kernels.ss.push(x[0]);
        kernels.ps.push(x[1]);
        kernels.su.push(x[2]);
        kernels.pu.push(x[3]);
    }
    Ok(())
}

/// Generates exact kernels `0..=n`.
pub fn generate(ratios: &SchemeRatios, n: usize) -> Result<Kernels> {
    let mut k = init_kernels(ratios)?;
    extend_kernels(&mut k, n, ratios)?;
    Ok(k)
}
