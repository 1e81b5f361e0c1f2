//! Error functionals, discrete energy, dissipativity-matrix sweeps and
//! decay-rate fits.

use crate::error::{Error, Result};
use crate::kernel::Kernels;
use crate::model::{Field, Grid, ModelParams, SchemeRatios};
use num_complex::Complex64;
use serde::Serialize;
use std::io::Write;

/// Relative l2 error `||u_ref - u||_2 / ||u_ref||_2` with trapezoidal-rule
/// norms over the interior nodes `0..=J` (ghosts are scheme artifacts and are
/// excluded).
pub fn relative_l2_error(u: &Field, u_ref: &Field, grid: &Grid) -> Result<f64> {
    if u.j_max() != grid.j || u_ref.j_max() != grid.j {
        return Err(Error::Diagnostics("fields do not match the grid".into()));
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for j in 0..=grid.j {
        let w = if j == 0 || j == grid.j { 0.5 } else { 1.0 };
        let d = u_ref.get(j as isize) - u.get(j as isize);
        num += w * d * d;
        let v = u_ref.get(j as isize);
        den += w * v * v;
    }
    if den == 0.0 {
        return Err(Error::Diagnostics("reference norm is zero".into()));
    }
    Ok((num / den).sqrt())
}

/// Discrete energy
/// `E_n = sum_{j=1}^J u_j^2/2 + alpha sum_{j=0}^J (u_{j+1} - u_j)^2/(2 dx^2)`;
/// the gradient sum reaches the ghost value `u_{J+1}`.
pub fn discrete_energy(u: &Field, grid: &Grid, params: &ModelParams) -> f64 {
    let j = grid.j as isize;
    let mut e = 0.0;
    for idx in 1..=j {
        let v = u.get(idx);
        e += v * v / 2.0;
    }
    if params.alpha > 0.0 {
        let inv = params.alpha / (2.0 * grid.dx * grid.dx);
        for idx in 0..=j {
            let d = u.get(idx + 1) - u.get(idx);
            e += inv * d * d;
        }
    }
    e
}

/// The two 2x2 Hermitian boundary quadratic forms at `z = e^{i theta}`,
/// assembled from the (un-tilded) kernel symbols, and their minimal
/// eigenvalues. Positive semidefiniteness of both certifies dissipativity;
/// this is a reported diagnostic, never a hard gate.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DissipativityPoint {
    pub theta: f64,
    pub min_eig_stable: f64,
    pub min_eig_unstable: f64,
    pub trace_stable: f64,
    pub trace_unstable: f64,
}

/// Builds the Hermitian forms at angle `theta` (bounded away from 0 and pi
/// by 1e-3, where the tilde factor degenerates) from truncated-Laurent
/// evaluations of the kernels.
pub fn dissipativity_matrices(
    theta: f64,
    kernels: &Kernels,
    ratios: &SchemeRatios,
) -> Result<DissipativityPoint> {
    let t = theta.abs();
    if !(1e-3..=std::f64::consts::PI - 1e-3).contains(&t) {
        return Err(Error::Diagnostics(format!(
            "theta = {theta} outside the admissible band (1e-3 from 0 and pi)"
        )));
    }
    let z = Complex64::from_polar(1.0, theta);
    let (ss, ps, su, pu) = kernels.symbols_at(z);
    let a = ratios.a;
    let mu = ratios.mu;
    let w = (z + 1.0).norm_sqr(); // |z + 1|^2
    let imz = z.im; // (z - conj z)/(2i)

    let alpha_s = 0.5 * w * (-ps).re;
    let beta_s = 0.5 * w * (ss * ss - ps + (a - 2.0) * ss).re - mu * imz * ss.im;
    let gamma_s = 0.25 * w * (ss.conj() - ss * ps - (a - 2.0) * ps)
        - mu * imz * ps * Complex64::new(0.0, -0.5);

    let alpha_u = 0.5 * w * pu.re;
    let beta_u = 0.5 * w * (pu - su * su - (a - 2.0) * su).re - mu * imz * su.im;
    let gamma_u = 0.25 * w * (pu * su - su.conj() + (a - 2.0) * pu)
        + mu * imz * pu * Complex64::new(0.0, -0.5);

    for v in [alpha_s, beta_s, alpha_u, beta_u] {
        if !v.is_finite() {
            return Err(Error::Diagnostics("non-finite dissipativity entry".into()));
        }
    }
    let min_eig = |al: f64, be: f64, ga: Complex64| {
        let tr = al + be;
        let disc = ((al - be) * (al - be) + 4.0 * ga.norm_sqr()).sqrt();
        (tr - disc) / 2.0
    };
    Ok(DissipativityPoint {
        theta,
        min_eig_stable: min_eig(alpha_s, beta_s, gamma_s),
        min_eig_unstable: min_eig(alpha_u, beta_u, gamma_u),
        trace_stable: alpha_s + beta_s,
        trace_unstable: alpha_u + beta_u,
    })
}

/// Least-squares slope of `log|seq_n|` against `log n` over `[n_min, n_max]`,
/// with the fit's r^2.
pub fn decay_fit(seq: &[f64], n_min: usize, n_max: usize) -> Result<(f64, f64)> {
    if n_min == 0 || n_max >= seq.len() || n_max < n_min {
        return Err(Error::Diagnostics(format!(
            "fit range [{n_min}, {n_max}] outside sequence of length {}",
            seq.len()
        )));
    }
    if n_max - n_min + 1 < 10 {
        return Err(Error::Diagnostics("decay fit needs at least 10 points".into()));
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for n in n_min..=n_max {
        if seq[n] == 0.0 {
            return Err(Error::Diagnostics(format!("zero entry at index {n} in decay fit")));
        }
        xs.push((n as f64).ln());
        ys.push(seq[n].abs().ln());
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (x, y) in xs.iter().zip(&ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    let slope = sxy / sxx;
    let r2 = if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 };
    Ok((slope, r2))
}

/// One row of a refinement study.
#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceRow {
    pub h: f64,
    pub e_p: f64,
    /// Observed order against the previous (coarser) row.
    pub order: Option<f64>,
    /// Error failed to decrease with refinement (saturation regime).
    pub non_monotone: bool,
}

/// Observed orders between consecutive sweep points,
/// `order = log(E_P(h)/E_P(h'))/log(h/h')`. Non-monotone rows are flagged,
/// not fatal.
pub fn convergence_table(points: &[(f64, f64)]) -> Result<Vec<ConvergenceRow>> {
    if points.len() < 3 {
        return Err(Error::Diagnostics(
            "convergence table needs >= 3 sweep points".into(),
        ));
    }
    let mut rows = Vec::with_capacity(points.len());
    for (i, &(h, e_p)) in points.iter().enumerate() {
        if i == 0 {
            rows.push(ConvergenceRow {
                h,
                e_p,
                order: None,
                non_monotone: false,
            });
            continue;
        }
        let (hp, ep) = points[i - 1];
        let order = (ep / e_p).ln() / (hp / h).ln();
        rows.push(ConvergenceRow {
            h,
            e_p,
            order: Some(order),
            non_monotone: e_p > ep,
        });
    }
    Ok(rows)
}

/// Writes the `h,E_P,order` CSV.
pub fn write_convergence_csv<W: Write>(rows: &[ConvergenceRow], mut w: W) -> Result<()> {
    writeln!(w, "h,E_P,order")?;
    for r in rows {
        match r.order {
            Some(o) => writeln!(w, "{},{},{}", r.h, r.e_p, o)?,
            None => writeln!(w, "{},{},", r.h, r.e_p)?,
        }
    }
    Ok(())
}

/// Per-run results: error series, its maximum `E_P`, the discrete energy
/// series and bookkeeping.
#[derive(Debug, Clone, Serialize, Default)]
pub struct RunReport {
    /// Echo of the configuration that produced the run.
    pub config: serde_json::Value,
    /// `(step, t, e^(n))` at the recorded cadence.
    pub errors: Vec<(usize, f64, f64)>,
    /// Maximum of the recorded relative errors.
    pub e_p: Option<f64>,
    /// Discrete energy at every step `0..=N`.
    pub energy: Vec<f64>,
    /// Optional log-log decay fit `(slope, r^2)` of the kernel sequence.
    pub slope_fit: Option<(f64, f64)>,
    pub max_residual_ratio: f64,
    /// Largest `|u|` seen over the run and the initial `|u0|` maximum.
    pub max_abs: f64,
    pub max_abs_initial: f64,
    pub kernel_provenance: String,
    pub kernel_condition: Option<f64>,
    pub warnings: Vec<String>,
    pub wall_ms: f64,
}

impl RunReport {
    pub fn record_error(&mut self, step: usize, t: f64, err: f64) {
        self.errors.push((step, t, err));
        self.e_p = Some(self.e_p.map_or(err, |m: f64| m.max(err)));
    }

    /// Writes the `step,t,err,energy` CSV for recorded steps.
    pub fn write_errors_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "step,t,err,energy")?;
        for &(step, t, err) in &self.errors {
            let energy = self.energy.get(step).copied().unwrap_or(f64::NAN);
            writeln!(w, "{},{},{},{}", step, t, err, energy)?;
        }
        Ok(())
    }
}
