//! Physical parameters, grids, scheme ratios and field containers.
//!
//! The model is the linearized KdV-BBM equation
//! `(u - alpha u_xx)_t + c u_x + eps u_xxx = 0` on an interval
//! `[x_left, x_right]`, discretized with steps `dx`, `dt`. Fields carry two
//! ghost nodes on each side of the interior range `0..=J`, stored as one
//! contiguous vector of length `J + 5`.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Compact-support tolerance for initial data at and beyond the endpoints.
pub const SUPPORT_TOL: f64 = 1e-12;

/// Physical constants of the linearized KdV-BBM model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Advection velocity `c`.
    pub c: f64,
    /// BBM dispersion parameter `alpha >= 0`.
    pub alpha: f64,
    /// KdV dispersion parameter `eps > 0`.
    pub eps: f64,
}

impl ModelParams {
    pub fn new(c: f64, alpha: f64, eps: f64) -> Result<Self> {
        let p = ModelParams { c, alpha, eps };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.eps.is_finite() || self.eps <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "eps",
                message: format!("must be finite and > 0, got {}", self.eps),
            });
        }
        if !self.alpha.is_finite() || self.alpha < 0.0 {
            return Err(Error::InvalidParameter {
                name: "alpha",
                message: format!("must be finite and >= 0, got {}", self.alpha),
            });
        }
        if !self.c.is_finite() {
            return Err(Error::InvalidParameter {
                name: "c",
                message: "must be finite".into(),
            });
        }
        Ok(())
    }
}

/// Uniform space-time grid on `[x_left, x_right]`.
///
/// `J` is obtained by rounding `(x_right - x_left)/dx`; `dx` is never
/// silently adjusted. A mismatch beyond `1e-12` relative is rejected so that
/// convergence studies see exactly the steps they asked for.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub x_left: f64,
    pub x_right: f64,
    pub dx: f64,
    pub dt: f64,
    /// Number of interior cells; interior nodes are `0..=J`.
    pub j: usize,
    /// Number of time steps.
    pub n_steps: usize,
}

impl Grid {
    pub fn new(x_left: f64, x_right: f64, dx: f64, dt: f64, n_steps: usize) -> Result<Self> {
        if !(x_left < x_right) {
            return Err(Error::InvalidParameter {
                name: "x_left/x_right",
                message: format!("need x_left < x_right, got [{x_left}, {x_right}]"),
            });
        }
        if !(dx > 0.0) || !dx.is_finite() {
            return Err(Error::InvalidParameter {
                name: "dx",
                message: format!("must be > 0, got {dx}"),
            });
        }
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::InvalidParameter {
                name: "dt",
                message: format!("must be > 0, got {dt}"),
            });
        }
        let len = x_right - x_left;
        let j = (len / dx).round();
        if j < 5.0 {
            return Err(Error::InvalidParameter {
                name: "dx",
                message: format!("grid needs J >= 5 interior cells, got J = {j}"),
            });
        }
        let rel = (j * dx - len).abs() / len;
        if rel > 1e-12 {
            return Err(Error::InvalidParameter {
                name: "dx",
                message: format!(
                    "J*dx does not reproduce the interval: relative mismatch {rel:.3e} (J = {j})"
                ),
            });
        }
        Ok(Grid {
            x_left,
            x_right,
            dx,
            dt,
            j: j as usize,
            n_steps,
        })
    }

    /// Grid with the step count chosen so that `n_steps * dt` covers `t_final`.
    pub fn with_final_time(x_left: f64, x_right: f64, dx: f64, dt: f64, t_final: f64) -> Result<Self> {
        if !(t_final > 0.0) {
            return Err(Error::InvalidParameter {
                name: "t_final",
                message: format!("must be > 0, got {t_final}"),
            });
        }
        let n = (t_final / dt).round().max(1.0) as usize;
        Grid::new(x_left, x_right, dx, dt, n)
    }

    /// Coordinate of interior node `j` (0-based, `j <= J`).
    #[inline]
    pub fn x(&self, j: usize) -> f64 {
        self.x_left + j as f64 * self.dx
    }

    /// Total vector length including ghost nodes (-2, -1, J+1, J+2).
    #[inline]
    pub fn field_len(&self) -> usize {
        self.j + 5
    }
}

/// Nondimensional ratios of the centered Crank-Nicolson scheme.
///
/// `lambda_h = c dt/dx`, `lambda_d = eps dt/dx^3`, `lambda_b = alpha/dx^2`,
/// `a = lambda_h/lambda_d = c dx^2/eps`, `mu = 4 lambda_b/lambda_d
/// = 4 alpha dx/(eps dt)`. The scheme expression `4a/lambda_h` is always
/// evaluated as `4/lambda_d` so that `c = 0` stays finite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchemeRatios {
    pub lambda_h: f64,
    pub lambda_d: f64,
    pub lambda_b: f64,
    pub a: f64,
    pub mu: f64,
}

impl SchemeRatios {
    /// `4a/lambda_h + 2 mu`, evaluated as `4/lambda_d + 2 mu`.
    #[inline]
    pub fn c0(&self) -> f64 {
        4.0 / self.lambda_d + 2.0 * self.mu
    }
}

/// Derives the scheme ratios from physical parameters and grid steps.
pub fn derive_ratios(params: &ModelParams, grid: &Grid) -> Result<SchemeRatios> {
    params.validate()?;
    let dx = grid.dx;
    let dt = grid.dt;
    let lambda_h = params.c * dt / dx;
    let lambda_d = params.eps * dt / (dx * dx * dx);
    let lambda_b = params.alpha / (dx * dx);
    if !(lambda_d > 0.0) {
        return Err(Error::InvalidParameter {
            name: "eps",
            message: "lambda_d = eps dt/dx^3 must be > 0".into(),
        });
    }
    let a = params.c * dx * dx / params.eps;
    let mu = 4.0 * params.alpha * dx / (params.eps * dt);
    Ok(SchemeRatios {
        lambda_h,
        lambda_d,
        lambda_b,
        a,
        mu,
    })
}

/// Grid function with two ghost nodes on each side.
///
/// Index `-2..=J+2` maps to storage `0..J+5`; the interior is `0..=J`.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    values: Vec<f64>,
    j: usize,
}

impl Field {
    /// Zero field for a grid with `J` interior cells.
    pub fn zeros(j: usize) -> Self {
        Field {
            values: vec![0.0; j + 5],
            j,
        }
    }

    pub fn from_values(values: Vec<f64>, j: usize) -> Result<Self> {
        if values.len() != j + 5 {
            return Err(Error::InvalidParameter {
                name: "values",
                message: format!("field for J = {j} needs length {}, got {}", j + 5, values.len()),
            });
        }
        Ok(Field { values, j })
    }

    #[inline]
    pub fn j_max(&self) -> usize {
        self.j
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Value at spatial index `idx` in `-2..=J+2`.
    #[inline]
    pub fn get(&self, idx: isize) -> f64 {
        self.values[(idx + 2) as usize]
    }

    #[inline]
    pub fn set(&mut self, idx: isize, v: f64) {
        self.values[(idx + 2) as usize] = v;
    }

    /// Interior slice `u_0..=u_J`.
    #[inline]
    pub fn interior(&self) -> &[f64] {
        &self.values[2..2 + self.j + 1]
    }

    /// Full storage including ghosts.
    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Built-in initial profiles; both are supported on `[0, 1]` up to `1e-12`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitialKind {
    /// `exp(-400 (x - 1/2)^2)`
    Gaussian,
    /// `exp(-400 (x - 1/2)^2) sin(20 pi x)`
    Wavepacket,
}

impl InitialKind {
    pub fn eval(&self, x: f64) -> f64 {
        let g = (-400.0 * (x - 0.5) * (x - 0.5)).exp();
        match self {
            InitialKind::Gaussian => g,
            InitialKind::Wavepacket => g * (20.0 * std::f64::consts::PI * x).sin(),
        }
    }
}

/// Samples a named initial profile on the grid.
pub fn sample_initial(kind: InitialKind, grid: &Grid) -> Result<Field> {
    sample_initial_profile(|x| kind.eval(x), grid)
}

/// Samples an arbitrary profile, enforcing the compact-support precondition:
/// `|u0| < 1e-12` at the endpoints and at the ghost positions outside them.
pub fn sample_initial_profile(profile: impl Fn(f64) -> f64, grid: &Grid) -> Result<Field> {
    for k in 0..=2 {
        let xl = grid.x_left - k as f64 * grid.dx;
        let xr = grid.x_right + k as f64 * grid.dx;
        for x in [xl, xr] {
            let v = profile(x);
            if v.abs() >= SUPPORT_TOL {
                return Err(Error::UnsupportedProfile(format!(
                    "|u0({x})| = {:.3e} >= {SUPPORT_TOL:e}; the boundary construction assumes zero exterior data",
                    v.abs()
                )));
            }
        }
    }
    let mut f = Field::zeros(grid.j);
    for j in 0..=grid.j {
        f.set(j as isize, profile(grid.x(j)));
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid_unit(dx: f64, dt: f64) -> Grid {
        Grid::new(0.0, 1.0, dx, dt, 10).unwrap()
    }

    #[test]
    fn ratios_zero_numerators() {
        let p = ModelParams::new(0.0, 0.0, 1e-3).unwrap();
        let g = grid_unit(1e-2, 1e-3);
        let r = derive_ratios(&p, &g).unwrap();
        assert_eq!(r.lambda_h, 0.0);
        assert!((r.lambda_d - 1.0).abs() < 1e-14);
        assert_eq!(r.lambda_b, 0.0);
        assert_eq!(r.a, 0.0);
        assert_eq!(r.mu, 0.0);
    }

    #[test]
    fn ratios_hand_evaluated() {
        // c=2, alpha=1e-3, eps=1e-3, dx=1e-2, dt=1e-3
        let p = ModelParams::new(2.0, 1e-3, 1e-3).unwrap();
        let g = grid_unit(1e-2, 1e-3);
        let r = derive_ratios(&p, &g).unwrap();
        assert!((r.lambda_h - 0.2).abs() < 1e-15);
        assert!((r.lambda_d - 1.0).abs() < 1e-13);
        assert!((r.lambda_b - 10.0).abs() < 1e-11);
        assert!((r.a - 0.2).abs() < 1e-15);
        assert!((r.mu - 40.0).abs() < 1e-11);
    }

    #[test]
    fn ratios_scaling_under_dx_halving() {
        let p = ModelParams::new(2.0, 1e-3, 1e-3).unwrap();
        let g1 = grid_unit(1e-2, 1e-3);
        let g2 = grid_unit(5e-3, 1e-3);
        let r1 = derive_ratios(&p, &g1).unwrap();
        let r2 = derive_ratios(&p, &g2).unwrap();
        assert!((r2.a - r1.a / 4.0).abs() < 1e-14 * r1.a.abs());
        assert!((r2.mu - r1.mu / 2.0).abs() < 1e-14 * r1.mu);
    }

    #[test]
    fn ratios_recomputable_from_primitives() {
        let p = ModelParams::new(-1.3, 2e-4, 7e-4).unwrap();
        let g = grid_unit(1.0 / 128.0, 2e-3);
        let r = derive_ratios(&p, &g).unwrap();
        let a = r.lambda_h / r.lambda_d;
        let mu = 4.0 * r.lambda_b / r.lambda_d;
        assert!((a - r.a).abs() <= 1e-14 * r.a.abs().max(1.0));
        assert!((mu - r.mu).abs() <= 1e-14 * r.mu.abs().max(1.0));
    }

    #[test]
    fn rejects_bad_eps() {
        assert!(ModelParams::new(0.0, 0.0, 0.0).is_err());
        assert!(ModelParams::new(0.0, 0.0, -1.0).is_err());
        assert!(ModelParams::new(0.0, -1e-6, 1.0).is_err());
    }

    #[test]
    fn grid_rejects_step_mismatch() {
        // dx = 0.3 does not divide [0, 1]: J = 3 (also < 5) and mismatch.
        assert!(Grid::new(0.0, 1.0, 0.3, 1e-3, 1).is_err());
        // dx = 0.07 gives J = 14, 14*0.07 = 0.98 != 1.
        assert!(Grid::new(0.0, 1.0, 0.07, 1e-3, 1).is_err());
        // Clean power-of-two step is accepted.
        let g = Grid::new(0.0, 1.0, 1.0 / 64.0, 1e-3, 1).unwrap();
        assert_eq!(g.j, 64);
        assert_eq!(g.field_len(), 69);
    }

    #[test]
    fn gaussian_values() {
        let g = grid_unit(1.0 / 128.0, 1e-3);
        let f = sample_initial(InitialKind::Gaussian, &g).unwrap();
        // value 1 at x = 1/2 (node 64)
        assert!((f.get(64) - 1.0).abs() < 1e-15);
        // endpoint value exp(-100) accepted and tiny
        assert!(f.get(0).abs() < 1e-12);
        // ghosts are exactly zero
        for idx in [-2, -1, 129, 130] {
            assert_eq!(f.get(idx), 0.0);
        }
    }

    #[test]
    fn wavepacket_zero_at_center() {
        let g = grid_unit(1.0 / 128.0, 1e-3);
        let f = sample_initial(InitialKind::Wavepacket, &g).unwrap();
        assert!(f.get(64).abs() < 1e-13); // sin(10 pi) = 0
    }

    #[test]
    fn rejects_non_decaying_profile() {
        let g = grid_unit(1.0 / 128.0, 1e-3);
        let err = sample_initial_profile(|_| 1.0, &g);
        assert!(matches!(err, Err(Error::UnsupportedProfile(_))));
    }
}
