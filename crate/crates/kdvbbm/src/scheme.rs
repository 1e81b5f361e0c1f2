//! Centered Crank-Nicolson interior scheme with transparent (or Dirichlet)
//! boundary rows: the `(J+5) x (J+5)` system `A u^{n+1} = B u^n + s^n`.
//!
//! Vector index `i` holds `u_{i-2}`, so the four ghost values `u_{-2}`,
//! `u_{-1}`, `u_{J+1}`, `u_{J+2}` are solution components determined by the
//! boundary rows. `A` is factorized once per run (constant coefficients).

use crate::error::{Error, Result};
use crate::kernel::Kernels;
use crate::linalg::{Banded, BandedLu};
use crate::model::{Field, Grid, SchemeRatios};

/// How the four boundary rows close the interior scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryKind {
    /// Discrete transparent boundary conditions (kernel convolutions).
    Transparent,
    /// Zero ghost values; reflecting box used as a reference oracle.
    Dirichlet,
}

/// Assembled scheme operators and the cached factorization of `A`.
pub struct SchemeMatrices {
    pub a: Banded,
    pub b: Banded,
    a_lu: BandedLu,
    pub c_minus: f64,
    pub c_zero: f64,
    pub c_plus: f64,
    pub j: usize,
    pub boundary: BoundaryKind,
}

/// Builds `A` and `B` for a grid with `J` interior cells.
///
/// Interior rows: `A = [-1, c_-, c_0, c_+, 1]`, `B = [1, c_+, c_0, c_-, -1]`
/// with `c_- = 2 - a - mu`, `c_0 = 4/lambda_d + 2 mu`, `c_+ = a - 2 - mu`.
/// Transparent boundary rows carry `(p0, -s0, 1)` with the unstable pair on
/// top and the stable pair at the bottom.
pub fn assemble(
    ratios: &SchemeRatios,
    kernels: &Kernels,
    j: usize,
    boundary: BoundaryKind,
) -> Result<SchemeMatrices> {
    if j < 5 {
        return Err(Error::InvalidParameter {
            name: "J",
            message: format!("need J >= 5 interior cells, got {j}"),
        });
    }
    if kernels.is_empty() {
        return Err(Error::KernelGeneration("kernels have no index-0 values".into()));
    }
    let n = j + 5;
    let c_minus = 2.0 - ratios.a - ratios.mu;
    let c_zero = ratios.c0();
    let c_plus = ratios.a - 2.0 - ratios.mu;

    let mut a = Banded::zeros(n, 2, 2);
    let mut b = Banded::zeros(n, 2, 2);
    for i in 2..=j + 2 {
        a.set(i, i - 2, -1.0);
        a.set(i, i - 1, c_minus);
        a.set(i, i, c_zero);
        a.set(i, i + 1, c_plus);
        a.set(i, i + 2, 1.0);
        b.set(i, i - 2, 1.0);
        b.set(i, i - 1, c_plus);
        b.set(i, i, c_zero);
        b.set(i, i + 1, c_minus);
        b.set(i, i + 2, -1.0);
    }
    match boundary {
        BoundaryKind::Transparent => {
            let (ss0, ps0, su0, pu0) = (kernels.ss[0], kernels.ps[0], kernels.su[0], kernels.pu[0]);
            // left rows: u_0 - S^u u_{-1} + P^u u_{-2} and its shift by one
            a.set(0, 0, pu0);
            a.set(0, 1, -su0);
            a.set(0, 2, 1.0);
            b.set(0, 2, -1.0);
            a.set(1, 1, pu0);
            a.set(1, 2, -su0);
            a.set(1, 3, 1.0);
            b.set(1, 3, -1.0);
            // right rows: u_{J+1} - S^s u_J + P^s u_{J-1} and its shift
            a.set(j + 3, j + 1, ps0);
            a.set(j + 3, j + 2, -ss0);
            a.set(j + 3, j + 3, 1.0);
            b.set(j + 3, j + 3, -1.0);
            a.set(j + 4, j + 2, ps0);
            a.set(j + 4, j + 3, -ss0);
            a.set(j + 4, j + 4, 1.0);
            b.set(j + 4, j + 4, -1.0);
        }
        BoundaryKind::Dirichlet => {
            for i in [0, 1, j + 3, j + 4] {
                a.set(i, i, 1.0);
            }
        }
    }
    let a_lu = a.factor().map_err(|e| {
        Error::Factorization(format!(
            "scheme matrix is not invertible: {e} (degenerate kernels or ratios)"
        ))
    })?;
    Ok(SchemeMatrices {
        a,
        b,
        a_lu,
        c_minus,
        c_zero,
        c_plus,
        j,
        boundary,
    })
}

/// Stored boundary-adjacent traces `u_j^k` for `k = 0..=n`, the inputs of the
/// boundary convolutions.
#[derive(Debug, Clone, Default)]
pub struct BoundaryHistory {
    pub um2: Vec<f64>,
    pub um1: Vec<f64>,
    pub u0: Vec<f64>,
    pub u1: Vec<f64>,
    pub ujm1: Vec<f64>,
    pub uj: Vec<f64>,
    pub ujp1: Vec<f64>,
}

impl BoundaryHistory {
    pub fn len(&self) -> usize {
        self.u0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u0.is_empty()
    }

    fn push(&mut self, f: &Field) {
        let j = f.j_max() as isize;
        self.um2.push(f.get(-2));
        self.um1.push(f.get(-1));
        self.u0.push(f.get(0));
        self.u1.push(f.get(1));
        self.ujm1.push(f.get(j - 1));
        self.uj.push(f.get(j));
        self.ujp1.push(f.get(j + 1));
    }
}

/// Fills the four nonzero entries of `s^n` by the boundary convolutions
///
/// ```text
/// s^n[0]   = sum_{k=0}^n  su_{n+1-k} u_{-1}^k   - pu_{n+1-k} u_{-2}^k
/// s^n[1]   = sum_{k=0}^n  su_{n+1-k} u_0^k      - pu_{n+1-k} u_{-1}^k
/// s^n[J+3] = sum_{k=0}^n  ss_{n+1-k} u_J^k      - ps_{n+1-k} u_{J-1}^k
/// s^n[J+4] = sum_{k=0}^n  ss_{n+1-k} u_{J+1}^k  - ps_{n+1-k} u_J^k
/// ```
///
/// each row convolving exactly the nodes its `(p0, -s0, 1)` stencil acts on.
pub fn convolution_source(
    kernels: &Kernels,
    history: &BoundaryHistory,
    n: usize,
    out: &mut [f64],
) -> Result<()> {
    if history.len() != n + 1 {
        return Err(Error::Diagnostics(format!(
            "history holds {} steps, expected {}",
            history.len(),
            n + 1
        )));
    }
    if kernels.len() < n + 2 {
        return Err(Error::KernelTooShort {
            have: kernels.len(),
            need: n + 2,
        });
    }
    for v in out.iter_mut() {
        *v = 0.0;
    }
    let j3 = out.len() - 2;
    let j4 = out.len() - 1;
    for k in 0..=n {
        let su = kernels.su[n + 1 - k];
        let pu = kernels.pu[n + 1 - k];
        let ss = kernels.ss[n + 1 - k];
        let ps = kernels.ps[n + 1 - k];
        out[0] += su * history.um1[k] - pu * history.um2[k];
        out[1] += su * history.u0[k] - pu * history.um1[k];
        out[j3] += ss * history.uj[k] - ps * history.ujm1[k];
        out[j4] += ss * history.ujp1[k] - ps * history.uj[k];
    }
    Ok(())
}

/// Mutable time-stepping state: current field, full boundary history and the
/// step index.
pub struct SolverState {
    pub field: Field,
    pub history: BoundaryHistory,
    pub step: usize,
    /// Worst per-step residual ratio `||A u^{n+1} - rhs||_inf / ||u^n||_inf`.
    pub max_residual_ratio: f64,
    rhs: Vec<f64>,
    source: Vec<f64>,
    check: Vec<f64>,
}

impl SolverState {
    pub fn new(u0: Field) -> Self {
        let n = u0.len();
        let mut history = BoundaryHistory::default();
        history.push(&u0);
        SolverState {
            field: u0,
            history,
            step: 0,
            max_residual_ratio: 0.0,
            rhs: vec![0.0; n],
            source: vec![0.0; n],
            check: vec![0.0; n],
        }
    }

    pub fn t(&self, grid: &Grid) -> f64 {
        self.step as f64 * grid.dt
    }
}

/// Advances one step: `u^{n+1} = A^{-1}(B u^n + s^n)` via the cached
/// factorization, extending the boundary history.
pub fn step(state: &mut SolverState, matrices: &SchemeMatrices, kernels: &Kernels) -> Result<()> {
    let n = state.step;
    matrices.b.matvec(state.field.as_slice(), &mut state.rhs);
    if matrices.boundary == BoundaryKind::Transparent {
        convolution_source(kernels, &state.history, n, &mut state.source)?;
        for (r, s) in state.rhs.iter_mut().zip(&state.source) {
            *r += s;
        }
    }
    let mut x = state.rhs.clone();
    matrices.a_lu.solve(&mut x);

    // residual of the solved system against the assembled rhs
    matrices.a.matvec(&x, &mut state.check);
    let mut resid = 0.0f64;
    for (c, r) in state.check.iter().zip(&state.rhs) {
        resid = resid.max((c - r).abs());
    }
    let scale = state.field.max_abs();
    let ratio = if scale > 0.0 { resid / scale } else { resid };
    state.max_residual_ratio = state.max_residual_ratio.max(ratio);

    if let Some(bad) = x.iter().position(|v| !v.is_finite()) {
        return Err(Error::Unstable {
            step: n + 1,
            message: format!("non-finite solution component at vector index {bad}"),
        });
    }
    state.field.as_mut_slice().copy_from_slice(&x);
    state.history.push(&state.field);
    state.step = n + 1;
    Ok(())
}

/// Runs `grid.n_steps` steps, invoking `observe(step, t, field)` on the
/// initial state and after every step.
pub fn run(
    grid: &Grid,
    matrices: &SchemeMatrices,
    kernels: &Kernels,
    u0: Field,
    mut observe: impl FnMut(usize, f64, &Field) -> Result<()>,
) -> Result<SolverState> {
    if matrices.boundary == BoundaryKind::Transparent && kernels.len() < grid.n_steps + 1 {
        return Err(Error::KernelTooShort {
            have: kernels.len(),
            need: grid.n_steps + 1,
        });
    }
    let mut state = SolverState::new(u0);
    observe(0, 0.0, &state.field)?;
    for _ in 0..grid.n_steps {
        step(&mut state, matrices, kernels)?;
        observe(state.step, state.t(grid), &state.field)?;
    }
    Ok(state)
}
