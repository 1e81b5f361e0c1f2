//! Solver library for the linearized KdV-BBM equation
//! `(u - alpha u_xx)_t + c u_x + eps u_xxx = 0`
//! on a finite interval, closed with exact or asymptotic discrete
//! transparent boundary conditions.
//!
//! The interior scheme is centered Crank-Nicolson; the boundary rows carry
//! discrete convolutions whose kernels are Laurent coefficients of
//! stable/unstable root data of the scheme's characteristic quartic. Kernels
//! are generated by a root-relation recurrence (no numerical inverse
//! Z-transform) or, for very small `dx` and long times, from closed-form
//! small-`dx` expansions.

pub mod continuous;
pub mod diagnostics;
pub mod error;
pub mod experiment;
pub mod kernel;
pub mod linalg;
pub mod model;
pub mod reference;
pub mod roots;
pub mod scheme;
pub mod series;

pub use error::{Error, Result};
pub use kernel::{AsymptoticVariant, Kernels, Provenance};
pub use model::{derive_ratios, sample_initial, Field, Grid, InitialKind, ModelParams, SchemeRatios};
