//! Boundary convolution kernels: the four coefficient sequences
//! `ss = ~s^s`, `ps = ~p^s`, `su = ~s^u`, `pu = ~p^u` of the discrete
//! transparent boundary conditions, either generated exactly by the
//! root-relation recurrence or assembled from small-`dx` expansions.

pub mod asymptotic;
pub mod exact;

use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::io::{BufRead, Write};

/// Which small-`dx` expansion an asymptotic kernel set came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AsymptoticVariant {
    /// Pure linearized KdV (`alpha = 0`, `c` dropped by the expansion).
    Lkdv,
    /// General KdV-BBM (`alpha > 0`).
    General,
}

/// Provenance tag carried by every kernel set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum Provenance {
    Exact,
    Asymptotic {
        variant: AsymptoticVariant,
        /// Order of accuracy in `dx` of the truncation (2 or 3).
        order: u8,
    },
}

impl Provenance {
    pub fn tag(&self) -> String {
        match self {
            Provenance::Exact => "exact".to_string(),
            Provenance::Asymptotic { variant, order } => match variant {
                AsymptoticVariant::Lkdv => format!("asymptotic-lkdv-o{order}"),
                AsymptoticVariant::General => format!("asymptotic-general-o{order}"),
            },
        }
    }
}

/// The four convolution coefficient sequences, all the same length.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernels {
    pub ss: Vec<f64>,
    pub ps: Vec<f64>,
    pub su: Vec<f64>,
    pub pu: Vec<f64>,
    pub provenance: Provenance,
    /// Condition estimate of the 4x4 recurrence solve (exact kernels only).
    pub condition_estimate: Option<f64>,
    pub warnings: Vec<String>,
}

impl Kernels {
    pub fn len(&self) -> usize {
        self.ss.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ss.is_empty()
    }

    pub fn validate_finite(&self) -> Result<()> {
        for (name, seq) in [("ss", &self.ss), ("ps", &self.ps), ("su", &self.su), ("pu", &self.pu)] {
            if let Some(k) = seq.iter().position(|v| !v.is_finite()) {
                return Err(Error::KernelGeneration(format!(
                    "kernel `{name}` has a non-finite entry at index {k}"
                )));
            }
        }
        Ok(())
    }

    /// Truncated Laurent evaluation of the tilde symbols at `z`:
    /// `(~S^s, ~P^s, ~S^u, ~P^u)(z)`.
    pub fn tilde_symbols_at(&self, z: Complex64) -> (Complex64, Complex64, Complex64, Complex64) {
        let x = Complex64::new(1.0, 0.0) / z;
        let eval = |seq: &[f64]| {
            let mut acc = Complex64::new(0.0, 0.0);
            for &c in seq.iter().rev() {
                acc = acc * x + c;
            }
            acc
        };
        (eval(&self.ss), eval(&self.ps), eval(&self.su), eval(&self.pu))
    }

    /// Un-tilded symbols `(s^s, p^s, s^u, p^u)(z)`, dividing out `1 + z^{-1}`.
    pub fn symbols_at(&self, z: Complex64) -> (Complex64, Complex64, Complex64, Complex64) {
        let factor = 1.0 + Complex64::new(1.0, 0.0) / z;
        let (a, b, c, d) = self.tilde_symbols_at(z);
        (a / factor, b / factor, c / factor, d / factor)
    }

    /// Running Cauchy product of `ps` and `pu` up to index `n_max`; the
    /// generating identity forces `(-1, -2, -1, 0, 0, ...)`.
    pub fn ps_pu_cauchy(&self, n_max: usize) -> Vec<f64> {
        let n = n_max.min(self.len() - 1);
        let mut out = vec![0.0; n + 1];
        for (l, o) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for k in 0..=l {
                acc += self.ps[k] * self.pu[l - k];
            }
            *o = acc;
        }
        out
    }

    /// Writes the `n,ss,ps,su,pu,provenance` CSV export.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "n,ss,ps,su,pu,provenance")?;
        let tag = self.provenance.tag();
        for n in 0..self.len() {
            writeln!(
                w,
                "{},{},{},{},{},{}",
                n, self.ss[n], self.ps[n], self.su[n], self.pu[n], tag
            )?;
        }
        Ok(())
    }

    /// Reads kernels back from the CSV export (provenance restored from the tag).
    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut ss = Vec::new();
        let mut ps = Vec::new();
        let mut su = Vec::new();
        let mut pu = Vec::new();
        let mut provenance = Provenance::Exact;
        for (lineno, line) in r.lines().enumerate() {
            let line = line?;
            if lineno == 0 {
                if !line.starts_with("n,ss,ps,su,pu") {
                    return Err(Error::Io(format!("unexpected kernel CSV header: {line}")));
                }
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() < 6 {
                return Err(Error::Io(format!("bad kernel CSV row {lineno}: {line}")));
            }
            let parse = |s: &str| -> Result<f64> {
                s.parse::<f64>()
                    .map_err(|e| Error::Io(format!("row {lineno}: {e}")))
            };
            ss.push(parse(fields[1])?);
            ps.push(parse(fields[2])?);
            su.push(parse(fields[3])?);
            pu.push(parse(fields[4])?);
            provenance = match fields[5] {
                "exact" => Provenance::Exact,
                "asymptotic-lkdv-o2" => Provenance::Asymptotic { variant: AsymptoticVariant::Lkdv, order: 2 },
                "asymptotic-lkdv-o3" => Provenance::Asymptotic { variant: AsymptoticVariant::Lkdv, order: 3 },
                "asymptotic-general-o2" => Provenance::Asymptotic { variant: AsymptoticVariant::General, order: 2 },
                "asymptotic-general-o3" => Provenance::Asymptotic { variant: AsymptoticVariant::General, order: 3 },
                other => return Err(Error::Io(format!("unknown provenance tag `{other}`"))),
            };
        }
        Ok(Kernels {
            ss,
            ps,
            su,
            pu,
            provenance,
            condition_estimate: None,
            warnings: Vec::new(),
        })
    }
}
