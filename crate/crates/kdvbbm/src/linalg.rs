//! Small dense and banded linear solvers used by the kernel recurrence and
//! the time stepper.

use crate::error::{Error, Result};

/// LU factorization of a 4x4 real matrix with partial pivoting.
///
/// The kernel recurrence solves against the same matrix at every index, so
/// the factorization and its condition estimate are computed once.
#[derive(Debug, Clone)]
pub struct Lu4 {
    lu: [[f64; 4]; 4],
    piv: [usize; 4],
    a: [[f64; 4]; 4],
    cond_inf: f64,
}

impl Lu4 {
    pub fn new(a: [[f64; 4]; 4]) -> Result<Self> {
        let mut lu = a;
        let mut piv = [0usize; 4];
        for k in 0..4 {
            let mut pk = k;
            for i in k + 1..4 {
                if lu[i][k].abs() > lu[pk][k].abs() {
                    pk = i;
                }
            }
            piv[k] = pk;
            lu.swap(k, pk);
            if lu[k][k] == 0.0 {
                return Err(Error::Factorization("singular 4x4 recurrence matrix".into()));
            }
            for i in k + 1..4 {
                lu[i][k] /= lu[k][k];
                for j in k + 1..4 {
                    lu[i][j] -= lu[i][k] * lu[k][j];
                }
            }
        }
        let mut me = Lu4 {
            lu,
            piv,
            a,
            cond_inf: f64::INFINITY,
        };
        me.cond_inf = me.estimate_cond();
        Ok(me)
    }

    fn substitute(&self, b: &mut [f64; 4]) {
        // full rows (multipliers included) were swapped during factorization,
        // so all permutations apply before the L sweep
        for k in 0..4 {
            b.swap(k, self.piv[k]);
        }
        for k in 0..4 {
            for i in k + 1..4 {
                let f = self.lu[i][k];
                b[i] -= f * b[k];
            }
        }
        for k in (0..4).rev() {
            b[k] /= self.lu[k][k];
            for i in 0..k {
                let f = self.lu[i][k];
                b[i] -= f * b[k];
            }
        }
    }

    /// Solves `A x = b` with one pass of iterative refinement.
    pub fn solve(&self, b: [f64; 4]) -> [f64; 4] {
        let mut x = b;
        self.substitute(&mut x);
        // refinement: r = b - A x, x += A^{-1} r
        let mut r = [0.0; 4];
        for i in 0..4 {
            let mut acc = b[i];
            for j in 0..4 {
                acc -= self.a[i][j] * x[j];
            }
            r[i] = acc;
        }
        self.substitute(&mut r);
        for i in 0..4 {
            x[i] += r[i];
        }
        x
    }

    /// Infinity-norm condition estimate `||A||_inf ||A^{-1}||_inf`, exact for
    /// this size (the inverse is formed column by column).
    pub fn condition_estimate(&self) -> f64 {
        self.cond_inf
    }

    fn estimate_cond(&self) -> f64 {
        let norm_a = self
            .a
            .iter()
            .map(|row| row.iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0_f64, f64::max);
        let mut inv_rows = [[0.0f64; 4]; 4];
        for j in 0..4 {
            let mut e = [0.0; 4];
            e[j] = 1.0;
            self.substitute(&mut e);
            for i in 0..4 {
                inv_rows[i][j] = e[i];
            }
        }
        let norm_inv = inv_rows
            .iter()
            .map(|row| row.iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0_f64, f64::max);
        norm_a * norm_inv
    }
}

/// Real banded matrix with `kl` sub- and `ku` super-diagonals, row-major by
/// diagonals: `band[d][i]` holds `A[i, i + d - kl]` for `d in 0..=kl+ku`.
#[derive(Debug, Clone)]
pub struct Banded {
    pub n: usize,
    pub kl: usize,
    pub ku: usize,
    data: Vec<f64>, // (kl + ku + 1) x n
}

impl Banded {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        Banded {
            n,
            kl,
            ku,
            data: vec![0.0; (kl + ku + 1) * n],
        }
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> Option<usize> {
        let d = j as isize - i as isize;
        if d < -(self.kl as isize) || d > self.ku as isize {
            return None;
        }
        Some((d + self.kl as isize) as usize * self.n + i)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        match self.idx(i, j) {
            Some(k) => self.data[k],
            None => 0.0,
        }
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let k = self
            .idx(i, j)
            .unwrap_or_else(|| panic!("({i},{j}) outside band kl={} ku={}", self.kl, self.ku));
        self.data[k] = v;
    }

    /// `y = A x`.
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.n);
        assert_eq!(y.len(), self.n);
        for i in 0..self.n {
            let jlo = i.saturating_sub(self.kl);
            let jhi = (i + self.ku).min(self.n - 1);
            let mut acc = 0.0;
            for j in jlo..=jhi {
                acc += self.get(i, j) * x[j];
            }
            y[i] = acc;
        }
    }

    /// Banded LU with partial pivoting (LAPACK gbtrf-style; the factored U
    /// gains up to `kl` extra superdiagonals).
    pub fn factor(&self) -> Result<BandedLu> {
        let n = self.n;
        let kl = self.kl;
        let ku = self.ku;
        let kw = kl + ku; // factored upper bandwidth
        let rows = 2 * kl + ku + 1;
        // work[r][j] holds column j, band row r; diagonal at row kl + kw... we
        // store column-wise like LAPACK: work[(r, j)] = A[j + r - (kl + kw), j]
        let mut w = vec![0.0f64; rows * n];
        let at = |r: usize, j: usize| r * n + j;
        for j in 0..n {
            let ilo = j.saturating_sub(ku);
            let ihi = (j + kl).min(n - 1);
            for i in ilo..=ihi {
                let r = i + kw - j; // i - j in -ku..=kl -> r in kl..=kl+ku+kl
                w[at(r, j)] = self.get(i, j);
            }
        }
        let mut piv = vec![0usize; n];
        for k in 0..n {
            // pivot search in column k among rows k..=min(k+kl, n-1)
            let imax = (k + kl).min(n - 1);
            let mut pk = k;
            let mut best = w[at(kw, k)].abs();
            for i in k + 1..=imax {
                let v = w[at(i + kw - k, k)].abs();
                if v > best {
                    best = v;
                    pk = i;
                }
            }
            piv[k] = pk;
            if best == 0.0 {
                return Err(Error::Factorization(format!(
                    "banded matrix is singular at column {k}"
                )));
            }
            if pk != k {
                // swap rows k and pk across the affected columns
                let jhi = (k + kw).min(n - 1);
                for j in k..=jhi {
                    let rk = k + kw - j;
                    let rp = pk + kw - j;
                    w.swap(at(rk, j), at(rp, j));
                }
            }
            let pivval = w[at(kw, k)];
            for i in k + 1..=imax {
                let r = i + kw - k;
                let m = w[at(r, k)] / pivval;
                w[at(r, k)] = m;
                let jhi = (k + kw).min(n - 1);
                for j in k + 1..=jhi {
                    let rij = i + kw - j;
                    let rkj = k + kw - j;
                    w[at(rij, j)] -= m * w[at(rkj, j)];
                }
            }
        }
        Ok(BandedLu {
            n,
            kl,
            kw,
            w,
            piv,
        })
    }
}

/// Factored banded matrix; solves in O(n (kl + ku)^2).
#[derive(Debug, Clone)]
pub struct BandedLu {
    n: usize,
    kl: usize,
    kw: usize,
    w: Vec<f64>,
    piv: Vec<usize>,
}

impl BandedLu {
    pub fn solve(&self, b: &mut [f64]) {
        assert_eq!(b.len(), self.n);
        let n = self.n;
        let at = |r: usize, j: usize| r * n + j;
        for k in 0..n {
            b.swap(k, self.piv[k]);
            let imax = (k + self.kl).min(n - 1);
            for i in k + 1..=imax {
                let m = self.w[at(i + self.kw - k, k)];
                b[i] -= m * b[k];
            }
        }
        for k in (0..n).rev() {
            let jhi = (k + self.kw).min(n - 1);
            let mut acc = b[k];
            for j in k + 1..=jhi {
                acc -= self.w[at(k + self.kw - j, j)] * b[j];
            }
            b[k] = acc / self.w[at(self.kw, k)];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Dense Gaussian elimination, used as the oracle for the banded solver.
    fn dense_solve(a: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
        let n = b.len();
        let mut m: Vec<Vec<f64>> = a.iter().cloned().collect();
        let mut x = b.to_vec();
        for k in 0..n {
            let mut pk = k;
            for i in k + 1..n {
                if m[i][k].abs() > m[pk][k].abs() {
                    pk = i;
                }
            }
            m.swap(k, pk);
            x.swap(k, pk);
            for i in k + 1..n {
                let f = m[i][k] / m[k][k];
                for j in k..n {
                    m[i][j] -= f * m[k][j];
                }
                x[i] -= f * x[k];
            }
        }
        for k in (0..n).rev() {
            for j in k + 1..n {
                x[k] -= m[k][j] * x[j];
            }
            x[k] /= m[k][k];
        }
        x
    }

    #[test]
    fn lu4_solves_and_estimates_condition() {
        let a = [
            [1.0, 0.0, 1.0, 0.0],
            [2.1, 1.0, 0.3, 1.0],
            [1.0, 2.0, -1.0, 0.4],
            [0.0, 1.5, 0.0, -1.0],
        ];
        let lu = Lu4::new(a).unwrap();
        let b = [1.0, -2.0, 0.5, 3.0];
        let x = lu.solve(b);
        for i in 0..4 {
            let mut acc = 0.0;
            for j in 0..4 {
                acc += a[i][j] * x[j];
            }
            assert!((acc - b[i]).abs() < 1e-12);
        }
        assert!(lu.condition_estimate() >= 1.0);
    }

    #[test]
    fn lu4_rejects_singular() {
        let a = [
            [1.0, 0.0, 1.0, 0.0],
            [2.0, 1.0, 0.0, 1.0],
            [1.0, 2.0, -1.0, 0.0],
            [2.0, 0.0, 2.0, 0.0], // multiple of row 0
        ];
        assert!(Lu4::new(a).is_err());
    }

    #[test]
    fn banded_matches_dense_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..40 {
            let n = rng.gen_range(6..40);
            let kl = 2;
            let ku = 2;
            let mut band = Banded::zeros(n, kl, ku);
            let mut dense = vec![vec![0.0; n]; n];
            for i in 0..n {
                for j in i.saturating_sub(kl)..=(i + ku).min(n - 1) {
                    let v: f64 = rng.gen_range(-1.0..1.0);
                    let v = if i == j { v + 4.0 } else { v };
                    band.set(i, j, v);
                    dense[i][j] = v;
                }
            }
            let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let lu = band.factor().unwrap();
            let mut x = b.clone();
            lu.solve(&mut x);
            let y = dense_solve(&dense, &b);
            for i in 0..n {
                assert!(
                    (x[i] - y[i]).abs() < 1e-9 * (1.0 + y[i].abs()),
                    "n={n} i={i}: {} vs {}",
                    x[i],
                    y[i]
                );
            }
        }
    }

    #[test]
    fn banded_pivoting_handles_small_diagonal() {
        // leading diagonal entry forces a pivot swap
        let n = 6;
        let mut band = Banded::zeros(n, 2, 2);
        let entries = [
            (0usize, 0usize, 1e-14),
            (0, 1, 1.0),
            (1, 0, 2.0),
            (1, 1, 1.0),
            (1, 2, -1.0),
            (2, 1, 1.0),
            (2, 2, 3.0),
            (2, 3, 0.5),
            (3, 2, -2.0),
            (3, 3, 1.5),
            (3, 4, 1.0),
            (4, 3, 1.0),
            (4, 4, 2.5),
            (4, 5, -0.5),
            (5, 4, 1.0),
            (5, 5, 1.0),
        ];
        let mut dense = vec![vec![0.0; n]; n];
        for (i, j, v) in entries {
            band.set(i, j, v);
            dense[i][j] = v;
        }
        let b = vec![1.0, 0.0, -1.0, 2.0, 0.5, 1.0];
        let lu = band.factor().unwrap();
        let mut x = b.clone();
        lu.solve(&mut x);
        let y = dense_solve(&dense, &b);
        for i in 0..n {
            assert!((x[i] - y[i]).abs() < 1e-8 * (1.0 + y[i].abs()));
        }
    }

    #[test]
    fn banded_matvec_matches_dense() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 17;
        let mut band = Banded::zeros(n, 2, 2);
        let mut dense = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in i.saturating_sub(2)..=(i + 2).min(n - 1) {
                let v: f64 = rng.gen_range(-1.0..1.0);
                band.set(i, j, v);
                dense[i][j] = v;
            }
        }
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut y = vec![0.0; n];
        band.matvec(&x, &mut y);
        for i in 0..n {
            let want: f64 = (0..n).map(|j| dense[i][j] * x[j]).sum();
            assert!((y[i] - want).abs() < 1e-13);
        }
    }
}
