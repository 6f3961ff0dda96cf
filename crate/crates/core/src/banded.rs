//! Symmetric banded matrices and their Cholesky factors.
//!
//! Storage is the lower band: `band[i][k] = A[i][i - k]` for `k = 0..=bw`.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct BandedSym {
    n: usize,
    bw: usize,
    band: Vec<f64>,
}

impl BandedSym {
    pub fn zeros(n: usize, bw: usize) -> Self {
        Self {
            n,
            bw,
            band: vec![0.0; n * (bw + 1)],
        }
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut out = Self::zeros(diag.len(), 0);
        out.band.copy_from_slice(diag);
        out
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.bw
    }

    fn idx(&self, i: usize, k: usize) -> usize {
        i * (self.bw + 1) + k
    }

    /// Entry `A[i][j]`; zero outside the band.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        let k = i - j;
        if k > self.bw {
            0.0
        } else {
            self.band[self.idx(i, k)]
        }
    }

    /// Adds `value` to `A[i][j]` (and, implicitly, to `A[j][i]`).
    pub fn add(&mut self, i: usize, j: usize, value: f64) {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        let k = i - j;
        assert!(k <= self.bw, "entry ({i},{j}) outside bandwidth {}", self.bw);
        let idx = self.idx(i, k);
        self.band[idx] += value;
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.band[self.idx(i, 0)]).collect()
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n);
        debug_assert_eq!(y.len(), self.n);
        y.iter_mut().for_each(|v| *v = 0.0);
        for i in 0..self.n {
            let row = &self.band[i * (self.bw + 1)..(i + 1) * (self.bw + 1)];
            y[i] += row[0] * x[i];
            for k in 1..=self.bw.min(i) {
                let a = row[k];
                if a != 0.0 {
                    y[i] += a * x[i - k];
                    y[i - k] += a * x[i];
                }
            }
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.matvec(x, &mut y);
        y
    }

    /// Quadratic form `xᵀ A x`.
    pub fn quad_form(&self, x: &[f64]) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.n {
            let row = &self.band[i * (self.bw + 1)..(i + 1) * (self.bw + 1)];
            acc += row[0] * x[i] * x[i];
            for k in 1..=self.bw.min(i) {
                acc += 2.0 * row[k] * x[i] * x[i - k];
            }
        }
        acc
    }

    /// `Σ c_j A_j` for matrices sharing the dimension; the result has the widest band.
    pub fn linear_combination(parts: &[(f64, &BandedSym)]) -> Self {
        let n = parts[0].1.n;
        let bw = parts.iter().map(|(_, m)| m.bw).max().unwrap_or(0);
        let mut out = Self::zeros(n, bw);
        for &(c, m) in parts {
            assert_eq!(m.n, n);
            for i in 0..n {
                for k in 0..=m.bw.min(i) {
                    let v = m.band[m.idx(i, k)];
                    let idx = out.idx(i, k);
                    out.band[idx] += c * v;
                }
            }
        }
        out
    }

    pub fn cholesky(&self) -> Result<BandCholesky> {
        let n = self.n;
        let bw = self.bw;
        let mut l = self.band.clone();
        let at = |i: usize, k: usize| i * (bw + 1) + k;
        for i in 0..n {
            let lo = i.saturating_sub(bw);
            for j in lo..=i {
                // L[i][j] = (A[i][j] - Σ_{k<j} L[i][k] L[j][k]) / L[j][j]
                let mut s = l[at(i, i - j)];
                let klo = lo.max(j.saturating_sub(bw));
                for k in klo..j {
                    s -= l[at(i, i - k)] * l[at(j, j - k)];
                }
                if i == j {
                    if s <= 0.0 || !s.is_finite() {
                        return Err(Error::Domain(format!(
                            "matrix is not positive definite (pivot {s:e} at row {i})"
                        )));
                    }
                    l[at(i, 0)] = s.sqrt();
                } else {
                    l[at(i, i - j)] = s / l[at(j, 0)];
                }
            }
        }
        Ok(BandCholesky { n, bw, l })
    }
}

/// Lower-triangular banded factor `L` with `A = L Lᵀ`.
#[derive(Debug, Clone)]
pub struct BandCholesky {
    n: usize,
    bw: usize,
    l: Vec<f64>,
}

impl BandCholesky {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve_in_place(&self, b: &mut [f64]) {
        let bw = self.bw;
        let at = |i: usize, k: usize| i * (bw + 1) + k;
        for i in 0..self.n {
            let mut s = b[i];
            for j in i.saturating_sub(bw)..i {
                s -= self.l[at(i, i - j)] * b[j];
            }
            b[i] = s / self.l[at(i, 0)];
        }
        for i in (0..self.n).rev() {
            let mut s = b[i];
            for j in (i + 1)..(i + bw + 1).min(self.n) {
                s -= self.l[at(j, j - i)] * b[j];
            }
            b[i] = s / self.l[at(i, 0)];
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}
