//! Upper-triangle CSR storage for Hermitian matrices and a banded Cholesky
//! factorization for the shifted solves.

use num_complex::Complex64;

use crate::error::{Error, Result};

pub trait Conj: Copy + Default + std::ops::AddAssign + std::ops::Mul<Output = Self> + Send + Sync {
    fn conj(self) -> Self;
}

impl Conj for f64 {
    #[inline]
    fn conj(self) -> f64 {
        self
    }
}

impl Conj for Complex64 {
    #[inline]
    fn conj(self) -> Complex64 {
        Complex64::conj(&self)
    }
}

/// Hermitian matrix stored by its upper triangle (diagonal included),
/// compressed by rows with ascending column indices.
#[derive(Debug, Clone)]
pub struct CsrUpper<T> {
    pub dim: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub values: Vec<T>,
}

impl<T: Conj> CsrUpper<T> {
    pub fn nnz_upper(&self) -> usize {
        self.values.len()
    }

    /// Largest `col - row` over stored entries.
    pub fn half_bandwidth(&self) -> usize {
        (0..self.dim)
            .filter_map(|r| {
                let end = self.row_ptr[r + 1];
                (end > self.row_ptr[r]).then(|| self.col_idx[end - 1] - r)
            })
            .max()
            .unwrap_or(0)
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        let (a, b) = (self.row_ptr[r], self.row_ptr[r + 1]);
        self.col_idx[a..b].iter().copied().zip(self.values[a..b].iter().copied())
    }

    /// `y = A x` for the full Hermitian matrix.
    pub fn matvec<X>(&self, x: &[X], y: &mut [X])
    where
        X: Copy + Default + std::ops::AddAssign + std::ops::Mul<T, Output = X>,
    {
        y.iter_mut().for_each(|v| *v = X::default());
        for r in 0..self.dim {
            let mut acc = X::default();
            for (c, v) in self.row(r) {
                acc += x[c] * v;
                if c != r {
                    y[c] += x[r] * v.conj();
                }
            }
            y[r] += acc;
        }
    }

    pub fn get(&self, r: usize, c: usize) -> T {
        let (r, c, flip) = if r <= c { (r, c, false) } else { (c, r, true) };
        let (a, b) = (self.row_ptr[r], self.row_ptr[r + 1]);
        match self.col_idx[a..b].binary_search(&c) {
            Ok(k) => {
                let v = self.values[a + k];
                if flip {
                    v.conj()
                } else {
                    v
                }
            }
            Err(_) => T::default(),
        }
    }
}

/// `L Lᴴ` factor of a Hermitian positive definite band matrix. Row `i` of
/// `L` is stored as columns `i - kd ..= i`, zero-padded before column 0.
#[derive(Debug, Clone)]
pub struct BandCholesky {
    n: usize,
    kd: usize,
    rows: Vec<Complex64>,
}

impl BandCholesky {
    /// Factors `H - shift·M`, both given by their upper triangles.
    pub fn factor_shifted(h: &CsrUpper<Complex64>, m: &CsrUpper<f64>, shift: f64) -> Result<Self> {
        let n = h.dim;
        let kd = h.half_bandwidth().max(m.half_bandwidth());
        let w = kd + 1;
        let mut rows = vec![Complex64::new(0.0, 0.0); n * w];
        // upper entry (r, c) is lower entry (c, r) conjugated
        for r in 0..n {
            for (c, v) in h.row(r) {
                rows[c * w + (r + kd - c)] += v.conj();
            }
            for (c, v) in m.row(r) {
                rows[c * w + (r + kd - c)] -= Complex64::new(shift * v, 0.0);
            }
        }
        factor_in_place(&mut rows, n, kd).map_err(|pivot| Error::Factorization { pivot, shift })?;
        Ok(Self { n, kd, rows })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn half_bandwidth(&self) -> usize {
        self.kd
    }

    /// Solves `L Lᴴ x = b` in place.
    pub fn solve_in_place(&self, b: &mut [Complex64]) {
        let (n, kd, w) = (self.n, self.kd, self.kd + 1);
        for i in 0..n {
            let row = &self.rows[i * w..(i + 1) * w];
            let lo = i.saturating_sub(kd);
            let mut s = b[i];
            for (k, l) in (lo..i).zip(&row[lo + kd - i..kd]) {
                s -= l * b[k];
            }
            b[i] = s / row[kd].re;
        }
        for i in (0..n).rev() {
            let row = &self.rows[i * w..(i + 1) * w];
            let xi = b[i] / row[kd].re;
            b[i] = xi;
            let lo = i.saturating_sub(kd);
            for (k, l) in (lo..i).zip(&row[lo + kd - i..kd]) {
                b[k] -= l.conj() * xi;
            }
        }
    }
}

fn factor_in_place(rows: &mut [Complex64], n: usize, kd: usize) -> std::result::Result<(), usize> {
    let w = kd + 1;
    for i in 0..n {
        let lo = i.saturating_sub(kd);
        for j in lo..i {
            // L[i][j] = (A[i][j] - Σ_{k<j} L[i][k] conj(L[j][k])) / L[j][j]
            let klo = lo.max(j.saturating_sub(kd));
            let (head, tail) = rows.split_at_mut(i * w);
            let rj = &head[j * w..(j + 1) * w];
            let ri = &mut tail[..w];
            let a = &ri[klo + kd - i..j + kd - i];
            let b = &rj[klo + kd - j..kd];
            let mut re = 0.0;
            let mut im = 0.0;
            for (x, y) in a.iter().zip(b) {
                // x * conj(y)
                re += x.re * y.re + x.im * y.im;
                im += x.im * y.re - x.re * y.im;
            }
            let s = ri[j + kd - i] - Complex64::new(re, im);
            ri[j + kd - i] = s / rj[kd].re;
        }
        let ri = &mut rows[i * w..(i + 1) * w];
        let d = ri[kd].re - ri[lo + kd - i..kd].iter().map(|x| x.norm_sqr()).sum::<f64>();
        if !(d > 0.0) || !d.is_finite() {
            return Err(i);
        }
        ri[kd] = Complex64::new(d.sqrt(), 0.0);
    }
    Ok(())
}
