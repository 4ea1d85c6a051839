//! Shift-invert Lanczos in the `M` inner product.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::Serialize;

use super::sparse::BandCholesky;
use super::{dot, HermitianSystem};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LanczosOptions {
    /// Ritz estimate `|β_k s_ki| ≤ tol · θ_i` in the inverted spectrum.
    pub tol: f64,
    pub max_iter: usize,
    /// Required final residual `‖(H - κM)ψ‖_{M⁻¹}`.
    pub residual_tol: f64,
    /// Inverse-iteration sweeps with Rayleigh-Ritz after Lanczos.
    pub refine_sweeps: usize,
    /// Extra Ritz vectors carried through refinement.
    pub guard: usize,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        Self { tol: 1e-12, max_iter: 400, residual_tol: 1e-8, refine_sweeps: 2, guard: 2 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EigenResult2D {
    pub eigenvalues: Vec<f64>,
    #[serde(skip)]
    pub eigenvectors: Vec<Vec<Complex64>>,
    pub residuals: Vec<f64>,
    pub shift: f64,
    pub iterations: usize,
}

pub fn solve_sparse(sys: &HermitianSystem, n_eigs: usize, shift: f64) -> Result<EigenResult2D> {
    solve_sparse_with(sys, n_eigs, shift, LanczosOptions::default())
}

/// Solve at shift 0 to a loose tolerance, then again at `0.9 κ₁`.
pub fn solve_lowest(sys: &HermitianSystem, n_eigs: usize) -> Result<EigenResult2D> {
    let coarse = LanczosOptions { tol: 1e-4, residual_tol: f64::INFINITY, refine_sweeps: 0, guard: 0, ..Default::default() };
    let first = solve_sparse_with(sys, 1, 0.0, coarse)?;
    // Ritz values bound κ₁ from above
    let k1 = first.eigenvalues[0];
    let mut last = None;
    for f in [0.9, 0.7, 0.0] {
        match solve_sparse_with(sys, n_eigs, f * k1, LanczosOptions::default()) {
            Err(e @ Error::Factorization { .. }) => {
                log::warn!("{e}");
                last = Some(e);
            }
            r => return r,
        }
    }
    Err(last.unwrap())
}

fn start_vector(n: usize) -> Vec<Complex64> {
    // deterministic, generic in every invariant subspace
    (0..n)
        .map(|k| {
            let x = k as f64;
            Complex64::new(1.0 + 0.5 * (0.7548776662 * x).sin(), 0.5 * (0.5698402910 * x + 0.3).cos())
        })
        .collect()
}

fn axpy(a: Complex64, x: &[Complex64], y: &mut [Complex64]) {
    y.iter_mut().zip(x).for_each(|(yi, xi)| *yi += a * xi);
}

pub fn solve_sparse_with(sys: &HermitianSystem, n_eigs: usize, shift: f64, opts: LanczosOptions) -> Result<EigenResult2D> {
    let n = sys.dim();
    if n_eigs == 0 || n_eigs > n {
        return Err(Error::InvalidParameter(format!("n_eigs must be in 1..={n}, got {n_eigs}")));
    }
    let factor = BandCholesky::factor_shifted(&sys.h, &sys.m, shift)?;
    let op = |x: &[Complex64], mx: &mut Vec<Complex64>| -> Vec<Complex64> {
        sys.apply_m(x, mx);
        let mut y = mx.clone();
        factor.solve_in_place(&mut y);
        y
    };

    let max_iter = opts.max_iter.min(n);
    let mut q: Vec<Vec<Complex64>> = Vec::new();
    let mut mq: Vec<Vec<Complex64>> = Vec::new();
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();

    let mut v = start_vector(n);
    let mut mv = vec![Complex64::default(); n];
    sys.apply_m(&v, &mut mv);
    let nv = dot(&v, &mv).re.sqrt();
    v.iter_mut().for_each(|z| *z /= nv);
    mv.iter_mut().for_each(|z| *z /= nv);
    q.push(v);
    mq.push(mv);

    let want = n_eigs + opts.guard;
    let mut ritz: Option<(Vec<f64>, DMatrix<f64>)> = None;
    let mut scratch = vec![Complex64::default(); n];
    let mut iterations = 0;
    for j in 0..max_iter {
        iterations = j + 1;
        let mut w = op(&q[j], &mut scratch);
        let a = dot(&mq[j], &w).re;
        axpy(Complex64::new(-a, 0.0), &q[j], &mut w);
        if j > 0 {
            axpy(Complex64::new(-beta[j - 1], 0.0), &q[j - 1], &mut w);
        }
        // full reorthogonalization, twice
        for _ in 0..2 {
            for (qi, mqi) in q.iter().zip(&mq) {
                let h = dot(mqi, &w);
                axpy(-h, qi, &mut w);
            }
        }
        alpha.push(a);
        let mut mw = vec![Complex64::default(); n];
        sys.apply_m(&w, &mut mw);
        let b = dot(&w, &mw).re.max(0.0).sqrt();

        let k = j + 1;
        let check = k >= want.min(n) && (k % 5 == 0 || b < 1e-13 || k == max_iter);
        if check {
            let (theta, s) = tridiag_eigen(&alpha, &beta);
            let good = (0..n_eigs.min(k)).all(|i| (b * s[(k - 1, i)]).abs() <= opts.tol * theta[i].abs());
            ritz = Some((theta, s));
            if good && k >= n_eigs {
                break;
            }
        }
        if b < 1e-13 {
            break;
        }
        if k == max_iter {
            let (theta, _) = ritz.take().unwrap_or_else(|| tridiag_eigen(&alpha, &beta));
            let est: Vec<f64> = theta.iter().take(n_eigs).map(|t| shift + 1.0 / t).collect();
            return Err(Error::Convergence {
                what: "shift-invert Lanczos",
                iterations,
                detail: format!("Ritz values {est:?} not converged to {:e}", opts.tol),
            });
        }
        beta.push(b);
        w.iter_mut().for_each(|z| *z /= b);
        mw.iter_mut().for_each(|z| *z /= b);
        q.push(w);
        mq.push(mw);
    }
    let (theta, s) = ritz.unwrap_or_else(|| tridiag_eigen(&alpha, &beta));
    let k = alpha.len();
    let p = want.min(k);
    let mut vecs: Vec<Vec<Complex64>> = (0..p)
        .map(|i| {
            let mut x = vec![Complex64::default(); n];
            for (r, qr) in q.iter().take(k).enumerate() {
                axpy(Complex64::new(s[(r, i)], 0.0), qr, &mut x);
            }
            x
        })
        .collect();
    drop(q);
    drop(mq);
    let mut values: Vec<f64> = theta.iter().take(p).map(|t| shift + 1.0 / t).collect();

    for _ in 0..opts.refine_sweeps {
        let z: Vec<Vec<Complex64>> = vecs.iter().map(|x| op(x, &mut scratch)).collect();
        let (vals, xs) = rayleigh_ritz(sys, &z)?;
        values = vals;
        vecs = xs;
    }

    vecs.truncate(n_eigs);
    values.truncate(n_eigs);
    let mut residuals = Vec::with_capacity(n_eigs);
    for (x, &lam) in vecs.iter_mut().zip(&values) {
        let nx = sys.m_norm(x);
        x.iter_mut().for_each(|z| *z /= nx);
        fix_phase(x);
        residuals.push(sys.residual(x, lam));
    }
    if let Some((i, r)) = residuals.iter().enumerate().find(|(_, r)| !(**r <= opts.residual_tol)) {
        return Err(Error::Convergence {
            what: "shift-invert Lanczos",
            iterations,
            detail: format!("residual {r:e} of eigenpair {} (κ = {}) above {:e}", i + 1, values[i], opts.residual_tol),
        });
    }
    Ok(EigenResult2D { eigenvalues: values, eigenvectors: vecs, residuals, shift, iterations })
}

/// Eigenpairs of the Lanczos tridiagonal, eigenvalues descending.
fn tridiag_eigen(alpha: &[f64], beta: &[f64]) -> (Vec<f64>, DMatrix<f64>) {
    let k = alpha.len();
    let mut t = DMatrix::zeros(k, k);
    for i in 0..k {
        t[(i, i)] = alpha[i];
        if i + 1 < k {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    let eig = SymmetricEigen::new(t);
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let theta = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let s = DMatrix::from_fn(k, k, |r, c| eig.eigenvectors[(r, order[c])]);
    (theta, s)
}

/// Rayleigh-Ritz of `(H, M)` on `span(z)`; ascending.
fn rayleigh_ritz(sys: &HermitianSystem, z: &[Vec<Complex64>]) -> Result<(Vec<f64>, Vec<Vec<Complex64>>)> {
    let p = z.len();
    let n = sys.dim();
    let mut hz = vec![vec![Complex64::default(); n]; p];
    let mut mz = vec![vec![Complex64::default(); n]; p];
    for i in 0..p {
        sys.apply_h(&z[i], &mut hz[i]);
        sys.apply_m(&z[i], &mut mz[i]);
    }
    let hp = DMatrix::from_fn(p, p, |i, j| dot(&z[i], &hz[j]));
    let mp = DMatrix::from_fn(p, p, |i, j| dot(&z[i], &mz[j]));
    let hp = (&hp + hp.adjoint()) * Complex64::new(0.5, 0.0);
    let mp = (&mp + mp.adjoint()) * Complex64::new(0.5, 0.0);
    let l = mp.cholesky().ok_or_else(|| Error::MassNotSpd("Ritz basis became dependent".into()))?;
    let linv = l.l().try_inverse().ok_or_else(|| Error::MassNotSpd("Ritz basis became dependent".into()))?;
    let c = &linv * hp * linv.adjoint();
    let c = (&c + c.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(c);
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let coeffs = linv.adjoint() * &eig.eigenvectors;
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = order
        .iter()
        .map(|&c| {
            let mut x = vec![Complex64::default(); n];
            for (r, zr) in z.iter().enumerate() {
                axpy(coeffs[(r, c)], zr, &mut x);
            }
            x
        })
        .collect();
    Ok((vals, vecs))
}

/// Rotates so the largest-modulus entry is real positive.
fn fix_phase(x: &mut [Complex64]) {
    let Some(big) = x.iter().copied().max_by(|a, b| a.norm_sqr().total_cmp(&b.norm_sqr())) else {
        return;
    };
    if big.norm() > 0.0 {
        let ph = big.conj() / big.norm();
        x.iter_mut().for_each(|z| *z *= ph);
    }
}
