//! Galerkin matrices of `D_t^2 + V(t)` on a [`SpectralMesh1D`] and the dense
//! generalized symmetric eigensolver built on them.
//!
//! Matrices can be dumped in the `MCX1` binary layout for debugging:
//!
//! ```text
//! b"MCX1" | nrows: u64 LE | ncols: u64 LE | nrows*ncols f64 LE, column-major
//! ```
//!
//! [`OperatorMatrices::write_mcx1`] writes stiffness, potential and mass in
//! that order as three consecutive records.

use std::io::{Read, Write};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::mesh::SpectralMesh1D;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BoundaryCondition {
    /// No essential constraint in the weak form.
    #[default]
    Natural,
    /// Homogeneous Dirichlet at both interval ends.
    Dirichlet,
}

#[derive(Debug, Clone)]
pub struct OperatorMatrices {
    pub stiffness: DMatrix<f64>,
    pub potential: DMatrix<f64>,
    pub mass: DMatrix<f64>,
    /// Constrained (zero) degrees of freedom.
    pub essential: Vec<usize>,
}

impl OperatorMatrices {
    pub fn dim(&self) -> usize {
        self.mass.nrows()
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        [&self.stiffness, &self.potential, &self.mass]
            .iter()
            .all(|m| (*m - m.transpose()).amax() <= tol * m.amax().max(1.0))
    }

    pub fn write_mcx1<W: Write>(&self, mut w: W) -> Result<()> {
        for m in [&self.stiffness, &self.potential, &self.mass] {
            write_mcx1(&mut w, m)?;
        }
        Ok(())
    }
}

pub fn write_mcx1<W: Write>(w: &mut W, m: &DMatrix<f64>) -> Result<()> {
    w.write_all(b"MCX1")?;
    w.write_all(&(m.nrows() as u64).to_le_bytes())?;
    w.write_all(&(m.ncols() as u64).to_le_bytes())?;
    // nalgebra storage is column-major already
    for x in m.as_slice() {
        w.write_all(&x.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_mcx1<R: Read>(r: &mut R) -> Result<DMatrix<f64>> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != b"MCX1" {
        return Err(Error::InvalidParameter(format!("bad MCX1 magic {magic:?}")));
    }
    let mut b8 = [0u8; 8];
    r.read_exact(&mut b8)?;
    let nrows = u64::from_le_bytes(b8) as usize;
    r.read_exact(&mut b8)?;
    let ncols = u64::from_le_bytes(b8) as usize;
    let mut data = Vec::with_capacity(nrows * ncols);
    for _ in 0..nrows * ncols {
        r.read_exact(&mut b8)?;
        data.push(f64::from_le_bytes(b8));
    }
    Ok(DMatrix::from_vec(nrows, ncols, data))
}

/// Weighted mass matrix `∫ w(x) φ_i φ_j` by the mesh quadrature.
pub fn weighted_mass(mesh: &SpectralMesh1D, weight: impl Fn(f64) -> f64) -> Result<DMatrix<f64>> {
    let n = mesh.n_nodes();
    let nl = mesh.degree() + 1;
    let mut m = DMatrix::zeros(n, n);
    for e in 0..mesh.n_elements() {
        let xs = mesh.quad_points(e);
        let ws = mesh.quad_weights(e);
        for q in 0..mesh.n_quad() {
            let v = weight(xs[q]);
            if !v.is_finite() {
                return Err(Error::Assembly { point: xs[q], value: v });
            }
            let phi = mesh.basis_values(q);
            let c = ws[q] * v;
            for a in 0..nl {
                let ia = mesh.dof(e, a);
                for b in 0..nl {
                    m[(ia, mesh.dof(e, b))] += c * phi[a] * phi[b];
                }
            }
        }
    }
    Ok(m)
}

/// Stiffness matrix `∫ φ_i' φ_j'`.
pub fn stiffness(mesh: &SpectralMesh1D) -> DMatrix<f64> {
    let n = mesh.n_nodes();
    let nl = mesh.degree() + 1;
    let mut k = DMatrix::zeros(n, n);
    for e in 0..mesh.n_elements() {
        let ws = mesh.quad_weights(e);
        let inv_j = 1.0 / mesh.jacobian(e);
        for q in 0..mesh.n_quad() {
            let d = mesh.basis_ref_derivs(q);
            let c = ws[q] * inv_j * inv_j;
            for a in 0..nl {
                let ia = mesh.dof(e, a);
                for b in 0..nl {
                    k[(ia, mesh.dof(e, b))] += c * d[a] * d[b];
                }
            }
        }
    }
    k
}

/// Antisymmetric first-order matrix `G_ij = ∫ w(x) (φ_j φ_i' - φ_j' φ_i)`.
pub fn weighted_skew(mesh: &SpectralMesh1D, weight: impl Fn(f64) -> f64) -> DMatrix<f64> {
    let n = mesh.n_nodes();
    let nl = mesh.degree() + 1;
    let mut g = DMatrix::zeros(n, n);
    for e in 0..mesh.n_elements() {
        let xs = mesh.quad_points(e);
        let ws = mesh.quad_weights(e);
        let inv_j = 1.0 / mesh.jacobian(e);
        for q in 0..mesh.n_quad() {
            let phi = mesh.basis_values(q);
            let d = mesh.basis_ref_derivs(q);
            let c = ws[q] * weight(xs[q]) * inv_j;
            for a in 0..nl {
                let ia = mesh.dof(e, a);
                for b in 0..nl {
                    g[(ia, mesh.dof(e, b))] += c * (phi[b] * d[a] - d[b] * phi[a]);
                }
            }
        }
    }
    g
}

pub fn assemble_1d(mesh: &SpectralMesh1D, potential: impl Fn(f64) -> f64) -> Result<OperatorMatrices> {
    assemble_1d_with_bc(mesh, potential, BoundaryCondition::Natural)
}

pub fn assemble_1d_with_bc(
    mesh: &SpectralMesh1D,
    potential: impl Fn(f64) -> f64,
    bc: BoundaryCondition,
) -> Result<OperatorMatrices> {
    let essential = match bc {
        BoundaryCondition::Natural => Vec::new(),
        BoundaryCondition::Dirichlet => vec![0, mesh.n_nodes() - 1],
    };
    Ok(OperatorMatrices {
        stiffness: stiffness(mesh),
        potential: weighted_mass(mesh, potential)?,
        mass: weighted_mass(mesh, |_| 1.0)?,
        essential,
    })
}

#[derive(Debug, Clone)]
pub struct EigenResult1D {
    pub eigenvalues: Vec<f64>,
    /// Nodal coefficient vectors (full length, zero on essential dofs),
    /// orthonormal in the mass inner product.
    pub eigenvectors: Vec<DVector<f64>>,
    /// `‖(K+P)v - λMv‖_{M⁻¹} / ‖v‖_M` per pair.
    pub residual_norms: Vec<f64>,
}

fn restrict(m: &DMatrix<f64>, free: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(free.len(), free.len(), |i, j| m[(free[i], free[j])])
}

/// Smallest `n_eigs` eigenpairs of `(K + P) v = λ M v`.
///
/// `M = L Lᵀ` reduces the pencil to `L⁻¹ (K+P) L⁻ᵀ`, which is diagonalized in
/// full. Each eigenvalue is then replaced by the Rayleigh quotient of its
/// back-transformed vector in the original pencil, which recovers accuracy
/// lost to the large upper spectrum of the reduced matrix.
pub fn solve_dense_sym(mats: &OperatorMatrices, n_eigs: usize) -> Result<EigenResult1D> {
    let n = mats.dim();
    let free: Vec<usize> = (0..n).filter(|i| !mats.essential.contains(i)).collect();
    let nf = free.len();
    if n_eigs == 0 || n_eigs > nf {
        return Err(Error::InvalidParameter(format!("requested {n_eigs} eigenpairs of a {nf}-dimensional problem")));
    }
    let a = restrict(&(&mats.stiffness + &mats.potential), &free);
    let m = restrict(&mats.mass, &free);

    let chol = m
        .clone()
        .cholesky()
        .ok_or_else(|| Error::MassNotSpd(format!("{nf}x{nf} mass matrix")))?;
    let l = chol.l();
    let x = l
        .solve_lower_triangular(&a)
        .ok_or_else(|| Error::MassNotSpd("singular Cholesky factor".into()))?;
    let c = l
        .solve_lower_triangular(&x.transpose())
        .ok_or_else(|| Error::MassNotSpd("singular Cholesky factor".into()))?;
    let c = (&c + c.transpose()) * 0.5;

    let max_iter = 100 * nf.max(10);
    let eig = c.clone().try_symmetric_eigen(f64::EPSILON, max_iter).ok_or_else(|| Error::Convergence {
        what: "dense symmetric eigensolver",
        iterations: max_iter,
        detail: format!("implicit QR did not converge on a {nf}x{nf} matrix"),
    })?;
    let mut order: Vec<usize> = (0..nf).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));

    let lt = l.transpose();
    let mut vecs: Vec<DVector<f64>> = Vec::with_capacity(n_eigs);
    let mut vals = Vec::with_capacity(n_eigs);
    for &k in order.iter().take(n_eigs) {
        let y = eig.eigenvectors.column(k).into_owned();
        let mut v = lt
            .solve_upper_triangular(&y)
            .ok_or_else(|| Error::MassNotSpd("singular Cholesky factor".into()))?;
        // M-orthogonalize against previous vectors (they are already close).
        for p in &vecs {
            let c = p.dot(&(&m * &v));
            v -= p * c;
        }
        let mv = &m * &v;
        let nrm = v.dot(&mv).sqrt();
        v /= nrm;
        let rq = v.dot(&(&a * &v));
        vals.push(rq);
        vecs.push(v);
    }

    let mut residual_norms = Vec::with_capacity(n_eigs);
    for (v, &lam) in vecs.iter().zip(&vals) {
        let r = &a * v - (&m * v) * lam;
        let z = l.solve_lower_triangular(&r).unwrap_or(r);
        residual_norms.push(z.norm());
    }

    let eigenvectors = vecs
        .into_iter()
        .map(|v| {
            let mut full = DVector::zeros(n);
            for (k, &i) in free.iter().enumerate() {
                full[i] = v[k];
            }
            full
        })
        .collect();
    Ok(EigenResult1D { eigenvalues: vals, eigenvectors, residual_norms })
}
