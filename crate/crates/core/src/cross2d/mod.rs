//! Tensor-product spectral elements for the crossing operator
//!
//! ```text
//! X_ε = D_τ² + (D_σ - τ³/3 + ε²σ²τ)²
//! ```
//!
//! on rectangles with natural boundary conditions, the dilated form in
//! `(s, t) = (εσ, τ)`, and the localized form around a band minimum.
//! Degrees of freedom are ordered `ix · n_y + iy`.

mod form;
mod lanczos;
mod sparse;

use std::io::Write;
use std::sync::Arc;

use nalgebra::{Cholesky, DMatrix, Dyn};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::core1d::{stiffness, weighted_mass, weighted_skew};
use crate::error::{Error, Result};
use crate::mesh::{MeshSpec, SpectralMesh1D};
use crate::output::fmt17;

pub use form::{MagneticForm, Monomial};
pub use lanczos::{solve_lowest, solve_sparse, solve_sparse_with, EigenResult2D, LanczosOptions};
pub use sparse::{BandCholesky, Conj, CsrUpper};

/// Refuse assemblies whose factorization would need more than this.
pub const MAX_FACTOR_BYTES: usize = 12 << 30;

pub const LADDER_ELEMENTS: (usize, usize) = (48, 6);
pub const LADDER_DEGREE: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variables {
    /// `(σ, τ)`: `c = 1`, `W = -τ³/3 + ε²σ²τ`.
    SigmaTau,
    /// `(s, t) = (εσ, τ)`: `c = ε`, `W = s²t - t³/3`.
    ST,
    /// `s = α₀ + √ε 𝔰`: `c = √ε`,
    /// `W = ξ₀ + ε𝔰²𝔱 + 2√ε α₀ 𝔰𝔱 + α₀²𝔱 - 𝔱³/3`.
    Localized { alpha0: f64, xi0: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x: (f64, f64),
    pub y: (f64, f64),
}

impl Rect {
    pub fn new(x: (f64, f64), y: (f64, f64)) -> Self {
        Self { x, y }
    }

    pub fn contains(&self, other: &Rect) -> bool {
        let tol = |v: f64| 1e-12 * (1.0 + v.abs());
        other.x.0 >= self.x.0 - tol(self.x.0)
            && other.x.1 <= self.x.1 + tol(self.x.1)
            && other.y.0 >= self.y.0 - tol(self.y.0)
            && other.y.1 <= self.y.1 + tol(self.y.1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossOperatorSpec {
    pub epsilon: f64,
    pub variables: Variables,
    /// First variable (`σ`, `s` or `𝔰`).
    pub mesh_s: MeshSpec,
    /// Second variable (`τ`, `t` or `𝔱`).
    pub mesh_t: MeshSpec,
}

impl CrossOperatorSpec {
    /// `[-a, a] × [-b, b]` in `(σ, τ)`.
    pub fn sigma_tau(epsilon: f64, a: f64, b: f64, elements: (usize, usize), degree: usize) -> Self {
        Self {
            epsilon,
            variables: Variables::SigmaTau,
            mesh_s: MeshSpec::new(-a, a, elements.0, degree),
            mesh_t: MeshSpec::new(-b, b, elements.1, degree),
        }
    }

    /// The same rectangle as [`Self::sigma_tau`] mapped to `(s, t)`.
    pub fn st(epsilon: f64, a: f64, b: f64, elements: (usize, usize), degree: usize) -> Self {
        Self {
            epsilon,
            variables: Variables::ST,
            mesh_s: MeshSpec::new(-epsilon * a, epsilon * a, elements.0, degree),
            mesh_t: MeshSpec::new(-b, b, elements.1, degree),
        }
    }

    /// Ladder configuration for level `l`: `ε = 2^(-1-l/2)`, `a = 4/ε`, the
    /// rectangle `[-a, a] × [-8, 8]` up to `l = 5` and `[-a/2, a/2] × [-4, 4]`
    /// beyond, 48×6 elements.
    pub fn ladder(l: usize, degree: usize) -> Self {
        Self::for_epsilon(ladder_epsilon(l), degree)
    }

    /// The ladder recipe at an arbitrary `ε`: full rectangle for
    /// `ε ≥ ε₅`, halved below.
    pub fn for_epsilon(epsilon: f64, degree: usize) -> Self {
        let a = 4.0 / epsilon;
        if epsilon >= ladder_epsilon(5) * (1.0 - 1e-12) {
            Self::sigma_tau(epsilon, a, 8.0, LADDER_ELEMENTS, degree)
        } else {
            Self::sigma_tau(epsilon, a / 2.0, 4.0, LADDER_ELEMENTS, degree)
        }
    }

    pub fn domain(&self) -> Rect {
        Rect::new((self.mesh_s.lo, self.mesh_s.hi), (self.mesh_t.lo, self.mesh_t.hi))
    }

    pub fn form(&self) -> MagneticForm {
        let e = self.epsilon;
        let cubic = Monomial::new(-1.0 / 3.0, 0, 3);
        match self.variables {
            Variables::SigmaTau => MagneticForm::new(1.0, vec![cubic, Monomial::new(e * e, 2, 1)]),
            Variables::ST => MagneticForm::new(e, vec![cubic, Monomial::new(1.0, 2, 1)]),
            Variables::Localized { alpha0, xi0 } => MagneticForm::new(
                e.sqrt(),
                vec![
                    Monomial::new(xi0, 0, 0),
                    Monomial::new(e, 2, 1),
                    Monomial::new(2.0 * e.sqrt() * alpha0, 1, 1),
                    Monomial::new(alpha0 * alpha0, 0, 1),
                    cubic,
                ],
            ),
        }
    }

    /// Field `∂_τ A₁ = -τ² + ε²σ²` (SigmaTau variables).
    pub fn field(&self, sigma: f64, tau: f64) -> f64 {
        -tau * tau + self.epsilon * self.epsilon * sigma * sigma
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::InvalidParameter(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        Ok(())
    }
}

pub fn ladder_epsilon(l: usize) -> f64 {
    2f64.powf(-1.0 - l as f64 / 2.0)
}

/// Discrete `H` and `M` with the 1D factors of `M = M_s ⊗ M_t`.
#[derive(Debug, Clone)]
pub struct HermitianSystem {
    pub h: CsrUpper<Complex64>,
    pub m: CsrUpper<f64>,
    mesh_s: Arc<SpectralMesh1D>,
    mesh_t: Arc<SpectralMesh1D>,
    chol_s: Cholesky<f64, Dyn>,
    chol_t: Cholesky<f64, Dyn>,
}

/// Size of an assembly, known before any allocation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct AssemblyStats {
    pub dim: usize,
    pub nnz_upper: usize,
    pub half_bandwidth: usize,
    pub factor_bytes: usize,
}

impl AssemblyStats {
    pub fn of(mesh_s: &MeshSpec, mesh_t: &MeshSpec) -> Self {
        let (ns, nt) = (mesh_s.n_elements * mesh_s.degree + 1, mesh_t.n_elements * mesh_t.degree + 1);
        let nnz_1d = |n_el: usize, q: usize| {
            // full rows of every element block, shared vertices counted once
            n_el * (q + 1) * (q + 1) - (n_el - 1)
        };
        let full = nnz_1d(mesh_s.n_elements, mesh_s.degree) * nnz_1d(mesh_t.n_elements, mesh_t.degree);
        let dim = ns * nt;
        let kd = mesh_s.degree * nt + mesh_t.degree;
        Self { dim, nnz_upper: (full + dim) / 2, half_bandwidth: kd, factor_bytes: dim * (kd + 1) * 16 }
    }
}

impl HermitianSystem {
    pub fn dim(&self) -> usize {
        self.h.dim
    }

    pub fn mesh_s(&self) -> &Arc<SpectralMesh1D> {
        &self.mesh_s
    }

    pub fn mesh_t(&self) -> &Arc<SpectralMesh1D> {
        &self.mesh_t
    }

    pub fn apply_h(&self, x: &[Complex64], y: &mut [Complex64]) {
        self.h.matvec(x, y)
    }

    pub fn apply_m(&self, x: &[Complex64], y: &mut [Complex64]) {
        self.m.matvec(x, y)
    }

    /// `M⁻¹ r` through the Kronecker factors: `M_s⁻¹ R M_t⁻¹` with `R` the
    /// `n_s × n_t` reshaping of `r`.
    pub fn solve_mass(&self, r: &[Complex64]) -> Vec<Complex64> {
        let (ns, nt) = (self.mesh_s.n_nodes(), self.mesh_t.n_nodes());
        let part = |f: fn(&Complex64) -> f64| {
            let rm = DMatrix::from_row_iterator(ns, nt, r.iter().map(f));
            let a = self.chol_s.solve(&rm);
            self.chol_t.solve(&a.transpose())
        };
        let re = part(|z| z.re);
        let im = part(|z| z.im);
        // re, im hold the transposed result (n_t × n_s, column-major)
        let mut out = Vec::with_capacity(r.len());
        for i in 0..ns {
            for j in 0..nt {
                out.push(Complex64::new(re[(j, i)], im[(j, i)]));
            }
        }
        out
    }

    pub fn m_norm(&self, x: &[Complex64]) -> f64 {
        let mut mx = vec![Complex64::default(); x.len()];
        self.apply_m(x, &mut mx);
        dot(x, &mx).re.max(0.0).sqrt()
    }

    /// `sqrt(rᴴ M⁻¹ r)`, the discrete `L²` norm of the functional `r`.
    pub fn dual_norm(&self, r: &[Complex64]) -> f64 {
        let z = self.solve_mass(r);
        dot(r, &z).re.max(0.0).sqrt()
    }

    pub fn rayleigh(&self, x: &[Complex64]) -> f64 {
        let mut hx = vec![Complex64::default(); x.len()];
        self.apply_h(x, &mut hx);
        dot(x, &hx).re / self.m_norm(x).powi(2)
    }

    /// `‖(H - λM)x‖_{M⁻¹} / ‖x‖_M`.
    pub fn residual(&self, x: &[Complex64], lambda: f64) -> f64 {
        let mut hx = vec![Complex64::default(); x.len()];
        let mut mx = vec![Complex64::default(); x.len()];
        self.apply_h(x, &mut hx);
        self.apply_m(x, &mut mx);
        let r: Vec<Complex64> = hx.iter().zip(&mx).map(|(h, m)| h - m * lambda).collect();
        self.dual_norm(&r) / dot(x, &mx).re.sqrt()
    }

    /// Largest `|Im H_ii|` relative to the largest entry; zero up to
    /// rounding for a Hermitian assembly.
    pub fn hermitian_defect(&self) -> f64 {
        let max = self.h.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let diag = (0..self.dim()).map(|r| self.h.get(r, r).im.abs()).fold(0.0, f64::max);
        diag / max
    }

    /// Nodal values of `f` at the tensor nodes.
    pub fn interpolate(&self, f: impl Fn(f64, f64) -> Complex64) -> Vec<Complex64> {
        let (xs, ys) = (self.mesh_s.nodes(), self.mesh_t.nodes());
        xs.iter().flat_map(|&x| ys.iter().map(move |&y| (x, y))).map(|(x, y)| f(x, y)).collect()
    }

    /// Values at the tensor quadrature points, ordered like
    /// [`Self::quadrature_points`].
    pub fn values_at_quadrature(&self, v: &[Complex64]) -> Vec<Complex64> {
        let (ms, mt) = (&self.mesh_s, &self.mesh_t);
        let (nqs, nqt) = (ms.n_quad() * ms.n_elements(), mt.n_quad() * mt.n_elements());
        let nt = mt.n_nodes();
        // contract along t first: T[ix][qt]
        let mut tmp = vec![Complex64::default(); ms.n_nodes() * nqt];
        for ix in 0..ms.n_nodes() {
            let row = &v[ix * nt..(ix + 1) * nt];
            for e in 0..mt.n_elements() {
                for q in 0..mt.n_quad() {
                    let phi = mt.basis_values(q);
                    let s: Complex64 = phi.iter().enumerate().map(|(a, p)| row[mt.dof(e, a)] * p).sum();
                    tmp[ix * nqt + e * mt.n_quad() + q] = s;
                }
            }
        }
        let mut out = vec![Complex64::default(); nqs * nqt];
        for e in 0..ms.n_elements() {
            for q in 0..ms.n_quad() {
                let phi = ms.basis_values(q);
                let dst = &mut out[(e * ms.n_quad() + q) * nqt..][..nqt];
                for (a, p) in phi.iter().enumerate() {
                    let src = &tmp[ms.dof(e, a) * nqt..][..nqt];
                    dst.iter_mut().zip(src).for_each(|(d, s)| *d += s * p);
                }
            }
        }
        out
    }

    /// Tensor quadrature as `(x, y, weight)`, `x` slowest.
    pub fn quadrature_points(&self) -> Vec<(f64, f64, f64)> {
        let (xs, wx) = (self.mesh_s.all_quad_points(), self.mesh_s.all_quad_weights());
        let (ys, wy) = (self.mesh_t.all_quad_points(), self.mesh_t.all_quad_weights());
        let mut out = Vec::with_capacity(xs.len() * ys.len());
        for (x, a) in xs.iter().zip(wx) {
            for (y, b) in ys.iter().zip(wy) {
                out.push((*x, *y, a * b));
            }
        }
        out
    }

    /// Point value of the nodal function `v`.
    pub fn evaluate(&self, v: &[Complex64], x: f64, y: f64) -> Option<Complex64> {
        let (ms, mt) = (&self.mesh_s, &self.mesh_t);
        let (ex, rx) = ms.locate(x)?;
        let (ey, ry) = mt.locate(y)?;
        let mut px = vec![0.0; ms.degree() + 1];
        let mut py = vec![0.0; mt.degree() + 1];
        ms.local_values(rx, &mut px);
        mt.local_values(ry, &mut py);
        let nt = mt.n_nodes();
        let mut s = Complex64::default();
        for (a, pa) in px.iter().enumerate() {
            let base = ms.dof(ex, a) * nt;
            for (b, pb) in py.iter().enumerate() {
                s += v[base + mt.dof(ey, b)] * (pa * pb);
            }
        }
        Some(s)
    }
}

pub(crate) fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Coupled index window `[lo, hi]` of node `i` (nodes sharing an element).
fn coupling_range(i: usize, q: usize, n: usize) -> (usize, usize) {
    let lo = (i.saturating_sub(1) / q) * q;
    let hi = ((i / q + 1) * q).min(n - 1);
    (lo, hi)
}

pub fn assemble_cross(spec: &CrossOperatorSpec) -> Result<HermitianSystem> {
    spec.validate()?;
    assemble_form(&spec.form(), &spec.mesh_s, &spec.mesh_t)
}

/// Weak form of `∫ |D_y u|² + |(c D_x + W) u|²` on the tensor mesh.
pub fn assemble_form(form: &MagneticForm, mesh_s: &MeshSpec, mesh_t: &MeshSpec) -> Result<HermitianSystem> {
    let stats = AssemblyStats::of(mesh_s, mesh_t);
    log::info!(
        "assembling dim {} with {} upper nonzeros, factor needs {:.2} GiB",
        stats.dim,
        stats.nnz_upper,
        stats.factor_bytes as f64 / (1u64 << 30) as f64
    );
    if stats.factor_bytes > MAX_FACTOR_BYTES {
        return Err(Error::InvalidParameter(format!(
            "dim {} with half-bandwidth {} needs {} bytes for the factorization; lower the degree or the element count",
            stats.dim, stats.half_bandwidth, stats.factor_bytes
        )));
    }
    let ms = Arc::new(mesh_s.build()?);
    let mt = Arc::new(mesh_t.build()?);
    let c = form.c;

    // H = Σ_k X_k ⊗ Y_k with Y_k complex
    let mut terms: Vec<(DMatrix<f64>, DMatrix<Complex64>)> = Vec::new();
    let to_c = |m: &DMatrix<f64>, z: Complex64| m.map(|v| z * v);
    let mass_t0 = weighted_mass(&mt, |_| 1.0)?;
    let mass_s0 = weighted_mass(&ms, |_| 1.0)?;
    terms.push((mass_s0.clone(), to_c(&stiffness(&mt), Complex64::new(1.0, 0.0))));
    terms.push((stiffness(&ms), to_c(&mass_t0, Complex64::new(c * c, 0.0))));

    let pow_s = |p: u32| weighted_mass(&ms, move |x| x.powi(p as i32));
    let pow_t = |p: u32| weighted_mass(&mt, move |y| y.powi(p as i32));
    let mut by_px: Vec<(u32, DMatrix<Complex64>)> = Vec::new();
    for m in form.w_squared() {
        let y = to_c(&pow_t(m.py)?, Complex64::new(m.coef, 0.0));
        match by_px.iter_mut().find(|(p, _)| *p == m.px) {
            Some((_, acc)) => *acc += y,
            None => by_px.push((m.px, y)),
        }
    }
    for (px, y) in by_px {
        terms.push((pow_s(px)?, y));
    }
    let mut skew_px: Vec<(u32, DMatrix<Complex64>)> = Vec::new();
    for m in &form.w {
        let y = to_c(&pow_t(m.py)?, Complex64::new(0.0, c * m.coef));
        match skew_px.iter_mut().find(|(p, _)| *p == m.px) {
            Some((_, acc)) => *acc += y,
            None => skew_px.push((m.px, y)),
        }
    }
    for (px, y) in skew_px {
        let px = px as i32;
        terms.push((weighted_skew(&ms, move |x| x.powi(px)), y));
    }

    let (ns, nt) = (ms.n_nodes(), mt.n_nodes());
    let (qs, qt) = (ms.degree(), mt.degree());
    let blocks: Vec<(Vec<usize>, Vec<usize>, Vec<Complex64>, Vec<f64>)> = (0..ns)
        .into_par_iter()
        .map(|ix| {
            let (_, xhi) = coupling_range(ix, qs, ns);
            let mut counts = Vec::with_capacity(nt);
            let mut cols = Vec::new();
            let mut hv = Vec::new();
            let mut mv = Vec::new();
            for iy in 0..nt {
                let (ylo, yhi) = coupling_range(iy, qt, nt);
                let start = cols.len();
                for jx in ix..=xhi {
                    let j0 = if jx == ix { iy } else { ylo };
                    for jy in j0..=yhi {
                        let mut h = Complex64::default();
                        for (x, y) in &terms {
                            h += y[(iy, jy)] * x[(ix, jx)];
                        }
                        cols.push(jx * nt + jy);
                        hv.push(h);
                        mv.push(mass_s0[(ix, jx)] * mass_t0[(iy, jy)]);
                    }
                }
                counts.push(cols.len() - start);
            }
            (counts, cols, hv, mv)
        })
        .collect();

    let dim = ns * nt;
    let mut row_ptr = Vec::with_capacity(dim + 1);
    row_ptr.push(0);
    let nnz: usize = blocks.iter().map(|b| b.1.len()).sum();
    let mut col_idx = Vec::with_capacity(nnz);
    let mut hvals = Vec::with_capacity(nnz);
    let mut mvals = Vec::with_capacity(nnz);
    for (counts, cols, hv, mv) in blocks {
        for n in counts {
            row_ptr.push(row_ptr.last().unwrap() + n);
        }
        col_idx.extend(cols);
        hvals.extend(hv);
        mvals.extend(mv);
    }
    // the diagonal of a Hermitian form is real
    for r in 0..dim {
        let k = row_ptr[r];
        hvals[k].im = 0.0;
    }

    let chol_s = Cholesky::new(mass_s0).ok_or_else(|| Error::MassNotSpd("first-variable mass".into()))?;
    let chol_t = Cholesky::new(mass_t0).ok_or_else(|| Error::MassNotSpd("second-variable mass".into()))?;
    Ok(HermitianSystem {
        h: CsrUpper { dim, row_ptr: row_ptr.clone(), col_idx: col_idx.clone(), values: hvals },
        m: CsrUpper { dim, row_ptr, col_idx, values: mvals },
        mesh_s: ms,
        mesh_t: mt,
        chol_s,
        chol_t,
    })
}

/// One row of the ε ladder; failed levels keep their error message.
#[derive(Debug, Clone, Serialize)]
pub struct LadderEntry {
    pub l: usize,
    pub epsilon: f64,
    pub kappa: std::result::Result<Vec<f64>, String>,
}

/// Assembles and solves level `l` of the ladder.
pub fn ladder_solve(l: usize, degree: usize, n_eigs: usize) -> Result<(HermitianSystem, EigenResult2D)> {
    let spec = CrossOperatorSpec::ladder(l, degree);
    let sys = assemble_cross(&spec)?;
    let res = solve_lowest(&sys, n_eigs)?;
    Ok((sys, res))
}

/// `κ₁..κ_n` for every requested level; per-level failures are recorded,
/// not propagated.
pub fn epsilon_ladder(levels: &[usize], n_eigs: usize, degree: usize) -> Result<Vec<LadderEntry>> {
    if let Some(&l) = levels.iter().find(|&&l| l > 12) {
        return Err(Error::InvalidParameter(format!("ladder level {l} exceeds 12")));
    }
    Ok(levels
        .par_iter()
        .map(|&l| {
            let kappa = ladder_solve(l, degree, n_eigs)
                .map(|(_, r)| r.eigenvalues)
                .map_err(|e| e.context(format!("level {l}")).to_string());
            if let Err(msg) = &kappa {
                log::warn!("{msg}");
            }
            LadderEntry { l, epsilon: ladder_epsilon(l), kappa }
        })
        .collect())
}

/// `kappa_ladder.csv`: `l,epsilon,kappa1,...`; failed levels print `NaN`.
pub fn write_ladder_csv<W: Write>(entries: &[LadderEntry], n_eigs: usize, w: W) -> Result<()> {
    let mut out = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
    let mut header = vec!["l".to_string(), "epsilon".to_string()];
    header.extend((1..=n_eigs).map(|k| format!("kappa{k}")));
    out.write_record(&header)?;
    for e in entries {
        let mut rec = vec![e.l.to_string(), fmt17(e.epsilon)];
        for k in 0..n_eigs {
            let v = e.kappa.as_ref().ok().and_then(|v| v.get(k).copied()).unwrap_or(f64::NAN);
            rec.push(fmt17(v));
        }
        out.write_record(&rec)?;
    }
    out.flush()?;
    Ok(())
}

/// `(R, ∫_{|Y|>R} |ψ|² / ‖ψ‖²)` for eigenvector `n`.
pub fn decay_profile(res: &EigenResult2D, sys: &HermitianSystem, n: usize, radii: &[f64]) -> Result<Vec<(f64, f64)>> {
    let v = eigenvector(res, n)?;
    if radii.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidParameter("radii must be ascending".into()));
    }
    let vals = sys.values_at_quadrature(v);
    let pts = sys.quadrature_points();
    let mut samples: Vec<(f64, f64)> =
        pts.iter().zip(&vals).map(|(&(x, y, w), z)| (x.hypot(y), w * z.norm_sqr())).collect();
    let total: f64 = samples.iter().map(|s| s.1).sum();
    samples.sort_by(|a, b| a.0.total_cmp(&b.0));
    // suffix sums over radius-sorted samples
    let mut tail = vec![0.0; samples.len() + 1];
    for k in (0..samples.len()).rev() {
        tail[k] = tail[k + 1] + samples[k].1;
    }
    Ok(radii
        .iter()
        .map(|&r| {
            let k = samples.partition_point(|s| s.0 <= r);
            let frac = if r <= 0.0 { 1.0 } else { tail[k] / total };
            (r, frac)
        })
        .collect())
}

fn eigenvector(res: &EigenResult2D, n: usize) -> Result<&[Complex64]> {
    res.eigenvectors
        .get(n)
        .map(|v| v.as_slice())
        .ok_or_else(|| Error::InvalidParameter(format!("eigenvector {n} not computed ({} available)", res.eigenvectors.len())))
}

/// `|ψ|` on a uniform raster; `values[j][i]` is at `(sigma[i], tau[j])`.
#[derive(Debug, Clone)]
pub struct Raster {
    pub sigma: Vec<f64>,
    pub tau: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

impl Raster {
    pub fn argmax(&self) -> (f64, f64) {
        let mut best = (0, 0, f64::NEG_INFINITY);
        for (j, row) in self.values.iter().enumerate() {
            for (i, &v) in row.iter().enumerate() {
                if v > best.2 {
                    best = (i, j, v);
                }
            }
        }
        (self.sigma[best.0], self.tau[best.1])
    }

    pub fn max(&self) -> f64 {
        self.values.iter().flatten().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// `modulus_<l>.csv`: `sigma,tau,abs_psi`, `sigma` slowest.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
        out.write_record(["sigma", "tau", "abs_psi"])?;
        for (i, &s) in self.sigma.iter().enumerate() {
            for (j, &t) in self.tau.iter().enumerate() {
                out.write_record([fmt17(s), fmt17(t), fmt17(self.values[j][i])])?;
            }
        }
        out.flush()?;
        Ok(())
    }
}

/// Zoom window `[α₀/ε - 2/√ε, α₀/ε + 2/√ε] × [-3, 3]`.
pub fn zoom_window(epsilon: f64, alpha0: f64) -> Rect {
    let c = alpha0 / epsilon;
    let h = 2.0 / epsilon.sqrt();
    Rect::new((c - h, c + h), (-3.0, 3.0))
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![0.5 * (lo + hi)];
    }
    (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
}

/// `|ψ_n|` on `resolution × resolution` points of `window`, normalized to
/// `‖ψ‖_M = 1`.
pub fn modulus_field(res: &EigenResult2D, sys: &HermitianSystem, n: usize, window: Rect, resolution: usize) -> Result<Raster> {
    let v = eigenvector(res, n)?;
    let dom = Rect::new((sys.mesh_s.lo(), sys.mesh_s.hi()), (sys.mesh_t.lo(), sys.mesh_t.hi()));
    if !dom.contains(&window) || window.x.0 > window.x.1 || window.y.0 > window.y.1 {
        return Err(Error::InvalidParameter(format!("window {window:?} is not inside the domain {dom:?}")));
    }
    if resolution == 0 {
        return Err(Error::InvalidParameter("raster resolution must be positive".into()));
    }
    let scale = 1.0 / sys.m_norm(v);
    let clamp = |x: f64, (lo, hi): (f64, f64)| x.clamp(lo, hi);
    let sigma = linspace(window.x.0, window.x.1, resolution);
    let tau = linspace(window.y.0, window.y.1, resolution);
    let values = tau
        .par_iter()
        .map(|&t| {
            sigma
                .iter()
                .map(|&s| sys.evaluate(v, clamp(s, dom.x), clamp(t, dom.y)).map_or(0.0, |z| z.norm() * scale))
                .collect()
        })
        .collect();
    Ok(Raster { sigma, tau, values })
}
