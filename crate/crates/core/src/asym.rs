//! Semiclassical bookkeeping: scaling of model eigenvalues, the merged
//! eigenvalue set over crossing points, the reciprocal-quasimode bound and
//! quasimode residuals of the small-angle expansion.

use std::io::Write;

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::core1d::{assemble_1d, assemble_1d_with_bc, solve_dense_sym, BoundaryCondition};
use crate::cross2d::{assemble_cross, CrossOperatorSpec, EigenResult2D, HermitianSystem, Variables};
use crate::error::{Error, Result};
use crate::mesh::{build_mesh, MeshSpec};
use crate::output::fit_line;
use crate::symbol::{fh_gradient, ground_state, SymbolParams};

/// Eigenvalue of the semiclassical operator at a crossing point:
/// `h^{3/2} Ξ^{1/2} κ`.
pub fn scale_eigenvalue(kappa: f64, xi_cap: f64, h: f64) -> Result<f64> {
    for (name, v) in [("kappa", kappa), ("Xi", xi_cap), ("h", h)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
        }
    }
    Ok(h.powf(1.5) * xi_cap.sqrt() * kappa)
}

/// `∫ |ψ_h|²` with `ψ_h(y) = λ Ψ(λ y)`, `λ = Ξ^{1/4} h^{-1/4}`, by a
/// composite Gauss rule on the image rectangle (independent of the assembly
/// quadrature). `cells` per axis, 6 points per cell.
pub fn scaled_mass(res: &EigenResult2D, sys: &HermitianSystem, n: usize, xi_cap: f64, h: f64, cells: usize) -> Result<f64> {
    let v = res
        .eigenvectors
        .get(n)
        .ok_or_else(|| Error::InvalidParameter(format!("eigenvector {n} not computed")))?;
    let lam = (xi_cap / h).powf(0.25);
    let (ms, mt) = (sys.mesh_s(), sys.mesh_t());
    let rule = |lo: f64, hi: f64| {
        let (gx, gw) = crate::quadrature::gauss_legendre(6);
        let d = (hi - lo) / cells as f64;
        let mut pts = Vec::new();
        for c in 0..cells {
            let a = lo + c as f64 * d;
            for (x, w) in gx.iter().zip(&gw) {
                pts.push((a + 0.5 * d * (x + 1.0), 0.5 * d * w));
            }
        }
        pts
    };
    let xs = rule(ms.lo() / lam, ms.hi() / lam);
    let ys = rule(mt.lo() / lam, mt.hi() / lam);
    let nrm = sys.m_norm(v).powi(2);
    let mut total = 0.0;
    for &(x, wx) in &xs {
        for &(y, wy) in &ys {
            let z = sys.evaluate(v, lam * x, lam * y).unwrap_or_default() * lam;
            total += wx * wy * z.norm_sqr();
        }
    }
    Ok(total / nrm)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossingPoint {
    pub label: String,
    pub epsilon: f64,
    #[serde(rename = "Xi")]
    pub xi_cap: f64,
}

impl CrossingPoint {
    pub fn new(label: impl Into<String>, epsilon: f64, xi_cap: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon <= 1.0) {
            return Err(Error::InvalidParameter(format!("epsilon must lie in (0, 1], got {epsilon}")));
        }
        if !(xi_cap > 0.0 && xi_cap.is_finite()) {
            return Err(Error::InvalidParameter(format!("Xi must be positive, got {xi_cap}")));
        }
        Ok(Self { label: label.into(), epsilon, xi_cap })
    }

    /// From the Hessian eigenvalues of the field at the point,
    /// `|α| ≤ |β|`: `ε = √(|α|/|β|)`, `Ξ = |β|`.
    pub fn from_hessian(label: impl Into<String>, alpha: f64, beta: f64) -> Result<Self> {
        let (a, b) = (alpha.abs(), beta.abs());
        if a > b {
            return Err(Error::InvalidParameter(format!("expected |alpha| <= |beta|, got {alpha}, {beta}")));
        }
        Self::new(label, (a / b).sqrt(), b)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaEntry {
    pub value: f64,
    pub label: String,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct LambdaSet {
    pub entries: Vec<LambdaEntry>,
}

impl LambdaSet {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Smallest entry.
    pub fn lambda1(&self) -> Option<&LambdaEntry> {
        self.entries.first()
    }

    pub fn values(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.value).collect()
    }

    /// `lambda_set.json`.
    pub fn write_json<W: Write>(&self, w: W) -> Result<()> {
        serde_json::to_writer_pretty(w, self)?;
        Ok(())
    }
}

/// `Ξ^{1/2} κ_n(ε)` for `n = 1..=n_per_point` at every point, merged
/// ascending; equal values stay separate entries.
pub fn build_lambda_set<F>(points: &[CrossingPoint], n_per_point: usize, mut kappa_solver: F) -> Result<LambdaSet>
where
    F: FnMut(f64) -> Result<Vec<f64>>,
{
    if points.is_empty() {
        return Err(Error::InvalidParameter("no crossing points".into()));
    }
    let mut entries = Vec::with_capacity(points.len() * n_per_point);
    for p in points {
        let kappa = kappa_solver(p.epsilon).map_err(|e| e.context(format!("crossing point {}", p.label)))?;
        if kappa.len() < n_per_point {
            return Err(Error::InvalidParameter(format!(
                "solver returned {} values for {}, need {n_per_point}",
                kappa.len(),
                p.label
            )));
        }
        if kappa.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidParameter(format!("solver values for {} are not ascending", p.label)));
        }
        for (k, &v) in kappa.iter().take(n_per_point).enumerate() {
            entries.push(LambdaEntry { value: p.xi_cap.sqrt() * v, label: p.label.clone(), n: k + 1 });
        }
    }
    // stable: ties keep input order
    entries.sort_by(|a, b| a.value.total_cmp(&b.value));
    Ok(LambdaSet { entries })
}

/// Upper bounds `(μ_n + nμ) / (1 - nν)` for the eigenvalues of an operator
/// carrying quasimodes of another with eigenvalues `mu_list`.
pub fn ppstar_bound(mu_list: &[f64], mu: f64, nu: f64) -> Result<Vec<f64>> {
    let n = mu_list.len();
    if !(mu >= 0.0 && nu >= 0.0) {
        return Err(Error::InvalidParameter(format!("mu and nu must be non-negative, got {mu}, {nu}")));
    }
    if n > 0 && nu * n as f64 >= 1.0 {
        return Err(Error::Precondition(format!("nu = {nu} must be below 1/N = {}", 1.0 / n as f64)));
    }
    Ok(mu_list.iter().enumerate().map(|(k, m)| (m + (k + 1) as f64 * mu) / (1.0 - (k + 1) as f64 * nu)).collect())
}

/// The bound on a computable pair: `P = D² + t²` on `(-10, 10)` and `P*` the
/// same operator on `(-l, l)` with Dirichlet conditions, quasimodes `χ φ_n`
/// for a smooth cutoff `χ` equal to 1 on `|t| ≤ l - 1.5`.
#[derive(Debug, Clone, Serialize)]
pub struct PpstarDesk {
    pub mu_list: Vec<f64>,
    pub mu: f64,
    pub nu: f64,
    pub bound: Vec<f64>,
    pub mu_star: Vec<f64>,
}

impl PpstarDesk {
    pub fn holds(&self) -> bool {
        self.mu_star.iter().zip(&self.bound).all(|(s, b)| *s <= *b)
    }
}

/// `C^∞` cutoff: 1 on `[-a, a]`, 0 outside `(-b, b)`, and its derivative.
pub fn smooth_cutoff(t: f64, a: f64, b: f64) -> (f64, f64) {
    let g = |x: f64| if x > 0.0 { (-1.0 / x).exp() } else { 0.0 };
    let dg = |x: f64| if x > 0.0 { (-1.0 / x).exp() / (x * x) } else { 0.0 };
    let r = t.abs();
    if r <= a {
        return (1.0, 0.0);
    }
    if r >= b {
        return (0.0, 0.0);
    }
    // s from 0 at r=a to 1 at r=b; χ = g(1-s) / (g(1-s) + g(s))
    let s = (r - a) / (b - a);
    let (p, q) = (g(1.0 - s), g(s));
    let (dp, dq) = (-dg(1.0 - s), dg(s));
    let chi = p / (p + q);
    let dchi_ds = (dp * q - p * dq) / (p + q).powi(2);
    (chi, dchi_ds / (b - a) * t.signum())
}

pub fn ppstar_desk(n: usize, l: f64) -> Result<PpstarDesk> {
    if !(l > 1.5 && l <= 10.0) || n == 0 {
        return Err(Error::InvalidParameter(format!("need 1.5 < l <= 10 and n >= 1, got l = {l}, n = {n}")));
    }
    let mesh = build_mesh(-10.0, 10.0, 40, 10)?;
    let p = solve_dense_sym(&assemble_1d(&mesh, |t| t * t)?, n)?;
    let (a, b) = (l - 1.5, l);
    let xs = mesh.all_quad_points();
    let ws = mesh.all_quad_weights();
    let vals: Vec<Vec<f64>> = p.eigenvectors.iter().map(|v| mesh.values_at_quadrature(v.as_slice())).collect();
    let ders: Vec<Vec<f64>> = p.eigenvectors.iter().map(|v| mesh.derivs_at_quadrature(v.as_slice())).collect();
    let cut: Vec<(f64, f64)> = xs.iter().map(|&t| smooth_cutoff(t, a, b)).collect();
    let (mut mu, mut nu) = (0.0f64, 0.0f64);
    for i in 0..n {
        for j in 0..n {
            let mut gram = 0.0;
            let mut form = 0.0;
            for q in 0..xs.len() {
                let (c, dc) = cut[q];
                let (ui, uj) = (c * vals[i][q], c * vals[j][q]);
                let (di, dj) = (dc * vals[i][q] + c * ders[i][q], dc * vals[j][q] + c * ders[j][q]);
                gram += ws[q] * ui * uj;
                form += ws[q] * (di * dj + xs[q] * xs[q] * ui * uj);
            }
            let delta = if i == j { 1.0 } else { 0.0 };
            nu = nu.max((gram - delta).abs());
            mu = mu.max((form - delta * p.eigenvalues[i]).abs());
        }
    }
    let bound = ppstar_bound(&p.eigenvalues, mu, nu)?;
    let star_mesh = build_mesh(-l, l, 16, 10)?;
    let star = solve_dense_sym(&assemble_1d_with_bc(&star_mesh, |t| t * t, BoundaryCondition::Dirichlet)?, n)?;
    Ok(PpstarDesk { mu_list: p.eigenvalues, mu, nu, bound, mu_star: star.eigenvalues })
}

/// Meshes of the localized variables `(𝔰, 𝔱)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuasimodeMesh {
    pub s: MeshSpec,
    pub t: MeshSpec,
}

impl Default for QuasimodeMesh {
    fn default() -> Self {
        Self { s: MeshSpec::new(-8.0, 8.0, 16, 8), t: MeshSpec::new(-6.0, 6.0, 12, 10) }
    }
}

/// Unit Gaussian `π^{-1/4} e^{-𝔰²/2}` and its derivative.
pub fn gaussian_f0(s: f64) -> (f64, f64) {
    let v = std::f64::consts::PI.powf(-0.25) * (-0.5 * s * s).exp();
    (v, -s * v)
}

pub const FD_STEP: f64 = 1e-4;
pub const GRADIENT_TOL: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuasimodeResidual {
    pub epsilon: f64,
    /// `‖(𝔏_ε - S₀)ψ‖ / ‖ψ‖` with `ψ = ψ₀ + √ε ψ₁`.
    pub residual: f64,
    /// Same with `ψ = ψ₀`.
    pub residual_psi0: f64,
    /// Rayleigh quotient of `ψ₀` minus `S₀`.
    pub rayleigh_gap: f64,
    /// Discrete `ρ₁(α₀, ξ₀)` used as `S₀`.
    pub s0: f64,
}

/// Residuals of the two-term quasimode of the localized operator at `ε`.
pub fn quasimode_residual<F>(epsilon: f64, alpha0: f64, xi0: f64, f0: F, mesh: QuasimodeMesh) -> Result<QuasimodeResidual>
where
    F: Fn(f64) -> (f64, f64),
{
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::InvalidParameter(format!("epsilon must lie in (0, 1], got {epsilon}")));
    }
    let spec = CrossOperatorSpec { epsilon, variables: Variables::Localized { alpha0, xi0 }, mesh_s: mesh.s, mesh_t: mesh.t };
    let sys = assemble_cross(&spec)?;
    let mt = sys.mesh_t().clone();
    let p0 = SymbolParams::new(alpha0, xi0);
    let g0 = ground_state(p0, &mt)?;
    let (ga, gx) = fh_gradient(&g0, p0);
    if ga.hypot(gx) > GRADIENT_TOL {
        return Err(Error::Precondition(format!(
            "({alpha0}, {xi0}) is not a critical point of rho1: gradient ({ga:.3e}, {gx:.3e})"
        )));
    }
    let h = FD_STEP;
    let diff = |da: f64, dx: f64| -> Result<DVector<f64>> {
        let up = ground_state(SymbolParams::new(alpha0 + da, xi0 + dx), &mt)?;
        let dn = ground_state(SymbolParams::new(alpha0 - da, xi0 - dx), &mt)?;
        Ok((up.u - dn.u) / (2.0 * h))
    };
    let du_a = diff(h, 0.0)?;
    let du_x = diff(0.0, h)?;
    let s0 = g0.rho1;

    let nodes_s = sys.mesh_s().nodes().to_vec();
    let nt = mt.n_nodes();
    let rt = epsilon.sqrt();
    let mut psi0 = Vec::with_capacity(sys.dim());
    let mut psi = Vec::with_capacity(sys.dim());
    for &s in &nodes_s {
        let (f, df) = f0(s);
        // D f₀ = -i f₀'
        let dsf = Complex64::new(0.0, -df);
        for k in 0..nt {
            let base = Complex64::new(f * g0.u[k], 0.0);
            let corr = Complex64::new(s * f * du_a[k], 0.0) + dsf * du_x[k];
            psi0.push(base);
            psi.push(base + corr * rt);
        }
    }
    Ok(QuasimodeResidual {
        epsilon,
        residual: sys.residual(&psi, s0),
        residual_psi0: sys.residual(&psi0, s0),
        rayleigh_gap: sys.rayleigh(&psi0) - s0,
        s0,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct QuasimodeReport {
    pub alpha0: f64,
    pub xi0: f64,
    pub rows: Vec<QuasimodeResidual>,
    pub slope_with_psi1: f64,
    pub slope_psi0_only: f64,
    pub slope_rayleigh: f64,
}

impl QuasimodeReport {
    /// `quasimode_report.json`.
    pub fn write_json<W: Write>(&self, w: W) -> Result<()> {
        serde_json::to_writer_pretty(w, self)?;
        Ok(())
    }
}

/// Residuals over `epsilons` with log-log slopes against `ε`.
pub fn quasimode_report(epsilons: &[f64], alpha0: f64, xi0: f64, mesh: QuasimodeMesh) -> Result<QuasimodeReport> {
    if epsilons.len() < 2 {
        return Err(Error::InvalidParameter("need at least two epsilon values for a slope".into()));
    }
    let rows = epsilons
        .iter()
        .map(|&e| quasimode_residual(e, alpha0, xi0, gaussian_f0, mesh))
        .collect::<Result<Vec<_>>>()?;
    let le: Vec<f64> = rows.iter().map(|r| r.epsilon.ln()).collect();
    let slope = |f: fn(&QuasimodeResidual) -> f64| {
        let ys: Vec<f64> = rows.iter().map(|r| f(r).abs().ln()).collect();
        fit_line(&le, &ys).0
    };
    Ok(QuasimodeReport {
        alpha0,
        xi0,
        slope_with_psi1: slope(|r| r.residual),
        slope_psi0_only: slope(|r| r.residual_psi0),
        slope_rayleigh: slope(|r| r.rayleigh_gap),
        rows,
    })
}
