//! The fiber operator `D_t^2 + (ξ + α² t - t³/3)^2` and its ground state.
//!
//! `P(t) = ξ + α² t - t³/3` is the generating cubic and `V = P²` the
//! potential. `V` is even in `α`, and `V_{α,-ξ}(t) = V_{α,ξ}(-t)`, so the
//! band function `ρ₁(α, ξ)` is even in both parameters.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::core1d::{assemble_1d, solve_dense_sym};
use crate::error::{Error, Result};
use crate::mesh::{MeshSpec, SpectralMesh1D};

/// The symbol mesh used unless a caller asks otherwise: 10 elements of degree
/// 10 on `(-5, 5)`.
pub const DEFAULT_MESH: MeshSpec = MeshSpec::new(-5.0, 5.0, 10, 10);

/// Minimum gap between the two lowest eigenvalues before a ground state is
/// considered degenerate.
pub const SIMPLICITY_GAP: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymbolParams {
    pub alpha: f64,
    pub xi: f64,
}

impl SymbolParams {
    pub const fn new(alpha: f64, xi: f64) -> Self {
        Self { alpha, xi }
    }

    /// Representative in the first quadrant with the same band value.
    pub fn reduced(self) -> Self {
        Self::new(self.alpha.abs(), self.xi.abs())
    }

    /// `P(t) = ξ + α² t - t³/3`.
    #[inline]
    pub fn cubic(&self, t: f64) -> f64 {
        self.xi + self.alpha * self.alpha * t - t * t * t / 3.0
    }

    fn check_finite(&self) -> Result<()> {
        if self.alpha.is_finite() && self.xi.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("non-finite symbol parameters {self:?}")))
        }
    }
}

/// `V_{α,ξ}(t) = P(t)²`.
#[inline]
pub fn potential(p: SymbolParams, t: f64) -> f64 {
    let v = p.cubic(t);
    v * v
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RootRegime {
    ThreeReal,
    DoubleRoot,
    OneReal,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CubicRoots {
    pub regime: RootRegime,
    /// Roots ordered by ascending real part (ties: ascending imaginary part).
    pub t1: Complex64,
    pub t2: Complex64,
    pub t3: Complex64,
    /// `4α⁶ - 9ξ²`.
    pub discriminant: f64,
    /// Set for `(α, ξ) = (0, 0)`, where `0` is a triple root.
    pub degenerate: bool,
}

impl CubicRoots {
    pub fn as_array(&self) -> [Complex64; 3] {
        [self.t1, self.t2, self.t3]
    }

    /// The simple positive real root (meaningless when `degenerate`).
    pub fn t3_real(&self) -> f64 {
        self.t3.re
    }
}

/// Relative width of the band `|4α⁶ - 9ξ²| ≤ tol·(4α⁶ + 9ξ²)` treated as the
/// double-root boundary `ξ = 2α³/3`.
const DOUBLE_ROOT_TOL: f64 = 1e-12;

/// Roots of `P_{α,ξ}` from the closed-form Cardano expressions, principal
/// complex cube roots.
pub fn roots(p: SymbolParams) -> Result<CubicRoots> {
    p.check_finite()?;
    let SymbolParams { alpha, xi } = p;
    if alpha < 0.0 || xi < 0.0 {
        return Err(Error::Domain(format!(
            "roots expects alpha >= 0 and xi >= 0 (got {alpha}, {xi}); reduce by symmetry first"
        )));
    }
    let a3 = alpha.powi(3);
    let a6 = a3 * a3;
    let disc = 4.0 * a6 - 9.0 * xi * xi;
    let zero = Complex64::new(0.0, 0.0);
    if alpha == 0.0 && xi == 0.0 {
        return Ok(CubicRoots {
            regime: RootRegime::DoubleRoot,
            t1: zero,
            t2: zero,
            t3: zero,
            discriminant: 0.0,
            degenerate: true,
        });
    }
    let j = Complex64::from_polar(1.0, 2.0 * PI / 3.0);

    let (regime, mut r) = if disc.abs() <= DOUBLE_ROOT_TOL * (4.0 * a6 + 9.0 * xi * xi) {
        let re = |x: f64| Complex64::new(x, 0.0);
        (RootRegime::DoubleRoot, [re(-alpha), re(-alpha), re(2.0 * alpha)])
    } else if disc > 0.0 {
        // t_k = j^{3-k} c + j^{k-3} c̄ with c = cbrt((3ξ + i√disc)/2)
        let c = Complex64::new(1.5 * xi, 0.5 * disc.sqrt()).cbrt();
        let cb = c.conj();
        let t = |k: i32| {
            let jp = j.powi(3 - k);
            let jm = j.powi(k - 3);
            Complex64::new((jp * c + jm * cb).re, 0.0)
        };
        (RootRegime::ThreeReal, [t(1), t(2), t(3)])
    } else {
        // u = cbrt((3ξ + √(-disc))/2); the conjugate radicand's root is α²/u
        // (their product is α²), which avoids cancellation for small α.
        let s = (-disc).sqrt();
        let u = (0.5 * (3.0 * xi + s)).cbrt();
        let v = alpha * alpha / u;
        let t3 = Complex64::new(u + v, 0.0);
        let ta = j * u + j.conj() * v;
        (RootRegime::OneReal, [ta, ta.conj(), t3])
    };
    r.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Ok(CubicRoots { regime, t1: r[0], t2: r[1], t3: r[2], discriminant: disc, degenerate: false })
}

/// `N_{α,ξ}(t) = t²/3 + t₃ t/3 + ξ/t₃`, so that `P(t) = -N(t)(t - t₃)`.
pub fn factor_n(p: SymbolParams, t: f64) -> Result<f64> {
    let t3 = positive_root(p)?;
    Ok(t * t / 3.0 + t3 * t / 3.0 + p.xi / t3)
}

/// Canonical (completed-square) form of the same factor:
/// `(t + t₃/2)²/3 - t₃²/12 + ξ/t₃`.
pub fn factor_n_canonical(p: SymbolParams, t: f64) -> Result<f64> {
    let t3 = positive_root(p)?;
    let s = t + 0.5 * t3;
    Ok(s * s / 3.0 - t3 * t3 / 12.0 + p.xi / t3)
}

fn positive_root(p: SymbolParams) -> Result<f64> {
    let r = roots(p)?;
    if r.degenerate {
        return Err(Error::Domain("the factor N is undefined at (alpha, xi) = (0, 0) where t3 = 0".into()));
    }
    Ok(r.t3_real())
}

#[derive(Debug, Clone)]
pub struct GroundState {
    pub params: SymbolParams,
    pub rho1: f64,
    /// Second eigenvalue, kept for the simplicity check.
    pub rho2: f64,
    /// Mass-normalized nodal vector, positive at its largest-magnitude node.
    pub u: DVector<f64>,
    pub mesh: Arc<SpectralMesh1D>,
}

impl GroundState {
    /// `u` at every quadrature point of the mesh.
    pub fn values_at_quadrature(&self) -> Vec<f64> {
        self.mesh.values_at_quadrature(self.u.as_slice())
    }
}

/// Flips `v` so that its entry of largest magnitude is positive.
pub fn fix_phase(v: &mut DVector<f64>) {
    let k = v.iamax();
    if v[k] < 0.0 {
        v.neg_mut();
    }
}

pub fn ground_state(p: SymbolParams, mesh: &Arc<SpectralMesh1D>) -> Result<GroundState> {
    p.check_finite()?;
    let mats = assemble_1d(mesh, |t| potential(p, t))?;
    let res = solve_dense_sym(&mats, 2)?;
    let (rho1, rho2) = (res.eigenvalues[0], res.eigenvalues[1]);
    if rho2 - rho1 <= SIMPLICITY_GAP {
        return Err(Error::Convergence {
            what: "ground state",
            iterations: 0,
            detail: format!("lowest eigenvalue not simple at {p:?}: gap {}", rho2 - rho1),
        });
    }
    let edge = potential(p, mesh.lo()).min(potential(p, mesh.hi()));
    if edge < 10.0 * rho1 {
        log::warn!(
            "mesh ({}, {}) may truncate the ground state at {p:?}: V at the ends {edge:.3e} < 10 * rho1",
            mesh.lo(),
            mesh.hi()
        );
    }
    let mut u = res.eigenvectors.into_iter().next().expect("one eigenvector");
    fix_phase(&mut u);
    Ok(GroundState { params: p, rho1, rho2, u, mesh: Arc::clone(mesh) })
}

/// Band function value on the default mesh.
pub fn rho1(p: SymbolParams) -> Result<f64> {
    let mesh = Arc::new(DEFAULT_MESH.build()?);
    Ok(ground_state(p, &mesh)?.rho1)
}

/// Feynman–Hellmann derivatives `(∂_α ρ₁, ∂_ξ ρ₁)`:
/// `4α ∫ P t u²` and `2 ∫ P u²`, by the mesh quadrature.
pub fn fh_gradient(g: &GroundState, p: SymbolParams) -> (f64, f64) {
    let u = g.values_at_quadrature();
    let mut ia = 0.0;
    let mut ix = 0.0;
    for ((t, w), uq) in g.mesh.all_quad_points().iter().zip(g.mesh.all_quad_weights()).zip(&u) {
        let pu2 = p.cubic(*t) * uq * uq * w;
        ia += pu2 * t;
        ix += pu2;
    }
    (4.0 * p.alpha * ia, 2.0 * ix)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Region {
    /// `α + ξ ≤ R`.
    Inside,
    /// `α ≤ 1`, `ξ > 2α³/3`.
    Circ,
    /// `α ≥ 1`, `ξ > 2α³/3`.
    Sharp,
    /// `α ≥ 1`, `ξ ≤ 2α³/3`.
    Flat,
    /// `α < 1`, `ξ ≤ 2α³/3` with `α + ξ > R`; only reachable for `R < 5/3`.
    Uncovered,
}

pub fn region_classify(p: SymbolParams, r: f64) -> Region {
    let SymbolParams { alpha, xi } = p;
    let curve = 2.0 * alpha.powi(3) / 3.0;
    if alpha + xi <= r {
        Region::Inside
    } else if xi > curve {
        if alpha <= 1.0 {
            Region::Circ
        } else {
            Region::Sharp
        }
    } else if alpha >= 1.0 {
        Region::Flat
    } else {
        Region::Uncovered
    }
}
