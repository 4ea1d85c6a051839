//! Uniform spectral-element partition of an interval.
//!
//! Each element carries a Lagrange basis at the Gauss–Lobatto–Legendre nodes
//! of degree `Q`; neighbouring elements share their boundary node, so the
//! global space is continuous piecewise polynomials of degree `Q`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{gauss_legendre, gll_nodes, LagrangeBasis};

pub const MAX_DEGREE: usize = 20;

/// Parameters that fully determine a [`SpectralMesh1D`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshSpec {
    pub lo: f64,
    pub hi: f64,
    pub n_elements: usize,
    pub degree: usize,
}

impl MeshSpec {
    pub const fn new(lo: f64, hi: f64, n_elements: usize, degree: usize) -> Self {
        Self { lo, hi, n_elements, degree }
    }

    pub fn build(&self) -> Result<SpectralMesh1D> {
        build_mesh(self.lo, self.hi, self.n_elements, self.degree)
    }
}

#[derive(Debug, Clone)]
pub struct SpectralMesh1D {
    spec: MeshSpec,
    nodes: Vec<f64>,
    breaks: Vec<f64>,
    basis: LagrangeBasis,
    /// Reference quadrature points and weights on [-1, 1].
    ref_points: Vec<f64>,
    ref_weights: Vec<f64>,
    /// Basis values / reference derivatives at reference quadrature points,
    /// row-major `[quad point][local node]`.
    ref_values: Vec<f64>,
    ref_derivs: Vec<f64>,
    quad_points: Vec<f64>,
    quad_weights: Vec<f64>,
}

/// Points per element for a degree-`q` basis: `ceil((2q + 7) / 2)`, exact for
/// products of two basis functions against a sextic weight.
pub fn default_quad_points(q: usize) -> usize {
    (2 * q + 7).div_ceil(2)
}

/// Per-element Gauss–Legendre rule selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QuadratureRule {
    /// Exact for `φ_i φ_j V` with `V` of degree 6: `ceil((2Q + 7)/2)` points.
    #[default]
    SexticExact,
    /// Exact for polynomial degree `3Q`: `ceil((3Q + 1)/2)` points. Under-integrates
    /// sextic potentials for `Q < 6`; this is the rule behind the reference
    /// low-degree rows of the 10-element convergence table.
    TripleDegree,
}

impl QuadratureRule {
    pub fn points(self, q: usize) -> usize {
        match self {
            QuadratureRule::SexticExact => default_quad_points(q),
            QuadratureRule::TripleDegree => (3 * q + 1).div_ceil(2),
        }
    }
}

pub fn build_mesh(lo: f64, hi: f64, n_elements: usize, degree: usize) -> Result<SpectralMesh1D> {
    build_mesh_with_quadrature(lo, hi, n_elements, degree, default_quad_points(degree))
}

pub fn build_mesh_with_rule(
    spec: MeshSpec,
    rule: QuadratureRule,
) -> Result<SpectralMesh1D> {
    build_mesh_with_quadrature(spec.lo, spec.hi, spec.n_elements, spec.degree, rule.points(spec.degree))
}

pub fn build_mesh_with_quadrature(
    lo: f64,
    hi: f64,
    n_elements: usize,
    degree: usize,
    n_quad: usize,
) -> Result<SpectralMesh1D> {
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::InvalidParameter(format!("mesh bounds must satisfy lo < hi, got ({lo}, {hi})")));
    }
    if n_elements == 0 {
        return Err(Error::InvalidParameter("mesh needs at least one element".into()));
    }
    if !(1..=MAX_DEGREE).contains(&degree) {
        return Err(Error::InvalidParameter(format!("degree must lie in 1..={MAX_DEGREE}, got {degree}")));
    }
    if n_quad < degree + 1 {
        return Err(Error::InvalidParameter(format!(
            "{n_quad} quadrature points cannot integrate a degree-{degree} mass matrix"
        )));
    }

    let len = hi - lo;
    let breaks: Vec<f64> = (0..=n_elements)
        .map(|e| if e == n_elements { hi } else { lo + len * e as f64 / n_elements as f64 })
        .collect();
    let ref_nodes = gll_nodes(degree);
    let mut nodes = Vec::with_capacity(n_elements * degree + 1);
    for e in 0..n_elements {
        let (a, b) = (breaks[e], breaks[e + 1]);
        for &r in &ref_nodes[..degree] {
            nodes.push(if r == -1.0 { a } else { a + 0.5 * (r + 1.0) * (b - a) });
        }
    }
    nodes.push(hi);

    let basis = LagrangeBasis::new(ref_nodes);
    let (ref_points, ref_weights) = gauss_legendre(n_quad);
    let mut ref_values = Vec::with_capacity(n_quad * (degree + 1));
    let mut ref_derivs = Vec::with_capacity(n_quad * (degree + 1));
    for &x in &ref_points {
        let (v, d) = basis.values_and_derivs(x);
        ref_values.extend(v);
        ref_derivs.extend(d);
    }

    let mut quad_points = Vec::with_capacity(n_elements * n_quad);
    let mut quad_weights = Vec::with_capacity(n_elements * n_quad);
    for e in 0..n_elements {
        let (a, b) = (breaks[e], breaks[e + 1]);
        let half = 0.5 * (b - a);
        for (x, w) in ref_points.iter().zip(&ref_weights) {
            quad_points.push(a + half * (x + 1.0));
            quad_weights.push(half * w);
        }
    }

    Ok(SpectralMesh1D {
        spec: MeshSpec::new(lo, hi, n_elements, degree),
        nodes,
        breaks,
        basis,
        ref_points,
        ref_weights,
        ref_values,
        ref_derivs,
        quad_points,
        quad_weights,
    })
}

impl SpectralMesh1D {
    pub fn spec(&self) -> MeshSpec {
        self.spec
    }

    pub fn lo(&self) -> f64 {
        self.spec.lo
    }

    pub fn hi(&self) -> f64 {
        self.spec.hi
    }

    pub fn n_elements(&self) -> usize {
        self.spec.n_elements
    }

    pub fn degree(&self) -> usize {
        self.spec.degree
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn n_quad(&self) -> usize {
        self.ref_points.len()
    }

    pub fn reference_points(&self) -> &[f64] {
        &self.ref_points
    }

    pub fn reference_weights(&self) -> &[f64] {
        &self.ref_weights
    }

    /// Physical quadrature points of element `e`.
    pub fn quad_points(&self, e: usize) -> &[f64] {
        let nq = self.n_quad();
        &self.quad_points[e * nq..(e + 1) * nq]
    }

    /// Physical quadrature weights of element `e`.
    pub fn quad_weights(&self, e: usize) -> &[f64] {
        let nq = self.n_quad();
        &self.quad_weights[e * nq..(e + 1) * nq]
    }

    pub fn element_bounds(&self, e: usize) -> (f64, f64) {
        (self.breaks[e], self.breaks[e + 1])
    }

    /// Global index of local node `a` of element `e`.
    #[inline]
    pub fn dof(&self, e: usize, a: usize) -> usize {
        e * self.spec.degree + a
    }

    /// Local basis values at quadrature point `q`.
    #[inline]
    pub fn basis_values(&self, q: usize) -> &[f64] {
        let n = self.spec.degree + 1;
        &self.ref_values[q * n..(q + 1) * n]
    }

    /// Local basis derivatives (with respect to the reference coordinate) at
    /// quadrature point `q`; multiply by `2 / h_e` for physical derivatives.
    #[inline]
    pub fn basis_ref_derivs(&self, q: usize) -> &[f64] {
        let n = self.spec.degree + 1;
        &self.ref_derivs[q * n..(q + 1) * n]
    }

    pub fn jacobian(&self, e: usize) -> f64 {
        0.5 * (self.breaks[e + 1] - self.breaks[e])
    }

    /// Whether global nodes `i` and `j` share an element (the sparsity pattern
    /// of every assembled matrix).
    pub fn coupled(&self, i: usize, j: usize) -> bool {
        let q = self.spec.degree;
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        if j - i > q {
            return false;
        }
        // element containing i as its left-most local index, or i's element
        let ei = if i == self.n_nodes() - 1 { self.n_elements() - 1 } else { i / q };
        j <= ei * q + q
    }

    /// Element containing `x` and the reference coordinate of `x` in it.
    pub fn locate(&self, x: f64) -> Option<(usize, f64)> {
        if !(x >= self.lo() - 1e-12 * (1.0 + self.lo().abs()) && x <= self.hi() + 1e-12 * (1.0 + self.hi().abs())) {
            return None;
        }
        let n = self.n_elements();
        let h = (self.hi() - self.lo()) / n as f64;
        let mut e = (((x - self.lo()) / h).floor().max(0.0) as usize).min(n - 1);
        while e > 0 && x < self.breaks[e] {
            e -= 1;
        }
        while e + 1 < n && x > self.breaks[e + 1] {
            e += 1;
        }
        let (a, b) = self.element_bounds(e);
        let r = (2.0 * (x - a) / (b - a) - 1.0).clamp(-1.0, 1.0);
        Some((e, r))
    }

    /// Local basis values at reference coordinate `r` (barycentric form).
    pub fn local_values(&self, r: f64, out: &mut [f64]) {
        self.basis.values_into(r, out)
    }

    /// Local basis values and physical derivatives at `x` in element `e`.
    pub fn local_values_and_derivs(&self, e: usize, r: f64) -> (Vec<f64>, Vec<f64>) {
        let (v, mut d) = self.basis.values_and_derivs(r);
        let inv_j = 1.0 / self.jacobian(e);
        d.iter_mut().for_each(|x| *x *= inv_j);
        (v, d)
    }

    /// Evaluates the finite-element function with nodal coefficients `coeffs`.
    pub fn evaluate(&self, coeffs: &[f64], x: f64) -> Option<f64> {
        let (e, r) = self.locate(x)?;
        let mut vals = vec![0.0; self.degree() + 1];
        self.local_values(r, &mut vals);
        Some(vals.iter().enumerate().map(|(a, v)| v * coeffs[self.dof(e, a)]).sum())
    }

    /// Nodal interpolant of `f`.
    pub fn interpolate(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        self.nodes.iter().map(|&x| f(x)).collect()
    }

    /// Values of a nodal FE function at every quadrature point, element by
    /// element (same layout as the physical quadrature arrays).
    pub fn values_at_quadrature(&self, coeffs: &[f64]) -> Vec<f64> {
        let nq = self.n_quad();
        let mut out = Vec::with_capacity(self.n_elements() * nq);
        for e in 0..self.n_elements() {
            for q in 0..nq {
                let phi = self.basis_values(q);
                out.push(phi.iter().enumerate().map(|(a, p)| p * coeffs[self.dof(e, a)]).sum());
            }
        }
        out
    }

    /// Physical derivatives of a nodal FE function at every quadrature point.
    pub fn derivs_at_quadrature(&self, coeffs: &[f64]) -> Vec<f64> {
        let nq = self.n_quad();
        let mut out = Vec::with_capacity(self.n_elements() * nq);
        for e in 0..self.n_elements() {
            let inv_j = 1.0 / self.jacobian(e);
            for q in 0..nq {
                let dphi = self.basis_ref_derivs(q);
                let s: f64 = dphi.iter().enumerate().map(|(a, p)| p * coeffs[self.dof(e, a)]).sum();
                out.push(s * inv_j);
            }
        }
        out
    }

    /// All physical quadrature points and weights, flattened.
    pub fn all_quad_points(&self) -> &[f64] {
        &self.quad_points
    }

    pub fn all_quad_weights(&self) -> &[f64] {
        &self.quad_weights
    }
}
