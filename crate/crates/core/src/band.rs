//! Sweeps of the band function `ρ₁(α, ξ)` and its minimization.
//!
//! Grids are evaluated through the first-quadrant representative of each
//! point and mirrored, so symmetric grids respect `ρ₁(±α, ±ξ)` bitwise.

use std::collections::HashMap;
use std::io::Write;
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::{build_mesh_with_rule, MeshSpec, QuadratureRule, SpectralMesh1D};
use crate::output::fmt17;
use crate::symbol::{ground_state, SymbolParams, DEFAULT_MESH};

/// Points per axis in each refinement patch.
pub const REFINE_POINTS: usize = 101;

#[derive(Debug, Clone)]
pub struct BandGrid {
    pub alpha_values: Vec<f64>,
    pub xi_values: Vec<f64>,
    /// `rho1[i][j] = ρ₁(alpha_values[i], xi_values[j])`.
    pub rho1: Vec<Vec<f64>>,
    pub mesh_spec: MeshSpec,
    pub seconds_per_point: f64,
}

impl BandGrid {
    pub fn len(&self) -> usize {
        self.alpha_values.len() * self.xi_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Grid index of the smallest value. Exact ties (mirror images) go to
    /// the point with non-negative `α`, then non-negative `ξ`, then the
    /// first in row-major order.
    pub fn argmin(&self) -> (usize, usize) {
        let mut best = (0, 0);
        let key = |i: usize, j: usize| {
            (self.rho1[i][j], (self.alpha_values[i] < 0.0) as u8, (self.xi_values[j] < 0.0) as u8)
        };
        for i in 0..self.alpha_values.len() {
            for j in 0..self.xi_values.len() {
                let (v, a, x) = key(i, j);
                let (bv, ba, bx) = key(best.0, best.1);
                if v < bv || (v == bv && (a, x) < (ba, bx)) {
                    best = (i, j);
                }
            }
        }
        best
    }

    pub fn min_value(&self) -> f64 {
        let (i, j) = self.argmin();
        self.rho1[i][j]
    }

    /// `alpha,xi,rho1` rows in row-major order (α outer), 17 significant digits.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
        wr.write_record(["alpha", "xi", "rho1"])?;
        for (i, a) in self.alpha_values.iter().enumerate() {
            for (j, x) in self.xi_values.iter().enumerate() {
                wr.write_record([fmt17(*a), fmt17(*x), fmt17(self.rho1[i][j])])?;
            }
        }
        wr.flush()?;
        Ok(())
    }
}

/// Evenly spaced values `lo, lo + step, ..., hi`. When `lo` is an integer
/// multiple of `step` the values are generated as `k * step`, which makes
/// grids symmetric about zero exactly symmetric.
pub fn lattice(lo: f64, hi: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::InvalidParameter(format!("grid step must be positive, got {step}")));
    }
    if !(lo <= hi) {
        return Err(Error::InvalidParameter(format!("empty range [{lo}, {hi}]")));
    }
    let n = ((hi - lo) / step + 1e-9).floor() as usize + 1;
    let k0 = lo / step;
    if (k0 - k0.round()).abs() < 1e-9 {
        let k0 = k0.round() as i64;
        Ok((0..n as i64).map(|k| (k0 + k) as f64 * step).collect())
    } else {
        Ok((0..n).map(|k| lo + k as f64 * step).collect())
    }
}

fn sym_mesh(spec: MeshSpec) -> Result<Arc<SpectralMesh1D>> {
    Ok(Arc::new(spec.build()?))
}

/// `ρ₁` on the tensor grid `alphas × xis`.
pub fn scan_values(alphas: &[f64], xis: &[f64], mesh_spec: MeshSpec) -> Result<BandGrid> {
    if alphas.is_empty() || xis.is_empty() {
        return Err(Error::InvalidParameter("band scan needs non-empty ranges".into()));
    }
    let mesh = sym_mesh(mesh_spec)?;
    let start = Instant::now();

    // distinct first-quadrant representatives, in first-seen order
    let mut index: HashMap<(u64, u64), usize> = HashMap::new();
    let mut reps: Vec<SymbolParams> = Vec::new();
    let mut slot = vec![0usize; alphas.len() * xis.len()];
    for (i, a) in alphas.iter().enumerate() {
        for (j, x) in xis.iter().enumerate() {
            let p = SymbolParams::new(*a, *x).reduced();
            let key = (p.alpha.to_bits(), p.xi.to_bits());
            let k = *index.entry(key).or_insert_with(|| {
                reps.push(p);
                reps.len() - 1
            });
            slot[i * xis.len() + j] = k;
        }
    }
    let values: Vec<f64> = reps
        .par_iter()
        .map(|p| {
            ground_state(*p, &mesh)
                .map(|g| g.rho1)
                .map_err(|e| e.context(format!("band point (alpha, xi) = ({}, {})", p.alpha, p.xi)))
        })
        .collect::<Result<_>>()?;
    let rho1 = (0..alphas.len())
        .map(|i| (0..xis.len()).map(|j| values[slot[i * xis.len() + j]]).collect())
        .collect();
    let elapsed = start.elapsed().as_secs_f64();
    Ok(BandGrid {
        alpha_values: alphas.to_vec(),
        xi_values: xis.to_vec(),
        rho1,
        mesh_spec,
        seconds_per_point: elapsed / reps.len() as f64,
    })
}

pub fn scan(alpha_range: (f64, f64), xi_range: (f64, f64), step: f64, mesh_spec: MeshSpec) -> Result<BandGrid> {
    let alphas = lattice(alpha_range.0, alpha_range.1, step)?;
    let xis = lattice(xi_range.0, xi_range.1, step)?;
    scan_values(&alphas, &xis, mesh_spec)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefineStep {
    pub grid_step: f64,
    pub alpha: f64,
    pub xi: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinResult {
    pub alpha0: f64,
    pub xi0: f64,
    #[serde(rename = "S0")]
    pub s0: f64,
    pub history: Vec<RefineStep>,
}

impl MinResult {
    pub fn write_json<W: Write>(&self, w: W) -> Result<()> {
        serde_json::to_writer_pretty(w, self)?;
        Ok(())
    }
}

fn axis_step(v: &[f64]) -> Option<f64> {
    (v.len() > 1).then(|| (v[v.len() - 1] - v[0]) / (v.len() - 1) as f64)
}

fn on_boundary(i: usize, n: usize) -> bool {
    n > 1 && (i == 0 || i == n - 1)
}

fn patch(center: f64, step: f64) -> Vec<f64> {
    let half = (REFINE_POINTS / 2) as i64;
    (-half..=half).map(|k| center + k as f64 * step).collect()
}

/// Grid-and-refine minimization: around the current argmin, re-sample 101
/// points per axis at a tenth of the previous step, `levels` times. When the
/// coarse argmin lies within one step of `ξ = 0`, the refinement runs along
/// the `α` axis only with `ξ = 0`.
pub fn refine_min(grid: &BandGrid, levels: usize) -> Result<MinResult> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter("cannot refine an empty grid".into()));
    }
    let (i, j) = grid.argmin();
    let mut alpha = grid.alpha_values[i];
    let mut xi = grid.xi_values[j];
    let mut value = grid.rho1[i][j];
    let a_step = axis_step(&grid.alpha_values);
    let x_step = axis_step(&grid.xi_values);
    let mut history = vec![RefineStep { grid_step: a_step.unwrap_or(0.0), alpha, xi, value }];
    if grid.len() == 1 {
        return Ok(MinResult { alpha0: alpha, xi0: xi, s0: value, history });
    }
    if levels == 0 {
        return Err(Error::InvalidParameter("refine_min needs at least one level".into()));
    }
    if on_boundary(i, grid.alpha_values.len()) || on_boundary(j, grid.xi_values.len()) {
        return Err(Error::Domain(format!(
            "grid minimum at ({alpha}, {xi}) lies on the scan boundary; scan a larger region"
        )));
    }
    let axis_only = match x_step {
        None => true,
        Some(s) => xi.abs() < s,
    };
    let mut step = a_step.or(x_step).expect("grid with more than one point");
    let mut xstep = x_step.unwrap_or(step);
    if axis_only {
        xi = 0.0;
    }
    for _ in 0..levels {
        step /= 10.0;
        xstep /= 10.0;
        let alphas = patch(alpha, step);
        let xis = if axis_only { vec![0.0] } else { patch(xi, xstep) };
        let g = scan_values(&alphas, &xis, grid.mesh_spec)?;
        let (ii, jj) = g.argmin();
        if on_boundary(ii, alphas.len()) || on_boundary(jj, xis.len()) {
            return Err(Error::Domain(format!(
                "refinement minimum at ({}, {}) lies on the patch boundary",
                alphas[ii], xis[jj]
            )));
        }
        alpha = alphas[ii];
        xi = xis[jj];
        value = g.rho1[ii][jj];
        history.push(RefineStep { grid_step: step, alpha, xi, value });
    }
    Ok(MinResult { alpha0: alpha, xi0: xi, s0: value, history })
}

/// Minimum of `α ↦ ρ₁(α, 0)` over `α ∈ [0, 2]`: axis scan at `step`, then
/// `levels` refinements.
pub fn axis_min(step: f64, levels: usize, mesh_spec: MeshSpec) -> Result<MinResult> {
    let grid = scan_values(&lattice(0.0, 2.0, step)?, &[0.0], mesh_spec)?;
    refine_min(&grid, levels)
}

/// `count` evenly spaced samples of `α ↦ ρ₁(α, ξ)` on `[lo, hi]`, endpoints
/// included; returns the samples and the index of the smallest.
pub fn axis_sample(lo: f64, hi: f64, count: usize, xi: f64, mesh_spec: MeshSpec) -> Result<(Vec<(f64, f64)>, usize)> {
    if count < 2 || !(lo < hi) {
        return Err(Error::InvalidParameter(format!("axis sample needs lo < hi and count >= 2, got [{lo}, {hi}] x {count}")));
    }
    let alphas: Vec<f64> = (0..count).map(|k| lo + (hi - lo) * k as f64 / (count - 1) as f64).collect();
    let g = scan_values(&alphas, &[xi], mesh_spec)?;
    let (i, _) = g.argmin();
    Ok((alphas.iter().zip(&g.rho1).map(|(a, r)| (*a, r[0])).collect(), i))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DegreeRow {
    pub q: usize,
    pub rho1: f64,
}

/// One ground-state solve per degree on 10 elements over `(-5, 5)`.
pub fn degree_study(alpha: f64, xi: f64, degrees: &[usize], rule: QuadratureRule) -> Result<Vec<DegreeRow>> {
    degrees
        .par_iter()
        .map(|&q| {
            if !(1..=12).contains(&q) {
                return Err(Error::InvalidParameter(format!("degree study supports 1..=12, got {q}")));
            }
            let spec = MeshSpec { degree: q, ..DEFAULT_MESH };
            let mesh = Arc::new(build_mesh_with_rule(spec, rule)?);
            let g = ground_state(SymbolParams::new(alpha, xi), &mesh)?;
            Ok(DegreeRow { q, rho1: g.rho1 })
        })
        .collect()
}
