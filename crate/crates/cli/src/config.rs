//! JSON run configuration. Every block defaults to the reference setup;
//! command-line flags override individual fields.

use std::path::{Path, PathBuf};

use magcross::asym::{CrossingPoint, QuasimodeMesh};
use magcross::symbol::DEFAULT_MESH;
use magcross::MeshSpec;
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const SCHEMA: &str = "magcross-config/1";

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema: String,
    #[serde(default)]
    pub threads: Option<usize>,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
    #[serde(default)]
    pub table1: Table1Config,
    #[serde(default)]
    pub band_scan: BandScanConfig,
    #[serde(default)]
    pub kappa_ladder: LadderConfig,
    #[serde(default)]
    pub quasimode: QuasimodeConfig,
    #[serde(default)]
    pub lambda_set: LambdaSetConfig,
    #[serde(default)]
    pub ppstar: PpstarConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            schema: SCHEMA.into(),
            threads: None,
            out_dir: None,
            table1: Default::default(),
            band_scan: Default::default(),
            kappa_ladder: Default::default(),
            quasimode: Default::default(),
            lambda_set: Default::default(),
            ppstar: Default::default(),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        let cfg: RunConfig = serde_json::from_str(&text)
            .map_err(|e| CliError::Usage(format!("invalid config {}: {e}", path.display())))?;
        if cfg.schema != SCHEMA {
            return Err(CliError::Usage(format!("config schema {:?} is not {SCHEMA:?}", cfg.schema)));
        }
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Table1Config {
    pub degrees: Vec<usize>,
    /// Relative tolerance against the embedded table.
    pub tolerance: f64,
}

impl Default for Table1Config {
    fn default() -> Self {
        Self { degrees: (1..=12).collect(), tolerance: 1e-11 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BandScanConfig {
    pub alpha_range: (f64, f64),
    pub xi_range: (f64, f64),
    pub step: f64,
    pub refine: usize,
    pub axis_only: bool,
    pub mesh: MeshSpec,
}

impl Default for BandScanConfig {
    fn default() -> Self {
        Self { alpha_range: (-2.0, 2.0), xi_range: (-2.0, 2.0), step: 0.02, refine: 3, axis_only: false, mesh: DEFAULT_MESH }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LadderConfig {
    pub l_min: usize,
    pub l_max: usize,
    pub n_eigs: usize,
    pub degree: usize,
    pub slope: bool,
    /// Raster points per axis; 0 skips the rasters.
    pub resolution: usize,
    pub decay_radii: Vec<f64>,
    /// Tolerance against the reference `κ₁`.
    pub tolerance: f64,
    pub slope_bounds: (f64, f64),
}

impl Default for LadderConfig {
    fn default() -> Self {
        Self {
            l_min: 0,
            l_max: 10,
            n_eigs: 1,
            degree: magcross::cross2d::LADDER_DEGREE,
            slope: false,
            resolution: 161,
            decay_radii: (0..=12).map(|k| 0.5 * k as f64).collect(),
            tolerance: 5e-4,
            slope_bounds: (0.85, 1.15),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuasimodeConfig {
    pub epsilons: Vec<f64>,
    /// `None`: locate the minimum on the `ξ = 0` axis.
    pub alpha0: Option<f64>,
    pub xi0: f64,
    pub omit_psi1: bool,
    pub mesh: QuasimodeMesh,
    pub min_slope: f64,
    pub psi0_slope_bounds: (f64, f64),
}

impl Default for QuasimodeConfig {
    fn default() -> Self {
        Self {
            epsilons: vec![2f64.powi(-4), 2f64.powi(-5), 2f64.powi(-6)],
            alpha0: None,
            xi0: 0.0,
            omit_psi1: false,
            mesh: QuasimodeMesh::default(),
            min_slope: 0.8,
            psi0_slope_bounds: (0.4, 0.6),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LambdaSetConfig {
    pub points: Vec<CrossingPoint>,
    pub n_per_point: usize,
    pub degree: usize,
    /// Semiclassical parameter for the scaled values; `None` skips them.
    pub h: Option<f64>,
}

impl Default for LambdaSetConfig {
    fn default() -> Self {
        Self {
            points: vec![
                CrossingPoint { label: "x1".into(), epsilon: 0.5, xi_cap: 1.0 },
                CrossingPoint { label: "x2".into(), epsilon: 0.5, xi_cap: 4.0 },
            ],
            n_per_point: 2,
            degree: magcross::cross2d::LADDER_DEGREE,
            h: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PpstarConfig {
    pub n: usize,
    pub half_width: f64,
}

impl Default for PpstarConfig {
    fn default() -> Self {
        Self { n: 4, half_width: 5.0 }
    }
}
