//! Spectral solvers for magnetic Schrödinger operators whose field vanishes
//! along two crossing lines.
//!
//! * [`mesh`], [`core1d`]: high-order spectral elements on an interval and a
//!   dense generalized symmetric eigensolver.
//! * [`symbol`]: the fiber operator `D_t² + (ξ + α²t - t³/3)²`, its cubic
//!   roots and ground state `ρ₁(α, ξ)`.
//! * [`band`]: sweeps and minimization of `ρ₁`.
//! * [`cross2d`]: the 2D operator `(D_σ - τ³/3 + ε²σ²τ)² + D_τ²` on
//!   rectangles, solved by shift-invert Lanczos.
//! * [`asym`]: scaling law, eigenvalue bookkeeping over crossing points and
//!   quasimode checks of the small-angle expansion.

pub mod error;
pub mod quadrature;
pub mod mesh;
pub mod core1d;
pub mod symbol;
pub mod band;
pub mod cross2d;
pub mod asym;
pub mod output;
pub mod reference;

pub use error::{Error, Result};
pub use mesh::{build_mesh, MeshSpec, SpectralMesh1D};
pub use core1d::{assemble_1d, solve_dense_sym, EigenResult1D, OperatorMatrices};
pub use symbol::{ground_state, GroundState, SymbolParams};
pub use band::{BandGrid, MinResult};
pub use cross2d::{assemble_cross, solve_sparse, CrossOperatorSpec, EigenResult2D, HermitianSystem};
pub use asym::{CrossingPoint, LambdaSet};
