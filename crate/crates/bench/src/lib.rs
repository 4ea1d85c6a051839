//! Criterion benchmarks for the 1D and 2D solvers; see `benches/`.
