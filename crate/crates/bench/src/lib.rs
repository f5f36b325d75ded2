//! Criterion benchmarks for the matrix-equation solvers and the per-step
//! gain strategies live under `benches/`.
