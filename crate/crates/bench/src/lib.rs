//! Criterion benchmarks for the einsub kernels live in `benches/`.
