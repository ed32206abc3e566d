//! Criterion benchmarks for the dro-core kernels live in `benches/`.
