//! Benchmarks for the core kernels live under `benches/`.
