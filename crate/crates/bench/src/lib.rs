//! Benchmarks for the decolab kernels live in `benches/`.
