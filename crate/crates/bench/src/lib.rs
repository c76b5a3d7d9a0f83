//! Criterion benchmarks for the learning and training pipeline; see `benches/`.
