//! Criterion benchmarks for `fpa-core`; see `benches/`.
