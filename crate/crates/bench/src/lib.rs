//! Criterion benchmarks for `backflow-core`; see `benches/`.
