//! Criterion benchmarks for `cmab-core`; see `benches/`.
