//! Criterion benchmarks for `filtex-core`; see `benches/`.
