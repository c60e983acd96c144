//! Criterion benchmarks for `nanospin`; see `benches/`.
