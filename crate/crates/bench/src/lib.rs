//! Criterion benchmarks for forkjoin-evt; see `benches/`.
