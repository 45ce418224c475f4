//! Criterion benchmarks for `cbnsem`; see `benches/inference.rs`.
