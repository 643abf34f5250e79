//! Criterion benchmarks for `heaps-core`; see `benches/heaps.rs`.
