//! Benchmarks for `lckit`; see `benches/engine.rs`.
