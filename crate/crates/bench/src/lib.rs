//! Benchmark-only crate; see `benches/orientation.rs`.
