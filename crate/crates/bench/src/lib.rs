//! Benchmark-only crate; see the `benches/` targets.

pub use nsbox_core as core;
