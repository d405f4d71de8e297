//! Benchmark harness only; see `benches/`.
