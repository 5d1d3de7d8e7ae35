//! Benchmarks live in `benches/`; run them with `cargo bench -p parasketch-bench`.
