//! Benchmarks for the simulator; run with `cargo bench -p aa-cnot-bench`.
