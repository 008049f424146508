//! Criterion benchmarks for the exact engines and the simulator live
//! in `benches/`; this crate carries no library code of its own.
