//! Criterion benchmarks for `metarep-core`; see `benches/`.
