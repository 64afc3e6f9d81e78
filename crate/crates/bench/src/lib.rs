//! Benchmarks for the timetabling toolkit live in `benches/`.
