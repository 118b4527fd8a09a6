//! Command-line front end for `mixtv-core`: PGM/PNG input, noise
//! synthesis, denoising, metric reports and the benchmark grid.

pub mod benchmark;
pub mod commands;
pub mod config;
pub mod io;
