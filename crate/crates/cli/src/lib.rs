//! Experiment runner around the link-level simulation library: TOML-
//! configured Monte Carlo sweeps over receiver architectures, chain counts,
//! and ADC resolutions, written as deterministic CSV tables.

pub mod config;
pub mod error;
pub mod experiments;
pub mod table;
