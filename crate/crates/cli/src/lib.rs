//! Command-line front end for the two-way relay channel estimation sweeps.
//!
//! The binary is a thin shell; everything it does is reachable here so it can
//! be reproduced (and tested) with direct calls.

pub mod commands;
pub mod config;
pub mod plot;
pub mod selftest;

pub use commands::{cmd_selftest, cmd_sweep, cmd_trial};
pub use config::{parse_config, parse_config_str, ConfigError};
