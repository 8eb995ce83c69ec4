//! Experiment harness for `voi-lab`: config parsing, presets, sweeps to CSV
//! and analytic-versus-simulation verification.

pub mod config;
pub mod experiment;
pub mod presets;
pub mod verify;

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_VERIFY: i32 = 3;
pub const EXIT_NUMERIC: i32 = 4;
