//! Monte-Carlo BER simulation: configuration, paired sweeps, CSV output.

pub mod config;
pub mod output;
pub mod selftest;
pub mod sweep;

pub use config::{parse_config, DetectorId, SweepConfig};
pub use output::{llr_dump, read_csv, write_csv, write_llr_csv, LlrRow};
pub use sweep::{run_ber_sweep, run_ber_sweep_with, BerRecord, Execution};
