use std::io::stdout;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use mpmht::modem::Modulation;
use mpmht::sim::output::{write_llr_rows, write_records};
use mpmht::sim::selftest::two_by_two_equivalence;
use mpmht::sim::{self, Execution, SweepConfig};
use mpmht::{Error, Result};

#[derive(Parser)]
#[command(name = "mpmht", version, about = "MP-MHT MIMO detection BER simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Overrides {
    /// Override the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output CSV path (`-` for standard output).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker thread count.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Run a BER sweep and write one CSV row per (detector, SNR).
    Sweep {
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
        /// Record measured detector time in `wall_s` (breaks byte-identical output).
        #[arg(long)]
        timing: bool,
        /// Evaluate batches on the calling thread only.
        #[arg(long)]
        serial: bool,
    },
    /// Dump MP-MHT soft output at the first SNR point of a config.
    Llrdump {
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
        #[arg(long, default_value_t = 100)]
        trials: u64,
    },
    /// Check 2x2 MP-MHT against the exhaustive ML oracle (hard and soft).
    Selftest {
        #[arg(long, default_value_t = 1000)]
        trials: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

fn load(path: &Path, o: &Overrides) -> Result<SweepConfig> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut cfg = sim::parse_config(&text)?;
    if let Some(seed) = o.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &o.out {
        cfg.out = Some(out.clone());
    }
    if o.threads.is_some() {
        cfg.threads = o.threads;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn stdout_requested(out: &Option<PathBuf>) -> bool {
    out.as_deref().is_none_or(|p| p == Path::new("-"))
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Sweep {
            config,
            overrides,
            timing,
            serial,
        } => {
            let mut cfg = load(&config, &overrides)?;
            cfg.record_wall_time = timing;
            let exec = if serial { Execution::Serial } else { Execution::Parallel };
            let records = sim::run_ber_sweep_with(&cfg, exec)?;
            for r in &records {
                eprintln!(
                    "{:>13} {:>6.2} dB  ber {:.3e}  errors {:>8}  trials {:>8}{}",
                    r.detector,
                    r.snr_db,
                    r.ber,
                    r.errors,
                    r.trials,
                    r.mismatch_ml.map(|m| format!("  mismatch_ml {m}")).unwrap_or_default()
                );
            }
            if stdout_requested(&cfg.out) {
                write_records(&records, stdout().lock(), Path::new("<stdout>"))?;
            } else {
                sim::write_csv(&records, cfg.out.as_deref().unwrap())?;
            }
            Ok(true)
        }
        Command::Llrdump {
            config,
            overrides,
            trials,
        } => {
            let cfg = load(&config, &overrides)?;
            let rows = sim::llr_dump(&cfg, trials)?;
            if stdout_requested(&cfg.out) {
                write_llr_rows(&rows, stdout().lock(), Path::new("<stdout>"))?;
            } else {
                sim::write_llr_csv(&rows, cfg.out.as_deref().unwrap())?;
            }
            Ok(true)
        }
        Command::Selftest { trials, seed } => {
            let mut ok = true;
            for m in Modulation::ALL {
                for snr in [0.0, 10.0, 20.0] {
                    let n = if m == Modulation::Qam256 { trials.div_ceil(10) } else { trials };
                    let r = two_by_two_equivalence(m, snr, n, seed)?;
                    let pass = r.hard_mismatches == 0 && r.max_llr_error <= 1e-9;
                    ok &= pass;
                    println!(
                        "{} 2x2 {m:<6} {snr:>4} dB  trials {:>6}  hard mismatches {}  max |dLLR| {:.2e}",
                        if pass { "PASS" } else { "FAIL" },
                        r.trials,
                        r.hard_mismatches,
                        r.max_llr_error
                    );
                }
            }
            Ok(ok)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
