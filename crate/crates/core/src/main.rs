use std::fs;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use mwse::crb::FimConvention;
use mwse::estimators::EstimatorKind;
use mwse::harness::{self, SweepConfig};
use mwse::Result;

#[derive(Parser)]
#[command(name = "mwse", version, about = "Sensing-aided mmWave MIMO-OFDM channel estimation sweeps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an NMSE sweep over SNR and trials.
    Simulate {
        #[arg(long)]
        config: Option<PathBuf>,
        /// SNR grid as `a:b:step` in dB, or a single value.
        #[arg(long)]
        snr: Option<String>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Comma-separated estimator names.
        #[arg(long, value_delimiter = ',')]
        estimators: Option<Vec<EstimatorKind>>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        svg: bool,
        #[arg(long)]
        workers: Option<usize>,
        /// Write zero in the `seconds` column so reruns are byte-identical.
        #[arg(long)]
        no_timing: bool,
    },
    /// Cramér–Rao bounds at the true parameters of every sweep cell.
    Crb {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = Convention::NegatedHessian)]
        convention: Convention,
    },
    /// Re-run the trial behind one line of a row-level CSV.
    Replay {
        #[arg(long)]
        row: String,
        /// Config used for the original sweep.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Print the default configuration as TOML.
    Defaults,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum Convention {
    AsPrinted,
    NegatedHessian,
}

fn load(path: Option<&PathBuf>) -> Result<SweepConfig> {
    match path {
        Some(p) => SweepConfig::load(p),
        None => Ok(SweepConfig::default()),
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate {
            config,
            snr,
            trials,
            seed,
            estimators,
            out,
            svg,
            workers,
            no_timing,
        } => {
            let mut cfg = load(config.as_ref())?;
            if let Some(s) = snr {
                cfg.snr_db = harness::parse_snr_range(&s)?;
            }
            if let Some(t) = trials {
                cfg.trials = t;
            }
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(e) = estimators {
                cfg.estimators = e;
            }
            if let Some(o) = out {
                cfg.output.dir = o;
            }
            cfg.output.svg |= svg;
            cfg.output.timing &= !no_timing;
            if workers.is_some() {
                cfg.workers = workers;
            }
            cfg.validate()?;
            println!(
                "# pilots {}/{} subcarriers, overhead {:.2}%",
                cfg.pattern()?.len(),
                cfg.ofdm.fft_size,
                100.0 * cfg.pilot_overhead()?
            );
            println!("# config-sha256={}", cfg.hash());
            let out = harness::sweep(&cfg)?;
            println!("snr_db,estimator,mean_nmse_db,std_error,failures");
            for a in &out.aggregates {
                println!("{},{},{:.3},{:.3e},{}", a.snr_db, a.estimator, a.mean_db(), a.std_error, a.failures);
            }
            println!("# rows: {}", out.rows_path.display());
            println!("# summary: {}", out.aggregate_path.display());
            if let Some(p) = out.svg_path {
                println!("# plot: {}", p.display());
            }
        }
        Command::Crb { config, out, convention } => {
            let cfg = load(config.as_ref())?;
            let convention = match convention {
                Convention::AsPrinted => FimConvention::AsPrinted,
                Convention::NegatedHessian => FimConvention::NegatedHessian,
            };
            fs::create_dir_all(&out)?;
            let path = out.join("crb.csv");
            let mut w = BufWriter::new(fs::File::create(&path)?);
            let rows = harness::crb_rows(&cfg, convention)?;
            harness::write_crb(&cfg, &rows, &mut w)?;
            w.flush()?;
            println!("# {} rows written to {}", rows.len(), path.display());
        }
        Command::Replay { row, config } => {
            let cfg = load(config.as_ref())?;
            let r = harness::replay(&cfg, &row)?;
            println!("{}", harness::CSV_COLUMNS);
            println!("{}", r.to_csv());
            if let Some(e) = r.error {
                eprintln!("estimator error: {e}");
            }
        }
        Command::Defaults => print!("{}", SweepConfig::default().to_toml()?),
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("MWSE_LOG", "info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
