//! Command-line front end for `spinbath-core`: config parsing, the case
//! experiments, oracle verification, sweeps and CSV/summary output.

pub mod config;
pub mod error;
pub mod output;
pub mod run;

use clap::{Args, Parser, Subcommand};
use spinbath_core::analysis::DEFAULT_RECURRENCE_THRESHOLD;

use config::{parse_config, read_file, FileConfig, RunArgs, SCHEMA_VERSION};
use error::CliResult;
use run::{RecurrenceMetric, SweepParam};

#[derive(Debug, Parser)]
#[command(name = "spinbath", version, about = "Spin-bath decoherence simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample the configured case on the grid and write curve.csv and summary.txt.
    Simulate(RunArgs),
    /// Compare the closed form against the state-vector oracle.
    Verify(VerifyArgs),
    /// Repeat `simulate` over a list of N, p or ensemble sizes.
    Sweep(SweepArgs),
    /// Report the envelope of |r1|^2.
    Envelope(RunArgs),
    /// Search for the first recurrence of r1 after its decay.
    Recurrence(RecurrenceArgs),
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Perturb the closed-form values (harness self-check).
    #[arg(long, hide = true)]
    pub corrupt: bool,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub run: RunArgs,
    #[arg(long, value_enum)]
    pub param: SweepParam,
    #[arg(long, value_delimiter = ',', required = true)]
    pub values: Vec<usize>,
}

#[derive(Debug, Args)]
pub struct RecurrenceArgs {
    #[command(flatten)]
    pub run: RunArgs,
    #[arg(long, value_enum, default_value = "re")]
    pub metric: RecurrenceMetric,
    #[arg(long, default_value_t = DEFAULT_RECURRENCE_THRESHOLD)]
    pub recurrence_threshold: f64,
}

fn warn_if_coarse(rc: &config::RunConfig) {
    if rc.grid_is_coarse() {
        eprintln!(
            "warning: fewer than {} samples per period of the fastest coupling",
            config::MIN_SAMPLES_PER_PERIOD
        );
    }
}

/// Executes one parsed command line.
pub fn execute(cli: &Cli) -> CliResult<()> {
    match &cli.command {
        Command::Simulate(a) => {
            let rc = parse_config(a)?;
            warn_if_coarse(&rc);
            let out = run::run_simulate(&rc)?;
            for f in &out.files {
                println!("wrote {}", f.display());
            }
        }
        Command::Verify(v) => {
            let rc = parse_config(&v.run)?;
            let out = run::run_verify(&rc, v.corrupt)?;
            println!(
                "max deviation {:e} at t = {:e} (tolerance {:e})",
                out.max_deviation,
                out.worst_time,
                run::VERIFY_TOLERANCE
            );
        }
        Command::Sweep(s) => {
            let file = match &s.run.config {
                Some(p) => read_file(p)?,
                None => FileConfig {
                    schema_version: SCHEMA_VERSION,
                    ..FileConfig::default()
                },
            };
            let rows = run::run_sweep(&s.run, &file, s.param, &s.values)?;
            for r in rows {
                println!(
                    "{} = {}: decoherence_time {}, fluctuation_rms {}",
                    s.param.name(),
                    r.value,
                    output::opt(r.decoherence_time),
                    output::opt(r.fluctuation_rms)
                );
            }
        }
        Command::Envelope(a) => {
            let rc = parse_config(a)?;
            let out = run::run_envelope(&rc)?;
            println!(
                "min_product {:e}, max_product {:e}, scan [{:e}, {:e}]",
                out.bounds.min_product, out.bounds.max_product, out.scan_min, out.scan_max
            );
        }
        Command::Recurrence(r) => {
            let rc = parse_config(&r.run)?;
            warn_if_coarse(&rc);
            match run::run_recurrence(&rc, r.metric, r.recurrence_threshold)? {
                Some(found) => println!(
                    "recurrence onset {:e}, peak {:e} (value {:e})",
                    found.onset, found.peak, found.peak_value
                ),
                None => println!("no recurrence in the window"),
            }
        }
    }
    Ok(())
}

/// Parses `args`, runs, and maps the outcome to an exit status.
pub fn main_with_args<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
