//! `blowup`: stable densities, fBm paths, pathwise blow-up bounds, Monte
//! Carlo ensembles and spectral runs from one config file.
//!
//! Exit codes: 0 on success, 1 on a configuration or I/O error, 2 on a
//! numerical failure.

mod commands;
mod config;
mod error;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::{DensityArgs, Output};
use config::RunConfig;
use error::CliError;

#[derive(Parser)]
#[command(
    name = "blowup",
    version,
    about = "Blow-up time bounds for a fractional reaction-diffusion system with fBm noise"
)]
struct Cli {
    /// Directory for output files; without it results go to stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for ensembles (0 = one per core).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// TOML config, or a JSON document emitted by an earlier run.
    #[arg(long, short)]
    config: PathBuf,
    /// Master seed; beats the file, `--set seed=..` and BLOWUP_SEED.
    #[arg(long)]
    seed: Option<u64>,
    /// Override a config value, e.g. `--set grid.n_steps=2000`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

impl RunArgs {
    /// Config with the seed resolved and written back into it.
    fn resolve(&self, extra: &[String]) -> Result<(RunConfig, u64), CliError> {
        let mut all = extra.to_vec();
        all.extend(self.overrides.iter().cloned());
        let mut cfg = config::load(&self.config, &all)?;
        let seed = config::resolve_seed(self.seed, cfg.seed)?;
        cfg.seed = Some(seed);
        Ok((cfg, seed))
    }
}

#[derive(Subcommand)]
enum Command {
    /// Stable density p(t, r): single values with --at, else a CSV table.
    Density {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        d: usize,
        /// Radii at which to print p(t, r), one per line.
        #[arg(long, num_args = 1..)]
        at: Vec<f64>,
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        /// Table radius at unit time (default depends on alpha).
        #[arg(long)]
        r_max: Option<f64>,
        #[arg(long, default_value_t = blowup_core::stable::DEFAULT_NODES)]
        nodes: usize,
        /// Profile cache directory.
        #[arg(long)]
        cache: Option<PathBuf>,
        /// Decimal places for --at values.
        #[arg(long, default_value_t = 7)]
        digits: usize,
    },
    /// One fBm path pair as CSV (t, b1, b2).
    Fbm {
        #[command(flatten)]
        run: RunArgs,
        /// Path index; the pair equals ensemble path `index`.
        #[arg(long, default_value_t = 0)]
        index: u64,
    },
    /// Lower and upper blow-up bounds on one sampled path.
    Bounds {
        #[command(flatten)]
        run: RunArgs,
        /// Also write the cumulative lower-bound integrals to integrals.csv.
        #[arg(long)]
        dump_integrals: bool,
    },
    /// Monte Carlo summary over many paths.
    Ensemble {
        #[command(flatten)]
        run: RunArgs,
        /// Number of paths (overrides ensemble.n_paths).
        #[arg(long)]
        paths: Option<usize>,
    },
    /// Spectral solve of the transformed system on a periodic box.
    Pde {
        #[command(flatten)]
        run: RunArgs,
    },
    /// Merge emitted JSON documents into report.csv plus a plotting script.
    Report {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Density {
            alpha,
            d,
            at,
            t,
            r_max,
            nodes,
            cache,
            digits,
        } => {
            let args = DensityArgs {
                alpha,
                d,
                at,
                t,
                r_max,
                nodes,
                cache,
                digits,
            };
            commands::density(args, &Output::new(cli.out, None))
        }
        Command::Fbm { run, index } => {
            let (cfg, seed) = run.resolve(&[])?;
            commands::fbm(&cfg, seed, index, &Output::new(cli.out, Some(&cfg)))
        }
        Command::Bounds {
            run,
            dump_integrals,
        } => {
            let (cfg, seed) = run.resolve(&[])?;
            commands::bounds(
                &cfg,
                seed,
                dump_integrals,
                &Output::new(cli.out, Some(&cfg)),
            )
        }
        Command::Ensemble { run, paths } => {
            let extra: Vec<String> = paths
                .map(|n| format!("ensemble.n_paths={n}"))
                .into_iter()
                .collect();
            let (cfg, seed) = run.resolve(&extra)?;
            commands::ensemble(&cfg, seed, &Output::new(cli.out, Some(&cfg)))
        }
        Command::Pde { run } => {
            let (cfg, seed) = run.resolve(&[])?;
            commands::pde(&cfg, seed, &Output::new(cli.out, Some(&cfg)))
        }
        Command::Report { inputs } => commands::report(&inputs, &Output::new(cli.out, None)),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // usage errors are configuration errors; help and version are not errors
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build()
    {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start {} threads: {e}", cli.threads);
            return ExitCode::from(1);
        }
    };
    match pool.install(|| run(cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
