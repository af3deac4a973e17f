//! Subcommand bodies. Each one prints its primary JSON or CSV on stdout and
//! mirrors it into the output directory when one is set.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use blowup_core::bounds::{compute_bounds, lower_integrals, BoundsContext, BoundsOptions};
use blowup_core::fbm::{derive_seed, FbmPathPair, FbmSampler};
use blowup_core::model::{classify_regime, derive_constants};
use blowup_core::montecarlo::{write_records_csv, Ensemble};
use blowup_core::pde::{solve_until_blowup, BlowupStatus};
use blowup_core::stable::StableProfile;
use serde::Serialize;

use crate::config::{RunConfig, StableSection};
use crate::error::CliError;

/// Writes to stdout; a closed pipe (`| head`) is a normal end, not an error.
fn print_stdout(text: &str) -> Result<(), CliError> {
    ignore_broken_pipe(writeln!(io::stdout().lock(), "{text}"))
}

fn ignore_broken_pipe(r: io::Result<()>) -> Result<(), CliError> {
    match r {
        Err(e) if e.kind() == io::ErrorKind::BrokenPipe => Ok(()),
        other => Ok(other?),
    }
}

/// Where files go. Without a directory only stdout is written, except for
/// explicitly requested side files, which then land in the working
/// directory.
pub struct Output {
    dir: Option<PathBuf>,
}

impl Output {
    pub fn new(flag: Option<PathBuf>, config: Option<&RunConfig>) -> Self {
        Self {
            dir: flag.or_else(|| config.and_then(|c| c.output.dir.clone())),
        }
    }

    pub fn has_dir(&self) -> bool {
        self.dir.is_some()
    }

    fn path(&self, name: &str) -> Result<PathBuf, CliError> {
        let dir = self.dir.clone().unwrap_or_else(|| PathBuf::from("."));
        fs::create_dir_all(&dir)
            .map_err(|e| CliError::config(format!("cannot create {}: {e}", dir.display())))?;
        Ok(dir.join(name))
    }

    fn create(&self, name: &str) -> Result<(PathBuf, BufWriter<File>), CliError> {
        let path = self.path(name)?;
        let file = File::create(&path)
            .map_err(|e| CliError::config(format!("cannot write {}: {e}", path.display())))?;
        Ok((path, BufWriter::new(file)))
    }

    /// Pretty JSON on stdout, and in `name` under the output directory.
    fn emit_json<T: Serialize>(&self, name: &str, value: &T) -> Result<(), CliError> {
        let text = serde_json::to_string_pretty(value)?;
        print_stdout(&text)?;
        if self.has_dir() {
            let (_, mut f) = self.create(name)?;
            writeln!(f, "{text}")?;
            f.flush()?;
        }
        Ok(())
    }

    /// CSV on stdout, or only in `name` when a directory is set.
    fn emit_csv(
        &self,
        name: &str,
        write: impl FnOnce(&mut dyn Write) -> io::Result<()>,
    ) -> Result<(), CliError> {
        if self.has_dir() {
            let (path, mut f) = self.create(name)?;
            write(&mut f)?;
            f.flush()?;
            eprintln!("wrote {}", path.display());
        } else {
            let mut lock = io::stdout().lock();
            ignore_broken_pipe(write(&mut lock).and_then(|_| lock.flush()))?;
        }
        Ok(())
    }
}

/// Every emitted document: the resolved config (seed included) and the
/// result fields.
#[derive(Serialize)]
struct Emitted<'a, T: Serialize> {
    command: &'static str,
    seed: u64,
    config: &'a RunConfig,
    #[serde(flatten)]
    result: T,
}

/// Path pair `index` of the run; the same draw as ensemble path `index`.
fn sample_paths(
    cfg: &RunConfig,
    seed: u64,
    index: u64,
) -> Result<(FbmPathPair, &'static str), CliError> {
    let sampler = FbmSampler::new(cfg.params.hurst, cfg.time_grid()?, cfg.bounds.sampler)?;
    Ok((
        sampler.sample(derive_seed(seed, index)),
        sampler.method_name(),
    ))
}

pub struct DensityArgs {
    pub alpha: f64,
    pub d: usize,
    pub at: Vec<f64>,
    pub t: f64,
    pub r_max: Option<f64>,
    pub nodes: usize,
    pub cache: Option<PathBuf>,
    pub digits: usize,
}

pub fn density(args: DensityArgs, out: &Output) -> Result<(), CliError> {
    if !(args.t > 0.0) {
        return Err(CliError::config(format!(
            "--t must be positive, got {}",
            args.t
        )));
    }
    let section = StableSection {
        r_max: args.r_max,
        nodes: args.nodes,
        cache_dir: args.cache,
    };
    let profile = section.profile(args.alpha, args.d)?;
    if !args.at.is_empty() {
        let mut lines = Vec::with_capacity(args.at.len());
        for &r in &args.at {
            if !(r >= 0.0) {
                return Err(CliError::config(format!(
                    "--at expects radii >= 0, got {r}"
                )));
            }
            lines.push(format!(
                "{:.*}",
                args.digits,
                profile.density_radial(args.t, r)?
            ));
        }
        return print_stdout(&lines.join("\n"));
    }
    let name = format!("density_a{}_d{}.csv", args.alpha, args.d);
    out.emit_csv(&name, |w| write_table(&profile, args.t, w))
}

/// `r,p` at the profile nodes rescaled to time `t`.
fn write_table(profile: &StableProfile, t: f64, w: &mut dyn Write) -> io::Result<()> {
    writeln!(w, "r,p")?;
    let scale = t.powf(1.0 / profile.alpha);
    for &r in &profile.r_nodes {
        let r = r * scale;
        let p = profile.density_radial(t, r).map_err(io::Error::other)?;
        writeln!(w, "{r},{p}")?;
    }
    Ok(())
}

pub fn fbm(cfg: &RunConfig, seed: u64, index: u64, out: &Output) -> Result<(), CliError> {
    cfg.validate()?;
    let (paths, _) = sample_paths(cfg, seed, index)?;
    out.emit_csv(&format!("fbm_path_{index}.csv"), |w| paths.write_csv(w))
}

#[derive(Serialize)]
struct BoundsResult {
    sampler: &'static str,
    derived: blowup_core::model::DerivedConstants,
    context: BoundsContext,
    regime: blowup_core::model::RegimeReport,
    bounds: blowup_core::bounds::BlowupBounds,
}

pub fn bounds(
    cfg: &RunConfig,
    seed: u64,
    dump_integrals: bool,
    out: &Output,
) -> Result<(), CliError> {
    cfg.validate()?;
    let profile = cfg.profile()?;
    let derived = derive_constants(&cfg.params);
    let context = BoundsContext::new(&cfg.params, &derived, &cfg.init, &profile, cfg.bounds.r0)?;
    let (paths, sampler) = sample_paths(cfg, seed, 0)?;
    let options = BoundsOptions {
        second_threshold: cfg.bounds.second_threshold,
        sup_norm_estimate: cfg.bounds.sup_norm_estimate,
    };
    let bounds = compute_bounds(&paths, &cfg.params, &derived, &cfg.init, &context, options)?;
    let regime = classify_regime(&cfg.params, &derived);
    if dump_integrals {
        match lower_integrals(&paths, &cfg.params, &derived) {
            Ok([i1, i2]) => {
                let (path, mut f) = out.create("integrals.csv")?;
                writeln!(f, "t,i1,i2")?;
                for ((t, a), b) in i1.times.iter().zip(&i1.values).zip(&i2.values) {
                    writeln!(f, "{t},{a},{b}")?;
                }
                f.flush()?;
                eprintln!("wrote {}", path.display());
            }
            Err(e) => eprintln!("warning: no lower-bound integrals to dump: {e}"),
        }
    }
    let result = BoundsResult {
        sampler,
        derived,
        context,
        regime,
        bounds,
    };
    out.emit_json(
        "bounds.json",
        &Emitted {
            command: "bounds",
            seed,
            config: cfg,
            result,
        },
    )
}

pub fn ensemble(cfg: &RunConfig, seed: u64, out: &Output) -> Result<(), CliError> {
    cfg.validate()?;
    let profile = cfg.profile()?;
    let ens = Ensemble::new(cfg.ensemble_config(seed)?, &profile)?;
    let (summary, records) = ens.run()?;
    if out.has_dir() && cfg.output.per_path_csv {
        let (path, mut f) = out.create("paths.csv")?;
        write_records_csv(&records, &mut f)?;
        f.flush()?;
        eprintln!("wrote {}", path.display());
    }
    out.emit_json(
        "ensemble.json",
        &Emitted {
            command: "ensemble",
            seed,
            config: cfg,
            result: summary,
        },
    )
}

#[derive(Serialize)]
struct PdeResult {
    grid: blowup_core::pde::TorusGrid,
    report: blowup_core::pde::BlowupReport,
}

pub fn pde(cfg: &RunConfig, seed: u64, out: &Output) -> Result<(), CliError> {
    cfg.validate()?;
    let grid = cfg.torus()?;
    let solver = cfg.solver_config()?;
    let derived = derive_constants(&cfg.params);
    let paths = if cfg.pde.zero_noise {
        FbmPathPair::zeros(cfg.time_grid()?, cfg.params.hurst)
    } else {
        sample_paths(cfg, seed, 0)?.0
    };
    let report = solve_until_blowup(grid, &cfg.init, &paths, &cfg.params, &derived, &solver)?;
    if solver.snapshot_stride > 0 {
        let (path, mut f) = out.create("snapshots.csv")?;
        writeln!(f, "t,index,v1,v2")?;
        for state in &report.coarse.trajectory {
            state.write_csv_rows(&mut f)?;
        }
        f.flush()?;
        eprintln!("wrote {}", path.display());
    }
    let unresolved = !report.resolved;
    let status = report.status;
    out.emit_json(
        "pde.json",
        &Emitted {
            command: "pde",
            seed,
            config: cfg,
            result: PdeResult { grid, report },
        },
    )?;
    if unresolved {
        return Err(CliError::Numerical(
            "the dt and dt/2 passes disagree; refine dt or the grid".into(),
        ));
    }
    if status == BlowupStatus::HorizonExhausted {
        eprintln!("no blow-up before t_end = {}", solver.t_end);
    }
    Ok(())
}

pub fn report(inputs: &[PathBuf], out: &Output) -> Result<(), CliError> {
    if inputs.is_empty() {
        return Err(CliError::config("report needs at least one JSON input"));
    }
    let mut rows = Vec::new();
    for input in inputs {
        rows.extend(crate::report::rows_from_file(input)?);
    }
    let (csv_path, mut f) = out.create("report.csv")?;
    crate::report::write_csv(&rows, &mut f)?;
    f.flush()?;
    let script = out.path("plot_report.py")?;
    fs::write(&script, crate::report::PLOT_SCRIPT)?;
    print_stdout(&format!("{}\n{}", csv_path.display(), script.display()))
}
