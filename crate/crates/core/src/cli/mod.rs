//! Batch front end: `tune`, `simulate` and `verify` subcommands.
//!
//! Exit codes: 0 success, 1 input or runtime error, 2 tuning finished above
//! its target fitness (the report is still written).

pub mod config;
pub mod report;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};
use serde::Serialize;

use crate::error::Error;
use crate::gl::{simulate_step, StepResponse};
use crate::metrics::{analyze_with, RiseTimeConvention};
use crate::plant::{closed_loop, controller_tf, FractionalTransferFunction};
use crate::tuner::{residual, tune, PoleQuadrant, TuningMode};

use config::{Job, LabeledController, ModeSelection};
use report::{
    load_params, CurveMetrics, Manifest, PoleReport, SimulateReport, TuneReport, TuneRun, VerifyEntry,
    VerifyReport, TOOL_VERSION,
};

#[derive(Debug, Parser)]
#[command(name = "fopid", version, about = "Fractional-order PID tuning by dominant-pole placement")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tune integer and/or fractional controllers with the particle swarm.
    Tune {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum)]
        mode: Option<ModeSelection>,
    },
    /// Simulate closed-loop unit-step responses and report metrics.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Tune report (.json) or TOML file with [[controller]] tables.
        #[arg(long)]
        params: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the characteristic residual at both dominant poles.
    Verify {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        params: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    NotConverged,
}

impl Outcome {
    pub fn exit_code(self) -> u8 {
        match self {
            Outcome::Success => 0,
            Outcome::NotConverged => 2,
        }
    }
}

/// Parses `args` (including the program name), runs, and maps the result to
/// the exit-code contract.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli.command) {
        Ok(outcome) => ExitCode::from(outcome.exit_code()),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

pub fn run(command: Command) -> anyhow::Result<Outcome> {
    match command {
        Command::Tune { config, seed, out, mode } => {
            let mut job = Job::load(&config)?;
            if let Some(seed) = seed {
                job.pso.seed = seed;
            }
            if let Some(mode) = mode {
                job.mode = mode;
            }
            let out = out.unwrap_or_else(|| job.out_dir.clone());
            cmd_tune(&job, &out)
        }
        Command::Simulate { config, params, out } => {
            let job = Job::load(&config)?;
            let out = out.unwrap_or_else(|| job.out_dir.clone());
            cmd_simulate(&job, params.as_deref(), &out)
        }
        Command::Verify { config, params, out } => {
            let job = Job::load(&config)?;
            let out = out.unwrap_or_else(|| job.out_dir.clone());
            let report = cmd_verify(&job, params.as_deref(), &out)?;
            print!("{}", report.to_text());
            Ok(Outcome::Success)
        }
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> anyhow::Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn write_text(path: &Path, text: &str) -> anyhow::Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn create_out(out: &Path) -> anyhow::Result<()> {
    fs::create_dir_all(out).with_context(|| format!("creating output directory {}", out.display()))
}

/// Runs each selected mode with the job's seed and writes
/// `tune_report.{txt,json}` and `manifest.json` into `out`.
pub fn cmd_tune(job: &Job, out: &Path) -> anyhow::Result<Outcome> {
    let mut runs = Vec::new();
    let mut pole = None;
    for mode in job.mode.modes() {
        let problem = job.problem(mode)?;
        let pso = job.pso_for(&problem);
        let outcome = tune(&problem, &pso).with_context(|| format!("{mode} tuning"))?;
        let p = problem.target_pole();
        pole = Some(PoleReport { re: p.re, im: p.im, zeta: job.zeta, omega0: job.omega0 });
        runs.push(TuneRun {
            mode,
            params: outcome.params,
            residual: residual(&outcome.params, &problem)?,
            best_fitness: outcome.swarm.best_fitness,
            target_fitness: pso.target_fitness,
            converged: outcome.converged,
            iterations_run: outcome.swarm.iterations_run,
            fitness_history: outcome.swarm.fitness_history,
        });
    }
    let report = TuneReport {
        tool_version: TOOL_VERSION.to_string(),
        config_sha256: job.config_sha256.clone(),
        seed: job.pso.seed,
        swarm_size: job.pso.swarm_size,
        max_iterations: job.pso.max_iterations,
        pole: pole.context("no tuning mode selected")?,
        runs,
    };

    create_out(out)?;
    write_text(&out.join("tune_report.txt"), &report.to_text())?;
    write_json(&out.join("tune_report.json"), &report)?;
    let mut manifest = Manifest::new("tune", &job.config_path, &job.config_sha256, Some(job.pso.seed));
    manifest.outputs = vec!["tune_report.txt".into(), "tune_report.json".into()];
    write_json(&out.join("manifest.json"), &manifest)?;

    if report.all_converged() {
        Ok(Outcome::Success)
    } else {
        for r in report.runs.iter().filter(|r| !r.converged) {
            eprintln!(
                "warning: {} tuning stopped at fitness {:.3e} above target {:.3e}",
                r.mode, r.best_fitness, r.target_fitness
            );
        }
        Ok(Outcome::NotConverged)
    }
}

fn controllers_for(job: &Job, params: Option<&Path>) -> anyhow::Result<(Vec<LabeledController>, Option<u64>)> {
    match params {
        Some(path) => load_params(path),
        None => Ok((job.controllers.clone(), None)),
    }
}

/// Step response of one curve; a divergent simulation yields its finite
/// prefix and the index of the first bad sample.
pub fn simulate_curve(
    tf: &FractionalTransferFunction,
    job: &Job,
) -> anyhow::Result<(StepResponse, Option<usize>)> {
    match simulate_step(tf, &job.sim) {
        Ok(resp) => Ok((resp, None)),
        Err(Error::Diverged { index, response }) => Ok((*response, Some(index))),
        Err(e) => Err(e.into()),
    }
}

/// Writes `<label>.csv` per controller (plus `open_loop.csv` when enabled),
/// `metrics.{txt,json}` and `manifest.json`.
pub fn cmd_simulate(job: &Job, params: Option<&Path>, out: &Path) -> anyhow::Result<Outcome> {
    let (controllers, seed) = controllers_for(job, params)?;
    if controllers.is_empty() && !job.open_loop {
        bail!("nothing to simulate: no --params, no [[controller]] in the config, and sim.open_loop is false");
    }

    let mut curves: Vec<(String, FractionalTransferFunction)> = Vec::new();
    if job.open_loop {
        curves.push(("open_loop".to_string(), job.plant.clone()));
    }
    for c in &controllers {
        if curves.iter().any(|(l, _)| *l == c.label) {
            bail!("duplicate curve label {:?}", c.label);
        }
        let gc = controller_tf(&c.params).with_context(|| format!("controller {:?}", c.label))?;
        let cl = closed_loop(&gc, &job.plant).with_context(|| format!("closed loop for {:?}", c.label))?;
        curves.push((c.label.clone(), cl));
    }

    create_out(out)?;
    let mut manifest = Manifest::new("simulate", &job.config_path, &job.config_sha256, seed);
    let mut report = SimulateReport {
        tool_version: TOOL_VERSION.to_string(),
        time_step: job.sim.time_step,
        horizon: job.sim.horizon,
        rise_time_convention: match job.rise_time {
            RiseTimeConvention::TenNinety => "10-90",
            RiseTimeConvention::ZeroHundred => "0-100",
        }
        .to_string(),
        curves: Vec::new(),
    };
    for (label, tf) in &curves {
        let (resp, diverged_at) = simulate_curve(tf, job)?;
        let csv = format!("{label}.csv");
        write_text(&out.join(&csv), &resp.to_csv())?;
        let mut metrics = if resp.samples.len() >= 2 {
            analyze_with(&resp, job.rise_time)?
        } else {
            analyze_with(&StepResponse::new(resp.time_step, vec![f64::NAN; 2]), job.rise_time)?
        };
        if diverged_at.is_some() {
            metrics.stable = false;
        }
        manifest.outputs.push(csv.clone());
        report.curves.push(CurveMetrics { label: label.clone(), csv, diverged_at, metrics });
    }
    write_text(&out.join("metrics.txt"), &report.to_text())?;
    write_json(&out.join("metrics.json"), &report)?;
    manifest.outputs.extend(["metrics.txt".to_string(), "metrics.json".to_string()]);
    write_json(&out.join("manifest.json"), &manifest)?;
    print!("{}", report.to_text());
    Ok(Outcome::Success)
}

/// Residual of each controller at the second- and third-quadrant poles.
/// Writes `verify.{txt,json}` into `out`.
pub fn cmd_verify(job: &Job, params: Option<&Path>, out: &Path) -> anyhow::Result<VerifyReport> {
    let (controllers, _) = controllers_for(job, params)?;
    if controllers.is_empty() {
        bail!("no controllers to verify: pass --params or add [[controller]] tables to the config");
    }
    let mut entries = Vec::new();
    for c in &controllers {
        for quadrant in [PoleQuadrant::Second, PoleQuadrant::Third] {
            let problem = job.problem(TuningMode::Fractional)?.with_quadrant(quadrant);
            let pole = problem.target_pole();
            entries.push(VerifyEntry {
                label: c.label.clone(),
                params: c.params,
                quadrant,
                pole_re: pole.re,
                pole_im: pole.im,
                residual: residual(&c.params, &problem).with_context(|| format!("controller {:?}", c.label))?,
            });
        }
    }
    let report = VerifyReport { tool_version: TOOL_VERSION.to_string(), entries };
    create_out(out)?;
    write_text(&out.join("verify.txt"), &report.to_text())?;
    write_json(&out.join("verify.json"), &report)?;
    Ok(report)
}
