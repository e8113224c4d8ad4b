//! Report and manifest formats written by the CLI.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};

use super::config::{check_label, LabeledController};
use crate::metrics::ResponseMetrics;
use crate::plant::ControllerParams;
use crate::tuner::{PoleQuadrant, ResidualValue, TuningMode};

pub const TOOL_NAME: &str = env!("CARGO_PKG_NAME");
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config: String,
    pub config_sha256: String,
    pub seed: Option<u64>,
    pub outputs: Vec<String>,
}

impl Manifest {
    pub fn new(command: &str, config: &Path, config_sha256: &str, seed: Option<u64>) -> Self {
        Self {
            tool: TOOL_NAME.to_string(),
            version: TOOL_VERSION.to_string(),
            command: command.to_string(),
            config: config.display().to_string(),
            config_sha256: config_sha256.to_string(),
            seed,
            outputs: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoleReport {
    pub re: f64,
    pub im: f64,
    pub zeta: f64,
    pub omega0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuneRun {
    pub mode: TuningMode,
    pub params: ControllerParams,
    pub residual: ResidualValue,
    pub best_fitness: f64,
    pub target_fitness: f64,
    pub converged: bool,
    pub iterations_run: usize,
    pub fitness_history: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuneReport {
    pub tool_version: String,
    pub config_sha256: String,
    pub seed: u64,
    pub swarm_size: usize,
    pub max_iterations: usize,
    pub pole: PoleReport,
    pub runs: Vec<TuneRun>,
}

impl TuneReport {
    pub fn all_converged(&self) -> bool {
        self.runs.iter().all(|r| r.converged)
    }

    pub fn controllers(&self) -> Vec<LabeledController> {
        self.runs
            .iter()
            .map(|r| LabeledController { label: r.mode.to_string(), params: r.params })
            .collect()
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{TOOL_NAME} {} tune report", self.tool_version);
        let _ = writeln!(s, "config sha256: {}", self.config_sha256);
        let _ = writeln!(s, "seed: {}", self.seed);
        let _ = writeln!(s, "swarm: {} particles, up to {} iterations", self.swarm_size, self.max_iterations);
        let _ = writeln!(
            s,
            "dominant pole: {:.6} {} j{:.6}  (zeta = {}, omega0 = {})",
            self.pole.re,
            if self.pole.im < 0.0 { '-' } else { '+' },
            self.pole.im.abs(),
            self.pole.zeta,
            self.pole.omega0
        );
        let _ = writeln!(s);
        let _ = writeln!(s, "{:<12}{}", "", self.runs.iter().map(|r| format!("{:>16}", r.mode.to_string())).collect::<String>());
        let row = |s: &mut String, name: &str, f: &dyn Fn(&TuneRun) -> String| {
            let _ = writeln!(s, "{name:<12}{}", self.runs.iter().map(|r| format!("{:>16}", f(r))).collect::<String>());
        };
        row(&mut s, "Kp", &|r| format!("{:.6}", r.params.kp));
        row(&mut s, "Ti", &|r| format!("{:.6}", r.params.ti));
        row(&mut s, "Td", &|r| format!("{:.6}", r.params.td));
        row(&mut s, "lambda", &|r| format!("{:.6}", r.params.lambda));
        row(&mut s, "delta", &|r| format!("{:.6}", r.params.delta));
        row(&mut s, "R", &|r| format!("{:.3e}", r.residual.r));
        row(&mut s, "I", &|r| format!("{:.3e}", r.residual.i));
        row(&mut s, "P", &|r| format!("{:.3e}", r.residual.p));
        row(&mut s, "fitness", &|r| format!("{:.3e}", r.best_fitness));
        row(&mut s, "iterations", &|r| r.iterations_run.to_string());
        row(&mut s, "converged", &|r| r.converged.to_string());
        let _ = writeln!(s);
        for r in &self.runs {
            let _ = writeln!(
                s,
                "{} controller: {:.6} + {:.6} s^-{:.6} + {:.6} s^{:.6}",
                r.mode, r.params.kp, r.params.ti, r.params.lambda, r.params.td, r.params.delta
            );
        }
        for r in &self.runs {
            let _ = writeln!(s);
            let _ = writeln!(s, "{} fitness history (gbest per iteration):", r.mode);
            for (k, f) in r.fitness_history.iter().enumerate() {
                let _ = writeln!(s, "{:>6} {:.6e}", k + 1, f);
            }
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveMetrics {
    pub label: String,
    pub csv: String,
    /// First non-finite sample index when the simulation diverged.
    pub diverged_at: Option<usize>,
    pub metrics: ResponseMetrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateReport {
    pub tool_version: String,
    pub time_step: f64,
    pub horizon: f64,
    pub rise_time_convention: String,
    pub curves: Vec<CurveMetrics>,
}

fn opt(v: Option<f64>, prec: usize) -> String {
    v.map_or_else(|| "n/a".to_string(), |x| format!("{x:.prec$}"))
}

impl SimulateReport {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{TOOL_NAME} {} step-response metrics", self.tool_version);
        let _ = writeln!(s, "time step {} s, horizon {} s, rise time {}", self.time_step, self.horizon, self.rise_time_convention);
        let _ = writeln!(s);
        let _ = writeln!(
            s,
            "{:<20}{:>14}{:>14}{:>14}{:>14}{:>8}",
            "curve", "overshoot %", "rise s", "settling s", "final", "stable"
        );
        for c in &self.curves {
            let m = &c.metrics;
            let _ = writeln!(
                s,
                "{:<20}{:>14}{:>14}{:>14}{:>14}{:>8}",
                c.label,
                opt(m.overshoot_percent, 3),
                opt(m.rise_time, 4),
                opt(m.settling_time, 4),
                opt(m.steady_state, 5),
                m.stable
            );
            if let Some(k) = c.diverged_at {
                let _ = writeln!(s, "  {} diverged at sample {k}", c.label);
            }
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyEntry {
    pub label: String,
    pub params: ControllerParams,
    pub quadrant: PoleQuadrant,
    pub pole_re: f64,
    pub pole_im: f64,
    pub residual: ResidualValue,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub tool_version: String,
    pub entries: Vec<VerifyEntry>,
}

impl VerifyReport {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{TOOL_NAME} {} characteristic residual", self.tool_version);
        let _ = writeln!(s);
        let _ = writeln!(
            s,
            "{:<20}{:>24}{:>16}{:>16}{:>16}{:>16}",
            "controller", "pole", "R", "I", "P", "f"
        );
        for e in &self.entries {
            let pole = format!("{:.5}{:+.5}j", e.pole_re, e.pole_im);
            let _ = writeln!(
                s,
                "{:<20}{:>24}{:>16.6e}{:>16.6e}{:>16.6e}{:>16.6e}",
                e.label, pole, e.residual.r, e.residual.i, e.residual.p, e.residual.f
            );
        }
        s
    }
}

/// Controllers from a params file: a tune report (`*.json`) or a TOML file
/// with `[[controller]]` tables.
pub fn load_params(path: &Path) -> anyhow::Result<(Vec<LabeledController>, Option<u64>)> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading params {}", path.display()))?;
    let (controllers, seed) = if path.extension().is_some_and(|e| e == "json") {
        let report: TuneReport =
            serde_json::from_str(&text).with_context(|| format!("parsing tune report {}", path.display()))?;
        (report.controllers(), Some(report.seed))
    } else {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct ParamsFile {
            controller: Vec<LabeledController>,
        }
        let file: ParamsFile =
            toml::from_str(&text).with_context(|| format!("parsing params {}", path.display()))?;
        (file.controller, None)
    };
    if controllers.is_empty() {
        bail!("{} contains no controllers", path.display());
    }
    for c in &controllers {
        check_label(&c.label)?;
        if !c.params.is_finite() {
            bail!("controller {:?} has non-finite parameters", c.label);
        }
    }
    Ok((controllers, seed))
}
