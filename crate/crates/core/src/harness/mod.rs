//! Randomized verification suites, their configuration and the JSON report.

mod suites;

pub use suites::{checks, evaluate, generate, CheckSpec, Inputs, Suite, TolKind};

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkernel::{CMat, MatrixJson, Rng};
use crate::polarized::Polarization;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Pinned tolerances are stated for these reference values and scale with
/// the configured ones.
pub const REFERENCE_TOL_EXACT: f64 = 1e-9;
pub const REFERENCE_TOL_FD: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub dim_plus: usize,
    pub dim_minus: usize,
    pub trials: u32,
    pub seed: u64,
    pub tol_exact: f64,
    pub tol_fd: f64,
    pub fd_step: f64,
    pub suites: Vec<Suite>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            dim_plus: 6,
            dim_minus: 6,
            trials: 100,
            seed: 42,
            tol_exact: 1e-9,
            tol_fd: 1e-5,
            fd_step: 1e-3,
            suites: Suite::ALL.to_vec(),
        }
    }
}

impl SuiteConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dim_plus == 0 || self.dim_minus == 0 {
            return Err(Error::InvalidInput("dimensions must be at least 1".into()));
        }
        if self.trials == 0 {
            return Err(Error::InvalidInput("trials must be at least 1".into()));
        }
        for (name, v) in [("tol_exact", self.tol_exact), ("tol_fd", self.tol_fd), ("fd_step", self.fd_step)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidInput(format!("{name} must be positive, got {v}")));
            }
        }
        if self.fd_step >= 0.5 {
            return Err(Error::InvalidInput(format!("fd_step must be below 0.5, got {}", self.fd_step)));
        }
        Ok(())
    }

    pub fn polarization(&self) -> Result<Polarization> {
        Polarization::new(self.dim_plus, self.dim_minus)
    }

    /// The configured tolerance of a check.
    pub fn tolerance(&self, spec: &CheckSpec) -> f64 {
        match spec.kind {
            TolKind::Exact => spec.tolerance * self.tol_exact / REFERENCE_TOL_EXACT,
            TolKind::Fd => spec.tolerance * self.tol_fd / REFERENCE_TOL_FD,
        }
    }

    /// Command line reproducing this configuration restricted to `suite`.
    pub fn reproduce_command(&self, suite: Suite) -> String {
        format!(
            "det2 verify --suites {} --dim-plus {} --dim-minus {} --trials {} --seed {} --tol-exact {:e} --tol-fd {:e} --fd-step {:e}",
            suite, self.dim_plus, self.dim_minus, self.trials, self.seed, self.tol_exact, self.tol_fd, self.fd_step
        )
    }
}

/// A stored instance: enough to re-evaluate every check of one suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Case {
    pub suite: Suite,
    pub trial: u32,
    pub seed: u64,
    pub pol: Polarization,
    pub fd_step: f64,
    pub inputs: BTreeMap<String, MatrixJson>,
    /// Residual of each check as recorded when the case was run.
    pub residuals: BTreeMap<String, f64>,
}

impl Case {
    pub fn inputs(&self) -> Result<Inputs> {
        self.inputs.iter().map(|(k, v)| Ok((k.clone(), CMat::try_from(v)?))).collect()
    }

    /// Re-runs the checks on the stored inputs.
    pub fn evaluate(&self) -> Result<BTreeMap<String, f64>> {
        let values = evaluate(self.suite, self.pol, self.fd_step, &self.inputs()?)?;
        Ok(checks(self.suite).iter().map(|c| c.name.to_string()).zip(values).collect())
    }

    /// Largest difference between recorded and recomputed residuals.
    pub fn reproduction_error(&self) -> Result<f64> {
        let fresh = self.evaluate()?;
        let mut worst = 0.0f64;
        for (name, old) in &self.residuals {
            let new = fresh.get(name).ok_or_else(|| Error::InvalidInput(format!("unknown check {name:?}")))?;
            let diff = if old == new { 0.0 } else { (old - new).abs() };
            worst = worst.max(if diff.is_nan() { f64::INFINITY } else { diff });
        }
        Ok(worst)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub max_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub enforced: bool,
    pub worst_trial: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteResult {
    pub name: Suite,
    pub trials: u32,
    /// Residual of the enforced check closest to (or furthest past) its tolerance.
    pub max_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub wall_time: f64,
    pub checks: Vec<CheckReport>,
    pub errors: Vec<String>,
    pub reproduce: String,
    pub worst_case: Option<Case>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub version: String,
    pub config: SuiteConfig,
    pub suites: Vec<SuiteResult>,
    pub pass: bool,
}

impl SuiteReport {
    pub fn suite(&self, suite: Suite) -> Option<&SuiteResult> {
        self.suites.iter().find(|s| s.name == suite)
    }

    pub fn check(&self, suite: Suite, name: &str) -> Option<&CheckReport> {
        self.suite(suite)?.checks.iter().find(|c| c.name == name)
    }
}

struct Trial {
    index: u32,
    inputs: Option<Inputs>,
    outcome: std::result::Result<Vec<f64>, String>,
}

fn run_trial(cfg: &SuiteConfig, pol: Polarization, suite: Suite, index: u32) -> Trial {
    let mut rng = Rng::for_trial(cfg.seed, suite.index(), index);
    match generate(suite, pol, &mut rng) {
        Ok(inputs) => {
            let outcome = evaluate(suite, pol, cfg.fd_step, &inputs).map_err(|e| e.to_string());
            Trial { index, inputs: Some(inputs), outcome }
        }
        Err(e) => Trial { index, inputs: None, outcome: Err(format!("generation failed: {e}")) },
    }
}

/// `residual / tolerance`, infinite for non-finite residuals.
fn ratio(residual: f64, tolerance: f64) -> f64 {
    if !residual.is_finite() {
        f64::INFINITY
    } else if residual == 0.0 {
        0.0
    } else if tolerance == 0.0 {
        f64::INFINITY
    } else {
        residual / tolerance
    }
}

fn run_suite(cfg: &SuiteConfig, pol: Polarization, suite: Suite) -> SuiteResult {
    let start = Instant::now();
    let trials: Vec<Trial> = (0..cfg.trials).into_par_iter().map(|i| run_trial(cfg, pol, suite, i)).collect();
    let specs = checks(suite);

    let mut checks_out: Vec<CheckReport> = specs
        .iter()
        .map(|s| CheckReport {
            name: s.name.to_string(),
            max_residual: 0.0,
            tolerance: cfg.tolerance(s),
            pass: true,
            enforced: s.enforced,
            worst_trial: 0,
        })
        .collect();
    let mut errors = Vec::new();
    let mut worst: Option<(f64, usize)> = None;

    for (pos, trial) in trials.iter().enumerate() {
        let values: Vec<f64> = match &trial.outcome {
            Ok(v) => v.clone(),
            Err(e) => {
                errors.push(format!("trial {}: {e}", trial.index));
                vec![f64::INFINITY; specs.len()]
            }
        };
        let mut trial_ratio = 0.0f64;
        for ((report, spec), &v) in checks_out.iter_mut().zip(specs).zip(&values) {
            let v = if v.is_nan() { f64::INFINITY } else { v };
            if v > report.max_residual {
                report.max_residual = v;
                report.worst_trial = trial.index;
            }
            if spec.enforced {
                trial_ratio = trial_ratio.max(ratio(v, report.tolerance));
            }
        }
        if worst.is_none_or(|(r, _)| trial_ratio > r) {
            worst = Some((trial_ratio, pos));
        }
    }
    for c in &mut checks_out {
        c.pass = ratio(c.max_residual, c.tolerance) <= 1.0;
    }

    let binding = checks_out.iter().filter(|c| c.enforced).fold(None::<&CheckReport>, |best, c| match best {
        Some(b) if ratio(b.max_residual, b.tolerance) >= ratio(c.max_residual, c.tolerance) => Some(b),
        _ => Some(c),
    });
    let (max_residual, tolerance) = binding.map_or((0.0, 0.0), |c| (c.max_residual, c.tolerance));
    let pass = errors.is_empty() && checks_out.iter().filter(|c| c.enforced).all(|c| c.pass);

    let worst_case = worst.and_then(|(_, pos)| {
        let t = &trials[pos];
        let inputs = t.inputs.as_ref()?;
        let residuals = match &t.outcome {
            Ok(v) => specs.iter().map(|s| s.name.to_string()).zip(v.iter().copied()).collect(),
            Err(_) => BTreeMap::new(),
        };
        Some(Case {
            suite,
            trial: t.index,
            seed: cfg.seed,
            pol,
            fd_step: cfg.fd_step,
            inputs: inputs.iter().map(|(k, m)| (k.clone(), MatrixJson::from(m))).collect(),
            residuals,
        })
    });

    SuiteResult {
        name: suite,
        trials: cfg.trials,
        max_residual,
        tolerance,
        pass,
        wall_time: start.elapsed().as_secs_f64(),
        checks: checks_out,
        errors,
        reproduce: cfg.reproduce_command(suite),
        worst_case,
    }
}

/// Runs every configured suite. Results are independent of thread count.
pub fn run_suites(cfg: &SuiteConfig) -> Result<SuiteReport> {
    cfg.validate()?;
    let pol = cfg.polarization()?;
    let mut suites = cfg.suites.clone();
    suites.sort();
    suites.dedup();
    let results: Vec<SuiteResult> = suites.iter().map(|&s| run_suite(cfg, pol, s)).collect();
    let pass = results.iter().all(|r| r.pass);
    Ok(SuiteReport { version: VERSION.to_string(), config: cfg.clone(), suites: results, pass })
}

/// Writes the report as pretty-printed JSON.
pub fn emit_report(report: &SuiteReport, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(report)?;
    std::fs::write(path, text)?;
    Ok(())
}

pub fn load_report(path: &Path) -> Result<SuiteReport> {
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}

/// Reads either a single case or a full report (yielding its worst cases).
pub fn load_cases(path: &Path) -> Result<Vec<Case>> {
    let text = std::fs::read_to_string(path)?;
    let value: serde_json::Value = serde_json::from_str(&text)?;
    if value.get("suites").is_some() {
        let report: SuiteReport = serde_json::from_value(value)?;
        Ok(report.suites.into_iter().filter_map(|s| s.worst_case).collect())
    } else {
        Ok(vec![serde_json::from_value(value)?])
    }
}
