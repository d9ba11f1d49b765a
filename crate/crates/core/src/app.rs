//! The `gnflow` commands.
//!
//! Each command turns a validated [`ScenarioConfig`] into a [`Report`]: an
//! exit status, the `summary.json` record and the CSV artifacts. Reports are
//! pure values; [`execute`] adds config loading, overrides and the (atomic)
//! file writes. `summary.json` is written on every path, including config
//! errors, as long as an output directory can be determined.
//!
//! Exit codes: 0 success, 1 comparison outside tolerance, 2 configuration
//! error, 3 monotonicity loss, 4 solver failure or rejected step, 5 I/O error.

use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::config::{Artifact, LadderKind, ScenarioConfig, ScenarioKind};
use crate::diagnostics::{l2_distance, label_mass, relative_sup_error, sup_distance, convergence_rate};
use crate::elliptic::manufactured_error;
use crate::error::GnError;
use crate::eulerian::{integrate_eulerian, EulerianOptions, EulerianState};
use crate::flow_map::reconstruct_eulerian;
use crate::grid::{DerivativeScheme, PeriodicGrid};
use crate::integrate::{integrate, lagrangian_auto_dt, IntegratorConfig, StepPlan, Termination, Trajectory};
use crate::lagrangian::FlowMapState;
use crate::output::{self, CompareRow, Summary};
use crate::scenario::{exact_solution, initial_state};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Run,
    Compare,
    Converge,
}

/// Command-line overrides applied on top of the config file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub output_dir: Option<PathBuf>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Success = 0,
    CompareFailed = 1,
    ConfigError = 2,
    MonotonicityLoss = 3,
    SolverFailure = 4,
    IoError = 5,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        self as i32
    }

    pub fn from_termination(t: Termination) -> Self {
        match t {
            Termination::Completed => Self::Success,
            Termination::MonotonicityLoss => Self::MonotonicityLoss,
            Termination::StepRejected | Termination::SolverFailure => Self::SolverFailure,
        }
    }
}

/// Outcome of one command before anything touches the file system.
#[derive(Debug, Clone)]
pub struct Report {
    pub status: ExitStatus,
    pub summary: Summary,
    /// `(file name, contents)` pairs written next to `summary.json`.
    pub artifacts: Vec<(&'static str, Vec<u8>)>,
}

impl Report {
    fn new(config: &ScenarioConfig) -> Self {
        let mut summary = Summary::new(Termination::Completed.as_str());
        summary.config = Some(config.clone());
        Self { status: ExitStatus::Success, summary, artifacts: Vec::new() }
    }

    fn config_error(mut self, err: impl std::fmt::Display) -> Self {
        self.status = ExitStatus::ConfigError;
        self.summary.termination = "config_error".into();
        self.summary.message = Some(err.to_string());
        self
    }

    fn terminated(&mut self, termination: Termination, error: Option<&GnError>) {
        if self.status == ExitStatus::Success && termination != Termination::Completed {
            self.status = ExitStatus::from_termination(termination);
            self.summary.termination = termination.as_str().into();
            self.summary.message = error.map(|e| e.to_string());
        }
    }

    fn failed(mut self, err: &GnError) -> Self {
        self.terminated(Termination::from_error(err), Some(err));
        self
    }

    fn artifact(&mut self, name: &'static str, bytes: std::io::Result<Vec<u8>>) {
        match bytes {
            Ok(bytes) => self.artifacts.push((name, bytes)),
            Err(e) => self.io_error(format!("{name}: {e}")),
        }
    }

    fn io_error(&mut self, message: String) {
        self.status = ExitStatus::IoError;
        self.summary.termination = "io_error".into();
        self.summary.message = Some(message);
    }

    /// Writes the artifacts and then `summary.json` into `dir`.
    pub fn write(mut self, dir: &Path) -> Self {
        for (name, bytes) in std::mem::take(&mut self.artifacts) {
            if let Err(e) = output::write_atomic(dir, name, &bytes) {
                self.io_error(format!("{name}: {e}"));
            }
        }
        if let Err(e) = output::write_atomic(dir, output::SUMMARY_FILE, &output::summary_json(&self.summary)) {
            self.io_error(format!("{}: {e}", output::SUMMARY_FILE));
        }
        self
    }
}

/// Reads the config, applies overrides, runs `command` and writes the
/// artifacts. Returns the final report (with artifacts already written).
pub fn execute(command: Command, config_path: &Path, overrides: &Overrides) -> Report {
    let start = Instant::now();
    let config = load_config(config_path, overrides);
    let (mut report, dir) = match config {
        Ok(config) => {
            let dir = config.output.directory.clone();
            let report = match command {
                Command::Run => cmd_run(&config),
                Command::Compare => cmd_compare(&config),
                Command::Converge => cmd_converge(&config),
            };
            (report, dir)
        }
        Err(err) => {
            let mut report = Report {
                status: ExitStatus::ConfigError,
                summary: Summary::new("config_error"),
                artifacts: Vec::new(),
            };
            report.summary.message = Some(err.to_string());
            let dir = overrides.output_dir.clone().unwrap_or_else(|| crate::config::OutputSection::default().directory);
            (report, dir)
        }
    };
    report.summary.wall_seconds = start.elapsed().as_secs_f64();
    report.write(&dir)
}

/// Parses the file, applies the overrides and validates the result.
pub fn load_config(path: &Path, overrides: &Overrides) -> Result<ScenarioConfig, GnError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| GnError::InvalidArgument(format!("cannot read {}: {e}", path.display())))?;
    let mut config = ScenarioConfig::from_toml(&text)?;
    if let Some(dir) = &overrides.output_dir {
        config.output.directory = dir.clone();
    }
    if let Some(seed) = overrides.seed {
        config.scenario.seed = seed;
    }
    config.validate()?;
    Ok(config)
}

struct Setup {
    grid: PeriodicGrid,
    integrator: IntegratorConfig,
    initial: EulerianState,
}

impl Setup {
    fn new(config: &ScenarioConfig) -> Result<Self, GnError> {
        let grid = config.grid()?;
        let integrator = config.integrator()?;
        let initial = initial_state(&config.scenario, &grid)?;
        Ok(Self { grid, integrator, initial })
    }

    fn lagrangian(&self, integrator: &IntegratorConfig) -> Result<Trajectory, GnError> {
        integrate(&FlowMapState::initial(self.initial.u()), self.initial.h(), integrator)
    }
}

fn reconstruct_all(traj: &Trajectory, initial: &EulerianState) -> Result<Vec<EulerianState>, GnError> {
    traj.states.iter().map(|s| reconstruct_eulerian(s, initial.h())).collect()
}

/// `gnflow run`: Lagrangian integration, reconstruction, diagnostics.
pub fn cmd_run(config: &ScenarioConfig) -> Report {
    let report = Report::new(config);
    let setup = match Setup::new(config) {
        Ok(s) => s,
        Err(e) => return report.config_error(e),
    };
    let traj = match setup.lagrangian(&setup.integrator) {
        Ok(t) => t,
        Err(e) => return report.config_error(e),
    };
    let states = match reconstruct_all(&traj, &setup.initial) {
        Ok(s) => s,
        Err(e) => return report.failed(&e),
    };
    let mut report = report;
    report.terminated(traj.termination, traj.error.as_ref());
    let summary = &mut report.summary;
    summary.final_time = traj.final_time();
    summary.diagnostics_final = traj.diagnostics.last().copied();
    summary.metric("dt", traj.dt);
    summary.metric("steps", StepPlan::new(setup.integrator.final_time, traj.dt).steps as f64);

    let first = traj.diagnostics[0];
    let max_dev = |f: fn(&crate::diagnostics::DiagnosticsRecord) -> f64| {
        traj.diagnostics.iter().map(|r| (f(r) - f(&first)).abs()).fold(0.0_f64, f64::max)
    };
    summary.metric("mass_drift", max_dev(|r| r.mass));
    summary.metric("momentum_drift", max_dev(|r| r.momentum));
    if first.energy > 0.0 {
        summary.metric("energy_drift_relative", max_dev(|r| r.energy) / first.energy);
    }
    summary.metric("min_phix", traj.diagnostics.iter().map(|r| r.min_phix).fold(f64::INFINITY, f64::min));
    let label0 = label_mass(&traj.states[0], setup.initial.h());
    summary.metric(
        "label_mass_drift",
        traj.states
            .iter()
            .map(|s| (label_mass(s, setup.initial.h()) - label0).abs())
            .fold(0.0, f64::max),
    );
    if let Ok(Some(exact)) = exact_solution(&config.scenario, &setup.grid, summary.final_time) {
        let last = states.last().expect("at least the initial state");
        summary.metric("h_relative_sup_error", relative_sup_error(last.h().field(), exact.h().field()));
        summary.metric("u_sup_error", sup_distance(last.u(), exact.u()));
    }

    if config.output.formats.contains(&Artifact::Fields) {
        report.artifact(output::FIELDS_FILE, output::fields_csv(&traj.times, &states));
    }
    if config.output.formats.contains(&Artifact::Diagnostics) {
        report.artifact(output::DIAGNOSTICS_FILE, output::diagnostics_csv(&traj.diagnostics));
    }
    report
}

/// Lagrangian and Eulerian runs from the same data on the same step sequence.
struct Comparison {
    rows: Vec<CompareRow>,
    lagrangian: Trajectory,
    termination: Termination,
    error: Option<GnError>,
}

fn compare_runs(setup: &Setup, integrator: &IntegratorConfig, dealias: bool) -> Result<Comparison, GnError> {
    let lagrangian = setup.lagrangian(integrator)?;
    let fixed = IntegratorConfig { dt: Some(lagrangian.dt), ..integrator.clone() };
    let options = EulerianOptions { scheme: DerivativeScheme::Spectral, dealias };
    let eulerian = integrate_eulerian(&setup.initial, &fixed, options)?;
    let reconstructed = reconstruct_all(&lagrangian, &setup.initial)?;
    let rows = lagrangian
        .times
        .iter()
        .zip(&reconstructed)
        .zip(eulerian.times.iter().zip(&eulerian.states))
        .map(|((&t, a), (&te, b))| {
            debug_assert_eq!(t, te);
            CompareRow {
                t,
                sup_dh: sup_distance(a.h().field(), b.h().field()),
                sup_du: sup_distance(a.u(), b.u()),
                l2_dh: l2_distance(a.h().field(), b.h().field()),
                l2_du: l2_distance(a.u(), b.u()),
            }
        })
        .collect();
    let (termination, error) = if lagrangian.termination != Termination::Completed {
        (lagrangian.termination, lagrangian.error.clone())
    } else {
        (eulerian.termination, eulerian.error.clone())
    };
    Ok(Comparison { rows, lagrangian, termination, error })
}

/// `gnflow compare`: cross-solver agreement in sup and L² norms over time.
pub fn cmd_compare(config: &ScenarioConfig) -> Report {
    let report = Report::new(config);
    let setup = match Setup::new(config) {
        Ok(s) => s,
        Err(e) => return report.config_error(e),
    };
    let cmp = match compare_runs(&setup, &setup.integrator, config.compare.dealias) {
        Ok(c) => c,
        Err(e) => return report.failed(&e),
    };
    let mut report = report;
    report.terminated(cmp.termination, cmp.error.as_ref());
    let summary = &mut report.summary;
    summary.final_time = cmp.rows.last().map_or(0.0, |r| r.t);
    summary.diagnostics_final = cmp.lagrangian.diagnostics.last().copied();
    let max_dh = cmp.rows.iter().map(|r| r.sup_dh).fold(0.0, f64::max);
    let max_du = cmp.rows.iter().map(|r| r.sup_du).fold(0.0, f64::max);
    summary.metric("dt", cmp.lagrangian.dt);
    summary.metric("max_sup_dh", max_dh);
    summary.metric("max_sup_du", max_du);
    summary.metric("tolerance", config.compare.tolerance);
    let passed = max_dh <= config.compare.tolerance && max_du <= config.compare.tolerance;
    summary.metric("passed", if passed { 1.0 } else { 0.0 });
    if !passed && report.status == ExitStatus::Success {
        report.status = ExitStatus::CompareFailed;
        report.summary.termination = "compare_failed".into();
        report.summary.message =
            Some(format!("max sup differences {max_dh:.3e} (h), {max_du:.3e} (u) exceed {:.3e}", config.compare.tolerance));
    }
    report.artifact(output::COMPARE_FILE, output::compare_csv(&cmp.rows));
    report
}

/// Runs ladder entries on scoped threads, preserving order.
fn run_ladder<T: Sync, F>(entries: &[T], f: F) -> Vec<Result<f64, GnError>>
where
    F: Fn(&T) -> Result<f64, GnError> + Sync,
{
    std::thread::scope(|scope| {
        let handles: Vec<_> = entries.iter().map(|e| scope.spawn(|| f(e))).collect();
        handles.into_iter().map(|h| h.join().expect("ladder entry panicked")).collect()
    })
}

fn completed(traj: Trajectory) -> Result<Trajectory, GnError> {
    match traj.termination {
        Termination::Completed => Ok(traj),
        _ => Err(traj.error.unwrap_or_else(|| GnError::StepRejected("run ended early".into()))),
    }
}

/// Final-state-only integration settings.
fn final_only(integrator: &IntegratorConfig, dt: f64) -> IntegratorConfig {
    IntegratorConfig { dt: Some(dt), stride: usize::MAX, ..integrator.clone() }
}

fn time_ladder(config: &ScenarioConfig, levels: usize, factor: usize) -> Result<(Vec<f64>, Vec<f64>), GnError> {
    let setup = Setup::new(config)?;
    let t = setup.integrator.final_time;
    let dt0 = setup
        .integrator
        .dt
        .unwrap_or_else(|| lagrangian_auto_dt(setup.initial.u(), setup.initial.h(), setup.integrator.cfl_safety));
    let steps0 = StepPlan::new(t, dt0).steps.max(1);
    let mut steps: Vec<usize> = (0..levels).map(|k| steps0 << k).collect();
    steps.push(steps[levels - 1] * factor);
    let finals = std::thread::scope(|scope| {
        let handles: Vec<_> = steps
            .iter()
            .map(|&m| {
                let setup = &setup;
                scope.spawn(move || {
                    let traj = completed(setup.lagrangian(&final_only(&setup.integrator, t / m as f64))?)?;
                    Ok::<_, GnError>(traj.last().clone())
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("ladder entry panicked"))
            .collect::<Result<Vec<_>, _>>()
    })?;
    let reference = finals.last().expect("reference run");
    let errors = finals[..levels]
        .iter()
        .map(|s| sup_distance(s.psi(), reference.psi()).max(sup_distance(s.v(), reference.v())))
        .collect();
    Ok((steps[..levels].iter().map(|&m| m as f64).collect(), errors))
}

fn grid_config(config: &ScenarioConfig, n: usize) -> ScenarioConfig {
    let mut c = config.clone();
    c.grid.n = n;
    c
}

/// Common step for spatial ladders: the configured one, else the auto step
/// of the finest grid.
fn common_dt(config: &ScenarioConfig, resolutions: &[usize]) -> Result<f64, GnError> {
    let finest = *resolutions.iter().max().expect("validated non-empty");
    let setup = Setup::new(&grid_config(config, finest))?;
    Ok(setup
        .integrator
        .dt
        .unwrap_or_else(|| lagrangian_auto_dt(setup.initial.u(), setup.initial.h(), setup.integrator.cfl_safety)))
}

fn space_error(config: &ScenarioConfig, n: usize, dt: f64) -> Result<f64, GnError> {
    let setup = Setup::new(&grid_config(config, n))?;
    let traj = completed(setup.lagrangian(&final_only(&setup.integrator, dt))?)?;
    let state = reconstruct_eulerian(traj.last(), setup.initial.h())?;
    let exact = exact_solution(&config.scenario, &setup.grid, traj.final_time())?
        .ok_or_else(|| GnError::InvalidArgument("space ladder needs a scenario with an exact solution".into()))?;
    Ok(relative_sup_error(state.h().field(), exact.h().field()))
}

fn cross_error(config: &ScenarioConfig, n: usize, dt: f64) -> Result<f64, GnError> {
    let setup = Setup::new(&grid_config(config, n))?;
    let cmp = compare_runs(&setup, &final_only(&setup.integrator, dt), config.compare.dealias)?;
    if cmp.termination != Termination::Completed {
        return Err(cmp.error.unwrap_or_else(|| GnError::StepRejected("run ended early".into())));
    }
    let last = cmp.rows.last().expect("at least the initial row");
    Ok(last.sup_dh.max(last.sup_du))
}

/// `gnflow converge`: refinement ladder with observed orders.
pub fn cmd_converge(config: &ScenarioConfig) -> Report {
    let report = Report::new(config);
    let Some(ladder) = config.converge.clone() else {
        return report.config_error("converge needs a [converge] section");
    };
    if ladder.kind == LadderKind::Space && config.scenario.kind != ScenarioKind::SolitaryWave {
        return report.config_error("space ladder needs the solitary_wave scenario");
    }
    let length = config.grid.length;
    let spatial: Vec<f64> = ladder.resolutions.iter().map(|&n| n as f64).collect();
    let result = match ladder.kind {
        LadderKind::Time => time_ladder(config, ladder.levels, ladder.reference_factor),
        LadderKind::Elliptic => run_ladder(&ladder.resolutions, |&n| manufactured_error(&PeriodicGrid::new(length, n)?))
            .into_iter()
            .collect::<Result<Vec<_>, _>>()
            .map(|e| (spatial.clone(), e)),
        LadderKind::Space | LadderKind::Cross => common_dt(config, &ladder.resolutions).and_then(|dt| {
            let f = if ladder.kind == LadderKind::Space { space_error } else { cross_error };
            run_ladder(&ladder.resolutions, |&n| f(config, n, dt))
                .into_iter()
                .collect::<Result<Vec<_>, _>>()
                .map(|e| (spatial.clone(), e))
        }),
    };
    let (resolutions, errors) = match result {
        Ok(r) => r,
        Err(e @ (GnError::InvalidArgument(_) | GnError::InvalidGrid(_))) => return report.config_error(e),
        Err(e) => return report.failed(&e),
    };
    let mut report = report;
    let rows = output::converge_rows(&resolutions, &errors);
    report.summary.final_time = config.integrator.final_time;
    if let Ok(order) = convergence_rate(&errors, &resolutions) {
        report.summary.metric("observed_order", order);
    }
    if let Some(e) = errors.last() {
        report.summary.metric("finest_error", *e);
    }
    report.artifact(output::CONVERGE_FILE, output::converge_csv(&rows));
    report
}
