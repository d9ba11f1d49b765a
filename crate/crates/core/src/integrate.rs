//! Fixed-step classical RK4 for the Lagrangian system `(ψ, v)' = (v, F)`.

use serde::{Deserialize, Serialize};

use crate::diagnostics::{record_lagrangian, DiagnosticsRecord};
use crate::elliptic::HeightField;
use crate::error::{GnError, Result};
use crate::grid::{GridField, PeriodicGrid};
use crate::lagrangian::{lagrangian_rhs, FlowMapState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    #[default]
    Rk4,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegratorConfig {
    /// Fixed step; `None` selects [`lagrangian_auto_dt`].
    pub dt: Option<f64>,
    pub final_time: f64,
    pub method: Method,
    pub cfl_safety: f64,
    pub max_steps: usize,
    /// Diagnostics and states are recorded every `stride` steps (and at the end).
    pub stride: usize,
    /// Order σ used for the `H^σ × H^{σ+1}` norms in diagnostics.
    pub sigma: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            dt: None,
            final_time: 1.0,
            method: Method::Rk4,
            cfl_safety: 0.5,
            max_steps: 1_000_000,
            stride: 10,
            sigma: 1.0,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        if let Some(dt) = self.dt {
            if !(dt.is_finite() && dt > 0.0) {
                return Err(GnError::InvalidArgument(format!("dt must be positive, got {dt}")));
            }
        }
        if !(self.final_time.is_finite() && self.final_time >= 0.0) {
            return Err(GnError::InvalidArgument(format!(
                "final time must be non-negative, got {}",
                self.final_time
            )));
        }
        if !(self.cfl_safety > 0.0 && self.cfl_safety <= 1.0) {
            return Err(GnError::InvalidArgument(format!(
                "cfl_safety must lie in (0, 1], got {}",
                self.cfl_safety
            )));
        }
        if self.stride == 0 {
            return Err(GnError::InvalidArgument("stride must be at least 1".into()));
        }
        if !self.sigma.is_finite() {
            return Err(GnError::InvalidArgument("sigma must be finite".into()));
        }
        Ok(())
    }
}

/// Uniform subdivision of `[0, T]` into whole steps no longer than the requested `dt`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepPlan {
    pub steps: usize,
    pub dt: f64,
    final_time: f64,
}

impl StepPlan {
    pub fn new(final_time: f64, dt: f64) -> Self {
        if final_time == 0.0 {
            return Self { steps: 0, dt, final_time };
        }
        let steps = ((final_time / dt) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
        Self { steps, dt: final_time / steps as f64, final_time }
    }

    pub fn time(&self, step: usize) -> f64 {
        if step == self.steps {
            self.final_time
        } else {
            step as f64 * self.dt
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Completed,
    MonotonicityLoss,
    StepRejected,
    SolverFailure,
}

impl Termination {
    pub fn from_error(err: &GnError) -> Self {
        match err {
            GnError::MonotonicityLoss { .. } => Self::MonotonicityLoss,
            GnError::SolverFailure { .. } | GnError::IllPosed(_) => Self::SolverFailure,
            _ => Self::StepRejected,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Completed => "completed",
            Self::MonotonicityLoss => "monotonicity_loss",
            Self::StepRejected => "step_rejected",
            Self::SolverFailure => "solver_failure",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<FlowMapState>,
    pub diagnostics: Vec<DiagnosticsRecord>,
    pub termination: Termination,
    pub error: Option<GnError>,
    /// Step actually used.
    pub dt: f64,
}

impl Trajectory {
    pub fn last(&self) -> &FlowMapState {
        self.states.last().expect("trajectory always holds the initial state")
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("trajectory always holds the initial time")
    }
}

/// One classical RK4 step of `y' = rhs(y)` on a flat state vector.
pub fn rk4_step<F>(y: &[f64], dt: f64, mut rhs: F) -> Result<Vec<f64>>
where
    F: FnMut(&[f64]) -> Result<Vec<f64>>,
{
    let stage = |k: &[f64], c: f64| -> Vec<f64> { y.iter().zip(k).map(|(a, b)| a + c * b).collect() };
    let k1 = rhs(y)?;
    let k2 = rhs(&stage(&k1, 0.5 * dt))?;
    let k3 = rhs(&stage(&k2, 0.5 * dt))?;
    let k4 = rhs(&stage(&k3, dt))?;
    let w = dt / 6.0;
    Ok((0..y.len())
        .map(|i| y[i] + w * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect())
}

fn flatten(state: &FlowMapState) -> Vec<f64> {
    let mut y = state.psi().values().to_vec();
    y.extend_from_slice(state.v().values());
    y
}

fn unflatten(grid: &PeriodicGrid, y: &[f64]) -> Result<FlowMapState> {
    if y.iter().any(|v| !v.is_finite()) {
        return Err(GnError::StepRejected("non-finite value in flow map state".into()));
    }
    let n = grid.len();
    FlowMapState::new(
        GridField::from_vec_unchecked(grid, y[..n].to_vec()),
        GridField::from_vec_unchecked(grid, y[n..].to_vec()),
    )
}

/// One RK4 step; the result is revalidated (finite, `min φ_x` above the guard).
pub fn step_rk4(state: &FlowMapState, dt: f64, h0: &HeightField) -> Result<FlowMapState> {
    let grid = state.psi().grid().clone();
    let n = grid.len();
    let next = rk4_step(&flatten(state), dt, |y| {
        let psi = GridField::from_vec_unchecked(&grid, y[..n].to_vec());
        let v = GridField::from_vec_unchecked(&grid, y[n..].to_vec());
        if !(psi.is_finite() && v.is_finite()) {
            return Err(GnError::StepRejected("non-finite stage value".into()));
        }
        let stage = FlowMapState::new(psi, v)?;
        let (dpsi, dv) = lagrangian_rhs(&stage, h0)?;
        let mut out = dpsi.into_values();
        out.extend_from_slice(dv.values());
        Ok(out)
    })?;
    unflatten(&grid, &next)
}

/// `cfl · dx / (max|v| + c_ref)` with the gravity-wave speed proxy
/// `c_ref = √(1 + max|h₀ - 1|)`. A safety heuristic, not a stability bound.
pub fn lagrangian_auto_dt(v: &GridField, h0: &HeightField, cfl_safety: f64) -> f64 {
    let c_ref = (1.0 + h0.values().iter().fold(0.0_f64, |m, h| m.max((h - 1.0).abs()))).sqrt();
    cfl_safety * v.grid().dx() / (v.max_abs() + c_ref)
}

/// Integrates the Lagrangian system to `config.final_time`.
///
/// Guard violations end the run early; the returned trajectory then carries
/// the typed reason and every state recorded before it.
pub fn integrate(state0: &FlowMapState, h0: &HeightField, config: &IntegratorConfig) -> Result<Trajectory> {
    config.validate()?;
    if h0.grid() != state0.psi().grid() {
        return Err(GnError::InvalidField("initial height and flow map live on different grids".into()));
    }
    let dt = config.dt.unwrap_or_else(|| lagrangian_auto_dt(state0.v(), h0, config.cfl_safety));
    let plan = StepPlan::new(config.final_time, dt);

    let first = record_lagrangian(0.0, state0, h0, config.sigma)?;
    let mut traj = Trajectory {
        times: vec![0.0],
        states: vec![state0.clone()],
        diagnostics: vec![first],
        termination: Termination::Completed,
        error: None,
        dt: plan.dt,
    };
    if plan.steps > config.max_steps {
        let err = GnError::StepRejected(format!("{} steps exceed max_steps = {}", plan.steps, config.max_steps));
        traj.termination = Termination::from_error(&err);
        traj.error = Some(err);
        return Ok(traj);
    }

    let mut state = state0.clone();
    for i in 1..=plan.steps {
        let next = step_rk4(&state, plan.dt, h0);
        let t = plan.time(i);
        let recorded = next.and_then(|s| {
            if i % config.stride == 0 || i == plan.steps {
                let record = record_lagrangian(t, &s, h0, config.sigma)?;
                Ok((s, Some(record)))
            } else {
                Ok((s, None))
            }
        });
        match recorded {
            Ok((s, record)) => {
                state = s;
                if let Some(record) = record {
                    traj.times.push(t);
                    traj.states.push(state.clone());
                    traj.diagnostics.push(record);
                }
            }
            Err(err) => {
                traj.termination = Termination::from_error(&err);
                traj.error = Some(err);
                break;
            }
        }
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_exponential() {
        let y = rk4_step(&[1.0], 0.1, |y| Ok(vec![y[0]])).unwrap();
        assert!((y[0] - 1.105_170_833_333_333).abs() < 1e-15);
        let err = (y[0] - 0.1_f64.exp()).abs();
        assert!((err - 8.47e-8).abs() < 1e-9, "{err}");
    }

    fn oscillator_error(dt: f64, steps: usize) -> f64 {
        let mut y = vec![1.0, 0.0];
        for _ in 0..steps {
            y = rk4_step(&y, dt, |s| Ok(vec![s[1], -s[0]])).unwrap();
        }
        (y[0] - 1.0_f64.cos()).abs()
    }

    #[test]
    fn harmonic_oscillator() {
        // global error at t = 1 is 6.6e-7 for dt = 0.1
        let coarse = oscillator_error(0.1, 10);
        assert!(coarse < 1e-6, "{coarse}");
        let fine = oscillator_error(0.05, 20);
        assert!(((coarse / fine).log2() - 4.0).abs() < 0.1);
    }

    #[test]
    fn step_plan_lands_on_final_time() {
        let plan = StepPlan::new(1.0, 0.3);
        assert_eq!(plan.steps, 4);
        assert_eq!(plan.time(4), 1.0);
        let plan = StepPlan::new(1.0, 0.25);
        assert_eq!(plan.steps, 4);
        assert_eq!(StepPlan::new(0.0, 0.1).steps, 0);
    }

    #[test]
    fn config_validation() {
        let ok = IntegratorConfig::default();
        assert!(ok.validate().is_ok());
        for bad in [
            IntegratorConfig { dt: Some(0.0), ..ok.clone() },
            IntegratorConfig { final_time: -1.0, ..ok.clone() },
            IntegratorConfig { cfl_safety: 1.5, ..ok.clone() },
            IntegratorConfig { cfl_safety: 0.0, ..ok.clone() },
            IntegratorConfig { stride: 0, ..ok.clone() },
        ] {
            assert!(bad.validate().is_err());
        }
    }

    #[test]
    fn equilibrium_step_is_bit_exact() {
        let g = PeriodicGrid::new(10.0, 32).unwrap();
        let h0 = HeightField::new(g.constant(1.0)).unwrap();
        let s = FlowMapState::initial(&g.zeros());
        let next = step_rk4(&s, 0.1, &h0).unwrap();
        assert_eq!(next, s);
    }
}
