//! Pseudo-spectral solver for the non-local Eulerian form
//!
//! ```text
//! u_t + u u_x = -A_h⁻¹(3h h_x + 2∂x(h³ u_x²)),
//! h_t + ∂x(hu) = 0,
//! ```
//!
//! used as an independent check on the Lagrangian solver. Derivatives are
//! spectral by default with 2/3-rule filtering of products; the inversion of
//! `A_h` reuses the finite-difference solve from [`crate::elliptic`].

use crate::elliptic::{solve_ah, HeightField};
use crate::error::{GnError, Result};
use crate::grid::{derivative, two_thirds_filter, DerivativeScheme, GridField, PeriodicGrid};
use crate::integrate::{rk4_step, IntegratorConfig, StepPlan, Termination};

#[derive(Debug, Clone, PartialEq)]
pub struct EulerianState {
    h: HeightField,
    u: GridField,
}

impl EulerianState {
    pub fn new(h: HeightField, u: GridField) -> Result<Self> {
        if h.grid() != u.grid() {
            return Err(GnError::InvalidField("height and velocity live on different grids".into()));
        }
        if !u.is_finite() {
            return Err(GnError::StepRejected("non-finite velocity".into()));
        }
        Ok(Self { h, u })
    }

    pub fn h(&self) -> &HeightField {
        &self.h
    }

    pub fn u(&self) -> &GridField {
        &self.u
    }

    pub fn grid(&self) -> &PeriodicGrid {
        self.h.grid()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EulerianOptions {
    pub scheme: DerivativeScheme,
    /// 2/3-rule filtering of quadratic and higher products (spectral scheme only).
    pub dealias: bool,
}

impl Default for EulerianOptions {
    fn default() -> Self {
        Self { scheme: DerivativeScheme::Spectral, dealias: true }
    }
}

struct Ops {
    options: EulerianOptions,
}

impl Ops {
    fn d(&self, f: &GridField) -> GridField {
        derivative(f, self.options.scheme)
    }

    fn product(&self, f: GridField) -> GridField {
        if self.options.dealias && self.options.scheme == DerivativeScheme::Spectral {
            two_thirds_filter(&f)
        } else {
            f
        }
    }
}

/// `A_h⁻¹(3h h_x + 2∂x(h³ u_x²))`, so that `u_t + u u_x` is its negative.
pub fn nonlocal_term(state: &EulerianState, options: EulerianOptions) -> Result<GridField> {
    let ops = Ops { options };
    let h = state.h.field();
    let u = &state.u;
    let hx = ops.d(h);
    let ux = ops.d(u);
    let pressure = ops.product(h.mul(&hx).scale(3.0));
    let flux = ops.product(h.zip_map(&ux, |hv, d| hv * hv * hv * d * d));
    let forcing = pressure.add(&ops.d(&flux).scale(2.0));
    solve_ah(&state.h, &forcing)
}

/// Material acceleration `u_t + u u_x`.
pub fn material_acceleration(state: &EulerianState, options: EulerianOptions) -> Result<GridField> {
    Ok(nonlocal_term(state, options)?.scale(-1.0))
}

/// `(h_t, u_t)`.
pub fn eulerian_rhs(state: &EulerianState, options: EulerianOptions) -> Result<(GridField, GridField)> {
    let ops = Ops { options };
    let h = state.h.field();
    let u = &state.u;
    let dh = ops.d(&ops.product(h.mul(u))).scale(-1.0);
    let advection = ops.product(u.mul(&ops.d(u)));
    let du = advection.add(&nonlocal_term(state, options)?).scale(-1.0);
    Ok((dh, du))
}

#[derive(Debug, Clone)]
pub struct EulerianTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<EulerianState>,
    pub termination: Termination,
    pub error: Option<GnError>,
    pub dt: f64,
}

impl EulerianTrajectory {
    pub fn last(&self) -> &EulerianState {
        self.states.last().expect("trajectory always holds the initial state")
    }
}

fn flatten(state: &EulerianState) -> Vec<f64> {
    let mut y = state.h.values().to_vec();
    y.extend_from_slice(state.u.values());
    y
}

fn unflatten(grid: &PeriodicGrid, y: &[f64]) -> Result<EulerianState> {
    let n = grid.len();
    if y.iter().any(|v| !v.is_finite()) {
        return Err(GnError::StepRejected("non-finite value in Eulerian state".into()));
    }
    let h = HeightField::new(GridField::from_vec_unchecked(grid, y[..n].to_vec()))?;
    EulerianState::new(h, GridField::from_vec_unchecked(grid, y[n..].to_vec()))
}

pub fn step_eulerian(state: &EulerianState, dt: f64, options: EulerianOptions) -> Result<EulerianState> {
    let grid = state.grid().clone();
    let n = grid.len();
    let y = flatten(state);
    let next = rk4_step(&y, dt, |y| {
        let s = unflatten(&grid, y)?;
        let (dh, du) = eulerian_rhs(&s, options)?;
        let mut out = Vec::with_capacity(2 * n);
        out.extend_from_slice(dh.values());
        out.extend_from_slice(du.values());
        Ok(out)
    })?;
    unflatten(&grid, &next)
}

/// Step size heuristic `cfl · dx / (max|u| + √(1 + max|h - 1|))`.
pub fn auto_dt(h: &HeightField, u: &GridField, cfl_safety: f64) -> f64 {
    let c_ref = (1.0 + h.values().iter().fold(0.0_f64, |m, v| m.max((v - 1.0).abs()))).sqrt();
    cfl_safety * h.grid().dx() / (u.max_abs() + c_ref)
}

/// Fixed-step RK4 integration; states are kept every `config.stride` steps and at the end.
pub fn integrate_eulerian(
    state0: &EulerianState,
    config: &IntegratorConfig,
    options: EulerianOptions,
) -> Result<EulerianTrajectory> {
    config.validate()?;
    let dt = config.dt.unwrap_or_else(|| auto_dt(&state0.h, &state0.u, config.cfl_safety));
    let plan = StepPlan::new(config.final_time, dt);
    let mut traj = EulerianTrajectory {
        times: vec![0.0],
        states: vec![state0.clone()],
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
        match step_eulerian(&state, plan.dt, options) {
            Ok(next) => state = next,
            Err(err) => {
                traj.termination = Termination::from_error(&err);
                traj.error = Some(err);
                break;
            }
        }
        if i % config.stride == 0 || i == plan.steps {
            traj.times.push(plan.time(i));
            traj.states.push(state.clone());
        }
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid(n: usize) -> PeriodicGrid {
        PeriodicGrid::new(2.0 * PI, n).unwrap()
    }

    #[test]
    fn equilibrium_is_steady() {
        let g = grid(32);
        let s = EulerianState::new(HeightField::new(g.constant(1.0)).unwrap(), g.zeros()).unwrap();
        let (dh, du) = eulerian_rhs(&s, EulerianOptions::default()).unwrap();
        assert!(dh.max_abs() < 1e-15 && du.max_abs() < 1e-15);
    }

    #[test]
    fn flat_height_sine_velocity() {
        let g = grid(256);
        let s = EulerianState::new(HeightField::new(g.constant(1.0)).unwrap(), g.sample(f64::sin)).unwrap();
        let (dh, du) = eulerian_rhs(&s, EulerianOptions::default()).unwrap();
        assert!(dh.sub(&g.sample(|x| -x.cos())).max_abs() < 1e-12);
        let expected = g.sample(|x| -3.0 / 14.0 * (2.0 * x).sin());
        assert!(du.sub(&expected).max_abs() < 1e-4);
    }

    #[test]
    fn linearised_height_perturbation() {
        let g = grid(256);
        let eps = 1e-4;
        let s = EulerianState::new(HeightField::new(g.sample(|x| 1.0 + eps * x.cos())).unwrap(), g.zeros())
            .unwrap();
        let (dh, du) = eulerian_rhs(&s, EulerianOptions::default()).unwrap();
        assert_eq!(dh.max_abs(), 0.0);
        assert!(du.sub(&g.sample(|x| 0.75 * eps * x.sin())).max_abs() < 5e-8);
    }

    #[test]
    fn zero_steps_and_steady_runs() {
        let g = grid(32);
        let s = EulerianState::new(HeightField::new(g.constant(1.0)).unwrap(), g.zeros()).unwrap();
        let cfg = IntegratorConfig { final_time: 0.0, ..IntegratorConfig::default() };
        let traj = integrate_eulerian(&s, &cfg, EulerianOptions::default()).unwrap();
        assert_eq!(traj.states.len(), 1);
        let cfg = IntegratorConfig { final_time: 2.0, dt: Some(0.1), ..IntegratorConfig::default() };
        let traj = integrate_eulerian(&s, &cfg, EulerianOptions::default()).unwrap();
        assert_eq!(traj.termination, Termination::Completed);
        assert!(traj.states.iter().all(|st| st == &s));
    }
}
