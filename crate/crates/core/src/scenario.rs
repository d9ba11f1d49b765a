//! Initial data for the configured scenarios.

use crate::config::{ScenarioKind, ScenarioSection};
use crate::diagnostics::{gaussian_hump, SolitaryWave};
use crate::elliptic::HeightField;
use crate::error::Result;
use crate::eulerian::EulerianState;
use crate::grid::{synthesize_rough_field, GridField, PeriodicGrid};

/// Initial `(h₀, u₀)` for a scenario.
pub fn initial_state(section: &ScenarioSection, grid: &PeriodicGrid) -> Result<EulerianState> {
    let state = match section.kind {
        ScenarioKind::Equilibrium => EulerianState::new(HeightField::new(grid.constant(1.0))?, grid.zeros())?,
        ScenarioKind::SolitaryWave => SolitaryWave::new(section.a, grid.length() / 2.0)?.state(grid, 0.0)?,
        ScenarioKind::GaussianHump => gaussian_hump(section.epsilon, section.width, grid)?,
        ScenarioKind::RoughData => rough_data(section.sigma, section.amplitude, section.seed, grid)?,
    };
    if section.negate_velocity {
        let u = state.u().scale(-1.0);
        return EulerianState::new(state.h().clone(), u);
    }
    Ok(state)
}

/// `h₀ - 1 ∈ H^σ` and `u₀ ∈ H^{σ+1}`, both of the given norm, from seeds
/// `seed` and `seed + 1`.
pub fn rough_data(sigma: f64, amplitude: f64, seed: u64, grid: &PeriodicGrid) -> Result<EulerianState> {
    let dh = synthesize_rough_field(sigma, amplitude, seed, grid)?;
    let u: GridField = synthesize_rough_field(sigma + 1.0, amplitude, seed.wrapping_add(1), grid)?;
    EulerianState::new(HeightField::new(dh.map(|v| 1.0 + v))?, u)
}

/// Exact solution at time `t`, when the scenario has one.
pub fn exact_solution(section: &ScenarioSection, grid: &PeriodicGrid, t: f64) -> Result<Option<EulerianState>> {
    match section.kind {
        ScenarioKind::Equilibrium => Ok(Some(initial_state(section, grid)?)),
        ScenarioKind::SolitaryWave if !section.negate_velocity => {
            Ok(Some(SolitaryWave::new(section.a, grid.length() / 2.0)?.state(grid, t)?))
        }
        _ => Ok(None),
    }
}
