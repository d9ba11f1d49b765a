//! Composition with φ and φ⁻¹ and reconstruction of Eulerian fields.
//!
//! φ is a degree-one circle map, `φ(x + L) = φ(x) + L`, interpolated from its
//! node values `x_j + ψ_j` by the lifted monotone Hermite interpolant. Eulerian
//! fields are recovered as `h = (h₀/φ_x) ∘ φ⁻¹` and `u = v ∘ φ⁻¹`.

use crate::elliptic::HeightField;
use crate::error::{GnError, Result};
use crate::eulerian::EulerianState;
use crate::grid::GridField;
use crate::interp::PeriodicHermite;
use crate::lagrangian::{FlowMapState, MONOTONICITY_GUARD};

/// Inversion accuracy relative to the box length.
pub const INVERSION_TOLERANCE: f64 = 1e-13;

/// The interpolated flow map `x ↦ x + ψ(x)`.
#[derive(Debug, Clone)]
pub struct FlowMap {
    map: PeriodicHermite,
    length: f64,
}

impl FlowMap {
    /// Fails with [`GnError::MonotonicityLoss`] when the centred `φ_x` is at
    /// the guard or when the node positions `x_j + ψ_j` are not strictly
    /// increasing; the reported value is the smaller of `min φ_x` and the
    /// smallest forward secant slope.
    pub fn new(psi: &GridField) -> Result<Self> {
        let grid = psi.grid();
        FlowMapState::new(psi.clone(), grid.zeros())?;
        let nodes: Vec<f64> = psi.values().iter().enumerate().map(|(j, p)| grid.node(j) + p).collect();
        let map = PeriodicHermite::lifted(&nodes, grid.dx(), grid.length());
        let min_secant = (0..nodes.len() as isize)
            .map(|k| (map.lifted_value(k + 1) - map.lifted_value(k)) / grid.dx())
            .fold(f64::INFINITY, f64::min);
        if !(min_secant > 0.0) {
            return Err(GnError::MonotonicityLoss { min_phix: min_secant });
        }
        Ok(Self { map, length: grid.length() })
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.map.eval(x)
    }

    pub fn inverse(&self, y: f64) -> Result<f64> {
        self.map
            .invert_increasing(y, INVERSION_TOLERANCE * self.length)
            .ok_or(GnError::MonotonicityLoss { min_phix: 0.0 })
    }
}

/// For each `y` returns `x` with `x + ψ(x) = y`.
pub fn invert_diffeo(psi: &GridField, queries: &[f64]) -> Result<Vec<f64>> {
    let map = FlowMap::new(psi)?;
    queries.iter().map(|&y| map.inverse(y)).collect()
}

/// `f` evaluated at arbitrary points by periodic Hermite interpolation.
pub fn compose(f: &GridField, points: &[f64]) -> Vec<f64> {
    let interp = PeriodicHermite::periodic(f.values(), f.grid().dx());
    points.iter().map(|&x| interp.eval(x)).collect()
}

/// Eulerian `(h, u)` on the grid nodes from the Lagrangian state.
pub fn reconstruct_eulerian(state: &FlowMapState, h0: &HeightField) -> Result<EulerianState> {
    let grid = state.psi().grid();
    let phix = state.phix();
    let min_phix = phix.min();
    if min_phix <= MONOTONICITY_GUARD {
        return Err(GnError::MonotonicityLoss { min_phix });
    }
    let labels = invert_diffeo(state.psi(), &grid.nodes())?;
    let eta = h0.field().zip_map(&phix, |h, p| h / p);
    let h = GridField::new(grid, compose(&eta, &labels))?;
    let u = GridField::new(grid, compose(state.v(), &labels))?;
    EulerianState::new(HeightField::new(h)?, u)
}
