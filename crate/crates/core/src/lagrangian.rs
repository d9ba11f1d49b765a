//! Right-hand side of the Lagrangian flow-map equation `φ_tt = F(φ, φ_t, h₀)`.
//!
//! Everything is evaluated on the label grid. Conjugating `∂x` by composition
//! with φ gives `R_φ ∂x R_φ⁻¹ = φ_x⁻¹ ∂x`, so no interpolation is needed. With
//! `D f = (∂x f)/φ_x` and the Lagrangian height `η = h₀/φ_x`,
//!
//! ```text
//! t1 = 3 η D(η)
//! t2 = 2 D(η³ (D v)²)
//! 3h₀ w - ∂x((h₀³/φ_x⁴) ∂x w) = φ_x (t1 + t2)
//! F  = -w
//! ```
//!
//! The last line is the conjugated operator `3η - D(η³ D ·)` multiplied through
//! by `φ_x`, which turns it into a symmetric positive definite problem of the
//! same shape as `A_h`.

use crate::elliptic::{solve_elliptic, EllipticProblem, HeightField};
use crate::error::{GnError, Result};
use crate::grid::{centered_difference, GridField};

/// Smallest admissible `φ_x`; below it φ is treated as no longer a diffeomorphism.
pub const MONOTONICITY_GUARD: f64 = 1e-8;

/// Lagrangian state: displacement `ψ = φ - id` and velocity `v = φ_t`.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowMapState {
    psi: GridField,
    v: GridField,
}

impl FlowMapState {
    pub fn new(psi: GridField, v: GridField) -> Result<Self> {
        if psi.len() != v.len() || psi.grid() != v.grid() {
            return Err(GnError::InvalidField("displacement and velocity live on different grids".into()));
        }
        if !(psi.is_finite() && v.is_finite()) {
            return Err(GnError::StepRejected("non-finite flow map state".into()));
        }
        let state = Self { psi, v };
        let min_phix = state.min_phix();
        if min_phix <= MONOTONICITY_GUARD {
            return Err(GnError::MonotonicityLoss { min_phix });
        }
        Ok(state)
    }

    /// `φ = id`, `φ_t = u₀`.
    pub fn initial(u0: &GridField) -> Self {
        Self { psi: u0.grid().zeros(), v: u0.clone() }
    }

    pub fn psi(&self) -> &GridField {
        &self.psi
    }

    pub fn v(&self) -> &GridField {
        &self.v
    }

    pub fn phix(&self) -> GridField {
        let grid = self.psi.grid();
        let d = centered_difference(self.psi.values(), grid.dx());
        GridField::from_vec_unchecked(grid, d.into_iter().map(|p| 1.0 + p).collect())
    }

    pub fn min_phix(&self) -> f64 {
        self.phix().min()
    }
}

/// Quantities shared by every term of `F` for a given state.
#[derive(Debug, Clone)]
pub struct LagrangianCache {
    pub phix: GridField,
    /// Lagrangian height `h₀/φ_x`, the height carried by each label.
    pub eta: GridField,
}

impl LagrangianCache {
    pub fn new(state: &FlowMapState, h0: &HeightField) -> Result<Self> {
        let phix = state.phix();
        check_monotone(&phix)?;
        let eta = h0.field().zip_map(&phix, |h, p| h / p);
        Ok(Self { phix, eta })
    }
}

fn check_monotone(phix: &GridField) -> Result<()> {
    let min_phix = phix.min();
    if !(min_phix > MONOTONICITY_GUARD) {
        return Err(GnError::MonotonicityLoss { min_phix });
    }
    Ok(())
}

/// `R_φ ∂x R_φ⁻¹ f = (∂x f)/φ_x`, centred differences.
pub fn conjugated_derivative(phix: &GridField, f: &GridField) -> Result<GridField> {
    check_monotone(phix)?;
    Ok(conjugated_derivative_unchecked(phix, f))
}

fn conjugated_derivative_unchecked(phix: &GridField, f: &GridField) -> GridField {
    let grid = f.grid();
    let d = centered_difference(f.values(), grid.dx());
    GridField::from_vec_unchecked(grid, d.iter().zip(phix.values()).map(|(a, p)| a / p).collect())
}

/// The symmetric form `3h₀ w - ∂x((h₀³/φ_x⁴) ∂x w)` of the conjugated `A_h`.
pub fn conjugated_problem(cache: &LagrangianCache, h0: &HeightField) -> Result<EllipticProblem> {
    let a = h0.field().scale(3.0);
    let b = h0.field().zip_map(&cache.phix, |h, p| (h * h * h) / (p * p * p * p));
    EllipticProblem::new(a, b)
}

/// The source `t1 + t2` before multiplication by `φ_x`.
pub fn pulled_back_forcing(cache: &LagrangianCache, v: &GridField) -> GridField {
    let phix = &cache.phix;
    let eta = &cache.eta;
    let t1 = eta.mul(&conjugated_derivative_unchecked(phix, eta)).scale(3.0);
    let dv = conjugated_derivative_unchecked(phix, v);
    let flux = eta.zip_map(&dv, |e, d| e * e * e * d * d);
    let t2 = conjugated_derivative_unchecked(phix, &flux).scale(2.0);
    t1.add(&t2)
}

/// `F(φ, v, h₀)`.
pub fn evaluate_f(state: &FlowMapState, h0: &HeightField) -> Result<GridField> {
    if h0.grid() != state.psi.grid() {
        return Err(GnError::InvalidField("initial height and flow map live on different grids".into()));
    }
    let cache = LagrangianCache::new(state, h0)?;
    let forcing = pulled_back_forcing(&cache, &state.v).mul(&cache.phix);
    let problem = conjugated_problem(&cache, h0)?;
    Ok(solve_elliptic(&problem, &forcing)?.scale(-1.0))
}

/// First-order form `(ψ, v)' = (v, F)`.
pub fn lagrangian_rhs(state: &FlowMapState, h0: &HeightField) -> Result<(GridField, GridField)> {
    let dv = evaluate_f(state, h0)?;
    Ok((state.v.clone(), dv))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{derivative, DerivativeScheme, PeriodicGrid};
    use std::f64::consts::PI;

    fn grid(n: usize) -> PeriodicGrid {
        PeriodicGrid::new(2.0 * PI, n).unwrap()
    }

    fn laplace_symbol(k: f64, dx: f64) -> f64 {
        4.0 * (0.5 * k * dx).sin().powi(2) / (dx * dx)
    }

    #[test]
    fn identity_map_gives_plain_derivative() {
        let g = grid(64);
        let f = g.sample(|x| (2.0 * x).cos() + x.sin());
        let d = conjugated_derivative(&g.constant(1.0), &f).unwrap();
        assert_eq!(d, derivative(&f, DerivativeScheme::Centered2));
    }

    #[test]
    fn constant_stretch_rescales() {
        let g = grid(64);
        let f = g.sample(f64::sin);
        let d = conjugated_derivative(&g.constant(2.0), &f).unwrap();
        let expected = derivative(&f, DerivativeScheme::Centered2).scale(0.5);
        assert!(d.sub(&expected).max_abs() < 1e-15);
        assert!(d.sub(&g.sample(|x| 0.5 * x.cos())).max_abs() < 1e-3);
    }

    #[test]
    fn guard_trips_on_folded_map() {
        let g = grid(32);
        let err = conjugated_derivative(&g.sample(|x| x.cos()), &g.zeros()).unwrap_err();
        assert!(matches!(err, GnError::MonotonicityLoss { .. }));
        let psi = g.sample(|x| 1.5 * x.sin());
        assert!(matches!(FlowMapState::new(psi, g.zeros()), Err(GnError::MonotonicityLoss { .. })));
    }

    #[test]
    fn equilibrium_has_zero_force() {
        let g = grid(32);
        let h0 = HeightField::new(g.constant(1.0)).unwrap();
        let state = FlowMapState::initial(&g.zeros());
        assert_eq!(evaluate_f(&state, &h0).unwrap().max_abs(), 0.0);
        let (dpsi, dv) = lagrangian_rhs(&state, &h0).unwrap();
        assert_eq!(dpsi.max_abs(), 0.0);
        assert_eq!(dv.max_abs(), 0.0);
    }

    #[test]
    fn flat_height_sine_velocity() {
        let g = grid(128);
        let dx = g.dx();
        let h0 = HeightField::new(g.constant(1.0)).unwrap();
        let v = g.sample(f64::sin);
        let state = FlowMapState::initial(&v);
        let f = evaluate_f(&state, &h0).unwrap();
        // continuum: t2 = -2 sin 2x, F = (2/7) sin 2x
        assert!(f.sub(&g.sample(|x| 2.0 / 7.0 * (2.0 * x).sin())).max_abs() < 2e-3);

        // discrete: D v = cos(x) sin(dx)/dx, t2 = 2 D[(D v)²] = -2 (sin dx/dx)² sin(2dx)/(2dx) sin 2x
        let s = dx.sin() / dx;
        let amp = 2.0 * s * s * (2.0 * dx).sin() / (2.0 * dx);
        let expected = g.sample(|x| (2.0 * x).sin()).scale(amp / (3.0 + laplace_symbol(2.0, dx)));
        assert!(f.sub(&expected).max_abs() < 1e-12);

        let (dpsi, _) = lagrangian_rhs(&state, &h0).unwrap();
        assert_eq!(dpsi.values(), v.values());
    }

    #[test]
    fn linearised_height_perturbation() {
        let g = grid(256);
        let eps = 1e-4;
        let h0 = HeightField::new(g.sample(|x| 1.0 + eps * x.cos())).unwrap();
        let state = FlowMapState::initial(&g.zeros());
        let f = evaluate_f(&state, &h0).unwrap();
        let expected = g.sample(|x| 0.75 * eps * x.sin());
        // O(eps²) + O(dx²) eps
        assert!(f.sub(&expected).max_abs() < 5e-8, "{}", f.sub(&expected).max_abs());
    }

    #[test]
    fn quadratic_scaling_in_velocity() {
        let g = grid(64);
        let h0 = HeightField::new(g.constant(1.0)).unwrap();
        let v = g.sample(|x| x.sin() + 0.3 * (2.0 * x).cos());
        let base = evaluate_f(&FlowMapState::initial(&v), &h0).unwrap();
        let lambda = 1.7;
        let scaled = evaluate_f(&FlowMapState::initial(&v.scale(lambda)), &h0).unwrap();
        let diff = scaled.sub(&base.scale(lambda * lambda)).max_abs();
        assert!(diff <= 1e-10 * scaled.max_abs());
    }

    #[test]
    fn eta_times_phix_is_h0() {
        let g = grid(64);
        let h0 = HeightField::new(g.sample(|x| 1.0 + 0.2 * x.sin())).unwrap();
        let psi = g.sample(|x| 0.3 * (x + 0.4).sin());
        let state = FlowMapState::new(psi, g.zeros()).unwrap();
        let cache = LagrangianCache::new(&state, &h0).unwrap();
        let back = cache.eta.mul(&cache.phix);
        assert!(back.sub(h0.field()).max_abs() < 1e-15);
    }
}
