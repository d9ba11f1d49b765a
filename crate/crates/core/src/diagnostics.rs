//! Conserved quantities, the exact solitary wave, error metrics and
//! convergence-rate estimation.

use serde::{Deserialize, Serialize};

use crate::elliptic::HeightField;
use crate::error::{GnError, Result};
use crate::eulerian::EulerianState;
use crate::flow_map::reconstruct_eulerian;
use crate::grid::{derivative, quadrature, sobolev_norm, synthesize_rough_field, DerivativeScheme, GridField, PeriodicGrid};
use crate::integrate::{integrate, lagrangian_auto_dt, IntegratorConfig, Termination};
use crate::lagrangian::FlowMapState;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub mass: f64,
    pub momentum: f64,
    pub energy: f64,
    pub min_phix: f64,
    pub sobolev_h: f64,
    pub sobolev_u: f64,
    pub sigma: f64,
}

impl DiagnosticsRecord {
    /// Record for an Eulerian state; `min_phix` is 1 (no flow map).
    pub fn eulerian(t: f64, state: &EulerianState, sigma: f64) -> Self {
        let h_minus_one = state.h().field().map(|h| h - 1.0);
        Self {
            t,
            mass: mass(state.h()),
            momentum: momentum(state),
            energy: energy(state),
            min_phix: 1.0,
            sobolev_h: sobolev_norm(&h_minus_one, sigma),
            sobolev_u: sobolev_norm(state.u(), sigma + 1.0),
            sigma,
        }
    }

    pub fn is_finite(&self) -> bool {
        [self.t, self.mass, self.momentum, self.energy, self.min_phix, self.sobolev_h, self.sobolev_u]
            .iter()
            .all(|v| v.is_finite())
    }
}

/// Diagnostics of the reconstructed Eulerian fields of a Lagrangian state.
pub fn record_lagrangian(t: f64, state: &FlowMapState, h0: &HeightField, sigma: f64) -> Result<DiagnosticsRecord> {
    let eulerian = reconstruct_eulerian(state, h0)?;
    let mut record = DiagnosticsRecord::eulerian(t, &eulerian, sigma);
    record.min_phix = state.min_phix();
    Ok(record)
}

/// `∫(h - 1)`.
pub fn mass(h: &HeightField) -> f64 {
    quadrature(&h.field().map(|v| v - 1.0))
}

/// `∫(h₀ - φ_x)` over labels. Equal to the mass, and time-invariant up to
/// round-off because `∫ψ_x` vanishes identically on the periodic grid.
pub fn label_mass(state: &FlowMapState, h0: &HeightField) -> f64 {
    quadrature(&h0.field().sub(&state.phix()))
}

/// `∫ h u`.
pub fn momentum(state: &EulerianState) -> f64 {
    quadrature(&state.h().field().mul(state.u()))
}

/// `∫ ½hu² + ½(h - 1)² + ⅙h³u_x²`, with a spectral `u_x`.
pub fn energy(state: &EulerianState) -> f64 {
    let ux = derivative(state.u(), DerivativeScheme::Spectral);
    let density: Vec<f64> = state
        .h()
        .values()
        .iter()
        .zip(state.u().values())
        .zip(ux.values())
        .map(|((&h, &u), &d)| 0.5 * h * u * u + 0.5 * (h - 1.0) * (h - 1.0) + h * h * h * d * d / 6.0)
        .collect();
    quadrature(&GridField::from_vec_unchecked(state.grid(), density))
}

/// The same energy written over labels: `h dx = h₀ dX`, `u_x = D v`.
pub fn label_energy(state: &FlowMapState, h0: &HeightField) -> f64 {
    let phix = state.phix();
    let grid = phix.grid();
    let vx = derivative(state.v(), DerivativeScheme::Centered2);
    let density: Vec<f64> = (0..grid.len())
        .map(|j| {
            let p = phix.values()[j];
            let h0j = h0.values()[j];
            let eta = h0j / p;
            let v = state.v().values()[j];
            let d = vx.values()[j] / p;
            0.5 * h0j * v * v + 0.5 * (eta - 1.0) * (eta - 1.0) * p + eta.powi(3) * d * d * p / 6.0
        })
        .collect();
    quadrature(&GridField::from_vec_unchecked(grid, density))
}

/// Exact traveling wave `h = 1 + a sech²(κ(x - x₀ - ct))`, `u = c(1 - 1/h)`,
/// with `c = √(1 + a)` and `κ = √(3a / (4(1 + a)))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolitaryWave {
    pub amplitude: f64,
    pub speed: f64,
    pub kappa: f64,
    pub center: f64,
}

impl SolitaryWave {
    pub fn new(amplitude: f64, center: f64) -> Result<Self> {
        if !(amplitude > 0.0 && amplitude < 2.0) {
            return Err(GnError::InvalidArgument(format!(
                "solitary wave amplitude must lie in (0, 2), got {amplitude}"
            )));
        }
        Ok(Self {
            amplitude,
            speed: (1.0 + amplitude).sqrt(),
            kappa: (3.0 * amplitude / (4.0 * (1.0 + amplitude))).sqrt(),
            center,
        })
    }

    /// Offset from the crest at time `t`, wrapped to `[-L/2, L/2)`.
    fn offset(&self, x: f64, t: f64, length: f64) -> f64 {
        let s = x - self.center - self.speed * t;
        s - length * (s / length + 0.5).floor()
    }

    pub fn height(&self, x: f64, t: f64, length: f64) -> f64 {
        let sech = 1.0 / (self.kappa * self.offset(x, t, length)).cosh();
        1.0 + self.amplitude * sech * sech
    }

    pub fn velocity(&self, x: f64, t: f64, length: f64) -> f64 {
        self.speed * (1.0 - 1.0 / self.height(x, t, length))
    }

    pub fn state(&self, grid: &PeriodicGrid, t: f64) -> Result<EulerianState> {
        let length = grid.length();
        let h = HeightField::new(grid.sample(|x| self.height(x, t, length)))?;
        EulerianState::new(h, grid.sample(|x| self.velocity(x, t, length)))
    }

    /// `∫ (h - 1) = 2a/κ` on ℝ.
    pub fn exact_mass(&self) -> f64 {
        2.0 * self.amplitude / self.kappa
    }
}

/// Solitary wave of amplitude `a` centred in the box.
pub fn solitary_wave(amplitude: f64, grid: &PeriodicGrid) -> Result<EulerianState> {
    SolitaryWave::new(amplitude, grid.length() / 2.0)?.state(grid, 0.0)
}

/// `max |f - g|`.
pub fn sup_distance(f: &GridField, g: &GridField) -> f64 {
    f.sub(g).max_abs()
}

/// `(∫|f - g|²)^{1/2}`.
pub fn l2_distance(f: &GridField, g: &GridField) -> f64 {
    let d = f.sub(g);
    quadrature(&d.mul(&d)).sqrt()
}

/// `max|h - h_exact| / max|h_exact|`.
pub fn relative_sup_error(h: &GridField, exact: &GridField) -> f64 {
    sup_distance(h, exact) / exact.max_abs()
}

/// Observed order: negative least-squares slope of `log(error)` against
/// `log(resolution)`.
pub fn convergence_rate(errors: &[f64], resolutions: &[f64]) -> Result<f64> {
    if errors.len() != resolutions.len() {
        return Err(GnError::InvalidArgument("errors and resolutions differ in length".into()));
    }
    if errors.len() < 2 {
        return Err(GnError::InvalidArgument("convergence rate needs at least two resolutions".into()));
    }
    if errors.iter().chain(resolutions).any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(GnError::InvalidArgument("errors and resolutions must be positive".into()));
    }
    let xs: Vec<f64> = resolutions.iter().map(|r| r.ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let m = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / m, ys.iter().sum::<f64>() / m);
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(GnError::InvalidArgument("resolutions must not all coincide".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    Ok(-sxy / sxx)
}

/// `U^σ × H^{σ+1}` distance between two Eulerian states.
pub fn state_distance(a: &EulerianState, b: &EulerianState, sigma: f64) -> f64 {
    let dh = a.h().field().sub(b.h().field());
    let du = a.u().sub(b.u());
    (sobolev_norm(&dh, sigma).powi(2) + sobolev_norm(&du, sigma + 1.0).powi(2)).sqrt()
}

/// Unit-norm rough velocity direction in `H^{σ+1}` used by the dependence probe.
pub fn probe_direction(sigma: f64, seed: u64, grid: &PeriodicGrid) -> Result<GridField> {
    synthesize_rough_field(sigma + 1.0, 1.0, seed, grid)
}

/// Integrates from `(h₀, u₀)` and `(h₀, u₀ + δw)` on a common step and returns
/// `sup_t ‖(h, u) - (h̃, ũ)‖_{U^σ × H^{σ+1}} / δ` over the recorded times.
pub fn continuous_dependence_probe(
    h0: &HeightField,
    u0: &GridField,
    delta: f64,
    sigma: f64,
    config: &IntegratorConfig,
    direction_seed: u64,
) -> Result<f64> {
    let quotients = dependence_quotients(h0, u0, delta, sigma, config, direction_seed)?;
    Ok(quotients.iter().map(|q| q.1).fold(0.0, f64::max))
}

/// The difference quotients behind [`continuous_dependence_probe`] at each
/// recorded time, as `(t, quotient)` pairs. Empty for `δ = 0`.
pub fn dependence_quotients(
    h0: &HeightField,
    u0: &GridField,
    delta: f64,
    sigma: f64,
    config: &IntegratorConfig,
    direction_seed: u64,
) -> Result<Vec<(f64, f64)>> {
    if !delta.is_finite() {
        return Err(GnError::InvalidArgument("delta must be finite".into()));
    }
    if delta == 0.0 {
        return Ok(Vec::new());
    }
    let w = probe_direction(sigma, direction_seed, u0.grid())?;
    let perturbed = u0.axpy(delta, &w);
    let dt = config
        .dt
        .unwrap_or_else(|| lagrangian_auto_dt(u0, h0, config.cfl_safety).min(lagrangian_auto_dt(&perturbed, h0, config.cfl_safety)));
    let config = IntegratorConfig { dt: Some(dt), ..config.clone() };

    let base = integrate(&FlowMapState::initial(u0), h0, &config)?;
    let other = integrate(&FlowMapState::initial(&perturbed), h0, &config)?;
    for traj in [&base, &other] {
        if traj.termination != Termination::Completed {
            return Err(traj.error.clone().unwrap_or(GnError::StepRejected("probe run ended early".into())));
        }
    }
    base.times
        .iter()
        .zip(base.states.iter().zip(&other.states))
        .map(|(&t, (s, p))| {
            let a = reconstruct_eulerian(s, h0)?;
            let b = reconstruct_eulerian(p, h0)?;
            Ok((t, state_distance(&a, &b, sigma) / delta.abs()))
        })
        .collect()
}

/// Localized Gaussian hump `h = 1 + ε exp(-(x - L/2)²/w²)` at rest.
pub fn gaussian_hump(epsilon: f64, width: f64, grid: &PeriodicGrid) -> Result<EulerianState> {
    if !(width > 0.0) {
        return Err(GnError::InvalidArgument(format!("hump width must be positive, got {width}")));
    }
    let c = grid.length() / 2.0;
    let h = HeightField::new(grid.sample(|x| 1.0 + epsilon * (-((x - c) / width).powi(2)).exp()))?;
    EulerianState::new(h, grid.zeros())
}
