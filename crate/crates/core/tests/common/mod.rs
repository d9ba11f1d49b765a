//! Shared generators for the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use gnflow::{FlowMapState, GridField, HeightField, PeriodicGrid};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random trigonometric polynomial with `modes` modes, coefficients decaying
/// like `1/k²`, and zero mean. Returns the coefficients `(k, a_k, b_k)`.
pub fn random_modes(rng: &mut ChaCha8Rng, modes: usize) -> Vec<(f64, f64, f64)> {
    (1..=modes)
        .map(|k| {
            let w = 1.0 / (k * k) as f64;
            (k as f64, w * rng.gen_range(-1.0..1.0), w * rng.gen_range(-1.0..1.0))
        })
        .collect()
}

pub fn eval_modes(modes: &[(f64, f64, f64)], length: f64, x: f64) -> f64 {
    let s = 2.0 * PI * x / length;
    modes.iter().map(|&(k, a, b)| a * (k * s).cos() + b * (k * s).sin()).sum()
}

pub fn eval_modes_derivative(modes: &[(f64, f64, f64)], length: f64, x: f64) -> f64 {
    let w = 2.0 * PI / length;
    let s = w * x;
    modes.iter().map(|&(k, a, b)| w * k * (-a * (k * s).sin() + b * (k * s).cos())).sum()
}

/// Smooth zero-mean field with sup norm `amplitude`.
pub fn smooth_field(rng: &mut ChaCha8Rng, grid: &PeriodicGrid, modes: usize, amplitude: f64) -> GridField {
    let m = random_modes(rng, modes);
    let f = grid.sample(|x| eval_modes(&m, grid.length(), x));
    f.scale(amplitude / f.max_abs())
}

/// `h = 1 + smooth` with `|h - 1| ≤ amplitude < 1`.
pub fn smooth_height(rng: &mut ChaCha8Rng, grid: &PeriodicGrid, amplitude: f64) -> HeightField {
    HeightField::new(smooth_field(rng, grid, 4, amplitude).map(|v| 1.0 + v)).unwrap()
}

/// Smooth displacement ψ whose exact `1 + ψ'` has minimum `min_phix`.
pub fn smooth_displacement(rng: &mut ChaCha8Rng, grid: &PeriodicGrid, min_phix: f64) -> GridField {
    let m = random_modes(rng, 4);
    let fine = PeriodicGrid::new(grid.length(), 4096).unwrap();
    let lowest = fine.nodes().iter().map(|&x| eval_modes_derivative(&m, grid.length(), x)).fold(f64::INFINITY, f64::min);
    let scale = (1.0 - min_phix) / -lowest;
    grid.sample(|x| scale * eval_modes(&m, grid.length(), x))
}

/// A random Lagrangian state near the identity.
pub fn random_state(rng: &mut ChaCha8Rng, grid: &PeriodicGrid) -> FlowMapState {
    let psi = smooth_displacement(rng, grid, 0.6);
    let v = smooth_field(rng, grid, 4, 0.3);
    FlowMapState::new(psi, v).unwrap()
}
