//! Periodic grid on [0, L), discrete derivatives, quadrature and Sobolev norms.
//!
//! The real line is truncated to a periodic box. Fields of interest (h - 1, u,
//! φ - id) are localized, so the box is taken wide enough that their boundary
//! values sit below round-off.
//!
//! Fourier convention: the forward transform is scaled by `dx`,
//!
//! ```text
//! f̂_m = dx · Σ_j f_j exp(-i k_m x_j),   k_m = 2π m / L,
//! f_j = (1/L) · Σ_m f̂_m exp(i k_m x_j),
//! ```
//!
//! so that `f̂_m` approximates the continuum Fourier integral and the discrete
//! Parseval identity reads `dx Σ |f_j|² = (1/L) Σ |f̂_m|²`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{GnError, Result};

/// Discrete approximation of ∂x.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DerivativeScheme {
    /// Fourier multiplier `i k`; the Nyquist mode is dropped.
    #[default]
    Spectral,
    /// `(f_{j+1} - f_{j-1}) / (2 dx)` with wraparound.
    Centered2,
}

struct FftPlans {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

/// Uniform periodic grid with `n` nodes `x_j = j·dx` on `[0, length)`.
#[derive(Clone)]
pub struct PeriodicGrid {
    length: f64,
    n: usize,
    dx: f64,
    plans: Arc<FftPlans>,
}

impl fmt::Debug for PeriodicGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PeriodicGrid")
            .field("length", &self.length)
            .field("n", &self.n)
            .field("dx", &self.dx)
            .finish()
    }
}

impl PartialEq for PeriodicGrid {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.length == other.length
    }
}

impl PeriodicGrid {
    pub const MIN_POINTS: usize = 16;

    pub fn new(length: f64, n: usize) -> Result<Self> {
        if !(length.is_finite() && length > 0.0) {
            return Err(GnError::InvalidGrid(format!("length must be positive, got {length}")));
        }
        if n < Self::MIN_POINTS || n % 2 != 0 {
            return Err(GnError::InvalidGrid(format!(
                "point count must be even and at least {}, got {n}",
                Self::MIN_POINTS
            )));
        }
        let mut planner = FftPlanner::new();
        let plans = FftPlans {
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        };
        Ok(Self { length, n, dx: length / n as f64, plans: Arc::new(plans) })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn node(&self, j: usize) -> f64 {
        j as f64 * self.dx
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.node(j)).collect()
    }

    /// Signed wavenumber of DFT index `m`. The Nyquist index maps to `+π n / L`.
    pub fn wavenumber(&self, m: usize) -> f64 {
        let signed = if m <= self.n / 2 { m as f64 } else { m as f64 - self.n as f64 };
        2.0 * PI * signed / self.length
    }

    /// Forward transform scaled by `dx`.
    pub fn forward_transform(&self, values: &[f64]) -> Vec<Complex64> {
        assert_eq!(values.len(), self.n, "field length does not match grid");
        let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v * self.dx, 0.0)).collect();
        self.plans.forward.process(&mut buf);
        buf
    }

    /// Inverse of [`forward_transform`](Self::forward_transform); discards imaginary parts.
    pub fn inverse_transform(&self, mut coeffs: Vec<Complex64>) -> Vec<f64> {
        assert_eq!(coeffs.len(), self.n, "coefficient length does not match grid");
        self.plans.inverse.process(&mut coeffs);
        let scale = 1.0 / self.length;
        coeffs.iter().map(|c| c.re * scale).collect()
    }

    pub fn zeros(&self) -> GridField {
        GridField { grid: self.clone(), values: vec![0.0; self.n] }
    }

    pub fn constant(&self, c: f64) -> GridField {
        GridField { grid: self.clone(), values: vec![c; self.n] }
    }

    pub fn sample<F: Fn(f64) -> f64>(&self, f: F) -> GridField {
        GridField { grid: self.clone(), values: (0..self.n).map(|j| f(self.node(j))).collect() }
    }
}

/// Samples of a real function on a [`PeriodicGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    grid: PeriodicGrid,
    values: Vec<f64>,
}

impl GridField {
    pub fn new(grid: &PeriodicGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(GnError::InvalidField(format!(
                "expected {} samples, got {}",
                grid.len(),
                values.len()
            )));
        }
        if let Some(j) = values.iter().position(|v| !v.is_finite()) {
            return Err(GnError::InvalidField(format!("non-finite sample at index {j}")));
        }
        Ok(Self { grid: grid.clone(), values })
    }

    /// Builds a field without the finiteness scan. Callers guarantee the length.
    pub(crate) fn from_vec_unchecked(grid: &PeriodicGrid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid: grid.clone(), values }
    }

    pub fn grid(&self) -> &PeriodicGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> GridField {
        Self::from_vec_unchecked(&self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_map<F: Fn(f64, f64) -> f64>(&self, other: &GridField, f: F) -> GridField {
        assert_eq!(self.len(), other.len(), "fields live on different grids");
        Self::from_vec_unchecked(
            &self.grid,
            self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
        )
    }

    pub fn scale(&self, c: f64) -> GridField {
        self.map(|v| c * v)
    }

    pub fn add(&self, other: &GridField) -> GridField {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &GridField) -> GridField {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &GridField) -> GridField {
        self.zip_map(other, |a, b| a * b)
    }

    /// `self + c·other`
    pub fn axpy(&self, c: f64, other: &GridField) -> GridField {
        self.zip_map(other, |a, b| a + c * b)
    }
}

pub fn derivative(f: &GridField, scheme: DerivativeScheme) -> GridField {
    let grid = f.grid();
    let values = match scheme {
        DerivativeScheme::Centered2 => centered_difference(f.values(), grid.dx()),
        DerivativeScheme::Spectral => spectral_derivative(grid, f.values()),
    };
    GridField::from_vec_unchecked(grid, values)
}

pub(crate) fn centered_difference(f: &[f64], dx: f64) -> Vec<f64> {
    let n = f.len();
    let inv = 0.5 / dx;
    (0..n)
        .map(|j| {
            let next = f[(j + 1) % n];
            let prev = f[(j + n - 1) % n];
            (next - prev) * inv
        })
        .collect()
}

pub(crate) fn spectral_derivative(grid: &PeriodicGrid, f: &[f64]) -> Vec<f64> {
    let n = grid.len();
    let mut coeffs = grid.forward_transform(f);
    for (m, c) in coeffs.iter_mut().enumerate() {
        if m == n / 2 {
            *c = Complex64::new(0.0, 0.0);
        } else {
            let k = grid.wavenumber(m);
            *c = Complex64::new(-k * c.im, k * c.re);
        }
    }
    grid.inverse_transform(coeffs)
}

/// Zeroes every Fourier mode with `|m| > n/3` (the 2/3 rule).
pub fn two_thirds_filter(f: &GridField) -> GridField {
    let grid = f.grid();
    let n = grid.len();
    let cutoff = n / 3;
    let mut coeffs = grid.forward_transform(f.values());
    for (m, c) in coeffs.iter_mut().enumerate() {
        let signed = if m <= n / 2 { m } else { n - m };
        if signed > cutoff {
            *c = Complex64::new(0.0, 0.0);
        }
    }
    GridField::from_vec_unchecked(grid, grid.inverse_transform(coeffs))
}

/// Rectangle rule `dx · Σ f_j` (trapezoidal on a periodic grid).
pub fn quadrature(f: &GridField) -> f64 {
    f.grid().dx() * f.values().iter().sum::<f64>()
}

/// Discrete `H^σ` norm `((1/L) Σ_m (1 + k_m²)^σ |f̂_m|²)^{1/2}`.
///
/// With σ = 0 this reproduces `quadrature(f²)^{1/2}`.
pub fn sobolev_norm(f: &GridField, sigma: f64) -> f64 {
    let grid = f.grid();
    let coeffs = grid.forward_transform(f.values());
    let sum: f64 = coeffs
        .iter()
        .enumerate()
        .map(|(m, c)| {
            let k = grid.wavenumber(m);
            (1.0 + k * k).powf(sigma) * c.norm_sqr()
        })
        .sum();
    (sum / grid.length()).sqrt()
}

/// Random field sitting at the edge of `H^σ`.
///
/// Fourier magnitudes follow `(1 + k²)^{-(σ + 0.55)/2}` with uniformly random
/// phases; the result is rescaled so that `sobolev_norm(f, σ) == amplitude`.
/// The mean and Nyquist modes are left at zero. Output is a pure function of
/// `(sigma, amplitude, seed, grid)`.
pub fn synthesize_rough_field(sigma: f64, amplitude: f64, seed: u64, grid: &PeriodicGrid) -> Result<GridField> {
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(GnError::InvalidArgument(format!("sigma must be positive, got {sigma}")));
    }
    if !(amplitude.is_finite() && amplitude >= 0.0) {
        return Err(GnError::InvalidArgument(format!("amplitude must be non-negative, got {amplitude}")));
    }
    if amplitude == 0.0 {
        return Ok(grid.zeros());
    }
    let n = grid.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coeffs = vec![Complex64::new(0.0, 0.0); n];
    for m in 1..n / 2 {
        let k = grid.wavenumber(m);
        let magnitude = (1.0 + k * k).powf(-(sigma + 0.55) / 2.0);
        let phase = rng.gen_range(0.0..2.0 * PI);
        let c = Complex64::from_polar(magnitude, phase);
        coeffs[m] = c;
        coeffs[n - m] = c.conj();
    }
    let raw = GridField::from_vec_unchecked(grid, grid.inverse_transform(coeffs));
    let norm = sobolev_norm(&raw, sigma);
    Ok(raw.scale(amplitude / norm))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_pi_grid(n: usize) -> PeriodicGrid {
        PeriodicGrid::new(2.0 * PI, n).unwrap()
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(PeriodicGrid::new(1.0, 8).is_err());
        assert!(PeriodicGrid::new(1.0, 17).is_err());
        assert!(PeriodicGrid::new(0.0, 32).is_err());
        assert!(PeriodicGrid::new(f64::NAN, 32).is_err());
        let g = PeriodicGrid::new(10.0, 40).unwrap();
        assert!((g.dx() * g.len() as f64 - 10.0).abs() < 1e-14);
    }

    #[test]
    fn field_rejects_wrong_length_and_nan() {
        let g = two_pi_grid(16);
        assert!(GridField::new(&g, vec![0.0; 15]).is_err());
        let mut v = vec![0.0; 16];
        v[3] = f64::NAN;
        assert!(GridField::new(&g, v).is_err());
    }

    #[test]
    fn spectral_derivative_of_sin2x() {
        let g = two_pi_grid(64);
        let d = derivative(&g.sample(|x| (2.0 * x).sin()), DerivativeScheme::Spectral);
        let exact = g.sample(|x| 2.0 * (2.0 * x).cos());
        assert!(d.sub(&exact).max_abs() < 1e-12);
    }

    #[test]
    fn derivative_of_constant_vanishes() {
        let g = two_pi_grid(32);
        for scheme in [DerivativeScheme::Spectral, DerivativeScheme::Centered2] {
            assert!(derivative(&g.constant(3.5), scheme).max_abs() < 1e-12);
        }
    }

    #[test]
    fn centered_error_matches_stencil_symbol() {
        let g = two_pi_grid(64);
        let dx = g.dx();
        let d = derivative(&g.sample(f64::sin), DerivativeScheme::Centered2);
        let err = d.sub(&g.sample(f64::cos)).max_abs();
        // symbol sin(k dx)/dx at k = 1
        let expected = 1.0 - dx.sin() / dx;
        assert!((err - expected).abs() < 1e-14, "{err} vs {expected}");
        assert!((expected - dx * dx / 6.0).abs() < dx.powi(4));
    }

    #[test]
    fn quadrature_examples() {
        let g = PeriodicGrid::new(10.0, 64).unwrap();
        assert!((quadrature(&g.constant(1.0)) - 10.0).abs() < 1e-12);
        let g = two_pi_grid(64);
        assert!(quadrature(&g.sample(f64::sin)).abs() < 1e-14);
    }

    #[test]
    fn quadrature_of_windowed_sech2() {
        let kappa = (3.0_f64 * 0.2 / (4.0 * 1.2)).sqrt();
        let g = PeriodicGrid::new(80.0, 2048).unwrap();
        let f = g.sample(|x| 1.0 / (kappa * (x - 40.0)).cosh().powi(2));
        assert!((quadrature(&f) - 2.0 / kappa).abs() < 1e-10);
    }

    #[test]
    fn sobolev_norm_examples() {
        let g = two_pi_grid(64);
        assert_eq!(sobolev_norm(&g.zeros(), 1.3), 0.0);
        assert!((sobolev_norm(&g.sample(f64::sin), 0.0) - PI.sqrt()).abs() < 1e-12);
        let f = g.sample(|x| (2.0 * x).sin());
        let fx = derivative(&f, DerivativeScheme::Spectral);
        let direct = quadrature(&f.mul(&f).add(&fx.mul(&fx))).sqrt();
        assert!((sobolev_norm(&f, 1.0) - (5.0 * PI).sqrt()).abs() < 1e-12);
        assert!((direct - (5.0 * PI).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn rough_field_contract() {
        let g = PeriodicGrid::new(20.0, 256).unwrap();
        assert!(synthesize_rough_field(0.0, 1.0, 1, &g).is_err());
        assert!(synthesize_rough_field(-1.0, 1.0, 1, &g).is_err());
        assert_eq!(synthesize_rough_field(0.6, 0.0, 1, &g).unwrap().max_abs(), 0.0);
        let a = synthesize_rough_field(0.6, 0.1, 7, &g).unwrap();
        assert!((sobolev_norm(&a, 0.6) - 0.1).abs() < 1e-12);
        let b = synthesize_rough_field(0.6, 0.1, 7, &g).unwrap();
        assert_eq!(a.values(), b.values());
        let c = synthesize_rough_field(0.6, 0.1, 8, &g).unwrap();
        assert_ne!(a.values(), c.values());
    }

    #[test]
    fn two_thirds_filter_keeps_low_modes() {
        let g = two_pi_grid(48);
        let low = g.sample(|x| (3.0 * x).cos());
        assert!(two_thirds_filter(&low).sub(&low).max_abs() < 1e-13);
        let high = g.sample(|x| (20.0 * x).cos());
        assert!(two_thirds_filter(&high).max_abs() < 1e-13);
    }
}
