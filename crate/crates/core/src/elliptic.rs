//! The elliptic operator `A_h u = 3hu - ∂x(h³ u_x)` and its variable-coefficient
//! generalisation `u ↦ a u - ∂x(b u_x)`.
//!
//! Discretisation is flux-form second order:
//!
//! ```text
//! (A u)_j = a_j u_j - [b_{j+1/2}(u_{j+1} - u_j) - b_{j-1/2}(u_j - u_{j-1})] / dx²,
//! b_{j+1/2} = (b_j + b_{j+1}) / 2,
//! ```
//!
//! which yields a symmetric positive definite cyclic tridiagonal matrix whenever
//! `a > 0` and `b > 0`. Inversion is a direct Thomas sweep with a
//! Sherman–Morrison correction for the periodic corners, followed by a residual
//! check.

use crate::error::{GnError, Result};
use crate::grid::{GridField, PeriodicGrid};

/// Relative residual accepted after a direct solve.
pub const RESIDUAL_TOLERANCE: f64 = 1e-10;

/// Surface height `h`, strictly positive everywhere.
#[derive(Debug, Clone, PartialEq)]
pub struct HeightField(GridField);

impl HeightField {
    pub fn new(h: GridField) -> Result<Self> {
        if !h.is_finite() {
            return Err(GnError::InvalidField("height contains non-finite samples".into()));
        }
        let min = h.min();
        if min <= 0.0 {
            return Err(GnError::IllPosed(format!("height must be positive, min h = {min:e}")));
        }
        Ok(Self(h))
    }

    pub fn field(&self) -> &GridField {
        &self.0
    }

    pub fn grid(&self) -> &PeriodicGrid {
        self.0.grid()
    }

    pub fn values(&self) -> &[f64] {
        self.0.values()
    }

    pub fn into_field(self) -> GridField {
        self.0
    }

    /// Largest `|h - 1|` over the first and last `width` nodes.
    pub fn tail_magnitude(&self, width: usize) -> f64 {
        let v = self.values();
        let width = width.min(v.len() / 2);
        v[..width]
            .iter()
            .chain(&v[v.len() - width..])
            .fold(0.0, |m, &x| m.max((x - 1.0).abs()))
    }
}

/// Coefficients of `u ↦ a u - ∂x(b u_x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EllipticProblem {
    a: GridField,
    b: GridField,
}

impl EllipticProblem {
    pub fn new(a: GridField, b: GridField) -> Result<Self> {
        if a.len() != b.len() {
            return Err(GnError::InvalidField("coefficient fields differ in length".into()));
        }
        if !(a.is_finite() && b.is_finite()) {
            return Err(GnError::IllPosed("non-finite coefficient".into()));
        }
        let (min_a, min_b) = (a.min(), b.min());
        if min_a <= 0.0 || min_b <= 0.0 {
            return Err(GnError::IllPosed(format!(
                "ellipticity lost: min a = {min_a:e}, min b = {min_b:e}"
            )));
        }
        Ok(Self { a, b })
    }

    /// `a = 3h`, `b = h³`.
    pub fn for_height(h: &HeightField) -> Self {
        let a = h.field().scale(3.0);
        let b = h.field().map(|v| v * v * v);
        Self { a, b }
    }

    pub fn a(&self) -> &GridField {
        &self.a
    }

    pub fn b(&self) -> &GridField {
        &self.b
    }

    pub fn grid(&self) -> &PeriodicGrid {
        self.a.grid()
    }

    /// Flux coefficients at half nodes; entry `j` sits between nodes `j` and `j+1`.
    fn half_point_flux(&self) -> Vec<f64> {
        let b = self.b.values();
        let n = b.len();
        (0..n).map(|j| 0.5 * (b[j] + b[(j + 1) % n])).collect()
    }

    pub fn apply(&self, u: &GridField) -> GridField {
        let out = apply_raw(self.a.values(), &self.half_point_flux(), u.values(), self.grid().dx());
        GridField::from_vec_unchecked(u.grid(), out)
    }
}

fn apply_raw(a: &[f64], flux: &[f64], u: &[f64], dx: f64) -> Vec<f64> {
    let n = u.len();
    let inv_dx2 = 1.0 / (dx * dx);
    (0..n)
        .map(|j| {
            let next = (j + 1) % n;
            let prev = (j + n - 1) % n;
            let right = flux[j] * (u[next] - u[j]);
            let left = flux[prev] * (u[j] - u[prev]);
            a[j] * u[j] - (right - left) * inv_dx2
        })
        .collect()
}

pub fn apply_ah(h: &HeightField, u: &GridField) -> GridField {
    EllipticProblem::for_height(h).apply(u)
}

/// Solves `a u - ∂x(b u_x) = f` on the periodic grid.
pub fn solve_elliptic(problem: &EllipticProblem, f: &GridField) -> Result<GridField> {
    let grid = problem.grid();
    let n = grid.len();
    if f.len() != n {
        return Err(GnError::InvalidField("right-hand side length does not match problem".into()));
    }
    let inv_dx2 = 1.0 / (grid.dx() * grid.dx());
    let flux = problem.half_point_flux();
    let a = problem.a.values();

    let diag: Vec<f64> = (0..n).map(|j| a[j] + (flux[j] + flux[(j + n - 1) % n]) * inv_dx2).collect();
    // off[j] couples j and j+1; off[n-1] is the periodic corner.
    let off: Vec<f64> = flux.iter().map(|&b| -b * inv_dx2).collect();

    let u = cyclic_symmetric_solve(&diag, &off, f.values())?;

    let residual = apply_raw(a, &flux, &u, grid.dx());
    let res_norm = residual.iter().zip(f.values()).fold(0.0_f64, |m, (r, fj)| m.max((r - fj).abs()));
    let f_norm = f.max_abs();
    if !res_norm.is_finite() || res_norm > RESIDUAL_TOLERANCE * f_norm {
        return Err(GnError::SolverFailure {
            residual: if f_norm > 0.0 { res_norm / f_norm } else { res_norm },
            tolerance: RESIDUAL_TOLERANCE,
        });
    }
    Ok(GridField::from_vec_unchecked(grid, u))
}

/// `A_h⁻¹ f`.
pub fn solve_ah(h: &HeightField, f: &GridField) -> Result<GridField> {
    solve_elliptic(&EllipticProblem::for_height(h), f)
}

/// Symmetric cyclic tridiagonal solve. `off[j]` is the entry at `(j, j+1)` and
/// `off[n-1]` the corner entry at `(n-1, 0)`.
fn cyclic_symmetric_solve(diag: &[f64], off: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    let corner = off[n - 1];
    // Sherman–Morrison with w = (γ, 0, …, 0, corner), A = T + w wᵀ/γ.
    let gamma = -diag[0];
    let mut modified = diag.to_vec();
    modified[0] -= gamma;
    modified[n - 1] -= corner * corner / gamma;

    let sub = &off[..n - 1];
    let x = thomas(sub, &modified, sub, rhs)?;
    let mut w = vec![0.0; n];
    w[0] = gamma;
    w[n - 1] = corner;
    let z = thomas(sub, &modified, sub, &w)?;

    let ratio = corner / gamma;
    let numerator = x[0] + ratio * x[n - 1];
    let denominator = 1.0 + z[0] + ratio * z[n - 1];
    if denominator == 0.0 || !denominator.is_finite() {
        return Err(GnError::SolverFailure { residual: f64::INFINITY, tolerance: RESIDUAL_TOLERANCE });
    }
    let factor = numerator / denominator;
    Ok(x.iter().zip(&z).map(|(xi, zi)| xi - factor * zi).collect())
}

fn thomas(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut beta = diag[0];
    if beta == 0.0 {
        return Err(GnError::SolverFailure { residual: f64::INFINITY, tolerance: RESIDUAL_TOLERANCE });
    }
    d[0] = rhs[0] / beta;
    for j in 1..n {
        c[j] = sup[j - 1] / beta;
        beta = diag[j] - sub[j - 1] * c[j];
        if beta == 0.0 {
            return Err(GnError::SolverFailure { residual: f64::INFINITY, tolerance: RESIDUAL_TOLERANCE });
        }
        d[j] = (rhs[j] - sub[j - 1] * d[j - 1]) / beta;
    }
    for j in (0..n - 1).rev() {
        d[j] -= c[j + 1] * d[j + 1];
    }
    Ok(d)
}

/// Manufactured pair on a box of any length: `u* = exp(-(x - c)²)`,
/// `h = 1 + 0.3 exp(-(x - c)²/4)` centred at `c = L/2`, and the continuum
/// right-hand side `f = A_h u*` evaluated analytically. Returns `(h, u*, f)`.
pub fn manufactured_problem(grid: &PeriodicGrid) -> Result<(HeightField, GridField, GridField)> {
    let c = grid.length() / 2.0;
    let exact = grid.sample(|x| (-(x - c).powi(2)).exp());
    let h = grid.sample(|x| 1.0 + 0.3 * (-(x - c).powi(2) / 4.0).exp());
    let f = grid.sample(|x| {
        let s = x - c;
        let u = (-s * s).exp();
        let (ux, uxx) = (-2.0 * s * u, (4.0 * s * s - 2.0) * u);
        let e = (-s * s / 4.0).exp();
        let (hv, hx) = (1.0 + 0.3 * e, -0.15 * s * e);
        3.0 * hv * u - 3.0 * hv * hv * hx * ux - hv.powi(3) * uxx
    });
    Ok((HeightField::new(h)?, exact, f))
}

/// Sup-norm error of the discrete solve against the manufactured `u*`.
pub fn manufactured_error(grid: &PeriodicGrid) -> Result<f64> {
    let (h, exact, f) = manufactured_problem(grid)?;
    Ok(solve_ah(&h, &f)?.sub(&exact).max_abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::quadrature;
    use std::f64::consts::PI;

    fn grid(n: usize) -> PeriodicGrid {
        PeriodicGrid::new(2.0 * PI, n).unwrap()
    }

    /// Discrete symbol of -∂x² for the 3-point stencil.
    fn laplace_symbol(k: f64, dx: f64) -> f64 {
        4.0 * (0.5 * k * dx).sin().powi(2) / (dx * dx)
    }

    #[test]
    fn height_field_rejects_nonpositive() {
        let g = grid(16);
        assert!(matches!(HeightField::new(g.constant(0.0)), Err(GnError::IllPosed(_))));
        assert!(HeightField::new(g.sample(|x| 0.5 + x.cos())).is_err());
        assert!(HeightField::new(g.constant(1.0)).is_ok());
    }

    #[test]
    fn tail_magnitude_of_localized_bump() {
        let g = PeriodicGrid::new(40.0, 256).unwrap();
        let h = HeightField::new(g.sample(|x| 1.0 + (-(x - 20.0).powi(2)).exp())).unwrap();
        assert!(h.tail_magnitude(4) < 1e-12);
    }

    #[test]
    fn constant_field_maps_to_3c() {
        let g = grid(32);
        let h = HeightField::new(g.constant(1.0)).unwrap();
        let out = apply_ah(&h, &g.constant(0.7));
        assert!(out.sub(&g.constant(2.1)).max_abs() < 1e-14);
    }

    #[test]
    fn symbol_of_constant_coefficient_operator() {
        let g = grid(64);
        let u = g.sample(|x| (2.0 * x).sin());
        let h = HeightField::new(g.constant(1.0)).unwrap();
        let expected = u.scale(3.0 + laplace_symbol(2.0, g.dx()));
        assert!(apply_ah(&h, &u).sub(&expected).max_abs() < 1e-11);
        // continuum limit 7 sin(2x)
        assert!(apply_ah(&h, &u).sub(&u.scale(7.0)).max_abs() < 0.02);

        let h2 = HeightField::new(g.constant(2.0)).unwrap();
        let u1 = g.sample(f64::sin);
        let expected = u1.scale(6.0 + 8.0 * laplace_symbol(1.0, g.dx()));
        assert!(apply_ah(&h2, &u1).sub(&expected).max_abs() < 1e-11);
        assert!(apply_ah(&h2, &u1).sub(&u1.scale(14.0)).max_abs() < 0.01);
    }

    #[test]
    fn solve_constant_and_single_mode() {
        let g = grid(64);
        let p = EllipticProblem::new(g.constant(3.0), g.constant(1.0)).unwrap();
        let u = solve_elliptic(&p, &g.constant(3.0 * 0.4)).unwrap();
        assert!(u.sub(&g.constant(0.4)).max_abs() < 1e-13);

        let f = g.sample(|x| 7.0 * (2.0 * x).sin());
        let u = solve_elliptic(&p, &f).unwrap();
        let exact = g.sample(|x| (2.0 * x).sin()).scale(7.0 / (3.0 + laplace_symbol(2.0, g.dx())));
        assert!(u.sub(&exact).max_abs() < 1e-12);
        assert!(u.sub(&g.sample(|x| (2.0 * x).sin())).max_abs() < 5e-3);
    }

    #[test]
    fn ill_posed_coefficients_are_rejected() {
        let g = grid(16);
        assert!(matches!(
            EllipticProblem::new(g.constant(0.0), g.constant(1.0)),
            Err(GnError::IllPosed(_))
        ));
        assert!(matches!(
            EllipticProblem::new(g.constant(1.0), g.sample(|x| x.sin())),
            Err(GnError::IllPosed(_))
        ));
    }

    #[test]
    fn manufactured_solution_is_second_order() {
        let mut errors = Vec::new();
        for n in [128, 256, 512] {
            let g = PeriodicGrid::new(20.0, n).unwrap();
            let (h, exact, f) = manufactured_problem(&g).unwrap();
            let u = solve_ah(&h, &f).unwrap();
            errors.push(u.sub(&exact).max_abs());
            // discrete apply then solve is exact up to round-off
            let back = solve_ah(&h, &apply_ah(&h, &exact)).unwrap();
            assert!(back.sub(&exact).max_abs() < 1e-11);
        }
        for pair in errors.windows(2) {
            let order = (pair[0] / pair[1]).log2();
            assert!((order - 2.0).abs() < 0.2, "order {order} from {errors:?}");
        }
    }

    #[test]
    fn zero_rhs_gives_zero() {
        let g = grid(32);
        let h = HeightField::new(g.sample(|x| 1.0 + 0.2 * x.cos())).unwrap();
        assert_eq!(solve_ah(&h, &g.zeros()).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn energy_pairing_is_positive() {
        let g = grid(64);
        let h = HeightField::new(g.sample(|x| 1.0 + 0.4 * x.sin())).unwrap();
        let u = g.sample(|x| (3.0 * x).cos() + 0.2);
        let pairing = quadrature(&apply_ah(&h, &u).mul(&u));
        assert!(pairing >= 3.0 * h.field().min() * quadrature(&u.mul(&u)));
    }
}
