//! Lagrangian flow-map solver for the 1D Green–Naghdi (Serre) shallow-water
//! system, with an independent pseudo-spectral Eulerian solver, diagnostics,
//! and the `gnflow` command-line application.
//!
//! The system is
//!
//! ```text
//! u_t + u u_x + h_x = (1/3h) ∂x(h³(u_tx + u u_xx - u_x²)),
//! h_t + ∂x(hu) = 0,
//! ```
//!
//! solved through its flow map φ (`φ_t = u ∘ φ`, `φ(0) = id`) as the
//! second-order ODE `φ_tt = F(φ, φ_t, h₀)` on the label grid, with the Eulerian
//! fields recovered by `h = (h₀/φ_x) ∘ φ⁻¹` and `u = φ_t ∘ φ⁻¹`.

pub mod app;
pub mod config;
pub mod diagnostics;
pub mod elliptic;
pub mod error;
pub mod eulerian;
pub mod flow_map;
pub mod grid;
pub mod integrate;
pub mod interp;
pub mod lagrangian;
pub mod output;
pub mod scenario;

pub use elliptic::{apply_ah, solve_ah, solve_elliptic, EllipticProblem, HeightField};
pub use error::{GnError, Result};
pub use eulerian::{eulerian_rhs, integrate_eulerian, EulerianOptions, EulerianState};
pub use flow_map::{compose, invert_diffeo, reconstruct_eulerian};
pub use grid::{derivative, quadrature, sobolev_norm, synthesize_rough_field, DerivativeScheme, GridField, PeriodicGrid};
pub use integrate::{integrate, step_rk4, IntegratorConfig, Termination, Trajectory};
pub use lagrangian::{conjugated_derivative, evaluate_f, lagrangian_rhs, FlowMapState, MONOTONICITY_GUARD};
