//! C ABI for the gnflow solver.
//!
//! Conventions:
//!
//! * Every function returns a [`GnflowStatus`]; `GNFLOW_STATUS_OK` is zero.
//!   On failure a human-readable message is stored per thread and can be
//!   fetched with [`gnflow_last_error_message`].
//! * Arrays are caller-owned `double` buffers of length `n` (the grid size).
//! * A [`GnflowSolver`] is an opaque handle created by [`gnflow_solver_new`]
//!   and released with [`gnflow_solver_free`]. Handles are not thread-safe;
//!   distinct handles may be used from distinct threads.
//! * Panics never cross the boundary; they are reported as
//!   `GNFLOW_STATUS_PANIC`.
//!
//! The header `include/gnflow.h` is generated from this file by the build
//! script.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use gnflow::diagnostics::{record_lagrangian, SolitaryWave};
use gnflow::integrate::step_rk4;
use gnflow::{evaluate_f, reconstruct_eulerian, solve_ah, FlowMapState, GnError, GridField, HeightField, PeriodicGrid};

/// Result codes shared by every entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GnflowStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidGrid = 3,
    InvalidField = 4,
    IllPosed = 5,
    SolverFailure = 6,
    MonotonicityLoss = 7,
    StepRejected = 8,
    BufferTooSmall = 9,
    Panic = 10,
}

impl From<&GnError> for GnflowStatus {
    fn from(e: &GnError) -> Self {
        match e {
            GnError::InvalidGrid(_) => Self::InvalidGrid,
            GnError::InvalidField(_) => Self::InvalidField,
            GnError::InvalidArgument(_) => Self::InvalidArgument,
            GnError::IllPosed(_) => Self::IllPosed,
            GnError::SolverFailure { .. } => Self::SolverFailure,
            GnError::MonotonicityLoss { .. } => Self::MonotonicityLoss,
            GnError::StepRejected(_) => Self::StepRejected,
        }
    }
}

/// Conserved quantities and norms of the reconstructed Eulerian fields.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct GnflowDiagnostics {
    pub t: f64,
    pub mass: f64,
    pub momentum: f64,
    pub energy: f64,
    pub min_phix: f64,
    pub sobolev_h: f64,
    pub sobolev_u: f64,
}

/// Opaque solver handle: the Lagrangian state `(ψ, v)`, the initial height
/// and the current time.
pub struct GnflowSolver {
    h0: HeightField,
    state: FlowMapState,
    t: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(message: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = message);
}

struct Failure(GnflowStatus, String);

impl From<GnError> for Failure {
    fn from(e: GnError) -> Self {
        Failure(GnflowStatus::from(&e), e.to_string())
    }
}

fn null(name: &str) -> Failure {
    Failure(GnflowStatus::NullPointer, format!("{name} is null"))
}

/// Runs `body`, converting errors and panics into a status code.
fn guard<F: FnOnce() -> Result<(), Failure>>(body: F) -> GnflowStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            set_error(String::new());
            GnflowStatus::Ok
        }
        Ok(Err(Failure(status, message))) => {
            set_error(message);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            GnflowStatus::Panic
        }
    }
}

fn grid(length: f64, n: usize) -> Result<PeriodicGrid, Failure> {
    Ok(PeriodicGrid::new(length, n)?)
}

unsafe fn input<'a>(p: *const f64, n: usize, name: &str) -> Result<&'a [f64], Failure> {
    if p.is_null() {
        return Err(null(name));
    }
    Ok(std::slice::from_raw_parts(p, n))
}

unsafe fn output<'a>(p: *mut f64, n: usize, name: &str) -> Result<&'a mut [f64], Failure> {
    if p.is_null() {
        return Err(null(name));
    }
    Ok(std::slice::from_raw_parts_mut(p, n))
}

fn field(g: &PeriodicGrid, values: &[f64]) -> Result<GridField, Failure> {
    Ok(GridField::new(g, values.to_vec())?)
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn gnflow_version() -> *const c_char {
    static VERSION: &CStr = match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
        Ok(v) => v,
        Err(_) => panic!("version contains a NUL byte"),
    };
    VERSION.as_ptr()
}

/// Copies the calling thread's last error message into `buf` (NUL-terminated,
/// truncated to `len - 1` bytes) and returns the full message length in bytes,
/// excluding the terminator. Pass `buf = NULL` to query the length.
///
/// # Safety
/// `buf` must be null or point to at least `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn gnflow_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let k = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr() as *const c_char, buf, k);
            *buf.add(k) = 0;
        }
        msg.len()
    })
}

/// Solves `3h u - ∂x(h³ u_x) = f` on the periodic grid of `n` points over `[0, length)`.
///
/// # Safety
/// `h` and `f` must point to `n` readable doubles, `u_out` to `n` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn gnflow_solve_ah(
    length: f64,
    n: usize,
    h: *const f64,
    f: *const f64,
    u_out: *mut f64,
) -> GnflowStatus {
    guard(|| {
        let g = grid(length, n)?;
        let h = HeightField::new(field(&g, input(h, n, "h")?)?)?;
        let f = field(&g, input(f, n, "f")?)?;
        let out = output(u_out, n, "u_out")?;
        out.copy_from_slice(solve_ah(&h, &f)?.values());
        Ok(())
    })
}

/// Evaluates the Lagrangian acceleration `F(φ, v, h₀)` for `φ = id + ψ`.
///
/// # Safety
/// `h0`, `psi`, `v` must point to `n` readable doubles, `f_out` to `n` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn gnflow_evaluate_f(
    length: f64,
    n: usize,
    h0: *const f64,
    psi: *const f64,
    v: *const f64,
    f_out: *mut f64,
) -> GnflowStatus {
    guard(|| {
        let g = grid(length, n)?;
        let h0 = HeightField::new(field(&g, input(h0, n, "h0")?)?)?;
        let state = FlowMapState::new(field(&g, input(psi, n, "psi")?)?, field(&g, input(v, n, "v")?)?)?;
        output(f_out, n, "f_out")?.copy_from_slice(evaluate_f(&state, &h0)?.values());
        Ok(())
    })
}

/// Samples the exact solitary wave of amplitude `a` centred at `length/2` at time `t`.
///
/// # Safety
/// `h_out` and `u_out` must point to `n` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn gnflow_solitary_wave(
    length: f64,
    n: usize,
    a: f64,
    t: f64,
    h_out: *mut f64,
    u_out: *mut f64,
) -> GnflowStatus {
    guard(|| {
        let g = grid(length, n)?;
        let s = SolitaryWave::new(a, length / 2.0)?.state(&g, t)?;
        output(h_out, n, "h_out")?.copy_from_slice(s.h().values());
        output(u_out, n, "u_out")?.copy_from_slice(s.u().values());
        Ok(())
    })
}

/// Creates a solver at `t = 0` with `φ = id` and `φ_t = u0`.
///
/// # Safety
/// `h0` and `u0` must point to `n` readable doubles; `out` must be a valid
/// pointer to a handle slot. On failure `*out` is set to NULL.
#[no_mangle]
pub unsafe extern "C" fn gnflow_solver_new(
    length: f64,
    n: usize,
    h0: *const f64,
    u0: *const f64,
    out: *mut *mut GnflowSolver,
) -> GnflowStatus {
    if out.is_null() {
        set_error("out is null".into());
        return GnflowStatus::NullPointer;
    }
    *out = ptr::null_mut();
    guard(|| {
        let g = grid(length, n)?;
        let h0 = HeightField::new(field(&g, input(h0, n, "h0")?)?)?;
        let u0 = field(&g, input(u0, n, "u0")?)?;
        let solver = GnflowSolver { h0, state: FlowMapState::initial(&u0), t: 0.0 };
        *out = Box::into_raw(Box::new(solver));
        Ok(())
    })
}

/// Releases a handle; NULL is ignored.
///
/// # Safety
/// `solver` must be null or a handle from [`gnflow_solver_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gnflow_solver_free(solver: *mut GnflowSolver) {
    if !solver.is_null() {
        drop(Box::from_raw(solver));
    }
}

unsafe fn handle<'a>(solver: *mut GnflowSolver) -> Result<&'a mut GnflowSolver, Failure> {
    solver.as_mut().ok_or_else(|| null("solver"))
}

/// Advances by `steps` RK4 steps of size `dt`. On error the handle keeps the
/// last accepted state and time.
///
/// # Safety
/// `solver` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn gnflow_solver_step(solver: *mut GnflowSolver, dt: f64, steps: usize) -> GnflowStatus {
    guard(|| {
        let s = handle(solver)?;
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Failure(GnflowStatus::InvalidArgument, format!("dt must be positive, got {dt}")));
        }
        for _ in 0..steps {
            s.state = step_rk4(&s.state, dt, &s.h0)?;
            s.t += dt;
        }
        Ok(())
    })
}

/// Current time.
///
/// # Safety
/// `solver` must be a live handle and `t_out` writable.
#[no_mangle]
pub unsafe extern "C" fn gnflow_solver_time(solver: *const GnflowSolver, t_out: *mut f64) -> GnflowStatus {
    guard(|| {
        let s = solver.as_ref().ok_or_else(|| null("solver"))?;
        let t = t_out.as_mut().ok_or_else(|| null("t_out"))?;
        *t = s.t;
        Ok(())
    })
}

/// Copies the Lagrangian state `ψ = φ - id` and `v = φ_t` on the label grid.
///
/// # Safety
/// `solver` must be a live handle; `psi_out` and `v_out` must hold `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn gnflow_solver_state(
    solver: *const GnflowSolver,
    n: usize,
    psi_out: *mut f64,
    v_out: *mut f64,
) -> GnflowStatus {
    guard(|| {
        let s = solver.as_ref().ok_or_else(|| null("solver"))?;
        check_len(s, n)?;
        output(psi_out, n, "psi_out")?.copy_from_slice(s.state.psi().values());
        output(v_out, n, "v_out")?.copy_from_slice(s.state.v().values());
        Ok(())
    })
}

fn check_len(s: &GnflowSolver, n: usize) -> Result<(), Failure> {
    let want = s.h0.grid().len();
    if n < want {
        return Err(Failure(GnflowStatus::BufferTooSmall, format!("buffers hold {n} values, grid has {want}")));
    }
    Ok(())
}

/// Reconstructs the Eulerian `h` and `u` on the grid nodes.
///
/// # Safety
/// `solver` must be a live handle; `h_out` and `u_out` must hold `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn gnflow_solver_reconstruct(
    solver: *const GnflowSolver,
    n: usize,
    h_out: *mut f64,
    u_out: *mut f64,
) -> GnflowStatus {
    guard(|| {
        let s = solver.as_ref().ok_or_else(|| null("solver"))?;
        check_len(s, n)?;
        let e = reconstruct_eulerian(&s.state, &s.h0)?;
        let m = s.h0.grid().len();
        output(h_out, m, "h_out")?.copy_from_slice(e.h().values());
        output(u_out, m, "u_out")?.copy_from_slice(e.u().values());
        Ok(())
    })
}

/// Diagnostics of the current state with Sobolev order `sigma`.
///
/// # Safety
/// `solver` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gnflow_solver_diagnostics(
    solver: *const GnflowSolver,
    sigma: f64,
    out: *mut GnflowDiagnostics,
) -> GnflowStatus {
    guard(|| {
        let s = solver.as_ref().ok_or_else(|| null("solver"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let r = record_lagrangian(s.t, &s.state, &s.h0, sigma)?;
        *out = GnflowDiagnostics {
            t: r.t,
            mass: r.mass,
            momentum: r.momentum,
            energy: r.energy,
            min_phix: r.min_phix,
            sobolev_h: r.sobolev_h,
            sobolev_u: r.sobolev_u,
        };
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn last_error() -> String {
        let mut buf = vec![0 as c_char; 256];
        let len = unsafe { gnflow_last_error_message(buf.as_mut_ptr(), buf.len()) };
        let msg = unsafe { CStr::from_ptr(buf.as_ptr()) }.to_string_lossy().into_owned();
        assert_eq!(msg.len(), len.min(255));
        msg
    }

    #[test]
    fn version_is_the_crate_version() {
        let v = unsafe { CStr::from_ptr(gnflow_version()) };
        assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
    }

    #[test]
    fn solve_ah_constant_height() {
        let n = 32;
        let h = vec![1.0; n];
        let f = vec![3.0; n];
        let mut u = vec![0.0; n];
        let st = unsafe { gnflow_solve_ah(10.0, n, h.as_ptr(), f.as_ptr(), u.as_mut_ptr()) };
        assert_eq!(st, GnflowStatus::Ok);
        assert!(u.iter().all(|&x| (x - 1.0).abs() < 1e-14));
    }

    #[test]
    fn errors_carry_codes_and_messages() {
        let n = 32;
        let mut h = vec![1.0; n];
        h[3] = -1.0;
        let f = vec![0.0; n];
        let mut u = vec![0.0; n];
        let st = unsafe { gnflow_solve_ah(10.0, n, h.as_ptr(), f.as_ptr(), u.as_mut_ptr()) };
        assert_eq!(st, GnflowStatus::IllPosed);
        assert!(last_error().contains("positive"));
        let st = unsafe { gnflow_solve_ah(10.0, 7, h.as_ptr(), f.as_ptr(), u.as_mut_ptr()) };
        assert_eq!(st, GnflowStatus::InvalidGrid);
        let st = unsafe { gnflow_solve_ah(10.0, n, ptr::null(), f.as_ptr(), u.as_mut_ptr()) };
        assert_eq!(st, GnflowStatus::NullPointer);
        assert_eq!(last_error(), "h is null");
        // a folded map trips the guard
        let k = 2.0 * std::f64::consts::PI / 10.0;
        let psi: Vec<f64> = (0..n).map(|j| -3.0 / k * (k * j as f64 * 10.0 / n as f64).sin()).collect();
        let st = unsafe { gnflow_evaluate_f(10.0, n, vec![1.0; n].as_ptr(), psi.as_ptr(), f.as_ptr(), u.as_mut_ptr()) };
        assert_eq!(st, GnflowStatus::MonotonicityLoss);
    }

    #[test]
    fn solver_lifecycle_transports_the_solitary_wave() {
        let (l, n) = (80.0, 512);
        let (mut h, mut u) = (vec![0.0; n], vec![0.0; n]);
        assert_eq!(unsafe { gnflow_solitary_wave(l, n, 0.2, 0.0, h.as_mut_ptr(), u.as_mut_ptr()) }, GnflowStatus::Ok);
        let mut solver = ptr::null_mut();
        assert_eq!(unsafe { gnflow_solver_new(l, n, h.as_ptr(), u.as_ptr(), &mut solver) }, GnflowStatus::Ok);
        let mut d0 = GnflowDiagnostics::default();
        assert_eq!(unsafe { gnflow_solver_diagnostics(solver, 1.0, &mut d0) }, GnflowStatus::Ok);
        assert_eq!(unsafe { gnflow_solver_step(solver, 0.05, 20) }, GnflowStatus::Ok);
        let mut t = 0.0;
        assert_eq!(unsafe { gnflow_solver_time(solver, &mut t) }, GnflowStatus::Ok);
        assert!((t - 1.0).abs() < 1e-12);

        let (mut hr, mut ur) = (vec![0.0; n], vec![0.0; n]);
        assert_eq!(unsafe { gnflow_solver_reconstruct(solver, n, hr.as_mut_ptr(), ur.as_mut_ptr()) }, GnflowStatus::Ok);
        let (mut he, mut ue) = (vec![0.0; n], vec![0.0; n]);
        unsafe { gnflow_solitary_wave(l, n, 0.2, t, he.as_mut_ptr(), ue.as_mut_ptr()) };
        let err = hr.iter().zip(&he).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-3 * 1.2, "{err}");

        let mut d1 = GnflowDiagnostics::default();
        unsafe { gnflow_solver_diagnostics(solver, 1.0, &mut d1) };
        assert!((d1.mass - d0.mass).abs() < 1e-4 && d1.min_phix > 0.5);

        let mut small = vec![0.0; 4];
        assert_eq!(
            unsafe { gnflow_solver_state(solver, 4, small.as_mut_ptr(), small.as_mut_ptr()) },
            GnflowStatus::BufferTooSmall
        );
        assert_eq!(unsafe { gnflow_solver_step(solver, -1.0, 1) }, GnflowStatus::InvalidArgument);
        unsafe { gnflow_solver_free(solver) };
        unsafe { gnflow_solver_free(ptr::null_mut()) };
    }

    #[test]
    fn new_rejects_null_out_and_bad_input() {
        let h = vec![1.0; 32];
        let st = unsafe { gnflow_solver_new(10.0, 32, h.as_ptr(), h.as_ptr(), ptr::null_mut()) };
        assert_eq!(st, GnflowStatus::NullPointer);
        let mut solver = 1 as *mut GnflowSolver;
        let st = unsafe { gnflow_solver_new(10.0, 32, h.as_ptr(), ptr::null(), &mut solver) };
        assert_eq!(st, GnflowStatus::NullPointer);
        assert!(solver.is_null());
    }
}
