//! Periodic cubic Hermite interpolation with Fritsch–Carlson limiting.
//!
//! Node slopes come from the fourth-order centred difference. On every cell
//! whose neighbourhood is strictly monotone (the secants of the cell and of
//! both adjacent cells share one sign) the slopes are limited with the
//! Fritsch–Carlson rules, so the interpolant cannot overshoot the data there.
//! Cells that bracket a discrete extremum keep the unlimited slopes, which
//! keeps the interpolant fourth order at smooth extrema.
//!
//! The same machinery handles degree-one circle maps: values are lifted as
//! `v_{j+n} = v_j + shift`, so `x ↦ x + ψ(x)` is interpolated with
//! `shift = L` and stays strictly increasing.

/// A C¹ piecewise-cubic interpolant on a uniform periodic grid.
#[derive(Debug, Clone)]
pub struct PeriodicHermite {
    dx: f64,
    shift: f64,
    values: Vec<f64>,
    slopes: Vec<f64>,
}

impl PeriodicHermite {
    /// Interpolant of a periodic sample vector.
    pub fn periodic(values: &[f64], dx: f64) -> Self {
        Self::build(values, dx, 0.0)
    }

    /// Interpolant of a lifted sequence with `v_{j+n} = v_j + shift`.
    pub fn lifted(values: &[f64], dx: f64, shift: f64) -> Self {
        Self::build(values, dx, shift)
    }

    fn build(values: &[f64], dx: f64, shift: f64) -> Self {
        let n = values.len();
        let mut this = Self { dx, shift, values: values.to_vec(), slopes: vec![0.0; n] };
        let inv = 1.0 / (12.0 * dx);
        for j in 0..n {
            let j = j as isize;
            this.slopes[j as usize] = (-this.lifted_value(j + 2) + 8.0 * this.lifted_value(j + 1)
                - 8.0 * this.lifted_value(j - 1)
                + this.lifted_value(j - 2))
                * inv;
        }
        this.limit();
        this
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn slopes(&self) -> &[f64] {
        &self.slopes
    }

    /// Node value at any integer index, including the lift.
    pub fn lifted_value(&self, j: isize) -> f64 {
        let n = self.values.len() as isize;
        let wraps = j.div_euclid(n);
        self.values[j.rem_euclid(n) as usize] + self.shift * wraps as f64
    }

    fn secant(&self, k: isize) -> f64 {
        (self.lifted_value(k + 1) - self.lifted_value(k)) / self.dx
    }

    fn limit(&mut self) {
        let n = self.values.len();
        for k in 0..n {
            let ki = k as isize;
            let delta = self.secant(ki);
            let (before, after) = (self.secant(ki - 1), self.secant(ki + 1));
            let monotone = delta != 0.0
                && before.signum() == delta.signum()
                && after.signum() == delta.signum()
                && before != 0.0
                && after != 0.0;
            if !monotone {
                continue;
            }
            let next = (k + 1) % n;
            let mut alpha = self.slopes[k] / delta;
            let mut beta = self.slopes[next] / delta;
            if alpha < 0.0 {
                alpha = 0.0;
            }
            if beta < 0.0 {
                beta = 0.0;
            }
            let radius2 = alpha * alpha + beta * beta;
            if radius2 > 9.0 {
                let tau = 3.0 / radius2.sqrt();
                alpha *= tau;
                beta *= tau;
            }
            self.slopes[k] = alpha * delta;
            self.slopes[next] = beta * delta;
        }
    }

    /// Cell index (unreduced) and local coordinate in `[0, 1)`.
    fn locate(&self, x: f64) -> (isize, f64) {
        let q = x / self.dx;
        let k = q.floor();
        (k as isize, q - k)
    }

    fn cell_value(&self, k: isize, t: f64) -> f64 {
        let n = self.values.len() as isize;
        let (k0, k1) = (k.rem_euclid(n) as usize, (k + 1).rem_euclid(n) as usize);
        let y0 = self.lifted_value(k);
        let y1 = self.lifted_value(k + 1);
        let (m0, m1) = (self.slopes[k0] * self.dx, self.slopes[k1] * self.dx);
        let t2 = t * t;
        let t3 = t2 * t;
        (2.0 * t3 - 3.0 * t2 + 1.0) * y0
            + (t3 - 2.0 * t2 + t) * m0
            + (-2.0 * t3 + 3.0 * t2) * y1
            + (t3 - t2) * m1
    }

    fn cell_derivative(&self, k: isize, t: f64) -> f64 {
        let n = self.values.len() as isize;
        let (k0, k1) = (k.rem_euclid(n) as usize, (k + 1).rem_euclid(n) as usize);
        let y0 = self.lifted_value(k);
        let y1 = self.lifted_value(k + 1);
        let (m0, m1) = (self.slopes[k0] * self.dx, self.slopes[k1] * self.dx);
        let t2 = t * t;
        ((6.0 * t2 - 6.0 * t) * y0
            + (3.0 * t2 - 4.0 * t + 1.0) * m0
            + (-6.0 * t2 + 6.0 * t) * y1
            + (3.0 * t2 - 2.0 * t) * m1)
            / self.dx
    }

    pub fn eval(&self, x: f64) -> f64 {
        let (k, t) = self.locate(x);
        self.cell_value(k, t)
    }

    pub fn eval_derivative(&self, x: f64) -> f64 {
        let (k, t) = self.locate(x);
        self.cell_derivative(k, t)
    }

    /// Solves `p(x) = y` for a strictly increasing lifted interpolant.
    ///
    /// Returns `None` when the node values are not strictly increasing.
    pub fn invert_increasing(&self, y: f64, tolerance: f64) -> Option<f64> {
        let n = self.values.len() as isize;
        if self.shift <= 0.0 {
            return None;
        }
        let base = self.lifted_value(0);
        let wraps = ((y - base) / self.shift).floor();
        let target = y - wraps * self.shift;

        // bracket target in [v_k, v_{k+1}), k in 0..n
        let (mut lo, mut hi) = (0isize, n);
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if self.lifted_value(mid) <= target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let k = lo;
        let (y0, y1) = (self.lifted_value(k), self.lifted_value(k + 1));
        if !(y1 > y0) {
            return None;
        }

        let (mut a, mut b) = (0.0_f64, 1.0_f64);
        let mut t = ((target - y0) / (y1 - y0)).clamp(0.0, 1.0);
        for _ in 0..100 {
            let r = self.cell_value(k, t) - target;
            if r.abs() <= tolerance {
                break;
            }
            if r > 0.0 {
                b = t;
            } else {
                a = t;
            }
            let slope = self.cell_derivative(k, t) * self.dx;
            let newton = if slope > 0.0 { t - r / slope } else { f64::NAN };
            t = if newton > a && newton < b { newton } else { 0.5 * (a + b) };
            if b - a < f64::EPSILON {
                break;
            }
        }
        Some((k as f64 + t + wraps * n as f64) * self.dx)
    }
}
