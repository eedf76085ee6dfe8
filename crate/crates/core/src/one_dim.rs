//! Stationary one-dimensional profiles of the modified Allen-Cahn equation
//! with `ε = 1`:
//!
//! ```text
//! u'' + (u − u³) − b = 0
//! ```
//!
//! Multiplying by `u'` gives the first integral `½u'² + F(u) = C` with
//! `F(u) = −¼(1 − u²)² − b·u`, so on a monotone branch
//!
//! ```text
//! x − a = ∫ du / √(2C + ½(1 − u²)² + 2bu)
//! ```
//!
//! For `b = 0` and `C = 0` this is the kink `u = tanh(x/√2)`.

use thiserror::Error;

/// Trajectories with `|u|` above this are reported as escaping.
pub const BLOW_UP: f64 = 1e3;
pub const DEFAULT_TOLERANCE: f64 = 1e-10;
/// Launch data and window for the concavity comparison at `b = ±1`.
pub const CANONICAL_LAUNCH: (f64, f64) = (0.0, 0.5);
pub const CANONICAL_WINDOW: (f64, f64) = (0.0, 1.5);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OneDimError {
    #[error("non-finite input: {0}")]
    NonFinite(&'static str),
    #[error("invalid interval [{0}, {1}]")]
    InvalidSpan(f64, f64),
    #[error("invalid settings: {0}")]
    InvalidSettings(String),
    #[error("solution escapes (|u| > {BLOW_UP}) at x = {x}")]
    BlowUp { x: f64, u: f64 },
    #[error("step size underflow at x = {0}")]
    StepUnderflow(f64),
    #[error("step budget exhausted at x = {0}")]
    TooManySteps(f64),
    #[error("radicand is negative at u = {u} ({value})")]
    Domain { u: f64, value: f64 },
    #[error("grid must be strictly increasing and start at or after u_a")]
    InvalidGrid,
    #[error("quadrature did not converge between u = {0} and u = {1}")]
    QuadratureFailed(f64, f64),
}

/// Samples of a stationary solution on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile1D {
    pub b: f64,
    pub x: Vec<f64>,
    pub u: Vec<f64>,
    pub du: Vec<f64>,
}

impl Profile1D {
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn spacing(&self) -> f64 {
        if self.x.len() < 2 {
            0.0
        } else {
            self.x[1] - self.x[0]
        }
    }

    /// Mean of the centered second differences of `u`.
    pub fn mean_second_difference(&self) -> f64 {
        let n = self.u.len();
        if n < 3 {
            return 0.0;
        }
        let h = self.spacing();
        let sum: f64 = self.u.windows(3).map(|w| (w[2] - 2.0 * w[1] + w[0]) / (h * h)).sum();
        sum / (n - 2) as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrationSettings {
    /// Absolute and relative local error target.
    pub tolerance: f64,
    /// Output grid points including both ends.
    pub samples: usize,
    pub max_steps: usize,
}

impl Default for IntegrationSettings {
    fn default() -> Self {
        Self {
            tolerance: DEFAULT_TOLERANCE,
            samples: 201,
            max_steps: 1_000_000,
        }
    }
}

/// `F(u) = −¼(1 − u²)² − b·u`
pub fn potential(u: f64, b: f64) -> f64 {
    let s = 1.0 - u * u;
    -0.25 * s * s - b * u
}

/// `u'' + u − u³ − b`
pub fn residual(u: f64, d2u: f64, b: f64) -> f64 {
    d2u + u - u * u * u - b
}

/// The `b = 0` kink `tanh(x/√2)` and its first two derivatives.
pub fn kink(x: f64) -> (f64, f64, f64) {
    let t = (x / std::f64::consts::SQRT_2).tanh();
    let s = 1.0 - t * t;
    (t, s / std::f64::consts::SQRT_2, -t * s)
}

fn rhs(y: [f64; 2], b: f64) -> [f64; 2] {
    [y[1], y[0] * y[0] * y[0] - y[0] + b]
}

// Dormand–Prince 5(4) tableau; the node offsets are not needed for an
// autonomous system
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// fifth- minus fourth-order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn axpy(y: [f64; 2], h: f64, terms: &[(f64, [f64; 2])]) -> [f64; 2] {
    let mut out = y;
    for (c, k) in terms {
        out[0] += h * c * k[0];
        out[1] += h * c * k[1];
    }
    out
}

/// One DP5 step: new state and error estimate.
fn dp_step(y: [f64; 2], h: f64, b: f64) -> ([f64; 2], [f64; 2]) {
    let k1 = rhs(y, b);
    let k2 = rhs(axpy(y, h, &[(A21, k1)]), b);
    let k3 = rhs(axpy(y, h, &[(A31, k1), (A32, k2)]), b);
    let k4 = rhs(axpy(y, h, &[(A41, k1), (A42, k2), (A43, k3)]), b);
    let k5 = rhs(axpy(y, h, &[(A51, k1), (A52, k2), (A53, k3), (A54, k4)]), b);
    let k6 = rhs(axpy(y, h, &[(A61, k1), (A62, k2), (A63, k3), (A64, k4), (A65, k5)]), b);
    let y5 = axpy(y, h, &[(B1, k1), (B3, k3), (B4, k4), (B5, k5), (B6, k6)]);
    let k7 = rhs(y5, b);
    let err = [
        h * (E1 * k1[0] + E3 * k3[0] + E4 * k4[0] + E5 * k5[0] + E6 * k6[0] + E7 * k7[0]),
        h * (E1 * k1[1] + E3 * k3[1] + E4 * k4[1] + E5 * k5[1] + E6 * k6[1] + E7 * k7[1]),
    ];
    (y5, err)
}

/// Integrates `u'' = u³ − u + b` from `(u_a, du_a)` at `x_span.0` to
/// `x_span.1`, sampling on a uniform grid that the adaptive steps land on
/// exactly.
pub fn integrate_stationary(
    u_a: f64,
    du_a: f64,
    b: f64,
    x_span: (f64, f64),
    settings: &IntegrationSettings,
) -> Result<Profile1D, OneDimError> {
    if !(u_a.is_finite() && du_a.is_finite()) {
        return Err(OneDimError::NonFinite("initial data"));
    }
    if !b.is_finite() {
        return Err(OneDimError::NonFinite("b"));
    }
    let (x0, x1) = x_span;
    if !(x0.is_finite() && x1.is_finite() && x1 > x0) {
        return Err(OneDimError::InvalidSpan(x0, x1));
    }
    if !(settings.tolerance > 0.0) || settings.samples < 2 {
        return Err(OneDimError::InvalidSettings(format!(
            "tolerance {} and samples {} (need > 0 and ≥ 2)",
            settings.tolerance, settings.samples
        )));
    }
    let tol = settings.tolerance;
    let n = settings.samples;
    let dx = (x1 - x0) / (n - 1) as f64;
    let grid = |k: usize| if k == n - 1 { x1 } else { x0 + dx * k as f64 };

    let mut profile = Profile1D {
        b,
        x: vec![x0],
        u: vec![u_a],
        du: vec![du_a],
    };
    let mut y = [u_a, du_a];
    let mut x = x0;
    let mut h = dx.min(0.01);
    let mut steps = 0;
    for k in 1..n {
        let target = grid(k);
        while x < target {
            steps += 1;
            if steps > settings.max_steps {
                return Err(OneDimError::TooManySteps(x));
            }
            let last = x + h >= target;
            let step = if last { target - x } else { h };
            let (y_new, e) = dp_step(y, step, b);
            let scale = |i: usize| tol + tol * y[i].abs().max(y_new[i].abs());
            let err = (e[0] / scale(0)).abs().max((e[1] / scale(1)).abs());
            if !err.is_finite() || err > 1.0 {
                let factor = if err.is_finite() {
                    (0.9 * err.powf(-0.2)).max(0.2)
                } else {
                    0.2
                };
                h = step * factor;
                if h < 1e-14 * (1.0 + x.abs()) {
                    return Err(OneDimError::StepUnderflow(x));
                }
                continue;
            }
            x = if last { target } else { x + step };
            y = y_new;
            if y[0].abs() > BLOW_UP {
                return Err(OneDimError::BlowUp { x, u: y[0] });
            }
            let grow = if err > 0.0 {
                (0.9 * err.powf(-0.2)).min(5.0)
            } else {
                5.0
            };
            // keep the proposal for the next step when this one was clipped
            if !last || step >= h {
                h = step * grow;
            }
        }
        profile.x.push(target);
        profile.u.push(y[0]);
        profile.du.push(y[1]);
    }
    Ok(profile)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FirstIntegral {
    /// `½u'² + F(u)` at the first sample.
    pub c: f64,
    /// Largest deviation from `c` over the samples.
    pub drift: f64,
}

pub fn first_integral(profile: &Profile1D) -> FirstIntegral {
    let value = |i: usize| 0.5 * profile.du[i] * profile.du[i] + potential(profile.u[i], profile.b);
    if profile.is_empty() {
        return FirstIntegral { c: 0.0, drift: 0.0 };
    }
    let c = value(0);
    let drift = (0..profile.len()).map(|i| (value(i) - c).abs()).fold(0.0, f64::max);
    FirstIntegral { c, drift }
}

/// `2(C − F(u)) = 2C + ½(1 − u²)² + 2bu`, the square of `u'`.
pub fn radicand(u: f64, c: f64, b: f64) -> f64 {
    2.0 * (c - potential(u, b))
}

/// tanh-sinh rule on `[a, b]`, refined until two levels agree.
fn tanh_sinh(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Option<f64> {
    use std::f64::consts::FRAC_PI_2;
    let half = 0.5 * (b - a);
    // nodes at distance `d` from an end, computed without cancellation
    let eval = |s: f64| -> f64 {
        let p = FRAC_PI_2 * s.sinh();
        let w = FRAC_PI_2 * s.cosh() / (p.cosh() * p.cosh());
        let d = 2.0 / (1.0 + (2.0 * p.abs()).exp()) * half; // half·(1 − |tanh p|)
        if d <= 0.0 {
            return 0.0;
        }
        let x = if p >= 0.0 { b - d } else { a + d };
        let v = f(x);
        if v.is_finite() {
            w * v
        } else {
            0.0
        }
    };
    let s_max = 4.0;
    let mut h = 0.5;
    let mut sum = eval(0.0);
    let mut k = 1;
    while (k as f64) * h <= s_max {
        let s = k as f64 * h;
        sum += eval(s) + eval(-s);
        k += 1;
    }
    let mut prev = sum * h * half;
    for _ in 0..12 {
        h /= 2.0;
        let mut k = 1;
        while (k as f64) * h <= s_max {
            let s = k as f64 * h;
            sum += eval(s) + eval(-s);
            k += 2;
        }
        let est = sum * h * half;
        if (est - prev).abs() <= tol * est.abs().max(1e-300) {
            return Some(est);
        }
        prev = est;
    }
    None
}

/// `x(u) − a` for each `u` in `u_grid` on the increasing branch through
/// `(a, u_a)` with first-integral constant `c`.
pub fn quadrature_solution(c: f64, b: f64, u_a: f64, u_grid: &[f64]) -> Result<Vec<f64>, OneDimError> {
    if !(c.is_finite() && b.is_finite() && u_a.is_finite()) || u_grid.iter().any(|u| !u.is_finite()) {
        return Err(OneDimError::NonFinite("quadrature input"));
    }
    if u_grid.first().is_some_and(|&u| u < u_a) || u_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(OneDimError::InvalidGrid);
    }
    let Some(&top) = u_grid.last() else {
        return Ok(Vec::new());
    };
    // scan the open range for a sign change of the radicand
    let scan = 1000;
    for k in 1..scan {
        let u = u_a + (top - u_a) * k as f64 / scan as f64;
        let r = radicand(u, c, b);
        if r < 0.0 {
            return Err(OneDimError::Domain { u, value: r });
        }
    }
    let f = |u: f64| {
        let r = radicand(u, c, b);
        1.0 / r.sqrt()
    };
    let mut out = Vec::with_capacity(u_grid.len());
    let mut x = 0.0;
    let mut lo = u_a;
    for &u in u_grid {
        if u > lo {
            let r = radicand(u, c, b);
            if r < 0.0 {
                return Err(OneDimError::Domain { u, value: r });
            }
            x += tanh_sinh(&f, lo, u, 1e-12).ok_or(OneDimError::QuadratureFailed(lo, u))?;
            lo = u;
        }
        out.push(x);
    }
    Ok(out)
}
