//! Exact flow of the reaction substep `u̇ = (u − u³) / ε²`.
//!
//! The ODE is of Bernoulli type and integrates in closed form:
//!
//! ```text
//! u(τ) = u₀ / √( u₀² + (1 − u₀²)·e^{−2τ/ε²} )
//! ```
//!
//! which is the usual `u₀ / √(e + u₀²(1 − e))` rearranged so that `u₀ = ±1`
//! gives a radicand of exactly one. The map is odd, monotone, fixes
//! `{−1, 0, 1}`, and never increases `max(‖u‖∞, 1)`.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ReactionError {
    #[error("non-finite value {value} at vertex {index}")]
    NonFinite { index: usize, value: f64 },
    #[error("reaction parameters must be positive (dt_half = {dt_half}, epsilon = {epsilon})")]
    InvalidParams { dt_half: f64, epsilon: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReactionStepParams {
    /// Duration of this substep; half the splitting step in Strang splitting.
    pub dt_half: f64,
    pub epsilon: f64,
}

impl ReactionStepParams {
    pub fn new(dt_half: f64, epsilon: f64) -> Result<Self, ReactionError> {
        let p = Self { dt_half, epsilon };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), ReactionError> {
        if self.dt_half > 0.0 && self.epsilon > 0.0 && self.dt_half.is_finite() && self.epsilon.is_finite() {
            Ok(())
        } else {
            Err(ReactionError::InvalidParams {
                dt_half: self.dt_half,
                epsilon: self.epsilon,
            })
        }
    }

    /// `e^{−2τ/ε²}`
    pub fn decay(&self) -> f64 {
        (-2.0 * self.dt_half / (self.epsilon * self.epsilon)).exp()
    }
}

/// Closed-form flow for a single value, with `decay = e^{−2τ/ε²}`.
#[inline]
pub fn reaction_flow(u: f64, decay: f64) -> f64 {
    let u2 = u * u;
    let radicand = u2 + (1.0 - u2) * decay;
    debug_assert!(radicand > 0.0 || u == 0.0, "radicand {radicand} for u = {u}");
    if u == 0.0 {
        return u;
    }
    // the exact flow never leaves [−max(|u|, 1), max(|u|, 1)]; clamp away
    // the last-bit rounding that could otherwise step outside it
    let bound = u.abs().max(1.0);
    (u / radicand.sqrt()).clamp(-bound, bound)
}

/// Applies the exact reaction flow over `params.dt_half` to every entry.
pub fn reaction_half_step(u: &[f64], params: &ReactionStepParams) -> Result<Vec<f64>, ReactionError> {
    params.validate()?;
    if let Some((index, &value)) = u.iter().enumerate().find(|(_, v)| !v.is_finite()) {
        return Err(ReactionError::NonFinite { index, value });
    }
    let decay = params.decay();
    Ok(u.iter().map(|&x| reaction_flow(x, decay)).collect())
}

/// In-place variant used inside the time loop. Inputs are assumed finite.
pub(crate) fn reaction_in_place(u: &mut [f64], decay: f64) {
    for x in u {
        *x = reaction_flow(*x, decay);
    }
}

pub fn max_abs(u: &[f64]) -> f64 {
    u.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Whether `‖step(u)‖∞ ≤ max(‖u‖∞, 1)` holds for this input.
pub fn reaction_step_bound(u: &[f64], params: &ReactionStepParams) -> bool {
    match reaction_half_step(u, params) {
        Ok(out) => max_abs(&out) <= max_abs(u).max(1.0),
        Err(_) => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn step1(u: f64, dt_half: f64, eps: f64) -> f64 {
        reaction_half_step(&[u], &ReactionStepParams::new(dt_half, eps).unwrap()).unwrap()[0]
    }

    /// Classical RK4 on u̇ = (u − u³)/ε² with many small steps.
    fn rk4(u0: f64, t: f64, eps: f64, steps: usize) -> f64 {
        let f = |u: f64| (u - u * u * u) / (eps * eps);
        let h = t / steps as f64;
        let mut u = u0;
        for _ in 0..steps {
            let k1 = f(u);
            let k2 = f(u + 0.5 * h * k1);
            let k3 = f(u + 0.5 * h * k2);
            let k4 = f(u + h * k3);
            u += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        u
    }

    #[test]
    fn fixed_points() {
        assert_eq!(step1(0.0, 0.7, 0.3), 0.0);
        assert_eq!(step1(1.0, 0.7, 0.3), 1.0);
        assert_eq!(step1(-1.0, 0.7, 0.3), -1.0);
    }

    #[test]
    fn half_point_matches_ode() {
        // dt/ε² = 0.5
        let closed = step1(0.5, 0.5, 1.0);
        let reference = rk4(0.5, 0.5, 1.0, 20_000);
        assert!((closed - reference).abs() < 1e-10, "{closed} vs {reference}");
    }

    #[test]
    fn rejects_non_finite() {
        let p = ReactionStepParams::new(0.1, 1.0).unwrap();
        assert!(matches!(
            reaction_half_step(&[0.0, f64::NAN], &p),
            Err(ReactionError::NonFinite { index: 1, .. })
        ));
        assert!(matches!(
            reaction_half_step(&[f64::INFINITY], &p),
            Err(ReactionError::NonFinite { index: 0, .. })
        ));
        assert!(ReactionStepParams::new(0.0, 1.0).is_err());
        assert!(ReactionStepParams::new(0.1, -1.0).is_err());
    }

    #[test]
    fn lemma_cases() {
        let p = ReactionStepParams::new(0.25, 0.5).unwrap();
        let small = [0.7, -0.3, 0.1, -0.7];
        assert!(reaction_step_bound(&small, &p));
        assert!(max_abs(&reaction_half_step(&small, &p).unwrap()) <= 1.0);
        let big = [3.0, -2.0, 0.5];
        assert!(reaction_step_bound(&big, &p));
        assert!(max_abs(&reaction_half_step(&big, &p).unwrap()) <= 3.0);
        assert!(reaction_step_bound(&[0.0; 5], &p));
    }

    proptest! {
        #[test]
        fn odd_symmetry(u in -10.0f64..10.0, dt in 1e-4f64..5.0, eps in 0.05f64..2.0) {
            prop_assert_eq!(step1(-u, dt, eps), -step1(u, dt, eps));
        }

        #[test]
        fn monotone_toward_wells(u in 1e-6f64..8.0, dt in 1e-3f64..5.0, eps in 0.1f64..2.0) {
            let out = step1(u, dt, eps);
            if u < 1.0 {
                prop_assert!(out >= u && out <= 1.0);
            } else if u > 1.0 {
                prop_assert!(out <= u && out >= 1.0);
            }
        }

        #[test]
        fn semigroup(u in -4.0f64..4.0, dt in 1e-3f64..3.0, eps in 0.1f64..2.0) {
            let two = step1(step1(u, dt / 2.0, eps), dt / 2.0, eps);
            let one = step1(u, dt, eps);
            prop_assert!((two - one).abs() <= 1e-12 * one.abs().max(1e-300));
        }

        #[test]
        fn stability_bound(u in prop::collection::vec(-5.0f64..5.0, 1..40), dt in 1e-6f64..10.0, eps in 0.05f64..2.0) {
            let p = ReactionStepParams::new(dt, eps).unwrap();
            prop_assert!(reaction_step_bound(&u, &p));
        }
    }
}
