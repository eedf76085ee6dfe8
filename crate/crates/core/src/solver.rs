//! Strang-split time stepping for the modified Allen-Cahn flow.
//!
//! One step advances `U^n` to `U^{n+1}` by
//!
//! 1. the exact reaction flow over `Δt/2`,
//! 2. backward-Euler diffusion with the constant source `−b/ε²` over `Δt`,
//! 3. the exact reaction flow over `Δt/2`.
//!
//! The energy monitored along a run is
//! `J(u) = ½ uᵀ W u + Σ_i A_i F_m(u_i) / ε²` with
//! `F_m(u) = ¼(u² − 1)² + b u`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mesh::{cotan_weights, vertex_areas, AreaConvention, MeshError, TriangleMesh};
use crate::operators::{assemble_stiffness, diffusion_step, LinearSolveSettings, OperatorError, SparseOperator};
use crate::reaction::{max_abs, reaction_in_place, ReactionError, ReactionStepParams};

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("field has {actual} values but the mesh has {expected} vertices")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("non-finite value at vertex {vertex} after step {step}")]
    NonFinite { step: u64, vertex: usize },
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error(transparent)]
    Reaction(#[from] ReactionError),
}

/// Everything needed to describe one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Offset in the reaction term `u³ − u + b`.
    pub b: f64,
    /// Interface width.
    pub epsilon: f64,
    pub dt: f64,
    pub max_iterations: u64,
    /// Seed for generated initial data.
    pub seed: u64,
    /// Stop once `‖U^{n+1} − U^n‖∞ / ‖U^n‖∞` drops below this. Zero disables.
    pub stop_tolerance: f64,
    /// Record the energy every this many steps (and always at the end).
    pub energy_log_stride: u64,
    pub linear_tolerance: f64,
    pub linear_max_iterations: Option<usize>,
    pub area_convention: AreaConvention,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            b: 0.0,
            epsilon: 1.0,
            dt: 0.1,
            max_iterations: 1000,
            seed: 0,
            stop_tolerance: 1e-7,
            energy_log_stride: 10,
            linear_tolerance: 1e-9,
            linear_max_iterations: None,
            area_convention: AreaConvention::Barycentric,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), SolverError> {
        let bad = |m: String| Err(SolverError::InvalidConfig(m));
        if !self.b.is_finite() {
            return bad(format!("b must be finite, got {}", self.b));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return bad(format!("epsilon must be positive, got {}", self.epsilon));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if self.max_iterations < 1 {
            return bad("max_iterations must be at least 1".into());
        }
        if !(self.stop_tolerance >= 0.0) {
            return bad(format!(
                "stop_tolerance must be non-negative, got {}",
                self.stop_tolerance
            ));
        }
        if self.energy_log_stride < 1 {
            return bad("energy_log_stride must be at least 1".into());
        }
        self.linear_settings().validate()?;
        Ok(())
    }

    pub fn linear_settings(&self) -> LinearSolveSettings {
        LinearSolveSettings {
            tolerance: self.linear_tolerance,
            max_iterations: self.linear_max_iterations,
        }
    }
}

/// Per-vertex state at a given step.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseField {
    pub values: Vec<f64>,
    pub time_level: u64,
}

impl PhaseField {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values, time_level: 0 }
    }

    pub fn constant(n: usize, value: f64) -> Self {
        Self::new(vec![value; n])
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.values)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergySample {
    pub step: u64,
    pub energy: f64,
    pub max_abs_u: f64,
    /// Area-weighted mean.
    pub mean_u: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct EnergyTrace {
    pub samples: Vec<EnergySample>,
}

impl EnergyTrace {
    fn push(&mut self, sample: EnergySample) {
        debug_assert!(self.samples.last().is_none_or(|s| s.step < sample.step));
        self.samples.push(sample);
    }

    pub fn first(&self) -> Option<&EnergySample> {
        self.samples.first()
    }

    pub fn last(&self) -> Option<&EnergySample> {
        self.samples.last()
    }

    /// Largest relative energy increase between consecutive samples,
    /// `(E_{k+1} − E_k) / max(|E_k|, |E_{k+1}|)`; negative when the energy
    /// strictly decreased everywhere.
    pub fn max_relative_increase(&self) -> f64 {
        self.samples
            .windows(2)
            .map(|w| {
                let (a, b) = (w[0].energy, w[1].energy);
                (b - a) / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Mesh plus the assembled operator, built once per surface.
#[derive(Debug, Clone)]
pub struct Discretization {
    pub mesh: TriangleMesh,
    pub operator: SparseOperator,
}

impl Discretization {
    pub fn new(mesh: TriangleMesh, convention: AreaConvention) -> Result<Self, SolverError> {
        let weights = cotan_weights(&mesh)?;
        let mass = vertex_areas(&mesh, convention)?;
        let operator = assemble_stiffness(&mesh, &weights, mass)?;
        Ok(Self { mesh, operator })
    }

    pub fn vertex_count(&self) -> usize {
        self.mesh.vertex_count()
    }

    pub fn area(&self) -> f64 {
        self.operator.mass().total()
    }

    /// Area-weighted mean of a per-vertex field.
    pub fn mean(&self, u: &[f64]) -> f64 {
        self.operator.mass().integrate(u) / self.area()
    }
}

/// `F_m(u) = ¼(u² − 1)² + b u`
pub fn potential(u: f64, b: f64) -> f64 {
    let w = u * u - 1.0;
    0.25 * w * w + b * u
}

/// `½ uᵀ W u + Σ_i A_i F_m(u_i) / ε²`
pub fn discrete_energy(op: &SparseOperator, u: &[f64], b: f64, epsilon: f64) -> Result<f64, SolverError> {
    if u.len() != op.dim() {
        return Err(SolverError::DimensionMismatch {
            expected: op.dim(),
            actual: u.len(),
        });
    }
    let bulk: f64 = op
        .mass()
        .as_slice()
        .iter()
        .zip(u)
        .map(|(a, &x)| a * potential(x, b))
        .sum();
    Ok(op.dirichlet_energy(u) + bulk / (epsilon * epsilon))
}

/// One Strang step. Increments `time_level`.
pub fn strang_step(state: &PhaseField, config: &SolverConfig, op: &SparseOperator) -> Result<PhaseField, SolverError> {
    if state.len() != op.dim() {
        return Err(SolverError::DimensionMismatch {
            expected: op.dim(),
            actual: state.len(),
        });
    }
    let half = ReactionStepParams::new(config.dt / 2.0, config.epsilon)?;
    let decay = half.decay();
    let mut u = state.values.clone();
    if let Some(vertex) = u.iter().position(|v| !v.is_finite()) {
        return Err(SolverError::NonFinite {
            step: state.time_level,
            vertex,
        });
    }
    reaction_in_place(&mut u, decay);
    let mut u = diffusion_step(op, &u, config.dt, config.b, config.epsilon, &config.linear_settings())?;
    reaction_in_place(&mut u, decay);
    let next = PhaseField {
        values: u,
        time_level: state.time_level + 1,
    };
    if let Some(vertex) = next.values.iter().position(|v| !v.is_finite()) {
        return Err(SolverError::NonFinite {
            step: next.time_level,
            vertex,
        });
    }
    Ok(next)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    MaxIterations,
    Converged,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub field: PhaseField,
    pub trace: EnergyTrace,
    pub termination: Termination,
}

/// A failed run, carrying what was computed before the failure.
#[derive(Debug, Error)]
#[error("run failed at step {}: {source}", last.time_level + 1)]
pub struct RunError {
    #[source]
    pub source: SolverError,
    pub last: PhaseField,
    pub trace: EnergyTrace,
}

fn sample(disc: &Discretization, u: &PhaseField, config: &SolverConfig) -> Result<EnergySample, SolverError> {
    Ok(EnergySample {
        step: u.time_level,
        energy: discrete_energy(&disc.operator, &u.values, config.b, config.epsilon)?,
        max_abs_u: u.max_abs(),
        mean_u: disc.mean(&u.values),
    })
}

fn relative_change(prev: &[f64], next: &[f64]) -> f64 {
    let diff = prev.iter().zip(next).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    let scale = max_abs(prev);
    if scale > 0.0 {
        diff / scale
    } else {
        diff
    }
}

/// Runs up to `max_iterations` steps, stopping early on `stop_tolerance`.
///
/// The trace holds step 0, every `energy_log_stride`-th step and the last
/// step. Deterministic for a given input: all reductions are sequential.
pub fn run_with(disc: &Discretization, u0: PhaseField, config: &SolverConfig) -> Result<RunOutcome, Box<RunError>> {
    let fail = |source: SolverError, last: PhaseField, trace: EnergyTrace| Box::new(RunError { source, last, trace });
    let mut trace = EnergyTrace::default();
    if let Err(e) = config.validate() {
        return Err(fail(e, u0, trace));
    }
    if u0.len() != disc.vertex_count() {
        let e = SolverError::DimensionMismatch {
            expected: disc.vertex_count(),
            actual: u0.len(),
        };
        return Err(fail(e, u0, trace));
    }
    match sample(disc, &u0, config) {
        Ok(s) => trace.push(s),
        Err(e) => return Err(fail(e, u0, trace)),
    }
    let start = u0.time_level;
    let mut state = u0;
    let mut termination = Termination::MaxIterations;
    for _ in 0..config.max_iterations {
        let next = match strang_step(&state, config, &disc.operator) {
            Ok(next) => next,
            Err(e) => return Err(fail(e, state, trace)),
        };
        let change = relative_change(&state.values, &next.values);
        state = next;
        let done = change < config.stop_tolerance;
        let last = done || state.time_level - start == config.max_iterations;
        if (state.time_level - start).is_multiple_of(config.energy_log_stride) || last {
            match sample(disc, &state, config) {
                Ok(s) => trace.push(s),
                Err(e) => return Err(fail(e, state, trace)),
            }
        }
        if done {
            termination = Termination::Converged;
            break;
        }
    }
    Ok(RunOutcome {
        field: state,
        trace,
        termination,
    })
}

/// Builds the discretization for `mesh` and runs from `u0`.
pub fn run(mesh: &TriangleMesh, u0: PhaseField, config: &SolverConfig) -> Result<RunOutcome, Box<RunError>> {
    let disc = match Discretization::new(mesh.clone(), config.area_convention) {
        Ok(d) => d,
        Err(source) => {
            return Err(Box::new(RunError {
                source,
                last: u0,
                trace: EnergyTrace::default(),
            }))
        }
    };
    run_with(&disc, u0, config)
}
