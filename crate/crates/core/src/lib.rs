//! Modified Allen-Cahn reaction-diffusion on closed triangulated surfaces.
//!
//! The crate solves
//!
//! ```text
//! u_t = Δ_Γ u − (u³ − u + b) / ε²
//! ```
//!
//! on a triangle mesh with a Strang splitting: an exact closed-form reaction
//! half-step, a backward-Euler cotangent-Laplacian diffusion step that also
//! integrates the constant source `−b/ε²`, and a second reaction half-step.
//! With `b = 0` this is the plain Allen-Cahn flow; the sign and size of `b`
//! select spots, inverted spots, stripes or a uniform state.
//!
//! Module map:
//!
//! - [`mesh`]: loading, validation, vertex areas and cotangent weights.
//! - [`operators`]: stiffness assembly, the Laplace-Beltrami operator, the
//!   implicit diffusion step and the preconditioned CG solver behind it.
//! - [`reaction`]: the closed-form reaction substep and its max-norm bound.
//! - [`solver`]: energy, the Strang step and the time loop.
//! - [`one_dim`]: stationary 1D profiles, their first integral and the
//!   quadrature form of the solution.
//! - [`patterns`]: initial data, pattern classification, locality and
//!   isometry comparisons.
//! - [`export`] and [`config`]: file formats used by the command-line tool.

// `!(x > 0.0)` is used on purpose so NaN fails validation
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod export;
pub mod mesh;
pub mod one_dim;
pub mod operators;
pub mod patterns;
pub mod reaction;
pub mod roots;
pub mod solver;

pub use mesh::{AreaConvention, EdgeWeights, MassVector, MeshData, MeshError, TriangleMesh};
pub use operators::{LinearSolveSettings, OperatorError, SparseOperator};
pub use patterns::{PatternClass, PatternReport, SupportRegion};
pub use reaction::ReactionStepParams;
pub use solver::{Discretization, EnergyTrace, PhaseField, SolverConfig, SolverError};
