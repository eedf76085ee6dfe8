//! Discrete Laplace-Beltrami operator and the implicit diffusion substep.
//!
//! The stiffness matrix `W` is assembled from cotangent weights so that
//! `½ uᵀ W u` is the Dirichlet energy of the piecewise-linear interpolant:
//!
//! ```text
//! W_ij = −½ w_ij        (j in the one-ring of i)
//! W_ii =  ½ Σ_j w_ij
//! ```
//!
//! `W` is positive semidefinite on meshes without obtuse angles and
//! annihilates constants. With the lumped mass `A`, the geometric Laplacian
//! is `Δ_Γ ≈ −A⁻¹ W`; every public function here returns that sign.

use thiserror::Error;

use crate::mesh::{EdgeWeights, MassVector, TriangleMesh};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OperatorError {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("conjugate gradient did not converge in {iterations} iterations (relative residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },
    #[error("non-finite value in conjugate gradient iterate at iteration {0}")]
    NonFinite(usize),
    #[error("system matrix is not positive definite (pᵀMp = {0:e}); reduce the time step")]
    Indefinite(f64),
    #[error("invalid solver settings: {0}")]
    InvalidSettings(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// Square sparse matrix in compressed-row form with sorted columns.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds from per-row `(column, value)` lists. Duplicates are summed.
    pub fn from_rows(rows: Vec<Vec<(usize, f64)>>) -> Self {
        let n = rows.len();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for mut row in rows {
            row.sort_by_key(|&(c, _)| c);
            for (c, v) in row {
                assert!(c < n, "column {c} out of range");
                if col_idx.len() > *row_ptr.last().unwrap() && *col_idx.last().unwrap() == c {
                    *values.last_mut().unwrap() += v;
                } else {
                    col_idx.push(c);
                    values.push(v);
                }
            }
            row_ptr.push(col_idx.len());
        }
        Self {
            n,
            row_ptr,
            col_idx,
            values,
        }
    }

    /// Dense row-major input; exact zeros are dropped.
    pub fn from_dense(rows: &[Vec<f64>]) -> Self {
        Self::from_rows(
            rows.iter()
                .map(|r| {
                    r.iter()
                        .enumerate()
                        .filter(|(_, v)| **v != 0.0)
                        .map(|(c, v)| (c, *v))
                        .collect()
                })
                .collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[range.clone()]
            .iter()
            .copied()
            .zip(self.values[range].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.col_idx[range.clone()].binary_search(&j) {
            Ok(k) => self.values[range.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    /// `y = M x`, rows accumulated in column order.
    pub fn mul_into(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate().take(self.n) {
            let mut acc = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            *yi = acc;
        }
    }

    pub fn mul(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.mul_into(x, &mut y);
        y
    }
}

/// Something CG can solve with: a symmetric matrix and its diagonal.
pub trait LinearOperator {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[f64], y: &mut [f64]);
    fn diagonal(&self) -> Vec<f64>;
}

impl LinearOperator for CsrMatrix {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.mul_into(x, y)
    }

    fn diagonal(&self) -> Vec<f64> {
        CsrMatrix::diagonal(self)
    }
}

/// Stiffness matrix `W` together with the lumped mass `A`.
#[derive(Debug, Clone)]
pub struct SparseOperator {
    stiffness: CsrMatrix,
    mass: MassVector,
}

impl SparseOperator {
    pub fn dim(&self) -> usize {
        self.stiffness.dim()
    }

    pub fn stiffness(&self) -> &CsrMatrix {
        &self.stiffness
    }

    pub fn mass(&self) -> &MassVector {
        &self.mass
    }

    /// `½ uᵀ W u`, summed over edges as `½ Σ_{i<j} −W_ij (u_i − u_j)²` so
    /// that constants give exactly zero.
    pub fn dirichlet_energy(&self, u: &[f64]) -> f64 {
        let w = &self.stiffness;
        let mut acc = 0.0;
        for i in 0..w.dim() {
            for (j, v) in w.row(i) {
                if j > i {
                    let d = u[i] - u[j];
                    acc -= v * d * d;
                }
            }
        }
        0.5 * acc
    }

    /// The backward-Euler system matrix `A + dt·W`, applied matrix-free.
    pub fn shifted(&self, dt: f64) -> MassShifted<'_> {
        MassShifted { op: self, dt }
    }
}

/// `A + dt·W`
#[derive(Debug, Clone, Copy)]
pub struct MassShifted<'a> {
    op: &'a SparseOperator,
    dt: f64,
}

impl LinearOperator for MassShifted<'_> {
    fn dim(&self) -> usize {
        self.op.dim()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.op.stiffness.mul_into(x, y);
        let a = self.op.mass.as_slice();
        for i in 0..y.len() {
            y[i] = a[i] * x[i] + self.dt * y[i];
        }
    }

    fn diagonal(&self) -> Vec<f64> {
        let a = self.op.mass.as_slice();
        self.op
            .stiffness
            .diagonal()
            .into_iter()
            .zip(a)
            .map(|(w, m)| m + self.dt * w)
            .collect()
    }
}

/// Assembles `W` from per-edge cotangent weights.
///
/// The diagonal is accumulated from the same halved weights as the row's
/// off-diagonals, so rows sum to zero up to rounding.
pub fn assemble_stiffness(
    mesh: &TriangleMesh,
    weights: &EdgeWeights,
    mass: MassVector,
) -> Result<SparseOperator, OperatorError> {
    let n = mesh.vertex_count();
    if weights.len() != mesh.edge_count() {
        return Err(OperatorError::DimensionMismatch {
            expected: mesh.edge_count(),
            actual: weights.len(),
        });
    }
    if mass.len() != n {
        return Err(OperatorError::DimensionMismatch {
            expected: n,
            actual: mass.len(),
        });
    }
    let mut row_ptr = Vec::with_capacity(n + 1);
    let mut col_idx = Vec::with_capacity(n + 2 * mesh.edge_count());
    let mut values = Vec::with_capacity(n + 2 * mesh.edge_count());
    row_ptr.push(0);
    for i in 0..n {
        let ring = mesh.neighbors(i);
        let ring_edges = mesh.neighbor_edges(i);
        let split = ring.partition_point(|&j| j < i);
        let mut diag = 0.0;
        for &e in ring_edges {
            diag += 0.5 * weights[e];
        }
        for k in 0..split {
            col_idx.push(ring[k]);
            values.push(-0.5 * weights[ring_edges[k]]);
        }
        col_idx.push(i);
        values.push(diag);
        for k in split..ring.len() {
            col_idx.push(ring[k]);
            values.push(-0.5 * weights[ring_edges[k]]);
        }
        row_ptr.push(col_idx.len());
    }
    Ok(SparseOperator {
        stiffness: CsrMatrix {
            n,
            row_ptr,
            col_idx,
            values,
        },
        mass,
    })
}

fn check_dim(expected: usize, actual: usize) -> Result<(), OperatorError> {
    if expected != actual {
        return Err(OperatorError::DimensionMismatch { expected, actual });
    }
    Ok(())
}

/// `Δ_Γ u ≈ −A⁻¹ W u`.
pub fn laplacian_apply(op: &SparseOperator, u: &[f64]) -> Result<Vec<f64>, OperatorError> {
    check_dim(op.dim(), u.len())?;
    let mut out = op.stiffness.mul(u);
    for (o, a) in out.iter_mut().zip(op.mass.as_slice()) {
        *o = -*o / a;
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearSolveSettings {
    /// Relative residual `‖Mx − rhs‖ / ‖rhs‖` to reach.
    pub tolerance: f64,
    /// `None` means ten times the system dimension.
    pub max_iterations: Option<usize>,
}

impl Default for LinearSolveSettings {
    fn default() -> Self {
        Self {
            tolerance: 1e-9,
            max_iterations: None,
        }
    }
}

impl LinearSolveSettings {
    pub fn validate(&self) -> Result<(), OperatorError> {
        if !(self.tolerance > 0.0) {
            return Err(OperatorError::InvalidSettings(format!(
                "tolerance must be positive, got {}",
                self.tolerance
            )));
        }
        if self.max_iterations == Some(0) {
            return Err(OperatorError::InvalidSettings(
                "max_iterations must be at least 1".into(),
            ));
        }
        Ok(())
    }

    fn iteration_cap(&self, n: usize) -> usize {
        self.max_iterations.unwrap_or(10 * n.max(1))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CgSolution {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub relative_residual: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Jacobi-preconditioned conjugate gradient for symmetric positive definite
/// systems, warm-started from `x0` when given.
///
/// Convergence is declared on the recomputed true residual, not the
/// recurrence, so the returned residual is what a caller would measure.
pub fn cg_solve<M: LinearOperator + ?Sized>(
    matrix: &M,
    rhs: &[f64],
    x0: Option<&[f64]>,
    settings: &LinearSolveSettings,
) -> Result<CgSolution, OperatorError> {
    settings.validate()?;
    let n = matrix.dim();
    check_dim(n, rhs.len())?;
    if let Some(x0) = x0 {
        check_dim(n, x0.len())?;
    }
    let rhs_norm = dot(rhs, rhs).sqrt();
    if !rhs_norm.is_finite() {
        return Err(OperatorError::NonFinite(0));
    }
    if rhs_norm == 0.0 {
        return Ok(CgSolution {
            x: vec![0.0; n],
            iterations: 0,
            relative_residual: 0.0,
        });
    }
    let inv_diag: Vec<f64> = matrix
        .diagonal()
        .into_iter()
        .map(|d| if d > 0.0 { 1.0 / d } else { 1.0 })
        .collect();
    let cap = settings.iteration_cap(n);

    let mut x = x0.map(<[f64]>::to_vec).unwrap_or_else(|| vec![0.0; n]);
    let mut r = vec![0.0; n];
    let mut q = vec![0.0; n];
    let true_residual = |x: &[f64], r: &mut [f64], q: &mut [f64]| -> f64 {
        matrix.apply(x, q);
        for i in 0..n {
            r[i] = rhs[i] - q[i];
        }
        dot(r, r).sqrt() / rhs_norm
    };

    let mut residual = true_residual(&x, &mut r, &mut q);
    if !residual.is_finite() {
        return Err(OperatorError::NonFinite(0));
    }
    let mut iterations = 0;
    while residual > settings.tolerance {
        let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(a, b)| a * b).collect();
        let mut p = z.clone();
        let mut rz = dot(&r, &z);
        loop {
            if iterations >= cap {
                return Err(OperatorError::NotConverged { iterations, residual });
            }
            iterations += 1;
            matrix.apply(&p, &mut q);
            let pq = dot(&p, &q);
            if !pq.is_finite() {
                return Err(OperatorError::NonFinite(iterations));
            }
            if pq <= 0.0 {
                return Err(OperatorError::Indefinite(pq));
            }
            let alpha = rz / pq;
            for i in 0..n {
                x[i] += alpha * p[i];
                r[i] -= alpha * q[i];
            }
            residual = dot(&r, &r).sqrt() / rhs_norm;
            if !residual.is_finite() {
                return Err(OperatorError::NonFinite(iterations));
            }
            if residual <= settings.tolerance {
                break;
            }
            for i in 0..n {
                z[i] = r[i] * inv_diag[i];
            }
            let rz_next = dot(&r, &z);
            let beta = rz_next / rz;
            rz = rz_next;
            for i in 0..n {
                p[i] = z[i] + beta * p[i];
            }
        }
        // the recurrence can drift from the true residual; restart if so
        residual = true_residual(&x, &mut r, &mut q);
    }
    Ok(CgSolution {
        x,
        iterations,
        relative_residual: residual,
    })
}

/// One backward-Euler step of `u_t = Δ_Γ u − b/ε²`:
///
/// ```text
/// (A + dt·W) u' = A u − dt·(b/ε²)·A·1
/// ```
///
/// The constant source is integrated exactly. The solve is warm-started from
/// `u − dt·b/ε²`, which is already exact for constant fields.
pub fn diffusion_step(
    op: &SparseOperator,
    u: &[f64],
    dt: f64,
    b: f64,
    epsilon: f64,
    settings: &LinearSolveSettings,
) -> Result<Vec<f64>, OperatorError> {
    check_dim(op.dim(), u.len())?;
    if !(dt > 0.0) {
        return Err(OperatorError::InvalidParameter(format!(
            "dt must be positive, got {dt}"
        )));
    }
    if !(epsilon > 0.0) {
        return Err(OperatorError::InvalidParameter(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    let shift = dt * b / (epsilon * epsilon);
    let a = op.mass.as_slice();
    let rhs: Vec<f64> = u.iter().zip(a).map(|(ui, ai)| ai * (ui - shift)).collect();
    let guess: Vec<f64> = u.iter().map(|ui| ui - shift).collect();
    Ok(cg_solve(&op.shifted(dt), &rhs, Some(&guess), settings)?.x)
}
