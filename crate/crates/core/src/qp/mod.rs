//! Separable convex QP and LP over a polyhedron `{x : G x <= h, x >= lb}`.
//!
//! Both capacity models reduce to minimizing `Σ w_i (t_i - x_i)²` or a linear
//! cost over the same feasible set. Solves go through an interior-point
//! backend; every returned optimum is re-certified here against the original
//! data (primal feasibility and a KKT residual computed from the duals).

mod backend;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{dot, DenseMatrix};

/// Primal feasibility tolerance.
pub const FEAS_TOL: f64 = 1e-7;
/// KKT residual tolerance.
pub const KKT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid polyhedron: {0}")]
    InvalidPolyhedron(String),
    #[error("invalid objective: {0}")]
    InvalidObjective(String),
    #[error("infeasible; violated rows: {violating_rows:?}")]
    Infeasible { violating_rows: Vec<usize> },
    #[error("objective unbounded over the feasible set")]
    Unbounded,
    #[error("iteration limit reached")]
    IterationLimit,
    #[error("numerical failure: {0}")]
    Numerical(String),
}

/// `{x : G x <= h}` plus per-variable lower bounds and variables pinned to 0.
///
/// Rows with `h = +inf` are kept for bookkeeping but impose nothing.
#[derive(Debug, Clone, PartialEq)]
pub struct Polyhedron {
    g: DenseMatrix,
    h: Vec<f64>,
    lower: Vec<f64>,
    fixed_zero: Vec<bool>,
    labels: Vec<String>,
}

impl Polyhedron {
    pub fn new(g: DenseMatrix, h: Vec<f64>) -> Result<Self, SolveError> {
        if g.nrows() != h.len() {
            return Err(SolveError::DimensionMismatch(format!(
                "G has {} rows, h has {}",
                g.nrows(),
                h.len()
            )));
        }
        if !g.is_finite() {
            return Err(SolveError::InvalidPolyhedron("non-finite entry in G".into()));
        }
        for (j, &hj) in h.iter().enumerate() {
            if hj.is_nan() || hj == f64::NEG_INFINITY {
                return Err(SolveError::InvalidPolyhedron(format!("row {j} has right-hand side {hj}")));
            }
            if hj < 0.0 && g.row(j).iter().all(|&v| v == 0.0) {
                return Err(SolveError::Infeasible { violating_rows: vec![j] });
            }
        }
        let n = g.ncols();
        let labels = (0..h.len()).map(|j| format!("row {}", j + 1)).collect();
        Ok(Self {
            g,
            h,
            lower: vec![0.0; n],
            fixed_zero: vec![false; n],
            labels,
        })
    }

    /// Replaces the default zero lower bounds; `-inf` frees a variable.
    pub fn with_lower_bounds(mut self, lower: Vec<f64>) -> Result<Self, SolveError> {
        if lower.len() != self.n_vars() {
            return Err(SolveError::DimensionMismatch("lower bound length".into()));
        }
        if lower.iter().any(|v| v.is_nan() || *v == f64::INFINITY) {
            return Err(SolveError::InvalidPolyhedron("invalid lower bound".into()));
        }
        self.lower = lower;
        Ok(self)
    }

    pub fn with_fixed_zero(mut self, indices: impl IntoIterator<Item = usize>) -> Result<Self, SolveError> {
        for i in indices {
            if i >= self.n_vars() {
                return Err(SolveError::DimensionMismatch(format!("fixed index {i}")));
            }
            if self.lower[i] > 0.0 {
                return Err(SolveError::Infeasible { violating_rows: vec![] });
            }
            self.fixed_zero[i] = true;
        }
        Ok(self)
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self, SolveError> {
        if labels.len() != self.n_rows() {
            return Err(SolveError::DimensionMismatch("label count".into()));
        }
        self.labels = labels;
        Ok(self)
    }

    pub fn n_vars(&self) -> usize {
        self.g.ncols()
    }

    pub fn n_rows(&self) -> usize {
        self.h.len()
    }

    pub fn g(&self) -> &DenseMatrix {
        &self.g
    }

    pub fn h(&self) -> &[f64] {
        &self.h
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn is_fixed(&self, i: usize) -> bool {
        self.fixed_zero[i]
    }

    pub fn label(&self, row: usize) -> &str {
        &self.labels[row]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// `G x - h` for every row (`-inf` on vacuous rows).
    pub fn row_residuals(&self, x: &[f64]) -> Vec<f64> {
        self.g.mul_vec(x).iter().zip(&self.h).map(|(gx, h)| gx - h).collect()
    }

    /// Largest violation of rows, lower bounds, and pinned variables.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let rows = self.row_residuals(x).into_iter().fold(0.0_f64, f64::max);
        let bounds = (0..self.n_vars())
            .map(|i| {
                if self.fixed_zero[i] {
                    x[i].abs()
                } else {
                    self.lower[i] - x[i]
                }
            })
            .fold(0.0_f64, f64::max);
        rows.max(bounds)
    }

    pub fn binding_rows(&self, x: &[f64]) -> Vec<usize> {
        self.row_residuals(x)
            .iter()
            .enumerate()
            .filter(|(_, r)| r.abs() <= FEAS_TOL)
            .map(|(j, _)| j)
            .collect()
    }
}

/// `f(x) = Σ_i w_i (t_i - x_i)²` with `w >= 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparableQuadratic {
    weights: Vec<f64>,
    targets: Vec<f64>,
}

impl SeparableQuadratic {
    pub fn new(weights: Vec<f64>, targets: Vec<f64>) -> Result<Self, SolveError> {
        if weights.len() != targets.len() {
            return Err(SolveError::DimensionMismatch("weights vs targets".into()));
        }
        for (i, (&w, &t)) in weights.iter().zip(&targets).enumerate() {
            if !w.is_finite() || w < 0.0 || !t.is_finite() {
                return Err(SolveError::InvalidObjective(format!("coordinate {i}")));
            }
            if w > 0.0 && t <= 0.0 {
                return Err(SolveError::InvalidObjective(format!(
                    "coordinate {i} has positive weight but target {t}"
                )));
            }
        }
        Ok(Self { weights, targets })
    }

    /// Normalized unserved-demand objective `Σ_{d_i > 0} ((d_i - x_i)/d_i)²`,
    /// padded with zero weights up to `n_vars`.
    pub fn unserved_ratio(demand: &[f64], n_vars: usize) -> Result<Self, SolveError> {
        let mut weights = vec![0.0; n_vars];
        let mut targets = vec![0.0; n_vars];
        for (i, &d) in demand.iter().enumerate() {
            if d > 0.0 {
                weights[i] = 1.0 / (d * d);
                targets[i] = d;
            }
        }
        Self::new(weights, targets)
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        self.weights
            .iter()
            .zip(&self.targets)
            .zip(x)
            .map(|((w, t), xi)| w * (t - xi) * (t - xi))
            .sum()
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        self.weights
            .iter()
            .zip(&self.targets)
            .zip(x)
            .map(|((w, t), xi)| 2.0 * w * (xi - t))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    IterationLimit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub solution: Vec<f64>,
    pub objective: f64,
    pub status: SolveStatus,
    pub kkt_residual: f64,
    /// Rows with `|G_j x - h_j| <= 1e-7`.
    pub binding_rows: Vec<usize>,
    /// Multipliers of the `G x <= h` rows.
    pub duals: Vec<f64>,
    pub iterations: u32,
}

/// Solver settings; one instance may be reused for sequential solves.
#[derive(Debug, Clone)]
pub struct QpSolver {
    pub max_iter: u32,
    pub tolerance: f64,
}

impl Default for QpSolver {
    fn default() -> Self {
        Self {
            max_iter: 400,
            tolerance: 1e-10,
        }
    }
}

impl QpSolver {
    pub fn solve_separable_qp(&self, obj: &SeparableQuadratic, feas: &Polyhedron) -> Result<SolveReport, SolveError> {
        if obj.len() != feas.n_vars() {
            return Err(SolveError::DimensionMismatch(format!(
                "objective has {} coordinates, polyhedron {}",
                obj.len(),
                feas.n_vars()
            )));
        }
        let raw = backend::solve(self, Objective::Quadratic(obj), feas)?;
        let objective = obj.value(&raw.x);
        let grad = obj.gradient(&raw.x);
        self.certify(raw, objective, &grad, feas)
    }

    pub fn solve_lp(&self, cost: &[f64], feas: &Polyhedron, sense: Sense) -> Result<SolveReport, SolveError> {
        if cost.len() != feas.n_vars() {
            return Err(SolveError::DimensionMismatch("cost length".into()));
        }
        if cost.iter().any(|c| !c.is_finite()) {
            return Err(SolveError::InvalidObjective("non-finite cost".into()));
        }
        // internally always minimize
        let min_cost: Vec<f64> = match sense {
            Sense::Minimize => cost.to_vec(),
            Sense::Maximize => cost.iter().map(|c| -c).collect(),
        };
        let raw = backend::solve(self, Objective::Linear(&min_cost), feas)?;
        let objective = dot(cost, &raw.x);
        self.certify(raw, objective, &min_cost, feas)
    }

    fn certify(
        &self,
        mut raw: backend::RawSolution,
        objective: f64,
        grad: &[f64],
        feas: &Polyhedron,
    ) -> Result<SolveReport, SolveError> {
        // interior-point duals on slack rows are tiny but nonzero; drop them
        let residuals = feas.row_residuals(&raw.x);
        for ((lambda, r), h) in raw.duals.iter_mut().zip(residuals).zip(&feas.h) {
            if r < -FEAS_TOL * h.abs().max(1.0) {
                *lambda = 0.0;
            }
        }
        let kkt = kkt_residual_from_gradient(grad, feas, &raw.x, &raw.duals)?;
        let violation = feas.max_violation(&raw.x);
        if violation > FEAS_TOL || kkt > KKT_TOL {
            return Err(if raw.hit_limit {
                SolveError::IterationLimit
            } else {
                SolveError::Numerical(format!("certification failed: violation {violation:.3e}, kkt {kkt:.3e}"))
            });
        }
        Ok(SolveReport {
            binding_rows: feas.binding_rows(&raw.x),
            solution: raw.x,
            objective,
            status: SolveStatus::Optimal,
            kkt_residual: kkt,
            duals: raw.duals,
            iterations: raw.iterations,
        })
    }
}

enum Objective<'a> {
    Quadratic(&'a SeparableQuadratic),
    Linear(&'a [f64]),
}

pub fn solve_separable_qp(obj: &SeparableQuadratic, feas: &Polyhedron) -> Result<SolveReport, SolveError> {
    QpSolver::default().solve_separable_qp(obj, feas)
}

pub fn solve_lp(cost: &[f64], feas: &Polyhedron, sense: Sense) -> Result<SolveReport, SolveError> {
    QpSolver::default().solve_lp(cost, feas, sense)
}

/// KKT residual of `(x, λ)` for `min f` over `feas`.
///
/// Bound multipliers are folded in: on a free coordinate with lower bound
/// `lb`, `μ_i = max(g_i, 0)` where `g = ∇f + Gᵀλ`; stationarity leaves
/// `min(g_i, 0)` and complementarity adds `μ_i (x_i - lb_i)`. Pinned
/// coordinates carry an unrestricted multiplier and contribute nothing.
pub fn kkt_residual(obj: &SeparableQuadratic, feas: &Polyhedron, x: &[f64], duals: &[f64]) -> Result<f64, SolveError> {
    if obj.len() != feas.n_vars() || x.len() != feas.n_vars() {
        return Err(SolveError::DimensionMismatch("kkt point".into()));
    }
    kkt_residual_from_gradient(&obj.gradient(x), feas, x, duals)
}

pub fn kkt_residual_from_gradient(grad: &[f64], feas: &Polyhedron, x: &[f64], duals: &[f64]) -> Result<f64, SolveError> {
    if duals.len() != feas.n_rows() || grad.len() != feas.n_vars() || x.len() != feas.n_vars() {
        return Err(SolveError::DimensionMismatch("kkt duals".into()));
    }
    if duals.iter().any(|l| *l < 0.0 || !l.is_finite()) {
        return Err(SolveError::InvalidObjective("duals must be finite and nonnegative".into()));
    }
    let gt_lambda = feas.g.tr_mul_vec(duals);
    let mut residual = 0.0_f64;
    for i in 0..feas.n_vars() {
        if feas.fixed_zero[i] {
            continue;
        }
        let g = grad[i] + gt_lambda[i];
        if feas.lower[i].is_finite() {
            let mu = g.max(0.0);
            residual = residual.max((g - mu).abs()).max((mu * (x[i] - feas.lower[i])).abs());
        } else {
            residual = residual.max(g.abs());
        }
    }
    let gx = feas.g.mul_vec(x);
    for j in 0..feas.n_rows() {
        if duals[j] == 0.0 {
            continue;
        }
        if !feas.h[j].is_finite() {
            return Err(SolveError::InvalidObjective(format!("positive dual on vacuous row {j}")));
        }
        residual = residual.max((duals[j] * (gx[j] - feas.h[j])).abs());
    }
    Ok(residual)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn box1(upper: f64) -> Polyhedron {
        Polyhedron::new(DenseMatrix::from_rows(&[[1.0]]).unwrap(), vec![upper]).unwrap()
    }

    fn one_d() -> SeparableQuadratic {
        SeparableQuadratic::new(vec![0.01], vec![10.0]).unwrap()
    }

    #[test]
    fn clipped_one_dimensional_qp() {
        let r = solve_separable_qp(&one_d(), &box1(5.0)).unwrap();
        assert!((r.solution[0] - 5.0).abs() < 1e-7);
        assert!((r.objective - 0.25).abs() < 1e-7);
        assert_eq!(r.binding_rows, vec![0]);
        assert!((r.duals[0] - 0.1).abs() < 1e-6);
    }

    #[test]
    fn interior_one_dimensional_qp() {
        let r = solve_separable_qp(&one_d(), &box1(20.0)).unwrap();
        assert!((r.solution[0] - 10.0).abs() < 1e-7);
        assert!(r.objective.abs() < 1e-12);
        assert!(r.binding_rows.is_empty());
    }

    #[test]
    fn symmetric_projection() {
        let obj = SeparableQuadratic::new(vec![0.25, 0.25], vec![2.0, 2.0]).unwrap();
        let feas = Polyhedron::new(DenseMatrix::from_rows(&[[1.0, 1.0]]).unwrap(), vec![2.0]).unwrap();
        let r = solve_separable_qp(&obj, &feas).unwrap();
        assert!((r.solution[0] - 1.0).abs() < 1e-7 && (r.solution[1] - 1.0).abs() < 1e-7);
        assert!((r.objective - 0.5).abs() < 1e-7);
    }

    #[test]
    fn small_lps() {
        let r = solve_lp(&[1.0], &box1(5.0), Sense::Maximize).unwrap();
        assert!((r.objective - 5.0).abs() < 1e-7);
        let feas = Polyhedron::new(DenseMatrix::from_rows(&[[1.0, 1.0]]).unwrap(), vec![2.0]).unwrap();
        let r = solve_lp(&[1.0, 1.0], &feas, Sense::Maximize).unwrap();
        assert!((r.objective - 2.0).abs() < 1e-7);
        let r = solve_lp(&[1.0, 1.0], &feas, Sense::Minimize).unwrap();
        assert!(r.objective.abs() < 1e-7);
    }

    #[test]
    fn unbounded_lp() {
        let feas = Polyhedron::new(DenseMatrix::from_rows(&[[1.0, -1.0]]).unwrap(), vec![2.0]).unwrap();
        assert_eq!(solve_lp(&[1.0, 1.0], &feas, Sense::Maximize).unwrap_err(), SolveError::Unbounded);
    }

    #[test]
    fn infeasible_rows_reported() {
        // x <= 3 and x >= 5 with x >= 0
        let g = DenseMatrix::from_rows(&[[1.0], [-1.0], [1.0]]).unwrap();
        let feas = Polyhedron::new(g, vec![3.0, -5.0, 100.0]).unwrap();
        match solve_separable_qp(&one_d(), &feas) {
            Err(SolveError::Infeasible { violating_rows }) => {
                assert!(!violating_rows.is_empty());
                assert!(violating_rows.iter().all(|&j| j < 2));
            }
            other => panic!("expected infeasible, got {other:?}"),
        }
        // a row that excludes the origin while x is pinned at zero
        let feas = box1(-1.0).with_fixed_zero([0]).unwrap();
        assert_eq!(
            solve_lp(&[1.0], &feas, Sense::Maximize).unwrap_err(),
            SolveError::Infeasible { violating_rows: vec![0] }
        );
    }

    #[test]
    fn trivially_infeasible_row_rejected() {
        let g = DenseMatrix::from_rows(&[[0.0, 0.0]]).unwrap();
        assert!(matches!(Polyhedron::new(g, vec![-1.0]), Err(SolveError::Infeasible { .. })));
    }

    #[test]
    fn kkt_residual_examples() {
        let obj = one_d();
        assert_eq!(kkt_residual(&obj, &box1(20.0), &[10.0], &[0.0]).unwrap(), 0.0);
        assert!(kkt_residual(&obj, &box1(5.0), &[5.0], &[0.1]).unwrap() <= 1e-12);
        assert!(kkt_residual(&obj, &box1(5.0), &[5.1], &[0.1]).unwrap() > 1e-3);
        assert!(kkt_residual(&obj, &box1(5.0), &[5.0], &[0.1, 0.0]).is_err());
    }

    #[test]
    fn pinned_and_free_variables() {
        // minimize (x0 - 3)² with x1 pinned, x2 free and unused: x1 <= 1 row vacuous for x1
        let obj = SeparableQuadratic::new(vec![1.0, 1.0, 0.0], vec![3.0, 3.0, 0.0]).unwrap();
        let g = DenseMatrix::from_rows(&[[1.0, 1.0, 0.0], [0.0, 0.0, 1.0], [0.0, 0.0, -1.0]]).unwrap();
        let feas = Polyhedron::new(g, vec![2.0, 1.0, f64::INFINITY])
            .unwrap()
            .with_lower_bounds(vec![0.0, 0.0, f64::NEG_INFINITY])
            .unwrap()
            .with_fixed_zero([1])
            .unwrap();
        let r = solve_separable_qp(&obj, &feas).unwrap();
        assert!((r.solution[0] - 2.0).abs() < 1e-7);
        assert_eq!(r.solution[1], 0.0);
        assert!(r.solution[2] <= 1.0 + 1e-7);
    }
}
