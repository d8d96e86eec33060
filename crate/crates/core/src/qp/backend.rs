//! Interior-point backend (Clarabel) and the phase-1 infeasibility diagnosis.

use clarabel::algebra::CscMatrix;
use clarabel::solver::{DefaultSettingsBuilder, DefaultSolver, IPSolver, SolverStatus, SupportedConeT};

use super::{Objective, Polyhedron, QpSolver, SolveError, FEAS_TOL};
use crate::linalg::DenseMatrix;

pub(super) struct RawSolution {
    pub x: Vec<f64>,
    pub duals: Vec<f64>,
    pub iterations: u32,
    pub hit_limit: bool,
}

pub(super) fn solve(settings: &QpSolver, obj: Objective<'_>, feas: &Polyhedron) -> Result<RawSolution, SolveError> {
    let n = feas.n_vars();
    let free: Vec<usize> = (0..n).filter(|&i| !feas.is_fixed(i)).collect();
    let active_rows: Vec<usize> = (0..feas.n_rows()).filter(|&j| feas.h()[j].is_finite()).collect();

    if free.is_empty() {
        // everything pinned at zero: only the right-hand sides matter
        let violating: Vec<usize> = active_rows.iter().copied().filter(|&j| feas.h()[j] < -FEAS_TOL).collect();
        if !violating.is_empty() {
            return Err(SolveError::Infeasible { violating_rows: violating });
        }
        return Ok(RawSolution {
            x: vec![0.0; n],
            duals: vec![0.0; feas.n_rows()],
            iterations: 0,
            hit_limit: false,
        });
    }

    let bound_vars: Vec<usize> = free.iter().copied().filter(|&i| feas.lower()[i].is_finite()).collect();
    let m = active_rows.len() + bound_vars.len();

    // A = [G_free; -I_bounds], assembled column by column so rows stay sorted
    let mut colptr = Vec::with_capacity(free.len() + 1);
    let mut rowval = Vec::new();
    let mut nzval = Vec::new();
    colptr.push(0);
    for &i in &free {
        for (r, &j) in active_rows.iter().enumerate() {
            let v = feas.g().get(j, i);
            if v != 0.0 {
                rowval.push(r);
                nzval.push(v);
            }
        }
        if let Ok(k) = bound_vars.binary_search(&i) {
            rowval.push(active_rows.len() + k);
            nzval.push(-1.0);
        }
        colptr.push(rowval.len());
    }
    let a = CscMatrix::new(m, free.len(), colptr, rowval, nzval);
    let mut b: Vec<f64> = active_rows.iter().map(|&j| feas.h()[j]).collect();
    b.extend(bound_vars.iter().map(|&i| -feas.lower()[i]));

    let (p, q): (CscMatrix<f64>, Vec<f64>) = match obj {
        Objective::Quadratic(f) => {
            let diag: Vec<f64> = free.iter().map(|&i| 2.0 * f.weights()[i]).collect();
            let q = free.iter().map(|&i| -2.0 * f.weights()[i] * f.targets()[i]).collect();
            (diagonal_csc(&diag), q)
        }
        Objective::Linear(c) => (CscMatrix::zeros((free.len(), free.len())), free.iter().map(|&i| c[i]).collect()),
    };

    let cones = if m > 0 {
        vec![SupportedConeT::NonnegativeConeT(m)]
    } else {
        vec![]
    };
    let tol = settings.tolerance;
    let config = DefaultSettingsBuilder::default()
        .verbose(false)
        .max_iter(settings.max_iter)
        .tol_gap_abs(tol)
        .tol_gap_rel(tol)
        .tol_feas(tol)
        .tol_infeas_abs(tol)
        .tol_infeas_rel(tol)
        .tol_ktratio(tol.sqrt() * 1e-2)
        .build()
        .map_err(|e| SolveError::Numerical(e.to_string()))?;
    let mut solver =
        DefaultSolver::new(&p, &q, &a, &b, &cones, config).map_err(|e| SolveError::Numerical(e.to_string()))?;
    solver.solve();
    let sol = &solver.solution;

    let hit_limit = match sol.status {
        SolverStatus::Solved | SolverStatus::AlmostSolved => false,
        SolverStatus::PrimalInfeasible | SolverStatus::AlmostPrimalInfeasible => {
            return Err(diagnose_infeasibility(settings, feas));
        }
        SolverStatus::DualInfeasible | SolverStatus::AlmostDualInfeasible => return Err(SolveError::Unbounded),
        SolverStatus::MaxIterations
        | SolverStatus::MaxTime
        | SolverStatus::InsufficientProgress
        | SolverStatus::NumericalError => true,
        other => return Err(SolveError::Numerical(format!("solver status {other:?}"))),
    };

    let mut x = vec![0.0; n];
    for (k, &i) in free.iter().enumerate() {
        x[i] = sol.x[k];
    }
    let mut duals = vec![0.0; feas.n_rows()];
    for (r, &j) in active_rows.iter().enumerate() {
        duals[j] = sol.z[r].max(0.0);
    }
    Ok(RawSolution {
        x,
        duals,
        iterations: sol.iterations,
        hit_limit,
    })
}

fn diagonal_csc(diag: &[f64]) -> CscMatrix<f64> {
    let n = diag.len();
    let mut colptr = vec![0];
    let mut rowval = Vec::new();
    let mut nzval = Vec::new();
    for (i, &d) in diag.iter().enumerate() {
        if d != 0.0 {
            rowval.push(i);
            nzval.push(d);
        }
        colptr.push(rowval.len());
    }
    CscMatrix::new(n, n, colptr, rowval, nzval)
}

/// Minimizes total row violation `Σ s_j` subject to `G x - s <= h`, `s >= 0`,
/// with the variable bounds kept hard, and reports rows left violated.
fn diagnose_infeasibility(settings: &QpSolver, feas: &Polyhedron) -> SolveError {
    let n = feas.n_vars();
    let rows: Vec<usize> = (0..feas.n_rows()).filter(|&j| feas.h()[j].is_finite()).collect();
    let k = rows.len();
    let mut g = DenseMatrix::zeros(2 * k, n + k);
    let mut h = vec![0.0; 2 * k];
    for (r, &j) in rows.iter().enumerate() {
        g.row_mut(r)[..n].copy_from_slice(feas.g().row(j));
        g.set(r, n + r, -1.0);
        h[r] = feas.h()[j];
        g.set(k + r, n + r, -1.0);
    }
    let mut lower = feas.lower().to_vec();
    lower.extend(std::iter::repeat(f64::NEG_INFINITY).take(k));
    let fixed: Vec<usize> = (0..n).filter(|&i| feas.is_fixed(i)).collect();
    let phase1 = Polyhedron::new(g, h)
        .and_then(|p| p.with_lower_bounds(lower))
        .and_then(|p| p.with_fixed_zero(fixed));
    let phase1 = match phase1 {
        Ok(p) => p,
        Err(e) => return e,
    };
    let mut cost = vec![0.0; n + k];
    cost[n..].iter_mut().for_each(|c| *c = 1.0);
    match solve(settings, Objective::Linear(&cost), &phase1) {
        Ok(raw) => {
            let violating: Vec<usize> = rows
                .iter()
                .enumerate()
                .filter(|(r, _)| raw.x[n + r] > FEAS_TOL)
                .map(|(_, &j)| j)
                .collect();
            if violating.is_empty() {
                SolveError::Numerical("backend reported infeasibility but phase 1 found a feasible point".into())
            } else {
                SolveError::Infeasible { violating_rows: violating }
            }
        }
        // bounds alone are contradictory
        Err(SolveError::Infeasible { .. }) => SolveError::Infeasible { violating_rows: vec![] },
        Err(e) => e,
    }
}
