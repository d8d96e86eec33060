//! Firm (robust) and flexible (CVaR) withdrawal-capacity models.
//!
//! Both models minimize the normalized unserved demand
//! `Σ_{i∈I} ((d_i - c_i)/d_i)²` and come with a companion LP maximizing the
//! total `Σ_{i∈I} c_i` over the same feasible set. Buses without a request are
//! pinned at zero capacity.

mod augment;
mod verify;

pub use augment::{find_augmenting_index, Augmentation, AugmentError, TreePolyhedron};
pub use verify::{verify_firm_total_optimality, verify_flex_total_optimality, OptimalityCheck, TotalsReport};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::DenseMatrix;
use crate::network::{build_path_matrix, NetworkError, RadialNetwork};
use crate::qp::{Polyhedron, QpSolver, SeparableQuadratic, Sense, SolveError, SolveReport};
use crate::risk::{box_worst_case, AlphaProfile, BoxBounds, RiskError, RiskLevel, ScenarioSet};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CapacityError {
    #[error("infeasible: {}", violating.join(", "))]
    Infeasible { violating: Vec<String> },
    #[error("confidence level {alpha} leaves a tail of {tail:.3} samples (need at least 1)")]
    AlphaTooHigh { alpha: f64, tail: f64 },
    #[error("shift-factor matrix must be {expected_rows}x{expected_cols}, got {rows}x{cols}")]
    ShiftDimension {
        expected_rows: usize,
        expected_cols: usize,
        rows: usize,
        cols: usize,
    },
    #[error("shift-factor matrix is not the path matrix of the network")]
    NotPathMatrix,
    #[error("{what} has length {got}, expected {expected}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Risk(#[from] RiskError),
    #[error("solver: {0}")]
    Solver(SolveError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CapacityKind {
    Firm,
    #[serde(rename = "flex")]
    Flexible,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacitySolution {
    pub kind: CapacityKind,
    /// Capacity per bus (MW).
    pub c: Vec<f64>,
    /// Normalized unserved demand at `c`.
    pub objective: f64,
    /// `Σ_{i∈I} c_i`.
    pub total: f64,
    /// Labels of binding constraint rows.
    pub binding: Vec<String>,
    pub alpha: Option<f64>,
    pub report: SolveReport,
}

impl CapacitySolution {
    /// `c^r - c^f` against a firm solution on the same network.
    pub fn incremental_over(&self, firm: &CapacitySolution) -> Vec<f64> {
        self.c.iter().zip(&firm.c).map(|(r, f)| r - f).collect()
    }

    /// Every requesting bus strictly below its demand.
    pub fn is_scarce(&self, net: &RadialNetwork) -> bool {
        net.request_set().iter().all(|&i| net.demand()[i] - self.c[i] > SCARCITY_MARGIN)
    }
}

/// Minimum `d_i - c_i` for an instance to count as scarce.
pub const SCARCITY_MARGIN: f64 = 1e-6;

fn shift_or_path(net: &RadialNetwork, shift: Option<&DenseMatrix>) -> Result<DenseMatrix, CapacityError> {
    match shift {
        None => Ok(build_path_matrix(net).to_dense()),
        Some(s) => {
            if s.nrows() != net.n_edges() || s.ncols() != net.n_buses() {
                return Err(CapacityError::ShiftDimension {
                    expected_rows: net.n_edges(),
                    expected_cols: net.n_buses(),
                    rows: s.nrows(),
                    cols: s.ncols(),
                });
            }
            if !s.is_finite() {
                return Err(CapacityError::Solver(SolveError::InvalidPolyhedron(
                    "non-finite shift factor".into(),
                )));
            }
            Ok(s.clone())
        }
    }
}

fn omega(net: &RadialNetwork) -> Vec<usize> {
    (0..net.n_buses()).filter(|&i| !net.is_requesting(i)).collect()
}

fn requested_total(net: &RadialNetwork, c: &[f64]) -> f64 {
    net.request_set().iter().map(|&i| c[i]).sum()
}

/// Robust firm-capacity model with the box uncertainty eliminated:
///
/// ```text
/// c + l̄ <= q̄
/// S c <= b̄ - (S⁺ l̄ - S⁻ l̲)
/// S c >= b̲ - (S⁺ l̲ - S⁻ l̄)
/// c >= 0, c_i = 0 on Ω
/// ```
///
/// Rows: `N` withdrawal rows, then `N-1` line-upper rows, then `N-1`
/// line-lower rows.
#[derive(Debug, Clone)]
pub struct FirmModel<'a> {
    net: &'a RadialNetwork,
    shift: DenseMatrix,
    bounds: BoxBounds,
    worst_up: Vec<f64>,
    worst_down: Vec<f64>,
    polyhedron: Polyhedron,
}

impl<'a> FirmModel<'a> {
    pub fn new(net: &'a RadialNetwork, bounds: &BoxBounds, shift: Option<&DenseMatrix>) -> Result<Self, CapacityError> {
        let n = net.n_buses();
        let m = net.n_edges();
        if bounds.len() != n {
            return Err(CapacityError::DimensionMismatch {
                what: "box bounds",
                expected: n,
                got: bounds.len(),
            });
        }
        let shift = shift_or_path(net, shift)?;
        let (worst_up, worst_down) = box_worst_case(&shift, bounds)?;

        let mut g = DenseMatrix::zeros(n + 2 * m, n);
        let mut h = Vec::with_capacity(n + 2 * m);
        let mut labels = Vec::with_capacity(n + 2 * m);
        for i in 0..n {
            g.set(i, i, 1.0);
            h.push(net.withdrawal_cap()[i] - bounds.upper()[i]);
            labels.push(format!("bus {} withdrawal", i + 1));
        }
        for e in 0..m {
            g.row_mut(n + e).copy_from_slice(shift.row(e));
            h.push(net.line_upper()[e] - worst_up[e]);
            labels.push(format!("line {} upper", e + 1));
        }
        for e in 0..m {
            for (dst, src) in g.row_mut(n + m + e).iter_mut().zip(shift.row(e)) {
                *dst = -src;
            }
            h.push(worst_down[e] - net.line_lower()[e]);
            labels.push(format!("line {} lower", e + 1));
        }
        let polyhedron = Polyhedron::new(g, h)
            .and_then(|p| p.with_labels(labels))
            .and_then(|p| p.with_fixed_zero(omega(net)))
            .map_err(|e| solver_error(e, None))?;
        Ok(Self {
            net,
            shift,
            bounds: bounds.clone(),
            worst_up,
            worst_down,
            polyhedron,
        })
    }

    pub fn polyhedron(&self) -> &Polyhedron {
        &self.polyhedron
    }

    pub fn shift(&self) -> &DenseMatrix {
        &self.shift
    }

    pub fn bounds(&self) -> &BoxBounds {
        &self.bounds
    }

    pub fn worst_up(&self) -> &[f64] {
        &self.worst_up
    }

    pub fn worst_down(&self) -> &[f64] {
        &self.worst_down
    }

    pub fn solve(&self, solver: &QpSolver) -> Result<CapacitySolution, CapacityError> {
        let obj = SeparableQuadratic::unserved_ratio(self.net.demand(), self.net.n_buses())
            .map_err(|e| solver_error(e, None))?;
        let report = solver
            .solve_separable_qp(&obj, &self.polyhedron)
            .map_err(|e| solver_error(e, Some(&self.polyhedron)))?;
        Ok(finish(self.net, CapacityKind::Firm, &self.polyhedron, report, None))
    }

    pub fn solve_total(&self, solver: &QpSolver) -> Result<CapacitySolution, CapacityError> {
        let cost = request_indicator(self.net, self.net.n_buses());
        let report = solver
            .solve_lp(&cost, &self.polyhedron, Sense::Maximize)
            .map_err(|e| solver_error(e, Some(&self.polyhedron)))?;
        Ok(finish(self.net, CapacityKind::Firm, &self.polyhedron, report, None))
    }
}

/// Scenario CVaR model over `(c, ζ, z)`.
///
/// For every constrained row `k` with affine part `a_k·c + L_{k,s}` per
/// scenario, the model carries one free `ζ_k` and `Ns` nonnegative `z_{k,s}`:
///
/// ```text
/// ζ_k + Σ_s z_{k,s} / ((1-α_k) Ns) <= 0
/// z_{k,s} >= a_k·c + L_{k,s} - ζ_k
/// ```
///
/// Withdrawal rows use `a = e_i`, `L = l_s[i] - q̄_i`; line-upper rows
/// `a = S_e`, `L = (S l_s)_e - b̄_e`; line-lower rows `a = -S_e`,
/// `L = b̲_e - (S l_s)_e`. Rows with an infinite limit are dropped.
#[derive(Debug, Clone)]
pub struct FlexModel<'a> {
    net: &'a RadialNetwork,
    shift: DenseMatrix,
    alpha: AlphaProfile,
    rows: Vec<CvarRow>,
    n_scenarios: usize,
    polyhedron: Polyhedron,
}

/// One CVaR-constrained row of the flexible model.
#[derive(Debug, Clone, PartialEq)]
pub struct CvarRow {
    pub label: String,
    /// Coefficients on `c`.
    pub coeffs: Vec<f64>,
    /// Scenario offsets `L_{k,s}`.
    pub offsets: Vec<f64>,
    pub alpha: RiskLevel,
}

impl<'a> FlexModel<'a> {
    pub fn new(
        net: &'a RadialNetwork,
        scenarios: &ScenarioSet,
        alpha: impl Into<AlphaProfile>,
        shift: Option<&DenseMatrix>,
    ) -> Result<Self, CapacityError> {
        let alpha = alpha.into();
        let n = net.n_buses();
        let m = net.n_edges();
        if scenarios.n_buses() != n {
            return Err(CapacityError::DimensionMismatch {
                what: "scenario width",
                expected: n,
                got: scenarios.n_buses(),
            });
        }
        if let AlphaProfile::PerRow {
            withdrawal,
            line_upper,
            line_lower,
        } = &alpha
        {
            for (what, got, expected) in [
                ("withdrawal alphas", withdrawal.len(), n),
                ("line upper alphas", line_upper.len(), m),
                ("line lower alphas", line_lower.len(), m),
            ] {
                if got != expected {
                    return Err(CapacityError::DimensionMismatch { what, expected, got });
                }
            }
        }
        let ns = scenarios.count();
        let worst = alpha.max_level();
        let tail = worst.tail_mass(ns);
        if tail < 1.0 - 1e-12 {
            return Err(CapacityError::AlphaTooHigh {
                alpha: worst.alpha(),
                tail,
            });
        }
        let shift = shift_or_path(net, shift)?;
        let flows: Vec<Vec<f64>> = scenarios.samples().iter().map(|l| shift.mul_vec(l)).collect();

        let mut rows = Vec::new();
        for i in 0..n {
            let q = net.withdrawal_cap()[i];
            if q.is_finite() {
                let mut coeffs = vec![0.0; n];
                coeffs[i] = 1.0;
                rows.push(CvarRow {
                    label: format!("bus {} withdrawal cvar", i + 1),
                    coeffs,
                    offsets: scenarios.samples().iter().map(|l| l[i] - q).collect(),
                    alpha: alpha.withdrawal(i),
                });
            }
        }
        for e in 0..m {
            let b = net.line_upper()[e];
            if b.is_finite() {
                rows.push(CvarRow {
                    label: format!("line {} upper cvar", e + 1),
                    coeffs: shift.row(e).to_vec(),
                    offsets: flows.iter().map(|f| f[e] - b).collect(),
                    alpha: alpha.line_upper(e),
                });
            }
        }
        for e in 0..m {
            let b = net.line_lower()[e];
            if b.is_finite() {
                rows.push(CvarRow {
                    label: format!("line {} lower cvar", e + 1),
                    coeffs: shift.row(e).iter().map(|v| -v).collect(),
                    offsets: flows.iter().map(|f| b - f[e]).collect(),
                    alpha: alpha.line_lower(e),
                });
            }
        }

        let polyhedron = assemble_cvar_polyhedron(net, &rows, ns).map_err(|e| solver_error(e, None))?;
        Ok(Self {
            net,
            shift,
            alpha,
            rows,
            n_scenarios: ns,
            polyhedron,
        })
    }

    pub fn polyhedron(&self) -> &Polyhedron {
        &self.polyhedron
    }

    pub fn rows(&self) -> &[CvarRow] {
        &self.rows
    }

    pub fn shift(&self) -> &DenseMatrix {
        &self.shift
    }

    pub fn n_scenarios(&self) -> usize {
        self.n_scenarios
    }

    /// Index of `ζ_k` in the decision vector.
    pub fn zeta_index(&self, row: usize) -> usize {
        self.net.n_buses() + row
    }

    /// Index of `z_{k,s}` in the decision vector.
    pub fn z_index(&self, row: usize, scenario: usize) -> usize {
        self.net.n_buses() + self.rows.len() + row * self.n_scenarios + scenario
    }

    pub fn solve(&self, solver: &QpSolver) -> Result<CapacitySolution, CapacityError> {
        let obj = SeparableQuadratic::unserved_ratio(self.net.demand(), self.polyhedron.n_vars())
            .map_err(|e| solver_error(e, None))?;
        let report = solver
            .solve_separable_qp(&obj, &self.polyhedron)
            .map_err(|e| solver_error(e, Some(&self.polyhedron)))?;
        Ok(self.finish(report))
    }

    pub fn solve_total(&self, solver: &QpSolver) -> Result<CapacitySolution, CapacityError> {
        let cost = request_indicator(self.net, self.polyhedron.n_vars());
        let report = solver
            .solve_lp(&cost, &self.polyhedron, Sense::Maximize)
            .map_err(|e| solver_error(e, Some(&self.polyhedron)))?;
        Ok(self.finish(report))
    }

    fn finish(&self, report: SolveReport) -> CapacitySolution {
        let mut sol = finish(
            self.net,
            CapacityKind::Flexible,
            &self.polyhedron,
            report,
            self.alpha.uniform_alpha(),
        );
        // only the CVaR rows are meaningful to report as binding
        sol.binding.retain(|l| l.ends_with("cvar"));
        sol
    }
}

fn assemble_cvar_polyhedron(net: &RadialNetwork, rows: &[CvarRow], ns: usize) -> Result<Polyhedron, SolveError> {
    let n = net.n_buses();
    let r = rows.len();
    let n_vars = n + r + r * ns;
    let n_rows = r + r * ns;
    let mut g = DenseMatrix::zeros(n_rows, n_vars);
    let mut h = vec![0.0; n_rows];
    let mut labels = Vec::with_capacity(n_rows);
    for (k, row) in rows.iter().enumerate() {
        let weight = 1.0 / row.alpha.tail_mass(ns);
        g.set(k, n + k, 1.0);
        for s in 0..ns {
            g.set(k, n + r + k * ns + s, weight);
        }
        labels.push(row.label.clone());
    }
    for (k, row) in rows.iter().enumerate() {
        for s in 0..ns {
            let j = r + k * ns + s;
            g.row_mut(j)[..n].copy_from_slice(&row.coeffs);
            g.set(j, n + k, -1.0);
            g.set(j, n + r + k * ns + s, -1.0);
            h[j] = -row.offsets[s];
            labels.push(format!("{} scenario {}", row.label, s + 1));
        }
    }
    let mut lower = vec![0.0; n_vars];
    lower[n..n + r].iter_mut().for_each(|v| *v = f64::NEG_INFINITY);
    Polyhedron::new(g, h)?
        .with_labels(labels)?
        .with_lower_bounds(lower)?
        .with_fixed_zero(omega(net))
}

fn request_indicator(net: &RadialNetwork, n_vars: usize) -> Vec<f64> {
    let mut cost = vec![0.0; n_vars];
    for i in net.request_set() {
        cost[i] = 1.0;
    }
    cost
}

fn finish(
    net: &RadialNetwork,
    kind: CapacityKind,
    poly: &Polyhedron,
    report: SolveReport,
    alpha: Option<f64>,
) -> CapacitySolution {
    let n = net.n_buses();
    // clamp solver noise around the zero bound
    let c: Vec<f64> = report.solution[..n].iter().map(|v| v.max(0.0)).collect();
    let objective = SeparableQuadratic::unserved_ratio(net.demand(), n)
        .map(|f| f.value(&c))
        .unwrap_or(f64::NAN);
    CapacitySolution {
        kind,
        total: requested_total(net, &c),
        objective,
        binding: report.binding_rows.iter().map(|&j| poly.label(j).to_string()).collect(),
        alpha,
        c,
        report,
    }
}

fn solver_error(err: SolveError, poly: Option<&Polyhedron>) -> CapacityError {
    match err {
        SolveError::Infeasible { violating_rows } => CapacityError::Infeasible {
            violating: match poly {
                Some(p) => violating_rows.iter().map(|&j| p.label(j).to_string()).collect(),
                None => violating_rows.iter().map(|j| format!("row {}", j + 1)).collect(),
            },
        },
        other => CapacityError::Solver(other),
    }
}

/// Firm capacity: unserved-demand QP under the robust box constraints.
pub fn solve_firm(
    net: &RadialNetwork,
    bounds: &BoxBounds,
    shift: Option<&DenseMatrix>,
) -> Result<CapacitySolution, CapacityError> {
    FirmModel::new(net, bounds, shift)?.solve(&QpSolver::default())
}

/// Maximum total firm capacity over the same polyhedron.
pub fn solve_firm_companion_lp(
    net: &RadialNetwork,
    bounds: &BoxBounds,
    shift: Option<&DenseMatrix>,
) -> Result<CapacitySolution, CapacityError> {
    FirmModel::new(net, bounds, shift)?.solve_total(&QpSolver::default())
}

/// Flexible capacity: unserved-demand QP under scenario CVaR constraints.
pub fn solve_flex(
    net: &RadialNetwork,
    scenarios: &ScenarioSet,
    alpha: impl Into<AlphaProfile>,
    shift: Option<&DenseMatrix>,
) -> Result<CapacitySolution, CapacityError> {
    FlexModel::new(net, scenarios, alpha, shift)?.solve(&QpSolver::default())
}

/// Maximum total flexible capacity over the same CVaR polyhedron.
pub fn solve_flex_companion_lp(
    net: &RadialNetwork,
    scenarios: &ScenarioSet,
    alpha: impl Into<AlphaProfile>,
    shift: Option<&DenseMatrix>,
) -> Result<CapacitySolution, CapacityError> {
    FlexModel::new(net, scenarios, alpha, shift)?.solve_total(&QpSolver::default())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::NetworkSpec;

    pub(super) fn two_bus(b_up: f64) -> RadialNetwork {
        two_bus_with_cap(b_up, 12.0)
    }

    pub(super) fn two_bus_with_cap(b_up: f64, q: f64) -> RadialNetwork {
        RadialNetwork::new(NetworkSpec {
            n_buses: 2,
            edges: vec![(1, 2)],
            line_upper: vec![b_up],
            line_lower: vec![-8.0],
            withdrawal_cap: vec![f64::INFINITY, q],
            demand: vec![0.0, 10.0],
        })
        .unwrap()
    }

    fn two_bus_box(lo: f64, hi: f64) -> BoxBounds {
        BoxBounds::new(vec![0.0, lo], vec![0.0, hi]).unwrap()
    }

    fn scenarios() -> ScenarioSet {
        ScenarioSet::new((0..4).map(|k| vec![0.0, k as f64]).collect()).unwrap()
    }

    fn alpha(a: f64) -> RiskLevel {
        RiskLevel::new(a).unwrap()
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-6
    }

    #[test]
    fn firm_two_bus() {
        let net = two_bus(8.0);
        let sol = solve_firm(&net, &two_bus_box(0.0, 3.0), None).unwrap();
        assert!(close(sol.c[0], 0.0) && close(sol.c[1], 5.0), "{:?}", sol.c);
        assert!(close(sol.objective, 0.25));
        assert!(close(sol.total, 5.0));
        assert_eq!(sol.binding, vec!["line 1 upper".to_string()]);
    }

    #[test]
    fn firm_two_bus_slack_limits() {
        // the withdrawal row c + l̄ <= q̄ still caps bus 2 at 12 - 3
        let sol = solve_firm(&two_bus(20.0), &two_bus_box(0.0, 3.0), None).unwrap();
        assert!(close(sol.c[1], 9.0), "{:?}", sol.c);
        assert!(close(sol.objective, 0.01));
        assert_eq!(sol.binding, vec!["bus 2 withdrawal".to_string()]);

        let sol = solve_firm(&two_bus_with_cap(20.0, 20.0), &two_bus_box(0.0, 3.0), None).unwrap();
        assert!(close(sol.c[1], 10.0));
        assert!(sol.objective.abs() < 1e-9);
    }

    #[test]
    fn firm_two_bus_infeasible_background() {
        let net = two_bus(8.0);
        let err = solve_firm(&net, &two_bus_box(9.0, 9.0), None).unwrap_err();
        assert_eq!(
            err,
            CapacityError::Infeasible {
                violating: vec!["line 1 upper".into()]
            }
        );
    }

    #[test]
    fn firm_companion_two_bus() {
        let sol = solve_firm_companion_lp(&two_bus(8.0), &two_bus_box(0.0, 3.0), None).unwrap();
        assert!(close(sol.total, 5.0));
    }

    #[test]
    fn firm_companion_star() {
        let net = RadialNetwork::new(NetworkSpec {
            n_buses: 3,
            edges: vec![(1, 2), (1, 3)],
            line_upper: vec![4.0, 4.0],
            line_lower: vec![-4.0, -4.0],
            withdrawal_cap: vec![f64::INFINITY; 3],
            demand: vec![0.0, 10.0, 10.0],
        })
        .unwrap();
        let sol = solve_firm_companion_lp(&net, &BoxBounds::point(vec![0.0; 3]).unwrap(), None).unwrap();
        assert!(close(sol.total, 8.0));
        assert!(close(sol.c[1], 4.0) && close(sol.c[2], 4.0));
    }

    #[test]
    fn firm_companion_only_withdrawal_caps() {
        let net = RadialNetwork::new(NetworkSpec {
            n_buses: 3,
            edges: vec![(1, 2), (2, 3)],
            line_upper: vec![f64::INFINITY; 2],
            line_lower: vec![f64::NEG_INFINITY; 2],
            withdrawal_cap: vec![f64::INFINITY, 3.0, 7.0],
            demand: vec![0.0, 10.0, 10.0],
        })
        .unwrap();
        let sol = solve_firm_companion_lp(&net, &BoxBounds::point(vec![0.0; 3]).unwrap(), None).unwrap();
        assert!(close(sol.total, 10.0));
    }

    #[test]
    fn flex_two_bus_levels() {
        let net = two_bus(8.0);
        let cases = [(0.75, 5.0), (0.5, 5.5), (0.0, 6.5)];
        for (a, expected) in cases {
            let sol = solve_flex(&net, &scenarios(), alpha(a), None).unwrap();
            assert!(close(sol.c[1], expected), "alpha {a}: {:?}", sol.c);
            assert!(close(sol.c[0], 0.0));
            assert_eq!(sol.alpha, Some(a));
            let lp = solve_flex_companion_lp(&net, &scenarios(), alpha(a), None).unwrap();
            assert!(close(lp.total, expected), "alpha {a}: lp {}", lp.total);
        }
        let firm = solve_firm(&net, &two_bus_box(0.0, 3.0), None).unwrap();
        let flex = solve_flex(&net, &scenarios(), alpha(0.5), None).unwrap();
        let inc = flex.incremental_over(&firm);
        assert!(close(inc[0], 0.0) && close(inc[1], 0.5));
    }

    #[test]
    fn flex_rejects_thin_tail() {
        let err = solve_flex(&two_bus(8.0), &scenarios(), alpha(0.999), None).unwrap_err();
        assert!(matches!(err, CapacityError::AlphaTooHigh { .. }));
    }

    #[test]
    fn flex_degenerate_scenarios_match_firm_point_box() {
        let net = two_bus(8.0);
        let same = ScenarioSet::new(vec![vec![0.0, 2.0]; 5]).unwrap();
        let flex = solve_flex_companion_lp(&net, &same, alpha(0.5), None).unwrap();
        let firm = solve_firm_companion_lp(&net, &BoxBounds::point(vec![0.0, 2.0]).unwrap(), None).unwrap();
        assert!(close(flex.total, firm.total));
        assert!(close(flex.total, 6.0));
    }

    #[test]
    fn flex_variable_layout() {
        let net = two_bus(8.0);
        let model = FlexModel::new(&net, &scenarios(), alpha(0.5), None).unwrap();
        // one finite withdrawal cap plus upper and lower line rows
        assert_eq!(model.rows().len(), 3);
        assert_eq!(model.polyhedron().n_vars(), 2 + 3 + 3 * 4);
        assert_eq!(model.polyhedron().n_rows(), 3 + 3 * 4);
        assert_eq!(model.z_index(2, 3), model.polyhedron().n_vars() - 1);
        assert!(model.polyhedron().lower()[model.zeta_index(0)].is_infinite());
    }

    #[test]
    fn firm_row_layout() {
        let net = two_bus(8.0);
        let model = FirmModel::new(&net, &two_bus_box(0.0, 3.0), None).unwrap();
        assert_eq!(model.polyhedron().n_rows(), 2 + 2);
        assert_eq!(model.polyhedron().label(2), "line 1 upper");
        assert_eq!(model.worst_up(), &[3.0]);
    }

    #[test]
    fn shift_dimension_checked() {
        let net = two_bus(8.0);
        let bad = DenseMatrix::zeros(2, 2);
        assert!(matches!(
            solve_firm(&net, &two_bus_box(0.0, 3.0), Some(&bad)),
            Err(CapacityError::ShiftDimension { .. })
        ));
    }
}
