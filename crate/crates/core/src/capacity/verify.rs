//! Checks that the unserved-demand QP optimum also maximizes total capacity
//! on radial networks under scarcity.

use serde::{Deserialize, Serialize};

use super::{CapacityError, CapacitySolution, FirmModel, FlexModel};
use crate::linalg::DenseMatrix;
use crate::network::{build_path_matrix, RadialNetwork};
use crate::qp::QpSolver;
use crate::risk::{AlphaProfile, BoxBounds, ScenarioSet};

/// Largest `|Σ c^QP - Σ c^LP|` accepted on a scarce instance.
pub const TOTAL_GAP_TOL: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimalityCheck {
    Verified,
    /// Some requesting bus is fully served, so the claim does not apply.
    NotScarce,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TotalsReport {
    pub qp_total: f64,
    pub lp_total: f64,
    pub gap: f64,
    pub status: OptimalityCheck,
    /// `gap <= TOTAL_GAP_TOL` on a scarce instance; `None` when not scarce.
    pub holds: Option<bool>,
}

impl TotalsReport {
    fn new(net: &RadialNetwork, qp: &CapacitySolution, lp: &CapacitySolution) -> Self {
        let gap = (qp.total - lp.total).abs();
        let status = if qp.is_scarce(net) {
            OptimalityCheck::Verified
        } else {
            OptimalityCheck::NotScarce
        };
        TotalsReport {
            qp_total: qp.total,
            lp_total: lp.total,
            gap,
            status,
            holds: (status == OptimalityCheck::Verified).then_some(gap <= TOTAL_GAP_TOL),
        }
    }
}

fn require_path_matrix(net: &RadialNetwork, shift: Option<&DenseMatrix>) -> Result<(), CapacityError> {
    match shift {
        Some(s) if !build_path_matrix(net).matches(s) => Err(CapacityError::NotPathMatrix),
        _ => Ok(()),
    }
}

/// Solves the firm QP and its total-capacity LP and compares totals.
pub fn verify_firm_total_optimality(
    net: &RadialNetwork,
    bounds: &BoxBounds,
    shift: Option<&DenseMatrix>,
) -> Result<TotalsReport, CapacityError> {
    require_path_matrix(net, shift)?;
    let model = FirmModel::new(net, bounds, shift)?;
    let solver = QpSolver::default();
    let qp = model.solve(&solver)?;
    let lp = model.solve_total(&solver)?;
    Ok(TotalsReport::new(net, &qp, &lp))
}

/// Same comparison for the scenario CVaR model.
pub fn verify_flex_total_optimality(
    net: &RadialNetwork,
    scenarios: &ScenarioSet,
    alpha: impl Into<AlphaProfile>,
    shift: Option<&DenseMatrix>,
) -> Result<TotalsReport, CapacityError> {
    require_path_matrix(net, shift)?;
    let model = FlexModel::new(net, scenarios, alpha, shift)?;
    let solver = QpSolver::default();
    let qp = model.solve(&solver)?;
    let lp = model.solve_total(&solver)?;
    Ok(TotalsReport::new(net, &qp, &lp))
}
