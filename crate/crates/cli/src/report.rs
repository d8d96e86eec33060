//! Report types and their JSON encoding.
//!
//! Floats are rounded to 12 significant digits before printing so small
//! solver noise does not churn golden files. Keys come out sorted.

use serde::{Deserialize, Serialize};
use serde_json::{Number, Value};

use gridcap_core::auction::golden::RowMismatch;
use gridcap_core::auction::{AuctionOutcome, AuctionState, CeReport, EfficiencyReport, GsReport};
use gridcap_core::capacity::CapacitySolution;
use gridcap_core::sweep::SweepRecord;

use crate::CliError;

pub const SIGNIFICANT_DIGITS: usize = 12;

pub fn round_significant(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x).parse().unwrap_or(x)
}

fn round_numbers(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            if let Some(r) = n.as_f64().map(round_significant).and_then(Number::from_f64) {
                *n = r;
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_numbers),
        Value::Object(map) => map.values_mut().for_each(round_numbers),
        _ => {}
    }
}

/// Pretty JSON with rounded floats and a trailing newline.
pub fn to_json<T: Serialize>(report: &T) -> Result<String, CliError> {
    let mut v = serde_json::to_value(report).map_err(|e| CliError::Output(e.to_string()))?;
    round_numbers(&mut v);
    let mut s = serde_json::to_string_pretty(&v).map_err(|e| CliError::Output(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlexReport {
    #[serde(flatten)]
    pub solution: CapacitySolution,
    /// `c^r - c^f` against the firm solve on the file's box, when present
    /// and feasible.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c_incremental: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub firm_total: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuctionReport {
    pub epsilon: f64,
    #[serde(flatten)]
    pub outcome: AuctionOutcome,
    pub ce_modified_holds: bool,
    pub ce: CeReport,
    /// Absent when exhaustive search over assignments is too large.
    pub efficiency_gap: Option<f64>,
    pub efficiency: Option<EfficiencyReport>,
}

/// Written instead of an [`AuctionReport`] when the round cap is hit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundLimitReport {
    pub max_rounds: usize,
    pub state: AuctionState,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub suite: String,
    pub base_seed: u64,
    pub instances: usize,
    pub solves: usize,
    pub scarce: usize,
    pub max_scarce_gap: f64,
    pub passed: bool,
    pub failures: Vec<SweepRecord>,
    pub errors: Vec<(u64, String)>,
    pub monotonicity_violations: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GsClass {
    pub name: String,
    pub expect_pass: bool,
    pub report: GsReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GsSuiteReport {
    pub suite: String,
    pub seed: u64,
    pub trials: usize,
    pub classes: Vec<GsClass>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableCase {
    pub name: String,
    pub rows_per_table: Vec<usize>,
    /// Listed prices and allocation form an equilibrium for the modified
    /// valuations.
    pub ce_holds: bool,
    pub mismatches: Vec<RowMismatch>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TablesReport {
    pub suite: String,
    pub cases: Vec<TableCase>,
    pub rows_checked: usize,
    pub passed: bool,
}
