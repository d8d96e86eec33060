//! Single-coordinate augmentation on the tree polyhedron
//! `0 <= c <= c̄, b̲ <= A c <= b̄, c_i = 0 on Ω`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::network::{build_path_matrix, PathMatrix, RadialNetwork};
use crate::risk::{box_worst_case, BoxBounds, RiskError};

const TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AugmentError {
    #[error("no augmentation: {0}")]
    NoAugmentation(String),
    #[error("infeasible input: {0}")]
    InfeasibleInput(String),
    #[error("vector has length {got}, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Risk(#[from] RiskError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Augmentation {
    /// 0-based bus index.
    pub bus: usize,
    pub epsilon: f64,
}

#[derive(Debug, Clone)]
pub struct TreePolyhedron<'a> {
    net: &'a RadialNetwork,
    path: PathMatrix,
    cap: Vec<f64>,
    upper: Vec<f64>,
    lower: Vec<f64>,
}

impl<'a> TreePolyhedron<'a> {
    /// Deterministic limits: `c̄ = q̄`, line limits as given.
    pub fn from_network(net: &'a RadialNetwork) -> Self {
        Self {
            net,
            path: build_path_matrix(net),
            cap: net.withdrawal_cap().to_vec(),
            upper: net.line_upper().to_vec(),
            lower: net.line_lower().to_vec(),
        }
    }

    /// Limits tightened by the worst case of a background-load box.
    pub fn from_firm(net: &'a RadialNetwork, bounds: &BoxBounds) -> Result<Self, AugmentError> {
        if bounds.len() != net.n_buses() {
            return Err(AugmentError::DimensionMismatch {
                expected: net.n_buses(),
                got: bounds.len(),
            });
        }
        let path = build_path_matrix(net);
        let (up, down) = box_worst_case(&path.to_dense(), bounds)?;
        Ok(Self {
            net,
            cap: net.withdrawal_cap().iter().zip(bounds.upper()).map(|(q, l)| q - l).collect(),
            upper: net.line_upper().iter().zip(&up).map(|(b, w)| b - w).collect(),
            lower: net.line_lower().iter().zip(&down).map(|(b, w)| b - w).collect(),
            path,
        })
    }

    pub fn cap(&self) -> &[f64] {
        &self.cap
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    /// First violated constraint, if any.
    pub fn violation(&self, c: &[f64]) -> Option<String> {
        for (i, (&ci, &cap)) in c.iter().zip(&self.cap).enumerate() {
            if !ci.is_finite() {
                return Some(format!("bus {} value is not finite", i + 1));
            }
            if ci < -TOL {
                return Some(format!("bus {} is negative", i + 1));
            }
            if ci > cap + TOL {
                return Some(format!("bus {} exceeds its cap", i + 1));
            }
            if !self.net.is_requesting(i) && ci.abs() > TOL {
                return Some(format!("bus {} has no request but nonzero capacity", i + 1));
            }
        }
        let flows = self.path.flows(c);
        for (e, f) in flows.iter().enumerate() {
            if *f > self.upper[e] + TOL {
                return Some(format!("line {} upper", e + 1));
            }
            if *f < self.lower[e] - TOL {
                return Some(format!("line {} lower", e + 1));
            }
        }
        None
    }

    pub fn is_feasible(&self, c: &[f64]) -> bool {
        c.len() == self.net.n_buses() && self.violation(c).is_none()
    }

    /// Upper-limit slack `r_e = b̄_e - (A c)_e` per edge.
    pub fn slack(&self, c: &[f64]) -> Vec<f64> {
        self.path.flows(c).iter().zip(&self.upper).map(|(f, b)| b - f).collect()
    }

    /// Finds a bus `j` with `c_j < ĉ_j` whose root path carries no tight
    /// upper limit, and the largest step along `e_j` bounded by `ĉ_j - c_j`
    /// and the path slacks.
    pub fn find_augmenting_index(&self, c: &[f64], c_hat: &[f64]) -> Result<Augmentation, AugmentError> {
        let n = self.net.n_buses();
        for v in [c, c_hat] {
            if v.len() != n {
                return Err(AugmentError::DimensionMismatch {
                    expected: n,
                    got: v.len(),
                });
            }
        }
        if let Some(why) = self.violation(c) {
            return Err(AugmentError::InfeasibleInput(format!("c: {why}")));
        }
        let requests = self.net.request_set();
        let total = |v: &[f64]| requests.iter().map(|&i| v[i]).sum::<f64>();
        if total(c_hat) - total(c) <= n as f64 * TOL {
            return Err(AugmentError::NoAugmentation(
                "target total does not exceed the current total".into(),
            ));
        }

        let slack = self.slack(c);
        let candidate = requests.iter().copied().find_map(|j| {
            let gain = c_hat[j] - c[j];
            if gain <= TOL {
                return None;
            }
            let path = self.net.root_path_edges(j);
            if path.iter().any(|&e| slack[e] <= TOL) {
                return None;
            }
            let room = path.iter().map(|&e| slack[e]).fold(gain, f64::min);
            Some(Augmentation { bus: j, epsilon: room })
        });
        let Some(step) = candidate else {
            return Err(AugmentError::NoAugmentation(
                "every bus with room to grow sits below a tight line".into(),
            ));
        };
        if let Some(why) = self.violation(c_hat) {
            return Err(AugmentError::InfeasibleInput(format!("c_hat: {why}")));
        }
        Ok(step)
    }
}

/// Augmentation on the deterministic tree polyhedron of `net`.
pub fn find_augmenting_index(net: &RadialNetwork, c: &[f64], c_hat: &[f64]) -> Result<Augmentation, AugmentError> {
    TreePolyhedron::from_network(net).find_augmenting_index(c, c_hat)
}
