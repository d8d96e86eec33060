//! Background-load uncertainty: sampled scenarios, box bounds, and the
//! empirical CVaR / worst-case quantities built from them.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::DenseMatrix;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RiskError {
    #[error("empty sample")]
    EmptySample,
    #[error("confidence level {0} outside [0, 1)")]
    InvalidAlpha(f64),
    #[error("scenario row {row} has {got} entries, expected {expected}")]
    RaggedScenario { row: usize, expected: usize, got: usize },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("box lower bound exceeds upper bound at bus {0}")]
    InvertedBox(usize),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

/// `Ns` equiprobable samples of the background load, one row per sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSet {
    samples: Vec<Vec<f64>>,
}

impl ScenarioSet {
    pub fn new(samples: Vec<Vec<f64>>) -> Result<Self, RiskError> {
        let width = samples.first().ok_or(RiskError::EmptySample)?.len();
        for (row, s) in samples.iter().enumerate() {
            if s.len() != width {
                return Err(RiskError::RaggedScenario {
                    row,
                    expected: width,
                    got: s.len(),
                });
            }
            if s.iter().any(|v| !v.is_finite()) {
                return Err(RiskError::NonFinite("scenario"));
            }
        }
        Ok(Self { samples })
    }

    pub fn count(&self) -> usize {
        self.samples.len()
    }

    pub fn n_buses(&self) -> usize {
        self.samples[0].len()
    }

    pub fn samples(&self) -> &[Vec<f64>] {
        &self.samples
    }

    pub fn column(&self, bus: usize) -> Vec<f64> {
        self.samples.iter().map(|s| s[bus]).collect()
    }

    /// Componentwise min/max over the samples.
    pub fn hull(&self) -> BoxBounds {
        let n = self.n_buses();
        let mut lower = vec![f64::INFINITY; n];
        let mut upper = vec![f64::NEG_INFINITY; n];
        for s in &self.samples {
            for i in 0..n {
                lower[i] = lower[i].min(s[i]);
                upper[i] = upper[i].max(s[i]);
            }
        }
        BoxBounds { lower, upper }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxBounds {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl BoxBounds {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self, RiskError> {
        if lower.len() != upper.len() {
            return Err(RiskError::DimensionMismatch {
                expected: lower.len(),
                got: upper.len(),
            });
        }
        if lower.iter().chain(&upper).any(|v| !v.is_finite()) {
            return Err(RiskError::NonFinite("box bounds"));
        }
        if let Some(i) = (0..lower.len()).find(|&i| lower[i] > upper[i]) {
            return Err(RiskError::InvertedBox(i));
        }
        Ok(Self { lower, upper })
    }

    /// The degenerate box `{l}`.
    pub fn point(l: Vec<f64>) -> Result<Self, RiskError> {
        Self::new(l.clone(), l)
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn len(&self) -> usize {
        self.lower.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lower.is_empty()
    }
}

/// Confidence level `α ∈ [0, 1)`; the tolerated risk is `1 - α`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct RiskLevel(f64);

impl RiskLevel {
    pub fn new(alpha: f64) -> Result<Self, RiskError> {
        if (0.0..1.0).contains(&alpha) {
            Ok(Self(alpha))
        } else {
            Err(RiskError::InvalidAlpha(alpha))
        }
    }

    pub fn alpha(self) -> f64 {
        self.0
    }

    pub fn risk(self) -> f64 {
        1.0 - self.0
    }

    /// `(1 - α) Ns`, the probability mass of the tail in sample units.
    pub fn tail_mass(self, ns: usize) -> f64 {
        (1.0 - self.0) * ns as f64
    }
}

impl TryFrom<f64> for RiskLevel {
    type Error = RiskError;
    fn try_from(alpha: f64) -> Result<Self, RiskError> {
        Self::new(alpha)
    }
}

impl From<RiskLevel> for f64 {
    fn from(r: RiskLevel) -> f64 {
        r.0
    }
}

/// Confidence levels for each CVaR-constrained row family.
///
/// `Uniform` broadcasts one level to every row; `PerRow` carries one level
/// per bus (withdrawal rows) and per line (upper and lower rows).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum AlphaProfile {
    Uniform(RiskLevel),
    PerRow {
        withdrawal: Vec<RiskLevel>,
        line_upper: Vec<RiskLevel>,
        line_lower: Vec<RiskLevel>,
    },
}

impl AlphaProfile {
    pub fn withdrawal(&self, bus: usize) -> RiskLevel {
        match self {
            Self::Uniform(a) => *a,
            Self::PerRow { withdrawal, .. } => withdrawal[bus],
        }
    }

    pub fn line_upper(&self, edge: usize) -> RiskLevel {
        match self {
            Self::Uniform(a) => *a,
            Self::PerRow { line_upper, .. } => line_upper[edge],
        }
    }

    pub fn line_lower(&self, edge: usize) -> RiskLevel {
        match self {
            Self::Uniform(a) => *a,
            Self::PerRow { line_lower, .. } => line_lower[edge],
        }
    }

    pub fn uniform_alpha(&self) -> Option<f64> {
        match self {
            Self::Uniform(a) => Some(a.alpha()),
            Self::PerRow { .. } => None,
        }
    }

    /// The largest level in use; it determines the smallest tail.
    pub fn max_level(&self) -> RiskLevel {
        match self {
            Self::Uniform(a) => *a,
            Self::PerRow {
                withdrawal,
                line_upper,
                line_lower,
            } => withdrawal
                .iter()
                .chain(line_upper)
                .chain(line_lower)
                .copied()
                .fold(RiskLevel(0.0), |a, b| if b.0 > a.0 { b } else { a }),
        }
    }
}

impl From<RiskLevel> for AlphaProfile {
    fn from(a: RiskLevel) -> Self {
        Self::Uniform(a)
    }
}

/// Empirical CVaR of equiprobable samples at level `alpha`.
///
/// Sorted-tail closed form of `min_ζ ζ + Σ_s (x_s - ζ)_+ / ((1-α) Ns)`: the
/// average of the largest `(1-α) Ns` samples, with the boundary sample
/// entering at fractional weight.
pub fn empirical_cvar(values: &[f64], alpha: RiskLevel) -> Result<f64, RiskError> {
    if values.is_empty() {
        return Err(RiskError::EmptySample);
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(RiskError::NonFinite("cvar sample"));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut mass = alpha.tail_mass(sorted.len());
    let nearest = mass.round();
    if (mass - nearest).abs() <= 1e-12 * nearest.max(1.0) {
        mass = nearest;
    }
    let whole = (mass.floor() as usize).min(sorted.len());
    let frac = mass - whole as f64;
    let mut acc: f64 = sorted[..whole].iter().sum();
    if frac > 0.0 && whole < sorted.len() {
        acc += frac * sorted[whole];
    }
    Ok(acc / mass)
}

/// Checks `CVaR(x + t) = CVaR(x) + t` to 1e-9.
pub fn cvar_translation_check(values: &[f64], shift: f64, alpha: RiskLevel) -> Result<bool, RiskError> {
    let base = empirical_cvar(values, alpha)?;
    let shifted: Vec<f64> = values.iter().map(|v| v + shift).collect();
    let moved = empirical_cvar(&shifted, alpha)?;
    Ok((moved - (base + shift)).abs() <= 1e-9)
}

/// Row-wise maximum and minimum of `S l` over the box.
///
/// `worst_up = S⁺ l̄ − S⁻ l̲`, `worst_down = S⁺ l̲ − S⁻ l̄`.
pub fn box_worst_case(s: &DenseMatrix, bounds: &BoxBounds) -> Result<(Vec<f64>, Vec<f64>), RiskError> {
    if s.ncols() != bounds.len() {
        return Err(RiskError::DimensionMismatch {
            expected: s.ncols(),
            got: bounds.len(),
        });
    }
    let (pos, neg) = (s.positive_part(), s.negative_part());
    let sub = |a: Vec<f64>, b: Vec<f64>| a.iter().zip(&b).map(|(x, y)| x - y).collect::<Vec<f64>>();
    let up = sub(pos.mul_vec(bounds.upper()), neg.mul_vec(bounds.lower()));
    let down = sub(pos.mul_vec(bounds.lower()), neg.mul_vec(bounds.upper()));
    Ok((up, down))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a(x: f64) -> RiskLevel {
        RiskLevel::new(x).unwrap()
    }

    /// Minimum of the Rockafellar objective over the sample breakpoints.
    fn breakpoint_oracle(values: &[f64], alpha: f64) -> f64 {
        let w = 1.0 / ((1.0 - alpha) * values.len() as f64);
        values
            .iter()
            .map(|&z| z + w * values.iter().map(|v| (v - z).max(0.0)).sum::<f64>())
            .fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn cvar_examples() {
        assert_eq!(empirical_cvar(&[1.0, 2.0, 3.0, 4.0], a(0.0)).unwrap(), 2.5);
        assert!((empirical_cvar(&[7.0; 3], a(0.6)).unwrap() - 7.0).abs() < 1e-12);
        assert_eq!(empirical_cvar(&[1.0, 2.0, 3.0, 4.0], a(0.75)).unwrap(), 4.0);
        assert_eq!(empirical_cvar(&[0.0, 1.0, 2.0, 3.0], a(0.5)).unwrap(), 2.5);
        assert_eq!(empirical_cvar(&[], a(0.5)), Err(RiskError::EmptySample));
    }

    #[test]
    fn cvar_fractional_tail_matches_breakpoint_oracle() {
        let v = [3.0, -1.0, 4.0, 1.0, 5.0, 9.0, 2.0];
        for alpha in [0.0, 0.1, 0.3, 0.5, 0.77, 0.9, 0.95] {
            let got = empirical_cvar(&v, a(alpha)).unwrap();
            assert!((got - breakpoint_oracle(&v, alpha)).abs() < 1e-12, "alpha {alpha}");
        }
    }

    #[test]
    fn translation_examples() {
        assert!(cvar_translation_check(&[1.0, 2.0, 3.0, 4.0], 5.0, a(0.75)).unwrap());
        assert!(cvar_translation_check(&[0.0], 0.0, a(0.0)).unwrap());
        assert!(cvar_translation_check(&[1.0, 2.0], -3.0, a(0.5)).unwrap());
        assert_eq!(empirical_cvar(&[-2.0, -1.0], a(0.5)).unwrap(), -1.0);
    }

    #[test]
    fn alpha_bounds() {
        assert!(RiskLevel::new(1.0).is_err());
        assert!(RiskLevel::new(-0.1).is_err());
        assert!(RiskLevel::new(f64::NAN).is_err());
    }

    #[test]
    fn worst_case_examples() {
        let b = BoxBounds::new(vec![0.0, 0.0], vec![3.0, 3.0]).unwrap();
        let s = DenseMatrix::from_rows(&[[1.0, 1.0]]).unwrap();
        assert_eq!(box_worst_case(&s, &b).unwrap(), (vec![6.0], vec![0.0]));
        let s = DenseMatrix::from_rows(&[[1.0, -1.0]]).unwrap();
        assert_eq!(box_worst_case(&s, &b).unwrap(), (vec![3.0], vec![-3.0]));
        let s = DenseMatrix::zeros(2, 2);
        assert_eq!(box_worst_case(&s, &b).unwrap(), (vec![0.0; 2], vec![0.0; 2]));
        let s = DenseMatrix::zeros(1, 3);
        assert!(box_worst_case(&s, &b).is_err());
    }

    #[test]
    fn scenario_validation() {
        assert_eq!(ScenarioSet::new(vec![]), Err(RiskError::EmptySample));
        assert!(ScenarioSet::new(vec![vec![1.0], vec![1.0, 2.0]]).is_err());
        let s = ScenarioSet::new(vec![vec![0.0, 1.0], vec![0.0, 3.0]]).unwrap();
        assert_eq!(s.hull().upper(), &[0.0, 3.0]);
        assert!(BoxBounds::new(vec![1.0], vec![0.0]).is_err());
    }
}
