//! Shannon entropy (in nats) of finite distributions, element-wise and in
//! the loss-class parameterization.

use std::sync::Arc;

use serde::Serialize;

use crate::combinatorics::{
    enumerate_assignments, loss, Assignment, ExperimentDesign, LossClassTable,
};
use crate::error::{Error, Result};

/// Normalization slack accepted by [`shannon_entropy`].
pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-9;

/// Normalization slack accepted when building a [`ClassDistribution`].
pub const CLASS_MASS_TOLERANCE: f64 = 1e-12;

/// `-sum w log w`, with `0 log 0 = 0`.
pub fn shannon_entropy(weights: &[f64]) -> Result<f64> {
    if let Some(w) = weights.iter().find(|w| !(**w >= 0.0) || !w.is_finite()) {
        return Err(Error::InvalidDistribution(format!(
            "weight {w} is negative or not finite"
        )));
    }
    let sum: f64 = weights.iter().sum();
    if (sum - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
        return Err(Error::InvalidDistribution(format!(
            "weights sum to {sum}, not 1"
        )));
    }
    Ok(-weights
        .iter()
        .filter(|&&w| w > 0.0)
        .map(|&w| w * w.ln())
        .sum::<f64>())
}

/// Per-assignment probabilities on the loss classes of a table.
///
/// `p[k]` is the probability of each single assignment in class `k`, so the
/// class as a whole carries mass `a[k] * p[k]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassDistribution {
    #[serde(skip)]
    table: Arc<LossClassTable>,
    p: Vec<f64>,
}

impl ClassDistribution {
    pub fn new(table: Arc<LossClassTable>, p: Vec<f64>) -> Result<Self> {
        if p.len() != table.len() {
            return Err(Error::InvalidDistribution(format!(
                "expected {} class probabilities, got {}",
                table.len(),
                p.len()
            )));
        }
        if let Some(v) = p.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
            return Err(Error::InvalidDistribution(format!(
                "class probability {v} is negative or not finite"
            )));
        }
        let mass: f64 = table
            .multiplicities()
            .iter()
            .zip(&p)
            .map(|(&a, &pk)| a as f64 * pk)
            .sum();
        if (mass - 1.0).abs() > CLASS_MASS_TOLERANCE {
            return Err(Error::InvalidDistribution(format!(
                "class masses sum to {mass}, not 1"
            )));
        }
        Ok(Self { table, p })
    }

    /// Builds a distribution from class masses `a[k] p[k]` instead of
    /// per-assignment probabilities.
    pub fn from_masses(table: Arc<LossClassTable>, masses: &[f64]) -> Result<Self> {
        if masses.len() != table.len() {
            return Err(Error::InvalidDistribution(format!(
                "expected {} class masses, got {}",
                table.len(),
                masses.len()
            )));
        }
        let p = masses
            .iter()
            .zip(table.multiplicities())
            .map(|(&m, &a)| m / a as f64)
            .collect();
        Self::new(table, p)
    }

    /// Every assignment equally likely.
    pub fn uniform(table: Arc<LossClassTable>) -> Self {
        let p = vec![1.0 / table.total() as f64; table.len()];
        Self { table, p }
    }

    /// All mass on class `k`. Requires `a[k] = 1` for a true point mass,
    /// otherwise the mass is spread evenly over the class.
    pub fn point_mass(table: Arc<LossClassTable>, k: usize) -> Result<Self> {
        if k >= table.len() {
            return Err(Error::InvalidArgument(format!("class {k} out of range")));
        }
        let mut p = vec![0.0; table.len()];
        p[k] = 1.0 / table.multiplicities()[k] as f64;
        Ok(Self { table, p })
    }

    pub fn table(&self) -> &LossClassTable {
        &self.table
    }

    pub fn shared_table(&self) -> &Arc<LossClassTable> {
        &self.table
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.p
    }

    /// Class masses `a[k] p[k]`, in loss-ascending order.
    pub fn class_masses(&self) -> Vec<f64> {
        self.table
            .multiplicities()
            .iter()
            .zip(&self.p)
            .map(|(&a, &pk)| a as f64 * pk)
            .collect()
    }

    pub fn expected_loss(&self) -> f64 {
        self.expectation(self.table.losses())
    }

    pub fn expected_successes(&self) -> f64 {
        self.expectation(self.table.successes())
    }

    fn expectation(&self, values: &[u32]) -> f64 {
        self.class_masses()
            .iter()
            .zip(values)
            .map(|(m, &v)| m * f64::from(v))
            .sum()
    }

    /// Probability of a single assignment `x` given the truth `y`.
    pub fn probability_of(&self, x: &Assignment, y: &Assignment) -> Result<f64> {
        let l = loss(x, y)?;
        let k = self.table.class_of_loss(l).ok_or(Error::DesignMismatch)?;
        Ok(self.p[k])
    }

    /// The element-wise distribution over every assignment, given the truth
    /// `y`, in enumeration order.
    pub fn expand(&self, y: &Assignment) -> Result<Vec<f64>> {
        if y.design() != self.table.design() {
            return Err(Error::DesignMismatch);
        }
        enumerate_assignments(self.table.design())?
            .iter()
            .map(|x| self.probability_of(x, y))
            .collect()
    }
}

/// `-sum_k a_k p_k log p_k`, skipping empty classes.
pub fn class_entropy(dist: &ClassDistribution) -> f64 {
    -dist
        .table
        .multiplicities()
        .iter()
        .zip(&dist.p)
        .filter(|(_, &p)| p > 0.0)
        .map(|(&a, &p)| a as f64 * p * p.ln())
        .sum::<f64>()
}

/// An entropy level in nats. Always finite and strictly positive.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct EntropyLevel(f64);

impl EntropyLevel {
    pub fn new(h: f64) -> Result<Self> {
        if !h.is_finite() || h <= 0.0 {
            return Err(Error::InfeasibleEntropy {
                h,
                min: 0.0,
                max: f64::INFINITY,
            });
        }
        Ok(Self(h))
    }

    /// `fraction * log C(N, n)`, with `fraction` in `(0, 1]`.
    pub fn fraction_of_max(design: ExperimentDesign, fraction: f64) -> Result<Self> {
        if !(fraction > 0.0 && fraction <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "entropy fraction {fraction} must lie in (0, 1]"
            )));
        }
        let max = max_entropy(design).value();
        if fraction == 1.0 {
            return Ok(Self(max));
        }
        Self::new(fraction * max)
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// `log C(N, n)`: the entropy of the uniform null.
pub fn max_entropy(design: ExperimentDesign) -> EntropyLevel {
    EntropyLevel((design.assignment_count() as f64).ln())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinatorics::relabel;

    fn table(n: u32, k: u32) -> Arc<LossClassTable> {
        Arc::new(LossClassTable::new(ExperimentDesign::new(n, k).unwrap()).unwrap())
    }

    #[test]
    fn shannon_examples() {
        assert!((shannon_entropy(&[0.5, 0.5]).unwrap() - 2f64.ln()).abs() < 1e-15);
        assert_eq!(shannon_entropy(&[1.0, 0.0, 0.0]).unwrap(), 0.0);
        // -(0.7 ln 0.7 + 0.2 ln 0.2 + 0.1 ln 0.1), evaluated at 30 digits
        assert!(
            (shannon_entropy(&[0.7, 0.2, 0.1]).unwrap() - 0.801_818_552_543_337_3).abs() < 1e-12
        );
    }

    #[test]
    fn shannon_rejects_bad_input() {
        assert!(shannon_entropy(&[-0.1, 1.1]).is_err());
        assert!(shannon_entropy(&[0.5, 0.4]).is_err());
        assert!(shannon_entropy(&[f64::NAN, 1.0]).is_err());
    }

    #[test]
    fn class_entropy_examples() {
        let t = table(8, 4);
        let u = ClassDistribution::uniform(t.clone());
        assert!((class_entropy(&u) - 70f64.ln()).abs() < 1e-12);
        assert!((70f64.ln() - 4.248_495_242_049_359).abs() < 1e-12);
        let d = ClassDistribution::point_mass(t, 0).unwrap();
        assert_eq!(class_entropy(&d), 0.0);
    }

    #[test]
    fn distribution_validation() {
        let t = table(4, 2);
        assert!(ClassDistribution::new(t.clone(), vec![0.5, 0.5]).is_err());
        assert!(ClassDistribution::new(t.clone(), vec![0.5, 0.2, 0.1]).is_err());
        assert!(ClassDistribution::new(t.clone(), vec![-0.2, 0.3, 0.0]).is_err());
        assert!(ClassDistribution::new(t.clone(), vec![0.2, 0.1, 0.4]).is_ok());
        let d = ClassDistribution::from_masses(t, &[0.2, 0.4, 0.4]).unwrap();
        assert!((d.probabilities()[1] - 0.1).abs() < 1e-15);
    }

    #[test]
    fn max_entropy_examples() {
        assert!(
            (max_entropy(ExperimentDesign::new(8, 4).unwrap()).value() - 70f64.ln()).abs() < 1e-15
        );
        assert!(
            (max_entropy(ExperimentDesign::new(2, 1).unwrap()).value() - 2f64.ln()).abs() < 1e-15
        );
        assert!(
            (max_entropy(ExperimentDesign::new(12, 6).unwrap()).value() - 924f64.ln()).abs()
                < 1e-15
        );
    }

    #[test]
    fn expansion_matches_class_entropy() {
        let t = table(6, 3);
        let d = ClassDistribution::from_masses(t.clone(), &[0.4, 0.3, 0.2, 0.1]).unwrap();
        let y = Assignment::first_n(t.design());
        let expanded = d.expand(&y).unwrap();
        assert_eq!(expanded.len(), 20);
        assert!((expanded.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let h = shannon_entropy(&expanded).unwrap();
        assert!((h - class_entropy(&d)).abs() < 1e-12);
        // truth itself gets class-0 probability
        assert_eq!(d.probability_of(&y, &y).unwrap(), 0.4);
        let far = relabel(&y).unwrap();
        assert!((d.probability_of(&far, &y).unwrap() - 0.1).abs() < 1e-15);
    }

    #[test]
    fn entropy_level_bounds() {
        assert!(EntropyLevel::new(0.0).is_err());
        assert!(EntropyLevel::new(-1.0).is_err());
        assert!(EntropyLevel::new(f64::INFINITY).is_err());
        let d = ExperimentDesign::tea_tasting();
        assert_eq!(
            EntropyLevel::fraction_of_max(d, 1.0).unwrap(),
            max_entropy(d)
        );
        assert!(EntropyLevel::fraction_of_max(d, 0.0).is_err());
        assert!(EntropyLevel::fraction_of_max(d, 1.5).is_err());
    }
}
