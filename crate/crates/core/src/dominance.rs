//! First-order stochastic dominance between optimal answer distributions,
//! and the comparison of each loss class against the uniform null.

use serde::Serialize;

use crate::entropy::ClassDistribution;
use crate::error::{Error, Result};
use crate::gibbs::GibbsSolution;

/// Absolute slack on CDF gaps before a dominance violation is reported.
pub const DOMINANCE_TOLERANCE: f64 = 1e-10;

/// Tolerance used to call a class probability equal to the null's.
pub const NULL_COMPARISON_TOLERANCE: f64 = 1e-12;

/// `P(loss ≤ ℓ_k)` for each class `k`, in loss-ascending order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LossCdf {
    pub losses: Vec<u32>,
    pub cdf: Vec<f64>,
}

impl LossCdf {
    /// Largest value of `self.cdf - other.cdf` over all thresholds.
    ///
    /// When this is at most zero, the loss under `self` is stochastically
    /// smaller than under `other`.
    pub fn max_excess_over(&self, other: &LossCdf) -> Result<f64> {
        if self.losses != other.losses {
            return Err(Error::TableMismatch);
        }
        Ok(self
            .cdf
            .iter()
            .zip(&other.cdf)
            .map(|(a, b)| a - b)
            .fold(f64::NEG_INFINITY, f64::max))
    }
}

pub fn loss_cdf(dist: &ClassDistribution) -> LossCdf {
    let mut acc = 0.0;
    let cdf = dist
        .class_masses()
        .into_iter()
        .map(|m| {
            acc += m;
            acc
        })
        .collect();
    LossCdf {
        losses: dist.table().losses().to_vec(),
        cdf,
    }
}

/// Outcome of a dominance comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FosdVerdict {
    /// Whether the loss under the `high` distribution dominates the loss
    /// under the `low` one.
    pub dominates: bool,
    /// `max_t P(loss ≤ t | high) - P(loss ≤ t | low)`; positive values are
    /// violations.
    pub max_violation: f64,
}

/// Compares two class distributions on the same table without any
/// requirement on their entropy order.
pub fn fosd_compare(low: &ClassDistribution, high: &ClassDistribution) -> Result<FosdVerdict> {
    if low.table() != high.table() {
        return Err(Error::TableMismatch);
    }
    let max_violation = loss_cdf(high).max_excess_over(&loss_cdf(low))?;
    Ok(FosdVerdict {
        dominates: max_violation <= DOMINANCE_TOLERANCE,
        max_violation,
    })
}

/// Checks that the higher-entropy solution's loss first-order dominates the
/// lower-entropy one's.
pub fn fosd_check(low: &GibbsSolution, high: &GibbsSolution) -> Result<FosdVerdict> {
    if low.table() != high.table() {
        return Err(Error::TableMismatch);
    }
    if low.target > high.target {
        return Err(Error::UnorderedEntropies {
            low: low.target.value(),
            high: high.target.value(),
        });
    }
    fosd_compare(&low.dist, &high.dist)
}

/// `Σ_k u(v_k) a_k p_k` for an arbitrary per-class value `v`.
pub fn expected_utility(dist: &ClassDistribution, values: &[u32], u: impl Fn(u32) -> f64) -> f64 {
    dist.class_masses()
        .iter()
        .zip(values)
        .map(|(m, &v)| m * u(v))
        .sum()
}

/// Number of sign changes along the class index of `p - q`, ignoring
/// entries within `tol` of zero.
pub fn sign_changes(p: &[f64], q: &[f64], tol: f64) -> usize {
    let signs: Vec<f64> = p
        .iter()
        .zip(q)
        .map(|(a, b)| a - b)
        .filter(|d| d.abs() > tol)
        .map(f64::signum)
        .collect();
    signs.windows(2).filter(|w| w[0] != w[1]).count()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum NullRelation {
    Above,
    Equal,
    Below,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassComparison {
    pub class: usize,
    pub loss: u32,
    pub successes: u32,
    pub probability: f64,
    pub null_probability: f64,
    pub relation: NullRelation,
    /// Whether the class loss coincides with the null mean loss.
    pub at_null_mean: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NullComparison {
    pub classes: Vec<ClassComparison>,
    /// `2n (N - n) / N`.
    pub null_mean_loss: f64,
}

impl NullComparison {
    /// The class sitting exactly on the null mean loss, if there is one.
    pub fn boundary_class(&self) -> Option<&ClassComparison> {
        self.classes.iter().find(|c| c.at_null_mean)
    }
}

/// Labels each class by whether an optimal taster assigns each of its
/// assignments more, the same, or less probability than the null does.
pub fn classify_vs_null(solution: &GibbsSolution) -> NullComparison {
    classify_distribution_vs_null(&solution.dist)
}

pub fn classify_distribution_vs_null(dist: &ClassDistribution) -> NullComparison {
    let table = dist.table();
    let design = table.design();
    let null_p = 1.0 / table.total() as f64;
    let null_mean_loss = 2.0 * f64::from(design.tm()) * f64::from(design.cups() - design.tm())
        / f64::from(design.cups());
    let classes = dist
        .probabilities()
        .iter()
        .enumerate()
        .map(|(k, &p)| {
            let diff = p - null_p;
            let relation = if diff.abs() <= NULL_COMPARISON_TOLERANCE {
                NullRelation::Equal
            } else if diff > 0.0 {
                NullRelation::Above
            } else {
                NullRelation::Below
            };
            let loss = table.losses()[k];
            ClassComparison {
                class: k,
                loss,
                successes: table.successes()[k],
                probability: p,
                null_probability: null_p,
                relation,
                at_null_mean: f64::from(loss) == null_mean_loss,
            }
        })
        .collect();
    NullComparison {
        classes,
        null_mean_loss,
    }
}
