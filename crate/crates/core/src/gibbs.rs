//! Entropy-constrained minimization of expected misclassification.
//!
//! Among all answer distributions with entropy `h`, the one with the lowest
//! expected loss puts probability `p_k ∝ exp(β b_k)` on every assignment of
//! loss class `k`, where `b_k` is its success count. `β = 0` is the uniform
//! null (`h = log C(N, n)`) and `β → ∞` concentrates on the truth (`h → 0`).
//! The entropy is strictly decreasing in `β`, so each feasible `h` pins down
//! a unique `β`, found here by bracketed bisection.
//!
//! Everything is evaluated relative to the largest score: weights are
//! `a_k exp(β (b_k - b_max))`, which never overflow for finite `β`.

use std::sync::Arc;

use serde::Serialize;

use crate::combinatorics::LossClassTable;
use crate::entropy::{ClassDistribution, EntropyLevel};
use crate::error::{Error, Result};

/// Default absolute tolerance on the entropy residual.
pub const DEFAULT_ENTROPY_TOLERANCE: f64 = 1e-10;

/// Entropies at or below this (above the family's floor) are treated as the
/// Dirac limit rather than solved for.
pub const ENTROPY_FLOOR: f64 = 1e-9;

/// Bisection stops once the bracket is narrower than this.
pub const BRACKET_WIDTH: f64 = 1e-13;

pub const DEFAULT_MAX_ITERATIONS: usize = 200;

/// Inverse temperature `β = 1/μ`, finite and non-negative.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct InverseTemperature(f64);

impl InverseTemperature {
    pub const ZERO: Self = Self(0.0);

    pub fn new(beta: f64) -> Result<Self> {
        if !beta.is_finite() || beta < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "inverse temperature must be finite and non-negative, got {beta}"
            )));
        }
        Ok(Self(beta))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// The multiplier `μ = 1/β`; infinite at `β = 0`.
    pub fn temperature(self) -> f64 {
        1.0 / self.0
    }
}

/// Which end of the loss scale the taster is pushed towards.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Orientation {
    /// Minimize expected misclassification (mass moves to loss 0).
    #[default]
    Minimize,
    /// Maximize it (mass moves to loss 2n).
    Maximize,
}

impl Orientation {
    fn sign(self) -> f64 {
        match self {
            Orientation::Minimize => 1.0,
            Orientation::Maximize => -1.0,
        }
    }
}

/// A finite exponential family `p_i ∝ exp(β s_i)` where outcome group `i`
/// holds `w_i` equally likely elements.
///
/// Loss-class tables use `w = a` and `s = ±b`; simplex paths use unit
/// weights and an arbitrary payoff.
#[derive(Debug, Clone, PartialEq)]
pub struct GibbsFamily {
    weights: Vec<f64>,
    scores: Vec<f64>,
    top: f64,
}

impl GibbsFamily {
    pub fn new(weights: Vec<f64>, scores: Vec<f64>) -> Result<Self> {
        if weights.is_empty() || weights.len() != scores.len() {
            return Err(Error::InvalidArgument(format!(
                "need matching non-empty weights and scores, got {} and {}",
                weights.len(),
                scores.len()
            )));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::InvalidArgument(
                "weights must be finite and positive".into(),
            ));
        }
        if scores.iter().any(|s| !s.is_finite()) {
            return Err(Error::InvalidArgument("scores must be finite".into()));
        }
        let top = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok(Self {
            weights,
            scores,
            top,
        })
    }

    pub fn from_table(table: &LossClassTable, orientation: Orientation) -> Self {
        let weights = table.multiplicities().iter().map(|&a| a as f64).collect();
        let scores = table
            .successes()
            .iter()
            .map(|&b| orientation.sign() * f64::from(b))
            .collect();
        Self::new(weights, scores).expect("loss-class tables are non-empty with positive sizes")
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

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    /// Shifted group weights `w_i exp(β (s_i - s_max))` and their sum.
    fn shifted(&self, beta: f64) -> (Vec<f64>, f64) {
        let w: Vec<f64> = self
            .weights
            .iter()
            .zip(&self.scores)
            .map(|(&wi, &s)| wi * (beta * (s - self.top)).exp())
            .collect();
        let sum = w.iter().sum();
        (w, sum)
    }

    /// Per-element probabilities.
    pub fn probabilities(&self, beta: f64) -> Vec<f64> {
        let (_, sum) = self.shifted(beta);
        self.scores
            .iter()
            .map(|&s| (beta * (s - self.top)).exp() / sum)
            .collect()
    }

    /// Group masses `w_i p_i`.
    pub fn masses(&self, beta: f64) -> Vec<f64> {
        let (w, sum) = self.shifted(beta);
        w.into_iter().map(|x| x / sum).collect()
    }

    /// `log Σ w_i exp(β s_i)`.
    pub fn log_normalizer(&self, beta: f64) -> f64 {
        beta * self.top + self.shifted(beta).1.ln()
    }

    /// Expected score under the family at `β`.
    pub fn mean_score(&self, beta: f64) -> f64 {
        self.masses(beta)
            .iter()
            .zip(&self.scores)
            .map(|(m, s)| m * s)
            .sum()
    }

    /// Entropy of the element-wise distribution at `β`.
    ///
    /// Written as `log S + β E[s_max - s]` with `S` the shifted normalizer:
    /// both terms are non-negative, so nothing cancels as `β` grows.
    pub fn entropy(&self, beta: f64) -> f64 {
        let (w, sum) = self.shifted(beta);
        let gap: f64 = w
            .iter()
            .zip(&self.scores)
            .map(|(wi, s)| wi / sum * (self.top - s))
            .sum();
        sum.ln() + beta * gap
    }

    /// Entropy at `β = 0`.
    pub fn max_entropy(&self) -> f64 {
        self.weights.iter().sum::<f64>().ln()
    }

    /// Limit of the entropy as `β → ∞`: the log of the total weight sharing
    /// the top score.
    pub fn min_entropy(&self) -> f64 {
        self.weights
            .iter()
            .zip(&self.scores)
            .filter(|(_, &s)| s == self.top)
            .map(|(w, _)| w)
            .sum::<f64>()
            .ln()
    }

    /// Groups sharing the top score.
    pub fn argmax(&self) -> Vec<usize> {
        self.scores
            .iter()
            .enumerate()
            .filter(|(_, &s)| s == self.top)
            .map(|(i, _)| i)
            .collect()
    }

    /// Finds `β ≥ 0` with `|entropy(β) - h| ≤ tol`.
    ///
    /// The bracket starts at `[0, 1]` and its right end doubles until the
    /// entropy falls below `h`; then it is bisected.
    pub fn solve_beta(
        &self,
        h: f64,
        tol: f64,
        max_iterations: usize,
    ) -> Result<InverseTemperature> {
        let floor = self.min_entropy() + ENTROPY_FLOOR;
        self.check_feasible(h, tol, floor)?;
        self.bisect(h, tol, max_iterations)
    }

    fn check_feasible(&self, h: f64, tol: f64, floor: f64) -> Result<()> {
        if !(tol > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "tolerance must be positive, got {tol}"
            )));
        }
        let max = self.max_entropy();
        if !h.is_finite() || h > max + tol || h <= floor {
            return Err(Error::InfeasibleEntropy { h, min: floor, max });
        }
        Ok(())
    }

    fn bisect(&self, h: f64, tol: f64, max_iterations: usize) -> Result<InverseTemperature> {
        let at_zero = self.entropy(0.0);
        if (at_zero - h).abs() <= tol {
            return Ok(InverseTemperature::ZERO);
        }
        let mut iterations = 0;
        let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
        let mut at_hi = self.entropy(hi);
        while at_hi > h {
            if (at_hi - h).abs() <= tol {
                return InverseTemperature::new(hi);
            }
            iterations += 1;
            if iterations >= max_iterations || !hi.is_finite() {
                return Err(Error::NonConvergence {
                    iterations,
                    residual: at_hi - h,
                });
            }
            lo = hi;
            hi *= 2.0;
            at_hi = self.entropy(hi);
        }
        let mut best = (hi, at_hi - h);
        while iterations < max_iterations {
            iterations += 1;
            let mid = 0.5 * (lo + hi);
            let at_mid = self.entropy(mid);
            let residual = at_mid - h;
            if residual.abs() < best.1.abs() {
                best = (mid, residual);
            }
            if residual.abs() <= tol {
                return InverseTemperature::new(mid);
            }
            if residual > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= BRACKET_WIDTH {
                break;
            }
        }
        if best.1.abs() <= tol {
            InverseTemperature::new(best.0)
        } else {
            Err(Error::NonConvergence {
                iterations,
                residual: best.1,
            })
        }
    }

    /// `S · Var(s)` under the shifted weights: the sign of the derivative of
    /// entropy with respect to the temperature `μ = 1/β`.
    ///
    /// Algebraically this is `(A - B) e^{-2 β s_max}` with
    /// `A = [Σ w s² e^{βs}][Σ w e^{βs}]` and `B = [Σ w s e^{βs}]²`. It is
    /// computed in centered form so it can never come out negative.
    pub fn fprime_sign_certificate(&self, beta: f64) -> f64 {
        let (w, sum) = self.shifted(beta);
        let mean = w
            .iter()
            .zip(&self.scores)
            .map(|(wi, s)| wi * s)
            .sum::<f64>()
            / sum;
        sum * w
            .iter()
            .zip(&self.scores)
            .map(|(wi, s)| wi * (s - mean) * (s - mean))
            .sum::<f64>()
    }
}

/// Solver configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolverOptions {
    pub tolerance: f64,
    pub max_iterations: usize,
    pub orientation: Orientation,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tolerance: DEFAULT_ENTROPY_TOLERANCE,
            max_iterations: DEFAULT_MAX_ITERATIONS,
            orientation: Orientation::Minimize,
        }
    }
}

/// The optimal answer distribution at an entropy level.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GibbsSolution {
    pub dist: ClassDistribution,
    pub beta: InverseTemperature,
    /// Requested entropy level.
    pub target: EntropyLevel,
    /// Entropy actually attained by `dist`.
    pub entropy: f64,
    pub expected_loss: f64,
    pub expected_successes: f64,
    /// `log Z` with `Z = Σ a_k exp(±β b_k)`.
    pub log_normalizer: f64,
    pub orientation: Orientation,
    /// Set when the target was at or below the entropy floor and the
    /// solution was taken at the floor instead.
    pub dirac_limit: bool,
}

impl GibbsSolution {
    pub fn table(&self) -> &LossClassTable {
        self.dist.table()
    }
}

/// `p_k = exp(β b_k) / Σ_ℓ a_ℓ exp(β b_ℓ)`.
pub fn gibbs_distribution(
    table: &Arc<LossClassTable>,
    beta: InverseTemperature,
) -> ClassDistribution {
    oriented_distribution(table, beta, Orientation::Minimize)
}

pub fn oriented_distribution(
    table: &Arc<LossClassTable>,
    beta: InverseTemperature,
    orientation: Orientation,
) -> ClassDistribution {
    let family = GibbsFamily::from_table(table, orientation);
    let p = if beta.value() == 0.0 {
        vec![1.0 / table.total() as f64; table.len()]
    } else {
        family.probabilities(beta.value())
    };
    ClassDistribution::new(table.clone(), p).expect("Gibbs weights are normalized by construction")
}

/// Entropy of the minimizing family at `β`.
pub fn entropy_at_beta(table: &LossClassTable, beta: InverseTemperature) -> f64 {
    GibbsFamily::from_table(table, Orientation::Minimize).entropy(beta.value())
}

/// The `β` whose Gibbs distribution has entropy `h`, within `tol`.
pub fn solve_beta_for_entropy(
    table: &LossClassTable,
    h: EntropyLevel,
    tol: f64,
) -> Result<InverseTemperature> {
    GibbsFamily::from_table(table, Orientation::Minimize).solve_beta(
        h.value(),
        tol,
        DEFAULT_MAX_ITERATIONS,
    )
}

/// Minimizer of expected loss subject to entropy exactly `h`.
pub fn optimal_distribution(table: &Arc<LossClassTable>, h: EntropyLevel) -> Result<GibbsSolution> {
    optimal_distribution_with(table, h, &SolverOptions::default())
}

/// Minimizer of expected loss subject to entropy at least `h`. The
/// constraint always binds, so this is the equality-constrained solution.
pub fn minimize_with_entropy_floor(
    table: &Arc<LossClassTable>,
    h: EntropyLevel,
) -> Result<GibbsSolution> {
    optimal_distribution(table, h)
}

pub fn optimal_distribution_with(
    table: &Arc<LossClassTable>,
    h: EntropyLevel,
    options: &SolverOptions,
) -> Result<GibbsSolution> {
    let family = GibbsFamily::from_table(table, options.orientation);
    let floor = family.min_entropy() + ENTROPY_FLOOR;
    let dirac_limit = h.value() <= floor;
    let beta = if dirac_limit {
        family.check_feasible(floor, options.tolerance, floor - 1.0)?;
        family.bisect(floor, options.tolerance, options.max_iterations)?
    } else {
        family.solve_beta(h.value(), options.tolerance, options.max_iterations)?
    };
    let dist = oriented_distribution(table, beta, options.orientation);
    let entropy = crate::entropy::class_entropy(&dist);
    Ok(GibbsSolution {
        expected_loss: dist.expected_loss(),
        expected_successes: dist.expected_successes(),
        log_normalizer: family.log_normalizer(beta.value()),
        entropy,
        dist,
        beta,
        target: h,
        orientation: options.orientation,
        dirac_limit,
    })
}

/// `∂p_k/∂μ = (p_k / μ²) (E[b] - b_k)` for each class, with `μ = 1/β`.
pub fn mean_success_sensitivity(
    table: &LossClassTable,
    beta: InverseTemperature,
) -> Result<Vec<f64>> {
    if beta.value() == 0.0 {
        return Err(Error::InvalidArgument(
            "sensitivity in the temperature is undefined at beta = 0".into(),
        ));
    }
    let family = GibbsFamily::from_table(table, Orientation::Minimize);
    let b = beta.value();
    let mean = family.mean_score(b);
    Ok(family
        .probabilities(b)
        .iter()
        .zip(family.scores())
        .map(|(p, s)| p * b * b * (mean - s))
        .collect())
}

/// Non-negative quantity carrying the sign of the derivative of entropy in
/// the temperature; see [`GibbsFamily::fprime_sign_certificate`].
pub fn fprime_sign_certificate(table: &LossClassTable, beta: InverseTemperature) -> f64 {
    GibbsFamily::from_table(table, Orientation::Minimize).fprime_sign_certificate(beta.value())
}
