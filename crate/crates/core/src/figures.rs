//! Data for entropy level-curve plots on the 1- and 2-simplex, together
//! with the path of payoff-maximizing distributions as the entropy budget
//! shrinks from the uniform point towards the best vertex.

use serde::Serialize;

use crate::entropy::shannon_entropy;
use crate::error::{Error, Result};
use crate::gibbs::{GibbsFamily, DEFAULT_ENTROPY_TOLERANCE, DEFAULT_MAX_ITERATIONS};

pub const DEFAULT_BINARY_PAYOFF: [f64; 2] = [1.0, 3.0];
pub const DEFAULT_TERNARY_PAYOFF: [f64; 3] = [1.0, 2.0, 5.0];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimplexGridPoint {
    pub coordinates: Vec<f64>,
    pub entropy: f64,
}

/// Barycentric grid with `resolution` steps per edge.
pub fn entropy_grid(dimension: usize, resolution: usize) -> Result<Vec<SimplexGridPoint>> {
    if resolution < 2 {
        return Err(Error::InvalidArgument(format!(
            "resolution must be at least 2, got {resolution}"
        )));
    }
    let r = resolution as f64;
    let nodes: Vec<Vec<usize>> = match dimension {
        2 => (0..=resolution).map(|i| vec![i, resolution - i]).collect(),
        3 => (0..=resolution)
            .flat_map(|i| (0..=resolution - i).map(move |j| vec![i, j, resolution - i - j]))
            .collect(),
        other => {
            return Err(Error::InvalidArgument(format!(
                "dimension must be 2 or 3, got {other}"
            )))
        }
    };
    nodes
        .into_iter()
        .map(|counts| {
            let coordinates: Vec<f64> = counts.iter().map(|&c| c as f64 / r).collect();
            let entropy = shannon_entropy(&coordinates)?;
            Ok(SimplexGridPoint {
                coordinates,
                entropy,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimalPathPoint {
    pub h: f64,
    pub beta: f64,
    pub distribution: Vec<f64>,
    pub entropy: f64,
    pub payoff: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimalPath {
    pub payoff: Vec<f64>,
    /// Coordinates sharing the largest payoff.
    pub argmax: Vec<usize>,
    /// More than one coordinate attains the largest payoff, so the path ends
    /// on a face rather than a vertex.
    pub tied_maximum: bool,
    pub points: Vec<OptimalPathPoint>,
}

/// Evenly spaced levels `log(len) * i / points` for `i = 1..=points`.
pub fn default_path_grid(len: usize, points: usize) -> Vec<f64> {
    let top = (len as f64).ln();
    (1..=points)
        .map(|i| {
            if i == points {
                top
            } else {
                top * i as f64 / points as f64
            }
        })
        .collect()
}

/// For each `h`, the distribution of entropy `h` with the largest expected
/// payoff: `p_i ∝ exp(β c_i)`.
pub fn optimal_path(payoff: &[f64], h_grid: &[f64]) -> Result<OptimalPath> {
    if payoff.len() < 2 {
        return Err(Error::InvalidArgument(
            "payoff needs at least two coordinates".into(),
        ));
    }
    let family = GibbsFamily::new(vec![1.0; payoff.len()], payoff.to_vec())?;
    let argmax = family.argmax();
    let points = h_grid
        .iter()
        .map(|&h| {
            let beta = family
                .solve_beta(h, DEFAULT_ENTROPY_TOLERANCE, DEFAULT_MAX_ITERATIONS)?
                .value();
            let distribution = family.probabilities(beta);
            let value = distribution.iter().zip(payoff).map(|(p, c)| p * c).sum();
            Ok(OptimalPathPoint {
                h,
                beta,
                entropy: shannon_entropy(&distribution)?,
                distribution,
                payoff: value,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(OptimalPath {
        payoff: payoff.to_vec(),
        tied_maximum: argmax.len() > 1,
        argmax,
        points,
    })
}
