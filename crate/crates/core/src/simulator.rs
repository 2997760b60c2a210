//! Seeded Monte Carlo replay of the tasting experiment.
//!
//! Every replication draws a truth uniformly, then an answer from the class
//! distribution of the taster, and records the loss class. Replications are
//! split across workers in contiguous blocks; each uses its own stream from
//! [`crate::rng::replication_stream`], and the per-class counts are summed,
//! so the report does not depend on the worker count.

use std::sync::Arc;
use std::thread;

use rand::{Rng, RngExt};
use serde::Serialize;

use crate::combinatorics::{
    enumerate_assignments, loss, Assignment, ExperimentDesign, LossClassTable,
};
use crate::entropy::{ClassDistribution, EntropyLevel};
use crate::error::{Error, Result};
use crate::gibbs::optimal_distribution;
use crate::hypothesis::{Rational, RejectionRegion};
use crate::rng::replication_stream;

/// Who is tasting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Alternative {
    /// Answers uniform over all assignments.
    Null,
    /// Optimal taster at this entropy level.
    Entropy(EntropyLevel),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimConfig {
    pub design: ExperimentDesign,
    pub alternative: Alternative,
    pub region: RejectionRegion,
    pub replications: u64,
    pub seed: u64,
    #[serde(skip)]
    pub workers: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimReport {
    pub rejections: u64,
    pub rejection_rate: f64,
    /// Binomial standard error `sqrt(r (1 - r) / m)`.
    pub standard_error: f64,
    pub mean_loss: f64,
    /// Counts per loss class, in loss-ascending order.
    pub loss_histogram: Vec<u64>,
    pub replications: u64,
    pub seed: u64,
}

/// Uniform draw from the assignment space via a partial Fisher-Yates
/// shuffle of the cup positions.
pub fn sample_truth<R: Rng + ?Sized>(rng: &mut R, design: ExperimentDesign) -> Assignment {
    let cups = design.cups() as usize;
    let mut positions: Vec<usize> = (0..cups).collect();
    let chosen = choose_subset(rng, &mut positions, design.tm() as usize);
    let mut labels = vec![false; cups];
    for &j in chosen {
        labels[j] = true;
    }
    Assignment::from_labels(design, &labels).expect("exactly n positions chosen")
}

/// Moves a uniform `k`-subset of `items` to its front and returns it.
fn choose_subset<'a, R: Rng + ?Sized>(
    rng: &mut R,
    items: &'a mut [usize],
    k: usize,
) -> &'a [usize] {
    let len = items.len();
    for i in 0..k {
        let j = rng.random_range(i..len);
        items.swap(i, j);
    }
    &items[..k]
}

/// Draws a loss class with probability `a_k p_k`.
pub fn sample_class<R: Rng + ?Sized>(rng: &mut R, masses: &[f64]) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (k, &m) in masses.iter().enumerate() {
        acc += m;
        if u < acc {
            return k;
        }
    }
    // u landed in the rounding gap above the last partial sum
    masses.iter().rposition(|&m| m > 0.0).unwrap_or(0)
}

/// Draws an answer given the truth: first a loss class, then a uniform
/// member of it by keeping a random `b_k`-subset of the true TM cups and
/// promoting a random `n - b_k`-subset of the true MT cups.
pub fn sample_answer<R: Rng + ?Sized>(
    rng: &mut R,
    dist: &ClassDistribution,
    y: &Assignment,
) -> Result<Assignment> {
    let table = dist.table();
    if y.design() != table.design() {
        return Err(Error::DesignMismatch);
    }
    let k = sample_class(rng, &dist.class_masses());
    Ok(answer_in_class(rng, table, k, y))
}

fn answer_in_class<R: Rng + ?Sized>(
    rng: &mut R,
    table: &LossClassTable,
    k: usize,
    y: &Assignment,
) -> Assignment {
    let design = table.design();
    let kept = table.successes()[k] as usize;
    let promoted = design.tm() as usize - kept;
    let mut tm = y.tm_positions();
    let mut mt = y.mt_positions();
    let mut labels = vec![false; design.cups() as usize];
    for &j in choose_subset(rng, &mut tm, kept) {
        labels[j] = true;
    }
    for &j in choose_subset(rng, &mut mt, promoted) {
        labels[j] = true;
    }
    Assignment::from_labels(design, &labels).expect("class sampling keeps n TM labels")
}

fn taster_distribution(
    table: &Arc<LossClassTable>,
    alternative: Alternative,
) -> Result<ClassDistribution> {
    match alternative {
        Alternative::Null => Ok(ClassDistribution::uniform(table.clone())),
        Alternative::Entropy(h) => Ok(optimal_distribution(table, h)?.dist),
    }
}

pub fn run_simulation(config: &SimConfig) -> Result<SimReport> {
    if config.replications == 0 {
        return Err(Error::InvalidArgument(
            "replications must be at least 1".into(),
        ));
    }
    if config.workers == 0 {
        return Err(Error::InvalidArgument("workers must be at least 1".into()));
    }
    let table = Arc::new(LossClassTable::new(config.design)?);
    if let Some(&k) = config.region.classes.iter().find(|&&k| k >= table.len()) {
        return Err(Error::InvalidRegion(format!("class {k} out of range")));
    }
    let dist = taster_distribution(&table, config.alternative)?;
    let masses = dist.class_masses();

    let replications = config.replications;
    let workers = (config.workers as u64).min(replications);
    let block = replications.div_ceil(workers);
    let histogram = thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let start = w * block;
                let end = ((w + 1) * block).min(replications);
                let (table, masses) = (&table, &masses);
                scope.spawn(move || simulate_block(table, masses, config.seed, start..end))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("simulation worker panicked"))
            .fold(vec![0u64; table.len()], |mut acc, part| {
                for (a, p) in acc.iter_mut().zip(part) {
                    *a += p;
                }
                acc
            })
    });

    let rejections: u64 = config.region.classes.iter().map(|&k| histogram[k]).sum();
    let m = replications as f64;
    let rate = rejections as f64 / m;
    let total_loss: u64 = histogram
        .iter()
        .zip(table.losses())
        .map(|(&c, &l)| c * u64::from(l))
        .sum();
    Ok(SimReport {
        rejections,
        rejection_rate: rate,
        standard_error: (rate * (1.0 - rate) / m).sqrt(),
        mean_loss: total_loss as f64 / m,
        loss_histogram: histogram,
        replications,
        seed: config.seed,
    })
}

fn simulate_block(
    table: &LossClassTable,
    masses: &[f64],
    seed: u64,
    range: std::ops::Range<u64>,
) -> Vec<u64> {
    let mut histogram = vec![0u64; table.len()];
    for index in range {
        let mut rng = replication_stream(seed, index);
        let y = sample_truth(&mut rng, table.design());
        let k = sample_class(&mut rng, masses);
        let x = answer_in_class(&mut rng, table, k, &y);
        let l = loss(&x, &y).expect("same design");
        debug_assert_eq!(l, table.losses()[k]);
        histogram[k] += 1;
    }
    histogram
}

/// Size of `region` conditional on each possible truth, by enumeration.
pub fn exact_conditional_sizes(
    design: ExperimentDesign,
    region: &RejectionRegion,
) -> Result<Vec<Rational>> {
    let table = LossClassTable::new(design)?;
    let all = enumerate_assignments(design)?;
    all.iter()
        .map(|y| {
            let mut hits = 0u64;
            for x in &all {
                let k = table
                    .class_of_loss(loss(x, y)?)
                    .expect("losses between assignments are valid classes");
                if region.contains(k) {
                    hits += 1;
                }
            }
            Ok(Rational::new(hits, table.total()))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    fn tea() -> Arc<LossClassTable> {
        Arc::new(LossClassTable::new(ExperimentDesign::tea_tasting()).unwrap())
    }

    fn config(alternative: Alternative, reps: u64, workers: usize) -> SimConfig {
        let t = tea();
        SimConfig {
            design: t.design(),
            alternative,
            region: RejectionRegion::fisher_right(&t),
            replications: reps,
            seed: 2024,
            workers,
        }
    }

    #[test]
    fn truth_has_n_ones_and_is_reproducible() {
        let d = ExperimentDesign::tea_tasting();
        let mut a = replication_stream(1, 0);
        let mut b = replication_stream(1, 0);
        for _ in 0..200 {
            let x = sample_truth(&mut a, d);
            assert_eq!(x.mask().count_ones(), 4);
            assert_eq!(x, sample_truth(&mut b, d));
        }
    }

    #[test]
    fn truth_is_uniform_at_n6() {
        let d = ExperimentDesign::new(6, 3).unwrap();
        let reps = 100_000u64;
        let mut counts: HashMap<u64, u64> = HashMap::new();
        for i in 0..reps {
            let mut rng = replication_stream(99, i);
            *counts.entry(sample_truth(&mut rng, d).mask()).or_default() += 1;
        }
        assert_eq!(counts.len(), 20);
        let p = 1.0 / 20.0;
        let se = (p * (1.0 - p) / reps as f64).sqrt();
        for &c in counts.values() {
            assert!((c as f64 / reps as f64 - p).abs() < 4.0 * se);
        }
    }

    #[test]
    fn dirac_answers_are_the_truth() {
        let t = tea();
        let dist = ClassDistribution::point_mass(t.clone(), 0).unwrap();
        let mut rng = replication_stream(5, 5);
        for _ in 0..100 {
            let y = sample_truth(&mut rng, t.design());
            assert_eq!(sample_answer(&mut rng, &dist, &y).unwrap(), y);
        }
    }

    #[test]
    fn uniform_answers_cover_the_space_evenly() {
        let d = ExperimentDesign::new(6, 2).unwrap();
        let t = Arc::new(LossClassTable::new(d).unwrap());
        let dist = ClassDistribution::uniform(t.clone());
        let y = Assignment::first_n(d);
        let reps = 60_000u64;
        let mut counts: HashMap<u64, u64> = HashMap::new();
        for i in 0..reps {
            let mut rng = replication_stream(3, i);
            let x = sample_answer(&mut rng, &dist, &y).unwrap();
            *counts.entry(x.mask()).or_default() += 1;
        }
        assert_eq!(counts.len(), 15);
        // Pearson chi-square with 14 degrees of freedom; 36.12 is the 0.999 quantile.
        let expected = reps as f64 / 15.0;
        let chi2: f64 = counts
            .values()
            .map(|&c| (c as f64 - expected).powi(2) / expected)
            .sum();
        assert!(chi2 < 36.12, "chi2 = {chi2}");
    }

    #[test]
    fn answer_rejects_foreign_truth() {
        let t = tea();
        let dist = ClassDistribution::uniform(t);
        let y = Assignment::first_n(ExperimentDesign::new(6, 3).unwrap());
        let mut rng = replication_stream(0, 0);
        assert_eq!(
            sample_answer(&mut rng, &dist, &y),
            Err(Error::DesignMismatch)
        );
    }

    #[test]
    fn class_sampler_handles_rounding_gap() {
        let mut rng = replication_stream(0, 1);
        for _ in 0..1000 {
            let k = sample_class(&mut rng, &[0.3, 0.7 - 1e-15, 0.0]);
            assert!(k < 2);
        }
    }

    #[test]
    fn worker_count_does_not_change_the_report() {
        let alt = Alternative::Entropy(EntropyLevel::new(2.0).unwrap());
        let one = run_simulation(&config(alt, 20_001, 1)).unwrap();
        let many = run_simulation(&config(alt, 20_001, 8)).unwrap();
        assert_eq!(one, many);
        assert_eq!(one.loss_histogram.iter().sum::<u64>(), 20_001);
    }

    #[test]
    fn null_size_is_reproduced() {
        let r = run_simulation(&config(Alternative::Null, 100_000, 4)).unwrap();
        assert!((r.rejection_rate - 1.0 / 70.0).abs() <= 4.0 * r.standard_error);
        let se_loss = {
            // null variance of the loss: E[l^2] - 16
            let t = tea();
            let second: f64 = t
                .multiplicities()
                .iter()
                .zip(t.losses())
                .map(|(&a, &l)| a as f64 * f64::from(l * l) / 70.0)
                .sum();
            ((second - 16.0) / 100_000.0).sqrt()
        };
        assert!((r.mean_loss - 4.0).abs() <= 4.0 * se_loss);
    }

    #[test]
    fn informed_taster_almost_always_rejects() {
        let alt = Alternative::Entropy(EntropyLevel::new(1e-6).unwrap());
        let r = run_simulation(&config(alt, 10_000, 2)).unwrap();
        assert!(r.rejection_rate >= 0.999);
    }

    #[test]
    fn config_validation() {
        assert!(run_simulation(&config(Alternative::Null, 0, 1)).is_err());
        assert!(run_simulation(&config(Alternative::Null, 10, 0)).is_err());
        let too_high = Alternative::Entropy(EntropyLevel::new(10.0).unwrap());
        assert!(matches!(
            run_simulation(&config(too_high, 10, 1)),
            Err(Error::InfeasibleEntropy { .. })
        ));
    }

    #[test]
    fn conditional_size_is_the_same_for_every_truth() {
        let d = ExperimentDesign::tea_tasting();
        let t = tea();
        for region in [
            RejectionRegion::fisher_right(&t),
            RejectionRegion::information_left(&t),
            RejectionRegion::two_sided_union(&t),
        ] {
            let sizes = exact_conditional_sizes(d, &region).unwrap();
            assert_eq!(sizes.len(), 70);
            let expected = crate::hypothesis::exact_size(&t, &region, 0.05)
                .unwrap()
                .size;
            assert!(sizes.iter().all(|&s| s == expected));
        }
    }
}
