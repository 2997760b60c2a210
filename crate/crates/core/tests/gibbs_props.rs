use std::sync::Arc;

use proptest::prelude::*;

use teacup::combinatorics::{Assignment, ExperimentDesign, LossClassTable};
use teacup::entropy::{
    class_entropy, max_entropy, shannon_entropy, ClassDistribution, EntropyLevel,
};
use teacup::gibbs::{
    entropy_at_beta, fprime_sign_certificate, gibbs_distribution, optimal_distribution,
    GibbsFamily, InverseTemperature, Orientation,
};

fn table_strategy(max_cups: u32) -> impl Strategy<Value = Arc<LossClassTable>> {
    (2..=max_cups)
        .prop_flat_map(|cups| (Just(cups), 1..=cups / 2))
        .prop_map(|(cups, tm)| {
            Arc::new(LossClassTable::new(ExperimentDesign::new(cups, tm).unwrap()).unwrap())
        })
}

fn random_distribution(table: &Arc<LossClassTable>, raw: &[f64]) -> ClassDistribution {
    let masses: Vec<f64> = raw.iter().take(table.len()).copied().collect();
    let total: f64 = masses.iter().sum();
    let masses: Vec<f64> = masses.iter().map(|m| m / total).collect();
    ClassDistribution::from_masses(table.clone(), &masses).unwrap()
}

fn beta(b: f64) -> InverseTemperature {
    InverseTemperature::new(b).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn entropy_is_bounded_by_the_uniform(
        table in table_strategy(30),
        raw in prop::collection::vec(1e-6..1.0f64, 16),
    ) {
        let d = random_distribution(&table, &raw);
        let h = class_entropy(&d);
        let hbar = max_entropy(table.design()).value();
        prop_assert!(h >= 0.0);
        prop_assert!(h <= hbar + 1e-9);
        if h >= hbar - 1e-9 {
            let u = 1.0 / table.total() as f64;
            prop_assert!(d.probabilities().iter().all(|p| (p - u).abs() < 1e-4 * u));
        }
    }

    #[test]
    fn certificate_agrees_with_both_algebraic_forms(
        table in table_strategy(40),
        b in 1e-3..20.0f64,
    ) {
        let c = fprime_sign_certificate(&table, beta(b));
        prop_assert!(c >= 0.0);
        // shift-stabilized weights, evaluated independently of the library
        let bs: Vec<f64> = table.successes().iter().map(|&x| f64::from(x)).collect();
        let w: Vec<f64> = table
            .multiplicities()
            .iter()
            .zip(&bs)
            .map(|(&a, s)| a as f64 * (b * (s - bs[0])).exp())
            .collect();
        let s0: f64 = w.iter().sum();
        let s1: f64 = w.iter().zip(&bs).map(|(w, s)| w * s).sum();
        let s2: f64 = w.iter().zip(&bs).map(|(w, s)| w * s * s).sum();
        let naive = s2 * s0 - s1 * s1;
        let mut pairwise = 0.0;
        for k in 0..w.len() {
            for l in 0..w.len() {
                pairwise += 0.5 * w[k] * w[l] * (bs[k] - bs[l]).powi(2);
            }
        }
        let scale = s2 * s0;
        prop_assert!((c - pairwise).abs() <= 1e-9 * pairwise.max(1e-300) + 1e-12 * scale);
        prop_assert!((c - naive).abs() <= 1e-10 * scale);
    }

    #[test]
    fn stationarity_holds_for_random_beta(table in table_strategy(40), b in 1e-3..30.0f64) {
        // log p_k = b_k / mu - log Z, so b_k - mu log p_k = mu log Z for all k.
        let d = gibbs_distribution(&table, beta(b));
        let mu = 1.0 / b;
        let family = GibbsFamily::from_table(&table, Orientation::Minimize);
        let log_z = family.log_normalizer(b);
        for (k, &p) in d.probabilities().iter().enumerate() {
            prop_assume!(p > 0.0);
            let lhs = f64::from(table.successes()[k]) - mu * p.ln();
            prop_assert!((lhs - mu * log_z).abs() <= 1e-9 * (1.0 + mu * log_z.abs()));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn expansion_matches_class_entropy(
        table in table_strategy(14),
        raw in prop::collection::vec(1e-6..1.0f64, 16),
    ) {
        prop_assume!(table.total() <= 10_000);
        let d = random_distribution(&table, &raw);
        let y = Assignment::first_n(table.design());
        let expanded = d.expand(&y).unwrap();
        prop_assert!((shannon_entropy(&expanded).unwrap() - class_entropy(&d)).abs() <= 1e-10);
    }

    #[test]
    fn solver_attains_the_requested_entropy(table in table_strategy(40), f in 0.01..1.0f64) {
        let h = EntropyLevel::fraction_of_max(table.design(), f).unwrap();
        let s = optimal_distribution(&table, h).unwrap();
        prop_assert!((class_entropy(&s.dist) - h.value()).abs() <= 1e-9);
        prop_assert!((s.expected_loss - 2.0 * (f64::from(table.design().tm()) - s.expected_successes)).abs() <= 1e-9);
    }
}

#[test]
fn zero_entropy_only_on_single_assignment_classes() {
    let t = Arc::new(LossClassTable::new(ExperimentDesign::tea_tasting()).unwrap());
    for k in 0..t.len() {
        let d = ClassDistribution::point_mass(t.clone(), k).unwrap();
        let h = class_entropy(&d);
        if t.multiplicities()[k] == 1 {
            assert_eq!(h, 0.0);
        } else {
            assert!((h - (t.multiplicities()[k] as f64).ln()).abs() < 1e-12);
        }
    }
}

#[test]
fn entropy_decreases_on_a_wide_beta_grid() {
    let t = LossClassTable::new(ExperimentDesign::tea_tasting()).unwrap();
    let values: Vec<f64> = (0..=500)
        .map(|i| entropy_at_beta(&t, beta(i as f64 * 0.1)))
        .collect();
    assert!(values.windows(2).all(|w| w[0] > w[1]));
    assert!(values[500] < 1e-15);
}

#[test]
fn constraint_satisfaction_on_the_reference_grids() {
    for (cups, tm) in [(8, 4), (12, 6)] {
        let t = Arc::new(LossClassTable::new(ExperimentDesign::new(cups, tm).unwrap()).unwrap());
        for i in 1..=10 {
            let h = EntropyLevel::fraction_of_max(t.design(), i as f64 / 10.0).unwrap();
            let s = optimal_distribution(&t, h).unwrap();
            assert!((class_entropy(&s.dist) - h.value()).abs() <= 1e-9);
            assert!((s.entropy - h.value()).abs() <= 1e-9);
        }
    }
}

#[test]
fn dirac_limit_mass() {
    let t = Arc::new(LossClassTable::new(ExperimentDesign::tea_tasting()).unwrap());
    let s = optimal_distribution(&t, EntropyLevel::new(1e-7).unwrap()).unwrap();
    let masses = s.dist.class_masses();
    assert!(masses[0] >= 1.0 - 1e-5);
    assert!(masses[1..].iter().sum::<f64>() <= 1e-5);
}

#[test]
fn sensitivity_matches_finite_differences_across_designs() {
    let eps = 1e-5;
    for (cups, tm) in [(2, 1), (6, 2), (8, 4), (12, 6), (20, 7)] {
        let t = Arc::new(LossClassTable::new(ExperimentDesign::new(cups, tm).unwrap()).unwrap());
        for b in [0.2, 1.0, 3.0] {
            let g = teacup::mean_success_sensitivity(&t, beta(b)).unwrap();
            let mu = 1.0 / b;
            let up = gibbs_distribution(&t, beta(1.0 / (mu + eps)));
            let down = gibbs_distribution(&t, beta(1.0 / (mu - eps)));
            let scale = g.iter().fold(0.0_f64, |s, x| s.max(x.abs()));
            for k in 0..t.len() {
                let fd = (up.probabilities()[k] - down.probabilities()[k]) / (2.0 * eps);
                assert!(
                    (fd - g[k]).abs() <= 1e-6 * scale,
                    "N={cups} n={tm} beta={b} k={k}"
                );
            }
        }
    }
}
