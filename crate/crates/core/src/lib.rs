//! Exact tests, entropy-constrained optimal tasters and power analysis for
//! the cup-tasting design.
//!
//! A taster who minimizes expected misclassification under an entropy
//! budget answers with a Gibbs distribution over loss classes. As the budget
//! shrinks, the loss distribution moves down in the first-order stochastic
//! order, which singles out "all cups right" as the rejection region.
//!
//! ```
//! use std::sync::Arc;
//! use teacup::{EntropyLevel, ExperimentDesign, LossClassTable, RejectionRegion};
//!
//! let table = Arc::new(LossClassTable::new(ExperimentDesign::new(8, 4)?)?);
//! let region = RejectionRegion::fisher_right(&table);
//! let size = teacup::exact_size(&table, &region, 0.05)?;
//! assert_eq!(size.size.to_string(), "1/70");
//!
//! let power = teacup::power(&table, &region, EntropyLevel::new(1.0)?)?;
//! assert!(power > size.size_value);
//! # Ok::<(), teacup::Error>(())
//! ```

pub mod combinatorics;
pub mod dominance;
pub mod entropy;
pub mod error;
pub mod figures;
pub mod gibbs;
pub mod hypothesis;
pub mod rng;
pub mod simulator;

pub use combinatorics::{
    binomial, enumerate_assignments, loss, loss_class_table, relabel, Assignment, ExperimentDesign,
    LossClassTable,
};
pub use dominance::{
    classify_vs_null, fosd_check, fosd_compare, loss_cdf, FosdVerdict, LossCdf, NullRelation,
};
pub use entropy::{class_entropy, max_entropy, shannon_entropy, ClassDistribution, EntropyLevel};
pub use error::{Error, Result};
pub use gibbs::{
    entropy_at_beta, fprime_sign_certificate, gibbs_distribution, mean_success_sensitivity,
    optimal_distribution, solve_beta_for_entropy, GibbsSolution, InverseTemperature, Orientation,
};
pub use hypothesis::{
    exact_size, p_value, power, power_curve, ExactTestReport, Rational, RegionKind,
    RejectionRegion, Tail,
};
pub use simulator::{run_simulation, Alternative, SimConfig, SimReport};
