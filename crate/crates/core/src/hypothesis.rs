//! Exact tests of the uniform null: rejection regions built from loss
//! classes, their exact sizes, p-values, and power against optimal tasters.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use serde::{Serialize, Serializer};

use crate::combinatorics::LossClassTable;
use crate::entropy::{ClassDistribution, EntropyLevel};
use crate::error::{Error, Result};
use crate::gibbs::optimal_distribution;

pub const DEFAULT_LEVEL: f64 = 0.05;

/// A non-negative fraction kept unreduced, so sizes read as `k / C(N, n)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rational {
    pub numerator: u64,
    pub denominator: u64,
}

impl Rational {
    pub fn new(numerator: u64, denominator: u64) -> Self {
        assert!(denominator > 0, "zero denominator");
        Self {
            numerator,
            denominator,
        }
    }

    pub fn value(self) -> f64 {
        self.numerator as f64 / self.denominator as f64
    }

    /// Compares `self` against a real threshold without rounding the
    /// fraction first.
    pub fn at_most(self, threshold: f64) -> bool {
        (self.numerator as f64) <= threshold * self.denominator as f64
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numerator, self.denominator)
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegionKind {
    /// Every cup right.
    FisherRight,
    /// Every cup wrong.
    InformationLeft,
    /// Either extreme.
    TwoSidedUnion,
    Custom,
}

impl RegionKind {
    pub fn name(self) -> &'static str {
        match self {
            RegionKind::FisherRight => "fisher-right",
            RegionKind::InformationLeft => "information-left",
            RegionKind::TwoSidedUnion => "two-sided-union",
            RegionKind::Custom => "custom",
        }
    }
}

impl std::str::FromStr for RegionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fisher-right" => Ok(RegionKind::FisherRight),
            "information-left" => Ok(RegionKind::InformationLeft),
            "two-sided-union" => Ok(RegionKind::TwoSidedUnion),
            other => Err(Error::InvalidRegion(format!("unknown region {other:?}"))),
        }
    }
}

/// A set of loss classes; the null is rejected when the observed loss
/// falls in one of them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RejectionRegion {
    pub kind: RegionKind,
    pub classes: BTreeSet<usize>,
}

impl RejectionRegion {
    pub fn fisher_right(_table: &LossClassTable) -> Self {
        Self {
            kind: RegionKind::FisherRight,
            classes: BTreeSet::from([0]),
        }
    }

    pub fn information_left(table: &LossClassTable) -> Self {
        Self {
            kind: RegionKind::InformationLeft,
            classes: BTreeSet::from([table.len() - 1]),
        }
    }

    pub fn two_sided_union(table: &LossClassTable) -> Self {
        Self {
            kind: RegionKind::TwoSidedUnion,
            classes: BTreeSet::from([0, table.len() - 1]),
        }
    }

    pub fn named(kind: RegionKind, table: &LossClassTable) -> Result<Self> {
        match kind {
            RegionKind::FisherRight => Ok(Self::fisher_right(table)),
            RegionKind::InformationLeft => Ok(Self::information_left(table)),
            RegionKind::TwoSidedUnion => Ok(Self::two_sided_union(table)),
            RegionKind::Custom => Err(Error::InvalidRegion(
                "custom regions need an explicit class set".into(),
            )),
        }
    }

    pub fn custom(
        table: &LossClassTable,
        classes: impl IntoIterator<Item = usize>,
    ) -> Result<Self> {
        let classes: BTreeSet<usize> = classes.into_iter().collect();
        if classes.is_empty() {
            return Err(Error::InvalidRegion(
                "region must contain at least one class".into(),
            ));
        }
        if let Some(&k) = classes.iter().find(|&&k| k >= table.len()) {
            return Err(Error::InvalidRegion(format!(
                "class {k} out of range for a table with {} classes",
                table.len()
            )));
        }
        Ok(Self {
            kind: RegionKind::Custom,
            classes,
        })
    }

    pub fn name(&self) -> &'static str {
        self.kind.name()
    }

    pub fn contains(&self, class: usize) -> bool {
        self.classes.contains(&class)
    }

    fn validate(&self, table: &LossClassTable) -> Result<()> {
        match self.classes.iter().next_back() {
            None => Err(Error::InvalidRegion("empty region".into())),
            Some(&k) if k >= table.len() => Err(Error::InvalidRegion(format!(
                "class {k} out of range for a table with {} classes",
                table.len()
            ))),
            _ => Ok(()),
        }
    }
}

/// Every assignment equally likely.
pub fn null_class_distribution(table: &Arc<LossClassTable>) -> ClassDistribution {
    ClassDistribution::uniform(table.clone())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExactTestReport {
    pub region: RegionKind,
    pub size: Rational,
    pub size_value: f64,
    pub level: f64,
    /// Whether the test is exact at `level`, i.e. `size ≤ level`.
    pub rejects_at_level: bool,
}

/// Type I error probability of a region under the uniform null.
pub fn exact_size(
    table: &LossClassTable,
    region: &RejectionRegion,
    level: f64,
) -> Result<ExactTestReport> {
    region.validate(table)?;
    if !(level > 0.0 && level <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "significance level {level} must lie in (0, 1]"
        )));
    }
    let numerator = region
        .classes
        .iter()
        .map(|&k| table.multiplicities()[k])
        .sum();
    let size = Rational::new(numerator, table.total());
    Ok(ExactTestReport {
        region: region.kind,
        size,
        size_value: size.value(),
        level,
        rejects_at_level: size.at_most(level),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Tail {
    /// At least as many successes as observed.
    RightSuccess,
    /// At most as many successes as observed.
    LeftSuccess,
    /// Every class no more likely under the null than the observed one.
    TwoSided,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PValue {
    pub tail: Tail,
    pub exact: Rational,
    pub value: f64,
}

pub fn p_value(table: &LossClassTable, observed_loss: u32, tail: Tail) -> Result<PValue> {
    let observed = table
        .class_of_loss(observed_loss)
        .ok_or(Error::InvalidLoss {
            loss: observed_loss,
            max: 2 * table.design().tm(),
        })?;
    let a = table.multiplicities();
    let numerator = match tail {
        Tail::RightSuccess => a[..=observed].iter().sum(),
        Tail::LeftSuccess => a[observed..].iter().sum(),
        Tail::TwoSided => a.iter().filter(|&&m| m <= a[observed]).sum(),
    };
    let exact = Rational::new(numerator, table.total());
    Ok(PValue {
        tail,
        exact,
        value: exact.value(),
    })
}

/// Full verdict of a test on one observed loss.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestDecision {
    pub report: ExactTestReport,
    pub observed_loss: u32,
    pub observed_class: usize,
    pub observed_in_region: bool,
    /// Observed loss lies in the region and the region's size is within the
    /// level.
    pub rejects: bool,
}

pub fn decide(
    table: &LossClassTable,
    region: &RejectionRegion,
    observed_loss: u32,
    level: f64,
) -> Result<TestDecision> {
    let report = exact_size(table, region, level)?;
    let observed_class = table
        .class_of_loss(observed_loss)
        .ok_or(Error::InvalidLoss {
            loss: observed_loss,
            max: 2 * table.design().tm(),
        })?;
    let observed_in_region = region.contains(observed_class);
    Ok(TestDecision {
        rejects: observed_in_region && report.rejects_at_level,
        report,
        observed_loss,
        observed_class,
        observed_in_region,
    })
}

/// Rejection probability of `region` for a taster at entropy level `h`.
pub fn power(
    table: &Arc<LossClassTable>,
    region: &RejectionRegion,
    h: EntropyLevel,
) -> Result<f64> {
    region.validate(table)?;
    let solution = optimal_distribution(table, h)?;
    Ok(region_mass(&solution.dist, region))
}

/// Probability mass a class distribution puts on a region.
pub fn region_mass(dist: &ClassDistribution, region: &RejectionRegion) -> f64 {
    let masses = dist.class_masses();
    region.classes.iter().map(|&k| masses[k]).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerPoint {
    pub h: EntropyLevel,
    pub power: f64,
}

pub fn power_curve(
    table: &Arc<LossClassTable>,
    region: &RejectionRegion,
    grid: &[EntropyLevel],
) -> Result<Vec<PowerPoint>> {
    grid.iter()
        .map(|&h| {
            Ok(PowerPoint {
                h,
                power: power(table, region, h)?,
            })
        })
        .collect()
}
