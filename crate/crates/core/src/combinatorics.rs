//! Exact integer combinatorics of the assignment space: every labeling of
//! `N` cups with exactly `n` TM labels.
//!
//! Loss classes are indexed from zero in the order of descending success
//! count, which is also the order of ascending loss. Class `k` here is class
//! `k + 1` in the one-based notation `b_k = n - k + 1`.

use serde::Serialize;

use crate::error::{Error, Result};

/// Largest supported number of cups. `C(62, 31)` still fits in 63 bits.
pub const MAX_CUPS: u32 = 62;

/// Upper bound on `C(N, n)` for [`enumerate_assignments`].
pub const ENUMERATION_LIMIT: u64 = 10_000_000;

/// Exact binomial coefficient `C(n, k)`.
///
/// Multiplicative form with the division interleaved at each step, so the
/// running value is always `C(n - k + i, i)`. Intermediates are held in
/// `u128` and the result must fit in `u64`.
pub fn binomial(n: u64, k: u64) -> Result<u64> {
    if k > n {
        return Err(Error::InvalidArgument(format!(
            "binomial({n}, {k}): k exceeds n"
        )));
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        let factor = u128::from(n - k + i + 1);
        acc = acc
            .checked_mul(factor)
            .ok_or_else(|| Error::Overflow(format!("binomial({n}, {k}) intermediate")))?
            / u128::from(i + 1);
        if acc > u128::from(u64::MAX) {
            return Err(Error::Overflow(format!(
                "binomial({n}, {k}) exceeds 64-bit range"
            )));
        }
    }
    Ok(acc as u64)
}

/// The `(N, n)` cup design: `N` cups of which `n` are TM.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct ExperimentDesign {
    cups: u32,
    tm: u32,
    count: u64,
}

impl ExperimentDesign {
    /// Validates `0 < n < N`, `2n <= N` and `N <= 62`.
    pub fn new(cups: u32, tm: u32) -> Result<Self> {
        if tm == 0 || tm >= cups {
            return Err(Error::InvalidDesign(format!(
                "need 0 < n < N, got N = {cups}, n = {tm}"
            )));
        }
        if 2 * u64::from(tm) > u64::from(cups) {
            return Err(Error::InvalidDesign(format!(
                "need 2n <= N, got N = {cups}, n = {tm}"
            )));
        }
        let count = binomial(u64::from(cups), u64::from(tm))?;
        if cups > MAX_CUPS {
            return Err(Error::Overflow(format!(
                "N = {cups} exceeds the supported maximum of {MAX_CUPS} cups"
            )));
        }
        Ok(Self { cups, tm, count })
    }

    /// The classic tasting experiment: eight cups, four of each kind.
    pub fn tea_tasting() -> Self {
        Self::new(8, 4).expect("(8, 4) is a valid design")
    }

    pub fn cups(&self) -> u32 {
        self.cups
    }

    pub fn tm(&self) -> u32 {
        self.tm
    }

    /// `|X_{N,n}| = C(N, n)`.
    pub fn assignment_count(&self) -> u64 {
        self.count
    }

    pub fn is_balanced(&self) -> bool {
        2 * self.tm == self.cups
    }

    /// Number of loss classes, `n + 1`.
    pub fn class_count(&self) -> usize {
        self.tm as usize + 1
    }
}

/// A labeling of the `N` cups with exactly `n` TM labels.
///
/// Position `j` (zero-based, left to right) is stored in bit `N - 1 - j`, so
/// numeric order of the mask is lexicographic order of the label sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Assignment {
    design: ExperimentDesign,
    mask: u64,
}

impl Assignment {
    /// Builds an assignment from per-cup labels (`true` = TM).
    pub fn from_labels(design: ExperimentDesign, labels: &[bool]) -> Result<Self> {
        if labels.len() != design.cups as usize {
            return Err(Error::InvalidArgument(format!(
                "expected {} labels, got {}",
                design.cups,
                labels.len()
            )));
        }
        let mask = labels
            .iter()
            .enumerate()
            .filter(|(_, &tm)| tm)
            .fold(0u64, |m, (j, _)| m | bit(design, j));
        Self::from_mask(design, mask)
    }

    /// Builds an assignment from a raw mask in the module's bit convention.
    pub fn from_mask(design: ExperimentDesign, mask: u64) -> Result<Self> {
        if mask >> design.cups != 0 {
            return Err(Error::InvalidArgument(format!(
                "mask {mask:#x} has bits beyond N = {}",
                design.cups
            )));
        }
        if mask.count_ones() != design.tm {
            return Err(Error::InvalidArgument(format!(
                "assignment must have exactly {} TM labels, got {}",
                design.tm,
                mask.count_ones()
            )));
        }
        Ok(Self { design, mask })
    }

    /// TM labels on the first `n` cups.
    pub fn first_n(design: ExperimentDesign) -> Self {
        let mask = ((1u64 << design.tm) - 1) << (design.cups - design.tm);
        Self { design, mask }
    }

    pub fn design(&self) -> ExperimentDesign {
        self.design
    }

    pub fn mask(&self) -> u64 {
        self.mask
    }

    /// Label of cup `j` (`true` = TM).
    pub fn is_tm(&self, j: usize) -> bool {
        self.mask & bit(self.design, j) != 0
    }

    pub fn labels(&self) -> Vec<bool> {
        (0..self.design.cups as usize)
            .map(|j| self.is_tm(j))
            .collect()
    }

    /// Zero-based positions labelled TM, ascending.
    pub fn tm_positions(&self) -> Vec<usize> {
        (0..self.design.cups as usize)
            .filter(|&j| self.is_tm(j))
            .collect()
    }

    /// Zero-based positions labelled MT, ascending.
    pub fn mt_positions(&self) -> Vec<usize> {
        (0..self.design.cups as usize)
            .filter(|&j| !self.is_tm(j))
            .collect()
    }
}

impl std::fmt::Display for Assignment {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for j in 0..self.design.cups as usize {
            f.write_str(if self.is_tm(j) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

fn bit(design: ExperimentDesign, j: usize) -> u64 {
    1u64 << (design.cups as usize - 1 - j)
}

/// Misclassification loss: the number of cups where `x` and `y` disagree.
pub fn loss(x: &Assignment, y: &Assignment) -> Result<u32> {
    if x.design != y.design {
        return Err(Error::DesignMismatch);
    }
    Ok((x.mask ^ y.mask).count_ones())
}

/// Swaps every label. Only stays inside the assignment space when `2n = N`.
pub fn relabel(x: &Assignment) -> Result<Assignment> {
    let d = x.design;
    if !d.is_balanced() {
        return Err(Error::UnbalancedRelabel {
            cups: d.cups,
            tm: d.tm,
        });
    }
    let full = (1u64 << d.cups) - 1;
    Ok(Assignment {
        design: d,
        mask: !x.mask & full,
    })
}

/// Every assignment of the design, in lexicographic label order.
pub fn enumerate_assignments(design: ExperimentDesign) -> Result<Vec<Assignment>> {
    if design.count > ENUMERATION_LIMIT {
        return Err(Error::EnumerationGuard {
            count: design.count,
            limit: ENUMERATION_LIMIT,
        });
    }
    let mut out = Vec::with_capacity(design.count as usize);
    let end = 1u64 << design.cups;
    let mut mask = (1u64 << design.tm) - 1;
    while mask < end {
        out.push(Assignment { design, mask });
        // Gosper's hack: next larger integer with the same popcount.
        let c = mask & mask.wrapping_neg();
        let r = mask + c;
        mask = (((r ^ mask) >> 2) / c) | r;
    }
    Ok(out)
}

/// Loss classes of a design relative to a fixed truth.
///
/// Entry `k` holds the assignments with `b_k = n - k` correct TM labels,
/// `a_k = C(n, b_k) C(N - n, n - b_k)` of them, each at loss `2 (n - b_k)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LossClassTable {
    design: ExperimentDesign,
    successes: Vec<u32>,
    multiplicities: Vec<u64>,
    losses: Vec<u32>,
    total: u64,
}

impl LossClassTable {
    pub fn new(design: ExperimentDesign) -> Result<Self> {
        let n = u64::from(design.tm);
        let others = u64::from(design.cups - design.tm);
        let mut successes = Vec::with_capacity(design.class_count());
        let mut multiplicities = Vec::with_capacity(design.class_count());
        let mut losses = Vec::with_capacity(design.class_count());
        for b in (0..=n).rev() {
            let a = binomial(n, b)?
                .checked_mul(binomial(others, n - b)?)
                .ok_or_else(|| Error::Overflow(format!("class multiplicity at b = {b}")))?;
            successes.push(b as u32);
            multiplicities.push(a);
            losses.push(2 * (n - b) as u32);
        }
        let total = multiplicities
            .iter()
            .try_fold(0u64, |s, &a| s.checked_add(a))
            .ok_or_else(|| Error::Overflow("sum of class multiplicities".into()))?;
        debug_assert_eq!(total, design.count);
        Ok(Self {
            design,
            successes,
            multiplicities,
            losses,
            total,
        })
    }

    pub fn design(&self) -> ExperimentDesign {
        self.design
    }

    /// Success counts `b`, strictly decreasing from `n` to `0`.
    pub fn successes(&self) -> &[u32] {
        &self.successes
    }

    /// Class sizes `a`.
    pub fn multiplicities(&self) -> &[u64] {
        &self.multiplicities
    }

    /// Loss values `2 (n - b)`, strictly increasing from `0` to `2n`.
    pub fn losses(&self) -> &[u32] {
        &self.losses
    }

    /// `C(N, n)`.
    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn len(&self) -> usize {
        self.successes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.successes.is_empty()
    }

    /// Class index holding a given loss value.
    pub fn class_of_loss(&self, loss: u32) -> Option<usize> {
        if !loss.is_multiple_of(2) || loss > 2 * self.design.tm {
            return None;
        }
        Some((loss / 2) as usize)
    }
}

/// Convenience wrapper matching the other free-function operations.
pub fn loss_class_table(design: ExperimentDesign) -> Result<LossClassTable> {
    LossClassTable::new(design)
}
