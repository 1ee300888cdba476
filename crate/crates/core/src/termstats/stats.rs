//! 2×2 chi-square test and Benjamini–Hochberg rejection.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use super::StatsError;

/// Tweet counts for one term: `a`/`b` are target tweets with/without the
/// term, `c`/`d` the same for the comparison tweets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ContingencyTable {
    pub a: u64,
    pub b: u64,
    pub c: u64,
    pub d: u64,
}

impl ContingencyTable {
    pub fn new(a: u64, b: u64, c: u64, d: u64) -> Self {
        ContingencyTable { a, b, c, d }
    }

    pub fn total(&self) -> u64 {
        self.a + self.b + self.c + self.d
    }

    pub fn target_size(&self) -> u64 {
        self.a + self.b
    }

    pub fn comparison_size(&self) -> u64 {
        self.c + self.d
    }

    /// Whether the term's share of target tweets strictly exceeds its share
    /// of comparison tweets. Compared exactly by cross-multiplication.
    pub fn over_represented(&self) -> bool {
        let lhs = u128::from(self.a) * u128::from(self.comparison_size());
        let rhs = u128::from(self.c) * u128::from(self.target_size());
        self.target_size() > 0 && self.comparison_size() > 0 && lhs > rhs
    }
}

/// Pearson chi-square statistic without continuity correction:
/// `N(ad − bc)² / ((a+b)(c+d)(a+c)(b+d))`, or 0 when any margin is empty.
pub fn chi_square(t: &ContingencyTable) -> Result<f64, StatsError> {
    let n = t.total();
    if n == 0 {
        return Err(StatsError::EmptyTable);
    }
    let margins = [t.a + t.b, t.c + t.d, t.a + t.c, t.b + t.d];
    if margins.contains(&0) {
        return Ok(0.0);
    }
    // ad − bc is exact in i128 for any u64 counts.
    let diff = (i128::from(t.a) * i128::from(t.d) - i128::from(t.b) * i128::from(t.c)) as f64;
    let denom = margins.iter().map(|&m| m as f64).product::<f64>();
    Ok(n as f64 * diff * diff / denom)
}

/// Upper-tail probability of the 1-df chi-square distribution,
/// `erfc(sqrt(x / 2))`.
pub fn chi_square_p(chi2: f64) -> Result<f64, StatsError> {
    if chi2.is_nan() || chi2 < 0.0 {
        return Err(StatsError::NegativeStatistic(chi2));
    }
    Ok(erfc((chi2 / 2.0).sqrt()).clamp(0.0, 1.0))
}

/// Benjamini–Hochberg step-up procedure. Returns the indices of rejected
/// hypotheses: every p-value at or below the largest `p(k)` satisfying
/// `p(k) ≤ k·alpha/m`.
pub fn benjamini_hochberg(p_values: &[f64], alpha: f64) -> Result<BTreeSet<usize>, StatsError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(StatsError::InvalidAlpha(alpha));
    }
    if let Some((index, &value)) = p_values
        .iter()
        .enumerate()
        .find(|(_, p)| !(0.0..=1.0).contains(*p))
    {
        return Err(StatsError::InvalidPValue { index, value });
    }
    let m = p_values.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&x, &y| {
        p_values[x]
            .partial_cmp(&p_values[y])
            .unwrap_or(Ordering::Equal)
            .then(x.cmp(&y))
    });

    let cutoff = (1..=m)
        .rev()
        .map(|k| p_values[order[k - 1]])
        .zip((1..=m).rev())
        .find(|&(p, k)| p <= k as f64 * alpha / m as f64)
        .map(|(p, _)| p);

    Ok(match cutoff {
        Some(cut) => order.into_iter().take_while(|&i| p_values[i] <= cut).collect(),
        None => BTreeSet::new(),
    })
}
