//! Reference implementations written from the textbook definitions,
//! independent of the crate's own code paths.

use std::collections::BTreeSet;

use rand::Rng;
use wata_core::ContingencyTable;

/// Pearson's sum over cells of (observed − expected)² / expected.
pub fn pearson_oracle(t: &ContingencyTable) -> f64 {
    let cells = [[t.a as f64, t.b as f64], [t.c as f64, t.d as f64]];
    let n: f64 = cells.iter().flatten().sum();
    let rows = [cells[0][0] + cells[0][1], cells[1][0] + cells[1][1]];
    let cols = [cells[0][0] + cells[1][0], cells[0][1] + cells[1][1]];
    if rows.contains(&0.0) || cols.contains(&0.0) {
        return 0.0;
    }
    let mut stat = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            let expected = rows[i] * cols[j] / n;
            stat += (cells[i][j] - expected).powi(2) / expected;
        }
    }
    stat
}

/// 2 ∫_{√x}^{∞} φ(t) dt by composite Simpson's rule.
pub fn normal_tail_oracle(x: f64) -> f64 {
    let lo = x.sqrt();
    let hi = lo + 12.0;
    let steps = 20_000;
    let h = (hi - lo) / steps as f64;
    let phi = |t: f64| (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let mut sum = phi(lo) + phi(hi);
    for k in 1..steps {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * phi(lo + k as f64 * h);
    }
    2.0 * sum * h / 3.0
}

/// Literal step-up definition: reject i iff some k has p(k) ≤ kα/m and
/// p_i ≤ p(k).
pub fn bh_oracle(p: &[f64], alpha: f64) -> BTreeSet<usize> {
    let m = p.len();
    let mut sorted = p.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut cut = None;
    for k in 1..=m {
        if sorted[k - 1] <= k as f64 * alpha / m as f64 {
            cut = Some(sorted[k - 1]);
        }
    }
    match cut {
        Some(c) => (0..m).filter(|&i| p[i] <= c).collect(),
        None => BTreeSet::new(),
    }
}

pub fn random_p_vector(r: &mut impl Rng) -> Vec<f64> {
    let m = r.random_range(1..=50);
    let mode = r.random_range(0..3);
    (0..m)
        .map(|_| {
            let u: f64 = r.random();
            match mode {
                0 => u,
                1 => u.powi(4),
                _ => (u.powi(3) * 100.0).round() / 100.0,
            }
        })
        .collect()
}
