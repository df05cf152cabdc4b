//! Rank correlation for trend checks.

use statrs::distribution::{ContinuousCDF, StudentsT};

/// Ranks starting at 1, ties sharing their average rank.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = rank;
        }
        i = j + 1;
    }
    ranks
}

fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    sxy / (sxx * syy).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spearman {
    pub rho: f64,
    /// One-sided p-value for `rho > 0` (t approximation, n − 2 dof).
    pub p_greater: f64,
    pub n: usize,
}

/// Spearman's rank correlation with tie correction. Needs at least three
/// pairs.
pub fn spearman(x: &[f64], y: &[f64]) -> Option<Spearman> {
    if x.len() != y.len() || x.len() < 3 {
        return None;
    }
    let rho = pearson(&average_ranks(x), &average_ranks(y));
    if !rho.is_finite() {
        return None;
    }
    let n = x.len();
    let dof = (n - 2) as f64;
    let p_greater = if rho >= 1.0 {
        0.0
    } else {
        let t = rho * (dof / (1.0 - rho * rho)).sqrt();
        1.0 - StudentsT::new(0.0, 1.0, dof).ok()?.cdf(t)
    };
    Some(Spearman { rho, p_greater, n })
}
