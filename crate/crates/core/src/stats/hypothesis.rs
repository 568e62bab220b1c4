//! Chi-square and Kolmogorov-Smirnov tests.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{invalid, Error, Result};

/// Default significance level for distribution tests.
pub const DEFAULT_ALPHA: f64 = 0.01;

/// Outcome of a hypothesis test; `pass` is true iff `p_value >= alpha`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub statistic: f64,
    pub p_value: f64,
    pub alpha: f64,
    pub pass: bool,
    pub n: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub degrees_of_freedom: Option<u64>,
}

impl TestReport {
    fn new(statistic: f64, p_value: f64, alpha: f64, n: u64, df: Option<u64>) -> Self {
        let p_value = p_value.clamp(0.0, 1.0);
        Self {
            statistic,
            p_value,
            alpha,
            pass: p_value >= alpha,
            n,
            degrees_of_freedom: df,
        }
    }

    /// Re-evaluates the verdict at a different level, e.g. a Bonferroni level.
    pub fn at_level(&self, alpha: f64) -> Self {
        Self::new(self.statistic, self.p_value, alpha, self.n, self.degrees_of_freedom)
    }
}

/// Per-test level after Bonferroni correction over a battery of `m` tests.
pub fn bonferroni(alpha: f64, m: usize) -> f64 {
    alpha / m.max(1) as f64
}

fn chi_square_sf(statistic: f64, df: u64) -> f64 {
    if statistic <= 0.0 {
        return 1.0;
    }
    ChiSquared::new(df as f64)
        .expect("positive degrees of freedom")
        .sf(statistic)
}

/// Pearson chi-square test of row/column independence on an r x c table.
pub fn chi_square_independence(table: &[Vec<u64>], alpha: f64) -> Result<TestReport> {
    let rows = table.len();
    let cols = table.first().map_or(0, Vec::len);
    if rows < 2 || cols < 2 || table.iter().any(|r| r.len() != cols) {
        return Err(invalid("contingency table must be rectangular and at least 2x2"));
    }
    let row_sums: Vec<f64> = table.iter().map(|r| r.iter().sum::<u64>() as f64).collect();
    let col_sums: Vec<f64> = (0..cols)
        .map(|j| table.iter().map(|r| r[j]).sum::<u64>() as f64)
        .collect();
    let total: f64 = row_sums.iter().sum();
    let mut min_expected = f64::INFINITY;
    let mut stat = 0.0;
    for (i, row) in table.iter().enumerate() {
        for (j, &obs) in row.iter().enumerate() {
            let expected = row_sums[i] * col_sums[j] / total;
            min_expected = min_expected.min(expected);
            if expected > 0.0 {
                let diff = obs as f64 - expected;
                stat += diff * diff / expected;
            }
        }
    }
    if !(min_expected >= 5.0) {
        return Err(Error::SparseTable {
            min_expected: if min_expected.is_finite() { min_expected } else { 0.0 },
        });
    }
    let df = ((rows - 1) * (cols - 1)) as u64;
    Ok(TestReport::new(
        stat,
        chi_square_sf(stat, df),
        alpha,
        total as u64,
        Some(df),
    ))
}

/// Chi-square test that `k` binary variables are mutually independent.
///
/// `counts[mask]` is the number of observations whose bit pattern is `mask`
/// (bit `j` set means variable `j` took value 1). The null is the product of
/// the empirical marginals; degrees of freedom are `2^k - k - 1`.
pub fn chi_square_mutual_independence(counts: &[u64], k: usize, alpha: f64) -> Result<TestReport> {
    if k < 2 || counts.len() != 1 << k {
        return Err(invalid(format!(
            "expected 2^{k} cells for {k} binary variables, got {}",
            counts.len()
        )));
    }
    if k == 2 {
        let table = vec![vec![counts[0], counts[2]], vec![counts[1], counts[3]]];
        return chi_square_independence(&table, alpha);
    }
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return Err(Error::EmptySample);
    }
    let n = total as f64;
    let marginals: Vec<f64> = (0..k)
        .map(|j| {
            counts
                .iter()
                .enumerate()
                .filter(|(mask, _)| mask & (1 << j) != 0)
                .map(|(_, &c)| c)
                .sum::<u64>() as f64
                / n
        })
        .collect();
    let mut min_expected = f64::INFINITY;
    let mut stat = 0.0;
    for (mask, &obs) in counts.iter().enumerate() {
        let prob: f64 = (0..k)
            .map(|j| {
                if mask & (1 << j) != 0 {
                    marginals[j]
                } else {
                    1.0 - marginals[j]
                }
            })
            .product();
        let expected = n * prob;
        min_expected = min_expected.min(expected);
        if expected > 0.0 {
            let diff = obs as f64 - expected;
            stat += diff * diff / expected;
        }
    }
    if !(min_expected >= 5.0) {
        return Err(Error::SparseTable { min_expected });
    }
    let df = ((1u64 << k) - k as u64 - 1).max(1);
    Ok(TestReport::new(stat, chi_square_sf(stat, df), alpha, total, Some(df)))
}

/// Complementary CDF of the Kolmogorov distribution.
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for j in 1..=100 {
        let jf = j as f64;
        let term = (-2.0 * jf * jf * lambda * lambda).exp();
        sum += sign * term;
        if term < 1e-16 {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

fn sorted_finite(sample: &[f64]) -> Result<Vec<f64>> {
    if sample.iter().any(|x| !x.is_finite()) {
        return Err(invalid("sample contains non-finite values"));
    }
    let mut v = sample.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

fn ks_p_value(d: f64, effective_n: f64) -> f64 {
    let sqrt_n = effective_n.sqrt();
    kolmogorov_sf((sqrt_n + 0.12 + 0.11 / sqrt_n) * d)
}

/// Two-sample Kolmogorov-Smirnov test with the asymptotic p-value.
pub fn ks_two_sample(a: &[f64], b: &[f64], alpha: f64) -> Result<TestReport> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySample);
    }
    let a = sorted_finite(a)?;
    let b = sorted_finite(b)?;
    let (na, nb) = (a.len(), b.len());
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < na && j < nb {
        let x = a[i].min(b[j]);
        while i < na && a[i] <= x {
            i += 1;
        }
        while j < nb && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na as f64 - j as f64 / nb as f64).abs());
    }
    let ne = (na * nb) as f64 / (na + nb) as f64;
    Ok(TestReport::new(d, ks_p_value(d, ne), alpha, (na + nb) as u64, None))
}

/// One-sample Kolmogorov-Smirnov test against a continuous CDF.
pub fn ks_one_sample<F: Fn(f64) -> f64>(sample: &[f64], cdf: F, alpha: f64) -> Result<TestReport> {
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    let xs = sorted_finite(sample)?;
    let n = xs.len() as f64;
    let d = xs
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max);
    Ok(TestReport::new(d, ks_p_value(d, n), alpha, xs.len() as u64, None))
}

/// CDF of U(-half_width, half_width).
pub fn uniform_cdf(half_width: f64) -> impl Fn(f64) -> f64 {
    move |x| ((x + half_width) / (2.0 * half_width)).clamp(0.0, 1.0)
}
