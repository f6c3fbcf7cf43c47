//! Goodness-of-fit and independence tests with importance weights.

use statrs::distribution::{Binomial, ChiSquared, ContinuousCDF, DiscreteCDF};

use crate::rtree::pairwise_sum;

/// Mean and standard error of the mean, with order-stable sums.
pub fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = pairwise_sum(xs.iter().copied()) / n;
    if xs.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = pairwise_sum(xs.iter().map(|x| (x - mean) * (x - mean))) / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Kish effective sample size `(Σw)² / Σw²`.
pub fn effective_size(weights: &[f64]) -> f64 {
    let s = pairwise_sum(weights.iter().copied());
    let s2 = pairwise_sum(weights.iter().map(|w| w * w));
    if s2 > 0.0 {
        s * s / s2
    } else {
        0.0
    }
}

/// Largest gap between the weighted empirical CDF and `cdf`.
pub fn ks_statistic(values: &[f64], weights: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let total = pairwise_sum(weights.iter().copied());
    let mut acc = 0.0;
    let mut d = 0.0f64;
    let mut k = 0;
    while k < idx.len() {
        let v = values[idx[k]];
        let f = cdf(v);
        d = d.max((f - acc / total).abs());
        while k < idx.len() && values[idx[k]] == v {
            acc += weights[idx[k]];
            k += 1;
        }
        d = d.max((acc / total - f).abs());
    }
    d
}

/// Asymptotic `P(D_n ≥ d)` for the one-sample KS statistic, with
/// Stephens' small-sample correction.
pub fn ks_pvalue(d: f64, n: f64) -> f64 {
    let sn = n.sqrt();
    let lambda = (sn + 0.12 + 0.11 / sn) * d;
    kolmogorov_sf(lambda)
}

/// Survival function of the Kolmogorov distribution.
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 1.0 {
        // Dual theta series, fast for small λ.
        let c = std::f64::consts::PI * std::f64::consts::PI / (8.0 * lambda * lambda);
        let s: f64 = (1..=20)
            .map(|k| {
                let j = (2 * k - 1) as f64;
                (-j * j * c).exp()
            })
            .sum();
        return (1.0 - (2.0 * std::f64::consts::PI).sqrt() / lambda * s).clamp(0.0, 1.0);
    }
    let s: f64 = (1..=100)
        .map(|k| {
            let k = k as f64;
            let sign = if k as i64 % 2 == 1 { 1.0 } else { -1.0 };
            sign * (-2.0 * k * k * lambda * lambda).exp()
        })
        .sum();
    (2.0 * s).clamp(0.0, 1.0)
}

/// Bin edges putting equal weight in each of `bins` classes.
fn weighted_quantile_edges(values: &[f64], weights: &[f64], bins: usize) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let total = pairwise_sum(weights.iter().copied());
    let mut edges = Vec::with_capacity(bins - 1);
    let mut acc = 0.0;
    let mut next = 1;
    for &i in &idx {
        acc += weights[i];
        while next < bins && acc >= total * next as f64 / bins as f64 {
            edges.push(values[i]);
            next += 1;
        }
    }
    edges.dedup();
    edges
}

fn bin_of(edges: &[f64], v: f64) -> usize {
    edges.partition_point(|&e| e < v)
}

/// Pearson chi-square test of independence of two weighted samples, binned
/// at weighted quantiles. Weighted counts are rescaled to the effective
/// sample size. Returns the p-value.
pub fn chi_square_independence(a: &[f64], b: &[f64], weights: &[f64], bins: usize) -> f64 {
    let ea = weighted_quantile_edges(a, weights, bins);
    let eb = weighted_quantile_edges(b, weights, bins);
    let (ra, rb) = (ea.len() + 1, eb.len() + 1);
    if ra < 2 || rb < 2 {
        return 1.0;
    }
    let mut table = vec![0.0; ra * rb];
    for i in 0..a.len() {
        table[bin_of(&ea, a[i]) * rb + bin_of(&eb, b[i])] += weights[i];
    }
    let total: f64 = pairwise_sum(table.iter().copied());
    let scale = effective_size(weights) / total;
    for t in &mut table {
        *t *= scale;
    }
    let n: f64 = pairwise_sum(table.iter().copied());
    let rows: Vec<f64> = (0..ra)
        .map(|i| table[i * rb..(i + 1) * rb].iter().sum())
        .collect();
    let cols: Vec<f64> = (0..rb)
        .map(|j| (0..ra).map(|i| table[i * rb + j]).sum())
        .collect();
    let mut stat = 0.0;
    for i in 0..ra {
        for j in 0..rb {
            let e = rows[i] * cols[j] / n;
            if e > 0.0 {
                stat += (table[i * rb + j] - e).powi(2) / e;
            }
        }
    }
    let df = ((ra - 1) * (rb - 1)) as f64;
    1.0 - ChiSquared::new(df)
        .expect("positive degrees of freedom")
        .cdf(stat)
}

/// Chi-square goodness of fit of counts against expected probabilities.
pub fn chi_square_fit(counts: &[u64], probs: &[f64]) -> f64 {
    let n: u64 = counts.iter().sum();
    let stat: f64 = counts
        .iter()
        .zip(probs)
        .map(|(&c, &p)| {
            let e = p * n as f64;
            (c as f64 - e).powi(2) / e
        })
        .sum();
    let df = (counts.len() - 1) as f64;
    1.0 - ChiSquared::new(df).expect("at least two classes").cdf(stat)
}

/// Two-sided exact sign test; zero differences are dropped.
pub fn sign_test(diffs: &[f64]) -> f64 {
    let pos = diffs.iter().filter(|d| **d > 0.0).count() as u64;
    let neg = diffs.iter().filter(|d| **d < 0.0).count() as u64;
    let n = pos + neg;
    if n == 0 {
        return 1.0;
    }
    let bin = Binomial::new(0.5, n).expect("valid binomial");
    let k = pos.min(neg);
    (2.0 * bin.cdf(k)).min(1.0)
}
