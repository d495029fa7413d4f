//! Goodness-of-fit helpers: Kolmogorov–Smirnov, chi-square, least squares.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
}

/// Survival function of the Kolmogorov distribution, P(K > x).
pub fn kolmogorov_sf(x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x < 1.18 {
        // Jacobi-theta form converges fast for small x
        let y = -PI * PI / (8.0 * x * x);
        let cdf = (2.0 * PI).sqrt() / x
            * (1..=6)
                .map(|k| ((2 * k - 1) as f64).powi(2) * y)
                .map(f64::exp)
                .sum::<f64>();
        (1.0 - cdf).clamp(0.0, 1.0)
    } else {
        let mut sum = 0.0;
        for k in 1..=100 {
            let term = (-2.0 * (k * k) as f64 * x * x).exp();
            sum += if k % 2 == 1 { term } else { -term };
            if term < 1e-18 {
                break;
            }
        }
        (2.0 * sum).clamp(0.0, 1.0)
    }
}

fn ks_p_value(d: f64, n_eff: f64) -> f64 {
    let s = n_eff.sqrt();
    kolmogorov_sf((s + 0.12 + 0.11 / s) * d)
}

/// One-sample KS test of `sample` against a continuous CDF.
pub fn ks_one_sample(sample: &[f64], cdf: impl Fn(f64) -> f64) -> KsResult {
    let mut xs = sample.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let statistic = xs
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max);
    KsResult {
        statistic,
        p_value: ks_p_value(statistic, n),
    }
}

/// One-sample KS test against N(0, 1).
pub fn ks_standard_normal(sample: &[f64]) -> KsResult {
    let normal = Normal::standard();
    ks_one_sample(sample, |x| normal.cdf(x))
}

/// Two-sample KS test.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> KsResult {
    let mut xs = a.to_vec();
    let mut ys = b.to_vec();
    xs.sort_by(f64::total_cmp);
    ys.sort_by(f64::total_cmp);
    let (n, m) = (xs.len() as f64, ys.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < xs.len() && j < ys.len() {
        let x = xs[i].min(ys[j]);
        while i < xs.len() && xs[i] <= x {
            i += 1;
        }
        while j < ys.len() && ys[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    KsResult {
        statistic: d,
        p_value: ks_p_value(d, n * m / (n + m)),
    }
}

/// Pearson chi-square goodness of fit of `counts` against `weights`
/// (normalized internally). Cells with zero expected count must have zero
/// observations; they do not contribute degrees of freedom.
pub fn chi_square_gof(counts: &[u64], weights: &[f64]) -> Result<(f64, f64)> {
    if counts.len() != weights.len() || counts.is_empty() {
        return Err(Error::param("weights", "length must match counts and be non-empty"));
    }
    let total: u64 = counts.iter().sum();
    let wsum: f64 = weights.iter().sum();
    if total == 0 || wsum <= 0.0 {
        return Err(Error::param("counts", "no observations"));
    }
    let mut stat = 0.0;
    let mut cells = 0usize;
    for (&c, &w) in counts.iter().zip(weights) {
        let expected = total as f64 * w / wsum;
        if expected > 0.0 {
            stat += (c as f64 - expected).powi(2) / expected;
            cells += 1;
        } else if c > 0 {
            return Ok((f64::INFINITY, 0.0));
        }
    }
    if cells < 2 {
        return Ok((stat, 1.0));
    }
    let dist = ChiSquared::new((cells - 1) as f64).expect("positive degrees of freedom");
    Ok((stat, 1.0 - dist.cdf(stat)))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Ordinary least-squares line through `(x, y)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> LinearFit {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    LinearFit {
        slope,
        intercept: my - slope * mx,
        r_squared,
    }
}

/// Sample mean and standard error of the mean.
pub fn mean_and_sem(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}
