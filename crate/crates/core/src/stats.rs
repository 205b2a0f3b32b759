//! Degree histograms, power-law exponent fits, the uniform KS test and
//! empirical-vs-predicted comparison reports.

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generator::ProcessResult;
use crate::theory::{Quantity, TheoryPrediction};

/// `Y_k` counts and the cumulative tail `Z_{>=k}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegreeHistogram {
    pub n: u64,
    pub counts: BTreeMap<u32, u64>,
    /// `tail[k] = Z_{>=k}` for `k = 0..=max_degree + 1`.
    pub tail: Vec<u64>,
}

impl DegreeHistogram {
    pub fn from_counts(counts: BTreeMap<u32, u64>) -> Self {
        let max = counts.keys().next_back().copied().unwrap_or(0) as usize;
        let mut tail = vec![0u64; max + 2];
        for (&k, &c) in &counts {
            tail[k as usize] += c;
        }
        for k in (0..=max).rev() {
            tail[k] += tail[k + 1];
        }
        DegreeHistogram {
            n: tail[0],
            counts,
            tail,
        }
    }

    pub fn from_degrees(degrees: &[u32]) -> Self {
        let mut counts = BTreeMap::new();
        for &k in degrees {
            *counts.entry(k).or_insert(0) += 1;
        }
        Self::from_counts(counts)
    }

    /// Pools several histograms (e.g. one per seed) into one.
    pub fn merge<'a>(hists: impl IntoIterator<Item = &'a DegreeHistogram>) -> Self {
        let mut counts = BTreeMap::new();
        for h in hists {
            for (&k, &c) in &h.counts {
                *counts.entry(k).or_insert(0) += c;
            }
        }
        Self::from_counts(counts)
    }

    /// `Z_{>=k}`.
    pub fn at_least(&self, k: usize) -> u64 {
        self.tail.get(k).copied().unwrap_or(0)
    }

    /// `Y_k`.
    pub fn count(&self, k: u32) -> u64 {
        self.counts.get(&k).copied().unwrap_or(0)
    }

    pub fn max_degree(&self) -> u32 {
        self.counts.keys().next_back().copied().unwrap_or(0)
    }

    /// `sum_k k Y_k`.
    pub fn endpoint_sum(&self) -> u64 {
        self.counts.iter().map(|(&k, &c)| k as u64 * c).sum()
    }

    /// `k_min = max(4, d + 1)`; `k_max` = largest `k` with `Z_{>=k} >=
    /// min_tail` (50 by default, scaled by the number of pooled runs). `None`
    /// if the window is empty.
    pub fn default_fit_window(&self, d: usize, min_tail: u64) -> Option<(usize, usize)> {
        let k_min = 4.max(d + 1);
        let k_max = (0..self.tail.len()).rev().find(|&k| self.tail[k] >= min_tail)?;
        (k_max > k_min).then_some((k_min, k_max))
    }
}

/// Exact histogram of a run's final degrees.
pub fn degree_histogram(result: &ProcessResult) -> DegreeHistogram {
    DegreeHistogram::from_degrees(&result.degrees)
}

/// Least-squares line through `(ln k, ln Z_{>=k})`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LsFit {
    /// Minus the slope: the cumulative exponent (`1/alpha` in theory).
    pub exponent: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points: usize,
}

pub fn fit_exponent_ls(hist: &DegreeHistogram, k_min: usize, k_max: usize) -> Result<LsFit> {
    let pts: Vec<(f64, f64)> = (k_min.max(1)..=k_max)
        .filter(|&k| hist.at_least(k) > 0)
        .map(|k| ((k as f64).ln(), (hist.at_least(k) as f64).ln()))
        .collect();
    fit_log_log(&pts).ok_or_else(|| {
        Error::SparseWindow(format!(
            "{} usable points in [{k_min}, {k_max}], need at least 5",
            pts.len()
        ))
    })
}

/// Least squares over arbitrary `(ln x, ln y)` points; `None` below 5 points.
pub fn fit_log_log(pts: &[(f64, f64)]) -> Option<LsFit> {
    if pts.len() < 5 {
        return None;
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Some(LsFit {
        exponent: -slope,
        intercept,
        r_squared,
        points: pts.len(),
    })
}

/// Continuous Hill (maximum-likelihood) estimate of the pdf exponent:
/// `1 + m / sum ln(x_j / x_min)` over the `m` observations `>= x_min`.
pub fn fit_exponent_hill(samples: &[f64], x_min: f64) -> Result<f64> {
    if !(x_min > 0.0) {
        return Err(Error::InvalidParameter("Hill threshold must be positive".into()));
    }
    let tail: Vec<f64> = samples.iter().copied().filter(|&x| x >= x_min).collect();
    if tail.len() < 100 {
        return Err(Error::TooFewObservations(format!(
            "{} observations >= {x_min}, need 100",
            tail.len()
        )));
    }
    let log_sum: f64 = tail.iter().map(|&x| (x / x_min).ln()).sum();
    if log_sum <= 0.0 {
        return Err(Error::Degenerate("all tail observations equal the threshold".into()));
    }
    Ok(1.0 + tail.len() as f64 / log_sum)
}

/// Hill estimate for integer degrees: observations `>= k_min`, threshold
/// `k_min - 1/2` (continuity correction for a discrete power law).
pub fn fit_exponent_hill_discrete(degrees: &[u32], k_min: u32) -> Result<f64> {
    if k_min == 0 {
        return Err(Error::InvalidParameter("k_min must be at least 1".into()));
    }
    let samples: Vec<f64> = degrees
        .iter()
        .filter(|&&k| k >= k_min)
        .map(|&k| k as f64)
        .collect();
    fit_exponent_hill(&samples, k_min as f64 - 0.5)
}

/// One-sample Kolmogorov-Smirnov test against Uniform(0,1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsOutcome {
    pub statistic: f64,
    pub p_value: f64,
    pub level: f64,
    pub pass: bool,
}

/// Significance level of [`ks_uniform_test`].
pub const KS_LEVEL: f64 = 1e-3;

pub fn ks_uniform_test(samples: &[f64]) -> Result<KsOutcome> {
    if samples.len() < 100 {
        return Err(Error::TooFewObservations(format!(
            "{} samples, need 100",
            samples.len()
        )));
    }
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let m = xs.len() as f64;
    let statistic = xs
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let x = x.clamp(0.0, 1.0);
            ((i as f64 + 1.0) / m - x).max(x - i as f64 / m)
        })
        .fold(0.0, f64::max);
    let sqrt_m = m.sqrt();
    let p_value = kolmogorov_q((sqrt_m + 0.12 + 0.11 / sqrt_m) * statistic);
    Ok(KsOutcome {
        statistic,
        p_value,
        level: KS_LEVEL,
        pass: p_value >= KS_LEVEL,
    })
}

/// Kolmogorov survival function `Q(x) = 2 sum_{j>=1} (-1)^(j-1) exp(-2 j^2 x^2)`.
fn kolmogorov_q(x: f64) -> f64 {
    if x < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for j in 1..=100 {
        let term = (-2.0 * (j * j) as f64 * x * x).exp();
        sum += sign * term;
        if term < 1e-16 {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// One empirical-vs-predicted row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub quantity: Quantity,
    pub argument: u64,
    pub empirical: f64,
    pub theoretical: f64,
    /// `|empirical - theoretical| / max(theoretical, 1)`
    pub relative_error: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub label: String,
    pub tolerance: f64,
    pub rows: Vec<ComparisonRow>,
    pub fitted_exponent: Option<f64>,
    pub fit_window: Option<(usize, usize)>,
}

impl ComparisonReport {
    pub fn pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn max_relative_error(&self) -> f64 {
        self.rows.iter().map(|r| r.relative_error).fold(0.0, f64::max)
    }
}

/// Empirical values keyed like predictions.
pub type Observations = BTreeMap<(Quantity, u64), f64>;

/// `Z_{>=k}` observations for each `k` in the window.
pub fn tail_observations(hist: &DegreeHistogram, k_min: usize, k_max: usize) -> Observations {
    (k_min..=k_max)
        .map(|k| ((Quantity::TailCount, k as u64), hist.at_least(k) as f64))
        .collect()
}

/// One row per prediction; a row passes iff its relative error is at most
/// `tolerance`. Every prediction needs a matching observation.
pub fn compare_report(
    label: impl Into<String>,
    observed: &Observations,
    predictions: &[TheoryPrediction],
    tolerance: f64,
) -> Result<ComparisonReport> {
    let mut seen = HashSet::new();
    let mut rows = Vec::with_capacity(predictions.len());
    for p in predictions {
        let key = (p.quantity, p.argument);
        if !seen.insert(key) {
            return Err(Error::KeyMismatch(format!(
                "duplicate prediction {:?} at {}",
                p.quantity, p.argument
            )));
        }
        let empirical = *observed.get(&key).ok_or_else(|| {
            Error::KeyMismatch(format!("no observation for {:?} at {}", p.quantity, p.argument))
        })?;
        let relative_error = (empirical - p.value).abs() / p.value.max(1.0);
        rows.push(ComparisonRow {
            quantity: p.quantity,
            argument: p.argument,
            empirical,
            theoretical: p.value,
            relative_error,
            pass: relative_error <= tolerance,
        });
    }
    Ok(ComparisonReport {
        label: label.into(),
        tolerance,
        rows,
        fitted_exponent: None,
        fit_window: None,
    })
}

/// Mean of `f(result)` over an ensemble.
pub fn ensemble_mean(results: &[ProcessResult], f: impl Fn(&ProcessResult) -> f64) -> f64 {
    results.iter().map(f).sum::<f64>() / results.len() as f64
}
