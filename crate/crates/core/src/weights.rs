//! Rank weights `j^-alpha` and their prefix sums.
//!
//! The link probability of the vertex at rank `r` among `t` candidates is
//! `r^-alpha / g(t)` with `g(t) = sum_{j=1..t} j^-alpha`. The weights depend
//! only on the rank position, so a single prefix table built once up to
//! `t_max` serves every time step of a run, and a rank is drawn by a binary
//! search for the first prefix sum at or above `u * g(t)`.

use crate::error::{check_alpha, Error, Result};

/// Prefix sums of `j^-alpha` for `j = 1..=t_max`.
#[derive(Debug, Clone)]
pub struct WeightTable {
    alpha: f64,
    // prefix[j - 1] = g(j)
    prefix: Vec<f64>,
}

impl WeightTable {
    /// Builds the table with Neumaier-compensated summation.
    pub fn new(alpha: f64, t_max: usize) -> Result<Self> {
        check_alpha(alpha)?;
        if t_max == 0 {
            return Err(Error::InvalidParameter("t_max must be at least 1".into()));
        }
        let mut prefix = Vec::with_capacity(t_max);
        let mut sum = 0.0f64;
        let mut comp = 0.0f64;
        for j in 1..=t_max {
            let term = rank_weight(alpha, j);
            let next = sum + term;
            if sum.abs() >= term.abs() {
                comp += (sum - next) + term;
            } else {
                comp += (term - next) + sum;
            }
            sum = next;
            prefix.push(sum + comp);
        }
        Ok(WeightTable { alpha, prefix })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn t_max(&self) -> usize {
        self.prefix.len()
    }

    pub fn prefix(&self) -> &[f64] {
        &self.prefix
    }

    /// `g_alpha(t)`, the normalising constant over `t` ranks.
    pub fn g_alpha(&self, t: usize) -> Result<f64> {
        self.check_t(t)?;
        Ok(self.prefix[t - 1])
    }

    /// Smallest rank `j` in `1..=t` with `g(j) >= u * g(t)`.
    ///
    /// For `u` uniform on `[0,1)` this returns `j` with probability
    /// `j^-alpha / g(t)`.
    pub fn sample_rank(&self, t: usize, u: f64) -> Result<usize> {
        self.check_t(t)?;
        Ok(self.sample_rank_unchecked(t, u))
    }

    #[inline]
    pub(crate) fn sample_rank_unchecked(&self, t: usize, u: f64) -> usize {
        let window = &self.prefix[..t];
        let target = u * window[t - 1];
        let idx = window.partition_point(|&p| p < target);
        (idx + 1).min(t)
    }

    fn check_t(&self, t: usize) -> Result<()> {
        if t == 0 || t > self.prefix.len() {
            return Err(Error::OutOfRange {
                what: "t",
                value: t as u64,
                lo: 1,
                hi: self.prefix.len() as u64,
            });
        }
        Ok(())
    }
}

/// `j^-alpha`.
#[inline]
pub fn rank_weight(alpha: f64, j: usize) -> f64 {
    (j as f64).powf(-alpha)
}
