//! Closed-form and numerical predictions for the degree distribution.
//!
//! Logarithms are natural throughout. All functions are pure.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{check_alpha, Error, Result};
use crate::ranking::SchemeSpec;

/// Limiting degree-class fractions under degree ranking with `d = 1`.
///
/// `C[0] = 1` and `C[k]` is the positive root of
/// `x + x^(1-alpha) = C[k-1]^(1-alpha)`; `c[k] = C[k-1] - C[k]` is the
/// fraction of vertices of degree exactly `k`, and `C[k]` the fraction of
/// degree greater than `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CkTable {
    pub alpha: f64,
    /// `C[0..=k_max]`
    pub big_c: Vec<f64>,
    /// `c[0..=k_max]`; `c[0] = 0`
    pub small_c: Vec<f64>,
    /// `((1 - alpha) / alpha)^(1/alpha)`, the limit of `C[k] k^(1/alpha)`.
    pub c_alpha: f64,
}

impl CkTable {
    pub fn k_max(&self) -> usize {
        self.big_c.len() - 1
    }

    /// `B_k = C_k k^(1/alpha)`, which converges to `c_alpha`.
    pub fn b(&self, k: usize) -> f64 {
        self.big_c[k] * (k as f64).powf(1.0 / self.alpha)
    }
}

/// `((1 - alpha) / alpha)^(1/alpha)`.
pub fn c_alpha(alpha: f64) -> f64 {
    ((1.0 - alpha) / alpha).powf(1.0 / alpha)
}

/// Solves the `C_k` recurrence by bisection on the increasing map
/// `x -> x + x^(1-alpha)` over `(0, C[k-1])`, bisecting until the bracket
/// cannot shrink further in `f64`.
pub fn solve_ck(alpha: f64, k_max: usize) -> Result<CkTable> {
    check_alpha(alpha)?;
    if k_max == 0 {
        return Err(Error::InvalidParameter("k_max must be at least 1".into()));
    }
    let beta = 1.0 - alpha;
    let mut big_c = Vec::with_capacity(k_max + 1);
    big_c.push(1.0f64);
    for k in 1..=k_max {
        let prev = big_c[k - 1];
        let target = prev.powf(beta);
        let (mut lo, mut hi) = (0.0f64, prev);
        loop {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if mid + mid.powf(beta) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        // pick the closer endpoint
        let f = |x: f64| (x + x.powf(beta) - target).abs();
        big_c.push(if f(lo) <= f(hi) && lo > 0.0 { lo } else { hi });
    }
    let mut small_c = vec![0.0; k_max + 1];
    for k in 1..=k_max {
        small_c[k] = big_c[k - 1] - big_c[k];
    }
    Ok(CkTable {
        alpha,
        big_c,
        small_c,
        c_alpha: c_alpha(alpha),
    })
}

/// Predicted limiting fraction `c_k` of vertices of degree `k` (degree
/// ranking, `d = 1`).
pub fn degree_fraction(table: &CkTable, k: usize) -> Result<f64> {
    if k == 0 || k > table.k_max() {
        return Err(Error::OutOfRange {
            what: "k",
            value: k as u64,
            lo: 1,
            hi: table.k_max() as u64,
        });
    }
    Ok(table.small_c[k])
}

/// Large-`k` form `(1/alpha) c_alpha k^-(1 + 1/alpha)` of `c_k`.
pub fn degree_fraction_asymptotic(alpha: f64, k: usize) -> f64 {
    c_alpha(alpha) / alpha * (k as f64).powf(-(1.0 + 1.0 / alpha))
}

/// Fourth-order Runge-Kutta solution of the scaled degree-class system
///
/// ```text
/// z_1' = f(S_1)
/// z_k' = f(S_{k-2}) - 2 f(S_{k-1}) + f(S_k),   k >= 2
/// ```
///
/// with `S_j = z_1 + ... + z_j`, `S_0 = 0`, and
/// `f(S) = max(1 - S/x, 0)^(1-alpha)`, from `z(x0) = 0` to `x = 1`.
pub fn integrate_degree_ode(alpha: f64, k_max: usize, x0: f64, h: f64) -> Result<Vec<f64>> {
    integrate_degree_ode_to(alpha, k_max, x0, h, 1.0)
}

/// [`integrate_degree_ode`] stopped at `x_end`.
pub fn integrate_degree_ode_to(
    alpha: f64,
    k_max: usize,
    x0: f64,
    h: f64,
    x_end: f64,
) -> Result<Vec<f64>> {
    check_alpha(alpha)?;
    if k_max == 0 {
        return Err(Error::InvalidParameter("k_max must be at least 1".into()));
    }
    if !(x0 > 0.0 && x0 < x_end && h > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need 0 < x0 < x_end and h > 0 (x0 = {x0}, x_end = {x_end}, h = {h})"
        )));
    }
    let beta = 1.0 - alpha;
    let rhs = |x: f64, z: &[f64], out: &mut [f64]| {
        // f(S_j) for j = 0..=k_max
        let mut fs = Vec::with_capacity(z.len() + 1);
        fs.push(1.0);
        let mut s = 0.0;
        for &zj in z {
            s += zj;
            fs.push((1.0 - s / x).max(0.0).powf(beta));
        }
        out[0] = fs[1];
        for k in 2..=z.len() {
            out[k - 1] = fs[k - 2] - 2.0 * fs[k - 1] + fs[k];
        }
    };

    let m = k_max;
    let mut z = vec![0.0; m];
    let (mut k1, mut k2, mut k3, mut k4) = (vec![0.0; m], vec![0.0; m], vec![0.0; m], vec![0.0; m]);
    let mut tmp = vec![0.0; m];
    let steps = ((x_end - x0) / h).ceil() as usize;
    let mut x = x0;
    for step in 0..steps {
        let hs = if step + 1 == steps { x_end - x } else { h };
        rhs(x, &z, &mut k1);
        for i in 0..m {
            tmp[i] = z[i] + 0.5 * hs * k1[i];
        }
        rhs(x + 0.5 * hs, &tmp, &mut k2);
        for i in 0..m {
            tmp[i] = z[i] + 0.5 * hs * k2[i];
        }
        rhs(x + 0.5 * hs, &tmp, &mut k3);
        for i in 0..m {
            tmp[i] = z[i] + hs * k3[i];
        }
        rhs(x + hs, &tmp, &mut k4);
        for i in 0..m {
            z[i] += hs / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        x = if step + 1 == steps { x_end } else { x + hs };
        for (i, &zi) in z.iter().enumerate() {
            if !zi.is_finite() || zi > x * (1.0 + 1e-9) {
                return Err(Error::NonConvergence { x, k: i + 1, z: zi });
            }
        }
    }
    Ok(z)
}

/// Expected degree of `v_i` at time `n` under age ranking:
/// `d (1-alpha)/alpha ((n/i)^alpha + (2 alpha - 1)/(1 - alpha))`.
pub fn expected_degree_age(i: usize, n: usize, d: usize, alpha: f64) -> f64 {
    let ratio = n as f64 / i as f64;
    d as f64 * (1.0 - alpha) / alpha * (ratio.powf(alpha) + (2.0 * alpha - 1.0) / (1.0 - alpha))
}

/// Number of vertices of degree at least `k` under age ranking:
/// `n ((1-alpha)/alpha * d/k)^(1/alpha)`.
pub fn tail_age(k: f64, n: usize, d: usize, alpha: f64) -> f64 {
    n as f64 * ((1.0 - alpha) / alpha * d as f64 / k).powf(1.0 / alpha)
}

/// Leading-order bounds `(d + d(1-alpha) alpha ln(n-i), d + d(1-alpha) ln(n-i))`
/// on the expected degree of `v_i` under inverse-age ranking. `(d, d)` at `i = n`.
pub fn expected_degree_inverse_age_bounds(i: usize, n: usize, d: usize, alpha: f64) -> (f64, f64) {
    let d = d as f64;
    if i >= n {
        return (d, d);
    }
    let log = ((n - i) as f64).ln();
    (
        d + d * (1.0 - alpha) * alpha * log,
        d + d * (1.0 - alpha) * log,
    )
}

/// Expected degree of `v_i` with label `label` under random labeling:
/// `d + d (1-alpha) label^-alpha ln(n/i)`.
pub fn expected_degree_label(i: usize, n: usize, d: usize, alpha: f64, label: f64) -> f64 {
    let d = d as f64;
    d + d * (1.0 - alpha) * label.powf(-alpha) * (n as f64 / i as f64).ln()
}

/// Number of vertices of degree at least `k` under random labeling (and
/// uniform random ranking): `n (d(1-alpha)/k)^(1/alpha) Gamma(1/alpha + 1)`.
pub fn tail_label(k: f64, n: usize, d: usize, alpha: f64) -> f64 {
    n as f64 * (d as f64 * (1.0 - alpha) / k).powf(1.0 / alpha) * gamma(1.0 / alpha + 1.0)
}

/// Limiting rank `(R_i^(1-s) - (i+1)^(1-s))^(-1/(s-1))` of a vertex born at
/// `i` with initial rank `R_i`, for `s > 1`.
pub fn r_star(initial_rank: f64, i: usize, s: f64) -> Result<f64> {
    if !(s > 1.0) {
        return Err(Error::InvalidParameter(format!(
            "limiting rank needs s > 1 (got {s}); use rank_trajectory_low_s for s < 1"
        )));
    }
    let base = initial_rank.powf(1.0 - s) - (i as f64 + 1.0).powf(1.0 - s);
    Ok(base.powf(-1.0 / (s - 1.0)))
}

/// `R* (1 + (R*/(t+1))^(s-1))^(-1/(s-1))`, the predicted rank at time `t`
/// for `s > 1`.
pub fn rank_trajectory_high_s(r_star: f64, t: f64, s: f64) -> f64 {
    r_star * (1.0 + (r_star / (t + 1.0)).powf(s - 1.0)).powf(-1.0 / (s - 1.0))
}

/// `d (1-alpha)/alpha (n/R*)^alpha`, the expected final degree of a vertex
/// with limiting rank `R*` under random ranking with `s > 1`.
pub fn expected_degree_high_s(r_star: f64, n: usize, d: usize, alpha: f64) -> f64 {
    d as f64 * (1.0 - alpha) / alpha * (n as f64 / r_star).powf(alpha)
}

/// `t - A t^s / (1-s)` with `A = (i+1)^(1-s) - R_i^(1-s)`, the predicted rank
/// at time `t` for `s < 1`. `A` is the (sign-flipped) value of the conserved
/// quantity `r^(1-s) - (t+1)^(1-s)` at birth.
pub fn rank_trajectory_low_s(initial_rank: f64, i: usize, t: f64, s: f64) -> f64 {
    let a = (i as f64 + 1.0).powf(1.0 - s) - initial_rank.powf(1.0 - s);
    t - a / (1.0 - s) * t.powf(s)
}

/// Attachment strength matching an observed degree exponent, `1/(gamma - 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaCalibration {
    pub alpha: f64,
    /// `alpha` clipped into the open model range.
    pub clipped: f64,
    pub in_range: bool,
}

pub fn alpha_from_exponent(gamma_exp: f64) -> Result<AlphaCalibration> {
    if !(gamma_exp > 1.0) || !gamma_exp.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "degree exponent gamma = {gamma_exp} must exceed 1"
        )));
    }
    let alpha = 1.0 / (gamma_exp - 1.0);
    let in_range = alpha > 0.0 && alpha < 1.0;
    let clipped = alpha.clamp(f64::EPSILON, 1.0 - f64::EPSILON);
    Ok(AlphaCalibration {
        alpha,
        clipped,
        in_range,
    })
}

/// What a [`TheoryPrediction`] predicts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    /// Expected degree of a vertex; argument is the vertex index.
    ExpectedDegree,
    /// `Z_{>=k}`; argument is `k`.
    TailCount,
    /// Rank of a tracked vertex; argument is the time `t`.
    RankTrajectory,
    /// Fraction of vertices with degree exactly `k`; argument is `k`.
    DegreeFraction,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoryPrediction {
    pub scheme: SchemeSpec,
    pub quantity: Quantity,
    pub argument: u64,
    pub value: f64,
}

impl TheoryPrediction {
    pub fn new(scheme: SchemeSpec, quantity: Quantity, argument: u64, value: f64) -> Self {
        TheoryPrediction {
            scheme,
            quantity,
            argument,
            value,
        }
    }
}

/// Tail predictions for every `k` in `k_min..=k_max` under `scheme`.
///
/// Age and `random:<s>` with `s > 1` share the age-type tail; label and
/// `random:1` share the Gamma-factor tail. Degree ranking uses `n C[k-1]`
/// from the recurrence (valid for `d = 1`). Other schemes have no power-law
/// tail prediction and yield an empty list.
pub fn tail_predictions(
    scheme: SchemeSpec,
    n: usize,
    d: usize,
    alpha: f64,
    k_min: usize,
    k_max: usize,
) -> Result<Vec<TheoryPrediction>> {
    let ks = k_min.max(1)..=k_max;
    let value = |k: usize| -> Result<Option<f64>> {
        let kf = k as f64;
        Ok(match scheme {
            SchemeSpec::Age => Some(tail_age(kf, n, d, alpha)),
            SchemeSpec::RandomRank { s } if s > 1.0 => Some(tail_age(kf, n, d, alpha)),
            SchemeSpec::RandomLabel => Some(tail_label(kf, n, d, alpha)),
            SchemeSpec::RandomRank { s: 1.0 } => Some(tail_label(kf, n, d, alpha)),
            _ => None,
        })
    };
    if scheme == SchemeSpec::Degree {
        if d != 1 {
            return Err(Error::InvalidParameter(
                "degree-ranking predictions are only available for d = 1".into(),
            ));
        }
        let table = solve_ck(alpha, k_max.max(1))?;
        return Ok(ks
            .map(|k| {
                TheoryPrediction::new(
                    scheme,
                    Quantity::TailCount,
                    k as u64,
                    n as f64 * table.big_c[k - 1],
                )
            })
            .collect());
    }
    let mut out = Vec::new();
    for k in ks {
        if let Some(v) = value(k)? {
            out.push(TheoryPrediction::new(scheme, Quantity::TailCount, k as u64, v));
        }
    }
    Ok(out)
}
