//! The scheme-by-claim verification matrix behind `rankgraph verify`.
//!
//! Each claim runs an ensemble at its own default scale (overridable with a
//! common `n` and ensemble size) and produces comparison reports plus scalar
//! checks such as fitted exponents and degree bounds.

use serde::Serialize;

use crate::generator::{run_ensemble, ProcessParams, ProcessResult};
use crate::ranking::SchemeSpec;
use crate::stats::{
    compare_report, degree_histogram, fit_exponent_hill_discrete, fit_exponent_ls,
    ks_uniform_test, tail_observations, ComparisonReport, DegreeHistogram, Observations, KS_LEVEL,
};
use crate::theory::{
    degree_fraction, expected_degree_age, r_star, rank_trajectory_high_s, rank_trajectory_low_s,
    solve_ck, tail_predictions, Quantity, TheoryPrediction,
};
use crate::Result;

/// Tail rows need this many vertices at `k_max`, per run.
pub const MIN_TAIL_PER_RUN: u64 = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Claim {
    DegreeScheme,
    Age,
    InverseAge,
    Label,
    RandomUniform,
    RandomHighS,
    RandomLowS,
}

pub const ALL_CLAIMS: [Claim; 7] = [
    Claim::DegreeScheme,
    Claim::Age,
    Claim::InverseAge,
    Claim::Label,
    Claim::RandomUniform,
    Claim::RandomHighS,
    Claim::RandomLowS,
];

impl Claim {
    pub fn scheme(self) -> SchemeSpec {
        match self {
            Claim::DegreeScheme => SchemeSpec::Degree,
            Claim::Age => SchemeSpec::Age,
            Claim::InverseAge => SchemeSpec::InverseAge,
            Claim::Label => SchemeSpec::RandomLabel,
            Claim::RandomUniform => SchemeSpec::RandomRank { s: 1.0 },
            Claim::RandomHighS => SchemeSpec::RandomRank { s: 2.0 },
            Claim::RandomLowS => SchemeSpec::RandomRank { s: 0.5 },
        }
    }

    /// `--only` accepts the scheme string or its family (`random`).
    pub fn matches(self, filter: &str) -> bool {
        let name = self.scheme().to_string();
        name == filter || name.split(':').next() == Some(filter)
    }

    /// `(n, runs, d, alpha)`.
    pub fn default_scale(self) -> (usize, usize, usize, f64) {
        match self {
            Claim::DegreeScheme => (500_000, 5, 1, 0.5),
            Claim::Age => (100_000, 20, 2, 0.6),
            Claim::InverseAge => (10_000, 200, 1, 0.5),
            Claim::Label | Claim::RandomUniform => (500_000, 5, 1, 0.5),
            Claim::RandomHighS | Claim::RandomLowS => (100_000, 20, 1, 0.5),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound {
    /// `|observed - target| <= tolerance`
    Within,
    /// `observed <= target`
    AtMost,
    /// `observed >= target`
    AtLeast,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalarCheck {
    pub name: String,
    pub observed: f64,
    pub target: f64,
    pub bound: Bound,
    pub tolerance: f64,
    pub pass: bool,
}

impl ScalarCheck {
    fn within(name: &str, observed: f64, target: f64, tolerance: f64) -> Self {
        ScalarCheck {
            name: name.into(),
            observed,
            target,
            bound: Bound::Within,
            tolerance,
            pass: (observed - target).abs() <= tolerance,
        }
    }

    fn at_most(name: &str, observed: f64, target: f64) -> Self {
        ScalarCheck {
            name: name.into(),
            observed,
            target,
            bound: Bound::AtMost,
            tolerance: 0.0,
            pass: observed <= target,
        }
    }

    fn at_least(name: &str, observed: f64, target: f64) -> Self {
        ScalarCheck {
            name: name.into(),
            observed,
            target,
            bound: Bound::AtLeast,
            tolerance: 0.0,
            pass: observed >= target,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClaimResult {
    pub claim: Claim,
    pub scheme: String,
    pub n: usize,
    pub runs: usize,
    pub d: usize,
    pub alpha: f64,
    pub reports: Vec<ComparisonReport>,
    pub checks: Vec<ScalarCheck>,
    pub pass: bool,
}

#[derive(Debug, Clone, Default)]
pub struct VerifyConfig {
    pub n: Option<usize>,
    pub runs: Option<usize>,
    pub seed: u64,
    /// Replaces every relative and absolute tolerance.
    pub tolerance: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub schema: u32,
    pub seed: u64,
    pub claims: Vec<ClaimResult>,
    pub pass: bool,
}

struct Ctx<'a> {
    cfg: &'a VerifyConfig,
    claim: Claim,
    n: usize,
    runs: usize,
    d: usize,
    alpha: f64,
}

impl Ctx<'_> {
    fn tol(&self, default: f64) -> f64 {
        self.cfg.tolerance.unwrap_or(default)
    }

    fn params(&self, scheme: SchemeSpec) -> ProcessParams {
        ProcessParams::new(self.n, self.d, self.alpha, scheme, self.cfg.seed)
    }

    fn pooled(results: &[ProcessResult]) -> DegreeHistogram {
        let hists: Vec<_> = results.iter().map(degree_histogram).collect();
        DegreeHistogram::merge(&hists)
    }

    /// `Z_{>=k}` over the default window against the scheme's tail formula.
    fn tail_report(&self, scheme: SchemeSpec, hist: &DegreeHistogram, tol: f64) -> Result<ComparisonReport> {
        let window = hist
            .default_fit_window(self.d, MIN_TAIL_PER_RUN * self.runs as u64)
            .ok_or_else(|| crate::Error::SparseWindow(format!("{scheme}: no tail window at this scale")))?;
        let preds = tail_predictions(scheme, self.n * self.runs, self.d, self.alpha, window.0, window.1)?;
        let obs = tail_observations(hist, window.0, window.1);
        let mut report = compare_report(format!("{scheme} tail"), &obs, &preds, self.tol(tol))?;
        report.fit_window = Some(window);
        report.fitted_exponent = fit_exponent_ls(hist, window.0, window.1).ok().map(|f| f.exponent);
        Ok(report)
    }
}

fn mean_trajectory_report(
    label: String,
    scheme: SchemeSpec,
    results: &[ProcessResult],
    slot: usize,
    from_t: f64,
    predict: impl Fn(&ProcessResult, usize) -> f64,
    tol: f64,
) -> Result<ComparisonReport> {
    let points = &results[0].trajectories[slot].points;
    let mut obs = Observations::new();
    let mut preds = Vec::new();
    for (j, p) in points.iter().enumerate() {
        if (p.t as f64) < from_t {
            continue;
        }
        let m = results.len() as f64;
        let rank = results.iter().map(|r| r.trajectories[slot].points[j].rank as f64).sum::<f64>() / m;
        let pred = results.iter().map(|r| predict(r, p.t)).sum::<f64>() / m;
        obs.insert((Quantity::RankTrajectory, p.t as u64), rank);
        preds.push(TheoryPrediction::new(scheme, Quantity::RankTrajectory, p.t as u64, pred));
    }
    compare_report(label, &obs, &preds, tol)
}

fn max_degree(results: &[ProcessResult]) -> f64 {
    results.iter().flat_map(|r| r.degrees.iter()).copied().max().unwrap_or(0) as f64
}

fn label_exponent(ctx: &Ctx) -> Result<f64> {
    let results = run_ensemble(&ctx.params(SchemeSpec::RandomLabel), ctx.runs)?;
    let hist = Ctx::pooled(&results);
    Ok(ctx.tail_report(SchemeSpec::RandomLabel, &hist, 0.15)?.fitted_exponent.unwrap_or(f64::NAN))
}

fn run_claim(ctx: &Ctx, label_exp: &mut Option<f64>) -> Result<(Vec<ComparisonReport>, Vec<ScalarCheck>)> {
    let scheme = ctx.claim.scheme();
    let (n, d, alpha) = (ctx.n, ctx.d, ctx.alpha);
    let mut reports = Vec::new();
    let mut checks = Vec::new();
    match ctx.claim {
        Claim::DegreeScheme => {
            let results = run_ensemble(&ctx.params(scheme), ctx.runs)?;
            let hist = Ctx::pooled(&results);
            let table = solve_ck(alpha, 3)?;
            let total = hist.n as f64;
            let mut obs = Observations::new();
            let mut preds = Vec::new();
            for k in 1..=3u32 {
                obs.insert((Quantity::DegreeFraction, k as u64), hist.count(k) as f64 / total);
                let c = degree_fraction(&table, k as usize)?;
                preds.push(TheoryPrediction::new(scheme, Quantity::DegreeFraction, k as u64, c));
            }
            // fractions are below 1, so this is an absolute tolerance
            reports.push(compare_report("degree fractions", &obs, &preds, ctx.tol(0.01))?);
            reports.push(ctx.tail_report(scheme, &hist, 0.10)?);
            let ls = fit_exponent_ls(&hist, 4, 40)?.exponent;
            checks.push(ScalarCheck::within("ls exponent k in [4,40]", ls, 1.0 / alpha, ctx.tol(0.2)));
            let all: Vec<u32> = results.iter().flat_map(|r| r.degrees.iter().copied()).collect();
            let hill = fit_exponent_hill_discrete(&all, 4)?;
            checks.push(ScalarCheck::within("hill pdf exponent k >= 4", hill, 1.0 + 1.0 / alpha, ctx.tol(0.3)));
        }
        Claim::Age => {
            let i = (n / 100).max(1);
            let results = run_ensemble(&ctx.params(scheme), ctx.runs)?;
            let mean = results.iter().map(|r| r.degree(i) as f64).sum::<f64>() / ctx.runs as f64;
            let obs = Observations::from([((Quantity::ExpectedDegree, i as u64), mean)]);
            let pred = TheoryPrediction::new(scheme, Quantity::ExpectedDegree, i as u64, expected_degree_age(i, n, d, alpha));
            reports.push(compare_report("age mean degree", &obs, &[pred], ctx.tol(0.05))?);
            reports.push(ctx.tail_report(scheme, &Ctx::pooled(&results), 0.10)?);
        }
        Claim::InverseAge => {
            let results = run_ensemble(&ctx.params(scheme), ctx.runs)?;
            let mean = results.iter().map(|r| r.degree(1) as f64).sum::<f64>() / ctx.runs as f64;
            let target = d as f64 * (1.0 + (1.0 - alpha) * (n as f64).ln());
            let obs = Observations::from([((Quantity::ExpectedDegree, 1), mean)]);
            let pred = TheoryPrediction::new(scheme, Quantity::ExpectedDegree, 1, target);
            reports.push(compare_report("inverse-age mean degree of v_1", &obs, &[pred], ctx.tol(0.10))?);
            let bound = 10.0 * d as f64 * (n as f64).ln();
            checks.push(ScalarCheck::at_most("max degree over runs", max_degree(&results), bound));
        }
        Claim::Label => {
            let results = run_ensemble(&ctx.params(scheme), ctx.runs)?;
            let report = ctx.tail_report(scheme, &Ctx::pooled(&results), 0.15)?;
            let exp = report.fitted_exponent.unwrap_or(f64::NAN);
            *label_exp = Some(exp);
            checks.push(ScalarCheck::within("ls exponent over fit window", exp, 1.0 / alpha, ctx.tol(0.2)));
            reports.push(report);
        }
        Claim::RandomUniform => {
            let results = run_ensemble(&ctx.params(scheme), ctx.runs)?;
            let report = ctx.tail_report(scheme, &Ctx::pooled(&results), 0.15)?;
            let exp = report.fitted_exponent.unwrap_or(f64::NAN);
            let label = match *label_exp {
                Some(e) => e,
                None => label_exponent(ctx)?,
            };
            checks.push(ScalarCheck::within("ls exponent minus label exponent", exp, label, ctx.tol(0.1)));
            reports.push(report);
            let mut ks_params = ctx.params(scheme);
            ks_params.n = n.min(10_000);
            ks_params.track = vec![1];
            let ks_runs = run_ensemble(&ks_params, 500)?;
            let xs: Vec<f64> = ks_runs
                .iter()
                .map(|r| r.trajectories[0].points.last().expect("final checkpoint").rank as f64 / ks_params.n as f64)
                .collect();
            let ks = ks_uniform_test(&xs)?;
            checks.push(ScalarCheck::at_least("ks p-value of r(v_1,n)/n", ks.p_value, KS_LEVEL));
        }
        Claim::RandomHighS => {
            let s = 2.0;
            let i = 1000.min(n / 10).max(2);
            let r_i = (i / 10).max(1);
            let mut params = ctx.params(scheme);
            params.track = vec![i];
            params.initial_ranks = vec![(i, r_i)];
            let results = run_ensemble(&params, ctx.runs)?;
            let rs = r_star(r_i as f64, i, s)?;
            reports.push(mean_trajectory_report(
                format!("random:2 mean rank of v_{i} (R_i = {r_i})"),
                scheme,
                &results,
                0,
                10.0 * rs,
                |_, t| rank_trajectory_high_s(rs, t as f64, s),
                ctx.tol(0.05),
            )?);
            reports.push(ctx.tail_report(scheme, &Ctx::pooled(&results), 0.15)?);
        }
        Claim::RandomLowS => {
            let s = 0.5;
            let tracked: Vec<usize> = [10, 100, 1000].into_iter().filter(|&i| 100 * i <= n).collect();
            let mut params = ctx.params(scheme);
            params.track = tracked.clone();
            let results = run_ensemble(&params, ctx.runs)?;
            for (slot, &i) in tracked.iter().enumerate() {
                reports.push(mean_trajectory_report(
                    format!("random:0.5 mean rank of v_{i}"),
                    scheme,
                    &results,
                    slot,
                    100.0 * i as f64,
                    |r, t| {
                        let r_i = r.trajectories[slot].points[0].rank as f64;
                        rank_trajectory_low_s(r_i, i, t as f64, s)
                    },
                    ctx.tol(0.05),
                )?);
            }
            let bound = 10.0 * d as f64 * (n as f64).ln();
            checks.push(ScalarCheck::at_most("max degree over runs", max_degree(&results), bound));
        }
    }
    Ok((reports, checks))
}

/// Runs the selected claims in matrix order.
pub fn run_verify(cfg: &VerifyConfig, claims: &[Claim]) -> Result<VerifyReport> {
    let mut out = Vec::new();
    let mut label_exp = None;
    for &claim in claims {
        let (n0, runs0, d, alpha) = claim.default_scale();
        let ctx = Ctx {
            cfg,
            claim,
            n: cfg.n.unwrap_or(n0),
            runs: cfg.runs.unwrap_or(runs0),
            d,
            alpha,
        };
        let (reports, checks) = run_claim(&ctx, &mut label_exp)?;
        let pass = reports.iter().all(|r| r.pass()) && checks.iter().all(|c| c.pass);
        out.push(ClaimResult {
            claim,
            scheme: claim.scheme().to_string(),
            n: ctx.n,
            runs: ctx.runs,
            d,
            alpha,
            reports,
            checks,
            pass,
        });
    }
    let pass = out.iter().all(|c| c.pass);
    Ok(VerifyReport {
        schema: crate::generator::RESULT_SCHEMA,
        seed: cfg.seed,
        claims: out,
        pass,
    })
}
