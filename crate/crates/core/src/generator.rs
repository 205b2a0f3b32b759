//! The growth process `G_1 -> G_n`.
//!
//! `G_1` is one vertex carrying `d` loops. At each step `t >= 2` a vertex
//! `v_t` arrives and draws `d` endpoints independently, with replacement,
//! from the ranking of `V_{t-1}`: the vertex at rank `r` is chosen with
//! probability `r^-alpha / g_alpha(t-1)`. `v_t` itself is never a candidate.
//! After the `d` substeps the ranking is updated once, so all substeps of a
//! step see the same frozen ranking.
//!
//! # Random streams
//!
//! Every run draws from ChaCha8 seeded with `seed` (via
//! `SeedableRng::seed_from_u64`) on stream `run_index`; draw `j` of a run is
//! the `j`-th 64-bit output of that stream. A single [`generate`] call is run
//! index 0. Uniforms on `[0,1)` take the top 53 bits of one output.
//! Per step the order of draws is: `d` endpoint uniforms, then one scheme
//! uniform (label or initial rank) for `label` and `random:<s>` schemes.

use std::collections::BTreeMap;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_alpha, Error, Result};
use crate::ranking::{RankingState, SchemeSpec};
use crate::weights::WeightTable;

/// Version tag written into serialized results.
pub const RESULT_SCHEMA: u32 = 1;

/// Default spacing factor of trajectory checkpoints.
pub const DEFAULT_CHECKPOINT_GROWTH: f64 = 0.1;

/// Configuration of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProcessParams {
    pub n: usize,
    pub d: usize,
    pub alpha: f64,
    pub scheme: SchemeSpec,
    pub seed: u64,
    /// Vertices whose (t, rank, degree) trajectories are recorded.
    #[serde(default)]
    pub track: Vec<usize>,
    /// Times at which the degree histogram of `G_t` is captured.
    #[serde(default)]
    pub snapshot_times: Vec<usize>,
    #[serde(default)]
    pub keep_edges: bool,
    /// Checkpoints of a vertex born at `i` are `ceil(i (1 + growth)^m)`.
    #[serde(default = "default_growth")]
    pub checkpoint_growth: f64,
    /// `(vertex, rank)` pairs fixing the initial rank `R_i` of selected
    /// vertices. Only valid for `random:<s>` schemes.
    #[serde(default)]
    pub initial_ranks: Vec<(usize, usize)>,
}

fn default_growth() -> f64 {
    DEFAULT_CHECKPOINT_GROWTH
}

impl ProcessParams {
    pub fn new(n: usize, d: usize, alpha: f64, scheme: SchemeSpec, seed: u64) -> Self {
        ProcessParams {
            n,
            d,
            alpha,
            scheme,
            seed,
            track: Vec::new(),
            snapshot_times: Vec::new(),
            keep_edges: false,
            checkpoint_growth: DEFAULT_CHECKPOINT_GROWTH,
            initial_ranks: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidParameter("n must be at least 1".into()));
        }
        if self.d == 0 {
            return Err(Error::InvalidParameter("d must be at least 1".into()));
        }
        check_alpha(self.alpha)?;
        self.scheme.validate()?;
        let endpoints = self
            .n
            .checked_mul(self.d)
            .and_then(|x| x.checked_mul(2))
            .filter(|&x| x <= u32::MAX as usize);
        if endpoints.is_none() {
            return Err(Error::Overflow {
                n: self.n,
                d: self.d,
            });
        }
        if !(self.checkpoint_growth.is_finite() && self.checkpoint_growth > 0.0) {
            return Err(Error::InvalidParameter(
                "checkpoint growth factor must be positive".into(),
            ));
        }
        for &v in &self.track {
            if v == 0 || v > self.n {
                return Err(Error::UnknownVertex(v));
            }
        }
        for &t in &self.snapshot_times {
            if t == 0 || t > self.n {
                return Err(Error::OutOfRange {
                    what: "snapshot time",
                    value: t as u64,
                    lo: 1,
                    hi: self.n as u64,
                });
            }
        }
        if !self.initial_ranks.is_empty() && !matches!(self.scheme, SchemeSpec::RandomRank { .. }) {
            return Err(Error::InvalidParameter(
                "initial ranks can only be fixed under a random:<s> scheme".into(),
            ));
        }
        for &(v, r) in &self.initial_ranks {
            if v == 0 || v > self.n {
                return Err(Error::UnknownVertex(v));
            }
            if r == 0 || r > v {
                return Err(Error::OutOfRange {
                    what: "initial rank",
                    value: r as u64,
                    lo: 1,
                    hi: v as u64,
                });
            }
        }
        Ok(())
    }
}

/// One `(t, rank, degree)` sample of a tracked vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub t: usize,
    pub rank: usize,
    pub degree: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trajectory {
    pub vertex: usize,
    pub points: Vec<TrajectoryPoint>,
}

/// Degree histogram (degree -> number of vertices) of `G_t`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Snapshot {
    pub t: usize,
    pub histogram: BTreeMap<u32, u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProcessResult {
    pub schema: u32,
    pub params: ProcessParams,
    pub run_index: u64,
    /// `degrees[i - 1]` is the endpoint count of `v_i` in `G_n`; a loop counts 2.
    pub degrees: Vec<u32>,
    pub snapshots: Vec<Snapshot>,
    pub trajectories: Vec<Trajectory>,
    /// Edges `(source, target)` with `source` the newer vertex, when retained.
    pub edges: Option<Vec<(u32, u32)>>,
    pub rng_draws: u64,
}

impl ProcessResult {
    pub fn degree(&self, v: usize) -> u32 {
        self.degrees[v - 1]
    }

    pub fn trajectory(&self, v: usize) -> Option<&Trajectory> {
        self.trajectories.iter().find(|tr| tr.vertex == v)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("result serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::InvalidParameter(format!("bad result JSON: {e}")))
    }
}

/// Checkpoint times `ceil(birth (1 + growth)^m)`, `m = 0, 1, ...`, that are
/// `<= n`, deduplicated, followed by `n` itself.
pub fn checkpoint_times(birth: usize, n: usize, growth: f64) -> Vec<usize> {
    let mut out = vec![birth];
    let mut x = birth as f64;
    loop {
        x *= 1.0 + growth;
        let t = x.ceil() as usize;
        if t > n || x > n as f64 * 2.0 {
            break;
        }
        if t > *out.last().unwrap() {
            out.push(t);
        }
    }
    if *out.last().unwrap() < n {
        out.push(n);
    }
    out
}

struct Stream {
    rng: ChaCha8Rng,
    draws: u64,
}

impl Stream {
    fn new(seed: u64, run_index: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(run_index);
        Stream { rng, draws: 0 }
    }

    #[inline]
    fn uniform(&mut self) -> f64 {
        self.draws += 1;
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

/// Runs the process once (run index 0).
pub fn generate(params: &ProcessParams) -> Result<ProcessResult> {
    params.validate()?;
    let table = WeightTable::new(params.alpha, params.n)?;
    generate_run(params, &table, 0)
}

/// Runs the process on stream `run_index`, reusing a prebuilt weight table.
pub fn generate_run(
    params: &ProcessParams,
    table: &WeightTable,
    run_index: u64,
) -> Result<ProcessResult> {
    params.validate()?;
    if table.t_max() < params.n {
        return Err(Error::InvalidParameter(format!(
            "weight table covers t <= {} but n = {}",
            table.t_max(),
            params.n
        )));
    }
    if (table.alpha() - params.alpha).abs() > 0.0 {
        return Err(Error::InvalidParameter(
            "weight table was built for a different alpha".into(),
        ));
    }
    Ok(Process::new(params, table, run_index)?.run())
}

/// `runs` independent runs; run `k` uses stream `k`. Output is ordered by `k`.
pub fn run_ensemble(params: &ProcessParams, runs: usize) -> Result<Vec<ProcessResult>> {
    params.validate()?;
    if runs == 0 {
        return Err(Error::InvalidParameter("runs must be at least 1".into()));
    }
    let table = WeightTable::new(params.alpha, params.n)?;
    (0..runs as u64)
        .into_par_iter()
        .map(|k| generate_run(params, &table, k))
        .collect()
}

struct Process<'a> {
    params: &'a ProcessParams,
    table: &'a WeightTable,
    run_index: u64,
    stream: Stream,
    ranking: RankingState,
    degrees: Vec<u32>,
    edges: Option<Vec<(u32, u32)>>,
    snapshots: Vec<Snapshot>,
    trajectories: Vec<Trajectory>,
    // (time, trajectory slot), sorted
    checkpoints: Vec<(usize, usize)>,
    next_checkpoint: usize,
    snapshot_times: Vec<usize>,
    next_snapshot: usize,
    pinned: BTreeMap<usize, usize>,
}

impl<'a> Process<'a> {
    fn new(params: &'a ProcessParams, table: &'a WeightTable, run_index: u64) -> Result<Self> {
        let n = params.n;
        let ranking = RankingState::new(params.scheme, n)?;
        let mut checkpoints = Vec::new();
        let mut trajectories = Vec::new();
        for (slot, &v) in params.track.iter().enumerate() {
            trajectories.push(Trajectory {
                vertex: v,
                points: Vec::new(),
            });
            for t in checkpoint_times(v, n, params.checkpoint_growth) {
                checkpoints.push((t, slot));
            }
        }
        checkpoints.sort_unstable();
        let mut snapshot_times = params.snapshot_times.clone();
        snapshot_times.sort_unstable();
        snapshot_times.dedup();
        Ok(Process {
            params,
            table,
            run_index,
            stream: Stream::new(params.seed, run_index),
            ranking,
            degrees: vec![0; n + 1],
            edges: params
                .keep_edges
                .then(|| Vec::with_capacity(n * params.d)),
            snapshots: Vec::new(),
            trajectories,
            checkpoints,
            next_checkpoint: 0,
            snapshot_times,
            next_snapshot: 0,
            pinned: params.initial_ranks.iter().copied().collect(),
        })
    }

    fn scheme_uses_uniform(&self) -> bool {
        matches!(
            self.params.scheme,
            SchemeSpec::RandomLabel | SchemeSpec::RandomRank { .. }
        )
    }

    fn insert_new_vertex(&mut self, t: usize, birth_degree: u32) {
        if let Some(&r) = self.pinned.get(&t) {
            self.ranking
                .insert_vertex_at_rank(r)
                .expect("validated initial rank");
            return;
        }
        let u = if self.scheme_uses_uniform() {
            self.stream.uniform()
        } else {
            0.0
        };
        self.ranking.insert_vertex_with_degree(u, birth_degree);
    }

    fn run(mut self) -> ProcessResult {
        let d = self.params.d;
        let n = self.params.n;

        self.degrees[1] = 2 * d as u32;
        if let Some(edges) = self.edges.as_mut() {
            edges.extend(std::iter::repeat_n((1, 1), d));
        }
        self.insert_new_vertex(1, 2 * d as u32);
        self.observe(1);

        let mut targets = Vec::with_capacity(d);
        for t in 2..=n {
            targets.clear();
            for _ in 0..d {
                let u = self.stream.uniform();
                let r = self.table.sample_rank_unchecked(t - 1, u);
                let v = self.ranking.vertex_at_rank_unchecked(r);
                targets.push(v);
            }
            for &v in &targets {
                self.degrees[v] += 1;
            }
            self.degrees[t] = d as u32;
            if let Some(edges) = self.edges.as_mut() {
                edges.extend(targets.iter().map(|&v| (t as u32, v as u32)));
            }
            self.insert_new_vertex(t, d as u32);
            for &v in &targets {
                self.ranking.notify_degree_increment(v);
            }
            self.observe(t);
        }

        ProcessResult {
            schema: RESULT_SCHEMA,
            params: self.params.clone(),
            run_index: self.run_index,
            degrees: self.degrees[1..].to_vec(),
            snapshots: self.snapshots,
            trajectories: self.trajectories,
            edges: self.edges,
            rng_draws: self.stream.draws,
        }
    }

    fn observe(&mut self, t: usize) {
        while self.next_checkpoint < self.checkpoints.len()
            && self.checkpoints[self.next_checkpoint].0 == t
        {
            let slot = self.checkpoints[self.next_checkpoint].1;
            let v = self.trajectories[slot].vertex;
            let rank = self.ranking.rank_of(v).expect("tracked vertex exists");
            self.trajectories[slot].points.push(TrajectoryPoint {
                t,
                rank,
                degree: self.degrees[v],
            });
            self.next_checkpoint += 1;
        }
        if self.next_snapshot < self.snapshot_times.len()
            && self.snapshot_times[self.next_snapshot] == t
        {
            let mut histogram = BTreeMap::new();
            for &k in &self.degrees[1..=t] {
                *histogram.entry(k).or_insert(0u64) += 1;
            }
            self.snapshots.push(Snapshot { t, histogram });
            self.next_snapshot += 1;
        }
    }
}
