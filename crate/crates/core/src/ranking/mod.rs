//! The five ranking schemes and the dynamic rank/vertex bijection.
//!
//! Vertices are numbered by birth, `1..=t`. Rank 1 is the most attractive
//! position. Age and inverse-age ranks are arithmetic in the vertex id; the
//! other schemes keep an order-statistic structure so that both directions
//! of the bijection cost `O(log t)`.

mod blocks;
mod degree;
mod fenwick;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use degree::DegreeIndex;
use blocks::{BlockList, Entry};

/// A ranking scheme.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SchemeSpec {
    /// `r(v_i, t) = i`.
    Age,
    /// `r(v_i, t) = t - i + 1`.
    InverseAge,
    /// Ranked by a uniform label drawn at birth.
    RandomLabel,
    /// Initial rank `R_t` with `P(R_t <= k) = (k/t)^s`, then shifted down by
    /// later insertions above it.
    RandomRank { s: f64 },
    /// Ranked by degree, ties broken by age.
    Degree,
}

impl SchemeSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            SchemeSpec::RandomRank { s } if !(s.is_finite() && s > 0.0) => Err(
                Error::InvalidParameter(format!("random ranking exponent s = {s} must be > 0")),
            ),
            _ => Ok(()),
        }
    }

    /// Short name used in file names and reports.
    pub fn name(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for SchemeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SchemeSpec::Age => f.write_str("age"),
            SchemeSpec::InverseAge => f.write_str("inverse-age"),
            SchemeSpec::RandomLabel => f.write_str("label"),
            SchemeSpec::RandomRank { s } => write!(f, "random:{s}"),
            SchemeSpec::Degree => f.write_str("degree"),
        }
    }
}

impl FromStr for SchemeSpec {
    type Err = Error;

    /// `age | inverse-age | label | random:<s> | degree`
    fn from_str(s: &str) -> Result<Self> {
        let spec = match s {
            "age" => SchemeSpec::Age,
            "inverse-age" => SchemeSpec::InverseAge,
            "label" => SchemeSpec::RandomLabel,
            "degree" => SchemeSpec::Degree,
            other => {
                let exponent = other
                    .strip_prefix("random:")
                    .and_then(|x| x.parse::<f64>().ok())
                    .ok_or_else(|| {
                        Error::InvalidParameter(format!(
                            "unknown scheme '{other}' (expected age | inverse-age | label | random:<s> | degree)"
                        ))
                    })?;
                SchemeSpec::RandomRank { s: exponent }
            }
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// Inverse-CDF draw of an initial rank: `ceil(t * u^(1/s))`, clamped to `[1, t]`.
///
/// `P(ceil(t U^(1/s)) <= k) = P(U <= (k/t)^s) = (k/t)^s` for every integer `k`.
pub fn random_initial_rank(t: usize, s: f64, u: f64) -> usize {
    let x = (t as f64 * u.powf(1.0 / s)).ceil();
    (x as usize).clamp(1, t)
}

// Sign-flipped IEEE bits order like the floats themselves; equal labels put
// the older vertex first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct LabelKey {
    bits: u64,
    v: u32,
}

impl LabelKey {
    fn new(label: f64, v: usize) -> Self {
        LabelKey {
            bits: {
                let b = label.to_bits();
                if b >> 63 == 1 { !b } else { b | 1 << 63 }
            },
            v: v as u32,
        }
    }
}

impl Entry for LabelKey {
    fn id(self) -> u32 {
        self.v
    }
}

#[derive(Clone, Debug)]
enum Inner {
    Age,
    InverseAge,
    Label {
        labels: Vec<f64>,
        order: BlockList<LabelKey>,
    },
    Random {
        s: f64,
        order: BlockList<u32>,
    },
    Degree(DegreeIndex),
}

/// Rank bijection `V_t -> [t]` for one run.
#[derive(Clone, Debug)]
pub struct RankingState {
    t: usize,
    scheme: SchemeSpec,
    inner: Inner,
}

impl RankingState {
    /// Empty state; `capacity` is a hint for the final number of vertices.
    pub fn new(scheme: SchemeSpec, capacity: usize) -> Result<Self> {
        scheme.validate()?;
        let inner = match scheme {
            SchemeSpec::Age => Inner::Age,
            SchemeSpec::InverseAge => Inner::InverseAge,
            SchemeSpec::RandomLabel => Inner::Label {
                labels: Vec::with_capacity(capacity + 1),
                order: BlockList::new(false),
            },
            SchemeSpec::RandomRank { s } => Inner::Random {
                s,
                order: BlockList::new(true),
            },
            SchemeSpec::Degree => Inner::Degree(DegreeIndex::new(capacity)),
        };
        Ok(RankingState {
            t: 0,
            scheme,
            inner,
        })
    }

    pub fn scheme(&self) -> SchemeSpec {
        self.scheme
    }

    /// Number of ranked vertices.
    pub fn t(&self) -> usize {
        self.t
    }

    /// Adds `v_{t+1}` and returns its rank. `u` in `[0,1)` is the scheme's
    /// randomness: the label for `RandomLabel`, the inverse-CDF input for
    /// `RandomRank`; ignored otherwise. Degree-ranked vertices enter with
    /// degree 0.
    pub fn insert_vertex(&mut self, u: f64) -> usize {
        self.insert_vertex_with_degree(u, 0)
    }

    /// Like [`insert_vertex`](Self::insert_vertex), placing a degree-ranked
    /// vertex directly in the class `degree` (after all older members).
    pub fn insert_vertex_with_degree(&mut self, u: f64, degree: u32) -> usize {
        let t = self.t + 1;
        let rank = match &mut self.inner {
            Inner::Age => t,
            Inner::InverseAge => 1,
            Inner::Label { labels, order } => {
                if labels.is_empty() {
                    labels.push(f64::NAN);
                }
                labels.push(u);
                let key = LabelKey::new(u, t);
                let pos = order.partition_point(|k| *k < key);
                order.insert_at(pos, key);
                pos + 1
            }
            Inner::Random { s, order } => {
                let r = random_initial_rank(t, *s, u);
                order.insert_at(r - 1, t as u32);
                r
            }
            Inner::Degree(idx) => idx.insert(degree),
        };
        self.t = t;
        rank
    }

    /// Adds `v_{t+1}` at a prescribed rank. Only meaningful for `RandomRank`,
    /// where it conditions on the initial rank `R_t = rank`.
    pub fn insert_vertex_at_rank(&mut self, rank: usize) -> Result<usize> {
        let t = self.t + 1;
        match &mut self.inner {
            Inner::Random { order, .. } => {
                if rank == 0 || rank > t {
                    return Err(Error::OutOfRange {
                        what: "initial rank",
                        value: rank as u64,
                        lo: 1,
                        hi: t as u64,
                    });
                }
                order.insert_at(rank - 1, t as u32);
                self.t = t;
                Ok(rank)
            }
            _ => Err(Error::InvalidParameter(format!(
                "prescribed initial ranks require a random:<s> scheme, not {}",
                self.scheme
            ))),
        }
    }

    /// The vertex holding rank `r`.
    pub fn vertex_at_rank(&self, r: usize) -> Result<usize> {
        if r == 0 || r > self.t {
            return Err(Error::OutOfRange {
                what: "rank",
                value: r as u64,
                lo: 1,
                hi: self.t as u64,
            });
        }
        Ok(self.vertex_at_rank_unchecked(r))
    }

    #[inline]
    pub(crate) fn vertex_at_rank_unchecked(&self, r: usize) -> usize {
        match &self.inner {
            Inner::Age => r,
            Inner::InverseAge => self.t - r + 1,
            Inner::Label { order, .. } => order.select(r - 1).id() as usize,
            Inner::Random { order, .. } => order.select(r - 1) as usize,
            Inner::Degree(idx) => idx.vertex_at_rank(r),
        }
    }

    /// Current rank of vertex `v`.
    pub fn rank_of(&self, v: usize) -> Result<usize> {
        if v == 0 || v > self.t {
            return Err(Error::UnknownVertex(v));
        }
        Ok(match &self.inner {
            Inner::Age => v,
            Inner::InverseAge => self.t - v + 1,
            Inner::Label { labels, order } => {
                let key = LabelKey::new(labels[v], v);
                order.partition_point(|k| *k < key) + 1
            }
            Inner::Random { order, .. } => {
                order.position_of(v as u32).expect("every vertex is ranked") + 1
            }
            Inner::Degree(idx) => idx.rank_of(v),
        })
    }

    /// Records one more endpoint at `v`. A no-op except under degree ranking.
    pub fn notify_degree_increment(&mut self, v: usize) {
        if let Inner::Degree(idx) = &mut self.inner {
            idx.increment(v);
        }
    }

    /// Label of `v` under `RandomLabel`.
    pub fn label(&self, v: usize) -> Option<f64> {
        match &self.inner {
            Inner::Label { labels, .. } if v >= 1 && v <= self.t => Some(labels[v]),
            _ => None,
        }
    }

    /// Degree as tracked by the degree index.
    pub fn tracked_degree(&self, v: usize) -> Option<u32> {
        match &self.inner {
            Inner::Degree(idx) if v >= 1 && v <= self.t => Some(idx.degree(v)),
            _ => None,
        }
    }

    /// `Y_{<=k}(t)` under degree ranking.
    pub fn degree_count_at_most(&self, k: usize) -> Option<u64> {
        match &self.inner {
            Inner::Degree(idx) => Some(idx.count_at_most(k)),
            _ => None,
        }
    }

    /// Rank of every vertex, indexed by vertex id (slot 0 unused). `O(t log t)`.
    pub fn rank_table(&self) -> Vec<usize> {
        let mut out = vec![0; self.t + 1];
        for (v, slot) in out.iter_mut().enumerate().skip(1) {
            *slot = self.rank_of(v).expect("vertex in range");
        }
        out
    }

    /// Full scan confirming the ranks form a permutation of `[t]` and that
    /// `vertex_at_rank` inverts `rank_of`.
    pub fn check_bijection(&self) -> bool {
        let ranks = self.rank_table();
        let mut seen = vec![false; self.t + 1];
        for v in 1..=self.t {
            let r = ranks[v];
            if r == 0 || r > self.t || seen[r] {
                return false;
            }
            seen[r] = true;
            if self.vertex_at_rank_unchecked(r) != v {
                return false;
            }
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand_chacha::rand_core::{RngCore, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn uniform(rng: &mut ChaCha8Rng) -> f64 {
        (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    #[test]
    fn scheme_grammar() {
        assert_eq!("age".parse::<SchemeSpec>().unwrap(), SchemeSpec::Age);
        assert_eq!(
            "inverse-age".parse::<SchemeSpec>().unwrap(),
            SchemeSpec::InverseAge
        );
        assert_eq!(
            "label".parse::<SchemeSpec>().unwrap(),
            SchemeSpec::RandomLabel
        );
        assert_eq!(
            "random:2.5".parse::<SchemeSpec>().unwrap(),
            SchemeSpec::RandomRank { s: 2.5 }
        );
        assert_eq!("degree".parse::<SchemeSpec>().unwrap(), SchemeSpec::Degree);
        assert!("random:0".parse::<SchemeSpec>().is_err());
        assert!("random:-1".parse::<SchemeSpec>().is_err());
        assert!("random".parse::<SchemeSpec>().is_err());
        assert!("pagerank".parse::<SchemeSpec>().is_err());
        for s in ["age", "inverse-age", "label", "random:0.5", "degree"] {
            assert_eq!(s.parse::<SchemeSpec>().unwrap().to_string(), s);
        }
    }

    #[test]
    fn random_rank_inverse_cdf_examples() {
        assert_eq!(random_initial_rank(100, 1.0, 0.25), 25);
        assert_eq!(random_initial_rank(100, 2.0, 0.25), 50);
        assert_eq!(random_initial_rank(100, 2.0, 0.0), 1);
        assert_eq!(random_initial_rank(100, 0.5, 1.0 - f64::EPSILON), 100);
    }

    #[test]
    fn random_rank_law_is_exact() {
        // P(R <= k) = (k/t)^s, checked on a fine grid of u.
        let t = 20;
        for &s in &[0.5, 1.0, 2.0] {
            let m = 200_000;
            let mut counts = vec![0usize; t + 1];
            for i in 0..m {
                let u = (i as f64 + 0.5) / m as f64;
                counts[random_initial_rank(t, s, u)] += 1;
            }
            let mut cum = 0;
            for k in 1..=t {
                cum += counts[k];
                let expected = (k as f64 / t as f64).powf(s);
                assert!((cum as f64 / m as f64 - expected).abs() < 1e-4);
            }
        }
    }

    #[test]
    fn first_vertex_has_rank_one() {
        for scheme in [
            SchemeSpec::Age,
            SchemeSpec::InverseAge,
            SchemeSpec::RandomLabel,
            SchemeSpec::RandomRank { s: 1.5 },
            SchemeSpec::Degree,
        ] {
            let mut state = RankingState::new(scheme, 4).unwrap();
            assert_eq!(state.insert_vertex(0.7), 1);
            assert_eq!(state.vertex_at_rank(1).unwrap(), 1);
        }
    }

    #[test]
    fn age_and_inverse_age_are_arithmetic() {
        let mut age = RankingState::new(SchemeSpec::Age, 10).unwrap();
        let mut inv = RankingState::new(SchemeSpec::InverseAge, 10).unwrap();
        for _ in 0..10 {
            age.insert_vertex(0.0);
            inv.insert_vertex(0.0);
        }
        assert_eq!(age.vertex_at_rank(3).unwrap(), 3);
        assert_eq!(inv.vertex_at_rank(1).unwrap(), 10);
        assert_eq!(age.rank_of(7).unwrap(), 7);
        assert_eq!(inv.rank_of(7).unwrap(), 4);
        assert!(age.check_bijection() && inv.check_bijection());
        assert!(age.rank_of(11).is_err());
        assert!(age.rank_of(0).is_err());
        assert!(inv.vertex_at_rank(0).is_err());
        assert!(inv.vertex_at_rank(11).is_err());
    }

    #[test]
    fn degree_single_vertex_with_loop() {
        let mut state = RankingState::new(SchemeSpec::Degree, 4).unwrap();
        state.insert_vertex(0.0);
        state.notify_degree_increment(1);
        state.notify_degree_increment(1);
        assert_eq!(state.tracked_degree(1), Some(2));
        assert_eq!(state.degree_count_at_most(2), Some(1));
        assert_eq!(state.degree_count_at_most(1), Some(0));
        assert_eq!(state.rank_of(1).unwrap(), 1);
    }

    #[test]
    fn degree_hub_takes_rank_one() {
        // v_1 (loop, degree 2); v_2 attaches to v_1; v_3 attaches to v_1.
        let mut state = RankingState::new(SchemeSpec::Degree, 4).unwrap();
        state.insert_vertex_with_degree(0.0, 2);
        state.insert_vertex_with_degree(0.0, 1);
        state.notify_degree_increment(1);
        state.insert_vertex_with_degree(0.0, 1);
        state.notify_degree_increment(1);
        assert_eq!(state.vertex_at_rank(1).unwrap(), 1);
        assert_eq!(state.rank_of(2).unwrap(), 2);
        assert_eq!(state.rank_of(3).unwrap(), 3);
        assert!(state.check_bijection());
    }

    #[test]
    fn degree_ties_favour_older_vertex() {
        let mut state = RankingState::new(SchemeSpec::Degree, 4).unwrap();
        state.insert_vertex_with_degree(0.0, 1);
        state.insert_vertex_with_degree(0.0, 1);
        assert!(state.rank_of(1).unwrap() < state.rank_of(2).unwrap());
        state.notify_degree_increment(2);
        assert!(state.rank_of(2).unwrap() < state.rank_of(1).unwrap());
        state.notify_degree_increment(1);
        assert!(state.rank_of(1).unwrap() < state.rank_of(2).unwrap());
    }

    #[test]
    fn degree_increment_never_worsens_rank_exhaustive() {
        // All degree assignments in {1,2,3}^3, every possible increment.
        for a in 1..=3u32 {
            for b in 1..=3u32 {
                for c in 1..=3u32 {
                    for target in 1..=3usize {
                        let mut state = RankingState::new(SchemeSpec::Degree, 3).unwrap();
                        for &deg in &[a, b, c] {
                            state.insert_vertex_with_degree(0.0, deg);
                        }
                        let before = state.rank_of(target).unwrap();
                        state.notify_degree_increment(target);
                        assert!(state.rank_of(target).unwrap() <= before);
                        assert!(state.check_bijection());
                    }
                }
            }
        }
    }

    #[test]
    fn label_order_matches_label_values() {
        let mut state = RankingState::new(SchemeSpec::RandomLabel, 5).unwrap();
        for &l in &[0.5, 0.2, 0.9, 0.2, 0.1] {
            state.insert_vertex(l);
        }
        // labels 0.1 (v5), 0.2 (v2), 0.2 (v4), 0.5 (v1), 0.9 (v3)
        let order: Vec<usize> = (1..=5).map(|r| state.vertex_at_rank(r).unwrap()).collect();
        assert_eq!(order, vec![5, 2, 4, 1, 3]);
        assert_eq!(state.label(4), Some(0.2));
    }

    #[test]
    fn label_ranks_invariant_under_monotone_transform() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut plain = RankingState::new(SchemeSpec::RandomLabel, 2000).unwrap();
        let mut cubed = RankingState::new(SchemeSpec::RandomLabel, 2000).unwrap();
        for _ in 0..2000 {
            let u = uniform(&mut rng);
            assert_eq!(plain.insert_vertex(u), cubed.insert_vertex(u.powi(3)));
        }
        assert_eq!(plain.rank_table(), cubed.rank_table());
    }

    #[test]
    fn prescribed_rank_only_for_random_scheme() {
        let mut state = RankingState::new(SchemeSpec::RandomRank { s: 2.0 }, 4).unwrap();
        state.insert_vertex(0.3);
        assert_eq!(state.insert_vertex_at_rank(1).unwrap(), 1);
        assert!(state.insert_vertex_at_rank(5).is_err());
        assert_eq!(state.rank_of(1).unwrap(), 2);
        let mut age = RankingState::new(SchemeSpec::Age, 4).unwrap();
        assert!(age.insert_vertex_at_rank(1).is_err());
    }

    fn any_scheme() -> impl Strategy<Value = SchemeSpec> {
        prop_oneof![
            Just(SchemeSpec::Age),
            Just(SchemeSpec::InverseAge),
            Just(SchemeSpec::RandomLabel),
            (0.2f64..4.0).prop_map(|s| SchemeSpec::RandomRank { s }),
            Just(SchemeSpec::Degree),
        ]
    }

    proptest! {
        #[test]
        fn bijection_after_random_operations(
            scheme in any_scheme(),
            seed in any::<u64>(),
            steps in 1usize..150,
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut state = RankingState::new(scheme, steps).unwrap();
            let mut degrees = vec![0u32; steps + 1];
            for t in 1..=steps {
                let prev = if t > 1 { Some(state.rank_table()) } else { None };
                state.insert_vertex_with_degree(uniform(&mut rng), 1);
                degrees[t] = 1;
                let target = 1 + (rng.next_u64() as usize) % t;
                state.notify_degree_increment(target);
                degrees[target] += 1;
                if let (SchemeSpec::RandomRank { .. }, Some(prev)) = (scheme, prev) {
                    for v in 1..t {
                        let now = state.rank_of(v).unwrap();
                        prop_assert!(now == prev[v] || now == prev[v] + 1);
                    }
                }
                if t % 10 == 0 || t == steps {
                    prop_assert!(state.check_bijection());
                }
            }
            if scheme == SchemeSpec::Degree {
                // (degree desc, birth asc) order
                let order: Vec<usize> = (1..=steps).map(|r| state.vertex_at_rank(r).unwrap()).collect();
                for w in order.windows(2) {
                    let (a, b) = (w[0], w[1]);
                    prop_assert!(degrees[a] > degrees[b] || (degrees[a] == degrees[b] && a < b));
                }
                for k in 0..=steps + 1 {
                    let expected = degrees[1..].iter().filter(|&&x| x as usize <= k).count() as u64;
                    prop_assert_eq!(state.degree_count_at_most(k), Some(expected));
                }
            }
            if scheme == SchemeSpec::RandomLabel {
                let order: Vec<usize> = (1..=steps).map(|r| state.vertex_at_rank(r).unwrap()).collect();
                for w in order.windows(2) {
                    let (la, lb) = (state.label(w[0]).unwrap(), state.label(w[1]).unwrap());
                    prop_assert!(la < lb || (la == lb && w[0] < w[1]));
                }
            }
        }
    }
}
