//! Degree ranking: vertices sorted by (degree descending, birth ascending).
//!
//! The whole order is one block list of packed keys, so that rank lookups,
//! class counts and re-insertion after an increment are binary searches on
//! the keys themselves.

use super::blocks::{BlockList, Entry};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct Key(u64);

impl Key {
    fn new(degree: u32, v: u32) -> Self {
        Key(((u32::MAX - degree) as u64) << 32 | v as u64)
    }

    fn degree(self) -> u32 {
        u32::MAX - (self.0 >> 32) as u32
    }
}

impl Entry for Key {
    fn id(self) -> u32 {
        self.0 as u32
    }
}

#[derive(Clone, Debug)]
pub(crate) struct DegreeIndex {
    t: usize,
    degree: Vec<u32>,
    order: BlockList<Key>,
}

impl DegreeIndex {
    pub fn new(capacity: usize) -> Self {
        DegreeIndex {
            t: 0,
            degree: Vec::with_capacity(capacity + 1),
            order: BlockList::new(false),
        }
    }

    fn key(&self, v: usize) -> Key {
        Key::new(self.degree[v], v as u32)
    }

    /// Adds vertex `t + 1` with the given degree.
    pub fn insert(&mut self, degree: u32) -> usize {
        self.t += 1;
        if self.degree.is_empty() {
            self.degree.push(0);
        }
        self.degree.push(degree);
        let key = self.key(self.t);
        let pos = self.order.partition_point(|k| *k < key);
        self.order.insert_at(pos, key);
        pos + 1
    }

    pub fn increment(&mut self, v: usize) {
        let old = self.key(v);
        let pos = self.order.partition_point(|k| *k < old);
        self.order.remove_at(pos);
        self.degree[v] += 1;
        let new = self.key(v);
        let pos = self.order.partition_point(|k| *k < new);
        self.order.insert_at(pos, new);
    }

    pub fn degree(&self, v: usize) -> u32 {
        self.degree[v]
    }

    /// `Y_{<=k}(t)`.
    pub fn count_at_most(&self, k: usize) -> u64 {
        let above = self.order.partition_point(|key| key.degree() as usize > k);
        (self.t - above) as u64
    }

    pub fn rank_of(&self, v: usize) -> usize {
        let key = self.key(v);
        self.order.partition_point(|k| *k < key) + 1
    }

    pub fn vertex_at_rank(&self, r: usize) -> usize {
        self.order.select(r - 1).id() as usize
    }
}
