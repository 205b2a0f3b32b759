//! Ordered sequence stored as a list of short contiguous blocks.
//!
//! A Fenwick tree over the block sizes (in sequence order) gives `select` and
//! block prefix sums in `O(log(n / B))`; the work inside a block is a memmove
//! or binary search over at most `B` entries. This keeps the hot loop in
//! cache where a pointer-based balanced tree would not be.

use super::fenwick::Fenwick;

const MAX_BLOCK: usize = 512;

pub(crate) trait Entry: Copy {
    fn id(self) -> u32;
}

impl Entry for u32 {
    fn id(self) -> u32 {
        self
    }
}

#[derive(Clone, Debug)]
pub(crate) struct BlockList<T> {
    blocks: Vec<Vec<T>>,
    order: Vec<u32>,
    // block id -> index in `order`
    slot: Vec<u32>,
    sizes: Fenwick,
    free: Vec<u32>,
    // entry id -> block id, kept only when positions are looked up by id
    owner: Option<Vec<u32>>,
    len: usize,
}

impl<T: Entry> BlockList<T> {
    pub fn new(track_owner: bool) -> Self {
        BlockList {
            blocks: Vec::new(),
            order: Vec::new(),
            slot: Vec::new(),
            sizes: Fenwick::default(),
            free: Vec::new(),
            owner: track_owner.then(Vec::new),
            len: 0,
        }
    }

    #[cfg(test)]
    pub fn len(&self) -> usize {
        self.len
    }

    fn rebuild(&mut self) {
        for (i, &b) in self.order.iter().enumerate() {
            self.slot[b as usize] = i as u32;
        }
        let blocks = &self.blocks;
        self.sizes = Fenwick::from_counts(self.order.iter().map(|&b| blocks[b as usize].len() as u64));
    }

    fn new_block(&mut self, items: Vec<T>) -> u32 {
        match self.free.pop() {
            Some(b) => {
                self.blocks[b as usize] = items;
                b
            }
            None => {
                self.blocks.push(items);
                self.slot.push(0);
                (self.blocks.len() - 1) as u32
            }
        }
    }

    fn set_owner(&mut self, b: u32, items: impl Iterator<Item = T>) {
        if let Some(owner) = &mut self.owner {
            for e in items {
                let id = e.id() as usize;
                if owner.len() <= id {
                    owner.resize(id + 1, u32::MAX);
                }
                owner[id] = b;
            }
        }
    }

    /// (index in `order`, offset) of position `pos < len`.
    #[inline]
    fn locate(&self, pos: usize) -> (usize, usize) {
        let i = self.sizes.last_at_most(pos as u64);
        (i, pos - self.sizes.prefix(i) as usize)
    }

    #[inline]
    pub fn select(&self, pos: usize) -> T {
        let (i, off) = self.locate(pos);
        self.blocks[self.order[i] as usize][off]
    }

    pub fn insert_at(&mut self, pos: usize, e: T) {
        debug_assert!(pos <= self.len);
        self.len += 1;
        if self.order.is_empty() {
            let b = self.new_block(vec![e]);
            self.order.push(b);
            self.set_owner(b, std::iter::once(e));
            self.rebuild();
            return;
        }
        let (i, off) = if pos == self.len - 1 {
            let i = self.order.len() - 1;
            (i, self.blocks[self.order[i] as usize].len())
        } else {
            self.locate(pos)
        };
        let b = self.order[i];
        self.blocks[b as usize].insert(off, e);
        self.set_owner(b, std::iter::once(e));
        if self.blocks[b as usize].len() <= MAX_BLOCK {
            self.sizes.add(i + 1, 1);
            return;
        }
        let tail = self.blocks[b as usize].split_off(MAX_BLOCK / 2);
        let moved: Vec<T> = tail.clone();
        let nb = self.new_block(tail);
        self.set_owner(nb, moved.into_iter());
        self.order.insert(i + 1, nb);
        self.rebuild();
    }

    pub fn remove_at(&mut self, pos: usize) -> T {
        let (i, off) = self.locate(pos);
        let b = self.order[i];
        let e = self.blocks[b as usize].remove(off);
        self.len -= 1;
        if self.blocks[b as usize].is_empty() {
            self.order.remove(i);
            self.free.push(b);
            self.rebuild();
        } else {
            self.sizes.add(i + 1, -1);
        }
        e
    }

    /// Number of entries satisfying `pred`, which must hold on a prefix of
    /// the sequence.
    pub fn partition_point(&self, pred: impl Fn(&T) -> bool) -> usize {
        let blocks = &self.blocks;
        let i = self
            .order
            .partition_point(|&b| pred(blocks[b as usize].last().expect("blocks are non-empty")));
        if i == self.order.len() {
            return self.len;
        }
        self.sizes.prefix(i) as usize + blocks[self.order[i] as usize].partition_point(pred)
    }

    /// Position of the entry with id `id`; requires owner tracking.
    pub fn position_of(&self, id: u32) -> Option<usize> {
        let b = *self.owner.as_ref()?.get(id as usize)?;
        if b == u32::MAX {
            return None;
        }
        let off = self.blocks[b as usize].iter().position(|e| e.id() == id)?;
        Some(self.sizes.prefix(self.slot[b as usize] as usize) as usize + off)
    }

    #[cfg(test)]
    pub fn to_vec(&self) -> Vec<T> {
        self.order
            .iter()
            .flat_map(|&b| self.blocks[b as usize].iter().copied())
            .collect()
    }
}
