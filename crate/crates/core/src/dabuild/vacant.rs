//! Build-time element pool with a ring of vacant ids.
//!
//! Vacant elements hold `(next, prev)` ring links in the slots that later
//! hold `(base, check)`. The ring is kept in increasing id order because ids
//! are only ever appended a whole block at a time.

use std::collections::BTreeSet;

use super::VacantStrategy;
use crate::error::{DaacError, Result};

const NONE: u32 = u32::MAX;

#[derive(Clone, Copy, Default)]
struct Slot {
    /// `next` while vacant, `base` once occupied.
    a: u32,
    /// `prev` while vacant, `check` once occupied.
    b: u32,
}

pub(crate) struct Arena {
    strategy: VacantStrategy,
    compact: bool,
    shift: u32,
    limit: u64,
    slots: Vec<Slot>,
    occupied: Vec<bool>,
    head: u32,
    vacancies: Vec<u32>,
    first_vacant: Vec<u32>,
    open: BTreeSet<u32>,
    used_base: Vec<u64>,
    pub searches: u64,
    pub verifications: u64,
}

impl Arena {
    /// One all-vacant block with id 0 reserved for the root.
    pub fn new(block_size: u32, strategy: VacantStrategy, compact: bool, limit: u64) -> Result<Self> {
        debug_assert!(block_size.is_power_of_two());
        let mut arena = Arena {
            strategy,
            compact,
            shift: block_size.trailing_zeros(),
            limit,
            slots: Vec::new(),
            occupied: Vec::new(),
            head: NONE,
            vacancies: Vec::new(),
            first_vacant: Vec::new(),
            open: BTreeSet::new(),
            used_base: Vec::new(),
            searches: 0,
            verifications: 0,
        };
        arena.extend()?;
        arena.occupy(0);
        Ok(arena)
    }

    #[inline]
    pub fn block_size(&self) -> u32 {
        1 << self.shift
    }

    pub fn len(&self) -> u32 {
        self.slots.len() as u32
    }

    pub fn num_blocks(&self) -> u32 {
        self.vacancies.len() as u32
    }

    #[inline]
    pub fn is_vacant(&self, id: u32) -> bool {
        !self.occupied[id as usize]
    }

    #[cfg(test)]
    pub fn vacancies(&self, block: u32) -> u32 {
        self.vacancies[block as usize]
    }

    #[inline]
    pub fn base_used(&self, b: u32) -> bool {
        self.used_base
            .get(b as usize / 64)
            .is_some_and(|w| w >> (b % 64) & 1 == 1)
    }

    /// Appends one all-vacant block at the end of the ring.
    fn extend(&mut self) -> Result<u32> {
        let bs = self.block_size();
        let start = self.len();
        let new_len = u64::from(start) + u64::from(bs);
        if new_len > self.limit {
            return Err(DaacError::StateOverflow {
                needed: new_len,
                limit: self.limit,
            });
        }
        let block = self.num_blocks();
        self.slots.resize(new_len as usize, Slot::default());
        self.occupied.resize(new_len as usize, false);
        self.used_base.resize((new_len as usize).div_ceil(64), 0);
        for id in start..start + bs {
            self.slots[id as usize] = Slot {
                a: id + 1,
                b: id.wrapping_sub(1),
            };
        }
        let last = start + bs - 1;
        if self.head == NONE {
            self.slots[start as usize].b = last;
            self.slots[last as usize].a = start;
            self.head = start;
        } else {
            let tail = self.slots[self.head as usize].b;
            self.slots[tail as usize].a = start;
            self.slots[start as usize].b = tail;
            self.slots[last as usize].a = self.head;
            self.slots[self.head as usize].b = last;
        }
        self.vacancies.push(bs);
        self.first_vacant.push(start);
        if matches!(self.strategy, VacantStrategy::SkipDense { .. }) {
            self.open.insert(block);
        }
        Ok(block)
    }

    /// Unlinks a vacant id from the ring.
    fn occupy(&mut self, id: u32) {
        debug_assert!(self.is_vacant(id));
        let Slot { a: next, b: prev } = self.slots[id as usize];
        let block = id >> self.shift;
        if next == id {
            self.head = NONE;
        } else {
            self.slots[prev as usize].a = next;
            self.slots[next as usize].b = prev;
            if self.head == id {
                self.head = next;
            }
        }
        if self.first_vacant[block as usize] == id {
            self.first_vacant[block as usize] = if next > id && next >> self.shift == block {
                next
            } else {
                NONE
            };
        }
        self.occupied[id as usize] = true;
        self.slots[id as usize] = Slot { a: NONE, b: NONE };
        self.vacancies[block as usize] -= 1;
        if let VacantStrategy::SkipDense { threshold } = self.strategy {
            let ratio = f64::from(self.vacancies[block as usize]) / f64::from(self.block_size());
            if ratio < threshold {
                self.open.remove(&block);
            }
        }
    }

    /// Tests one candidate base against every label.
    #[inline]
    fn verify(&mut self, b: u32, labels: &[u32]) -> bool {
        self.verifications += 1;
        if self.compact && self.base_used(b) {
            return false;
        }
        labels.iter().all(|&c| self.is_vacant(b ^ c))
    }

    /// Scans the vacant ids of one block in increasing order.
    fn search_block(&mut self, block: u32, labels: &[u32]) -> Option<u32> {
        let mut q = self.first_vacant[block as usize];
        while q != NONE {
            let b = q ^ labels[0];
            if self.verify(b, labels) {
                return Some(b);
            }
            let next = self.slots[q as usize].a;
            q = if next > q && next >> self.shift == block {
                next
            } else {
                NONE
            };
        }
        None
    }

    /// Finds a base `b` such that `b ^ c` is vacant for every label `c`,
    /// growing the pool when the searched region has none. Candidates are
    /// `q ^ labels[0]` for vacant `q`.
    pub fn find_base(&mut self, labels: &[u32]) -> Result<u32> {
        debug_assert!(!labels.is_empty());
        self.searches += 1;
        let found = match self.strategy {
            VacantStrategy::Chain => self.search_chain(labels),
            VacantStrategy::SkipForward { blocks } => {
                let n = self.num_blocks();
                (n.saturating_sub(blocks)..n).find_map(|blk| self.search_block(blk, labels))
            }
            VacantStrategy::SkipDense { .. } => {
                let mut found = None;
                let mut cursor = self.open.first().copied();
                while let Some(blk) = cursor {
                    found = self.search_block(blk, labels);
                    if found.is_some() {
                        break;
                    }
                    cursor = self.open.range(blk + 1..).next().copied();
                }
                found
            }
        };
        match found {
            Some(b) => Ok(b),
            None => {
                let block = self.extend()?;
                Ok(self
                    .search_block(block, labels)
                    .expect("a fresh block admits any label set"))
            }
        }
    }

    fn search_chain(&mut self, labels: &[u32]) -> Option<u32> {
        let head = self.head;
        if head == NONE {
            return None;
        }
        let mut q = head;
        loop {
            let b = q ^ labels[0];
            if self.verify(b, labels) {
                return Some(b);
            }
            q = self.slots[q as usize].a;
            if q == head {
                return None;
            }
        }
    }

    /// Claims `b ^ c` for every label and records `b` as used.
    pub fn place(&mut self, b: u32, labels: &[u32]) {
        if self.compact {
            self.used_base[b as usize / 64] |= 1 << (b % 64);
        }
        for &c in labels {
            self.occupy(b ^ c);
        }
    }

    /// BASE recorded for an occupied id, `None` for leaves.
    pub fn base(&self, id: u32) -> Option<u32> {
        debug_assert!(!self.is_vacant(id));
        Some(self.slots[id as usize].a).filter(|&b| b != NONE)
    }

    pub fn set_base(&mut self, id: u32, base: u32) {
        debug_assert!(!self.is_vacant(id));
        self.slots[id as usize].a = base;
    }

    pub fn check(&self, id: u32) -> u32 {
        debug_assert!(!self.is_vacant(id));
        self.slots[id as usize].b
    }

    pub fn set_check(&mut self, id: u32, check: u32) {
        debug_assert!(!self.is_vacant(id));
        self.slots[id as usize].b = check;
    }

    /// Drops trailing blocks that never received a state.
    pub fn trim(&mut self) {
        let bs = self.block_size();
        while self.num_blocks() > 1 && *self.vacancies.last().unwrap() == bs {
            self.vacancies.pop();
            self.first_vacant.pop();
            let new_len = self.len() - bs;
            self.slots.truncate(new_len as usize);
            self.occupied.truncate(new_len as usize);
        }
    }

    /// Ids in increasing order by walking the ring, for tests.
    #[cfg(test)]
    pub fn ring(&self) -> Vec<u32> {
        let mut out = Vec::new();
        if self.head == NONE {
            return out;
        }
        let mut q = self.head;
        loop {
            out.push(q);
            q = self.slots[q as usize].a;
            if q == self.head {
                return out;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn arena(bs: u32, strategy: VacantStrategy, compact: bool) -> Arena {
        Arena::new(bs, strategy, compact, u64::from(u32::MAX)).unwrap()
    }

    #[test]
    fn single_label_takes_first_vacant() {
        let mut a = arena(4, VacantStrategy::Chain, false);
        assert_eq!(a.find_base(&[0]).unwrap(), 1);
        assert_eq!(a.verifications, 1);
    }

    #[test]
    fn full_label_set_needs_fresh_block() {
        // Block 0 holds the root, so {0,1,2,3} only fits the block at 4.
        for strategy in [
            VacantStrategy::Chain,
            VacantStrategy::SkipForward { blocks: 16 },
            VacantStrategy::SkipDense { threshold: 0.1 },
        ] {
            let mut a = arena(4, strategy, false);
            assert_eq!(a.find_base(&[0, 1, 2, 3]).unwrap(), 4);
            assert_eq!(a.len(), 8);
        }
        // Brute force over every base up to the frontier agrees.
        let a = arena(4, VacantStrategy::Chain, false);
        let min = (0u32..)
            .find(|&b| [0, 1, 2, 3].iter().all(|&c| b ^ c >= a.len() || a.is_vacant(b ^ c)))
            .unwrap();
        assert_eq!(min, 4);
    }

    #[test]
    fn compact_rejects_used_base() {
        let mut a = arena(8, VacantStrategy::Chain, true);
        let b = a.find_base(&[1]).unwrap();
        a.place(b, &[1]);
        let b2 = a.find_base(&[2]).unwrap();
        assert_ne!(b, b2);
    }

    #[test]
    fn overflow_is_reported() {
        let mut a = Arena::new(4, VacantStrategy::Chain, false, 8).unwrap();
        let b = a.find_base(&[0, 1, 2, 3]).unwrap();
        a.place(b, &[0, 1, 2, 3]);
        assert!(matches!(
            a.find_base(&[0, 1, 2, 3]),
            Err(DaacError::StateOverflow { needed: 12, limit: 8 })
        ));
    }

    proptest! {
        #[test]
        fn ring_tracks_vacant_ids(
            sets in proptest::collection::vec(proptest::collection::btree_set(0u32..8, 1..4), 1..40),
            which in 0usize..3,
        ) {
            let strategy = [
                VacantStrategy::Chain,
                VacantStrategy::SkipForward { blocks: 2 },
                VacantStrategy::SkipDense { threshold: 0.3 },
            ][which];
            let mut a = arena(8, strategy, false);
            for set in sets {
                let labels: Vec<u32> = set.into_iter().collect();
                let b = a.find_base(&labels).unwrap();
                for &c in &labels {
                    prop_assert!(a.is_vacant(b ^ c));
                    prop_assert_eq!((b ^ c) / 8, b / 8);
                }
                a.place(b, &labels);
                let ring = a.ring();
                let vacant: Vec<u32> = (0..a.len()).filter(|&i| a.is_vacant(i)).collect();
                prop_assert_eq!(&ring, &vacant);
                for blk in 0..a.num_blocks() {
                    let n = vacant.iter().filter(|&&q| q / 8 == blk).count() as u32;
                    prop_assert_eq!(a.vacancies(blk), n);
                }
            }
        }
    }
}
