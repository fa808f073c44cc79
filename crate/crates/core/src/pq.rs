//! Addressable binary min-heap with decrease-key and operation counters.
//!
//! Keys are node ids in `0..capacity`. Ordering is lexicographic on
//! `(priority, key)`, so equal priorities are broken by the smaller key id.
//! Every mutating operation bumps a counter in [`PqCounters`]; these counters
//! are the resource measured by the experiments.

use std::cmp::Ordering;

use thiserror::Error;

const ABSENT: usize = usize::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum PqError {
    #[error("key {0} is already in the queue")]
    DuplicateKey(usize),
    #[error("key {0} is not in the queue")]
    AbsentKey(usize),
    #[error("key {0} is outside the queue capacity {1}")]
    KeyOutOfRange(usize, usize),
    #[error("decrease-prio of key {key} from {current} to {requested} is not a strict decrease")]
    NotDecreasing {
        key: usize,
        current: f64,
        requested: f64,
    },
    #[error("priority {0} is not a number")]
    NanPriority(f64),
    #[error("operation on an empty queue")]
    Empty,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PqCounters {
    pub inserts: u64,
    pub remove_mins: u64,
    pub decrease_prios: u64,
    /// Sum of queue sizes over all `sample_size` calls.
    pub cumulative_size: u64,
}

#[derive(Debug, Clone, Copy)]
struct Entry {
    prio: f64,
    key: usize,
}

impl Entry {
    #[inline]
    fn less(&self, other: &Entry) -> bool {
        match self.prio.partial_cmp(&other.prio) {
            Some(Ordering::Less) => true,
            Some(Ordering::Greater) => false,
            _ => self.key < other.key,
        }
    }
}

#[derive(Debug, Clone)]
pub struct AddressablePq {
    heap: Vec<Entry>,
    pos: Vec<usize>,
    counters: PqCounters,
}

impl AddressablePq {
    pub fn with_capacity(capacity: usize) -> Self {
        Self {
            heap: Vec::new(),
            pos: vec![ABSENT; capacity],
            counters: PqCounters::default(),
        }
    }

    pub fn capacity(&self) -> usize {
        self.pos.len()
    }

    pub fn size(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    pub fn contains(&self, key: usize) -> bool {
        self.pos.get(key).is_some_and(|&p| p != ABSENT)
    }

    pub fn priority(&self, key: usize) -> Option<f64> {
        match self.pos.get(key) {
            Some(&p) if p != ABSENT => Some(self.heap[p].prio),
            _ => None,
        }
    }

    pub fn counters(&self) -> PqCounters {
        self.counters
    }

    pub fn min_prio(&self) -> Result<f64, PqError> {
        self.heap.first().map(|e| e.prio).ok_or(PqError::Empty)
    }

    pub fn peek(&self) -> Option<(usize, f64)> {
        self.heap.first().map(|e| (e.key, e.prio))
    }

    /// Keys currently in the queue, in heap order.
    pub fn keys(&self) -> impl Iterator<Item = usize> + '_ {
        self.heap.iter().map(|e| e.key)
    }

    pub fn insert(&mut self, key: usize, prio: f64) -> Result<(), PqError> {
        if prio.is_nan() {
            return Err(PqError::NanPriority(prio));
        }
        match self.pos.get(key) {
            None => return Err(PqError::KeyOutOfRange(key, self.pos.len())),
            Some(&p) if p != ABSENT => return Err(PqError::DuplicateKey(key)),
            Some(_) => {}
        }
        let slot = self.heap.len();
        self.heap.push(Entry { prio, key });
        self.pos[key] = slot;
        self.sift_up(slot);
        self.counters.inserts += 1;
        Ok(())
    }

    pub fn remove_min(&mut self) -> Result<(usize, f64), PqError> {
        if self.heap.is_empty() {
            return Err(PqError::Empty);
        }
        let last = self.heap.len() - 1;
        self.swap_slots(0, last);
        let top = self.heap.pop().expect("non-empty heap");
        self.pos[top.key] = ABSENT;
        if !self.heap.is_empty() {
            self.sift_down(0);
        }
        self.counters.remove_mins += 1;
        Ok((top.key, top.prio))
    }

    pub fn decrease_prio(&mut self, key: usize, prio: f64) -> Result<(), PqError> {
        if prio.is_nan() {
            return Err(PqError::NanPriority(prio));
        }
        let slot = match self.pos.get(key) {
            Some(&p) if p != ABSENT => p,
            _ => return Err(PqError::AbsentKey(key)),
        };
        let current = self.heap[slot].prio;
        if prio >= current {
            return Err(PqError::NotDecreasing {
                key,
                current,
                requested: prio,
            });
        }
        self.heap[slot].prio = prio;
        self.sift_up(slot);
        self.counters.decrease_prios += 1;
        Ok(())
    }

    /// Adds the current size to the cumulative size counter.
    pub fn sample_size(&mut self) {
        self.counters.cumulative_size += self.heap.len() as u64;
    }

    /// Drops every entry without counting removals. Counters are kept.
    pub fn clear(&mut self) {
        for e in self.heap.drain(..) {
            self.pos[e.key] = ABSENT;
        }
    }

    /// Checks heap order and position-index consistency in O(size + capacity).
    pub fn validate(&self) -> Result<(), String> {
        for (slot, e) in self.heap.iter().enumerate() {
            if self.pos[e.key] != slot {
                return Err(format!("position index of key {} is stale", e.key));
            }
            if slot > 0 {
                let parent = &self.heap[(slot - 1) / 2];
                if e.less(parent) {
                    return Err(format!("heap order violated at slot {slot}"));
                }
            }
        }
        let indexed = self.pos.iter().filter(|&&p| p != ABSENT).count();
        if indexed != self.heap.len() {
            return Err(format!(
                "{indexed} keys indexed but heap holds {}",
                self.heap.len()
            ));
        }
        Ok(())
    }

    #[inline]
    fn swap_slots(&mut self, a: usize, b: usize) {
        self.heap.swap(a, b);
        self.pos[self.heap[a].key] = a;
        self.pos[self.heap[b].key] = b;
    }

    fn sift_up(&mut self, mut slot: usize) {
        while slot > 0 {
            let parent = (slot - 1) / 2;
            if self.heap[slot].less(&self.heap[parent]) {
                self.swap_slots(slot, parent);
                slot = parent;
            } else {
                break;
            }
        }
    }

    fn sift_down(&mut self, mut slot: usize) {
        let len = self.heap.len();
        loop {
            let left = 2 * slot + 1;
            if left >= len {
                break;
            }
            let right = left + 1;
            let child = if right < len && self.heap[right].less(&self.heap[left]) {
                right
            } else {
                left
            };
            if self.heap[child].less(&self.heap[slot]) {
                self.swap_slots(slot, child);
                slot = child;
            } else {
                break;
            }
        }
    }
}
