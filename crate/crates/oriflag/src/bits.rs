//! Fixed-size bitset used for order relations and ideals.

use std::cmp::Ordering;

const BITS: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BitSet {
    len: usize,
    blocks: Vec<u64>,
}

impl BitSet {
    pub fn new(len: usize) -> Self {
        Self {
            len,
            blocks: vec![0; len.div_ceil(BITS)],
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.iter().all(|&b| b == 0)
    }

    pub fn set(&mut self, i: usize, value: bool) {
        debug_assert!(i < self.len);
        if value {
            self.blocks[i / BITS] |= 1 << (i % BITS);
        } else {
            self.blocks[i / BITS] &= !(1 << (i % BITS));
        }
    }

    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        self.blocks[i / BITS] >> (i % BITS) & 1 == 1
    }

    pub fn count(&self) -> usize {
        self.blocks.iter().map(|b| b.count_ones() as usize).sum()
    }

    pub fn union_with(&mut self, other: &BitSet) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.blocks.iter_mut().zip(&other.blocks) {
            *a |= b;
        }
    }

    pub fn is_subset(&self, other: &BitSet) -> bool {
        debug_assert_eq!(self.len, other.len);
        self.blocks.iter().zip(&other.blocks).all(|(a, b)| a & !b == 0)
    }

    pub fn is_disjoint(&self, other: &BitSet) -> bool {
        debug_assert_eq!(self.len, other.len);
        self.blocks.iter().zip(&other.blocks).all(|(a, b)| a & b == 0)
    }

    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(move |&i| self.get(i))
    }
}

impl PartialOrd for BitSet {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for BitSet {
    /// Lexicographic on membership by index: the set containing index 0
    /// sorts before the one that does not, and so on.
    fn cmp(&self, other: &Self) -> Ordering {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.blocks.iter().zip(&other.blocks) {
            // Reverse so that low indices are the most significant,
            // and flip so that "present" sorts first.
            let (ra, rb) = (!a.reverse_bits(), !b.reverse_bits());
            match ra.cmp(&rb) {
                Ordering::Equal => {}
                ord => return ord,
            }
        }
        Ordering::Equal
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_ops() {
        let mut a = BitSet::new(130);
        a.set(0, true);
        a.set(129, true);
        assert!(a.get(0) && a.get(129) && !a.get(64));
        assert_eq!(a.count(), 2);
        assert_eq!(a.iter_ones().collect::<Vec<_>>(), vec![0, 129]);
        let mut b = BitSet::new(130);
        b.set(129, true);
        assert!(b.is_subset(&a));
        assert!(!a.is_subset(&b));
        b.union_with(&a);
        assert_eq!(b, a);
    }

    #[test]
    fn order_is_lexicographic_by_index() {
        let mut a = BitSet::new(70);
        let mut b = BitSet::new(70);
        a.set(0, true);
        b.set(1, true);
        assert!(a < b); // {0} before {1}
        let empty = BitSet::new(70);
        assert!(a < empty); // any set containing 0 before sets without it
        let mut c = BitSet::new(70);
        c.set(0, true);
        c.set(69, true);
        assert!(c < a); // {0,69} refines {0} at index 69
    }
}
