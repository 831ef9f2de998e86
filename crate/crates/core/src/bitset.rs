//! Fixed-width bitsets over world indices.

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Mask {
    words: Vec<u64>,
    len: usize,
}

impl Mask {
    pub fn empty(len: usize) -> Mask {
        Mask {
            words: vec![0; len.div_ceil(64)],
            len,
        }
    }

    pub fn full(len: usize) -> Mask {
        let mut m = Mask::empty(len);
        for i in 0..len {
            m.set(i);
        }
        m
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|w| *w == 0)
    }

    pub fn set(&mut self, i: usize) {
        debug_assert!(i < self.len);
        self.words[i / 64] |= 1 << (i % 64);
    }

    pub fn clear(&mut self, i: usize) {
        self.words[i / 64] &= !(1 << (i % 64));
    }

    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        self.words[i / 64] & (1 << (i % 64)) != 0
    }

    pub fn set_range(&mut self, from: usize, to_exclusive: usize) {
        for i in from..to_exclusive {
            self.set(i);
        }
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn first_set(&self) -> Option<usize> {
        for (wi, w) in self.words.iter().enumerate() {
            if *w != 0 {
                return Some(wi * 64 + w.trailing_zeros() as usize);
            }
        }
        None
    }

    /// Highest set index within [from, to), if any.
    pub fn last_set_in(&self, from: usize, to_exclusive: usize) -> Option<usize> {
        (from..to_exclusive).rev().find(|&i| self.get(i))
    }

    pub fn first_set_in(&self, from: usize, to_exclusive: usize) -> Option<usize> {
        (from..to_exclusive).find(|&i| self.get(i))
    }

    pub fn iter_set(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(|&i| self.get(i))
    }

    pub fn and(&self, other: &Mask) -> Mask {
        self.zip(other, |a, b| a & b)
    }

    pub fn or(&self, other: &Mask) -> Mask {
        self.zip(other, |a, b| a | b)
    }

    /// Set difference `self & !other`.
    pub fn minus(&self, other: &Mask) -> Mask {
        self.zip(other, |a, b| a & !b)
    }

    pub fn not(&self) -> Mask {
        let mut out = Mask {
            words: self.words.iter().map(|w| !w).collect(),
            len: self.len,
        };
        out.trim();
        out
    }

    pub fn or_assign(&mut self, other: &Mask) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= *b;
        }
    }

    pub fn is_subset(&self, other: &Mask) -> bool {
        self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    pub fn intersects(&self, other: &Mask) -> bool {
        self.words.iter().zip(&other.words).any(|(a, b)| a & b != 0)
    }

    fn zip(&self, other: &Mask, f: impl Fn(u64, u64) -> u64) -> Mask {
        debug_assert_eq!(self.len, other.len);
        Mask {
            words: self
                .words
                .iter()
                .zip(&other.words)
                .map(|(a, b)| f(*a, *b))
                .collect(),
            len: self.len,
        }
    }

    fn trim(&mut self) {
        let spare = self.words.len() * 64 - self.len;
        if spare > 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= u64::MAX >> spare;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn not_respects_length() {
        let mut m = Mask::empty(70);
        m.set(0);
        m.set(69);
        let n = m.not();
        assert_eq!(n.count(), 68);
        assert!(!n.get(0) && !n.get(69) && n.get(1));
    }

    #[test]
    fn subset_and_intersection() {
        let mut a = Mask::empty(10);
        a.set(3);
        let mut b = Mask::empty(10);
        b.set(3);
        b.set(4);
        assert!(a.is_subset(&b));
        assert!(!b.is_subset(&a));
        assert!(a.intersects(&b));
        assert_eq!(b.minus(&a).first_set(), Some(4));
    }
}
