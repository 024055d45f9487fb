//! Dense bitsets over a ground set `0..n`.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

const WORD: usize = 64;

/// A subset of the ground set `0..n`, stored as a bitset.
///
/// Serializes as a sorted list of indices; the universe size is not part of
/// the wire format and is restored by the caller (see [`ElementSet::from_indices`]).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ElementSet {
    n: usize,
    words: Vec<u64>,
}

impl ElementSet {
    pub fn empty(n: usize) -> Self {
        Self {
            n,
            words: vec![0; n.div_ceil(WORD).max(1)],
        }
    }

    pub fn full(n: usize) -> Self {
        let mut s = Self::empty(n);
        for i in 0..n {
            s.insert(i);
        }
        s
    }

    /// Builds a set from indices; panics if an index is out of range.
    pub fn from_indices<I: IntoIterator<Item = usize>>(n: usize, indices: I) -> Self {
        let mut s = Self::empty(n);
        for i in indices {
            assert!(i < n, "element {i} out of range for ground set of size {n}");
            s.insert(i);
        }
        s
    }

    /// Builds a set from the low `n` bits of `mask` (requires `n <= 64`).
    pub fn from_mask(n: usize, mask: u64) -> Self {
        debug_assert!(n <= 64);
        let mut s = Self::empty(n);
        s.words[0] = if n == 64 { mask } else { mask & ((1u64 << n) - 1) };
        s
    }

    /// The bitmask of this set, if the universe fits in 64 bits.
    pub fn to_mask(&self) -> Option<u64> {
        if self.n <= 64 {
            Some(self.words[0])
        } else {
            None
        }
    }

    /// Size of the universe this set lives in.
    pub fn universe(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn contains(&self, i: usize) -> bool {
        i < self.n && self.words[i / WORD] >> (i % WORD) & 1 == 1
    }

    #[inline]
    pub fn insert(&mut self, i: usize) {
        debug_assert!(i < self.n);
        self.words[i / WORD] |= 1 << (i % WORD);
    }

    #[inline]
    pub fn remove(&mut self, i: usize) {
        debug_assert!(i < self.n);
        self.words[i / WORD] &= !(1 << (i % WORD));
    }

    pub fn with(&self, i: usize) -> Self {
        let mut s = self.clone();
        s.insert(i);
        s
    }

    pub fn without(&self, i: usize) -> Self {
        let mut s = self.clone();
        s.remove(i);
        s
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(k, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    None
                } else {
                    let b = w.trailing_zeros() as usize;
                    w &= w - 1;
                    Some(k * WORD + b)
                }
            })
        })
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }

    /// Smallest element, if any.
    pub fn first(&self) -> Option<usize> {
        self.iter().next()
    }

    fn zip(&self, other: &Self, op: impl Fn(u64, u64) -> u64) -> Self {
        debug_assert_eq!(self.n, other.n, "sets over different ground sets");
        Self {
            n: self.n,
            words: self.words.iter().zip(&other.words).map(|(&a, &b)| op(a, b)).collect(),
        }
    }

    pub fn union(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a | b)
    }

    pub fn intersection(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a & b)
    }

    pub fn difference(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a & !b)
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        self.words.iter().zip(&other.words).all(|(&a, &b)| a & !b == 0)
    }

    pub fn is_disjoint(&self, other: &Self) -> bool {
        self.words.iter().zip(&other.words).all(|(&a, &b)| a & b == 0)
    }

    /// Sum of `x` over the members.
    pub fn weight(&self, x: &[f64]) -> f64 {
        self.iter().map(|i| x[i]).sum()
    }

    /// Indicator vector of length `n`.
    pub fn indicator(&self) -> Vec<f64> {
        let mut v = vec![0.0; self.n];
        for i in self.iter() {
            v[i] = 1.0;
        }
        v
    }

    /// Re-embeds the set into a universe of size `n`, dropping members `>= n`.
    pub fn resized(&self, n: usize) -> Self {
        Self::from_indices(n, self.iter().filter(|&i| i < n))
    }
}

impl fmt::Debug for ElementSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl Serialize for ElementSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_seq(self.iter())
    }
}

/// Wire form of an [`ElementSet`]: the sorted member list.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct IndexList(pub Vec<usize>);

impl<'de> Deserialize<'de> for ElementSet {
    /// Deserializes with the universe sized to the largest member + 1. Callers
    /// that know the ground set should call [`ElementSet::resized`].
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let list = IndexList::deserialize(deserializer)?;
        let n = list.0.iter().max().map_or(0, |&m| m + 1);
        Ok(ElementSet::from_indices(n, list.0))
    }
}
