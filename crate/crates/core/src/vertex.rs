//! Hypercube vertices as subsets of the ground set `{1, ..., n}`.
//!
//! Element `e` is stored in bit `e - 1` of a `u64`, which caps the ground set
//! at 64 elements.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Largest ground set the engine supports.
pub const MAX_GROUND: u32 = 64;

/// A ground element, numbered from 1.
pub type Element = u8;

/// A subset of `{1, ..., n}`; the level of the vertex is its cardinality.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexSet(u64);

impl VertexSet {
    pub const EMPTY: VertexSet = VertexSet(0);

    pub const fn from_bits(bits: u64) -> Self {
        VertexSet(bits)
    }

    pub const fn bits(self) -> u64 {
        self.0
    }

    /// The full ground set `{1, ..., n}`.
    pub fn full(n: u32) -> Self {
        debug_assert!(n <= MAX_GROUND);
        if n >= 64 {
            VertexSet(u64::MAX)
        } else {
            VertexSet((1u64 << n) - 1)
        }
    }

    pub fn from_elements<I: IntoIterator<Item = Element>>(elements: I) -> Self {
        elements.into_iter().fold(VertexSet::EMPTY, |s, e| s.with(e))
    }

    fn bit(e: Element) -> u64 {
        debug_assert!((1..=64).contains(&e), "element {e} out of range");
        1u64 << (e - 1)
    }

    pub fn contains(self, e: Element) -> bool {
        (1..=64).contains(&e) && self.0 & Self::bit(e) != 0
    }

    #[must_use]
    pub fn with(self, e: Element) -> Self {
        VertexSet(self.0 | Self::bit(e))
    }

    #[must_use]
    pub fn without(self, e: Element) -> Self {
        VertexSet(self.0 & !Self::bit(e))
    }

    pub fn level(self) -> u32 {
        self.0.count_ones()
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn is_subset_of(self, other: VertexSet) -> bool {
        self.0 & !other.0 == 0
    }

    #[must_use]
    pub fn union(self, other: VertexSet) -> Self {
        VertexSet(self.0 | other.0)
    }

    #[must_use]
    pub fn intersection(self, other: VertexSet) -> Self {
        VertexSet(self.0 & other.0)
    }

    #[must_use]
    pub fn difference(self, other: VertexSet) -> Self {
        VertexSet(self.0 & !other.0)
    }

    /// Smallest element, if any.
    pub fn min_element(self) -> Option<Element> {
        (self.0 != 0).then(|| self.0.trailing_zeros() as Element + 1)
    }

    /// The `index`-th smallest element (0-based).
    pub fn nth_element(self, index: u32) -> Option<Element> {
        let mut bits = self.0;
        for _ in 0..index {
            if bits == 0 {
                return None;
            }
            bits &= bits - 1;
        }
        (bits != 0).then(|| bits.trailing_zeros() as Element + 1)
    }

    /// Elements in increasing order.
    pub fn elements(self) -> Elements {
        Elements(self.0)
    }

    /// Largest element present, or 0 for the empty set.
    pub fn max_element(self) -> Element {
        (64 - self.0.leading_zeros()) as Element
    }
}

/// Iterator over the elements of a [`VertexSet`], ascending.
#[derive(Clone)]
pub struct Elements(u64);

impl Iterator for Elements {
    type Item = Element;

    fn next(&mut self) -> Option<Element> {
        if self.0 == 0 {
            return None;
        }
        let e = self.0.trailing_zeros() as Element + 1;
        self.0 &= self.0 - 1;
        Some(e)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let c = self.0.count_ones() as usize;
        (c, Some(c))
    }
}

impl ExactSizeIterator for Elements {}

impl fmt::Debug for VertexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for VertexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, e) in self.elements().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{e}")?;
        }
        f.write_str("}")
    }
}

/// All `k`-element subsets of `universe`, in increasing order of their
/// relabelled bit patterns (Gosper's hack over the compressed index space).
pub fn subsets_of_size(universe: VertexSet, k: u32) -> impl Iterator<Item = VertexSet> {
    let elems: Vec<Element> = universe.elements().collect();
    let r = elems.len() as u32;
    let mut next: Option<u64> = if k > r {
        None
    } else if k == 0 {
        Some(0)
    } else {
        Some((1u64 << k) - 1)
    };
    let limit: u128 = 1u128 << r;
    std::iter::from_fn(move || {
        let cur = next?;
        next = if cur == 0 {
            None
        } else {
            let c = cur & cur.wrapping_neg();
            let s = cur as u128 + c as u128;
            if s >= limit {
                None
            } else {
                let s = s as u64;
                Some((((s ^ cur) >> 2) / c) | s)
            }
        };
        Some(expand(cur, &elems))
    })
}

/// Maps bit `i` of `compressed` to element `elems[i]`.
pub(crate) fn expand(compressed: u64, elems: &[Element]) -> VertexSet {
    let mut out = VertexSet::EMPTY;
    let mut bits = compressed;
    while bits != 0 {
        let i = bits.trailing_zeros() as usize;
        out = out.with(elems[i]);
        bits &= bits - 1;
    }
    out
}

/// Binomial coefficient in `u128`, `None` on overflow.
pub fn binomial_u128(n: u64, k: u64) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) stays integral at every step
        acc = acc.checked_mul((n - i) as u128)? / (i as u128 + 1);
    }
    Some(acc)
}
