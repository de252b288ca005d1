//! Positions relabelled onto the robber's set, and canonical keys for them.
//!
//! A position only depends on the robber's set `R` through its size: the
//! elements of `R` are renamed `0..|R|` and cop sets become bit masks over
//! those indices. Two positions that differ by a permutation of `R` have the
//! same game value, so the search memoizes on a canonical form: element
//! classes are refined by how the cops use them, twins (elements no cop set
//! can tell apart) are kept together, and the lexicographically smallest
//! relabelling over what remains is taken.

use crate::game::GameState;
use crate::vertex::Element;

/// Default largest `|R|` for which canonical forms are computed.
pub const DEFAULT_SYMMETRY_CAP: u32 = 10;

/// Cop multiset over a relabelled robber set of size `r`: sorted
/// `(mask, multiplicity)` pairs with distinct masks.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Position {
    pub r: u32,
    pub cops: Vec<(u64, u32)>,
}

/// Which half-move a memoized position belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NodeKind {
    CopsToMove = 0,
    RobberToMove = 1,
}

/// Opaque fingerprint of a position up to relabelling of the robber's set.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CanonicalKey(Box<[u64]>);

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("robber set of size {size} exceeds the symmetry cap {cap}")]
pub struct SymmetryCapExceeded {
    pub size: u32,
    pub cap: u32,
}

impl Position {
    pub fn new(r: u32, cops: impl IntoIterator<Item = (u64, u32)>) -> Self {
        let mut p = Position {
            r,
            cops: cops.into_iter().filter(|&(_, c)| c > 0).collect(),
        };
        p.normalize();
        p
    }

    /// Relabels the state's robber set onto `0..|R|` in increasing order.
    pub fn from_state(state: &GameState) -> Self {
        let elems: Vec<Element> = state.robber().elements().collect();
        let mut index = [u8::MAX; 65];
        for (i, &e) in elems.iter().enumerate() {
            index[e as usize] = i as u8;
        }
        let cops = state.cop_sets().map(|s| {
            let mask = s.elements().fold(0u64, |m, e| {
                debug_assert!(index[e as usize] != u8::MAX, "cop outside robber set");
                m | (1u64 << index[e as usize])
            });
            (mask, 1)
        });
        Position::new(elems.len() as u32, cops)
    }

    pub(crate) fn normalize(&mut self) {
        self.cops.sort_unstable();
        let mut merged: Vec<(u64, u32)> = Vec::with_capacity(self.cops.len());
        for &(m, c) in &self.cops {
            match merged.last_mut() {
                Some(last) if last.0 == m => last.1 += c,
                _ => merged.push((m, c)),
            }
        }
        self.cops = merged;
    }

    pub fn total(&self) -> u32 {
        self.cops.iter().map(|&(_, c)| c).sum()
    }

    pub fn universe(&self) -> u64 {
        if self.r >= 64 {
            u64::MAX
        } else {
            (1u64 << self.r) - 1
        }
    }

    /// The robber deletes index `x`: cops holding it leave, remaining indices
    /// above `x` shift down by one.
    pub fn delete(&self, x: u32) -> Position {
        let bit = 1u64 << x;
        let low = bit - 1;
        let cops = self
            .cops
            .iter()
            .filter(|&&(m, _)| m & bit == 0)
            .map(|&(m, c)| ((m & low) | ((m >> (x + 1)) << x), c));
        Position::new(self.r - 1, cops)
    }

    /// Number of cops holding each index.
    pub fn degrees(&self) -> Vec<u32> {
        let mut deg = vec![0u32; self.r as usize];
        for &(m, c) in &self.cops {
            let mut bits = m;
            while bits != 0 {
                deg[bits.trailing_zeros() as usize] += c;
                bits &= bits - 1;
            }
        }
        deg
    }

    fn key(&self, kind: NodeKind) -> CanonicalKey {
        let mut v = Vec::with_capacity(2 + 2 * self.cops.len());
        v.push(kind as u64);
        v.push(self.r as u64);
        for &(m, c) in &self.cops {
            v.push(m);
            v.push(c as u64);
        }
        CanonicalKey(v.into_boxed_slice())
    }

    /// Key of this exact labelling, with no symmetry reduction.
    pub fn raw_key(&self, kind: NodeKind) -> CanonicalKey {
        self.key(kind)
    }

    /// Key shared by every relabelling of this position.
    pub fn canonical_key(&self, kind: NodeKind, cap: u32) -> Result<CanonicalKey, SymmetryCapExceeded> {
        Ok(self.canonical_form(cap)?.key(kind))
    }

    /// The smallest relabelling of this position.
    pub fn canonical_form(&self, cap: u32) -> Result<Position, SymmetryCapExceeded> {
        if self.r > cap {
            return Err(SymmetryCapExceeded { size: self.r, cap });
        }
        Ok(self.minimize(u64::MAX).expect("no labelling limit"))
    }

    /// Canonical key, or `None` when more than `max_labellings` relabellings
    /// would have to be compared. Whether the limit applies depends only on
    /// the orbit, so mixing these keys with raw keys stays sound.
    pub(crate) fn canonical_key_within(&self, kind: NodeKind, cap: u32, max_labellings: u64) -> Option<CanonicalKey> {
        if self.r > cap {
            return None;
        }
        self.minimize(max_labellings).map(|p| p.key(kind))
    }

    fn minimize(&self, max_labellings: u64) -> Option<Position> {
        if self.cops.is_empty() {
            return Some(self.clone());
        }
        let r = self.r as usize;
        let members: Vec<Vec<usize>> = self
            .cops
            .iter()
            .map(|&(m, _)| (0..r).filter(|&e| m >> e & 1 == 1).collect())
            .collect();

        let color = self.refine(&members);

        // twins: same colour and contained in exactly the same cop sets
        let mut blocks: Vec<(u64, Vec<usize>, Vec<usize>)> = Vec::new();
        for e in 0..r {
            let incidence: Vec<usize> = (0..self.cops.len())
                .filter(|&i| self.cops[i].0 >> e & 1 == 1)
                .collect();
            match blocks
                .iter_mut()
                .find(|(c, inc, _)| *c == color[e] && *inc == incidence)
            {
                Some(b) => b.2.push(e),
                None => blocks.push((color[e], incidence, vec![e])),
            }
        }
        blocks.sort_by_key(|b| b.0);
        let mut classes: Vec<Vec<Vec<usize>>> = Vec::new();
        let mut last_color = None;
        for (c, _, elems) in blocks {
            if last_color != Some(c) {
                classes.push(Vec::new());
                last_color = Some(c);
            }
            classes.last_mut().expect("just pushed").push(elems);
        }

        let labellings = classes
            .iter()
            .map(|c| (1..=c.len() as u64).product::<u64>())
            .try_fold(1u64, |acc, f| acc.checked_mul(f))
            .unwrap_or(u64::MAX);
        if labellings > max_labellings {
            return None;
        }
        let perms: Vec<Vec<Vec<usize>>> = classes.iter().map(|c| permutations(c.len())).collect();
        let mut odometer = vec![0usize; classes.len()];
        let mut label = vec![0u32; r];
        let mut best: Option<Vec<(u64, u32)>> = None;
        let mut candidate = Vec::with_capacity(self.cops.len());
        loop {
            let mut next = 0u32;
            for (ci, class) in classes.iter().enumerate() {
                for &b in &perms[ci][odometer[ci]] {
                    for &e in &class[b] {
                        label[e] = next;
                        next += 1;
                    }
                }
            }
            candidate.clear();
            for (i, elems) in members.iter().enumerate() {
                let m = elems.iter().fold(0u64, |m, &e| m | 1u64 << label[e]);
                candidate.push((m, self.cops[i].1));
            }
            candidate.sort_unstable();
            if best.as_ref().is_none_or(|b| candidate < *b) {
                best = Some(candidate.clone());
            }

            let mut i = 0;
            loop {
                if i == odometer.len() {
                    return Some(Position {
                        r: self.r,
                        cops: best.expect("at least one labelling"),
                    });
                }
                odometer[i] += 1;
                if odometer[i] < perms[i].len() {
                    break;
                }
                odometer[i] = 0;
                i += 1;
            }
        }
    }

    /// Colour refinement of the elements. Colours are ranks of
    /// label-independent signatures, so equal positions up to relabelling get
    /// equal colour multisets.
    fn refine(&self, members: &[Vec<usize>]) -> Vec<u64> {
        let r = self.r as usize;
        let mut color: Vec<u64> = self.degrees().into_iter().map(u64::from).collect();
        let mut classes = distinct(&color);
        loop {
            let sigs: Vec<(u64, Vec<(u32, Vec<u64>)>)> = (0..r)
                .map(|e| {
                    let mut around: Vec<(u32, Vec<u64>)> = members
                        .iter()
                        .zip(&self.cops)
                        .filter(|(elems, _)| elems.contains(&e))
                        .map(|(elems, &(_, c))| {
                            let mut cs: Vec<u64> = elems.iter().map(|&x| color[x]).collect();
                            cs.sort_unstable();
                            (c, cs)
                        })
                        .collect();
                    around.sort_unstable();
                    (color[e], around)
                })
                .collect();
            let mut sorted = sigs.clone();
            sorted.sort();
            sorted.dedup();
            color = sigs
                .iter()
                .map(|s| sorted.binary_search(s).expect("present") as u64)
                .collect();
            let now = sorted.len();
            if now == classes {
                return color;
            }
            classes = now;
        }
    }
}

fn distinct(v: &[u64]) -> usize {
    let mut s = v.to_vec();
    s.sort_unstable();
    s.dedup();
    s.len()
}

/// All permutations of `0..k` (Heap's algorithm).
fn permutations(k: usize) -> Vec<Vec<usize>> {
    let mut a: Vec<usize> = (0..k).collect();
    let mut out = vec![a.clone()];
    let mut c = vec![0usize; k];
    let mut i = 0;
    while i < k {
        if c[i] < i {
            if i % 2 == 0 {
                a.swap(0, i);
            } else {
                a.swap(c[i], i);
            }
            out.push(a.clone());
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    out
}

/// Canonical key of a game state at a round boundary, using the default
/// symmetry cap.
pub fn canonicalize(state: &GameState) -> Result<CanonicalKey, SymmetryCapExceeded> {
    let kind = match state.phase() {
        crate::game::Phase::Robber => NodeKind::RobberToMove,
        _ => NodeKind::CopsToMove,
    };
    Position::from_state(state).canonical_key(kind, DEFAULT_SYMMETRY_CAP)
}
