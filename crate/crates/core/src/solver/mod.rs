//! Exact game values for small boards.
//!
//! Depth-first minimax over the fixed-depth game tree with a transposition
//! table keyed on [`CanonicalKey`]. Cops maximize capture, the robber
//! minimizes it. A cop half-move is enumerated as a multiset: cops sharing a
//! set are interchangeable, so each group of `c` cops at `S` branches over
//! the compositions of `c` into the elements of `R - S`. Moves out of `R` are
//! never generated; such a cop is evaded at once, which is never better for
//! the cops than dropping that cop, and more cops never hurt.
//!
//! Three exact cut-offs keep the tree small:
//! * the robber's greedy deletion guarantees at most
//!   `N - ceil(N k / (n - k + 1))` survivors per round, so if iterating that
//!   bound to the middle reaches zero the robber wins;
//! * if the cops can be matched injectively to all middle-level sets under
//!   the robber, each cop ending below its own set, they win by following
//!   chains;
//! * in the last round of an even game each cop misses two elements of `R`
//!   and can end on either of the two sets avoiding one of them; the cops
//!   cover every destination iff each component of that multigraph has at
//!   least as many edges as vertices.

mod canonical;

use std::collections::HashMap;
use std::time::{Duration, Instant};

use serde::Serialize;

pub use canonical::{
    canonicalize, CanonicalKey, NodeKind, Position, SymmetryCapExceeded, DEFAULT_SYMMETRY_CAP,
};

use crate::bounds::{lower_bound, trivial_upper_bound};
use crate::game::GameState;
use crate::vertex::Element;

/// Relabellings compared per canonical key before the search settles for
/// the raw key. Never binds for `|R| <= 7`.
const MAX_LABELLINGS: u64 = 5040;

/// Largest board solved without an explicit time budget.
pub const DEFAULT_MAX_N: u32 = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    CopsWin,
    RobberWins,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SolverError {
    #[error("exact search supports n <= {max} (n = 7 needs a time budget), got {n}")]
    TooLarge { n: u32, max: u32 },
    #[error("ground set size must be at least 1")]
    EmptyBoard,
}

#[derive(Debug, Clone)]
pub struct SolverOptions {
    /// Memoize on canonical keys rather than on the raw labelling.
    pub canonicalize: bool,
    /// Use the exact cut-offs described in the module docs.
    pub prune: bool,
    pub symmetry_cap: u32,
    pub node_budget: Option<u64>,
    pub time_budget: Option<Duration>,
    /// Hard cap on transposition-table entries.
    pub memo_budget: Option<usize>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            canonicalize: true,
            prune: true,
            symmetry_cap: DEFAULT_SYMMETRY_CAP,
            node_budget: None,
            time_budget: None,
            memo_budget: Some(20_000_000),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct SearchStats {
    pub nodes: u64,
    pub memo_hits: u64,
    pub memo_entries: u64,
    pub floor_cutoffs: u64,
    pub cover_cutoffs: u64,
}

#[derive(Debug, Clone, Copy)]
struct Exhausted;

pub struct Solver {
    n: u32,
    half: u32,
    opts: SolverOptions,
    memo: HashMap<CanonicalKey, bool>,
    escape_memo: HashMap<CanonicalKey, f64>,
    stats: SearchStats,
    deadline: Option<Instant>,
    exhausted: bool,
}

impl Solver {
    pub fn new(n: u32, opts: SolverOptions) -> Self {
        let deadline = opts.time_budget.map(|d| Instant::now() + d);
        Solver {
            n,
            half: n / 2,
            opts,
            memo: HashMap::new(),
            escape_memo: HashMap::new(),
            stats: SearchStats::default(),
            deadline,
            exhausted: false,
        }
    }

    pub fn stats(&self) -> SearchStats {
        SearchStats {
            memo_entries: (self.memo.len() + self.escape_memo.len()) as u64,
            ..self.stats
        }
    }

    fn round_of(&self, pos: &Position) -> u32 {
        self.n - pos.r + 1
    }

    fn key(&self, kind: NodeKind, pos: &Position) -> CanonicalKey {
        if self.opts.canonicalize {
            let within = pos.canonical_key_within(kind, self.opts.symmetry_cap, MAX_LABELLINGS);
            if let Some(k) = within {
                return k;
            }
        }
        pos.raw_key(kind)
    }

    fn tick(&mut self) -> Result<(), Exhausted> {
        if self.exhausted {
            return Err(Exhausted);
        }
        self.stats.nodes += 1;
        let over_nodes = self.opts.node_budget.is_some_and(|b| self.stats.nodes > b);
        let over_memo = self
            .opts
            .memo_budget
            .is_some_and(|b| self.memo.len() + self.escape_memo.len() > b);
        let over_time = self.stats.nodes % 1024 == 0
            && self.deadline.is_some_and(|d| Instant::now() > d);
        if over_nodes || over_memo || over_time {
            self.exhausted = true;
            return Err(Exhausted);
        }
        Ok(())
    }

    /// Whether greedy deletions from round `k` on leave no survivor.
    fn floor_reaches_zero(&self, mut survivors: u64, k: u32) -> bool {
        let n = self.n as u64;
        for i in k as u64..=self.half as u64 {
            survivors -= (survivors * i).div_ceil(n - i + 1);
            if survivors == 0 {
                return true;
            }
        }
        survivors == 0
    }

    /// Value of a position with the cops to move: can they force capture?
    fn cops_to_move(&mut self, pos: &Position) -> Result<bool, Exhausted> {
        let k = self.round_of(pos);
        let total = pos.total();
        if k > self.half {
            // strike round of an odd game
            return Ok(total > 0);
        }
        if total == 0 {
            return Ok(false);
        }
        if self.opts.prune {
            if self.floor_reaches_zero(total as u64, k) {
                self.stats.floor_cutoffs += 1;
                return Ok(false);
            }
            if cover_certificate(pos, self.half) {
                self.stats.cover_cutoffs += 1;
                return Ok(true);
            }
            if k == self.half && self.n % 2 == 0 {
                return Ok(last_even_round_covers(pos));
            }
        }
        let key = self.key(NodeKind::CopsToMove, pos);
        if let Some(&v) = self.memo.get(&key) {
            self.stats.memo_hits += 1;
            return Ok(v);
        }
        self.tick()?;
        let mut won = false;
        let mut moves = JointMoves::new(pos, None);
        while let Some((child, _)) = moves.next_move() {
            if self.robber_to_move(&child)? {
                won = true;
                break;
            }
        }
        self.memo.insert(key, won);
        Ok(won)
    }

    /// Value of a position with the robber to move (cops already at level
    /// `k`): do the cops catch it whatever it deletes?
    fn robber_to_move(&mut self, pos: &Position) -> Result<bool, Exhausted> {
        let k = self.round_of(pos);
        let total = pos.total();
        if total == 0 {
            return Ok(false);
        }
        if self.opts.prune && self.floor_reaches_zero(total as u64, k) {
            self.stats.floor_cutoffs += 1;
            return Ok(false);
        }
        let key = self.key(NodeKind::RobberToMove, pos);
        if let Some(&v) = self.memo.get(&key) {
            self.stats.memo_hits += 1;
            return Ok(v);
        }
        self.tick()?;
        let mut won = true;
        for x in deletion_order(pos) {
            let child = pos.delete(x);
            let caught = if k == self.half {
                child.total() > 0
            } else {
                self.cops_to_move(&child)?
            };
            if !caught {
                won = false;
                break;
            }
        }
        self.memo.insert(key, won);
        Ok(won)
    }

    /// Exact value of the initial position with `cops` cops.
    pub fn cops_win(&mut self, cops: u32) -> Verdict {
        let root = Position::new(self.n, [(0u64, cops)]);
        match self.cops_to_move(&root) {
            Ok(true) => Verdict::CopsWin,
            Ok(false) => Verdict::RobberWins,
            Err(Exhausted) => Verdict::Unknown,
        }
    }

    /// For a state with the robber to move, the minimax verdict after each
    /// possible deletion.
    pub fn robber_move_verdicts(&mut self, state: &GameState) -> Vec<(Element, Verdict)> {
        let pos = Position::from_state(state);
        let last = state.round() == self.half;
        state
            .robber()
            .elements()
            .enumerate()
            .map(|(i, e)| {
                let child = pos.delete(i as u32);
                let v = if last {
                    Ok(child.total() > 0)
                } else {
                    self.cops_to_move(&child)
                };
                let v = match v {
                    Ok(true) => Verdict::CopsWin,
                    Ok(false) => Verdict::RobberWins,
                    Err(Exhausted) => Verdict::Unknown,
                };
                (e, v)
            })
            .collect()
    }

    /// For a state with the robber to move, the robber's escape probability
    /// after each deletion when the cops play uniformly at random and the
    /// robber keeps playing optimally. `None` where the budget ran out.
    pub fn robber_escape_probabilities(&mut self, state: &GameState) -> Vec<(Element, Option<f64>)> {
        let pos = Position::from_state(state);
        let last = state.round() == self.half;
        state
            .robber()
            .elements()
            .enumerate()
            .map(|(i, e)| {
                let child = pos.delete(i as u32);
                let v = if last {
                    Ok(if child.total() > 0 { 0.0 } else { 1.0 })
                } else {
                    self.escape_cops_to_move(&child)
                };
                (e, v.ok())
            })
            .collect()
    }

    fn escape_cops_to_move(&mut self, pos: &Position) -> Result<f64, Exhausted> {
        let k = self.round_of(pos);
        let total = pos.total();
        if k > self.half {
            return Ok(if total > 0 { 0.0 } else { 1.0 });
        }
        if total == 0 || (self.opts.prune && self.floor_reaches_zero(total as u64, k)) {
            return Ok(1.0);
        }
        let key = self.key(NodeKind::CopsToMove, pos);
        if let Some(&v) = self.escape_memo.get(&key) {
            self.stats.memo_hits += 1;
            return Ok(v);
        }
        self.tick()?;
        let mut value = 0.0;
        let mut moves = JointMoves::new(pos, Some(()));
        while let Some((child, p)) = moves.next_move() {
            value += p * self.escape_robber_to_move(&child)?;
        }
        self.escape_memo.insert(key, value);
        Ok(value)
    }

    fn escape_robber_to_move(&mut self, pos: &Position) -> Result<f64, Exhausted> {
        let k = self.round_of(pos);
        if pos.total() == 0 {
            return Ok(1.0);
        }
        let key = self.key(NodeKind::RobberToMove, pos);
        if let Some(&v) = self.escape_memo.get(&key) {
            self.stats.memo_hits += 1;
            return Ok(v);
        }
        self.tick()?;
        let mut best: f64 = 0.0;
        for x in deletion_order(pos) {
            let child = pos.delete(x);
            let v = if k == self.half {
                if child.total() > 0 {
                    0.0
                } else {
                    1.0
                }
            } else {
                self.escape_cops_to_move(&child)?
            };
            best = best.max(v);
            if best >= 1.0 {
                break;
            }
        }
        self.escape_memo.insert(key, best);
        Ok(best)
    }
}

/// Deletions ordered by how many cops they evade, most first.
fn deletion_order(pos: &Position) -> Vec<u32> {
    let deg = pos.degrees();
    let mut order: Vec<u32> = (0..pos.r).collect();
    order.sort_by(|&a, &b| deg[b as usize].cmp(&deg[a as usize]).then(a.cmp(&b)));
    order
}

/// Enumerates joint cop moves as multisets. Each group of identical cops
/// distributes over its free elements; the odometer runs over the
/// per-group compositions, most even split first.
struct JointMoves {
    r: u32,
    groups: Vec<GroupMoves>,
    odometer: Vec<usize>,
    done: bool,
    weighted: bool,
}

struct GroupMoves {
    set: u64,
    options: Vec<u32>,
    compositions: Vec<(Vec<u32>, f64)>,
}

impl JointMoves {
    fn new(pos: &Position, weighted: Option<()>) -> Self {
        let weighted = weighted.is_some();
        let groups: Vec<GroupMoves> = pos
            .cops
            .iter()
            .map(|&(set, count)| {
                let free = pos.universe() & !set;
                let options: Vec<u32> = (0..pos.r).filter(|&e| free >> e & 1 == 1).collect();
                let mut compositions = compositions(count, options.len());
                compositions.sort_by_key(|c| *c.iter().max().unwrap_or(&0));
                let compositions = compositions
                    .into_iter()
                    .map(|c| {
                        let p = if weighted {
                            multinomial_probability(count, &c)
                        } else {
                            1.0
                        };
                        (c, p)
                    })
                    .collect();
                GroupMoves {
                    set,
                    options,
                    compositions,
                }
            })
            .collect();
        let done = groups.iter().any(|g| g.compositions.is_empty());
        JointMoves {
            r: pos.r,
            odometer: vec![0; groups.len()],
            groups,
            done,
            weighted,
        }
    }

    fn next_move(&mut self) -> Option<(Position, f64)> {
        if self.done {
            return None;
        }
        let mut cops = Vec::new();
        let mut prob = 1.0;
        for (g, &i) in self.groups.iter().zip(&self.odometer) {
            let (parts, p) = &g.compositions[i];
            prob *= p;
            for (&e, &c) in g.options.iter().zip(parts) {
                if c > 0 {
                    cops.push((g.set | 1u64 << e, c));
                }
            }
        }
        let mut i = 0;
        loop {
            if i == self.odometer.len() {
                self.done = true;
                break;
            }
            self.odometer[i] += 1;
            if self.odometer[i] < self.groups[i].compositions.len() {
                break;
            }
            self.odometer[i] = 0;
            i += 1;
        }
        Some((Position::new(self.r, cops), if self.weighted { prob } else { 1.0 }))
    }
}

/// All ways to write `total` as an ordered sum of `parts` non-negative
/// integers.
fn compositions(total: u32, parts: usize) -> Vec<Vec<u32>> {
    if parts == 0 {
        return if total == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::new();
    let mut cur = vec![0u32; parts];
    fn rec(i: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if i + 1 == cur.len() {
            cur[i] = left;
            out.push(cur.clone());
            return;
        }
        for v in 0..=left {
            cur[i] = v;
            rec(i + 1, left - v, cur, out);
        }
    }
    rec(0, total, &mut cur, &mut out);
    out
}

/// Probability of a given composition when `count` cops each pick one of
/// `parts.len()` options uniformly.
fn multinomial_probability(count: u32, parts: &[u32]) -> f64 {
    let ln_fact = |k: u32| (1..=k).map(|i| (i as f64).ln()).sum::<f64>();
    let ln = ln_fact(count) - parts.iter().map(|&p| ln_fact(p)).sum::<f64>()
        - count as f64 * (parts.len() as f64).ln();
    ln.exp()
}

/// Cops can be assigned distinct level-`level` targets covering every such
/// set under the robber, each cop below its target.
fn cover_certificate(pos: &Position, level: u32) -> bool {
    let r = pos.r;
    let Some(count) = crate::vertex::binomial_u128(r as u64, level as u64) else {
        return false;
    };
    if count > 4096 || (pos.total() as u128) < count {
        return false;
    }
    let targets: Vec<u64> = (0u64..)
        .scan((1u64 << level) - 1, |cur, _| {
            if level == 0 {
                return None;
            }
            let t = *cur;
            if t > pos.universe() {
                return None;
            }
            let c = t & t.wrapping_neg();
            let s = t + c;
            *cur = (((s ^ t) >> 2) / c) | s;
            Some(t)
        })
        .collect();
    if targets.len() as u128 != count {
        return false;
    }
    let caps: Vec<u32> = pos.cops.iter().map(|&(_, c)| c).collect();
    let mut assigned: Vec<Vec<usize>> = vec![Vec::new(); pos.cops.len()];
    for t in 0..targets.len() {
        let mut seen = vec![false; pos.cops.len()];
        if !augment(t, &targets, pos, &caps, &mut assigned, &mut seen) {
            return false;
        }
    }
    true
}

fn augment(
    t: usize,
    targets: &[u64],
    pos: &Position,
    caps: &[u32],
    assigned: &mut Vec<Vec<usize>>,
    seen: &mut Vec<bool>,
) -> bool {
    for g in 0..pos.cops.len() {
        if seen[g] || pos.cops[g].0 & !targets[t] != 0 {
            continue;
        }
        seen[g] = true;
        if (assigned[g].len() as u32) < caps[g] {
            assigned[g].push(t);
            return true;
        }
        for j in 0..assigned[g].len() {
            let other = assigned[g][j];
            if augment(other, targets, pos, caps, assigned, seen) {
                assigned[g][j] = t;
                return true;
            }
        }
    }
    false
}

/// Last round of an even game: cops at level `L - 1` under a robber at level
/// `L + 1`. See the module docs.
fn last_even_round_covers(pos: &Position) -> bool {
    let r = pos.r as usize;
    let mut parent: Vec<usize> = (0..r).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut x = x;
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let edges: Vec<(usize, usize, u32)> = pos
        .cops
        .iter()
        .map(|&(m, c)| {
            let missing = pos.universe() & !m;
            debug_assert_eq!(missing.count_ones(), 2);
            let a = missing.trailing_zeros() as usize;
            let b = (63 - missing.leading_zeros()) as usize;
            (a, b, c)
        })
        .collect();
    for &(a, b, _) in &edges {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        parent[ra] = rb;
    }
    let mut vertices = vec![0u64; r];
    let mut edge_count = vec![0u64; r];
    for v in 0..r {
        let root = find(&mut parent, v);
        vertices[root] += 1;
    }
    for &(a, _, c) in &edges {
        let root = find(&mut parent, a);
        edge_count[root] += c as u64;
    }
    (0..r).all(|v| vertices[v] == 0 || edge_count[v] >= vertices[v])
}

/// Result of [`cop_number_exact`].
#[derive(Debug, Clone, Serialize)]
pub struct SolveResult {
    pub n: u32,
    /// Least winning cop count, when it was determined.
    pub cop_number: Option<u32>,
    /// Verdict for each cop count scanned, ascending.
    pub table: Vec<(u32, Verdict)>,
    /// Range known to contain the cop number when the search gave up.
    pub unknown_range: Option<(u32, u32)>,
    pub stats: SearchStats,
}

fn check_size(n: u32, opts: &SolverOptions) -> Result<(), SolverError> {
    if n == 0 {
        return Err(SolverError::EmptyBoard);
    }
    let max = if opts.time_budget.is_some() {
        DEFAULT_MAX_N + 1
    } else {
        DEFAULT_MAX_N
    };
    if n > max {
        return Err(SolverError::TooLarge { n, max });
    }
    Ok(())
}

/// Exact answer to "do `cops` cops win on the `n`-cube?".
pub fn cops_win_with(n: u32, cops: u32, opts: SolverOptions) -> Result<Verdict, SolverError> {
    check_size(n, &opts)?;
    Ok(Solver::new(n, opts).cops_win(cops))
}

/// Least cop count that wins, scanning upward from the greedy-robber lower
/// bound (smaller counts provably lose). `max_cops` limits the scan; the
/// covering count always wins, so the scan never needs to pass it.
pub fn cop_number_exact(
    n: u32,
    max_cops: Option<u32>,
    opts: SolverOptions,
) -> Result<SolveResult, SolverError> {
    check_size(n, &opts)?;
    let start = lower_bound(n).ceil_u32();
    let cover: u32 = trivial_upper_bound(n)
        .try_into()
        .expect("covering count fits for solvable n");
    let stop = max_cops.map_or(cover, |m| m.min(cover));
    let mut solver = Solver::new(n, opts);
    let mut table = Vec::new();
    let mut cop_number = None;
    let mut unknown_range = None;
    for c in start..=stop {
        let v = solver.cops_win(c);
        table.push((c, v));
        match v {
            Verdict::CopsWin => {
                cop_number = Some(c);
                break;
            }
            Verdict::Unknown => {
                unknown_range = Some((c, cover));
                break;
            }
            Verdict::RobberWins => {}
        }
    }
    if cop_number.is_none() && unknown_range.is_none() && stop < cover {
        unknown_range = Some((stop + 1, cover));
    }
    Ok(SolveResult {
        n,
        cop_number,
        table,
        unknown_range,
        stats: solver.stats(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plain() -> SolverOptions {
        SolverOptions {
            canonicalize: false,
            prune: false,
            ..SolverOptions::default()
        }
    }

    #[test]
    fn tiny_cop_numbers() {
        assert_eq!(cops_win_with(1, 0, SolverOptions::default()).unwrap(), Verdict::RobberWins);
        assert_eq!(cops_win_with(1, 1, SolverOptions::default()).unwrap(), Verdict::CopsWin);
        assert_eq!(cops_win_with(2, 1, plain()).unwrap(), Verdict::RobberWins);
        assert_eq!(cops_win_with(2, 2, plain()).unwrap(), Verdict::CopsWin);
        assert_eq!(cops_win_with(3, 1, plain()).unwrap(), Verdict::RobberWins);
        assert_eq!(cops_win_with(3, 2, plain()).unwrap(), Verdict::CopsWin);
    }

    #[test]
    fn cut_offs_and_symmetry_do_not_change_values() {
        for n in 1..=5 {
            let limit = trivial_upper_bound(n).try_into().unwrap_or(12u32).min(12);
            for c in 0..=limit {
                let base = cops_win_with(n, c, plain()).unwrap();
                for (canon, prune) in [(true, false), (false, true), (true, true)] {
                    let opts = SolverOptions {
                        canonicalize: canon,
                        prune,
                        ..SolverOptions::default()
                    };
                    assert_eq!(cops_win_with(n, c, opts).unwrap(), base, "n={n} c={c}");
                }
            }
        }
    }

    #[test]
    fn last_even_round_matches_enumeration() {
        // n = 6, round 3: r = 4 and cops at level 2
        let masks: Vec<u64> = (0u64..16).filter(|m| m.count_ones() == 2).collect();
        let mut s = Solver::new(6, plain());
        for a in 0..masks.len() {
            for b in a..masks.len() {
                for c in b..masks.len() {
                    for d in c..masks.len() {
                        let pos = Position::new(4, [(masks[a], 1), (masks[b], 1), (masks[c], 1), (masks[d], 1)]);
                        let brute = s.cops_to_move(&pos).unwrap();
                        assert_eq!(last_even_round_covers(&pos), brute, "{pos:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn compositions_count() {
        assert_eq!(compositions(3, 3).len(), 10);
        assert_eq!(compositions(0, 2), vec![vec![0, 0]]);
        assert!(compositions(2, 0).is_empty());
        let total: f64 = compositions(4, 3)
            .iter()
            .map(|c| multinomial_probability(4, c))
            .sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn monotone_in_cops() {
        for n in 2..=5 {
            let mut s = Solver::new(n, SolverOptions::default());
            let mut seen_win = false;
            for c in 0..=12 {
                let v = s.cops_win(c);
                if seen_win {
                    assert_eq!(v, Verdict::CopsWin);
                }
                seen_win |= v == Verdict::CopsWin;
            }
        }
    }

    #[test]
    fn budget_gives_unknown() {
        let opts = SolverOptions {
            node_budget: Some(3),
            prune: false,
            ..SolverOptions::default()
        };
        assert_eq!(cops_win_with(5, 4, opts).unwrap(), Verdict::Unknown);
        assert!(matches!(
            cops_win_with(7, 4, SolverOptions::default()),
            Err(SolverError::TooLarge { .. })
        ));
    }

    #[test]
    fn escape_probability_is_a_probability() {
        let cfg = crate::game::GameConfig::new(4, 3).unwrap();
        let s = GameState::new(cfg).apply_cop_moves(&[1, 2, 3]).unwrap().state;
        let mut solver = Solver::new(4, SolverOptions::default());
        for (_, v) in solver.robber_escape_probabilities(&s) {
            let v = v.unwrap();
            assert!((0.0..=1.0).contains(&v));
        }
    }
}
