//! Backtracking searches for triple systems.
//!
//! Both searches place one triple at a time into the current class, always
//! branching on the *most constrained* unplaced point (fewest available
//! partner pairs), with candidate pairs enumerated in label order.  That makes
//! the search deterministic: a fixed input and budget always yields the same
//! outcome, and the first solution found is a canonical representative.
//!
//! Symmetry breaking, justified by relabeling arguments, prunes without
//! losing solvability:
//!
//! * Kirkman: any solution can be relabeled so its first class is
//!   `{1,2,3},{4,5,6},...` and the second class's triple through point 1 is
//!   `{1,4,7}` (the triple must hit two distinct first-class blocks; permute
//!   blocks and points within blocks to make them `{4,5,6}` and `{7,8,9}` at
//!   their first points).
//! * Triangle+matching: relabel so the matching is `{1,2},{3,4},...` and the
//!   first triangle class's triple through point 1 is `{1,3,5}` (its other
//!   two points lie in distinct matching edges; permute edges and swap
//!   within edges).
//!
//! `Infeasible` is returned either with an arithmetic certificate (block
//! sizes cannot partition the point set, or the class count `(s-1)/(l-1)` is
//! not an integer) and zero nodes, or after the full symmetric-reduced search
//! space is exhausted.

use super::{ResolvableDesign, TriangleMatchingDecomposition, Verify};

pub const DEFAULT_BUDGET: u64 = 10_000_000;

/// Result of a budgeted deterministic search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SearchOutcome<D> {
    Found { design: D, nodes: u64 },
    Infeasible { nodes: u64 },
    BudgetExhausted { nodes: u64 },
}

impl<D> SearchOutcome<D> {
    pub fn nodes(&self) -> u64 {
        match self {
            SearchOutcome::Found { nodes, .. }
            | SearchOutcome::Infeasible { nodes }
            | SearchOutcome::BudgetExhausted { nodes } => *nodes,
        }
    }

    pub fn found(self) -> Option<D> {
        match self {
            SearchOutcome::Found { design, .. } => Some(design),
            _ => None,
        }
    }
}

const MAX_SEARCH_POINTS: u32 = 60;

struct BudgetStop;

struct TripleSearch {
    full: u64,
    /// `uncov[p]` bit `q`: pair `{p,q}` not covered yet.
    uncov: Vec<u64>,
    classes: Vec<Vec<[usize; 3]>>,
    /// Triples placed unconditionally on entering a class (symmetry breaking).
    forced: Vec<Vec<[usize; 3]>>,
    target: usize,
    nodes: u64,
    budget: u64,
}

fn bits(mut m: u64) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if m == 0 {
            None
        } else {
            let i = m.trailing_zeros() as usize;
            m &= m - 1;
            Some(i)
        }
    })
}

fn above(m: u64, q: usize) -> u64 {
    if q + 1 >= 64 {
        0
    } else {
        m >> (q + 1) << (q + 1)
    }
}

impl TripleSearch {
    fn new(s: usize, target: usize, budget: u64) -> Self {
        let full = if s == 64 { u64::MAX } else { (1u64 << s) - 1 };
        let uncov = (0..s).map(|p| full & !(1u64 << p)).collect();
        TripleSearch {
            full,
            uncov,
            classes: Vec::new(),
            forced: Vec::new(),
            target,
            nodes: 0,
            budget,
        }
    }

    fn cover(&mut self, a: usize, b: usize) {
        debug_assert!(self.uncov[a] & (1 << b) != 0, "pair ({a},{b}) covered twice");
        self.uncov[a] &= !(1u64 << b);
        self.uncov[b] &= !(1u64 << a);
    }

    fn uncover(&mut self, a: usize, b: usize) {
        self.uncov[a] |= 1u64 << b;
        self.uncov[b] |= 1u64 << a;
    }

    fn place(&mut self, t: [usize; 3]) {
        self.cover(t[0], t[1]);
        self.cover(t[0], t[2]);
        self.cover(t[1], t[2]);
        self.classes.last_mut().unwrap().push(t);
    }

    fn unplace(&mut self) {
        let t = self.classes.last_mut().unwrap().pop().unwrap();
        self.uncover(t[0], t[1]);
        self.uncover(t[0], t[2]);
        self.uncover(t[1], t[2]);
    }

    fn enter_class(&mut self, idx: usize) -> Result<bool, BudgetStop> {
        if idx == self.target {
            debug_assert!(self.uncov.iter().all(|&m| m == 0), "classes done but pairs uncovered");
            return Ok(true);
        }
        self.classes.push(Vec::new());
        let forced = self.forced.get(idx).cloned().unwrap_or_default();
        let mut unplaced = self.full;
        for t in &forced {
            debug_assert!(
                self.uncov[t[0]] & (1 << t[1]) != 0
                    && self.uncov[t[0]] & (1 << t[2]) != 0
                    && self.uncov[t[1]] & (1 << t[2]) != 0,
                "forced triple conflicts; symmetry argument violated"
            );
            self.place(*t);
            unplaced &= !(1u64 << t[0] | 1u64 << t[1] | 1u64 << t[2]);
        }
        let result = self.fill_class(idx, unplaced);
        if !matches!(result, Ok(true)) {
            for _ in &forced {
                self.unplace();
            }
            self.classes.pop();
        }
        result
    }

    fn fill_class(&mut self, idx: usize, unplaced: u64) -> Result<bool, BudgetStop> {
        if unplaced == 0 {
            return self.enter_class(idx + 1);
        }
        // Most-constrained pivot: unplaced point with fewest candidate pairs.
        let mut best_p = usize::MAX;
        let mut best_cnt = u64::MAX;
        for p in bits(unplaced) {
            let avail = self.uncov[p] & unplaced;
            let mut cnt = 0u64;
            for q in bits(avail) {
                cnt += above(avail & self.uncov[q], q).count_ones() as u64;
                if cnt >= best_cnt {
                    break;
                }
            }
            if cnt < best_cnt {
                best_cnt = cnt;
                best_p = p;
                if cnt == 0 {
                    return Ok(false);
                }
            }
        }
        let p = best_p;
        let avail = self.uncov[p] & unplaced;
        let mut candidates: Vec<(usize, usize)> = Vec::new();
        for q in bits(avail) {
            for r in bits(above(avail & self.uncov[q], q)) {
                candidates.push((q, r));
            }
        }
        for (q, r) in candidates {
            self.nodes += 1;
            if self.nodes > self.budget {
                return Err(BudgetStop);
            }
            let mut t = [p, q, r];
            t.sort_unstable();
            self.place(t);
            let rest = unplaced & !(1u64 << p | 1u64 << q | 1u64 << r);
            match self.fill_class(idx, rest) {
                Ok(true) => return Ok(true),
                Ok(false) => self.unplace(),
                Err(stop) => {
                    self.unplace();
                    return Err(stop);
                }
            }
        }
        Ok(false)
    }

    fn labeled_classes(&self) -> Vec<Vec<[u32; 3]>> {
        self.classes
            .iter()
            .map(|c| c.iter().map(|t| [t[0] as u32 + 1, t[1] as u32 + 1, t[2] as u32 + 1]).collect())
            .collect()
    }
}

/// Search for a resolvable triple system on `s` points (`l=3`,
/// `m=(s-1)/2` classes). Exists exactly when `s ≡ 3 (mod 6)`.
pub fn kirkman_search(s: u32, budget: u64) -> SearchOutcome<ResolvableDesign> {
    if s < 3 || s % 3 != 0 || (s - 1) % 2 != 0 {
        // No parallel class of triples (3 ∤ s), or the class count (s-1)/2
        // is not an integer: the search space is empty by arithmetic.
        return SearchOutcome::Infeasible { nodes: 0 };
    }
    assert!(s <= MAX_SEARCH_POINTS, "search supports at most {MAX_SEARCH_POINTS} points");
    let target = ((s - 1) / 2) as usize;
    let mut search = TripleSearch::new(s as usize, target, budget);
    search.forced.push((0..s as usize / 3).map(|b| [3 * b, 3 * b + 1, 3 * b + 2]).collect());
    if s >= 9 {
        search.forced.push(vec![[0, 3, 6]]);
    }
    match search.enter_class(0) {
        Err(BudgetStop) => SearchOutcome::BudgetExhausted { nodes: search.nodes },
        Ok(false) => SearchOutcome::Infeasible { nodes: search.nodes },
        Ok(true) => {
            let classes = search
                .labeled_classes()
                .into_iter()
                .map(|c| c.into_iter().map(|t| t.to_vec()).collect())
                .collect();
            let mut design = ResolvableDesign { point_count: s, block_size: 3, classes };
            design.canonicalize();
            debug_assert!(design.verify().is_valid());
            SearchOutcome::Found { design, nodes: search.nodes }
        }
    }
}

fn triangle_matching_session(s: u32, budget: u64) -> TripleSearch {
    assert!(s <= MAX_SEARCH_POINTS, "search supports at most {MAX_SEARCH_POINTS} points");
    let k = (s / 2) as usize;
    let mut search = TripleSearch::new(s as usize, k - 1, budget);
    // Relabel any solution so the matching is consecutive pairs.
    for p in 0..k {
        search.cover(2 * p, 2 * p + 1);
    }
    search.forced.push(vec![[0, 2, 4]]);
    search
}

fn triangle_matching_found(s: u32, search: &TripleSearch, nodes: u64) -> SearchOutcome<TriangleMatchingDecomposition> {
    let mut design = TriangleMatchingDecomposition {
        point_count: s,
        triangle_classes: search.labeled_classes(),
        matching: (0..s / 2).map(|p| [2 * p + 1, 2 * p + 2]).collect(),
    };
    design.canonicalize();
    debug_assert!(design.verify().is_valid());
    SearchOutcome::Found { design, nodes }
}

/// Search for `s/2 - 1` triangle classes plus a perfect matching covering
/// every pair of `{1..s}` exactly once. Solutions require `s ≡ 0 (mod 6)`.
pub fn triangle_matching_search(s: u32, budget: u64) -> SearchOutcome<TriangleMatchingDecomposition> {
    if s < 6 || s % 2 != 0 || s % 3 != 0 {
        // Matching needs 2 | s, triangle classes need 3 | s; with fewer than
        // 6 points there is no triangle class at all to build.
        return SearchOutcome::Infeasible { nodes: 0 };
    }
    let mut search = triangle_matching_session(s, budget);
    match search.enter_class(0) {
        Err(BudgetStop) => SearchOutcome::BudgetExhausted { nodes: search.nodes },
        Ok(false) => SearchOutcome::Infeasible { nodes: search.nodes },
        Ok(true) => triangle_matching_found(s, &search, search.nodes),
    }
}
