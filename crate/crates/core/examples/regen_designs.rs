//! Regenerates the bundled design data files.
//!
//! Run from the repository root:
//!
//! ```text
//! cargo run --release -p kplanar --example regen_designs
//! ```
//!
//! The 15-point system comes straight out of the deterministic search. The
//! 18-point triangle+matching decomposition is far beyond what the plain
//! backtracker reaches, so it is built here by imposing a 3-fold symmetry:
//! points are arranged in a 3×6 grid of rows × columns, the row rotation σ
//! (rows mod 3) is required to be an automorphism, and the search runs over
//! the small quotient problem instead of raw triangle classes. The
//! decomposition consists of
//!
//! * the matching: same-row pairs of the matched column pairs (1,2), (3,4),
//!   (5,6);
//! * one class of the six column triangles;
//! * four σ-fixed classes, each two triangle orbits over complementary
//!   column triples with row shifts;
//! * one orbit of three classes: a single triangle factor using each σ-orbit
//!   of pairs at most once, plus its two row rotations.
//!
//! Every (column pair, row difference) "slot" outside the matching must be
//! covered exactly once across the fixed classes and the orbit factor; the
//! expansion back to 18 points is then automatically a valid decomposition
//! (and is verified before being written).

use kplanar::designs::{kirkman_search, SearchOutcome, TriangleMatchingDecomposition, Verify};
use kplanar::rng::Stream;
use std::fs;
use std::path::Path;

const COLS: usize = 6;
/// Column pairs whose same-row point pairs form the matching.
const MATCHED: [(usize, usize); 3] = [(0, 1), (2, 3), (4, 5)];

/// Slot id covering the pairs between two columns at a row difference.
/// Differences are oriented from the lower to the higher column.
fn slot(a: usize, b: usize, d: usize) -> usize {
    debug_assert!(a < b);
    (b * (b - 1) / 2 + a) * 3 + d
}

/// Slots covered by the σ-orbit of the triangle `{(0,c1),(d12,c2),(d13,c3)}`
/// with `c1 < c2 < c3`.
fn orbit_slots(t: [usize; 3], d12: usize, d13: usize) -> [usize; 3] {
    [
        slot(t[0], t[1], d12),
        slot(t[0], t[2], d13),
        slot(t[1], t[2], (3 + d13 - d12) % 3),
    ]
}

/// Point id (0-based) of grid cell (row, column).
fn pt(row: usize, col: usize) -> usize {
    (row % 3) * COLS + col
}

/// One candidate σ-fixed class: a partition of the columns into two ordered
/// triples with row shifts for each, covering six distinct live slots.
struct FixedClass {
    triple: [usize; 3],
    complement: [usize; 3],
    shifts: [usize; 4],
    slots: u64,
}

fn fixed_class_options(live: u64) -> Vec<FixedClass> {
    let mut options = Vec::new();
    for b in 1..COLS {
        for c in b + 1..COLS {
            let triple = [0, b, c];
            let rest: Vec<usize> = (1..COLS).filter(|x| *x != b && *x != c).collect();
            let complement = [rest[0], rest[1], rest[2]];
            for d12 in 0..3 {
                for d13 in 0..3 {
                    let s1 = orbit_slots(triple, d12, d13);
                    if s1.iter().any(|&s| live & (1 << s) == 0) {
                        continue;
                    }
                    for e12 in 0..3 {
                        for e13 in 0..3 {
                            let s2 = orbit_slots(complement, e12, e13);
                            if s2.iter().any(|&s| live & (1 << s) == 0) {
                                continue;
                            }
                            let mask = s1.iter().chain(&s2).fold(0u64, |m, &s| m | 1 << s);
                            if mask.count_ones() == 6 {
                                options.push(FixedClass {
                                    triple,
                                    complement,
                                    shifts: [d12, d13, e12, e13],
                                    slots: mask,
                                });
                            }
                        }
                    }
                }
            }
        }
    }
    options
}

/// Triangle factor on the 18 points of the leftover slots, using each slot
/// at most once — so its row rotations tile the leftover exactly.
fn orbit_factor(leftover: u64) -> Option<Vec<[usize; 3]>> {
    let n = 3 * COLS;
    let mut adj = vec![0u64; n];
    let mut slot_of = vec![vec![usize::MAX; n]; n];
    for a in 0..COLS {
        for b in a + 1..COLS {
            for d in 0..3 {
                let s = slot(a, b, d);
                if leftover & (1 << s) == 0 {
                    continue;
                }
                for row in 0..3 {
                    let (u, v) = (pt(row, a), pt(row + d, b));
                    adj[u] |= 1 << v;
                    adj[v] |= 1 << u;
                    slot_of[u][v] = s;
                    slot_of[v][u] = s;
                }
            }
        }
    }
    fn rec(
        adj: &[u64],
        slot_of: &[Vec<usize>],
        covered: u64,
        full: u64,
        used: &mut u64,
        out: &mut Vec<[usize; 3]>,
    ) -> bool {
        if covered == full {
            return true;
        }
        let u = (!covered & full).trailing_zeros() as usize;
        let avail = adj[u] & !covered;
        let mut v_iter = avail;
        while v_iter != 0 {
            let v = v_iter.trailing_zeros() as usize;
            v_iter &= v_iter - 1;
            let mut w_iter = avail & adj[v] & !((1u64 << (v + 1)) - 1);
            while w_iter != 0 {
                let w = w_iter.trailing_zeros() as usize;
                w_iter &= w_iter - 1;
                let mask = (1u64 << slot_of[u][v]) | (1 << slot_of[u][w]) | (1 << slot_of[v][w]);
                if mask.count_ones() < 3 || *used & mask != 0 {
                    continue;
                }
                *used |= mask;
                out.push([u, v, w]);
                if rec(adj, slot_of, covered | 1 << u | 1 << v | 1 << w, full, used, out) {
                    return true;
                }
                out.pop();
                *used &= !mask;
            }
        }
        false
    }
    let full = (1u64 << n) - 1;
    let mut used = 0u64;
    let mut out = Vec::new();
    rec(&adj, &slot_of, 0, full, &mut used, &mut out).then_some(out)
}

/// Deterministic construction of the 18-point decomposition: seeded random
/// greedy choices of four compatible fixed classes until the leftover slots
/// admit an orbit factor.
fn build_18(seed: u64, max_attempts: u32) -> Option<TriangleMatchingDecomposition> {
    let pair_count = COLS * (COLS - 1) / 2;
    let mut live = (0..pair_count * 3).fold(0u64, |m, s| m | 1 << s);
    for &(a, b) in &MATCHED {
        live &= !(1 << slot(a, b, 0));
    }
    let options = fixed_class_options(live);
    let mut rng = Stream::new(seed);
    for _ in 0..max_attempts {
        let mut order: Vec<usize> = (0..options.len()).collect();
        for i in (1..order.len()).rev() {
            order.swap(i, rng.next_below(i as u64 + 1) as usize);
        }
        let mut chosen: Vec<&FixedClass> = Vec::new();
        let mut used = 0u64;
        for &i in &order {
            if options[i].slots & used == 0 {
                used |= options[i].slots;
                chosen.push(&options[i]);
                if chosen.len() == 4 {
                    break;
                }
            }
        }
        if chosen.len() < 4 {
            continue;
        }
        let Some(factor) = orbit_factor(live & !used) else { continue };

        // Expand to explicit classes on labels 1..=18.
        let lab = |row: usize, col: usize| pt(row, col) as u32 + 1;
        let mut classes: Vec<Vec<[u32; 3]>> = Vec::new();
        classes.push((0..COLS).map(|c| [lab(0, c), lab(1, c), lab(2, c)]).collect());
        for fc in &chosen {
            let mut class = Vec::new();
            for (tri, d12, d13) in [
                (fc.triple, fc.shifts[0], fc.shifts[1]),
                (fc.complement, fc.shifts[2], fc.shifts[3]),
            ] {
                for row in 0..3 {
                    let mut t = [lab(row, tri[0]), lab(row + d12, tri[1]), lab(row + d13, tri[2])];
                    t.sort_unstable();
                    class.push(t);
                }
            }
            classes.push(class);
        }
        for shift in 0..3 {
            classes.push(
                factor
                    .iter()
                    .map(|t| {
                        let mut tri =
                            t.map(|p| lab(p / COLS + shift, p % COLS));
                        tri.sort_unstable();
                        tri
                    })
                    .collect(),
            );
        }
        let matching = MATCHED
            .iter()
            .flat_map(|&(a, b)| (0..3).map(move |row| [lab(row, a), lab(row, b)]))
            .collect();
        let mut design = TriangleMatchingDecomposition {
            point_count: 18,
            triangle_classes: classes,
            matching,
        };
        design.canonicalize();
        let report = design.verify();
        assert!(report.is_valid(), "expansion produced an invalid decomposition: {report}");
        return Some(design);
    }
    None
}

fn main() {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");

    match kirkman_search(15, 10_000_000) {
        SearchOutcome::Found { design, nodes } => {
            eprintln!("15-point triple system found after {nodes} nodes");
            fs::write(data.join("kts15.txt"), design.to_string()).unwrap();
        }
        other => panic!("search for the 15-point system failed: {other:?}"),
    }

    let design = build_18(1, 100_000).expect("quotient construction failed");
    eprintln!("18-point triangle+matching decomposition built");
    fs::write(data.join("nkts18.txt"), design.to_string()).unwrap();
}
