//! Acceptance gate: one test per shipped guarantee, each printing a single
//! `criterion N: PASS` line (run with `--nocapture` to see them; a failing
//! criterion fails its test).  Stated runtime budgets are asserted.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use num_traits::ToPrimitive;

use kplanar::designs::{
    affine_resolvable_design, kts15, nkts18, one_factorization, triangle_matching_search,
    verify_design, SearchOutcome,
};
use kplanar::drawing::{
    convex_complete_drawing, crossings_of, two_line_bipartite_drawing, CrossingSet,
    RectilinearDrawing,
};
use kplanar::probability::{
    bounds_table, closed_form, exact_q, render_4dp, verify_counting_cases, ClosedForm,
    CountingFamily, PairPattern,
};
use kplanar::rng::derive_seed;
use kplanar::schemes::{
    scheme_bipartite, scheme_from_design, scheme_k7, scheme_odd, scheme_triangle_matching, Scheme,
};
use kplanar::splitter::{
    best_of, layout_planes, monte_carlo, sample_labeling, split, Instance, SplitResult,
};
use kplanar::{Coord, Rational};

fn rat(num: i64, den: i64) -> Rational {
    Rational::new(num.into(), den.into())
}

fn disjoint_q(sch: &Scheme) -> Rational {
    exact_q(sch, PairPattern::Disjoint).expect("exact enumeration").value
}

fn assert_budget(elapsed: Duration, budget: Duration, what: &str) {
    assert!(
        elapsed <= budget,
        "{what} took {elapsed:?}, over the {budget:?} budget"
    );
}

#[test]
fn criterion_01_seven_label_exactness() {
    let start = Instant::now();
    let sch = scheme_k7();
    assert_eq!(disjoint_q(&sch), rat(235, 2401), "full 7^4 enumeration");
    let breakdown = verify_counting_cases(&sch, CountingFamily::SevenLabel).expect("breakdown");
    assert!(breakdown.all_match(), "{breakdown}");
    let tuples = Rational::from_integer(2401.into());
    let counts: Vec<Rational> = breakdown.cases.iter().map(|c| &c.measured * &tuples).collect();
    let expected: Vec<Rational> = [7, 24, 84, 120].iter().map(|&n| rat(n, 1)).collect();
    assert_eq!(counts, expected, "case counts 7 + 24 + 84 + 120");
    assert_budget(start.elapsed(), Duration::from_secs(1), "criterion 1");
    println!("criterion 1: PASS — seven-label q = 235/2401 with case split 7+24+84+120");
}

#[test]
fn criterion_02_design_oracle_equivalence() {
    let start = Instant::now();
    let mut designs = vec![affine_resolvable_design(2).expect("4-point pair design")];
    for s in (2..=14).step_by(2) {
        designs.push(one_factorization(s).expect("one-factorization").as_design());
    }
    designs.push(affine_resolvable_design(3).expect("9-point triple design"));
    designs.push(kts15());
    designs.push(affine_resolvable_design(4).expect("16-point quadruple design"));

    for d in &designs {
        assert!(verify_design(d).is_valid(), "design s={} invalid", d.point_count);
        let (s, l) = (d.point_count as i64, d.block_size as i64);
        let sch = scheme_from_design(d).expect("scheme");
        let formula = rat(1 + (s - 1) * (l * l - l), s * s * s);
        assert_eq!(disjoint_q(&sch), formula, "s={s} l={l}");
    }
    assert_budget(start.elapsed(), Duration::from_secs(5), "criterion 2");
    println!(
        "criterion 2: PASS — {} resolvable designs match (1+(s−1)(l²−l))/s³ by enumeration",
        designs.len()
    );
}

#[test]
fn criterion_03_pair_block_identity() {
    for s in 2..=14u32 {
        let k = s;
        let design_form =
            closed_form(ClosedForm::Design { s, block_size: 2 }, k).expect("design form");
        let pair_form = closed_form(ClosedForm::PairScheme, k).expect("pair form");
        let direct = rat(2, (k as i64) * (k as i64)) - rat(1, (k as i64).pow(3));
        assert_eq!(design_form, pair_form, "k = s = {k}");
        assert_eq!(design_form, direct, "k = s = {k}");
    }
    let two = closed_form(ClosedForm::Design { s: 2, block_size: 2 }, 2).expect("s=2");
    assert_eq!(two, rat(3, 8));
    assert_eq!(two, closed_form(ClosedForm::TwoPlanes, 2).expect("two planes"));
    println!("criterion 3: PASS — block-size-2 designs give 2/k² − 1/k³ for k = s ∈ 2..=14, s=2 → 3/8");
}

#[test]
fn criterion_04_odd_scheme_values() {
    let start = Instant::now();
    for k in [3u32, 5, 7, 9] {
        let sch = scheme_odd(k).expect("odd scheme");
        let expected = rat(2, (k as i64) * (k as i64 + 1));
        assert_eq!(disjoint_q(&sch), expected, "k={k}");
    }
    assert_budget(start.elapsed(), Duration::from_secs(2), "criterion 4");
    println!("criterion 4: PASS — odd schemes give 2/(k(k+1)) for k ∈ {{3,5,7,9}}");
}

#[test]
fn criterion_05_bipartite_values() {
    let start = Instant::now();
    for k in 1..=8u32 {
        let sch = scheme_bipartite(k);
        assert_eq!(disjoint_q(&sch), rat(1, (k as i64) * (k as i64)), "k={k}");
    }
    assert_budget(start.elapsed(), Duration::from_secs(1), "criterion 5");
    println!("criterion 5: PASS — bipartite schemes give 1/k² for k ∈ 1..=8");
}

#[test]
fn criterion_06_triangle_matching_value_and_k3_gap() {
    let start = Instant::now();
    let decomposition = nkts18();
    assert!(verify_design(&decomposition).is_valid(), "18-point decomposition invalid");
    let k = decomposition.k() as i64;
    assert_eq!(k, 9);
    let sch = scheme_triangle_matching(&decomposition).expect("scheme");
    let expected = rat(3 * k - 1, 2 * k * k * k);
    assert_eq!(disjoint_q(&sch), expected, "k={k}");

    match triangle_matching_search(6, 50_000_000) {
        SearchOutcome::Infeasible { nodes } => {
            assert!(nodes > 0, "infeasibility must come from exhaustion, not arithmetic");
        }
        other => panic!("6-point search should exhaust as infeasible, got {other:?}"),
    }
    assert_budget(start.elapsed(), Duration::from_secs(10), "criterion 6");
    println!(
        "criterion 6: PASS — 18-point triangle+matching scheme gives (3k−1)/(2k³); \
         6-point decomposition proven nonexistent by exhaustion"
    );
}

#[test]
fn criterion_07_table_regression() {
    let rows = bounds_table(3, 10).expect("table");
    let expected: [(u32, Rational, Rational); 8] = [
        (3, rat(5, 27), rat(1, 6)),
        (4, rat(7, 64), rat(235, 2401)),
        (5, rat(9, 125), rat(1, 15)),
        (6, rat(11, 216), rat(17, 432)),
        (7, rat(13, 343), rat(1, 28)),
        (8, rat(15, 512), rat(85, 3375)),
        (9, rat(17, 729), rat(13, 729)),
        (10, rat(19, 1000), rat(325, 21952)),
    ];
    assert_eq!(rows.len(), expected.len());
    for (row, (k, old, new)) in rows.iter().zip(&expected) {
        assert_eq!(row.k, *k);
        assert_eq!(&row.old_bound, old, "k={k} old bound");
        assert_eq!(&row.new_bound, new, "k={k} new bound");
    }
    let k7 = &rows[4];
    assert_eq!(render_4dp(&k7.lower_bound), "0.0204", "k=7 lower bound rendering");
    assert!(
        k7.notes.iter().any(|n| n.contains("0.0204") && n.contains("0.2040")),
        "k=7 notes must flag the transposed-digits figure: {:?}",
        k7.notes
    );
    println!("criterion 7: PASS — bounds table k=3..10 matches; k=7 renders 0.0204 and flags 0.2040");
}

// Shared helpers for the split-procedure criteria.

fn check_split_invariants(
    d: &RectilinearDrawing<Coord>,
    crossings: &CrossingSet,
    sch: &Scheme,
    r: &SplitResult,
) {
    // Plane edge-lists partition E(G).
    let mut seen: BTreeSet<(u32, u32)> = BTreeSet::new();
    assert_eq!(r.plane_edges.len(), sch.plane_count() as usize);
    for edges in &r.plane_edges {
        for &e in edges {
            assert!(seen.insert(e), "edge {e:?} assigned twice");
        }
    }
    assert_eq!(
        seen,
        d.graph().edges().iter().copied().collect::<BTreeSet<_>>(),
        "plane lists must partition the edge set"
    );

    // Surviving ⊆ input crossings.
    let input: BTreeSet<_> = crossings.pairs().iter().map(|p| (p.e1, p.e2)).collect();
    for s in &r.surviving {
        assert!(input.contains(&(s.e1, s.e2)), "surviving pair not an input crossing");
    }

    // Layout recount equals surviving sets exactly (layout_planes verifies
    // set equality internally; re-verify the counts independently here).
    let layouts = layout_planes(d, r).expect("layout with recount certificate");
    let per_plane = r.per_plane_surviving();
    for layout in &layouts {
        let recount = crossings_of(&layout.drawing).expect("recount");
        assert_eq!(
            recount.count(),
            per_plane[layout.plane as usize].len(),
            "plane {} recount",
            layout.plane + 1
        );
    }
}

#[test]
fn criterion_08_split_invariant_suite() {
    let unipartite: Vec<(String, Scheme)> = vec![
        ("seven-label".into(), scheme_k7()),
        ("odd k=3".into(), scheme_odd(3).expect("odd scheme")),
        (
            "design s=9 l=3".into(),
            scheme_from_design(&affine_resolvable_design(3).expect("design")).expect("scheme"),
        ),
    ];
    let bipartite: Vec<(String, Scheme)> =
        vec![("bipartite k=2".into(), scheme_bipartite(2)), ("bipartite k=3".into(), scheme_bipartite(3))];

    let convex: Vec<(RectilinearDrawing<Coord>, CrossingSet)> = (4..=10)
        .map(|n| {
            let d = convex_complete_drawing(n);
            let c = crossings_of(&d).expect("crossings");
            (d, c)
        })
        .collect();
    let two_line: Vec<(RectilinearDrawing<Coord>, CrossingSet)> = (1..=6)
        .flat_map(|m| (1..=6).map(move |n| (m, n)))
        .map(|(m, n)| {
            let d = two_line_bipartite_drawing(m, n);
            let c = crossings_of(&d).expect("crossings");
            (d, c)
        })
        .collect();

    let trials_per_scheme = 1000u64;
    for (name, sch) in &unipartite {
        for t in 0..trials_per_scheme {
            let (d, c) = &convex[(t % convex.len() as u64) as usize];
            let seed = derive_seed(0xACCE57, t);
            let lab = sample_labeling(sch, d.graph(), seed).expect("labeling");
            let r = split(Instance::new(d.graph(), c), sch, &lab).expect("split");
            check_split_invariants(d, c, sch, &r);
        }
        println!("criterion 8: scheme {name}: {trials_per_scheme} trials hold");
    }
    for (name, sch) in &bipartite {
        for t in 0..trials_per_scheme {
            let (d, c) = &two_line[(t % two_line.len() as u64) as usize];
            let seed = derive_seed(0xB1BA, t);
            let lab = sample_labeling(sch, d.graph(), seed).expect("labeling");
            let r = split(Instance::new(d.graph(), c), sch, &lab).expect("split");
            check_split_invariants(d, c, sch, &r);
        }
        println!("criterion 8: scheme {name}: {trials_per_scheme} trials hold");
    }
    println!(
        "criterion 8: PASS — partition, surviving-subset and layout-recount invariants hold \
         for {} schemes × {trials_per_scheme} seeded trials",
        unipartite.len() + bipartite.len()
    );
}

#[test]
fn criterion_09_expectation_statistical_match() {
    let start = Instant::now();
    let d = convex_complete_drawing(8);
    let c = crossings_of(&d).expect("crossings");
    let inst = Instance::new(d.graph(), &c);
    let sch = scheme_k7();
    let expected = rat(2350, 343).to_f64().expect("finite");
    let mc = monte_carlo(inst, &sch, 100_000, 0xE8).expect("trials");
    let diff = (mc.mean_f64() - expected).abs();
    let limit = 4.0 * mc.std_error();
    assert!(
        diff <= limit,
        "sample mean {} vs 2350/343 = {expected}: |diff| {diff} > 4·SE {limit}",
        mc.mean_f64()
    );
    assert_budget(start.elapsed(), Duration::from_secs(30), "criterion 9");
    println!(
        "criterion 9: PASS — 10⁵-trial mean {:.4} within 4 standard errors ({:.4}) of 6.8513",
        mc.mean_f64(),
        limit
    );
}

#[test]
fn criterion_10_witness_production() {
    let d = convex_complete_drawing(8);
    let c = crossings_of(&d).expect("crossings");
    let inst = Instance::new(d.graph(), &c);
    let sch = scheme_k7();

    let mut best = best_of(inst, &sch, 10_000, 0xBE57).expect("trials");
    if best.surviving_count() > 6 {
        // Statistical criterion: one rerun at 10× trials before a defect.
        best = best_of(inst, &sch, 100_000, 0xBE57).expect("retry trials");
    }
    assert!(
        best.surviving_count() <= 6,
        "no split with ≤ 6 surviving crossings found even at 10× trials"
    );
    let seed = best.seed.expect("sampled split records its seed");
    let lab = sample_labeling(&sch, d.graph(), seed).expect("replay labeling");
    let replay = split(inst, &sch, &lab).expect("replay split");
    assert_eq!(replay, best, "reported seed must reproduce the witness");
    println!(
        "criterion 10: PASS — best-of split leaves {} ≤ 6 crossings, reproduced from seed {seed}",
        best.surviving_count()
    );
}

#[test]
fn criterion_11_rectilinear_closure() {
    let cases: Vec<(&str, RectilinearDrawing<Coord>, Scheme)> = vec![
        ("convex K8 / seven-label", convex_complete_drawing(8), scheme_k7()),
        (
            "convex K9 / 15-point triple design",
            convex_complete_drawing(9),
            scheme_from_design(&kts15()).expect("scheme"),
        ),
        ("two-line K6,6 / bipartite k=3", two_line_bipartite_drawing(6, 6), scheme_bipartite(3)),
    ];
    let mut layouts_checked = 0usize;
    for (name, d, sch) in &cases {
        let c = crossings_of(d).expect("crossings");
        let inst = Instance::new(d.graph(), &c);
        for t in 0..10u64 {
            let lab = sample_labeling(sch, d.graph(), derive_seed(0x11, t)).expect("labeling");
            let r = split(inst, sch, &lab).expect("split");
            let layouts = layout_planes(d, &r).expect("certified layout");
            let recount_total: usize = layouts
                .iter()
                .map(|l| crossings_of(&l.drawing).expect("recount").count())
                .sum();
            assert_eq!(recount_total, r.surviving_count(), "{name}, trial {t}");
            layouts_checked += layouts.len();
        }
    }
    println!(
        "criterion 11: PASS — {layouts_checked} straight-line plane drawings recount to their \
         certified surviving totals"
    );
}
