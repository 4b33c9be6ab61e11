//! Randomized edge distribution over the planes of a typed partition scheme.
//!
//! Given a graph drawn with some set of pairwise edge crossings, the split
//! procedure samples one scheme label per vertex (uniformly, sides respected
//! for bipartite schemes), maps every graph edge to the base edge between its
//! endpoint labels, and places it on a plane carrying that base edge —
//! resolving multi-plane base edges by an extra uniform draw.  A crossing
//! *survives* when its two edges land on the same plane **and** in the same
//! type (connected component of that plane's base subgraph); all other
//! crossings can be removed by translating the drawing of each type far from
//! the others, which is exactly what [`layout_planes`] does.
//!
//! The module offers four levels of machinery on top of [`split`] itself:
//!
//! * [`sample_labeling`] — the seeded random draw, with a documented stream
//!   order so results are reproducible across runs and platforms;
//! * [`expected_crossings`] — the exact expectation `Σ q(pattern)` over the
//!   input crossing pairs, computed with rational arithmetic;
//! * [`monte_carlo`] / [`best_of`] — repeated trials under derived seeds,
//!   reporting the empirical distribution or keeping the best outcome;
//! * [`layout_planes`] — per-plane straight-line drawings in which the
//!   surviving crossings are the *only* crossings, certified by recounting.
//!
//! # Random stream order
//!
//! For a given seed, [`sample_labeling`] consumes the stream in this fixed
//! order: one bounded draw per vertex in increasing vertex order (label
//! ranges `1..=s` for unipartite schemes; `1..=a` / `a+1..=a+b` by side for
//! bipartite ones), then one bounded draw per *multi-plane* edge in the
//! graph's sorted edge order, choosing uniformly among the planes carrying
//! that edge's base edge.  Single-plane edges consume nothing.  Trial `i` of
//! [`monte_carlo`] and [`best_of`] uses `derive_seed(master_seed, i)`, so
//! individual trials can be replayed in isolation.

use std::collections::BTreeMap;

use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

use crate::drawing::{
    crossings_of, AbstractDrawing, CrossingPair, CrossingSet, Graph, RectilinearDrawing,
};
use crate::probability::{exact_q, PairPattern, ProbabilityError};
use crate::rng::{derive_seed, Stream};
use crate::schemes::{validate_scheme, BaseEdge, BaseLabelSet, Scheme, Side, TypeId};
use crate::{Coord, Rational};

/// Errors from sampling, splitting, and laying out.
#[derive(Debug, Error)]
pub enum SplitError {
    /// The scheme fails its own invariants; the message lists violations.
    #[error("invalid scheme: {0}")]
    InvalidScheme(String),
    /// A bipartite scheme needs a graph with a declared bipartition.
    #[error("bipartite scheme requires a graph with a declared bipartition")]
    MissingBipartition,
    /// An edge's endpoint labels form a base edge that no plane carries.
    #[error(
        "edge {{{eu},{ev}}} with labels ({lu},{lv}) maps to base edge {base}, \
         which no plane carries"
    )]
    EdgeMapsToMissingBaseEdge { eu: u32, ev: u32, lu: u32, lv: u32, base: BaseEdge },
    /// A labeling does not fit the scheme/graph pair it is applied to.
    #[error("inconsistent labeling: {0}")]
    InconsistentLabeling(String),
    /// Inputs that must describe the same graph/drawing do not.
    #[error("mismatched inputs: {0}")]
    MismatchedInput(String),
    /// A per-plane layout failed its own crossing recount.
    #[error("layout failed its recount check: {0}")]
    DegenerateAfterLayout(String),
    /// Underlying exact-probability failure.
    #[error(transparent)]
    Probability(#[from] ProbabilityError),
}

fn check_scheme(sch: &Scheme) -> Result<(), SplitError> {
    let report = validate_scheme(sch);
    if report.is_valid() {
        Ok(())
    } else {
        Err(SplitError::InvalidScheme(report.to_string()))
    }
}

// ---------------------------------------------------------------------------
// instances
// ---------------------------------------------------------------------------

/// A graph together with the crossing pairs of some drawing of it — the
/// combinatorial input the split procedure needs.  Borrow from a
/// [`RectilinearDrawing`] via [`Instance::from_rectilinear`]'s companion
/// pattern (compute [`crossings_of`] once, then borrow both), or from an
/// [`AbstractDrawing`] directly.
#[derive(Debug, Clone, Copy)]
pub struct Instance<'a> {
    graph: &'a Graph,
    crossings: &'a CrossingSet,
}

impl<'a> Instance<'a> {
    pub fn new(graph: &'a Graph, crossings: &'a CrossingSet) -> Instance<'a> {
        Instance { graph, crossings }
    }

    pub fn from_abstract(d: &'a AbstractDrawing) -> Instance<'a> {
        Instance { graph: d.graph(), crossings: d.crossings() }
    }

    pub fn graph(&self) -> &'a Graph {
        self.graph
    }

    pub fn crossings(&self) -> &'a CrossingSet {
        self.crossings
    }
}

// ---------------------------------------------------------------------------
// labelings
// ---------------------------------------------------------------------------

/// One outcome of the random draw: a label per vertex plus, for every edge
/// whose base edge lives on several planes, the plane chosen for it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Labeling {
    seed: Option<u64>,
    labels: Vec<u32>,
    resolved: BTreeMap<(u32, u32), u16>,
}

impl Labeling {
    /// Wrap an explicit (non-sampled) labeling.  `labels[i]` is the label of
    /// vertex `i+1`; `resolved` must name a plane for exactly the edges that
    /// need one.  Fit against a concrete scheme/graph pair is checked by
    /// [`split`], not here.
    pub fn new(labels: Vec<u32>, resolved: BTreeMap<(u32, u32), u16>) -> Labeling {
        Labeling { seed: None, labels, resolved }
    }

    /// The seed this labeling was sampled from, if it was sampled.
    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    /// Label of vertex `v` (vertices are numbered from 1).
    pub fn label_of(&self, v: u32) -> u32 {
        self.labels[v as usize - 1]
    }

    /// Chosen plane per multi-plane edge, keyed by normalized edge.
    pub fn resolved(&self) -> &BTreeMap<(u32, u32), u16> {
        &self.resolved
    }
}

/// Sample a uniform labeling of `graph`'s vertices (and uniform plane choices
/// for multi-plane edges) from the deterministic stream seeded by `seed`.
///
/// See the module docs for the exact stream order.
pub fn sample_labeling(sch: &Scheme, graph: &Graph, seed: u64) -> Result<Labeling, SplitError> {
    check_scheme(sch)?;
    let label_set = sch.labels();
    if matches!(label_set, BaseLabelSet::Bipartite { .. }) && !graph.is_bipartite() {
        return Err(SplitError::MissingBipartition);
    }

    let mut stream = Stream::new(seed);
    let n = graph.vertex_count();
    let mut labels = Vec::with_capacity(n as usize);
    for v in 1..=n {
        let label = match label_set {
            BaseLabelSet::Unipartite { s } => 1 + stream.next_below(s as u64) as u32,
            BaseLabelSet::Bipartite { a, b } => match graph.side_of(v) {
                Some(Side::A) => 1 + stream.next_below(a as u64) as u32,
                Some(Side::B) => a + 1 + stream.next_below(b as u64) as u32,
                None => unreachable!("bipartition checked above"),
            },
        };
        labels.push(label);
    }

    let mut resolved = BTreeMap::new();
    for &(u, v) in graph.edges() {
        let base = BaseEdge::new(labels[u as usize - 1], labels[v as usize - 1]);
        let dist = sch.distribution(base);
        match dist.len() {
            0 => {
                return Err(SplitError::EdgeMapsToMissingBaseEdge {
                    eu: u,
                    ev: v,
                    lu: labels[u as usize - 1],
                    lv: labels[v as usize - 1],
                    base,
                });
            }
            1 => {}
            m => {
                // Valid schemes distribute an edge uniformly, so a uniform
                // index draw is a uniform plane draw.
                let pick = stream.next_below(m as u64) as usize;
                resolved.insert((u, v), dist[pick].0);
            }
        }
    }

    Ok(Labeling { seed: Some(seed), labels, resolved })
}

// ---------------------------------------------------------------------------
// the split itself
// ---------------------------------------------------------------------------

/// Outcome of one split: the plane of every edge, the type of every edge,
/// and which input crossings survive (same plane, same type).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitResult {
    /// Seed of the sampled labeling, when there was one.
    pub seed: Option<u64>,
    /// Scheme identifier, as produced by [`Scheme::summary`].
    pub scheme: String,
    /// Edges assigned to each plane, indexed by plane, each list sorted.
    pub plane_edges: Vec<Vec<(u32, u32)>>,
    /// Type assigned to every edge, keyed by normalized edge.
    pub edge_types: BTreeMap<(u32, u32), TypeId>,
    /// Input crossing pairs whose edges share plane and type.
    pub surviving: Vec<CrossingPair>,
}

impl SplitResult {
    pub fn surviving_count(&self) -> usize {
        self.surviving.len()
    }

    /// Plane of an edge (either endpoint order), if the edge was assigned.
    pub fn plane_of(&self, u: u32, v: u32) -> Option<u16> {
        let key = if u <= v { (u, v) } else { (v, u) };
        self.edge_types.get(&key).map(|t| t.plane)
    }

    /// Surviving crossings grouped by plane (all planes present, empty or
    /// not), for per-plane reporting and the layout recount.
    pub fn per_plane_surviving(&self) -> Vec<Vec<CrossingPair>> {
        let mut out = vec![Vec::new(); self.plane_edges.len()];
        for pair in &self.surviving {
            let t = self.edge_types[&pair.e1];
            out[t.plane as usize].push(*pair);
        }
        out
    }
}

/// Apply a labeling to an instance: place every edge on a plane, assign its
/// type, and collect the surviving crossings.
///
/// The labeling is checked in full against the scheme/graph pair: label
/// count and ranges (sides respected for bipartite schemes), a resolved
/// plane for exactly the multi-plane edges, and each resolved plane actually
/// carrying the edge's base edge.
pub fn split(inst: Instance<'_>, sch: &Scheme, lab: &Labeling) -> Result<SplitResult, SplitError> {
    check_scheme(sch)?;
    let label_set = sch.labels();
    let graph = inst.graph;
    if matches!(label_set, BaseLabelSet::Bipartite { .. }) && !graph.is_bipartite() {
        return Err(SplitError::MissingBipartition);
    }

    let n = graph.vertex_count();
    if lab.labels.len() != n as usize {
        return Err(SplitError::InconsistentLabeling(format!(
            "labeling covers {} vertices, graph has {n}",
            lab.labels.len()
        )));
    }
    for v in 1..=n {
        let range = label_set.side_labels(match label_set {
            BaseLabelSet::Unipartite { .. } => None,
            BaseLabelSet::Bipartite { .. } => graph.side_of(v),
        });
        let l = lab.label_of(v);
        if !range.contains(&l) {
            return Err(SplitError::InconsistentLabeling(format!(
                "vertex {v} has label {l}, expected one of {}..={}",
                range.start(),
                range.end()
            )));
        }
    }

    let mut plane_edges = vec![Vec::new(); sch.plane_count() as usize];
    let mut edge_types = BTreeMap::new();
    let mut resolutions_used = 0usize;
    for &(u, v) in graph.edges() {
        let (lu, lv) = (lab.label_of(u), lab.label_of(v));
        let base = BaseEdge::new(lu, lv);
        let dist = sch.distribution(base);
        let plane = match dist.len() {
            0 => {
                return Err(SplitError::EdgeMapsToMissingBaseEdge { eu: u, ev: v, lu, lv, base });
            }
            1 => dist[0].0,
            _ => {
                let p = *lab.resolved.get(&(u, v)).ok_or_else(|| {
                    SplitError::InconsistentLabeling(format!(
                        "multi-plane edge {{{u},{v}}} (base edge {base}) has no resolved plane"
                    ))
                })?;
                if !dist.iter().any(|&(q, _)| q == p) {
                    return Err(SplitError::InconsistentLabeling(format!(
                        "edge {{{u},{v}}} resolved to plane {}, but base edge {base} is not \
                         carried there",
                        p + 1
                    )));
                }
                resolutions_used += 1;
                p
            }
        };
        let ty = sch
            .type_of(plane, base)
            .expect("a carried base edge always has a type on its plane");
        plane_edges[plane as usize].push((u, v));
        edge_types.insert((u, v), ty);
    }
    if resolutions_used != lab.resolved.len() {
        return Err(SplitError::InconsistentLabeling(format!(
            "labeling resolves {} edges, but the graph has {resolutions_used} multi-plane edges",
            lab.resolved.len()
        )));
    }

    let mut surviving = Vec::new();
    for pair in inst.crossings.pairs() {
        let (t1, t2) = match (edge_types.get(&pair.e1), edge_types.get(&pair.e2)) {
            (Some(t1), Some(t2)) => (t1, t2),
            _ => {
                return Err(SplitError::MismatchedInput(format!(
                    "crossing pair {:?} × {:?} references an edge missing from the graph",
                    pair.e1, pair.e2
                )));
            }
        };
        if t1 == t2 {
            surviving.push(*pair);
        }
    }

    Ok(SplitResult {
        seed: lab.seed,
        scheme: sch.summary(),
        plane_edges,
        edge_types,
        surviving,
    })
}

// ---------------------------------------------------------------------------
// exact expectation
// ---------------------------------------------------------------------------

/// Exact expected number of surviving crossings under a uniform random
/// labeling: the sum over input crossing pairs of the survival probability
/// for that pair's endpoint pattern.
///
/// For unipartite schemes the side annotation of a shared endpoint is
/// irrelevant and is dropped before the probability lookup.
pub fn expected_crossings(inst: Instance<'_>, sch: &Scheme) -> Result<Rational, SplitError> {
    check_scheme(sch)?;
    let unipartite = matches!(sch.labels(), BaseLabelSet::Unipartite { .. });
    if !unipartite && !inst.graph.is_bipartite() {
        return Err(SplitError::MissingBipartition);
    }

    let mut memo: BTreeMap<PairPattern, Rational> = BTreeMap::new();
    let mut sum = Rational::zero();
    for pair in inst.crossings.pairs() {
        let mut pattern = pair.pattern;
        if unipartite {
            if let PairPattern::SharedOne(Some(_)) = pattern {
                pattern = PairPattern::SharedOne(None);
            }
        }
        if let Some(q) = memo.get(&pattern) {
            sum += q.clone();
        } else {
            let q = exact_q(sch, pattern)?.value;
            sum += q.clone();
            memo.insert(pattern, q);
        }
    }
    Ok(sum)
}

// ---------------------------------------------------------------------------
// repeated trials
// ---------------------------------------------------------------------------

/// Empirical statistics over repeated seeded splits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonteCarlo {
    pub master_seed: u64,
    pub trials: u64,
    /// Exact sample mean of the surviving-crossing counts.
    pub mean: Rational,
    /// Unbiased sample variance (denominator `trials − 1`; zero for a single
    /// trial).
    pub variance: Rational,
    /// Smallest observed count, with the seed and index of the first trial
    /// attaining it.
    pub min: u64,
    pub min_seed: u64,
    pub min_trial: u64,
    /// Count of trials per observed surviving-crossing count.
    pub histogram: BTreeMap<u64, u64>,
}

impl MonteCarlo {
    pub fn mean_f64(&self) -> f64 {
        self.mean.to_f64().unwrap_or(f64::NAN)
    }

    /// Standard error of the mean, `√(variance / trials)`.
    pub fn std_error(&self) -> f64 {
        let v = self.variance.to_f64().unwrap_or(f64::NAN);
        (v / self.trials as f64).sqrt()
    }
}

/// Run `trials` independent splits under seeds `derive_seed(master_seed, i)`
/// for `i = 0..trials` and aggregate the surviving-crossing counts.
///
/// `trials` must be at least 1.
pub fn monte_carlo(
    inst: Instance<'_>,
    sch: &Scheme,
    trials: u64,
    master_seed: u64,
) -> Result<MonteCarlo, SplitError> {
    assert!(trials >= 1, "monte_carlo needs at least one trial");
    let mut sum: u128 = 0;
    let mut sum_sq: u128 = 0;
    let mut min = u64::MAX;
    let mut min_seed = 0;
    let mut min_trial = 0;
    let mut histogram = BTreeMap::new();
    for i in 0..trials {
        let seed = derive_seed(master_seed, i);
        let lab = sample_labeling(sch, inst.graph, seed)?;
        let result = split(inst, sch, &lab)?;
        let c = result.surviving_count() as u64;
        sum += c as u128;
        sum_sq += (c as u128) * (c as u128);
        *histogram.entry(c).or_insert(0) += 1;
        if c < min {
            min = c;
            min_seed = seed;
            min_trial = i;
        }
    }
    let n = trials as u128;
    let mean = Rational::new(sum.into(), n.into());
    let variance = if trials == 1 {
        Rational::zero()
    } else {
        // (n·Σc² − (Σc)²) / (n(n−1)), exactly.
        let num: Rational = Rational::from_integer((n * sum_sq).into())
            - Rational::from_integer(sum.into()) * Rational::from_integer(sum.into());
        num / Rational::from_integer((n * (n - 1)).into())
    };
    Ok(MonteCarlo { master_seed, trials, mean, variance, min, min_seed, min_trial, histogram })
}

/// Run `trials` independent splits under seeds `derive_seed(master_seed, i)`
/// and return the full result of the best one — fewest surviving crossings,
/// ties broken toward the lowest trial index.
///
/// `trials` must be at least 1.
pub fn best_of(
    inst: Instance<'_>,
    sch: &Scheme,
    trials: u64,
    master_seed: u64,
) -> Result<SplitResult, SplitError> {
    assert!(trials >= 1, "best_of needs at least one trial");
    let mut best: Option<SplitResult> = None;
    for i in 0..trials {
        let seed = derive_seed(master_seed, i);
        let lab = sample_labeling(sch, inst.graph, seed)?;
        let result = split(inst, sch, &lab)?;
        match &best {
            Some(b) if result.surviving_count() >= b.surviving_count() => {}
            _ => best = Some(result),
        }
    }
    Ok(best.expect("at least one trial ran"))
}

// ---------------------------------------------------------------------------
// per-plane layout
// ---------------------------------------------------------------------------

/// A straight-line drawing of the edges one plane received.  Vertices are
/// renumbered compactly (isolated originals are dropped); `vertex_map[i]` is
/// the original id of compact vertex `i+1`.
#[derive(Debug, Clone)]
pub struct PlaneLayout {
    pub plane: u16,
    pub drawing: RectilinearDrawing<Coord>,
    pub vertex_map: Vec<u32>,
}

impl PlaneLayout {
    /// Original id of a compact vertex.
    pub fn original_id(&self, compact: u32) -> u32 {
        self.vertex_map[compact as usize - 1]
    }
}

/// Build one straight-line drawing per plane from a split of a rectilinear
/// drawing, translating each type's vertices horizontally so that distinct
/// types occupy disjoint x-ranges.  Within a type the original geometry is
/// preserved, so same-type crossings persist; across types all crossings
/// disappear.  Each plane is recounted with [`crossings_of`] and compared —
/// as a set of edge pairs — against the split's surviving crossings for that
/// plane; any discrepancy is an error, so a returned layout is certified.
pub fn layout_planes(
    d: &RectilinearDrawing<Coord>,
    r: &SplitResult,
) -> Result<Vec<PlaneLayout>, SplitError> {
    let graph = d.graph();
    if r.edge_types.len() != graph.edges().len()
        || !r.edge_types.keys().all(|&(u, v)| graph.has_edge(u, v))
    {
        return Err(SplitError::MismatchedInput(
            "split result does not assign exactly this drawing's edges".into(),
        ));
    }

    let per_plane_surviving = r.per_plane_surviving();
    let mut out = Vec::with_capacity(r.plane_edges.len());
    for (plane_idx, edges) in r.plane_edges.iter().enumerate() {
        let plane = plane_idx as u16;

        // Group this plane's vertices by the type of their incident edges.
        // Every edge at a vertex shares that vertex's label, so all incident
        // edges on one plane lie in one component: the type per vertex is
        // well-defined. Verified while grouping.
        let mut type_of_vertex: BTreeMap<u32, TypeId> = BTreeMap::new();
        for &(u, v) in edges {
            let t = r.edge_types[&(u, v)];
            for w in [u, v] {
                if let Some(prev) = type_of_vertex.insert(w, t) {
                    if prev != t {
                        return Err(SplitError::MismatchedInput(format!(
                            "vertex {w} touches two types on plane {}: edge types are \
                             inconsistent with a scheme assignment",
                            plane + 1
                        )));
                    }
                }
            }
        }
        let mut classes: BTreeMap<TypeId, Vec<u32>> = BTreeMap::new();
        for (&v, &t) in &type_of_vertex {
            classes.entry(t).or_default().push(v);
        }

        // Translate each class to its own x-range, types in TypeId order,
        // unit gap between consecutive bounding boxes. y is untouched.
        let mut new_coords: BTreeMap<u32, (Coord, Coord)> = BTreeMap::new();
        let mut cursor = Coord::zero();
        for (_, members) in &classes {
            let min_x = members.iter().map(|&v| &d.point(v).x).min().unwrap().clone();
            let max_x = members.iter().map(|&v| &d.point(v).x).max().unwrap().clone();
            let offset = cursor.clone() - min_x.clone();
            for &v in members {
                let p = d.point(v);
                new_coords.insert(v, (p.x.clone() + offset.clone(), p.y.clone()));
            }
            cursor = cursor + (max_x - min_x) + Coord::one();
        }

        // Compact renumbering: plane vertices in increasing original order.
        let vertex_map: Vec<u32> = type_of_vertex.keys().copied().collect();
        let compact_of: BTreeMap<u32, u32> =
            vertex_map.iter().enumerate().map(|(i, &v)| (v, i as u32 + 1)).collect();
        let compact_edges: Vec<(u32, u32)> =
            edges.iter().map(|&(u, v)| (compact_of[&u], compact_of[&v])).collect();
        let compact_graph = Graph::new(vertex_map.len() as u32, compact_edges)
            .map_err(|e| SplitError::DegenerateAfterLayout(e.to_string()))?;
        let coords = vertex_map
            .iter()
            .map(|v| {
                let (x, y) = new_coords[v].clone();
                crate::drawing::Point { x, y }
            })
            .collect();
        let drawing = RectilinearDrawing::new(compact_graph, coords)
            .map_err(|e| SplitError::DegenerateAfterLayout(e.to_string()))?;

        // Recount and compare, as sets of original-id edge pairs.
        let recounted = crossings_of(&drawing)
            .map_err(|e| SplitError::DegenerateAfterLayout(e.to_string()))?;
        let back = |(u, v): (u32, u32)| {
            let (a, b) = (vertex_map[u as usize - 1], vertex_map[v as usize - 1]);
            if a <= b {
                (a, b)
            } else {
                (b, a)
            }
        };
        let mut recounted_pairs: Vec<((u32, u32), (u32, u32))> = recounted
            .pairs()
            .iter()
            .map(|p| {
                let (e1, e2) = (back(p.e1), back(p.e2));
                if e1 <= e2 {
                    (e1, e2)
                } else {
                    (e2, e1)
                }
            })
            .collect();
        recounted_pairs.sort_unstable();
        let mut expected_pairs: Vec<((u32, u32), (u32, u32))> =
            per_plane_surviving[plane_idx].iter().map(|p| (p.e1, p.e2)).collect();
        expected_pairs.sort_unstable();
        if recounted_pairs != expected_pairs {
            return Err(SplitError::DegenerateAfterLayout(format!(
                "plane {}: recounted {} crossings, surviving set has {}; the sets differ",
                plane + 1,
                recounted_pairs.len(),
                expected_pairs.len()
            )));
        }

        out.push(PlaneLayout { plane, drawing, vertex_map });
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// tests
// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use std::collections::BTreeSet;

    use super::*;
    use crate::designs::{affine_resolvable_design, kts15};
    use crate::drawing::{convex_complete_drawing, two_line_bipartite_drawing};
    use crate::probability::closed_form;
    use crate::probability::ClosedForm;
    use crate::schemes::{scheme_bipartite, scheme_from_design, scheme_k7, scheme_odd};

    fn convex_instance(n: u32) -> (RectilinearDrawing<Coord>, CrossingSet) {
        let d = convex_complete_drawing(n);
        let c = crossings_of(&d).unwrap();
        (d, c)
    }

    fn two_line_instance(m: u32, n: u32) -> (RectilinearDrawing<Coord>, CrossingSet) {
        let d = two_line_bipartite_drawing(m, n);
        let c = crossings_of(&d).unwrap();
        (d, c)
    }

    #[test]
    fn sampling_is_deterministic_per_seed() {
        let sch = scheme_k7();
        let (d, _) = convex_instance(6);
        let a = sample_labeling(&sch, d.graph(), 42).unwrap();
        let b = sample_labeling(&sch, d.graph(), 42).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.seed(), Some(42));
        let c = sample_labeling(&sch, d.graph(), 43).unwrap();
        assert_ne!(a, c, "distinct seeds should produce distinct draws here");
    }

    #[test]
    fn sampled_labels_stay_in_range_and_respect_sides() {
        let sch = scheme_bipartite(3);
        let (d, _) = two_line_instance(3, 4);
        for seed in 0..200 {
            let lab = sample_labeling(&sch, d.graph(), seed).unwrap();
            for v in 1..=3 {
                assert!((1..=3).contains(&lab.label_of(v)), "A-side label out of range");
            }
            for v in 4..=7 {
                assert!((4..=6).contains(&lab.label_of(v)), "B-side label out of range");
            }
            assert!(lab.resolved().is_empty(), "bipartite schemes have single-plane edges");
        }
    }

    #[test]
    fn bipartite_scheme_rejects_unipartitioned_graph() {
        let sch = scheme_bipartite(2);
        let (d, c) = convex_instance(4);
        assert!(matches!(
            sample_labeling(&sch, d.graph(), 0),
            Err(SplitError::MissingBipartition)
        ));
        let inst = Instance::new(d.graph(), &c);
        assert!(matches!(
            expected_crossings(inst, &sch),
            Err(SplitError::MissingBipartition)
        ));
    }

    #[test]
    fn sampled_label_frequencies_are_uniform() {
        // Label of vertex 1 across 20 000 derived seeds: each of the 7
        // labels should appear within 4σ of the uniform expectation.
        let sch = scheme_k7();
        let (d, _) = convex_instance(4);
        let trials = 20_000u64;
        let mut counts = [0u64; 7];
        for i in 0..trials {
            let lab = sample_labeling(&sch, d.graph(), derive_seed(99, i)).unwrap();
            counts[lab.label_of(1) as usize - 1] += 1;
        }
        let p = 1.0 / 7.0;
        let mean = trials as f64 * p;
        let sigma = (trials as f64 * p * (1.0 - p)).sqrt();
        for (l, &c) in counts.iter().enumerate() {
            assert!(
                (c as f64 - mean).abs() <= 4.0 * sigma,
                "label {} count {c} outside 4σ of {mean:.1}",
                l + 1
            );
        }
    }

    #[test]
    fn multi_plane_resolutions_cover_loop_planes_uniformly() {
        // Odd scheme: loops live on every plane with weight 1/k. Force both
        // endpoints of an edge to share a label and watch the chosen plane.
        let sch = scheme_odd(3).unwrap();
        let g = Graph::new(2, vec![(1, 2)]).unwrap();
        let mut counts = [0u64; 3];
        let mut used = 0u64;
        for i in 0..30_000u64 {
            let lab = sample_labeling(&sch, &g, derive_seed(7, i)).unwrap();
            if lab.label_of(1) == lab.label_of(2) {
                used += 1;
                counts[lab.resolved()[&(1, 2)] as usize] += 1;
            }
        }
        assert!(used > 5_000, "loop case should occur about a quarter of the time");
        let mean = used as f64 / 3.0;
        let sigma = (used as f64 * (1.0 / 3.0) * (2.0 / 3.0)).sqrt();
        for &c in &counts {
            assert!((c as f64 - mean).abs() <= 4.0 * sigma, "plane counts {counts:?}");
        }
    }

    #[test]
    fn split_partitions_edges_and_surviving_is_a_subset() {
        let sch = scheme_k7();
        let (d, c) = convex_instance(6);
        let inst = Instance::new(d.graph(), &c);
        for seed in 0..50 {
            let lab = sample_labeling(&sch, d.graph(), seed).unwrap();
            let r = split(inst, &sch, &lab).unwrap();
            let mut seen: BTreeSet<(u32, u32)> = BTreeSet::new();
            for (p, edges) in r.plane_edges.iter().enumerate() {
                for &e in edges {
                    assert!(seen.insert(e), "edge {e:?} on two planes");
                    assert_eq!(r.edge_types[&e].plane as usize, p);
                }
            }
            assert_eq!(seen.len(), d.graph().edges().len(), "every edge placed exactly once");
            let input: BTreeSet<_> = c.pairs().iter().map(|p| (p.e1, p.e2)).collect();
            for s in &r.surviving {
                assert!(input.contains(&(s.e1, s.e2)), "surviving pair not an input crossing");
                assert_eq!(r.edge_types[&s.e1], r.edge_types[&s.e2]);
            }
        }
    }

    #[test]
    fn labeling_into_one_block_keeps_the_crossing() {
        // K4 drawn convex has exactly one crossing. Send its four vertices
        // bijectively onto one block of the 16-point block-size-4 design:
        // all six edges land in that block's component, so the crossing
        // survives.
        let design = affine_resolvable_design(4).unwrap();
        let block = design.classes[0][0].clone();
        let sch = scheme_from_design(&design).unwrap();
        let (d, c) = convex_instance(4);
        assert_eq!(c.count(), 1);
        let lab = Labeling::new(block, BTreeMap::new());
        let r = split(Instance::new(d.graph(), &c), &sch, &lab).unwrap();
        assert_eq!(r.surviving_count(), 1);
        assert_eq!(r.seed, None);
    }

    #[test]
    fn manual_labelings_pin_the_three_outcomes() {
        // Two-line K_{2,2} has one crossing: (1,4) × (2,3).
        let sch = scheme_bipartite(2);
        let (d, c) = two_line_instance(2, 2);
        assert_eq!(c.count(), 1);
        let inst = Instance::new(d.graph(), &c);

        // Same plane, same type: both edges map to base edge (1,4).
        let same = Labeling::new(vec![1, 1, 4, 4], BTreeMap::new());
        assert_eq!(split(inst, &sch, &same).unwrap().surviving_count(), 1);

        // Same plane, different types: identity labels put (1,4) and (2,3)
        // both on plane 1 but in the single-edge types {1,4} and {2,3}.
        let same_plane = Labeling::new(vec![1, 2, 3, 4], BTreeMap::new());
        let r = split(inst, &sch, &same_plane).unwrap();
        assert_eq!(r.plane_of(1, 4), r.plane_of(2, 3));
        assert_eq!(r.surviving_count(), 0);

        // Different planes: vertex 4 relabeled to 3 sends (1,4) ↦ base
        // (1,3) on plane 0 while (2,3) stays on plane 1.
        let diff_plane = Labeling::new(vec![1, 2, 3, 3], BTreeMap::new());
        let r = split(inst, &sch, &diff_plane).unwrap();
        assert_ne!(r.plane_of(1, 4), r.plane_of(2, 3));
        assert_eq!(r.surviving_count(), 0);
    }

    #[test]
    fn split_rejects_ill_fitting_labelings() {
        // The odd 3-plane scheme has 4 labels and puts every loop on all
        // three planes, so repeated labels genuinely need resolutions.
        let sch = scheme_odd(3).unwrap();
        let (d, c) = convex_instance(4);
        let inst = Instance::new(d.graph(), &c);

        let short = Labeling::new(vec![1, 2, 3], BTreeMap::new());
        assert!(matches!(
            split(inst, &sch, &short),
            Err(SplitError::InconsistentLabeling(_))
        ));

        let out_of_range = Labeling::new(vec![1, 2, 3, 5], BTreeMap::new());
        assert!(matches!(
            split(inst, &sch, &out_of_range),
            Err(SplitError::InconsistentLabeling(_))
        ));

        // Repeated labels make edge (1,2) a loop, which needs a resolution.
        let unresolved = Labeling::new(vec![2, 2, 3, 4], BTreeMap::new());
        assert!(matches!(
            split(inst, &sch, &unresolved),
            Err(SplitError::InconsistentLabeling(_))
        ));

        // A resolution naming a plane that does not carry the base edge.
        let mut bad_plane = BTreeMap::new();
        bad_plane.insert((1u32, 2u32), 9u16);
        let resolved_wrong = Labeling::new(vec![2, 2, 3, 4], bad_plane);
        assert!(matches!(
            split(inst, &sch, &resolved_wrong),
            Err(SplitError::InconsistentLabeling(_))
        ));

        // A resolution for an edge that needs none: with all labels
        // distinct, every edge lies in exactly one matching plane.
        let mut extra = BTreeMap::new();
        extra.insert((1u32, 2u32), 0u16);
        let overdone = Labeling::new(vec![1, 2, 3, 4], extra);
        assert!(matches!(
            split(inst, &sch, &overdone),
            Err(SplitError::InconsistentLabeling(_))
        ));
    }

    #[test]
    fn bipartite_side_swap_is_rejected() {
        let sch = scheme_bipartite(2);
        let (d, c) = two_line_instance(2, 2);
        let inst = Instance::new(d.graph(), &c);
        // Vertex 1 is on side A (labels 1..=2); label 3 belongs to side B.
        let swapped = Labeling::new(vec![3, 1, 3, 4], BTreeMap::new());
        assert!(matches!(
            split(inst, &sch, &swapped),
            Err(SplitError::InconsistentLabeling(_))
        ));
    }

    #[test]
    fn expected_crossings_matches_closed_forms() {
        // Convex K8 under the 7-label scheme: 70 disjoint-pattern crossings,
        // each surviving with probability 235/2401.
        let sch = scheme_k7();
        let (d, c) = convex_instance(8);
        let inst = Instance::new(d.graph(), &c);
        let expect = expected_crossings(inst, &sch).unwrap();
        assert_eq!(expect, Rational::new(2350.into(), 343.into()));

        // Two-line K_{3,3} under the bipartite 3-plane scheme: 9 disjoint
        // crossings, each with probability 1/9.
        let sch = scheme_bipartite(3);
        let (d, c) = two_line_instance(3, 3);
        let inst = Instance::new(d.graph(), &c);
        let expect = expected_crossings(inst, &sch).unwrap();
        assert_eq!(expect, Rational::one());
    }

    #[test]
    fn expected_crossings_handles_adjacent_pairs_patternwise() {
        // An abstract drawing can cross adjacent edges. One disjoint pair
        // plus one shared-B pair under the bipartite 2-plane scheme:
        // expectation = 1/4 + 1/2.
        let g = Graph::with_bipartition(4, vec![(1, 3), (1, 4), (2, 3), (2, 4)], &[1, 2], &[3, 4])
            .unwrap();
        let ad = AbstractDrawing::new(g, vec![((1, 4), (2, 3)), ((1, 3), (2, 3))]).unwrap();
        let sch = scheme_bipartite(2);
        let expect = expected_crossings(Instance::from_abstract(&ad), &sch).unwrap();
        assert_eq!(expect, Rational::new(3.into(), 4.into()));
    }

    #[test]
    fn expected_crossings_of_planar_drawing_is_zero() {
        let sch = scheme_bipartite(2);
        let (d, c) = two_line_instance(1, 3);
        assert_eq!(c.count(), 0);
        let expect = expected_crossings(Instance::new(d.graph(), &c), &sch).unwrap();
        assert!(expect.is_zero());
    }

    #[test]
    fn unipartite_expectation_ignores_shared_endpoint_sides() {
        // An abstract unipartite drawing with an adjacent crossing pair:
        // pattern SharedOne(None). Expectation under the odd 3-plane
        // scheme = q(disjoint) + q(shared-one).
        let g = Graph::new(5, vec![(1, 2), (1, 3), (4, 5), (2, 4)]).unwrap();
        let ad = AbstractDrawing::new(g, vec![((1, 2), (1, 3)), ((1, 2), (4, 5))]).unwrap();
        let sch = scheme_odd(3).unwrap();
        let q_dis = exact_q(&sch, PairPattern::Disjoint).unwrap().value;
        let q_sh = exact_q(&sch, PairPattern::SharedOne(None)).unwrap().value;
        let expect = expected_crossings(Instance::from_abstract(&ad), &sch).unwrap();
        assert_eq!(expect, q_dis + q_sh);
    }

    #[test]
    fn monte_carlo_is_deterministic_and_consistent() {
        let sch = scheme_k7();
        let (d, c) = convex_instance(6);
        let inst = Instance::new(d.graph(), &c);
        let a = monte_carlo(inst, &sch, 200, 11).unwrap();
        let b = monte_carlo(inst, &sch, 200, 11).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.trials, 200);
        assert_eq!(a.histogram.values().sum::<u64>(), 200);
        let total: u128 = a.histogram.iter().map(|(&k, &v)| (k as u128) * (v as u128)).sum();
        assert_eq!(a.mean, Rational::new(total.into(), 200.into()));
        assert_eq!(a.min, *a.histogram.keys().next().unwrap());
        assert_eq!(a.min_seed, derive_seed(11, a.min_trial));

        // Replaying the recorded min trial reproduces the minimum.
        let lab = sample_labeling(&sch, d.graph(), a.min_seed).unwrap();
        let r = split(inst, &sch, &lab).unwrap();
        assert_eq!(r.surviving_count() as u64, a.min);
    }

    #[test]
    fn single_trial_statistics() {
        let sch = scheme_k7();
        let (d, c) = convex_instance(6);
        let inst = Instance::new(d.graph(), &c);
        let mc = monte_carlo(inst, &sch, 1, 5).unwrap();
        assert!(mc.variance.is_zero());
        assert_eq!(mc.min_trial, 0);
        assert_eq!(mc.min_seed, derive_seed(5, 0));
        assert_eq!(mc.mean, Rational::from_integer((mc.min as i64).into()));
    }

    #[test]
    fn monte_carlo_mean_tracks_exact_expectation() {
        // Convex K6 under the 7-label scheme: expectation 15·235/2401.
        let sch = scheme_k7();
        let (d, c) = convex_instance(6);
        let inst = Instance::new(d.graph(), &c);
        let mc = monte_carlo(inst, &sch, 4000, 2024).unwrap();
        let exact = expected_crossings(inst, &sch).unwrap().to_f64().unwrap();
        let diff = (mc.mean_f64() - exact).abs();
        assert!(
            diff <= 4.0 * mc.std_error(),
            "mean {} vs expectation {exact}, diff {diff}, 4·SE {}",
            mc.mean_f64(),
            4.0 * mc.std_error()
        );
    }

    #[test]
    fn best_of_returns_reproducible_minimum() {
        let sch = scheme_k7();
        let (d, c) = convex_instance(8);
        let inst = Instance::new(d.graph(), &c);
        let best = best_of(inst, &sch, 500, 77).unwrap();
        let mc = monte_carlo(inst, &sch, 500, 77).unwrap();
        assert_eq!(best.surviving_count() as u64, mc.min);
        assert_eq!(best.seed, Some(mc.min_seed));

        // The recorded seed reproduces the result from scratch.
        let lab = sample_labeling(&sch, d.graph(), best.seed.unwrap()).unwrap();
        let again = split(inst, &sch, &lab).unwrap();
        assert_eq!(again, best);
    }

    #[test]
    fn layout_certifies_every_plane() {
        let sch = scheme_k7();
        let (d, c) = convex_instance(8);
        let inst = Instance::new(d.graph(), &c);
        for seed in [0u64, 5, 17, 123] {
            let lab = sample_labeling(&sch, d.graph(), seed).unwrap();
            let r = split(inst, &sch, &lab).unwrap();
            let layouts = layout_planes(&d, &r).unwrap();
            assert_eq!(layouts.len(), sch.plane_count() as usize);
            let per_plane = r.per_plane_surviving();
            let mut recount_total = 0;
            for layout in &layouts {
                let recount = crossings_of(&layout.drawing).unwrap();
                assert_eq!(
                    recount.count(),
                    per_plane[layout.plane as usize].len(),
                    "plane {} recount mismatch",
                    layout.plane + 1
                );
                recount_total += recount.count();
                // Edge sets match the plane assignment under the vertex map.
                let mapped: BTreeSet<(u32, u32)> = layout
                    .drawing
                    .graph()
                    .edges()
                    .iter()
                    .map(|&(u, v)| {
                        let (a, b) = (layout.original_id(u), layout.original_id(v));
                        if a <= b {
                            (a, b)
                        } else {
                            (b, a)
                        }
                    })
                    .collect();
                let expected: BTreeSet<(u32, u32)> =
                    r.plane_edges[layout.plane as usize].iter().copied().collect();
                assert_eq!(mapped, expected);
            }
            assert_eq!(recount_total, r.surviving_count());
        }
    }

    #[test]
    fn layout_translation_separates_types() {
        // Find a seed where some plane received two types whose original
        // sub-drawing had cross-type crossings; after layout those are gone.
        let sch = scheme_odd(3).unwrap();
        let (d, c) = convex_instance(7);
        let inst = Instance::new(d.graph(), &c);
        let mut witnessed = false;
        for seed in 0..80 {
            let lab = sample_labeling(&sch, d.graph(), seed).unwrap();
            let r = split(inst, &sch, &lab).unwrap();
            let per_plane = r.per_plane_surviving();
            for (p, edges) in r.plane_edges.iter().enumerate() {
                if edges.is_empty() {
                    continue;
                }
                // Crossings among this plane's edges in the *original*
                // drawing (same plane, any type).
                let edge_set: BTreeSet<(u32, u32)> = edges.iter().copied().collect();
                let original = c
                    .pairs()
                    .iter()
                    .filter(|pr| edge_set.contains(&pr.e1) && edge_set.contains(&pr.e2))
                    .count();
                if original > per_plane[p].len() {
                    witnessed = true;
                }
            }
            if witnessed {
                let layouts = layout_planes(&d, &r).unwrap();
                let total: usize = layouts
                    .iter()
                    .map(|l| crossings_of(&l.drawing).unwrap().count())
                    .sum();
                assert_eq!(total, r.surviving_count());
                break;
            }
        }
        assert!(witnessed, "no seed produced a cross-type same-plane crossing");
    }

    #[test]
    fn layout_rejects_foreign_results() {
        let sch = scheme_k7();
        let (d6, c6) = convex_instance(6);
        let (d8, _) = convex_instance(8);
        let lab = sample_labeling(&sch, d6.graph(), 3).unwrap();
        let r = split(Instance::new(d6.graph(), &c6), &sch, &lab).unwrap();
        assert!(matches!(
            layout_planes(&d8, &r),
            Err(SplitError::MismatchedInput(_))
        ));
    }

    #[test]
    fn kirkman_scheme_splits_without_resolutions() {
        // Design schemes carry every base edge on exactly one plane, so no
        // edge ever needs a resolution and surviving counts follow directly.
        let kts = kts15();
        let sch = scheme_from_design(&kts).unwrap();
        let (d, c) = convex_instance(9);
        let inst = Instance::new(d.graph(), &c);
        let mut total = 0u64;
        let trials = 300;
        for i in 0..trials {
            let lab = sample_labeling(&sch, d.graph(), derive_seed(1, i)).unwrap();
            assert!(lab.resolved().is_empty());
            total += split(inst, &sch, &lab).unwrap().surviving_count() as u64;
        }
        // Loose sanity: empirical mean within a factor-ish window of the
        // exact expectation (tight statistical checks live elsewhere).
        let exact = expected_crossings(inst, &sch).unwrap().to_f64().unwrap();
        let mean = total as f64 / trials as f64;
        assert!((mean - exact).abs() < 1.0, "mean {mean} too far from {exact}");
    }

    #[test]
    fn expectation_equals_count_times_q_for_design_scheme() {
        let design = affine_resolvable_design(3).unwrap();
        let sch = scheme_from_design(&design).unwrap();
        let (d, c) = convex_instance(7);
        let inst = Instance::new(d.graph(), &c);
        let expect = expected_crossings(inst, &sch).unwrap();
        let q = closed_form(ClosedForm::Design { s: 9, block_size: 3 }, 5).unwrap();
        assert_eq!(expect, q * Rational::from_integer((c.count() as u64).into()));
    }
}
