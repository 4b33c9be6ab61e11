//! Typed partition schemes.
//!
//! A scheme fixes a small *base label set*, a base graph on those labels
//! (complete-with-loops for the unipartite kind, complete bipartite without
//! loops for the bipartite kind), and an assignment of every base edge onto
//! one of `k` planes — or onto several planes with equal rational weights
//! summing to 1 (the loop trick used for odd `k`).  Each plane `i` thus
//! carries a subgraph `H_i`; the *type* of a base edge on a plane is the
//! connected component of `H_i` containing it.  Two graph edges that are
//! randomly mapped onto base edges can only keep crossing when they land on
//! the same plane in the same type, which is what makes types the unit of
//! certification downstream.
//!
//! Schemes are immutable after construction.  [`validate_scheme`] recomputes
//! every derived structure from scratch and reports violations instead of
//! erroring, so deliberately broken schemes can be built and examined in
//! tests.

use crate::designs::one_factorization;
use crate::designs::{ResolvableDesign, TriangleMatchingDecomposition, ValidityReport, Verify};
use crate::Scalar;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SchemeError {
    #[error("k must be odd and ≥ 3, got {0}")]
    EvenK(u32),
    #[error("invalid design: {0}")]
    InvalidDesign(String),
    #[error("bad scheme file: {0}")]
    BadFile(String),
}

// ---------------------------------------------------------------------------
// weights
// ---------------------------------------------------------------------------

/// Exact edge weight: a nonnegative rational, typically 1 or 1/k.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Weight(Ratio<u64>);

impl Weight {
    pub fn one() -> Weight {
        Weight(Ratio::new(1, 1))
    }

    /// `1/n`, the uniform weight over an `n`-plane subset.
    pub fn uniform(n: u64) -> Weight {
        Weight(Ratio::new(1, n))
    }

    pub fn new(num: u64, den: u64) -> Weight {
        Weight(Ratio::new(num, den))
    }

    pub fn numer(&self) -> u64 {
        *self.0.numer()
    }

    pub fn denom(&self) -> u64 {
        *self.0.denom()
    }

    pub fn ratio(&self) -> Ratio<u64> {
        self.0
    }

    pub fn to_scalar<T: Scalar>(&self) -> T {
        T::from_ratio(self.numer(), self.denom())
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.denom() == 1 {
            write!(f, "{}", self.numer())
        } else {
            write!(f, "{}/{}", self.numer(), self.denom())
        }
    }
}

impl FromStr for Weight {
    type Err = String;

    fn from_str(s: &str) -> Result<Weight, String> {
        let bad = || format!("bad weight `{s}`");
        let (n, d) = match s.split_once('/') {
            Some((n, d)) => (n, d),
            None => (s, "1"),
        };
        let num: u64 = n.trim().parse().map_err(|_| bad())?;
        let den: u64 = d.trim().parse().map_err(|_| bad())?;
        if den == 0 {
            return Err(bad());
        }
        Ok(Weight(Ratio::new(num, den)))
    }
}

// ---------------------------------------------------------------------------
// labels and edges
// ---------------------------------------------------------------------------

/// Bipartite side marker.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Side {
    A,
    B,
}

/// The label universe a scheme draws from.
///
/// Unipartite: labels `1..=s`, base graph complete with a loop at every
/// label.  Bipartite: a-labels `1..=a`, b-labels `a+1..=a+b`, base graph
/// complete bipartite; loops and same-side pairs are missing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum BaseLabelSet {
    Unipartite { s: u32 },
    Bipartite { a: u32, b: u32 },
}

impl BaseLabelSet {
    pub fn label_count(&self) -> u32 {
        match *self {
            BaseLabelSet::Unipartite { s } => s,
            BaseLabelSet::Bipartite { a, b } => a + b,
        }
    }

    /// Side of a label; `None` for unipartite label sets.
    pub fn side_of(&self, label: u32) -> Option<Side> {
        match *self {
            BaseLabelSet::Unipartite { .. } => None,
            BaseLabelSet::Bipartite { a, .. } => {
                if label <= a {
                    Some(Side::A)
                } else {
                    Some(Side::B)
                }
            }
        }
    }

    /// Labels a vertex on the given side may receive.
    pub fn side_labels(&self, side: Option<Side>) -> std::ops::RangeInclusive<u32> {
        match (*self, side) {
            (BaseLabelSet::Unipartite { s }, _) => 1..=s,
            (BaseLabelSet::Bipartite { a, .. }, Some(Side::A)) => 1..=a,
            (BaseLabelSet::Bipartite { a, b }, Some(Side::B)) => a + 1..=a + b,
            (BaseLabelSet::Bipartite { .. }, None) => {
                panic!("bipartite label set requires a side")
            }
        }
    }

    /// Every edge of the base graph: all pairs and loops (unipartite) or all
    /// cross pairs (bipartite).
    pub fn full_base_edges(&self) -> Vec<BaseEdge> {
        let mut edges = Vec::new();
        match *self {
            BaseLabelSet::Unipartite { s } => {
                for u in 1..=s {
                    for v in u..=s {
                        edges.push(BaseEdge::new(u, v));
                    }
                }
            }
            BaseLabelSet::Bipartite { a, b } => {
                for u in 1..=a {
                    for v in a + 1..=a + b {
                        edges.push(BaseEdge::new(u, v));
                    }
                }
            }
        }
        edges
    }
}

/// Unordered pair of base labels; a loop is a self-pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct BaseEdge(u32, u32);

impl BaseEdge {
    pub fn new(u: u32, v: u32) -> BaseEdge {
        if u <= v {
            BaseEdge(u, v)
        } else {
            BaseEdge(v, u)
        }
    }

    pub fn lo(&self) -> u32 {
        self.0
    }

    pub fn hi(&self) -> u32 {
        self.1
    }

    pub fn is_loop(&self) -> bool {
        self.0 == self.1
    }
}

impl fmt::Display for BaseEdge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{},{}}}", self.0, self.1)
    }
}

/// Identity of a type: a plane and the index of one of its components
/// (components ordered by smallest label).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TypeId {
    pub plane: u16,
    pub component: u32,
}

// ---------------------------------------------------------------------------
// the scheme itself
// ---------------------------------------------------------------------------

/// One plane's weighted edge set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Plane {
    pub edges: Vec<(BaseEdge, Weight)>,
}

/// A typed partition scheme. See the module docs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scheme {
    labels: BaseLabelSet,
    base_edges: Vec<BaseEdge>,
    planes: Vec<Plane>,
    /// Per plane: connected components of `H_i`, each a sorted label list,
    /// components ordered by smallest label.
    types: Vec<Vec<Vec<u32>>>,
    /// Per base edge: the planes carrying it, with weights.
    distribution: BTreeMap<BaseEdge, Vec<(u16, Weight)>>,
    /// Per plane: label → component index.
    component_of: Vec<BTreeMap<u32, u32>>,
}

impl Scheme {
    /// Assemble a scheme from raw parts, deriving types and distributions.
    ///
    /// No invariant is enforced here; run [`validate_scheme`] to check the
    /// result. `base_edges` declares the non-missing edges of the base graph
    /// (builders pass the full pair set of their kind).
    pub fn from_parts(
        labels: BaseLabelSet,
        base_edges: Vec<BaseEdge>,
        plane_edges: Vec<Vec<(BaseEdge, Weight)>>,
    ) -> Scheme {
        let mut base_edges = base_edges;
        base_edges.sort_unstable();
        base_edges.dedup();
        let mut planes: Vec<Plane> = plane_edges
            .into_iter()
            .map(|mut edges| {
                edges.sort_unstable();
                Plane { edges }
            })
            .collect();
        planes.shrink_to_fit();
        let types: Vec<Vec<Vec<u32>>> =
            planes.iter().map(|p| components_of(p.edges.iter().map(|(e, _)| *e))).collect();
        let component_of = types
            .iter()
            .map(|comps| {
                let mut map = BTreeMap::new();
                for (i, comp) in comps.iter().enumerate() {
                    for &label in comp {
                        map.insert(label, i as u32);
                    }
                }
                map
            })
            .collect();
        let mut distribution: BTreeMap<BaseEdge, Vec<(u16, Weight)>> = BTreeMap::new();
        for (i, plane) in planes.iter().enumerate() {
            for (e, w) in &plane.edges {
                distribution.entry(*e).or_default().push((i as u16, *w));
            }
        }
        Scheme { labels, base_edges, planes, types, distribution, component_of }
    }

    pub fn labels(&self) -> BaseLabelSet {
        self.labels
    }

    pub fn plane_count(&self) -> u16 {
        self.planes.len() as u16
    }

    pub fn planes(&self) -> &[Plane] {
        &self.planes
    }

    pub fn base_edges(&self) -> &[BaseEdge] {
        &self.base_edges
    }

    /// Planes carrying this base edge, with weights; empty when missing.
    pub fn distribution(&self, e: BaseEdge) -> &[(u16, Weight)] {
        self.distribution.get(&e).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Components of one plane's subgraph, sorted label lists.
    pub fn plane_types(&self, plane: u16) -> &[Vec<u32>] {
        &self.types[plane as usize]
    }

    /// All per-plane component tables.
    pub fn all_types(&self) -> &[Vec<Vec<u32>>] {
        &self.types
    }

    /// Type of a label on a plane, if the label occurs in that plane's
    /// subgraph at all.
    pub fn type_of_label(&self, plane: u16, label: u32) -> Option<TypeId> {
        self.component_of[plane as usize]
            .get(&label)
            .map(|&component| TypeId { plane, component })
    }

    /// Type of a base edge on a plane. Meaningful only for edges the plane
    /// carries; endpoints of a carried edge always share a component.
    pub fn type_of(&self, plane: u16, e: BaseEdge) -> Option<TypeId> {
        let t = self.type_of_label(plane, e.lo());
        debug_assert_eq!(
            t.map(|t| t.component),
            self.type_of_label(plane, e.hi()).map(|t| t.component),
            "edge endpoints in different components"
        );
        t
    }

    /// Short human identifier used in reports.
    pub fn summary(&self) -> String {
        match self.labels {
            BaseLabelSet::Unipartite { s } => format!("s={} k={}", s, self.plane_count()),
            BaseLabelSet::Bipartite { a, b } => {
                format!("a={} b={} k={}", a, b, self.plane_count())
            }
        }
    }

    /// Total type count across planes.
    pub fn type_count(&self) -> usize {
        self.types.iter().map(Vec::len).sum()
    }
}

/// Connected components of the base edges (loops count as vertices), each a
/// sorted label list, components ordered by smallest label.
fn components_of(edges: impl Iterator<Item = BaseEdge>) -> Vec<Vec<u32>> {
    let mut parent: BTreeMap<u32, u32> = BTreeMap::new();
    fn find(parent: &mut BTreeMap<u32, u32>, x: u32) -> u32 {
        let p = *parent.entry(x).or_insert(x);
        if p == x {
            x
        } else {
            let root = find(parent, p);
            parent.insert(x, root);
            root
        }
    }
    let mut seen = Vec::new();
    for e in edges {
        seen.push(e.lo());
        seen.push(e.hi());
        let (ru, rv) = (find(&mut parent, e.lo()), find(&mut parent, e.hi()));
        if ru != rv {
            parent.insert(ru.max(rv), ru.min(rv));
        }
    }
    let mut comps: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
    seen.sort_unstable();
    seen.dedup();
    for label in seen {
        let root = find(&mut parent, label);
        comps.entry(root).or_default().push(label);
    }
    comps.into_values().collect()
}

// ---------------------------------------------------------------------------
// builders
// ---------------------------------------------------------------------------

fn clique_edges(block: &[u32], w: Weight) -> impl Iterator<Item = (BaseEdge, Weight)> + '_ {
    block.iter().enumerate().flat_map(move |(i, &u)| {
        block[i + 1..].iter().map(move |&v| (BaseEdge::new(u, v), w))
    })
}

/// Scheme from a resolvable design: plane `i ≤ m` holds cliques on the blocks
/// of class `i`, plane `m+1` holds every loop (each its own type).
pub fn scheme_from_design(d: &ResolvableDesign) -> Result<Scheme, SchemeError> {
    let report = d.verify();
    if !report.is_valid() {
        return Err(SchemeError::InvalidDesign(report.to_string()));
    }
    let s = d.point_count;
    let labels = BaseLabelSet::Unipartite { s };
    let mut plane_edges: Vec<Vec<(BaseEdge, Weight)>> = Vec::with_capacity(d.classes.len() + 1);
    for class in &d.classes {
        let mut edges = Vec::new();
        for block in class {
            edges.extend(clique_edges(block, Weight::one()));
        }
        plane_edges.push(edges);
    }
    plane_edges.push((1..=s).map(|u| (BaseEdge::new(u, u), Weight::one())).collect());
    Ok(Scheme::from_parts(labels, labels.full_base_edges(), plane_edges))
}

/// The hand-crafted 7-label, 4-plane scheme: each plane is either two
/// triangles plus an isolated loop, or a triangle plus two
/// matching-edge-with-loop components; 12 types in total.
pub fn scheme_k7() -> Scheme {
    let labels = BaseLabelSet::Unipartite { s: 7 };
    let triangles: [&[u32]; 5] = [&[2, 3, 4], &[5, 6, 7], &[1, 2, 5], &[1, 3, 6], &[1, 4, 7]];
    let w = Weight::one();
    let tri = |i: usize| clique_edges(triangles[i], w).collect::<Vec<_>>();
    let mut plane1 = tri(0);
    plane1.extend(tri(1));
    plane1.push((BaseEdge::new(1, 1), w));
    let mut plane2 = tri(2);
    plane2.extend([(BaseEdge::new(4, 6), w), (BaseEdge::new(4, 4), w)]);
    plane2.extend([(BaseEdge::new(3, 7), w), (BaseEdge::new(7, 7), w)]);
    let mut plane3 = tri(3);
    plane3.extend([(BaseEdge::new(2, 7), w), (BaseEdge::new(2, 2), w)]);
    plane3.extend([(BaseEdge::new(4, 5), w), (BaseEdge::new(5, 5), w)]);
    let mut plane4 = tri(4);
    plane4.extend([(BaseEdge::new(2, 6), w), (BaseEdge::new(6, 6), w)]);
    plane4.extend([(BaseEdge::new(3, 5), w), (BaseEdge::new(3, 3), w)]);
    Scheme::from_parts(labels, labels.full_base_edges(), vec![plane1, plane2, plane3, plane4])
}

/// Scheme for odd `k` on `s = k+1` labels: plane `i` holds matching `M_i` of
/// a one-factorization at weight 1, and every loop sits on every plane at
/// weight `1/k`, so each type is a matching edge with the loops at its ends.
pub fn scheme_odd(k: u32) -> Result<Scheme, SchemeError> {
    if k < 3 || k % 2 == 0 {
        return Err(SchemeError::EvenK(k));
    }
    let s = k + 1;
    let f = one_factorization(s).expect("k odd makes s even");
    let labels = BaseLabelSet::Unipartite { s };
    let loop_w = Weight::uniform(k as u64);
    let plane_edges: Vec<Vec<(BaseEdge, Weight)>> = f
        .matchings
        .iter()
        .map(|m| {
            let mut edges: Vec<(BaseEdge, Weight)> =
                m.iter().map(|&[u, v]| (BaseEdge::new(u, v), Weight::one())).collect();
            edges.extend((1..=s).map(|u| (BaseEdge::new(u, u), loop_w)));
            edges
        })
        .collect();
    Ok(Scheme::from_parts(labels, labels.full_base_edges(), plane_edges))
}

/// Scheme from a triangle+matching decomposition on `s = 2k` labels:
/// `k-1` triangle planes, then a plane holding the matching edges with loops
/// at both endpoints (each matching edge with its two loops is one type).
pub fn scheme_triangle_matching(d: &TriangleMatchingDecomposition) -> Result<Scheme, SchemeError> {
    let report = d.verify();
    if !report.is_valid() {
        return Err(SchemeError::InvalidDesign(report.to_string()));
    }
    let labels = BaseLabelSet::Unipartite { s: d.point_count };
    let w = Weight::one();
    let mut plane_edges: Vec<Vec<(BaseEdge, Weight)>> = d
        .triangle_classes
        .iter()
        .map(|class| {
            class.iter().flat_map(|t| clique_edges(t, w).collect::<Vec<_>>()).collect()
        })
        .collect();
    let mut last = Vec::new();
    for &[u, v] in &d.matching {
        last.push((BaseEdge::new(u, v), w));
        last.push((BaseEdge::new(u, u), w));
        last.push((BaseEdge::new(v, v), w));
    }
    plane_edges.push(last);
    Ok(Scheme::from_parts(labels, labels.full_base_edges(), plane_edges))
}

/// Bipartite scheme on `k + k` labels: plane `t` holds the cyclic matching
/// `{a_i b_j : j - i ≡ t (mod k)}`; every type is a single edge.
pub fn scheme_bipartite(k: u32) -> Scheme {
    assert!(k >= 1, "k must be positive");
    let labels = BaseLabelSet::Bipartite { a: k, b: k };
    let plane_edges: Vec<Vec<(BaseEdge, Weight)>> = (0..k)
        .map(|t| {
            (1..=k)
                .map(|i| {
                    let j = (i - 1 + t) % k + 1;
                    (BaseEdge::new(i, k + j), Weight::one())
                })
                .collect()
        })
        .collect();
    Scheme::from_parts(labels, labels.full_base_edges(), plane_edges)
}

// ---------------------------------------------------------------------------
// validation
// ---------------------------------------------------------------------------

/// Recompute every scheme invariant from scratch and report violations:
/// label ranges, missing-edge discipline, per-edge weight totals and
/// uniformity, declared-edge coverage, and type-table consistency.
pub fn validate_scheme(sch: &Scheme) -> ValidityReport {
    let mut out = ValidityReport::default();
    let labels = sch.labels;
    match labels {
        BaseLabelSet::Unipartite { s } => {
            if s < 1 {
                out.violations.push("label count 0".into());
            }
        }
        BaseLabelSet::Bipartite { a, b } => {
            if a < 1 || b < 1 {
                out.violations.push(format!("bipartite sides must be nonempty, got {a},{b}"));
            }
        }
    }
    if sch.planes.is_empty() {
        out.violations.push("no planes".into());
    }
    let n = labels.label_count();
    let in_range = |l: u32| (1..=n).contains(&l);
    for (i, plane) in sch.planes.iter().enumerate() {
        for w in plane.edges.windows(2) {
            if w[0].0 == w[1].0 {
                out.violations.push(format!("plane {}: duplicate edge {}", i + 1, w[0].0));
            }
        }
        for (e, w) in &plane.edges {
            if !in_range(e.lo()) || !in_range(e.hi()) {
                out.violations.push(format!("plane {}: edge {} outside label range", i + 1, e));
            }
            if w.numer() == 0 {
                out.violations.push(format!("plane {}: edge {} has zero weight", i + 1, e));
            }
            if let BaseLabelSet::Bipartite { .. } = labels {
                if labels.side_of(e.lo()) == labels.side_of(e.hi()) {
                    out.violations.push(format!(
                        "plane {}: edge {} joins labels on one side (missing in base graph)",
                        i + 1,
                        e
                    ));
                }
            }
        }
    }
    // Declared base edges: every one covered with total weight exactly 1,
    // uniformly split across its planes.
    for &e in &sch.base_edges {
        let dist = sch.distribution(e);
        if dist.is_empty() {
            out.violations.push(format!("base edge {e} assigned to no plane"));
            continue;
        }
        let total: Ratio<u64> = dist.iter().map(|(_, w)| w.ratio()).sum();
        if total != Ratio::new(1, 1) {
            out.violations.push(format!("base edge {e} has total weight {total}, expected 1"));
        }
        let expect = Weight::uniform(dist.len() as u64);
        if dist.iter().any(|(_, w)| *w != expect) {
            out.violations.push(format!(
                "base edge {e} weights not uniform over its {} planes",
                dist.len()
            ));
        }
    }
    for e in sch.distribution.keys() {
        if sch.base_edges.binary_search(e).is_err() {
            out.violations.push(format!("edge {e} assigned but not a declared base edge"));
        }
    }
    // Type tables must match a from-scratch recomputation.
    for (i, plane) in sch.planes.iter().enumerate() {
        let fresh = components_of(plane.edges.iter().map(|(e, _)| *e));
        if fresh != sch.types[i] {
            out.violations.push(format!(
                "plane {}: stored type table diverges from recomputed components",
                i + 1
            ));
        }
    }
    out
}

// ---------------------------------------------------------------------------
// JSON round trip
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct EdgeEntry {
    e: [u32; 2],
    w: String,
}

#[derive(Serialize, Deserialize)]
struct PlaneFile {
    edges: Vec<EdgeEntry>,
}

#[derive(Serialize, Deserialize)]
struct SchemeFile {
    labels: BaseLabelSet,
    base_edges: Vec<[u32; 2]>,
    planes: Vec<PlaneFile>,
    /// Derived component table, kept in the file for audit; checked on load.
    types: Vec<Vec<Vec<u32>>>,
}

impl Scheme {
    pub fn to_json(&self) -> String {
        let file = SchemeFile {
            labels: self.labels,
            base_edges: self.base_edges.iter().map(|e| [e.lo(), e.hi()]).collect(),
            planes: self
                .planes
                .iter()
                .map(|p| PlaneFile {
                    edges: p
                        .edges
                        .iter()
                        .map(|(e, w)| EdgeEntry { e: [e.lo(), e.hi()], w: w.to_string() })
                        .collect(),
                })
                .collect(),
            types: self.types.clone(),
        };
        let mut s = serde_json::to_string_pretty(&file).expect("scheme serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Scheme, SchemeError> {
        let file: SchemeFile =
            serde_json::from_str(text).map_err(|e| SchemeError::BadFile(e.to_string()))?;
        let mut plane_edges = Vec::with_capacity(file.planes.len());
        for p in file.planes {
            let mut edges = Vec::with_capacity(p.edges.len());
            for entry in p.edges {
                let w = Weight::from_str(&entry.w).map_err(SchemeError::BadFile)?;
                edges.push((BaseEdge::new(entry.e[0], entry.e[1]), w));
            }
            plane_edges.push(edges);
        }
        let base_edges = file.base_edges.iter().map(|&[u, v]| BaseEdge::new(u, v)).collect();
        let scheme = Scheme::from_parts(file.labels, base_edges, plane_edges);
        if scheme.types != file.types {
            return Err(SchemeError::BadFile(
                "stored type table does not match the components derived from the edge lists"
                    .into(),
            ));
        }
        Ok(scheme)
    }
}
