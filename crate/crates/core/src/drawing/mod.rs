//! Drawings of graphs and exact crossing detection.
//!
//! Two representations coexist.  A [`RectilinearDrawing`] places vertices at
//! exact rational coordinates and draws edges as straight segments;
//! [`crossings_of`] finds every pair of edges whose open segments cross,
//! rejecting degenerate inputs (coincident vertices, a vertex on an edge's
//! interior, collinear overlapping edges) instead of silently perturbing
//! them — a perturbed drawing would invalidate every certified count
//! downstream.  An [`AbstractDrawing`] skips geometry: it is a graph plus an
//! explicit list of crossing edge pairs, taken as given.  The library never
//! decides whether such a list is optimal; certified statements are relative
//! to the supplied drawing.
//!
//! Every crossing pair carries the [`PairPattern`] of its two edges (how
//! many endpoints they share, and on which side for bipartite graphs), which
//! is exactly what the survival probabilities are conditioned on.
//!
//! Benchmark generators: [`convex_complete_drawing`] puts `K_n` on the
//! parabola `(i, i²)` — convex position, no three points collinear, so the
//! crossing set is exactly the `C(n,4)` quadruple diagonals — and
//! [`two_line_bipartite_drawing`] puts `K_{m,n}` on two horizontal lines
//! with `C(m,2)·C(n,2)` crossings.

mod geometry;

pub use geometry::{open_segments_intersect, orient, Point, SegmentIntersection};

use crate::probability::PairPattern;
use crate::schemes::Side;
use crate::{Coord, ParseError, Rational, Scalar};
use num_bigint::BigInt;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

/// Errors from graph and drawing construction or crossing detection.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DrawingError {
    /// Loop, duplicate or out-of-range edge, or broken bipartition.
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    /// Drawing-level violation: wrong coordinate count, unknown edge in a
    /// crossing list, duplicate crossing pair.
    #[error("invalid drawing: {0}")]
    InvalidDrawing(String),
    /// Two vertices share a point.
    #[error("vertices {u} and {v} share coordinates")]
    CoincidentVertices { u: u32, v: u32 },
    /// A vertex lies strictly inside an edge's segment.
    #[error("edge {{{eu},{ev}}} passes through vertex {vertex}")]
    EdgeThroughVertex { eu: u32, ev: u32, vertex: u32 },
    /// Two edges overlap along a common line.
    #[error("edges {{{e1u},{e1v}}} and {{{e2u},{e2v}}} overlap along a line")]
    CollinearOverlap { e1u: u32, e1v: u32, e2u: u32, e2v: u32 },
    /// Malformed drawing file.
    #[error(transparent)]
    Parse(#[from] ParseError),
}

fn norm(u: u32, v: u32) -> (u32, u32) {
    if u <= v {
        (u, v)
    } else {
        (v, u)
    }
}

// ---------------------------------------------------------------------------
// graphs
// ---------------------------------------------------------------------------

/// A simple graph on vertices `1..=n`, optionally with a bipartition.
///
/// Edges are stored normalized (`u < v`), sorted and duplicate-free.  When a
/// bipartition is present it properly 2-colors every edge; its sides line up
/// with the a-/b-labels of bipartite schemes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: u32,
    edges: Vec<(u32, u32)>,
    sides: Option<Vec<Side>>,
}

impl Graph {
    pub fn new(n: u32, edges: Vec<(u32, u32)>) -> Result<Graph, DrawingError> {
        let mut normalized = Vec::with_capacity(edges.len());
        for (u, v) in edges {
            if u == v {
                return Err(DrawingError::InvalidGraph(format!("loop at vertex {u}")));
            }
            if u < 1 || v < 1 || u > n || v > n {
                return Err(DrawingError::InvalidGraph(format!(
                    "edge {{{u},{v}}} outside vertex range 1..={n}"
                )));
            }
            normalized.push(norm(u, v));
        }
        normalized.sort_unstable();
        if let Some(dup) = normalized.windows(2).find(|w| w[0] == w[1]) {
            return Err(DrawingError::InvalidGraph(format!(
                "duplicate edge {{{},{}}}",
                dup[0].0, dup[0].1
            )));
        }
        Ok(Graph { n, edges: normalized, sides: None })
    }

    /// Build with an explicit bipartition `(a, b)`; every edge must cross.
    pub fn with_bipartition(
        n: u32,
        edges: Vec<(u32, u32)>,
        a: &[u32],
        b: &[u32],
    ) -> Result<Graph, DrawingError> {
        let mut graph = Graph::new(n, edges)?;
        let mut sides: Vec<Option<Side>> = vec![None; n as usize];
        for (list, side) in [(a, Side::A), (b, Side::B)] {
            for &v in list {
                if v < 1 || v > n {
                    return Err(DrawingError::InvalidGraph(format!(
                        "bipartition names vertex {v} outside 1..={n}"
                    )));
                }
                if sides[v as usize - 1].replace(side).is_some() {
                    return Err(DrawingError::InvalidGraph(format!(
                        "vertex {v} listed twice in the bipartition"
                    )));
                }
            }
        }
        let sides: Vec<Side> = sides
            .into_iter()
            .enumerate()
            .map(|(i, s)| {
                s.ok_or_else(|| {
                    DrawingError::InvalidGraph(format!("vertex {} is on neither side", i + 1))
                })
            })
            .collect::<Result<_, _>>()?;
        for &(u, v) in &graph.edges {
            if sides[u as usize - 1] == sides[v as usize - 1] {
                return Err(DrawingError::InvalidGraph(format!(
                    "edge {{{u},{v}}} stays on one side of the bipartition"
                )));
            }
        }
        graph.sides = Some(sides);
        Ok(graph)
    }

    /// `K_n`.
    pub fn complete(n: u32) -> Graph {
        let edges = (1..=n).flat_map(|u| (u + 1..=n).map(move |v| (u, v))).collect();
        Graph::new(n, edges).expect("complete graph is simple")
    }

    /// `K_{m,n}` with side A on `1..=m`, side B on `m+1..=m+n`.
    pub fn complete_bipartite(m: u32, n: u32) -> Graph {
        let edges = (1..=m).flat_map(|u| (1..=n).map(move |v| (u, m + v))).collect();
        let a: Vec<u32> = (1..=m).collect();
        let b: Vec<u32> = (m + 1..=m + n).collect();
        Graph::with_bipartition(m + n, edges, &a, &b).expect("two-sided edges only")
    }

    pub fn vertex_count(&self) -> u32 {
        self.n
    }

    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn has_edge(&self, u: u32, v: u32) -> bool {
        self.edges.binary_search(&norm(u, v)).is_ok()
    }

    /// Side of a vertex when a bipartition is present.
    pub fn side_of(&self, v: u32) -> Option<Side> {
        self.sides.as_ref().map(|s| s[v as usize - 1])
    }

    pub fn is_bipartite(&self) -> bool {
        self.sides.is_some()
    }

    /// Vertices per side when a bipartition is present.
    pub fn bipartition(&self) -> Option<(Vec<u32>, Vec<u32>)> {
        let sides = self.sides.as_ref()?;
        let pick = |side: Side| {
            (1..=self.n).filter(|&v| sides[v as usize - 1] == side).collect::<Vec<_>>()
        };
        Some((pick(Side::A), pick(Side::B)))
    }

    /// Endpoint pattern of two edges: how many endpoints they share, and on
    /// which side when the graph is bipartite.
    pub fn pattern_of(&self, e1: (u32, u32), e2: (u32, u32)) -> PairPattern {
        let (e1, e2) = (norm(e1.0, e1.1), norm(e2.0, e2.1));
        let shared: Vec<u32> =
            [e1.0, e1.1].into_iter().filter(|&v| v == e2.0 || v == e2.1).collect();
        match shared.as_slice() {
            [] => PairPattern::Disjoint,
            [v] => PairPattern::SharedOne(self.side_of(*v)),
            _ => PairPattern::Parallel,
        }
    }
}

// ---------------------------------------------------------------------------
// crossing sets
// ---------------------------------------------------------------------------

/// An unordered pair of distinct crossing edges, with its endpoint pattern.
///
/// Edges are normalized (`u < v`) and ordered (`e1 < e2` lexicographically).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct CrossingPair {
    pub e1: (u32, u32),
    pub e2: (u32, u32),
    pub pattern: PairPattern,
}

impl CrossingPair {
    fn new(e1: (u32, u32), e2: (u32, u32), pattern: PairPattern) -> CrossingPair {
        let (e1, e2) = (norm(e1.0, e1.1), norm(e2.0, e2.1));
        let (e1, e2) = if e1 <= e2 { (e1, e2) } else { (e2, e1) };
        CrossingPair { e1, e2, pattern }
    }
}

/// A set of crossing edge pairs; `count` is its cardinality.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CrossingSet {
    pairs: Vec<CrossingPair>,
}

impl CrossingSet {
    fn from_sorted(pairs: Vec<CrossingPair>) -> CrossingSet {
        debug_assert!(pairs.windows(2).all(|w| (w[0].e1, w[0].e2) < (w[1].e1, w[1].e2)));
        CrossingSet { pairs }
    }

    pub fn pairs(&self) -> &[CrossingPair] {
        &self.pairs
    }

    pub fn count(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

// ---------------------------------------------------------------------------
// rectilinear drawings
// ---------------------------------------------------------------------------

/// A graph with exact coordinates; edges are straight segments.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RectilinearDrawing<T = Coord> {
    graph: Graph,
    coords: Vec<Point<T>>,
}

impl<T: Scalar> RectilinearDrawing<T> {
    /// Coordinates are indexed by vertex; any two vertices sharing a point
    /// is an error right away, the remaining degeneracies are caught by
    /// [`crossings_of`].
    pub fn new(graph: Graph, coords: Vec<Point<T>>) -> Result<Self, DrawingError> {
        if coords.len() != graph.vertex_count() as usize {
            return Err(DrawingError::InvalidDrawing(format!(
                "{} coordinates for {} vertices",
                coords.len(),
                graph.vertex_count()
            )));
        }
        for u in 0..coords.len() {
            for v in u + 1..coords.len() {
                if coords[u] == coords[v] {
                    return Err(DrawingError::CoincidentVertices {
                        u: u as u32 + 1,
                        v: v as u32 + 1,
                    });
                }
            }
        }
        Ok(RectilinearDrawing { graph, coords })
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn coords(&self) -> &[Point<T>] {
        &self.coords
    }

    pub fn point(&self, v: u32) -> &Point<T> {
        &self.coords[v as usize - 1]
    }

    /// The same drawing shifted by `(dx, dy)`.
    pub fn translated(&self, dx: &T, dy: &T) -> Self {
        let coords = self
            .coords
            .iter()
            .map(|p| Point::new(p.x.clone() + dx.clone(), p.y.clone() + dy.clone()))
            .collect();
        RectilinearDrawing { graph: self.graph.clone(), coords }
    }
}

/// All edge pairs whose open segments properly cross.
///
/// Shared endpoints are not crossings: adjacent edges are tested on their
/// open segments like everyone else.  Degenerate drawings error instead of
/// being perturbed: first any vertex strictly inside an edge
/// ([`DrawingError::EdgeThroughVertex`], checked for every vertex–edge
/// pair, isolated vertices included), then any two edges overlapping along
/// a line ([`DrawingError::CollinearOverlap`]).  Scanning is in sorted edge
/// order, so the reported degeneracy is deterministic.
pub fn crossings_of<T: Scalar>(d: &RectilinearDrawing<T>) -> Result<CrossingSet, DrawingError> {
    let graph = d.graph();
    for &(u, v) in graph.edges() {
        for w in 1..=graph.vertex_count() {
            if w == u || w == v {
                continue;
            }
            let (pu, pv, pw) = (d.point(u), d.point(v), d.point(w));
            if orient(pu, pv, pw) == 0 && geometry::strictly_inside(pu, pv, pw) {
                return Err(DrawingError::EdgeThroughVertex { eu: u, ev: v, vertex: w });
            }
        }
    }
    let edges = graph.edges();
    let mut pairs = Vec::new();
    for i in 0..edges.len() {
        for j in i + 1..edges.len() {
            let (e1, e2) = (edges[i], edges[j]);
            let (a, b, c, dd) = (d.point(e1.0), d.point(e1.1), d.point(e2.0), d.point(e2.1));
            match open_segments_intersect(a, b, c, dd) {
                SegmentIntersection::Proper => {
                    pairs.push(CrossingPair::new(e1, e2, graph.pattern_of(e1, e2)));
                }
                SegmentIntersection::None => {}
                SegmentIntersection::TouchInterior { point } => {
                    // Unreachable after the vertex pass; kept as a guard.
                    let vertex = [e1.0, e1.1, e2.0, e2.1][point];
                    let (eu, ev) = if point < 2 { e2 } else { e1 };
                    return Err(DrawingError::EdgeThroughVertex { eu, ev, vertex });
                }
                SegmentIntersection::CollinearOverlap => {
                    return Err(DrawingError::CollinearOverlap {
                        e1u: e1.0,
                        e1v: e1.1,
                        e2u: e2.0,
                        e2v: e2.1,
                    });
                }
            }
        }
    }
    Ok(CrossingSet::from_sorted(pairs))
}

// ---------------------------------------------------------------------------
// abstract drawings
// ---------------------------------------------------------------------------

/// A graph plus an explicit crossing list — a drawing without geometry.
///
/// The list is taken as given; whether it comes from an optimal drawing is
/// the caller's assertion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AbstractDrawing {
    graph: Graph,
    crossings: CrossingSet,
}

impl AbstractDrawing {
    pub fn new(
        graph: Graph,
        pairs: Vec<((u32, u32), (u32, u32))>,
    ) -> Result<AbstractDrawing, DrawingError> {
        let mut crossing_pairs = Vec::with_capacity(pairs.len());
        for (e1, e2) in pairs {
            for e in [e1, e2] {
                if !graph.has_edge(e.0, e.1) {
                    return Err(DrawingError::InvalidDrawing(format!(
                        "crossing names edge {{{},{}}} which the graph does not have",
                        e.0, e.1
                    )));
                }
            }
            if norm(e1.0, e1.1) == norm(e2.0, e2.1) {
                return Err(DrawingError::InvalidDrawing(format!(
                    "crossing pairs edge {{{},{}}} with itself",
                    e1.0, e1.1
                )));
            }
            crossing_pairs.push(CrossingPair::new(e1, e2, graph.pattern_of(e1, e2)));
        }
        crossing_pairs.sort_unstable();
        if let Some(dup) = crossing_pairs.windows(2).find(|w| w[0] == w[1]) {
            return Err(DrawingError::InvalidDrawing(format!(
                "crossing between {{{},{}}} and {{{},{}}} listed twice",
                dup[0].e1.0, dup[0].e1.1, dup[0].e2.0, dup[0].e2.1
            )));
        }
        Ok(AbstractDrawing { graph, crossings: CrossingSet::from_sorted(crossing_pairs) })
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn crossings(&self) -> &CrossingSet {
        &self.crossings
    }
}

// ---------------------------------------------------------------------------
// generators
// ---------------------------------------------------------------------------

fn int(i: u32) -> Rational {
    Rational::from_integer(BigInt::from(i))
}

/// `K_n` on the parabola `(i, i²)`, `i = 1..=n`: convex position, no three
/// points collinear, so every 4-subset of vertices contributes exactly one
/// crossing (its diagonal pair) and the total is `C(n,4)`.
pub fn convex_complete_drawing(n: u32) -> RectilinearDrawing {
    assert!(n >= 3, "need n >= 3, got {n}");
    let coords = (1..=n).map(|i| Point::new(int(i), int(i) * int(i))).collect();
    RectilinearDrawing::new(Graph::complete(n), coords)
        .expect("parabola points are pairwise distinct")
}

/// `K_{m,n}` with side A at `(i, 0)`, `i = 1..=m`, and side B at `(j, 1)`,
/// `j = 1..=n`.  Segments only meet the two carrier lines at endpoints, so
/// the drawing is degeneracy-free with exactly `C(m,2)·C(n,2)` crossings.
pub fn two_line_bipartite_drawing(m: u32, n: u32) -> RectilinearDrawing {
    assert!(m >= 1 && n >= 1, "need m,n >= 1, got {m},{n}");
    let mut coords: Vec<Point<Rational>> =
        (1..=m).map(|i| Point::new(int(i), int(0))).collect();
    coords.extend((1..=n).map(|j| Point::new(int(j), int(1))));
    RectilinearDrawing::new(Graph::complete_bipartite(m, n), coords)
        .expect("two-line points are pairwise distinct")
}

// ---------------------------------------------------------------------------
// text formats
// ---------------------------------------------------------------------------

fn write_graph_lines(out: &mut String, graph: &Graph) {
    if graph.is_bipartite() {
        for v in 1..=graph.vertex_count() {
            let side = match graph.side_of(v) {
                Some(Side::A) => "a",
                Some(Side::B) => "b",
                None => unreachable!("bipartite graph sides every vertex"),
            };
            let _ = writeln!(out, "b {v} {side}");
        }
    }
    for &(u, v) in graph.edges() {
        let _ = writeln!(out, "e {u} {v}");
    }
}

/// Shared line-oriented scanner for the two drawing formats.
struct Lines<'a> {
    text: &'a str,
}

impl<'a> Lines<'a> {
    fn records(&self) -> impl Iterator<Item = (usize, Vec<&'a str>)> {
        self.text
            .lines()
            .enumerate()
            .map(|(i, line)| (i + 1, line.trim()))
            .filter(|(_, line)| !line.is_empty() && !line.starts_with('#'))
            .map(|(no, line)| (no, line.split_whitespace().collect()))
    }
}

fn parse_u32(no: usize, what: &str, tok: &str) -> Result<u32, ParseError> {
    tok.parse::<u32>().map_err(|_| ParseError::new(no, format!("bad {what} {tok:?}")))
}

fn build_graph(
    n: u32,
    edges: Vec<(u32, u32)>,
    sides: BTreeMap<u32, Side>,
) -> Result<Graph, DrawingError> {
    if sides.is_empty() {
        Graph::new(n, edges)
    } else {
        let a: Vec<u32> = sides.iter().filter(|(_, s)| **s == Side::A).map(|(v, _)| *v).collect();
        let b: Vec<u32> = sides.iter().filter(|(_, s)| **s == Side::B).map(|(v, _)| *v).collect();
        Graph::with_bipartition(n, edges, &a, &b)
    }
}

impl RectilinearDrawing<Rational> {
    /// Render as text: `v <id> <x> <y>` lines (coordinates as exact
    /// rationals), optional `b <id> <a|b>` bipartition lines, then
    /// `e <u> <v>` lines.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (i, p) in self.coords.iter().enumerate() {
            let _ = writeln!(out, "v {} {} {}", i + 1, p.x, p.y);
        }
        write_graph_lines(&mut out, &self.graph);
        out
    }

    /// Parse the [`to_text`](Self::to_text) format.  Vertex ids must cover
    /// `1..=n` exactly; `b` lines, when present, must cover every vertex.
    pub fn from_text(text: &str) -> Result<Self, DrawingError> {
        let mut coords: BTreeMap<u32, Point<Rational>> = BTreeMap::new();
        let mut sides: BTreeMap<u32, Side> = BTreeMap::new();
        let mut edges: Vec<(u32, u32)> = Vec::new();
        for (no, tokens) in (Lines { text }).records() {
            match tokens.as_slice() {
                ["v", id, x, y] => {
                    let id = parse_u32(no, "vertex id", id)?;
                    let x = Rational::from_str(x)
                        .map_err(|_| ParseError::new(no, format!("bad coordinate {x:?}")))?;
                    let y = Rational::from_str(y)
                        .map_err(|_| ParseError::new(no, format!("bad coordinate {y:?}")))?;
                    if coords.insert(id, Point::new(x, y)).is_some() {
                        return Err(ParseError::new(no, format!("vertex {id} defined twice")).into());
                    }
                }
                ["b", id, side] => {
                    let id = parse_u32(no, "vertex id", id)?;
                    let side = match *side {
                        "a" => Side::A,
                        "b" => Side::B,
                        other => {
                            return Err(
                                ParseError::new(no, format!("bad side {other:?}")).into()
                            )
                        }
                    };
                    if sides.insert(id, side).is_some() {
                        return Err(ParseError::new(no, format!("side of {id} set twice")).into());
                    }
                }
                ["e", u, v] => {
                    edges.push((parse_u32(no, "vertex id", u)?, parse_u32(no, "vertex id", v)?));
                }
                _ => {
                    return Err(ParseError::new(
                        no,
                        "expected `v <id> <x> <y>`, `b <id> <a|b>` or `e <u> <v>`",
                    )
                    .into())
                }
            }
        }
        let n = coords.keys().next_back().copied().unwrap_or(0);
        if coords.len() != n as usize {
            return Err(DrawingError::InvalidDrawing(format!(
                "vertex ids must cover 1..={n}, got {} of them",
                coords.len()
            )));
        }
        let graph = build_graph(n, edges, sides)?;
        RectilinearDrawing::new(graph, coords.into_values().collect())
    }
}

impl AbstractDrawing {
    /// Render as text: an `n <count>` line, optional `b <id> <a|b>` lines,
    /// `e <u> <v>` lines, then `x <e1u> <e1v> <e2u> <e2v>` crossing lines.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "n {}", self.graph.vertex_count());
        write_graph_lines(&mut out, &self.graph);
        for pair in self.crossings.pairs() {
            let _ = writeln!(
                out,
                "x {} {} {} {}",
                pair.e1.0, pair.e1.1, pair.e2.0, pair.e2.1
            );
        }
        out
    }

    /// Parse the [`to_text`](Self::to_text) format.  The `n` line is
    /// optional; without it the vertex count is the largest endpoint id.
    pub fn from_text(text: &str) -> Result<Self, DrawingError> {
        let mut n: Option<u32> = None;
        let mut sides: BTreeMap<u32, Side> = BTreeMap::new();
        let mut edges: Vec<(u32, u32)> = Vec::new();
        let mut pairs: Vec<((u32, u32), (u32, u32))> = Vec::new();
        for (no, tokens) in (Lines { text }).records() {
            match tokens.as_slice() {
                ["n", count] => {
                    if n.replace(parse_u32(no, "vertex count", count)?).is_some() {
                        return Err(ParseError::new(no, "vertex count set twice").into());
                    }
                }
                ["b", id, side] => {
                    let id = parse_u32(no, "vertex id", id)?;
                    let side = match *side {
                        "a" => Side::A,
                        "b" => Side::B,
                        other => {
                            return Err(
                                ParseError::new(no, format!("bad side {other:?}")).into()
                            )
                        }
                    };
                    if sides.insert(id, side).is_some() {
                        return Err(ParseError::new(no, format!("side of {id} set twice")).into());
                    }
                }
                ["e", u, v] => {
                    edges.push((parse_u32(no, "vertex id", u)?, parse_u32(no, "vertex id", v)?));
                }
                ["x", a, b, c, d] => {
                    let e1 = (parse_u32(no, "vertex id", a)?, parse_u32(no, "vertex id", b)?);
                    let e2 = (parse_u32(no, "vertex id", c)?, parse_u32(no, "vertex id", d)?);
                    pairs.push((e1, e2));
                }
                _ => {
                    return Err(ParseError::new(
                        no,
                        "expected `n <count>`, `b <id> <a|b>`, `e <u> <v>` or \
                         `x <e1u> <e1v> <e2u> <e2v>`",
                    )
                    .into())
                }
            }
        }
        let n = n.unwrap_or_else(|| {
            edges.iter().map(|&(u, v)| u.max(v)).max().unwrap_or(0)
        });
        let graph = build_graph(n, edges, sides)?;
        AbstractDrawing::new(graph, pairs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ratio(n: i64, d: i64) -> Rational {
        Rational::new(BigInt::from(n), BigInt::from(d))
    }

    fn drawing(
        coords: &[(i64, i64)],
        edges: &[(u32, u32)],
    ) -> Result<RectilinearDrawing, DrawingError> {
        let graph = Graph::new(coords.len() as u32, edges.to_vec())?;
        let points = coords.iter().map(|&(x, y)| Point::new(ratio(x, 1), ratio(y, 1))).collect();
        RectilinearDrawing::new(graph, points)
    }

    #[test]
    fn graph_validation_rejects_bad_edges() {
        assert!(matches!(Graph::new(3, vec![(1, 1)]), Err(DrawingError::InvalidGraph(_))));
        assert!(matches!(Graph::new(3, vec![(1, 4)]), Err(DrawingError::InvalidGraph(_))));
        assert!(matches!(Graph::new(3, vec![(0, 2)]), Err(DrawingError::InvalidGraph(_))));
        assert!(matches!(
            Graph::new(3, vec![(1, 2), (2, 1)]),
            Err(DrawingError::InvalidGraph(_))
        ));
    }

    #[test]
    fn bipartition_must_two_color_all_edges() {
        assert!(Graph::with_bipartition(4, vec![(1, 3), (2, 4)], &[1, 2], &[3, 4]).is_ok());
        assert!(matches!(
            Graph::with_bipartition(4, vec![(1, 2)], &[1, 2], &[3, 4]),
            Err(DrawingError::InvalidGraph(_))
        ));
        assert!(matches!(
            Graph::with_bipartition(4, vec![(1, 3)], &[1], &[3, 4]),
            Err(DrawingError::InvalidGraph(_))
        ));
        assert!(matches!(
            Graph::with_bipartition(4, vec![(1, 3)], &[1, 2], &[2, 3, 4]),
            Err(DrawingError::InvalidGraph(_))
        ));
    }

    #[test]
    fn x_configuration_has_one_crossing() {
        let d = drawing(&[(0, 0), (2, 2), (0, 2), (2, 0)], &[(1, 2), (3, 4)]).unwrap();
        let crossings = crossings_of(&d).unwrap();
        assert_eq!(crossings.count(), 1);
        assert_eq!(crossings.pairs()[0].pattern, PairPattern::Disjoint);
    }

    #[test]
    fn shared_endpoint_is_not_counted() {
        let d = drawing(&[(0, 0), (1, 0), (2, 1)], &[(1, 2), (2, 3)]).unwrap();
        assert_eq!(crossings_of(&d).unwrap().count(), 0);
    }

    #[test]
    fn convex_complete_counts_choose_4() {
        for (n, expected) in [(4u32, 1usize), (5, 5), (6, 15), (8, 70)] {
            let d = convex_complete_drawing(n);
            assert_eq!(crossings_of(&d).unwrap().count(), expected, "n={n}");
        }
    }

    #[test]
    fn convex_crossings_are_exactly_the_quadruple_diagonals() {
        // Independent oracle: on convex position (parabola order), the 4
        // vertices i<j<k<l cross exactly in the diagonal pair {i,k}×{j,l}.
        for n in 4u32..=8 {
            let d = convex_complete_drawing(n);
            let via_geometry: Vec<((u32, u32), (u32, u32))> =
                crossings_of(&d).unwrap().pairs().iter().map(|p| (p.e1, p.e2)).collect();
            let mut via_quadruples = Vec::new();
            for i in 1..=n {
                for j in i + 1..=n {
                    for k in j + 1..=n {
                        for l in k + 1..=n {
                            let (d1, d2) = ((i, k), (j, l));
                            via_quadruples.push(if d1 <= d2 { (d1, d2) } else { (d2, d1) });
                        }
                    }
                }
            }
            via_quadruples.sort_unstable();
            assert_eq!(via_geometry, via_quadruples, "n={n}");
            assert!(
                crossings_of(&d)
                    .unwrap()
                    .pairs()
                    .iter()
                    .all(|p| p.pattern == PairPattern::Disjoint),
                "n={n}: convex complete crossings all have 4 distinct endpoints"
            );
        }
    }

    #[test]
    fn two_line_bipartite_counts_choose_2_squared() {
        let cases =
            [(2u32, 2u32, 1usize), (3, 3, 9), (1, 6, 0), (4, 5, 60), (2, 5, 10)];
        for (m, n, expected) in cases {
            let d = two_line_bipartite_drawing(m, n);
            assert_eq!(crossings_of(&d).unwrap().count(), expected, "m={m} n={n}");
        }
    }

    #[test]
    fn two_line_drawing_is_bipartite_with_sides_in_order() {
        let d = two_line_bipartite_drawing(3, 2);
        let (a, b) = d.graph().bipartition().unwrap();
        assert_eq!(a, vec![1, 2, 3]);
        assert_eq!(b, vec![4, 5]);
    }

    #[test]
    fn coincident_vertices_are_rejected() {
        let err = drawing(&[(0, 0), (1, 1), (0, 0)], &[(1, 2)]).unwrap_err();
        assert_eq!(err, DrawingError::CoincidentVertices { u: 1, v: 3 });
    }

    #[test]
    fn vertex_on_edge_interior_is_rejected() {
        let d = drawing(&[(0, 0), (4, 0), (2, 0), (2, 3)], &[(1, 2), (3, 4)]).unwrap();
        let err = crossings_of(&d).unwrap_err();
        assert_eq!(err, DrawingError::EdgeThroughVertex { eu: 1, ev: 2, vertex: 3 });
        // An isolated vertex inside an edge is just as degenerate.
        let d = drawing(&[(0, 0), (4, 0), (1, 0)], &[(1, 2)]).unwrap();
        let err = crossings_of(&d).unwrap_err();
        assert_eq!(err, DrawingError::EdgeThroughVertex { eu: 1, ev: 2, vertex: 3 });
    }

    #[test]
    fn overlapping_collinear_edges_are_rejected() {
        // Overlap implies some endpoint sits inside the other edge, which
        // the vertex pass reports first.
        let d = drawing(&[(0, 0), (2, 0), (1, 0), (3, 0)], &[(1, 2), (3, 4)]).unwrap();
        assert_eq!(
            crossings_of(&d).unwrap_err(),
            DrawingError::EdgeThroughVertex { eu: 1, ev: 2, vertex: 3 }
        );
    }

    #[test]
    fn pattern_tags_follow_shared_endpoints_and_sides() {
        let g = Graph::complete(5);
        assert_eq!(g.pattern_of((1, 3), (2, 4)), PairPattern::Disjoint);
        assert_eq!(g.pattern_of((1, 3), (3, 5)), PairPattern::SharedOne(None));
        let g = Graph::complete_bipartite(2, 2);
        assert_eq!(g.pattern_of((1, 3), (2, 3)), PairPattern::SharedOne(Some(Side::B)));
        assert_eq!(g.pattern_of((1, 3), (1, 4)), PairPattern::SharedOne(Some(Side::A)));
        assert_eq!(g.pattern_of((1, 3), (2, 4)), PairPattern::Disjoint);
    }

    #[test]
    fn abstract_drawing_validates_and_tags() {
        let d = AbstractDrawing::new(Graph::complete(5), vec![((1, 3), (2, 4))]).unwrap();
        assert_eq!(d.crossings().count(), 1);
        assert_eq!(d.crossings().pairs()[0].pattern, PairPattern::Disjoint);

        let err = AbstractDrawing::new(Graph::complete(3), vec![((1, 4), (2, 3))]).unwrap_err();
        assert!(matches!(err, DrawingError::InvalidDrawing(_)), "{err}");
        let err =
            AbstractDrawing::new(Graph::complete(4), vec![((1, 2), (2, 1))]).unwrap_err();
        assert!(matches!(err, DrawingError::InvalidDrawing(_)), "{err}");
        let err = AbstractDrawing::new(
            Graph::complete(5),
            vec![((1, 3), (2, 4)), ((2, 4), (1, 3))],
        )
        .unwrap_err();
        assert!(matches!(err, DrawingError::InvalidDrawing(_)), "{err}");
    }

    fn transformed(
        d: &RectilinearDrawing,
        f: impl Fn(&Point<Rational>) -> Point<Rational>,
    ) -> RectilinearDrawing {
        RectilinearDrawing::new(d.graph().clone(), d.coords().iter().map(f).collect())
            .expect("transform preserves distinctness")
    }

    #[test]
    fn crossings_survive_translation_rotation_and_scaling() {
        for base in [convex_complete_drawing(6), two_line_bipartite_drawing(3, 3)] {
            let reference = crossings_of(&base).unwrap();
            let translated = base.translated(&ratio(7, 3), &ratio(-2, 1));
            assert_eq!(crossings_of(&translated).unwrap(), reference);
            // Exact rotation by the 3-4-5 angle: (x,y) ↦ ((3x−4y)/5, (4x+3y)/5).
            let rotated = transformed(&base, |p| {
                Point::new(
                    (ratio(3, 5) * &p.x) - (ratio(4, 5) * &p.y),
                    (ratio(4, 5) * &p.x) + (ratio(3, 5) * &p.y),
                )
            });
            assert_eq!(crossings_of(&rotated).unwrap(), reference);
            let scaled = transformed(&base, |p| {
                Point::new(ratio(5, 2) * &p.x, ratio(5, 2) * &p.y)
            });
            assert_eq!(crossings_of(&scaled).unwrap(), reference);
        }
    }

    proptest! {
        #[test]
        fn crossing_count_is_invariant_under_random_similarity(
            dx in -50i64..50, dy in -50i64..50, den in 1i64..20, num in 1i64..30,
        ) {
            let base = convex_complete_drawing(5);
            let moved = transformed(&base, |p| Point::new(
                ratio(num, den) * &p.x + ratio(dx, den),
                ratio(num, den) * &p.y + ratio(dy, den),
            ));
            prop_assert_eq!(crossings_of(&moved).unwrap(), crossings_of(&base).unwrap());
        }
    }

    #[test]
    fn rectilinear_text_round_trips() {
        for d in [convex_complete_drawing(6), two_line_bipartite_drawing(3, 2)] {
            let text = d.to_text();
            let back = RectilinearDrawing::from_text(&text).unwrap();
            assert_eq!(back, d);
            assert_eq!(back.to_text(), text);
        }
    }

    #[test]
    fn rectilinear_text_parses_rational_coordinates() {
        let text = "v 1 1/2 0\nv 2 3/2 -7/3\ne 1 2\n";
        let d = RectilinearDrawing::from_text(text).unwrap();
        assert_eq!(d.point(1).x, ratio(1, 2));
        assert_eq!(d.point(2).y, ratio(-7, 3));
    }

    #[test]
    fn abstract_text_round_trips() {
        let d = AbstractDrawing::new(Graph::complete(5), vec![((1, 3), (2, 4))]).unwrap();
        let text = d.to_text();
        let back = AbstractDrawing::from_text(&text).unwrap();
        assert_eq!(back, d);
        assert_eq!(back.crossings().count(), 1);

        let bip = AbstractDrawing::new(
            Graph::complete_bipartite(2, 2),
            vec![((1, 4), (2, 3))],
        )
        .unwrap();
        let back = AbstractDrawing::from_text(&bip.to_text()).unwrap();
        assert_eq!(back, bip);
        assert_eq!(back.graph().side_of(4), Some(Side::B));
    }

    #[test]
    fn malformed_files_are_rejected_with_lines() {
        let err = RectilinearDrawing::from_text("v 1 0 0\nq 2\n").unwrap_err();
        assert!(matches!(err, DrawingError::Parse(ParseError { line: 2, .. })), "{err}");
        let err = RectilinearDrawing::from_text("v 1 1/0 0\n").unwrap_err();
        assert!(matches!(err, DrawingError::Parse(ParseError { line: 1, .. })), "{err}");
        let err = RectilinearDrawing::from_text("v 1 0 0\nv 3 1 1\ne 1 3\n").unwrap_err();
        assert!(matches!(err, DrawingError::InvalidDrawing(_)), "{err}");
        let err = AbstractDrawing::from_text("e 1 2\ne 3 4\nx 1 2 1 3\n").unwrap_err();
        assert!(matches!(err, DrawingError::InvalidDrawing(_)), "{err}");
        let err = AbstractDrawing::from_text("e 1 2\nx 1 2\n").unwrap_err();
        assert!(matches!(err, DrawingError::Parse(ParseError { line: 2, .. })), "{err}");
    }

    #[test]
    fn float_drawings_count_too() {
        let graph = Graph::new(4, vec![(1, 2), (3, 4)]).unwrap();
        let coords = vec![
            Point::new(0.0f64, 0.0),
            Point::new(2.0, 2.0),
            Point::new(0.0, 2.0),
            Point::new(2.0, 0.0),
        ];
        let d = RectilinearDrawing::new(graph, coords).unwrap();
        assert_eq!(crossings_of(&d).unwrap().count(), 1);
    }
}
