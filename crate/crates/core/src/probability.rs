//! Exact survival probabilities, closed-form bounds, and the comparison
//! table across scheme families.
//!
//! The survival probability `q` of a scheme is the chance that two crossing
//! edges keep crossing after the random split: both copies land on the same
//! plane *and* in the same type there.  [`exact_q`] computes `q` by brute
//! enumeration of ordered label tuples — `s⁴` tuples for an edge pair with
//! four distinct endpoints, `s³`/`s²` when endpoints are shared, the
//! side-respecting analogues for bipartite schemes — summing the exact
//! plane-weight products.  Ordered tuples make every symmetry factor emerge
//! from the enumeration itself instead of being counted by hand, and exact
//! rational summation makes the result independent of enumeration order.
//!
//! [`closed_form`] evaluates each scheme family's survival formula directly
//! from `k` (or from design parameters).  The two routes are kept strictly
//! separate so that tests can certify their agreement; nothing in this
//! module derives one from the other.
//!
//! [`bounds_table`] lays the families side by side per `k` — previous-best
//! bound, best applicable new bound with its case tag, and the lower bound —
//! and [`verify_counting_cases`] breaks the enumeration for a family down
//! into named buckets (same label, same edge, distinct edges of one block,
//! …) and checks every bucket against its closed-form count.

use crate::schemes::{validate_scheme, BaseEdge, BaseLabelSet, Scheme, Side};
use crate::Rational;
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::ops::RangeInclusive;
use std::str::FromStr;

/// Errors from probability computations.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ProbabilityError {
    /// Scheme failed validation, or enumeration hit an uncovered base edge.
    #[error("invalid scheme: {0}")]
    InvalidScheme(String),
    /// A closed-form case was evaluated outside its `k` family.
    #[error("case {case} does not apply at k={k}: {why}")]
    IncompatibleK { case: String, k: u32, why: String },
    /// The pattern's side annotation does not fit the scheme's label set.
    #[error("pattern does not fit the scheme: {0}")]
    PatternMismatch(String),
    /// Counting-case audit requested for a scheme outside the known families.
    #[error("no counting-case table applies: {0}")]
    UnsupportedFamily(String),
    /// Table endpoints out of order or below the smallest supported k.
    #[error("bad k range: {0}")]
    BadRange(String),
}

/// How two crossing edges relate through their endpoints.
///
/// In a drawing with fewest crossings, crossing edges always have four
/// distinct endpoints ([`Disjoint`](PairPattern::Disjoint)); the other two
/// patterns make expectations exact for arbitrary input drawings, where
/// adjacent edges may cross.  For bipartite schemes a shared endpoint lies
/// on a definite side, which changes the label space — hence the side
/// annotation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PairPattern {
    /// Four distinct endpoints.
    Disjoint,
    /// Exactly one endpoint shared; for bipartite schemes, the side it is on.
    SharedOne(Option<Side>),
    /// Both endpoints shared (parallel edges).
    Parallel,
}

impl fmt::Display for PairPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PairPattern::Disjoint => write!(f, "disjoint"),
            PairPattern::SharedOne(None) => write!(f, "shared-one"),
            PairPattern::SharedOne(Some(Side::A)) => write!(f, "shared-one-a"),
            PairPattern::SharedOne(Some(Side::B)) => write!(f, "shared-one-b"),
            PairPattern::Parallel => write!(f, "parallel"),
        }
    }
}

impl FromStr for PairPattern {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "disjoint" => Ok(PairPattern::Disjoint),
            "shared-one" => Ok(PairPattern::SharedOne(None)),
            "shared-one-a" => Ok(PairPattern::SharedOne(Some(Side::A))),
            "shared-one-b" => Ok(PairPattern::SharedOne(Some(Side::B))),
            "parallel" => Ok(PairPattern::Parallel),
            other => Err(format!(
                "unknown pattern {other:?}; expected disjoint, shared-one, \
                 shared-one-a, shared-one-b or parallel"
            )),
        }
    }
}

/// An exact survival probability together with where it came from.
///
/// `value` is always in `[0, 1]`.  For the shipped unipartite schemes its
/// reduced denominator divides `s⁴·k²` (the tuple space times the squared
/// loop-weight denominator); for the shipped bipartite schemes it divides
/// `a²·b²`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SurvivalProbability {
    /// The exact probability.
    pub value: Rational,
    /// Scheme summary (label counts and plane count), for reports.
    pub scheme: String,
    /// Which endpoint pattern was enumerated.
    pub pattern: PairPattern,
}

impl SurvivalProbability {
    /// The value as a float, for display only.
    pub fn approx(&self) -> f64 {
        rational_to_f64(&self.value)
    }
}

impl fmt::Display for SurvivalProbability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "q = {} ({} pattern, scheme {})", self.value, self.pattern, self.scheme)
    }
}

// ---------------------------------------------------------------------------
// enumeration oracle
// ---------------------------------------------------------------------------

/// Exact survival probability of `sch` for a crossing pair with the given
/// endpoint pattern, by enumeration over ordered label tuples.
///
/// Every endpoint draws an independent uniform label (from its own side for
/// bipartite schemes); shared endpoints draw a single common label.  A tuple
/// survives with the total weight of planes that carry both induced base
/// edges in the same type.  Errors with
/// [`InvalidScheme`](ProbabilityError::InvalidScheme) when the scheme fails
/// validation, and with
/// [`PatternMismatch`](ProbabilityError::PatternMismatch) when the pattern's
/// side annotation does not fit the label set kind.
pub fn exact_q(
    sch: &Scheme,
    pattern: PairPattern,
) -> Result<SurvivalProbability, ProbabilityError> {
    check_valid(sch)?;
    let labels = sch.labels();
    let bipartite = matches!(labels, BaseLabelSet::Bipartite { .. });
    match pattern {
        PairPattern::SharedOne(Some(_)) if !bipartite => {
            return Err(ProbabilityError::PatternMismatch(
                "unipartite labels have no sides; use plain shared-one".into(),
            ))
        }
        PairPattern::SharedOne(None) if bipartite => {
            return Err(ProbabilityError::PatternMismatch(
                "bipartite shared-one needs the side of the shared endpoint \
                 (shared-one-a or shared-one-b)"
                    .into(),
            ))
        }
        _ => {}
    }

    let mut survived = Rational::zero();
    let mut tuples: u64 = 0;
    let mut visit = |e1: BaseEdge, e2: BaseEdge| -> Result<(), ProbabilityError> {
        let mut mass = Ratio::<u64>::zero();
        for_each_surviving_plane(sch, e1, e2, |_, w| mass += w)?;
        if !mass.is_zero() {
            survived += big(mass);
        }
        tuples += 1;
        Ok(())
    };

    // First/second endpoint ranges of each edge: equal for unipartite
    // schemes, the two sides for bipartite ones.
    let (r1, r2): (RangeInclusive<u32>, RangeInclusive<u32>) = if bipartite {
        (labels.side_labels(Some(Side::A)), labels.side_labels(Some(Side::B)))
    } else {
        (labels.side_labels(None), labels.side_labels(None))
    };

    match pattern {
        PairPattern::Disjoint => {
            for u in r1.clone() {
                for v in r2.clone() {
                    for w in r1.clone() {
                        for z in r2.clone() {
                            visit(BaseEdge::new(u, v), BaseEdge::new(w, z))?;
                        }
                    }
                }
            }
        }
        PairPattern::SharedOne(side) => {
            // Range of the shared endpoint and of the two free ones.
            let (rc, rf) = match side {
                None => (r1.clone(), r1.clone()),
                Some(sd) => {
                    let other = match sd {
                        Side::A => Side::B,
                        Side::B => Side::A,
                    };
                    (labels.side_labels(Some(sd)), labels.side_labels(Some(other)))
                }
            };
            for c in rc {
                for v in rf.clone() {
                    for z in rf.clone() {
                        visit(BaseEdge::new(c, v), BaseEdge::new(c, z))?;
                    }
                }
            }
        }
        PairPattern::Parallel => {
            for u in r1.clone() {
                for v in r2.clone() {
                    visit(BaseEdge::new(u, v), BaseEdge::new(u, v))?;
                }
            }
        }
    }

    Ok(SurvivalProbability {
        value: survived / Rational::from_integer(BigInt::from(tuples)),
        scheme: sch.summary(),
        pattern,
    })
}

fn check_valid(sch: &Scheme) -> Result<(), ProbabilityError> {
    let report = validate_scheme(sch);
    if report.is_valid() {
        Ok(())
    } else {
        Err(ProbabilityError::InvalidScheme(report.to_string()))
    }
}

/// Call `f(plane, w₁·w₂)` for every plane that carries both edges in the
/// same type.  Distributions are plane-sorted, so this is a linear merge.
fn for_each_surviving_plane(
    sch: &Scheme,
    e1: BaseEdge,
    e2: BaseEdge,
    mut f: impl FnMut(u16, Ratio<u64>),
) -> Result<(), ProbabilityError> {
    let d1 = sch.distribution(e1);
    let d2 = sch.distribution(e2);
    if d1.is_empty() || d2.is_empty() {
        let missing = if d1.is_empty() { e1 } else { e2 };
        return Err(ProbabilityError::InvalidScheme(format!(
            "label tuple induces base edge {missing}, which no plane carries"
        )));
    }
    let (mut i, mut j) = (0, 0);
    while i < d1.len() && j < d2.len() {
        let (p1, w1) = d1[i];
        let (p2, w2) = d2[j];
        match p1.cmp(&p2) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                if sch.type_of(p1, e1) == sch.type_of(p1, e2) {
                    f(p1, w1.ratio() * w2.ratio());
                }
                i += 1;
                j += 1;
            }
        }
    }
    Ok(())
}

fn big(r: Ratio<u64>) -> Rational {
    Rational::new(BigInt::from(*r.numer()), BigInt::from(*r.denom()))
}

fn rat(n: u128, d: u128) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

fn rational_to_f64(r: &Rational) -> f64 {
    r.numer().to_f64().unwrap_or(f64::NAN) / r.denom().to_f64().unwrap_or(f64::NAN)
}

/// Render a rational rounded to four decimals, e.g. `1/49` → `"0.0204"`.
pub fn render_4dp(r: &Rational) -> String {
    let scaled = (r * Rational::from_integer(BigInt::from(10_000))).round();
    let (int, frac) = scaled.to_integer().div_rem(&BigInt::from(10_000));
    format!("{int}.{:04}", frac.abs().to_u32().expect("fraction below 10000"))
}

// ---------------------------------------------------------------------------
// closed forms
// ---------------------------------------------------------------------------

/// The survival-probability formula of one scheme family.
///
/// Each case applies only to its own `k` family; [`closed_form`] rejects
/// other `k` with [`IncompatibleK`](ProbabilityError::IncompatibleK).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClosedForm {
    /// `3/8` at `k = 2`: the classic two-plane constant.
    TwoPlanes,
    /// `2/k² − 1/k³`: pair-block scheme on `s = k` labels, the previous
    /// best upper bound for every `k`.
    PairScheme,
    /// `1/k²`: lower bound on every survival ratio.
    Lower,
    /// `(1 + (s−1)(ℓ² − ℓ))/s³`: scheme from a resolvable design on `s`
    /// labels with block size `ℓ`, which yields `k = (s−1)/(ℓ−1) + 1`
    /// planes.
    Design { s: u32, block_size: u32 },
    /// `235/2401` at `k = 4`: the hand-crafted 7-label scheme.
    SevenLabel,
    /// `(12k − 11)/(2k − 1)³` for `k ≡ 2 (mod 3)`: triple-block design on
    /// `s = 2k − 1` labels.
    TripleDesign,
    /// `(36k − 35)/(3k − 2)³` for `k ≡ 2 (mod 4)`: quadruple-block design
    /// on `s = 3k − 2` labels.
    QuadDesign,
    /// `(3k − 1)/(2k³)` for `k ≡ 0 (mod 3)`: triangle+matching scheme on
    /// `s = 2k` labels.
    TriangleMatching,
    /// `2/(k(k + 1))` for odd `k`: matching-with-loops scheme on
    /// `s = k + 1` labels.
    OddLoops,
    /// `1/k²`: the bipartite scheme's exact survival probability.
    Bipartite,
}

impl fmt::Display for ClosedForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClosedForm::TwoPlanes => write!(f, "two-planes"),
            ClosedForm::PairScheme => write!(f, "pair-scheme"),
            ClosedForm::Lower => write!(f, "lower"),
            ClosedForm::Design { s, block_size } => write!(f, "design({s},{block_size})"),
            ClosedForm::SevenLabel => write!(f, "seven-label"),
            ClosedForm::TripleDesign => write!(f, "triple-design"),
            ClosedForm::QuadDesign => write!(f, "quad-design"),
            ClosedForm::TriangleMatching => write!(f, "triangle-matching"),
            ClosedForm::OddLoops => write!(f, "odd-loops"),
            ClosedForm::Bipartite => write!(f, "bipartite"),
        }
    }
}

impl FromStr for ClosedForm {
    type Err = String;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        match text {
            "two-planes" => return Ok(ClosedForm::TwoPlanes),
            "pair-scheme" => return Ok(ClosedForm::PairScheme),
            "lower" => return Ok(ClosedForm::Lower),
            "seven-label" => return Ok(ClosedForm::SevenLabel),
            "triple-design" => return Ok(ClosedForm::TripleDesign),
            "quad-design" => return Ok(ClosedForm::QuadDesign),
            "triangle-matching" => return Ok(ClosedForm::TriangleMatching),
            "odd-loops" => return Ok(ClosedForm::OddLoops),
            "bipartite" => return Ok(ClosedForm::Bipartite),
            _ => {}
        }
        if let Some(args) = text.strip_prefix("design(").and_then(|t| t.strip_suffix(')')) {
            let mut parts = args.split(',');
            let s = parts.next().map(str::trim).unwrap_or("").parse::<u32>();
            let l = parts.next().map(str::trim).unwrap_or("").parse::<u32>();
            if let (Ok(s), Ok(block_size), None) = (s, l, parts.next()) {
                return Ok(ClosedForm::Design { s, block_size });
            }
        }
        Err(format!(
            "unknown case {text:?}; expected two-planes, pair-scheme, lower, \
             design(S,L), seven-label, triple-design, quad-design, \
             triangle-matching, odd-loops or bipartite"
        ))
    }
}

/// Evaluate a closed-form case at `k`, exactly.
///
/// Errors with [`IncompatibleK`](ProbabilityError::IncompatibleK) when `k`
/// lies outside the case's family (congruence classes listed on
/// [`ClosedForm`]).
pub fn closed_form(case: ClosedForm, k: u32) -> Result<Rational, ProbabilityError> {
    let need = |cond: bool, why: &str| -> Result<(), ProbabilityError> {
        if cond {
            Ok(())
        } else {
            Err(ProbabilityError::IncompatibleK {
                case: case.to_string(),
                k,
                why: why.to_string(),
            })
        }
    };
    let kk = k as u128;
    match case {
        ClosedForm::TwoPlanes => {
            need(k == 2, "the two-plane constant 3/8 is the k=2 case")?;
            Ok(rat(3, 8))
        }
        ClosedForm::PairScheme => {
            need(k >= 2, "needs at least two planes")?;
            Ok(rat(2 * kk - 1, kk * kk * kk))
        }
        ClosedForm::Lower => {
            need(k >= 1, "needs at least one plane")?;
            Ok(rat(1, kk * kk))
        }
        ClosedForm::Design { s, block_size } => {
            need(
                block_size >= 2 && block_size <= s,
                "block size must be between 2 and the label count",
            )?;
            need(
                (s - 1) % (block_size - 1) == 0,
                "block size b needs s ≡ 1 (mod b−1) for a resolvable design",
            )?;
            let planes = (s - 1) / (block_size - 1) + 1;
            need(
                k == planes,
                &format!("a design with s={s}, block size {block_size} yields k={planes}"),
            )?;
            let (s, l) = (s as u128, block_size as u128);
            Ok(rat(1 + (s - 1) * (l * l - l), s * s * s))
        }
        ClosedForm::SevenLabel => {
            need(k == 4, "the 7-label scheme has four planes")?;
            Ok(rat(235, 2401))
        }
        ClosedForm::TripleDesign => {
            need(k % 3 == 2, "needs k ≡ 2 (mod 3), so that s = 2k−1 ≡ 3 (mod 6)")?;
            let s = 2 * kk - 1;
            Ok(rat(12 * kk - 11, s * s * s))
        }
        ClosedForm::QuadDesign => {
            need(k % 4 == 2, "needs k ≡ 2 (mod 4), so that s = 3k−2 ≡ 4 (mod 12)")?;
            let s = 3 * kk - 2;
            Ok(rat(36 * kk - 35, s * s * s))
        }
        ClosedForm::TriangleMatching => {
            need(k % 3 == 0 && k > 0, "needs k ≡ 0 (mod 3), so that 3 divides s = 2k")?;
            Ok(rat(3 * kk - 1, 2 * kk * kk * kk))
        }
        ClosedForm::OddLoops => {
            need(k % 2 == 1, "needs odd k, so that s = k+1 is even")?;
            Ok(rat(2, kk * (kk + 1)))
        }
        ClosedForm::Bipartite => {
            need(k >= 1, "needs at least one plane")?;
            Ok(rat(1, kk * kk))
        }
    }
}

// ---------------------------------------------------------------------------
// bounds table
// ---------------------------------------------------------------------------

/// One row of the bounds comparison: previous best bound, best new bound
/// with the case that achieves it, and the lower bound, all exact.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundsRow {
    pub k: u32,
    /// `2/k² − 1/k³`, the previous best upper bound.
    pub old_bound: Rational,
    /// Minimum over the applicable cases (never above `old_bound`).
    pub new_bound: Rational,
    /// The case achieving `new_bound`; `pair-scheme` when nothing beats it.
    pub case: ClosedForm,
    /// `1/k²`.
    pub lower_bound: Rational,
    /// Caveats for this row (skipped cases, uncertified bounds, known
    /// misquotes of the rendered values).
    pub notes: Vec<String>,
}

impl fmt::Display for BoundsRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "k={}: old {} ({})  new {} ({}) via {}  lower {} ({})",
            self.k,
            self.old_bound,
            render_4dp(&self.old_bound),
            self.new_bound,
            render_4dp(&self.new_bound),
            self.case,
            self.lower_bound,
            render_4dp(&self.lower_bound),
        )?;
        for note in &self.notes {
            write!(f, "\n    note: {note}")?;
        }
        Ok(())
    }
}

/// Build the comparison table for `k_min..=k_max`.
///
/// Per `k` the candidates are the cases whose congruence admits `k` *and*
/// whose backing scheme exists: the 7-label scheme at `k = 4`, triple-block
/// designs at `k ≡ 2 (mod 3)`, quadruple-block designs at `k ≡ 2 (mod 4)`,
/// triangle+matching schemes at `k ≡ 0 (mod 3)` except `k = 3` (no 6-label
/// decomposition exists), and the matching-with-loops scheme at odd `k`.
/// The `k = 6` triangle+matching bound is included but flagged, because the
/// 12-label decomposition it would need does not exist either.
pub fn bounds_table(k_min: u32, k_max: u32) -> Result<Vec<BoundsRow>, ProbabilityError> {
    if k_min < 2 || k_min > k_max {
        return Err(ProbabilityError::BadRange(format!(
            "need 2 <= k_min <= k_max, got k_min={k_min}, k_max={k_max}"
        )));
    }
    (k_min..=k_max).map(bounds_row).collect()
}

fn bounds_row(k: u32) -> Result<BoundsRow, ProbabilityError> {
    let old_bound = closed_form(ClosedForm::PairScheme, k)?;
    let lower_bound = closed_form(ClosedForm::Lower, k)?;
    let mut notes = Vec::new();

    let mut candidates = Vec::new();
    if k == 4 {
        candidates.push(ClosedForm::SevenLabel);
    }
    if k % 3 == 2 {
        candidates.push(ClosedForm::TripleDesign);
    }
    if k % 4 == 2 {
        candidates.push(ClosedForm::QuadDesign);
    }
    if k % 3 == 0 {
        if k == 3 {
            notes.push(
                "triangle-matching case skipped: no 6-label triangle+matching \
                 decomposition exists"
                    .to_string(),
            );
        } else {
            candidates.push(ClosedForm::TriangleMatching);
        }
    }
    if k % 2 == 1 && k >= 3 {
        candidates.push(ClosedForm::OddLoops);
    }

    let mut case = ClosedForm::PairScheme;
    let mut new_bound = old_bound.clone();
    for candidate in candidates {
        let value = closed_form(candidate, k)?;
        if value < new_bound {
            case = candidate;
            new_bound = value;
        }
    }

    if k == 6 && case == ClosedForm::TriangleMatching {
        notes.push(
            "bound stated without a certifying scheme: no 12-label \
             triangle+matching decomposition exists"
                .to_string(),
        );
    }
    if k == 7 {
        notes.push(format!(
            "lower bound 1/49 renders {}; the widely circulated figure \
             0.2040 transposes the digits",
            render_4dp(&lower_bound)
        ));
    }

    Ok(BoundsRow { k, old_bound, new_bound, case, lower_bound, notes })
}

// ---------------------------------------------------------------------------
// counting-case audit
// ---------------------------------------------------------------------------

/// Scheme families with a known per-case count decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CountingFamily {
    /// The 7-label, 4-plane scheme.
    SevenLabel,
    /// A scheme from a resolvable design plus a loop plane.
    Design,
    /// The odd-`k` matching scheme with loops spread over all planes.
    OddLoops,
    /// Triangle planes plus a matching plane with loops.
    TriangleMatching,
}

impl fmt::Display for CountingFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CountingFamily::SevenLabel => write!(f, "seven-label"),
            CountingFamily::Design => write!(f, "design"),
            CountingFamily::OddLoops => write!(f, "odd-loops"),
            CountingFamily::TriangleMatching => write!(f, "triangle-matching"),
        }
    }
}

impl FromStr for CountingFamily {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "seven-label" => Ok(CountingFamily::SevenLabel),
            "design" => Ok(CountingFamily::Design),
            "odd-loops" => Ok(CountingFamily::OddLoops),
            "triangle-matching" => Ok(CountingFamily::TriangleMatching),
            other => Err(format!(
                "unknown family {other:?}; expected seven-label, design, \
                 odd-loops or triangle-matching"
            )),
        }
    }
}

/// One named bucket of the survival enumeration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CaseCount {
    pub name: &'static str,
    /// Probability mass measured by enumeration.
    pub measured: Rational,
    /// The family's closed-form count for this bucket.
    pub expected: Rational,
}

impl CaseCount {
    pub fn matches(&self) -> bool {
        self.measured == self.expected
    }
}

/// Result of [`verify_counting_cases`]: the disjoint-pattern enumeration
/// split into the family's named buckets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CaseBreakdown {
    pub family: CountingFamily,
    /// Scheme summary, for reports.
    pub scheme: String,
    /// Size of the enumerated tuple space (`s⁴`).
    pub tuple_count: u64,
    pub cases: Vec<CaseCount>,
    /// Mass that fell outside every named bucket; zero when the audit holds.
    pub unclassified: Rational,
    /// Independently computed `exact_q(sch, Disjoint)`.
    pub q: Rational,
}

impl CaseBreakdown {
    /// True when every bucket hits its closed-form count, nothing was left
    /// unclassified, and the buckets sum to the independently computed `q`.
    pub fn all_match(&self) -> bool {
        let total: Rational =
            self.cases.iter().map(|c| c.measured.clone()).sum::<Rational>() + &self.unclassified;
        self.unclassified.is_zero() && self.cases.iter().all(CaseCount::matches) && total == self.q
    }
}

impl fmt::Display for CaseBreakdown {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "counting cases for scheme {} ({} family), tuple space {}:",
            self.scheme, self.family, self.tuple_count
        )?;
        let scale = Rational::from_integer(BigInt::from(self.tuple_count));
        for case in &self.cases {
            writeln!(
                f,
                "  {}: {} of {} tuples, expected {} — {}",
                case.name,
                &case.measured * &scale,
                self.tuple_count,
                &case.expected * &scale,
                if case.matches() { "ok" } else { "MISMATCH" },
            )?;
        }
        if !self.unclassified.is_zero() {
            writeln!(f, "  unclassified: {} of {} tuples", &self.unclassified * &scale, self.tuple_count)?;
        }
        write!(f, "  total q = {} — {}", self.q, if self.all_match() { "ok" } else { "MISMATCH" })
    }
}

/// Structural relation between the two base edges of a surviving tuple.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Relation {
    SameLoop,
    DistinctLoops,
    LoopEdge,
    SameEdge,
    SharedVertex,
    DisjointEdges,
}

fn relation(e1: BaseEdge, e2: BaseEdge) -> Relation {
    match (e1.is_loop(), e2.is_loop()) {
        (true, true) => {
            if e1 == e2 {
                Relation::SameLoop
            } else {
                Relation::DistinctLoops
            }
        }
        (true, false) | (false, true) => Relation::LoopEdge,
        (false, false) => {
            if e1 == e2 {
                Relation::SameEdge
            } else if e1.lo() == e2.lo()
                || e1.lo() == e2.hi()
                || e1.hi() == e2.lo()
                || e1.hi() == e2.hi()
            {
                Relation::SharedVertex
            } else {
                Relation::DisjointEdges
            }
        }
    }
}

/// Bucket the disjoint-pattern survival mass by `(plane, relation)`.
fn disjoint_masses(
    sch: &Scheme,
) -> Result<BTreeMap<(u16, Relation), Ratio<u64>>, ProbabilityError> {
    let all = sch.labels().side_labels(None);
    let mut buckets: BTreeMap<(u16, Relation), Ratio<u64>> = BTreeMap::new();
    for u in all.clone() {
        for v in all.clone() {
            for w in all.clone() {
                for z in all.clone() {
                    let e1 = BaseEdge::new(u, v);
                    let e2 = BaseEdge::new(w, z);
                    let rel = relation(e1, e2);
                    for_each_surviving_plane(sch, e1, e2, |plane, mass| {
                        *buckets.entry((plane, rel)).or_insert_with(Ratio::zero) += mass;
                    })?;
                }
            }
        }
    }
    Ok(buckets)
}

fn planes_have_component_size(sch: &Scheme, planes: impl Iterator<Item = u16>, size: usize) -> bool {
    planes
        .map(|p| sch.plane_types(p))
        .all(|types| !types.is_empty() && types.iter().all(|t| t.len() == size))
}

/// Split the disjoint-pattern enumeration of a family scheme into its named
/// buckets and check every bucket against the family's closed-form count.
///
/// Errors with [`UnsupportedFamily`](ProbabilityError::UnsupportedFamily)
/// when the scheme does not have the claimed family's shape.
pub fn verify_counting_cases(
    sch: &Scheme,
    family: CountingFamily,
) -> Result<CaseBreakdown, ProbabilityError> {
    check_valid(sch)?;
    let unsupported = |why: String| ProbabilityError::UnsupportedFamily(why);
    let BaseLabelSet::Unipartite { s } = sch.labels() else {
        return Err(unsupported(format!(
            "family {family} needs a unipartite scheme, got {}",
            sch.summary()
        )));
    };
    let s = s as u128;
    let k = sch.plane_count() as u128;
    let last = sch.plane_count() - 1;
    let s4 = s * s * s * s;

    // Each named bucket: display name, predicate over (plane, relation),
    // closed-form count over the s⁴ tuple space.
    type Pred = Box<dyn Fn(u16, Relation) -> bool>;
    let named: Vec<(&'static str, Pred, Rational)> = match family {
        CountingFamily::SevenLabel => {
            if s != 7 || k != 4 {
                return Err(unsupported(format!(
                    "seven-label family needs s=7, k=4, got {}",
                    sch.summary()
                )));
            }
            vec![
                ("same label", Box::new(|_, r| r == Relation::SameLoop), rat(7, s4)),
                (
                    "loop beside its component edge",
                    Box::new(|_, r| r == Relation::LoopEdge),
                    rat(24, s4),
                ),
                ("same edge", Box::new(|_, r| r == Relation::SameEdge), rat(84, s4)),
                (
                    "distinct edges of one triangle",
                    Box::new(|_, r| {
                        r == Relation::SharedVertex || r == Relation::DisjointEdges
                    }),
                    rat(120, s4),
                ),
            ]
        }
        CountingFamily::Design => {
            let block = sch.plane_types(0).first().map(Vec::len).unwrap_or(0);
            let shape_ok = block >= 2
                && planes_have_component_size(sch, 0..last, block)
                && planes_have_component_size(sch, last..=last, 1)
                && k == (s - 1) / (block as u128 - 1) + 1;
            if !shape_ok {
                return Err(unsupported(format!(
                    "design family needs uniform blocks plus a loop plane, got {}",
                    sch.summary()
                )));
            }
            let l = block as u128;
            vec![
                ("same label", Box::new(|_, r| r == Relation::SameLoop), rat(s, s4)),
                (
                    "same block edge",
                    Box::new(|_, r| r == Relation::SameEdge),
                    rat(2 * s * (s - 1), s4),
                ),
                (
                    "distinct block edges sharing a point",
                    Box::new(|_, r| r == Relation::SharedVertex),
                    rat(4 * s * (s - 1) * (l - 2), s4),
                ),
                (
                    "disjoint edges of one block",
                    Box::new(|_, r| r == Relation::DisjointEdges),
                    rat(s * (s - 1) * (l - 2) * (l - 3), s4),
                ),
            ]
        }
        CountingFamily::OddLoops => {
            let shape_ok = k % 2 == 1 && s == k + 1
                && planes_have_component_size(sch, 0..=last, 2);
            if !shape_ok {
                return Err(unsupported(format!(
                    "odd-loops family needs odd k, s=k+1 and matching-edge \
                     components, got {}",
                    sch.summary()
                )));
            }
            vec![
                (
                    "same matching edge",
                    Box::new(|_, r| r == Relation::SameEdge),
                    rat(2 * k * s, s4),
                ),
                (
                    "loop beside its matching edge",
                    Box::new(|_, r| r == Relation::LoopEdge),
                    rat(4 * s, s4),
                ),
                (
                    "loops of one component",
                    Box::new(|_, r| {
                        r == Relation::SameLoop || r == Relation::DistinctLoops
                    }),
                    rat(2 * s, k * s4),
                ),
            ]
        }
        CountingFamily::TriangleMatching => {
            let shape_ok = s == 2 * k
                && planes_have_component_size(sch, 0..last, 3)
                && planes_have_component_size(sch, last..=last, 2);
            if !shape_ok {
                return Err(unsupported(format!(
                    "triangle-matching family needs triangle planes plus a \
                     matching plane on s=2k labels, got {}",
                    sch.summary()
                )));
            }
            vec![
                (
                    "matching component (edge with its loops)",
                    Box::new(move |p, _| p == last),
                    rat(8 * s, s4),
                ),
                (
                    "same triangle edge",
                    Box::new(move |p, r| p != last && r == Relation::SameEdge),
                    rat(4 * (k - 1) * s, s4),
                ),
                (
                    "distinct edges of one triangle",
                    Box::new(move |p, r| p != last && r == Relation::SharedVertex),
                    rat(8 * (k - 1) * s, s4),
                ),
            ]
        }
    };

    let buckets = disjoint_masses(sch)?;
    let scale = Rational::from_integer(BigInt::from(s4));
    let mut cases: Vec<CaseCount> = named
        .iter()
        .map(|(name, _, expected)| CaseCount {
            name,
            measured: Rational::zero(),
            expected: expected.clone(),
        })
        .collect();
    let mut unclassified = Rational::zero();
    for ((plane, rel), mass) in buckets {
        let share = big(mass) / &scale;
        match named.iter().position(|(_, pred, _)| pred(plane, rel)) {
            Some(i) => cases[i].measured += share,
            None => unclassified += share,
        }
    }

    let q = exact_q(sch, PairPattern::Disjoint)?.value;
    Ok(CaseBreakdown {
        family,
        scheme: sch.summary(),
        tuple_count: s4 as u64,
        cases,
        unclassified,
        q,
    })
}
