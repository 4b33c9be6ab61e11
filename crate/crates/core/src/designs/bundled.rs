//! Triple systems shipped as data files.
//!
//! The searches that produce these are deterministic but not instant at every
//! budget, so canonical outcomes are bundled and re-verified on load: the
//! verifier, not the file's origin, is what makes them trustworthy.
//! Regenerate with `cargo run --release --example regen_designs`.

use super::{ResolvableDesign, TriangleMatchingDecomposition, Verify};

/// Resolvable triple system on 15 points: 7 classes of 5 triples.
pub fn kts15() -> ResolvableDesign {
    let d = ResolvableDesign::parse(include_str!("../../data/kts15.txt"))
        .expect("bundled 15-point triple system parses");
    let report = d.verify();
    assert!(report.is_valid(), "bundled 15-point triple system invalid: {report}");
    assert_eq!((d.point_count, d.block_size), (15, 3));
    d
}

/// Triangle classes plus matching on 18 points: 8 classes of 6 triangles
/// and a 9-edge perfect matching.
pub fn nkts18() -> TriangleMatchingDecomposition {
    let d = TriangleMatchingDecomposition::parse(include_str!("../../data/nkts18.txt"))
        .expect("bundled 18-point decomposition parses");
    let report = d.verify();
    assert!(report.is_valid(), "bundled 18-point decomposition invalid: {report}");
    assert_eq!(d.point_count, 18);
    d
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_kts15_is_valid() {
        let d = kts15();
        assert_eq!(d.classes.len(), 7);
    }

    #[test]
    fn bundled_nkts18_is_valid() {
        let d = nkts18();
        assert_eq!(d.triangle_classes.len(), 8);
        assert_eq!(d.matching.len(), 9);
    }
}
