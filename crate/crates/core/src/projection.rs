//! Greedy matching of a set's points onto an ordered anchor list, and the
//! induced projection.

use crate::error::{Error, Result};
use crate::family::{MSet, Point};
use crate::loss::euclidean;

/// Result of matching a set against an ordered anchor list.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    /// (matched point, anchor) pairs in anchor order.
    pub pairs: Vec<(Point, Point)>,
    /// Points left unmatched, in their original order within the set.
    pub notail: Vec<Point>,
    /// Anchors followed by the unmatched remainder, exact duplicates dropped.
    pub proj: Vec<Point>,
}

/// Greedily consumes anchors in order, matching each to the nearest (by
/// Euclidean distance) still-unmatched point of the set; ties keep the
/// lowest point index. With no anchors, `notail` and `proj` are the set
/// itself.
pub fn closepoints_notail_proj(set: &MSet, anchors: &[Point]) -> Result<Projection> {
    if anchors.len() > set.len() {
        return Err(Error::InvalidInput(format!(
            "{} anchors cannot be matched within a set of {} points",
            anchors.len(),
            set.len()
        )));
    }
    for a in anchors {
        if a.dim() != set.dim() {
            return Err(Error::DimensionMismatch {
                expected: set.dim(),
                found: a.dim(),
            });
        }
    }
    let mut matched = vec![false; set.len()];
    let mut pairs = Vec::with_capacity(anchors.len());
    for b in anchors {
        let mut best: Option<(usize, f64)> = None;
        for (i, p) in set.points().iter().enumerate() {
            if matched[i] {
                continue;
            }
            let d = euclidean(p.coords(), b.coords());
            if best.map_or(true, |(_, bd)| d < bd) {
                best = Some((i, d));
            }
        }
        let (i, _) = best.expect("anchors do not outnumber points");
        matched[i] = true;
        pairs.push((set.points()[i].clone(), b.clone()));
    }
    let notail: Vec<Point> = set
        .points()
        .iter()
        .enumerate()
        .filter(|(i, _)| !matched[*i])
        .map(|(_, p)| p.clone())
        .collect();
    let mut proj: Vec<Point> = Vec::with_capacity(anchors.len() + notail.len());
    for p in anchors.iter().chain(notail.iter()) {
        if !proj.contains(p) {
            proj.push(p.clone());
        }
    }
    Ok(Projection { pairs, notail, proj })
}
