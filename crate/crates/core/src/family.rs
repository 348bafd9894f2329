//! Input geometry: points, sets of points, weighted families of sets and
//! center queries.

use std::collections::HashSet;

use crate::error::{Error, Result};

/// A point in d-dimensional Euclidean space with finite coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    coords: Vec<f64>,
}

impl Point {
    /// Builds a point, rejecting empty coordinate lists and non-finite values.
    /// Negative zero is canonicalized to positive zero so that value equality
    /// and the bit-pattern key used for hashing never disagree.
    pub fn new(mut coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidInput("point must have dimension >= 1".into()));
        }
        if coords.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput(
                "point coordinates must be finite".into(),
            ));
        }
        for x in &mut coords {
            if *x == 0.0 {
                *x = 0.0;
            }
        }
        Ok(Point { coords })
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// Exact-equality key usable in hash maps (coordinates are finite, so
    /// bit equality coincides with `==`).
    pub(crate) fn bits(&self) -> Vec<u64> {
        self.coords.iter().map(|x| x.to_bits()).collect()
    }
}

/// A nonempty set of pairwise distinct points sharing one dimension, tagged
/// with an identifier unique within its family.
#[derive(Debug, Clone, PartialEq)]
pub struct MSet {
    id: String,
    points: Vec<Point>,
}

impl MSet {
    /// Builds a set, rejecting empty point lists, mixed dimensions and
    /// duplicate points.
    pub fn new(id: impl Into<String>, points: Vec<Point>) -> Result<Self> {
        let id = id.into();
        if points.is_empty() {
            return Err(Error::InvalidInput(format!(
                "set '{id}' must contain at least one point"
            )));
        }
        let dim = points[0].dim();
        for p in &points[1..] {
            if p.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: p.dim(),
                });
            }
        }
        let mut seen = HashSet::with_capacity(points.len());
        for p in &points {
            if !seen.insert(p.bits()) {
                return Err(Error::InvalidInput(format!(
                    "set '{id}' contains duplicate points"
                )));
            }
        }
        Ok(MSet { id, points })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points[0].dim()
    }
}

/// An ordered, nonempty collection of sets with positive per-set weights.
#[derive(Debug, Clone, PartialEq)]
pub struct SetFamily {
    sets: Vec<MSet>,
    weights: Vec<f64>,
}

impl SetFamily {
    /// Builds a unit-weight family.
    pub fn new(sets: Vec<MSet>) -> Result<Self> {
        let weights = vec![1.0; sets.len()];
        SetFamily::with_weights(sets, weights)
    }

    /// Builds a weighted family, rejecting empty collections, weight lists of
    /// the wrong length, non-positive weights, duplicate ids and mixed
    /// dimensions.
    pub fn with_weights(sets: Vec<MSet>, weights: Vec<f64>) -> Result<Self> {
        if sets.is_empty() {
            return Err(Error::InvalidInput(
                "family must contain at least one set".into(),
            ));
        }
        if weights.len() != sets.len() {
            return Err(Error::InvalidInput(format!(
                "{} weights provided for {} sets",
                weights.len(),
                sets.len()
            )));
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w <= 0.0) {
            return Err(Error::InvalidInput(format!(
                "set weights must be positive and finite, got {w}"
            )));
        }
        let dim = sets[0].dim();
        for s in &sets {
            if s.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: s.dim(),
                });
            }
        }
        let mut ids = HashSet::with_capacity(sets.len());
        for s in &sets {
            if !ids.insert(s.id()) {
                return Err(Error::InvalidInput(format!(
                    "duplicate set id '{}'",
                    s.id()
                )));
            }
        }
        Ok(SetFamily { sets, weights })
    }

    /// Number of sets n.
    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.sets[0].dim()
    }

    pub fn sets(&self) -> &[MSet] {
        &self.sets
    }

    pub fn set(&self, i: usize) -> &MSet {
        &self.sets[i]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Largest set size in the family.
    pub fn max_set_size(&self) -> usize {
        self.sets.iter().map(MSet::len).max().unwrap_or(0)
    }

    /// The common set size, or `None` when sizes vary.
    pub fn uniform_set_size(&self) -> Option<usize> {
        let m = self.sets[0].len();
        self.sets.iter().all(|s| s.len() == m).then_some(m)
    }

    /// Sub-family at the given positions, preserving the order of `indices`
    /// and carrying weights along. Indices must be in range and distinct.
    pub fn subset(&self, indices: &[usize]) -> SetFamily {
        assert!(!indices.is_empty(), "subset must keep at least one set");
        let mut seen = vec![false; self.sets.len()];
        for &i in indices {
            assert!(!seen[i], "subset indices must be distinct");
            seen[i] = true;
        }
        SetFamily {
            sets: indices.iter().map(|&i| self.sets[i].clone()).collect(),
            weights: indices.iter().map(|&i| self.weights[i]).collect(),
        }
    }
}

/// A query: k pairwise distinct center points of one dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct CenterSet {
    centers: Vec<Point>,
}

impl CenterSet {
    /// Builds a center set, rejecting empty lists, mixed dimensions and
    /// duplicate centers.
    pub fn new(centers: Vec<Point>) -> Result<Self> {
        if centers.is_empty() {
            return Err(Error::InvalidInput(
                "center set must contain at least one point".into(),
            ));
        }
        let dim = centers[0].dim();
        for c in &centers[1..] {
            if c.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: c.dim(),
                });
            }
        }
        let mut seen = HashSet::with_capacity(centers.len());
        for c in &centers {
            if !seen.insert(c.bits()) {
                return Err(Error::InvalidInput("duplicate center point".into()));
            }
        }
        Ok(CenterSet { centers })
    }

    /// Single-center query.
    pub fn single(center: Point) -> Self {
        CenterSet {
            centers: vec![center],
        }
    }

    /// Number of centers k.
    pub fn k(&self) -> usize {
        self.centers.len()
    }

    pub fn dim(&self) -> usize {
        self.centers[0].dim()
    }

    pub fn centers(&self) -> &[Point] {
        &self.centers
    }
}
