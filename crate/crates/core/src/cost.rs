//! Serving costs: point-to-center loss, set-to-query cost, weighted family
//! cost and the closest-fraction selector.

use crate::error::{Error, Result};
use crate::family::{CenterSet, MSet, Point, SetFamily};
use crate::loss::Loss;

/// D applied to the base distance between `p` and `c`.
pub fn point_loss(p: &Point, c: &Point, loss: &Loss) -> Result<f64> {
    if p.dim() != c.dim() {
        return Err(Error::DimensionMismatch {
            expected: p.dim(),
            found: c.dim(),
        });
    }
    Ok(loss.apply(loss.base_distance(p, c)))
}

/// Cost of serving a set with the best (point, center) pair.
///
/// Since D is non-decreasing, minimizing D over pairs equals applying D to
/// the minimal base distance; the latter is computed.
pub fn set_cost(set: &MSet, centers: &CenterSet, loss: &Loss) -> Result<f64> {
    if set.dim() != centers.dim() {
        return Err(Error::DimensionMismatch {
            expected: set.dim(),
            found: centers.dim(),
        });
    }
    let mut best = f64::INFINITY;
    for p in set.points() {
        for c in centers.centers() {
            let d = loss.base_distance(p, c);
            if d < best {
                best = d;
            }
        }
    }
    Ok(loss.apply(best))
}

/// Cost of serving a set with a single center; dimensions must already agree.
pub(crate) fn set_cost_to_point(set: &MSet, q: &Point, loss: &Loss) -> f64 {
    let mut best = f64::INFINITY;
    for p in set.points() {
        let d = loss.base_distance(p, q);
        if d < best {
            best = d;
        }
    }
    loss.apply(best)
}

/// Weighted sum of set costs over the family.
pub fn family_cost(family: &SetFamily, centers: &CenterSet, loss: &Loss) -> Result<f64> {
    if family.dim() != centers.dim() {
        return Err(Error::DimensionMismatch {
            expected: family.dim(),
            found: centers.dim(),
        });
    }
    let mut total = 0.0;
    for (set, w) in family.sets().iter().zip(family.weights()) {
        total += w * set_cost(set, centers, loss)?;
    }
    Ok(total)
}

/// Positions of the `count` smallest values, stable under ties.
pub(crate) fn smallest_indices(values: &[f64], count: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap());
    order.truncate(count);
    order
}

/// The ceil(gamma * n) sets of smallest cost, in ascending cost order with
/// ties broken by ascending family index.
pub fn closest_fraction(
    family: &SetFamily,
    centers: &CenterSet,
    gamma: f64,
    loss: &Loss,
) -> Result<SetFamily> {
    if !gamma.is_finite() || gamma <= 0.0 || gamma > 1.0 {
        return Err(Error::InvalidInput(format!(
            "gamma must lie in (0, 1], got {gamma}"
        )));
    }
    let n = family.len();
    let count = ((gamma * n as f64).ceil() as usize).clamp(1, n);
    let costs = family
        .sets()
        .iter()
        .map(|s| set_cost(s, centers, loss))
        .collect::<Result<Vec<_>>>()?;
    Ok(family.subset(&smallest_indices(&costs, count)))
}
