//! Solvers over set families: an exhaustive enumeration oracle for the
//! squared-Euclidean loss, an alternating (Lloyd-style) heuristic for any
//! loss, and a sampled single-center approximation.

use std::collections::HashSet;

use rand::Rng;

use crate::cost::family_cost;
use crate::error::{Error, Result};
use crate::family::{CenterSet, Point, SetFamily};
use crate::loss::Loss;

/// Largest number of (representative, cluster) assignments the enumeration
/// oracle will walk by default.
pub const DEFAULT_ENUMERATION_BUDGET: u128 = 10_000_000;

/// Centers plus the bookkeeping of the run that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    /// Final centers, exact duplicates collapsed.
    pub centers: CenterSet,
    /// Weighted family cost of `centers`, recomputed from the assignment.
    pub cost: f64,
    /// Enumerated assignments (oracle) or update rounds of the winning
    /// restart (heuristic).
    pub iterations: usize,
    /// Per set: (cluster index into `centers`, representative point index).
    pub assignment: Vec<(usize, usize)>,
    /// Cost after initialization and after each update round of the winning
    /// restart; the oracle reports its single final cost.
    pub cost_trace: Vec<f64>,
}

/// Per-cluster accumulators for incremental squared-loss evaluation.
/// Membership counts are exact; weight and moment drift from repeated
/// add/remove is wiped whenever a cluster empties.
struct ClusterStats {
    k: usize,
    d: usize,
    count: Vec<usize>,
    weight: Vec<f64>,
    sum: Vec<f64>,
    moment: Vec<f64>,
}

impl ClusterStats {
    fn new(k: usize, d: usize) -> Self {
        ClusterStats {
            k,
            d,
            count: vec![0; k],
            weight: vec![0.0; k],
            sum: vec![0.0; k * d],
            moment: vec![0.0; k],
        }
    }

    fn apply(&mut self, family: &SetFamily, set: usize, digit: usize, sign: f64) {
        let rep = digit / self.k;
        let cluster = digit % self.k;
        let wt = family.weight(set) * sign;
        let coords = family.set(set).points()[rep].coords();
        self.weight[cluster] += wt;
        let mut norm = 0.0;
        for (j, x) in coords.iter().enumerate() {
            self.sum[cluster * self.d + j] += wt * x;
            norm += x * x;
        }
        self.moment[cluster] += wt * norm;
        if sign > 0.0 {
            self.count[cluster] += 1;
        } else {
            self.count[cluster] -= 1;
            if self.count[cluster] == 0 {
                self.weight[cluster] = 0.0;
                self.moment[cluster] = 0.0;
                self.sum[cluster * self.d..(cluster + 1) * self.d].fill(0.0);
            }
        }
    }

    fn cost(&self) -> f64 {
        let mut total = 0.0;
        for c in 0..self.k {
            if self.count[c] == 0 {
                continue;
            }
            let mut norm = 0.0;
            for j in 0..self.d {
                let s = self.sum[c * self.d + j];
                norm += s * s;
            }
            total += (self.moment[c] - norm / self.weight[c]).max(0.0);
        }
        total
    }
}

/// Exhaustive sets-k-means with the default assignment budget.
pub fn exact_oracle(family: &SetFamily, k: usize, loss: &Loss) -> Result<SolveResult> {
    exact_oracle_with_budget(family, k, loss, DEFAULT_ENUMERATION_BUDGET)
}

/// Exhaustive sets-k-means: walks every per-set choice of (representative
/// point, cluster), closes each cluster with the weighted mean of its
/// representatives, and returns the global minimum. Ties keep the first
/// assignment in odometer order. Requires the means loss (the per-cluster
/// optimum has no closed form otherwise) and refuses instances whose
/// assignment count exceeds `budget`.
pub fn exact_oracle_with_budget(
    family: &SetFamily,
    k: usize,
    loss: &Loss,
    budget: u128,
) -> Result<SolveResult> {
    if !matches!(loss, Loss::Means) {
        return Err(Error::Unsupported(
            "exhaustive enumeration needs the closed-form cluster mean, so only the means loss is supported".into(),
        ));
    }
    if k == 0 {
        return Err(Error::InvalidInput("k must be >= 1".into()));
    }
    let n = family.len();
    let radices: Vec<usize> = family.sets().iter().map(|s| s.len() * k).collect();
    let mut required: u128 = 1;
    for &r in &radices {
        required = required.saturating_mul(r as u128);
    }
    if required > budget {
        return Err(Error::BudgetExceeded { required, budget });
    }
    let d = family.dim();
    let mut stats = ClusterStats::new(k, d);
    let mut digits = vec![0usize; n];
    for i in 0..n {
        stats.apply(family, i, 0, 1.0);
    }
    let mut enumerated: u128 = 0;
    let mut best_cost = f64::INFINITY;
    let mut best_digits = digits.clone();
    'walk: loop {
        enumerated += 1;
        let c = stats.cost();
        if c < best_cost {
            best_cost = c;
            best_digits.copy_from_slice(&digits);
        }
        let mut pos = 0;
        loop {
            if pos == n {
                break 'walk;
            }
            stats.apply(family, pos, digits[pos], -1.0);
            digits[pos] += 1;
            if digits[pos] == radices[pos] {
                digits[pos] = 0;
                stats.apply(family, pos, 0, 1.0);
                pos += 1;
            } else {
                stats.apply(family, pos, digits[pos], 1.0);
                break;
            }
        }
    }
    // Rebuild the winning clusters from scratch so the output carries none of
    // the incremental drift.
    let mut weight = vec![0.0f64; k];
    let mut sum = vec![vec![0.0f64; d]; k];
    for (i, &digit) in best_digits.iter().enumerate() {
        let rep = digit / k;
        let cluster = digit % k;
        let wt = family.weight(i);
        weight[cluster] += wt;
        for (j, x) in family.set(i).points()[rep].coords().iter().enumerate() {
            sum[cluster][j] += wt * x;
        }
    }
    let mut centers = Vec::new();
    for c in 0..k {
        if weight[c] > 0.0 {
            let coords: Vec<f64> = sum[c].iter().map(|s| s / weight[c]).collect();
            centers.push(Point::new(coords).expect("means of finite points are finite"));
        }
    }
    let (centers, cost, assignment) = finalize(family, centers, loss)?;
    Ok(SolveResult {
        centers,
        cost,
        iterations: enumerated.min(usize::MAX as u128) as usize,
        assignment,
        cost_trace: vec![cost],
    })
}

/// Alternating sets-k-means heuristic. Each restart draws k distinct initial
/// centers from the pooled input points, then alternates nearest
/// (representative, center) assignment with weighted-mean center updates
/// until the assignment repeats or `max_iters` rounds pass. A cluster left
/// empty by an update is re-seeded to the representative of the worst-served
/// set. Returns the best restart; the cost never increases across rounds
/// under the means loss.
pub fn em_sets_kmeans<R: Rng + ?Sized>(
    family: &SetFamily,
    k: usize,
    max_iters: usize,
    restarts: usize,
    loss: &Loss,
    rng: &mut R,
) -> Result<SolveResult> {
    if k == 0 {
        return Err(Error::InvalidInput("k must be >= 1".into()));
    }
    if restarts == 0 {
        return Err(Error::InvalidInput("restarts must be >= 1".into()));
    }
    let pool = distinct_points(family);
    if k > pool.len() {
        return Err(Error::InvalidInput(format!(
            "k = {k} exceeds the {} distinct input points",
            pool.len()
        )));
    }
    let mut best: Option<(f64, Vec<Point>, usize, Vec<f64>)> = None;
    for _ in 0..restarts {
        let picks = rand::seq::index::sample(rng, pool.len(), k);
        let mut centers: Vec<Point> = picks.iter().map(|i| pool[i].clone()).collect();
        let mut assignment = assign(family, &centers, loss);
        let mut trace = vec![assignment_cost(family, &centers, &assignment, loss)];
        let mut rounds = 0;
        for _ in 0..max_iters {
            update_centers(family, &mut centers, &assignment, loss);
            let next = assign(family, &centers, loss);
            rounds += 1;
            trace.push(assignment_cost(family, &centers, &next, loss));
            if next == assignment {
                break;
            }
            assignment = next;
        }
        let final_cost = *trace.last().expect("trace holds the initial cost");
        let better = match &best {
            None => true,
            Some((cost, _, _, _)) => final_cost < *cost,
        };
        if better {
            best = Some((final_cost, centers, rounds, trace));
        }
    }
    let (_, centers, rounds, trace) = best.expect("restarts >= 1");
    let (centers, cost, assignment) = finalize(family, centers, loss)?;
    Ok(SolveResult {
        centers,
        cost,
        iterations: rounds,
        assignment,
        cost_trace: trace,
    })
}

/// Sampled single-center approximation: draws up to `t_samples` sets, scores
/// every point of the sample as a center against the whole family, then
/// refines the winner by one assign-and-average round and keeps the better
/// of the two (the candidate on ties).
pub fn approx_mean<R: Rng + ?Sized>(
    family: &SetFamily,
    t_samples: usize,
    loss: &Loss,
    rng: &mut R,
) -> Result<Point> {
    if t_samples == 0 {
        return Err(Error::InvalidInput("t_samples must be >= 1".into()));
    }
    let n = family.len();
    let mut sampled = rand::seq::index::sample(rng, n, t_samples.min(n)).into_vec();
    sampled.sort_unstable();
    let mut best: Option<(f64, Point)> = None;
    for &i in &sampled {
        for p in family.set(i).points() {
            let cost = family_cost(family, &CenterSet::single(p.clone()), loss)?;
            if best.as_ref().map_or(true, |(c, _)| cost < *c) {
                best = Some((cost, p.clone()));
            }
        }
    }
    let (candidate_cost, candidate) = best.expect("families are nonempty");
    // One alternating round: snap every set to its representative for the
    // candidate, then average the representatives.
    let d = family.dim();
    let mut wsum = 0.0;
    let mut sum = vec![0.0f64; d];
    for (i, set) in family.sets().iter().enumerate() {
        let rep = nearest_point(set.points(), &candidate, loss);
        let wt = family.weight(i);
        wsum += wt;
        for (j, x) in set.points()[rep].coords().iter().enumerate() {
            sum[j] += wt * x;
        }
    }
    let refined = Point::new(sum.iter().map(|s| s / wsum).collect())
        .expect("means of finite points are finite");
    let refined_cost = family_cost(family, &CenterSet::single(refined.clone()), loss)?;
    Ok(if refined_cost < candidate_cost {
        refined
    } else {
        candidate
    })
}

/// Pooled input points, duplicates removed, first occurrence order.
fn distinct_points(family: &SetFamily) -> Vec<Point> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for set in family.sets() {
        for p in set.points() {
            if seen.insert(p.bits()) {
                out.push(p.clone());
            }
        }
    }
    out
}

/// Index of the point closest to `center` (transformed loss, lowest index on
/// ties).
fn nearest_point(points: &[Point], center: &Point, loss: &Loss) -> usize {
    let mut best = 0;
    let mut best_cost = f64::INFINITY;
    for (i, p) in points.iter().enumerate() {
        let v = loss.apply(loss.base_distance(p, center));
        if v < best_cost {
            best_cost = v;
            best = i;
        }
    }
    best
}

/// Per-set argmin over (representative, center) pairs; ties prefer the
/// lowest point index, then the lowest center index.
fn assign(family: &SetFamily, centers: &[Point], loss: &Loss) -> Vec<(usize, usize)> {
    family
        .sets()
        .iter()
        .map(|set| {
            let mut best = (0usize, 0usize);
            let mut best_cost = f64::INFINITY;
            for (pi, p) in set.points().iter().enumerate() {
                for (ci, c) in centers.iter().enumerate() {
                    let v = loss.apply(loss.base_distance(p, c));
                    if v < best_cost {
                        best_cost = v;
                        best = (ci, pi);
                    }
                }
            }
            best
        })
        .collect()
}

/// Weighted cost of a fixed assignment.
fn assignment_cost(
    family: &SetFamily,
    centers: &[Point],
    assignment: &[(usize, usize)],
    loss: &Loss,
) -> f64 {
    assignment
        .iter()
        .enumerate()
        .map(|(i, &(c, p))| {
            family.weight(i)
                * loss.apply(loss.base_distance(&family.set(i).points()[p], &centers[c]))
        })
        .sum()
}

/// Replaces every center by the weighted mean of its assigned
/// representatives. A cluster with no members is re-seeded to the
/// representative of the worst-served set (by weighted cost under the
/// updated centers, ties to the earliest set) whose representative is not
/// already a center; it is left unchanged when no such set exists. The
/// assignment never references an empty cluster, so re-seeding cannot raise
/// the assignment's cost.
fn update_centers(
    family: &SetFamily,
    centers: &mut Vec<Point>,
    assignment: &[(usize, usize)],
    loss: &Loss,
) {
    let k = centers.len();
    let d = family.dim();
    let mut weight = vec![0.0f64; k];
    let mut sum = vec![vec![0.0f64; d]; k];
    for (i, &(c, p)) in assignment.iter().enumerate() {
        let wt = family.weight(i);
        weight[c] += wt;
        for (j, x) in family.set(i).points()[p].coords().iter().enumerate() {
            sum[c][j] += wt * x;
        }
    }
    let mut empty = Vec::new();
    for c in 0..k {
        if weight[c] > 0.0 {
            let coords: Vec<f64> = sum[c].iter().map(|s| s / weight[c]).collect();
            centers[c] = Point::new(coords).expect("means of finite points are finite");
        } else {
            empty.push(c);
        }
    }
    for c in empty {
        let mut order: Vec<usize> = (0..family.len()).collect();
        let costs: Vec<f64> = family
            .sets()
            .iter()
            .enumerate()
            .map(|(i, set)| {
                family.weight(i)
                    * set
                        .points()
                        .iter()
                        .map(|p| {
                            centers
                                .iter()
                                .map(|ct| loss.apply(loss.base_distance(p, ct)))
                                .fold(f64::INFINITY, f64::min)
                        })
                        .fold(f64::INFINITY, f64::min)
            })
            .collect();
        order.sort_by(|&a, &b| costs[b].partial_cmp(&costs[a]).unwrap());
        for i in order {
            let set = family.set(i);
            let mut chosen = None;
            for p in set.points() {
                let served = centers
                    .iter()
                    .map(|ct| loss.apply(loss.base_distance(p, ct)))
                    .fold(f64::INFINITY, f64::min);
                if chosen
                    .as_ref()
                    .map_or(true, |&(best_served, _)| served < best_served)
                {
                    chosen = Some((served, p));
                }
            }
            let (_, rep) = chosen.expect("sets are nonempty");
            if !centers.contains(rep) {
                centers[c] = rep.clone();
                break;
            }
        }
    }
}

/// Collapses duplicate centers, recomputes the argmin assignment against the
/// survivors, and returns (centers, cost, assignment).
fn finalize(
    family: &SetFamily,
    centers: Vec<Point>,
    loss: &Loss,
) -> Result<(CenterSet, f64, Vec<(usize, usize)>)> {
    let mut dedup: Vec<Point> = Vec::new();
    for c in centers {
        if !dedup.contains(&c) {
            dedup.push(c);
        }
    }
    let assignment = assign(family, &dedup, loss);
    let cost = assignment_cost(family, &dedup, &assignment, loss);
    Ok((CenterSet::new(dedup)?, cost, assignment))
}
