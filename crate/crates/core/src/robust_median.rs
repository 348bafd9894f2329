//! Sampled robust median: a center point that serves the closest fraction of
//! a family nearly as well as any single point could, computed from a small
//! uniform sample. Includes a grid-based verifier used by tests.

use rand::Rng;

use crate::cost::{closest_fraction, set_cost_to_point};
use crate::error::{Error, Result};
use crate::family::{CenterSet, Point, SetFamily};
use crate::loss::Loss;

/// Parameters of the sampled robust median.
///
/// The sample holds `b_med * k^2 * ceil(ln(1/delta))` sets (capped at n) and
/// the returned point minimizes the summed cost of its closest
/// `(1-tau)*gamma` fraction. `tau` is exposed as a knob: callers combining
/// layers nominally want it well below 1/10, while the sampling guarantee is
/// stated at 1/6, and the two are left unreconciled by design.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MedianParams {
    /// Number of centers the surrounding clustering problem uses.
    pub k: usize,
    /// Failure probability of the sampling guarantee.
    pub delta: f64,
    /// Sampling constant multiplying k^2 * ceil(ln(1/delta)).
    pub b_med: usize,
    /// Fraction defining the optimum the median competes against.
    pub gamma: f64,
    /// Leeway: the output is only charged for its closest (1-tau)*gamma
    /// fraction.
    pub tau: f64,
}

impl MedianParams {
    /// Defaults: delta = 0.1, b_med = 3, gamma = 1/(2k), tau = 1/6.
    pub fn new(k: usize) -> Self {
        MedianParams {
            k,
            delta: 0.1,
            b_med: 3,
            gamma: 1.0 / (2.0 * k as f64),
            tau: 1.0 / 6.0,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::InvalidInput("k must be >= 1".into()));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::InvalidInput(format!(
                "delta must lie in (0, 1), got {}",
                self.delta
            )));
        }
        if self.b_med == 0 {
            return Err(Error::InvalidInput("b_med must be >= 1".into()));
        }
        if !(self.gamma > 0.0 && self.gamma <= 0.5) {
            return Err(Error::InvalidInput(format!(
                "gamma must lie in (0, 1/2], got {}",
                self.gamma
            )));
        }
        if !(self.tau > 0.0 && self.tau < 1.0) {
            return Err(Error::InvalidInput(format!(
                "tau must lie in (0, 1), got {}",
                self.tau
            )));
        }
        Ok(())
    }

    /// Number of sets to sample from a family of n sets.
    pub fn sample_size(&self, n: usize) -> usize {
        let ln_term = (1.0 / self.delta).ln().ceil().max(1.0);
        let raw = (self.b_med * self.k * self.k) as f64 * ln_term;
        (raw.ceil() as usize).max(1).min(n)
    }
}

/// Returns the sampled-set point whose closest `(1-tau)*gamma` fraction of
/// the sample costs least. Deterministic given the random source; ties keep
/// the earliest candidate (ascending sampled-set index, then point index).
pub fn robust_median<R: Rng + ?Sized>(
    family: &SetFamily,
    params: &MedianParams,
    loss: &Loss,
    rng: &mut R,
) -> Result<Point> {
    params.validate()?;
    let n = family.len();
    let size = params.sample_size(n);
    let mut picked = rand::seq::index::sample(rng, n, size).into_vec();
    picked.sort_unstable();

    let keep_fraction = (1.0 - params.tau) * params.gamma;
    let keep = ((keep_fraction * size as f64).ceil() as usize).clamp(1, size);

    let mut best: Option<(f64, &Point)> = None;
    for &si in &picked {
        for q in family.set(si).points() {
            let mut costs: Vec<f64> = picked
                .iter()
                .map(|&sj| set_cost_to_point(family.set(sj), q, loss))
                .collect();
            costs.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let total: f64 = costs[..keep].iter().sum();
            if best.map_or(true, |(bc, _)| total < bc) {
                best = Some((total, q));
            }
        }
    }
    Ok(best.expect("sample is nonempty").1.clone())
}

/// Axis-aligned evaluation grid spanning the bounding box of a family's
/// points, `points_per_axis` steps per dimension.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub points_per_axis: usize,
}

impl GridSpec {
    pub fn new(points_per_axis: usize) -> Self {
        GridSpec { points_per_axis }
    }
}

/// Checks whether `b` serves its closest `(1-tau)*gamma` fraction within
/// `alpha` times the best closest-`gamma`-fraction cost over a finite grid.
///
/// The grid minimum only underestimates the continuum optimum down to its
/// resolution, so a `false` answer is sound while `true` is approximate.
/// Grids over `points_per_axis^d` cells beyond 10^8 are rejected.
pub fn verify_robust_median(
    family: &SetFamily,
    b: &Point,
    gamma: f64,
    tau: f64,
    alpha: f64,
    loss: &Loss,
    grid: &GridSpec,
) -> Result<bool> {
    if grid.points_per_axis == 0 {
        return Err(Error::InvalidInput("grid needs at least one point per axis".into()));
    }
    if !(tau > 0.0 && tau < 1.0) {
        return Err(Error::InvalidInput(format!("tau must lie in (0, 1), got {tau}")));
    }
    if alpha < 0.0 || alpha.is_nan() {
        return Err(Error::InvalidInput(format!("alpha must be >= 0, got {alpha}")));
    }
    let dim = family.dim();
    let cells = (grid.points_per_axis as u128)
        .checked_pow(dim as u32)
        .unwrap_or(u128::MAX);
    if cells > 100_000_000 {
        return Err(Error::InvalidInput(format!(
            "grid of {cells} cells exceeds the 1e8 evaluation cap"
        )));
    }

    let kept_b = closest_fraction(family, &CenterSet::single(b.clone()), (1.0 - tau) * gamma, loss)?;
    let lhs: f64 = kept_b
        .sets()
        .iter()
        .map(|s| set_cost_to_point(s, b, loss))
        .sum();
    if lhs == 0.0 {
        return Ok(true);
    }

    let (lo, hi) = bounding_box(family);
    let n = family.len();
    let keep = ((gamma * n as f64).ceil() as usize).clamp(1, n);
    let mut rhs = f64::INFINITY;
    let mut idx = vec![0usize; dim];
    let mut coords = vec![0.0f64; dim];
    loop {
        for (a, &i) in idx.iter().enumerate() {
            coords[a] = if grid.points_per_axis == 1 {
                lo[a]
            } else {
                lo[a] + (hi[a] - lo[a]) * i as f64 / (grid.points_per_axis - 1) as f64
            };
        }
        let q = Point::new(coords.clone()).expect("grid coordinates are finite");
        let mut costs: Vec<f64> = family
            .sets()
            .iter()
            .map(|s| set_cost_to_point(s, &q, loss))
            .collect();
        costs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let total: f64 = costs[..keep].iter().sum();
        if total < rhs {
            rhs = total;
        }
        // Odometer increment over the grid indices.
        let mut axis = 0;
        loop {
            if axis == dim {
                break;
            }
            idx[axis] += 1;
            if idx[axis] < grid.points_per_axis {
                break;
            }
            idx[axis] = 0;
            axis += 1;
        }
        if axis == dim {
            break;
        }
    }

    if rhs == 0.0 {
        return Ok(alpha.is_infinite());
    }
    Ok(lhs <= alpha * rhs)
}

/// Per-axis (min, max) over all points of the family.
pub(crate) fn bounding_box(family: &SetFamily) -> (Vec<f64>, Vec<f64>) {
    let dim = family.dim();
    let mut lo = vec![f64::INFINITY; dim];
    let mut hi = vec![f64::NEG_INFINITY; dim];
    for set in family.sets() {
        for p in set.points() {
            for (a, &x) in p.coords().iter().enumerate() {
                lo[a] = lo[a].min(x);
                hi[a] = hi[a].max(x);
            }
        }
    }
    (lo, hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::MSet;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn pt(xs: &[f64]) -> Point {
        Point::new(xs.to_vec()).unwrap()
    }

    fn singleton(id: &str, x: f64) -> MSet {
        MSet::new(id, vec![pt(&[x])]).unwrap()
    }

    #[test]
    fn sample_size_is_at_least_one_and_capped() {
        let p = MedianParams::new(1);
        // b_med=3, k=1, ln(10) rounds up to 3.
        assert_eq!(p.sample_size(100), 9);
        assert_eq!(p.sample_size(4), 4);
        let p2 = MedianParams::new(2);
        assert_eq!(p2.sample_size(1000), 36);
    }

    #[test]
    fn outlier_is_rejected() {
        let f = SetFamily::new(vec![
            singleton("a", 0.0),
            singleton("b", 0.0),
            singleton("c", 0.0),
            singleton("d", 100.0),
        ])
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let m = robust_median(&f, &MedianParams::new(1), &Loss::means(), &mut rng).unwrap();
        assert_eq!(m, pt(&[0.0]));
    }

    #[test]
    fn single_set_returns_one_of_its_points() {
        let set = MSet::new("a", vec![pt(&[1.0]), pt(&[2.0])]).unwrap();
        let f = SetFamily::new(vec![set.clone()]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let m = robust_median(&f, &MedianParams::new(1), &Loss::means(), &mut rng).unwrap();
        assert!(set.points().contains(&m));
        assert_eq!(set_cost_to_point(&set, &m, &Loss::means()), 0.0);
    }

    #[test]
    fn identical_sets_cost_zero() {
        let sets: Vec<MSet> = (0..6)
            .map(|i| {
                MSet::new(format!("s{i}"), vec![pt(&[3.0, 1.0]), pt(&[-2.0, 0.0])]).unwrap()
            })
            .collect();
        let f = SetFamily::new(sets).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let m = robust_median(&f, &MedianParams::new(1), &Loss::means(), &mut rng).unwrap();
        assert!(f.set(0).points().contains(&m));
        assert_eq!(set_cost_to_point(f.set(0), &m, &Loss::means()), 0.0);
    }

    #[test]
    fn output_is_a_point_of_some_input_set() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for trial in 0..25 {
            let sets: Vec<MSet> = (0..10)
                .map(|i| {
                    let base = (i * 7 + trial) as f64;
                    MSet::new(
                        format!("s{i}"),
                        vec![pt(&[base, -base]), pt(&[base + 0.5, base * 2.0])],
                    )
                    .unwrap()
                })
                .collect();
            let f = SetFamily::new(sets).unwrap();
            let m = robust_median(&f, &MedianParams::new(2), &Loss::median(), &mut rng).unwrap();
            assert!(f.sets().iter().any(|s| s.points().contains(&m)));
        }
    }

    #[test]
    fn identical_seeds_give_identical_output() {
        let sets: Vec<MSet> = (0..30)
            .map(|i| singleton(&format!("s{i}"), (i as f64 * 17.0) % 13.0))
            .collect();
        let f = SetFamily::new(sets).unwrap();
        let params = MedianParams::new(1);
        let a = robust_median(&f, &params, &Loss::means(), &mut ChaCha8Rng::seed_from_u64(5))
            .unwrap();
        let b = robust_median(&f, &params, &Loss::means(), &mut ChaCha8Rng::seed_from_u64(5))
            .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn params_are_validated() {
        let f = SetFamily::new(vec![singleton("a", 0.0)]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for bad in [
            MedianParams { k: 0, ..MedianParams::new(1) },
            MedianParams { delta: 0.0, ..MedianParams::new(1) },
            MedianParams { delta: 1.0, ..MedianParams::new(1) },
            MedianParams { b_med: 0, ..MedianParams::new(1) },
            MedianParams { gamma: 0.0, ..MedianParams::new(1) },
            MedianParams { gamma: 0.6, ..MedianParams::new(1) },
            MedianParams { tau: 0.0, ..MedianParams::new(1) },
        ] {
            assert!(robust_median(&f, &bad, &Loss::means(), &mut rng).is_err());
        }
    }

    #[test]
    fn verifier_accepts_exact_mean_of_identical_singletons() {
        let sets: Vec<MSet> = (0..5).map(|i| singleton(&format!("s{i}"), 7.0)).collect();
        let f = SetFamily::new(sets).unwrap();
        let ok = verify_robust_median(
            &f,
            &pt(&[7.0]),
            0.5,
            1.0 / 6.0,
            2.0,
            &Loss::means(),
            &GridSpec::new(32),
        )
        .unwrap();
        assert!(ok);
    }

    #[test]
    fn verifier_rejects_a_far_outlier_center() {
        // The grid spans the data mass [0, 3]; a center far outside it serves
        // even its closest fraction at a cost no grid optimum tolerates.
        let f = SetFamily::new(vec![
            singleton("a", 0.0),
            singleton("b", 1.0),
            singleton("c", 2.0),
            singleton("d", 3.0),
        ])
        .unwrap();
        let ok = verify_robust_median(
            &f,
            &pt(&[100.0]),
            0.5,
            1.0 / 6.0,
            2.0,
            &Loss::means(),
            &GridSpec::new(301),
        )
        .unwrap();
        assert!(!ok);
    }

    #[test]
    fn verifier_accepts_everything_at_infinite_alpha() {
        let f = SetFamily::new(vec![singleton("a", 0.0), singleton("b", 50.0)]).unwrap();
        let ok = verify_robust_median(
            &f,
            &pt(&[50.0]),
            0.5,
            1.0 / 6.0,
            f64::INFINITY,
            &Loss::means(),
            &GridSpec::new(16),
        )
        .unwrap();
        assert!(ok);
    }

    #[test]
    fn planted_instance_passes_the_verifier_most_of_the_time() {
        // Half the sets sit inside the unit ball, half are scattered far
        // away; the sampling guarantee promises a (gamma, tau, 2)-median
        // with probability 1 - delta, checked here at alpha = 2*rho*slack
        // with slack 2 to absorb grid resolution.
        let mut build_rng = ChaCha8Rng::seed_from_u64(99);
        let n = 40;
        let sets: Vec<MSet> = (0..n)
            .map(|i| {
                let x: f64 = rand::Rng::gen_range(&mut build_rng, -1.0..1.0);
                let y: f64 = rand::Rng::gen_range(&mut build_rng, -1.0..1.0);
                let (cx, cy) = if i % 2 == 0 {
                    (x * 0.7, y * 0.7)
                } else {
                    let r = 100.0 + 50.0 * x.abs();
                    let ang = y * std::f64::consts::PI;
                    (r * ang.cos(), r * ang.sin())
                };
                MSet::new(
                    format!("s{i}"),
                    vec![pt(&[cx, cy]), pt(&[cx + 0.3, cy - 0.2])],
                )
                .unwrap()
            })
            .collect();
        let f = SetFamily::new(sets).unwrap();
        let loss = Loss::median();
        let params = MedianParams::new(1);
        let alpha = 2.0 * loss.rho() * 2.0;
        let trials = 100;
        let mut passes = 0;
        for seed in 0..trials {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let b = robust_median(&f, &params, &loss, &mut rng).unwrap();
            if verify_robust_median(&f, &b, params.gamma, params.tau, alpha, &loss, &GridSpec::new(41))
                .unwrap()
            {
                passes += 1;
            }
        }
        // Guarantee: at least (1 - delta) - 0.1 of trials with delta = 0.1.
        assert!(passes as f64 >= trials as f64 * 0.8, "only {passes}/{trials} passed");
    }

    #[test]
    fn cost_ties_keep_the_earliest_candidate() {
        // keep = ceil((1-1/3)*0.5*3) = 1, so every candidate's trimmed cost
        // is 0 (each point serves its own set for free); the tie must
        // resolve to the first candidate in sampled-set order.
        let f = SetFamily::new(vec![
            singleton("a", 0.0),
            singleton("b", 1.0),
            singleton("c", 10.0),
        ])
        .unwrap();
        let params = MedianParams {
            gamma: 0.5,
            tau: 1.0 / 3.0,
            ..MedianParams::new(1)
        };
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = robust_median(&f, &params, &Loss::means(), &mut rng).unwrap();
        assert_eq!(m, pt(&[0.0]));
    }
}
