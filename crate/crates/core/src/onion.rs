//! Layered (onion) sensitivity sampling: repeatedly peel the densest
//! residue layer of a family, give each layer a sensitivity inversely
//! proportional to its size, then importance-sample a small weighted
//! coreset whose cost estimates the family's cost for any fixed query.

use std::collections::BTreeMap;

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;

use crate::cost::{set_cost, set_cost_to_point, smallest_indices};
use crate::error::{Error, Result};
use crate::family::{CenterSet, MSet, Point, SetFamily};
use crate::loss::Loss;
use crate::projection::closepoints_notail_proj;
use crate::robust_median::{robust_median, MedianParams};

/// One peeled layer: the surviving sets and the anchor points produced along
/// the way (one robust median per matching round).
#[derive(Debug, Clone, PartialEq)]
pub struct LayerResult {
    /// The innermost surviving sub-family, in ascending input order.
    pub layer: SetFamily,
    /// Anchor points b^1..b^m, one per round.
    pub anchors: Vec<Point>,
}

/// Per-set sensitivity upper bounds, clamped into (0, 1], plus their total.
#[derive(Debug, Clone, PartialEq)]
pub struct SensitivityMap {
    clamped: Vec<f64>,
    raw: Vec<f64>,
    total: f64,
}

impl SensitivityMap {
    /// Number of sets covered.
    pub fn len(&self) -> usize {
        self.clamped.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clamped.is_empty()
    }

    /// Clamped sensitivity of set `i`.
    pub fn value(&self, i: usize) -> f64 {
        self.clamped[i]
    }

    /// Sensitivity of set `i` before clamping to 1 (the layer formula
    /// b_sens / |layer| can exceed 1 on tiny layers).
    pub fn raw(&self, i: usize) -> f64 {
        self.raw[i]
    }

    pub fn values(&self) -> &[f64] {
        &self.clamped
    }

    pub fn raw_values(&self) -> &[f64] {
        &self.raw
    }

    /// Total sensitivity t = sum of clamped values.
    pub fn total(&self) -> f64 {
        self.total
    }
}

/// How the coreset sample count is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CoresetSize {
    /// Draw exactly this many samples.
    Explicit(usize),
    /// Derive the count from an accuracy target: sigma =
    /// ceil((b_sens * t / epsilon^2) * (d' * ln t + ln(1/delta))), capped at
    /// n * ceil(ln n).
    Bound { epsilon: f64, delta: f64 },
}

/// Parameters of sensitivity computation and coreset sampling.
#[derive(Debug, Clone, PartialEq)]
pub struct CoresetParams {
    /// Number of centers the coreset must support.
    pub k: usize,
    /// Leeway of the internal robust medians (default 1/6).
    pub tau: f64,
    /// Sensitivity numerator; `None` picks ceil(5*rho*(3*rho^2)^m) per set
    /// size m.
    pub b_sens: Option<f64>,
    /// Residue size at which peeling stops and every remaining set gets
    /// sensitivity 1; `None` picks ceil(b_sens).
    pub b_stop: Option<usize>,
    /// Sample-count rule.
    pub size: CoresetSize,
    /// Query-space dimension used by the `Bound` rule; `None` picks
    /// m * d^2 * k^2.
    pub d_prime: Option<usize>,
}

impl CoresetParams {
    /// Explicit sample count, defaults elsewhere.
    pub fn with_sigma(k: usize, sigma: usize) -> Self {
        CoresetParams {
            k,
            tau: 1.0 / 6.0,
            b_sens: None,
            b_stop: None,
            size: CoresetSize::Explicit(sigma),
            d_prime: None,
        }
    }

    /// Accuracy-driven sample count, defaults elsewhere.
    pub fn with_error_bound(k: usize, epsilon: f64, delta: f64) -> Self {
        CoresetParams {
            size: CoresetSize::Bound { epsilon, delta },
            ..CoresetParams::with_sigma(k, 1)
        }
    }

    /// Default sensitivity numerator for sets of size m:
    /// ceil(5 * rho * (3 * rho^2)^m).
    pub fn default_b_sens(loss: &Loss, m: usize) -> f64 {
        let rho = loss.rho();
        (5.0 * rho * (3.0 * rho * rho).powi(m as i32)).ceil()
    }

    fn resolved_b_sens(&self, loss: &Loss, m: usize) -> f64 {
        self.b_sens
            .unwrap_or_else(|| Self::default_b_sens(loss, m))
    }

    fn resolved_b_stop(&self, loss: &Loss, m: usize) -> usize {
        self.b_stop
            .unwrap_or_else(|| self.resolved_b_sens(loss, m).ceil() as usize)
    }

    fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::InvalidInput("k must be >= 1".into()));
        }
        if !(self.tau > 0.0 && self.tau < 1.0) {
            return Err(Error::InvalidInput(format!(
                "tau must lie in (0, 1), got {}",
                self.tau
            )));
        }
        if let Some(b) = self.b_sens {
            if !b.is_finite() || b <= 0.0 {
                return Err(Error::InvalidInput(format!(
                    "b_sens must be positive and finite, got {b}"
                )));
            }
        }
        if self.b_stop == Some(0) {
            return Err(Error::InvalidInput("b_stop must be >= 1".into()));
        }
        if self.d_prime == Some(0) {
            return Err(Error::InvalidInput("d_prime must be >= 1".into()));
        }
        if let CoresetSize::Bound { epsilon, delta } = self.size {
            if !epsilon.is_finite() || epsilon <= 0.0 {
                return Err(Error::InvalidInput(format!(
                    "epsilon must be positive and finite, got {epsilon}"
                )));
            }
            if !(delta > 0.0 && delta < 1.0) {
                return Err(Error::InvalidInput(format!(
                    "delta must lie in (0, 1), got {delta}"
                )));
            }
        }
        Ok(())
    }
}

/// One distinct sampled set with its draw count and per-draw weight.
#[derive(Debug, Clone, PartialEq)]
pub struct CoresetEntry {
    /// Position of the set in the source family.
    pub set_index: usize,
    /// Id of the set in the source family.
    pub id: String,
    /// Number of i.i.d. draws that landed on this set.
    pub multiplicity: usize,
    /// Weight of a single draw: w(P) * t / (sigma * s(P)).
    pub weight: f64,
}

/// A weighted sample of sets; an unbiased cost estimator for fixed queries.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedCoreset {
    /// Distinct sampled sets in ascending source order.
    pub entries: Vec<CoresetEntry>,
    /// Nominal number of draws; equals the sum of multiplicities.
    pub sigma: usize,
}

impl WeightedCoreset {
    /// Number of distinct sets in the sample.
    pub fn support_len(&self) -> usize {
        self.entries.len()
    }

    /// Sum of multiplicities (equals `sigma`).
    pub fn total_multiplicity(&self) -> usize {
        self.entries.iter().map(|e| e.multiplicity).sum()
    }

    /// Estimated family cost: sum of multiplicity * weight * set_cost over
    /// the sampled sets. `family` must be the source the coreset was built
    /// from.
    pub fn cost(&self, family: &SetFamily, centers: &CenterSet, loss: &Loss) -> Result<f64> {
        let mut total = 0.0;
        for e in &self.entries {
            if e.set_index >= family.len() || family.set(e.set_index).id() != e.id {
                return Err(Error::InvalidInput(format!(
                    "coreset entry '{}' does not match the given family",
                    e.id
                )));
            }
            total +=
                (e.multiplicity as f64 * e.weight) * set_cost(family.set(e.set_index), centers, loss)?;
        }
        Ok(total)
    }

    /// The coreset as a stand-alone weighted family (weights fold in
    /// multiplicities), suitable for running any solver on.
    pub fn to_family(&self, family: &SetFamily) -> Result<SetFamily> {
        let mut sets = Vec::with_capacity(self.entries.len());
        let mut weights = Vec::with_capacity(self.entries.len());
        for e in &self.entries {
            if e.set_index >= family.len() || family.set(e.set_index).id() != e.id {
                return Err(Error::InvalidInput(format!(
                    "coreset entry '{}' does not match the given family",
                    e.id
                )));
            }
            sets.push(family.set(e.set_index).clone());
            weights.push(e.multiplicity as f64 * e.weight);
        }
        SetFamily::with_weights(sets, weights)
    }
}

/// Peels one layer off a family of equal-size sets.
///
/// Runs m rounds: round i matches every surviving set against the anchors
/// found so far, computes a robust median of the unmatched remainders, and
/// keeps the ceil((1-tau)/(4k) * count) sets (at least one) whose remainders
/// are closest to that median. Returns the final survivors with the anchor
/// list.
pub fn robust_med_for_sets<R: Rng + ?Sized>(
    family: &SetFamily,
    k: usize,
    tau: f64,
    loss: &Loss,
    rng: &mut R,
) -> Result<LayerResult> {
    let (indices, anchors, _) = peel_layer(family, k, tau, loss, rng)?;
    Ok(LayerResult {
        layer: family.subset(&indices),
        anchors,
    })
}

/// Layer extraction returning positions into `family` (ascending), anchors,
/// and the survivor count after each round (for the cardinality tests).
fn peel_layer<R: Rng + ?Sized>(
    family: &SetFamily,
    k: usize,
    tau: f64,
    loss: &Loss,
    rng: &mut R,
) -> Result<(Vec<usize>, Vec<Point>, Vec<usize>)> {
    let m = family.uniform_set_size().ok_or_else(|| {
        Error::InvalidInput("layer peeling requires sets of one common size".into())
    })?;
    if k == 0 {
        return Err(Error::InvalidInput("k must be >= 1".into()));
    }
    if !(tau > 0.0 && tau < 1.0) {
        return Err(Error::InvalidInput(format!(
            "tau must lie in (0, 1), got {tau}"
        )));
    }
    let fraction = (1.0 - tau) / (4.0 * k as f64);
    let median_params = MedianParams {
        tau,
        ..MedianParams::new(k)
    };
    let mut current: Vec<usize> = (0..family.len()).collect();
    let mut anchors: Vec<Point> = Vec::with_capacity(m);
    let mut survivors = Vec::with_capacity(m);
    for _ in 0..m {
        // Unmatched remainders of the survivors against the anchors so far.
        let remainders: Vec<MSet> = current
            .iter()
            .map(|&i| {
                let set = family.set(i);
                let proj = closepoints_notail_proj(set, &anchors)?;
                MSet::new(set.id(), proj.notail)
            })
            .collect::<Result<Vec<_>>>()?;
        let hat = SetFamily::new(remainders)?;
        let b = robust_median(&hat, &median_params, loss, rng)?;
        let costs: Vec<f64> = hat
            .sets()
            .iter()
            .map(|s| set_cost_to_point(s, &b, loss))
            .collect();
        let keep = (((fraction * current.len() as f64).ceil() as usize).max(1))
            .min(current.len());
        let kept = smallest_indices(&costs, keep);
        current = kept.into_iter().map(|p| current[p]).collect();
        current.sort_unstable();
        survivors.push(current.len());
        anchors.push(b);
    }
    Ok((current, anchors, survivors))
}

/// Sensitivity upper bounds for every set of the family.
///
/// The family is partitioned by set size; within a partition, layers are
/// peeled while more than b_stop sets remain, each layer member receiving
/// s = min(1, b_sens / |layer|), and the final residue receives 1. Input
/// weights do not influence the values; they re-enter through the sampling
/// weights of [`build_coreset`].
pub fn sensitivities<R: Rng + ?Sized>(
    family: &SetFamily,
    params: &CoresetParams,
    loss: &Loss,
    rng: &mut R,
) -> Result<SensitivityMap> {
    params.validate()?;
    let n = family.len();
    let mut raw = vec![0.0f64; n];
    let mut clamped = vec![0.0f64; n];
    let mut by_size: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, s) in family.sets().iter().enumerate() {
        by_size.entry(s.len()).or_default().push(i);
    }
    for (m, indices) in by_size {
        let b_sens = params.resolved_b_sens(loss, m);
        let b_stop = params.resolved_b_stop(loss, m);
        let mut residue = indices;
        while residue.len() > b_stop {
            let sub = family.subset(&residue);
            let (layer_pos, _, _) = peel_layer(&sub, params.k, params.tau, loss, rng)?;
            let s_raw = b_sens / layer_pos.len() as f64;
            let s_val = s_raw.min(1.0);
            let mut in_layer = vec![false; residue.len()];
            for &p in &layer_pos {
                raw[residue[p]] = s_raw;
                clamped[residue[p]] = s_val;
                in_layer[p] = true;
            }
            residue = residue
                .iter()
                .enumerate()
                .filter(|(j, _)| !in_layer[*j])
                .map(|(_, &i)| i)
                .collect();
        }
        for &i in &residue {
            raw[i] = 1.0;
            clamped[i] = 1.0;
        }
    }
    let total = clamped.iter().sum();
    Ok(SensitivityMap {
        clamped,
        raw,
        total,
    })
}

/// Builds a weighted coreset by i.i.d. sampling proportional to the
/// sensitivities; each draw of set P carries weight w(P) * t / (sigma * s(P))
/// and repeated draws accumulate as multiplicities.
pub fn build_coreset<R: Rng + ?Sized>(
    family: &SetFamily,
    params: &CoresetParams,
    loss: &Loss,
    rng: &mut R,
) -> Result<WeightedCoreset> {
    let sens = sensitivities(family, params, loss, rng)?;
    let sigma = resolve_sigma(family, params, loss, sens.total())?;
    let dist = WeightedIndex::new(sens.values())
        .map_err(|e| Error::InvalidInput(format!("cannot sample sensitivities: {e}")))?;
    let mut counts = vec![0usize; family.len()];
    for _ in 0..sigma {
        counts[dist.sample(rng)] += 1;
    }
    let t = sens.total();
    let entries = counts
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(i, &c)| CoresetEntry {
            set_index: i,
            id: family.set(i).id().to_string(),
            multiplicity: c,
            weight: family.weight(i) * t / (sigma as f64 * sens.value(i)),
        })
        .collect();
    Ok(WeightedCoreset { entries, sigma })
}

/// Sample count from the size rule; the accuracy-driven form is capped at
/// n * ceil(ln n) to keep runs bounded.
fn resolve_sigma(
    family: &SetFamily,
    params: &CoresetParams,
    loss: &Loss,
    t: f64,
) -> Result<usize> {
    match params.size {
        CoresetSize::Explicit(sigma) => {
            if sigma == 0 {
                return Err(Error::InvalidInput("sigma must be >= 1".into()));
            }
            Ok(sigma)
        }
        CoresetSize::Bound { epsilon, delta } => {
            let n = family.len();
            let m_max = family.max_set_size();
            let b_sens = params.resolved_b_sens(loss, m_max);
            let d_prime = params
                .d_prime
                .unwrap_or(m_max * family.dim() * family.dim() * params.k * params.k)
                .max(1);
            let raw = (b_sens * t / (epsilon * epsilon))
                * (d_prime as f64 * t.ln() + (1.0 / delta).ln());
            let cap = n * ((n as f64).ln().ceil() as usize).max(1);
            let sigma = (raw.ceil() as usize).min(cap);
            if sigma == 0 {
                return Err(Error::InvalidInput(format!(
                    "accuracy target epsilon={epsilon} resolves to an empty sample"
                )));
            }
            Ok(sigma)
        }
    }
}

/// Uniform without-replacement baseline: sigma sets, each with weight
/// w(P) * n / sigma.
pub fn uniform_coreset<R: Rng + ?Sized>(
    family: &SetFamily,
    sigma: usize,
    rng: &mut R,
) -> Result<WeightedCoreset> {
    let n = family.len();
    if sigma == 0 || sigma > n {
        return Err(Error::InvalidInput(format!(
            "sigma must lie in [1, {n}], got {sigma}"
        )));
    }
    let mut picked = rand::seq::index::sample(rng, n, sigma).into_vec();
    picked.sort_unstable();
    let entries = picked
        .into_iter()
        .map(|i| CoresetEntry {
            set_index: i,
            id: family.set(i).id().to_string(),
            multiplicity: 1,
            weight: family.weight(i) * n as f64 / sigma as f64,
        })
        .collect();
    Ok(WeightedCoreset { entries, sigma })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::family_cost;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn pt(xs: &[f64]) -> Point {
        Point::new(xs.to_vec()).unwrap()
    }

    fn identical_pairs(n: usize) -> SetFamily {
        let sets: Vec<MSet> = (0..n)
            .map(|i| {
                MSet::new(format!("s{i}"), vec![pt(&[0.0, 0.0]), pt(&[1.0, 1.0])]).unwrap()
            })
            .collect();
        SetFamily::new(sets).unwrap()
    }

    fn identical_singletons(n: usize) -> SetFamily {
        let sets: Vec<MSet> = (0..n)
            .map(|i| MSet::new(format!("s{i}"), vec![pt(&[4.0])]).unwrap())
            .collect();
        SetFamily::new(sets).unwrap()
    }

    #[test]
    fn layer_cardinality_recursion() {
        // n=8 pairs, k=1, tau=1/6: survivors 8 -> ceil(5/24*8)=2 -> ceil(5/24*2)=1.
        let f = identical_pairs(8);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (layer, anchors, survivors) =
            peel_layer(&f, 1, 1.0 / 6.0, &Loss::means(), &mut rng).unwrap();
        assert_eq!(survivors, vec![2, 1]);
        assert_eq!(layer.len(), 1);
        assert_eq!(anchors.len(), 2);
    }

    #[test]
    fn layer_cardinality_is_exact_every_round() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for (n, k) in [(5usize, 1usize), (17, 1), (40, 2), (9, 3)] {
            let sets: Vec<MSet> = (0..n)
                .map(|i| {
                    MSet::new(
                        format!("s{i}"),
                        vec![pt(&[i as f64, 0.0]), pt(&[i as f64, 5.0])],
                    )
                    .unwrap()
                })
                .collect();
            let f = SetFamily::new(sets).unwrap();
            let tau = 1.0 / 6.0;
            let (_, _, survivors) = peel_layer(&f, k, tau, &Loss::means(), &mut rng).unwrap();
            let fraction = (1.0 - tau) / (4.0 * k as f64);
            let mut expect = n;
            for &got in &survivors {
                expect = ((fraction * expect as f64).ceil() as usize).max(1);
                assert_eq!(got, expect);
            }
            // Lower bound on the final layer size.
            let shrink = (4.0 * k as f64 / (1.0 - tau)).powi(2);
            let floor = ((n as f64 / shrink).ceil() as isize - 2).max(1) as usize;
            assert!(survivors[1] >= floor);
        }
    }

    #[test]
    fn single_set_family_is_its_own_layer() {
        let set = MSet::new("a", vec![pt(&[0.0]), pt(&[2.0]), pt(&[5.0])]).unwrap();
        let f = SetFamily::new(vec![set.clone()]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let lr = robust_med_for_sets(&f, 1, 1.0 / 6.0, &Loss::means(), &mut rng).unwrap();
        assert_eq!(lr.layer.len(), 1);
        assert_eq!(lr.anchors.len(), 3);
        // Each round's median is drawn from the remainder of the single set,
        // so all anchors are distinct points of the set itself.
        for a in &lr.anchors {
            assert!(set.points().contains(a));
        }
        for (i, a) in lr.anchors.iter().enumerate() {
            assert!(!lr.anchors[..i].contains(a));
        }
    }

    #[test]
    fn singleton_sets_peel_in_one_round() {
        let sets: Vec<MSet> = (0..10)
            .map(|i| MSet::new(format!("s{i}"), vec![pt(&[i as f64])]).unwrap())
            .collect();
        let f = SetFamily::new(sets).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let lr = robust_med_for_sets(&f, 1, 1.0 / 6.0, &Loss::means(), &mut rng).unwrap();
        // One round keeps ceil(5/24 * 10) = 3 sets, the closest to the median.
        assert_eq!(lr.anchors.len(), 1);
        assert_eq!(lr.layer.len(), 3);
        let b = &lr.anchors[0];
        let mut costs: Vec<f64> = f
            .sets()
            .iter()
            .map(|s| set_cost_to_point(s, b, &Loss::means()))
            .collect();
        costs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let worst_kept = lr
            .layer
            .sets()
            .iter()
            .map(|s| set_cost_to_point(s, b, &Loss::means()))
            .fold(0.0f64, f64::max);
        assert!(worst_kept <= costs[2] + 1e-12);
    }

    #[test]
    fn mixed_set_sizes_are_rejected_by_layering() {
        let a = MSet::new("a", vec![pt(&[0.0])]).unwrap();
        let b = MSet::new("b", vec![pt(&[1.0]), pt(&[2.0])]).unwrap();
        let f = SetFamily::new(vec![a, b]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        assert!(robust_med_for_sets(&f, 1, 1.0 / 6.0, &Loss::means(), &mut rng).is_err());
    }

    #[test]
    fn small_families_get_unit_sensitivity() {
        // n <= b_stop: the loop never runs, everything is residue.
        let f = identical_pairs(3);
        let params = CoresetParams {
            b_sens: Some(2.0),
            b_stop: Some(4),
            ..CoresetParams::with_sigma(1, 1)
        };
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let sens = sensitivities(&f, &params, &Loss::means(), &mut rng).unwrap();
        assert!(sens.values().iter().all(|&s| s == 1.0));
        assert!(sens.raw_values().iter().all(|&s| s == 1.0));
        assert_eq!(sens.total(), 3.0);
    }

    #[test]
    fn unit_layers_keep_unit_sensitivity() {
        // n=8 pairs, b_sens=2, b_stop=1: every layer has one set, so each
        // gets min(1, 2/1) = 1; the trace ends with a single residue set.
        let f = identical_pairs(8);
        let params = CoresetParams {
            b_sens: Some(2.0),
            b_stop: Some(1),
            ..CoresetParams::with_sigma(1, 1)
        };
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let sens = sensitivities(&f, &params, &Loss::means(), &mut rng).unwrap();
        assert!(sens.values().iter().all(|&s| s == 1.0));
        assert_eq!(sens.total(), 8.0);
        // Raw values reveal the layer sizes: min layer count over 8 sets
        // with survivor recursion 2 -> 1 is 1 set per layer, raw 2/1 = 2.
        assert!(sens.raw_values().iter().filter(|&&r| r == 2.0).count() >= 7);
    }

    #[test]
    fn hundred_singletons_trace_the_onion() {
        let f = identical_singletons(100);
        let params = CoresetParams {
            b_sens: Some(2.0),
            b_stop: Some(4),
            ..CoresetParams::with_sigma(1, 1)
        };
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let sens = sensitivities(&f, &params, &Loss::means(), &mut rng).unwrap();
        // Layer sizes follow ceil(5/24 * residue): 21,17,13,11,8,7,5,4,3,3,2,2
        // with 4 residue sets; every layer contributes b_sens = 2 to t.
        let count =
            |v: f64| sens.raw_values().iter().filter(|&&r| (r - v).abs() < 1e-12).count();
        assert_eq!(count(2.0 / 21.0), 21);
        assert_eq!(count(2.0 / 17.0), 17);
        assert_eq!(count(2.0 / 13.0), 13);
        assert_eq!(count(2.0 / 11.0), 11);
        assert_eq!(count(1.0), 4 + 2 + 2);
        assert!((sens.total() - 28.0).abs() < 1e-9);
        // Clamped values never exceed 1 and match raw when raw <= 1.
        for i in 0..100 {
            assert!(sens.value(i) > 0.0 && sens.value(i) <= 1.0);
            assert!((sens.value(i) - sens.raw(i).min(1.0)).abs() == 0.0);
        }
    }

    #[test]
    fn raw_values_match_the_cardinality_recursion() {
        // Layer sizes depend only on counts, so the multiset of raw values is
        // fully determined: each while-iteration peels a layer of
        // ceil(5/24 * ceil(5/24 * residue)) sets (two rounds for m = 2),
        // every member getting raw 2 / |layer|, until at most 2 sets remain.
        let sets: Vec<MSet> = (0..60)
            .map(|i| {
                let x = (i % 13) as f64 * 1.7 - (i / 13) as f64;
                MSet::new(format!("s{i}"), vec![pt(&[x, -x]), pt(&[x + 0.4, x])]).unwrap()
            })
            .collect();
        let f = SetFamily::new(sets).unwrap();
        let params = CoresetParams {
            b_sens: Some(2.0),
            b_stop: Some(2),
            ..CoresetParams::with_sigma(1, 1)
        };
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let sens = sensitivities(&f, &params, &Loss::means(), &mut rng).unwrap();
        let fraction = (1.0 - 1.0 / 6.0) / 4.0;
        let mut expected: Vec<f64> = Vec::new();
        let mut residue = 60usize;
        let mut prev_raw = 0.0;
        while residue > 2 {
            let mut layer = residue;
            for _ in 0..2 {
                layer = ((fraction * layer as f64).ceil() as usize).max(1);
            }
            let this_raw = 2.0 / layer as f64;
            // Shrinking layers mean non-decreasing per-layer values.
            assert!(this_raw >= prev_raw);
            prev_raw = this_raw;
            expected.extend(std::iter::repeat(this_raw).take(layer));
            residue -= layer;
        }
        expected.extend(std::iter::repeat(1.0).take(residue));
        let mut got = sens.raw_values().to_vec();
        got.sort_by(|a, b| a.partial_cmp(b).unwrap());
        expected.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(got.len(), expected.len());
        for (g, e) in got.iter().zip(&expected) {
            assert!((g - e).abs() < 1e-12);
        }
    }

    #[test]
    fn total_sensitivity_respects_the_layer_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for (n, k, m) in [(23usize, 1usize, 1usize), (64, 1, 2), (40, 2, 2), (100, 2, 1)] {
            let sets: Vec<MSet> = (0..n)
                .map(|i| {
                    let pts: Vec<Point> = (0..m)
                        .map(|j| pt(&[(i * 31 % 17) as f64 + j as f64 * 9.0, i as f64 * 0.1]))
                        .collect();
                    MSet::new(format!("s{i}"), pts).unwrap()
                })
                .collect();
            let f = SetFamily::new(sets).unwrap();
            let tau = 1.0 / 6.0;
            let b_sens = 2.0;
            let b_stop = 2usize;
            let params = CoresetParams {
                b_sens: Some(b_sens),
                b_stop: Some(b_stop),
                tau,
                ..CoresetParams::with_sigma(k, 1)
            };
            let sens = sensitivities(&f, &params, &Loss::means(), &mut rng).unwrap();
            let bound = b_sens
                * (4.0 * k as f64 / (1.0 - tau)).powi(m as i32)
                * (n as f64).log2().ceil()
                + b_stop as f64;
            assert!(
                sens.total() <= bound + 1e-9,
                "t = {} exceeds bound {} for n={n} k={k} m={m}",
                sens.total(),
                bound
            );
            assert!(sens.total() >= 1.0);
            assert!(sens.total() <= n as f64 + 1e-12);
        }
    }

    #[test]
    fn equal_sensitivities_sample_uniformly_weighted() {
        // All sets identical and n <= b_stop means s = 1 everywhere, so each
        // draw carries weight n / sigma regardless of which set it hits.
        let f = identical_pairs(6);
        let params = CoresetParams {
            b_sens: Some(2.0),
            b_stop: Some(6),
            ..CoresetParams::with_sigma(1, 4)
        };
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let cs = build_coreset(&f, &params, &Loss::means(), &mut rng).unwrap();
        assert_eq!(cs.sigma, 4);
        assert_eq!(cs.total_multiplicity(), 4);
        for e in &cs.entries {
            assert!((e.weight - 6.0 / 4.0).abs() < 1e-12);
        }
    }

    #[test]
    fn explicit_sigma_zero_is_rejected() {
        let f = identical_pairs(4);
        let params = CoresetParams::with_sigma(1, 0);
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        assert!(build_coreset(&f, &params, &Loss::means(), &mut rng).is_err());
    }

    #[test]
    fn coreset_construction_is_deterministic() {
        let sets: Vec<MSet> = (0..20)
            .map(|i| {
                MSet::new(
                    format!("s{i}"),
                    vec![pt(&[i as f64, 1.0]), pt(&[-(i as f64), 2.0])],
                )
                .unwrap()
            })
            .collect();
        let f = SetFamily::new(sets).unwrap();
        let params = CoresetParams {
            b_sens: Some(2.0),
            b_stop: Some(2),
            ..CoresetParams::with_sigma(1, 9)
        };
        let a = build_coreset(&f, &params, &Loss::means(), &mut ChaCha8Rng::seed_from_u64(13))
            .unwrap();
        let b = build_coreset(&f, &params, &Loss::means(), &mut ChaCha8Rng::seed_from_u64(13))
            .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn error_bound_rule_resolves_and_caps() {
        let f = identical_pairs(10);
        // Tiny epsilon forces the cap n * ceil(ln n) = 10 * 3 = 30.
        let params = CoresetParams {
            b_sens: Some(2.0),
            b_stop: Some(2),
            ..CoresetParams::with_error_bound(1, 1e-6, 0.1)
        };
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let cs = build_coreset(&f, &params, &Loss::means(), &mut rng).unwrap();
        assert_eq!(cs.sigma, 30);
        // Loose epsilon still yields at least one draw.
        let params = CoresetParams {
            b_sens: Some(2.0),
            b_stop: Some(2),
            ..CoresetParams::with_error_bound(1, 100.0, 0.1)
        };
        let cs = build_coreset(&f, &params, &Loss::means(), &mut rng).unwrap();
        assert!(cs.sigma >= 1);
    }

    #[test]
    fn uniform_coreset_boundaries() {
        let f = identical_pairs(5);
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        let full = uniform_coreset(&f, 5, &mut rng).unwrap();
        assert_eq!(full.support_len(), 5);
        assert!(full.entries.iter().all(|e| e.multiplicity == 1 && e.weight == 1.0));
        let one = uniform_coreset(&f, 1, &mut rng).unwrap();
        assert_eq!(one.support_len(), 1);
        assert_eq!(one.entries[0].weight, 5.0);
        assert!(uniform_coreset(&f, 0, &mut rng).is_err());
        assert!(uniform_coreset(&f, 6, &mut rng).is_err());
    }

    #[test]
    fn uniform_coreset_cost_is_unbiased() {
        let sets: Vec<MSet> = (0..20)
            .map(|i| {
                MSet::new(
                    format!("s{i}"),
                    vec![pt(&[(i as f64 * 7.0) % 11.0, i as f64 % 3.0])],
                )
                .unwrap()
            })
            .collect();
        let f = SetFamily::new(sets).unwrap();
        let c = CenterSet::single(pt(&[2.0, 1.0]));
        let loss = Loss::means();
        let full = family_cost(&f, &c, &loss).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(16);
        let reps = 1000;
        let mut sum = 0.0;
        for _ in 0..reps {
            let cs = uniform_coreset(&f, 10, &mut rng).unwrap();
            sum += cs.cost(&f, &c, &loss).unwrap();
        }
        let mean = sum / reps as f64;
        assert!(
            (mean - full).abs() <= 0.02 * full,
            "mean {mean} deviates from {full}"
        );
    }

    #[test]
    fn coreset_cost_matches_its_family_view() {
        let sets: Vec<MSet> = (0..15)
            .map(|i| {
                MSet::new(
                    format!("s{i}"),
                    vec![pt(&[1.0 + i as f64, 0.0]), pt(&[0.0, 1.0 + i as f64])],
                )
                .unwrap()
            })
            .collect();
        let f = SetFamily::with_weights(sets, (1..=15).map(|i| i as f64).collect()).unwrap();
        let params = CoresetParams {
            b_sens: Some(2.0),
            b_stop: Some(2),
            ..CoresetParams::with_sigma(1, 12)
        };
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let cs = build_coreset(&f, &params, &Loss::means(), &mut rng).unwrap();
        let c = CenterSet::new(vec![pt(&[1.0, 1.0]), pt(&[8.0, 0.0])]).unwrap();
        let direct = cs.cost(&f, &c, &Loss::means()).unwrap();
        let via_family = family_cost(&cs.to_family(&f).unwrap(), &c, &Loss::means()).unwrap();
        assert!((direct - via_family).abs() <= 1e-12 * direct.max(1.0));
        assert_eq!(cs.total_multiplicity(), 12);
    }

    #[test]
    fn coreset_rejects_a_mismatched_family() {
        let f = identical_pairs(4);
        let params = CoresetParams {
            b_sens: Some(2.0),
            b_stop: Some(2),
            ..CoresetParams::with_sigma(1, 3)
        };
        let mut rng = ChaCha8Rng::seed_from_u64(18);
        let cs = build_coreset(&f, &params, &Loss::means(), &mut rng).unwrap();
        let c = CenterSet::single(pt(&[0.0, 0.0]));
        let renamed: Vec<MSet> = f
            .sets()
            .iter()
            .map(|s| MSet::new(format!("x-{}", s.id()), s.points().to_vec()).unwrap())
            .collect();
        let renamed = SetFamily::new(renamed).unwrap();
        assert!(cs.cost(&renamed, &c, &Loss::means()).is_err());
    }

    #[test]
    fn weighted_families_fold_weights_into_draw_weights() {
        // A two-set family where one set has weight 3: for a fixed query the
        // coreset estimator must stay unbiased for the weighted cost.
        let sets = vec![
            MSet::new("a", vec![pt(&[0.0])]).unwrap(),
            MSet::new("b", vec![pt(&[4.0])]).unwrap(),
        ];
        let f = SetFamily::with_weights(sets, vec![3.0, 1.0]).unwrap();
        let c = CenterSet::single(pt(&[1.0]));
        let loss = Loss::means();
        let full = family_cost(&f, &c, &loss).unwrap();
        assert_eq!(full, 3.0 * 1.0 + 9.0);
        let params = CoresetParams {
            b_sens: Some(2.0),
            b_stop: Some(1),
            ..CoresetParams::with_sigma(1, 8)
        };
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        let reps = 4000;
        let mut sum = 0.0;
        for _ in 0..reps {
            let cs = build_coreset(&f, &params, &loss, &mut rng).unwrap();
            sum += cs.cost(&f, &c, &loss).unwrap();
        }
        let mean = sum / reps as f64;
        assert!(
            (mean - full).abs() <= 0.03 * full,
            "mean {mean} deviates from weighted cost {full}"
        );
    }
}
