//! Randomized contracts of the public surface: losses, costs, matching,
//! medians, coresets and solvers keep their invariants on arbitrary inputs.

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sets_clustering::{
    build_coreset, closepoints_notail_proj, em_sets_kmeans, exact_oracle, family_cost,
    point_loss, robust_median, set_cost, uniform_coreset, CenterSet, CoresetParams, Loss, MSet,
    MedianParams, Point, SetFamily,
};

fn coord() -> impl Strategy<Value = f64> {
    -100.0..100.0f64
}

fn point2() -> impl Strategy<Value = Point> {
    (coord(), coord()).prop_map(|(x, y)| Point::new(vec![x, y]).unwrap())
}

/// Set of one to three distinct planar points; duplicates produced by
/// shrinking collapse into fewer points instead of failing construction.
fn mset(id: usize) -> impl Strategy<Value = MSet> {
    proptest::collection::vec(point2(), 1..=3).prop_map(move |raw| {
        let mut points: Vec<Point> = Vec::new();
        for p in raw {
            if !points.contains(&p) {
                points.push(p);
            }
        }
        MSet::new(format!("s{id}"), points).unwrap()
    })
}

fn family(max_n: usize) -> impl Strategy<Value = SetFamily> {
    (1..=max_n).prop_flat_map(|n| {
        (0..n)
            .map(mset)
            .collect::<Vec<_>>()
            .prop_map(|sets| SetFamily::new(sets).unwrap())
    })
}

fn catalogue() -> Vec<Loss> {
    vec![
        Loss::median(),
        Loss::means(),
        Loss::huber(1.5).unwrap(),
        Loss::lpsi(2.0).unwrap(),
        Loss::lpsi_quasi(0.5).unwrap(),
    ]
}

proptest! {
    #[test]
    fn growth_law_holds_for_dilations(x in 1e-9..1e3f64, z in 1.0..100.0f64) {
        for loss in catalogue() {
            let lhs = loss.apply(z * x);
            let rhs = z.powf(loss.r()) * loss.apply(x);
            prop_assert!(lhs <= rhs * (1.0 + 1e-12), "{loss:?}: D({z}*{x}) = {lhs} > {rhs}");
        }
    }

    #[test]
    fn contractions_shrink_pure_powers(x in 1e-9..1e3f64, z in 1e-6..1.0f64) {
        for loss in [Loss::median(), Loss::means(), Loss::lpsi(3.0).unwrap()] {
            let lhs = loss.apply(z * x);
            let rhs = z.powf(loss.r()) * loss.apply(x);
            prop_assert!(lhs <= rhs * (1.0 + 1e-12), "{loss:?}: D({z}*{x}) = {lhs} > {rhs}");
        }
    }

    #[test]
    fn weak_triangle_holds(p in point2(), c in point2(), q in point2()) {
        for loss in catalogue() {
            let lhs = loss.apply(loss.base_distance(&p, &q));
            let rhs = loss.rho()
                * (loss.apply(loss.base_distance(&p, &c)) + loss.apply(loss.base_distance(&c, &q)));
            prop_assert!(lhs <= rhs * (1.0 + 1e-12), "{loss:?}: {lhs} > {rhs}");
        }
    }

    #[test]
    fn set_cost_is_the_best_pair(set in mset(0), centers in proptest::collection::vec(point2(), 1..=3)) {
        let centers = CenterSet::new(centers.into_iter().fold(Vec::new(), |mut acc, p| {
            if !acc.contains(&p) { acc.push(p); }
            acc
        })).unwrap();
        for loss in catalogue() {
            let cost = set_cost(&set, &centers, &loss).unwrap();
            let best = set
                .points()
                .iter()
                .flat_map(|p| centers.centers().iter().map(move |c| point_loss(p, c, &loss).unwrap()))
                .fold(f64::INFINITY, f64::min);
            prop_assert!((cost - best).abs() <= 1e-12 * best.max(1.0));
        }
    }

    #[test]
    fn family_cost_sums_weighted_set_costs(
        fam in family(8),
        raw_weights in proptest::collection::vec(0.1..10.0f64, 8),
        centers in proptest::collection::vec(point2(), 1..=2),
    ) {
        let weights = raw_weights[..fam.len()].to_vec();
        let fam = SetFamily::with_weights(fam.sets().to_vec(), weights.clone()).unwrap();
        let centers = CenterSet::new(centers.into_iter().fold(Vec::new(), |mut acc, p| {
            if !acc.contains(&p) { acc.push(p); }
            acc
        })).unwrap();
        let loss = Loss::means();
        let total = family_cost(&fam, &centers, &loss).unwrap();
        let sum: f64 = fam
            .sets()
            .iter()
            .zip(&weights)
            .map(|(s, w)| w * set_cost(s, &centers, &loss).unwrap())
            .sum();
        prop_assert!((total - sum).abs() <= 1e-9 * sum.abs().max(1.0));
    }

    #[test]
    fn matching_partitions_the_set(
        set in mset(0),
        anchor_pool in proptest::collection::vec(point2(), 3),
        take in 0usize..=3,
    ) {
        let a = take.min(set.len());
        let anchors = &anchor_pool[..a];
        let proj = closepoints_notail_proj(&set, anchors).unwrap();
        prop_assert_eq!(proj.pairs.len(), a);
        prop_assert_eq!(proj.notail.len(), set.len() - a);
        for (p, b) in &proj.pairs {
            prop_assert!(set.points().contains(p));
            prop_assert!(anchors.contains(b));
        }
        // Matched points and the remainder partition the set exactly.
        let mut seen: Vec<&Point> = proj.pairs.iter().map(|(p, _)| p).collect();
        seen.extend(proj.notail.iter());
        for p in set.points() {
            prop_assert_eq!(seen.iter().filter(|q| ***q == *p).count(), 1);
        }
        // The projection starts with the anchors and never repeats a point.
        for (i, b) in anchors.iter().enumerate() {
            if !anchors[..i].contains(b) {
                prop_assert!(proj.proj.contains(b));
            }
        }
        for (i, p) in proj.proj.iter().enumerate() {
            prop_assert!(!proj.proj[..i].contains(p));
        }
    }

    #[test]
    fn coreset_draws_are_fully_accounted(
        fam in family(20),
        sigma in 1usize..=10,
        seed in any::<u64>(),
        centers in proptest::collection::vec(point2(), 1..=2),
    ) {
        let loss = Loss::means();
        let params = CoresetParams {
            b_sens: Some(2.0),
            b_stop: Some(2),
            ..CoresetParams::with_sigma(2, sigma)
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let coreset = build_coreset(&fam, &params, &loss, &mut rng).unwrap();
        prop_assert_eq!(coreset.sigma, sigma);
        prop_assert_eq!(coreset.total_multiplicity(), sigma);
        for w in coreset.entries.windows(2) {
            prop_assert!(w[0].set_index < w[1].set_index);
        }
        for e in &coreset.entries {
            prop_assert!(e.weight > 0.0 && e.multiplicity >= 1);
            prop_assert_eq!(fam.set(e.set_index).id(), e.id.as_str());
        }
        let centers = CenterSet::new(centers.into_iter().fold(Vec::new(), |mut acc, p| {
            if !acc.contains(&p) { acc.push(p); }
            acc
        })).unwrap();
        let direct = coreset.cost(&fam, &centers, &loss).unwrap();
        let through_family = family_cost(&coreset.to_family(&fam).unwrap(), &centers, &loss).unwrap();
        prop_assert!((direct - through_family).abs() <= 1e-9 * direct.abs().max(1.0));
    }

    #[test]
    fn uniform_coresets_are_flat(fam in family(12), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sigma = 1 + (seed as usize) % fam.len();
        let coreset = uniform_coreset(&fam, sigma, &mut rng).unwrap();
        prop_assert_eq!(coreset.support_len(), sigma);
        let scale = fam.len() as f64 / sigma as f64;
        for e in &coreset.entries {
            prop_assert_eq!(e.multiplicity, 1);
            let expected = fam.weight(e.set_index) * scale;
            prop_assert!((e.weight - expected).abs() <= 1e-12 * expected.max(1.0));
        }
    }

    #[test]
    fn sampled_median_returns_an_input_point(fam in family(10), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let median = robust_median(&fam, &MedianParams::new(1), &Loss::median(), &mut rng).unwrap();
        prop_assert!(fam.sets().iter().any(|s| s.points().contains(&median)));
    }

    #[test]
    fn heuristic_never_beats_the_oracle(fam in family(5), seed in any::<u64>()) {
        let loss = Loss::means();
        let opt = exact_oracle(&fam, 1, &loss).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let em = em_sets_kmeans(&fam, 1, 12, 2, &loss, &mut rng).unwrap();
        prop_assert!(em.cost >= opt.cost - 1e-9 * opt.cost.max(1.0));
        for w in em.cost_trace.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-9);
        }
    }
}
