use blackwell::avoid::{epsilon_of_tau, peel, shrink, Classification, PeelOptions};
use blackwell::geometry::{dist, hausdorff_clouds, Point, TargetSet};
use blackwell::lp::{best_reply_value, best_response_value, matrix_game};
use blackwell::play::next_mean;
use blackwell::{Game, GameMode};
use proptest::prelude::*;

fn point(d: usize) -> impl Strategy<Value = Point> {
    prop::collection::vec(-2.0..2.0f64, d).prop_map(Point)
}

fn convex_set(d: usize) -> impl Strategy<Value = TargetSet> {
    prop_oneof![
        (point(d), 0.0..1.5f64).prop_map(|(c, r)| TargetSet::ball(c, r)),
        (point(d), point(d)).prop_map(|(a, b)| TargetSet::segment(a, b)),
        prop::collection::vec(point(d), 1..7).prop_map(TargetSet::hull),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn projection_is_nearest_among_samples(set in convex_set(2), phi in point(2)) {
        let np = set.project(&phi).unwrap();
        prop_assert!(set.distance(&np.point).unwrap() <= 1e-7);
        for q in set.to_cloud(0.1).unwrap() {
            prop_assert!(np.distance <= phi.dist(&q) + 1e-7);
        }
        let again = set.project(&np.point).unwrap();
        prop_assert!(again.distance <= 1e-7);
    }

    #[test]
    fn hausdorff_is_a_metric_on_clouds(
        a in prop::collection::vec(point(2), 1..6),
        b in prop::collection::vec(point(2), 1..6),
        c in prop::collection::vec(point(2), 1..6),
    ) {
        let ab = hausdorff_clouds(&a, &b).unwrap();
        prop_assert_eq!(ab, hausdorff_clouds(&b, &a).unwrap());
        prop_assert_eq!(hausdorff_clouds(&a, &a).unwrap(), 0.0);
        prop_assert!(ab <= hausdorff_clouds(&a, &c).unwrap() + hausdorff_clouds(&c, &b).unwrap() + 1e-12);
    }

    #[test]
    fn matrix_game_strategies_are_optimal(a in prop::collection::vec(prop::collection::vec(-1.0..1.0f64, 3), 1..4)) {
        let sol = matrix_game(&a).unwrap();
        prop_assert!((sol.value - sol.lower_value).abs() <= 1e-9);
        prop_assert!((best_response_value(&a, &sol.row_strategy) - sol.value).abs() <= 1e-9);
        prop_assert!((best_reply_value(&a, &sol.col_strategy) - sol.value).abs() <= 1e-9);
        let pure_upper = a.iter().map(|r| r.iter().cloned().fold(f64::MIN, f64::max)).fold(f64::MAX, f64::min);
        let pure_lower = (0..3).map(|j| a.iter().map(|r| r[j]).fold(f64::MAX, f64::min)).fold(f64::MIN, f64::max);
        prop_assert!(pure_lower - 1e-9 <= sol.value && sol.value <= pure_upper + 1e-9);
    }

    #[test]
    fn running_mean_matches_average(zs in prop::collection::vec(point(3), 1..40)) {
        let mut phi: Option<Point> = None;
        for (t, z) in zs.iter().enumerate() {
            phi = Some(next_mean(phi.as_ref(), t, z));
        }
        let n = zs.len() as f64;
        let avg: Vec<f64> = (0..3).map(|i| zs.iter().map(|z| z.0[i]).sum::<f64>() / n).collect();
        prop_assert!(dist(&phi.unwrap().0, &avg) <= 1e-12);
    }

    #[test]
    fn epsilon_is_monotone(t1 in 1e-3..4.0f64, t2 in 1e-3..4.0f64, g in 0.1..3.0f64) {
        let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
        prop_assert!(epsilon_of_tau(lo, g).unwrap() <= epsilon_of_tau(hi, g).unwrap());
        prop_assert!(epsilon_of_tau(hi, g).unwrap() < hi / 2.0);
    }

    #[test]
    fn shrink_only_removes_points(
        pts in prop::collection::vec((0.0..1.0f64, 0.0..1.0f64), 1..8),
        tau in 0.02..1.0f64,
    ) {
        let game = Game::appendix_a(GameMode::Mixed);
        let cloud: Vec<Point> = pts.into_iter().map(|(x, y)| Point(vec![x * (1.0 - y), y * (1.0 - x)])).collect();
        let (kept, certs) = shrink(&game, &cloud, 0.1, tau).unwrap();
        prop_assert!(kept.iter().all(|p| cloud.contains(p)));
        for c in &certs {
            prop_assert!(c.tau >= tau);
            prop_assert!(c.value > c.halfspace.offset);
            prop_assert!(!kept.contains(&c.psi));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn peel_stages_are_nested(pts in prop::collection::vec((0.0..1.0f64, 0.0..1.0f64), 1..6)) {
        let game = Game::appendix_a(GameMode::Mixed);
        let cloud: Vec<Point> = pts.into_iter().map(|(x, y)| Point(vec![x * (1.0 - y), y * (1.0 - x)])).collect();
        let set = TargetSet::cloud(cloud, 0.2);
        let opts = PeelOptions { max_stages: 16, ..PeelOptions::default() };
        let dec = match peel(&game, &set, &opts) {
            Ok(d) => d,
            Err(blackwell::Error::StageBudgetExceeded(p)) => *p,
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        };
        for w in dec.stages.windows(2) {
            prop_assert!(w[1].points.iter().all(|p| w[0].points.contains(p)));
        }
        if let Classification::ASetApprox { core_size, .. } = dec.classification {
            prop_assert_eq!(core_size, dec.core.len());
            prop_assert_eq!(dec.stages.last().unwrap().removed, 0);
        }
    }
}
