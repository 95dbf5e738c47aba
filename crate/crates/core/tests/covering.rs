//! Exact covering-number invariants on random small clouds: the
//! free-center / in-set sandwich, monotonicity in the radius, and the greedy
//! solver's relation to the exact one.

use nalgebra::DVector;
use rand::RngExt;

use seplab::dimension::{cover_count, CenterMode, CoverQuery, CoverSolver, PointCloud};
use seplab::rng::{derive, stream};

fn random_cloud(seed: u64) -> PointCloud {
    let mut rng = stream(seed, &[0xC1_0D]);
    let p = rng.random_range(1..=12usize);
    let dim = rng.random_range(1..=3usize);
    let points = (0..p)
        .map(|_| DVector::from_fn(dim, |_, _| rng.random::<f64>() * 2.0 - 1.0))
        .collect();
    PointCloud::new(points).unwrap()
}

fn exact(cloud: &PointCloud, delta: f64, mode: CenterMode) -> usize {
    cover_count(cloud, &CoverQuery { delta, center_mode: mode, solver: CoverSolver::Exact })
        .unwrap()
        .count
}

#[test]
fn free_and_in_set_counts_sandwich() {
    let deltas = [0.05, 0.1, 0.25, 0.5, 1.0];
    for c in 0..50u64 {
        let cloud = random_cloud(derive(11, &[c]));
        for &delta in &deltas {
            let free = exact(&cloud, delta, CenterMode::Free);
            let in_set = exact(&cloud, delta, CenterMode::InSet);
            let free_half = exact(&cloud, delta / 2.0, CenterMode::Free);
            assert!(
                free <= in_set && in_set <= free_half,
                "cloud {c}, delta {delta}: free {free}, in_set {in_set}, free(δ/2) {free_half}"
            );
        }
    }
}

#[test]
fn counts_never_grow_with_radius() {
    for c in 0..30u64 {
        let cloud = random_cloud(derive(23, &[c]));
        for mode in [CenterMode::Free, CenterMode::InSet] {
            let mut last = usize::MAX;
            for &delta in &[0.02, 0.05, 0.1, 0.2, 0.4, 0.8, 1.6] {
                let count = exact(&cloud, delta, mode);
                assert!(
                    count <= last,
                    "cloud {c}: count rose from {last} to {count} at delta {delta} ({mode:?})"
                );
                last = count;
            }
        }
    }
}

#[test]
fn greedy_upper_bounds_exact() {
    for c in 0..30u64 {
        let cloud = random_cloud(derive(37, &[c]));
        for &delta in &[0.1, 0.3, 0.9] {
            for mode in [CenterMode::Free, CenterMode::InSet] {
                let exact_count = exact(&cloud, delta, mode);
                let greedy = cover_count(
                    &cloud,
                    &CoverQuery { delta, center_mode: mode, solver: CoverSolver::Greedy },
                )
                .unwrap();
                assert!(
                    greedy.count >= exact_count,
                    "greedy found fewer balls than the exact optimum"
                );
                let factor = greedy.greedy_bound_factor.unwrap();
                assert!(
                    (greedy.count as f64) <= factor * exact_count as f64,
                    "greedy exceeded its ln(P)+1 guarantee"
                );
            }
        }
    }
}

#[test]
fn every_ball_center_covers_its_points() {
    for c in 0..10u64 {
        let cloud = random_cloud(derive(51, &[c]));
        let q = CoverQuery { delta: 0.3, center_mode: CenterMode::Free, solver: CoverSolver::Exact };
        let res = cover_count(&cloud, &q).unwrap();
        // Every cloud point must lie strictly inside at least one chosen ball.
        for (i, p) in cloud.points().iter().enumerate() {
            assert!(
                res.centers.iter().any(|ctr| (p - ctr).norm() < q.delta),
                "cloud {c}: point {i} left uncovered"
            );
        }
    }
}
