//! Randomized invariants.

use proptest::prelude::*;
use sphframes::families::{make_family, FamilyKind};
use sphframes::frames::{frame_quotient, make_scales, BandFunction, ScaleKind};
use sphframes::kernel::{kernel_closed, KernelSpec};
use sphframes::sphere::{
    build_phase_grid, geodesic_distance, hyperbolic_distance, random_point, task_rng, BallPoint, LevelSpec, Partition,
    PhaseSpaceGrid, Placement, PrecisionProfile, SpherePoint,
};
use sphframes::Dimension;

fn dim(n: u32) -> Dimension {
    Dimension::new(n).unwrap()
}

fn points(n: u32, seed: u64, count: usize) -> Vec<SpherePoint> {
    let mut rng = task_rng(seed, 0);
    (0..count).map(|_| random_point(dim(n), &mut rng)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn geodesic_distance_is_a_metric(n in 2u32..5, seed in any::<u64>()) {
        let p = points(n, seed, 3);
        let (xy, yz, xz) = (
            geodesic_distance(&p[0], &p[1]),
            geodesic_distance(&p[1], &p[2]),
            geodesic_distance(&p[0], &p[2]),
        );
        prop_assert!((0.0..=std::f64::consts::PI).contains(&xy));
        prop_assert_eq!(xy, geodesic_distance(&p[1], &p[0]));
        prop_assert!(xz <= xy + yz + 1e-12);
        prop_assert!(geodesic_distance(&p[0], &p[0]) < 1e-7);
    }

    #[test]
    fn kernel_is_symmetric_and_bounded(
        n in 2u32..4,
        m in 1u32..5,
        a in 0.01f64..3.0,
        b in 0.01f64..3.0,
        seed in any::<u64>(),
    ) {
        let spec = KernelSpec::new(dim(n), m).unwrap();
        let p = points(n, seed, 2);
        let k = kernel_closed(&spec, a, &p[0], b, &p[1]).unwrap();
        let swapped = kernel_closed(&spec, b, &p[1], a, &p[0]).unwrap();
        prop_assert!((k - swapped).abs() <= 1e-12 * k.abs().max(1e-300));
        let kaa = kernel_closed(&spec, a, &p[0], a, &p[0]).unwrap();
        let kbb = kernel_closed(&spec, b, &p[1], b, &p[1]).unwrap();
        prop_assert!(kaa > 0.0 && kbb > 0.0);
        prop_assert!(k * k <= kaa * kbb * (1.0 + 1e-10));
    }

    #[test]
    fn hyperbolic_distance_dominates_radial_gap(
        n in 2u32..4,
        bp in 0.01f64..3.0,
        bq in 0.01f64..3.0,
        h in 0.2f64..3.0,
        seed in any::<u64>(),
    ) {
        let p = points(n, seed, 2);
        let x = BallPoint::from_scale(bp, p[0].clone()).unwrap();
        let y = BallPoint::from_scale(bq, p[1].clone()).unwrap();
        let d = hyperbolic_distance(&x, &y, h).unwrap().value;
        prop_assert!(d >= (x.w() - y.w()).abs() * (1.0 - 1e-9));
    }

    #[test]
    fn geometric_scales_are_decreasing_with_constant_ratio(
        b0 in 0.1f64..50.0,
        q in 0.05f64..0.99,
        count in 1usize..200,
    ) {
        let s = make_scales(&ScaleKind::Geometric { b0, q, count }).unwrap();
        prop_assert_eq!(s.len(), count);
        prop_assert!(s.scales().windows(2).all(|w| w[0] > w[1]));
        prop_assert!(s.ratios().iter().all(|r| (r * q - 1.0).abs() < 1e-12));
        prop_assert!(s.nu().iter().all(|v| (v + q.ln()).abs() < 1e-15));
    }

    #[test]
    fn locate_inverts_projection(
        n in 2u32..4,
        level in 0u32..4,
        cell_seed in any::<u64>(),
        t in prop::collection::vec(0.01f64..0.99, 3),
    ) {
        let p = Partition::build(dim(n), level).unwrap();
        let cell = cell_seed % p.cell_count();
        let (facet, lo, hi) = p.facet_box(cell);
        let u: Vec<f64> = lo.iter().zip(&hi).zip(&t).map(|((l, h), t)| l + (h - l) * t).collect();
        prop_assert_eq!(p.locate(&p.project(facet, &u)), cell);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn grid_json_round_trips(k in 0u32..3, count in 1usize..6, jitter in 0.0f64..0.9, seed in any::<u64>()) {
        let scales = make_scales(&ScaleKind::Geometric { b0: 1.0, q: 0.7, count }).unwrap();
        let placement = Placement::Jitter { fraction: jitter, seed };
        let grid =
            build_phase_grid(dim(2), &scales, &LevelSpec::Uniform(k), placement, PrecisionProfile::Fast).unwrap();
        let back = PhaseSpaceGrid::from_json(&grid.to_json().unwrap()).unwrap();
        prop_assert_eq!(back, grid);
    }

    #[test]
    fn frame_quotient_is_scale_invariant(factor in 0.01f64..100.0, seed in any::<u64>()) {
        let family = make_family(FamilyKind::Poisson { m: 2 }, dim(2)).unwrap();
        let scales = make_scales(&ScaleKind::Geometric { b0: 1.0, q: 0.8, count: 4 }).unwrap();
        let grid =
            build_phase_grid(dim(2), &scales, &LevelSpec::Uniform(1), Placement::Center, PrecisionProfile::Fast)
                .unwrap();
        let f = BandFunction::random(dim(2), 4, 1, 6, seed, 0).unwrap();
        let base = frame_quotient(&family, &grid, &f).unwrap();
        let scaled = frame_quotient(&family, &grid, &f.scaled(factor)).unwrap();
        prop_assert!((base - scaled).abs() <= 1e-10 * base);
    }
}
