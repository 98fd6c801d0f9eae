mod support;

use lymphkit_core::evalkit::{assd, assd_with, dice, wilcoxon_signed_rank};
use lymphkit_core::measure::shortest_diameter;
use lymphkit_core::morph3d::{
    connected_components, dilate, directed_surface_distances, surface_voxels, DistanceBackend,
};
use lymphkit_core::{Connectivity, Geometry, Mask};
use rand::Rng;
use support::*;

const CONNS: [Connectivity; 3] = [
    Connectivity::Six,
    Connectivity::Eighteen,
    Connectivity::TwentySix,
];

#[test]
fn components_match_flood_fill() {
    let mut r = rng(11);
    for i in 0..240 {
        let m = random_mask(&mut r, 20, SPACING);
        let conn = CONNS[i % 3];
        let cs = connected_components(&m, conn);
        let want = bfs_components(&m, conn);
        assert_eq!(cs.len(), want.len(), "case {i}");
        for (k, (c, w)) in cs.components.iter().zip(&want).enumerate() {
            assert_eq!(c.id as usize, k + 1);
            assert_eq!(&c.voxels, w, "case {i} component {k}");
        }
    }
}

#[test]
fn dilation_matches_sweep() {
    let mut r = rng(12);
    for i in 0..120 {
        let m = random_mask(&mut r, 12, SPACING);
        // sparse seeds so the growth is visible
        let sparse = Mask::new(
            *m.geometry(),
            m.bits().iter().map(|&b| b && r.random_bool(0.1)).collect(),
        )
        .unwrap();
        let iters = 1 + i % 3;
        let conn = CONNS[i % 3];
        assert_eq!(
            dilate(&sparse, conn, iters).unwrap(),
            sweep_dilate(&sparse, conn, iters),
            "case {i}"
        );
    }
}

#[test]
fn surface_matches_neighbour_scan() {
    let mut r = rng(13);
    for _ in 0..60 {
        let m = random_mask(&mut r, 14, SPACING);
        assert_eq!(surface_voxels(&m), naive_surface(&m));
    }
    let s = digitized_sphere(6.0, SPACING);
    assert_eq!(surface_voxels(&s), naive_surface(&s));
}

#[test]
fn directed_distances_match_pairwise() {
    let mut r = rng(14);
    let g = Geometry::with_spacing([12, 30, 30], SPACING).unwrap();
    for _ in 0..50 {
        let mut pick = |n: usize| -> Vec<_> {
            let mut v: Vec<_> = (0..n)
                .map(|_| g.coords(r.random_range(0..g.len())))
                .collect();
            v.sort();
            v.dedup();
            v
        };
        let a = pick(10);
        let b = pick(10);
        let want = pairwise_min_distances(&a, &b, SPACING);
        for backend in [
            DistanceBackend::Auto,
            DistanceBackend::BruteForce,
            DistanceBackend::DistanceTransform,
        ] {
            let got = directed_surface_distances(&a, &b, SPACING, backend).unwrap();
            for (x, y) in got.iter().zip(&want) {
                assert!((x - y).abs() < 1e-9);
            }
        }
    }
}

#[test]
fn dice_and_assd_match_brute_force() {
    let mut r = rng(15);
    for i in 0..120 {
        let dims = [
            r.random_range(1..=16),
            r.random_range(1..=16),
            r.random_range(1..=16),
        ];
        let p = random_mask_with_dims(&mut r, dims, SPACING);
        let g = random_mask_with_dims(&mut r, dims, SPACING);
        assert!((dice(&p, &g).unwrap() - count_dice(&p, &g)).abs() < 1e-12);
        let got = assd(&p, &g).unwrap();
        match brute_assd(&p, &g) {
            Some(want) => {
                assert!(!got.fallback_used);
                assert!(
                    (got.assd_mm - want).abs() < 1e-9,
                    "case {i}: {} vs {want}",
                    got.assd_mm
                );
                for b in [
                    DistanceBackend::BruteForce,
                    DistanceBackend::DistanceTransform,
                ] {
                    assert!((assd_with(&p, &g, b).unwrap().assd_mm - want).abs() < 1e-9);
                }
            }
            None => assert!(got.fallback_used),
        }
    }
}

#[test]
fn nested_cubes_assd() {
    let g = Geometry::with_spacing([9, 20, 20], SPACING).unwrap();
    let cube = |lo: usize, hi: usize| {
        let mut m = Mask::empty(g);
        for z in lo..=hi.min(8) {
            for y in lo..=hi {
                for x in lo..=hi {
                    m.set([z, y, x], true);
                }
            }
        }
        m
    };
    let outer = cube(1, 15);
    let inner = cube(3, 10);
    let want = brute_assd(&outer, &inner).unwrap();
    assert!((assd(&outer, &inner).unwrap().assd_mm - want).abs() < 1e-9);
}

#[test]
fn exact_wilcoxon_matches_enumeration() {
    let mut r = rng(16);
    for i in 0..60 {
        let n = 1 + i % 10;
        // small integer grid so ties and zero differences occur
        let a: Vec<f64> = (0..n).map(|_| r.random_range(0..6) as f64 * 0.5).collect();
        let b: Vec<f64> = (0..n).map(|_| r.random_range(0..6) as f64 * 0.5).collect();
        let got = wilcoxon_signed_rank(&a, &b).unwrap().p_two_sided;
        let want = enumerate_wilcoxon_p(&a, &b);
        assert!((got - want).abs() < 1e-12, "case {i}: {got} vs {want}");
    }
}

#[test]
fn short_axis_matches_pair_scan() {
    let mut r = rng(17);
    for _ in 0..80 {
        let m = random_mask(&mut r, 7, SPACING);
        for c in connected_components(&m, Connectivity::TwentySix).iter() {
            let got = shortest_diameter(c, SPACING).unwrap().shortest_diameter_mm;
            let want = brute_short_axis(&c.voxels, SPACING);
            assert!((got - want).abs() < 1e-9, "{got} vs {want}");
        }
    }
    for radius in [3.0, 5.0, 8.0, 12.0] {
        let s = digitized_sphere(radius, SPACING);
        let cs = connected_components(&s, Connectivity::TwentySix);
        let got = shortest_diameter(&cs.components[0], SPACING)
            .unwrap()
            .shortest_diameter_mm;
        assert!((got - brute_short_axis(&cs.components[0].voxels, SPACING)).abs() < 1e-9);
    }
}
