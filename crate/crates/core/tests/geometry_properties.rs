//! Property tests for the geometry kernels: hull containment, IoU symmetry,
//! union bounds against a Monte-Carlo oracle, RANSAC determinism and
//! projection idempotence over randomized inputs.

mod common;

use common::{mc_union_area, random_convex, z0_plane};
use glasnav_core::geometry::{
    convex_hull_planar, fit_plane_ransac, polygon_area, polygon_iou, polygon_union,
    project_to_plane, Plane, PlanarPolygon, Vec2, Vec3,
};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

#[test]
fn hull_contains_all_inputs_within_tolerance() {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let plane = z0_plane();
    let pts: Vec<Vec3> = (0..1000)
        .map(|_| {
            let a = rng.gen_range(0.0..std::f64::consts::TAU);
            let r = rng.gen_range(0.0..1.0f64).sqrt();
            Vec3::new(r * a.cos(), r * a.sin(), 0.0)
        })
        .collect();
    let hull = convex_hull_planar(&pts, &plane).unwrap();
    for p in &pts {
        assert!(
            hull.distance_to_point(p) <= 1e-9,
            "input point {p:?} escaped the hull"
        );
    }
}

#[test]
fn union_area_matches_monte_carlo_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    let mut tested = 0;
    while tested < 60 {
        let a = random_convex(&mut rng, Vec2::new(0.0, 0.0), 1.5);
        let off = Vec2::new(rng.gen_range(-0.8..0.8), rng.gen_range(-0.8..0.8));
        let b = random_convex(&mut rng, off, 1.5);
        let Ok(u) = polygon_union(&a, &b) else {
            continue;
        };
        let exact = polygon_area(&u).unwrap();
        let mc = mc_union_area(&a, &b, 1000 + tested as u64, 200_000);
        let rel = (exact - mc).abs() / exact;
        assert!(
            rel < 0.01,
            "union area {exact} vs MC {mc} (rel {rel}) on case {tested}"
        );
        tested += 1;
    }
}

#[test]
fn union_bounds_and_containment_equality() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut tested = 0;
    while tested < 200 {
        let a = random_convex(&mut rng, Vec2::new(0.0, 0.0), 1.2);
        let off = Vec2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let radius = rng.gen_range(0.4..1.6);
        let b = random_convex(&mut rng, off, radius);
        let Ok(u) = polygon_union(&a, &b) else {
            continue;
        };
        let area_a = polygon_area(&a).unwrap();
        let area_b = polygon_area(&b).unwrap();
        let area_u = polygon_area(&u).unwrap();
        assert!(area_u >= area_a.max(area_b) - 1e-9);
        assert!(area_u <= area_a + area_b + 1e-9);

        // Left-equality iff one polygon contains the other (containment
        // checked directly on the vertices).
        let a_in_b = a
            .local_vertices()
            .iter()
            .all(|p| b.distance_to_point(&b.plane().basis().to_world(p)) <= 1e-7);
        let b_in_a = b
            .local_vertices()
            .iter()
            .all(|p| a.distance_to_point(&a.plane().basis().to_world(p)) <= 1e-7);
        let equality = (area_u - area_a.max(area_b)).abs() <= 1e-7;
        if a_in_b || b_in_a {
            assert!(equality, "containment without area equality");
        }
        if equality {
            assert!(a_in_b || b_in_a, "area equality without containment");
        }
        tested += 1;
    }
}

#[test]
fn iou_is_symmetric_and_bounded() {
    let mut rng = ChaCha8Rng::seed_from_u64(55);
    for _ in 0..200 {
        let a = random_convex(&mut rng, Vec2::new(0.0, 0.0), 1.5);
        let off = Vec2::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let radius = rng.gen_range(0.3..2.0);
        let b = random_convex(&mut rng, off, radius);
        let ab = polygon_iou(&a, &b).unwrap();
        let ba = polygon_iou(&b, &a).unwrap();
        assert_eq!(ab, ba, "IoU must be exactly symmetric");
        assert!((0.0..=1.0).contains(&ab));
    }
}

#[test]
fn projection_is_idempotent_over_random_planes() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..200 {
        let n = Vec3::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        );
        if n.norm() < 1e-3 {
            continue;
        }
        let plane = Plane::new(n.normalize(), rng.gen_range(-5.0..5.0)).unwrap();
        let pts: Vec<Vec3> = (0..10)
            .map(|_| {
                Vec3::new(
                    rng.gen_range(-10.0..10.0),
                    rng.gen_range(-10.0..10.0),
                    rng.gen_range(-10.0..10.0),
                )
            })
            .collect();
        let once = project_to_plane(&pts, &plane);
        let twice = project_to_plane(&once, &plane);
        for (p, q) in once.iter().zip(&twice) {
            assert!((p - q).norm() <= 1e-9);
            assert!(plane.distance(p) <= 1e-9);
        }
    }
}

#[test]
fn ransac_is_deterministic_over_random_clouds() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for case in 0..50 {
        let pts: Vec<Vec3> = (0..60)
            .map(|_| {
                Vec3::new(
                    rng.gen_range(-2.0..2.0),
                    rng.gen_range(-2.0..2.0),
                    0.4 * rng.gen_range(-1.0..1.0),
                )
            })
            .collect();
        let (p1, i1) = fit_plane_ransac(&pts, 0.15, 100, case).unwrap();
        let (p2, i2) = fit_plane_ransac(&pts, 0.15, 100, case).unwrap();
        assert_eq!(p1.normal().x.to_bits(), p2.normal().x.to_bits());
        assert_eq!(p1.normal().y.to_bits(), p2.normal().y.to_bits());
        assert_eq!(p1.normal().z.to_bits(), p2.normal().z.to_bits());
        assert_eq!(p1.offset().to_bits(), p2.offset().to_bits());
        assert_eq!(i1, i2);
    }
}

#[test]
fn union_preserves_constituents() {
    // Monotone coverage: both inputs stay inside the union.
    let mut rng = ChaCha8Rng::seed_from_u64(91);
    let mut tested = 0;
    while tested < 100 {
        let a = random_convex(&mut rng, Vec2::new(0.0, 0.0), 1.0);
        let off = Vec2::new(rng.gen_range(-0.7..0.7), rng.gen_range(-0.7..0.7));
        let b = random_convex(&mut rng, off, 1.0);
        let Ok(u) = polygon_union(&a, &b) else {
            continue;
        };
        for poly in [&a, &b] {
            for v in poly.world_vertices() {
                assert!(
                    u.distance_to_point(&v) <= 1e-6,
                    "constituent vertex {v:?} left the union"
                );
            }
        }
        tested += 1;
    }
}

#[test]
fn nonconvex_union_chains_match_oracle() {
    // Chains of unions produce non-convex polygons; keep checking areas
    // against the Monte-Carlo oracle as the shape grows.
    let mut rng = ChaCha8Rng::seed_from_u64(47);
    let mut acc: Option<PlanarPolygon> = None;
    let mut exact_chain = 0.0;
    for step in 0..15 {
        let off = Vec2::new(step as f64 * 0.45, (step % 3) as f64 * 0.3 - 0.3);
        let next = random_convex(&mut rng, off, 0.9);
        acc = Some(match acc {
            None => next,
            Some(cur) => match polygon_union(&cur, &next) {
                Ok(u) => u,
                Err(_) => cur,
            },
        });
        exact_chain = polygon_area(acc.as_ref().unwrap()).unwrap();
    }
    assert!(exact_chain > 0.0);
    let acc = acc.unwrap();
    // Validate the final accumulated area with MC over its own bbox.
    let mc = mc_union_area(&acc, &acc, 9009, 300_000);
    let rel = (exact_chain - mc).abs() / exact_chain;
    assert!(rel < 0.01, "chained union {exact_chain} vs MC {mc}");
}
