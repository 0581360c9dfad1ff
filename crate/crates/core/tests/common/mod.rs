//! Helpers shared by the geometry property tests and the acceptance suite:
//! random convex polygon generation and the Monte-Carlo area oracle.

use glasnav_core::geometry::{convex_hull_planar, Plane, PlanarPolygon, Vec2, Vec3};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

pub fn z0_plane() -> Plane {
    Plane::new(Vec3::new(0.0, 0.0, 1.0), 0.0).unwrap()
}

/// Random convex polygon on the z=0 plane: hull of a small point cloud
/// centered near `center` with the given radius scale.
pub fn random_convex(rng: &mut ChaCha8Rng, center: Vec2, radius: f64) -> PlanarPolygon {
    let plane = z0_plane();
    loop {
        let n = rng.gen_range(4..12);
        let pts: Vec<Vec3> = (0..n)
            .map(|_| {
                let a = rng.gen_range(0.0..std::f64::consts::TAU);
                let r = radius * rng.gen_range(0.3..1.0f64).sqrt();
                Vec3::new(center.x + r * a.cos(), center.y + r * a.sin(), 0.0)
            })
            .collect();
        if let Ok(hull) = convex_hull_planar(&pts, &plane) {
            return hull;
        }
    }
}

/// Monte-Carlo estimate of area(a UNION b) by uniform sampling over the
/// joint bounding box.
pub fn mc_union_area(a: &PlanarPolygon, b: &PlanarPolygon, seed: u64, samples: usize) -> f64 {
    let mut lo = Vec2::new(f64::INFINITY, f64::INFINITY);
    let mut hi = Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in a.local_vertices().iter().chain(b.local_vertices()) {
        lo.x = lo.x.min(p.x);
        lo.y = lo.y.min(p.y);
        hi.x = hi.x.max(p.x);
        hi.y = hi.y.max(p.y);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hits = 0usize;
    for _ in 0..samples {
        let p = Vec2::new(rng.gen_range(lo.x..hi.x), rng.gen_range(lo.y..hi.y));
        if a.contains_local(&p) || b.contains_local(&p) {
            hits += 1;
        }
    }
    (hi.x - lo.x) * (hi.y - lo.y) * hits as f64 / samples as f64
}

/// Monte-Carlo estimate of area(a INTERSECT b).
pub fn mc_intersection_area(
    a: &PlanarPolygon,
    b: &PlanarPolygon,
    seed: u64,
    samples: usize,
) -> f64 {
    let mut lo = Vec2::new(f64::INFINITY, f64::INFINITY);
    let mut hi = Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in a.local_vertices().iter().chain(b.local_vertices()) {
        lo.x = lo.x.min(p.x);
        lo.y = lo.y.min(p.y);
        hi.x = hi.x.max(p.x);
        hi.y = hi.y.max(p.y);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hits = 0usize;
    for _ in 0..samples {
        let p = Vec2::new(rng.gen_range(lo.x..hi.x), rng.gen_range(lo.y..hi.y));
        if a.contains_local(&p) && b.contains_local(&p) {
            hits += 1;
        }
    }
    (hi.x - lo.x) * (hi.y - lo.y) * hits as f64 / samples as f64
}
