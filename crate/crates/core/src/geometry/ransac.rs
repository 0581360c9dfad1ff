use super::plane::canonical_sign;
use super::{GeometryError, Plane, Vec3};
use nalgebra::Matrix3;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

/// RANSAC plane fit with a least-squares refinement on the consensus set.
///
/// Deterministic for a fixed `(points, seed)` pair. Returns the refit plane
/// and the indices of its inliers.
pub fn fit_plane_ransac(
    points: &[Vec3],
    inlier_tol: f64,
    iterations: usize,
    seed: u64,
) -> Result<(Plane, Vec<usize>), GeometryError> {
    if points.len() < 3 {
        return Err(GeometryError::Degenerate(
            "plane fit needs at least 3 points".into(),
        ));
    }
    assert!(inlier_tol > 0.0, "inlier tolerance must be positive");
    if within_common_line(points, inlier_tol) {
        return Err(GeometryError::Degenerate(
            "points lie within tolerance of a common line".into(),
        ));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<(usize, Plane)> = None;
    for _ in 0..iterations {
        let i = rng.gen_range(0..points.len());
        let j = rng.gen_range(0..points.len());
        let k = rng.gen_range(0..points.len());
        if i == j || j == k || i == k {
            continue;
        }
        let Ok(plane) = Plane::from_points(&points[i], &points[j], &points[k]) else {
            continue;
        };
        let count = points
            .iter()
            .filter(|p| plane.distance(p) <= inlier_tol)
            .count();
        if best.as_ref().map_or(true, |(c, _)| count > *c) {
            best = Some((count, plane));
        }
    }
    let (_, hypothesis) = best.ok_or_else(|| {
        GeometryError::Degenerate("no valid plane hypothesis sampled".into())
    })?;

    let inliers: Vec<usize> = (0..points.len())
        .filter(|&i| hypothesis.distance(&points[i]) <= inlier_tol)
        .collect();
    let refit = least_squares_plane(points, &inliers)?;
    let inliers: Vec<usize> = (0..points.len())
        .filter(|&i| refit.distance(&points[i]) <= inlier_tol)
        .collect();
    Ok((refit, inliers))
}

/// Total least squares plane through the selected points: centroid plus the
/// covariance eigenvector of smallest eigenvalue.
pub fn least_squares_plane(points: &[Vec3], indices: &[usize]) -> Result<Plane, GeometryError> {
    if indices.len() < 3 {
        return Err(GeometryError::Degenerate(
            "least squares needs at least 3 points".into(),
        ));
    }
    let n = indices.len() as f64;
    let centroid: Vec3 = indices.iter().map(|&i| points[i]).sum::<Vec3>() / n;
    let mut cov = Matrix3::zeros();
    for &i in indices {
        let d = points[i] - centroid;
        cov += d * d.transpose();
    }
    let eig = cov.symmetric_eigen();
    let mut min_idx = 0;
    for i in 1..3 {
        if eig.eigenvalues[i] < eig.eigenvalues[min_idx] {
            min_idx = i;
        }
    }
    let normal = eig.eigenvectors.column(min_idx).into_owned();
    let len = normal.norm();
    if !len.is_finite() || len < 1e-12 {
        return Err(GeometryError::Degenerate("covariance is singular".into()));
    }
    let normal = canonical_sign(normal / len);
    Plane::new(normal, normal.dot(&centroid))
}

/// True when every point sits within `tol` of the principal line of the
/// cloud, i.e. there is no unique plane to recover.
fn within_common_line(points: &[Vec3], tol: f64) -> bool {
    let n = points.len() as f64;
    let centroid: Vec3 = points.iter().sum::<Vec3>() / n;
    let mut cov = Matrix3::zeros();
    for p in points {
        let d = p - centroid;
        cov += d * d.transpose();
    }
    let eig = cov.symmetric_eigen();
    let mut max_idx = 0;
    for i in 1..3 {
        if eig.eigenvalues[i] > eig.eigenvalues[max_idx] {
            max_idx = i;
        }
    }
    let dir = eig.eigenvectors.column(max_idx).into_owned();
    if dir.norm() < 1e-12 {
        return true;
    }
    let dir = dir.normalize();
    points.iter().all(|p| {
        let d = p - centroid;
        (d - dir * d.dot(&dir)).norm() <= tol
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand_distr::{Distribution, Normal};

    #[test]
    fn exact_coplanar_points_recover_plane() {
        let pts = [
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(1.0, 1.0, 0.0),
            Vec3::new(0.0, 1.0, 0.0),
        ];
        let (plane, inliers) = fit_plane_ransac(&pts, 0.05, 100, 7).unwrap();
        assert_eq!(inliers.len(), 4);
        assert_relative_eq!(plane.normal().z.abs(), 1.0, epsilon = 1e-9);
        assert_relative_eq!(plane.offset().abs(), 0.0, epsilon = 1e-9);
    }

    #[test]
    fn noisy_plane_matches_full_least_squares() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let noise = Normal::new(0.0, 0.01).unwrap();
        let pts: Vec<Vec3> = (0..200)
            .map(|_| {
                Vec3::new(
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                    1.0 + noise.sample(&mut rng),
                )
            })
            .collect();
        let (plane, _) = fit_plane_ransac(&pts, 0.03, 100, 5).unwrap();
        // Oracle: full least squares over every point.
        let all: Vec<usize> = (0..pts.len()).collect();
        let oracle = least_squares_plane(&pts, &all).unwrap();
        let angle = plane.normal().dot(&oracle.normal()).abs().clamp(0.0, 1.0).acos();
        assert!(angle < 2.0_f64.to_radians(), "angle {angle} too large");
        let z_angle = plane.normal().z.abs().clamp(0.0, 1.0).acos();
        assert!(z_angle < 2.0_f64.to_radians());
    }

    #[test]
    fn collinear_points_are_degenerate() {
        let pts: Vec<Vec3> = (0..10).map(|i| Vec3::new(i as f64 * 0.1, 0.0, 0.0)).collect();
        assert!(matches!(
            fit_plane_ransac(&pts, 0.05, 100, 3),
            Err(GeometryError::Degenerate(_))
        ));
    }

    #[test]
    fn fixed_seed_is_bit_reproducible() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let pts: Vec<Vec3> = (0..50)
            .map(|_| {
                Vec3::new(
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                    0.3 * rng.gen_range(-1.0..1.0),
                )
            })
            .collect();
        let (a, ia) = fit_plane_ransac(&pts, 0.1, 100, 11).unwrap();
        let (b, ib) = fit_plane_ransac(&pts, 0.1, 100, 11).unwrap();
        assert_eq!(a.normal(), b.normal());
        assert_eq!(a.offset(), b.offset());
        assert_eq!(ia, ib);
    }
}
