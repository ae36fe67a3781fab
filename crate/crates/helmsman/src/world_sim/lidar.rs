//! Ray-cast range sensor: a spinning multi-channel scanner that returns one
//! body-frame point per ray that hits geometry within range.

use crate::geometry::{PlanarPose, Vec3};
use crate::vessel::{Frame, PointCloud};
use crate::world_sim::world::WorldModel;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LidarSpec {
    /// Number of elevation channels.
    pub channels: u32,
    /// Azimuth samples per channel (full revolution).
    pub rays_per_channel: u32,
    /// Total vertical field of view, degrees, centered on the horizon.
    pub vertical_fov_deg: f64,
    /// Maximum sensing range, meters.
    pub max_range: f64,
    /// Standard deviation of additive Gaussian range noise, meters.
    pub noise_sigma: f64,
}

impl Default for LidarSpec {
    fn default() -> Self {
        LidarSpec {
            channels: 16,
            rays_per_channel: 360,
            vertical_fov_deg: 30.0,
            max_range: 20.0,
            noise_sigma: 0.0,
        }
    }
}

impl LidarSpec {
    pub fn validate(&self) -> Result<(), String> {
        if self.channels < 1 {
            return Err("channels must be >= 1".into());
        }
        if self.rays_per_channel < 1 {
            return Err("rays_per_channel must be >= 1".into());
        }
        if !(self.max_range > 0.0) {
            return Err(format!("max_range must be > 0 (got {})", self.max_range));
        }
        if !(self.noise_sigma >= 0.0) {
            return Err(format!("noise_sigma must be >= 0 (got {})", self.noise_sigma));
        }
        if !(self.vertical_fov_deg >= 0.0) {
            return Err("vertical_fov_deg must be >= 0".into());
        }
        Ok(())
    }

    pub fn rays_total(&self) -> usize {
        self.channels as usize * self.rays_per_channel as usize
    }
}

/// One scan from the sensor mounted at the body origin. Ray order is fixed
/// (channels by ascending elevation, azimuth inner), so the returned cloud
/// ordering is deterministic; misses produce no point.
pub fn lidar_scan(
    pose: &PlanarPose,
    world: &WorldModel,
    spec: &LidarSpec,
    rng: &mut impl Rng,
) -> PointCloud {
    let mut points = Vec::with_capacity(spec.rays_total());
    let noise = if spec.noise_sigma > 0.0 {
        Some(Normal::new(0.0, spec.noise_sigma).expect("validated sigma"))
    } else {
        None
    };
    let half_fov = spec.vertical_fov_deg.to_radians() * 0.5;
    for ch in 0..spec.channels {
        let elevation = if spec.channels == 1 {
            0.0
        } else {
            -half_fov + 2.0 * half_fov * ch as f64 / (spec.channels - 1) as f64
        };
        let (sin_el, cos_el) = elevation.sin_cos();
        for ray in 0..spec.rays_per_channel {
            let azimuth = -std::f64::consts::PI
                + 2.0 * std::f64::consts::PI * ray as f64 / spec.rays_per_channel as f64;
            let dir_body = Vec3::new(cos_el * azimuth.cos(), cos_el * azimuth.sin(), sin_el);
            let dir_world = pose.rotate_to_world(dir_body);
            if let Some(t) = world.raycast(pose.r, dir_world, spec.max_range) {
                let range = match &noise {
                    Some(n) => (t + n.sample(rng)).max(0.0),
                    None => t,
                };
                points.push(dir_body * range);
            }
        }
    }
    PointCloud::new(points, Frame::Body)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world_sim::world::{Aabb, Shape, ShapeKind};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn horizontal_spec() -> LidarSpec {
        LidarSpec { channels: 1, vertical_fov_deg: 0.0, ..LidarSpec::default() }
    }

    #[test]
    fn empty_world_empty_cloud() {
        let world = WorldModel::default();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let cloud = lidar_scan(&PlanarPose::identity(), &world, &LidarSpec::default(), &mut rng);
        assert!(cloud.is_empty());
        assert_eq!(cloud.frame(), Frame::Body);
    }

    #[test]
    fn forward_ray_hits_wall_plane() {
        // Wall face at x = 2; the +x ray of a horizontal scan lands on it.
        let world = WorldModel::new(vec![Shape::fixed(ShapeKind::Box(
            Aabb::new(Vec3::new(2.0, -10.0, -1.0), Vec3::new(2.5, 10.0, 2.0)).unwrap(),
        ))]);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let cloud = lidar_scan(&PlanarPose::identity(), &world, &horizontal_spec(), &mut rng);
        let hit = cloud
            .points()
            .iter()
            .find(|p| p.y.abs() < 1e-9 && p.x > 0.0)
            .expect("forward ray should return");
        assert!((hit.x - 2.0).abs() < 1e-9, "hit at {hit:?}");
        assert!(hit.z.abs() < 1e-12);
    }

    #[test]
    fn all_returns_lie_on_surfaces() {
        let world = WorldModel::new(vec![
            Shape::fixed(ShapeKind::Box(
                Aabb::new(Vec3::new(1.5, -2.0, -0.5), Vec3::new(2.5, 2.0, 1.5)).unwrap(),
            )),
            Shape::fixed(ShapeKind::Box(
                Aabb::new(Vec3::new(-3.0, -1.0, -0.5), Vec3::new(-2.0, 3.0, 1.0)).unwrap(),
            )),
        ]);
        let pose = PlanarPose::new(Vec3::new(0.2, 0.1, 0.3), 0.7);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let cloud = lidar_scan(&pose, &world, &LidarSpec::default(), &mut rng);
        assert!(!cloud.is_empty());
        // Analytic oracle: a zero-noise return must sit on some box face.
        for &p_body in cloud.points() {
            let p = pose.world_from_body(p_body);
            let on_surface = world.shapes.iter().any(|s| match &s.kind {
                ShapeKind::Box(b) => {
                    let inside = p.x >= b.min.x - 1e-9
                        && p.x <= b.max.x + 1e-9
                        && p.y >= b.min.y - 1e-9
                        && p.y <= b.max.y + 1e-9
                        && p.z >= b.min.z - 1e-9
                        && p.z <= b.max.z + 1e-9;
                    inside
                        && [
                            (p.x - b.min.x).abs(),
                            (p.x - b.max.x).abs(),
                            (p.y - b.min.y).abs(),
                            (p.y - b.max.y).abs(),
                            (p.z - b.min.z).abs(),
                            (p.z - b.max.z).abs(),
                        ]
                        .into_iter()
                        .fold(f64::INFINITY, f64::min)
                            < 1e-9
                }
                _ => false,
            });
            assert!(on_surface, "return off-surface: {p:?}");
        }
    }

    #[test]
    fn scan_is_deterministic_for_a_seed() {
        let world = WorldModel::new(vec![Shape::fixed(ShapeKind::Box(
            Aabb::new(Vec3::new(1.0, -1.0, -0.5), Vec3::new(2.0, 1.0, 1.0)).unwrap(),
        ))]);
        let spec = LidarSpec { noise_sigma: 0.01, ..LidarSpec::default() };
        let pose = PlanarPose::identity();
        let scan = |seed: u64| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            lidar_scan(&pose, &world, &spec, &mut rng)
        };
        let (a, b) = (scan(42), scan(42));
        assert_eq!(a.len(), b.len());
        for (pa, pb) in a.points().iter().zip(b.points()) {
            assert_eq!(pa, pb);
        }
        let c = scan(43);
        assert!(a.points().iter().zip(c.points()).any(|(x, y)| x != y));
    }

    #[test]
    fn range_limit_suppresses_far_returns() {
        let world = WorldModel::new(vec![Shape::fixed(ShapeKind::Box(
            Aabb::new(Vec3::new(30.0, -5.0, -1.0), Vec3::new(31.0, 5.0, 2.0)).unwrap(),
        ))]);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let cloud = lidar_scan(&PlanarPose::identity(), &world, &horizontal_spec(), &mut rng);
        assert!(cloud.is_empty(), "wall at 30 m must be beyond the 20 m range");
    }
}
