//! Needle-based preview controller.
//!
//! Heading space is discretized into a fan of elongated higher-order
//! ellipsoids ("needles") rooted at the robot center. Each needle is scaled
//! lengthwise until its leading boundary touches the point cloud, capped at a
//! configured maximum; needles shorter than a minimum scale are invalid. The
//! valid needle whose scaled tip lies closest to the global waypoint supplies
//! the preview target, which steers the barrier filter around spurious
//! equilibria.

use crate::geometry::{wrap_angle, Vec3};
use crate::vessel::{Frame, PointCloud};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MarinerError {
    #[error("needle config invalid: {0}")]
    BadConfig(String),
}

/// How needle indices map to heading angles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum AngleDistribution {
    /// `theta_i = (2*pi / n) * i - pi`, a uniform grid over `[-pi, pi)`.
    #[default]
    Uniform,
}

/// Unscaled needle geometry and the scan parameters.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct NeedleConfig {
    /// Semi-axis along the needle (half the unscaled length), meters.
    pub a: f64,
    /// Lateral semi-axis, meters.
    pub b: f64,
    /// Vertical semi-axis, meters.
    pub c: f64,
    /// Ellipsoid order; must be even so powers are sign-symmetric.
    pub d: u32,
    /// Number of needles in the fan.
    pub count: usize,
    /// Needles scaled below this are invalid (blocked headings).
    pub s_min: f64,
    /// Scale cap for unobstructed headings.
    pub s_max: f64,
    #[serde(default)]
    pub dist: AngleDistribution,
}

impl Default for NeedleConfig {
    fn default() -> Self {
        NeedleConfig {
            a: 2.0,
            b: 0.8,
            c: 0.8,
            d: 2,
            count: 100,
            s_min: 0.3,
            s_max: 2.5,
            dist: AngleDistribution::Uniform,
        }
    }
}

impl NeedleConfig {
    pub fn validate(&self) -> Result<(), MarinerError> {
        for (name, v) in [("a", self.a), ("b", self.b), ("c", self.c)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(MarinerError::BadConfig(format!(
                    "semi-axis {name} must be strictly positive (got {v})"
                )));
            }
        }
        if self.d < 1 || self.d % 2 != 0 {
            return Err(MarinerError::BadConfig(format!(
                "needle order must be a positive even integer (got {})",
                self.d
            )));
        }
        if self.count < 1 {
            return Err(MarinerError::BadConfig("needle count must be >= 1".into()));
        }
        if !(self.s_min > 0.0 && self.s_min < self.s_max) {
            return Err(MarinerError::BadConfig(format!(
                "scale bounds must satisfy 0 < s_min < s_max (got {} and {})",
                self.s_min, self.s_max
            )));
        }
        Ok(())
    }

    /// World-frame length from root to tip of a needle at scale `s`:
    /// the scaled body spans `[0, 2*s*a]` along its axis.
    pub fn tip_reach(&self, s: f64) -> f64 {
        2.0 * s * self.a
    }
}

/// Per-fan result: one entry per needle plus the selection.
#[derive(Debug, Clone)]
pub struct NeedleResult {
    pub angles: Vec<f64>,
    pub scales: Vec<f64>,
    pub valid: Vec<bool>,
    /// Valid needle whose scaled tip is closest to the target; ties go to
    /// the smallest index. Absent when every heading is blocked.
    pub chosen_index: Option<usize>,
    /// Body-frame preview target: the chosen tip, or the target itself when
    /// it is nearer than the tip and the needle pointing at it is valid.
    pub preview_target_body: Option<Vec3>,
}

impl NeedleResult {
    pub fn is_stuck(&self) -> bool {
        self.chosen_index.is_none()
    }

    /// Scaled tip position of needle `i` in the robot body frame.
    pub fn tip(&self, config: &NeedleConfig, i: usize) -> Vec3 {
        let reach = config.tip_reach(self.scales[i]);
        Vec3::new(reach * self.angles[i].cos(), reach * self.angles[i].sin(), 0.0)
    }
}

/// Heading angles for the configured fan, in `[-pi, pi)`.
pub fn needle_angles(config: &NeedleConfig) -> Vec<f64> {
    match config.dist {
        AngleDistribution::Uniform => {
            let n = config.count as f64;
            (0..config.count).map(|i| 2.0 * PI / n * i as f64 - PI).collect()
        }
    }
}

/// `x^d` for the (even) needle order.
#[inline(always)]
fn powd(x: f64, d: u32) -> f64 {
    x.powi(d as i32)
}

#[inline(always)]
fn root_d(x: f64, d: u32) -> f64 {
    match d {
        2 => x.sqrt(),
        4 => x.sqrt().sqrt(),
        _ => x.powf(1.0 / d as f64),
    }
}

/// Scale of one needle against pre-split body-frame coordinates. `zterms`
/// holds the per-point `(z/c)^d` values, which do not depend on the needle
/// angle.
fn scale_against(
    config: &NeedleConfig,
    cos_t: f64,
    sin_t: f64,
    xs: &[f64],
    ys: &[f64],
    zterms: &[f64],
) -> f64 {
    let inv_b = 1.0 / config.b;
    let inv_a = 1.0 / config.a;
    let d = config.d;
    let mut s_min_seen = f64::INFINITY;
    for ((&x, &y), &zt) in xs.iter().zip(ys).zip(zterms) {
        // Rotate into the needle frame: p' = R(theta)^T p.
        let xn = cos_t * x + sin_t * y;
        if xn <= 0.0 {
            // Behind the needle root; the needle occupies x >= 0 only.
            continue;
        }
        let yn = -sin_t * x + cos_t * y;
        let md = 1.0 - powd(yn * inv_b, d) - zt;
        if md <= 0.0 {
            // Beyond the lateral extent; length scaling can never touch it.
            continue;
        }
        let m = root_d(md, d);
        let s = xn * inv_a / (1.0 + m);
        if s < s_min_seen {
            s_min_seen = s;
        }
    }
    if s_min_seen > config.s_max {
        config.s_max
    } else {
        s_min_seen
    }
}

fn split_cloud(config: &NeedleConfig, cloud: &[Vec3]) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let inv_c = 1.0 / config.c;
    let mut xs = Vec::with_capacity(cloud.len());
    let mut ys = Vec::with_capacity(cloud.len());
    let mut zt = Vec::with_capacity(cloud.len());
    for p in cloud {
        xs.push(p.x);
        ys.push(p.y);
        zt.push(powd(p.z * inv_c, config.d));
    }
    (xs, ys, zt)
}

fn assert_body_frame(cloud: &PointCloud) {
    assert!(
        cloud.frame() == Frame::Body,
        "mariner operates on body-frame clouds; transform the cloud first"
    );
}

/// Scale of a single needle at heading `theta` against a body-frame cloud.
///
/// A point participates iff it lies ahead of the needle root and within the
/// needle's lateral extent; the needle scale is the minimum per-point scale,
/// capped at `s_max` (which is also the no-participants value).
pub fn needle_scale(config: &NeedleConfig, theta: f64, cloud_body: &PointCloud) -> f64 {
    assert_body_frame(cloud_body);
    let (xs, ys, zt) = split_cloud(config, cloud_body.points());
    scale_against(config, theta.cos(), theta.sin(), &xs, &ys, &zt)
}

/// Scan the whole fan and pick the preview target for a body-frame goal.
///
/// Needles are scaled in parallel (one worker item per needle, each reduced
/// sequentially over points, so results are deterministic). Selection is the
/// valid needle with scaled tip closest to the target, smallest index on
/// ties. When the target is nearer than the chosen tip and the needle
/// pointing toward the target is valid, the preview target is clipped to the
/// target itself so the controller does not overshoot the waypoint.
pub fn select_preview_target(
    config: &NeedleConfig,
    cloud_body: &PointCloud,
    target_body: Vec3,
) -> NeedleResult {
    assert_body_frame(cloud_body);
    let angles = needle_angles(config);
    let (xs, ys, zt) = split_cloud(config, cloud_body.points());
    let scales: Vec<f64> = angles
        .par_iter()
        .map(|&theta| scale_against(config, theta.cos(), theta.sin(), &xs, &ys, &zt))
        .collect();
    let valid: Vec<bool> = scales.iter().map(|&s| s >= config.s_min).collect();

    let mut result = NeedleResult {
        angles,
        scales,
        valid,
        chosen_index: None,
        preview_target_body: None,
    };

    let mut best = f64::INFINITY;
    for i in 0..config.count {
        if !result.valid[i] {
            continue;
        }
        let dist = result.tip(config, i).distance(target_body);
        if dist < best {
            best = dist;
            result.chosen_index = Some(i);
        }
    }

    if let Some(chosen) = result.chosen_index {
        let tip = result.tip(config, chosen);
        let mut preview = tip;
        // Needle pointing most directly at the target.
        let target_angle = target_body.y.atan2(target_body.x);
        let mut direct = 0usize;
        let mut direct_err = f64::INFINITY;
        for (i, &ang) in result.angles.iter().enumerate() {
            let err = wrap_angle(ang - target_angle).abs();
            if err < direct_err {
                direct_err = err;
                direct = i;
            }
        }
        if result.valid[direct] && target_body.norm() < tip.norm() {
            preview = target_body;
        }
        result.preview_target_body = Some(preview);
    }
    result
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn body_cloud(points: Vec<Vec3>) -> PointCloud {
        PointCloud::new(points, Frame::Body)
    }

    // ------------------------------------------------------------------
    // Geometric oracle: solve the needle boundary condition
    //   (x - s*a)^d / (s*a)^d + (y/b)^d + (z/c)^d = 1
    // for the root on the leading face by bisection over s in (0, x/a).
    // ------------------------------------------------------------------

    fn oracle_point_scale(config: &NeedleConfig, p: Vec3) -> Option<f64> {
        if p.x <= 0.0 {
            return None;
        }
        let lateral = (p.y / config.b).powi(config.d as i32)
            + (p.z / config.c).powi(config.d as i32);
        if lateral >= 1.0 {
            return None;
        }
        let f = |s: f64| {
            ((p.x - s * config.a) / (s * config.a)).powi(config.d as i32) + lateral - 1.0
        };
        let (mut lo, mut hi) = (1e-12, p.x / config.a);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Some(0.5 * (lo + hi))
    }

    fn oracle_needle_scale(config: &NeedleConfig, theta: f64, cloud: &[Vec3]) -> f64 {
        let (c, s) = (theta.cos(), theta.sin());
        let mut best = f64::INFINITY;
        for p in cloud {
            let local = Vec3::new(c * p.x + s * p.y, -s * p.x + c * p.y, p.z);
            if let Some(sc) = oracle_point_scale(config, local) {
                best = best.min(sc);
            }
        }
        best.min(config.s_max)
    }

    /// Straightforward reimplementation of the whole selection (scales,
    /// validity, argmin with smallest-index ties, clipping).
    fn oracle_select(config: &NeedleConfig, cloud: &[Vec3], target: Vec3) -> (Option<usize>, Option<Vec3>) {
        let angles = needle_angles(config);
        let mut chosen: Option<usize> = None;
        let mut best = f64::INFINITY;
        let mut tips = Vec::new();
        let mut valids = Vec::new();
        for (i, &theta) in angles.iter().enumerate() {
            // Same participation rule, written against the closed form.
            let (c, s) = (theta.cos(), theta.sin());
            let mut sc = f64::INFINITY;
            for p in cloud {
                let x = c * p.x + s * p.y;
                let y = -s * p.x + c * p.y;
                if x <= 0.0 {
                    continue;
                }
                let md = 1.0
                    - (y / config.b).powi(config.d as i32)
                    - (p.z / config.c).powi(config.d as i32);
                if md <= 0.0 {
                    continue;
                }
                let m = md.powf(1.0 / config.d as f64);
                sc = sc.min(x / ((1.0 + m) * config.a));
            }
            let sc = sc.min(config.s_max);
            let valid = sc >= config.s_min;
            let reach = 2.0 * sc * config.a;
            let tip = Vec3::new(reach * theta.cos(), reach * theta.sin(), 0.0);
            if valid {
                let dist = tip.distance(target);
                if dist < best {
                    best = dist;
                    chosen = Some(i);
                }
            }
            tips.push(tip);
            valids.push(valid);
        }
        let preview = chosen.map(|ci| {
            let tip = tips[ci];
            let target_angle = target.y.atan2(target.x);
            let mut direct = 0usize;
            let mut err = f64::INFINITY;
            for (i, &a) in angles.iter().enumerate() {
                let e = wrap_angle(a - target_angle).abs();
                if e < err {
                    err = e;
                    direct = i;
                }
            }
            if valids[direct] && target.norm() < tip.norm() {
                target
            } else {
                tip
            }
        });
        (chosen, preview)
    }

    #[test]
    fn uniform_angles_small_grids() {
        let mut cfg = NeedleConfig { count: 4, ..NeedleConfig::default() };
        let got = needle_angles(&cfg);
        let want = [-PI, -PI / 2.0, 0.0, PI / 2.0];
        for (g, w) in got.iter().zip(want) {
            assert!((g - w).abs() < 1e-15);
        }
        cfg.count = 1;
        assert_eq!(needle_angles(&cfg), vec![-PI]);
    }

    #[test]
    fn uniform_angles_nineteen() {
        // Direct substitution: i = 9 of 19 gives -pi/19.
        let cfg = NeedleConfig { count: 19, ..NeedleConfig::default() };
        let got = needle_angles(&cfg)[9];
        assert!((got - (-PI / 19.0)).abs() < 1e-12, "got {got}");
        assert!((got - (-0.16534698)).abs() < 1e-7);
    }

    #[test]
    fn angles_monotone_in_range() {
        let cfg = NeedleConfig { count: 100, ..NeedleConfig::default() };
        let angles = needle_angles(&cfg);
        for w in angles.windows(2) {
            assert!(w[0] < w[1]);
        }
        assert!(angles.iter().all(|a| (-PI..PI).contains(a)));
    }

    #[test]
    fn on_axis_point_scale() {
        // Point ahead at (3, 0, 0) with a = 2, d = 2: m = 1, s = 3/4, and the
        // scaled tip 2*s*a = 3 touches the point.
        let cfg = NeedleConfig { a: 2.0, d: 2, ..NeedleConfig::default() };
        let s = needle_scale(&cfg, 0.0, &body_cloud(vec![Vec3::new(3.0, 0.0, 0.0)]));
        assert!((s - 0.75).abs() < 1e-12, "s = {s}");
        assert!((cfg.tip_reach(s) - 3.0).abs() < 1e-12);
        let oracle = oracle_needle_scale(&cfg, 0.0, &[Vec3::new(3.0, 0.0, 0.0)]);
        assert!((s - oracle).abs() < 1e-9);
    }

    #[test]
    fn empty_cloud_scales_to_max() {
        let cfg = NeedleConfig::default();
        assert_eq!(needle_scale(&cfg, 0.3, &body_cloud(vec![])), cfg.s_max);
    }

    #[test]
    fn wide_point_excluded_by_lateral_filter() {
        let cfg = NeedleConfig::default();
        // |y| >= b: the needle can never reach it by growing lengthwise.
        let s = needle_scale(&cfg, 0.0, &body_cloud(vec![Vec3::new(1.0, cfg.b, 0.0)]));
        assert_eq!(s, cfg.s_max);
    }

    #[test]
    fn behind_point_excluded() {
        let cfg = NeedleConfig::default();
        let s = needle_scale(&cfg, 0.0, &body_cloud(vec![Vec3::new(-0.5, 0.0, 0.0)]));
        assert_eq!(s, cfg.s_max);
    }

    #[test]
    fn scale_matches_bisection_oracle_on_random_scenes() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let cfg = NeedleConfig {
                a: rng.gen_range(0.5..3.0),
                b: rng.gen_range(0.2..1.5),
                c: rng.gen_range(0.2..1.5),
                d: *[2u32, 4].iter().nth(rng.gen_range(0..2)).unwrap(),
                count: 1,
                ..NeedleConfig::default()
            };
            let theta = rng.gen_range(-PI..PI);
            let cloud: Vec<Vec3> = (0..rng.gen_range(1..40))
                .map(|_| {
                    Vec3::new(
                        rng.gen_range(-8.0..8.0),
                        rng.gen_range(-8.0..8.0),
                        rng.gen_range(-1.0..1.0),
                    )
                })
                .collect();
            let got = needle_scale(&cfg, theta, &body_cloud(cloud.clone()));
            let want = oracle_needle_scale(&cfg, theta, &cloud);
            assert!((got - want).abs() < 1e-9, "{got} vs {want}");
        }
    }

    #[test]
    fn chosen_needle_ellipsoid_is_empty() {
        // No cloud point may lie strictly inside the scaled needle.
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        let cfg = NeedleConfig::default();
        for _ in 0..100 {
            let cloud: Vec<Vec3> = (0..rng.gen_range(1..200))
                .map(|_| {
                    Vec3::new(
                        rng.gen_range(-6.0..6.0),
                        rng.gen_range(-6.0..6.0),
                        rng.gen_range(-0.5..0.5),
                    )
                })
                .collect();
            let target = Vec3::new(rng.gen_range(-6.0..6.0), rng.gen_range(-6.0..6.0), 0.0);
            let res = select_preview_target(&cfg, &body_cloud(cloud.clone()), target);
            let Some(ci) = res.chosen_index else { continue };
            let (s, theta) = (res.scales[ci], res.angles[ci]);
            let (ct, st) = (theta.cos(), theta.sin());
            for p in &cloud {
                let x = ct * p.x + st * p.y;
                let y = -st * p.x + ct * p.y;
                let v = ((x - s * cfg.a) / (s * cfg.a)).powi(cfg.d as i32)
                    + (y / cfg.b).powi(cfg.d as i32)
                    + (p.z / cfg.c).powi(cfg.d as i32);
                assert!(v >= 1.0 - 1e-9, "point inside scaled needle: v = {v}");
            }
        }
    }

    #[test]
    fn free_space_picks_needle_nearest_forward_target() {
        let cfg = NeedleConfig { count: 100, ..NeedleConfig::default() };
        let target = Vec3::new(5.0, 0.0, 0.0);
        let res = select_preview_target(&cfg, &body_cloud(vec![]), target);
        let ci = res.chosen_index.unwrap();
        // Grid angle nearest zero.
        let want = needle_angles(&cfg)
            .iter()
            .enumerate()
            .min_by(|(_, a), (_, b)| a.abs().partial_cmp(&b.abs()).unwrap())
            .map(|(i, _)| i)
            .unwrap();
        assert_eq!(ci, want);
        // Tip reach 2 * s_max * a = 10 exceeds |target| = 5, and the direct
        // needle is valid, so the preview clips to the target itself.
        assert_eq!(res.preview_target_body.unwrap(), target);
    }

    #[test]
    fn wall_deflects_choice_laterally() {
        let cfg = NeedleConfig::default();
        // Wall spanning y in [-3, 3], close enough (x = 1.0) that needles
        // pointing through it fall below s_min and become invalid.
        let mut wall = Vec::new();
        let mut y = -3.0;
        while y <= 3.0 {
            wall.push(Vec3::new(1.0, y, 0.0));
            y += 0.05;
        }
        let target = Vec3::new(6.0, 0.0, 0.0);
        let res = select_preview_target(&cfg, &body_cloud(wall.clone()), target);
        let (chosen, preview) = oracle_select(&cfg, &wall, target);
        assert_eq!(res.chosen_index, chosen);
        let ci = res.chosen_index.unwrap();
        assert!(
            res.angles[ci].abs() > 0.3,
            "expected lateral deflection, got angle {}",
            res.angles[ci]
        );
        assert!(res.preview_target_body.unwrap().distance(preview.unwrap()) < 1e-12);
    }

    #[test]
    fn boxed_in_yields_stuck() {
        let cfg = NeedleConfig::default();
        // Dense ring at radius 0.6: every needle scale falls below s_min.
        let ring: Vec<Vec3> = (0..720)
            .map(|i| {
                let a = 2.0 * PI * i as f64 / 720.0;
                Vec3::new(0.6 * a.cos(), 0.6 * a.sin(), 0.0)
            })
            .collect();
        let res = select_preview_target(&cfg, &body_cloud(ring), Vec3::new(5.0, 0.0, 0.0));
        assert!(res.is_stuck());
        assert!(res.preview_target_body.is_none());
        assert!(res.valid.iter().all(|v| !v));
    }

    #[test]
    fn selection_matches_brute_force_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(71);
        for trial in 0..1000 {
            let cfg = NeedleConfig {
                a: rng.gen_range(0.8..3.0),
                b: rng.gen_range(0.3..1.2),
                c: rng.gen_range(0.3..1.2),
                d: 2,
                count: rng.gen_range(3..60),
                s_min: rng.gen_range(0.1..0.5),
                s_max: rng.gen_range(1.5..3.0),
                dist: AngleDistribution::Uniform,
            };
            let n = rng.gen_range(0..120);
            let cloud: Vec<Vec3> = (0..n)
                .map(|_| {
                    Vec3::new(
                        rng.gen_range(-7.0..7.0),
                        rng.gen_range(-7.0..7.0),
                        rng.gen_range(-0.5..0.5),
                    )
                })
                .collect();
            let target =
                Vec3::new(rng.gen_range(-8.0..8.0), rng.gen_range(-8.0..8.0), 0.0);
            let res = select_preview_target(&cfg, &body_cloud(cloud.clone()), target);
            let (chosen, preview) = oracle_select(&cfg, &cloud, target);
            assert_eq!(res.chosen_index, chosen, "trial {trial}");
            match (res.preview_target_body, preview) {
                (Some(a), Some(b)) => assert!(a.distance(b) < 1e-12, "trial {trial}"),
                (None, None) => {}
                other => panic!("trial {trial}: preview mismatch {other:?}"),
            }
        }
    }

    #[test]
    fn config_validation() {
        assert!(NeedleConfig::default().validate().is_ok());
        assert!(NeedleConfig { d: 3, ..NeedleConfig::default() }.validate().is_err());
        assert!(NeedleConfig { d: 0, ..NeedleConfig::default() }.validate().is_err());
        assert!(NeedleConfig { s_min: 3.0, ..NeedleConfig::default() }.validate().is_err());
        assert!(NeedleConfig { count: 0, ..NeedleConfig::default() }.validate().is_err());
        assert!(NeedleConfig { b: 0.0, ..NeedleConfig::default() }.validate().is_err());
    }

    proptest! {
        /// Adding points never increases a needle's scale.
        #[test]
        fn scale_monotone_under_cloud_growth(seed in 0u64..300) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let cfg = NeedleConfig::default();
            let theta = rng.gen_range(-PI..PI);
            let mut cloud: Vec<Vec3> = Vec::new();
            let mut prev = needle_scale(&cfg, theta, &body_cloud(cloud.clone()));
            for _ in 0..20 {
                cloud.push(Vec3::new(
                    rng.gen_range(-5.0..5.0),
                    rng.gen_range(-5.0..5.0),
                    rng.gen_range(-0.5..0.5),
                ));
                let next = needle_scale(&cfg, theta, &body_cloud(cloud.clone()));
                prop_assert!(next <= prev + 1e-15);
                prev = next;
            }
        }

        /// Rotating the scene by a whole number of grid steps permutes the
        /// chosen index by the same number of steps.
        #[test]
        fn rotational_equivariance(seed in 0u64..200, steps in 1usize..19) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let cfg = NeedleConfig { count: 20, ..NeedleConfig::default() };
            let rot = 2.0 * PI / cfg.count as f64 * steps as f64;
            let (c, s) = (rot.cos(), rot.sin());
            let spin = |p: Vec3| Vec3::new(c * p.x - s * p.y, s * p.x + c * p.y, p.z);
            let cloud: Vec<Vec3> = (0..30)
                .map(|_| Vec3::new(
                    rng.gen_range(-6.0..6.0),
                    rng.gen_range(-6.0..6.0),
                    rng.gen_range(-0.4..0.4),
                ))
                .collect();
            let target = Vec3::new(rng.gen_range(-6.0..6.0), rng.gen_range(-6.0..6.0), 0.0);
            prop_assume!(target.norm() > 0.5);
            let base = select_preview_target(&cfg, &body_cloud(cloud.clone()), target);
            let spun_cloud: Vec<Vec3> = cloud.iter().map(|&p| spin(p)).collect();
            let spun = select_preview_target(&cfg, &body_cloud(spun_cloud), spin(target));
            match (base.chosen_index, spun.chosen_index) {
                (Some(i), Some(j)) => {
                    prop_assert_eq!((i + steps) % cfg.count, j);
                }
                (None, None) => {}
                other => prop_assert!(false, "equivariance broke: {:?}", other),
            }
        }
    }
}
