//! Point-cloud control barrier function.
//!
//! Each cloud point gets a per-point barrier `h_j = alpha_j - beta`, where
//! `alpha_j` is the scaling-factor field of the robot's encapsulating
//! higher-order ellipsoid evaluated at the point in the body frame. The
//! aggregate barrier is a numerically stable softmin over all points, and the
//! pose gradient is the exp-weighted average of analytic per-point gradients.

use crate::geometry::{pow_2d, HyperEllipsoid, PlanarPose, Vec3};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Fixed chunk size for the parallel reduction. Per-chunk work is sequential
/// and chunks are combined in index order, so results are bit-identical for
/// any worker-pool size.
const CHUNK: usize = 4096;

#[derive(Debug, Error, PartialEq)]
pub enum VesselError {
    #[error("softmin requires at least one value")]
    EmptyValues,
    #[error("vessel params invalid: {0}")]
    BadParams(String),
}

/// Which frame a cloud's coordinates are expressed in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Frame {
    Body,
    World,
}

/// An ordered point cloud tagged with its coordinate frame.
#[derive(Debug, Clone)]
pub struct PointCloud {
    points: Vec<Vec3>,
    frame: Frame,
}

impl PointCloud {
    pub fn new(points: Vec<Vec3>, frame: Frame) -> Self {
        PointCloud { points, frame }
    }

    pub fn empty(frame: Frame) -> Self {
        PointCloud { points: Vec::new(), frame }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec3] {
        &self.points
    }

    pub fn frame(&self) -> Frame {
        self.frame
    }

    /// The same points re-expressed in the world frame for a given pose.
    pub fn to_world(&self, pose: &PlanarPose) -> PointCloud {
        match self.frame {
            Frame::World => self.clone(),
            Frame::Body => PointCloud::new(
                self.points.iter().map(|&p| pose.world_from_body(p)).collect(),
                Frame::World,
            ),
        }
    }

    /// Body-frame z window filter; drops floor and ceiling returns before
    /// downstream consumers see the cloud. Requires a body-frame cloud.
    pub fn crop_body_z(&self, window: Option<[f64; 2]>) -> PointCloud {
        let Some([lo, hi]) = window else { return self.clone() };
        assert!(self.frame == Frame::Body, "z crop is defined on body-frame clouds");
        PointCloud::new(
            self.points.iter().copied().filter(|p| p.z >= lo && p.z <= hi).collect(),
            Frame::Body,
        )
    }
}

/// Softmin sharpness and safety margin, plus the coupling rule that keeps the
/// softmin over-estimation on the safe side of the geometric boundary.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct VesselParams {
    /// Safety margin `beta >= 1`; the barrier is `alpha - beta`.
    pub beta: f64,
    /// Softmin sharpness `delta > 0`; smaller tracks the hard min tighter.
    pub delta: f64,
    /// Largest cloud size this configuration will be used with. Validation
    /// requires `beta >= 1 + delta * ln(max_points)` so that `h >= 0` implies
    /// no point penetrates the unscaled body.
    pub max_points: usize,
    /// Optional body-frame z window `[lo, hi]`; points outside it are ignored
    /// (drops floor returns).
    pub z_crop: Option<[f64; 2]>,
}

impl Default for VesselParams {
    fn default() -> Self {
        VesselParams {
            beta: 1.2,
            delta: 0.01,
            max_points: 65_536,
            z_crop: Some([-0.15, 1.0]),
        }
    }
}

impl VesselParams {
    pub fn validate(&self) -> Result<(), VesselError> {
        if !(self.beta >= 1.0) {
            return Err(VesselError::BadParams(format!("beta must be >= 1 (got {})", self.beta)));
        }
        if !(self.delta > 0.0) {
            return Err(VesselError::BadParams(format!("delta must be > 0 (got {})", self.delta)));
        }
        if self.max_points < 1 {
            return Err(VesselError::BadParams("max_points must be >= 1".into()));
        }
        let floor = 1.0 + self.delta * (self.max_points as f64).ln();
        if self.beta < floor {
            return Err(VesselError::BadParams(format!(
                "beta = {} violates beta >= 1 + delta*ln(max_points) = {:.6}",
                self.beta, floor
            )));
        }
        if let Some([lo, hi]) = self.z_crop {
            if !(lo < hi) {
                return Err(VesselError::BadParams(format!("z_crop window [{lo}, {hi}] is empty")));
            }
        }
        Ok(())
    }
}

/// One barrier evaluation: value, hard min, and pose gradients.
#[derive(Debug, Clone)]
pub struct CbfEval {
    /// Softmin barrier value; `+inf` when no point constrains the pose.
    pub h: f64,
    /// Hard minimum of the per-point barriers.
    pub h_min: f64,
    /// Index (into the original cloud ordering) of the argmin point.
    pub argmin_index: Option<usize>,
    /// Partials w.r.t. `(r, q)`: world position and unit quaternion. The
    /// quaternion block is the tangential gradient on the unit sphere.
    pub grad7: [f64; 7],
    /// Partials w.r.t. `(r, yaw)`: world position and yaw.
    pub grad4: [f64; 4],
    /// Constraint row in body-frame command coordinates `(v_body, omega)`:
    /// the position block of `grad4` rotated into the body frame. This is the
    /// row the safety filter pairs with body-frame velocity commands.
    pub grad4_body: [f64; 4],
    /// Number of points that participated (after the z crop).
    pub n_used: usize,
}

impl CbfEval {
    /// Distinguished result for an empty (or fully cropped) cloud: nothing
    /// constrains the pose and the filter passes commands through.
    pub fn no_constraint() -> Self {
        CbfEval {
            h: f64::INFINITY,
            h_min: f64::INFINITY,
            argmin_index: None,
            grad7: [0.0; 7],
            grad4: [0.0; 4],
            grad4_body: [0.0; 4],
            n_used: 0,
        }
    }

    pub fn is_unconstrained(&self) -> bool {
        self.h.is_infinite()
    }

    /// Smallest scaling factor over the cloud, `min_j alpha_j = h_min + beta`.
    pub fn alpha_min(&self, params: &VesselParams) -> f64 {
        self.h_min + params.beta
    }
}

/// Numerically stable softmin: `min + (-delta * ln(mean(exp(-(v - min)/delta))))`.
///
/// Shifting by the minimum keeps every exponent at or below zero, so no
/// intermediate can overflow for any finite input. The sum is compensated so
/// the `[min, min + delta*ln(N)]` sandwich survives large `N`.
pub fn softmin_stable(values: &[f64], delta: f64) -> Result<f64, VesselError> {
    if values.is_empty() {
        return Err(VesselError::EmptyValues);
    }
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for &v in values {
        let term = (-(v - min) / delta).exp();
        // Kahan step.
        let y = term - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    Ok(min - delta * (sum / values.len() as f64).ln())
}

/// Prepared per-evaluation constants: pose trig, inverse axes, margins.
struct Kernel {
    c: f64,
    s: f64,
    r: Vec3,
    inv_axes: [f64; 3],
    d: u32,
    beta: f64,
    frame: Frame,
    z_crop: Option<[f64; 2]>,
}

/// Per-point intermediate: body coordinates and the offset `u = p_w - r`.
struct BodyPoint {
    body: Vec3,
    u: Vec3,
}

impl Kernel {
    fn new(shape: &HyperEllipsoid, pose: &PlanarPose, frame: Frame, params: &VesselParams) -> Self {
        let (c, s) = pose.cos_sin();
        Kernel {
            c,
            s,
            r: pose.r,
            inv_axes: [1.0 / shape.a, 1.0 / shape.b, 1.0 / shape.c],
            d: shape.d,
            beta: params.beta,
            frame,
            z_crop: params.z_crop,
        }
    }

    #[inline(always)]
    fn resolve(&self, p: Vec3) -> BodyPoint {
        match self.frame {
            Frame::World => {
                let u = p - self.r;
                let body =
                    Vec3::new(self.c * u.x + self.s * u.y, -self.s * u.x + self.c * u.y, u.z);
                BodyPoint { body, u }
            }
            Frame::Body => {
                // A body-frame cloud is a snapshot at this pose; the gradient
                // holds the corresponding world point fixed, so recover u.
                let u =
                    Vec3::new(self.c * p.x - self.s * p.y, self.s * p.x + self.c * p.y, p.z);
                BodyPoint { body: p, u }
            }
        }
    }

    #[inline(always)]
    fn cropped(&self, body: Vec3) -> bool {
        match self.z_crop {
            Some([lo, hi]) => body.z < lo || body.z > hi,
            None => false,
        }
    }

    #[inline(always)]
    fn h_of(&self, bp: &BodyPoint) -> f64 {
        let tx = bp.body.x * self.inv_axes[0];
        let ty = bp.body.y * self.inv_axes[1];
        let tz = bp.body.z * self.inv_axes[2];
        pow_2d(tx, self.d) + pow_2d(ty, self.d) + pow_2d(tz, self.d) - self.beta
    }

    /// Per-point barrier and its 8 partials: world position (3), tangential
    /// quaternion (4), and yaw (1).
    fn h_and_grad(&self, bp: &BodyPoint) -> (f64, [f64; 8]) {
        let d = self.d;
        let two_d = 2.0 * d as f64;
        let mut alpha = 0.0;
        let mut w = [0.0f64; 3];
        let coords = [bp.body.x, bp.body.y, bp.body.z];
        for k in 0..3 {
            let t = coords[k] * self.inv_axes[k];
            let t2 = t * t;
            let p = t2.powi(d as i32 - 1);
            alpha += t2 * p;
            // d(alpha)/d(body_k) = 2d * t^(2d-1) / axis_k
            w[k] = two_d * p * t * self.inv_axes[k];
        }
        let h = alpha - self.beta;

        // Position block: d(body)/d(r) = -R^T, so grad_r = -R w.
        let gr = Vec3::new(
            -(self.c * w[0] - self.s * w[1]),
            -(self.s * w[0] + self.c * w[1]),
            -w[2],
        );

        // Yaw: d(body)/d(yaw) applied to w.
        let u = bp.u;
        let g_yaw = w[0] * (self.c * u.y - self.s * u.x) + w[1] * (-self.c * u.x - self.s * u.y);

        // Quaternion block at q = (qw, 0, 0, qz). Partials of body = R(q)^T u
        // for a general unit quaternion, specialized to qx = qy = 0, then
        // projected onto the tangent space of the unit sphere (the off-sphere
        // extension of R(q) is not unique; the tangential component is).
        let qw = ((1.0 + self.c) * 0.5).sqrt().copysign(1.0);
        let qz = if qw > 1e-9 { self.s / (2.0 * qw) } else { (0.5 * (1.0 - self.c)).sqrt() };
        // body_x partials
        let bx_qw = 2.0 * qz * u.y;
        let bx_qx = 2.0 * qz * u.z;
        let bx_qy = -2.0 * qw * u.z;
        let bx_qz = -4.0 * qz * u.x + 2.0 * qw * u.y;
        // body_y partials
        let by_qw = -2.0 * qz * u.x;
        let by_qx = 2.0 * qw * u.z;
        let by_qy = 2.0 * qz * u.z;
        let by_qz = -2.0 * qw * u.x - 4.0 * qz * u.y;
        // body_z partials
        let bz_qx = 2.0 * qz * u.x - 2.0 * qw * u.y;
        let bz_qy = 2.0 * qw * u.x + 2.0 * qz * u.y;

        let mut gq = [
            w[0] * bx_qw + w[1] * by_qw,
            w[0] * bx_qx + w[1] * by_qx + w[2] * bz_qx,
            w[0] * bx_qy + w[1] * by_qy + w[2] * bz_qy,
            w[0] * bx_qz + w[1] * by_qz,
        ];
        let radial = gq[0] * qw + gq[3] * qz;
        gq[0] -= radial * qw;
        gq[3] -= radial * qz;

        (h, [gr.x, gr.y, gr.z, gq[0], gq[1], gq[2], gq[3], g_yaw])
    }
}

/// Per-point barrier value and its 7-gradient w.r.t. `(r, q)` for a single
/// world-frame point.
pub fn per_point_h(
    shape: &HyperEllipsoid,
    pose: &PlanarPose,
    p_w: Vec3,
    beta: f64,
) -> (f64, [f64; 7]) {
    let params = VesselParams { beta, z_crop: None, ..VesselParams::default() };
    let kernel = Kernel::new(shape, pose, Frame::World, &params);
    let bp = kernel.resolve(p_w);
    let (h, g) = kernel.h_and_grad(&bp);
    (h, [g[0], g[1], g[2], g[3], g[4], g[5], g[6]])
}

/// Partial softmin reduction over one chunk.
struct ChunkMin {
    h_min: f64,
    argmin: usize,
    used: usize,
}

/// Partial weighted-gradient reduction over one chunk.
struct ChunkSums {
    weight: f64,
    weight_comp: f64,
    grad: [f64; 8],
}

/// Evaluate the softmin barrier and its gradients over a cloud.
///
/// The cloud may be in either frame; a body-frame cloud is lifted through the
/// pose. Points outside the configured z window are ignored. An empty or
/// fully cropped cloud yields the distinguished no-constraint result.
///
/// The reduction is a fixed-chunk map-reduce: deterministic for a fixed point
/// ordering regardless of worker-pool size.
pub fn evaluate_cbf(
    shape: &HyperEllipsoid,
    pose: &PlanarPose,
    cloud: &PointCloud,
    params: &VesselParams,
) -> CbfEval {
    let kernel = Kernel::new(shape, pose, cloud.frame(), params);
    let points = cloud.points();
    if points.is_empty() {
        return CbfEval::no_constraint();
    }

    // Pass 1: per-point barrier values (NaN marks cropped points) and the
    // hard min with smallest-index tie-break.
    let mut h_values = vec![0.0f64; points.len()];
    let partial_mins: Vec<ChunkMin> = points
        .par_chunks(CHUNK)
        .zip(h_values.par_chunks_mut(CHUNK))
        .map(|(chunk, out)| {
            let mut m = ChunkMin { h_min: f64::INFINITY, argmin: usize::MAX, used: 0 };
            for (i, (&p, slot)) in chunk.iter().zip(out.iter_mut()).enumerate() {
                let bp = kernel.resolve(p);
                if kernel.cropped(bp.body) {
                    *slot = f64::NAN;
                    continue;
                }
                let h = kernel.h_of(&bp);
                *slot = h;
                m.used += 1;
                if h < m.h_min {
                    m.h_min = h;
                    m.argmin = i;
                }
            }
            m
        })
        .collect();

    let mut h_min = f64::INFINITY;
    let mut argmin = None;
    let mut n_used = 0usize;
    for (ci, m) in partial_mins.iter().enumerate() {
        n_used += m.used;
        if m.used > 0 && m.h_min < h_min {
            h_min = m.h_min;
            argmin = Some(ci * CHUNK + m.argmin);
        }
    }
    if n_used == 0 {
        return CbfEval::no_constraint();
    }

    // Pass 2: softmin weight sum (compensated) and weighted gradient sums.
    // Weights underflow to exactly zero far from the min, and zero-weight
    // points skip the gradient entirely.
    let delta = params.delta;
    let partial_sums: Vec<ChunkSums> = points
        .par_chunks(CHUNK)
        .zip(h_values.par_chunks(CHUNK))
        .map(|(chunk, hs)| {
            let mut acc = ChunkSums { weight: 0.0, weight_comp: 0.0, grad: [0.0; 8] };
            for (&p, &h) in chunk.iter().zip(hs.iter()) {
                if h.is_nan() {
                    continue;
                }
                let wexp = (-(h - h_min) / delta).exp();
                let y = wexp - acc.weight_comp;
                let t = acc.weight + y;
                acc.weight_comp = (t - acc.weight) - y;
                acc.weight = t;
                if wexp > 0.0 {
                    let bp = kernel.resolve(p);
                    let (_, g) = kernel.h_and_grad(&bp);
                    for k in 0..8 {
                        acc.grad[k] += wexp * g[k];
                    }
                }
            }
            acc
        })
        .collect();

    let mut weight_sum = 0.0f64;
    let mut weight_comp = 0.0f64;
    let mut grad_sum = [0.0f64; 8];
    for acc in &partial_sums {
        let y = acc.weight - weight_comp;
        let t = weight_sum + y;
        weight_comp = (t - weight_sum) - y;
        weight_sum = t;
        for k in 0..8 {
            grad_sum[k] += acc.grad[k];
        }
    }

    let h = h_min - delta * (weight_sum / n_used as f64).ln();
    let inv_w = 1.0 / weight_sum;
    let g: Vec<f64> = grad_sum.iter().map(|v| v * inv_w).collect();

    let grad7 = [g[0], g[1], g[2], g[3], g[4], g[5], g[6]];
    let grad4 = [g[0], g[1], g[2], g[7]];
    let gr_body = pose.rotate_to_body(Vec3::new(g[0], g[1], g[2]));
    let grad4_body = [gr_body.x, gr_body.y, gr_body.z, g[7]];

    CbfEval { h, h_min, argmin_index: argmin, grad7, grad4, grad4_body, n_used }
}
