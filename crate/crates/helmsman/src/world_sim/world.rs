//! Static world geometry: axis-aligned boxes and extruded convex polygons,
//! with exact ray intersection, footprint distances, dense surface sampling,
//! and the ground-truth clearance oracle built on those samples.

use crate::geometry::{pow_2d, HyperEllipsoid, PlanarPose, Vec3};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default surface-sampling pitch for the clearance oracle, meters.
pub const CLEARANCE_PITCH: f64 = 0.01;

#[derive(Debug, Error, PartialEq)]
pub enum WorldError {
    #[error("box min must be strictly below max on every axis")]
    DegenerateBox,
    #[error("prism polygon needs at least 3 vertices")]
    TooFewVertices,
    #[error("prism polygon must be convex")]
    NotConvex,
    #[error("prism z range is empty")]
    EmptyZRange,
}

/// Axis-aligned box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aabb {
    pub min: Vec3,
    pub max: Vec3,
}

impl Aabb {
    pub fn new(min: Vec3, max: Vec3) -> Result<Self, WorldError> {
        if !(min.x < max.x && min.y < max.y && min.z < max.z) {
            return Err(WorldError::DegenerateBox);
        }
        Ok(Aabb { min, max })
    }

    pub fn contains(&self, p: Vec3) -> bool {
        p.x >= self.min.x
            && p.x <= self.max.x
            && p.y >= self.min.y
            && p.y <= self.max.y
            && p.z >= self.min.z
            && p.z <= self.max.z
    }

    pub fn center(&self) -> Vec3 {
        (self.min + self.max) * 0.5
    }

    pub fn half_extents(&self) -> Vec3 {
        (self.max - self.min) * 0.5
    }

    /// Horizontal distance from `(x, y)` to the box footprint; zero inside.
    pub fn footprint_distance(&self, x: f64, y: f64) -> f64 {
        let dx = (self.min.x - x).max(0.0).max(x - self.max.x);
        let dy = (self.min.y - y).max(0.0).max(y - self.max.y);
        (dx * dx + dy * dy).sqrt()
    }

    pub fn z_range(&self) -> (f64, f64) {
        (self.min.z, self.max.z)
    }

    /// First intersection of a ray with the box surface (slab test).
    /// Rays starting inside report no hit.
    pub fn ray_hit(&self, origin: Vec3, dir: Vec3, max_t: f64) -> Option<f64> {
        let mut t_near = f64::NEG_INFINITY;
        let mut t_far = f64::INFINITY;
        let o = [origin.x, origin.y, origin.z];
        let d = [dir.x, dir.y, dir.z];
        let lo = [self.min.x, self.min.y, self.min.z];
        let hi = [self.max.x, self.max.y, self.max.z];
        for k in 0..3 {
            if d[k].abs() < 1e-15 {
                if o[k] < lo[k] || o[k] > hi[k] {
                    return None;
                }
                continue;
            }
            let inv = 1.0 / d[k];
            let (t1, t2) = ((lo[k] - o[k]) * inv, (hi[k] - o[k]) * inv);
            let (t1, t2) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
            t_near = t_near.max(t1);
            t_far = t_far.min(t2);
            if t_near > t_far {
                return None;
            }
        }
        (t_near > 1e-9 && t_near <= max_t).then_some(t_near)
    }

    fn sample_surface(&self, pitch: f64, out: &mut Vec<Vec3>) {
        let (x0, y0, z0) = (self.min.x, self.min.y, self.min.z);
        let (x1, y1, z1) = (self.max.x, self.max.y, self.max.z);
        // Two faces per axis; grid over the remaining two axes.
        sample_rect(pitch, out, |u, v| Vec3::new(x0, u, v), (y0, y1), (z0, z1));
        sample_rect(pitch, out, |u, v| Vec3::new(x1, u, v), (y0, y1), (z0, z1));
        sample_rect(pitch, out, |u, v| Vec3::new(u, y0, v), (x0, x1), (z0, z1));
        sample_rect(pitch, out, |u, v| Vec3::new(u, y1, v), (x0, x1), (z0, z1));
        sample_rect(pitch, out, |u, v| Vec3::new(u, v, z0), (x0, x1), (y0, y1));
        sample_rect(pitch, out, |u, v| Vec3::new(u, v, z1), (x0, x1), (y0, y1));
    }

    pub fn union(&self, other: &Aabb) -> Aabb {
        Aabb {
            min: Vec3::new(
                self.min.x.min(other.min.x),
                self.min.y.min(other.min.y),
                self.min.z.min(other.min.z),
            ),
            max: Vec3::new(
                self.max.x.max(other.max.x),
                self.max.y.max(other.max.y),
                self.max.z.max(other.max.z),
            ),
        }
    }
}

fn steps_for(len: f64, pitch: f64) -> usize {
    ((len / pitch).ceil() as usize).max(1) + 1
}

fn sample_rect(
    pitch: f64,
    out: &mut Vec<Vec3>,
    make: impl Fn(f64, f64) -> Vec3,
    (u0, u1): (f64, f64),
    (v0, v1): (f64, f64),
) {
    let nu = steps_for(u1 - u0, pitch);
    let nv = steps_for(v1 - v0, pitch);
    for i in 0..nu {
        let u = u0 + (u1 - u0) * i as f64 / (nu - 1) as f64;
        for j in 0..nv {
            let v = v0 + (v1 - v0) * j as f64 / (nv - 1) as f64;
            out.push(make(u, v));
        }
    }
}

/// Convex polygon (counter-clockwise) extruded along z.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvexPrism {
    pub vertices: Vec<[f64; 2]>,
    pub z0: f64,
    pub z1: f64,
}

impl ConvexPrism {
    pub fn new(mut vertices: Vec<[f64; 2]>, z0: f64, z1: f64) -> Result<Self, WorldError> {
        if vertices.len() < 3 {
            return Err(WorldError::TooFewVertices);
        }
        if !(z0 < z1) {
            return Err(WorldError::EmptyZRange);
        }
        // Normalize winding to CCW via the signed area.
        let area: f64 = vertices
            .windows(2)
            .chain(std::iter::once(
                [*vertices.last().unwrap(), vertices[0]].as_slice(),
            ))
            .map(|w| w[0][0] * w[1][1] - w[1][0] * w[0][1])
            .sum();
        if area < 0.0 {
            vertices.reverse();
        }
        let n = vertices.len();
        for i in 0..n {
            let a = vertices[i];
            let b = vertices[(i + 1) % n];
            let c = vertices[(i + 2) % n];
            let cross = (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0]);
            if cross < -1e-12 {
                return Err(WorldError::NotConvex);
            }
        }
        Ok(ConvexPrism { vertices, z0, z1 })
    }

    fn inside_footprint(&self, x: f64, y: f64) -> bool {
        let n = self.vertices.len();
        for i in 0..n {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            let cross = (b[0] - a[0]) * (y - a[1]) - (b[1] - a[1]) * (x - a[0]);
            if cross < 0.0 {
                return false;
            }
        }
        true
    }

    pub fn contains(&self, p: Vec3) -> bool {
        p.z >= self.z0 && p.z <= self.z1 && self.inside_footprint(p.x, p.y)
    }

    pub fn footprint_distance(&self, x: f64, y: f64) -> f64 {
        if self.inside_footprint(x, y) {
            return 0.0;
        }
        let n = self.vertices.len();
        let mut best = f64::INFINITY;
        for i in 0..n {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            best = best.min(point_segment_distance(x, y, a, b));
        }
        best
    }

    pub fn z_range(&self) -> (f64, f64) {
        (self.z0, self.z1)
    }

    /// Ray vs. convex polytope: clip against the side half-spaces and the
    /// two z caps. Rays starting inside report no hit.
    pub fn ray_hit(&self, origin: Vec3, dir: Vec3, max_t: f64) -> Option<f64> {
        let mut t_near = f64::NEG_INFINITY;
        let mut t_far = f64::INFINITY;
        let mut clip = |normal: (f64, f64, f64), offset: f64| -> bool {
            let denom = normal.0 * dir.x + normal.1 * dir.y + normal.2 * dir.z;
            let f0 = normal.0 * origin.x + normal.1 * origin.y + normal.2 * origin.z - offset;
            if denom.abs() < 1e-15 {
                return f0 <= 0.0;
            }
            let t = -f0 / denom;
            if denom > 0.0 {
                t_far = t_far.min(t);
            } else {
                t_near = t_near.max(t);
            }
            t_near <= t_far
        };
        let n = self.vertices.len();
        for i in 0..n {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            // Outward normal of a CCW edge.
            let (ex, ey) = (b[0] - a[0], b[1] - a[1]);
            let normal = (ey, -ex, 0.0);
            let offset = normal.0 * a[0] + normal.1 * a[1];
            if !clip(normal, offset) {
                return None;
            }
        }
        if !clip((0.0, 0.0, 1.0), self.z1) || !clip((0.0, 0.0, -1.0), -self.z0) {
            return None;
        }
        (t_near > 1e-9 && t_near <= max_t).then_some(t_near)
    }

    fn sample_surface(&self, pitch: f64, out: &mut Vec<Vec3>) {
        let n = self.vertices.len();
        for i in 0..n {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            let len = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
            let nu = steps_for(len, pitch);
            let nz = steps_for(self.z1 - self.z0, pitch);
            for iu in 0..nu {
                let f = iu as f64 / (nu - 1) as f64;
                let (x, y) = (a[0] + (b[0] - a[0]) * f, a[1] + (b[1] - a[1]) * f);
                for iz in 0..nz {
                    let z = self.z0 + (self.z1 - self.z0) * iz as f64 / (nz - 1) as f64;
                    out.push(Vec3::new(x, y, z));
                }
            }
        }
        // Caps: grid over the bounding box filtered to the footprint.
        let (mut x0, mut y0, mut x1, mut y1) = (f64::MAX, f64::MAX, f64::MIN, f64::MIN);
        for v in &self.vertices {
            x0 = x0.min(v[0]);
            y0 = y0.min(v[1]);
            x1 = x1.max(v[0]);
            y1 = y1.max(v[1]);
        }
        let nu = steps_for(x1 - x0, pitch);
        let nv = steps_for(y1 - y0, pitch);
        for i in 0..nu {
            let x = x0 + (x1 - x0) * i as f64 / (nu - 1) as f64;
            for j in 0..nv {
                let y = y0 + (y1 - y0) * j as f64 / (nv - 1) as f64;
                if self.inside_footprint(x, y) {
                    out.push(Vec3::new(x, y, self.z0));
                    out.push(Vec3::new(x, y, self.z1));
                }
            }
        }
    }

    fn bounding_box(&self) -> Aabb {
        let (mut x0, mut y0, mut x1, mut y1) = (f64::MAX, f64::MAX, f64::MIN, f64::MIN);
        for v in &self.vertices {
            x0 = x0.min(v[0]);
            y0 = y0.min(v[1]);
            x1 = x1.max(v[0]);
            y1 = y1.max(v[1]);
        }
        Aabb { min: Vec3::new(x0, y0, self.z0), max: Vec3::new(x1, y1, self.z1) }
    }
}

fn point_segment_distance(x: f64, y: f64, a: [f64; 2], b: [f64; 2]) -> f64 {
    let (ex, ey) = (b[0] - a[0], b[1] - a[1]);
    let len_sq = ex * ex + ey * ey;
    let t = if len_sq > 0.0 {
        (((x - a[0]) * ex + (y - a[1]) * ey) / len_sq).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let (px, py) = (a[0] + t * ex, a[1] + t * ey);
    ((x - px).powi(2) + (y - py).powi(2)).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ShapeKind {
    Box(Aabb),
    Prism(ConvexPrism),
}

/// A world obstacle. Transient shapes exist in the simulated world and are
/// seen by the range sensor, but are excluded from the floor plan the global
/// planner rasterizes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Shape {
    pub kind: ShapeKind,
    pub transient: bool,
}

impl Shape {
    pub fn fixed(kind: ShapeKind) -> Self {
        Shape { kind, transient: false }
    }

    pub fn transient(kind: ShapeKind) -> Self {
        Shape { kind, transient: true }
    }

    pub fn footprint_distance(&self, x: f64, y: f64) -> f64 {
        match &self.kind {
            ShapeKind::Box(b) => b.footprint_distance(x, y),
            ShapeKind::Prism(p) => p.footprint_distance(x, y),
        }
    }

    pub fn z_range(&self) -> (f64, f64) {
        match &self.kind {
            ShapeKind::Box(b) => b.z_range(),
            ShapeKind::Prism(p) => p.z_range(),
        }
    }

    pub fn contains(&self, p: Vec3) -> bool {
        match &self.kind {
            ShapeKind::Box(b) => b.contains(p),
            ShapeKind::Prism(pr) => pr.contains(p),
        }
    }

    pub fn ray_hit(&self, origin: Vec3, dir: Vec3, max_t: f64) -> Option<f64> {
        match &self.kind {
            ShapeKind::Box(b) => b.ray_hit(origin, dir, max_t),
            ShapeKind::Prism(p) => p.ray_hit(origin, dir, max_t),
        }
    }

    pub fn bounding_box(&self) -> Aabb {
        match &self.kind {
            ShapeKind::Box(b) => *b,
            ShapeKind::Prism(p) => p.bounding_box(),
        }
    }

    fn sample_surface(&self, pitch: f64, out: &mut Vec<Vec3>) {
        match &self.kind {
            ShapeKind::Box(b) => b.sample_surface(pitch, out),
            ShapeKind::Prism(p) => p.sample_surface(pitch, out),
        }
    }
}

/// The complete set of obstacles in a scenario.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct WorldModel {
    pub shapes: Vec<Shape>,
}

impl WorldModel {
    pub fn new(shapes: Vec<Shape>) -> Self {
        WorldModel { shapes }
    }

    pub fn is_empty(&self) -> bool {
        self.shapes.is_empty()
    }

    /// Shapes that belong to the floor plan (the planner's view).
    pub fn static_shapes(&self) -> impl Iterator<Item = &Shape> {
        self.shapes.iter().filter(|s| !s.transient)
    }

    /// Nearest ray intersection over all shapes.
    pub fn raycast(&self, origin: Vec3, dir: Vec3, max_range: f64) -> Option<f64> {
        let mut best: Option<f64> = None;
        for s in &self.shapes {
            if let Some(t) = s.ray_hit(origin, dir, max_range) {
                best = Some(best.map_or(t, |b: f64| b.min(t)));
            }
        }
        best
    }

    pub fn contains(&self, p: Vec3) -> bool {
        self.shapes.iter().any(|s| s.contains(p))
    }

    /// Dense sampling of every obstacle surface at the given pitch.
    pub fn surface_samples(&self, pitch: f64) -> Vec<Vec3> {
        let mut out = Vec::new();
        for s in &self.shapes {
            s.sample_surface(pitch, &mut out);
        }
        out
    }

    pub fn bounding_box(&self) -> Option<Aabb> {
        let mut it = self.shapes.iter().map(|s| s.bounding_box());
        let first = it.next()?;
        Some(it.fold(first, |acc, b| acc.union(&b)))
    }
}

/// Ground-truth penetration check against a dense sampling of the obstacle
/// surfaces: the smallest scaling factor of the vessel over all samples.
/// Values below one mean a surface point is inside the unscaled body.
///
/// This is the full scan; [`ClearanceOracle`] holds precomputed samples and
/// prunes with per-cell bounds for per-tick use.
pub fn true_clearance_alpha(pose: &PlanarPose, world: &WorldModel, vessel: &HyperEllipsoid) -> f64 {
    world
        .surface_samples(CLEARANCE_PITCH)
        .iter()
        .map(|&p| vessel.alpha(pose.body_from_world(p)))
        .fold(f64::INFINITY, f64::min)
}

struct OracleCell {
    center: Vec3,
    half: Vec3,
    start: usize,
    end: usize,
}

/// Precomputed sampled-surface clearance with branch-and-bound pruning.
///
/// `query` returns `min(alpha_min, cap)`: exact whenever the true minimum is
/// below `cap`, because a cell is skipped only when a per-cell lower bound on
/// alpha already exceeds the best value seen.
pub struct ClearanceOracle {
    samples: Vec<Vec3>,
    cells: Vec<OracleCell>,
    pub cap: f64,
}

const ORACLE_CELL: f64 = 0.4;

impl ClearanceOracle {
    pub fn new(world: &WorldModel, pitch: f64, cap: f64) -> Self {
        let raw = world.surface_samples(pitch);
        let key_of = |p: &Vec3| {
            (
                (p.x / ORACLE_CELL).floor() as i64,
                (p.y / ORACLE_CELL).floor() as i64,
                (p.z / ORACLE_CELL).floor() as i64,
            )
        };
        // Sample order within a cell never matters (queries reduce with an
        // exact min), so an unstable key-only sort is fine.
        let mut keyed: Vec<((i64, i64, i64), Vec3)> = raw.iter().map(|&p| (key_of(&p), p)).collect();
        keyed.par_sort_unstable_by_key(|e| e.0);
        let mut samples = Vec::with_capacity(keyed.len());
        let mut cells: Vec<OracleCell> = Vec::new();
        for (key, p) in keyed {
            match cells.last_mut() {
                Some(cell) if samples.len() > cell.start && key_of(&samples[cell.start]) == key => {
                    samples.push(p);
                    cell.end = samples.len();
                    let lo = cell.center - cell.half;
                    let hi = cell.center + cell.half;
                    let nlo = Vec3::new(lo.x.min(p.x), lo.y.min(p.y), lo.z.min(p.z));
                    let nhi = Vec3::new(hi.x.max(p.x), hi.y.max(p.y), hi.z.max(p.z));
                    cell.center = (nlo + nhi) * 0.5;
                    cell.half = (nhi - nlo) * 0.5;
                }
                _ => {
                    let start = samples.len();
                    samples.push(p);
                    cells.push(OracleCell { center: p, half: Vec3::ZERO, start, end: start + 1 });
                }
            }
        }
        ClearanceOracle { samples, cells, cap }
    }

    pub fn sample_count(&self) -> usize {
        self.samples.len()
    }

    /// `min(min_alpha over all samples, cap)`.
    pub fn query(&self, pose: &PlanarPose, vessel: &HyperEllipsoid) -> f64 {
        let (c, s) = pose.cos_sin();
        let d = vessel.d;
        let axes = [vessel.a, vessel.b, vessel.c];
        // Lower bound per cell: transform the cell AABB into the body frame
        // (|R^T| * half for the extents), then take per-axis minimum
        // magnitudes. Each alpha term is minimized independently, so the sum
        // bounds every sample in the cell from below.
        let mut order: Vec<(f64, usize)> = self
            .cells
            .iter()
            .enumerate()
            .map(|(i, cell)| {
                let rel = cell.center - pose.r;
                let bc = Vec3::new(c * rel.x + s * rel.y, -s * rel.x + c * rel.y, rel.z);
                let bh = Vec3::new(
                    c.abs() * cell.half.x + s.abs() * cell.half.y,
                    s.abs() * cell.half.x + c.abs() * cell.half.y,
                    cell.half.z,
                );
                let mins = [
                    interval_min_abs(bc.x, bh.x),
                    interval_min_abs(bc.y, bh.y),
                    interval_min_abs(bc.z, bh.z),
                ];
                let lb = pow_2d(mins[0] / axes[0], d)
                    + pow_2d(mins[1] / axes[1], d)
                    + pow_2d(mins[2] / axes[2], d);
                (lb, i)
            })
            .collect();
        order.sort_by(|a, b| a.partial_cmp(b).unwrap());

        let mut best = self.cap;
        for (lb, ci) in order {
            if lb >= best {
                break;
            }
            let cell = &self.cells[ci];
            for &p in &self.samples[cell.start..cell.end] {
                let alpha = vessel.alpha(pose.body_from_world(p));
                if alpha < best {
                    best = alpha;
                }
            }
        }
        best
    }
}

#[inline]
fn interval_min_abs(center: f64, half: f64) -> f64 {
    if center.abs() <= half {
        0.0
    } else {
        center.abs() - half
    }
}
