//! Occupancy-grid global planner and waypoint tracker.
//!
//! The floor plan is rasterized onto a 2D grid (transient obstacles are not
//! part of the plan by construction), paths come from 8-connected A* with
//! integer move costs, and a line-of-sight string-pulling pass sparsifies the
//! cell path into waypoints. A small tracker advances through the waypoints
//! as the robot approaches them.

use crate::geometry::{PlanarPose, Vec3};
use crate::world_sim::world::WorldModel;
use std::cmp::Reverse;
use std::collections::BinaryHeap;
use thiserror::Error;

/// Integer move costs (milli-cells) so planner and oracle costs compare
/// exactly, with no float summation order in play.
pub const COST_STRAIGHT: u64 = 1000;
pub const COST_DIAGONAL: u64 = 1414;

#[derive(Debug, Error, PartialEq)]
pub enum PlanError {
    #[error("start position lies outside the grid")]
    StartOutOfBounds,
    #[error("goal position lies outside the grid")]
    GoalOutOfBounds,
    #[error("start cell is occupied")]
    StartOccupied,
    #[error("goal cell is occupied")]
    GoalOccupied,
    #[error("no path between start and goal")]
    NoPath,
    #[error("grid text is malformed: {0}")]
    BadText(String),
}

/// 2D occupancy grid over the navigation plane.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyGrid {
    resolution: f64,
    /// World position of the outer corner of cell (0, 0); `origin.z` is the
    /// navigation plane height.
    origin: Vec3,
    width: usize,
    height: usize,
    occupancy: Vec<bool>,
}

impl OccupancyGrid {
    pub fn new(resolution: f64, origin: Vec3, width: usize, height: usize) -> Self {
        assert!(resolution > 0.0 && width >= 1 && height >= 1);
        OccupancyGrid { resolution, origin, width, height, occupancy: vec![false; width * height] }
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn origin(&self) -> Vec3 {
        self.origin
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn occupied_count(&self) -> usize {
        self.occupancy.iter().filter(|&&o| o).count()
    }

    #[inline]
    pub fn is_occupied(&self, ix: usize, iy: usize) -> bool {
        self.occupancy[iy * self.width + ix]
    }

    pub fn set_occupied(&mut self, ix: usize, iy: usize, value: bool) {
        self.occupancy[iy * self.width + ix] = value;
    }

    #[inline]
    fn free(&self, ix: i64, iy: i64) -> bool {
        ix >= 0
            && iy >= 0
            && (ix as usize) < self.width
            && (iy as usize) < self.height
            && !self.is_occupied(ix as usize, iy as usize)
    }

    pub fn cell_of(&self, p: Vec3) -> Option<(usize, usize)> {
        let fx = (p.x - self.origin.x) / self.resolution;
        let fy = (p.y - self.origin.y) / self.resolution;
        if fx < 0.0 || fy < 0.0 {
            return None;
        }
        let (ix, iy) = (fx.floor() as usize, fy.floor() as usize);
        (ix < self.width && iy < self.height).then_some((ix, iy))
    }

    pub fn center_of(&self, ix: usize, iy: usize) -> Vec3 {
        Vec3::new(
            self.origin.x + (ix as f64 + 0.5) * self.resolution,
            self.origin.y + (iy as f64 + 0.5) * self.resolution,
            self.origin.z,
        )
    }

    /// Parse the plain-text map format: one character per cell, `#` occupied
    /// and `.` free, rows listed top (largest y) to bottom. All rows must
    /// have equal length.
    pub fn from_text(text: &str, resolution: f64, origin: Vec3) -> Result<Self, PlanError> {
        let rows: Vec<&str> = text.lines().filter(|l| !l.trim().is_empty()).collect();
        if rows.is_empty() {
            return Err(PlanError::BadText("no rows".into()));
        }
        let width = rows[0].chars().count();
        let height = rows.len();
        let mut grid = OccupancyGrid::new(resolution, origin, width, height);
        for (ri, row) in rows.iter().enumerate() {
            if row.chars().count() != width {
                return Err(PlanError::BadText(format!(
                    "row {ri} has {} cells, expected {width}",
                    row.chars().count()
                )));
            }
            let iy = height - 1 - ri;
            for (ix, ch) in row.chars().enumerate() {
                match ch {
                    '#' => grid.set_occupied(ix, iy, true),
                    '.' => {}
                    other => {
                        return Err(PlanError::BadText(format!(
                            "unexpected character {other:?} at row {ri}, column {ix}"
                        )))
                    }
                }
            }
        }
        Ok(grid)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity((self.width + 1) * self.height);
        for iy in (0..self.height).rev() {
            for ix in 0..self.width {
                out.push(if self.is_occupied(ix, iy) { '#' } else { '.' });
            }
            out.push('\n');
        }
        out
    }
}

/// Extent and navigation slab for rasterization.
#[derive(Debug, Clone, Copy)]
pub struct GridBounds {
    pub min_x: f64,
    pub min_y: f64,
    pub max_x: f64,
    pub max_y: f64,
    /// Height of the navigation plane (becomes the grid origin z).
    pub z_plane: f64,
    /// Half-extent of the robot's vertical slab; geometry whose z range
    /// misses `z_plane ± z_half` does not block planning (floors, overhead
    /// structure).
    pub z_half: f64,
}

impl GridBounds {
    /// Bounds covering the static world and the given key points, padded.
    pub fn around(
        world: &WorldModel,
        points: &[Vec3],
        padding: f64,
        z_plane: f64,
        z_half: f64,
    ) -> GridBounds {
        let mut min_x = f64::INFINITY;
        let mut min_y = f64::INFINITY;
        let mut max_x = f64::NEG_INFINITY;
        let mut max_y = f64::NEG_INFINITY;
        for s in world.static_shapes() {
            let bb = s.bounding_box();
            min_x = min_x.min(bb.min.x);
            min_y = min_y.min(bb.min.y);
            max_x = max_x.max(bb.max.x);
            max_y = max_y.max(bb.max.y);
        }
        for p in points {
            min_x = min_x.min(p.x);
            min_y = min_y.min(p.y);
            max_x = max_x.max(p.x);
            max_y = max_y.max(p.y);
        }
        if !min_x.is_finite() {
            // Nothing to bound; a small patch around the origin.
            (min_x, min_y, max_x, max_y) = (-1.0, -1.0, 1.0, 1.0);
        }
        GridBounds {
            min_x: min_x - padding,
            min_y: min_y - padding,
            max_x: max_x + padding,
            max_y: max_y + padding,
            z_plane,
            z_half,
        }
    }
}

/// Rasterize the floor plan: a cell is occupied iff its center lies within
/// `inflation_radius` of some static shape whose z range intersects the
/// navigation slab. Transient shapes are excluded by construction.
pub fn rasterize(
    world: &WorldModel,
    resolution: f64,
    inflation_radius: f64,
    bounds: &GridBounds,
) -> OccupancyGrid {
    assert!(resolution > 0.0, "resolution must be positive");
    let width = (((bounds.max_x - bounds.min_x) / resolution).ceil() as usize).max(1);
    let height = (((bounds.max_y - bounds.min_y) / resolution).ceil() as usize).max(1);
    let origin = Vec3::new(bounds.min_x, bounds.min_y, bounds.z_plane);
    let mut grid = OccupancyGrid::new(resolution, origin, width, height);
    let (slab_lo, slab_hi) = (bounds.z_plane - bounds.z_half, bounds.z_plane + bounds.z_half);
    let blocking: Vec<_> = world
        .static_shapes()
        .filter(|s| {
            let (z0, z1) = s.z_range();
            z1 >= slab_lo && z0 <= slab_hi
        })
        .collect();
    for iy in 0..height {
        for ix in 0..width {
            let c = grid.center_of(ix, iy);
            if blocking.iter().any(|s| s.footprint_distance(c.x, c.y) <= inflation_radius) {
                grid.set_occupied(ix, iy, true);
            }
        }
    }
    grid
}

/// Sparse waypoint list; consecutive entries are line-of-sight on the grid.
#[derive(Debug, Clone)]
pub struct WaypointPath {
    pub waypoints: Vec<Vec3>,
    pub advance_radius: f64,
    /// Optimal 8-connected grid cost in milli-cells (before simplification).
    pub grid_cost: u64,
}

const NEIGHBORS: [(i64, i64, u64); 8] = [
    (1, 0, COST_STRAIGHT),
    (-1, 0, COST_STRAIGHT),
    (0, 1, COST_STRAIGHT),
    (0, -1, COST_STRAIGHT),
    (1, 1, COST_DIAGONAL),
    (1, -1, COST_DIAGONAL),
    (-1, 1, COST_DIAGONAL),
    (-1, -1, COST_DIAGONAL),
];

/// Diagonal moves must not cut corners: both adjacent cardinal cells have to
/// be free as well.
#[inline]
fn step_allowed(grid: &OccupancyGrid, x: i64, y: i64, dx: i64, dy: i64) -> bool {
    if !grid.free(x + dx, y + dy) {
        return false;
    }
    if dx != 0 && dy != 0 {
        return grid.free(x + dx, y) && grid.free(x, y + dy);
    }
    true
}

fn octile(a: (usize, usize), b: (usize, usize)) -> u64 {
    let dx = a.0.abs_diff(b.0) as u64;
    let dy = a.1.abs_diff(b.1) as u64;
    let (lo, hi) = if dx < dy { (dx, dy) } else { (dy, dx) };
    COST_DIAGONAL * lo + COST_STRAIGHT * (hi - lo)
}

/// Plan from `start` to `goal` over the grid.
///
/// The returned path's `grid_cost` equals the optimal 8-connected cost;
/// waypoints are the string-pulled cell centers (the start cell is dropped,
/// the exact goal position is appended) with the default advance radius.
pub fn plan_path(grid: &OccupancyGrid, start: Vec3, goal: Vec3) -> Result<WaypointPath, PlanError> {
    let s = grid.cell_of(start).ok_or(PlanError::StartOutOfBounds)?;
    let g = grid.cell_of(goal).ok_or(PlanError::GoalOutOfBounds)?;
    if grid.is_occupied(s.0, s.1) {
        return Err(PlanError::StartOccupied);
    }
    if grid.is_occupied(g.0, g.1) {
        return Err(PlanError::GoalOccupied);
    }

    let width = grid.width();
    let idx = |c: (usize, usize)| c.1 * width + c.0;
    let mut dist = vec![u64::MAX; width * grid.height()];
    let mut parent = vec![usize::MAX; width * grid.height()];
    let mut heap: BinaryHeap<Reverse<(u64, usize)>> = BinaryHeap::new();
    dist[idx(s)] = 0;
    heap.push(Reverse((octile(s, g), idx(s))));

    while let Some(Reverse((f, u))) = heap.pop() {
        let (ux, uy) = (u % width, u / width);
        let du = dist[u];
        if f > du + octile((ux, uy), g) {
            continue;
        }
        if (ux, uy) == g {
            break;
        }
        for (dx, dy, cost) in NEIGHBORS {
            if !step_allowed(grid, ux as i64, uy as i64, dx, dy) {
                continue;
            }
            let v = ((uy as i64 + dy) as usize) * width + (ux as i64 + dx) as usize;
            let cand = du + cost;
            if cand < dist[v] {
                dist[v] = cand;
                parent[v] = u;
                let (vx, vy) = (v % width, v / width);
                heap.push(Reverse((cand + octile((vx, vy), g), v)));
            }
        }
    }

    if dist[idx(g)] == u64::MAX {
        return Err(PlanError::NoPath);
    }

    // Reconstruct, then string-pull.
    let mut cells = Vec::new();
    let mut cur = idx(g);
    while cur != usize::MAX {
        cells.push((cur % width, cur / width));
        cur = parent[cur];
    }
    cells.reverse();
    let simplified = string_pull(grid, &cells);

    let mut waypoints: Vec<Vec3> =
        simplified.iter().skip(1).map(|&(x, y)| grid.center_of(x, y)).collect();
    let goal_on_plane = Vec3::new(goal.x, goal.y, grid.origin().z);
    if waypoints.last().map_or(true, |w| w.distance(goal_on_plane) > 1e-9) {
        waypoints.push(goal_on_plane);
    }

    Ok(WaypointPath { waypoints, advance_radius: 0.5, grid_cost: dist[idx(g)] })
}

/// Greedy line-of-sight simplification: keep jumping to the farthest path
/// cell still visible from the current anchor.
fn string_pull(grid: &OccupancyGrid, cells: &[(usize, usize)]) -> Vec<(usize, usize)> {
    if cells.len() <= 2 {
        return cells.to_vec();
    }
    let mut out = vec![cells[0]];
    let mut anchor = 0usize;
    while anchor + 1 < cells.len() {
        let mut next = anchor + 1;
        for j in (anchor + 1..cells.len()).rev() {
            if line_of_sight(grid, cells[anchor], cells[j]) {
                next = j;
                break;
            }
        }
        out.push(cells[next]);
        anchor = next;
    }
    out
}

/// Conservative visibility between two cell centers: every cell the segment
/// passes through must be free, and exact corner crossings require both
/// adjacent cells free.
pub fn line_of_sight(grid: &OccupancyGrid, a: (usize, usize), b: (usize, usize)) -> bool {
    let (x0, y0) = (a.0 as i64, a.1 as i64);
    let (x1, y1) = (b.0 as i64, b.1 as i64);
    let dx = (x1 - x0).abs();
    let dy = (y1 - y0).abs();
    let sx: i64 = if x1 > x0 { 1 } else { -1 };
    let sy: i64 = if y1 > y0 { 1 } else { -1 };
    let (mut x, mut y) = (x0, y0);
    if !grid.free(x, y) {
        return false;
    }
    let (mut ix, mut iy) = (0i64, 0i64);
    while ix < dx || iy < dy {
        // Next grid-line crossing along x happens at parameter
        // (1 + 2*ix) / (2*dx); compare cross-multiplied to avoid division.
        let tx = (1 + 2 * ix) * dy;
        let ty = (1 + 2 * iy) * dx;
        if iy >= dy || (ix < dx && tx < ty) {
            x += sx;
            ix += 1;
        } else if ix >= dx || tx > ty {
            y += sy;
            iy += 1;
        } else {
            // Exact corner crossing.
            if !grid.free(x + sx, y) || !grid.free(x, y + sy) {
                return false;
            }
            x += sx;
            y += sy;
            ix += 1;
            iy += 1;
        }
        if !grid.free(x, y) {
            return false;
        }
    }
    true
}

/// Advances through a waypoint path as the robot reaches each waypoint; the
/// final waypoint (the goal) is never abandoned.
#[derive(Debug, Clone)]
pub struct WaypointTracker {
    path: WaypointPath,
    index: usize,
}

impl WaypointTracker {
    pub fn new(path: WaypointPath) -> Self {
        assert!(!path.waypoints.is_empty(), "tracker needs a nonempty path");
        WaypointTracker { path, index: 0 }
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn path(&self) -> &WaypointPath {
        &self.path
    }

    /// World coordinates of the active waypoint.
    pub fn current_world(&self) -> Vec3 {
        self.path.waypoints[self.index]
    }

    /// Current target waypoint in the robot body frame, advancing first if
    /// the robot is within the advance radius of the active waypoint.
    pub fn active_waypoint(&mut self, pose: &PlanarPose) -> Vec3 {
        while self.index + 1 < self.path.waypoints.len()
            && pose.r.distance(self.path.waypoints[self.index]) <= self.path.advance_radius
        {
            self.index += 1;
        }
        pose.body_from_world(self.path.waypoints[self.index])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world_sim::world::{Aabb, Shape, ShapeKind, WorldModel};

    fn grid_from(text: &str) -> OccupancyGrid {
        OccupancyGrid::from_text(text, 1.0, Vec3::ZERO).unwrap()
    }

    // Independent Dijkstra oracle over the same move rules: no heuristic,
    // separate neighbor enumeration.
    fn dijkstra_cost(grid: &OccupancyGrid, s: (usize, usize), g: (usize, usize)) -> Option<u64> {
        let w = grid.width();
        let mut dist = vec![u64::MAX; w * grid.height()];
        let mut heap = BinaryHeap::new();
        dist[s.1 * w + s.0] = 0;
        heap.push(Reverse((0u64, s.1 * w + s.0)));
        while let Some(Reverse((du, u))) = heap.pop() {
            if du > dist[u] {
                continue;
            }
            let (ux, uy) = ((u % w) as i64, (u / w) as i64);
            for dy in -1i64..=1 {
                for dx in -1i64..=1 {
                    if dx == 0 && dy == 0 {
                        continue;
                    }
                    if !grid.free(ux + dx, uy + dy) {
                        continue;
                    }
                    if dx != 0 && dy != 0 && (!grid.free(ux + dx, uy) || !grid.free(ux, uy + dy)) {
                        continue;
                    }
                    let step = if dx != 0 && dy != 0 { COST_DIAGONAL } else { COST_STRAIGHT };
                    let v = ((uy + dy) as usize) * w + (ux + dx) as usize;
                    if du + step < dist[v] {
                        dist[v] = du + step;
                        heap.push(Reverse((du + step, v)));
                    }
                }
            }
        }
        let d = dist[g.1 * w + g.0];
        (d != u64::MAX).then_some(d)
    }

    #[test]
    fn free_grid_single_segment() {
        let grid = OccupancyGrid::new(1.0, Vec3::ZERO, 12, 12);
        let start = Vec3::new(1.5, 1.5, 0.0);
        let goal = Vec3::new(10.5, 4.5, 0.0);
        let path = plan_path(&grid, start, goal).unwrap();
        // String pulling collapses to one leg; exact goal appended.
        assert!(path.waypoints.len() <= 2, "waypoints: {:?}", path.waypoints);
        assert_eq!(*path.waypoints.last().unwrap(), goal);
        // 8-connected cost within sqrt(2) of Euclidean distance.
        let euclid = start.distance(goal);
        let cost_m = path.grid_cost as f64 / 1000.0 * grid.resolution();
        assert!(cost_m >= euclid - 1e-6);
        assert!(cost_m <= euclid * 2f64.sqrt() + 1e-2);
    }

    #[test]
    fn blocked_goal_errors() {
        let mut grid = OccupancyGrid::new(1.0, Vec3::ZERO, 5, 5);
        for ix in 0..5 {
            for iy in 0..5 {
                if ix >= 3 {
                    grid.set_occupied(ix, iy, true);
                }
            }
        }
        let res = plan_path(&grid, Vec3::new(0.5, 0.5, 0.0), Vec3::new(4.5, 4.5, 0.0));
        assert_eq!(res.unwrap_err(), PlanError::GoalOccupied);
    }

    #[test]
    fn no_path_through_full_wall() {
        let grid = grid_from(
            "........\n\
             ...#....\n\
             ...#....\n\
             ...#....\n\
             ...#....\n"
                .trim_start(),
        );
        // Wall spans rows 1..=4 of 5; row 0 (top, iy=4) is open, so a path
        // exists around the top. Close it to force NoPath.
        let mut sealed = grid.clone();
        sealed.set_occupied(3, 4, true);
        let res = plan_path(&sealed, Vec3::new(0.5, 0.5, 0.0), Vec3::new(7.5, 0.5, 0.0));
        assert_eq!(res.unwrap_err(), PlanError::NoPath);
    }

    #[test]
    fn gap_route_matches_dijkstra_exactly() {
        let grid = grid_from(
            "....#....\n\
             ....#....\n\
             .........\n\
             ....#....\n\
             ....#....\n",
        );
        let start = Vec3::new(0.5, 2.5, 0.0);
        let goal = Vec3::new(8.5, 2.5, 0.0);
        let path = plan_path(&grid, start, goal).unwrap();
        let s = grid.cell_of(start).unwrap();
        let g = grid.cell_of(goal).unwrap();
        assert_eq!(path.grid_cost, dijkstra_cost(&grid, s, g).unwrap());
    }

    #[test]
    fn astar_equals_dijkstra_on_random_mazes() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
        for _ in 0..50 {
            let (w, h) = (rng.gen_range(8..24), rng.gen_range(8..24));
            let mut grid = OccupancyGrid::new(0.5, Vec3::ZERO, w, h);
            for iy in 0..h {
                for ix in 0..w {
                    if rng.gen_bool(0.25) {
                        grid.set_occupied(ix, iy, true);
                    }
                }
            }
            let s = (rng.gen_range(0..w), rng.gen_range(0..h));
            let g = (rng.gen_range(0..w), rng.gen_range(0..h));
            if grid.is_occupied(s.0, s.1) || grid.is_occupied(g.0, g.1) {
                continue;
            }
            let start = grid.center_of(s.0, s.1);
            let goal = grid.center_of(g.0, g.1);
            match (plan_path(&grid, start, goal), dijkstra_cost(&grid, s, g)) {
                (Ok(path), Some(cost)) => assert_eq!(path.grid_cost, cost),
                (Err(PlanError::NoPath), None) => {}
                other => panic!("planner/oracle disagree: {other:?}"),
            }
        }
    }

    #[test]
    fn simplified_waypoints_keep_line_of_sight() {
        let grid = grid_from(
            "..........\n\
             ..######..\n\
             ..........\n\
             .######...\n\
             ..........\n",
        );
        let start = Vec3::new(0.5, 0.5, 0.0);
        let goal = Vec3::new(9.5, 4.5, 0.0);
        let path = plan_path(&grid, start, goal).unwrap();
        let mut prev = grid.cell_of(start).unwrap();
        for wp in &path.waypoints {
            let cell = grid.cell_of(*wp).unwrap();
            assert!(line_of_sight(&grid, prev, cell), "no LOS {prev:?} -> {cell:?}");
            prev = cell;
        }
    }

    #[test]
    fn rasterize_empty_world_all_free() {
        let world = WorldModel::default();
        let bounds = GridBounds::around(&world, &[Vec3::ZERO], 2.0, 0.0, 0.4);
        let grid = rasterize(&world, 0.5, 0.3, &bounds);
        assert_eq!(grid.occupied_count(), 0);
    }

    #[test]
    fn rasterize_unit_box_zero_inflation() {
        let world = WorldModel::new(vec![Shape::fixed(ShapeKind::Box(
            Aabb::new(Vec3::new(1.0, 1.0, -0.5), Vec3::new(2.0, 2.0, 1.0)).unwrap(),
        ))]);
        let bounds =
            GridBounds { min_x: 0.0, min_y: 0.0, max_x: 3.0, max_y: 3.0, z_plane: 0.0, z_half: 0.4 };
        let grid = rasterize(&world, 0.25, 0.0, &bounds);
        // Oracle: center inside the footprint (inclusive).
        for iy in 0..grid.height() {
            for ix in 0..grid.width() {
                let c = grid.center_of(ix, iy);
                let inside = c.x >= 1.0 && c.x <= 2.0 && c.y >= 1.0 && c.y <= 2.0;
                assert_eq!(grid.is_occupied(ix, iy), inside, "cell ({ix},{iy}) at {c:?}");
            }
        }
    }

    #[test]
    fn rasterize_halving_resolution_quadruples_cells() {
        let world = WorldModel::new(vec![Shape::fixed(ShapeKind::Box(
            Aabb::new(Vec3::new(0.0, 0.0, -0.5), Vec3::new(2.0, 2.0, 1.0)).unwrap(),
        ))]);
        let bounds =
            GridBounds { min_x: -1.0, min_y: -1.0, max_x: 3.0, max_y: 3.0, z_plane: 0.0, z_half: 0.4 };
        let coarse = rasterize(&world, 0.5, 0.0, &bounds);
        let fine = rasterize(&world, 0.25, 0.0, &bounds);
        assert_eq!(fine.width() * fine.height(), 4 * coarse.width() * coarse.height());
        let coarse_area =
            coarse.occupied_count() as f64 * coarse.resolution() * coarse.resolution();
        let fine_area = fine.occupied_count() as f64 * fine.resolution() * fine.resolution();
        // Same occupied area within a one-cell band around the perimeter.
        let band = 8.0 * 2.0 * coarse.resolution() * coarse.resolution();
        assert!((coarse_area - fine_area).abs() <= band);
    }

    #[test]
    fn rasterize_ignores_transient_and_out_of_slab() {
        let world = WorldModel::new(vec![
            Shape::transient(ShapeKind::Box(
                Aabb::new(Vec3::new(0.0, 0.0, -0.5), Vec3::new(1.0, 1.0, 1.0)).unwrap(),
            )),
            // Floor slab below the navigation band.
            Shape::fixed(ShapeKind::Box(
                Aabb::new(Vec3::new(-5.0, -5.0, -0.6), Vec3::new(5.0, 5.0, -0.45)).unwrap(),
            )),
        ]);
        let bounds =
            GridBounds { min_x: -2.0, min_y: -2.0, max_x: 2.0, max_y: 2.0, z_plane: 0.0, z_half: 0.4 };
        let grid = rasterize(&world, 0.25, 0.1, &bounds);
        assert_eq!(grid.occupied_count(), 0);
    }

    #[test]
    fn rasterize_is_reproducible() {
        let world = WorldModel::new(vec![Shape::fixed(ShapeKind::Box(
            Aabb::new(Vec3::new(0.3, -0.9, -0.5), Vec3::new(1.7, 0.4, 1.0)).unwrap(),
        ))]);
        let bounds =
            GridBounds { min_x: -2.0, min_y: -2.0, max_x: 3.0, max_y: 2.0, z_plane: 0.0, z_half: 0.4 };
        let g1 = rasterize(&world, 0.2, 0.35, &bounds);
        let g2 = rasterize(&world, 0.2, 0.35, &bounds);
        assert_eq!(g1, g2);
    }

    #[test]
    fn text_round_trip() {
        let text = "..#..\n.###.\n..#..\n";
        let grid = OccupancyGrid::from_text(text, 0.5, Vec3::ZERO).unwrap();
        assert_eq!(grid.to_text(), text);
        assert!(OccupancyGrid::from_text("..x..\n", 0.5, Vec3::ZERO).is_err());
        assert!(OccupancyGrid::from_text("...\n....\n", 0.5, Vec3::ZERO).is_err());
    }

    #[test]
    fn tracker_advances_and_holds_goal() {
        let path = WaypointPath {
            waypoints: vec![
                Vec3::new(1.0, 0.0, 0.0),
                Vec3::new(2.0, 0.0, 0.0),
                Vec3::new(3.0, 0.0, 0.0),
            ],
            advance_radius: 0.5,
            grid_cost: 0,
        };
        let mut tracker = WaypointTracker::new(path);

        // At the start: target is waypoint 0.
        let pose = PlanarPose::identity();
        let t = tracker.active_waypoint(&pose);
        assert_eq!(tracker.index(), 0);
        assert!((t.x - 1.0).abs() < 1e-12);

        // Within the radius of waypoint 0: advances to waypoint 1.
        let pose = PlanarPose::new(Vec3::new(0.9, 0.0, 0.0), 0.0);
        tracker.active_waypoint(&pose);
        assert_eq!(tracker.index(), 1);

        // Approaching waypoint 1 hands over to the final waypoint, and
        // sitting on the goal keeps it as the target.
        let pose = PlanarPose::new(Vec3::new(1.9, 0.0, 0.0), 0.0);
        tracker.active_waypoint(&pose);
        assert_eq!(tracker.index(), 2);
        let pose = PlanarPose::new(Vec3::new(3.0, 0.0, 0.0), 0.0);
        let t = tracker.active_waypoint(&pose);
        assert_eq!(tracker.index(), 2);
        assert!(t.norm() < 1e-12);

        // Monotone: moving back near waypoint 0 does not regress the index.
        let pose = PlanarPose::new(Vec3::new(1.0, 0.0, 0.0), 0.0);
        tracker.active_waypoint(&pose);
        assert_eq!(tracker.index(), 2);
    }

    #[test]
    fn tracker_returns_body_frame_targets() {
        let path = WaypointPath {
            waypoints: vec![Vec3::new(2.0, 2.0, 0.0)],
            advance_radius: 0.5,
            grid_cost: 0,
        };
        let mut tracker = WaypointTracker::new(path);
        let pose = PlanarPose::new(Vec3::new(2.0, 0.0, 0.0), std::f64::consts::FRAC_PI_2);
        let t = tracker.active_waypoint(&pose);
        assert!((t.x - 2.0).abs() < 1e-12, "{t:?}");
        assert!(t.y.abs() < 1e-12);
    }
}
