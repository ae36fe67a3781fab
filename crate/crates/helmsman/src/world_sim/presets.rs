//! Shipped scenario suite: a free-space smoke run, the box-wall ablation
//! scene, a narrow hallway, a slalom obstacle course, and a floor-return
//! scene that exercises the body-z crop. Geometry is authored to match the
//! behaviors of interest; all parameters are the stack defaults unless a
//! scene says otherwise.

use crate::world_sim::scenario::{
    BoxSpec, GoalSpec, PlannerConfig, Rates, Scenario, StartSpec, StuckSpec, WorldConfig,
};
use crate::{FilterParams, HyperEllipsoid, LidarSpec, NeedleConfig, VesselParams};

fn base(name: &str, duration_s: f64) -> Scenario {
    Scenario {
        name: name.to_string(),
        seed: 7,
        duration_s,
        goal_radius: 0.2,
        rates: Rates::default(),
        start: StartSpec { x: 0.0, y: 0.0, z: 0.0, yaw: 0.0 },
        goal: GoalSpec { x: 5.0, y: 0.0, z: 0.0 },
        vessel: HyperEllipsoid { a: 0.8, b: 0.4, c: 0.4, d: 1 },
        vessel_params: VesselParams::default(),
        // Needles narrower than the default fan: preview paths hug
        // obstacles and stay direction-stable; the barrier filter owns the
        // actual clearance margin.
        needles: NeedleConfig { b: 0.45, c: 0.45, ..NeedleConfig::default() },
        filter: FilterParams::default(),
        sensor: LidarSpec::default(),
        planner: PlannerConfig::default(),
        stuck: StuckSpec::default(),
        world: WorldConfig::default(),
    }
}

fn wall_box(min: [f64; 3], max: [f64; 3]) -> BoxSpec {
    BoxSpec { min, max, transient: false }
}

fn crate_box(min: [f64; 3], max: [f64; 3]) -> BoxSpec {
    BoxSpec { min, max, transient: true }
}

/// Rectangular room perimeter made of four static wall boxes.
fn room(x0: f64, y0: f64, x1: f64, y1: f64, thick: f64) -> Vec<BoxSpec> {
    let (zb, zt) = (-0.5, 2.0);
    vec![
        wall_box([x0 - thick, y0 - thick, zb], [x1 + thick, y0, zt]),
        wall_box([x0 - thick, y1, zb], [x1 + thick, y1 + thick, zt]),
        wall_box([x0 - thick, y0, zb], [x0, y1, zt]),
        wall_box([x1, y0, zb], [x1 + thick, y1, zt]),
    ]
}

/// Empty world, goal straight ahead.
pub fn free_space() -> Scenario {
    base("free_space", 30.0)
}

/// A wall of boxes blocks the straight line from start to goal. The boxes
/// are transient (absent from the floor plan), so the global plan runs
/// straight through them and the local stack has to resolve the conflict:
/// the complete pipeline slips around the wall end, the barrier alone parks
/// in the head-on equilibrium, and the preview alone clips a corner.
pub fn box_wall() -> Scenario {
    let mut s = base("box_wall", 60.0);
    s.start = StartSpec { x: -4.0, y: 0.0, z: 0.0, yaw: 0.0 };
    // Goal offset toward one wall end: preview tips on that side stay
    // strictly closer, so the selection commits instead of re-centering,
    // while the barrier-only ablation still parks at the wall point facing
    // the goal head on.
    s.goal = GoalSpec { x: 4.0, y: -1.5, z: 0.0 };
    let mut boxes = room(-7.0, -5.0, 7.0, 5.0, 0.3);
    for i in 0..4 {
        let y0 = -2.4 + 1.2 * i as f64;
        boxes.push(crate_box([-0.4, y0, -0.5], [0.4, y0 + 1.2, 1.5]));
    }
    s.world.boxes = boxes;
    s
}

/// Straight corridor, 2.0 m between the inner wall faces, traversed
/// end to end.
pub fn hallway() -> Scenario {
    let mut s = base("hallway", 60.0);
    s.start = StartSpec { x: 0.0, y: 0.0, z: 0.0, yaw: 0.0 };
    s.goal = GoalSpec { x: 10.0, y: 0.0, z: 0.0 };
    let (zb, zt) = (-0.5, 2.0);
    s.world.boxes = vec![
        wall_box([-1.5, 1.0, zb], [11.5, 1.4, zt]),
        wall_box([-1.5, -1.4, zb], [11.5, -1.0, zt]),
        // End caps so the corridor is closed except along its axis.
        wall_box([-1.9, -1.4, zb], [-1.5, 1.4, zt]),
        wall_box([11.5, -1.4, zb], [11.9, 1.4, zt]),
    ];
    s
}

/// Room with a slalom of crates straddling the straight line to the goal.
pub fn obstacle_course() -> Scenario {
    let mut s = base("obstacle_course", 90.0);
    s.start = StartSpec { x: -6.0, y: 0.0, z: 0.0, yaw: 0.0 };
    s.goal = GoalSpec { x: 6.0, y: 0.0, z: 0.0 };
    let mut boxes = room(-8.0, -3.5, 8.0, 3.5, 0.3);
    let centers = [(-4.0, 0.3), (-2.0, -0.3), (0.0, 0.3), (2.0, -0.3), (4.0, 0.3)];
    for (cx, cy) in centers {
        boxes.push(crate_box([cx - 0.6, cy - 0.6, -0.5], [cx + 0.6, cy + 0.6, 1.5]));
    }
    s.world.boxes = boxes;
    s
}

/// Elevated robot over a static floor slab: downward-looking channels return
/// floor points that the body-z crop must discard.
pub fn floor_crop() -> Scenario {
    let mut s = base("floor_crop", 30.0);
    s.start = StartSpec { x: 0.0, y: 0.0, z: 0.5, yaw: 0.0 };
    s.goal = GoalSpec { x: 5.0, y: 0.0, z: 0.5 };
    s.world.boxes = vec![
        wall_box([-3.0, -4.0, -0.4], [8.0, 4.0, 0.0]),
        // One crate beside the path so the scene is not floor-only.
        crate_box([2.2, 1.2, 0.0], [3.2, 2.2, 1.6]),
    ];
    s
}

/// All shipped scenarios, in a stable order.
pub fn all() -> Vec<Scenario> {
    vec![free_space(), box_wall(), hallway(), obstacle_course(), floor_crop()]
}
