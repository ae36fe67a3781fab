//! Deterministic closed-loop episode runner.
//!
//! One event loop drives the whole pipeline at its three rates: the sensor
//! and safety filter at `sensor_hz`, the needle preview at `mariner_hz`, and
//! explicit-Euler integration at `sim_dt`, with commands zero-order held
//! between control updates. Collision is judged by the sampled-surface
//! clearance oracle, never by the barrier itself.

use crate::geometry::{wrap_angle, PlanarPose, Vec3};
use crate::global_plan::{plan_path, rasterize, GridBounds, PlanError, WaypointTracker};
use crate::mariner::select_preview_target;
use crate::safety_filter::{clamp_command, filter_command, reference_control, ControlCommand};
use crate::vessel::{evaluate_cbf, CbfEval};
use crate::world_sim::lidar::lidar_scan;
use crate::world_sim::scenario::{Scenario, ScenarioError};
use crate::world_sim::world::{ClearanceOracle, CLEARANCE_PITCH};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::io::Write;
use std::time::Instant;
use thiserror::Error;

/// Clearance values are recorded as `min(alpha, CLEARANCE_CAP)`: exact below
/// the cap, saturated above it. The cap only needs to sit above the
/// penetration threshold of 1.
pub const CLEARANCE_CAP: f64 = 4.0;

#[derive(Debug, Error)]
pub enum EpisodeError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("global planning failed: {0}")]
    Plan(#[from] PlanError),
}

/// Ablation switches mirroring the pipeline's components.
#[derive(Debug, Clone, Copy)]
pub struct EpisodeToggles {
    pub vessel_on: bool,
    pub mariner_on: bool,
}

impl Default for EpisodeToggles {
    fn default() -> Self {
        EpisodeToggles { vessel_on: true, mariner_on: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Reached,
    Collision,
    Stuck,
    Timeout,
}

/// Explicit Euler step of the single-integrator-with-orientation dynamics;
/// the body-frame velocity command is lifted through the current yaw.
pub fn integrate(pose: &PlanarPose, u: &ControlCommand, dt: f64) -> PlanarPose {
    let dr = pose.rotate_to_world(u.v) * dt;
    PlanarPose { r: pose.r + dr, yaw: wrap_angle(pose.yaw + u.omega * dt) }
}

/// One simulation tick of diagnostics.
#[derive(Debug, Clone)]
pub struct Row {
    pub t: f64,
    pub r: Vec3,
    pub yaw: f64,
    pub u_ref: [f64; 4],
    pub u: [f64; 4],
    pub h_soft: f64,
    pub h_min: f64,
    pub alpha_min: f64,
    /// Needle heading chosen at the last preview update; NaN when the
    /// mariner is off or reported no valid needle.
    pub mariner_chosen_angle: f64,
    /// Body-frame target the controller tracked at the last control update.
    pub preview_target: Vec3,
    pub active_waypoint_index: usize,
    pub true_clearance_alpha: f64,
    /// Mariner fallback active (no valid needle; tracking the raw waypoint).
    pub stuck: bool,
    /// Safety filter reported infeasibility (zero command issued).
    pub infeasible: bool,
}

#[derive(Debug, Clone, Default)]
pub struct TrajectoryRecord {
    pub rows: Vec<Row>,
}

impl TrajectoryRecord {
    pub const CSV_HEADER: &'static str = "t,x,y,z,yaw,\
        uref_vx,uref_vy,uref_vz,uref_omega,u_vx,u_vy,u_vz,u_omega,\
        h_soft,h_min,alpha_min,mariner_chosen_angle,\
        preview_x,preview_y,preview_z,active_waypoint_index,\
        true_clearance_alpha,stuck,infeasible";

    pub fn write_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "{}", Self::CSV_HEADER)?;
        for row in &self.rows {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                row.t,
                row.r.x,
                row.r.y,
                row.r.z,
                row.yaw,
                row.u_ref[0],
                row.u_ref[1],
                row.u_ref[2],
                row.u_ref[3],
                row.u[0],
                row.u[1],
                row.u[2],
                row.u[3],
                row.h_soft,
                row.h_min,
                row.alpha_min,
                row.mariner_chosen_angle,
                row.preview_target.x,
                row.preview_target.y,
                row.preview_target.z,
                row.active_waypoint_index,
                row.true_clearance_alpha,
                row.stuck as u8,
                row.infeasible as u8,
            )?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("in-memory write");
        String::from_utf8(buf).expect("csv is utf-8")
    }
}

/// Accumulated wall-clock time per pipeline stage, microseconds.
#[derive(Debug, Clone, Default, Serialize)]
pub struct StageTimings {
    pub planning_us: f64,
    pub scan_us: f64,
    pub scan_calls: u64,
    pub cbf_us: f64,
    pub cbf_calls: u64,
    pub mariner_us: f64,
    pub mariner_calls: u64,
    pub filter_us: f64,
    pub filter_calls: u64,
    pub clearance_us: f64,
    pub clearance_calls: u64,
    pub total_us: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Metrics {
    pub scenario: String,
    pub outcome: Outcome,
    pub reached: bool,
    pub time_to_goal_s: Option<f64>,
    pub path_length_m: f64,
    /// Minimum recorded clearance, saturated at [`CLEARANCE_CAP`].
    pub min_true_clearance_alpha: f64,
    pub min_h_soft: Option<f64>,
    pub ticks: usize,
    pub sim_time_s: f64,
    pub timings: StageTimings,
}

impl Metrics {
    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("metrics serialize")
    }
}

/// Run a scenario to termination: goal reached, collision, stuck, or
/// duration end. Filter infeasibility becomes a zero command plus a row
/// flag, not a crash.
pub fn run_episode(
    scenario: &Scenario,
    toggles: EpisodeToggles,
) -> Result<(TrajectoryRecord, Metrics), EpisodeError> {
    scenario.validate()?;
    let episode_start = Instant::now();
    let world = scenario.build_world()?;
    let shape = scenario.vessel;
    let params = scenario.vessel_params;
    let filter_params = scenario.filter;
    let needles = scenario.needles;
    let goal = scenario.goal_point();
    let dt = scenario.rates.sim_dt;
    let sensor_every = scenario.rates.sensor_every()?;
    let mariner_every = scenario.rates.mariner_every()?;
    let n_ticks = (scenario.duration_s / dt).round() as usize;

    let mut timings = StageTimings::default();

    // Plan once on the floor plan (transient obstacles excluded).
    let plan_t0 = Instant::now();
    let start_pose = scenario.start_pose();
    let inflation = scenario.inflation_radius();
    let bounds = GridBounds::around(
        &world,
        &[start_pose.r, goal],
        inflation + scenario.planner.padding,
        start_pose.r.z,
        shape.c,
    );
    let grid = rasterize(&world, scenario.planner.resolution, inflation, &bounds);
    let mut path = plan_path(&grid, start_pose.r, goal)?;
    path.advance_radius = scenario.planner.advance_radius;
    let mut tracker = WaypointTracker::new(path);
    timings.planning_us = plan_t0.elapsed().as_secs_f64() * 1e6;

    let oracle = ClearanceOracle::new(&world, CLEARANCE_PITCH, CLEARANCE_CAP);
    let mut rng = ChaCha8Rng::seed_from_u64(scenario.seed);

    let mut pose = start_pose;
    let mut eval = CbfEval::no_constraint();
    let mut u_ref = ControlCommand::ZERO;
    let mut u = ControlCommand::ZERO;
    let mut preview_world = goal;
    let mut preview_body = Vec3::ZERO;
    let mut chosen_angle = f64::NAN;
    let mut mariner_stuck = false;
    let mut infeasible = false;

    let mut record = TrajectoryRecord::default();
    let mut outcome = Outcome::Timeout;
    let mut time_to_goal = None;
    let mut path_length = 0.0;
    let mut min_clearance = f64::INFINITY;
    let mut min_h_soft = f64::INFINITY;
    let mut stuck_run = 0.0f64;

    for k in 0..n_ticks {
        let t = k as f64 * dt;

        if k % sensor_every == 0 {
            let t0 = Instant::now();
            let raw = lidar_scan(&pose, &world, &scenario.sensor, &mut rng);
            timings.scan_us += t0.elapsed().as_secs_f64() * 1e6;
            timings.scan_calls += 1;

            let cloud = raw.crop_body_z(params.z_crop);

            let t0 = Instant::now();
            eval = evaluate_cbf(&shape, &pose, &cloud, &params);
            timings.cbf_us += t0.elapsed().as_secs_f64() * 1e6;
            timings.cbf_calls += 1;

            let wp_body = tracker.active_waypoint(&pose);
            let wp_world = tracker.current_world();

            if toggles.mariner_on {
                if k % mariner_every == 0 {
                    let t0 = Instant::now();
                    let res = select_preview_target(&needles, &cloud, wp_body);
                    timings.mariner_us += t0.elapsed().as_secs_f64() * 1e6;
                    timings.mariner_calls += 1;
                    match (res.chosen_index, res.preview_target_body) {
                        (Some(ci), Some(p)) => {
                            preview_world = pose.world_from_body(p);
                            chosen_angle = res.angles[ci];
                            mariner_stuck = false;
                        }
                        _ => {
                            preview_world = wp_world;
                            chosen_angle = f64::NAN;
                            mariner_stuck = true;
                        }
                    }
                }
            } else {
                preview_world = wp_world;
                chosen_angle = f64::NAN;
                mariner_stuck = false;
            }

            // The preview target is a world anchor between updates;
            // re-express it in the current body frame for the controller.
            preview_body = pose.body_from_world(preview_world);
            u_ref = reference_control(preview_body, &filter_params);
            if toggles.vessel_on {
                let t0 = Instant::now();
                match filter_command(u_ref, &eval, &filter_params) {
                    Ok(c) => {
                        u = c;
                        infeasible = false;
                    }
                    Err(_) => {
                        u = ControlCommand::ZERO;
                        infeasible = true;
                    }
                }
                timings.filter_us += t0.elapsed().as_secs_f64() * 1e6;
                timings.filter_calls += 1;
            } else {
                u = clamp_command(u_ref, &filter_params);
                infeasible = false;
            }
        }

        let t0 = Instant::now();
        let clearance = oracle.query(&pose, &shape);
        timings.clearance_us += t0.elapsed().as_secs_f64() * 1e6;
        timings.clearance_calls += 1;

        min_clearance = min_clearance.min(clearance);
        if !eval.is_unconstrained() {
            min_h_soft = min_h_soft.min(eval.h);
        }

        record.rows.push(Row {
            t,
            r: pose.r,
            yaw: pose.yaw,
            u_ref: u_ref.as_array(),
            u: u.as_array(),
            h_soft: eval.h,
            h_min: eval.h_min,
            alpha_min: eval.h_min + params.beta,
            mariner_chosen_angle: chosen_angle,
            preview_target: preview_body,
            active_waypoint_index: tracker.index(),
            true_clearance_alpha: clearance,
            stuck: mariner_stuck,
            infeasible,
        });

        if pose.r.distance(goal) <= scenario.goal_radius {
            outcome = Outcome::Reached;
            time_to_goal = Some(t);
            break;
        }
        if clearance < 1.0 {
            outcome = Outcome::Collision;
            break;
        }
        if u.norm() < scenario.stuck.speed_eps {
            stuck_run += dt;
            if stuck_run >= scenario.stuck.window_s {
                outcome = Outcome::Stuck;
                break;
            }
        } else {
            stuck_run = 0.0;
        }

        let before = pose.r;
        pose = integrate(&pose, &u, dt);
        path_length += pose.r.distance(before);
    }

    timings.total_us = episode_start.elapsed().as_secs_f64() * 1e6;
    let ticks = record.rows.len();
    let metrics = Metrics {
        scenario: scenario.name.clone(),
        outcome,
        reached: outcome == Outcome::Reached,
        time_to_goal_s: time_to_goal,
        path_length_m: path_length,
        min_true_clearance_alpha: min_clearance,
        min_h_soft: min_h_soft.is_finite().then_some(min_h_soft),
        ticks,
        sim_time_s: ticks.saturating_sub(1) as f64 * dt,
        timings,
    };
    Ok((record, metrics))
}
