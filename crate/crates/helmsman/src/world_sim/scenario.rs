//! Scenario files: world geometry, start/goal, and every parameter block the
//! pipeline needs, in a human-editable TOML schema with full validation.

use crate::geometry::{HyperEllipsoid, PlanarPose, Vec3};
use crate::mariner::NeedleConfig;
use crate::safety_filter::FilterParams;
use crate::vessel::VesselParams;
use crate::world_sim::lidar::LidarSpec;
use crate::world_sim::world::{Aabb, ConvexPrism, Shape, ShapeKind, WorldModel};
use serde::{Deserialize, Serialize};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read scenario: {0}")]
    Io(#[from] std::io::Error),
    #[error("scenario parse error: {0}")]
    Parse(String),
    #[error("scenario field `{field}` invalid: {message}")]
    Invalid { field: &'static str, message: String },
}

fn invalid(field: &'static str, message: impl Into<String>) -> ScenarioError {
    ScenarioError::Invalid { field, message: message.into() }
}

/// Update-rate structure of the closed loop: sensing and filtering at
/// `sensor_hz`, preview replanning at `mariner_hz`, integration at `sim_dt`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Rates {
    pub sensor_hz: u32,
    pub mariner_hz: u32,
    pub sim_dt: f64,
}

impl Default for Rates {
    fn default() -> Self {
        Rates { sensor_hz: 10, mariner_hz: 2, sim_dt: 0.01 }
    }
}

impl Rates {
    /// Simulation ticks per sensor update; errors unless the period is an
    /// exact multiple of the tick.
    pub fn sensor_every(&self) -> Result<usize, ScenarioError> {
        period_ticks(self.sensor_hz, self.sim_dt, "rates.sensor_hz")
    }

    pub fn mariner_every(&self) -> Result<usize, ScenarioError> {
        period_ticks(self.mariner_hz, self.sim_dt, "rates.mariner_hz")
    }
}

fn period_ticks(hz: u32, dt: f64, field: &'static str) -> Result<usize, ScenarioError> {
    if hz == 0 {
        return Err(invalid(field, "rate must be >= 1 Hz"));
    }
    if !(dt > 0.0) {
        return Err(invalid("rates.sim_dt", format!("must be > 0 (got {dt})")));
    }
    let period = 1.0 / hz as f64;
    let ticks = (period / dt).round();
    if ticks < 1.0 || ((ticks * dt - period) / period).abs() > 1e-9 {
        return Err(invalid(
            field,
            format!("period 1/{hz} s is not a whole number of {dt} s ticks"),
        ));
    }
    Ok(ticks as usize)
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct StartSpec {
    pub x: f64,
    pub y: f64,
    #[serde(default)]
    pub z: f64,
    #[serde(default)]
    pub yaw: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GoalSpec {
    pub x: f64,
    pub y: f64,
    #[serde(default)]
    pub z: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PlannerConfig {
    /// Grid cell size, meters.
    pub resolution: f64,
    /// Obstacle inflation; defaults to the vessel's largest semi-axis.
    pub inflation_radius: Option<f64>,
    /// Waypoint advance radius, meters.
    pub advance_radius: f64,
    /// Extra margin around the world when sizing the grid.
    pub padding: f64,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        PlannerConfig { resolution: 0.1, inflation_radius: None, advance_radius: 0.5, padding: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct StuckSpec {
    /// Command-magnitude threshold below which the robot counts as idle.
    pub speed_eps: f64,
    /// Continuous idle time that terminates the episode as stuck, seconds.
    pub window_s: f64,
}

impl Default for StuckSpec {
    fn default() -> Self {
        StuckSpec { speed_eps: 1e-3, window_s: 5.0 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoxSpec {
    pub min: [f64; 3],
    pub max: [f64; 3],
    #[serde(default)]
    pub transient: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PrismSpec {
    pub vertices: Vec<[f64; 2]>,
    /// `[z_bottom, z_top]`.
    pub z: [f64; 2],
    #[serde(default)]
    pub transient: bool,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct WorldConfig {
    #[serde(default)]
    pub boxes: Vec<BoxSpec>,
    #[serde(default)]
    pub prisms: Vec<PrismSpec>,
}

/// A complete, runnable scenario description.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    #[serde(default)]
    pub seed: u64,
    pub duration_s: f64,
    /// Episode ends as reached when the robot is within this of the goal.
    #[serde(default = "default_goal_radius")]
    pub goal_radius: f64,
    #[serde(default)]
    pub rates: Rates,
    pub start: StartSpec,
    pub goal: GoalSpec,
    pub vessel: HyperEllipsoid,
    #[serde(default)]
    pub vessel_params: VesselParams,
    #[serde(default)]
    pub needles: NeedleConfig,
    #[serde(default)]
    pub filter: FilterParams,
    #[serde(default)]
    pub sensor: LidarSpec,
    #[serde(default)]
    pub planner: PlannerConfig,
    #[serde(default)]
    pub stuck: StuckSpec,
    #[serde(default)]
    pub world: WorldConfig,
}

fn default_goal_radius() -> f64 {
    0.2
}

impl Scenario {
    pub fn from_toml_str(text: &str) -> Result<Self, ScenarioError> {
        toml::from_str(text).map_err(|e| ScenarioError::Parse(e.to_string()))
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("scenario serializes")
    }

    pub fn load(path: &Path) -> Result<Self, ScenarioError> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }

    pub fn save(&self, path: &Path) -> Result<(), ScenarioError> {
        std::fs::write(path, self.to_toml_string())?;
        Ok(())
    }

    pub fn start_pose(&self) -> PlanarPose {
        PlanarPose::new(Vec3::new(self.start.x, self.start.y, self.start.z), self.start.yaw)
    }

    pub fn goal_point(&self) -> Vec3 {
        Vec3::new(self.goal.x, self.goal.y, self.goal.z)
    }

    pub fn inflation_radius(&self) -> f64 {
        self.planner.inflation_radius.unwrap_or_else(|| self.vessel.max_semi_axis())
    }

    pub fn build_world(&self) -> Result<WorldModel, ScenarioError> {
        let mut shapes = Vec::new();
        for (i, b) in self.world.boxes.iter().enumerate() {
            let aabb = Aabb::new(
                Vec3::new(b.min[0], b.min[1], b.min[2]),
                Vec3::new(b.max[0], b.max[1], b.max[2]),
            )
            .map_err(|e| invalid("world.boxes", format!("box {i}: {e}")))?;
            shapes.push(Shape { kind: ShapeKind::Box(aabb), transient: b.transient });
        }
        for (i, p) in self.world.prisms.iter().enumerate() {
            let prism = ConvexPrism::new(p.vertices.clone(), p.z[0], p.z[1])
                .map_err(|e| invalid("world.prisms", format!("prism {i}: {e}")))?;
            shapes.push(Shape { kind: ShapeKind::Prism(prism), transient: p.transient });
        }
        Ok(WorldModel::new(shapes))
    }

    /// Full schema validation with field diagnostics. Builds the world to
    /// check geometry and verifies start/goal lie outside every obstacle.
    pub fn validate(&self) -> Result<(), ScenarioError> {
        if !(self.duration_s > 0.0) {
            return Err(invalid("duration_s", format!("must be > 0 (got {})", self.duration_s)));
        }
        if !(self.goal_radius > 0.0) {
            return Err(invalid("goal_radius", "must be > 0"));
        }
        self.rates.sensor_every()?;
        self.rates.mariner_every()?;
        HyperEllipsoid::new(self.vessel.a, self.vessel.b, self.vessel.c, self.vessel.d)
            .map_err(|e| invalid("vessel", e.to_string()))?;
        self.vessel_params.validate().map_err(|e| invalid("vessel_params", e.to_string()))?;
        if self.sensor.rays_total() > self.vessel_params.max_points {
            return Err(invalid(
                "vessel_params.max_points",
                format!(
                    "sensor can return {} points, above max_points = {}",
                    self.sensor.rays_total(),
                    self.vessel_params.max_points
                ),
            ));
        }
        self.needles.validate().map_err(|e| invalid("needles", e.to_string()))?;
        self.filter.validate().map_err(|e| invalid("filter", e))?;
        self.sensor.validate().map_err(|e| invalid("sensor", e))?;
        if !(self.planner.resolution > 0.0) {
            return Err(invalid("planner.resolution", "must be > 0"));
        }
        if !(self.planner.advance_radius > 0.0) {
            return Err(invalid("planner.advance_radius", "must be > 0"));
        }
        if !(self.planner.padding >= 0.0) {
            return Err(invalid("planner.padding", "must be >= 0"));
        }
        if !(self.stuck.speed_eps > 0.0 && self.stuck.window_s > 0.0) {
            return Err(invalid("stuck", "speed_eps and window_s must be > 0"));
        }
        let world = self.build_world()?;
        let start = Vec3::new(self.start.x, self.start.y, self.start.z);
        let goal = self.goal_point();
        if world.contains(start) {
            return Err(invalid("start", "lies inside an obstacle"));
        }
        if world.contains(goal) {
            return Err(invalid("goal", "lies inside an obstacle"));
        }
        Ok(())
    }
}
