//! Deterministic closed-loop simulation: world geometry, range sensing,
//! scenario configuration, and the episode runner.

pub mod episode;
pub mod lidar;
pub mod presets;
pub mod scenario;
pub mod world;

pub use episode::{
    integrate, run_episode, EpisodeError, EpisodeToggles, Metrics, Outcome, Row, StageTimings,
    TrajectoryRecord, CLEARANCE_CAP,
};
pub use lidar::{lidar_scan, LidarSpec};
pub use scenario::{Rates, Scenario, ScenarioError};
pub use world::{
    true_clearance_alpha, Aabb, ClearanceOracle, ConvexPrism, Shape, ShapeKind, WorldModel,
    CLEARANCE_PITCH,
};
