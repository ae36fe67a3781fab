//! Point-cloud CBF local navigation toolkit.
//!
//! The stack has three moving parts plus the scaffolding to close the loop:
//!
//! - [`vessel`] — the scaling-factor point-cloud control barrier function:
//!   per-point barriers on a higher-order ellipsoid body, softmin
//!   aggregation, analytic pose gradients.
//! - [`mariner`] — the needle preview controller: a fan of elongated
//!   ellipsoids scaled against the cloud; the scaled tip nearest the global
//!   waypoint becomes the local target, which keeps the barrier filter out of
//!   spurious equilibria.
//! - [`safety_filter`] — the CBFQP reduced to a closed-form half-space
//!   projection, plus the proportional performance controller.
//! - [`global_plan`] — occupancy-grid A* with string pulling and a waypoint
//!   tracker.
//! - [`world_sim`] — a deterministic closed-loop simulator with ray-cast
//!   range sensing and an independent sampled-surface clearance oracle.
//!
//! Start with the runnable examples (`cargo run --example <name>`); each one
//! demonstrates a single capability end to end.

pub mod cli;
pub mod geometry;
pub mod global_plan;
pub mod mariner;
pub mod safety_filter;
pub mod vessel;
pub mod world_sim;

pub use geometry::{HyperEllipsoid, PlanarPose, Vec3};
pub use global_plan::{OccupancyGrid, WaypointPath, WaypointTracker};
pub use mariner::{NeedleConfig, NeedleResult};
pub use safety_filter::{ControlCommand, FilterParams};
pub use vessel::{CbfEval, Frame, PointCloud, VesselParams};
pub use world_sim::{LidarSpec, Scenario, WorldModel};
