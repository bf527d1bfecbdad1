//! Deterministic simulator standing in for the SLAM system: environments,
//! lidar, the local trajectory builder's active submap pair, odometry drift,
//! and simulated pose-graph optimization events.
//!
//! The harness does not implement scan matching or graph optimization; pose
//! solutions are synthesized from ground truth plus drift, which is all the
//! frontier detector's contract needs.

mod builder;
mod drift;
mod env;
mod lidar;
mod sim;
mod trajectory;

pub use builder::{CorrectionPolicy, SubmapMeta, TrajectoryBuilder};
pub use drift::{DriftModel, DriftState};
pub use env::{generate_environment, Environment, EnvironmentSpec, HarnessError};
pub use lidar::{simulate_scan, LidarConfig};
pub use sim::{
    loop_closure_scenario, ring_scenario, room_scenario, verification_suite, Scenario, SimConfig,
    Simulation,
};
pub use trajectory::{
    path_through_waypoints, rectangle_loop_plan, ring_plan, serpentine_plan, TrajectoryPlan,
    MAX_STEP_ROTATION,
    MAX_STEP_TRANSLATION,
};
