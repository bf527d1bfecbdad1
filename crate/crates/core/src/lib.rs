//! Dense frontier detection for submap-based 2D grid SLAM.
//!
//! The library provides occupancy-grid submaps with Bayesian scan insertion,
//! an incremental frontier detector constrained to active submaps yet robust
//! to pose graph optimization, a brute-force oracle for verification, a
//! deterministic SLAM-event simulator, and record/replay of event streams.

pub mod bench;
pub mod detector;
pub mod event;
pub mod event_log;
pub mod frontier;
pub mod geometry;
pub mod grid;
pub mod harness;
pub mod oracle;
pub mod ray;
pub mod spatial_index;
pub mod verification;

pub use detector::{build_detector, run_detector, FrontierDetector, SkipPolicy};
pub use frontier::{DetectorConfig, FrontierUpdate, IncrementalDetector, NaiveDetector};
pub use grid::{Submap, SubmapId};
