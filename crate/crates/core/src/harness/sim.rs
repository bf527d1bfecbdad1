//! End-to-end simulation: trajectory + lidar + drift + trajectory builder +
//! periodic optimization, producing the SLAM event stream.

use super::builder::{CorrectionPolicy, TrajectoryBuilder};
use super::drift::{DriftModel, DriftState};
use super::env::{generate_environment, Environment, EnvironmentSpec, HarnessError};
use super::lidar::{simulate_scan, LidarConfig};
use super::trajectory::{rectangle_loop_plan, ring_plan, serpentine_plan, TrajectoryPlan};
use crate::event::Event;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub resolution: f64,
    pub scans_per_submap: u32,
    pub p_hit: f64,
    pub p_miss: f64,
    pub lidar: LidarConfig,
    pub drift: DriftModel,
    /// Trigger an optimization after every this many submap finishes;
    /// 0 disables optimization events.
    pub optimization_cadence: u32,
    pub correction: CorrectionPolicy,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            resolution: 0.05,
            scans_per_submap: 100,
            p_hit: 0.55,
            p_miss: 0.49,
            lidar: LidarConfig::default(),
            drift: DriftModel::none(0),
            optimization_cadence: 3,
            correction: CorrectionPolicy::SnapToTruth,
        }
    }
}

/// A fully specified simulation run.
pub struct Simulation<'a> {
    pub env: &'a Environment,
    pub plan: &'a TrajectoryPlan,
    pub config: &'a SimConfig,
}

impl Simulation<'_> {
    /// Step the whole plan, forwarding events to the sink in SLAM order.
    pub fn run(&self, mut sink: impl FnMut(Event)) -> Result<(), HarnessError> {
        let mut drift = DriftState::new(self.config.drift.clone());
        let mut builder = TrajectoryBuilder::new(
            self.config.resolution,
            self.config.scans_per_submap,
            self.config.p_hit,
            self.config.p_miss,
        );
        let mut finishes_since_optimization = 0u32;
        for true_pose in self.plan.poses() {
            let odo_pose = drift.apply(true_pose);
            let scan = simulate_scan(self.env, true_pose, &self.config.lidar)?;
            for event in builder.step(&scan, &odo_pose, true_pose)? {
                if matches!(event, Event::SubmapFinished { .. }) {
                    finishes_since_optimization += 1;
                }
                sink(event);
            }
            if self.config.optimization_cadence > 0
                && finishes_since_optimization >= self.config.optimization_cadence
                && builder.finished_count() > 0
            {
                sink(builder.trigger_optimization(self.config.correction));
                finishes_since_optimization = 0;
            }
        }
        Ok(())
    }

    pub fn events(&self) -> Result<Vec<Event>, HarnessError> {
        let mut events = Vec::new();
        self.run(|e| events.push(e))?;
        Ok(events)
    }
}

/// A named, reproducible scenario: environment, trajectory and simulation
/// parameters derived from a seed.
pub struct Scenario {
    pub name: String,
    pub env: Environment,
    pub plan: TrajectoryPlan,
    pub config: SimConfig,
}

impl Scenario {
    pub fn events(&self) -> Result<Vec<Event>, HarnessError> {
        Simulation {
            env: &self.env,
            plan: &self.plan,
            config: &self.config,
        }
        .events()
    }
}

fn verification_config(seed: u64, drift_bias: [f64; 2]) -> SimConfig {
    SimConfig {
        resolution: 0.05,
        scans_per_submap: 24,
        p_hit: 0.55,
        p_miss: 0.49,
        lidar: LidarConfig {
            num_beams: 180,
            max_range: 6.0,
            angle_span: std::f64::consts::TAU,
        },
        drift: DriftModel {
            translation_bias: drift_bias,
            translation_noise_std: 0.0,
            rotation_noise_std: 0.0,
            seed: seed.wrapping_mul(31).wrapping_add(7),
        },
        optimization_cadence: 3,
        correction: CorrectionPolicy::SnapToTruth,
    }
}

/// Walled room swept boustrophedon; size and obstacles vary with the seed.
pub fn room_scenario(seed: u64) -> Result<Scenario, HarnessError> {
    let width = 4.5 + (seed % 3) as f64 * 0.75;
    let height = 4.0 + (seed % 2) as f64 * 0.75;
    let obstacles = (seed % 3) as u32;
    let env = generate_environment(
        seed,
        &EnvironmentSpec::Room {
            width_m: width,
            height_m: height,
            obstacles,
        },
        0.05,
    )?;
    // Obstacles keep a 0.6 m clear band along the walls; a perimeter loop
    // stays inside it. Obstacle-free rooms get the full sweep.
    let plan = if obstacles > 0 {
        rectangle_loop_plan(&env, 0.45, 1.2, 0.18)?
    } else {
        serpentine_plan(&env, 0.9, 1.1, 0.18)?
    };
    let drift = [0.0004 + (seed % 4) as f64 * 1e-4, 0.0003];
    Ok(Scenario {
        name: format!("room-{seed}"),
        env,
        plan,
        config: verification_config(seed, drift),
    })
}

/// Ring corridor driven for 1.25 laps so the loop closes over its start.
pub fn ring_scenario(seed: u64, drift_bias: [f64; 2]) -> Result<Scenario, HarnessError> {
    let width = 7.0 + (seed % 2) as f64;
    let height = 5.0 + (seed % 3) as f64 * 0.5;
    let corridor = 1.4;
    let env = generate_environment(
        seed,
        &EnvironmentSpec::RingCorridor {
            width_m: width,
            height_m: height,
            corridor_m: corridor,
        },
        0.05,
    )?;
    let plan = ring_plan(&env, corridor, 1.25, 0.18)?;
    Ok(Scenario {
        name: format!("ring-{seed}"),
        env,
        plan,
        config: verification_config(seed, drift_bias),
    })
}

/// The fixed-seed randomized scenario family used for oracle verification:
/// alternating rooms and ring corridors.
pub fn verification_suite(count: usize) -> Result<Vec<Scenario>, HarnessError> {
    (0..count as u64)
        .map(|i| {
            if i % 2 == 0 {
                room_scenario(i)
            } else {
                ring_scenario(i, [0.0006, 0.0004])
            }
        })
        .collect()
}

/// Ring corridor with heavy odometry drift and a late snap-to-truth
/// optimization: by the time the loop closes the accumulated error exceeds
/// ten cells, and the optimization must restore the frontier invariant.
pub fn loop_closure_scenario(seed: u64) -> Result<Scenario, HarnessError> {
    let mut scenario = ring_scenario(seed, [0.0050, 0.0030])?;
    scenario.name = format!("loop-closure-{seed}");
    // Let drift accumulate across most of the lap before correcting.
    scenario.config.optimization_cadence = 12;
    scenario.config.correction = CorrectionPolicy::SnapToTruth;
    Ok(scenario)
}
