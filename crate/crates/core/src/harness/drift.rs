//! Odometry drift: the error the simulated local SLAM accumulates between
//! loop closures.

use crate::geometry::RigidTransform2;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftModel {
    /// Constant translation bias added every step, meters.
    pub translation_bias: [f64; 2],
    /// Std-dev of zero-mean translation noise per step, meters.
    pub translation_noise_std: f64,
    /// Std-dev of zero-mean heading noise per step, radians. Verification
    /// scenarios keep this at 0 so submap frames stay axis-aligned with the
    /// global lattice.
    pub rotation_noise_std: f64,
    pub seed: u64,
}

impl DriftModel {
    pub fn none(seed: u64) -> Self {
        Self {
            translation_bias: [0.0, 0.0],
            translation_noise_std: 0.0,
            rotation_noise_std: 0.0,
            seed,
        }
    }
}

/// Accumulating drift state: each `apply` advances the error by one step and
/// maps a ground-truth pose to its drifted odometric estimate.
pub struct DriftState {
    model: DriftModel,
    rng: ChaCha8Rng,
    error_translation: [f64; 2],
    error_rotation: f64,
}

impl DriftState {
    pub fn new(model: DriftModel) -> Self {
        let rng = ChaCha8Rng::seed_from_u64(model.seed);
        Self {
            model,
            rng,
            error_translation: [0.0, 0.0],
            error_rotation: 0.0,
        }
    }

    pub fn apply(&mut self, true_pose: &RigidTransform2) -> RigidTransform2 {
        self.error_translation[0] += self.model.translation_bias[0] + self.noise(self.model.translation_noise_std);
        self.error_translation[1] += self.model.translation_bias[1] + self.noise(self.model.translation_noise_std);
        self.error_rotation += self.noise(self.model.rotation_noise_std);
        let t = true_pose.translation();
        RigidTransform2::new(
            [
                t[0] + self.error_translation[0],
                t[1] + self.error_translation[1],
            ],
            true_pose.rotation() + self.error_rotation,
        )
    }

    fn noise(&mut self, std: f64) -> f64 {
        if std == 0.0 {
            return 0.0;
        }
        Normal::new(0.0, std).unwrap().sample(&mut self.rng)
    }

    /// Accumulated translation error, meters.
    pub fn error_translation(&self) -> [f64; 2] {
        self.error_translation
    }
}
