//! Planar rigid transforms, points, and axis-aligned bounding boxes.
//!
//! All transforms are SE(2): a translation plus a rotation angle kept
//! normalized to `(-PI, PI]`. Values are immutable after construction and
//! freely shareable across threads.

use serde::{Deserialize, Serialize};

/// A point in the plane, in meters. The frame (a submap's local frame or the
/// global frame) is a convention carried by the surrounding code, not the type.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

/// Normalize an angle into `(-PI, PI]`.
pub fn normalize_angle(angle: f64) -> f64 {
    let wrapped = angle.rem_euclid(2.0 * std::f64::consts::PI);
    if wrapped > std::f64::consts::PI {
        wrapped - 2.0 * std::f64::consts::PI
    } else {
        wrapped
    }
}

/// An SE(2) pose: the pose of a source frame expressed in a target frame.
/// `project_point` maps source-frame coordinates into the target frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RigidTransform2 {
    translation: [f64; 2],
    rotation: f64,
}

impl RigidTransform2 {
    pub fn new(translation: [f64; 2], rotation: f64) -> Self {
        Self {
            translation,
            rotation: normalize_angle(rotation),
        }
    }

    pub fn identity() -> Self {
        Self {
            translation: [0.0, 0.0],
            rotation: 0.0,
        }
    }

    pub fn from_translation(x: f64, y: f64) -> Self {
        Self::new([x, y], 0.0)
    }

    pub fn translation(&self) -> [f64; 2] {
        self.translation
    }

    /// Rotation angle in radians, always in `(-PI, PI]`.
    pub fn rotation(&self) -> f64 {
        self.rotation
    }

    /// Composition: the result applies `other` first, then `self`.
    pub fn compose(&self, other: &RigidTransform2) -> RigidTransform2 {
        let (sin, cos) = self.rotation.sin_cos();
        let tx = self.translation[0] + cos * other.translation[0] - sin * other.translation[1];
        let ty = self.translation[1] + sin * other.translation[0] + cos * other.translation[1];
        RigidTransform2::new([tx, ty], self.rotation + other.rotation)
    }

    pub fn invert(&self) -> RigidTransform2 {
        let (sin, cos) = (-self.rotation).sin_cos();
        let tx = -(cos * self.translation[0] - sin * self.translation[1]);
        let ty = -(sin * self.translation[0] + cos * self.translation[1]);
        RigidTransform2::new([tx, ty], -self.rotation)
    }

    /// Express `p` (given in this transform's source frame) in the target frame.
    pub fn project_point(&self, p: Point2) -> Point2 {
        let (sin, cos) = self.rotation.sin_cos();
        Point2::new(
            self.translation[0] + cos * p.x - sin * p.y,
            self.translation[1] + sin * p.x + cos * p.y,
        )
    }
}

/// Axis-aligned box in the global frame. `min` is componentwise <= `max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub min: Point2,
    pub max: Point2,
}

impl BoundingBox {
    pub fn new(min: Point2, max: Point2) -> Self {
        debug_assert!(min.x <= max.x && min.y <= max.y);
        Self { min, max }
    }

    /// Smallest box containing all points. `None` for an empty iterator.
    pub fn from_points(points: impl IntoIterator<Item = Point2>) -> Option<Self> {
        let mut iter = points.into_iter();
        let first = iter.next()?;
        let mut min = first;
        let mut max = first;
        for p in iter {
            min.x = min.x.min(p.x);
            min.y = min.y.min(p.y);
            max.x = max.x.max(p.x);
            max.y = max.y.max(p.y);
        }
        Some(Self { min, max })
    }

    /// Touching edges count as intersecting: false negatives would break the
    /// stabbing-query pruning, false positives only cost extra tests.
    pub fn intersects(&self, other: &BoundingBox) -> bool {
        self.min.x <= other.max.x
            && other.min.x <= self.max.x
            && self.min.y <= other.max.y
            && other.min.y <= self.max.y
    }

    pub fn contains(&self, p: Point2) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }
}

/// Project a local-frame extent box through `pose` and return the axis-aligned
/// box of its four corners in the target frame.
pub fn transformed_bounding_box(local: &BoundingBox, pose: &RigidTransform2) -> BoundingBox {
    let corners = [
        Point2::new(local.min.x, local.min.y),
        Point2::new(local.max.x, local.min.y),
        Point2::new(local.min.x, local.max.y),
        Point2::new(local.max.x, local.max.y),
    ];
    BoundingBox::from_points(corners.iter().map(|c| pose.project_point(*c)))
        .expect("four corners are never empty")
}
