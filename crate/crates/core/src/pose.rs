//! Rigid-body poses (translation + unit quaternion) and config-level pose specs.

use nalgebra::{Isometry3, Point3, Translation3, UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};

/// 6-DoF rigid transform in the map frame.
pub type Pose = Isometry3<f64>;

pub fn pose_from_parts(position: Point3<f64>, rotation: UnitQuaternion<f64>) -> Pose {
    Isometry3::from_parts(Translation3::from(position.coords), rotation)
}

/// Rotation from an axis-angle (scaled-axis) vector.
pub fn rotation_exp(scaled_axis: Vector3<f64>) -> UnitQuaternion<f64> {
    UnitQuaternion::from_scaled_axis(scaled_axis)
}

/// Euclidean distance between pose translations.
pub fn position_error(a: &Pose, b: &Pose) -> f64 {
    (a.translation.vector - b.translation.vector).norm()
}

/// Pose as written in JSON configs: a position and a yaw about +z.
#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct PoseSpec {
    pub position: [f64; 3],
    #[serde(default)]
    pub yaw_deg: f64,
}

impl PoseSpec {
    pub fn to_pose(self) -> Pose {
        let yaw = self.yaw_deg.to_radians();
        pose_from_parts(
            Point3::new(self.position[0], self.position[1], self.position[2]),
            UnitQuaternion::from_axis_angle(&Vector3::z_axis(), yaw),
        )
    }
}
