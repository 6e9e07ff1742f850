//! Range measurements and scans.

use nalgebra::{Point3, Vector3};

use crate::error::{Error, Result};
use crate::pose::Pose;

/// One lidar return: below range, a real distance, or beyond range.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Reading {
    Sub,
    Range(f64),
    Sup,
}

impl Reading {
    pub fn is_range(&self) -> bool {
        matches!(self, Reading::Range(_))
    }
}

/// One ray of a scan, direction in the sensor frame.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ray {
    pub direction: Vector3<f64>,
    pub reading: Reading,
}

/// A full scan taken from one pose. All rays share the sensor range limits.
#[derive(Clone, Debug)]
pub struct Scan {
    pub pose: Pose,
    pub r_min: f64,
    pub r_max: f64,
    pub rays: Vec<Ray>,
}

impl Scan {
    /// Counts of (sub, range, sup) readings.
    pub fn kind_counts(&self) -> (usize, usize, usize) {
        let mut counts = (0, 0, 0);
        for ray in &self.rays {
            match ray.reading {
                Reading::Sub => counts.0 += 1,
                Reading::Range(_) => counts.1 += 1,
                Reading::Sup => counts.2 += 1,
            }
        }
        counts
    }

    /// The i-th ray as a standalone measurement, optionally re-posed.
    pub fn measurement_at(&self, index: usize, pose: &Pose) -> Measurement {
        let ray = &self.rays[index];
        Measurement {
            sensor_pose: *pose,
            direction: ray.direction,
            reading: ray.reading,
            r_min: self.r_min,
            r_max: self.r_max,
        }
    }

    pub fn measurement(&self, index: usize) -> Measurement {
        self.measurement_at(index, &self.pose)
    }

    pub fn measurements(&self) -> impl Iterator<Item = Measurement> + '_ {
        (0..self.rays.len()).map(move |i| self.measurement(i))
    }
}

/// A single ray measurement with everything needed to evaluate it.
#[derive(Clone, Copy, Debug)]
pub struct Measurement {
    pub sensor_pose: Pose,
    /// Unit direction in the sensor frame.
    pub direction: Vector3<f64>,
    pub reading: Reading,
    pub r_min: f64,
    pub r_max: f64,
}

impl Measurement {
    pub fn origin(&self) -> Point3<f64> {
        Point3::from(self.sensor_pose.translation.vector)
    }

    /// World-frame unit direction. Renormalized because directions may have
    /// passed through f32 storage.
    pub fn world_direction(&self) -> Vector3<f64> {
        self.sensor_pose
            .rotation
            .transform_vector(&self.direction)
            .normalize()
    }

    /// World-frame reflection point; only meaningful for `Range` readings.
    pub fn endpoint(&self, r: f64) -> Point3<f64> {
        self.origin() + self.world_direction() * r
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r_min >= 0.0 && self.r_min < self.r_max) {
            return Err(Error::invalid(format!(
                "sensor limits must satisfy 0 <= r_min < r_max, got [{}, {}]",
                self.r_min, self.r_max
            )));
        }
        if let Reading::Range(r) = self.reading {
            if !(r >= self.r_min && r <= self.r_max) {
                return Err(Error::invalid(format!(
                    "range reading {r} outside sensor limits [{}, {}]",
                    self.r_min, self.r_max
                )));
            }
        }
        Ok(())
    }
}
