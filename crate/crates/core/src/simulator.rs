//! Synthetic ground-truth worlds and forward-model scan sampling.
//!
//! Readings are drawn by inverse-CDF sampling of the piecewise-exponential
//! survival along each ray, so sampled scans follow exactly the density the
//! likelihood module evaluates.

use std::ops::ControlFlow;

use nalgebra::{Point3, Vector3};
use serde::{Deserialize, Serialize};

use crate::decay_map::DecayGrid;
use crate::error::{Error, Result};
use crate::grid::{walk_ray, GridGeometry};
use crate::pose::{Pose, PoseSpec};
use crate::rng::{SplitMix64, STREAM_CORRUPT, STREAM_SCAN};
use crate::scan::{Measurement, Ray, Reading, Scan};

/// Grid geometry as written in JSON configs.
#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GeometrySpec {
    pub origin: [f64; 3],
    pub edge_length: f64,
    pub dims: [u32; 3],
}

impl GeometrySpec {
    pub fn to_geometry(&self) -> Result<GridGeometry> {
        GridGeometry::new(
            Point3::new(self.origin[0], self.origin[1], self.origin[2]),
            self.edge_length,
            [
                self.dims[0] as usize,
                self.dims[1] as usize,
                self.dims[2] as usize,
            ],
        )
    }
}

/// Solid primitives filled with a constant decay rate.
#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "shape", rename_all = "snake_case", deny_unknown_fields)]
pub enum Primitive {
    /// Axis-aligned box given by center and full extents.
    Box {
        center: [f64; 3],
        size: [f64; 3],
        rate: f64,
    },
    Sphere {
        center: [f64; 3],
        radius: f64,
        rate: f64,
    },
    /// Vertical cylinder between two z planes.
    Cylinder {
        center: [f64; 2],
        radius: f64,
        z_min: f64,
        z_max: f64,
        rate: f64,
    },
}

impl Primitive {
    fn rate(&self) -> f64 {
        match *self {
            Primitive::Box { rate, .. }
            | Primitive::Sphere { rate, .. }
            | Primitive::Cylinder { rate, .. } => rate,
        }
    }

    fn contains(&self, p: &Point3<f64>) -> bool {
        match *self {
            Primitive::Box { center, size, .. } => (0..3).all(|a| {
                let half = size[a] * 0.5;
                p[a] >= center[a] - half && p[a] <= center[a] + half
            }),
            Primitive::Sphere { center, radius, .. } => {
                let d = Vector3::new(p.x - center[0], p.y - center[1], p.z - center[2]);
                d.norm_squared() <= radius * radius
            }
            Primitive::Cylinder {
                center,
                radius,
                z_min,
                z_max,
                ..
            } => {
                let dx = p.x - center[0];
                let dy = p.y - center[1];
                dx * dx + dy * dy <= radius * radius && p.z >= z_min && p.z <= z_max
            }
        }
    }

    /// World-space bounding box, `(min, max)`.
    fn bounds(&self) -> (Point3<f64>, Point3<f64>) {
        match *self {
            Primitive::Box { center, size, .. } => (
                Point3::new(
                    center[0] - size[0] * 0.5,
                    center[1] - size[1] * 0.5,
                    center[2] - size[2] * 0.5,
                ),
                Point3::new(
                    center[0] + size[0] * 0.5,
                    center[1] + size[1] * 0.5,
                    center[2] + size[2] * 0.5,
                ),
            ),
            Primitive::Sphere { center, radius, .. } => (
                Point3::new(center[0] - radius, center[1] - radius, center[2] - radius),
                Point3::new(center[0] + radius, center[1] + radius, center[2] + radius),
            ),
            Primitive::Cylinder {
                center,
                radius,
                z_min,
                z_max,
                ..
            } => (
                Point3::new(center[0] - radius, center[1] - radius, z_min),
                Point3::new(center[0] + radius, center[1] + radius, z_max),
            ),
        }
    }
}

/// A synthetic world: geometry, primitives, and the rate everywhere else.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct WorldSpec {
    pub geometry: GeometrySpec,
    #[serde(default)]
    pub primitives: Vec<Primitive>,
    pub background_rate: f64,
    pub seed: u64,
}

/// Fill each voxel with the rate of the last primitive covering its center,
/// or the background rate. The grid's outside prior is the background rate.
pub fn rasterize_world(spec: &WorldSpec) -> Result<DecayGrid> {
    if spec.background_rate < 0.0 || spec.primitives.iter().any(|p| p.rate() < 0.0) {
        return Err(Error::invalid("world rates must be nonnegative"));
    }
    let geom = spec.geometry.to_geometry()?;
    let mut rates = vec![spec.background_rate; geom.voxel_count()];
    let edge = geom.edge_length();
    let dims = geom.dims();
    for prim in &spec.primitives {
        let (lo, hi) = prim.bounds();
        let mut kmin = [0usize; 3];
        let mut kmax = [0usize; 3];
        let mut empty = false;
        for a in 0..3 {
            let lo_k = ((lo[a] - geom.origin()[a]) / edge).floor() as i64;
            let hi_k = ((hi[a] - geom.origin()[a]) / edge).ceil() as i64;
            if hi_k < 0 || lo_k >= dims[a] as i64 {
                empty = true;
                break;
            }
            kmin[a] = lo_k.max(0) as usize;
            kmax[a] = (hi_k as usize).min(dims[a] - 1);
        }
        if empty {
            continue;
        }
        for iz in kmin[2]..=kmax[2] {
            for iy in kmin[1]..=kmax[1] {
                for ix in kmin[0]..=kmax[0] {
                    let idx = geom.linear_index([ix, iy, iz]);
                    if prim.contains(&geom.voxel_center(idx)) {
                        rates[idx] = prim.rate();
                    }
                }
            }
        }
    }
    DecayGrid::from_rates(geom, rates, spec.background_rate, spec.background_rate)
}

/// Scan pattern and sensor limits.
#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ScanSpec {
    pub azimuth_count: usize,
    pub elevation_count: usize,
    pub elevation_min_deg: f64,
    pub elevation_max_deg: f64,
    pub r_min: f64,
    pub r_max: f64,
    /// Fraction of readings independently replaced by sensor failures.
    #[serde(default)]
    pub failure_rate: f64,
}

impl ScanSpec {
    pub fn validate(&self) -> Result<()> {
        if self.azimuth_count == 0 || self.elevation_count == 0 {
            return Err(Error::invalid("scan pattern must have at least one ray"));
        }
        if !(self.r_min >= 0.0 && self.r_min < self.r_max) {
            return Err(Error::invalid(format!(
                "sensor limits must satisfy 0 <= r_min < r_max, got [{}, {}]",
                self.r_min, self.r_max
            )));
        }
        if !(0.0..=1.0).contains(&self.failure_rate) {
            return Err(Error::invalid(format!(
                "failure_rate must lie in [0, 1], got {}",
                self.failure_rate
            )));
        }
        Ok(())
    }

    /// Sensor-frame unit directions on the azimuth x elevation grid.
    pub fn directions(&self) -> Vec<Vector3<f64>> {
        let mut dirs = Vec::with_capacity(self.azimuth_count * self.elevation_count);
        for ie in 0..self.elevation_count {
            let el = if self.elevation_count == 1 {
                0.5 * (self.elevation_min_deg + self.elevation_max_deg)
            } else {
                self.elevation_min_deg
                    + (self.elevation_max_deg - self.elevation_min_deg) * ie as f64
                        / (self.elevation_count - 1) as f64
            }
            .to_radians();
            for ia in 0..self.azimuth_count {
                let az = std::f64::consts::TAU * ia as f64 / self.azimuth_count as f64;
                dirs.push(Vector3::new(
                    el.cos() * az.cos(),
                    el.cos() * az.sin(),
                    el.sin(),
                ));
            }
        }
        dirs
    }
}

/// Draw one reading by inverse-CDF sampling: reflect where the accumulated
/// optical depth reaches `-ln u`, classified against the sensor limits.
pub fn sample_ray(
    map: &DecayGrid,
    pose: &Pose,
    direction: &Vector3<f64>,
    r_min: f64,
    r_max: f64,
    rng: &mut SplitMix64,
) -> Result<Measurement> {
    let dir_world = pose.rotation.transform_vector(direction).normalize();
    let origin = Point3::from(pose.translation.vector);
    let target = -rng.next_open01().ln();
    let mut depth = 0.0;
    let mut traveled = 0.0;
    let mut hit_r: Option<f64> = None;
    walk_ray(map.geometry(), &origin, &dir_world, r_max, |cell, len| {
        let rate = map.rate_at(cell);
        let segment_depth = rate * len;
        if rate > 0.0 && depth + segment_depth >= target {
            hit_r = Some(traveled + (target - depth) / rate);
            return ControlFlow::Break(());
        }
        depth += segment_depth;
        traveled += len;
        ControlFlow::Continue(())
    })?;
    let reading = match hit_r {
        None => Reading::Sup,
        Some(r) if r < r_min => Reading::Sub,
        Some(r) => Reading::Range(r.min(r_max)),
    };
    Ok(Measurement {
        sensor_pose: *pose,
        direction: *direction,
        reading,
        r_min,
        r_max,
    })
}

/// Sample a full scan. Every ray uses its own substream of
/// `(seed, scan_index, ray_index)`, so results do not depend on evaluation
/// order, and the failure corruption is applied at the configured rate.
pub fn sample_scan(
    map: &DecayGrid,
    pose: &Pose,
    spec: &ScanSpec,
    seed: u64,
    scan_index: u64,
) -> Result<Scan> {
    spec.validate()?;
    let dirs = spec.directions();
    let mut rays = Vec::with_capacity(dirs.len());
    for (ray_index, dir) in dirs.iter().enumerate() {
        let mut rng = SplitMix64::substream(seed, &[STREAM_SCAN, scan_index, ray_index as u64]);
        let m = sample_ray(map, pose, dir, spec.r_min, spec.r_max, &mut rng)?;
        rays.push(Ray {
            direction: *dir,
            reading: m.reading,
        });
    }
    let mut scan = Scan {
        pose: *pose,
        r_min: spec.r_min,
        r_max: spec.r_max,
        rays,
    };
    if spec.failure_rate > 0.0 {
        corrupt_scan(&mut scan, spec.failure_rate, seed, scan_index);
    }
    Ok(scan)
}

/// Replace each reading independently with a below-range failure with the
/// given probability.
pub fn corrupt_scan(scan: &mut Scan, failure_rate: f64, seed: u64, scan_index: u64) {
    assert!((0.0..=1.0).contains(&failure_rate));
    for (ray_index, ray) in scan.rays.iter_mut().enumerate() {
        let mut rng = SplitMix64::substream(seed, &[STREAM_CORRUPT, scan_index, ray_index as u64]);
        if rng.next_f64() < failure_rate {
            ray.reading = Reading::Sub;
        }
    }
}

/// A straight or arcing trajectory: a start pose plus a constant body-frame
/// step applied `steps - 1` times.
#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct TrajectorySpec {
    pub start: PoseSpec,
    /// Body-frame translation per step, meters.
    pub step_translation: [f64; 3],
    /// Yaw change per step, degrees.
    #[serde(default)]
    pub step_yaw_deg: f64,
    pub steps: usize,
}

impl TrajectorySpec {
    pub fn step_delta(&self) -> Pose {
        PoseSpec {
            position: self.step_translation,
            yaw_deg: self.step_yaw_deg,
        }
        .to_pose()
    }

    pub fn poses(&self) -> Vec<Pose> {
        let delta = self.step_delta();
        let mut poses = Vec::with_capacity(self.steps);
        let mut pose = self.start.to_pose();
        for _ in 0..self.steps {
            poses.push(pose);
            pose *= delta;
        }
        poses
    }
}
