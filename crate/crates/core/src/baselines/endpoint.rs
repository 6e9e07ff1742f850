//! Endpoint model: a likelihood field over distance to the nearest mapped
//! reflection. Scores depend only on where a ray ends, not on what it
//! crossed on the way.

use nalgebra::Point3;

use super::edt::squared_edt_3d;
use crate::error::{Error, Result};
use crate::grid::GridGeometry;
use crate::likelihood::RayLikelihood;
use crate::scan::{Measurement, Reading, Scan};

pub const DEFAULT_SIGMA: f64 = 0.2;
pub const DEFAULT_P_OOR: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EndpointParams {
    /// Gaussian kernel width over nearest-endpoint distance, meters.
    pub sigma: f64,
    /// Total prior probability of an out-of-range reading, split evenly
    /// between sub and sup.
    pub p_oor: f64,
}

impl Default for EndpointParams {
    fn default() -> Self {
        EndpointParams {
            sigma: DEFAULT_SIGMA,
            p_oor: DEFAULT_P_OOR,
        }
    }
}

/// Distance map over voxel centers to the nearest mapped range endpoint.
#[derive(Clone, Debug)]
pub struct LikelihoodField {
    geom: GridGeometry,
    nearest_dist: Vec<f64>,
    sigma: f64,
    p_oor: f64,
}

impl LikelihoodField {
    pub fn from_raw(
        geom: GridGeometry,
        nearest_dist: Vec<f64>,
        sigma: f64,
        p_oor: f64,
    ) -> Result<Self> {
        if nearest_dist.len() != geom.voxel_count() {
            return Err(Error::invalid("field array length mismatch"));
        }
        if sigma.is_nan() || sigma <= 0.0 {
            return Err(Error::invalid("sigma must be positive"));
        }
        if !(p_oor > 0.0 && p_oor < 1.0) {
            return Err(Error::invalid("p_oor must lie in (0, 1)"));
        }
        Ok(LikelihoodField {
            geom,
            nearest_dist,
            sigma,
            p_oor,
        })
    }

    pub fn geometry(&self) -> &GridGeometry {
        &self.geom
    }

    pub fn nearest_dist(&self) -> &[f64] {
        &self.nearest_dist
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn p_oor(&self) -> f64 {
        self.p_oor
    }

    /// Unnormalized Gaussian score of a point; zero outside the grid.
    pub fn score(&self, point: &Point3<f64>) -> f64 {
        match self.geom.locate(point) {
            Some(i) => {
                let d = self.nearest_dist[i];
                (-d * d / (2.0 * self.sigma * self.sigma)).exp()
            }
            None => 0.0,
        }
    }
}

/// Build the field from the range endpoints of `scans`.
pub fn build_likelihood_field(
    scans: &[Scan],
    geom: GridGeometry,
    params: EndpointParams,
) -> Result<LikelihoodField> {
    let mut occupied = vec![false; geom.voxel_count()];
    let mut any = false;
    for scan in scans {
        for m in scan.measurements() {
            if let Reading::Range(r) = m.reading {
                if let Some(i) = geom.locate(&m.endpoint(r)) {
                    occupied[i] = true;
                    any = true;
                }
            }
        }
    }
    if !any {
        return Err(Error::invalid(
            "cannot build a likelihood field without any range endpoints in the grid",
        ));
    }
    let sq = squared_edt_3d(&occupied, geom.dims());
    let edge = geom.edge_length();
    let nearest_dist = sq.iter().map(|&s| s.sqrt() * edge).collect();
    LikelihoodField::from_raw(geom, nearest_dist, params.sigma, params.p_oor)
}

/// Number of quadrature steps per voxel edge in the per-ray normalizer.
const STEPS_PER_EDGE: f64 = 4.0;

/// Integral of the unnormalized score over the sensor range along the ray.
pub fn ray_score_integral(field: &LikelihoodField, m: &Measurement) -> f64 {
    let span = m.r_max - m.r_min;
    if span <= 0.0 {
        return 0.0;
    }
    let step = field.geom.edge_length() / STEPS_PER_EDGE;
    let n = (span / step).ceil().max(1.0) as usize;
    let h = span / n as f64;
    let origin = m.origin();
    let dir = m.world_direction();
    let mut sum = 0.0;
    for i in 0..n {
        let r = m.r_min + (i as f64 + 0.5) * h;
        sum += field.score(&(origin + dir * r));
    }
    sum * h
}

/// Per-ray output of the endpoint model: out-of-range readings get the flat
/// prior, range readings a Gaussian score normalized along this ray so the
/// in-range density integrates to 1 - p_oor.
pub fn endpoint_ray_density(field: &LikelihoodField, m: &Measurement) -> RayLikelihood {
    match m.reading {
        Reading::Sub | Reading::Sup => RayLikelihood::probability(field.p_oor / 2.0),
        Reading::Range(r) => {
            let g = field.score(&m.endpoint(r));
            let z = ray_score_integral(field, m);
            if g <= 0.0 || z <= 0.0 {
                RayLikelihood::density(0.0)
            } else {
                RayLikelihood::density((1.0 - field.p_oor) * g / z)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pose::Pose;
    use crate::scan::Ray;
    use nalgebra::{Point3, Vector3};

    fn scan_with_endpoints(points: &[[f64; 3]]) -> Scan {
        // One range ray per endpoint, shot from the origin.
        let rays = points
            .iter()
            .map(|p| {
                let v = Vector3::new(p[0], p[1], p[2]);
                Ray {
                    direction: v.normalize(),
                    reading: Reading::Range(v.norm()),
                }
            })
            .collect();
        Scan {
            pose: Pose::identity(),
            r_min: 0.0,
            r_max: 100.0,
            rays,
        }
    }

    #[test]
    fn field_zero_at_endpoints_one_at_face_neighbor() {
        let geom = GridGeometry::new(Point3::new(0.0, 0.0, 0.0), 1.0, [3, 1, 1]).unwrap();
        let scan = scan_with_endpoints(&[[0.5, 0.5, 0.5]]);
        let field = build_likelihood_field(&[scan], geom, EndpointParams::default()).unwrap();
        assert_eq!(field.nearest_dist()[0], 0.0);
        assert!((field.nearest_dist()[1] - 1.0).abs() < 1e-12);
        assert!((field.nearest_dist()[2] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn no_endpoints_is_an_error() {
        let geom = GridGeometry::new(Point3::origin(), 1.0, [2, 2, 2]).unwrap();
        let scan = Scan {
            pose: Pose::identity(),
            r_min: 0.0,
            r_max: 10.0,
            rays: vec![Ray {
                direction: Vector3::x(),
                reading: Reading::Sup,
            }],
        };
        assert!(build_likelihood_field(&[scan], geom, EndpointParams::default()).is_err());
    }

    #[test]
    fn field_matches_brute_force_on_sparse_points() {
        let geom = GridGeometry::new(Point3::new(-2.0, -2.0, -1.0), 0.5, [9, 8, 5]).unwrap();
        let mut rng = crate::rng::SplitMix64::new(314);
        let mut points = Vec::new();
        for _ in 0..12 {
            points.push([
                -2.0 + rng.next_f64() * 4.4,
                -2.0 + rng.next_f64() * 3.9,
                -1.0 + rng.next_f64() * 2.4,
            ]);
        }
        // Rays from a pose inside the grid so every endpoint lands in-grid.
        let rays: Vec<Ray> = points
            .iter()
            .map(|p| {
                let v = Vector3::new(p[0], p[1], p[2]) - Vector3::new(-1.9, -1.9, -0.9);
                Ray {
                    direction: v.normalize(),
                    reading: Reading::Range(v.norm()),
                }
            })
            .collect();
        let scan = Scan {
            pose: Pose::translation(-1.9, -1.9, -0.9),
            r_min: 0.0,
            r_max: 100.0,
            rays,
        };
        let field =
            build_likelihood_field(std::slice::from_ref(&scan), geom.clone(), EndpointParams::default())
                .unwrap();

        // Brute force over occupied voxel centers.
        let occupied: Vec<usize> = scan
            .measurements()
            .filter_map(|m| match m.reading {
                Reading::Range(r) => geom.locate(&m.endpoint(r)),
                _ => None,
            })
            .collect();
        for i in 0..geom.voxel_count() {
            let c = geom.voxel_center(i);
            let want = occupied
                .iter()
                .map(|&j| (geom.voxel_center(j) - c).norm())
                .fold(f64::INFINITY, f64::min);
            assert!(
                (field.nearest_dist()[i] - want).abs() < 1e-9,
                "voxel {i}: {} vs {}",
                field.nearest_dist()[i],
                want
            );
        }
    }

    #[test]
    fn mapped_endpoint_maximizes_density_along_ray() {
        let geom = GridGeometry::new(Point3::new(0.0, -2.5, -2.5), 1.0, [10, 5, 5]).unwrap();
        let map_scan = scan_with_endpoints(&[[6.5, 0.5, 0.5]]);
        let field = build_likelihood_field(&[map_scan], geom, EndpointParams::default()).unwrap();
        let m = |r: f64| Measurement {
            sensor_pose: Pose::translation(0.0, 0.5, 0.5),
            direction: Vector3::x(),
            reading: Reading::Range(r),
            r_min: 0.5,
            r_max: 9.5,
        };
        let at_endpoint = endpoint_ray_density(&field, &m(6.5)).value;
        for k in 1..19 {
            let r = 0.5 * k as f64;
            let d = endpoint_ray_density(&field, &m(r)).value;
            assert!(d <= at_endpoint + 1e-12, "r={r}: {d} > {at_endpoint}");
        }
        assert!(at_endpoint > 0.0);
    }

    #[test]
    fn out_of_range_prior_split() {
        let geom = GridGeometry::new(Point3::origin(), 1.0, [2, 1, 1]).unwrap();
        let scan = scan_with_endpoints(&[[0.5, 0.5, 0.5]]);
        let field = build_likelihood_field(
            &[scan],
            geom,
            EndpointParams {
                sigma: 0.2,
                p_oor: 0.1,
            },
        )
        .unwrap();
        let m = Measurement {
            sensor_pose: Pose::identity(),
            direction: Vector3::x(),
            reading: Reading::Sub,
            r_min: 0.5,
            r_max: 10.0,
        };
        let p = endpoint_ray_density(&field, &m);
        assert!((p.value - 0.05).abs() < 1e-15);
    }

    #[test]
    fn density_normalizes_with_same_quadrature() {
        let geom = GridGeometry::new(Point3::new(0.0, -2.0, -2.0), 0.5, [20, 8, 8]).unwrap();
        let map_scan = scan_with_endpoints(&[[4.2, 0.3, 0.1], [7.1, -0.4, 0.2], [2.3, 1.1, -0.6]]);
        let field = build_likelihood_field(&[map_scan], geom, EndpointParams::default()).unwrap();
        let base = Measurement {
            sensor_pose: Pose::translation(0.1, 0.2, 0.0),
            direction: Vector3::new(1.0, 0.05, 0.02).normalize(),
            reading: Reading::Range(1.0),
            r_min: 0.4,
            r_max: 9.0,
        };
        // Integrate the returned density over the sensor range on the
        // normalizer's own grid; with P(sub) + P(sup) the mass must be 1.
        let step = field.geometry().edge_length() / 4.0;
        let n = ((base.r_max - base.r_min) / step).ceil() as usize;
        let h = (base.r_max - base.r_min) / n as f64;
        let mut integral = 0.0;
        for i in 0..n {
            let r = base.r_min + (i as f64 + 0.5) * h;
            let mut m = base;
            m.reading = Reading::Range(r);
            integral += endpoint_ray_density(&field, &m).value * h;
        }
        let mut sub = base;
        sub.reading = Reading::Sub;
        let mut sup = base;
        sup.reading = Reading::Sup;
        let total = integral
            + endpoint_ray_density(&field, &sub).value
            + endpoint_ray_density(&field, &sup).value;
        assert!((total - 1.0).abs() < 1e-6, "total {total}");
    }
}
