//! Uniform access to the three sensor models.
//!
//! `native` scoring is what each model produces on its own terms and is what
//! the particle filter weights with; `density` scoring applies the
//! conversions that make the models' outputs commensurable (probabilities
//! divided by endpoint chords for the reflection model, per-ray normalized
//! scores for the endpoint model) and is what the KL metrics consume.

use serde::{Deserialize, Serialize};

use crate::baselines::endpoint::{endpoint_ray_density, LikelihoodField};
use crate::baselines::reflection::{
    reflection_out_of_range_prob, reflection_ray_prob, reflection_to_density, ReflectionGrid,
};
use crate::decay_map::DecayGrid;
use crate::error::Result;
use crate::likelihood::{ray_log_likelihood, ScanScore};
use crate::pose::Pose;
use crate::scan::{Measurement, Reading, Scan};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Decay,
    Reflection,
    Endpoint,
}

impl ModelKind {
    pub const ALL: [ModelKind; 3] = [ModelKind::Decay, ModelKind::Reflection, ModelKind::Endpoint];

    pub fn name(&self) -> &'static str {
        match self {
            ModelKind::Decay => "decay",
            ModelKind::Reflection => "reflection",
            ModelKind::Endpoint => "endpoint",
        }
    }
}

impl std::str::FromStr for ModelKind {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "decay" => Ok(ModelKind::Decay),
            "reflection" => Ok(ModelKind::Reflection),
            "endpoint" => Ok(ModelKind::Endpoint),
            other => Err(format!(
                "unknown model '{other}' (expected decay, reflection, or endpoint)"
            )),
        }
    }
}

/// A borrowed map of any of the three kinds.
#[derive(Clone, Copy, Debug)]
pub enum SensorModel<'a> {
    Decay(&'a DecayGrid),
    Reflection(&'a ReflectionGrid),
    Endpoint(&'a LikelihoodField),
}

impl<'a> SensorModel<'a> {
    pub fn kind(&self) -> ModelKind {
        match self {
            SensorModel::Decay(_) => ModelKind::Decay,
            SensorModel::Reflection(_) => ModelKind::Reflection,
            SensorModel::Endpoint(_) => ModelKind::Endpoint,
        }
    }

    /// Unfloored log of the model's native per-ray output.
    pub fn ray_log_native(&self, m: &Measurement) -> Result<f64> {
        match self {
            SensorModel::Decay(map) => ray_log_likelihood(map, m),
            SensorModel::Reflection(map) => match m.reading {
                Reading::Range(_) => Ok(reflection_ray_prob(map, m)?.log_value),
                _ => Ok(reflection_out_of_range_prob(map, m)?.log_value),
            },
            SensorModel::Endpoint(field) => match m.reading {
                Reading::Range(r) => {
                    let d = match field.geometry().locate(&m.endpoint(r)) {
                        Some(i) => field.nearest_dist()[i],
                        None => f64::INFINITY,
                    };
                    Ok((1.0 - field.p_oor()).ln() - d * d / (2.0 * field.sigma() * field.sigma()))
                }
                _ => Ok((field.p_oor() / 2.0).ln()),
            },
        }
    }

    /// Unfloored log of the commensurable output: densities for range
    /// readings, absolute probabilities for out-of-range readings.
    pub fn ray_log_density(&self, m: &Measurement) -> Result<f64> {
        match self {
            SensorModel::Decay(map) => ray_log_likelihood(map, m),
            SensorModel::Reflection(map) => match m.reading {
                Reading::Range(_) => Ok(reflection_to_density(map, m)?.log_value),
                _ => Ok(reflection_out_of_range_prob(map, m)?.log_value),
            },
            SensorModel::Endpoint(field) => Ok(endpoint_ray_density(field, m).log_value),
        }
    }

    fn scan_score(
        &self,
        scan: &Scan,
        pose: &Pose,
        stride: usize,
        density: bool,
    ) -> Result<ScanScore> {
        let stride = stride.max(1);
        let mut score = ScanScore::default();
        for i in (0..scan.rays.len()).step_by(stride) {
            let m = scan.measurement_at(i, pose);
            let log_term = if density {
                self.ray_log_density(&m)?
            } else {
                self.ray_log_native(&m)?
            };
            score.accumulate(log_term);
        }
        Ok(score)
    }

    /// Floored sum of native log terms; the particle-filter weight update.
    pub fn scan_log_native(&self, scan: &Scan, pose: &Pose, stride: usize) -> Result<ScanScore> {
        self.scan_score(scan, pose, stride, false)
    }

    /// Floored sum of commensurable log terms; the KL-metric building block.
    pub fn scan_log_density(&self, scan: &Scan, pose: &Pose, stride: usize) -> Result<ScanScore> {
        self.scan_score(scan, pose, stride, true)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baselines::endpoint::{build_likelihood_field, EndpointParams};
    use crate::baselines::reflection::{build_reflection_map, ReflectionPriors};
    use crate::decay_map::{build_decay_map, MapPriors};
    use crate::grid::GridGeometry;
    use crate::scan::Ray;
    use nalgebra::{Point3, Vector3};

    fn fixture() -> (Vec<Scan>, GridGeometry) {
        let geom = GridGeometry::new(Point3::new(0.0, -2.0, -2.0), 1.0, [8, 4, 4]).unwrap();
        let scan = Scan {
            pose: Pose::translation(0.5, 0.0, 0.0),
            r_min: 0.2,
            r_max: 7.0,
            rays: vec![
                Ray {
                    direction: Vector3::x(),
                    reading: Reading::Range(3.2),
                },
                Ray {
                    direction: Vector3::new(1.0, 0.3, 0.0).normalize(),
                    reading: Reading::Range(2.4),
                },
                Ray {
                    direction: Vector3::new(1.0, -0.3, 0.1).normalize(),
                    reading: Reading::Sup,
                },
                Ray {
                    direction: Vector3::new(1.0, 0.1, -0.1).normalize(),
                    reading: Reading::Sub,
                },
            ],
        };
        (vec![scan], geom)
    }

    #[test]
    fn all_models_score_mixed_scans() {
        let (scans, geom) = fixture();
        let decay = build_decay_map(&scans, geom.clone(), MapPriors::default()).unwrap();
        let refl = build_reflection_map(&scans, geom.clone(), ReflectionPriors::default()).unwrap();
        let field = build_likelihood_field(&scans, geom, EndpointParams::default()).unwrap();
        for model in [
            SensorModel::Decay(&decay),
            SensorModel::Reflection(&refl),
            SensorModel::Endpoint(&field),
        ] {
            let native = model
                .scan_log_native(&scans[0], &scans[0].pose, 1)
                .unwrap();
            let dens = model
                .scan_log_density(&scans[0], &scans[0].pose, 1)
                .unwrap();
            assert_eq!(native.rays, 4);
            assert_eq!(dens.rays, 4);
            assert!(native.log_likelihood.is_finite());
            assert!(dens.log_likelihood.is_finite());
        }
    }

    #[test]
    fn stride_subsamples() {
        let (scans, geom) = fixture();
        let decay = build_decay_map(&scans, geom, MapPriors::default()).unwrap();
        let model = SensorModel::Decay(&decay);
        let s2 = model.scan_log_native(&scans[0], &scans[0].pose, 2).unwrap();
        assert_eq!(s2.rays, 2);
    }

    #[test]
    fn decay_native_equals_density() {
        let (scans, geom) = fixture();
        let decay = build_decay_map(&scans, geom, MapPriors::default()).unwrap();
        let model = SensorModel::Decay(&decay);
        for m in scans[0].measurements() {
            assert_eq!(
                model.ray_log_native(&m).unwrap(),
                model.ray_log_density(&m).unwrap()
            );
        }
    }
}
