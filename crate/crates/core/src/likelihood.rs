//! Decay-rate measurement model evaluation.
//!
//! All per-ray quantities are accumulated in log space. A ray's survival
//! log is `-sum(rate_i * d_i)` over its traversal, with travel outside the
//! grid weighted by the map's prior rate.

use std::ops::ControlFlow;

use crate::decay_map::DecayGrid;
use crate::error::{Error, Result};
use crate::grid::walk_ray;
use crate::pose::Pose;
use crate::scan::{Measurement, Reading, Scan};

/// Per-ray log terms below this floor are clamped and counted, so one
/// impossible ray cannot annihilate a whole scan or particle weight.
pub const LOG_FLOOR: f64 = -40.0;

/// Whether a per-ray value is a density (1/m) or a plain probability.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LikelihoodKind {
    Density,
    Probability,
}

/// A per-ray likelihood value together with its natural log.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RayLikelihood {
    pub kind: LikelihoodKind,
    pub value: f64,
    pub log_value: f64,
}

impl RayLikelihood {
    pub fn density(value: f64) -> Self {
        RayLikelihood {
            kind: LikelihoodKind::Density,
            value,
            log_value: value.ln(),
        }
    }

    pub fn density_from_log(log_value: f64) -> Self {
        RayLikelihood {
            kind: LikelihoodKind::Density,
            value: log_value.exp(),
            log_value,
        }
    }

    pub fn probability(value: f64) -> Self {
        debug_assert!((-1e-12..=1.0 + 1e-12).contains(&value));
        RayLikelihood {
            kind: LikelihoodKind::Probability,
            value,
            log_value: value.ln(),
        }
    }

    pub fn probability_from_log(log_value: f64) -> Self {
        RayLikelihood {
            kind: LikelihoodKind::Probability,
            value: log_value.exp(),
            log_value,
        }
    }
}

/// log N(r): negative accumulated optical depth along the first `r` meters.
pub fn log_survival(map: &DecayGrid, m: &Measurement, r: f64) -> Result<f64> {
    if r.is_nan() || r < 0.0 {
        return Err(Error::invalid(format!("survival distance must be >= 0, got {r}")));
    }
    let origin = m.origin();
    let dir = m.world_direction();
    let mut depth = 0.0;
    walk_ray(map.geometry(), &origin, &dir, r, |cell, len| {
        depth += map.rate_at(cell) * len;
        ControlFlow::Continue(())
    })?;
    Ok(-depth)
}

/// N(r): probability that the ray travels at least `r` meters unreflected.
pub fn survival(map: &DecayGrid, m: &Measurement, r: f64) -> Result<f64> {
    Ok(log_survival(map, m, r)?.exp())
}

/// Density of a range reading: endpoint-voxel rate times survival.
pub fn ray_density(map: &DecayGrid, m: &Measurement) -> Result<RayLikelihood> {
    let r = match m.reading {
        Reading::Range(r) => r,
        _ => {
            return Err(Error::invalid(
                "ray_density requires a range reading; use out_of_range_prob",
            ))
        }
    };
    let log_n = log_survival(map, m, r)?;
    let rate = map.rate_at(map.geometry().locate(&m.endpoint(r)));
    Ok(RayLikelihood::density_from_log(rate.ln() + log_n))
}

/// Probability mass of an out-of-range reading: everything below the lower
/// sensor limit for `Sub`, the surviving tail beyond the upper limit for `Sup`.
pub fn out_of_range_prob(map: &DecayGrid, m: &Measurement) -> Result<RayLikelihood> {
    match m.reading {
        Reading::Sub => {
            let log_n = log_survival(map, m, m.r_min)?;
            let value = -log_n.exp_m1(); // 1 - N(r_min), stable near 0
            Ok(RayLikelihood::probability(value))
        }
        Reading::Sup => {
            let log_n = log_survival(map, m, m.r_max)?;
            Ok(RayLikelihood::probability_from_log(log_n))
        }
        Reading::Range(_) => Err(Error::invalid(
            "out_of_range_prob requires a sub or sup reading",
        )),
    }
}

/// Unfloored log term of one measurement under the decay model.
pub fn ray_log_likelihood(map: &DecayGrid, m: &Measurement) -> Result<f64> {
    match m.reading {
        Reading::Range(_) => Ok(ray_density(map, m)?.log_value),
        _ => Ok(out_of_range_prob(map, m)?.log_value),
    }
}

/// Sum of floored per-ray log terms for one scan.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ScanScore {
    pub log_likelihood: f64,
    /// Rays actually evaluated (after subsampling).
    pub rays: usize,
    /// Rays whose log term was clamped to the floor.
    pub floored: usize,
}

impl ScanScore {
    pub(crate) fn accumulate(&mut self, log_term: f64) {
        self.rays += 1;
        if log_term.is_nan() || log_term < LOG_FLOOR {
            self.log_likelihood += LOG_FLOOR;
            self.floored += 1;
        } else {
            self.log_likelihood += log_term;
        }
    }
}

/// Scan log-likelihood with the scan evaluated from an arbitrary pose,
/// visiting every `stride`-th ray.
pub fn scan_log_likelihood_at(
    map: &DecayGrid,
    scan: &Scan,
    pose: &Pose,
    stride: usize,
) -> Result<ScanScore> {
    let stride = stride.max(1);
    let mut score = ScanScore::default();
    for i in (0..scan.rays.len()).step_by(stride) {
        let m = scan.measurement_at(i, pose);
        score.accumulate(ray_log_likelihood(map, &m)?);
    }
    Ok(score)
}

/// Scan log-likelihood at the scan's own pose over all rays.
pub fn scan_log_likelihood(map: &DecayGrid, scan: &Scan) -> Result<ScanScore> {
    scan_log_likelihood_at(map, scan, &scan.pose, 1)
}
