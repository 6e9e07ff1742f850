//! Model-quality metrics and the three-way model comparison.
//!
//! Forward KL proxy: negative log-likelihood of all measurements at the true
//! poses (constant offset dropped). Inverse KL: divergence of the pose
//! likelihood, normalized over poses sampled around the truth, from a
//! Gaussian ground-truth surrogate evaluated at the same samples.

use std::collections::BTreeMap;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mcl::{mean_position_error, run_localization, FilterConfig, OdometryNoise};
use crate::model::{ModelKind, SensorModel};
use crate::parallel::map_indexed;
use crate::pose::{pose_from_parts, Pose};
use crate::rng::{SplitMix64, STREAM_EVAL};
use crate::scan::Scan;

fn default_sample_count() -> usize {
    50
}

fn default_sample_radius() -> f64 {
    2.5
}

fn default_gt_sigma() -> f64 {
    0.3
}

fn default_ray_stride() -> usize {
    1
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct EvalConfig {
    /// Poses sampled around the truth for the inverse KL.
    pub sample_count: usize,
    /// Radius of the horizontal sampling disc, meters.
    pub sample_radius: f64,
    /// Horizontal standard deviation of the Gaussian ground-truth
    /// surrogate, meters.
    pub gt_sigma: f64,
    /// Evaluate every n-th ray.
    pub ray_stride: usize,
    /// Evaluate the surrogate as a raw density instead of renormalizing it
    /// over the samples.
    pub raw_surrogate: bool,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            sample_count: default_sample_count(),
            sample_radius: default_sample_radius(),
            gt_sigma: default_gt_sigma(),
            ray_stride: default_ray_stride(),
            raw_surrogate: false,
        }
    }
}

impl EvalConfig {
    pub fn validate(&self) -> Result<()> {
        if self.sample_count < 2 {
            return Err(Error::invalid("sample_count must be >= 2"));
        }
        if self.sample_radius.is_nan() || self.sample_radius <= 0.0 {
            return Err(Error::invalid("sample_radius must be positive"));
        }
        if self.gt_sigma.is_nan() || self.gt_sigma <= 0.0 {
            return Err(Error::invalid("gt_sigma must be positive"));
        }
        if self.ray_stride == 0 {
            return Err(Error::invalid("ray_stride must be >= 1"));
        }
        Ok(())
    }
}

/// Negative summed log-likelihood of every scan at its true pose, using the
/// commensurable (density-converted) outputs. Per-scan terms are summed in
/// sorted order, so the result is exactly invariant under ray reordering.
pub fn forward_kl(
    model: &SensorModel,
    scans: &[Scan],
    stride: usize,
    threads: usize,
) -> Result<f64> {
    let stride = stride.max(1);
    let per_scan = map_indexed(scans, threads, |_, scan| -> Result<f64> {
        let mut terms = Vec::with_capacity(scan.rays.len() / stride + 1);
        for i in (0..scan.rays.len()).step_by(stride) {
            let m = scan.measurement(i);
            let log_term = model.ray_log_density(&m)?;
            terms.push(if log_term.is_nan() || log_term < crate::likelihood::LOG_FLOOR {
                crate::likelihood::LOG_FLOOR
            } else {
                log_term
            });
        }
        terms.sort_by(f64::total_cmp);
        Ok(terms.iter().sum())
    });
    let mut total = 0.0;
    for score in per_scan {
        total += score?;
    }
    Ok(-total)
}

/// Inverse KL of one scan; `valid` is false when every sampled pose scored
/// only floored rays, which makes the normalized posterior meaningless.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InverseKl {
    pub value: f64,
    pub valid: bool,
}

/// Sample offsets in the horizontal disc: orientation is kept at the truth
/// and only x/y translation varies.
fn disc_offsets(config: &EvalConfig, seed: u64, scan_index: u64) -> Vec<Vector3<f64>> {
    (0..config.sample_count)
        .map(|i| {
            let mut rng = SplitMix64::substream(seed, &[STREAM_EVAL, scan_index, i as u64]);
            let radius = config.sample_radius * rng.next_f64().sqrt();
            let angle = std::f64::consts::TAU * rng.next_f64();
            Vector3::new(radius * angle.cos(), radius * angle.sin(), 0.0)
        })
        .collect()
}

pub fn inverse_kl(
    model: &SensorModel,
    scan: &Scan,
    true_pose: &Pose,
    config: &EvalConfig,
    seed: u64,
    scan_index: u64,
    threads: usize,
) -> Result<InverseKl> {
    config.validate()?;
    let offsets = disc_offsets(config, seed, scan_index);
    let scores = map_indexed(&offsets, threads, |_, offset| {
        let pose = pose_from_parts(
            (true_pose.translation.vector + offset).into(),
            true_pose.rotation,
        );
        model.scan_log_density(scan, &pose, config.ray_stride)
    });
    let mut log_lik = Vec::with_capacity(offsets.len());
    let mut all_floored = true;
    for score in scores {
        let score = score?;
        if score.rays == 0 || score.floored < score.rays {
            all_floored = false;
        }
        log_lik.push(score.log_likelihood);
    }

    // Normalize the pose likelihood over the samples.
    let max = log_lik.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut posterior: Vec<f64> = log_lik.iter().map(|l| (l - max).exp()).collect();
    let sum: f64 = posterior.iter().sum();
    for p in &mut posterior {
        *p /= sum;
    }

    // Gaussian surrogate at the same samples.
    let two_sigma_sq = 2.0 * config.gt_sigma * config.gt_sigma;
    let surrogate_raw: Vec<f64> = offsets
        .iter()
        .map(|o| {
            let d2 = o.x * o.x + o.y * o.y;
            (-d2 / two_sigma_sq).exp() / (std::f64::consts::PI * two_sigma_sq)
        })
        .collect();
    let surrogate: Vec<f64> = if config.raw_surrogate {
        surrogate_raw
    } else {
        let z: f64 = surrogate_raw.iter().sum();
        surrogate_raw.iter().map(|g| g / z).collect()
    };

    let mut kl = 0.0;
    for (p, g) in posterior.iter().zip(&surrogate) {
        if *p > 0.0 {
            kl += p * (p / g).ln();
        }
    }
    Ok(InverseKl {
        value: kl,
        valid: !all_floored,
    })
}

/// Mean inverse KL across scans, plus how many scans were invalid.
pub fn inverse_kl_mean(
    model: &SensorModel,
    scans: &[Scan],
    config: &EvalConfig,
    seed: u64,
    threads: usize,
) -> Result<(f64, usize)> {
    let mut sum = 0.0;
    let mut valid = 0usize;
    let mut invalid = 0usize;
    for (i, scan) in scans.iter().enumerate() {
        let kl = inverse_kl(model, scan, &scan.pose, config, seed, i as u64, threads)?;
        if kl.valid {
            sum += kl.value;
            valid += 1;
        } else {
            invalid += 1;
        }
    }
    if valid == 0 {
        return Err(Error::Numeric(
            "inverse KL invalid for every scan: all sampled likelihoods floored".into(),
        ));
    }
    Ok((sum / valid as f64, invalid))
}

/// Per-model metric block of the comparison report.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ModelMetrics {
    pub forward_kl: f64,
    pub inverse_kl_mean: f64,
    pub inverse_kl_invalid_scans: usize,
    pub mcl_mean_error_m: f64,
}

/// Comparison report: one metric block per model plus the configuration
/// that produced it.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Report {
    pub models: BTreeMap<String, ModelMetrics>,
    pub filter: FilterConfig,
    pub eval: EvalConfig,
    pub odometry_noise: OdometryNoise,
    pub seed: u64,
    /// How inverse-KL pose samples are drawn.
    pub inverse_kl_sampling: String,
}

impl Report {
    pub fn metrics(&self, kind: ModelKind) -> &ModelMetrics {
        &self.models[kind.name()]
    }

    /// Flatten to CSV rows for plotting.
    pub fn to_csv(&self) -> String {
        let mut out =
            String::from("model,forward_kl,inverse_kl_mean,inverse_kl_invalid_scans,mcl_mean_error_m\n");
        for (name, m) in &self.models {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                name, m.forward_kl, m.inverse_kl_mean, m.inverse_kl_invalid_scans, m.mcl_mean_error_m
            ));
        }
        out
    }
}

/// Everything needed to compare the three models on the same data.
pub struct CompareInputs<'a> {
    pub decay: SensorModel<'a>,
    pub reflection: SensorModel<'a>,
    pub endpoint: SensorModel<'a>,
    /// Scans with ground-truth poses, used for both metrics and MCL.
    pub scans: &'a [Scan],
    pub filter: FilterConfig,
    pub eval: EvalConfig,
    pub odometry_noise: OdometryNoise,
    pub seed: u64,
}

pub fn compare_models(inputs: &CompareInputs, threads: usize) -> Result<Report> {
    inputs.eval.validate()?;
    inputs.filter.validate()?;
    let mut models = BTreeMap::new();
    for model in [&inputs.decay, &inputs.reflection, &inputs.endpoint] {
        let fwd = forward_kl(model, inputs.scans, inputs.eval.ray_stride, threads)?;
        let (inv, invalid) =
            inverse_kl_mean(model, inputs.scans, &inputs.eval, inputs.seed, threads)?;
        let mut filter = inputs.filter;
        filter.model = model.kind();
        let trajectory = run_localization(
            model,
            inputs.scans,
            &filter,
            &inputs.odometry_noise,
            inputs.seed,
            threads,
        )?;
        models.insert(
            model.kind().name().to_string(),
            ModelMetrics {
                forward_kl: fwd,
                inverse_kl_mean: inv,
                inverse_kl_invalid_scans: invalid,
                mcl_mean_error_m: mean_position_error(&trajectory),
            },
        );
    }
    Ok(Report {
        models,
        filter: inputs.filter,
        eval: inputs.eval,
        odometry_noise: inputs.odometry_noise,
        seed: inputs.seed,
        inverse_kl_sampling: "uniform-horizontal-disc-translation-only".to_string(),
    })
}
