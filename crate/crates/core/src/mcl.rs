//! Monte Carlo localization over 6-DoF poses.
//!
//! Particles carry log weights. The correction step adds the scan
//! log-likelihood under each particle's pose and renormalizes so the best
//! particle sits at log weight 0; systematic resampling kicks in when the
//! effective sample size drops below the configured fraction.

use nalgebra::{Matrix4, Quaternion, UnitQuaternion, Vector3, Vector4};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ModelKind, SensorModel};
use crate::parallel::map_indexed;
use crate::pose::{pose_from_parts, position_error, rotation_exp, Pose};
use crate::rng::{SplitMix64, STREAM_MCL_INIT, STREAM_ODOMETRY, STREAM_PREDICT, STREAM_RESAMPLE};
use crate::scan::Scan;

#[derive(Clone, Copy, Debug)]
pub struct Particle {
    pub pose: Pose,
    pub log_weight: f64,
}

/// Weighted pose hypotheses. Log weights are kept shifted so the maximum is 0.
#[derive(Clone, Debug)]
pub struct ParticleSet {
    pub particles: Vec<Particle>,
}

impl ParticleSet {
    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    /// Shift log weights so the maximum is 0.
    pub fn normalize(&mut self) {
        let max = self
            .particles
            .iter()
            .map(|p| p.log_weight)
            .fold(f64::NEG_INFINITY, f64::max);
        if max.is_finite() {
            for p in &mut self.particles {
                p.log_weight -= max;
            }
        } else {
            for p in &mut self.particles {
                p.log_weight = 0.0;
            }
        }
    }

    /// Linear weights summing to 1.
    pub fn weights(&self) -> Vec<f64> {
        let mut w: Vec<f64> = self.particles.iter().map(|p| p.log_weight.exp()).collect();
        let sum: f64 = w.iter().sum();
        if sum > 0.0 {
            for v in &mut w {
                *v /= sum;
            }
        } else {
            let uniform = 1.0 / w.len().max(1) as f64;
            w.fill(uniform);
        }
        w
    }

    /// Effective sample size as a fraction of the particle count.
    pub fn ess_fraction(&self) -> f64 {
        let w = self.weights();
        let sq: f64 = w.iter().map(|v| v * v).sum();
        1.0 / (sq * w.len() as f64)
    }
}

/// Standard deviations of the initial particle cloud.
#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct InitSigma {
    /// Per horizontal axis (x and y), meters.
    pub horizontal: f64,
    /// Vertical axis, meters.
    pub vertical: f64,
    /// Per rotation axis of the axis-angle perturbation, radians.
    pub rotation: f64,
}

impl Default for InitSigma {
    fn default() -> Self {
        InitSigma {
            horizontal: 1.0,
            vertical: 0.2,
            rotation: 0.1,
        }
    }
}

/// Per-step motion-model spread applied after composing the odometry delta.
#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct MotionNoise {
    /// Per translation axis, meters.
    pub translation: f64,
    /// Per rotation axis (axis-angle), radians.
    pub rotation: f64,
}

impl Default for MotionNoise {
    fn default() -> Self {
        MotionNoise {
            translation: 0.05,
            rotation: 0.01,
        }
    }
}

fn default_particle_count() -> usize {
    300
}

fn default_resample_threshold() -> f64 {
    0.5
}

fn default_ray_subsample() -> usize {
    10
}

fn default_model() -> ModelKind {
    ModelKind::Decay
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct FilterConfig {
    pub particle_count: usize,
    pub init_sigma: InitSigma,
    pub motion_noise: MotionNoise,
    /// Resample when ESS / N falls below this fraction.
    pub resample_threshold: f64,
    pub model: ModelKind,
    /// Evaluate every n-th ray of a scan during correction.
    pub ray_subsample: usize,
}

impl Default for FilterConfig {
    fn default() -> Self {
        FilterConfig {
            particle_count: default_particle_count(),
            init_sigma: InitSigma::default(),
            motion_noise: MotionNoise::default(),
            resample_threshold: default_resample_threshold(),
            model: default_model(),
            ray_subsample: default_ray_subsample(),
        }
    }
}

impl FilterConfig {
    pub fn validate(&self) -> Result<()> {
        if self.particle_count == 0 {
            return Err(Error::invalid("particle_count must be >= 1"));
        }
        if self.ray_subsample == 0 {
            return Err(Error::invalid("ray_subsample must be >= 1"));
        }
        let s = &self.init_sigma;
        if s.horizontal < 0.0 || s.vertical < 0.0 || s.rotation < 0.0 {
            return Err(Error::invalid("init_sigma values must be >= 0"));
        }
        if self.motion_noise.translation < 0.0 || self.motion_noise.rotation < 0.0 {
            return Err(Error::invalid("motion_noise values must be >= 0"));
        }
        if !(0.0..=1.0).contains(&self.resample_threshold) {
            return Err(Error::invalid("resample_threshold must lie in [0, 1]"));
        }
        Ok(())
    }
}

/// Draw a pose around `center` from the given standard deviations.
pub fn perturb_pose(
    center: &Pose,
    sigma_xy: f64,
    sigma_z: f64,
    sigma_rot: f64,
    rng: &mut SplitMix64,
) -> Pose {
    let t = Vector3::new(
        rng.next_gaussian() * sigma_xy,
        rng.next_gaussian() * sigma_xy,
        rng.next_gaussian() * sigma_z,
    );
    let w = Vector3::new(
        rng.next_gaussian(),
        rng.next_gaussian(),
        rng.next_gaussian(),
    ) * sigma_rot;
    pose_from_parts(
        (center.translation.vector + t).into(),
        center.rotation * rotation_exp(w),
    )
}

/// Gaussian cloud around the initial guess, uniform weights.
pub fn initialize(config: &FilterConfig, initial_guess: &Pose, rng: &mut SplitMix64) -> ParticleSet {
    let s = config.init_sigma;
    let particles = (0..config.particle_count)
        .map(|_| Particle {
            pose: perturb_pose(initial_guess, s.horizontal, s.vertical, s.rotation, rng),
            log_weight: 0.0,
        })
        .collect();
    ParticleSet { particles }
}

/// Compose every pose with the odometry delta, then spread by motion noise.
pub fn predict(
    set: &mut ParticleSet,
    odometry_delta: &Pose,
    noise: &MotionNoise,
    rng: &mut SplitMix64,
) {
    for p in &mut set.particles {
        let moved = p.pose * odometry_delta;
        p.pose = perturb_pose(
            &moved,
            noise.translation,
            noise.translation,
            noise.rotation,
            rng,
        );
    }
}

/// Outcome counters of one correction step.
#[derive(Clone, Copy, Debug, Default)]
pub struct CorrectStats {
    pub rays_per_particle: usize,
    /// Particles whose every evaluated ray was floored.
    pub saturated_particles: usize,
}

/// Weight particles by the scan log-likelihood under their poses.
pub fn correct(
    set: &mut ParticleSet,
    scan: &Scan,
    model: &SensorModel,
    stride: usize,
    threads: usize,
) -> Result<CorrectStats> {
    let scores = map_indexed(&set.particles, threads, |_, p| {
        model.scan_log_native(scan, &p.pose, stride)
    });
    let mut stats = CorrectStats::default();
    for (p, score) in set.particles.iter_mut().zip(scores) {
        let score = score?;
        stats.rays_per_particle = score.rays;
        if score.rays > 0 && score.floored == score.rays {
            stats.saturated_particles += 1;
        }
        p.log_weight += score.log_likelihood;
    }
    set.normalize();
    Ok(stats)
}

/// Systematic (low-variance) resampling when ESS drops below the threshold.
/// Returns whether resampling happened; offspring weights are uniform.
pub fn resample(set: &mut ParticleSet, threshold: f64, rng: &mut SplitMix64) -> bool {
    if set.is_empty() || set.ess_fraction() >= threshold {
        return false;
    }
    let n = set.len();
    let weights = set.weights();
    let start = rng.next_f64() / n as f64;
    let mut new_particles = Vec::with_capacity(n);
    let mut cumulative = weights[0];
    let mut i = 0usize;
    for k in 0..n {
        let u = start + k as f64 / n as f64;
        while cumulative < u && i + 1 < n {
            i += 1;
            cumulative += weights[i];
        }
        new_particles.push(Particle {
            pose: set.particles[i].pose,
            log_weight: 0.0,
        });
    }
    set.particles = new_particles;
    true
}

/// Weighted mean pose: arithmetic mean of translations, largest-eigenvector
/// mean of quaternions with signs aligned to the heaviest particle.
pub fn estimate(set: &ParticleSet) -> Pose {
    assert!(!set.is_empty(), "cannot estimate from an empty particle set");
    let weights = set.weights();
    let mut t = Vector3::zeros();
    for (p, w) in set.particles.iter().zip(&weights) {
        t += p.pose.translation.vector * *w;
    }
    let mut outer = Matrix4::<f64>::zeros();
    for (p, w) in set.particles.iter().zip(&weights) {
        let q = p.pose.rotation.quaternion();
        let v = Vector4::new(q.w, q.i, q.j, q.k);
        outer += v * v.transpose() * *w;
    }
    let eig = nalgebra::SymmetricEigen::new(outer);
    let mut best = 0;
    for i in 1..4 {
        if eig.eigenvalues[i] > eig.eigenvalues[best] {
            best = i;
        }
    }
    let v = eig.eigenvectors.column(best);
    let mut q = Quaternion::new(v[0], v[1], v[2], v[3]);
    let heaviest = weights
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let ref_q = set.particles[heaviest].pose.rotation.quaternion();
    if q.w * ref_q.w + q.i * ref_q.i + q.j * ref_q.j + q.k * ref_q.k < 0.0 {
        q = -q;
    }
    pose_from_parts(t.into(), UnitQuaternion::from_quaternion(q))
}

/// One row of a localization run.
#[derive(Clone, Copy, Debug)]
pub struct TrajectoryStep {
    pub step: usize,
    pub estimate: Pose,
    pub truth: Pose,
    pub position_error: f64,
}

/// Gaussian corruption applied to ground-truth odometry deltas.
#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct OdometryNoise {
    pub translation: f64,
    pub rotation: f64,
}

impl Default for OdometryNoise {
    fn default() -> Self {
        OdometryNoise {
            translation: 0.02,
            rotation: 0.005,
        }
    }
}

/// Run the full filter along a scan sequence. Scan poses are the ground
/// truth: they seed the initial guess (offset by a draw from the init
/// distribution), provide odometry deltas (corrupted by `odometry_noise`),
/// and are only otherwise used to report errors.
pub fn run_localization(
    model: &SensorModel,
    scans: &[Scan],
    config: &FilterConfig,
    odometry_noise: &OdometryNoise,
    seed: u64,
    threads: usize,
) -> Result<Vec<TrajectoryStep>> {
    config.validate()?;
    if scans.is_empty() {
        return Ok(Vec::new());
    }
    let mut init_rng = SplitMix64::substream(seed, &[STREAM_MCL_INIT]);
    let s = config.init_sigma;
    // The offset between the mean initial particle and the true start pose
    // is drawn from the same distribution as the particles themselves.
    let guess = perturb_pose(
        &scans[0].pose,
        s.horizontal,
        s.vertical,
        s.rotation,
        &mut init_rng,
    );
    let mut particles = initialize(config, &guess, &mut init_rng);
    let mut saturated_steps = 0usize;
    let mut trajectory = Vec::with_capacity(scans.len());
    for (k, scan) in scans.iter().enumerate() {
        if k > 0 {
            let delta_true = scans[k - 1].pose.inverse() * scans[k].pose;
            let mut odom_rng = SplitMix64::substream(seed, &[STREAM_ODOMETRY, k as u64]);
            let delta = perturb_pose(
                &delta_true,
                odometry_noise.translation,
                odometry_noise.translation,
                odometry_noise.rotation,
                &mut odom_rng,
            );
            let mut predict_rng = SplitMix64::substream(seed, &[STREAM_PREDICT, k as u64]);
            predict(&mut particles, &delta, &config.motion_noise, &mut predict_rng);
        }
        let stats = correct(&mut particles, scan, model, config.ray_subsample, threads)?;
        if stats.saturated_particles == particles.len() {
            saturated_steps += 1;
        }
        let est = estimate(&particles);
        trajectory.push(TrajectoryStep {
            step: k,
            estimate: est,
            truth: scan.pose,
            position_error: position_error(&est, &scan.pose),
        });
        let mut resample_rng = SplitMix64::substream(seed, &[STREAM_RESAMPLE, k as u64]);
        resample(&mut particles, config.resample_threshold, &mut resample_rng);
    }
    if saturated_steps == scans.len() {
        return Err(Error::Numeric(
            "every particle was floored on every scan; the map and scans do not overlap".into(),
        ));
    }
    Ok(trajectory)
}

/// Time-averaged position error of a run.
pub fn mean_position_error(trajectory: &[TrajectoryStep]) -> f64 {
    if trajectory.is_empty() {
        return 0.0;
    }
    trajectory.iter().map(|s| s.position_error).sum::<f64>() / trajectory.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Point3;

    fn zero_sigma_config() -> FilterConfig {
        FilterConfig {
            particle_count: 50,
            init_sigma: InitSigma {
                horizontal: 0.0,
                vertical: 0.0,
                rotation: 0.0,
            },
            ..FilterConfig::default()
        }
    }

    #[test]
    fn initialize_zero_sigma_is_exact() {
        let guess = Pose::translation(1.0, 2.0, 3.0);
        let mut rng = SplitMix64::new(1);
        let set = initialize(&zero_sigma_config(), &guess, &mut rng);
        assert_eq!(set.len(), 50);
        for p in &set.particles {
            assert!(position_error(&p.pose, &guess) < 1e-15);
            assert!((p.pose.rotation.angle_to(&guess.rotation)).abs() < 1e-15);
        }
    }

    #[test]
    fn default_particle_count_is_300() {
        assert_eq!(FilterConfig::default().particle_count, 300);
    }

    #[test]
    fn initialize_sample_covariance() {
        let config = FilterConfig {
            particle_count: 100_000,
            ..FilterConfig::default()
        };
        let guess = Pose::identity();
        let mut rng = SplitMix64::new(12345);
        let set = initialize(&config, &guess, &mut rng);
        let n = set.len() as f64;
        let mut mean = Vector3::zeros();
        for p in &set.particles {
            mean += p.pose.translation.vector;
        }
        mean /= n;
        let mut var = Vector3::zeros();
        let mut rot_var = Vector3::zeros();
        for p in &set.particles {
            let d = p.pose.translation.vector - mean;
            var += d.component_mul(&d);
            let w = p.pose.rotation.scaled_axis();
            rot_var += w.component_mul(&w);
        }
        var /= n;
        rot_var /= n;
        let s = config.init_sigma;
        assert!((var.x.sqrt() - s.horizontal).abs() < 0.05 * s.horizontal);
        assert!((var.y.sqrt() - s.horizontal).abs() < 0.05 * s.horizontal);
        assert!((var.z.sqrt() - s.vertical).abs() < 0.05 * s.vertical);
        for a in 0..3 {
            assert!((rot_var[a].sqrt() - s.rotation).abs() < 0.05 * s.rotation);
        }
    }

    #[test]
    fn predict_zero_noise_is_composition() {
        let mut set = ParticleSet {
            particles: vec![Particle {
                pose: Pose::translation(1.0, 0.0, 0.0),
                log_weight: 0.0,
            }],
        };
        let delta = PoseSpecDelta();
        let noise = MotionNoise {
            translation: 0.0,
            rotation: 0.0,
        };
        let mut rng = SplitMix64::new(3);
        predict(&mut set, &delta, &noise, &mut rng);
        let expect = Pose::translation(1.0, 0.0, 0.0) * delta;
        assert!(position_error(&set.particles[0].pose, &expect) < 1e-15);

        // Zero delta, zero noise: identity.
        let before = set.particles[0].pose;
        predict(&mut set, &Pose::identity(), &noise, &mut rng);
        assert!(position_error(&set.particles[0].pose, &before) < 1e-15);
    }

    #[allow(non_snake_case)]
    fn PoseSpecDelta() -> Pose {
        crate::pose::PoseSpec {
            position: [0.5, 0.0, 0.0],
            yaw_deg: 30.0,
        }
        .to_pose()
    }

    #[test]
    fn predict_pure_noise_diffusion() {
        let n = 100_000;
        let mut set = ParticleSet {
            particles: vec![
                Particle {
                    pose: Pose::identity(),
                    log_weight: 0.0,
                };
                n
            ],
        };
        let noise = MotionNoise {
            translation: 0.3,
            rotation: 0.0,
        };
        let mut rng = SplitMix64::new(8);
        predict(&mut set, &Pose::identity(), &noise, &mut rng);
        let mut mean = Vector3::zeros();
        for p in &set.particles {
            mean += p.pose.translation.vector;
        }
        mean /= n as f64;
        assert!(mean.norm() < 0.01);
        let mut var = Vector3::zeros();
        for p in &set.particles {
            let d = p.pose.translation.vector - mean;
            var += d.component_mul(&d);
        }
        var /= n as f64;
        for a in 0..3 {
            assert!((var[a].sqrt() - 0.3).abs() < 0.05 * 0.3);
        }
    }

    #[test]
    fn single_particle_weight_is_one() {
        let mut set = ParticleSet {
            particles: vec![Particle {
                pose: Pose::identity(),
                log_weight: -123.0,
            }],
        };
        set.normalize();
        assert_eq!(set.weights(), vec![1.0]);
    }

    #[test]
    fn constant_log_shift_leaves_weights_unchanged() {
        let mut set = ParticleSet {
            particles: vec![
                Particle {
                    pose: Pose::identity(),
                    log_weight: -1.0,
                },
                Particle {
                    pose: Pose::identity(),
                    log_weight: -3.0,
                },
            ],
        };
        set.normalize();
        let w0 = set.weights();
        for p in &mut set.particles {
            p.log_weight += 7.5;
        }
        set.normalize();
        let w1 = set.weights();
        for (a, b) in w0.iter().zip(&w1) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn resample_skipped_for_uniform_weights() {
        let mut set = ParticleSet {
            particles: vec![
                Particle {
                    pose: Pose::identity(),
                    log_weight: 0.0,
                };
                10
            ],
        };
        let mut rng = SplitMix64::new(4);
        assert!(!resample(&mut set, 0.5, &mut rng));
    }

    #[test]
    fn resample_degenerate_copies_winner() {
        let winner = Pose::translation(9.0, 9.0, 9.0);
        let mut particles = vec![
            Particle {
                pose: Pose::identity(),
                log_weight: -1e6,
            };
            20
        ];
        particles[7] = Particle {
            pose: winner,
            log_weight: 0.0,
        };
        let mut set = ParticleSet { particles };
        let mut rng = SplitMix64::new(5);
        assert!(resample(&mut set, 0.5, &mut rng));
        for p in &set.particles {
            assert!(position_error(&p.pose, &winner) < 1e-15);
            assert_eq!(p.log_weight, 0.0);
        }
    }

    #[test]
    fn resample_offspring_counts_within_one() {
        let mut rng = SplitMix64::new(6);
        for _ in 0..50 {
            let n = 64;
            let mut raw: Vec<f64> = (0..n).map(|_| rng.next_f64() + 1e-3).collect();
            let sum: f64 = raw.iter().sum();
            for w in &mut raw {
                *w /= sum;
            }
            let particles: Vec<Particle> = raw
                .iter()
                .enumerate()
                .map(|(i, &w)| Particle {
                    pose: Pose::translation(i as f64, 0.0, 0.0),
                    log_weight: w.ln(),
                })
                .collect();
            let mut set = ParticleSet { particles };
            set.normalize();
            let weights = set.weights();
            assert!(resample(&mut set, 1.1, &mut rng)); // force resampling
            let mut counts = vec![0usize; n];
            for p in &set.particles {
                counts[p.pose.translation.vector.x.round() as usize] += 1;
            }
            for i in 0..n {
                let expected = weights[i] * n as f64;
                assert!(
                    (counts[i] as f64 - expected).abs() <= 1.0 + 1e-9,
                    "offspring {} vs expected {expected}",
                    counts[i]
                );
            }
        }
    }

    #[test]
    fn estimate_of_identical_particles() {
        let pose = Pose::translation(1.0, -2.0, 0.5);
        let set = ParticleSet {
            particles: vec![
                Particle {
                    pose,
                    log_weight: 0.0,
                };
                5
            ],
        };
        let est = estimate(&set);
        assert!(position_error(&est, &pose) < 1e-12);
        assert!(est.rotation.angle_to(&pose.rotation) < 1e-12);
    }

    #[test]
    fn estimate_midpoint_of_symmetric_pair() {
        let set = ParticleSet {
            particles: vec![
                Particle {
                    pose: Pose::translation(-1.0, 0.0, 0.0),
                    log_weight: 0.0,
                },
                Particle {
                    pose: Pose::translation(1.0, 0.0, 0.0),
                    log_weight: 0.0,
                },
            ],
        };
        let est = estimate(&set);
        assert!(est.translation.vector.norm() < 1e-12);
    }

    #[test]
    fn estimate_recovers_initialization_center() {
        let config = FilterConfig {
            particle_count: 20_000,
            ..FilterConfig::default()
        };
        let guess = Pose::translation(3.0, -1.0, 0.2);
        let mut rng = SplitMix64::new(21);
        let set = initialize(&config, &guess, &mut rng);
        let est = estimate(&set);
        let n = config.particle_count as f64;
        let bound = 3.0 * config.init_sigma.horizontal / n.sqrt();
        assert!(
            position_error(&est, &guess) < 3.0 * bound.max(0.02),
            "err {}",
            position_error(&est, &guess)
        );
    }

    #[test]
    fn config_validation() {
        let mut c = FilterConfig::default();
        assert!(c.validate().is_ok());
        c.particle_count = 0;
        assert!(c.validate().is_err());
        c = FilterConfig {
            resample_threshold: 1.5,
            ..FilterConfig::default()
        };
        assert!(c.validate().is_err());
    }

    #[test]
    fn correct_puts_weight_on_true_pose_in_peaked_world() {
        use crate::decay_map::{build_decay_map, MapPriors};
        use crate::model::SensorModel;
        use crate::scan::{Ray, Reading};
        use crate::simulator::{rasterize_world, GeometrySpec, Primitive, WorldSpec};

        // A world with a single sharp wall; a particle displaced along the
        // ray direction scores the floor, so the true-pose particle takes
        // essentially all the weight.
        let world = WorldSpec {
            geometry: GeometrySpec {
                origin: [0.0, -5.0, -1.0],
                edge_length: 0.5,
                dims: [20, 20, 4],
            },
            primitives: vec![Primitive::Box {
                center: [8.0, 0.0, 0.0],
                size: [0.5, 10.0, 2.0],
                rate: 50.0,
            }],
            background_rate: 0.001,
            seed: 0,
        };
        let gt = rasterize_world(&world).unwrap();
        let pose = Pose::translation(1.0, 0.0, 0.0);
        let mut rays = Vec::new();
        for k in -3..=3 {
            let dir = Vector3::new(1.0, 0.15 * k as f64, 0.0).normalize();
            let origin = Point3::from(pose.translation.vector);
            // Endpoint where each ray meets the wall plane x = 7.75.
            let t = (7.85 - origin.x) / dir.x;
            rays.push(Ray {
                direction: dir,
                reading: Reading::Range(t),
            });
        }
        let scan = Scan {
            pose,
            r_min: 0.1,
            r_max: 20.0,
            rays,
        };
        let map = build_decay_map(std::slice::from_ref(&scan), gt.geometry().clone(), MapPriors::default())
            .unwrap();
        let model = SensorModel::Decay(&map);
        let mut set = ParticleSet {
            particles: vec![
                Particle {
                    pose,
                    log_weight: 0.0,
                },
                Particle {
                    pose: Pose::translation(3.5, 1.3, 0.0),
                    log_weight: 0.0,
                },
            ],
        };
        correct(&mut set, &scan, &model, 1, 1).unwrap();
        let w = set.weights();
        assert!(w[0] > 0.99, "true-pose weight {}", w[0]);
    }
}
