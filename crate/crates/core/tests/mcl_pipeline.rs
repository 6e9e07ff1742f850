//! End-to-end localization on a synthetic world, plus the comparison report.

use decay_lidar::baselines::endpoint::{build_likelihood_field, EndpointParams};
use decay_lidar::baselines::reflection::{build_reflection_map, ReflectionPriors};
use decay_lidar::decay_map::{build_decay_map, MapPriors};
use decay_lidar::eval::{compare_models, CompareInputs, EvalConfig};
use decay_lidar::mcl::{mean_position_error, run_localization, FilterConfig, OdometryNoise};
use decay_lidar::model::SensorModel;
use decay_lidar::simulator::{
    rasterize_world, sample_scan, GeometrySpec, Primitive, ScanSpec, TrajectorySpec, WorldSpec,
};
use decay_lidar::{DecayGrid, PoseSpec, Scan};

/// A structured outdoor-ish scene: a building wall, tree trunks with
/// permeable canopies, and a low wall, inside a 12 x 10 x 3 m grid.
fn demo_world(seed: u64) -> WorldSpec {
    let mut primitives = vec![
        // Building along the +y side.
        Primitive::Box {
            center: [0.0, 3.75, 0.0],
            size: [10.0, 0.5, 3.0],
            rate: 12.0,
        },
        // Low wall along the -y side with a gap.
        Primitive::Box {
            center: [-3.0, -3.25, -0.75],
            size: [5.0, 0.5, 1.5],
            rate: 10.0,
        },
        Primitive::Box {
            center: [3.5, -3.25, -0.75],
            size: [4.0, 0.5, 1.5],
            rate: 10.0,
        },
        // A kiosk box.
        Primitive::Box {
            center: [4.0, 1.0, -0.25],
            size: [1.5, 1.5, 2.5],
            rate: 12.0,
        },
    ];
    // Tree trunks and canopies on the lawn.
    for (i, &(x, y)) in [(-4.0, 0.5), (-1.5, -1.0), (1.0, 0.0), (-3.5, -2.0)].iter().enumerate() {
        primitives.push(Primitive::Cylinder {
            center: [x, y],
            radius: 0.25,
            z_min: -1.5,
            z_max: 0.5,
            rate: 9.0 + i as f64,
        });
        primitives.push(Primitive::Sphere {
            center: [x, y, 1.0],
            radius: 0.9,
            rate: 0.6,
        });
    }
    WorldSpec {
        geometry: GeometrySpec {
            origin: [-6.0, -5.0, -1.5],
            edge_length: 0.5,
            dims: [24, 20, 6],
        },
        primitives,
        background_rate: 0.03,
        seed,
    }
}

fn demo_scan_spec(failure_rate: f64) -> ScanSpec {
    ScanSpec {
        azimuth_count: 120,
        elevation_count: 5,
        elevation_min_deg: -15.0,
        elevation_max_deg: 15.0,
        r_min: 0.3,
        r_max: 12.0,
        failure_rate,
    }
}

/// Scans along a trajectory; scan index offset keeps substreams disjoint
/// between mapping and localization sets.
fn trajectory_scans(
    map: &DecayGrid,
    traj: &TrajectorySpec,
    spec: &ScanSpec,
    seed: u64,
    index_offset: u64,
) -> Vec<Scan> {
    traj.poses()
        .iter()
        .enumerate()
        .map(|(k, pose)| sample_scan(map, pose, spec, seed, index_offset + k as u64).unwrap())
        .collect()
}

fn mapping_trajectories() -> Vec<TrajectorySpec> {
    [-2.0, -1.0, 0.2]
        .iter()
        .map(|&y0| TrajectorySpec {
            start: PoseSpec {
                position: [-4.5, y0, 0.0],
                yaw_deg: 10.0,
            },
            step_translation: [0.22, 0.01, 0.0],
            step_yaw_deg: 1.0,
            steps: 40,
        })
        .collect()
}

fn mapping_scans(map: &DecayGrid, spec: &ScanSpec, seed: u64) -> Vec<Scan> {
    let mut scans = Vec::new();
    for (pass, traj) in mapping_trajectories().iter().enumerate() {
        scans.extend(trajectory_scans(map, traj, spec, seed, pass as u64 * 100));
    }
    scans
}

fn localization_trajectory() -> TrajectorySpec {
    TrajectorySpec {
        start: PoseSpec {
            position: [-4.0, -1.0, 0.0],
            yaw_deg: -5.0,
        },
        step_translation: [0.16, 0.0, 0.0],
        step_yaw_deg: 1.5,
        steps: 55,
    }
}

#[test]
fn decay_filter_converges_on_demo_world() {
    let world = demo_world(42);
    let gt = rasterize_world(&world).unwrap();
    let mapping = mapping_scans(&gt, &demo_scan_spec(0.0), 42);
    let map = build_decay_map(&mapping, gt.geometry().clone(), MapPriors::default()).unwrap();

    let scans = trajectory_scans(
        &gt,
        &localization_trajectory(),
        &demo_scan_spec(0.0),
        1042,
        1000,
    );
    let model = SensorModel::Decay(&map);
    let trajectory = run_localization(
        &model,
        &scans,
        &FilterConfig::default(),
        &OdometryNoise::default(),
        7,
        1,
    )
    .unwrap();
    assert_eq!(trajectory.len(), scans.len());
    let mean_err = mean_position_error(&trajectory);
    let edge = gt.geometry().edge_length();
    assert!(
        mean_err < edge,
        "mean position error {mean_err} m exceeds one voxel edge {edge} m"
    );
    // The filter must actually have locked on, not just drifted nearby.
    let late = &trajectory[trajectory.len() - 10..];
    let late_err = late.iter().map(|s| s.position_error).sum::<f64>() / late.len() as f64;
    assert!(late_err < 0.5 * edge, "late error {late_err}");
}

#[test]
fn comparison_report_is_deterministic_with_three_rows() {
    let world = demo_world(77);
    let gt = rasterize_world(&world).unwrap();
    let mapping = mapping_scans(&gt, &demo_scan_spec(0.0), 77);
    let decay = build_decay_map(&mapping, gt.geometry().clone(), MapPriors::default()).unwrap();
    let reflection =
        build_reflection_map(&mapping, gt.geometry().clone(), ReflectionPriors::default()).unwrap();
    let endpoint =
        build_likelihood_field(&mapping, gt.geometry().clone(), EndpointParams::default()).unwrap();

    let mut traj = localization_trajectory();
    traj.steps = 12; // keep the double run cheap
    let scans = trajectory_scans(&gt, &traj, &demo_scan_spec(0.1), 1077, 1000);

    let inputs = CompareInputs {
        decay: SensorModel::Decay(&decay),
        reflection: SensorModel::Reflection(&reflection),
        endpoint: SensorModel::Endpoint(&endpoint),
        scans: &scans,
        filter: FilterConfig {
            particle_count: 120,
            ..FilterConfig::default()
        },
        eval: EvalConfig {
            sample_count: 20,
            ray_stride: 4,
            ..EvalConfig::default()
        },
        odometry_noise: OdometryNoise::default(),
        seed: 5,
    };
    let a = compare_models(&inputs, 1).unwrap();
    let b = compare_models(&inputs, 1).unwrap();

    assert_eq!(a.models.len(), 3);
    for kind in ["decay", "reflection", "endpoint"] {
        let m = &a.models[kind];
        assert!(m.forward_kl.is_finite());
        assert!(m.inverse_kl_mean.is_finite());
        assert!(m.mcl_mean_error_m.is_finite());
    }
    let ja = serde_json::to_string(&a).unwrap();
    let jb = serde_json::to_string(&b).unwrap();
    assert_eq!(ja, jb, "identical seeds must give identical reports");

    let csv = a.to_csv();
    assert_eq!(csv.lines().count(), 4); // header + 3 model rows
    assert!(csv.starts_with("model,forward_kl,inverse_kl_mean"));
}
