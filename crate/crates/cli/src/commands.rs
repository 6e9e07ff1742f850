//! Subcommand implementations.

use std::io::Write;
use std::path::Path;

use decay_lidar::baselines::endpoint::{build_likelihood_field, LikelihoodField};
use decay_lidar::baselines::reflection::{ReflectionAccumulator, ReflectionGrid};
use decay_lidar::decay_map::{DecayGrid, MapAccumulator};
use decay_lidar::eval::{compare_models, CompareInputs};
use decay_lidar::io::{
    export_map_projection, export_scan_endpoints, read_decay_map, read_likelihood_field,
    read_reflection_map, read_scans, sniff_magic, write_accumulator, write_decay_map,
    write_likelihood_field, write_reflection_map, write_scans, PointcloudFormat,
    DECAY_MAP_MAGIC, LIKELIHOOD_FIELD_MAGIC, REFLECTION_MAP_MAGIC,
};
use decay_lidar::mcl::{run_localization, TrajectoryStep};
use decay_lidar::model::{ModelKind, SensorModel};
use decay_lidar::simulator::{rasterize_world, sample_scan};
use decay_lidar::{Measurement, Pose, Reading, Scan};
use nalgebra::Vector3;

use crate::config::RunConfig;
use crate::{CliError, ExportArgs, PlotDataArgs};

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text)
        .map_err(|e| CliError::io(format!("cannot write {}: {e}", path.display())))
}

fn pose_csv_fields(pose: &Pose) -> String {
    let t = pose.translation.vector;
    let q = pose.rotation.quaternion();
    format!("{},{},{},{},{},{},{}", t.x, t.y, t.z, q.w, q.i, q.j, q.k)
}

pub fn simulate(config_path: &Path, out_dir: &Path) -> Result<(), CliError> {
    let config = RunConfig::load(config_path)?;
    let world = config.world()?;
    let sensor = config.sensor()?;
    let trajectory = config.trajectory()?;
    if trajectory.steps == 0 {
        return Err(CliError::config("trajectory.steps must be >= 1"));
    }
    std::fs::create_dir_all(out_dir)
        .map_err(|e| CliError::io(format!("cannot create {}: {e}", out_dir.display())))?;

    let ground_truth = rasterize_world(world)?;
    let poses = trajectory.poses();
    let mut scans = Vec::with_capacity(poses.len());
    for (k, pose) in poses.iter().enumerate() {
        scans.push(sample_scan(
            &ground_truth,
            pose,
            sensor,
            world.seed,
            k as u64,
        )?);
    }

    let map_path = out_dir.join("world.drm");
    write_decay_map(&map_path, &ground_truth)?;
    let scan_path = out_dir.join("scans.dsc");
    write_scans(&scan_path, &scans)?;

    let mut csv = String::from("step,x,y,z,qw,qx,qy,qz\n");
    for (k, pose) in poses.iter().enumerate() {
        csv.push_str(&format!("{k},{}\n", pose_csv_fields(pose)));
    }
    let traj_path = out_dir.join("trajectory.csv");
    write_text(&traj_path, &csv)?;
    config.write_echo(out_dir)?;

    let (sub, range, sup) = scans.iter().fold((0, 0, 0), |acc, s| {
        let (a, b, c) = s.kind_counts();
        (acc.0 + a, acc.1 + b, acc.2 + c)
    });
    eprintln!(
        "simulate: {} scans, {} rays (sub {sub}, range {range}, sup {sup}) -> {}",
        scans.len(),
        sub + range + sup,
        out_dir.display()
    );
    Ok(())
}

pub fn build_map(
    scans_path: &Path,
    model_flag: Option<ModelKind>,
    config_path: &Path,
    out: &Path,
    checkpoint: Option<&Path>,
    threads: usize,
) -> Result<(), CliError> {
    let config = RunConfig::load(config_path)?;
    let model = model_flag
        .or(config.model)
        .ok_or_else(|| CliError::config("no model given: pass --model or set 'model' in the config"))?;
    if checkpoint.is_some() && model != ModelKind::Decay {
        return Err(CliError::config(
            "--checkpoint is only meaningful for the decay model",
        ));
    }
    let geom = config.world()?.geometry.to_geometry()?;
    let scans = read_scans(scans_path)?;
    if scans.is_empty() {
        return Err(CliError::config(format!(
            "{} contains no scans",
            scans_path.display()
        )));
    }

    // Shard scans across threads, then merge in shard order. The merged
    // result is deterministic for a fixed thread count, and voxel sums agree
    // across thread counts to summation reordering error.
    let shard_size = scans.len().div_ceil(threads);
    let shards: Vec<&[Scan]> = scans.chunks(shard_size).collect();
    match model {
        ModelKind::Decay => {
            let accs = decay_lidar::parallel::map_indexed(&shards, threads, |_, shard| {
                let mut acc = MapAccumulator::new(geom.clone());
                for scan in *shard {
                    acc.integrate_scan(scan)?;
                }
                Ok::<_, decay_lidar::Error>(acc)
            });
            let mut total = MapAccumulator::new(geom);
            for acc in accs {
                total.merge(&acc?)?;
            }
            if let Some(ckpt) = checkpoint {
                write_accumulator(ckpt, &total)?;
            }
            let map = total.finalize(config.mapping.decay_priors());
            write_decay_map(out, &map)?;
        }
        ModelKind::Reflection => {
            let accs = decay_lidar::parallel::map_indexed(&shards, threads, |_, shard| {
                let mut acc = ReflectionAccumulator::new(geom.clone());
                for scan in *shard {
                    acc.integrate_scan(scan)?;
                }
                Ok::<_, decay_lidar::Error>(acc)
            });
            let mut total = ReflectionAccumulator::new(geom);
            for acc in accs {
                total.merge(&acc?)?;
            }
            let map = total.finalize(config.mapping.reflection_priors());
            write_reflection_map(out, &map)?;
        }
        ModelKind::Endpoint => {
            let field = build_likelihood_field(&scans, geom, config.mapping.endpoint_params())?;
            write_likelihood_field(out, &field)?;
        }
    }
    config.write_echo(out)?;
    eprintln!(
        "build-map: {} model over {} scans -> {}",
        model.name(),
        scans.len(),
        out.display()
    );
    Ok(())
}

enum OwnedMap {
    Decay(DecayGrid),
    Reflection(ReflectionGrid),
    Endpoint(LikelihoodField),
}

impl OwnedMap {
    fn read(path: &Path) -> Result<Self, CliError> {
        let magic = sniff_magic(path)?;
        match magic {
            DECAY_MAP_MAGIC => Ok(OwnedMap::Decay(read_decay_map(path)?)),
            REFLECTION_MAP_MAGIC => Ok(OwnedMap::Reflection(read_reflection_map(path)?)),
            LIKELIHOOD_FIELD_MAGIC => Ok(OwnedMap::Endpoint(read_likelihood_field(path)?)),
            other => Err(CliError::io(format!(
                "{}: not a map file (magic {:?})",
                path.display(),
                other
            ))),
        }
    }

    fn kind(&self) -> ModelKind {
        match self {
            OwnedMap::Decay(_) => ModelKind::Decay,
            OwnedMap::Reflection(_) => ModelKind::Reflection,
            OwnedMap::Endpoint(_) => ModelKind::Endpoint,
        }
    }

    fn model(&self) -> SensorModel<'_> {
        match self {
            OwnedMap::Decay(m) => SensorModel::Decay(m),
            OwnedMap::Reflection(m) => SensorModel::Reflection(m),
            OwnedMap::Endpoint(m) => SensorModel::Endpoint(m),
        }
    }
}

pub fn trajectory_csv(steps: &[TrajectoryStep]) -> String {
    let mut csv = String::from(
        "step,est_x,est_y,est_z,est_qw,est_qx,est_qy,est_qz,\
         true_x,true_y,true_z,true_qw,true_qx,true_qy,true_qz,position_error_m\n",
    );
    for s in steps {
        csv.push_str(&format!(
            "{},{},{},{}\n",
            s.step,
            pose_csv_fields(&s.estimate),
            pose_csv_fields(&s.truth),
            s.position_error
        ));
    }
    csv
}

pub fn localize(
    map_path: &Path,
    scans_path: &Path,
    config_path: &Path,
    out: &Path,
    threads: usize,
) -> Result<(), CliError> {
    let config = RunConfig::load(config_path)?;
    let map = OwnedMap::read(map_path)?;
    if let Some(wanted) = config.model {
        if wanted != map.kind() {
            return Err(CliError::config(format!(
                "config requests the {} model but {} stores a {} map",
                wanted.name(),
                map_path.display(),
                map.kind().name()
            )));
        }
    }
    let scans = read_scans(scans_path)?;
    if scans.is_empty() {
        return Err(CliError::config(format!(
            "{} contains no scans",
            scans_path.display()
        )));
    }
    let mut filter = config.filter;
    filter.model = map.kind();
    let trajectory = run_localization(
        &map.model(),
        &scans,
        &filter,
        &config.odometry_noise,
        config.seed,
        threads,
    )?;
    write_text(out, &trajectory_csv(&trajectory))?;
    config.write_echo(out)?;
    let mean: f64 =
        trajectory.iter().map(|s| s.position_error).sum::<f64>() / trajectory.len() as f64;
    eprintln!(
        "localize: {} model, {} steps, mean position error {:.3} m -> {}",
        map.kind().name(),
        trajectory.len(),
        mean,
        out.display()
    );
    Ok(())
}

fn read_expecting(path: &Path, kind: ModelKind) -> Result<OwnedMap, CliError> {
    let map = OwnedMap::read(path)?;
    if map.kind() != kind {
        return Err(CliError::config(format!(
            "{} stores a {} map, expected {}",
            path.display(),
            map.kind().name(),
            kind.name()
        )));
    }
    Ok(map)
}

#[allow(clippy::too_many_arguments)]
pub fn eval(
    decay_path: &Path,
    reflection_path: &Path,
    endpoint_path: &Path,
    scans_path: &Path,
    config_path: &Path,
    out: &Path,
    kl_raw: bool,
    threads: usize,
) -> Result<(), CliError> {
    let mut config = RunConfig::load(config_path)?;
    if kl_raw {
        config.eval.raw_surrogate = true;
    }
    let decay = read_expecting(decay_path, ModelKind::Decay)?;
    let reflection = read_expecting(reflection_path, ModelKind::Reflection)?;
    let endpoint = read_expecting(endpoint_path, ModelKind::Endpoint)?;
    let scans = read_scans(scans_path)?;
    if scans.is_empty() {
        return Err(CliError::config(format!(
            "{} contains no scans",
            scans_path.display()
        )));
    }
    let inputs = CompareInputs {
        decay: decay.model(),
        reflection: reflection.model(),
        endpoint: endpoint.model(),
        scans: &scans,
        filter: config.filter,
        eval: config.eval,
        odometry_noise: config.odometry_noise,
        seed: config.seed,
    };
    let report = compare_models(&inputs, threads)?;
    let json = serde_json::to_string_pretty(&report)
        .map_err(|e| CliError::io(format!("cannot serialize report: {e}")))?;
    write_text(out, &json)?;
    let csv_path = out.with_extension("csv");
    write_text(&csv_path, &report.to_csv())?;
    config.write_echo(out)?;
    for (name, m) in &report.models {
        eprintln!(
            "eval: {name}: forward_kl {:.1}, inverse_kl {:.3}, mcl error {:.3} m",
            m.forward_kl, m.inverse_kl_mean, m.mcl_mean_error_m
        );
    }
    Ok(())
}

fn parse_vec3(text: &str, what: &str) -> Result<[f64; 3], CliError> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 3 {
        return Err(CliError::config(format!(
            "{what} must be 'x,y,z', got '{text}'"
        )));
    }
    let mut out = [0.0; 3];
    for (i, p) in parts.iter().enumerate() {
        out[i] = p
            .trim()
            .parse()
            .map_err(|_| CliError::config(format!("{what}: '{p}' is not a number")))?;
    }
    Ok(out)
}

pub fn plot_data(args: &PlotDataArgs) -> Result<(), CliError> {
    let modes = [
        args.trajectory.is_some(),
        args.report.is_some(),
        args.probe_origin.is_some(),
    ];
    if modes.iter().filter(|&&m| m).count() != 1 {
        return Err(CliError::config(
            "pass exactly one of --trajectory, --report, or --probe-origin",
        ));
    }

    if let Some(traj_path) = &args.trajectory {
        let text = std::fs::read_to_string(traj_path)
            .map_err(|e| CliError::io(format!("cannot read {}: {e}", traj_path.display())))?;
        let mut out = String::from("step,position_error_m\n");
        for line in text.lines().skip(1) {
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() < 16 {
                return Err(CliError::io(format!(
                    "{}: malformed trajectory row '{line}'",
                    traj_path.display()
                )));
            }
            out.push_str(&format!("{},{}\n", fields[0], fields[15]));
        }
        write_text(&args.out, &out)?;
        return Ok(());
    }

    if let Some(report_path) = &args.report {
        let text = std::fs::read_to_string(report_path)
            .map_err(|e| CliError::io(format!("cannot read {}: {e}", report_path.display())))?;
        let report: decay_lidar::eval::Report = serde_json::from_str(&text)
            .map_err(|e| CliError::io(format!("{}: {e}", report_path.display())))?;
        write_text(&args.out, &report.to_csv())?;
        return Ok(());
    }

    // Probe mode: density curves along a user line, one column per map.
    let origin = parse_vec3(args.probe_origin.as_ref().unwrap(), "--probe-origin")?;
    let direction = parse_vec3(
        args.probe_direction
            .as_ref()
            .ok_or_else(|| CliError::config("--probe-direction is required with --probe-origin"))?,
        "--probe-direction",
    )?;
    let dir = Vector3::new(direction[0], direction[1], direction[2]);
    if dir.norm() < 1e-9 {
        return Err(CliError::config("--probe-direction must be nonzero"));
    }
    let dir = dir.normalize();
    if !(args.probe_step > 0.0 && args.probe_r_max > args.probe_step) {
        return Err(CliError::config("--probe-step and --probe-r-max must be positive"));
    }
    let mut maps: Vec<(String, OwnedMap)> = Vec::new();
    if let Some(p) = &args.decay_map {
        maps.push(("decay".into(), read_expecting(p, ModelKind::Decay)?));
    }
    if let Some(p) = &args.reflection_map {
        maps.push(("reflection".into(), read_expecting(p, ModelKind::Reflection)?));
    }
    if let Some(p) = &args.endpoint_map {
        maps.push(("endpoint".into(), read_expecting(p, ModelKind::Endpoint)?));
    }
    if maps.is_empty() {
        return Err(CliError::config(
            "probe mode needs at least one of --decay-map, --reflection-map, --endpoint-map",
        ));
    }
    let pose = Pose::translation(origin[0], origin[1], origin[2]);
    let mut out = Vec::new();
    write!(out, "r").map_err(|e| CliError::io(e.to_string()))?;
    for (name, _) in &maps {
        write!(out, ",{name}_density").map_err(|e| CliError::io(e.to_string()))?;
    }
    writeln!(out).map_err(|e| CliError::io(e.to_string()))?;
    let steps = (args.probe_r_max / args.probe_step).floor() as usize;
    for i in 1..=steps {
        let r = i as f64 * args.probe_step;
        write!(out, "{r}").map_err(|e| CliError::io(e.to_string()))?;
        for (_, map) in &maps {
            let m = Measurement {
                sensor_pose: pose,
                direction: dir,
                reading: Reading::Range(r),
                r_min: 0.0,
                r_max: args.probe_r_max,
            };
            let density = map.model().ray_log_density(&m)?.exp();
            write!(out, ",{density}").map_err(|e| CliError::io(e.to_string()))?;
        }
        writeln!(out).map_err(|e| CliError::io(e.to_string()))?;
    }
    std::fs::write(&args.out, out)
        .map_err(|e| CliError::io(format!("cannot write {}: {e}", args.out.display())))?;
    Ok(())
}

pub fn export(args: &ExportArgs) -> Result<(), CliError> {
    let format: PointcloudFormat = args
        .format
        .parse()
        .map_err(|e: String| CliError::config(e))?;
    match (&args.scans, &args.map) {
        (Some(scans_path), None) => {
            let scans = read_scans(scans_path)?;
            let n = export_scan_endpoints(&args.out, &scans, format)?;
            eprintln!("export: {n} endpoints -> {}", args.out.display());
            Ok(())
        }
        (None, Some(map_path)) => {
            let map = read_decay_map(map_path)?;
            let n = export_map_projection(&args.out, &map, format)?;
            eprintln!("export: {n} columns -> {}", args.out.display());
            Ok(())
        }
        _ => Err(CliError::config(
            "pass exactly one of --scans or --map to export",
        )),
    }
}
