//! Lidar sensor-model toolkit built around decay-rate voxel maps.
//!
//! The map stores a per-voxel decay rate: the per-meter rate of the
//! exponential process by which a laser ray is reflected while crossing the
//! voxel. The same map serves mapping (rates are the maximum-likelihood
//! estimate given hit counts and traveled distances) and localization
//! (per-ray densities and out-of-range probabilities). Reference
//! implementations of the reflection-probability and endpoint (likelihood
//! field) models, a forward-model simulator, a particle filter, and
//! KL-divergence model metrics round out the toolkit.

pub mod baselines;
pub mod decay_map;
pub mod error;
pub mod eval;
pub mod grid;
pub mod io;
pub mod likelihood;
pub mod mcl;
pub mod model;
pub mod parallel;
pub mod pose;
pub mod rng;
pub mod scan;
pub mod simulator;

pub use baselines::{
    build_likelihood_field, build_reflection_map, EndpointParams, LikelihoodField,
    ReflectionGrid, ReflectionPriors,
};
pub use decay_map::{build_decay_map, DecayGrid, MapAccumulator, MapPriors};
pub use error::{Error, Result};
pub use grid::{trace_ray, walk_ray, GridGeometry, Segment, Traversal};
pub use likelihood::{
    out_of_range_prob, ray_density, scan_log_likelihood, scan_log_likelihood_at, survival,
    LikelihoodKind, RayLikelihood, ScanScore, LOG_FLOOR,
};
pub use model::{ModelKind, SensorModel};
pub use pose::{Pose, PoseSpec};
pub use rng::SplitMix64;
pub use scan::{Measurement, Ray, Reading, Scan};
pub use simulator::{rasterize_world, GeometrySpec, ScanSpec, TrajectorySpec, WorldSpec};
