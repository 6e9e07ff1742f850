//! Baseline sensor models the decay-rate model is benchmarked against:
//! the reflection (hit/miss) model and the endpoint likelihood field.

pub mod edt;
pub mod endpoint;
pub mod reflection;

pub use endpoint::{
    build_likelihood_field, endpoint_ray_density, EndpointParams, LikelihoodField,
};
pub use reflection::{
    build_reflection_map, reflection_out_of_range_prob, reflection_ray_prob,
    reflection_to_density, ReflectionAccumulator, ReflectionGrid, ReflectionPriors,
};
