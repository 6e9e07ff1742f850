//! Binary persistence of scans and maps, plus point-cloud export.
//!
//! Every format is little-endian and starts with a 4-byte magic and a u32
//! version; readers reject unknown magics and versions.

pub mod bytes;
pub mod map_file;
pub mod pointcloud;
pub mod scan_file;

pub use map_file::{
    read_accumulator, read_decay_map, read_likelihood_field, read_reflection_map, sniff_magic,
    write_accumulator, write_decay_map, write_likelihood_field, write_reflection_map,
    ACCUMULATOR_MAGIC, DECAY_MAP_MAGIC, FORMAT_VERSION, LIKELIHOOD_FIELD_MAGIC,
    REFLECTION_MAP_MAGIC,
};
pub use pointcloud::{
    column_rate_sums, export_map_projection, export_scan_endpoints, PointcloudFormat,
};
pub use scan_file::{read_scans, write_scans, SCAN_MAGIC, SCAN_VERSION};
