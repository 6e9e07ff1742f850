//! Map persistence.
//!
//! All formats share the layout: 4-byte magic, u32 version, geometry block
//! (3 x f64 origin, f64 edge, 3 x u32 dims), format-specific scalars, then
//! per-voxel arrays in x-fastest order.
//!
//!   DRM1  decay-rate map        f64 prior + unobserved rates, f32 rates
//!   DRA1  decay accumulator     outside/sub counters, (u64 hits, f64 dist) pairs
//!   RFM1  reflection map        f64 prior + unobserved q, f32 q, u64 hits, u64 misses
//!   LFM1  likelihood field      f64 sigma + p_oor, f32 nearest distances

use std::path::Path;

use nalgebra::Point3;

use super::bytes::{ByteReader, ByteWriter};
use crate::baselines::endpoint::LikelihoodField;
use crate::baselines::reflection::ReflectionGrid;
use crate::decay_map::{DecayGrid, MapAccumulator};
use crate::error::{Error, Result};
use crate::grid::GridGeometry;

pub const FORMAT_VERSION: u32 = 1;

pub const DECAY_MAP_MAGIC: [u8; 4] = *b"DRM1";
pub const ACCUMULATOR_MAGIC: [u8; 4] = *b"DRA1";
pub const REFLECTION_MAP_MAGIC: [u8; 4] = *b"RFM1";
pub const LIKELIHOOD_FIELD_MAGIC: [u8; 4] = *b"LFM1";

fn write_geometry(w: &mut ByteWriter, geom: &GridGeometry) -> Result<()> {
    let o = geom.origin();
    w.f64(o.x).f64(o.y).f64(o.z).f64(geom.edge_length());
    for d in geom.dims() {
        if d > u32::MAX as usize {
            return Err(Error::invalid("grid dimension exceeds u32"));
        }
        w.u32(d as u32);
    }
    Ok(())
}

fn read_geometry(r: &mut ByteReader) -> Result<GridGeometry> {
    let ox = r.f64("origin.x")?;
    let oy = r.f64("origin.y")?;
    let oz = r.f64("origin.z")?;
    let edge = r.f64("edge_length")?;
    let nx = r.u32("dims.x")? as usize;
    let ny = r.u32("dims.y")? as usize;
    let nz = r.u32("dims.z")? as usize;
    GridGeometry::new(Point3::new(ox, oy, oz), edge, [nx, ny, nz])
}

/// Peek at a map file's magic to tell which model it stores.
pub fn sniff_magic(path: &Path) -> Result<[u8; 4]> {
    let bytes = std::fs::read(path)?;
    if bytes.len() < 4 {
        return Err(Error::truncated(0, "magic"));
    }
    Ok([bytes[0], bytes[1], bytes[2], bytes[3]])
}

pub fn write_decay_map(path: &Path, map: &DecayGrid) -> Result<()> {
    let geom = map.geometry();
    let mut w = ByteWriter::with_capacity(64 + 4 * geom.voxel_count());
    w.magic(DECAY_MAP_MAGIC).u32(FORMAT_VERSION);
    write_geometry(&mut w, geom)?;
    w.f64(map.prior_rate()).f64(map.unobserved_rate());
    for &rate in map.rates() {
        w.f32(rate as f32);
    }
    std::fs::write(path, w.into_bytes())?;
    Ok(())
}

pub fn read_decay_map(path: &Path) -> Result<DecayGrid> {
    let bytes = std::fs::read(path)?;
    let mut r = ByteReader::new(&bytes);
    r.magic(DECAY_MAP_MAGIC)?;
    r.version(FORMAT_VERSION)?;
    let geom = read_geometry(&mut r)?;
    let prior = r.f64("prior_rate")?;
    let unobserved = r.f64("unobserved_rate")?;
    let n = geom.voxel_count();
    let mut rates = Vec::with_capacity(n);
    for i in 0..n {
        rates.push(r.f32(&format!("rate[{i}]"))? as f64);
    }
    DecayGrid::from_rates(geom, rates, prior, unobserved)
}

pub fn write_accumulator(path: &Path, acc: &MapAccumulator) -> Result<()> {
    let geom = acc.geometry();
    let mut w = ByteWriter::with_capacity(96 + 16 * geom.voxel_count());
    w.magic(ACCUMULATOR_MAGIC).u32(FORMAT_VERSION);
    write_geometry(&mut w, geom)?;
    w.u64(acc.outside_hits())
        .f64(acc.outside_dist())
        .u64(acc.sub_skipped());
    for (&h, &d) in acc.hits().iter().zip(acc.dist()) {
        w.u64(h).f64(d);
    }
    std::fs::write(path, w.into_bytes())?;
    Ok(())
}

pub fn read_accumulator(path: &Path) -> Result<MapAccumulator> {
    let bytes = std::fs::read(path)?;
    let mut r = ByteReader::new(&bytes);
    r.magic(ACCUMULATOR_MAGIC)?;
    r.version(FORMAT_VERSION)?;
    let geom = read_geometry(&mut r)?;
    let outside_hits = r.u64("outside_hits")?;
    let outside_dist = r.f64("outside_dist")?;
    let sub_skipped = r.u64("sub_skipped")?;
    let n = geom.voxel_count();
    let mut hits = Vec::with_capacity(n);
    let mut dist = Vec::with_capacity(n);
    for i in 0..n {
        hits.push(r.u64(&format!("hits[{i}]"))?);
        dist.push(r.f64(&format!("dist[{i}]"))?);
    }
    MapAccumulator::from_raw(geom, hits, dist, outside_hits, outside_dist, sub_skipped)
}

pub fn write_reflection_map(path: &Path, map: &ReflectionGrid) -> Result<()> {
    let geom = map.geometry();
    let mut w = ByteWriter::with_capacity(96 + 20 * geom.voxel_count());
    w.magic(REFLECTION_MAP_MAGIC).u32(FORMAT_VERSION);
    write_geometry(&mut w, geom)?;
    w.f64(map.prior_q()).f64(map.unobserved_q());
    for &q in map.q() {
        w.f32(q as f32);
    }
    for &h in map.hits() {
        w.u64(h);
    }
    for &m in map.misses() {
        w.u64(m);
    }
    std::fs::write(path, w.into_bytes())?;
    Ok(())
}

pub fn read_reflection_map(path: &Path) -> Result<ReflectionGrid> {
    let bytes = std::fs::read(path)?;
    let mut r = ByteReader::new(&bytes);
    r.magic(REFLECTION_MAP_MAGIC)?;
    r.version(FORMAT_VERSION)?;
    let geom = read_geometry(&mut r)?;
    let prior_q = r.f64("prior_q")?;
    let unobserved_q = r.f64("unobserved_q")?;
    let n = geom.voxel_count();
    let mut q = Vec::with_capacity(n);
    for i in 0..n {
        q.push(r.f32(&format!("q[{i}]"))? as f64);
    }
    let mut hits = Vec::with_capacity(n);
    for i in 0..n {
        hits.push(r.u64(&format!("hits[{i}]"))?);
    }
    let mut misses = Vec::with_capacity(n);
    for i in 0..n {
        misses.push(r.u64(&format!("misses[{i}]"))?);
    }
    ReflectionGrid::from_raw(geom, q, hits, misses, prior_q, unobserved_q)
}

pub fn write_likelihood_field(path: &Path, field: &LikelihoodField) -> Result<()> {
    let geom = field.geometry();
    let mut w = ByteWriter::with_capacity(80 + 4 * geom.voxel_count());
    w.magic(LIKELIHOOD_FIELD_MAGIC).u32(FORMAT_VERSION);
    write_geometry(&mut w, geom)?;
    w.f64(field.sigma()).f64(field.p_oor());
    for &d in field.nearest_dist() {
        w.f32(d as f32);
    }
    std::fs::write(path, w.into_bytes())?;
    Ok(())
}

pub fn read_likelihood_field(path: &Path) -> Result<LikelihoodField> {
    let bytes = std::fs::read(path)?;
    let mut r = ByteReader::new(&bytes);
    r.magic(LIKELIHOOD_FIELD_MAGIC)?;
    r.version(FORMAT_VERSION)?;
    let geom = read_geometry(&mut r)?;
    let sigma = r.f64("sigma")?;
    let p_oor = r.f64("p_oor")?;
    let n = geom.voxel_count();
    let mut nearest = Vec::with_capacity(n);
    for i in 0..n {
        nearest.push(r.f32(&format!("nearest_dist[{i}]"))? as f64);
    }
    LikelihoodField::from_raw(geom, nearest, sigma, p_oor)
}
