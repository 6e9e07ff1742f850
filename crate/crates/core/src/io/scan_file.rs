//! Scan persistence (magic DSC1).
//!
//! File: magic, u32 version, u32 scan count, then per scan a header
//! (pose as 3 x f64 translation + 4 x f64 quaternion wxyz, f64 r_min,
//! f64 r_max, u32 ray count) and records of (3 x f32 direction, u8 kind,
//! f32 r). The r field is meaningful only for kind 1 (range).

use std::path::Path;

use nalgebra::{Quaternion, Translation3, UnitQuaternion, Vector3};

use super::bytes::{ByteReader, ByteWriter};
use crate::error::{Error, ParseErrorKind, Result};
use crate::pose::Pose;
use crate::scan::{Ray, Reading, Scan};

pub const SCAN_MAGIC: [u8; 4] = *b"DSC1";
pub const SCAN_VERSION: u32 = 1;

const KIND_SUB: u8 = 0;
const KIND_RANGE: u8 = 1;
const KIND_SUP: u8 = 2;

pub fn write_scans(path: &Path, scans: &[Scan]) -> Result<()> {
    let records: usize = scans.iter().map(|s| s.rays.len()).sum();
    let mut w = ByteWriter::with_capacity(12 + scans.len() * 76 + records * 17);
    w.magic(SCAN_MAGIC).u32(SCAN_VERSION);
    w.u32(scans.len() as u32);
    for scan in scans {
        let t = scan.pose.translation.vector;
        let q = scan.pose.rotation.quaternion();
        w.f64(t.x).f64(t.y).f64(t.z);
        w.f64(q.w).f64(q.i).f64(q.j).f64(q.k);
        w.f64(scan.r_min).f64(scan.r_max);
        w.u32(scan.rays.len() as u32);
        for ray in &scan.rays {
            w.f32(ray.direction.x as f32)
                .f32(ray.direction.y as f32)
                .f32(ray.direction.z as f32);
            match ray.reading {
                Reading::Sub => {
                    w.u8(KIND_SUB).f32(0.0);
                }
                Reading::Range(r) => {
                    w.u8(KIND_RANGE).f32(r as f32);
                }
                Reading::Sup => {
                    w.u8(KIND_SUP).f32(0.0);
                }
            }
        }
    }
    std::fs::write(path, w.into_bytes())?;
    Ok(())
}

pub fn read_scans(path: &Path) -> Result<Vec<Scan>> {
    let bytes = std::fs::read(path)?;
    let mut r = ByteReader::new(&bytes);
    r.magic(SCAN_MAGIC)?;
    r.version(SCAN_VERSION)?;
    let scan_count = r.u32("scan count")? as usize;
    let mut scans = Vec::with_capacity(scan_count);
    for s in 0..scan_count {
        let tx = r.f64(&format!("scan {s} pose.x"))?;
        let ty = r.f64(&format!("scan {s} pose.y"))?;
        let tz = r.f64(&format!("scan {s} pose.z"))?;
        let qw = r.f64(&format!("scan {s} quat.w"))?;
        let qx = r.f64(&format!("scan {s} quat.x"))?;
        let qy = r.f64(&format!("scan {s} quat.y"))?;
        let qz = r.f64(&format!("scan {s} quat.z"))?;
        let r_min = r.f64(&format!("scan {s} r_min"))?;
        let r_max = r.f64(&format!("scan {s} r_max"))?;
        let ray_count = r.u32(&format!("scan {s} ray count"))? as usize;
        let pose = Pose::from_parts(
            Translation3::new(tx, ty, tz),
            UnitQuaternion::from_quaternion(Quaternion::new(qw, qx, qy, qz)),
        );
        let mut rays = Vec::with_capacity(ray_count);
        for i in 0..ray_count {
            let what = format!("scan {s} record {i}");
            let dx = r.f32(&what)?;
            let dy = r.f32(&what)?;
            let dz = r.f32(&what)?;
            let kind_offset = r.offset();
            let kind = r.u8(&what)?;
            let range = r.f32(&what)?;
            let reading = match kind {
                KIND_SUB => Reading::Sub,
                KIND_RANGE => Reading::Range(range as f64),
                KIND_SUP => Reading::Sup,
                other => {
                    return Err(Error::Parse {
                        offset: kind_offset,
                        kind: ParseErrorKind::InvalidKind {
                            kind: other,
                            record: i,
                        },
                    })
                }
            };
            rays.push(Ray {
                direction: Vector3::new(dx as f64, dy as f64, dz as f64),
                reading,
            });
        }
        scans.push(Scan {
            pose,
            r_min,
            r_max,
            rays,
        });
    }
    if !r.done() {
        return Err(Error::invalid(format!(
            "trailing bytes after scan data at offset {}",
            r.offset()
        )));
    }
    Ok(scans)
}
