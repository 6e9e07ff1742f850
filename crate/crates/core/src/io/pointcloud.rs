//! Point-cloud export for external visualization: scan endpoints in the
//! world frame, and a top-down map projection with per-column rate sums.

use std::io::Write;
use std::path::Path;

use crate::decay_map::DecayGrid;
use crate::error::Result;
use crate::scan::{Reading, Scan};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PointcloudFormat {
    Csv,
    PlyAscii,
}

impl std::str::FromStr for PointcloudFormat {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "csv" => Ok(PointcloudFormat::Csv),
            "ply" | "ply-ascii" => Ok(PointcloudFormat::PlyAscii),
            other => Err(format!("unknown pointcloud format '{other}'")),
        }
    }
}

fn ply_header(out: &mut impl Write, count: usize, extra: Option<&str>) -> std::io::Result<()> {
    writeln!(out, "ply")?;
    writeln!(out, "format ascii 1.0")?;
    writeln!(out, "element vertex {count}")?;
    writeln!(out, "property float x")?;
    writeln!(out, "property float y")?;
    writeln!(out, "property float z")?;
    if let Some(name) = extra {
        writeln!(out, "property float {name}")?;
    }
    writeln!(out, "end_header")?;
    Ok(())
}

/// Write the world-frame endpoints of all range readings. Out-of-range rays
/// have no endpoint and are skipped.
pub fn export_scan_endpoints(
    path: &Path,
    scans: &[Scan],
    format: PointcloudFormat,
) -> Result<usize> {
    let mut points = Vec::new();
    for scan in scans {
        for m in scan.measurements() {
            if let Reading::Range(r) = m.reading {
                points.push(m.endpoint(r));
            }
        }
    }
    let mut out = Vec::new();
    match format {
        PointcloudFormat::Csv => {
            writeln!(out, "x,y,z")?;
            for p in &points {
                writeln!(out, "{},{},{}", p.x, p.y, p.z)?;
            }
        }
        PointcloudFormat::PlyAscii => {
            ply_header(&mut out, points.len(), None)?;
            for p in &points {
                writeln!(out, "{} {} {}", p.x as f32, p.y as f32, p.z as f32)?;
            }
        }
    }
    std::fs::write(path, out)?;
    Ok(points.len())
}

/// Sum of rates over z for each (x, y) column, x fastest.
pub fn column_rate_sums(map: &DecayGrid) -> Vec<f64> {
    let geom = map.geometry();
    let [nx, ny, nz] = geom.dims();
    let mut sums = vec![0.0; nx * ny];
    for iz in 0..nz {
        for iy in 0..ny {
            for ix in 0..nx {
                sums[ix + nx * iy] += map.rates()[geom.linear_index([ix, iy, iz])];
            }
        }
    }
    sums
}

/// Write the top-down projection of a decay map: one point per (x, y)
/// column at the column center, carrying the rate summed over z.
pub fn export_map_projection(
    path: &Path,
    map: &DecayGrid,
    format: PointcloudFormat,
) -> Result<usize> {
    let geom = map.geometry();
    let [nx, ny, _] = geom.dims();
    let sums = column_rate_sums(map);
    let origin = geom.origin();
    let edge = geom.edge_length();
    let mut out = Vec::new();
    let center = |i: usize, o: f64| o + (i as f64 + 0.5) * edge;
    match format {
        PointcloudFormat::Csv => {
            writeln!(out, "x,y,rate_sum")?;
            for iy in 0..ny {
                for ix in 0..nx {
                    writeln!(
                        out,
                        "{},{},{}",
                        center(ix, origin.x),
                        center(iy, origin.y),
                        sums[ix + nx * iy]
                    )?;
                }
            }
        }
        PointcloudFormat::PlyAscii => {
            ply_header(&mut out, nx * ny, Some("rate_sum"))?;
            for iy in 0..ny {
                for ix in 0..nx {
                    writeln!(
                        out,
                        "{} {} 0 {}",
                        center(ix, origin.x) as f32,
                        center(iy, origin.y) as f32,
                        sums[ix + nx * iy] as f32
                    )?;
                }
            }
        }
    }
    std::fs::write(path, out)?;
    Ok(nx * ny)
}
