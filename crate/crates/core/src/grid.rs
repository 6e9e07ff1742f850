//! Axis-aligned voxel grids with exact per-voxel ray traversal.
//!
//! Voxel boxes are half-open, `[lo, hi)` on each axis, so every point maps to
//! at most one voxel. Linear indices run x-fastest: `ix + nx*(iy + ny*iz)`.

use std::ops::ControlFlow;

use nalgebra::{Point3, Vector3};

use crate::error::{Error, Result};

/// Tolerance on the norm of a ray direction.
pub const UNIT_NORM_TOL: f64 = 1e-9;

/// Voxel tesselation: origin corner, cubic edge length, and integer extents.
#[derive(Clone, Debug, PartialEq)]
pub struct GridGeometry {
    origin: Point3<f64>,
    edge: f64,
    dims: [usize; 3],
}

impl GridGeometry {
    pub fn new(origin: Point3<f64>, edge_length: f64, dims: [usize; 3]) -> Result<Self> {
        if edge_length.is_nan() || edge_length <= 0.0 || !edge_length.is_finite() {
            return Err(Error::invalid(format!(
                "edge_length must be positive and finite, got {edge_length}"
            )));
        }
        if dims.contains(&0) {
            return Err(Error::invalid(format!("all dims must be >= 1, got {dims:?}")));
        }
        Ok(GridGeometry {
            origin,
            edge: edge_length,
            dims,
        })
    }

    pub fn origin(&self) -> Point3<f64> {
        self.origin
    }

    pub fn edge_length(&self) -> f64 {
        self.edge
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn voxel_count(&self) -> usize {
        self.dims[0] * self.dims[1] * self.dims[2]
    }

    /// Upper corner of the grid box (exclusive).
    pub fn max_corner(&self) -> Point3<f64> {
        self.origin
            + Vector3::new(
                self.dims[0] as f64 * self.edge,
                self.dims[1] as f64 * self.edge,
                self.dims[2] as f64 * self.edge,
            )
    }

    #[inline]
    pub fn linear_index(&self, coords: [usize; 3]) -> usize {
        debug_assert!(coords[0] < self.dims[0]);
        debug_assert!(coords[1] < self.dims[1]);
        debug_assert!(coords[2] < self.dims[2]);
        coords[0] + self.dims[0] * (coords[1] + self.dims[1] * coords[2])
    }

    #[inline]
    pub fn voxel_coords(&self, index: usize) -> [usize; 3] {
        let ix = index % self.dims[0];
        let rest = index / self.dims[0];
        [ix, rest % self.dims[1], rest / self.dims[1]]
    }

    pub fn voxel_center(&self, index: usize) -> Point3<f64> {
        let c = self.voxel_coords(index);
        self.origin
            + Vector3::new(
                (c[0] as f64 + 0.5) * self.edge,
                (c[1] as f64 + 0.5) * self.edge,
                (c[2] as f64 + 0.5) * self.edge,
            )
    }

    /// Voxel containing `point`, or `None` when outside the grid.
    #[inline]
    pub fn locate(&self, point: &Point3<f64>) -> Option<usize> {
        let mut coords = [0usize; 3];
        for a in 0..3 {
            let rel = (point[a] - self.origin[a]) / self.edge;
            if rel < 0.0 {
                return None;
            }
            let k = rel.floor() as usize;
            if k >= self.dims[a] {
                return None;
            }
            coords[a] = k;
        }
        Some(self.linear_index(coords))
    }
}

/// One traversal segment: the voxel crossed (`None` = outside the grid) and
/// the distance traveled inside it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Segment {
    pub voxel: Option<usize>,
    pub length: f64,
}

/// Ordered per-voxel chords of one ray, covering the full ray length.
#[derive(Clone, Debug, Default)]
pub struct Traversal {
    pub segments: Vec<Segment>,
    pub total_length: f64,
}

impl Traversal {
    pub fn segment_sum(&self) -> f64 {
        self.segments.iter().map(|s| s.length).sum()
    }
}

fn check_direction(direction: &Vector3<f64>) -> Result<()> {
    let norm = direction.norm();
    if (norm - 1.0).abs() > UNIT_NORM_TOL {
        return Err(Error::invalid(format!(
            "ray direction must be unit length, |d| = {norm}"
        )));
    }
    Ok(())
}

/// Walk the ray `[origin, origin + length*direction]`, visiting each segment
/// in travel order. Out-of-grid travel is visited as coalesced `None`
/// segments before and after the in-grid portion. Zero-length segments are
/// skipped; when the ray hits an edge or corner exactly, all tied axes
/// advance at once. Returning `Break` stops the walk early.
pub fn walk_ray<F>(
    geom: &GridGeometry,
    origin: &Point3<f64>,
    direction: &Vector3<f64>,
    length: f64,
    mut visit: F,
) -> Result<()>
where
    F: FnMut(Option<usize>, f64) -> ControlFlow<()>,
{
    check_direction(direction)?;
    if length.is_nan() || length < 0.0 || !length.is_finite() {
        return Err(Error::invalid(format!(
            "ray length must be finite and >= 0, got {length}"
        )));
    }
    if length == 0.0 {
        return Ok(());
    }

    // Clip to the grid box with the slab method.
    let lo = geom.origin();
    let hi = geom.max_corner();
    let mut t_enter = f64::NEG_INFINITY;
    let mut t_exit = f64::INFINITY;
    for a in 0..3 {
        let d = direction[a];
        if d == 0.0 {
            if origin[a] < lo[a] || origin[a] >= hi[a] {
                t_enter = f64::INFINITY;
                break;
            }
        } else {
            let ta = (lo[a] - origin[a]) / d;
            let tb = (hi[a] - origin[a]) / d;
            let (t0, t1) = if ta <= tb { (ta, tb) } else { (tb, ta) };
            t_enter = t_enter.max(t0);
            t_exit = t_exit.min(t1);
        }
    }
    let t_start = t_enter.max(0.0);
    let t_end = t_exit.min(length);

    if t_start >= t_end {
        // The ray never enters the grid.
        let _ = visit(None, length);
        return Ok(());
    }

    if t_start > 0.0 {
        if let ControlFlow::Break(()) = visit(None, t_start) {
            return Ok(());
        }
    }

    // Starting voxel, clamped so boundary entry points stay in range.
    let mut idx = [0i64; 3];
    for a in 0..3 {
        let p = origin[a] + t_start * direction[a];
        let k = ((p - geom.origin[a]) / geom.edge).floor() as i64;
        idx[a] = k.clamp(0, geom.dims[a] as i64 - 1);
    }

    // Parametric distance to the next plane crossing per axis, recomputed
    // from integer plane indices each step so no drift accumulates.
    let mut step = [0i64; 3];
    let mut inv_d = [0f64; 3];
    for a in 0..3 {
        step[a] = if direction[a] > 0.0 {
            1
        } else if direction[a] < 0.0 {
            -1
        } else {
            0
        };
        inv_d[a] = 1.0 / direction[a];
    }
    let plane_t = |a: usize, k: i64| (geom.origin[a] + k as f64 * geom.edge - origin[a]) * inv_d[a];
    let next_t = |a: usize, idx_a: i64| -> f64 {
        match step[a] {
            1 => plane_t(a, idx_a + 1),
            -1 => plane_t(a, idx_a),
            _ => f64::INFINITY,
        }
    };

    let mut t_next = [next_t(0, idx[0]), next_t(1, idx[1]), next_t(2, idx[2])];
    let mut t_cur = t_start;
    let t_grid_exit;

    loop {
        let t_hit = t_next[0].min(t_next[1]).min(t_next[2]);
        let t_seg_end = t_hit.min(t_end);
        if t_seg_end > t_cur {
            let cell = geom.linear_index([idx[0] as usize, idx[1] as usize, idx[2] as usize]);
            if let ControlFlow::Break(()) = visit(Some(cell), t_seg_end - t_cur) {
                return Ok(());
            }
            t_cur = t_seg_end;
        }
        if t_hit >= t_end {
            t_grid_exit = t_end;
            break;
        }
        // Advance every axis tied at t_hit; corner-degenerate voxels are
        // skipped rather than visited with zero length.
        let mut exited = false;
        for a in 0..3 {
            if t_next[a] == t_hit {
                idx[a] += step[a];
                if idx[a] < 0 || idx[a] >= geom.dims[a] as i64 {
                    exited = true;
                } else {
                    t_next[a] = next_t(a, idx[a]);
                }
            }
        }
        if exited {
            t_grid_exit = t_cur.max(t_hit.min(t_end));
            break;
        }
    }

    if length > t_grid_exit {
        let _ = visit(None, length - t_grid_exit);
    }
    Ok(())
}

/// Exact per-voxel distances along `[origin, origin + length*direction]`.
pub fn trace_ray(
    geom: &GridGeometry,
    origin: &Point3<f64>,
    direction: &Vector3<f64>,
    length: f64,
) -> Result<Traversal> {
    let mut segments = Vec::new();
    walk_ray(geom, origin, direction, length, |voxel, seg_len| {
        segments.push(Segment {
            voxel,
            length: seg_len,
        });
        ControlFlow::Continue(())
    })?;
    Ok(Traversal {
        segments,
        total_length: length,
    })
}
