//! Reflection-probability model: the hit/miss counting baseline.
//!
//! Each voxel stores q = hits / (hits + misses). A ray's probability of
//! ending in voxel k is q_k times the product of (1 - q_i) over the voxels
//! it crossed beforehand. Unlike the decay model, chord lengths are ignored.

use std::ops::ControlFlow;

use crate::error::{Error, Result};
use crate::grid::{walk_ray, GridGeometry};
use crate::likelihood::RayLikelihood;
use crate::scan::{Measurement, Reading, Scan};

/// Default reflection probability for out-of-grid travel and untouched
/// voxels; roughly matches the default decay prior over one 0.5 m voxel.
pub const DEFAULT_PRIOR_Q: f64 = 0.025;
pub const DEFAULT_UNOBSERVED_Q: f64 = 0.025;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReflectionPriors {
    pub prior_q: f64,
    pub unobserved_q: f64,
}

impl Default for ReflectionPriors {
    fn default() -> Self {
        ReflectionPriors {
            prior_q: DEFAULT_PRIOR_Q,
            unobserved_q: DEFAULT_UNOBSERVED_Q,
        }
    }
}

/// Hit and miss counters while scans are folded in.
#[derive(Clone, Debug)]
pub struct ReflectionAccumulator {
    geom: GridGeometry,
    hits: Vec<u64>,
    misses: Vec<u64>,
}

impl ReflectionAccumulator {
    pub fn new(geom: GridGeometry) -> Self {
        let n = geom.voxel_count();
        ReflectionAccumulator {
            geom,
            hits: vec![0; n],
            misses: vec![0; n],
        }
    }

    pub fn geometry(&self) -> &GridGeometry {
        &self.geom
    }

    /// Range rays: a miss in every voxel crossed with positive chord before
    /// the endpoint voxel, a hit in the endpoint voxel. Beyond-range rays:
    /// misses along the full sensor range. Below-range rays are skipped.
    pub fn integrate(&mut self, m: &Measurement) -> Result<()> {
        let trace_len = match m.reading {
            Reading::Sub => return Ok(()),
            Reading::Range(r) => r,
            Reading::Sup => m.r_max,
        };
        let origin = m.origin();
        let dir = m.world_direction();
        let mut crossed: Vec<usize> = Vec::with_capacity(32);
        walk_ray(&self.geom, &origin, &dir, trace_len, |cell, _len| {
            if let Some(i) = cell {
                crossed.push(i);
            }
            ControlFlow::Continue(())
        })?;
        match m.reading {
            Reading::Range(r) => {
                let hit_cell = self.geom.locate(&m.endpoint(r));
                if crossed.last() == hit_cell.as_ref() {
                    crossed.pop();
                }
                for i in crossed {
                    self.misses[i] += 1;
                }
                if let Some(i) = hit_cell {
                    self.hits[i] += 1;
                }
            }
            _ => {
                for i in crossed {
                    self.misses[i] += 1;
                }
            }
        }
        Ok(())
    }

    pub fn integrate_scan(&mut self, scan: &Scan) -> Result<()> {
        for m in scan.measurements() {
            self.integrate(&m)?;
        }
        Ok(())
    }

    pub fn merge(&mut self, other: &ReflectionAccumulator) -> Result<()> {
        if self.geom != other.geom {
            return Err(Error::GeometryMismatch(
                "cannot merge reflection accumulators over different grids".into(),
            ));
        }
        for (a, b) in self.hits.iter_mut().zip(&other.hits) {
            *a += b;
        }
        for (a, b) in self.misses.iter_mut().zip(&other.misses) {
            *a += b;
        }
        Ok(())
    }

    pub fn finalize(&self, priors: ReflectionPriors) -> ReflectionGrid {
        assert!(
            (0.0..=1.0).contains(&priors.prior_q) && (0.0..=1.0).contains(&priors.unobserved_q),
            "reflection priors must be probabilities"
        );
        let q = self
            .hits
            .iter()
            .zip(&self.misses)
            .map(|(&h, &m)| {
                if h + m > 0 {
                    h as f64 / (h + m) as f64
                } else {
                    priors.unobserved_q
                }
            })
            .collect();
        ReflectionGrid {
            geom: self.geom.clone(),
            q,
            hits: self.hits.clone(),
            misses: self.misses.clone(),
            prior_q: priors.prior_q,
            unobserved_q: priors.unobserved_q,
        }
    }
}

/// Finished reflection map: per-voxel reflection probability plus the raw
/// counters it came from.
#[derive(Clone, Debug)]
pub struct ReflectionGrid {
    geom: GridGeometry,
    q: Vec<f64>,
    hits: Vec<u64>,
    misses: Vec<u64>,
    prior_q: f64,
    unobserved_q: f64,
}

impl ReflectionGrid {
    pub fn from_raw(
        geom: GridGeometry,
        q: Vec<f64>,
        hits: Vec<u64>,
        misses: Vec<u64>,
        prior_q: f64,
        unobserved_q: f64,
    ) -> Result<Self> {
        let n = geom.voxel_count();
        if q.len() != n || hits.len() != n || misses.len() != n {
            return Err(Error::invalid("reflection map array length mismatch"));
        }
        if q.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::invalid("reflection probabilities must lie in [0, 1]"));
        }
        Ok(ReflectionGrid {
            geom,
            q,
            hits,
            misses,
            prior_q,
            unobserved_q,
        })
    }

    pub fn geometry(&self) -> &GridGeometry {
        &self.geom
    }

    pub fn q(&self) -> &[f64] {
        &self.q
    }

    pub fn hits(&self) -> &[u64] {
        &self.hits
    }

    pub fn misses(&self) -> &[u64] {
        &self.misses
    }

    pub fn prior_q(&self) -> f64 {
        self.prior_q
    }

    pub fn unobserved_q(&self) -> f64 {
        self.unobserved_q
    }

    #[inline]
    pub fn q_at(&self, cell: Option<usize>) -> f64 {
        match cell {
            Some(i) => self.q[i],
            None => self.prior_q,
        }
    }
}

pub fn build_reflection_map(
    scans: &[Scan],
    geom: GridGeometry,
    priors: ReflectionPriors,
) -> Result<ReflectionGrid> {
    let mut acc = ReflectionAccumulator::new(geom);
    for scan in scans {
        acc.integrate_scan(scan)?;
    }
    Ok(acc.finalize(priors))
}

/// Log probability of ending in the endpoint cell after passing the cells
/// before it. Outside-grid travel counts as one pseudo-cell with the prior
/// reflection probability per contiguous stretch.
fn log_end_prob(map: &ReflectionGrid, m: &Measurement, r: f64) -> Result<f64> {
    let origin = m.origin();
    let dir = m.world_direction();
    let hit_cell = map.geometry().locate(&m.endpoint(r));
    let mut path: Vec<Option<usize>> = Vec::with_capacity(32);
    walk_ray(map.geometry(), &origin, &dir, r, |cell, _len| {
        path.push(cell);
        ControlFlow::Continue(())
    })?;
    if path.last() == Some(&hit_cell) {
        path.pop();
    }
    let mut log_p = map.q_at(hit_cell).ln();
    for cell in path {
        log_p += (1.0 - map.q_at(cell)).ln();
    }
    Ok(log_p)
}

/// Probability that the ray ends in the voxel containing its endpoint.
pub fn reflection_ray_prob(map: &ReflectionGrid, m: &Measurement) -> Result<RayLikelihood> {
    let r = match m.reading {
        Reading::Range(r) => r,
        _ => {
            return Err(Error::invalid(
                "reflection_ray_prob requires a range reading",
            ))
        }
    };
    Ok(RayLikelihood::probability_from_log(log_end_prob(map, m, r)?))
}

/// Out-of-range probabilities under the reflection model: survive every cell
/// up to the relevant sensor limit, or fail to.
pub fn reflection_out_of_range_prob(
    map: &ReflectionGrid,
    m: &Measurement,
) -> Result<RayLikelihood> {
    let (limit, is_sub) = match m.reading {
        Reading::Sub => (m.r_min, true),
        Reading::Sup => (m.r_max, false),
        Reading::Range(_) => {
            return Err(Error::invalid(
                "reflection_out_of_range_prob requires a sub or sup reading",
            ))
        }
    };
    let origin = m.origin();
    let dir = m.world_direction();
    let mut log_survive = 0.0;
    walk_ray(map.geometry(), &origin, &dir, limit, |cell, _len| {
        log_survive += (1.0 - map.q_at(cell)).ln();
        ControlFlow::Continue(())
    })?;
    if is_sub {
        Ok(RayLikelihood::probability(-log_survive.exp_m1()))
    } else {
        Ok(RayLikelihood::probability_from_log(log_survive))
    }
}

/// Minimum endpoint-voxel chord used when converting to a density.
pub const MIN_CHORD: f64 = 1e-9;

/// Chord length of the full ray line inside the voxel containing the
/// endpoint, independent of where on the chord the endpoint lies.
pub fn endpoint_chord(map: &ReflectionGrid, m: &Measurement, r: f64) -> Result<f64> {
    let geom = map.geometry();
    match geom.locate(&m.endpoint(r)) {
        Some(hit) => {
            let origin = m.origin();
            let dir = m.world_direction();
            // Extend past the endpoint far enough to finish crossing the voxel.
            let extend = r + 2.0 * geom.edge_length() * 3f64.sqrt();
            let mut chord = 0.0;
            walk_ray(geom, &origin, &dir, extend, |cell, len| {
                if cell == Some(hit) {
                    chord += len;
                }
                ControlFlow::Continue(())
            })?;
            Ok(chord)
        }
        // No voxel to integrate over; spread the mass over one edge length.
        None => Ok(geom.edge_length()),
    }
}

/// Convert the end-voxel probability to a density by dividing by the chord
/// length of the ray inside the endpoint voxel.
pub fn reflection_to_density(map: &ReflectionGrid, m: &Measurement) -> Result<RayLikelihood> {
    let r = match m.reading {
        Reading::Range(r) => r,
        _ => {
            return Err(Error::invalid(
                "reflection_to_density requires a range reading",
            ))
        }
    };
    let log_p = log_end_prob(map, m, r)?;
    let chord = endpoint_chord(map, m, r)?.max(MIN_CHORD);
    Ok(RayLikelihood::density_from_log(log_p - chord.ln()))
}
