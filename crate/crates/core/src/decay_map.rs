//! Decay-rate map building.
//!
//! Each ray contributes the distances it traveled through every voxel it
//! crossed; a reflection additionally increments the endpoint voxel's hit
//! count. Finalizing divides hits by traveled distance per voxel, which is
//! the maximum-likelihood rate estimate for the accumulated data.

use std::ops::ControlFlow;

use crate::error::{Error, Result};
use crate::grid::{walk_ray, GridGeometry};
use crate::scan::{Measurement, Reading, Scan};

/// Default rate for space outside the grid, 1/m (mean free path 20 m).
pub const DEFAULT_PRIOR_RATE: f64 = 0.05;
/// Default rate for in-grid voxels no ray ever crossed, 1/m.
pub const DEFAULT_UNOBSERVED_RATE: f64 = 0.05;
/// Cap on finalized rates, 1/m. A reflection with near-zero traveled
/// distance would otherwise produce an infinite rate.
pub const DEFAULT_RATE_CAP: f64 = 1e4;

/// Minimum distance credited to a voxel that received a hit, so a positive
/// hit count always comes with positive traveled distance.
pub const MIN_HIT_SEGMENT: f64 = 1e-9;

/// Finalization parameters for a decay-rate map.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MapPriors {
    pub prior_rate: f64,
    pub unobserved_rate: f64,
    pub rate_cap: f64,
}

impl Default for MapPriors {
    fn default() -> Self {
        MapPriors {
            prior_rate: DEFAULT_PRIOR_RATE,
            unobserved_rate: DEFAULT_UNOBSERVED_RATE,
            rate_cap: DEFAULT_RATE_CAP,
        }
    }
}

/// Per-voxel hit counts and traveled-distance sums.
#[derive(Clone, Debug)]
pub struct MapAccumulator {
    geom: GridGeometry,
    hits: Vec<u64>,
    dist: Vec<f64>,
    outside_hits: u64,
    outside_dist: f64,
    sub_skipped: u64,
}

impl MapAccumulator {
    pub fn new(geom: GridGeometry) -> Self {
        let n = geom.voxel_count();
        MapAccumulator {
            geom,
            hits: vec![0; n],
            dist: vec![0.0; n],
            outside_hits: 0,
            outside_dist: 0.0,
            sub_skipped: 0,
        }
    }

    pub fn geometry(&self) -> &GridGeometry {
        &self.geom
    }

    pub fn hits(&self) -> &[u64] {
        &self.hits
    }

    pub fn dist(&self) -> &[f64] {
        &self.dist
    }

    pub fn outside_hits(&self) -> u64 {
        self.outside_hits
    }

    pub fn outside_dist(&self) -> f64 {
        self.outside_dist
    }

    /// Number of sub-range readings skipped during integration.
    pub fn sub_skipped(&self) -> u64 {
        self.sub_skipped
    }

    pub(crate) fn from_raw(
        geom: GridGeometry,
        hits: Vec<u64>,
        dist: Vec<f64>,
        outside_hits: u64,
        outside_dist: f64,
        sub_skipped: u64,
    ) -> Result<Self> {
        if hits.len() != geom.voxel_count() || dist.len() != geom.voxel_count() {
            return Err(Error::invalid("accumulator array length mismatch"));
        }
        Ok(MapAccumulator {
            geom,
            hits,
            dist,
            outside_hits,
            outside_dist,
            sub_skipped,
        })
    }

    /// Add one measurement. Range readings contribute traveled distance plus
    /// a hit in the endpoint voxel; beyond-range readings contribute distance
    /// along the full sensor range; below-range readings are skipped because
    /// their reflection point, and hence their traversal, is unknown.
    pub fn integrate(&mut self, m: &Measurement) -> Result<()> {
        let trace_len = match m.reading {
            Reading::Sub => {
                self.sub_skipped += 1;
                return Ok(());
            }
            Reading::Range(r) => r,
            Reading::Sup => m.r_max,
        };
        let origin = m.origin();
        let dir = m.world_direction();
        let mut last: Option<(Option<usize>, f64)> = None;
        let hits_wanted = m.reading.is_range();
        {
            let dist = &mut self.dist;
            let outside = &mut self.outside_dist;
            walk_ray(&self.geom, &origin, &dir, trace_len, |cell, len| {
                match cell {
                    Some(i) => dist[i] += len,
                    None => *outside += len,
                }
                if hits_wanted {
                    last = Some((cell, len));
                }
                ControlFlow::Continue(())
            })?;
        }
        if let Reading::Range(r) = m.reading {
            let endpoint = m.endpoint(r);
            let hit_cell = self.geom.locate(&endpoint);
            // Distance the final segment already credited to the hit voxel.
            let credited = match last {
                Some((cell, len)) if cell == hit_cell => len,
                _ => 0.0,
            };
            let top_up = (MIN_HIT_SEGMENT - credited).max(0.0);
            match hit_cell {
                Some(i) => {
                    self.hits[i] += 1;
                    self.dist[i] += top_up;
                }
                None => {
                    self.outside_hits += 1;
                    self.outside_dist += top_up;
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

    /// Elementwise sum of two accumulators over the same geometry.
    pub fn merge(&mut self, other: &MapAccumulator) -> Result<()> {
        if self.geom != other.geom {
            return Err(Error::GeometryMismatch(
                "cannot merge accumulators over different grids".into(),
            ));
        }
        for (a, b) in self.hits.iter_mut().zip(&other.hits) {
            *a += b;
        }
        for (a, b) in self.dist.iter_mut().zip(&other.dist) {
            *a += b;
        }
        self.outside_hits += other.outside_hits;
        self.outside_dist += other.outside_dist;
        self.sub_skipped += other.sub_skipped;
        Ok(())
    }

    /// Maximum-likelihood rates: hits divided by traveled distance, capped;
    /// voxels without any traveled distance take the unobserved rate.
    pub fn finalize(&self, priors: MapPriors) -> DecayGrid {
        assert!(
            priors.prior_rate >= 0.0 && priors.unobserved_rate >= 0.0 && priors.rate_cap > 0.0,
            "rates must be nonnegative and the cap positive"
        );
        let rates = self
            .hits
            .iter()
            .zip(&self.dist)
            .map(|(&h, &d)| {
                if d > 0.0 {
                    (h as f64 / d).min(priors.rate_cap)
                } else {
                    priors.unobserved_rate
                }
            })
            .collect();
        DecayGrid {
            geom: self.geom.clone(),
            rates,
            prior_rate: priors.prior_rate,
            unobserved_rate: priors.unobserved_rate,
        }
    }
}

/// The finished map: one decay rate per voxel, in 1/m.
#[derive(Clone, Debug)]
pub struct DecayGrid {
    geom: GridGeometry,
    rates: Vec<f64>,
    prior_rate: f64,
    unobserved_rate: f64,
}

impl DecayGrid {
    pub fn from_rates(
        geom: GridGeometry,
        rates: Vec<f64>,
        prior_rate: f64,
        unobserved_rate: f64,
    ) -> Result<Self> {
        if rates.len() != geom.voxel_count() {
            return Err(Error::invalid(format!(
                "rate array length {} does not match voxel count {}",
                rates.len(),
                geom.voxel_count()
            )));
        }
        if rates.iter().any(|r| !r.is_finite() || *r < 0.0) {
            return Err(Error::invalid("rates must be finite and nonnegative"));
        }
        Ok(DecayGrid {
            geom,
            rates,
            prior_rate,
            unobserved_rate,
        })
    }

    pub fn geometry(&self) -> &GridGeometry {
        &self.geom
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    pub fn prior_rate(&self) -> f64 {
        self.prior_rate
    }

    pub fn unobserved_rate(&self) -> f64 {
        self.unobserved_rate
    }

    /// Rate of a traversal cell; `None` means outside the grid.
    #[inline]
    pub fn rate_at(&self, cell: Option<usize>) -> f64 {
        match cell {
            Some(i) => self.rates[i],
            None => self.prior_rate,
        }
    }

    /// Mean free path 1/rate; infinite in rate-zero voxels.
    pub fn mean_free_path(&self, index: usize) -> f64 {
        1.0 / self.rates[index]
    }
}

/// Build a decay-rate map from scans in one call.
pub fn build_decay_map(scans: &[Scan], geom: GridGeometry, priors: MapPriors) -> Result<DecayGrid> {
    let mut acc = MapAccumulator::new(geom);
    for scan in scans {
        acc.integrate_scan(scan)?;
    }
    Ok(acc.finalize(priors))
}
