//! Exact Euclidean distance transform on the voxel lattice.
//!
//! Separable lower-envelope (parabola) passes per axis on squared
//! distances, after Felzenszwalb and Huttenlocher. Exact for point sites on
//! an integer lattice, which is what the likelihood field needs.

/// 1D squared distance transform: `out[q] = min_p (q - p)^2 + f[p]`.
fn transform_1d(f: &[f64], out: &mut [f64], v: &mut [usize], z: &mut [f64]) {
    let n = f.len();
    debug_assert!(out.len() == n && v.len() == n && z.len() == n + 1);
    let mut k = 0usize;
    v[0] = 0;
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    for q in 1..n {
        if f[q] == f64::INFINITY {
            continue;
        }
        loop {
            let p = v[k];
            let s = if f[p] == f64::INFINITY {
                // Any finite parabola beats an infinite one everywhere.
                f64::NEG_INFINITY
            } else {
                ((f[q] + (q * q) as f64) - (f[p] + (p * p) as f64)) / (2.0 * (q - p) as f64)
            };
            if s <= z[k] {
                if k == 0 {
                    v[0] = q;
                    z[1] = f64::INFINITY;
                    break;
                }
                k -= 1;
            } else {
                k += 1;
                v[k] = q;
                z[k] = s;
                z[k + 1] = f64::INFINITY;
                break;
            }
        }
    }
    let mut k = 0usize;
    for (q, out_q) in out.iter_mut().enumerate() {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let p = v[k];
        *out_q = if f[p] == f64::INFINITY {
            f64::INFINITY
        } else {
            ((q as f64 - p as f64) * (q as f64 - p as f64)) + f[p]
        };
    }
}

/// 3D squared EDT in lattice units. `occupied` marks source voxels; the
/// result is the squared index-space distance to the nearest source
/// (infinity when there is none). `dims` is `[nx, ny, nz]`, x fastest.
pub fn squared_edt_3d(occupied: &[bool], dims: [usize; 3]) -> Vec<f64> {
    let [nx, ny, nz] = dims;
    assert_eq!(occupied.len(), nx * ny * nz);
    let mut dist: Vec<f64> = occupied
        .iter()
        .map(|&o| if o { 0.0 } else { f64::INFINITY })
        .collect();

    let max_n = nx.max(ny).max(nz);
    let mut f = vec![0.0; max_n];
    let mut out = vec![0.0; max_n];
    let mut v = vec![0usize; max_n];
    let mut z = vec![0.0; max_n + 1];

    // x pass
    for iz in 0..nz {
        for iy in 0..ny {
            let base = nx * (iy + ny * iz);
            f[..nx].copy_from_slice(&dist[base..base + nx]);
            transform_1d(&f[..nx], &mut out[..nx], &mut v[..nx], &mut z[..nx + 1]);
            dist[base..base + nx].copy_from_slice(&out[..nx]);
        }
    }
    // y pass
    for iz in 0..nz {
        for ix in 0..nx {
            for iy in 0..ny {
                f[iy] = dist[ix + nx * (iy + ny * iz)];
            }
            transform_1d(&f[..ny], &mut out[..ny], &mut v[..ny], &mut z[..ny + 1]);
            for iy in 0..ny {
                dist[ix + nx * (iy + ny * iz)] = out[iy];
            }
        }
    }
    // z pass
    for iy in 0..ny {
        for ix in 0..nx {
            for iz in 0..nz {
                f[iz] = dist[ix + nx * (iy + ny * iz)];
            }
            transform_1d(&f[..nz], &mut out[..nz], &mut v[..nz], &mut z[..nz + 1]);
            for iz in 0..nz {
                dist[ix + nx * (iy + ny * iz)] = out[iz];
            }
        }
    }
    dist
}
