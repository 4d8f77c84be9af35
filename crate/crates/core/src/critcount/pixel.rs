//! Euler characteristic of an excursion set from a pixelated sphere.
//!
//! Vertices are the points of a latitude-longitude grid with rings at
//! `theta_i = (i + 1/2) pi / n_theta` plus the two poles. Each quad between
//! rings is split along one diagonal and the polar caps are fans, giving a
//! triangulation of the sphere. `{f >= t}` is approximated by the induced
//! subcomplex on the vertices where `f >= t`, whose Euler characteristic is
//! `V - E + F`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::fieldsim::{ChiFieldSample, SphericalFieldSample};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PixelGrid {
    pub n_theta: usize,
    pub n_phi: usize,
}

/// Chi-field values on a [`PixelGrid`]: rings row-major, then north and south poles.
#[derive(Debug, Clone)]
pub struct GridValues {
    pub rings: Vec<f64>,
    pub north: f64,
    pub south: f64,
}

impl PixelGrid {
    pub fn new(n_theta: usize, n_phi: usize) -> Self {
        assert!(n_theta >= 2 && n_phi >= 3, "grid too small");
        Self { n_theta, n_phi }
    }

    pub fn thetas(&self) -> Vec<f64> {
        (0..self.n_theta).map(|i| (i as f64 + 0.5) * PI / self.n_theta as f64).collect()
    }

    pub fn chi_values(&self, field: &ChiFieldSample<SphericalFieldSample>) -> GridValues {
        let th = self.thetas();
        let mut sq = vec![0.0; self.n_theta * self.n_phi];
        for c in field.components() {
            let v = c.eval_ring_grid(&th, self.n_phi);
            for (s, x) in sq.iter_mut().zip(v) {
                *s += x * x;
            }
        }
        sq.iter_mut().for_each(|s| *s = s.sqrt());
        GridValues { rings: sq, north: field.value([0.0, 0.0, 1.0]), south: field.value([0.0, 0.0, -1.0]) }
    }
}

/// `V - E + F` of the induced subcomplex on `{f >= t}`.
pub fn pixel_euler_characteristic(grid: &PixelGrid, vals: &GridValues, t: f64) -> i64 {
    let (nt, np) = (grid.n_theta, grid.n_phi);
    let inside = |i: usize, j: usize| vals.rings[i * np + j % np] >= t;
    let north = vals.north >= t;
    let south = vals.south >= t;
    let (mut v, mut e, mut f) = (0i64, 0i64, 0i64);
    v += north as i64 + south as i64;
    for i in 0..nt {
        for j in 0..np {
            let a = inside(i, j);
            if !a {
                continue;
            }
            v += 1;
            // ring edge to (i, j+1)
            let r = inside(i, j + 1);
            e += r as i64;
            if i + 1 < nt {
                let d = inside(i + 1, j);
                let dr = inside(i + 1, j + 1);
                e += d as i64 + dr as i64;
                // triangles (i,j),(i,j+1),(i+1,j+1) and (i,j),(i+1,j+1),(i+1,j)
                f += (r && dr) as i64 + (dr && d) as i64;
            }
        }
    }
    for j in 0..np {
        let (a, b) = (inside(0, j), inside(0, j + 1));
        e += (north && a) as i64;
        f += (north && a && b) as i64;
        let (a, b) = (inside(nt - 1, j), inside(nt - 1, j + 1));
        e += (south && a) as i64;
        f += (south && a && b) as i64;
    }
    v - e + f
}
