//! Stationary planar fields: random plane waves (Berry) and the
//! Bargmann-Fock series. Points are `[x, y, 0]`; the frame is the standard basis.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Field, Jet};
use crate::ensembles::normal;
use crate::error::{Error, Result};
use crate::matrix::Sym2;
use crate::rng::RngStream;

const FRAME: [[f64; 3]; 2] = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]];

/// Smallest accepted wave count for the plane-wave construction.
pub const MIN_WAVES: usize = 64;

/// Default half-width of the square window on which the Bargmann-Fock
/// truncation error is controlled.
pub const DEFAULT_WINDOW: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlanarKind {
    Berry,
    BargmannFock,
}

impl std::str::FromStr for PlanarKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "berry" => Ok(Self::Berry),
            "bf" | "bargmann_fock" | "bargmann-fock" => Ok(Self::BargmannFock),
            _ => Err(Error::Config(format!("unknown planar model '{s}'"))),
        }
    }
}

#[derive(Debug, Clone)]
pub enum PlanarFieldSample {
    /// `sqrt(2/N) sum_j cos(k_j . x + theta_j)`, `|k_j| = sqrt(2)`.
    Berry { wavevectors: Vec<[f64; 2]>, phases: Vec<f64> },
    /// `sum_{i,j} a_ij v_i(x) v_j(y)`, `v_i(s) = exp(-s^2/2) s^i / sqrt(i!)`.
    BargmannFock { degree: usize, coeffs: Vec<f64>, window: f64 },
}

/// Berry field with `n` plane waves, or a Bargmann-Fock field on the default
/// window (`n` ignored).
pub fn synth_planar(kind: PlanarKind, n: usize, stream: RngStream) -> Result<PlanarFieldSample> {
    match kind {
        PlanarKind::Berry => {
            if n < MIN_WAVES {
                return Err(Error::Domain(format!("plane-wave count {n} < {MIN_WAVES}")));
            }
            let mut rng = stream.rng();
            let mut wavevectors = Vec::with_capacity(n);
            let mut phases = Vec::with_capacity(n);
            for _ in 0..n {
                let a: f64 = rng.random_range(0.0..2.0 * PI);
                wavevectors.push([std::f64::consts::SQRT_2 * a.cos(), std::f64::consts::SQRT_2 * a.sin()]);
                phases.push(rng.random_range(0.0..2.0 * PI));
            }
            Ok(PlanarFieldSample::Berry { wavevectors, phases })
        }
        PlanarKind::BargmannFock => synth_bargmann_fock(DEFAULT_WINDOW, stream),
    }
}

/// Truncation degree `D` such that `sum_{i > D} v_i(s)^2 < 1e-20` for `|s| <= window`.
fn bf_degree(window: f64) -> usize {
    let s2 = window * window;
    // v_i(s)^2 = e^{-s^2} s^{2i} / i!, decreasing in i once i > s^2
    let mut term = (-s2).exp();
    let mut i = 0usize;
    loop {
        i += 1;
        term *= s2 / i as f64;
        if i as f64 > 2.0 * s2 + 1.0 {
            // geometric bound on the remaining tail, ratio s^2/(i+1) <= 1/2
            let tail = term * s2 / (i as f64 + 1.0) * 2.0;
            if tail < 1e-20 {
                return i + 2;
            }
        }
    }
}

pub fn synth_bargmann_fock(window: f64, stream: RngStream) -> Result<PlanarFieldSample> {
    if !(window > 0.0 && window.is_finite()) {
        return Err(Error::Domain(format!("window must be positive (got {window})")));
    }
    let degree = bf_degree(window);
    let mut rng = stream.rng();
    let coeffs = (0..(degree + 1) * (degree + 1)).map(|_| normal(&mut rng)).collect();
    Ok(PlanarFieldSample::BargmannFock { degree, coeffs, window })
}

/// `v_i(s)`, `v_i'(s)`, `v_i''(s)` for `i = 0..=degree`.
fn bf_basis(degree: usize, s: f64) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let mut v = vec![0.0; degree + 1];
    let mut d1 = vec![0.0; degree + 1];
    let mut d2 = vec![0.0; degree + 1];
    v[0] = (-0.5 * s * s).exp();
    d1[0] = -s * v[0];
    d2[0] = -v[0] - s * d1[0];
    for i in 1..=degree {
        let ri = (i as f64).sqrt();
        v[i] = v[i - 1] * s / ri;
        d1[i] = ri * v[i - 1] - s * v[i];
        d2[i] = ri * d1[i - 1] - v[i] - s * d1[i];
    }
    (v, d1, d2)
}

impl PlanarFieldSample {
    pub fn kind(&self) -> PlanarKind {
        match self {
            Self::Berry { .. } => PlanarKind::Berry,
            Self::BargmannFock { .. } => PlanarKind::BargmannFock,
        }
    }

    /// Window half-width on which the series truncation is controlled (infinite for Berry).
    pub fn window(&self) -> f64 {
        match self {
            Self::Berry { .. } => f64::INFINITY,
            Self::BargmannFock { window, .. } => *window,
        }
    }

    pub fn wave_count(&self) -> usize {
        match self {
            Self::Berry { phases, .. } => phases.len(),
            Self::BargmannFock { .. } => 0,
        }
    }

    pub fn eval(&self, p: [f64; 3]) -> Jet {
        let (x, y) = (p[0], p[1]);
        match self {
            Self::Berry { wavevectors, phases } => {
                let scale = (2.0 / phases.len() as f64).sqrt();
                let (mut v, mut gx, mut gy, mut hxx, mut hxy, mut hyy) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
                for (k, &th) in wavevectors.iter().zip(phases) {
                    let (s, c) = (k[0] * x + k[1] * y + th).sin_cos();
                    v += c;
                    gx -= s * k[0];
                    gy -= s * k[1];
                    hxx -= c * k[0] * k[0];
                    hxy -= c * k[0] * k[1];
                    hyy -= c * k[1] * k[1];
                }
                Jet {
                    value: scale * v,
                    grad: [scale * gx, scale * gy],
                    hess: Sym2::new(scale * hxx, scale * hxy, scale * hyy),
                    frame: FRAME,
                }
            }
            Self::BargmannFock { degree, coeffs, .. } => {
                let d = *degree;
                let (vx, dx, d2x) = bf_basis(d, x);
                let (vy, dy, d2y) = bf_basis(d, y);
                let (mut v, mut gx, mut gy, mut hxx, mut hxy, mut hyy) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
                for i in 0..=d {
                    let row = &coeffs[i * (d + 1)..(i + 1) * (d + 1)];
                    let (mut s0, mut s1, mut s2) = (0.0, 0.0, 0.0);
                    for j in 0..=d {
                        s0 += row[j] * vy[j];
                        s1 += row[j] * dy[j];
                        s2 += row[j] * d2y[j];
                    }
                    v += vx[i] * s0;
                    gx += dx[i] * s0;
                    gy += vx[i] * s1;
                    hxx += d2x[i] * s0;
                    hxy += dx[i] * s1;
                    hyy += vx[i] * s2;
                }
                Jet { value: v, grad: [gx, gy], hess: Sym2::new(hxx, hxy, hyy), frame: FRAME }
            }
        }
    }
}

impl Field for PlanarFieldSample {
    fn value(&self, p: [f64; 3]) -> f64 {
        self.eval(p).value
    }

    fn jet(&self, p: [f64; 3]) -> Jet {
        self.eval(p)
    }
}
