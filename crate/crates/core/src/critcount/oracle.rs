//! Empirical second-order structure of a field at a fixed point.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::PowerSpectrum;
use crate::error::{Error, Result};
use crate::fieldsim::{sphere_exp, synth_bargmann_fock, synth_planar, synth_sphere, Field, Jet, PlanarKind};
use crate::kacrice::{MCEstimate, Welford};
use crate::rng::RngStream;

pub const MIN_ORACLE_REALIZATIONS: u64 = 10_000;

/// Plane waves per Berry realization in the oracle. The Hessian covariance is
/// exact for any wave count.
const ORACLE_WAVES: usize = 256;
/// Realizations cross-checked against finite differences.
const FD_CHECKS: u64 = 20;

#[derive(Debug, Clone, PartialEq)]
pub enum OracleSource {
    /// Normalized isotropic field on the sphere of radius `r`, evaluated at `(1, 0, 0)`.
    Sphere(PowerSpectrum),
    /// Stationary planar field, evaluated at the origin.
    Planar(PlanarKind),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovarianceOracleReport {
    pub est_var_h1: MCEstimate,
    pub est_cov_h13: MCEstimate,
    pub est_var_h2: MCEstimate,
    pub est_e_h1_gamma: MCEstimate,
    /// Per-realization `h1 h3 - h2^2`, an unbiased estimate of `c - sigma^2`.
    pub est_c_minus_sigma2: MCEstimate,
    pub implied_sigma2: f64,
    pub implied_c: f64,
    pub implied_c_minus_sigma2: f64,
    /// Largest |analytic - finite difference| Hessian entry over the checked realizations.
    pub fd_max_discrepancy: f64,
}

/// Second directional derivatives along unit tangents `u`, `v`, `(u+v)/sqrt 2`
/// by the fourth-order five-point stencil, assembled into (h11, h12, h22).
fn fd_hessian(at: impl Fn(usize, f64) -> f64, h: f64) -> [f64; 3] {
    let d2 = |dir: usize| {
        (-at(dir, 2.0 * h) + 16.0 * at(dir, h) - 30.0 * at(dir, 0.0) + 16.0 * at(dir, -h) - at(dir, -2.0 * h))
            / (12.0 * h * h)
    };
    let (a, b, c) = (d2(0), d2(1), d2(2));
    [a, c - 0.5 * (a + b), b]
}

fn sample_jet(source: &OracleSource, stream: RngStream, fd: bool) -> Result<(Jet, f64)> {
    match source {
        OracleSource::Sphere(spec) => {
            let f = synth_sphere(spec, stream)?;
            let p = [1.0, 0.0, 0.0];
            let j = f.eval(p);
            let mut err = 0.0;
            if fd {
                let r = f.radius();
                let s2 = std::f64::consts::FRAC_1_SQRT_2;
                let dirs = [j.frame[0], j.frame[1], std::array::from_fn(|i| s2 * (j.frame[0][i] + j.frame[1][i]))];
                // arc length s on the radius-r sphere
                let at = |d: usize, s: f64| f.value(sphere_exp(p, dirs[d], s / r));
                err = hess_discrepancy(&j, fd_hessian(at, 1e-3 * r));
            }
            Ok((j, err))
        }
        OracleSource::Planar(kind) => {
            let f = match kind {
                PlanarKind::Berry => synth_planar(PlanarKind::Berry, ORACLE_WAVES, stream)?,
                PlanarKind::BargmannFock => synth_bargmann_fock(1.0, stream)?,
            };
            let j = f.jet([0.0; 3]);
            let mut err = 0.0;
            if fd {
                let s2 = std::f64::consts::FRAC_1_SQRT_2;
                let dirs = [[1.0, 0.0], [0.0, 1.0], [s2, s2]];
                let at = |d: usize, s: f64| f.value([s * dirs[d][0], s * dirs[d][1], 0.0]);
                err = hess_discrepancy(&j, fd_hessian(at, 1e-3));
            }
            Ok((j, err))
        }
    }
}

fn hess_discrepancy(j: &Jet, fd: [f64; 3]) -> f64 {
    (j.hess.a11 - fd[0]).abs().max((j.hess.a12 - fd[1]).abs()).max((j.hess.a22 - fd[2]).abs())
}

/// Estimates `var h1`, `cov(h1, h3)`, `var h2` and `E[h1 X]` across `n`
/// realizations, with `H` the Hessian in the point's fixed frame and `X` the
/// value. Means are known to be zero, so raw second moments are used.
pub fn hessian_covariance_oracle(source: &OracleSource, n: u64, stream: RngStream) -> Result<CovarianceOracleReport> {
    if n < MIN_ORACLE_REALIZATIONS {
        return Err(Error::Domain(format!("oracle needs at least {MIN_ORACLE_REALIZATIONS} realizations (got {n})")));
    }
    let chunk = 1024u64;
    let parts: Vec<Result<([Welford; 5], f64)>> = (0..n.div_ceil(chunk))
        .into_par_iter()
        .map(|c| {
            let mut acc = [Welford::default(); 5];
            let mut fd_err: f64 = 0.0;
            for i in c * chunk..((c + 1) * chunk).min(n) {
                let (j, e) = sample_jet(source, stream.split(i), i < FD_CHECKS)?;
                fd_err = fd_err.max(e);
                let (h1, h2, h3) = (j.hess.a11, j.hess.a12, j.hess.a22);
                let xs = [h1 * h1, h1 * h3, h2 * h2, h1 * j.value, h1 * h3 - h2 * h2];
                for (a, x) in acc.iter_mut().zip(xs) {
                    a.push(x);
                }
            }
            Ok((acc, fd_err))
        })
        .collect();
    let mut total = [Welford::default(); 5];
    let mut fd_max: f64 = 0.0;
    for p in parts {
        let (acc, e) = p?;
        fd_max = fd_max.max(e);
        for (t, a) in total.iter_mut().zip(&acc) {
            t.merge(a);
        }
    }
    let [v1, c13, v2, g, d] = total.map(|w| w.estimate(stream.seed));
    Ok(CovarianceOracleReport {
        est_var_h1: v1,
        est_cov_h13: c13,
        est_var_h2: v2,
        est_e_h1_gamma: g,
        est_c_minus_sigma2: d,
        implied_sigma2: v2.value,
        implied_c: c13.value,
        implied_c_minus_sigma2: c13.value - v2.value,
        fd_max_discrepancy: fd_max,
    })
}
