//! Direct counting of critical points of simulated chi fields on the sphere,
//! a pixel-grid Euler characteristic, and the Hessian covariance oracle.

mod mesh;
mod oracle;
mod pixel;

pub use mesh::{default_depth, icosphere, IcoSphere};
pub use oracle::{hessian_covariance_oracle, CovarianceOracleReport, OracleSource, MIN_ORACLE_REALIZATIONS};
pub use pixel::{pixel_euler_characteristic, GridValues, PixelGrid};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fieldsim::{normalize, ChiFieldSample, SphericalFieldSample};

/// Newton convergence threshold on `|grad f|`.
pub const GRAD_TOL: f64 = 1e-10;
/// Geodesic radius (unit sphere) within which refined points are merged.
pub const MERGE_RADIUS: f64 = 1e-6;
/// Hessian eigenvalues with `|lambda|` at or below this flag a point as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-8;
/// Barycentric slack when testing whether the interpolated gradient vanishes in a cell.
const BARY_SLACK: f64 = 0.05;
const MAX_NEWTON: usize = 50;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoint {
    /// Unit vector.
    pub location: [f64; 3],
    pub value: f64,
    pub grad_norm: f64,
    /// Ascending.
    pub hess_eigs: Vec<f64>,
    /// Number of negative Hessian eigenvalues.
    pub index: u32,
    pub degenerate: bool,
}

fn tangent_frame(c: [f64; 3]) -> ([f64; 3], [f64; 3]) {
    let a = if c[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let d = a[0] * c[0] + a[1] * c[1] + a[2] * c[2];
    let e1 = normalize([a[0] - d * c[0], a[1] - d * c[1], a[2] - d * c[2]]);
    let e2 = [c[1] * e1[2] - c[2] * e1[1], c[2] * e1[0] - c[0] * e1[2], c[0] * e1[1] - c[1] * e1[0]];
    (e1, e2)
}

#[inline]
fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Damped Newton on `grad F = 0` with normalization retraction. Returns the
/// converged point or `None`.
fn refine(field: &ChiFieldSample<SphericalFieldSample>, start: [f64; 3], max_step: f64) -> Option<[f64; 3]> {
    let r = field.components()[0].radius();
    let mut p = start;
    let mut j = field.jet_half_square(p);
    let merit = |j: &crate::fieldsim::Jet| 0.5 * (j.grad[0] * j.grad[0] + j.grad[1] * j.grad[1]);
    for _ in 0..MAX_NEWTON {
        let f = (2.0 * j.value).sqrt();
        let gn = j.grad[0].hypot(j.grad[1]);
        if f > 0.0 && gn / f < GRAD_TOL {
            return Some(p);
        }
        let s = j.hess.solve(j.grad)?;
        let step = [-s[0], -s[1]];
        // arc length on the radius-r sphere -> angle
        let len = step[0].hypot(step[1]) / r;
        let dir = if len > max_step { [step[0] * max_step / len, step[1] * max_step / len] } else { step };
        let m0 = merit(&j);
        let mut alpha = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let e: [f64; 3] = std::array::from_fn(|i| (dir[0] * j.frame[0][i] + dir[1] * j.frame[1][i]) * alpha / r);
            let q = normalize([p[0] + e[0], p[1] + e[1], p[2] + e[2]]);
            let jq = field.jet_half_square(q);
            if merit(&jq) <= (1.0 - 1e-4 * alpha) * m0 {
                p = q;
                j = jq;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if !accepted {
            // at the floating-point floor the merit can no longer decrease
            let f = (2.0 * j.value).sqrt();
            return (f > 0.0 && j.grad[0].hypot(j.grad[1]) / f < 1e2 * GRAD_TOL).then_some(p);
        }
    }
    let f = (2.0 * j.value).sqrt();
    (f > 0.0 && j.grad[0].hypot(j.grad[1]) / f < GRAD_TOL).then_some(p)
}

fn classify(field: &ChiFieldSample<SphericalFieldSample>, p: [f64; 3]) -> Result<CriticalPoint> {
    let j = field.jet(p)?;
    let eigs = j.hess.eigenvalues();
    let index = eigs.iter().filter(|&&e| e < 0.0).count() as u32;
    let degenerate = eigs.iter().any(|e| e.abs() <= DEGENERACY_TOL);
    Ok(CriticalPoint {
        location: p,
        value: j.value,
        grad_norm: j.grad[0].hypot(j.grad[1]),
        hess_eigs: eigs.to_vec(),
        index,
        degenerate,
    })
}

/// Critical points of `f = |Y|` with `f >= t_min` on the icosphere of the given depth.
///
/// Seeds are cells where the linearly interpolated gradient of `|Y|^2/2`
/// vanishes; each is refined by damped Newton and classified by its Hessian
/// eigenvalues. Output is sorted by location.
pub fn find_critical_points(
    field: &ChiFieldSample<SphericalFieldSample>,
    t_min: f64,
    depth: u32,
) -> Result<Vec<CriticalPoint>> {
    let mesh = icosphere(depth);
    find_critical_points_on(field, t_min, &mesh)
}

/// As [`find_critical_points`] on a prebuilt mesh.
pub fn find_critical_points_on(
    field: &ChiFieldSample<SphericalFieldSample>,
    t_min: f64,
    mesh: &IcoSphere,
) -> Result<Vec<CriticalPoint>> {
    if !(t_min > 0.0) {
        return Err(Error::Domain(format!("t_min must be > 0 (got {t_min})")));
    }
    let jets: Vec<([f64; 3], f64)> = mesh
        .vertices
        .par_iter()
        .map(|&p| {
            let j = field.jet_half_square(p);
            (j.ambient_gradient(), (2.0 * j.value).sqrt())
        })
        .collect();
    let max_step = 2.0 * mesh.max_edge();
    let seeds: Vec<[f64; 3]> = mesh
        .triangles
        .iter()
        .filter_map(|tri| {
            let idx = tri.map(|i| i as usize);
            if idx.iter().all(|&i| jets[i].1 < 0.5 * t_min) {
                return None;
            }
            let v = idx.map(|i| mesh.vertices[i]);
            let c = normalize([
                v[0][0] + v[1][0] + v[2][0],
                v[0][1] + v[1][1] + v[2][1],
                v[0][2] + v[1][2] + v[2][2],
            ]);
            let (e1, e2) = tangent_frame(c);
            let g = idx.map(|i| [dot(jets[i].0, e1), dot(jets[i].0, e2)]);
            // solve l1 (g1 - g0) + l2 (g2 - g0) = -g0
            let (m11, m21) = (g[1][0] - g[0][0], g[1][1] - g[0][1]);
            let (m12, m22) = (g[2][0] - g[0][0], g[2][1] - g[0][1]);
            let det = m11 * m22 - m12 * m21;
            if det == 0.0 {
                return None;
            }
            let l1 = (-g[0][0] * m22 + g[0][1] * m12) / det;
            let l2 = (-m11 * g[0][1] + m21 * g[0][0]) / det;
            let l0 = 1.0 - l1 - l2;
            if l0 < -BARY_SLACK || l1 < -BARY_SLACK || l2 < -BARY_SLACK {
                return None;
            }
            Some(normalize(std::array::from_fn(|i| l0 * v[0][i] + l1 * v[1][i] + l2 * v[2][i])))
        })
        .collect();
    let refined: Vec<[f64; 3]> = seeds.par_iter().filter_map(|&s| refine(field, s, max_step)).collect();
    let mut pts = refined;
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])).then(a[2].total_cmp(&b[2])));
    let mut unique: Vec<[f64; 3]> = Vec::new();
    for p in pts {
        // sorted by x: only compare against points within MERGE_RADIUS in x
        let dup = unique.iter().rev().take_while(|q| p[0] - q[0] <= MERGE_RADIUS).any(|&q| mesh::angle(p, q) < MERGE_RADIUS);
        if !dup {
            unique.push(p);
        }
    }
    let mut out = Vec::new();
    for p in unique {
        if field.value(p) >= t_min {
            out.push(classify(field, p)?);
        }
    }
    Ok(out)
}

/// Number of points of full index (local maxima) with value `>= t`.
pub fn count_maxima_above(points: &[CriticalPoint], t: f64) -> usize {
    points.iter().filter(|p| p.value >= t && p.index as usize == p.hess_eigs.len()).count()
}

/// `sum (-1)^index` over points with value `>= t`; the Euler characteristic of
/// `{f >= t}` on a surface when the field is Morse there.
pub fn signed_euler_count(points: &[CriticalPoint], t: f64) -> Result<i64> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("threshold must be > 0 (got {t})")));
    }
    let mut s = 0i64;
    for p in points.iter().filter(|p| p.value >= t) {
        if p.degenerate {
            let min_abs_eig = p.hess_eigs.iter().map(|e| e.abs()).fold(f64::INFINITY, f64::min);
            return Err(Error::Degenerate { location: p.location, min_abs_eig });
        }
        s += if p.index % 2 == 0 { 1 } else { -1 };
    }
    Ok(s)
}

/// Per-realization outcome of the simulate-and-count pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealizationCounts {
    pub realization: u64,
    pub critical_points: usize,
    pub degenerate: usize,
    /// Per threshold: number of critical points with value `>= t`.
    pub above: Vec<usize>,
    pub maxima: Vec<usize>,
    /// `None` when a degenerate point lies above the threshold.
    pub signed_ec: Vec<Option<i64>>,
    pub pixel_ec: Option<Vec<i64>>,
}

/// Synthesizes the chi field with `k` components of realization `index`
/// (component `i` uses `stream.split(index).split(i)`-style child streams).
pub fn realization(
    spec: &crate::analytic::PowerSpectrum,
    k: usize,
    stream: crate::rng::RngStream,
    index: u64,
) -> Result<ChiFieldSample<SphericalFieldSample>> {
    let base = stream.split(index);
    let comps = (0..k as u64)
        .map(|i| crate::fieldsim::synth_sphere(spec, base.split(i)))
        .collect::<Result<Vec<_>>>()?;
    crate::fieldsim::assemble_chi(comps)
}

/// Options for [`simulate_counts`].
#[derive(Debug, Clone)]
pub struct SimulationPlan {
    pub k: usize,
    pub thresholds: Vec<f64>,
    pub realizations: u64,
    pub depth: u32,
    pub pixel_grid: Option<PixelGrid>,
}

/// Runs the pipeline over realizations `0..plan.realizations`.
pub fn simulate_counts(
    spec: &crate::analytic::PowerSpectrum,
    plan: &SimulationPlan,
    stream: crate::rng::RngStream,
) -> Result<Vec<RealizationCounts>> {
    simulate(spec, plan, stream, false).map(|v| v.into_iter().map(|(c, _)| c).collect())
}

/// As [`simulate_counts`], also returning every critical point above the
/// lowest threshold of each realization.
pub fn simulate_counts_with_points(
    spec: &crate::analytic::PowerSpectrum,
    plan: &SimulationPlan,
    stream: crate::rng::RngStream,
) -> Result<Vec<(RealizationCounts, Vec<CriticalPoint>)>> {
    simulate(spec, plan, stream, true)
}

fn simulate(
    spec: &crate::analytic::PowerSpectrum,
    plan: &SimulationPlan,
    stream: crate::rng::RngStream,
    keep_points: bool,
) -> Result<Vec<(RealizationCounts, Vec<CriticalPoint>)>> {
    let t_min = plan.thresholds.iter().copied().fold(f64::INFINITY, f64::min);
    if plan.thresholds.is_empty() || !(t_min > 0.0) {
        return Err(Error::Domain("thresholds must be non-empty and > 0".into()));
    }
    let mesh = icosphere(plan.depth);
    (0..plan.realizations)
        .into_par_iter()
        .map(|i| {
            let field = realization(spec, plan.k, stream, i)?;
            let pts = find_critical_points_on(&field, t_min, &mesh)?;
            let pixel_ec = plan.pixel_grid.map(|g| {
                let vals = g.chi_values(&field);
                plan.thresholds.iter().map(|&t| pixel_euler_characteristic(&g, &vals, t)).collect()
            });
            let counts = RealizationCounts {
                realization: i,
                critical_points: pts.len(),
                degenerate: pts.iter().filter(|p| p.degenerate).count(),
                above: plan.thresholds.iter().map(|&t| pts.iter().filter(|p| p.value >= t).count()).collect(),
                maxima: plan.thresholds.iter().map(|&t| count_maxima_above(&pts, t)).collect(),
                signed_ec: plan.thresholds.iter().map(|&t| signed_euler_count(&pts, t).ok()).collect(),
                pixel_ec,
            };
            Ok((counts, if keep_points { pts } else { Vec::new() }))
        })
        .collect()
}
