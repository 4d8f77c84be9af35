//! Isotropic fields on the sphere from an angular power spectrum.
//!
//! Basis: real spherical harmonics `Y_l0 = P_l^0`, `Y_lm = sqrt(2) P_l^m cos(m phi)`
//! and `Y_l,-m = sqrt(2) P_l^m sin(m phi)` for `m > 0`, with `P_l^m(cos theta)`
//! orthonormal associated Legendre functions without the Condon-Shortley
//! phase. Tangent frame at non-polar points: `(e_theta, e_phi)` (south,
//! east). Within `|z| > 0.8` the field is evaluated in a rotated chart whose
//! equator passes through the poles.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::sync::OnceLock;

use sha2::{Digest, Sha256};

use super::{Field, Jet};
use crate::analytic::PowerSpectrum;
use crate::ensembles::normal;
use crate::error::{Error, Result};
use crate::matrix::Sym2;
use crate::rng::RngStream;

/// Largest supported harmonic degree.
pub const MAX_DEGREE: u32 = 64;

const POLE_Z: f64 = 0.8;

#[inline]
fn tri(l: usize, m: usize) -> usize {
    l * (l + 1) / 2 + m
}

#[inline]
fn coeff_index(l: u32, m: i32) -> usize {
    (l as i64 * l as i64 + l as i64 + m as i64) as usize
}

/// Orthonormal `P_l^m(x)`, `0 <= m <= l <= lmax`, packed as `l(l+1)/2 + m`.
/// `s = sqrt(1 - x^2)`.
pub fn legendre_normalized(lmax: u32, x: f64, s: f64, out: &mut Vec<f64>) {
    let lmax = lmax as usize;
    out.clear();
    out.resize(tri(lmax, lmax) + 1, 0.0);
    let mut pmm = (0.25 / PI).sqrt();
    for m in 0..=lmax {
        if m > 0 {
            pmm *= ((2 * m + 1) as f64 / (2 * m) as f64).sqrt() * s;
        }
        out[tri(m, m)] = pmm;
        if m < lmax {
            out[tri(m + 1, m)] = ((2 * m + 3) as f64).sqrt() * x * pmm;
        }
        for l in m + 2..=lmax {
            let (lf, mf) = (l as f64, m as f64);
            let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
            let b = (((lf - 1.0).powi(2) - mf * mf) / (4.0 * (lf - 1.0).powi(2) - 1.0)).sqrt();
            out[tri(l, m)] = a * (x * out[tri(l - 1, m)] - b * out[tri(l - 2, m)]);
        }
    }
}

/// First and second `theta`-derivatives of the orthonormal functions at
/// `x = cos theta`, `s = sin theta > 0`.
fn legendre_theta_derivs(lmax: u32, x: f64, s: f64, p: &[f64], dp: &mut Vec<f64>, d2p: &mut Vec<f64>) {
    let lmax = lmax as usize;
    dp.clear();
    dp.resize(p.len(), 0.0);
    d2p.clear();
    d2p.resize(p.len(), 0.0);
    let cot = x / s;
    for l in 0..=lmax {
        let lf = l as f64;
        let lam = lf * (lf + 1.0);
        for m in 0..=l {
            let mf = m as f64;
            let prev = if m < l {
                ((2.0 * lf + 1.0) * (lf * lf - mf * mf) / (2.0 * lf - 1.0)).sqrt() * p[tri(l - 1, m)]
            } else {
                0.0
            };
            let d = (lf * x * p[tri(l, m)] - prev) / s;
            dp[tri(l, m)] = d;
            d2p[tri(l, m)] = -cot * d - (lam - mf * mf / (s * s)) * p[tri(l, m)];
        }
    }
}

/// Gauss-Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p0 = 1.0;
                p1 = z;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// One realization of an isotropic field with unit variance on the sphere of
/// radius `r`, `r^2 = -K''(0)` of the normalized spectrum.
#[derive(Debug, Clone)]
pub struct SphericalFieldSample {
    spectrum: PowerSpectrum,
    lmax: u32,
    coeffs: Vec<f64>,
    radius: f64,
    stream: RngStream,
    rotated: OnceLock<Vec<f64>>,
}

/// Draws `a_lm ~ N(0, C_l)` for the spectrum rescaled to unit variance.
pub fn synth_sphere(spec: &PowerSpectrum, stream: RngStream) -> Result<SphericalFieldSample> {
    let spectrum = spec.normalized();
    let lmax = spectrum.lmax();
    if lmax > MAX_DEGREE {
        return Err(Error::InvalidSpectrum(format!("degree {lmax} exceeds the supported maximum {MAX_DEGREE}")));
    }
    let mut coeffs = vec![0.0; ((lmax + 1) * (lmax + 1)) as usize];
    let mut rng = stream.rng();
    for &(l, c) in spectrum.entries() {
        let sd = c.sqrt();
        for m in -(l as i32)..=l as i32 {
            coeffs[coeff_index(l, m)] = sd * normal(&mut rng);
        }
    }
    let radius = crate::analytic::normal_radius(&spectrum);
    Ok(SphericalFieldSample { spectrum, lmax, coeffs, radius, stream, rotated: OnceLock::new() })
}

/// Jet of a sample on the sphere of radius `r`, truncated to `order` (0, 1 or 2).
pub fn eval_sphere(sample: &SphericalFieldSample, p: [f64; 3], order: u8) -> Result<Jet> {
    if order > 2 {
        return Err(Error::Domain(format!("derivative order {order} > 2")));
    }
    let mut j = sample.eval(p);
    if order < 2 {
        j.hess = Sym2::default();
    }
    if order < 1 {
        j.grad = [0.0; 2];
    }
    Ok(j)
}

#[inline]
fn rotate(q: [f64; 3]) -> [f64; 3] {
    [q[2], q[0], q[1]]
}

#[inline]
fn unrotate(p: [f64; 3]) -> [f64; 3] {
    [p[1], p[2], p[0]]
}

impl SphericalFieldSample {
    /// Builds a sample from explicit coefficients, indexed `l^2 + l + m`.
    pub fn from_coeffs(spec: &PowerSpectrum, coeffs: Vec<f64>, stream: RngStream) -> Result<Self> {
        let spectrum = spec.normalized();
        let lmax = spectrum.lmax();
        if coeffs.len() != ((lmax + 1) * (lmax + 1)) as usize {
            return Err(Error::Domain(format!("expected {} coefficients", (lmax + 1) * (lmax + 1))));
        }
        let radius = crate::analytic::normal_radius(&spectrum);
        Ok(Self { spectrum, lmax, coeffs, radius, stream, rotated: OnceLock::new() })
    }

    pub fn spectrum(&self) -> &PowerSpectrum {
        &self.spectrum
    }

    pub fn lmax(&self) -> u32 {
        self.lmax
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeff(&self, l: u32, m: i32) -> f64 {
        self.coeffs[coeff_index(l, m)]
    }

    pub fn stream(&self) -> RngStream {
        self.stream
    }

    /// Value at a unit vector.
    pub fn value(&self, p: [f64; 3]) -> f64 {
        value_with(self.lmax, &self.coeffs, p)
    }

    /// Jet on the sphere of radius `r` (gradient scaled by `1/r`, Hessian by `1/r^2`).
    pub fn eval(&self, p: [f64; 3]) -> Jet {
        let mut j = self.eval_unit(p);
        let r = self.radius;
        j.grad = [j.grad[0] / r, j.grad[1] / r];
        j.hess = j.hess.scaled(1.0 / (r * r));
        j
    }

    /// Jet on the unit sphere.
    pub fn eval_unit(&self, p: [f64; 3]) -> Jet {
        if p[2].abs() <= POLE_Z {
            chart_jet(self.lmax, &self.coeffs, p)
        } else {
            let c = self.rotated.get_or_init(|| self.rotated_coeffs());
            let mut j = chart_jet(self.lmax, c, unrotate(p));
            j.frame = [rotate(j.frame[0]), rotate(j.frame[1])];
            j
        }
    }

    /// Jet on the unit sphere evaluated in the main chart regardless of the pole rule.
    pub fn eval_unit_main_chart(&self, p: [f64; 3]) -> Jet {
        chart_jet(self.lmax, &self.coeffs, p)
    }

    /// Coefficients of `q -> X(R q)`, `R` the cyclic coordinate permutation,
    /// by exact quadrature projection.
    fn rotated_coeffs(&self) -> Vec<f64> {
        let l = self.lmax as usize;
        let (xs, ws) = gauss_legendre(l + 1);
        let nphi = 2 * l + 2;
        let mut out = vec![0.0; self.coeffs.len()];
        let mut p = Vec::new();
        for (&x, &w) in xs.iter().zip(&ws) {
            let s = (1.0 - x * x).max(0.0).sqrt();
            legendre_normalized(self.lmax, x, s, &mut p);
            for j in 0..nphi {
                let phi = 2.0 * PI * j as f64 / nphi as f64;
                let q = [s * phi.cos(), s * phi.sin(), x];
                let v = self.value(rotate(q)) * w * 2.0 * PI / nphi as f64;
                for ll in 0..=l {
                    out[coeff_index(ll as u32, 0)] += v * p[tri(ll, 0)];
                    for m in 1..=ll {
                        let (sn, cs) = (m as f64 * phi).sin_cos();
                        let b = v * std::f64::consts::SQRT_2 * p[tri(ll, m)];
                        out[coeff_index(ll as u32, m as i32)] += b * cs;
                        out[coeff_index(ll as u32, -(m as i32))] += b * sn;
                    }
                }
            }
        }
        out
    }

    /// Values on the grid `theta_i x phi_j`, `phi_j = 2 pi j / nphi`, row-major.
    pub fn eval_ring_grid(&self, thetas: &[f64], nphi: usize) -> Vec<f64> {
        let l = self.lmax as usize;
        let mut trig = vec![0.0; nphi * (l + 1) * 2];
        for j in 0..nphi {
            let phi = 2.0 * PI * j as f64 / nphi as f64;
            for m in 0..=l {
                let (sn, cs) = (m as f64 * phi).sin_cos();
                trig[(j * (l + 1) + m) * 2] = cs;
                trig[(j * (l + 1) + m) * 2 + 1] = sn;
            }
        }
        let mut out = vec![0.0; thetas.len() * nphi];
        let mut p = Vec::new();
        let mut am = vec![0.0; (l + 1) * 2];
        for (i, &th) in thetas.iter().enumerate() {
            let (s, x) = th.sin_cos();
            legendre_normalized(self.lmax, x, s, &mut p);
            am.iter_mut().for_each(|v| *v = 0.0);
            for ll in 0..=l {
                am[0] += self.coeffs[coeff_index(ll as u32, 0)] * p[tri(ll, 0)];
                for m in 1..=ll {
                    let b = std::f64::consts::SQRT_2 * p[tri(ll, m)];
                    am[2 * m] += b * self.coeffs[coeff_index(ll as u32, m as i32)];
                    am[2 * m + 1] += b * self.coeffs[coeff_index(ll as u32, -(m as i32))];
                }
            }
            let row = &mut out[i * nphi..(i + 1) * nphi];
            for (j, v) in row.iter_mut().enumerate() {
                let t = &trig[j * (l + 1) * 2..(j + 1) * (l + 1) * 2];
                let mut acc = 0.0;
                for k in 0..2 * (l + 1) {
                    acc += am[k] * t[k];
                }
                *v = acc;
            }
        }
        out
    }

    /// CSV dump `l,m,a_lm` with a header naming the model, seed and spectrum hash.
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# model=sphere");
        let _ = writeln!(s, "# seed={} stream={}", self.stream.seed, self.stream.stream_id);
        let _ = writeln!(s, "# spectrum_sha256={}", spectrum_hash(&self.spectrum));
        let _ = writeln!(s, "# radius={:.17e}", self.radius);
        let _ = writeln!(s, "l,m,a");
        for l in 0..=self.lmax {
            for m in -(l as i32)..=l as i32 {
                let _ = writeln!(s, "{l},{m},{:.17e}", self.coeff(l, m));
            }
        }
        s
    }

    /// Inverse of [`to_csv`](Self::to_csv) for the coefficient rows.
    pub fn from_csv(spec: &PowerSpectrum, text: &str) -> Result<Self> {
        let spectrum = spec.normalized();
        let lmax = spectrum.lmax();
        let mut coeffs = vec![0.0; ((lmax + 1) * (lmax + 1)) as usize];
        let (mut seed, mut stream_id) = (0, 0);
        for (i, line) in text.lines().enumerate() {
            let bad = |m: &str| Error::Parse { line: i + 1, message: m.to_string() };
            if let Some(h) = line.strip_prefix("# seed=") {
                let mut it = h.split(" stream=");
                seed = it.next().and_then(|v| v.trim().parse().ok()).ok_or_else(|| bad("bad seed"))?;
                stream_id = it.next().and_then(|v| v.trim().parse().ok()).ok_or_else(|| bad("bad stream"))?;
                continue;
            }
            if line.starts_with('#') || line.trim().is_empty() || line.starts_with("l,") {
                continue;
            }
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 3 {
                return Err(bad("expected l,m,a"));
            }
            let l: u32 = f[0].trim().parse().map_err(|_| bad("bad degree"))?;
            let m: i32 = f[1].trim().parse().map_err(|_| bad("bad order"))?;
            let a: f64 = f[2].trim().parse().map_err(|_| bad("bad coefficient"))?;
            if l > lmax || m.unsigned_abs() > l {
                return Err(bad("index outside the spectrum support"));
            }
            coeffs[coeff_index(l, m)] = a;
        }
        Self::from_coeffs(&spectrum, coeffs, RngStream::new(seed, stream_id))
    }
}

impl Field for SphericalFieldSample {
    fn value(&self, p: [f64; 3]) -> f64 {
        SphericalFieldSample::value(self, p)
    }

    fn jet(&self, p: [f64; 3]) -> Jet {
        self.eval(p)
    }
}

/// SHA-256 of the canonical text form of a spectrum.
pub fn spectrum_hash(spec: &PowerSpectrum) -> String {
    Sha256::digest(spec.to_text().as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

fn value_with(lmax: u32, c: &[f64], p: [f64; 3]) -> f64 {
    let x = p[2].clamp(-1.0, 1.0);
    let s = (p[0] * p[0] + p[1] * p[1]).sqrt();
    let phi = p[1].atan2(p[0]);
    let mut leg = Vec::new();
    legendre_normalized(lmax, x, s, &mut leg);
    let mut v = 0.0;
    for l in 0..=lmax as usize {
        v += c[coeff_index(l as u32, 0)] * leg[tri(l, 0)];
        for m in 1..=l {
            let (sn, cs) = (m as f64 * phi).sin_cos();
            v += std::f64::consts::SQRT_2
                * leg[tri(l, m)]
                * (c[coeff_index(l as u32, m as i32)] * cs + c[coeff_index(l as u32, -(m as i32))] * sn);
        }
    }
    v
}

/// Unit-sphere jet in the `(theta, phi)` chart. Needs `sin theta` bounded away from 0.
fn chart_jet(lmax: u32, c: &[f64], p: [f64; 3]) -> Jet {
    let x = p[2].clamp(-1.0, 1.0);
    let s = (p[0] * p[0] + p[1] * p[1]).sqrt();
    let phi = p[1].atan2(p[0]);
    let (sphi, cphi) = phi.sin_cos();
    let mut leg = Vec::new();
    let mut dleg = Vec::new();
    let mut d2leg = Vec::new();
    legendre_normalized(lmax, x, s, &mut leg);
    legendre_theta_derivs(lmax, x, s, &leg, &mut dleg, &mut d2leg);
    let (mut v, mut xt, mut xp, mut xtt, mut xtp, mut xpp) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
    for l in 0..=lmax as usize {
        let a0 = c[coeff_index(l as u32, 0)];
        v += a0 * leg[tri(l, 0)];
        xt += a0 * dleg[tri(l, 0)];
        xtt += a0 * d2leg[tri(l, 0)];
        for m in 1..=l {
            let mf = m as f64;
            let (sn, cs) = (mf * phi).sin_cos();
            let ac = std::f64::consts::SQRT_2 * c[coeff_index(l as u32, m as i32)];
            let as_ = std::f64::consts::SQRT_2 * c[coeff_index(l as u32, -(m as i32))];
            let trig = ac * cs + as_ * sn;
            let dtrig = mf * (-ac * sn + as_ * cs);
            let k = tri(l, m);
            v += leg[k] * trig;
            xt += dleg[k] * trig;
            xtt += d2leg[k] * trig;
            xp += leg[k] * dtrig;
            xtp += dleg[k] * dtrig;
            xpp += -mf * mf * leg[k] * trig;
        }
    }
    let cot = x / s;
    let grad = [xt, xp / s];
    let hess = Sym2::new(xtt, (xtp - cot * xp) / s, xpp / (s * s) + cot * xt);
    let e_theta = [x * cphi, x * sphi, -s];
    let e_phi = [-sphi, cphi, 0.0];
    Jet { value: v, grad, hess, frame: [e_theta, e_phi] }
}
