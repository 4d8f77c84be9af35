//! Closed-form quantities: Hermite polynomials, chi moments, covariance
//! catalog for rotation-invariant 2x2 Hessians, and the high-threshold
//! densities for maxima and Euler characteristic of chi fields on spheres.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// 1/sqrt(2*pi)
pub const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Standard Gaussian density.
pub fn gaussian_pdf(t: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * t * t).exp()
}

/// Standard Gaussian upper tail `P(N(0,1) >= t)`.
pub fn gaussian_tail(t: f64) -> f64 {
    0.5 * erfc(t / std::f64::consts::SQRT_2)
}

/// Index of a Hermite polynomial. `-1` is admitted and denotes the tail
/// ratio `Psi(t)/phi(t)`, the usual extension that makes the j = 0 term of
/// the Gaussian kinematic sum well defined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct HermiteIndex(i32);

impl HermiteIndex {
    pub fn new(n: i32) -> Result<Self> {
        if n < -1 {
            return Err(Error::Domain(format!("Hermite index {n} < -1")));
        }
        Ok(Self(n))
    }

    pub fn get(self) -> i32 {
        self.0
    }

    /// Evaluates `H_n(t)`, dispatching n = -1 to [`hermite_tail_ratio`].
    pub fn eval(self, t: f64) -> f64 {
        if self.0 < 0 {
            hermite_tail_ratio(t)
        } else {
            hermite(self.0 as u32, t)
        }
    }
}

/// Probabilists' Hermite polynomial: `H_0 = 1`, `H_1 = t`,
/// `H_{n+1} = t H_n - n H_{n-1}`.
pub fn hermite(n: u32, t: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, t);
    match n {
        0 => prev,
        _ => {
            for j in 1..n {
                let next = t * cur - j as f64 * prev;
                prev = cur;
                cur = next;
            }
            cur
        }
    }
}

/// `H_{-1}(t) := Psi(t)/phi(t)` (Mills ratio). Strictly positive and decreasing.
pub fn hermite_tail_ratio(t: f64) -> f64 {
    if t < 6.0 {
        return gaussian_tail(t) / gaussian_pdf(t);
    }
    // Continued fraction 1/(t+1/(t+2/(t+...))), modified Lentz.
    let tiny = 1e-300;
    let mut f = t;
    let mut c = t;
    let mut d = 0.0;
    for j in 1..200 {
        let a = j as f64;
        d = t + a * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = t + a / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    1.0 / f
}

/// `E[chi_k^a] = 2^{a/2} Gamma((k+a)/2) / Gamma(k/2)`, finite iff `k > -a`.
pub fn chi_moment(k: u32, a: f64) -> Result<f64> {
    if k == 0 {
        return Err(Error::Domain("chi_k requires k >= 1".into()));
    }
    let kf = k as f64;
    if kf + a <= 0.0 {
        return Err(Error::Domain(format!(
            "E[chi_{k}^{a}] diverges (requires k > -a)"
        )));
    }
    if a == 0.0 {
        return Ok(1.0);
    }
    let log = 0.5 * a * std::f64::consts::LN_2 + ln_gamma(0.5 * (kf + a)) - ln_gamma(0.5 * kf);
    Ok(log.exp())
}

/// `E[chi_k^{-m}] = Gamma((k-m)/2) / (2^{m/2} Gamma(k/2))`, the gradient-density
/// constant of the critical-point formula. Requires `k > m`.
pub fn inv_chi_constant(k: u32, m: u32) -> Result<f64> {
    if k <= m {
        return Err(Error::Domain(format!(
            "critical-point formula needs k > m (got k = {k}, m = {m})"
        )));
    }
    chi_moment(k, -(m as f64))
}

/// Volume of the unit n-sphere `S^n` in `R^{n+1}`.
pub fn sphere_volume(n: u32) -> f64 {
    let h = 0.5 * (n as f64 + 1.0);
    2.0 * (h * PI.ln() - ln_gamma(h)).exp()
}

/// Expected (m-k)-volume of the nodal set of k i.i.d. normal fields on an
/// m-manifold of volume `vol_m`. Requires `k <= m`.
pub fn expected_nodal_volume(m: u32, k: u32, vol_m: f64) -> Result<f64> {
    if k > m {
        return Err(Error::Domain(format!("nodal set empty for k = {k} > m = {m}")));
    }
    Ok(sphere_volume(m - k) / sphere_volume(m) * vol_m)
}

/// Angular power spectrum `{(l, C_l)}` of an isotropic field on the unit sphere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerSpectrum {
    entries: Vec<(u32, f64)>,
}

/// `(K(0), K''(0), K''''(0))` of the covariance as a function of geodesic angle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralMoments {
    pub k0: f64,
    pub k2: f64,
    pub k4: f64,
}

impl PowerSpectrum {
    /// Entries are sorted by degree; duplicate degrees are rejected.
    pub fn new(mut entries: Vec<(u32, f64)>) -> Result<Self> {
        entries.sort_by_key(|e| e.0);
        for w in entries.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::InvalidSpectrum(format!("duplicate degree {}", w[0].0)));
            }
        }
        for &(l, c) in &entries {
            if !c.is_finite() || c < 0.0 {
                return Err(Error::InvalidSpectrum(format!("C_{l} = {c} is not a finite non-negative number")));
            }
        }
        if !entries.iter().any(|&(l, c)| l >= 1 && c > 0.0) {
            return Err(Error::InvalidSpectrum(
                "need C_l > 0 for at least one l >= 1".into(),
            ));
        }
        Ok(Self { entries })
    }

    /// Spectrum concentrated on one degree, scaled so that `K(0) = 1`.
    pub fn single(l: u32) -> Result<Self> {
        Self::new(vec![(l, 4.0 * PI / (2.0 * l as f64 + 1.0))])
    }

    pub fn entries(&self) -> &[(u32, f64)] {
        &self.entries
    }

    pub fn lmax(&self) -> u32 {
        self.entries
            .iter()
            .filter(|e| e.1 > 0.0)
            .map(|e| e.0)
            .max()
            .unwrap_or(0)
    }

    /// `C_l`, zero outside the listed support.
    pub fn cl(&self, l: u32) -> f64 {
        self.entries
            .binary_search_by_key(&l, |e| e.0)
            .map(|i| self.entries[i].1)
            .unwrap_or(0.0)
    }

    pub fn moments(&self) -> SpectralMoments {
        spectral_moments(self)
    }

    /// Rescales all `C_l` so that `K(0) = 1`.
    pub fn normalized(&self) -> Self {
        let k0 = self.moments().k0;
        Self {
            entries: self.entries.iter().map(|&(l, c)| (l, c / k0)).collect(),
        }
    }

    /// Parses text lines `l C_l`; blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = |message: String| Error::Parse { line: i + 1, message };
            let mut parts = line.split_whitespace();
            let (Some(l), Some(c), None) = (parts.next(), parts.next(), parts.next()) else {
                return Err(bad(format!("expected two fields `l C_l`, got {line:?}")));
            };
            let l: u32 = l.parse().map_err(|_| bad(format!("bad degree {l:?}")))?;
            let c: f64 = c.parse().map_err(|_| bad(format!("bad coefficient {c:?}")))?;
            if !c.is_finite() || c < 0.0 {
                return Err(bad(format!("C_{l} = {c} must be finite and non-negative")));
            }
            entries.push((l, c));
        }
        Self::new(entries)
    }

    pub fn to_text(&self) -> String {
        self.entries
            .iter()
            .map(|(l, c)| format!("{l} {c:e}\n"))
            .collect()
    }
}

/// `K(0) = sum (2l+1)/(4 pi) C_l`, `K''(0) = -sum (2l+1)/(4 pi) lambda/2 C_l`,
/// `K''''(0) = sum (2l+1)/(4 pi) (3 lambda (lambda-2)/8 + lambda/2) C_l`
/// with `lambda = l(l+1)`.
pub fn spectral_moments(spec: &PowerSpectrum) -> SpectralMoments {
    let mut m = SpectralMoments { k0: 0.0, k2: 0.0, k4: 0.0 };
    for &(l, c) in spec.entries() {
        let w = (2.0 * l as f64 + 1.0) / (4.0 * PI) * c;
        let lam = l as f64 * (l as f64 + 1.0);
        m.k0 += w;
        m.k2 -= w * lam / 2.0;
        m.k4 += w * (3.0 * lam * (lam - 2.0) / 8.0 + lam / 2.0);
    }
    m
}

/// Which of two mutually inconsistent printed formulas to reproduce.
///
/// `Corrected` uses `c - sigma^2 = +1/r^2` and the `+2` constant; it agrees with
/// the Lipschitz-Killing computation and with simulation. `PaperText` keeps the
/// printed `c - sigma^2 = -1/r^4` covariance and the `-2` constant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignVariant {
    #[default]
    Corrected,
    PaperText,
}

impl std::str::FromStr for SignVariant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "corrected" => Ok(Self::Corrected),
            "paper_text" | "paper-text" => Ok(Self::PaperText),
            _ => Err(Error::Config(format!("unknown sign variant {s:?}"))),
        }
    }
}

impl std::fmt::Display for SignVariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Corrected => "corrected",
            Self::PaperText => "paper_text",
        })
    }
}

/// Covariance parameters `(sigma^2, c)` of a rotation-invariant Gaussian 2x2
/// symmetric matrix `H = [[h1, h2], [h2, h3]]`:
/// `var h1 = var h3 = 2 sigma^2 + c`, `cov(h1, h3) = c`, `var h2 = sigma^2`,
/// `h2` independent of the diagonal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HessianModel2D {
    sigma2: f64,
    c: f64,
}

/// Slack on `sigma^2 + c >= 1` to absorb rounding in derived models.
const HESSIAN_LIKE_SLACK: f64 = 1e-12;

impl HessianModel2D {
    pub fn new(sigma2: f64, c: f64) -> Result<Self> {
        if !(sigma2.is_finite() && c.is_finite()) || sigma2 < 0.0 || c < 0.0 {
            return Err(Error::Domain(format!(
                "need sigma^2 >= 0 and c >= 0 (got {sigma2}, {c})"
            )));
        }
        Ok(Self { sigma2, c })
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn c_minus_sigma2(&self) -> f64 {
        self.c - self.sigma2
    }

    /// `H` admits a standard Gaussian `gamma` with `E[H gamma] = -I` iff `sigma^2 + c >= 1`.
    pub fn hessian_like(&self) -> bool {
        self.sigma2 + self.c >= 1.0 - HESSIAN_LIKE_SLACK
    }

    /// Coefficient of `-tr(H)` in `gamma`: `1 / (2 (sigma^2 + c))`.
    pub fn trace_coefficient(&self) -> f64 {
        1.0 / (2.0 * (self.sigma2 + self.c))
    }

    /// Coefficient of the independent noise in `gamma`: `sqrt(1 - 1/(sigma^2 + c))`.
    /// Zero on the Laplace-eigenfunction boundary `sigma^2 + c = 1`.
    pub fn noise_coefficient(&self) -> f64 {
        (1.0 - 1.0 / (self.sigma2 + self.c)).max(0.0).sqrt()
    }

    /// Covariance of `(h1, h2, h3)`, `h2` being the off-diagonal entry.
    pub fn covariance(&self) -> [[f64; 3]; 3] {
        let d = 2.0 * self.sigma2 + self.c;
        [[d, 0.0, self.c], [0.0, self.sigma2, 0.0], [self.c, 0.0, d]]
    }
}

/// Hessian law of a stationary isotropic planar field with `K''''(0) = k4`:
/// `sigma^2 = c = k4/3`.
pub fn planar_hessian_model(k4: f64) -> Result<HessianModel2D> {
    if !(k4 > 0.0) {
        return Err(Error::Domain(format!("K''''(0) must be positive (got {k4})")));
    }
    HessianModel2D::new(k4 / 3.0, k4 / 3.0)
}

/// Hessian law of the normal field `x -> X(x/r)` on the radius-r sphere, for an
/// isotropic field `X` on the unit sphere with spectrum `spec` (normalized to
/// unit variance first). With `r^2 = -K''(0)`, `a^2 = K''''(0)`:
/// `c = (a^2 + 2 r^2)/(3 r^4)`, `sigma^2 = (a^2 - r^2)/(3 r^4)`.
pub fn spherical_hessian_model(spec: &PowerSpectrum, variant: SignVariant) -> Result<HessianModel2D> {
    let m = spec.normalized().moments();
    let r2 = -m.k2;
    let a2 = m.k4;
    if !(r2 > 0.0) {
        return Err(Error::InvalidSpectrum(format!("-K''(0) = {r2} must be positive")));
    }
    if a2 < r2 {
        return Err(Error::InvalidSpectrum(format!(
            "K''''(0) = {a2} < -K''(0) = {r2} gives a negative variance"
        )));
    }
    let r4 = r2 * r2;
    let (sigma2, c) = match variant {
        SignVariant::Corrected => ((a2 - r2) / (3.0 * r4), (a2 + 2.0 * r2) / (3.0 * r4)),
        SignVariant::PaperText => ((a2 + 1.0) / (3.0 * r4), (a2 - 2.0) / (3.0 * r4)),
    };
    HessianModel2D::new(sigma2, c)
}

/// Radius of the sphere on which the normalized field is normal: `r = sqrt(-K''(0))`.
pub fn normal_radius(spec: &PowerSpectrum) -> f64 {
    (-spec.normalized().moments().k2).sqrt()
}

/// `A_1(t) = E[det(-H~) 1{gamma >= t}] = (H_2(t) + c - sigma^2) phi(t)`.
pub fn ec_density_a1(t: f64, model: &HessianModel2D) -> f64 {
    (hermite(2, t) + model.c_minus_sigma2()) * gaussian_pdf(t)
}

/// High-threshold expected number of maxima above `t` of a chi field with two
/// degrees of freedom on the radius-r sphere:
/// `(2 r^2 H_2(t) + 2) sqrt(2 pi) phi(t)` (corrected) or with `-2` (printed variant).
pub fn maxima_density_sphere(r: f64, t: f64, variant: SignVariant) -> f64 {
    let constant = match variant {
        SignVariant::Corrected => 2.0,
        SignVariant::PaperText => -2.0,
    };
    (2.0 * r * r * hermite(2, t) + constant) * (2.0 * PI).sqrt() * gaussian_pdf(t)
}

/// Lipschitz-Killing curvatures `L_0..L_n` of a product manifold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductLK {
    pub curvatures: Vec<f64>,
    pub radius: Option<f64>,
}

impl ProductLK {
    pub fn new(curvatures: Vec<f64>) -> Self {
        Self { curvatures, radius: None }
    }
}

/// `L_j(M x N) = sum_i L_i(M) L_{j-i}(N)`.
pub fn lk_product(a: &[f64], b: &[f64]) -> Vec<f64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Curvatures of `rS^2 x S^1`: `(0, 4 pi, 0, 8 pi^2 r^2)`.
pub fn lk_sphere_circle(r: f64) -> ProductLK {
    let sphere = [2.0, 0.0, 4.0 * PI * r * r];
    let circle = [0.0, 2.0 * PI];
    ProductLK {
        curvatures: lk_product(&sphere, &circle),
        radius: Some(r),
    }
}

/// Gaussian kinematic sum `sum_j L_j (2 pi)^{-j/2} H_{j-1}(t) phi(t)`; the j = 0
/// term uses `H_{-1} phi = Psi`.
pub fn ec_sum_product(lk: &ProductLK, t: f64) -> f64 {
    let phi = gaussian_pdf(t);
    lk.curvatures
        .iter()
        .enumerate()
        .map(|(j, &l)| {
            if l == 0.0 {
                return 0.0;
            }
            let h = if j == 0 { gaussian_tail(t) } else { hermite(j as u32 - 1, t) * phi };
            l * (2.0 * PI).powf(-0.5 * j as f64) * h
        })
        .sum()
}

/// `vol(S^{k-1}) / (2 pi)^{(m+k-1)/2}`, the constant in front of the maxima integral.
pub fn maxima_prefactor(m: u32, k: u32) -> f64 {
    sphere_volume(k - 1) * (2.0 * PI).powf(-0.5 * (m + k - 1) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// Composite Simpson rule on [a, b]; test oracle only.
    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let n = n + n % 2;
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for i in 1..n {
            let x = a + i as f64 * h;
            s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(x);
        }
        s * h / 3.0
    }

    #[test]
    fn hermite_small_values() {
        assert_eq!(hermite(0, 7.3), 1.0);
        assert_eq!(hermite(2, 0.0), -1.0);
        assert_eq!(hermite(3, 2.0), 2.0);
        assert_eq!(hermite(4, 1.0), 1.0 - 6.0 + 3.0);
    }

    #[test]
    fn hermite_tail_identity_by_quadrature() {
        for n in 0..=6u32 {
            for i in 0..=20 {
                let t = -5.0 + 0.5 * i as f64;
                let q = simpson(|x| hermite(n + 1, x) * gaussian_pdf(x), t, 14.0, 20_000);
                let want = hermite(n, t) * gaussian_pdf(t);
                assert!((q - want).abs() < 1e-8, "n={n} t={t}: {q} vs {want}");
            }
        }
    }

    #[test]
    fn tail_ratio_values() {
        assert_relative_eq!(hermite_tail_ratio(0.0), (2.0 * PI).sqrt() / 2.0, epsilon = 1e-14);
        let psi1 = simpson(gaussian_pdf, 1.0, 14.0, 20_000);
        assert_relative_eq!(hermite_tail_ratio(1.0), psi1 / gaussian_pdf(1.0), max_relative = 1e-10);
        // Mills ratio ~ 1/t
        let t = 10.0;
        assert!((hermite_tail_ratio(t) * t - 1.0).abs() < 0.01);
        // continued fraction and erfc branches meet continuously
        let below = gaussian_tail(6.0 - 1e-9) / gaussian_pdf(6.0 - 1e-9);
        assert_relative_eq!(hermite_tail_ratio(6.0), below, max_relative = 1e-8);
        let mut prev = f64::INFINITY;
        for i in 0..200 {
            let v = hermite_tail_ratio(-5.0 + 0.25 * i as f64);
            assert!(v > 0.0 && v < prev);
            prev = v;
        }
        assert!(HermiteIndex::new(-2).is_err());
        assert_eq!(HermiteIndex::new(-1).unwrap().eval(0.3), hermite_tail_ratio(0.3));
    }

    #[test]
    fn chi_moments() {
        assert_relative_eq!(chi_moment(4, -2.0).unwrap(), 0.5, epsilon = 1e-14);
        assert_relative_eq!(chi_moment(2, 2.0).unwrap(), 2.0, epsilon = 1e-13);
        for k in 1..10 {
            assert_eq!(chi_moment(k, 0.0).unwrap(), 1.0);
        }
        assert!(chi_moment(2, -2.0).is_err());
        assert_relative_eq!(inv_chi_constant(4, 2).unwrap(), 0.5, epsilon = 1e-14);
        assert_relative_eq!(inv_chi_constant(3, 2).unwrap(), 1.0, epsilon = 1e-13);
        assert!(inv_chi_constant(2, 2).is_err());
        // large k stays finite through log-gamma
        let v = chi_moment(300, -2.0).unwrap();
        assert_relative_eq!(v, 1.0 / 298.0, max_relative = 1e-10);
    }

    #[test]
    fn chi_moment_by_quadrature() {
        // density of chi_k: x^{k-1} e^{-x^2/2} / (2^{k/2-1} Gamma(k/2))
        for &(k, a) in &[(3u32, 1.0), (5, -2.0), (4, 3.5), (7, -4.0)] {
            let kf = k as f64;
            let norm = (2f64).powf(kf / 2.0 - 1.0) * ln_gamma(kf / 2.0).exp();
            let q = simpson(|x| x.powf(a + kf - 1.0) * (-x * x / 2.0).exp() / norm, 0.0, 40.0, 200_000);
            assert_relative_eq!(chi_moment(k, a).unwrap(), q, max_relative = 1e-7);
        }
    }

    #[test]
    fn spectral_moment_examples() {
        let s1 = PowerSpectrum::new(vec![(1, 4.0 * PI / 3.0)]).unwrap();
        let m = s1.moments();
        assert_relative_eq!(m.k0, 1.0, epsilon = 1e-14);
        assert_relative_eq!(m.k2, -1.0, epsilon = 1e-14);
        assert_relative_eq!(m.k4, 1.0, epsilon = 1e-14);
        let m = PowerSpectrum::single(2).unwrap().moments();
        assert_relative_eq!(m.k0, 1.0, epsilon = 1e-14);
        assert_relative_eq!(m.k2, -3.0, epsilon = 1e-14);
        assert_relative_eq!(m.k4, 12.0, epsilon = 1e-13);
        assert!(PowerSpectrum::new(vec![(0, 1.0)]).is_err());
        assert!(PowerSpectrum::new(vec![(2, -1.0)]).is_err());
        assert!(PowerSpectrum::new(vec![(2, 1.0), (2, 1.0)]).is_err());
    }

    #[test]
    fn spectral_moments_match_legendre_series_derivatives() {
        // K(theta) = sum (2l+1)/4pi C_l P_l(cos theta); differentiate numerically.
        let spec = PowerSpectrum::new(vec![(1, 0.3), (2, 0.7), (5, 0.2), (7, 0.05)]).unwrap();
        let k = |th: f64| -> f64 {
            spec.entries()
                .iter()
                .map(|&(l, c)| (2.0 * l as f64 + 1.0) / (4.0 * PI) * c * legendre_p(l, th.cos()))
                .sum()
        };
        let h = 1e-2;
        let d2 = (k(h) - 2.0 * k(0.0) + k(-h)) / (h * h);
        let d4 = (k(2.0 * h) - 4.0 * k(h) + 6.0 * k(0.0) - 4.0 * k(-h) + k(-2.0 * h)) / h.powi(4);
        let m = spec.moments();
        assert_relative_eq!(m.k0, k(0.0), epsilon = 1e-14);
        assert_relative_eq!(m.k2, d2, max_relative = 1e-3);
        assert_relative_eq!(m.k4, d4, max_relative = 1e-2);
    }

    fn legendre_p(l: u32, x: f64) -> f64 {
        let (mut p0, mut p1) = (1.0, x);
        if l == 0 {
            return 1.0;
        }
        for n in 1..l {
            let n = n as f64;
            let p2 = ((2.0 * n + 1.0) * x * p1 - n * p0) / (n + 1.0);
            p0 = p1;
            p1 = p2;
        }
        p1
    }

    #[test]
    fn planar_models() {
        let berry = planar_hessian_model(1.5).unwrap();
        assert_relative_eq!(berry.sigma2(), 0.5);
        assert_relative_eq!(berry.c(), 0.5);
        assert!(berry.hessian_like());
        assert_eq!(berry.noise_coefficient(), 0.0);
        assert_relative_eq!(berry.trace_coefficient(), 0.5);

        let bf = planar_hessian_model(2.0).unwrap();
        assert_relative_eq!(bf.trace_coefficient(), 3.0 / 8.0, epsilon = 1e-15);
        assert_relative_eq!(bf.noise_coefficient(), 0.5, epsilon = 1e-15);
        let cov = bf.covariance();
        assert_relative_eq!(cov[0][0], 2.0, epsilon = 1e-15);
        assert_relative_eq!(cov[0][2], 2.0 / 3.0, epsilon = 1e-15);
        assert_relative_eq!(cov[1][1], 2.0 / 3.0, epsilon = 1e-15);

        assert!(!planar_hessian_model(1.0).unwrap().hessian_like());
        assert!(planar_hessian_model(0.0).is_err());
    }

    #[test]
    fn spherical_model_single_l2() {
        let spec = PowerSpectrum::single(2).unwrap();
        let m = spherical_hessian_model(&spec, SignVariant::Corrected).unwrap();
        assert_relative_eq!(m.c(), 2.0 / 3.0, epsilon = 1e-14);
        assert_relative_eq!(m.sigma2(), 1.0 / 3.0, epsilon = 1e-14);
        assert_relative_eq!(m.c_minus_sigma2(), 1.0 / 3.0, epsilon = 1e-14);
        // printed variant: c - sigma^2 = -1/r^4
        let p = spherical_hessian_model(&spec, SignVariant::PaperText).unwrap();
        assert_relative_eq!(p.c_minus_sigma2(), -1.0 / 9.0, epsilon = 1e-14);
    }

    #[test]
    fn eigenfunction_spectra_sit_on_the_hessian_like_boundary() {
        for l in 1..40 {
            let m = spherical_hessian_model(&PowerSpectrum::single(l).unwrap(), SignVariant::Corrected).unwrap();
            assert!((m.sigma2() + m.c() - 1.0).abs() < 1e-12, "l={l}");
        }
    }

    #[test]
    fn spherical_model_covariance_implies_unit_cross_moment() {
        // E[h1 gamma] = -1 under gamma = -tr(H)/(2(s+c)) + noise
        let spec = PowerSpectrum::new(vec![(2, 0.4), (3, 1.0), (8, 0.1)]).unwrap();
        let m = spherical_hessian_model(&spec, SignVariant::Corrected).unwrap();
        let cov = m.covariance();
        let e_h1_gamma = -(cov[0][0] + cov[0][2]) * m.trace_coefficient();
        assert_relative_eq!(e_h1_gamma, -1.0, epsilon = 1e-14);
        assert!(m.hessian_like());
    }

    #[test]
    fn a1_examples() {
        let m0 = HessianModel2D::new(0.5, 0.5).unwrap();
        assert_relative_eq!(ec_density_a1(0.0, &m0), -gaussian_pdf(0.0), epsilon = 1e-15);
        assert_relative_eq!(ec_density_a1(0.0, &m0), -0.398_942_280_401_432_7, epsilon = 1e-15);
        assert_relative_eq!(ec_density_a1(3.0, &m0), 8.0 * gaussian_pdf(3.0), epsilon = 1e-16);
        // A1 equals the integral of (g^3 - (3 - c + s) g) phi(g) over [t, inf)
        let m = HessianModel2D::new(0.3, 0.9).unwrap();
        for &t in &[0.0, 1.0, 2.5] {
            let q = simpson(
                |g| (g * g * g - (3.0 - m.c() + m.sigma2()) * g) * gaussian_pdf(g),
                t,
                14.0,
                20_000,
            );
            assert_relative_eq!(ec_density_a1(t, &m), q, epsilon = 1e-10);
        }
    }

    #[test]
    fn maxima_density_examples() {
        assert_relative_eq!(maxima_density_sphere(1.0, 0.0, SignVariant::Corrected), 0.0, epsilon = 1e-15);
        let v = maxima_density_sphere(1.0, 3.0, SignVariant::Corrected);
        assert_relative_eq!(v, 18.0 * (2.0 * PI).sqrt() * gaussian_pdf(3.0), epsilon = 1e-15);
        assert!((v - 0.199_962).abs() < 1e-6);
        let p = maxima_density_sphere(1.0, 3.0, SignVariant::PaperText);
        assert_relative_eq!(p, 14.0 * (2.0 * PI).sqrt() * gaussian_pdf(3.0), epsilon = 1e-15);
    }

    #[test]
    fn lk_sphere_circle_values() {
        let lk = lk_sphere_circle(1.0);
        assert_eq!(lk.curvatures.len(), 4);
        assert_eq!(lk.curvatures[0], 0.0);
        assert_relative_eq!(lk.curvatures[1], 4.0 * PI);
        assert_eq!(lk.curvatures[2], 0.0);
        assert_relative_eq!(lk.curvatures[3], 8.0 * PI * PI);
        let lk3 = lk_sphere_circle(3.0);
        assert_relative_eq!(lk3.curvatures[3] / lk.curvatures[3], 9.0);
        assert_relative_eq!(lk3.curvatures[1], 4.0 * PI);
    }

    #[test]
    fn ec_sum_examples() {
        let v = ec_sum_product(&lk_sphere_circle(1.0), 3.0);
        assert_relative_eq!(v, 18.0 * (2.0 * PI).sqrt() * gaussian_pdf(3.0), max_relative = 1e-14);
        assert_eq!(ec_sum_product(&ProductLK::new(vec![0.0; 4]), 1.0), 0.0);
        let only0 = ProductLK::new(vec![1.0]);
        assert_relative_eq!(ec_sum_product(&only0, 1.3), gaussian_tail(1.3), epsilon = 1e-15);
    }

    #[test]
    fn maxima_prefactor_matches_alternative_form() {
        // vol(S^{k-1})/(2pi)^{(m+k-1)/2} = 1/(2^{(m+k-3)/2} pi^{(m-1)/2} Gamma(k/2))
        for m in 1..5u32 {
            for k in 1..6u32 {
                let alt = 1.0
                    / ((2f64).powf((m as f64 + k as f64 - 3.0) / 2.0)
                        * PI.powf((m as f64 - 1.0) / 2.0)
                        * ln_gamma(k as f64 / 2.0).exp());
                assert_relative_eq!(maxima_prefactor(m, k), alt, max_relative = 1e-13);
            }
        }
        assert_relative_eq!(sphere_volume(1), 2.0 * PI, epsilon = 1e-13);
        assert_relative_eq!(sphere_volume(2), 4.0 * PI, epsilon = 1e-13);
    }

    #[test]
    fn nodal_volume_helper() {
        // k = m: expected number of zeros of 2 fields on the unit sphere is vol(S^0)/vol(S^2)*4pi = 2
        assert_relative_eq!(expected_nodal_volume(2, 2, 4.0 * PI).unwrap(), 2.0, epsilon = 1e-13);
        assert!(expected_nodal_volume(2, 3, 1.0).is_err());
    }

    #[test]
    fn spectrum_parse_errors_name_the_line() {
        let ok = PowerSpectrum::parse("# header\n2 1.0\n\n5 0.5 # trailing\n").unwrap();
        assert_eq!(ok.entries(), &[(2, 1.0), (5, 0.5)]);
        match PowerSpectrum::parse("2 1.0\n3 abc\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        match PowerSpectrum::parse("2 1.0 7\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 1),
            other => panic!("{other:?}"),
        }
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn cauchy_schwarz_on_chi_moments(k in 2u32..60, frac in 0.0f64..0.99) {
                let a = frac * k as f64;
                let p = chi_moment(k, a).unwrap() * chi_moment(k, -a).unwrap();
                prop_assert!(p >= 1.0 - 1e-12);
            }

            #[test]
            fn corrected_sphere_model_has_c_minus_sigma2_one_over_r2(
                cls in proptest::collection::vec(0.0f64..2.0, 1..12)
            ) {
                let entries: Vec<(u32, f64)> = cls.iter().enumerate().map(|(i, &c)| (i as u32 + 1, c + 1e-3)).collect();
                let spec = PowerSpectrum::new(entries).unwrap();
                let r2 = normal_radius(&spec).powi(2);
                let m = spherical_hessian_model(&spec, SignVariant::Corrected).unwrap();
                prop_assert!((m.c_minus_sigma2() - 1.0 / r2).abs() <= 1e-12 * (1.0 / r2).max(1.0));
            }

            #[test]
            fn maxima_density_is_gks_sum_without_the_tail_term(r in 0.2f64..6.0, t in 0.5f64..6.0) {
                let lk = lk_sphere_circle(r);
                let total = ec_sum_product(&lk, t);
                let dens = maxima_density_sphere(r, t, SignVariant::Corrected);
                // the j = 0 curvature vanishes on rS^2 x S^1, so the two agree to rounding
                let j0 = lk.curvatures[0].abs() * gaussian_tail(t);
                prop_assert!((total - dens).abs() <= j0 + 1e-12 * dens.abs().max(1e-300));
            }
        }
    }
}
