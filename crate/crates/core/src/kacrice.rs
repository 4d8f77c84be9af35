//! Monte Carlo estimators for the random-matrix functionals behind the
//! expected critical-point and maxima counts.
//!
//! Every estimator splits its `n` samples into fixed batches of
//! [`BATCH_SIZE`]; batch `b` draws from `stream.split(b)` and batches are
//! merged in index order, so results are bitwise reproducible whatever the
//! number of worker threads.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{inv_chi_constant, maxima_prefactor, HessianModel2D, SignVariant};
use crate::ensembles::{
    normal, sample_chi, sample_chi_tail, sample_gaussian_tail, upper_gamma_q, HessianSampler, JointHessianLaw,
};
use crate::error::{Error, Result};
use crate::matrix::{det_in_place, is_positive_definite_in_place};
use crate::rng::RngStream;

pub const BATCH_SIZE: u64 = 1 << 16;

/// Relative pivot tolerance of the definiteness test.
pub const PD_REL_TOL: f64 = 1e-10;

/// Largest bordered-matrix dimension handled on the stack.
pub const MAX_DIM: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MCEstimate {
    pub value: f64,
    pub std_error: f64,
    pub n: u64,
    pub seed: u64,
}

impl MCEstimate {
    /// An exactly known value (e.g. an infinite threshold).
    pub fn exact(value: f64, n: u64, seed: u64) -> Self {
        Self { value, std_error: 0.0, n, seed }
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { value: self.value * s, std_error: self.std_error * s.abs(), ..*self }
    }

    pub fn relative_se(&self) -> f64 {
        self.std_error / self.value.abs()
    }

    /// `|value - target| <= k * std_error`.
    pub fn within(&self, target: f64, k: f64) -> bool {
        (self.value - target).abs() <= k * self.std_error
    }
}

/// Streaming mean and sum of squared deviations.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Welford {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Welford {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    /// Chan et al. pairwise combination.
    pub fn merge(&mut self, o: &Self) {
        if o.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *o;
            return;
        }
        let n = self.n + o.n;
        let d = o.mean - self.mean;
        self.mean += d * o.n as f64 / n as f64;
        self.m2 += o.m2 + d * d * (self.n as f64 * o.n as f64) / n as f64;
        self.n = n;
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    pub fn estimate(&self, seed: u64) -> MCEstimate {
        MCEstimate {
            value: self.mean,
            std_error: (self.variance() / self.n.max(1) as f64).sqrt(),
            n: self.n,
            seed,
        }
    }
}

/// Runs `n` draws of a vector-valued integrand in batches and returns one
/// estimate per component. Components come from the same draws.
pub fn run_batches<const N: usize, F>(n: u64, stream: RngStream, f: F) -> Result<[MCEstimate; N]>
where
    F: Fn(&mut ChaCha8Rng) -> [f64; N] + Sync,
{
    if n == 0 {
        return Err(Error::Domain("sample count must be at least 1".into()));
    }
    let batches = n.div_ceil(BATCH_SIZE);
    let parts: Vec<[Welford; N]> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = stream.split(b).rng();
            let size = BATCH_SIZE.min(n - b * BATCH_SIZE);
            let mut acc = [Welford::default(); N];
            for _ in 0..size {
                let x = f(&mut rng);
                for (a, v) in acc.iter_mut().zip(x) {
                    a.push(v);
                }
            }
            acc
        })
        .collect();
    let mut total = [Welford::default(); N];
    for p in &parts {
        for (t, w) in total.iter_mut().zip(p) {
            t.merge(w);
        }
    }
    Ok(total.map(|w| w.estimate(stream.seed)))
}

/// Joint law of a Hessian-like matrix and its coupled Gaussian.
#[derive(Debug, Clone)]
pub enum HessianLaw {
    /// Rotation-invariant 2x2 catalog model.
    Catalog(HessianSampler),
    /// User-supplied covariance of `(vec H, gamma)`.
    Joint(JointHessianLaw),
}

impl HessianLaw {
    pub fn from_model(model: &HessianModel2D) -> Result<Self> {
        Ok(Self::Catalog(HessianSampler::new(*model)?))
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Catalog(_) => 2,
            Self::Joint(j) => j.dim(),
        }
    }

    /// Fills the dense `m x m` block `h` (row stride `m`) and returns `gamma`.
    fn draw_pair<R: Rng + ?Sized>(&self, rng: &mut R, h: &mut [f64]) -> f64 {
        match self {
            Self::Catalog(s) => {
                let (hh, g) = s.sample_pair(rng);
                h[..4].copy_from_slice(&[hh.a11, hh.a12, hh.a12, hh.a22]);
                g
            }
            Self::Joint(j) => {
                let d = j.sample(rng);
                let m = d.h.dim();
                for a in 0..m {
                    for b in 0..m {
                        h[a * m + b] = d.h.get(a, b);
                    }
                }
                d.gamma
            }
        }
    }

    /// `H` given `gamma`. `H + gamma I` is independent of `gamma` because
    /// `E[H gamma] = -I` and `var(gamma) = 1`.
    fn draw_given_gamma<R: Rng + ?Sized>(&self, gamma: f64, rng: &mut R, h: &mut [f64]) {
        match self {
            Self::Catalog(s) => {
                let hh = s.sample_given_gamma(gamma, rng);
                h[..4].copy_from_slice(&[hh.a11, hh.a12, hh.a12, hh.a22]);
            }
            Self::Joint(_) => {
                let m = self.dim();
                let g0 = self.draw_pair(rng, h);
                for a in 0..m {
                    h[a * m + a] += g0 - gamma;
                }
            }
        }
    }
}

impl From<HessianSampler> for HessianLaw {
    fn from(s: HessianSampler) -> Self {
        Self::Catalog(s)
    }
}

fn check_threshold(t: f64) -> Result<()> {
    if t.is_nan() {
        Err(Error::Domain("threshold is NaN".into()))
    } else {
        Ok(())
    }
}

/// `E[1{chi_k >= t} |det(A(k-1,m) + chi_k H + chi_k (gamma - chi_k) I)|]`
/// with `A`, `chi_k` and `(H, gamma)` mutually independent.
///
/// When `P(chi_k >= t) < 1/2` the chi variable is drawn from its tail and the
/// integrand reweighted by the tail mass.
pub fn estimate_ek(k: u32, t: f64, law: &HessianLaw, n: u64, stream: RngStream) -> Result<MCEstimate> {
    if k == 0 {
        return Err(Error::Domain("k must be at least 1".into()));
    }
    ek_kernel(k, k - 1, t, law, n, stream)
}

/// `E[chi_k^{-m} 1{chi_k >= t} |det(A(k-1,m) + chi_k H + chi_k (gamma - chi_k) I)|]
/// / E[chi_k^{-m}]`: the same functional with the chi variable tilted by the
/// Kac-Rice density `chi_k^{-m}`, which turns it into `chi_{k-m}`. Requires `k > m`.
pub fn estimate_ek_tilted(k: u32, t: f64, law: &HessianLaw, n: u64, stream: RngStream) -> Result<MCEstimate> {
    let m = law.dim() as u32;
    if k <= m {
        return Err(Error::Domain(format!("tilted functional needs k > m (k = {k}, m = {m})")));
    }
    ek_kernel(k - m, k - 1, t, law, n, stream)
}

/// `E[1{chi_a >= t} |det(A(b,m) + chi_a H + chi_a (gamma - chi_a) I)|]`.
fn ek_kernel(k: u32, wishart: u32, t: f64, law: &HessianLaw, n: u64, stream: RngStream) -> Result<MCEstimate> {
    check_threshold(t)?;
    let m = law.dim();
    if m > MAX_DIM {
        return Err(Error::Domain(format!("matrix dimension {m} exceeds {MAX_DIM}")));
    }
    if n == 0 {
        return Err(Error::Domain("sample count must be at least 1".into()));
    }
    if t == f64::INFINITY {
        return Ok(MCEstimate::exact(0.0, n, stream.seed));
    }
    let mass = if t > 0.0 { upper_gamma_q(0.5 * k as f64, 0.5 * t * t) } else { 1.0 };
    if mass == 0.0 {
        return Ok(MCEstimate::exact(0.0, n, stream.seed));
    }
    let tail = mass < 0.5;
    let [est] = run_batches(n, stream, |rng| {
        let (chi, w) = if tail {
            sample_chi_tail(k, t, rng)
        } else {
            let c = sample_chi(k, rng);
            (c, if c >= t { 1.0 } else { 0.0 })
        };
        if w == 0.0 {
            // keep the stream layout independent of the indicator
            let mut h = [0.0; MAX_DIM * MAX_DIM];
            law.draw_pair(rng, &mut h);
            burn_wishart(wishart, m, rng);
            return [0.0];
        }
        let mut a = [0.0; MAX_DIM * MAX_DIM];
        let gamma = law.draw_pair(rng, &mut a);
        for v in a[..m * m].iter_mut() {
            *v *= chi;
        }
        for i in 0..m {
            a[i * m + i] += chi * (gamma - chi);
        }
        add_wishart(wishart, m, rng, &mut a);
        [w * det_in_place(&mut a[..m * m], m).abs()]
    })?;
    Ok(est)
}

fn add_wishart<R: Rng + ?Sized>(k: u32, m: usize, rng: &mut R, a: &mut [f64]) {
    let mut g = [0.0; MAX_DIM];
    for _ in 0..k {
        for v in g[..m].iter_mut() {
            *v = normal(rng);
        }
        for i in 0..m {
            for j in 0..m {
                a[i * m + j] += g[i] * g[j];
            }
        }
    }
}

fn burn_wishart<R: Rng + ?Sized>(k: u32, m: usize, rng: &mut R) {
    for _ in 0..k as usize * m {
        normal(rng);
    }
}

/// Per-draw components of the maxima functional, all weighted by `Psi(t)`:
/// `[|det H~| 1{-H~ > 0}, det(-H~), -det(-H~)(1 - 1{-H~ > 0}), |det H~|]`.
fn dk_components(k: u32, t: f64, law: &HessianLaw, n: u64, stream: RngStream) -> Result<[MCEstimate; 4]> {
    check_threshold(t)?;
    if k < 2 {
        return Err(Error::Domain(format!("maxima functional needs k >= 2 (got {k})")));
    }
    let m = law.dim();
    let d = m + k as usize - 1;
    if d > MAX_DIM {
        return Err(Error::Domain(format!("bordered dimension {d} exceeds {MAX_DIM}")));
    }
    if n == 0 {
        return Err(Error::Domain("sample count must be at least 1".into()));
    }
    let mass = crate::analytic::gaussian_tail(t);
    if t == f64::INFINITY || mass == 0.0 {
        return Ok([MCEstimate::exact(0.0, n, stream.seed); 4]);
    }
    run_batches(n, stream, |rng| {
        let (gamma, w) = sample_gaussian_tail(t, rng);
        let mut h = [0.0; MAX_DIM * MAX_DIM];
        law.draw_given_gamma(gamma, rng, &mut h);
        // -H~ = [[-H, -B], [-B^T, gamma I]]
        let mut a = [0.0; MAX_DIM * MAX_DIM];
        for i in 0..m {
            for j in 0..m {
                a[i * d + j] = -h[i * m + j];
            }
        }
        for i in 0..m {
            for j in m..d {
                let b = -normal(rng);
                a[i * d + j] = b;
                a[j * d + i] = b;
            }
        }
        for j in m..d {
            a[j * d + j] = gamma;
        }
        let mut c = a;
        let det_neg = det_in_place(&mut a[..d * d], d);
        let pd = is_positive_definite_in_place(&mut c[..d * d], d, PD_REL_TOL);
        let (dk, a2) = if pd { (det_neg, 0.0) } else { (0.0, -det_neg) };
        [w * dk, w * det_neg, w * a2, w * det_neg.abs()]
    })
}

/// `E[|det H~| 1{-H~ positive definite} 1{gamma >= t}]`, sampled with
/// `gamma` conditioned on `gamma >= t` and reweighted by `Psi(t)`.
pub fn estimate_dk(k: u32, t: f64, law: &HessianLaw, n: u64, stream: RngStream) -> Result<MCEstimate> {
    Ok(dk_components(k, t, law, n, stream)?[0])
}

/// As [`estimate_dk`] without the definiteness indicator. Sample-paired with it.
pub fn estimate_dk_unrestricted(k: u32, t: f64, law: &HessianLaw, n: u64, stream: RngStream) -> Result<MCEstimate> {
    Ok(dk_components(k, t, law, n, stream)?[3])
}

/// Signed-determinant part `a1 = E[det(-H~) 1{gamma >= t}]` and definiteness
/// defect `a2`, from the same draws as [`estimate_dk`] so that
/// `a1 + a2 = D` up to rounding.
pub fn estimate_a1_a2(k: u32, t: f64, law: &HessianLaw, n: u64, stream: RngStream) -> Result<(MCEstimate, MCEstimate)> {
    let [_, a1, a2, _] = dk_components(k, t, law, n, stream)?;
    Ok((a1, a2))
}

/// Parameters of an assembled count formula.
#[derive(Debug, Clone)]
pub struct CountFormulaInput {
    pub k: u32,
    pub m: u32,
    pub t: f64,
    /// Volume of the parameter manifold.
    pub volume: f64,
    pub law: HessianLaw,
    /// The integrand is constant over the manifold, so the integral is
    /// `volume` times one functional evaluation.
    pub isotropic: bool,
    /// `Corrected` weights the chi variable by the gradient density inside
    /// the expectation; `PaperText` factorizes the two.
    pub variant: SignVariant,
}

impl CountFormulaInput {
    pub fn isotropic(k: u32, t: f64, volume: f64, model: &HessianModel2D) -> Result<Self> {
        Ok(Self { k, m: 2, t, volume, law: HessianLaw::from_model(model)?, isotropic: true, variant: SignVariant::Corrected })
    }

    fn validate(&self) -> Result<()> {
        if !self.isotropic {
            return Err(Error::Domain(
                "non-isotropic inputs need a quadrature over the manifold, which is not provided".into(),
            ));
        }
        if self.m as usize != self.law.dim() {
            return Err(Error::Domain(format!("m = {} but the Hessian law is {}-dimensional", self.m, self.law.dim())));
        }
        if !(self.volume > 0.0 && self.volume.is_finite()) {
            return Err(Error::Domain(format!("volume must be positive and finite (got {})", self.volume)));
        }
        if !(self.t >= 0.0) {
            return Err(Error::Domain(format!("threshold must be >= 0 (got {})", self.t)));
        }
        Ok(())
    }
}

/// Expected number of critical points of the chi field above `t`:
/// `E[chi_k^{-m}] (2 pi)^{-m/2} volume` times the tilted functional
/// ([`estimate_ek_tilted`]), or times `E_k^t` under `SignVariant::PaperText`.
/// Requires `k > m`.
pub fn expected_critical_points(input: &CountFormulaInput, n: u64, stream: RngStream) -> Result<MCEstimate> {
    input.validate()?;
    if input.k <= input.m {
        return Err(Error::Domain(format!(
            "k = {} <= m = {}: the critical set is not a.s. finite in the way the formula needs",
            input.k, input.m
        )));
    }
    let pre = inv_chi_constant(input.k, input.m)?
        * (2.0 * std::f64::consts::PI).powf(-0.5 * input.m as f64)
        * input.volume;
    let e = match input.variant {
        SignVariant::Corrected => estimate_ek_tilted(input.k, input.t, &input.law, n, stream)?,
        SignVariant::PaperText => estimate_ek(input.k, input.t, &input.law, n, stream)?,
    };
    Ok(e.scaled(pre))
}

/// Expected number of local maxima above `t`:
/// `vol(S^{k-1}) (2 pi)^{-(m+k-1)/2} volume D_k^t`.
pub fn expected_maxima(input: &CountFormulaInput, n: u64, stream: RngStream) -> Result<MCEstimate> {
    input.validate()?;
    let pre = maxima_prefactor(input.m, input.k) * input.volume;
    Ok(estimate_dk(input.k, input.t, &input.law, n, stream)?.scaled(pre))
}
