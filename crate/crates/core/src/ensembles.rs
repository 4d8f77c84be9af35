//! Samplers for the random objects entering the Kac-Rice functionals.
//!
//! All samplers are pure functions of their parameters and the generator they
//! are handed; pair them with [`RngStream`](crate::rng::RngStream) for
//! reproducible streams.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc_inv;
use statrs::function::gamma::{gamma_ur, ln_gamma};

use crate::analytic::{gaussian_tail, HessianModel2D};
use crate::error::{Error, Result};
use crate::matrix::{Sym2, SymMatrix};

#[inline]
pub fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

/// Uniform on (0, 1].
#[inline]
fn uniform_open0<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    1.0 - rng.random::<f64>()
}

/// One draw of `chi_k = sqrt(g_1^2 + ... + g_k^2)`.
pub fn sample_chi<R: Rng + ?Sized>(k: u32, rng: &mut R) -> f64 {
    (0..k).map(|_| normal(rng).powi(2)).sum::<f64>().sqrt()
}

/// `Q(a, x)` with `Q(a, 0) = 1`.
pub(crate) fn upper_gamma_q(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        1.0
    } else {
        gamma_ur(a, x)
    }
}

/// `chi_k` conditioned on `chi_k >= t`, by inverting the upper regularized
/// incomplete gamma function. Returns the draw and `P(chi_k >= t)`.
pub fn sample_chi_tail<R: Rng + ?Sized>(k: u32, t: f64, rng: &mut R) -> (f64, f64) {
    let a = 0.5 * k as f64;
    let t2 = t.max(0.0).powi(2);
    let mass = upper_gamma_q(a, 0.5 * t2);
    let u = uniform_open0(rng);
    if mass <= 0.0 {
        return (t, 0.0);
    }
    let target = (u * mass).ln();
    // Solve ln Q(a, x/2) = target for x >= t2. ln Q is decreasing and concave
    // in x, so Newton from the left converges monotonically.
    let ln_q = |x: f64| upper_gamma_q(a, 0.5 * x).ln();
    let dln_q = |x: f64, lq: f64| {
        let h = 0.5 * x;
        -0.5 * ((a - 1.0) * h.ln() - h - ln_gamma(a) - lq).exp()
    };
    let mut x = t2 - 2.0 * u.ln();
    let mut lo = t2;
    let mut hi = f64::INFINITY;
    for _ in 0..100 {
        let lq = ln_q(x);
        if !lq.is_finite() {
            hi = x;
            x = 0.5 * (lo + x);
            continue;
        }
        let g = lq - target;
        if g > 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let step = g / dln_q(x.max(1e-300), lq);
        let mut next = x - step;
        if !(next > lo && next < hi) {
            next = if hi.is_finite() { 0.5 * (lo + hi) } else { 2.0 * x.max(1.0) };
        }
        if (next - x).abs() <= 1e-14 * x.max(1.0) {
            x = next;
            break;
        }
        x = next;
    }
    (x.max(t2).sqrt(), mass)
}

/// Standard normal conditioned on `g >= t`, by inverse CDF of the upper tail.
/// Returns the draw and `Psi(t)`.
pub fn sample_gaussian_tail<R: Rng + ?Sized>(t: f64, rng: &mut R) -> (f64, f64) {
    let mass = gaussian_tail(t);
    let u = uniform_open0(rng);
    let p = (u * mass).min(1.0 - 1e-17);
    let g = std::f64::consts::SQRT_2 * erfc_inv(2.0 * p);
    (g.max(t), mass)
}

/// Gram matrix `A_{ab} = <g_a, g_b>` of `m` i.i.d. standard Gaussian vectors in `R^k`.
/// `k = 0` gives the zero matrix.
pub fn sample_wishart<R: Rng + ?Sized>(k: u32, m: usize, rng: &mut R) -> SymMatrix {
    let vecs: Vec<f64> = (0..m * k as usize).map(|_| normal(rng)).collect();
    let k = k as usize;
    SymMatrix::from_fn(m, |a, b| {
        (0..k).map(|i| vecs[a * k + i] * vecs[b * k + i]).sum()
    })
}

/// A Hessian-like matrix together with its coupled standard Gaussian.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HessianDraw {
    pub h: SymMatrix,
    pub gamma: f64,
}

/// Precomputed factor for drawing `(H, gamma)` from a [`HessianModel2D`].
#[derive(Debug, Clone, Copy)]
pub struct HessianSampler {
    model: HessianModel2D,
    // lower factor of the (h1, h3) block
    l11: f64,
    l21: f64,
    l22: f64,
    sigma: f64,
    trace_coef: f64,
    noise_coef: f64,
    // factors for the gamma-first representation
    sum_scale: f64,
}

impl HessianSampler {
    pub fn new(model: HessianModel2D) -> Result<Self> {
        if !model.hessian_like() {
            return Err(Error::Domain(format!(
                "model is not Hessian-like: sigma^2 + c = {} < 1",
                model.sigma2() + model.c()
            )));
        }
        let d = 2.0 * model.sigma2() + model.c();
        let l11 = d.sqrt();
        let l21 = if l11 > 0.0 { model.c() / l11 } else { 0.0 };
        let l22 = (d - l21 * l21).max(0.0).sqrt();
        Ok(Self {
            model,
            l11,
            l21,
            l22,
            sigma: model.sigma2().sqrt(),
            trace_coef: model.trace_coefficient(),
            noise_coef: model.noise_coefficient(),
            sum_scale: (model.sigma2() + model.c() - 1.0).max(0.0).sqrt(),
        })
    }

    pub fn model(&self) -> &HessianModel2D {
        &self.model
    }

    /// `(h1, h2, h3)` from the rotation-invariant covariance, then
    /// `gamma = -tr(H)/(2(sigma^2+c)) + gamma_0 sqrt(1 - 1/(sigma^2+c))`.
    /// On the boundary `sigma^2 + c = 1` the noise term is skipped exactly.
    pub fn sample_pair<R: Rng + ?Sized>(&self, rng: &mut R) -> (Sym2, f64) {
        let z1 = normal(rng);
        let z2 = normal(rng);
        let z3 = normal(rng);
        let h1 = self.l11 * z1;
        let h3 = self.l21 * z1 + self.l22 * z2;
        let h2 = self.sigma * z3;
        let h = Sym2::new(h1, h2, h3);
        let mut gamma = -h.trace() * self.trace_coef;
        if self.noise_coef > 0.0 {
            gamma += self.noise_coef * normal(rng);
        }
        (h, gamma)
    }

    /// `H` conditioned on `gamma`: `H = -gamma I + H~` with `H~` independent of
    /// `gamma`, `h~1 = u + d`, `h~3 = u - d`, `u ~ N(0, sigma^2 + c - 1)`,
    /// `d, h2 ~ N(0, sigma^2)`.
    pub fn sample_given_gamma<R: Rng + ?Sized>(&self, gamma: f64, rng: &mut R) -> Sym2 {
        let u = self.sum_scale * normal(rng);
        let d = self.sigma * normal(rng);
        let h2 = self.sigma * normal(rng);
        Sym2::new(-gamma + u + d, h2, -gamma + u - d)
    }
}

/// Draws `(H, gamma)` for a 2x2 rotation-invariant Hessian-like model.
pub fn sample_hessian_like_2d<R: Rng + ?Sized>(model: &HessianModel2D, rng: &mut R) -> Result<HessianDraw> {
    let (h, gamma) = HessianSampler::new(*model)?.sample_pair(rng);
    Ok(HessianDraw { h: h.into(), gamma })
}

/// Joint Gaussian law of `(vec H, gamma)` for a general `m x m` Hessian-like
/// matrix, `vec H` being the packed upper triangle in row-major order.
#[derive(Debug, Clone)]
pub struct JointHessianLaw {
    m: usize,
    factor: Vec<f64>,
}

impl JointHessianLaw {
    /// `cov` is the dense `(p+1) x (p+1)` covariance, `p = m(m+1)/2`, with
    /// `gamma` last. Requires `var(gamma) = 1` and `E[H gamma] = -I`.
    pub fn new(m: usize, cov: &[f64]) -> Result<Self> {
        let p = m * (m + 1) / 2;
        let n = p + 1;
        if cov.len() != n * n {
            return Err(Error::Domain(format!("expected {n}x{n} covariance")));
        }
        if (cov[n * n - 1] - 1.0).abs() > 1e-12 {
            return Err(Error::Domain("var(gamma) must be 1".into()));
        }
        let mut idx = 0;
        for i in 0..m {
            for j in i..m {
                let want = if i == j { -1.0 } else { 0.0 };
                if (cov[idx * n + p] - want).abs() > 1e-12 {
                    return Err(Error::Domain(format!("E[H_{i}{j} gamma] must be {want}")));
                }
                idx += 1;
            }
        }
        // semidefinite-tolerant Cholesky
        let mut l = vec![0.0; n * n];
        let scale = (0..n).map(|i| cov[i * n + i]).fold(0.0, f64::max);
        for j in 0..n {
            let mut d = cov[j * n + j];
            for k in 0..j {
                d -= l[j * n + k] * l[j * n + k];
            }
            if d < -1e-10 * scale {
                return Err(Error::Domain("covariance is not positive semidefinite".into()));
            }
            let d = d.max(0.0).sqrt();
            l[j * n + j] = d;
            for i in j + 1..n {
                let mut s = cov[i * n + j];
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k];
                }
                l[i * n + j] = if d > 1e-14 * scale.sqrt() { s / d } else { 0.0 };
            }
        }
        Ok(Self { m, factor: l })
    }

    /// The law induced by a [`HessianModel2D`], with `gamma` coupled as in [`HessianSampler`].
    pub fn from_model(model: &HessianModel2D) -> Result<Self> {
        let c = model.covariance();
        // packed order (h11, h12, h22) = (h1, h2, h3)
        let mut cov = vec![0.0; 16];
        for i in 0..3 {
            for j in 0..3 {
                cov[i * 4 + j] = c[i][j];
            }
        }
        cov[3] = -1.0;
        cov[12] = -1.0;
        cov[2 * 4 + 3] = -1.0;
        cov[3 * 4 + 2] = -1.0;
        cov[15] = 1.0;
        Self::new(2, &cov)
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> HessianDraw {
        let n = self.factor.len().isqrt();
        let z: Vec<f64> = (0..n).map(|_| normal(rng)).collect();
        let x: Vec<f64> = (0..n)
            .map(|i| (0..=i).map(|k| self.factor[i * n + k] * z[k]).sum())
            .collect();
        let mut h = SymMatrix::zeros(self.m);
        let mut idx = 0;
        for i in 0..self.m {
            for j in i..self.m {
                h.set(i, j, x[idx]);
                idx += 1;
            }
        }
        HessianDraw { h, gamma: x[n - 1] }
    }
}

/// Bordered matrix `[[H, B], [B^T, -gamma I_{k-1}]]` with `B` an `m x (k-1)`
/// block of i.i.d. standard normals independent of `(H, gamma)`.
pub fn assemble_tilde_h<R: Rng + ?Sized>(draw: &HessianDraw, k: u32, rng: &mut R) -> Result<SymMatrix> {
    if k < 2 {
        return Err(Error::Domain(format!("bordered matrix needs k >= 2 (got {k})")));
    }
    let m = draw.h.dim();
    let border: Vec<f64> = (0..m * (k as usize - 1)).map(|_| normal(rng)).collect();
    Ok(assemble_tilde_h_with_border(draw, k, &border))
}

/// As [`assemble_tilde_h`] with a caller-supplied border (row-major `m x (k-1)`).
pub fn assemble_tilde_h_with_border(draw: &HessianDraw, k: u32, border: &[f64]) -> SymMatrix {
    let m = draw.h.dim();
    let kk = k as usize - 1;
    assert_eq!(border.len(), m * kk);
    SymMatrix::from_fn(m + kk, |i, j| match (i < m, j < m) {
        (true, true) => draw.h.get(i, j),
        (true, false) => border[i * kk + (j - m)],
        (false, true) => border[j * kk + (i - m)],
        (false, false) => {
            if i == j {
                -draw.gamma
            } else {
                0.0
            }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{chi_moment, planar_hessian_model};
    use crate::rng::RngStream;
    use approx::assert_relative_eq;

    fn mean_se(xs: &[f64]) -> (f64, f64) {
        let n = xs.len() as f64;
        let m = xs.iter().sum::<f64>() / n;
        let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
        (m, (v / n).sqrt())
    }

    #[test]
    fn chi_moments_by_sampling() {
        let mut rng = RngStream::new(1, 0).rng();
        let sq: Vec<f64> = (0..200_000).map(|_| sample_chi(2, &mut rng).powi(2)).collect();
        let (m, se) = mean_se(&sq);
        assert!((m - 2.0).abs() < 3.0 * se, "{m} +- {se}");
        let inv: Vec<f64> = (0..200_000).map(|_| sample_chi(4, &mut rng).powi(-2)).collect();
        let (m, se) = mean_se(&inv);
        assert!((m - 0.5).abs() < 3.0 * se, "{m} +- {se}");
        // k = 1 is |N(0,1)|: E = sqrt(2/pi)
        let one: Vec<f64> = (0..200_000).map(|_| sample_chi(1, &mut rng)).collect();
        let (m, se) = mean_se(&one);
        assert!((m - chi_moment(1, 1.0).unwrap()).abs() < 3.0 * se);
        assert!(one.iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn chi_tail_conditional_mean() {
        let mut rng = RngStream::new(2, 0).rng();
        for &(k, t) in &[(2u32, 1.5), (4, 2.0), (3, 4.0), (5, 0.0)] {
            let draws: Vec<(f64, f64)> = (0..100_000).map(|_| sample_chi_tail(k, t, &mut rng)).collect();
            assert!(draws.iter().all(|d| d.0 >= t));
            let mass = draws[0].1;
            let xs: Vec<f64> = draws.iter().map(|d| d.0 * d.0).collect();
            let (m, se) = mean_se(&xs);
            // E[chi^2 1{chi >= t}] = k * Q(k/2 + 1, t^2/2)
            let want = k as f64 * upper_gamma_q(0.5 * k as f64 + 1.0, 0.5 * t * t) / mass;
            assert!((m - want).abs() < 3.5 * se, "k={k} t={t}: {m} vs {want} +- {se}");
        }
    }

    #[test]
    fn gaussian_tail_conditional_mean() {
        let mut rng = RngStream::new(3, 0).rng();
        for &t in &[0.0, 1.0, 3.0, 5.0, 7.0] {
            let xs: Vec<f64> = (0..100_000).map(|_| sample_gaussian_tail(t, &mut rng).0).collect();
            assert!(xs.iter().all(|&x| x >= t));
            let (m, se) = mean_se(&xs);
            let want = crate::analytic::hermite_tail_ratio(t).recip();
            assert!((m - want).abs() < 3.5 * se, "t={t}: {m} vs {want}");
        }
    }

    #[test]
    fn wishart_shape_and_mean() {
        let mut rng = RngStream::new(4, 0).rng();
        assert_eq!(sample_wishart(0, 2, &mut rng), SymMatrix::zeros(2));
        let a = sample_wishart(1, 2, &mut rng);
        assert!(a.det().abs() < 1e-12 * (1.0 + a.get(0, 0) * a.get(1, 1)));
        let n = 100_000;
        let draws: Vec<SymMatrix> = (0..n).map(|_| sample_wishart(3, 2, &mut rng)).collect();
        for (i, j, want) in [(0, 0, 3.0), (1, 1, 3.0), (0, 1, 0.0)] {
            let xs: Vec<f64> = draws.iter().map(|a| a.get(i, j)).collect();
            let (m, se) = mean_se(&xs);
            assert!((m - want).abs() < 3.0 * se, "({i},{j}): {m}");
        }
        let tr: Vec<f64> = draws.iter().map(|a| a.trace()).collect();
        let (m, se) = mean_se(&tr);
        assert!((m - 6.0).abs() < 3.0 * se);
        assert!(draws.iter().all(|a| a.det() > 0.0));
    }

    #[test]
    fn wishart_2_2_density_histogram() {
        // For A(2,2) the diagonal entries are chi^2_2 marginally: P(a11 > x) = e^{-x/2}.
        // Check the joint law through det/trace: the density is
        // exp(-tr/2) / (4 pi sqrt(det)), so (a11, a22, a12) -> P(tr <= s) has
        // the closed form of a chi^2_4: 1 - e^{-s/2}(1 + s/2).
        let mut rng = RngStream::new(5, 0).rng();
        let n = 200_000;
        let edges = [0.0, 1.0, 2.0, 3.0, 4.0, 6.0, 8.0, 12.0, f64::INFINITY];
        let cdf = |s: f64| if s.is_infinite() { 1.0 } else { 1.0 - (-s / 2.0).exp() * (1.0 + s / 2.0) };
        let mut counts = vec![0usize; edges.len() - 1];
        for _ in 0..n {
            let tr = sample_wishart(2, 2, &mut rng).trace();
            let b = edges.windows(2).position(|w| tr >= w[0] && tr < w[1]).unwrap();
            counts[b] += 1;
        }
        let chi2: f64 = counts
            .iter()
            .enumerate()
            .map(|(i, &c)| {
                let e = n as f64 * (cdf(edges[i + 1]) - cdf(edges[i]));
                (c as f64 - e).powi(2) / e
            })
            .sum();
        // 7 degrees of freedom, 99.9% quantile 24.3
        assert!(chi2 < 24.3, "chi2 = {chi2}");
    }

    #[test]
    fn hessian_cross_moments_berry() {
        let model = planar_hessian_model(1.5).unwrap();
        let s = HessianSampler::new(model).unwrap();
        let mut rng = RngStream::new(6, 0).rng();
        let n = 200_000;
        let (mut p1, mut p2, mut p3, mut g2) = (vec![], vec![], vec![], vec![]);
        for _ in 0..n {
            let (h, g) = s.sample_pair(&mut rng);
            assert_eq!(g, -(h.a11 + h.a22) / 2.0);
            p1.push(h.a11 * g);
            p2.push(h.a12 * g);
            p3.push(h.a22 * g);
            g2.push(g * g);
        }
        for (xs, want) in [(&p1, -1.0), (&p2, 0.0), (&p3, -1.0), (&g2, 1.0)] {
            let (m, se) = mean_se(xs);
            assert!((m - want).abs() < 3.0 * se, "{m} vs {want}");
        }
    }

    #[test]
    fn gamma_first_representation_has_the_same_law() {
        let model = HessianModel2D::new(0.7, 0.9).unwrap();
        let s = HessianSampler::new(model).unwrap();
        let mut rng = RngStream::new(7, 0).rng();
        let n = 200_000;
        type Draw = (Sym2, f64);
        let stats = |v: &[Draw]| -> Vec<(f64, f64)> {
            let f: [fn(&Draw) -> f64; 5] = [
                |d| d.0.a11 * d.0.a11,
                |d| d.0.a11 * d.0.a22,
                |d| d.0.a12 * d.0.a12,
                |d| d.0.a22 * d.1,
                |d| d.1 * d.1,
            ];
            f.iter()
                .map(|f| mean_se(&v.iter().map(f).collect::<Vec<_>>()))
                .collect()
        };
        let a: Vec<(Sym2, f64)> = (0..n).map(|_| s.sample_pair(&mut rng)).collect();
        let b: Vec<(Sym2, f64)> = (0..n)
            .map(|_| {
                let g = normal(&mut rng);
                (s.sample_given_gamma(g, &mut rng), g)
            })
            .collect();
        let cov = model.covariance();
        let want = [cov[0][0], cov[0][2], cov[1][1], -1.0, 1.0];
        for ((sa, sb), w) in stats(&a).iter().zip(stats(&b)).zip(want) {
            assert!((sa.0 - w).abs() < 3.5 * sa.1, "{sa:?} vs {w}");
            assert!((sb.0 - w).abs() < 3.5 * sb.1, "{sb:?} vs {w}");
        }
    }

    #[test]
    fn rotation_invariance_of_sampled_hessian() {
        let model = HessianModel2D::new(0.4, 0.8).unwrap();
        let s = HessianSampler::new(model).unwrap();
        let mut rng = RngStream::new(8, 0).rng();
        let (c, sn) = ((std::f64::consts::PI / 7.0).cos(), (std::f64::consts::PI / 7.0).sin());
        let n = 200_000;
        let mut orig = vec![[0.0; 3]; n];
        let mut rot = vec![[0.0; 3]; n];
        for i in 0..n {
            let (h, _) = s.sample_pair(&mut rng);
            // R^T H R for R = rotation by pi/7
            let r11 = c * c * h.a11 + 2.0 * c * sn * h.a12 + sn * sn * h.a22;
            let r22 = sn * sn * h.a11 - 2.0 * c * sn * h.a12 + c * c * h.a22;
            let r12 = -c * sn * h.a11 + (c * c - sn * sn) * h.a12 + c * sn * h.a22;
            orig[i] = [h.a11, h.a12, h.a22];
            rot[i] = [r11, r12, r22];
        }
        for (i, j) in [(0, 0), (0, 2), (1, 1), (0, 1)] {
            let a: Vec<f64> = orig.iter().map(|v| v[i] * v[j]).collect();
            let b: Vec<f64> = rot.iter().map(|v| v[i] * v[j]).collect();
            let (ma, sa) = mean_se(&a);
            let (mb, sb) = mean_se(&b);
            assert!((ma - mb).abs() < 3.0 * (sa * sa + sb * sb).sqrt(), "({i},{j}) {ma} vs {mb}");
        }
    }

    #[test]
    fn non_hessian_like_model_is_rejected() {
        let m = HessianModel2D::new(0.2, 0.3).unwrap();
        assert!(HessianSampler::new(m).is_err());
        assert!(sample_hessian_like_2d(&m, &mut RngStream::new(0, 0).rng()).is_err());
    }

    #[test]
    fn bordered_matrix_layout_and_block_determinant() {
        let mut rng = RngStream::new(9, 0).rng();
        let model = HessianModel2D::new(0.5, 0.6).unwrap();
        let draw = sample_hessian_like_2d(&model, &mut rng).unwrap();
        let t = assemble_tilde_h(&draw, 2, &mut rng).unwrap();
        assert_eq!(t.dim(), 3);
        assert_eq!(t.get(0, 0), draw.h.get(0, 0));
        assert_eq!(t.get(0, 1), draw.h.get(0, 1));
        assert_eq!(t.get(2, 2), -draw.gamma);
        let zeroed = assemble_tilde_h_with_border(&draw, 2, &[0.0, 0.0]);
        assert_relative_eq!(zeroed.det(), -draw.gamma * draw.h.det(), max_relative = 1e-12);
        let t4 = assemble_tilde_h(&draw, 4, &mut rng).unwrap();
        assert_eq!(t4.dim(), 5);
        assert_eq!(t4.get(3, 4), 0.0);
        assert_eq!(t4.get(4, 4), -draw.gamma);
        assert!(assemble_tilde_h(&draw, 1, &mut rng).is_err());
    }

    #[test]
    fn joint_law_matches_model_sampler() {
        let model = HessianModel2D::new(0.5, 0.9).unwrap();
        let law = JointHessianLaw::from_model(&model).unwrap();
        let mut rng = RngStream::new(10, 0).rng();
        let n = 200_000;
        let draws: Vec<HessianDraw> = (0..n).map(|_| law.sample(&mut rng)).collect();
        for (i, j) in [(0usize, 0usize), (1, 1), (0, 1)] {
            let want = if i == j { -1.0 } else { 0.0 };
            let xs: Vec<f64> = draws.iter().map(|d| d.h.get(i, j) * d.gamma).collect();
            let (m, se) = mean_se(&xs);
            assert!((m - want).abs() < 3.0 * se);
        }
        let mut bad = vec![0.0; 16];
        bad[15] = 1.0;
        assert!(JointHessianLaw::new(2, &bad).is_err());
    }

    #[test]
    fn determinism() {
        let model = HessianModel2D::new(0.5, 0.6).unwrap();
        let run = || {
            let mut rng = RngStream::new(11, 5).rng();
            let d = sample_hessian_like_2d(&model, &mut rng).unwrap();
            let w = sample_wishart(3, 2, &mut rng);
            (d, w, sample_chi(4, &mut rng))
        };
        assert_eq!(run(), run());
    }
}
