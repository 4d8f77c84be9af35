use super::{Field, Jet};
use crate::error::{Error, Result};
use crate::matrix::Sym2;

/// Below this `|Y|` the derivatives of `f = |Y|` are refused.
pub const NODAL_EPS: f64 = 1e-12;

/// `Y = (X_1, ..., X_k)` from independent realizations of one model, with
/// `f = |Y|` and `F = |Y|^2 / 2`.
#[derive(Debug, Clone)]
pub struct ChiFieldSample<T> {
    components: Vec<T>,
}

pub fn assemble_chi<T: Field>(components: Vec<T>) -> Result<ChiFieldSample<T>> {
    if components.is_empty() {
        return Err(Error::Domain("a chi field needs at least one component".into()));
    }
    Ok(ChiFieldSample { components })
}

impl<T: Field> ChiFieldSample<T> {
    pub fn k(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[T] {
        &self.components
    }

    pub fn values(&self, p: [f64; 3]) -> Vec<f64> {
        self.components.iter().map(|c| c.value(p)).collect()
    }

    /// `f(p) = |Y(p)|`.
    pub fn value(&self, p: [f64; 3]) -> f64 {
        self.components.iter().map(|c| c.value(p).powi(2)).sum::<f64>().sqrt()
    }

    /// Jet of `F = |Y|^2/2`: gradient `sum X_i dX_i`, Hessian
    /// `sum dX_i dX_i^T + X_i H X_i`. Smooth everywhere.
    pub fn jet_half_square(&self, p: [f64; 3]) -> Jet {
        let mut out: Option<Jet> = None;
        for c in &self.components {
            let j = c.jet(p);
            let g = j.grad;
            let term = Sym2::new(g[0] * g[0], g[0] * g[1], g[1] * g[1]).add(&j.hess.scaled(j.value));
            match out.as_mut() {
                None => {
                    out = Some(Jet {
                        value: 0.5 * j.value * j.value,
                        grad: [j.value * g[0], j.value * g[1]],
                        hess: term,
                        frame: j.frame,
                    })
                }
                Some(o) => {
                    o.value += 0.5 * j.value * j.value;
                    o.grad[0] += j.value * g[0];
                    o.grad[1] += j.value * g[1];
                    o.hess = o.hess.add(&term);
                }
            }
        }
        out.expect("at least one component")
    }

    /// Jet of `f = |Y|` by the chain rule; refused near the nodal set.
    pub fn jet(&self, p: [f64; 3]) -> Result<Jet> {
        Self::chi_from_half_square(self.jet_half_square(p))
    }

    pub(crate) fn chi_from_half_square(big: Jet) -> Result<Jet> {
        let f = (2.0 * big.value).sqrt();
        if f < NODAL_EPS {
            return Err(Error::NodalProximity(f));
        }
        let g = [big.grad[0] / f, big.grad[1] / f];
        // Hess f = Hess F / f - grad F grad F^T / f^3
        let hess = big.hess.scaled(1.0 / f).add_outer(big.grad, -1.0 / (f * f * f));
        Ok(Jet { value: f, grad: g, hess, frame: big.frame })
    }

    /// `phi(p, u) = Y(p) . u`.
    pub fn phi(&self, p: [f64; 3], u: &[f64]) -> Result<f64> {
        if u.len() != self.k() {
            return Err(Error::Domain(format!("direction has {} entries, field has {}", u.len(), self.k())));
        }
        Ok(self.components.iter().zip(u).map(|(c, ui)| c.value(p) * ui).sum())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::PowerSpectrum;
    use crate::fieldsim::{geodesic_fd, normalize, synth_planar, synth_sphere, PlanarKind};
    use crate::rng::RngStream;
    use statrs::function::gamma::gamma_lr;

    fn sphere_chi(k: usize, seed: u64) -> ChiFieldSample<crate::fieldsim::SphericalFieldSample> {
        let spec = PowerSpectrum::new(vec![(2, 1.0), (4, 1.0)]).unwrap();
        let comps = (0..k).map(|i| synth_sphere(&spec, RngStream::new(seed, i as u64)).unwrap()).collect();
        assemble_chi(comps).unwrap()
    }

    #[test]
    fn k1_is_absolute_value_and_squares_add_up() {
        let f1 = sphere_chi(1, 1);
        let f3 = sphere_chi(3, 2);
        let mut rng = RngStream::new(1, 99).rng();
        for _ in 0..1000 {
            let p = normalize([
                crate::ensembles::normal(&mut rng),
                crate::ensembles::normal(&mut rng),
                crate::ensembles::normal(&mut rng),
            ]);
            assert_eq!(f1.value(p), f1.components()[0].value(p).abs());
            let s: f64 = f3.values(p).iter().map(|x| x * x).sum();
            assert!((f3.value(p).powi(2) - s).abs() <= 1e-14 * s.max(1.0));
        }
    }

    #[test]
    fn half_square_and_chi_derivatives_match_finite_differences() {
        let f = sphere_chi(3, 3);
        let mut rng = RngStream::new(3, 99).rng();
        for _ in 0..100 {
            let p = normalize([
                crate::ensembles::normal(&mut rng),
                crate::ensembles::normal(&mut rng),
                crate::ensembles::normal(&mut rng),
            ]);
            let r = f.components()[0].radius();
            let big = f.jet_half_square(p);
            let small = f.jet(p).unwrap();
            for (a, b) in [(1.0, 0.0), (0.0, 1.0), (0.6, 0.8)] {
                let e: [f64; 3] = std::array::from_fn(|i| a * big.frame[0][i] + b * big.frame[1][i]);
                // arc length s on the sphere of radius r is angle s / r
                let half = |q: [f64; 3]| 0.5 * f.value(q).powi(2);
                let (d1, d2) = geodesic_fd(half, p, e, 1e-4 / r, 1e-3 / r);
                let (d1, d2) = (d1 / r, d2 / (r * r));
                let g = a * big.grad[0] + b * big.grad[1];
                let h = a * a * big.hess.a11 + 2.0 * a * b * big.hess.a12 + b * b * big.hess.a22;
                assert!((d1 - g).abs() < 1e-6, "{d1} vs {g}");
                assert!((d2 - h).abs() < 1e-6, "{d2} vs {h}");
                if small.value < 1e-2 {
                    continue;
                }
                let (d1, d2) = geodesic_fd(|q| f.value(q), p, e, 1e-4 / r, 1e-3 / r);
                let (d1, d2) = (d1 / r, d2 / (r * r));
                let g = a * small.grad[0] + b * small.grad[1];
                let h = a * a * small.hess.a11 + 2.0 * a * b * small.hess.a12 + b * b * small.hess.a22;
                assert!((d1 - g).abs() < 1e-6);
                assert!((d2 - h).abs() < 1e-6 * (1.0 + 1.0 / small.value.powi(3)), "{d2} vs {h}");
            }
        }
    }

    #[test]
    fn one_point_law_is_chi() {
        // Kolmogorov-Smirnov against the chi_3 cdf P(chi^2/2 <= x^2/2)
        let n = 10_000;
        let spec = PowerSpectrum::single(3).unwrap();
        let p = [0.2, -0.5, (1.0f64 - 0.29).sqrt()];
        let mut xs: Vec<f64> = (0..n)
            .map(|i| {
                let comps = (0..3).map(|c| synth_sphere(&spec, RngStream::new(4, i * 3 + c)).unwrap()).collect();
                assemble_chi(comps).unwrap().value(p)
            })
            .collect();
        xs.sort_by(f64::total_cmp);
        let d = xs
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let c = gamma_lr(1.5, 0.5 * x * x);
                (c - i as f64 / n as f64).abs().max(((i + 1) as f64 / n as f64 - c).abs())
            })
            .fold(0.0, f64::max);
        assert!(d < 1.358 / (n as f64).sqrt(), "KS {d}");
    }

    #[test]
    fn nodal_proximity_and_phi() {
        let comps = (0..2).map(|i| synth_planar(PlanarKind::Berry, 64, RngStream::new(5, i)).unwrap()).collect();
        let f = assemble_chi(comps).unwrap();
        let p = [0.4, 0.1, 0.0];
        let y = f.values(p);
        let n = f.value(p);
        let u = [y[0] / n, y[1] / n];
        assert!((f.phi(p, &u).unwrap() - n).abs() < 1e-14);
        assert!(f.phi(p, &[1.0]).is_err());
        let zero = Jet { value: 0.0, grad: [0.0; 2], hess: Sym2::default(), frame: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]] };
        assert!(matches!(
            ChiFieldSample::<crate::fieldsim::PlanarFieldSample>::chi_from_half_square(zero),
            Err(Error::NodalProximity(_))
        ));
        assert!(assemble_chi(Vec::<crate::fieldsim::PlanarFieldSample>::new()).is_err());
    }
}
