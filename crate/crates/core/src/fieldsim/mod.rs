//! Realizations of Gaussian fields on the sphere and the plane, evaluated
//! with exact derivatives up to second order, and chi fields built from them.

mod chi;
mod planar;
mod sphere;

pub use chi::{assemble_chi, ChiFieldSample};
pub use planar::{synth_bargmann_fock, synth_planar, PlanarFieldSample, PlanarKind};
pub use sphere::{eval_sphere, gauss_legendre, legendre_normalized, synth_sphere, SphericalFieldSample, MAX_DEGREE};

use crate::matrix::{Sym2, SymMatrix};

/// Value, gradient and Hessian at a point, in the orthonormal tangent frame
/// `frame` (two ambient 3-vectors).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub value: f64,
    pub grad: [f64; 2],
    pub hess: Sym2,
    pub frame: [[f64; 3]; 2],
}

impl Jet {
    pub fn ambient_gradient(&self) -> [f64; 3] {
        let [a, b] = self.frame;
        std::array::from_fn(|i| self.grad[0] * a[i] + self.grad[1] * b[i])
    }

    /// Hessian as a symmetric 3x3 tensor on the ambient space.
    pub fn ambient_hessian(&self) -> [[f64; 3]; 3] {
        let [a, b] = self.frame;
        let h = self.hess;
        std::array::from_fn(|i| {
            std::array::from_fn(|j| {
                h.a11 * a[i] * a[j] + h.a12 * (a[i] * b[j] + b[i] * a[j]) + h.a22 * b[i] * b[j]
            })
        })
    }

    pub fn hessian_matrix(&self) -> SymMatrix {
        self.hess.into()
    }

    /// Same geometric jet expressed in another orthonormal frame of the same tangent plane.
    pub fn in_frame(&self, frame: [[f64; 3]; 2]) -> Jet {
        let dot = |u: [f64; 3], v: [f64; 3]| u[0] * v[0] + u[1] * v[1] + u[2] * v[2];
        // rotation coefficients: new_a = sum_b c[a][b] old_b
        let c = [
            [dot(frame[0], self.frame[0]), dot(frame[0], self.frame[1])],
            [dot(frame[1], self.frame[0]), dot(frame[1], self.frame[1])],
        ];
        let g = self.grad;
        let h = [[self.hess.a11, self.hess.a12], [self.hess.a12, self.hess.a22]];
        let grad = [c[0][0] * g[0] + c[0][1] * g[1], c[1][0] * g[0] + c[1][1] * g[1]];
        let hh = |a: usize, b: usize| {
            let mut s = 0.0;
            for i in 0..2 {
                for j in 0..2 {
                    s += c[a][i] * c[b][j] * h[i][j];
                }
            }
            s
        };
        Jet { value: self.value, grad, hess: Sym2::new(hh(0, 0), hh(0, 1), hh(1, 1)), frame }
    }
}

/// A smooth real field on a 2-dimensional domain embedded in R^3.
pub trait Field: Send + Sync {
    fn value(&self, p: [f64; 3]) -> f64;
    fn jet(&self, p: [f64; 3]) -> Jet;
}

/// Point at geodesic distance `s` from `p` along the unit tangent `e` (unit sphere).
pub fn sphere_exp(p: [f64; 3], e: [f64; 3], s: f64) -> [f64; 3] {
    let (sn, cs) = s.sin_cos();
    std::array::from_fn(|i| cs * p[i] + sn * e[i])
}

/// Central differences along the geodesic through `p` in direction `e` (unit
/// sphere): first derivative at step `h1` (second order), second derivative by
/// the fourth-order five-point stencil at step `h2`.
pub fn geodesic_fd(f: impl Fn([f64; 3]) -> f64, p: [f64; 3], e: [f64; 3], h1: f64, h2: f64) -> (f64, f64) {
    let at = |s: f64| f(sphere_exp(p, e, s));
    let d1 = (at(h1) - at(-h1)) / (2.0 * h1);
    let d2 = (-at(2.0 * h2) + 16.0 * at(h2) - 30.0 * at(0.0) + 16.0 * at(-h2) - at(-2.0 * h2)) / (12.0 * h2 * h2);
    (d1, d2)
}

pub fn normalize(p: [f64; 3]) -> [f64; 3] {
    let n = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
    [p[0] / n, p[1] / n, p[2] / n]
}
