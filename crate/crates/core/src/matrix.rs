//! Small dense symmetric matrices.

use serde::{Deserialize, Serialize};

/// Symmetric matrix stored as its packed upper triangle (row major).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymMatrix {
    dim: usize,
    upper: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, upper: vec![0.0; dim * (dim + 1) / 2] }
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in i..dim {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    /// Builds from a dense row-major slice, reading the upper triangle only.
    pub fn from_dense(dim: usize, dense: &[f64]) -> Self {
        assert_eq!(dense.len(), dim * dim);
        Self::from_fn(dim, |i, j| dense[i * dim + j])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.upper[self.packed(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let k = self.packed(i, j);
        self.upper[k] = v;
    }

    fn packed(&self, i: usize, j: usize) -> usize {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        // rows 0..i hold n + (n-1) + ... + (n-i+1) entries
        i * self.dim - i * i.saturating_sub(1) / 2 + (j - i)
    }

    pub fn is_finite(&self) -> bool {
        self.upper.iter().all(|v| v.is_finite())
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let n = self.dim;
        let mut d = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                d[i * n + j] = self.get(i, j);
            }
        }
        d
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { dim: self.dim, upper: self.upper.iter().map(|v| v * s).collect() }
    }

    /// Max absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        norm_inf(&self.to_dense(), self.dim)
    }

    pub fn det(&self) -> f64 {
        det_in_place(&mut self.to_dense(), self.dim)
    }

    /// Positive definiteness by pivoted Cholesky; pivots at or below
    /// `rel_tol * ||A||_inf` count as not definite.
    pub fn is_positive_definite(&self, rel_tol: f64) -> bool {
        let mut d = self.to_dense();
        is_positive_definite_in_place(&mut d, self.dim, rel_tol)
    }

    /// Eigenvalues in ascending order (cyclic Jacobi).
    pub fn eigenvalues(&self) -> Vec<f64> {
        let n = self.dim;
        let mut a = self.to_dense();
        for _sweep in 0..100 {
            let off: f64 = (0..n)
                .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
                .map(|(i, j)| a[i * n + j] * a[i * n + j])
                .sum();
            if off < 1e-30 * (1.0 + norm_inf(&a, n).powi(2)) {
                break;
            }
            for p in 0..n {
                for q in p + 1..n {
                    let apq = a[p * n + q];
                    if apq == 0.0 {
                        continue;
                    }
                    let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let t = if theta == 0.0 { 1.0 } else { t };
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let akp = a[k * n + p];
                        let akq = a[k * n + q];
                        a[k * n + p] = c * akp - s * akq;
                        a[k * n + q] = s * akp + c * akq;
                    }
                    for k in 0..n {
                        let apk = a[p * n + k];
                        let aqk = a[q * n + k];
                        a[p * n + k] = c * apk - s * aqk;
                        a[q * n + k] = s * apk + c * aqk;
                    }
                }
            }
        }
        let mut ev: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
        ev.sort_by(f64::total_cmp);
        ev
    }
}

pub(crate) fn norm_inf(a: &[f64], n: usize) -> f64 {
    (0..n)
        .map(|i| a[i * n..(i + 1) * n].iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Determinant of a dense row-major `n x n` matrix by partial-pivot elimination.
/// Destroys `a`.
pub(crate) fn det_in_place(a: &mut [f64], n: usize) -> f64 {
    let mut det = 1.0;
    for k in 0..n {
        let mut p = k;
        for i in k + 1..n {
            if a[i * n + k].abs() > a[p * n + k].abs() {
                p = i;
            }
        }
        if a[p * n + k] == 0.0 {
            return 0.0;
        }
        if p != k {
            for j in 0..n {
                a.swap(k * n + j, p * n + j);
            }
            det = -det;
        }
        let piv = a[k * n + k];
        det *= piv;
        for i in k + 1..n {
            let f = a[i * n + k] / piv;
            if f != 0.0 {
                for j in k + 1..n {
                    a[i * n + j] -= f * a[k * n + j];
                }
            }
        }
    }
    det
}

/// Symmetric pivoted Cholesky. Destroys `a`.
pub(crate) fn is_positive_definite_in_place(a: &mut [f64], n: usize, rel_tol: f64) -> bool {
    let tol = rel_tol * norm_inf(a, n);
    for k in 0..n {
        let mut p = k;
        for i in k + 1..n {
            if a[i * n + i] > a[p * n + p] {
                p = i;
            }
        }
        if !(a[p * n + p] > tol) {
            return false;
        }
        if p != k {
            for j in 0..n {
                a.swap(k * n + j, p * n + j);
            }
            for i in 0..n {
                a.swap(i * n + k, i * n + p);
            }
        }
        let l = a[k * n + k].sqrt();
        for i in k + 1..n {
            a[i * n + k] /= l;
        }
        for i in k + 1..n {
            for j in k + 1..=i {
                let v = a[i * n + j] - a[i * n + k] * a[j * n + k];
                a[i * n + j] = v;
                a[j * n + i] = v;
            }
        }
    }
    true
}

/// 2x2 symmetric matrix `[[a11, a12], [a12, a22]]`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Sym2 {
    pub a11: f64,
    pub a12: f64,
    pub a22: f64,
}

impl Sym2 {
    pub fn new(a11: f64, a12: f64, a22: f64) -> Self {
        Self { a11, a12, a22 }
    }

    pub fn det(&self) -> f64 {
        self.a11 * self.a22 - self.a12 * self.a12
    }

    pub fn trace(&self) -> f64 {
        self.a11 + self.a22
    }

    /// Ascending eigenvalues.
    pub fn eigenvalues(&self) -> [f64; 2] {
        let m = 0.5 * (self.a11 + self.a22);
        let d = (0.25 * (self.a11 - self.a22).powi(2) + self.a12 * self.a12).sqrt();
        [m - d, m + d]
    }

    /// `H^{-1} v`, or `None` when singular.
    pub fn solve(&self, v: [f64; 2]) -> Option<[f64; 2]> {
        let det = self.det();
        let scale = self.a11.abs().max(self.a22.abs()).max(self.a12.abs());
        if det.abs() <= 1e-300 || det.abs() <= 1e-15 * scale * scale {
            return None;
        }
        Some([
            (self.a22 * v[0] - self.a12 * v[1]) / det,
            (self.a11 * v[1] - self.a12 * v[0]) / det,
        ])
    }

    pub fn apply(&self, v: [f64; 2]) -> [f64; 2] {
        [self.a11 * v[0] + self.a12 * v[1], self.a12 * v[0] + self.a22 * v[1]]
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self::new(self.a11 * s, self.a12 * s, self.a22 * s)
    }

    pub fn add(&self, o: &Self) -> Self {
        Self::new(self.a11 + o.a11, self.a12 + o.a12, self.a22 + o.a22)
    }

    /// `self + s * u u^T`
    pub fn add_outer(&self, u: [f64; 2], s: f64) -> Self {
        Self::new(
            self.a11 + s * u[0] * u[0],
            self.a12 + s * u[0] * u[1],
            self.a22 + s * u[1] * u[1],
        )
    }
}

impl From<Sym2> for SymMatrix {
    fn from(s: Sym2) -> Self {
        SymMatrix::from_fn(2, |i, j| match (i, j) {
            (0, 0) => s.a11,
            (1, 1) => s.a22,
            _ => s.a12,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn packed_layout_round_trip() {
        let m = SymMatrix::from_fn(4, |i, j| (10 * i + j) as f64);
        for i in 0..4 {
            for j in 0..4 {
                let (a, b) = if i <= j { (i, j) } else { (j, i) };
                assert_eq!(m.get(i, j), (10 * a + b) as f64);
            }
        }
    }

    #[test]
    fn determinant_and_definiteness() {
        let m = SymMatrix::from_dense(3, &[2.0, -1.0, 0.0, -1.0, 2.0, -1.0, 0.0, -1.0, 2.0]);
        assert_relative_eq!(m.det(), 4.0, epsilon = 1e-12);
        assert!(m.is_positive_definite(1e-10));
        assert!(!m.scaled(-1.0).is_positive_definite(1e-10));
        let semi = SymMatrix::from_dense(2, &[1.0, 1.0, 1.0, 1.0]);
        assert!(!semi.is_positive_definite(1e-10));
        let ev = m.eigenvalues();
        let s2 = 2f64.sqrt();
        assert_relative_eq!(ev[0], 2.0 - s2, epsilon = 1e-12);
        assert_relative_eq!(ev[1], 2.0, epsilon = 1e-12);
        assert_relative_eq!(ev[2], 2.0 + s2, epsilon = 1e-12);
    }

    proptest! {
        #[test]
        fn agrees_with_nalgebra(vals in proptest::collection::vec(-3.0f64..3.0, 15)) {
            let n = 5;
            let m = SymMatrix::from_fn(n, |i, j| vals[i * n - i * i.saturating_sub(1) / 2 + j - i]);
            let na = nalgebra::DMatrix::from_fn(n, n, |i, j| m.get(i, j));
            let det = na.determinant();
            prop_assert!((m.det() - det).abs() <= 1e-9 * (1.0 + det.abs()));
            let mut ev = na.clone().symmetric_eigen().eigenvalues.as_slice().to_vec();
            ev.sort_by(f64::total_cmp);
            for (a, b) in m.eigenvalues().iter().zip(&ev) {
                prop_assert!((a - b).abs() < 1e-9);
            }
            let min_ev = ev[0];
            if min_ev.abs() > 1e-6 * m.norm_inf() {
                prop_assert_eq!(m.is_positive_definite(1e-10), min_ev > 0.0);
            }
        }

        #[test]
        fn sym2_eigen_and_solve(a in -4.0f64..4.0, b in -4.0f64..4.0, c in -4.0f64..4.0, v0 in -1.0f64..1.0, v1 in -1.0f64..1.0) {
            let s = Sym2::new(a, b, c);
            let ev = s.eigenvalues();
            let full = SymMatrix::from(s).eigenvalues();
            prop_assert!((ev[0] - full[0]).abs() < 1e-10 && (ev[1] - full[1]).abs() < 1e-10);
            if let Some(x) = s.solve([v0, v1]) {
                let back = s.apply(x);
                prop_assert!((back[0] - v0).abs() < 1e-6 * (1.0 + x[0].abs() + x[1].abs()));
                prop_assert!((back[1] - v1).abs() < 1e-6 * (1.0 + x[0].abs() + x[1].abs()));
            }
        }
    }
}
