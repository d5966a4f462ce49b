//! Small dense complex matrices: materialized operators, normal-equation
//! solves, inverses, and a largest-singular-value estimate.
//!
//! Everything here is desk-scale (d ≤ a few hundred), so a hand-rolled LU
//! with partial pivoting is plenty and keeps results deterministic.

use num_complex::Complex64;

use crate::error::{LinDynError, Result};
use crate::space::TruncatedVector;

#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix {
    dim: usize,
    data: Vec<Complex64>, // row-major, dim × dim
}

impl CMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![Complex64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for j in 0..dim {
            m.set(j, j, Complex64::new(1.0, 0.0));
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Complex64>>) -> Result<Self> {
        let dim = rows.len();
        for r in &rows {
            if r.len() != dim {
                return Err(LinDynError::DimensionMismatch {
                    expected: dim,
                    got: r.len(),
                });
            }
        }
        Ok(Self {
            dim,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.dim + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.data[i * self.dim + j] = v;
    }

    pub fn set_column(&mut self, j: usize, col: &[Complex64]) {
        for (i, v) in col.iter().enumerate() {
            self.set(i, j, *v);
        }
    }

    pub fn matvec_slice(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        if v.len() != self.dim {
            return Err(LinDynError::DimensionMismatch {
                expected: self.dim,
                got: v.len(),
            });
        }
        let out = self
            .data
            .chunks_exact(self.dim)
            .map(|row| {
                let mut acc = Complex64::new(0.0, 0.0);
                for (a, b) in row.iter().zip(v) {
                    acc += a * b;
                }
                acc
            })
            .collect();
        Ok(out)
    }

    pub fn apply(&self, v: &TruncatedVector) -> Result<TruncatedVector> {
        Ok(TruncatedVector::from_raw(self.matvec_slice(v.coords())?))
    }

    pub fn matmul(&self, rhs: &CMatrix) -> Result<CMatrix> {
        if rhs.dim != self.dim {
            return Err(LinDynError::DimensionMismatch {
                expected: self.dim,
                got: rhs.dim,
            });
        }
        let d = self.dim;
        let mut out = CMatrix::zeros(d);
        for i in 0..d {
            for k in 0..d {
                let a = self.get(i, k);
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                for j in 0..d {
                    let v = out.get(i, j) + a * rhs.get(k, j);
                    out.set(i, j, v);
                }
            }
        }
        Ok(out)
    }

    pub fn conj_transpose(&self) -> CMatrix {
        CMatrix::from_fn(self.dim, |i, j| self.get(j, i).conj())
    }

    pub fn add(&self, rhs: &CMatrix) -> Result<CMatrix> {
        if rhs.dim != self.dim {
            return Err(LinDynError::DimensionMismatch {
                expected: self.dim,
                got: rhs.dim,
            });
        }
        Ok(CMatrix::from_fn(self.dim, |i, j| {
            self.get(i, j) + rhs.get(i, j)
        }))
    }

    pub fn sub(&self, rhs: &CMatrix) -> Result<CMatrix> {
        if rhs.dim != self.dim {
            return Err(LinDynError::DimensionMismatch {
                expected: self.dim,
                got: rhs.dim,
            });
        }
        Ok(CMatrix::from_fn(self.dim, |i, j| {
            self.get(i, j) - rhs.get(i, j)
        }))
    }

    pub fn scale(&self, alpha: Complex64) -> CMatrix {
        CMatrix::from_fn(self.dim, |i, j| self.get(i, j) * alpha)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    fn max_abs_entry(&self) -> f64 {
        self.data.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// LU factorization with partial pivoting. Returns the packed factors
    /// and the row permutation.
    fn lu_factor(&self) -> Result<(Vec<Complex64>, Vec<usize>)> {
        let d = self.dim;
        let mut lu = self.data.clone();
        let mut perm: Vec<usize> = (0..d).collect();
        let scale = self.max_abs_entry().max(1.0);
        for k in 0..d {
            let mut pivot_row = k;
            let mut pivot_mag = lu[k * d + k].norm();
            for r in (k + 1)..d {
                let mag = lu[r * d + k].norm();
                if mag > pivot_mag {
                    pivot_mag = mag;
                    pivot_row = r;
                }
            }
            if pivot_mag <= 1e-13 * scale {
                return Err(LinDynError::SingularMap(format!(
                    "pivot {pivot_mag:.3e} at column {k} below threshold"
                )));
            }
            if pivot_row != k {
                for c in 0..d {
                    lu.swap(k * d + c, pivot_row * d + c);
                }
                perm.swap(k, pivot_row);
            }
            let pivot = lu[k * d + k];
            for r in (k + 1)..d {
                let factor = lu[r * d + k] / pivot;
                lu[r * d + k] = factor;
                for c in (k + 1)..d {
                    let v = lu[r * d + c] - factor * lu[k * d + c];
                    lu[r * d + c] = v;
                }
            }
        }
        Ok((lu, perm))
    }

    fn lu_solve_one(lu: &[Complex64], perm: &[usize], b: &[Complex64]) -> Vec<Complex64> {
        let d = perm.len();
        let mut y = vec![Complex64::new(0.0, 0.0); d];
        for i in 0..d {
            let mut acc = b[perm[i]];
            for j in 0..i {
                acc -= lu[i * d + j] * y[j];
            }
            y[i] = acc;
        }
        for i in (0..d).rev() {
            let mut acc = y[i];
            for j in (i + 1)..d {
                acc -= lu[i * d + j] * y[j];
            }
            y[i] = acc / lu[i * d + i];
        }
        y
    }

    /// Solve `self · z = rhs` by LU with partial pivoting.
    pub fn solve(&self, rhs: &TruncatedVector) -> Result<TruncatedVector> {
        if rhs.dim() != self.dim {
            return Err(LinDynError::DimensionMismatch {
                expected: self.dim,
                got: rhs.dim(),
            });
        }
        let (lu, perm) = self.lu_factor()?;
        Ok(TruncatedVector::from_raw(Self::lu_solve_one(
            &lu,
            &perm,
            rhs.coords(),
        )))
    }

    pub fn inverse(&self) -> Result<CMatrix> {
        let d = self.dim;
        let (lu, perm) = self.lu_factor()?;
        let mut inv = CMatrix::zeros(d);
        let mut e = vec![Complex64::new(0.0, 0.0); d];
        for j in 0..d {
            e[j] = Complex64::new(1.0, 0.0);
            let col = Self::lu_solve_one(&lu, &perm, &e);
            inv.set_column(j, &col);
            e[j] = Complex64::new(0.0, 0.0);
        }
        Ok(inv)
    }

    /// Largest singular value via power iteration on `AᴴA`. Deterministic:
    /// fixed start vector, at most `max_iters` steps, stops when the
    /// Rayleigh quotient settles within `tol`.
    pub fn sigma_max(&self, max_iters: usize, tol: f64) -> f64 {
        let d = self.dim;
        if d == 0 {
            return 0.0;
        }
        let mut v: Vec<Complex64> = (0..d)
            .map(|j| Complex64::new(1.0, 0.01 * (j as f64 + 1.0)))
            .collect();
        normalize(&mut v);
        let at = self.conj_transpose();
        let mut lambda = 0.0f64;
        for _ in 0..max_iters {
            let w = self.matvec_slice(&v).expect("square matvec");
            let mut u = at.matvec_slice(&w).expect("square matvec");
            let new_lambda: f64 = v
                .iter()
                .zip(&u)
                .map(|(a, b)| (b * a.conj()).re)
                .sum::<f64>();
            let un: f64 = u.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            if un == 0.0 {
                return 0.0;
            }
            normalize(&mut u);
            v = u;
            if (new_lambda - lambda).abs() <= tol * new_lambda.abs().max(1.0) {
                lambda = new_lambda;
                break;
            }
            lambda = new_lambda;
        }
        lambda.max(0.0).sqrt()
    }
}

fn normalize(v: &mut [Complex64]) {
    let n: f64 = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if n > 0.0 {
        for c in v.iter_mut() {
            *c /= n;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn solve_and_inverse_roundtrip() {
        let m = CMatrix::from_rows(vec![
            vec![c(2.0, 1.0), c(0.5, 0.0), c(0.0, -1.0)],
            vec![c(0.0, 0.0), c(1.0, 0.0), c(0.3, 0.2)],
            vec![c(1.0, -0.5), c(0.0, 0.7), c(3.0, 0.0)],
        ])
        .unwrap();
        let x = TruncatedVector::new(vec![c(1.0, 2.0), c(-0.5, 0.0), c(0.25, -0.75)]).unwrap();
        let b = m.apply(&x).unwrap();
        let solved = m.solve(&b).unwrap();
        assert!(solved.sub(&x).unwrap().norm() < 1e-12);

        let inv = m.inverse().unwrap();
        let prod = m.matmul(&inv).unwrap();
        let err = prod.sub(&CMatrix::identity(3)).unwrap().frobenius_norm();
        assert!(err < 1e-12, "‖M·M⁻¹ − I‖ = {err}");
    }

    #[test]
    fn singular_matrix_rejected() {
        let m = CMatrix::from_rows(vec![
            vec![c(1.0, 0.0), c(2.0, 0.0)],
            vec![c(2.0, 0.0), c(4.0, 0.0)],
        ])
        .unwrap();
        assert!(matches!(m.inverse(), Err(LinDynError::SingularMap(_))));
    }

    #[test]
    fn sigma_max_of_diagonal() {
        let m = CMatrix::from_rows(vec![
            vec![c(0.0, 3.0), c(0.0, 0.0)],
            vec![c(0.0, 0.0), c(1.0, 0.0)],
        ])
        .unwrap();
        let s = m.sigma_max(200, 1e-12);
        assert!((s - 3.0).abs() < 1e-8, "sigma = {s}");
    }

    #[test]
    fn conj_transpose_entries() {
        let m = CMatrix::from_rows(vec![
            vec![c(1.0, 1.0), c(2.0, 0.0)],
            vec![c(0.0, -3.0), c(4.0, 0.5)],
        ])
        .unwrap();
        let a = m.conj_transpose();
        assert_eq!(a.get(0, 1), c(0.0, 3.0));
        assert_eq!(a.get(1, 0), c(2.0, 0.0));
        assert_eq!(a.get(0, 0), c(1.0, -1.0));
    }
}
