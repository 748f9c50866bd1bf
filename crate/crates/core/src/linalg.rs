// Copyright 2026 The om-entangle Authors
// SPDX-License-Identifier: Apache-2.0

//! Fixed-size complex linear algebra shared by the model, propagator and
//! spectral modules.

use nalgebra::{Schur, SMatrix, SVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type Mat7 = SMatrix<C64, 7, 7>;
pub type Vec7 = SVector<C64, 7>;
pub type Row7 = SMatrix<C64, 1, 7>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

const SCHUR_MAX_ITER: usize = 10_000;

/// Maximum absolute column sum.
pub fn norm1<const N: usize>(a: &SMatrix<C64, N, N>) -> f64 {
    (0..N).map(|j| a.column(j).iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max)
}

pub fn is_finite<const R: usize, const C: usize>(a: &SMatrix<C64, R, C>) -> bool {
    a.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Complex Schur factorization `A = Q T Q†` with `T` upper triangular.
fn schur(a: &Mat7) -> Result<(Mat7, Mat7)> {
    if !is_finite(a) {
        return Err(Error::numeric("eigenproblem with non-finite entries"));
    }
    let s = Schur::try_new(*a, f64::EPSILON, SCHUR_MAX_ITER)
        .ok_or_else(|| Error::numeric("Schur iteration did not converge"))?;
    Ok(s.unpack())
}

/// Eigenvalues of a general complex matrix.
pub fn eigenvalues(a: &Mat7) -> Result<[C64; 7]> {
    let (_, t) = schur(a)?;
    Ok(std::array::from_fn(|i| t[(i, i)]))
}

/// Eigenvalues and unit-norm eigenvectors (as columns), obtained by back
/// substitution on the triangular Schur factor.
pub fn eigen_decomposition(a: &Mat7) -> Result<([C64; 7], Mat7)> {
    let (q, t) = schur(a)?;
    let scale = norm1(&t).max(f64::MIN_POSITIVE);
    let mut y = Mat7::zeros();
    for k in 0..7 {
        let lambda = t[(k, k)];
        y[(k, k)] = ONE;
        for i in (0..k).rev() {
            let mut acc = ZERO;
            for j in (i + 1)..=k {
                acc += t[(i, j)] * y[(j, k)];
            }
            let mut d = t[(i, i)] - lambda;
            if d.norm() < f64::EPSILON * scale {
                // repeated eigenvalue: perturb so the vector stays finite
                d = C64::new(f64::EPSILON * scale, 0.0);
            }
            y[(i, k)] = -acc / d;
        }
    }
    let mut v = q * y;
    for mut col in v.column_iter_mut() {
        let n = col.norm();
        if n > 0.0 {
            col /= C64::new(n, 0.0);
        }
    }
    Ok((std::array::from_fn(|i| t[(i, i)]), v))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigenvectors_satisfy_definition() {
        let a = Mat7::from_fn(|i, j| C64::new((i * 7 + j) as f64 % 5.0 - 2.0, (i as f64 - j as f64) * 0.3));
        let (vals, vecs) = eigen_decomposition(&a).unwrap();
        for k in 0..7 {
            let v = vecs.column(k);
            let r = a * v - v * vals[k];
            assert!(r.norm() < 1e-10 * norm1(&a), "residual {}", r.norm());
        }
    }

    #[test]
    fn nonfinite_rejected() {
        let mut a = Mat7::identity();
        a[(2, 3)] = C64::new(f64::NAN, 0.0);
        assert!(eigenvalues(&a).is_err());
    }
}
