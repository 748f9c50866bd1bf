// Copyright 2026 The om-entangle Authors
// SPDX-License-Identifier: Apache-2.0

//! Matrix exponential by scaling and squaring with diagonal Padé approximants
//! (Higham 2005). Degrees 3 through 13 are selected from the 1-norm so that
//! the backward error stays below unit roundoff.

use nalgebra::allocator::Allocator;
use nalgebra::{DMatrix, DefaultAllocator, Dim, DimMin, OMatrix};

use crate::error::{Error, Result};
use crate::linalg::C64;

const THETA_3: f64 = 1.495585217958292e-2;
const THETA_5: f64 = 2.539398330063230e-1;
const THETA_7: f64 = 9.504178996162932e-1;
const THETA_9: f64 = 2.097847961257068;
const THETA_13: f64 = 5.371920351148152;

const B3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const B5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const B7: [f64; 8] = [17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0];
const B9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const B13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

fn norm1<D: Dim>(a: &OMatrix<C64, D, D>) -> f64
where
    DefaultAllocator: Allocator<D, D>,
{
    a.column_iter().map(|c| c.iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max)
}

fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// `e^A` for a square complex matrix of any (static or dynamic) size.
pub fn expm_generic<D>(a: &OMatrix<C64, D, D>) -> Result<OMatrix<C64, D, D>>
where
    D: Dim + DimMin<D, Output = D>,
    DefaultAllocator: Allocator<D, D> + Allocator<D>,
{
    if a.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::domain("matrix exponential of a non-finite matrix"));
    }
    let (d, _) = a.shape_generic();
    let eye = OMatrix::<C64, D, D>::identity_generic(d, d);
    let norm = norm1(a);
    if norm == 0.0 {
        return Ok(eye);
    }

    let a2 = a * a;
    // low degrees: U = A Σ b_{2k+1} A^{2k}, V = Σ b_{2k} A^{2k}
    let low = |b: &[f64]| -> (OMatrix<C64, D, D>, OMatrix<C64, D, D>) {
        let mut u = &eye * re(b[1]);
        let mut v = &eye * re(b[0]);
        let mut p = eye.clone();
        for k in 1..b.len() / 2 {
            p = &p * &a2;
            u += &p * re(b[2 * k + 1]);
            v += &p * re(b[2 * k]);
        }
        (a * u, v)
    };

    let (u, v, s) = if norm <= THETA_3 {
        let (u, v) = low(&B3);
        (u, v, 0)
    } else if norm <= THETA_5 {
        let (u, v) = low(&B5);
        (u, v, 0)
    } else if norm <= THETA_7 {
        let (u, v) = low(&B7);
        (u, v, 0)
    } else if norm <= THETA_9 {
        let (u, v) = low(&B9);
        (u, v, 0)
    } else {
        let s = (norm / THETA_13).log2().ceil().max(0.0) as i32;
        let scale = re(0.5f64.powi(s));
        let a1 = a * scale;
        let a2 = &a2 * (scale * scale);
        let a4 = &a2 * &a2;
        let a6 = &a4 * &a2;
        let b = &B13;
        let u_inner = &a6 * (&a6 * re(b[13]) + &a4 * re(b[11]) + &a2 * re(b[9]))
            + &a6 * re(b[7])
            + &a4 * re(b[5])
            + &a2 * re(b[3])
            + &eye * re(b[1]);
        let u = &a1 * u_inner;
        let v = &a6 * (&a6 * re(b[12]) + &a4 * re(b[10]) + &a2 * re(b[8]))
            + &a6 * re(b[6])
            + &a4 * re(b[4])
            + &a2 * re(b[2])
            + &eye * re(b[0]);
        (u, v, s)
    };

    let p = &v + &u;
    let q = v - u;
    let mut r = q
        .lu()
        .solve(&p)
        .ok_or_else(|| Error::numeric("singular Padé denominator in matrix exponential"))?;
    for _ in 0..s {
        r = &r * &r;
    }
    if r.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::numeric("matrix exponential overflowed"));
    }
    Ok(r)
}

/// `e^A` for a dynamically sized square complex matrix.
pub fn matrix_exponential(a: &DMatrix<C64>) -> Result<DMatrix<C64>> {
    if a.nrows() != a.ncols() {
        return Err(Error::domain(format!("matrix exponential of a {}x{} matrix", a.nrows(), a.ncols())));
    }
    expm_generic(a)
}
