// Copyright 2026 The om-entangle Authors
// SPDX-License-Identifier: Apache-2.0

//! Frequency-filtered output entanglement for constant drives.
//!
//! For time-independent `M` the output field at `ω` is `S(ω) v_in(ω)` with
//! `S(ω) = I − i√K (ωI − M)⁻¹ √K`. A square band filter of width `Δω`
//! normalizes the band-averaged input statistics to the bath occupations
//! themselves, so the filtered moments at `ω_n` depend on `ω_n` only.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::covariance::{bilinear, logneg_from_moments, EntanglementPoint, HermiticityPolicy, SecondMoments, SlotWeights};
use crate::error::{Error, Result};
use crate::linalg::{Mat7, C64, I};
use crate::model::{assemble_from_values, rh_metric, DriveValues, DynamicsMatrix, MW1, MW2_DAG};
use crate::params::{SystemParams, ThermalSpec};

/// Constant drives of the reference filtered-output optimum, rad/s.
pub const REFERENCE_DRIVES: DriveValues = DriveValues { g_mw1: 121.9e6, g_mw2: 105.5e6, g_o1: 605.4e6, g_o2: 549.6e6 };

/// `ω_n = n Δω` for `n` in `n_min..=n_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FrequencyGrid {
    pub delta_omega: f64,
    pub n_min: i64,
    pub n_max: i64,
}

impl Default for FrequencyGrid {
    /// `[−10⁹, 10⁹]` rad/s in 2001 points.
    fn default() -> Self {
        Self { delta_omega: 1e6, n_min: -1000, n_max: 1000 }
    }
}

impl FrequencyGrid {
    pub fn symmetric(delta_omega: f64, n: i64) -> Self {
        Self { delta_omega, n_min: -n, n_max: n }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta_omega > 0.0 && self.delta_omega.is_finite()) {
            return Err(Error::domain(format!("frequency spacing must be positive, got {}", self.delta_omega)));
        }
        if self.n_max < self.n_min {
            return Err(Error::domain(format!("empty frequency range {}..={}", self.n_min, self.n_max)));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        (self.n_max - self.n_min + 1).max(0) as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn omegas(&self) -> Vec<f64> {
        (self.n_min..=self.n_max).map(|n| n as f64 * self.delta_omega).collect()
    }
}

/// Input-to-output map at one frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferMatrix(pub Mat7);

/// `S(ω) = I − i√K (ωI − M)⁻¹ √K` with `√K = diag(√(κ_k/2π))`, solved by LU
/// against the columns of `√K`.
pub fn transfer_matrix(m: &DynamicsMatrix, k_diag: &[f64; 7], omega: f64) -> Result<TransferMatrix> {
    let sqrt_k: [f64; 7] = k_diag.map(f64::sqrt);
    let resolvent_lhs = Mat7::identity() * C64::new(omega, 0.0) - m.0;
    let rhs = Mat7::from_fn(|r, c| if r == c { C64::new(sqrt_k[c], 0.0) } else { C64::new(0.0, 0.0) });
    let x = resolvent_lhs.lu().solve(&rhs);
    let x = match x {
        Some(x) if crate::linalg::is_finite(&x) => x,
        _ => {
            let sv = resolvent_lhs.singular_values();
            let cond = sv.max() / sv.min();
            return Err(Error::numeric(format!("singular resolvent at ω = {omega:e} (condition {cond:.3e})")));
        }
    };
    let mut s = Mat7::identity();
    for r in 0..7 {
        for c in 0..7 {
            s[(r, c)] -= I * sqrt_k[r] * x[(r, c)];
        }
    }
    Ok(TransferMatrix(s))
}

/// Band-filtered output moments from rows 3 and 7 of `S` and the bath
/// occupations.
pub fn filtered_moments(s: &TransferMatrix, thermal: &ThermalSpec) -> Result<SecondMoments> {
    let r3 = s.0.row(MW1).into_owned();
    let r7 = s.0.row(MW2_DAG).into_owned();
    bilinear(&r3, &r7, &SlotWeights::bath(thermal)).finish()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Spectrum {
    pub points: Vec<EntanglementPoint>,
    /// Largest `E_N` on the grid (earliest on ties).
    pub peak: EntanglementPoint,
    /// The peak refined by golden-section search between the neighbours
    /// of the grid maximum.
    pub refined_peak: EntanglementPoint,
    pub s_rh: f64,
}

/// Evaluates `E_N` at a single frequency.
pub fn logneg_at(m: &DynamicsMatrix, k_diag: &[f64; 7], thermal: &ThermalSpec, omega: f64, policy: HermiticityPolicy) -> Result<f64> {
    let s = transfer_matrix(m, k_diag, omega)?;
    logneg_from_moments(&filtered_moments(&s, thermal)?, policy)
}

pub fn entanglement_spectrum(
    params: &SystemParams,
    drives: &DriveValues,
    thermal: &ThermalSpec,
    fgrid: &FrequencyGrid,
    policy: HermiticityPolicy,
) -> Result<Spectrum> {
    fgrid.validate()?;
    thermal.validate()?;
    let m = assemble_from_values(params, drives);
    let s_rh = rh_metric(&m)?;
    let k = params.k_diag();
    let points = fgrid
        .omegas()
        .into_par_iter()
        .map(|w| EntanglementPoint::new(w, logneg_at(&m, &k, thermal, w, policy)?, s_rh))
        .collect::<Result<Vec<_>>>()?;
    let (imax, peak) = points
        .iter()
        .enumerate()
        .fold(None::<(usize, EntanglementPoint)>, |best, (i, p)| match best {
            Some((_, b)) if b.e_n() >= p.e_n() => best,
            _ => Some((i, *p)),
        })
        .expect("grid is non-empty");
    let lo = points[imax.saturating_sub(1)].at();
    let hi = points[(imax + 1).min(points.len() - 1)].at();
    let (w, e) = golden_max(|w| logneg_at(&m, &k, thermal, w, policy), lo, hi, 1e-9 * fgrid.delta_omega)?;
    let refined_peak = if e > peak.e_n() { EntanglementPoint::new(w, e, s_rh)? } else { peak };
    Ok(Spectrum { points, peak, refined_peak, s_rh })
}

/// Maximum of a unimodal function on `[a, b]`.
fn golden_max(f: impl Fn(f64) -> Result<f64>, mut a: f64, mut b: f64, tol: f64) -> Result<(f64, f64)> {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    for _ in 0..200 {
        if (b - a).abs() <= tol {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d)?;
        }
    }
    Ok(if fc >= fd { (c, fc) } else { (d, fd) })
}
