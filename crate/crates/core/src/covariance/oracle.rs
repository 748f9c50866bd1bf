// Copyright 2026 The om-entangle Authors
// SPDX-License-Identifier: Apache-2.0

//! Independent route to the moments: integrate the matrix ODEs
//!
//! ```text
//! dX/dt = H X + X H† + diag(K ⊙ d_anti_normal),   X = ⟨v v†⟩
//! dY/dt = H Y + Y H† + diag(K ⊙ d_normal),        Y_ij = ⟨v_j† v_i⟩
//! ```
//!
//! with classical RK4 at a fixed step, and no propagators or quadrature.

use serde::{Deserialize, Serialize};

use super::{SecondMoments, SlotWeights};
use crate::error::{Error, Result};
use crate::linalg::{Mat7, C64};
use crate::model::{assemble_m, DriveSchedule, MW1, MW2_DAG};
use crate::params::{SystemParams, ThermalSpec};
use crate::propagator::TimeGrid;

/// Largest acceptable disagreement between a run and its step-halved twin,
/// relative to the largest moment in the series.
pub const HALVING_TOL: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LyapunovConfig {
    /// Total RK4 steps over `[0, t_end]`, rounded up to a multiple of the
    /// number of output intervals.
    pub steps: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleMoments {
    pub times: Vec<f64>,
    pub moments: Vec<SecondMoments>,
    /// Observed disagreement against half the step count.
    pub halving_disagreement: f64,
}

fn moments_of(x: &Mat7, y: &Mat7) -> SecondMoments {
    SecondMoments {
        n1: y[(MW1, MW1)].re,
        n2: x[(MW2_DAG, MW2_DAG)].re,
        m12: x[(MW1, MW2_DAG)],
        m12dag: y[(MW2_DAG, MW1)],
    }
}

fn run(
    params: &SystemParams,
    drives: &DriveSchedule,
    thermal: &ThermalSpec,
    grid: &TimeGrid,
    per_interval: usize,
) -> Vec<SecondMoments> {
    let k = params.k_diag();
    let bath = SlotWeights::bath(thermal).scaled(&k);
    let init = SlotWeights::initial(thermal);
    let diag = |w: &[f64; 7]| Mat7::from_diagonal(&w.map(|x| C64::new(x, 0.0)).into());
    let (dx, dy) = (diag(&bath.anti_normal), diag(&bath.normal));
    let mut x = diag(&init.anti_normal);
    let mut y = diag(&init.normal);

    let h_at = |t: f64| assemble_m(params, drives, t).generator();
    let rhs = |h: &Mat7, s: &Mat7, d: &Mat7| h * s + s * h.adjoint() + d;

    let mut out = Vec::with_capacity(grid.n_points);
    out.push(moments_of(&x, &y));
    let step = grid.dt() / per_interval as f64;
    let c = |v: f64| C64::new(v, 0.0);
    for i in 0..grid.n_points - 1 {
        let t0 = grid.time(i);
        for s in 0..per_interval {
            let t = t0 + s as f64 * step;
            let (h0, hm, h1) = (h_at(t), h_at(t + 0.5 * step), h_at(t + step));
            for (v, d) in [(&mut x, &dx), (&mut y, &dy)] {
                let k1 = rhs(&h0, v, d);
                let k2 = rhs(&hm, &(*v + k1 * c(0.5 * step)), d);
                let k3 = rhs(&hm, &(*v + k2 * c(0.5 * step)), d);
                let k4 = rhs(&h1, &(*v + k3 * c(step)), d);
                *v += (k1 + k2 * c(2.0) + k3 * c(2.0) + k4) * c(step / 6.0);
            }
        }
        out.push(moments_of(&x, &y));
    }
    out
}

/// The four moments at every output time, checked against a run with half
/// the step count.
pub fn lyapunov_moment_oracle(
    params: &SystemParams,
    drives: &DriveSchedule,
    thermal: &ThermalSpec,
    grid: &TimeGrid,
    cfg: &LyapunovConfig,
) -> Result<OracleMoments> {
    grid.validate()?;
    thermal.validate()?;
    let intervals = grid.n_points - 1;
    let per_interval = cfg.steps.div_ceil(intervals).max(2);
    let per_interval = per_interval + per_interval % 2;
    let fine = run(params, drives, thermal, grid, per_interval);
    let coarse = run(params, drives, thermal, grid, per_interval / 2);

    let scale = fine
        .iter()
        .flat_map(|m| [m.n1.abs(), m.n2.abs(), m.m12.norm(), m.m12dag.norm()])
        .fold(0.0, f64::max);
    let diff = fine
        .iter()
        .zip(&coarse)
        .flat_map(|(a, b)| [(a.n1 - b.n1).abs(), (a.n2 - b.n2).abs(), (a.m12 - b.m12).norm(), (a.m12dag - b.m12dag).norm()])
        .fold(0.0, f64::max);
    if !diff.is_finite() || !scale.is_finite() {
        return Err(Error::numeric("moment ODE diverged"));
    }
    let rel = if scale > 0.0 { diff / scale } else { 0.0 };
    if rel > HALVING_TOL {
        return Err(Error::numeric(format!(
            "moment ODE not converged at {} steps: step-halving disagreement {rel:.3e}",
            per_interval * intervals
        )));
    }
    Ok(OracleMoments { times: grid.times(), moments: fine, halving_disagreement: rel })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{derive_reference_params, PerMode};

    fn decoupled() -> SystemParams {
        let mut p = derive_reference_params();
        p.g_f = 0.0;
        p
    }

    #[test]
    fn decoupled_vacuum_is_zero() {
        let tg = TimeGrid::new(1e-6, 11).unwrap();
        let o = lyapunov_moment_oracle(&decoupled(), &DriveSchedule::zero(), &ThermalSpec::vacuum(), &tg, &LyapunovConfig { steps: 200 }).unwrap();
        for m in &o.moments {
            assert_eq!(*m, SecondMoments::default());
        }
    }

    #[test]
    fn single_mode_relaxation() {
        // one damped slot with a thermal bath: dn/dt = −κ n + (κ/2π) Q
        let mut p = decoupled();
        p.kappa = PerMode { mw1: 2e6, ..PerMode::default() };
        let th = ThermalSpec { q_th: 1.0, ..ThermalSpec::vacuum() };
        let tg = TimeGrid::new(3e-6, 31).unwrap();
        let o = lyapunov_moment_oracle(&p, &DriveSchedule::zero(), &th, &tg, &LyapunovConfig { steps: 3000 }).unwrap();
        let kappa = 2e6;
        let fixed = 1.0 / (2.0 * std::f64::consts::PI);
        assert_eq!(o.moments[0].n1, 0.0);
        for (t, m) in o.times.iter().zip(&o.moments) {
            let want = fixed * (1.0 - (-kappa * t).exp());
            assert!((m.n1 - want).abs() < 1e-10, "t = {t}: {} vs {want}", m.n1);
        }
    }

    #[test]
    fn too_few_steps_flagged() {
        let mut p = decoupled();
        p.kappa = PerMode::splat(5e7);
        let th = ThermalSpec { q_th: 1.0, ..ThermalSpec::vacuum() };
        let tg = TimeGrid::new(1e-6, 3).unwrap();
        let r = lyapunov_moment_oracle(&p, &DriveSchedule::zero(), &th, &tg, &LyapunovConfig { steps: 8 });
        assert!(matches!(r, Err(Error::Numeric(_))));
    }
}
