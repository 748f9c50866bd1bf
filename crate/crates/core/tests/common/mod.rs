// Copyright 2026 The om-entangle Authors
// SPDX-License-Identifier: Apache-2.0

//! Test-side oracles shared by the integration targets.

#![allow(dead_code)]

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use om_entangle::covariance::{lyapunov_moment_oracle, LyapunovConfig};
use om_entangle::covariance::{second_moments, SecondMoments};
use om_entangle::model::DriveSchedule;
use om_entangle::params::{SystemParams, ThermalSpec};
use om_entangle::propagator::{build_grid, TimeGrid, TrotterConfig};

/// Two-mode state in a truncated Fock basis, `c[n][m]` on `|n, m⟩` with
/// `n, m <= cutoff`.
#[derive(Debug, Clone)]
pub struct FockState {
    pub cutoff: usize,
    pub c: Vec<Vec<f64>>,
}

impl FockState {
    pub fn vacuum(cutoff: usize) -> Self {
        let mut c = vec![vec![0.0; cutoff + 1]; cutoff + 1];
        c[0][0] = 1.0;
        Self { cutoff, c }
    }

    fn zero(cutoff: usize) -> Self {
        Self { cutoff, c: vec![vec![0.0; cutoff + 1]; cutoff + 1] }
    }

    fn norm_inf(&self) -> f64 {
        self.c.iter().flatten().fold(0.0, |a, x| a.max(x.abs()))
    }

    fn axpy(&mut self, a: f64, x: &Self) {
        for (r, xr) in self.c.iter_mut().zip(&x.c) {
            for (v, xv) in r.iter_mut().zip(xr) {
                *v += a * xv;
            }
        }
    }

    /// `r (a†b† − ab)` applied within the truncated space.
    fn squeeze_generator(&self, r: f64) -> Self {
        let d = self.cutoff;
        let mut out = Self::zero(d);
        for n in 0..=d {
            for m in 0..=d {
                let v = self.c[n][m];
                if v == 0.0 {
                    continue;
                }
                if n < d && m < d {
                    out.c[n + 1][m + 1] += r * (((n + 1) * (m + 1)) as f64).sqrt() * v;
                }
                if n > 0 && m > 0 {
                    out.c[n - 1][m - 1] -= r * ((n * m) as f64).sqrt() * v;
                }
            }
        }
        out
    }

    /// `exp(r (a†b† − ab)) |ψ⟩` by scaled Taylor series, with the generator
    /// kept truncated throughout.
    pub fn squeezed(&self, r: f64) -> Self {
        // ‖G‖ ≤ r (cutoff + 1); keep each scaled step below one half
        let steps = ((2.0 * r.abs() * (self.cutoff + 1) as f64).ceil() as usize).max(1);
        let h = r / steps as f64;
        let mut psi = self.clone();
        for _ in 0..steps {
            let mut sum = psi.clone();
            let mut term = psi;
            for k in 1..200 {
                term = term.squeeze_generator(h);
                let inv = 1.0 / k as f64;
                for v in term.c.iter_mut().flatten() {
                    *v *= inv;
                }
                sum.axpy(1.0, &term);
                if term.norm_inf() < 1e-18 {
                    break;
                }
            }
            psi = sum;
        }
        psi
    }

    pub fn norm_sq(&self) -> f64 {
        self.c.iter().flatten().map(|x| x * x).sum()
    }

    /// `⟨a†a⟩`, `⟨b†b⟩`, `⟨ab⟩` and `⟨a†b†⟩` of the (real) state.
    pub fn moments(&self) -> SecondMoments {
        let d = self.cutoff;
        let (mut n1, mut n2, mut ab) = (0.0, 0.0, 0.0);
        for n in 0..=d {
            for m in 0..=d {
                let p = self.c[n][m] * self.c[n][m];
                n1 += n as f64 * p;
                n2 += m as f64 * p;
                if n > 0 && m > 0 {
                    ab += self.c[n - 1][m - 1] * ((n * m) as f64).sqrt() * self.c[n][m];
                }
            }
        }
        SecondMoments { n1, n2, m12: Complex64::new(ab, 0.0), m12dag: Complex64::new(ab, 0.0) }
    }

    /// `log₂ ‖ρ^{T_B}‖₁` from the partial transpose of `|ψ⟩⟨ψ|`, diagonalized
    /// block by block over the connected components of its sparsity graph.
    pub fn partial_transpose_logneg(&self) -> f64 {
        let d = self.cutoff + 1;
        let idx = |n: usize, m: usize| n * d + m;
        let dim = d * d;
        // ⟨n m|ρ^{T_B}|n' m'⟩ = c[n][m'] c[n'][m]
        let nz: Vec<(usize, usize)> = (0..d)
            .flat_map(|n| (0..d).map(move |m| (n, m)))
            .filter(|&(n, m)| self.c[n][m] != 0.0)
            .collect();
        let mut entries = Vec::new();
        for &(n, mp) in &nz {
            for &(np, m) in &nz {
                entries.push((idx(n, m), idx(np, mp), self.c[n][mp] * self.c[np][m]));
            }
        }
        let mut parent: Vec<usize> = (0..dim).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for &(i, j, _) in &entries {
            let (a, b) = (find(&mut parent, i), find(&mut parent, j));
            if a != b {
                parent[a] = b;
            }
        }
        let mut blocks: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
        for &(i, j, _) in &entries {
            for k in [i, j] {
                let root = find(&mut parent, k);
                blocks.entry(root).or_default().push(k);
            }
        }
        let mut trace_norm = 0.0;
        for members in blocks.values_mut() {
            members.sort_unstable();
            members.dedup();
            let local = |k: usize| members.binary_search(&k).ok();
            let mut mat = DMatrix::<f64>::zeros(members.len(), members.len());
            for &(i, j, v) in &entries {
                if let (Some(a), Some(b)) = (local(i), local(j)) {
                    mat[(a, b)] += v;
                }
            }
            trace_norm += SymmetricEigen::new(mat).eigenvalues.iter().map(|x| x.abs()).sum::<f64>();
        }
        trace_norm.log2()
    }
}

/// Largest moment disagreement between the propagator route and the
/// moment ODE, relative to the largest moment in the series.
pub fn propagator_vs_ode(
    params: &SystemParams,
    drives: &DriveSchedule,
    thermal: &ThermalSpec,
    grid: &TimeGrid,
    cfg: &TrotterConfig,
    ode_steps: usize,
) -> f64 {
    let pg = build_grid(params, drives, grid, cfg).expect("propagator grid");
    let k = params.k_diag();
    let ode = lyapunov_moment_oracle(params, drives, thermal, grid, &LyapunovConfig { steps: ode_steps }).expect("moment ODE");
    let mut scale = 0.0f64;
    let mut diff = 0.0f64;
    for (j, o) in ode.moments.iter().enumerate() {
        let m = second_moments(&pg, &k, thermal, j).expect("moments");
        scale = scale.max(o.n1.abs()).max(o.n2.abs()).max(o.m12.norm()).max(o.m12dag.norm());
        diff = diff
            .max((m.n1 - o.n1).abs())
            .max((m.n2 - o.n2).abs())
            .max((m.m12 - o.m12).norm())
            .max((m.m12dag - o.m12dag).norm());
    }
    if scale > 0.0 {
        diff / scale
    } else {
        diff
    }
}
