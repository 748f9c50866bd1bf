// Copyright 2026 The om-entangle Authors
// SPDX-License-Identifier: Apache-2.0

//! Second moments of the two microwave modes, their 4×4 covariance matrix
//! and the logarithmic negativity.
//!
//! With `a₁ = v₃` and `a₂† = v₇`, every moment is a bilinear form in rows 3
//! and 7 of a propagator (time domain) or transfer matrix (frequency domain),
//! weighted by the occupation each input slot carries. Products of two
//! annihilators or two creators of the same input vanish for diagonal initial
//! and bath states, which is why only four moments survive.

mod oracle;

use nalgebra::{Matrix2, Matrix4};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use oracle::{lyapunov_moment_oracle, LyapunovConfig, OracleMoments};

use crate::error::{Error, Result};
use crate::linalg::{Row7, C64};
use crate::model::{assemble_m, ent_from_logneg, rh_metric, DriveSchedule, DriveValues, MW1, MW2_DAG};
use crate::params::{SystemParams, ThermalSpec};
use crate::propagator::{build_grid, trapezoid_sum, PropagatorGrid, TimeGrid, TrotterConfig};

/// Tolerance on `m12dag = conj(m12)`, relative to the moment scale.
pub const HERMITICITY_TOL: f64 = 1e-9;
/// Occupations this far below zero are rounding and clamp to zero.
pub const OCCUPATION_FLOOR: f64 = -1e-10;

/// `⟨v_k v_k†⟩` and `⟨v_k† v_k⟩` for every input slot.
///
/// The seventh slot holds a creation operator, so its two orderings swap
/// relative to the others.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlotWeights {
    /// Weights of `Σ x_k y_k*` sums that produce `⟨a a†⟩`-type moments.
    pub anti_normal: [f64; 7],
    /// Weights of sums that produce `⟨a† a⟩`-type moments.
    pub normal: [f64; 7],
}

impl SlotWeights {
    /// Occupations of the primary modes at `t = 0`.
    pub fn initial(thermal: &ThermalSpec) -> Self {
        let n = thermal.n_bar.to_array();
        let mut anti_normal = n.map(|x| x + 1.0);
        let mut normal = n;
        anti_normal[MW2_DAG] = n[MW2_DAG];
        normal[MW2_DAG] = n[MW2_DAG] + 1.0;
        Self { anti_normal, normal }
    }

    /// Bath statistics: mechanical inputs at `N_th`, all others at `Q_th`.
    pub fn bath(thermal: &ThermalSpec) -> Self {
        let occ: [f64; 7] = std::array::from_fn(|k| if k == 1 || k == 5 { thermal.n_th } else { thermal.q_th });
        let mut anti_normal = occ.map(|x| x + 1.0);
        let mut normal = occ;
        anti_normal[MW2_DAG] = occ[MW2_DAG];
        normal[MW2_DAG] = occ[MW2_DAG] + 1.0;
        Self { anti_normal, normal }
    }

    pub fn scaled(&self, k_diag: &[f64; 7]) -> Self {
        Self {
            anti_normal: std::array::from_fn(|k| self.anti_normal[k] * k_diag[k]),
            normal: std::array::from_fn(|k| self.normal[k] * k_diag[k]),
        }
    }
}

/// The four surviving moments; `m12 = ⟨a₁a₂⟩`, `m12dag = ⟨a₁†a₂†⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct SecondMoments {
    pub n1: f64,
    pub n2: f64,
    pub m12: C64,
    pub m12dag: C64,
}

/// Raw complex sums before the occupation and Hermiticity checks.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub(crate) struct RawMoments {
    pub n1: C64,
    pub n2: C64,
    pub m12: C64,
    pub m12dag: C64,
}

impl std::ops::Add for RawMoments {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self { n1: self.n1 + o.n1, n2: self.n2 + o.n2, m12: self.m12 + o.m12, m12dag: self.m12dag + o.m12dag }
    }
}

/// The four bilinear sums over rows `r3` (of `a₁`) and `r7` (of `a₂†`).
pub(crate) fn bilinear(r3: &Row7, r7: &Row7, w: &SlotWeights) -> RawMoments {
    let mut m = RawMoments::default();
    for k in 0..7 {
        let (x, y) = (r3[k], r7[k]);
        m.n1 += x.norm_sqr() * w.normal[k];
        m.n2 += y.norm_sqr() * w.anti_normal[k];
        m.m12 += x * y.conj() * w.anti_normal[k];
        m.m12dag += x.conj() * y * w.normal[k];
    }
    m
}

impl RawMoments {
    pub(crate) fn finish(self) -> Result<SecondMoments> {
        let scale = self.n1.norm().max(self.n2.norm()).max(1.0);
        let occ = |z: C64, name: &str| -> Result<f64> {
            if z.im.abs() > 1e-9 * scale {
                return Err(Error::numeric(format!("{name} has imaginary part {}", z.im)));
            }
            if z.re < OCCUPATION_FLOOR * scale {
                return Err(Error::numeric(format!("{name} = {} is negative", z.re)));
            }
            Ok(z.re.max(0.0))
        };
        let m = SecondMoments { n1: occ(self.n1, "n1")?, n2: occ(self.n2, "n2")?, m12: self.m12, m12dag: self.m12dag };
        if !(m.n1.is_finite() && m.n2.is_finite() && m.m12.is_finite() && m.m12dag.is_finite()) {
            return Err(Error::numeric("non-finite second moments"));
        }
        Ok(m)
    }
}

impl SecondMoments {
    /// `|m12dag − conj(m12)|` relative to the moment scale.
    pub fn hermiticity_defect(&self) -> f64 {
        let scale = self.m12.norm().max(self.m12dag.norm()).max(self.n1).max(self.n2).max(1.0);
        (self.m12dag - self.m12.conj()).norm() / scale
    }

    /// The Hermitian part of the correlation, `½(m12 + conj(m12dag))`.
    pub fn hermitian_correlation(&self) -> C64 {
        (self.m12 + self.m12dag.conj()) * 0.5
    }

    /// Moments with `m12dag` replaced by the conjugate of the Hermitian part.
    pub fn projected(&self) -> Self {
        let m = self.hermitian_correlation();
        Self { m12: m, m12dag: m.conj(), ..*self }
    }
}

/// What to do when `m12dag ≠ conj(m12)`.
///
/// The bath terms weight each input by `κ/2π`, which does not preserve the
/// commutator between `a₁` and `a₂`, so driven damped systems produce a
/// defect at the percent level. `Project` keeps the Hermitian part, which
/// is the real part of the correlation block entries; `Strict` rejects any
/// defect above [`HERMITICITY_TOL`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum HermiticityPolicy {
    #[default]
    Project,
    Strict,
}

impl HermiticityPolicy {
    pub fn apply(self, m: &SecondMoments) -> Result<SecondMoments> {
        match self {
            HermiticityPolicy::Project => Ok(m.projected()),
            HermiticityPolicy::Strict => {
                let d = m.hermiticity_defect();
                if d > HERMITICITY_TOL {
                    return Err(Error::numeric(format!("m12dag differs from conj(m12) by {d:.3e} (relative)")));
                }
                Ok(m.projected())
            }
        }
    }
}

/// Moments including the pair products that vanish for diagonal states.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GeneralMoments {
    pub n1: f64,
    pub n2: f64,
    /// `⟨a₁a₁⟩`
    pub a1a1: C64,
    /// `⟨a₂a₂⟩`
    pub a2a2: C64,
    /// `⟨a₁a₂⟩`
    pub a1a2: C64,
    /// `⟨a₁a₂†⟩`
    pub a1a2dag: C64,
}

impl From<&SecondMoments> for GeneralMoments {
    fn from(m: &SecondMoments) -> Self {
        let m = m.projected();
        Self { n1: m.n1, n2: m.n2, a1a2: m.m12, ..Default::default() }
    }
}

/// `V = [[A, C], [Cᵀ, B]]` in `(x₁, p₁, x₂, p₂)` order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovarianceMatrix(pub Matrix4<f64>);

impl CovarianceMatrix {
    /// The simplified blocks: `A = (n1 + ½)I`, `B = (n2 + ½)I`, and `C`
    /// from the Hermitian part of the correlation.
    pub fn from_moments(m: &SecondMoments) -> Self {
        let c = m.hermitian_correlation();
        let a = m.n1 + 0.5;
        let b = m.n2 + 0.5;
        #[rustfmt::skip]
        let v = Matrix4::new(
            a,    0.0,  c.re,  c.im,
            0.0,  a,    c.im, -c.re,
            c.re, c.im, b,     0.0,
            c.im, -c.re, 0.0,  b,
        );
        let v = Self(v);
        debug_assert!(v.matches_general(&GeneralMoments::from(m), 1e-10));
        v
    }

    /// The general blocks, with the state-dependent pair products kept.
    pub fn from_general(g: &GeneralMoments) -> Self {
        let quad = |n: f64, pp: C64| {
            // ⟨aa⟩ + ⟨a†a†⟩ = 2 Re⟨aa⟩, (⟨aa⟩ − ⟨a†a†⟩)/2i = Im⟨aa⟩
            Matrix2::new(n + 0.5 + pp.re, pp.im, pp.im, n + 0.5 - pp.re)
        };
        let a = quad(g.n1, g.a1a1);
        let b = quad(g.n2, g.a2a2);
        let (p, q) = (g.a1a2, g.a1a2dag);
        let c = Matrix2::new(p.re + q.re, p.im - q.im, p.im + q.im, -(p.re - q.re));
        let mut v = Matrix4::zeros();
        v.fixed_view_mut::<2, 2>(0, 0).copy_from(&a);
        v.fixed_view_mut::<2, 2>(2, 2).copy_from(&b);
        v.fixed_view_mut::<2, 2>(0, 2).copy_from(&c);
        v.fixed_view_mut::<2, 2>(2, 0).copy_from(&c.transpose());
        Self(v)
    }

    /// Whether the simplified assembly equals the general one for `g`.
    pub fn matches_general(&self, g: &GeneralMoments, tol: f64) -> bool {
        (self.0 - Self::from_general(g).0).abs().max() <= tol * self.0.abs().max().max(1.0)
    }

    pub fn a(&self) -> Matrix2<f64> {
        self.0.fixed_view::<2, 2>(0, 0).into_owned()
    }

    pub fn b(&self) -> Matrix2<f64> {
        self.0.fixed_view::<2, 2>(2, 2).into_owned()
    }

    pub fn c(&self) -> Matrix2<f64> {
        self.0.fixed_view::<2, 2>(0, 2).into_owned()
    }

    /// `det V`; the simplified block structure has the closed form
    /// `(ab − |c|²)²`, which avoids the cancellation of a general LU
    /// determinant when occupations are large.
    pub fn determinant(&self) -> f64 {
        let v = &self.0;
        let (a, b) = (v[(0, 0)], v[(2, 2)]);
        let (x, y) = (v[(0, 2)], v[(0, 3)]);
        let structured = v[(1, 1)] == a
            && v[(3, 3)] == b
            && v[(0, 1)] == 0.0
            && v[(2, 3)] == 0.0
            && v[(1, 2)] == y
            && v[(1, 3)] == -x
            && self.0 == self.0.transpose();
        if structured {
            let d = a.mul_add(b, -x.mul_add(x, y * y));
            d * d
        } else {
            v.determinant()
        }
    }

    /// Smallest symplectic eigenvalue of the partial transpose, squared.
    pub fn min_partial_transpose_eig_sq(&self) -> Result<f64> {
        let b = self.a().determinant() + self.b().determinant() - 2.0 * self.c().determinant();
        let c = self.determinant();
        let disc = b * b - 4.0 * c;
        if disc < -1e-12 * b * b {
            return Err(Error::numeric(format!("negative discriminant {disc:.3e} in symplectic spectrum")));
        }
        let root = disc.max(0.0).sqrt();
        // (b − √disc)/2 rewritten to avoid cancellation when c ≪ b²
        let denom = b + root;
        if denom <= 0.0 {
            return Err(Error::numeric("degenerate covariance matrix"));
        }
        Ok(2.0 * c / denom)
    }
}

/// `E_N = max(0, −log₂(2r₀))`.
pub fn log_negativity(v: &CovarianceMatrix) -> Result<f64> {
    let r0_sq = v.min_partial_transpose_eig_sq()?;
    if !(r0_sq > 0.0) {
        return Err(Error::numeric(format!("symplectic eigenvalue squared is {r0_sq:.3e}; state is unphysical")));
    }
    let e = -(2.0 * r0_sq.sqrt()).log2();
    Ok(e.max(0.0))
}

/// Moments at output time `j` from a propagator grid.
pub fn second_moments(grid: &PropagatorGrid, k_diag: &[f64; 7], thermal: &ThermalSpec, j: usize) -> Result<SecondMoments> {
    raw_moments(grid, k_diag, thermal, j)?.finish()
}

pub(crate) fn raw_moments(grid: &PropagatorGrid, k_diag: &[f64; 7], thermal: &ThermalSpec, j: usize) -> Result<RawMoments> {
    let nodes = grid.node_rows(j, [MW1, MW2_DAG])?;
    let [r3, r7] = &nodes.rows[0];
    let init = bilinear(r3, r7, &SlotWeights::initial(thermal));
    let bath_w = SlotWeights::bath(thermal).scaled(k_diag);
    let samples: Vec<RawMoments> = nodes.rows.iter().map(|[a, b]| bilinear(a, b, &bath_w)).collect();
    let integrate = |f: fn(&RawMoments) -> C64| {
        let s: Vec<C64> = samples.iter().map(f).collect();
        trapezoid_sum(&s, nodes.h)
    };
    let bath = RawMoments {
        n1: integrate(|m| m.n1),
        n2: integrate(|m| m.n2),
        m12: integrate(|m| m.m12),
        m12dag: integrate(|m| m.m12dag),
    };
    Ok(init + bath)
}

/// One entry of an entanglement curve; `ent` is always derived from `E_N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EntanglementPoint {
    /// Time (s) or angular frequency (rad/s).
    at: f64,
    e_n: f64,
    ent: f64,
    s_rh: f64,
}

impl EntanglementPoint {
    pub fn new(at: f64, e_n: f64, s_rh: f64) -> Result<Self> {
        Ok(Self { at, e_n, ent: ent_from_logneg(e_n)?, s_rh })
    }

    pub fn at(&self) -> f64 {
        self.at
    }

    pub fn e_n(&self) -> f64 {
        self.e_n
    }

    pub fn ent(&self) -> f64 {
        self.ent
    }

    pub fn s_rh(&self) -> f64 {
        self.s_rh
    }
}

/// A time-series point with the drive values behind it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimePoint {
    pub point: EntanglementPoint,
    pub drives: DriveValues,
    pub moments: SecondMoments,
}

/// Moments to `E_N` under a Hermiticity policy.
pub fn logneg_from_moments(m: &SecondMoments, policy: HermiticityPolicy) -> Result<f64> {
    let m = policy.apply(m)?;
    log_negativity(&CovarianceMatrix::from_moments(&m))
}

/// Everything needed to evaluate a schedule in time.
#[derive(Debug, Clone, Copy)]
pub struct TimeSeriesSetup<'a> {
    pub params: &'a SystemParams,
    pub drives: &'a DriveSchedule,
    pub thermal: &'a ThermalSpec,
    pub grid: &'a TimeGrid,
    pub cfg: &'a TrotterConfig,
    pub policy: HermiticityPolicy,
}

/// `E_N`, ent and `S_RH` at every output time.
pub fn entanglement_time_series(setup: &TimeSeriesSetup) -> Result<Vec<TimePoint>> {
    let pg = build_grid(setup.params, setup.drives, setup.grid, setup.cfg)?;
    time_series_from_grid(setup, &pg)
}

/// As [`entanglement_time_series`], reusing a propagator grid.
pub fn time_series_from_grid(setup: &TimeSeriesSetup, pg: &PropagatorGrid) -> Result<Vec<TimePoint>> {
    setup.thermal.validate()?;
    let k_diag = setup.params.k_diag();
    (0..setup.grid.n_points)
        .into_par_iter()
        .map(|j| {
            let t = setup.grid.time(j);
            let drives = setup.drives.values(t);
            let s_rh = rh_metric(&assemble_m(setup.params, setup.drives, t))?;
            let moments = second_moments(pg, &k_diag, setup.thermal, j)?;
            let e_n = logneg_from_moments(&moments, setup.policy)?;
            Ok(TimePoint { point: EntanglementPoint::new(t, e_n, s_rh)?, drives, moments })
        })
        .collect()
}
