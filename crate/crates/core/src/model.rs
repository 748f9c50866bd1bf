// Copyright 2026 The om-entangle Authors
// SPDX-License-Identifier: Apache-2.0

//! Linearized equation of motion of the seven primary modes.
//!
//! The mode vector is ordered `(a_o1, b_m1, a_mw1, f, a_o2, b_m2, a_mw2†)`;
//! the last slot holds a creation operator so that the two-mode squeezing
//! interaction on the second side stays linear. The dynamics matrix `M`
//! generates `i dv/dt = M v + i√K v_in`; stability is judged on the
//! eigenvalues of `H = −iM`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Mat7, Vec7, C64, I, ONE, ZERO};
use crate::params::SystemParams;

/// The seven primary modes, in dynamics-matrix order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Mode {
    Optical1,
    Mechanical1,
    Microwave1,
    Fiber,
    Optical2,
    Mechanical2,
    /// Creation operator of the second microwave cavity.
    Microwave2Dag,
}

impl Mode {
    pub const ALL: [Mode; 7] = [
        Mode::Optical1,
        Mode::Mechanical1,
        Mode::Microwave1,
        Mode::Fiber,
        Mode::Optical2,
        Mode::Mechanical2,
        Mode::Microwave2Dag,
    ];

    /// Zero-based position in the mode vector.
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn is_daggered(self) -> bool {
        self == Mode::Microwave2Dag
    }

    /// Mechanical oscillators couple to the `N_th` baths; all others to `Q_th`.
    pub fn is_mechanical(self) -> bool {
        matches!(self, Mode::Mechanical1 | Mode::Mechanical2)
    }
}

/// Zero-based index of the first microwave cavity.
pub const MW1: usize = 2;
/// Zero-based index of the second microwave cavity's creation operator.
pub const MW2_DAG: usize = 6;

/// Doubly-asymmetric trapezoid: zero until `t_start`, linear rise to
/// `h_peak`, plateau, linear fall to `h_end`, then constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrapezoidPulse {
    pub t_start: f64,
    pub rise: f64,
    pub plateau: f64,
    pub fall: f64,
    #[serde(default)]
    pub h_start: f64,
    pub h_peak: f64,
    pub h_end: f64,
}

impl TrapezoidPulse {
    pub fn new(t_start: f64, rise: f64, plateau: f64, fall: f64, h_peak: f64, h_end: f64) -> Self {
        Self { t_start, rise, plateau, fall, h_start: 0.0, h_peak, h_end }
    }

    pub fn validate(&self) -> Result<()> {
        let times = [self.t_start, self.rise, self.plateau, self.fall];
        if times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
            return Err(Error::domain(format!("pulse times must be finite and >= 0: {self:?}")));
        }
        if self.h_start != 0.0 {
            return Err(Error::domain("pulse starting height is constrained to zero"));
        }
        if !(self.h_peak >= 0.0 && self.h_end >= 0.0 && self.h_peak.is_finite() && self.h_end.is_finite()) {
            return Err(Error::domain(format!("pulse heights must be finite and >= 0: {self:?}")));
        }
        Ok(())
    }

    /// Start of rise, end of rise, end of plateau, end of fall.
    pub fn knots(&self) -> [f64; 4] {
        let t1 = self.t_start + self.rise;
        let t2 = t1 + self.plateau;
        [self.t_start, t1, t2, t2 + self.fall]
    }

    pub fn value(&self, t: f64) -> f64 {
        let [t0, t1, t2, t3] = self.knots();
        if t < t0 {
            self.h_start
        } else if t < t1 {
            self.h_start + (self.h_peak - self.h_start) * (t - t0) / self.rise
        } else if t < t2 {
            self.h_peak
        } else if t < t3 {
            self.h_peak + (self.h_end - self.h_peak) * (t - t2) / self.fall
        } else {
            self.h_end
        }
    }

    pub fn max_value(&self) -> f64 {
        self.h_peak.max(self.h_end).max(self.h_start)
    }
}

/// Time dependence of one driving laser.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Drive {
    Constant(f64),
    Trapezoid(TrapezoidPulse),
}

impl Drive {
    pub fn value(&self, t: f64) -> f64 {
        match self {
            Drive::Constant(g) => *g,
            Drive::Trapezoid(p) => p.value(t),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Drive::Constant(g) if g.is_finite() && *g >= 0.0 => Ok(()),
            Drive::Constant(g) => Err(Error::domain(format!("constant drive {g} must be finite and >= 0"))),
            Drive::Trapezoid(p) => p.validate(),
        }
    }
}

/// Instantaneous laser couplings, rad/s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct DriveValues {
    pub g_mw1: f64,
    pub g_mw2: f64,
    pub g_o1: f64,
    pub g_o2: f64,
}

impl DriveValues {
    pub fn to_array(&self) -> [f64; 4] {
        [self.g_mw1, self.g_mw2, self.g_o1, self.g_o2]
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        Self { g_mw1: a[0], g_mw2: a[1], g_o1: a[2], g_o2: a[3] }
    }
}

/// The four driving lasers as functions of time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriveSchedule {
    pub g_mw1: Drive,
    pub g_mw2: Drive,
    pub g_o1: Drive,
    pub g_o2: Drive,
}

impl DriveSchedule {
    pub fn constant(v: DriveValues) -> Self {
        Self {
            g_mw1: Drive::Constant(v.g_mw1),
            g_mw2: Drive::Constant(v.g_mw2),
            g_o1: Drive::Constant(v.g_o1),
            g_o2: Drive::Constant(v.g_o2),
        }
    }

    pub fn zero() -> Self {
        Self::constant(DriveValues::default())
    }

    pub fn drives(&self) -> [&Drive; 4] {
        [&self.g_mw1, &self.g_mw2, &self.g_o1, &self.g_o2]
    }

    pub fn values(&self, t: f64) -> DriveValues {
        DriveValues {
            g_mw1: self.g_mw1.value(t),
            g_mw2: self.g_mw2.value(t),
            g_o1: self.g_o1.value(t),
            g_o2: self.g_o2.value(t),
        }
    }

    /// Constant values if every drive is constant.
    pub fn as_constant(&self) -> Option<DriveValues> {
        match (self.g_mw1, self.g_mw2, self.g_o1, self.g_o2) {
            (Drive::Constant(a), Drive::Constant(b), Drive::Constant(c), Drive::Constant(d)) => {
                Some(DriveValues::from_array([a, b, c, d]))
            }
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.drives().iter().try_for_each(|d| d.validate())
    }
}

/// The 7×7 dynamics matrix `M` (rad/s).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DynamicsMatrix(pub Mat7);

impl DynamicsMatrix {
    pub fn matrix(&self) -> &Mat7 {
        &self.0
    }

    /// `H = −iM`.
    pub fn generator(&self) -> Mat7 {
        self.0 * (-I)
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        Self(self.0 * C64::new(alpha, 0.0))
    }
}

/// `M` for given instantaneous drive values.
pub fn assemble_from_values(params: &SystemParams, g: &DriveValues) -> DynamicsMatrix {
    let kappa = params.kappa.to_array();
    let mut m = Mat7::zeros();
    for (k, kap) in kappa.iter().enumerate() {
        m[(k, k)] = C64::new(0.0, -kap / 2.0);
    }
    let mut sym = |i: usize, j: usize, v: f64| {
        m[(i, j)] = C64::new(v, 0.0);
        m[(j, i)] = C64::new(v, 0.0);
    };
    sym(0, 1, g.g_o1);
    sym(1, 2, g.g_mw1);
    sym(0, 3, params.g_f);
    sym(3, 4, -params.g_f);
    sym(4, 5, g.g_o2);
    // two-mode squeezing pairs b_m2 with a_mw2†: antisymmetric
    m[(5, 6)] = C64::new(g.g_mw2, 0.0);
    m[(6, 5)] = C64::new(-g.g_mw2, 0.0);
    DynamicsMatrix(m)
}

/// `M(t)` with the drives evaluated at `t`.
pub fn assemble_m(params: &SystemParams, drives: &DriveSchedule, t: f64) -> DynamicsMatrix {
    assemble_from_values(params, &drives.values(t))
}

/// `S_RH`: the largest real part among the eigenvalues of `H = −iM`.
pub fn rh_metric(m: &DynamicsMatrix) -> Result<f64> {
    let ev = linalg::eigenvalues(&m.generator())?;
    Ok(ev.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max))
}

/// Sign classification of `S_RH`; zero is neither stable nor unstable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stability {
    Stable,
    Indeterminate,
    Unstable,
}

impl Stability {
    pub fn classify(s_rh: f64) -> Self {
        if s_rh < 0.0 {
            Stability::Stable
        } else if s_rh == 0.0 {
            Stability::Indeterminate
        } else {
            Stability::Unstable
        }
    }
}

/// Grid of constant optical couplings for a static stability scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanGrid {
    pub g_o1: Vec<f64>,
    pub g_o2: Vec<f64>,
}

impl ScanGrid {
    /// `n × n` logarithmically spaced points over `[lo, hi]²`.
    pub fn log_spaced(lo: f64, hi: f64, n: usize) -> Self {
        let axis = log_space(lo, hi, n);
        Self { g_o1: axis.clone(), g_o2: axis }
    }

    pub fn linear(lo: f64, hi: f64, n: usize) -> Self {
        let axis = lin_space(lo, hi, n);
        Self { g_o1: axis.clone(), g_o2: axis }
    }

    /// The default `[g0, 100 g0]²` grid at 100 × 100 log-spaced points.
    pub fn default_for(g0: f64) -> Self {
        Self::log_spaced(g0, 100.0 * g0, 100)
    }

    pub fn len(&self) -> usize {
        self.g_o1.len() * self.g_o2.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

pub fn lin_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![lo],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

pub fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    let mut v: Vec<f64> = lin_space(a, b, n).into_iter().map(f64::exp).collect();
    // pin the end points exactly
    if let Some(first) = v.first_mut() {
        *first = lo;
    }
    if n > 1 {
        v[n - 1] = hi;
    }
    v
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub g_o1: f64,
    pub g_o2: f64,
    pub s_rh: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityScan {
    /// Row-major over `(g_o1, g_o2)`.
    pub points: Vec<ScanPoint>,
    pub best: ScanPoint,
    /// Microwave drives fixed by the hyperbolic assignment.
    pub g_mw1: f64,
    pub g_mw2: f64,
}

impl StabilityScan {
    pub fn has_stable_point(&self) -> bool {
        self.best.s_rh < 0.0
    }

    pub fn best_drives(&self) -> DriveValues {
        DriveValues { g_mw1: self.g_mw1, g_mw2: self.g_mw2, g_o1: self.best.g_o1, g_o2: self.best.g_o2 }
    }
}

/// `S_RH` over a grid of constant optical couplings with the microwave drives
/// set hyperbolically from `r`. The minimizer is unique: ties go to the
/// lexicographically smallest `(g_o1, g_o2)`.
pub fn stability_scan(params: &SystemParams, r: f64, grid: &ScanGrid) -> Result<StabilityScan> {
    if grid.is_empty() {
        return Err(Error::domain("stability scan over an empty grid"));
    }
    let (g_mw1, g_mw2) = hyperbolic_assignment(r, params.g0)?;
    let cells: Vec<(f64, f64)> =
        grid.g_o1.iter().flat_map(|&a| grid.g_o2.iter().map(move |&b| (a, b))).collect();
    let points = cells
        .par_iter()
        .map(|&(g_o1, g_o2)| {
            let m = assemble_from_values(params, &DriveValues { g_mw1, g_mw2, g_o1, g_o2 });
            rh_metric(&m).map(|s_rh| ScanPoint { g_o1, g_o2, s_rh })
        })
        .collect::<Result<Vec<_>>>()?;
    let best = *points
        .iter()
        .min_by(|a, b| {
            a.s_rh
                .total_cmp(&b.s_rh)
                .then(a.g_o1.total_cmp(&b.g_o1))
                .then(a.g_o2.total_cmp(&b.g_o2))
        })
        .expect("grid is non-empty");
    Ok(StabilityScan { points, best, g_mw1, g_mw2 })
}

/// `(g0 cosh r, g0 sinh r)`.
pub fn hyperbolic_assignment(r: f64, g0: f64) -> Result<(f64, f64)> {
    if !(r >= 0.0) {
        return Err(Error::domain(format!("squeezing parameter must be >= 0, got {r}")));
    }
    Ok((g0 * r.cosh(), g0 * r.sinh()))
}

/// `r = atanh(g_mw2 / g_mw1)`.
pub fn squeezing_from_drives(g_mw1: f64, g_mw2: f64) -> Result<f64> {
    if !(g_mw2 >= 0.0 && g_mw1 > g_mw2) {
        return Err(Error::domain(format!(
            "squeezing parameter undefined unless g_mw1 > g_mw2 >= 0 (got {g_mw1}, {g_mw2})"
        )));
    }
    Ok((g_mw2 / g_mw1).atanh())
}

/// Ent of an ideal two-mode squeezed state: `1 − 1/(2cosh²r − 1)`.
pub fn ent_from_r(r: f64) -> f64 {
    // 2cosh²r − 1 = cosh 2r
    1.0 - 1.0 / (2.0 * r).cosh()
}

/// Inverse of [`ent_from_r`].
pub fn r_from_ent(ent: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&ent) {
        return Err(Error::domain(format!("ent must lie in [0, 1), got {ent}")));
    }
    Ok((0.5 * (1.0 / (1.0 - ent) + 1.0)).sqrt().acosh())
}

/// Logarithmic negativity of an ideal two-mode squeezed state, `r / ln√2`.
pub fn logneg_from_r(r: f64) -> f64 {
    r / 2f64.sqrt().ln()
}

/// Ideal squeezing parameter behind a logarithmic negativity.
pub fn r_from_logneg(e_n: f64) -> f64 {
    e_n * 2f64.sqrt().ln()
}

/// Ent through the ideal-squeezing lens: `E_N → r → Υ`.
pub fn ent_from_logneg(e_n: f64) -> Result<f64> {
    if !(e_n >= 0.0) {
        return Err(Error::domain(format!("logarithmic negativity must be >= 0, got {e_n}")));
    }
    Ok(ent_from_r(r_from_logneg(e_n)))
}

/// Bogoliubov modes over `(a_mw1, a_mw2†)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BogoliubovPair {
    pub beta1: [C64; 2],
    pub beta2_dag: [C64; 2],
    pub r: f64,
}

impl BogoliubovPair {
    /// `cosh²r − sinh²r`, one up to rounding.
    pub fn hyperbolic_norm(&self) -> f64 {
        self.beta1[0].norm_sqr() - self.beta1[1].norm_sqr()
    }

    /// A mode embedded into the seven-slot vector at the two microwave
    /// positions, normalized to unit Euclidean length.
    pub fn embed(coeffs: [C64; 2]) -> Vec7 {
        let mut v = Vec7::zeros();
        v[MW1] = coeffs[0];
        v[MW2_DAG] = coeffs[1];
        let n = v.norm();
        v / C64::new(n, 0.0)
    }
}

pub fn bogoliubov_modes(r: f64) -> Result<BogoliubovPair> {
    if !(r >= 0.0) {
        return Err(Error::domain(format!("squeezing parameter must be >= 0, got {r}")));
    }
    let (c, s) = (C64::new(r.cosh(), 0.0), C64::new(r.sinh(), 0.0));
    Ok(BogoliubovPair { beta1: [c, I * s], beta2_dag: [-I * s, c], r })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpanResidual {
    /// `‖V c − target‖` for the least-squares coefficients `c`.
    pub residual: f64,
    /// 2-norm condition number of the eigenvector matrix `V`.
    pub condition: f64,
}

/// How well `target` is represented in the span of the eigenvectors of
/// `H = −iM`.
///
/// When the eigenbasis is complete every vector lies in its span, so a
/// small residual on its own says little; the condition number tells
/// whether the basis is close to defective.
pub fn eigenmode_span_residual(m: &DynamicsMatrix, target: &Vec7) -> Result<SpanResidual> {
    let (_, vecs) = linalg::eigen_decomposition(&m.generator())?;
    let svd = vecs.svd(true, true);
    let sv = &svd.singular_values;
    let smax = sv.max();
    let smin = sv.min();
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    let coeffs = svd
        .solve(target, f64::EPSILON * smax)
        .map_err(|e| Error::numeric(format!("least squares failed: {e}")))?;
    let residual = (vecs * coeffs - target).norm();
    Ok(SpanResidual { residual, condition })
}

#[allow(dead_code)]
fn unit(i: usize) -> Vec7 {
    let mut v = Vec7::from_element(ZERO);
    v[i] = ONE;
    v
}
