// Copyright 2026 The om-entangle Authors
// SPDX-License-Identifier: Apache-2.0

//! Time-ordered propagators `τ(t, t′)` of `dv/dt = −iM(t) v` on a uniform
//! output grid.
//!
//! Each output interval is split into `N` Trotter sub-steps, each a matrix
//! exponential with `M` evaluated at the sub-step's right end. Later factors
//! multiply on the left. The grid keeps one product per interval plus the
//! partial products needed to reach the trapezoid nodes of every two-time
//! integral, so no propagator is ever inverted.

mod expm;
mod quadrature;

use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

pub use expm::{expm_generic, matrix_exponential};
pub use quadrature::{trapezoid_integrate, trapezoid_sum};

use crate::error::{Error, Result};
use crate::linalg::{Mat7, Row7, C64};
use crate::model::{assemble_m, DriveSchedule};
use crate::params::SystemParams;

/// Uniform output times `0, …, t_end`, both ends included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub t_end: f64,
    pub n_points: usize,
}

impl TimeGrid {
    pub fn new(t_end: f64, n_points: usize) -> Result<Self> {
        let g = Self { t_end, n_points };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(Error::domain(format!("time grid end must be positive, got {}", self.t_end)));
        }
        if self.n_points < 2 {
            return Err(Error::domain(format!("time grid needs at least 2 points, got {}", self.n_points)));
        }
        Ok(())
    }

    pub fn dt(&self) -> f64 {
        self.t_end / (self.n_points - 1) as f64
    }

    pub fn time(&self, i: usize) -> f64 {
        if i + 1 == self.n_points {
            self.t_end
        } else {
            i as f64 * self.dt()
        }
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.time(i)).collect()
    }
}

/// Discretization of the propagator and of the two-time integrals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrotterConfig {
    /// Trotter sub-steps per output interval.
    pub n_trotter: usize,
    /// Trapezoid panels per integral over `[0, t]`.
    pub n_trap: usize,
}

impl Default for TrotterConfig {
    fn default() -> Self {
        Self { n_trotter: 50, n_trap: 5 }
    }
}

impl TrotterConfig {
    pub fn convergence() -> Self {
        Self { n_trotter: 1600, n_trap: 10 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_trotter == 0 || self.n_trap == 0 {
            return Err(Error::domain(format!("Trotter and trapezoid counts must be >= 1: {self:?}")));
        }
        Ok(())
    }
}

/// Cached propagators over one drive schedule.
#[derive(Debug, Clone)]
pub struct PropagatorGrid {
    grid: TimeGrid,
    cfg: TrotterConfig,
    /// `τ(t_{i+1}, t_i)` for every interval.
    intervals: Vec<Mat7>,
    /// `τ(t_{i+1}, t_i + mδ)` keyed by global sub-step index `iN + m`,
    /// for the interior nodes the quadrature needs.
    partial: BTreeMap<usize, Mat7>,
}

/// Rows of `τ(t_j, s)` at the trapezoid nodes `s` of `[0, t_j]`.
#[derive(Debug, Clone)]
pub struct NodeRows<const R: usize> {
    /// Panel width of the nominal uniform nodes.
    pub h: f64,
    /// Ordered from `s = 0` to `s = t_j`.
    pub rows: Vec<[Row7; R]>,
}

impl PropagatorGrid {
    pub fn time_grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn config(&self) -> &TrotterConfig {
        &self.cfg
    }

    pub fn n_points(&self) -> usize {
        self.grid.n_points
    }

    pub fn interval(&self, i: usize) -> Result<&Mat7> {
        self.intervals.get(i).ok_or(Error::IndexOutOfRange { index: i, len: self.intervals.len() })
    }

    fn check(&self, idx: usize) -> Result<()> {
        if idx >= self.grid.n_points {
            return Err(Error::IndexOutOfRange { index: idx, len: self.grid.n_points });
        }
        Ok(())
    }

    /// `τ(t_j, t_i)` for `i ≤ j`, as a product of interval factors.
    pub fn propagate(&self, j: usize, i: usize) -> Result<Mat7> {
        self.check(j)?;
        self.check(i)?;
        if i > j {
            return Err(Error::domain(format!("propagator needs i <= j, got i = {i}, j = {j}")));
        }
        let mut acc = Mat7::identity();
        for p in &self.intervals[i..j] {
            acc = p * acc;
        }
        Ok(acc)
    }

    /// Rows `rows` of `τ(t_j, s)` at the `n_trap + 1` quadrature nodes of
    /// `[0, t_j]`, walking backward from `t_j` with row vectors.
    pub fn node_rows<const R: usize>(&self, j: usize, rows: [usize; R]) -> Result<NodeRows<R>> {
        self.check(j)?;
        let n_trap = self.cfg.n_trap;
        let h = self.grid.time(j) / n_trap as f64;
        let eye = Mat7::identity();
        let mut cur: [Row7; R] = rows.map(|r| eye.row(r).into_owned());
        let mut out = vec![cur; n_trap + 1];
        if j == 0 {
            return Ok(NodeRows { h, rows: out });
        }
        let n = self.cfg.n_trotter;
        // cur holds rows of τ(t_j, t_i); node n_trap sits at t_j itself
        let mut i = j;
        for k in (0..n_trap).rev() {
            let b = snap(k, j, n, n_trap);
            let (ii, m) = (b / n, b % n);
            let stop = if m == 0 { ii } else { ii + 1 };
            while i > stop {
                cur = cur.map(|r| r * self.intervals[i - 1]);
                i -= 1;
            }
            out[k] = if m == 0 {
                cur
            } else {
                let s = self
                    .partial
                    .get(&b)
                    .ok_or_else(|| Error::numeric(format!("missing partial product at sub-step {b}")))?;
                cur.map(|r| r * s)
            };
        }
        Ok(NodeRows { h, rows: out })
    }

    /// Writes the interval products as a versioned little-endian dump.
    pub fn write_dump(&self, w: &mut impl Write) -> Result<()> {
        w.write_all(DUMP_MAGIC)?;
        w.write_all(&DUMP_VERSION.to_le_bytes())?;
        w.write_all(&(self.grid.n_points as u64).to_le_bytes())?;
        w.write_all(&(self.cfg.n_trotter as u64).to_le_bytes())?;
        w.write_all(&(self.cfg.n_trap as u64).to_le_bytes())?;
        w.write_all(&self.grid.t_end.to_le_bytes())?;
        for p in &self.intervals {
            for r in 0..7 {
                for c in 0..7 {
                    w.write_all(&p[(r, c)].re.to_le_bytes())?;
                    w.write_all(&p[(r, c)].im.to_le_bytes())?;
                }
            }
        }
        Ok(())
    }
}

const DUMP_MAGIC: &[u8; 4] = b"OMPG";
const DUMP_VERSION: u32 = 1;

/// Header and interval products read back from a dump.
#[derive(Debug, Clone, PartialEq)]
pub struct GridDump {
    pub grid: TimeGrid,
    pub cfg: TrotterConfig,
    pub intervals: Vec<Mat7>,
}

pub fn read_dump(r: &mut impl Read) -> Result<GridDump> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != DUMP_MAGIC {
        return Err(Error::Config("not a propagator grid dump".into()));
    }
    let mut b4 = [0u8; 4];
    r.read_exact(&mut b4)?;
    let version = u32::from_le_bytes(b4);
    if version != DUMP_VERSION {
        return Err(Error::Config(format!("unsupported dump version {version}")));
    }
    let mut b8 = [0u8; 8];
    let mut next = |r: &mut dyn Read| -> Result<[u8; 8]> {
        r.read_exact(&mut b8)?;
        Ok(b8)
    };
    let n_points = u64::from_le_bytes(next(r)?) as usize;
    let n_trotter = u64::from_le_bytes(next(r)?) as usize;
    let n_trap = u64::from_le_bytes(next(r)?) as usize;
    let t_end = f64::from_le_bytes(next(r)?);
    let grid = TimeGrid::new(t_end, n_points)?;
    let mut intervals = Vec::with_capacity(n_points - 1);
    for _ in 0..n_points - 1 {
        let mut m = Mat7::zeros();
        for row in 0..7 {
            for col in 0..7 {
                let re = f64::from_le_bytes(next(r)?);
                let im = f64::from_le_bytes(next(r)?);
                m[(row, col)] = C64::new(re, im);
            }
        }
        intervals.push(m);
    }
    Ok(GridDump { grid, cfg: TrotterConfig { n_trotter, n_trap }, intervals })
}

/// Global sub-step index nearest to quadrature node `k` of `[0, t_j]`.
fn snap(k: usize, j: usize, n_trotter: usize, n_trap: usize) -> usize {
    let num = k * j * n_trotter;
    // round half up, in integers
    (2 * num + n_trap) / (2 * n_trap)
}

/// Sub-step indices strictly inside an interval that some quadrature node
/// lands on.
fn interior_nodes(grid: &TimeGrid, cfg: &TrotterConfig) -> Vec<usize> {
    let n = cfg.n_trotter;
    let mut v: Vec<usize> = (1..grid.n_points)
        .flat_map(|j| (0..cfg.n_trap).map(move |k| snap(k, j, n, cfg.n_trap)))
        .filter(|b| b % n != 0)
        .collect();
    v.sort_unstable();
    v.dedup();
    v
}

/// `e^{−iMδ}` for one sub-step.
pub fn step_factor(m: &Mat7, delta: f64) -> Result<Mat7> {
    expm_generic(&(m * C64::new(0.0, -delta)))
}

pub fn build_grid(
    params: &SystemParams,
    drives: &DriveSchedule,
    grid: &TimeGrid,
    cfg: &TrotterConfig,
) -> Result<PropagatorGrid> {
    grid.validate()?;
    cfg.validate()?;
    let n = cfg.n_trotter;
    let delta = grid.dt() / n as f64;
    let wanted = interior_nodes(grid, cfg);
    let mut wanted_iter = wanted.iter().peekable();

    let mut intervals = Vec::with_capacity(grid.n_points - 1);
    let mut partial = BTreeMap::new();
    let mut factors: Vec<Mat7> = Vec::with_capacity(n);
    // consecutive sub-steps with identical M (plateaus, constant drives)
    // reuse the previous exponential
    let mut last: Option<(Mat7, Mat7)> = None;

    for i in 0..grid.n_points - 1 {
        let t_i = grid.time(i);
        factors.clear();
        for m in 1..=n {
            let mm = assemble_m(params, drives, t_i + m as f64 * delta).0;
            let f = match &last {
                Some((prev_m, prev_f)) if *prev_m == mm => *prev_f,
                _ => {
                    let f = step_factor(&mm, delta)?;
                    last = Some((mm, f));
                    f
                }
            };
            factors.push(f);
        }
        let lo = i * n;
        let needed: Vec<usize> = {
            let mut v = Vec::new();
            while let Some(&&b) = wanted_iter.peek() {
                if b >= lo + n {
                    break;
                }
                v.push(b - lo);
                wanted_iter.next();
            }
            v
        };
        let mut acc = Mat7::identity();
        let mut need = needed.iter().rev().peekable();
        for m in (1..=n).rev() {
            // acc = F_N ⋯ F_{m+1}
            if need.peek() == Some(&&m) {
                partial.insert(lo + m, acc);
                need.next();
            }
            acc *= factors[m - 1];
        }
        if !crate::linalg::is_finite(&acc) {
            return Err(Error::numeric(format!("non-finite propagator on interval {i}")));
        }
        intervals.push(acc);
    }
    Ok(PropagatorGrid { grid: *grid, cfg: *cfg, intervals, partial })
}
