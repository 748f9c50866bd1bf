// Copyright 2026 The om-entangle Authors
// SPDX-License-Identifier: Apache-2.0

//! Random searches over drive settings.
//!
//! Every trial draws from its own ChaCha8 stream, selected by the trial index
//! under the master seed, so a trial's candidate does not depend on how the
//! trials are scheduled. The winner is the highest discrete peak `E_N` among
//! stable candidates, with ties going to the earliest trial.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::covariance::{time_series_from_grid, EntanglementPoint, HermiticityPolicy, TimePoint, TimeSeriesSetup};
use crate::error::{Error, Result};
use crate::model::{assemble_from_values, assemble_m, rh_metric, Drive, DriveSchedule, DriveValues, TrapezoidPulse};
use crate::params::{check_ratios, RatioKind, SystemParams, ThermalSpec};
use crate::propagator::{build_grid, TimeGrid, TrotterConfig};
use crate::spectral::{entanglement_spectrum, FrequencyGrid, Spectrum};

/// Version of the serialized [`WinnerRecord`] layout.
pub const RECORD_VERSION: u32 = 1;

/// Master seed used when none is given.
pub const DEFAULT_SEED: u64 = 1;

/// Trial count used when none is given.
pub const DEFAULT_TRIALS: u64 = 10_000;

/// Upper bound of the constant-drive search, in units of `g0`.
pub const SPECTRAL_UPPER_G0: f64 = 110.0;

/// Closed interval sampled uniformly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn point(x: f64) -> Self {
        Self { lo: x, hi: x }
    }

    fn validate(&self, what: &str) -> Result<()> {
        if !(self.lo.is_finite() && self.hi.is_finite() && self.lo >= 0.0 && self.lo <= self.hi) {
            return Err(Error::Config(format!("{what}: bounds [{}, {}] must be finite with 0 <= lo <= hi", self.lo, self.hi)));
        }
        Ok(())
    }

    /// `lo + u (hi − lo)` for `u` in `[0, 1)`; a point interval returns `lo`
    /// exactly.
    fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        let u: f64 = rng.random();
        if self.lo == self.hi {
            self.lo
        } else {
            self.lo + u * (self.hi - self.lo)
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

/// Ranges for the parameters of one trapezoid pulse. The starting height is
/// pinned to zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseBounds {
    pub t_start: Interval,
    pub rise: Interval,
    pub plateau: Interval,
    pub fall: Interval,
    pub h_peak: Interval,
    pub h_end: Interval,
}

impl PulseBounds {
    pub fn fields(&self) -> [(&'static str, &Interval); 6] {
        [
            ("t_start", &self.t_start),
            ("rise", &self.rise),
            ("plateau", &self.plateau),
            ("fall", &self.fall),
            ("h_peak", &self.h_peak),
            ("h_end", &self.h_end),
        ]
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> TrapezoidPulse {
        // fixed draw order keeps streams aligned across bound changes
        let t_start = self.t_start.sample(rng);
        let rise = self.rise.sample(rng);
        let plateau = self.plateau.sample(rng);
        let fall = self.fall.sample(rng);
        let h_peak = self.h_peak.sample(rng);
        let h_end = self.h_end.sample(rng);
        TrapezoidPulse::new(t_start, rise, plateau, fall, h_peak, h_end)
    }
}

/// Search domain for four trapezoid pulses and the simulated horizon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseSearchSpace {
    pub g_mw1: PulseBounds,
    pub g_mw2: PulseBounds,
    pub g_o1: PulseBounds,
    pub g_o2: PulseBounds,
    /// Simulated time span, s.
    pub horizon: f64,
}

impl PulseSearchSpace {
    /// Default domain: a 100 ns horizon, pulses starting in its first half
    /// with edges and plateaus up to 40 ns, heights up to `110 g0`.
    pub fn default_for(g0: f64) -> Self {
        let b = PulseBounds {
            t_start: Interval::new(0.0, 50e-9),
            rise: Interval::new(0.0, 40e-9),
            plateau: Interval::new(0.0, 40e-9),
            fall: Interval::new(0.0, 40e-9),
            h_peak: Interval::new(0.0, SPECTRAL_UPPER_G0 * g0),
            h_end: Interval::new(0.0, SPECTRAL_UPPER_G0 * g0),
        };
        Self { g_mw1: b, g_mw2: b, g_o1: b, g_o2: b, horizon: 100e-9 }
    }

    pub fn lasers(&self) -> [(&'static str, &PulseBounds); 4] {
        [("g_mw1", &self.g_mw1), ("g_mw2", &self.g_mw2), ("g_o1", &self.g_o1), ("g_o2", &self.g_o2)]
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return Err(Error::Config(format!("search horizon must be positive, got {}", self.horizon)));
        }
        for (laser, b) in self.lasers() {
            for (name, iv) in b.fields() {
                iv.validate(&format!("{laser}.{name}"))?;
            }
        }
        Ok(())
    }
}

/// Per-laser constant-drive ranges.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralSearchSpace {
    pub g_mw1: Interval,
    pub g_mw2: Interval,
    pub g_o1: Interval,
    pub g_o2: Interval,
}

impl SpectralSearchSpace {
    /// `[0, 110 g0]` for every laser.
    pub fn default_for(g0: f64) -> Self {
        let b = Interval::new(0.0, SPECTRAL_UPPER_G0 * g0);
        Self { g_mw1: b, g_mw2: b, g_o1: b, g_o2: b }
    }

    /// The single point `v`.
    pub fn collapsed(v: &DriveValues) -> Self {
        Self {
            g_mw1: Interval::point(v.g_mw1),
            g_mw2: Interval::point(v.g_mw2),
            g_o1: Interval::point(v.g_o1),
            g_o2: Interval::point(v.g_o2),
        }
    }

    pub fn lasers(&self) -> [(&'static str, &Interval); 4] {
        [("g_mw1", &self.g_mw1), ("g_mw2", &self.g_mw2), ("g_o1", &self.g_o1), ("g_o2", &self.g_o2)]
    }

    /// Bounds must lie inside `[0, 110 g0]`.
    pub fn validate(&self, g0: f64) -> Result<()> {
        let upper = SPECTRAL_UPPER_G0 * g0;
        for (laser, iv) in self.lasers() {
            iv.validate(laser)?;
            if iv.hi > upper * (1.0 + 1e-12) {
                return Err(Error::Config(format!("{laser}: upper bound {} exceeds 110 g0 = {upper}", iv.hi)));
            }
        }
        Ok(())
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> DriveValues {
        let g_mw1 = self.g_mw1.sample(rng);
        let g_mw2 = self.g_mw2.sample(rng);
        let g_o1 = self.g_o1.sample(rng);
        let g_o2 = self.g_o2.sample(rng);
        DriveValues { g_mw1, g_mw2, g_o1, g_o2 }
    }
}

/// How candidates are screened before the damped evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StabilityMode {
    /// Zero-damping filter with a small positive threshold, then the strict
    /// damped check.
    #[default]
    Prescreen,
    /// The strict damped check alone.
    Strict,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub master_seed: u64,
    pub trials: u64,
    /// rad/s.
    #[serde(default = "default_threshold")]
    pub prescreen_threshold: f64,
    #[serde(default)]
    pub stability_mode: StabilityMode,
}

fn default_threshold() -> f64 {
    1e-4
}

impl SearchConfig {
    pub fn new(master_seed: u64, trials: u64) -> Self {
        Self { master_seed, trials, prescreen_threshold: default_threshold(), stability_mode: StabilityMode::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be >= 1".into()));
        }
        if !self.prescreen_threshold.is_finite() {
            return Err(Error::Config("prescreen threshold must be finite".into()));
        }
        Ok(())
    }
}

/// Serial or rayon-parallel trial evaluation; both give the same winner.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

/// The random stream of one trial.
pub fn trial_rng(master_seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(trial);
    rng
}

/// Four independent trapezoid pulses drawn uniformly within the bounds.
pub fn sample_pulse_set(space: &PulseSearchSpace, rng: &mut ChaCha8Rng) -> DriveSchedule {
    DriveSchedule {
        g_mw1: Drive::Trapezoid(space.g_mw1.sample(rng)),
        g_mw2: Drive::Trapezoid(space.g_mw2.sample(rng)),
        g_o1: Drive::Trapezoid(space.g_o1.sample(rng)),
        g_o2: Drive::Trapezoid(space.g_o2.sample(rng)),
    }
}

/// Candidate of one trial of a pulse search.
pub fn pulse_candidate(space: &PulseSearchSpace, master_seed: u64, trial: u64) -> DriveSchedule {
    sample_pulse_set(space, &mut trial_rng(master_seed, trial))
}

/// Candidate of one trial of a constant-drive search.
pub fn spectral_candidate(space: &SpectralSearchSpace, master_seed: u64, trial: u64) -> DriveValues {
    space.sample(&mut trial_rng(master_seed, trial))
}

/// `S_RH` of `M(t)` for every output time, stopping at the first value at
/// or above `limit`. Returns the values computed so far.
fn s_rh_until(params: &SystemParams, drives: &DriveSchedule, grid: &TimeGrid, limit: f64) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(grid.n_points);
    let mut last: Option<(DriveValues, f64)> = None;
    for t in grid.times() {
        let v = drives.values(t);
        let s = match last {
            Some((pv, ps)) if pv == v => ps,
            _ => rh_metric(&assemble_m(params, drives, t))?,
        };
        last = Some((v, s));
        out.push(s);
        if s >= limit {
            break;
        }
    }
    Ok(out)
}

/// Passes iff `S_RH` stays below `threshold` at every output time with all
/// damping switched off.
pub fn prescreen_zero_damping(params: &SystemParams, drives: &DriveSchedule, grid: &TimeGrid, threshold: f64) -> Result<bool> {
    let s = s_rh_until(&params.undamped(), drives, grid, threshold)?;
    Ok(s.len() == grid.n_points && s.iter().all(|&x| x < threshold))
}

/// Extremes of `S_RH` over a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilitySummary {
    pub max: f64,
    pub min: f64,
    /// Time or frequency of the maximum.
    pub at_max: f64,
}

impl StabilitySummary {
    fn of(points: &[EntanglementPoint]) -> Self {
        let mut s = Self { max: f64::NEG_INFINITY, min: f64::INFINITY, at_max: f64::NAN };
        for p in points {
            if p.s_rh() > s.max {
                s.max = p.s_rh();
                s.at_max = p.at();
            }
            s.min = s.min.min(p.s_rh());
        }
        s
    }
}

/// Smallest κ/g ratio of one kind over a run; `ratio` is absent when the
/// coupling is never switched on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinRatio {
    pub kind: RatioKind,
    pub ratio: Option<f64>,
    /// First time attaining the minimum (0 for constant drives).
    pub at: f64,
    pub minimum: Option<f64>,
}

/// Per-kind minima of the κ/g ratios over the drive values at `times`.
pub fn min_ratios(params: &SystemParams, drives: &DriveSchedule, times: &[f64]) -> Vec<MinRatio> {
    let mut out: Vec<MinRatio> = RatioKind::ALL
        .iter()
        .map(|&kind| MinRatio { kind, ratio: None, at: 0.0, minimum: kind.minimum() })
        .collect();
    for &t in times {
        let rep = check_ratios(params, &drives.values(t), params.g0);
        for (slot, e) in out.iter_mut().zip(&rep.entries) {
            if e.ratio.is_finite() && slot.ratio.is_none_or(|r| e.ratio < r) {
                slot.ratio = Some(e.ratio);
                slot.at = t;
            }
        }
    }
    out
}

/// Index of the largest `E_N`, earliest on ties.
fn discrete_peak(points: &[EntanglementPoint]) -> usize {
    let mut best = 0;
    for (i, p) in points.iter().enumerate() {
        if p.e_n() > points[best].e_n() {
            best = i;
        }
    }
    best
}

/// Full damped evaluation of one pulse schedule.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PulseEvaluation {
    pub series: Vec<TimePoint>,
    pub peak_index: usize,
    pub stability: StabilitySummary,
    pub min_ratios: Vec<MinRatio>,
}

impl PulseEvaluation {
    pub fn peak(&self) -> &EntanglementPoint {
        &self.series[self.peak_index].point
    }

    pub fn is_stable(&self) -> bool {
        self.stability.max < 0.0
    }
}

/// Time series, peak, stability and ratio summary of a schedule.
pub fn evaluate_pulse_schedule(setup: &TimeSeriesSetup) -> Result<PulseEvaluation> {
    let pg = build_grid(setup.params, setup.drives, setup.grid, setup.cfg)?;
    let series = time_series_from_grid(setup, &pg)?;
    let points: Vec<EntanglementPoint> = series.iter().map(|p| p.point).collect();
    let peak_index = discrete_peak(&points);
    let stability = StabilitySummary::of(&points);
    let min_ratios = min_ratios(setup.params, setup.drives, &setup.grid.times());
    Ok(PulseEvaluation { series, peak_index, stability, min_ratios })
}

/// Counts of where trials dropped out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SearchStats {
    pub trials: u64,
    pub prescreen_rejected: u64,
    pub unstable: u64,
    /// Stable candidates whose evaluation hit a numerical failure.
    pub failed: u64,
    pub feasible: u64,
}

impl std::ops::Add for SearchStats {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self {
            trials: self.trials + o.trials,
            prescreen_rejected: self.prescreen_rejected + o.prescreen_rejected,
            unstable: self.unstable + o.unstable,
            failed: self.failed + o.failed,
            feasible: self.feasible + o.feasible,
        }
    }
}

/// Best feasible trial so far.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Best {
    trial: u64,
    e_n: f64,
}

impl Best {
    /// Higher score wins, then the earlier trial; associative and
    /// commutative, so any reduction order gives the same result.
    fn pick(a: Option<Best>, b: Option<Best>) -> Option<Best> {
        match (a, b) {
            (Some(x), Some(y)) => Some(if y.e_n > x.e_n || (y.e_n == x.e_n && y.trial < x.trial) { y } else { x }),
            (x, None) => x,
            (None, y) => y,
        }
    }
}

/// Per-trial outcome folded into the reduction.
type Partial = (Option<Best>, SearchStats);

fn reduce_trials(trials: u64, exec: Execution, eval: impl Fn(u64) -> Partial + Sync) -> Partial {
    let combine = |(a, sa): Partial, (b, sb): Partial| (Best::pick(a, b), sa + sb);
    let zero = || (None, SearchStats::default());
    match exec {
        Execution::Sequential => (0..trials).map(&eval).fold(zero(), combine),
        Execution::Parallel => (0..trials).into_par_iter().map(&eval).reduce(zero, combine),
    }
}

/// Which search produced a record.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SearchSettings {
    Pulse { space: PulseSearchSpace, grid: TimeGrid, trotter: TrotterConfig, policy: HermiticityPolicy },
    Spectral { space: SpectralSearchSpace, frequencies: FrequencyGrid, policy: HermiticityPolicy },
}

/// Peak of the winner's curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeakSummary {
    /// Time (s) or angular frequency (rad/s).
    pub at: f64,
    pub index: usize,
    pub e_n: f64,
    pub ent: f64,
}

impl PeakSummary {
    fn of(p: &EntanglementPoint, index: usize) -> Self {
        Self { at: p.at(), index, e_n: p.e_n(), ent: p.ent() }
    }
}

/// Everything needed to regenerate and re-evaluate a search winner.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WinnerRecord {
    pub version: u32,
    pub master_seed: u64,
    pub trial: u64,
    pub candidate: DriveSchedule,
    pub peak: PeakSummary,
    pub min_ratios: Vec<MinRatio>,
    pub stability: StabilitySummary,
    pub params: SystemParams,
    pub thermal: ThermalSpec,
    pub search: SearchConfig,
    pub settings: SearchSettings,
    pub stats: SearchStats,
}

impl WinnerRecord {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Config(format!("serializing winner: {e}")))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let r: Self = serde_json::from_str(s).map_err(|e| Error::Config(format!("winner record: {e}")))?;
        if r.version != RECORD_VERSION {
            return Err(Error::Config(format!("winner record version {} (expected {RECORD_VERSION})", r.version)));
        }
        Ok(r)
    }
}

/// Inputs shared by every trial of a pulse search.
#[derive(Debug, Clone, Copy)]
pub struct PulseSearchSetup<'a> {
    pub space: &'a PulseSearchSpace,
    pub params: &'a SystemParams,
    pub thermal: &'a ThermalSpec,
    /// Output times; its end should match the space's horizon.
    pub grid: &'a TimeGrid,
    pub cfg: &'a TrotterConfig,
    pub policy: HermiticityPolicy,
}

fn pulse_trial(setup: &PulseSearchSetup, search: &SearchConfig, trial: u64) -> Partial {
    let drives = pulse_candidate(setup.space, search.master_seed, trial);
    let mut stats = SearchStats { trials: 1, ..Default::default() };
    if search.stability_mode == StabilityMode::Prescreen {
        match prescreen_zero_damping(setup.params, &drives, setup.grid, search.prescreen_threshold) {
            Ok(true) => {}
            Ok(false) => {
                stats.prescreen_rejected = 1;
                return (None, stats);
            }
            Err(_) => {
                stats.failed = 1;
                return (None, stats);
            }
        }
    }
    match s_rh_until(setup.params, &drives, setup.grid, 0.0) {
        Ok(s) if s.len() == setup.grid.n_points && s.iter().all(|&x| x < 0.0) => {}
        Ok(_) => {
            stats.unstable = 1;
            return (None, stats);
        }
        Err(_) => {
            stats.failed = 1;
            return (None, stats);
        }
    }
    let ts = TimeSeriesSetup {
        params: setup.params,
        drives: &drives,
        thermal: setup.thermal,
        grid: setup.grid,
        cfg: setup.cfg,
        policy: setup.policy,
    };
    match evaluate_pulse_schedule(&ts) {
        Ok(ev) => {
            stats.feasible = 1;
            (Some(Best { trial, e_n: ev.peak().e_n() }), stats)
        }
        Err(_) => {
            stats.failed = 1;
            (None, stats)
        }
    }
}

/// Trapezoid-pulse random search. Each trial samples four pulses, passes
/// the configured stability filters and is scored by its discrete peak
/// `E_N`; the winner is re-evaluated for the record.
pub fn pulse_search(setup: &PulseSearchSetup, search: &SearchConfig, exec: Execution) -> Result<(WinnerRecord, PulseEvaluation)> {
    setup.space.validate()?;
    setup.params.validate()?;
    setup.thermal.validate()?;
    setup.grid.validate()?;
    setup.cfg.validate()?;
    search.validate()?;

    let (best, stats) = reduce_trials(search.trials, exec, |trial| pulse_trial(setup, search, trial));
    let best = best.ok_or(Error::NoFeasibleCandidate { trials: search.trials })?;
    let drives = pulse_candidate(setup.space, search.master_seed, best.trial);
    let ts = TimeSeriesSetup {
        params: setup.params,
        drives: &drives,
        thermal: setup.thermal,
        grid: setup.grid,
        cfg: setup.cfg,
        policy: setup.policy,
    };
    let ev = evaluate_pulse_schedule(&ts)?;
    let record = WinnerRecord {
        version: RECORD_VERSION,
        master_seed: search.master_seed,
        trial: best.trial,
        candidate: drives,
        peak: PeakSummary::of(ev.peak(), ev.peak_index),
        min_ratios: ev.min_ratios.clone(),
        stability: ev.stability,
        params: *setup.params,
        thermal: *setup.thermal,
        search: *search,
        settings: SearchSettings::Pulse { space: *setup.space, grid: *setup.grid, trotter: *setup.cfg, policy: setup.policy },
        stats,
    };
    Ok((record, ev))
}

/// Inputs shared by every trial of a constant-drive search.
#[derive(Debug, Clone, Copy)]
pub struct SpectralSearchSetup<'a> {
    pub space: &'a SpectralSearchSpace,
    pub params: &'a SystemParams,
    pub thermal: &'a ThermalSpec,
    pub frequencies: &'a FrequencyGrid,
    pub policy: HermiticityPolicy,
}

fn spectral_trial(setup: &SpectralSearchSetup, search: &SearchConfig, trial: u64) -> Partial {
    let drives = spectral_candidate(setup.space, search.master_seed, trial);
    let mut stats = SearchStats { trials: 1, ..Default::default() };
    match rh_metric(&assemble_from_values(setup.params, &drives)) {
        Ok(s) if s < 0.0 => {}
        Ok(_) => {
            stats.unstable = 1;
            return (None, stats);
        }
        Err(_) => {
            stats.failed = 1;
            return (None, stats);
        }
    }
    match entanglement_spectrum(setup.params, &drives, setup.thermal, setup.frequencies, setup.policy) {
        Ok(sp) => {
            stats.feasible = 1;
            (Some(Best { trial, e_n: sp.peak.e_n() }), stats)
        }
        Err(_) => {
            stats.failed = 1;
            (None, stats)
        }
    }
}

/// Constant-drive random search scored by the peak of the filtered
/// entanglement spectrum. Only RH-stable draws are evaluated.
pub fn spectral_search(setup: &SpectralSearchSetup, search: &SearchConfig, exec: Execution) -> Result<(WinnerRecord, Spectrum)> {
    setup.space.validate(setup.params.g0)?;
    setup.params.validate()?;
    setup.thermal.validate()?;
    setup.frequencies.validate()?;
    search.validate()?;

    let (best, stats) = reduce_trials(search.trials, exec, |trial| spectral_trial(setup, search, trial));
    let best = best.ok_or(Error::NoFeasibleCandidate { trials: search.trials })?;
    let drives = spectral_candidate(setup.space, search.master_seed, best.trial);
    let sp = entanglement_spectrum(setup.params, &drives, setup.thermal, setup.frequencies, setup.policy)?;
    let index = sp.points.iter().position(|p| *p == sp.peak).unwrap_or(0);
    let schedule = DriveSchedule::constant(drives);
    let record = WinnerRecord {
        version: RECORD_VERSION,
        master_seed: search.master_seed,
        trial: best.trial,
        candidate: schedule,
        peak: PeakSummary::of(&sp.peak, index),
        min_ratios: min_ratios(setup.params, &schedule, &[0.0]),
        stability: StabilitySummary::of(&sp.points),
        params: *setup.params,
        thermal: *setup.thermal,
        search: *search,
        settings: SearchSettings::Spectral { space: *setup.space, frequencies: *setup.frequencies, policy: setup.policy },
        stats,
    };
    Ok((record, sp))
}

/// One curve of a thermal sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepCurve {
    pub n_th: f64,
    pub points: Vec<EntanglementPoint>,
    pub peak: EntanglementPoint,
}

impl SweepCurve {
    fn new(n_th: f64, points: Vec<EntanglementPoint>) -> Self {
        let peak = points[discrete_peak(&points)];
        Self { n_th, points, peak }
    }
}

/// Re-evaluates a pulse schedule for each mechanical-bath occupation. The
/// propagators do not depend on the baths and are built once.
pub fn thermal_sweep_time(setup: &TimeSeriesSetup, n_th: &[f64]) -> Result<Vec<SweepCurve>> {
    let pg = build_grid(setup.params, setup.drives, setup.grid, setup.cfg)?;
    n_th.iter()
        .map(|&n| {
            let thermal = ThermalSpec { n_th: n, ..*setup.thermal };
            let s = TimeSeriesSetup { thermal: &thermal, ..*setup };
            let series = time_series_from_grid(&s, &pg)?;
            Ok(SweepCurve::new(n, series.into_iter().map(|p| p.point).collect()))
        })
        .collect()
}

/// Filtered-spectrum counterpart of [`thermal_sweep_time`].
pub fn thermal_sweep_spectral(
    params: &SystemParams,
    drives: &DriveValues,
    thermal: &ThermalSpec,
    frequencies: &FrequencyGrid,
    policy: HermiticityPolicy,
    n_th: &[f64],
) -> Result<Vec<SweepCurve>> {
    n_th.iter()
        .map(|&n| {
            let th = ThermalSpec { n_th: n, ..*thermal };
            let sp = entanglement_spectrum(params, drives, &th, frequencies, policy)?;
            Ok(SweepCurve::new(n, sp.points))
        })
        .collect()
}

/// Thermal sweep of a recorded winner under its own settings.
pub fn thermal_sweep(record: &WinnerRecord, n_th: &[f64]) -> Result<Vec<SweepCurve>> {
    match &record.settings {
        SearchSettings::Pulse { grid, trotter, policy, .. } => {
            let setup = TimeSeriesSetup {
                params: &record.params,
                drives: &record.candidate,
                thermal: &record.thermal,
                grid,
                cfg: trotter,
                policy: *policy,
            };
            thermal_sweep_time(&setup, n_th)
        }
        SearchSettings::Spectral { frequencies, policy, .. } => {
            let drives = record
                .candidate
                .as_constant()
                .ok_or_else(|| Error::Config("spectral record holds a time-dependent candidate".into()))?;
            thermal_sweep_spectral(&record.params, &drives, &record.thermal, frequencies, *policy, n_th)
        }
    }
}

/// Regenerates the candidate from seed and trial index and evaluates it
/// again; returns the peak summary.
pub fn reevaluate(record: &WinnerRecord) -> Result<PeakSummary> {
    match &record.settings {
        SearchSettings::Pulse { space, grid, trotter, policy } => {
            let drives = pulse_candidate(space, record.master_seed, record.trial);
            let setup = TimeSeriesSetup {
                params: &record.params,
                drives: &drives,
                thermal: &record.thermal,
                grid,
                cfg: trotter,
                policy: *policy,
            };
            let ev = evaluate_pulse_schedule(&setup)?;
            Ok(PeakSummary::of(ev.peak(), ev.peak_index))
        }
        SearchSettings::Spectral { space, frequencies, policy } => {
            let drives = spectral_candidate(space, record.master_seed, record.trial);
            let sp = entanglement_spectrum(&record.params, &drives, &record.thermal, frequencies, *policy)?;
            let index = sp.points.iter().position(|p| *p == sp.peak).unwrap_or(0);
            Ok(PeakSummary::of(&sp.peak, index))
        }
    }
}
