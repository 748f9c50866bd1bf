// Copyright 2026 The om-entangle Authors
// SPDX-License-Identifier: Apache-2.0

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::json;

use om_entangle::config::{params_document, ParamsPreset, RunConfig, SweepDomain};
use om_entangle::covariance::TimeSeriesSetup;
use om_entangle::io;
use om_entangle::model::stability_scan as scan_surface;
use om_entangle::params::{check_ratios, derive_params_with_g0, SystemParams, G0};
use om_entangle::search::{
    evaluate_pulse_schedule, pulse_search, spectral_search, thermal_sweep_spectral, thermal_sweep_time, Execution,
    PulseSearchSetup, SearchSettings, SpectralSearchSetup, SweepCurve, WinnerRecord,
};
use om_entangle::spectral::entanglement_spectrum;
use om_entangle::Error;

type Result<T> = std::result::Result<T, Error>;

/// Manifest written next to every command's outputs.
#[derive(Debug, Serialize)]
struct RunManifest<'a> {
    subcommand: &'a str,
    version: &'a str,
    master_seed: u64,
    workers: usize,
    config: &'a RunConfig,
    params: Option<SystemParams>,
    outputs: Vec<String>,
    started_unix_s: u64,
    wall_clock_s: f64,
}

pub struct Context {
    name: &'static str,
    cfg: RunConfig,
    out: PathBuf,
    workers: usize,
    started: Instant,
    started_unix_s: u64,
    outputs: Vec<String>,
    params: Option<SystemParams>,
}

impl Context {
    pub fn new(name: &'static str, cfg: RunConfig, out: PathBuf, workers: usize) -> Result<Self> {
        let started_unix_s = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        Ok(Self { name, cfg, out, workers, started: Instant::now(), started_unix_s, outputs: Vec::new(), params: None })
    }

    fn params(&mut self, preset: ParamsPreset) -> Result<SystemParams> {
        let p = self.cfg.params.resolve(preset)?;
        self.params = Some(p);
        Ok(p)
    }

    fn create(&mut self, name: &str) -> Result<BufWriter<File>> {
        std::fs::create_dir_all(&self.out)?;
        let f = File::create(self.out.join(name))?;
        self.outputs.push(name.to_owned());
        Ok(BufWriter::new(f))
    }

    fn write_json(&mut self, name: &str, value: &impl Serialize) -> Result<()> {
        let mut w = self.create(name)?;
        serde_json::to_writer_pretty(&mut w, value)?;
        writeln!(w)?;
        w.flush()?;
        Ok(())
    }

    fn write_with(&mut self, name: &str, f: impl FnOnce(&mut BufWriter<File>) -> Result<()>) -> Result<()> {
        let mut w = self.create(name)?;
        f(&mut w)?;
        w.flush()?;
        Ok(())
    }

    fn finish(mut self) -> Result<()> {
        let outputs = std::mem::take(&mut self.outputs);
        let manifest = RunManifest {
            subcommand: self.name,
            version: env!("CARGO_PKG_VERSION"),
            master_seed: self.cfg.search.master_seed,
            workers: self.workers,
            config: &self.cfg,
            params: self.params,
            outputs,
            started_unix_s: self.started_unix_s,
            wall_clock_s: self.started.elapsed().as_secs_f64(),
        };
        let mut w = BufWriter::new(File::create(self.out.join("manifest.json"))?);
        serde_json::to_writer_pretty(&mut w, &manifest)?;
        writeln!(w)?;
        w.flush()?;
        Ok(())
    }
}

pub fn derive_params(mut ctx: Context, g0: Option<f64>) -> Result<()> {
    let p = derive_params_with_g0(g0.unwrap_or(G0)).map_err(|e| Error::Config(e.to_string()))?;
    ctx.params = Some(p);
    let doc = params_document(&p)?;
    ctx.write_with("params.toml", |w| Ok(w.write_all(doc.as_bytes())?))?;
    ctx.finish()
}

pub fn stability_scan(mut ctx: Context) -> Result<()> {
    let p = ctx.params(ParamsPreset::StabilityScan)?;
    let grid = ctx.cfg.scan.grid(p.g0)?;
    let scan = scan_surface(&p, ctx.cfg.scan.r, &grid)?;
    let best = scan.best;
    let summary = json!({
        "min_s_rh": best.s_rh,
        "argmin": { "g_o1": best.g_o1, "g_o2": best.g_o2, "g_o1_over_g0": best.g_o1 / p.g0, "g_o2_over_g0": best.g_o2 / p.g0 },
        "stable": scan.has_stable_point(),
        "status": if scan.has_stable_point() { "stable point found" } else { "no stable point" },
        "r": ctx.cfg.scan.r,
        "g_mw1": scan.g_mw1,
        "g_mw2": scan.g_mw2,
        "points": scan.points.len(),
        "ratios": check_ratios(&p, &scan.best_drives(), p.g0),
    });
    ctx.write_with("stability_scan.csv", |w| io::write_stability_scan(w, &scan))?;
    ctx.write_json("summary.json", &summary)?;
    ctx.finish()
}

pub fn simulate(mut ctx: Context) -> Result<()> {
    let p = ctx.params(ParamsPreset::PulseSearch)?;
    let drives = ctx.cfg.drives();
    let grid = ctx.cfg.time_grid()?;
    let setup = TimeSeriesSetup {
        params: &p,
        drives: &drives,
        thermal: &ctx.cfg.thermal,
        grid: &grid,
        cfg: &ctx.cfg.trotter,
        policy: ctx.cfg.evaluation.policy,
    };
    let ev = evaluate_pulse_schedule(&setup)?;
    let peak = ev.peak();
    let summary = json!({
        "peak": { "t": peak.at(), "index": ev.peak_index, "e_n": peak.e_n(), "ent": peak.ent() },
        "stable": ev.is_stable(),
        "stability": ev.stability,
        "min_ratios": ev.min_ratios,
        "n_points": ev.series.len(),
        "trotter": ctx.cfg.trotter,
    });
    ctx.write_with("time_series.csv", |w| io::write_time_series(w, &ev.series))?;
    ctx.write_json("summary.json", &summary)?;
    ctx.finish()
}

fn constant_drives(cfg: &RunConfig) -> Result<om_entangle::model::DriveValues> {
    cfg.drives()
        .as_constant()
        .ok_or_else(|| Error::Config("this command needs constant drives in [drives]".into()))
}

pub fn spectral(mut ctx: Context) -> Result<()> {
    let p = ctx.params(ParamsPreset::PulseSearch)?;
    let drives = constant_drives(&ctx.cfg)?;
    let sp = entanglement_spectrum(&p, &drives, &ctx.cfg.thermal, &ctx.cfg.frequencies, ctx.cfg.evaluation.policy)?;
    let summary = json!({
        "peak": { "omega_rad_s": sp.peak.at(), "e_n": sp.peak.e_n(), "ent": sp.peak.ent() },
        "refined_peak": { "omega_rad_s": sp.refined_peak.at(), "e_n": sp.refined_peak.e_n(), "ent": sp.refined_peak.ent() },
        "s_rh": sp.s_rh,
        "stable": sp.s_rh < 0.0,
        "drives": drives,
        "ratios": check_ratios(&p, &drives, p.g0),
    });
    ctx.write_with("spectrum.csv", |w| io::write_spectrum(w, &sp.points))?;
    ctx.write_json("summary.json", &summary)?;
    ctx.finish()
}

pub fn search_pulses(mut ctx: Context) -> Result<()> {
    let p = ctx.params(ParamsPreset::PulseSearch)?;
    let space = ctx.cfg.pulse_space(p.g0);
    // the search runs over the space's own horizon
    let grid = om_entangle::propagator::TimeGrid::new(space.horizon, ctx.cfg.time.n_points)
        .map_err(|e| Error::Config(e.to_string()))?;
    let setup = PulseSearchSetup {
        space: &space,
        params: &p,
        thermal: &ctx.cfg.thermal,
        grid: &grid,
        cfg: &ctx.cfg.trotter,
        policy: ctx.cfg.evaluation.policy,
    };
    let (record, ev) = pulse_search(&setup, &ctx.cfg.search.config(), Execution::Parallel)?;
    ctx.write_with("winner_time_series.csv", |w| io::write_time_series(w, &ev.series))?;
    ctx.write_json("winner.json", &record)?;
    ctx.finish()
}

pub fn search_spectral(mut ctx: Context) -> Result<()> {
    let p = ctx.params(ParamsPreset::PulseSearch)?;
    let space = ctx.cfg.spectral_space(p.g0);
    let setup = SpectralSearchSetup {
        space: &space,
        params: &p,
        thermal: &ctx.cfg.thermal,
        frequencies: &ctx.cfg.frequencies,
        policy: ctx.cfg.evaluation.policy,
    };
    let (record, sp) = spectral_search(&setup, &ctx.cfg.search.config(), Execution::Parallel)?;
    ctx.write_with("winner_spectrum.csv", |w| io::write_spectrum(w, &sp.points))?;
    ctx.write_json("winner.json", &record)?;
    ctx.finish()
}

fn read_record(path: &Path) -> Result<WinnerRecord> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("reading {}: {e}", path.display())))?;
    WinnerRecord::from_json(&text)
}

fn sweep_summary(curves: &[SweepCurve]) -> serde_json::Value {
    let rows: Vec<_> = curves
        .iter()
        .map(|c| json!({ "n_th": c.n_th, "peak_at": c.peak.at(), "peak_e_n": c.peak.e_n(), "peak_ent": c.peak.ent() }))
        .collect();
    json!({ "curves": rows })
}

pub fn thermal_sweep(mut ctx: Context, winner: Option<&Path>) -> Result<()> {
    let n_th = ctx.cfg.sweep.n_th.clone();
    let (axis, curves) = match winner {
        Some(path) => {
            let rec = read_record(path)?;
            ctx.params = Some(rec.params);
            let axis = match rec.settings {
                SearchSettings::Pulse { .. } => "t",
                SearchSettings::Spectral { .. } => "omega_rad_s",
            };
            (axis, om_entangle::search::thermal_sweep(&rec, &n_th)?)
        }
        None => {
            let p = ctx.params(ParamsPreset::PulseSearch)?;
            let drives = ctx.cfg.drives();
            let spectral = match ctx.cfg.sweep.domain {
                SweepDomain::Auto => drives.as_constant().is_some(),
                SweepDomain::Time => false,
                SweepDomain::Spectral => true,
            };
            if spectral {
                let v = constant_drives(&ctx.cfg)?;
                let c = thermal_sweep_spectral(&p, &v, &ctx.cfg.thermal, &ctx.cfg.frequencies, ctx.cfg.evaluation.policy, &n_th)?;
                ("omega_rad_s", c)
            } else {
                let grid = ctx.cfg.time_grid()?;
                let setup = TimeSeriesSetup {
                    params: &p,
                    drives: &drives,
                    thermal: &ctx.cfg.thermal,
                    grid: &grid,
                    cfg: &ctx.cfg.trotter,
                    policy: ctx.cfg.evaluation.policy,
                };
                ("t", thermal_sweep_time(&setup, &n_th)?)
            }
        }
    };
    ctx.write_with("thermal_sweep.csv", |w| io::write_sweep(w, axis, &curves))?;
    ctx.write_json("summary.json", &sweep_summary(&curves))?;
    ctx.finish()
}
