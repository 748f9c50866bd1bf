// Copyright 2026 The om-entangle Authors
// SPDX-License-Identifier: Apache-2.0

//! TOML run configuration with one flat section per concern. Every section
//! is optional; missing values fall back to the documented defaults.
//!
//! ```toml
//! [params]
//! preset = "pulse_search"      # reference | stability_scan | pulse_search
//! g0 = 5.654866776461628e6     # rescales every damping strength
//!
//! [time]
//! t_end = 1e-7
//! n_points = 1000
//!
//! [drives]
//! g_mw1 = { constant = 1.219e8 }
//! g_mw2 = { trapezoid = { t_start = 1e-8, rise = 5e-9, plateau = 2e-8, fall = 5e-9, h_peak = 3e8, h_end = 1e8 } }
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::covariance::HermiticityPolicy;
use crate::error::{Error, Result};
use crate::model::{DriveSchedule, ScanGrid};
use crate::params::{
    derive_params_with_g0, reference_table, DampingProfile, PerMode, SystemParams, ThermalSpec, DISPLAYED_CONV_C, G0,
};
use crate::propagator::{TimeGrid, TrotterConfig};
use crate::search::{
    PulseSearchSpace, SearchConfig, SpectralSearchSpace, StabilityMode, DEFAULT_SEED, DEFAULT_TRIALS,
};
use crate::spectral::{FrequencyGrid, REFERENCE_DRIVES};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamsPreset {
    Reference,
    StabilityScan,
    PulseSearch,
}

impl ParamsPreset {
    fn damping(self) -> DampingProfile {
        match self {
            ParamsPreset::Reference => DampingProfile::reference(),
            ParamsPreset::StabilityScan => DampingProfile::stability_scan(),
            ParamsPreset::PulseSearch => DampingProfile::pulse_search(),
        }
    }
}

/// A preset with optional overrides, applied in the order `g0`, `conv_c`,
/// preset damping, `kappa`, `g_f`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParamsSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preset: Option<ParamsPreset>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub g0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub conv_c: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub g_f: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa: Option<PerMode>,
}

impl ParamsSection {
    /// Every field spelled out, so the section reloads to `p` exactly.
    pub fn explicit(p: &SystemParams, preset: ParamsPreset) -> Self {
        Self { preset: Some(preset), g0: Some(p.g0), conv_c: Some(p.conv_c), g_f: Some(p.g_f), kappa: Some(p.kappa) }
    }

    pub fn resolve(&self, default_preset: ParamsPreset) -> Result<SystemParams> {
        let preset = self.preset.unwrap_or(default_preset);
        let mut p = derive_params_with_g0(self.g0.unwrap_or(G0))?;
        // the search presets use the displayed conversion factor unless g0 is
        // moved away from its reference value
        let conv_c = match (self.conv_c, preset, self.g0) {
            (Some(c), _, _) => c,
            (None, ParamsPreset::PulseSearch, None) => DISPLAYED_CONV_C,
            _ => p.conv_c,
        };
        p = p.with_conv_c(conv_c).with_damping(&preset.damping());
        if let Some(k) = self.kappa {
            p.kappa = k;
        }
        if let Some(g) = self.g_f {
            p.g_f = g;
        }
        p.validate().map_err(|e| Error::Config(format!("[params]: {e}")))?;
        Ok(p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvaluationSection {
    pub policy: HermiticityPolicy,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TimeSection {
    pub t_end: f64,
    pub n_points: usize,
}

impl Default for TimeSection {
    fn default() -> Self {
        Self { t_end: 100e-9, n_points: 1000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanSpacing {
    #[default]
    Log,
    Linear,
}

/// Square grid of optical couplings in units of `g0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScanSection {
    pub r: f64,
    pub lo_g0: f64,
    pub hi_g0: f64,
    pub points: usize,
    pub spacing: ScanSpacing,
}

impl Default for ScanSection {
    fn default() -> Self {
        Self { r: 3.85, lo_g0: 1.0, hi_g0: 100.0, points: 100, spacing: ScanSpacing::Log }
    }
}

impl ScanSection {
    pub fn grid(&self, g0: f64) -> Result<ScanGrid> {
        let (lo, hi) = (self.lo_g0 * g0, self.hi_g0 * g0);
        if !(lo > 0.0 && hi >= lo && hi.is_finite()) || self.points == 0 {
            return Err(Error::Config(format!("[scan]: need 0 < lo_g0 <= hi_g0 and points >= 1, got {self:?}")));
        }
        Ok(match self.spacing {
            ScanSpacing::Log => ScanGrid::log_spaced(lo, hi, self.points),
            ScanSpacing::Linear => ScanGrid::linear(lo, hi, self.points),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchSection {
    pub master_seed: u64,
    pub trials: u64,
    pub prescreen_threshold: f64,
    pub stability_mode: StabilityMode,
}

impl Default for SearchSection {
    fn default() -> Self {
        let c = SearchConfig::new(DEFAULT_SEED, DEFAULT_TRIALS);
        Self {
            master_seed: c.master_seed,
            trials: c.trials,
            prescreen_threshold: c.prescreen_threshold,
            stability_mode: c.stability_mode,
        }
    }
}

impl SearchSection {
    pub fn config(&self) -> SearchConfig {
        SearchConfig {
            master_seed: self.master_seed,
            trials: self.trials,
            prescreen_threshold: self.prescreen_threshold,
            stability_mode: self.stability_mode,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepDomain {
    /// Frequency domain for constant drives, time domain otherwise.
    #[default]
    Auto,
    Time,
    Spectral,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub n_th: Vec<f64>,
    pub domain: SweepDomain,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self { n_th: vec![0.0, 1e1, 1e2, 1e3, 1e4, 1e5, 1e6], domain: SweepDomain::Auto }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub params: ParamsSection,
    pub thermal: ThermalSpec,
    pub evaluation: EvaluationSection,
    pub time: TimeSection,
    pub trotter: TrotterConfig,
    /// Drive schedule for single evaluations; the reference constant drives
    /// when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub drives: Option<DriveSchedule>,
    pub frequencies: FrequencyGrid,
    pub scan: ScanSection,
    pub search: SearchSection,
    /// `[0, 110 g0]`-style defaults derived from `g0` when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pulse_space: Option<PulseSearchSpace>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spectral_space: Option<SpectralSearchSpace>,
    pub sweep: SweepSection,
}

impl RunConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        Ok(toml::from_str(s)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("reading {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    pub fn time_grid(&self) -> Result<TimeGrid> {
        TimeGrid::new(self.time.t_end, self.time.n_points).map_err(|e| Error::Config(format!("[time]: {e}")))
    }

    pub fn drives(&self) -> DriveSchedule {
        self.drives.unwrap_or_else(|| DriveSchedule::constant(REFERENCE_DRIVES))
    }

    pub fn pulse_space(&self, g0: f64) -> PulseSearchSpace {
        self.pulse_space.unwrap_or_else(|| PulseSearchSpace::default_for(g0))
    }

    pub fn spectral_space(&self, g0: f64) -> SpectralSearchSpace {
        self.spectral_space.unwrap_or_else(|| SpectralSearchSpace::default_for(g0))
    }

    /// Checks the sections that need no parameter resolution.
    pub fn validate(&self) -> Result<()> {
        let cfg = |e: Error| Error::Config(e.to_string());
        self.thermal.validate().map_err(cfg)?;
        self.time_grid()?;
        self.trotter.validate().map_err(cfg)?;
        self.frequencies.validate().map_err(cfg)?;
        if let Some(d) = &self.drives {
            d.validate().map_err(cfg)?;
        }
        if let Some(s) = &self.pulse_space {
            s.validate()?;
        }
        self.search.config().validate()?;
        if self.sweep.n_th.iter().any(|n| !(n.is_finite() && *n >= 0.0)) {
            return Err(Error::Config("[sweep]: occupations must be finite and >= 0".into()));
        }
        Ok(())
    }
}

/// Parameter file as written by `derive-params`: a comment block with the
/// reference table, then a `[params]` section that reloads exactly.
pub fn params_document(p: &SystemParams) -> Result<String> {
    #[derive(Serialize)]
    struct Doc {
        params: ParamsSection,
    }
    let mut out = String::from("# kind  kappa (rad/s)  g (rad/s)\n");
    for row in reference_table(p) {
        out.push_str(&format!("# {:<4}  {:.3e}  {:.3e}\n", row.kind, row.kappa, row.g));
    }
    out.push_str(&format!("# C = {:.3e} rad/s per reference unit\n\n", p.conv_c));
    out.push_str(&toml::to_string(&Doc { params: ParamsSection::explicit(p, ParamsPreset::Reference) })?);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Drive, TrapezoidPulse};
    use crate::params::{derive_reference_params, pulse_search_params, stability_scan_params};

    #[test]
    fn empty_config_gives_defaults() {
        let c = RunConfig::from_toml_str("").unwrap();
        assert_eq!(c, RunConfig::default());
        assert_eq!(c.params.resolve(ParamsPreset::PulseSearch).unwrap(), pulse_search_params());
        assert_eq!(c.params.resolve(ParamsPreset::StabilityScan).unwrap(), stability_scan_params());
        assert_eq!(c.params.resolve(ParamsPreset::Reference).unwrap(), derive_reference_params());
        assert_eq!(c.time_grid().unwrap().n_points, 1000);
        assert_eq!(c.search.config(), SearchConfig::new(DEFAULT_SEED, DEFAULT_TRIALS));
        c.validate().unwrap();
    }

    #[test]
    fn sections_parse() {
        let text = r#"
            [params]
            preset = "reference"
            g0 = 1e7

            [thermal]
            n_th = 1e3

            [time]
            t_end = 5e-8
            n_points = 11

            [drives]
            g_mw1 = { constant = 1.0e8 }
            g_mw2 = { constant = 0.0 }
            g_o1 = { trapezoid = { t_start = 1e-9, rise = 2e-9, plateau = 3e-9, fall = 4e-9, h_peak = 5e8, h_end = 1e8 } }
            g_o2 = { constant = 2.5e8 }

            [search]
            master_seed = 42
            trials = 7
            stability_mode = "strict"
        "#;
        let c = RunConfig::from_toml_str(text).unwrap();
        c.validate().unwrap();
        let p = c.params.resolve(ParamsPreset::PulseSearch).unwrap();
        assert_eq!(p, derive_params_with_g0(1e7).unwrap());
        assert_eq!(c.thermal.n_th, 1e3);
        let d = c.drives();
        assert_eq!(d.g_o1, Drive::Trapezoid(TrapezoidPulse::new(1e-9, 2e-9, 3e-9, 4e-9, 5e8, 1e8)));
        assert_eq!(c.search.config().master_seed, 42);
        assert_eq!(c.search.stability_mode, StabilityMode::Strict);
        let back = RunConfig::from_toml_str(&c.to_toml_string().unwrap()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(matches!(RunConfig::from_toml_str("[time]\nt_stop = 1.0\n"), Err(Error::Config(_))));
        assert!(RunConfig::from_toml_str("[nonsense]\n").is_err());
    }

    #[test]
    fn invalid_values_rejected() {
        let c = RunConfig::from_toml_str("[time]\nn_points = 1\n").unwrap();
        assert!(matches!(c.validate(), Err(Error::Config(_))));
        let c = RunConfig::from_toml_str("[params]\ng0 = -1.0\n").unwrap();
        assert!(c.params.resolve(ParamsPreset::Reference).is_err());
        let c = RunConfig::from_toml_str("[search]\ntrials = 0\n").unwrap();
        assert!(c.validate().is_err());
    }

    #[test]
    fn params_document_round_trips() {
        for p in [derive_reference_params(), derive_params_with_g0(2.5e7).unwrap()] {
            let doc = params_document(&p).unwrap();
            let c = RunConfig::from_toml_str(&doc).unwrap();
            assert_eq!(c.params.resolve(ParamsPreset::PulseSearch).unwrap(), p);
        }
    }
}
