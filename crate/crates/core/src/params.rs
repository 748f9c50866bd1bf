// Copyright 2026 The om-entangle Authors
// SPDX-License-Identifier: Apache-2.0

//! Physical parameter values: damping strengths, fiber and laser couplings,
//! unit conversion from dimensionless reference units, achievability of
//! damping-to-driving ratios and thermal occupations.
//!
//! All rates are angular (rad/s). Damping strengths `κ_k` enter the
//! dynamics matrix as `−iκ_k/2` and the noise matrix as `K = κ/2π`.

use std::f64::consts::PI;
use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{DriveValues, Mode};

/// CODATA 2018 values; exact in SI for `c` and `k_B`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    /// Speed of light in vacuum, m/s.
    pub c_light: f64,
    /// Reduced Planck constant, J·s.
    pub hbar: f64,
    /// Boltzmann constant, J/K.
    pub k_b: f64,
}

pub const CODATA: PhysicalConstants = PhysicalConstants {
    c_light: 299_792_458.0,
    hbar: 1.054_571_817e-34,
    k_b: 1.380_649e-23,
};

/// Achievable minimum κ/g for the microwave cavities.
pub const MIN_RATIO_MW: f64 = 0.1;
/// Achievable minimum κ/g for the optical cavities.
pub const MIN_RATIO_O: f64 = 0.5;
/// Achievable minimum κ/g for the mechanical oscillators.
pub const MIN_RATIO_M: f64 = 3.33e-4;

/// Reference-unit damping values `κ^L` and the reference coupling `g0^L`.
pub const REF_KAPPA_MW: f64 = 0.3;
pub const REF_KAPPA_O: f64 = 0.2;
pub const REF_KAPPA_M: f64 = 0.001;
pub const REF_G0: f64 = 3.0;

/// Unenhanced laser coupling, `2π × 0.9 MHz`.
pub const G0: f64 = 2.0 * PI * 9.0e5;
/// Fiber damping, `2π × 100 MHz`.
pub const KAPPA_FIBER: f64 = 2.0 * PI * 1.0e8;
/// Fiber length used for the fiber coupling, m.
pub const FIBER_LENGTH: f64 = 1.0;
/// Displayed (3 s.f.) unit-conversion factor. The reference filtered-winner
/// ratios are only reproduced to 4 s.f. with this rounded value.
pub const DISPLAYED_CONV_C: f64 = 1.88e6;
/// Optical coupling listed in the reference table, stored verbatim. It is
/// not reproducible from the reference-unit values (see [`reachable_coupling`]).
pub const TABLE_G_O: f64 = 7.53e5;

/// One value per primary mode, in the fixed mode order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct PerMode {
    pub o1: f64,
    pub m1: f64,
    pub mw1: f64,
    pub f: f64,
    pub o2: f64,
    pub m2: f64,
    pub mw2: f64,
}

impl PerMode {
    pub fn splat(x: f64) -> Self {
        Self::from_array([x; 7])
    }

    pub fn from_array(a: [f64; 7]) -> Self {
        Self { o1: a[0], m1: a[1], mw1: a[2], f: a[3], o2: a[4], m2: a[5], mw2: a[6] }
    }

    pub fn to_array(&self) -> [f64; 7] {
        [self.o1, self.m1, self.mw1, self.f, self.o2, self.m2, self.mw2]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self::from_array(self.to_array().map(f))
    }
}

impl Index<Mode> for PerMode {
    type Output = f64;
    fn index(&self, mode: Mode) -> &f64 {
        match mode {
            Mode::Optical1 => &self.o1,
            Mode::Mechanical1 => &self.m1,
            Mode::Microwave1 => &self.mw1,
            Mode::Fiber => &self.f,
            Mode::Optical2 => &self.o2,
            Mode::Mechanical2 => &self.m2,
            Mode::Microwave2Dag => &self.mw2,
        }
    }
}

impl IndexMut<Mode> for PerMode {
    fn index_mut(&mut self, mode: Mode) -> &mut f64 {
        match mode {
            Mode::Optical1 => &mut self.o1,
            Mode::Mechanical1 => &mut self.m1,
            Mode::Microwave1 => &mut self.mw1,
            Mode::Fiber => &mut self.f,
            Mode::Optical2 => &mut self.o2,
            Mode::Mechanical2 => &mut self.m2,
            Mode::Microwave2Dag => &mut self.mw2,
        }
    }
}

/// Damping strengths and fixed couplings of the seven-mode system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    /// Damping strength per mode, rad/s.
    pub kappa: PerMode,
    /// Fiber coupling, rad/s.
    pub g_f: f64,
    /// Unenhanced laser coupling, rad/s.
    pub g0: f64,
    /// Unit conversion, rad/s per reference unit.
    pub conv_c: f64,
}

impl SystemParams {
    pub fn validate(&self) -> Result<()> {
        for (i, k) in self.kappa.to_array().iter().enumerate() {
            if !(k.is_finite() && *k >= 0.0) {
                return Err(Error::domain(format!("kappa[{}] = {k} must be finite and >= 0", i + 1)));
            }
        }
        for (name, v) in [("g_f", self.g_f), ("g0", self.g0), ("conv_c", self.conv_c)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::domain(format!("{name} = {v} must be finite and > 0")));
            }
        }
        Ok(())
    }

    /// Diagonal of the noise matrix `K = κ/2π`.
    pub fn k_diag(&self) -> [f64; 7] {
        self.kappa.to_array().map(|k| k / (2.0 * PI))
    }

    /// Same couplings, every damping strength set to zero.
    pub fn undamped(&self) -> Self {
        Self { kappa: PerMode::default(), ..*self }
    }

    /// Replace the cavity and mechanical damping with multiples of `conv_c`.
    pub fn with_damping(&self, profile: &DampingProfile) -> Self {
        let c = self.conv_c;
        let kappa = PerMode {
            o1: profile.o1 * c,
            m1: profile.m1 * c,
            mw1: profile.mw1 * c,
            f: self.kappa.f,
            o2: profile.o2 * c,
            m2: profile.m2 * c,
            mw2: profile.mw2 * c,
        };
        Self { kappa, ..*self }
    }

    pub fn with_conv_c(&self, conv_c: f64) -> Self {
        Self { conv_c, ..*self }
    }
}

/// Damping strengths in units of the conversion factor `C`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DampingProfile {
    pub o1: f64,
    pub m1: f64,
    pub mw1: f64,
    pub o2: f64,
    pub m2: f64,
    pub mw2: f64,
}

impl DampingProfile {
    pub fn symmetric(mw: f64, o: f64, m: f64) -> Self {
        Self { o1: o, m1: m, mw1: mw, o2: o, m2: m, mw2: mw }
    }

    /// Reference-unit damping (`κ^L`), identical on both sides.
    pub fn reference() -> Self {
        Self::symmetric(REF_KAPPA_MW, REF_KAPPA_O, REF_KAPPA_M)
    }

    /// Heavier damping used for the static stability scan; the second optical
    /// cavity is 2.5 times more damped than the first.
    pub fn stability_scan() -> Self {
        Self { o2: 150.0, ..Self::symmetric(20.0, 60.0, 0.001) }
    }

    /// Damping of the pulse search and the frequency-filtered search.
    pub fn pulse_search() -> Self {
        Self::symmetric(0.8, 0.9, 0.001)
    }
}

/// `C = g0 / g0^L`.
pub fn unit_conversion(g0: f64, g0_ref: f64) -> Result<f64> {
    if !(g0 > 0.0 && g0_ref > 0.0) {
        return Err(Error::domain(format!("unit_conversion needs g0 > 0 and g0_L > 0, got {g0}, {g0_ref}")));
    }
    Ok(g0 / g0_ref)
}

/// Fiber coupling `2πc√2 / l`.
pub fn fiber_coupling(length: f64) -> f64 {
    2.0 * PI * CODATA.c_light * 2f64.sqrt() / length
}

/// Reference parameter set, identical on both sides of the fiber.
pub fn derive_reference_params() -> SystemParams {
    derive_params_with_g0(G0).expect("G0 is positive")
}

/// Reference parameter set for an arbitrary unenhanced coupling. Every
/// damping strength is linear in `g0` through `κ = κ^L · C`.
pub fn derive_params_with_g0(g0: f64) -> Result<SystemParams> {
    let conv_c = unit_conversion(g0, REF_G0)?;
    let base = SystemParams {
        kappa: PerMode { f: KAPPA_FIBER, ..PerMode::default() },
        g_f: fiber_coupling(FIBER_LENGTH),
        g0,
        conv_c,
    };
    Ok(base.with_damping(&DampingProfile::reference()))
}

/// Static scan parameters: reference couplings with the heavier damping.
pub fn stability_scan_params() -> SystemParams {
    derive_reference_params().with_damping(&DampingProfile::stability_scan())
}

/// Damping of the pulse and frequency-filtered searches, built on the
/// displayed conversion factor.
pub fn pulse_search_params() -> SystemParams {
    derive_reference_params()
        .with_conv_c(DISPLAYED_CONV_C)
        .with_damping(&DampingProfile::pulse_search())
}

/// `g_k = κ_k (κ^L_k / g^L_k)^{-1}`: the coupling that keeps the
/// reference-unit κ/g ratio.
pub fn reachable_coupling(kappa: f64, kappa_ref: f64, g_ref: f64) -> Result<f64> {
    if !(kappa_ref > 0.0 && g_ref > 0.0) {
        return Err(Error::domain("reference ratio must be positive"));
    }
    Ok(kappa * g_ref / kappa_ref)
}

/// Row of the reference table: damping and coupling of one mode type.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TableRow {
    pub kind: &'static str,
    pub kappa: f64,
    pub g: f64,
}

/// The four rows (mw, o, m, f) of the reference parameter table.
pub fn reference_table(params: &SystemParams) -> [TableRow; 4] {
    [
        TableRow { kind: "mw", kappa: params.kappa.mw1, g: params.g0 },
        TableRow { kind: "o", kappa: params.kappa.o1, g: TABLE_G_O },
        TableRow { kind: "m", kappa: params.kappa.m1, g: params.g0 },
        TableRow { kind: "f", kappa: params.kappa.f, g: params.g_f },
    ]
}

/// Mean coherent amplitude from `g = g0 ᾱ`.
pub fn coherent_amplitude(g: f64, g0: f64) -> f64 {
    g / g0
}

/// Click probability of an ideal on-off detector for a coherent input,
/// `1 − exp(−ᾱ²)`.
pub fn coherent_click_probability(alpha_bar: f64) -> f64 {
    -(-alpha_bar * alpha_bar).exp_m1()
}

/// Bose-Einstein occupation `1/(exp(ħω/k_B T) − 1)`; exactly zero at `T = 0`.
pub fn thermal_occupation(omega: f64, temperature: f64) -> Result<f64> {
    if !(omega > 0.0) {
        return Err(Error::domain(format!("thermal_occupation needs omega > 0, got {omega}")));
    }
    if !(temperature >= 0.0) {
        return Err(Error::domain(format!("temperature must be >= 0, got {temperature}")));
    }
    if temperature == 0.0 {
        return Ok(0.0);
    }
    let x = CODATA.hbar * omega / (CODATA.k_b * temperature);
    Ok(1.0 / x.exp_m1())
}

/// Initial occupations of the primary modes and of the two bath classes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct ThermalSpec {
    /// Initial mean occupation of each primary mode.
    #[serde(default)]
    pub n_bar: PerMode,
    /// Occupation of the mechanical baths (modes 2 and 6).
    #[serde(default)]
    pub n_th: f64,
    /// Occupation of every other bath.
    #[serde(default)]
    pub q_th: f64,
}

impl ThermalSpec {
    pub fn vacuum() -> Self {
        Self::default()
    }

    pub fn with_mechanical_bath(n_th: f64) -> Self {
        Self { n_th, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let all = self.n_bar.to_array().into_iter().chain([self.n_th, self.q_th]);
        for v in all {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::domain(format!("occupation {v} must be finite and >= 0")));
            }
        }
        Ok(())
    }
}

/// Which κ/g pair a ratio entry describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RatioKind {
    Mw1,
    O1,
    M1,
    Mw2,
    O2,
    F,
}

impl RatioKind {
    pub const ALL: [RatioKind; 6] =
        [RatioKind::Mw1, RatioKind::O1, RatioKind::M1, RatioKind::Mw2, RatioKind::O2, RatioKind::F];

    /// Achievable minimum for this kind; the fiber has none.
    pub fn minimum(self) -> Option<f64> {
        match self {
            RatioKind::Mw1 | RatioKind::Mw2 => Some(MIN_RATIO_MW),
            RatioKind::O1 | RatioKind::O2 => Some(MIN_RATIO_O),
            RatioKind::M1 => Some(MIN_RATIO_M),
            RatioKind::F => None,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            RatioKind::Mw1 => "kappa_mw1/g_mw1",
            RatioKind::O1 => "kappa_o1/g_o1",
            RatioKind::M1 => "kappa_m1/g_m1",
            RatioKind::Mw2 => "kappa_mw2/g_mw2",
            RatioKind::O2 => "kappa_o2/g_o2",
            RatioKind::F => "kappa_f/g_f",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioEntry {
    pub kind: RatioKind,
    /// κ/g; `+∞` for a switched-off drive.
    pub ratio: f64,
    pub minimum: Option<f64>,
    /// `ratio / minimum`; below one means beyond the achievable regime.
    pub margin: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioReport {
    pub entries: Vec<RatioEntry>,
}

impl RatioReport {
    pub fn get(&self, kind: RatioKind) -> f64 {
        self.entries.iter().find(|e| e.kind == kind).map(|e| e.ratio).unwrap_or(f64::NAN)
    }

    /// Entries whose margin is below one.
    pub fn flagged(&self) -> Vec<&RatioEntry> {
        self.entries.iter().filter(|e| e.margin.is_some_and(|m| m < 1.0)).collect()
    }
}

fn ratio(kappa: f64, g: f64) -> f64 {
    if g == 0.0 {
        f64::INFINITY
    } else {
        kappa / g
    }
}

/// The six κ/g ratios for a set of laser couplings and a mechanical coupling
/// `g_m`.
pub fn check_ratios(params: &SystemParams, drives: &DriveValues, g_m: f64) -> RatioReport {
    let k = &params.kappa;
    let entries = RatioKind::ALL
        .iter()
        .map(|&kind| {
            let r = match kind {
                RatioKind::Mw1 => ratio(k.mw1, drives.g_mw1),
                RatioKind::O1 => ratio(k.o1, drives.g_o1),
                RatioKind::M1 => ratio(k.m1, g_m),
                RatioKind::Mw2 => ratio(k.mw2, drives.g_mw2),
                RatioKind::O2 => ratio(k.o2, drives.g_o2),
                RatioKind::F => ratio(k.f, params.g_f),
            };
            let minimum = kind.minimum();
            RatioEntry { kind, ratio: r, minimum, margin: minimum.map(|m| r / m) }
        })
        .collect();
    RatioReport { entries }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn sig3(x: f64) -> f64 {
        let e = x.abs().log10().floor();
        let s = 10f64.powf(e - 2.0);
        (x / s).round() * s
    }

    #[test]
    fn unit_conversion_values() {
        assert_relative_eq!(sig3(unit_conversion(5.65e6, 3.0).unwrap()), 1.88e6, max_relative = 1e-12);
        assert_eq!(unit_conversion(7.5, 1.0).unwrap(), 7.5);
        assert_relative_eq!(unit_conversion(2.0 * PI * 9e5, 3.0).unwrap(), 1.884_955_6e6, max_relative = 1e-7);
        assert!(unit_conversion(0.0, 3.0).is_err());
        assert!(unit_conversion(1.0, -3.0).is_err());
    }

    #[test]
    fn reference_values() {
        let p = derive_reference_params();
        assert_relative_eq!(p.g_f, 2.664e9, max_relative = 1e-3);
        assert_relative_eq!(sig3(p.kappa.f / p.g_f), 0.236, max_relative = 1e-12);
        assert_relative_eq!(sig3(p.kappa.m1), 1.88e3, max_relative = 1e-12);
        assert_relative_eq!(sig3(p.kappa.mw1), 5.65e5, max_relative = 1e-12);
        assert_relative_eq!(sig3(p.kappa.o2), 3.77e5, max_relative = 1e-12);
        assert_eq!(p.kappa.mw1, p.kappa.mw2);
        p.validate().unwrap();
    }

    #[test]
    fn g0_override_scales_damping_linearly() {
        let a = derive_params_with_g0(G0).unwrap();
        let b = derive_params_with_g0(2.0 * G0).unwrap();
        assert_relative_eq!(b.kappa.mw1, 2.0 * a.kappa.mw1, max_relative = 1e-14);
        assert_relative_eq!(b.kappa.m2, 2.0 * a.kappa.m2, max_relative = 1e-14);
        assert_eq!(b.kappa.f, a.kappa.f);
    }

    #[test]
    fn click_probability() {
        assert_relative_eq!(sig3(coherent_click_probability(1.0)), 0.632, max_relative = 1e-12);
        assert_relative_eq!(sig3(coherent_click_probability(0.133)), 0.0175, max_relative = 1e-12);
        assert_eq!(coherent_click_probability(0.0), 0.0);
    }

    #[test]
    fn thermal_occupation_values() {
        assert_eq!(thermal_occupation(1e9, 0.0).unwrap(), 0.0);
        let n = thermal_occupation(2.0 * PI * 1e7, 0.01).unwrap();
        assert!((n - 20.3).abs() < 0.1, "{n}");
        let t = 0.5;
        let omega = CODATA.k_b * t * 2f64.ln() / CODATA.hbar;
        assert_relative_eq!(thermal_occupation(omega, t).unwrap(), 1.0, max_relative = 1e-12);
        assert!(thermal_occupation(0.0, 1.0).is_err());
        assert!(thermal_occupation(-1.0, 1.0).is_err());
    }

    #[test]
    fn equal_rates_give_unit_ratios() {
        let p = derive_reference_params();
        let d = DriveValues { g_mw1: p.kappa.mw1, g_mw2: p.kappa.mw2, g_o1: p.kappa.o1, g_o2: p.kappa.o2 };
        let rep = check_ratios(&p, &d, p.kappa.m1);
        for kind in [RatioKind::Mw1, RatioKind::Mw2, RatioKind::O1, RatioKind::O2, RatioKind::M1] {
            assert_relative_eq!(rep.get(kind), 1.0, max_relative = 1e-15);
        }
    }

    #[test]
    fn zero_drive_is_infinite_ratio() {
        let p = derive_reference_params();
        let d = DriveValues { g_mw1: 0.0, g_mw2: 1e6, g_o1: 1e6, g_o2: 1e6 };
        let rep = check_ratios(&p, &d, p.g0);
        assert!(rep.get(RatioKind::Mw1).is_infinite());
    }

    #[test]
    fn filtered_winner_ratios() {
        let p = pulse_search_params();
        let d = DriveValues { g_mw1: 121.9e6, g_mw2: 105.5e6, g_o1: 605.4e6, g_o2: 549.6e6 };
        let rep = check_ratios(&p, &d, p.g0);
        assert_relative_eq!(rep.get(RatioKind::Mw1), 1.234e-2, max_relative = 1e-3);
        assert_relative_eq!(rep.get(RatioKind::O1), 2.795e-3, max_relative = 1e-3);
        assert_relative_eq!(rep.get(RatioKind::Mw2), 1.426e-2, max_relative = 1e-3);
        assert_relative_eq!(rep.get(RatioKind::O2), 3.079e-3, max_relative = 1e-3);
        // the displayed conversion factor puts the mechanical ratio a hair
        // under its minimum as well
        assert!(rep.get(RatioKind::M1) < MIN_RATIO_M);
        assert_eq!(rep.flagged().len(), 5);
    }

    #[test]
    fn invalid_params_rejected() {
        let mut p = derive_reference_params();
        p.kappa.o1 = -1.0;
        assert!(p.validate().is_err());
        let mut p = derive_reference_params();
        p.g_f = 0.0;
        assert!(p.validate().is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn conversion_round_trip(g in 1e-3f64..1e12, l in 1e-3f64..1e3) {
                let c = unit_conversion(g, l).unwrap();
                prop_assert!(((c * l) - g).abs() <= 4.0 * f64::EPSILON * g);
            }

            #[test]
            fn occupation_monotone(w in 1e6f64..1e12, t in 1e-3f64..10.0, f in 1.01f64..3.0) {
                // keep clear of the range where the occupation underflows to zero
                prop_assume!(CODATA.hbar * w * f / (CODATA.k_b * t) < 600.0);
                let n = thermal_occupation(w, t).unwrap();
                prop_assert!(thermal_occupation(w * f, t).unwrap() < n);
                prop_assert!(thermal_occupation(w, t * f).unwrap() > n);
            }

            #[test]
            fn ratios_scale_invariant(s in 1e-3f64..1e3, g in proptest::array::uniform4(1e5f64..1e9)) {
                let p = pulse_search_params();
                let d = DriveValues { g_mw1: g[0], g_mw2: g[1], g_o1: g[2], g_o2: g[3] };
                let a = check_ratios(&p, &d, p.g0);
                let ps = SystemParams { kappa: p.kappa.map(|k| k * s), g_f: p.g_f * s, g0: p.g0 * s, conv_c: p.conv_c };
                let ds = DriveValues { g_mw1: g[0] * s, g_mw2: g[1] * s, g_o1: g[2] * s, g_o2: g[3] * s };
                let b = check_ratios(&ps, &ds, ps.g0);
                for (x, y) in a.entries.iter().zip(&b.entries) {
                    prop_assert!(((x.ratio - y.ratio) / x.ratio).abs() < 1e-12);
                }
            }
        }
    }
}
