// Copyright 2026 The om-entangle Authors
// SPDX-License-Identifier: Apache-2.0

//! CSV output. Every value is written in shortest round-trip exponent form,
//! so reading a file back reproduces the bits that were written. Non-finite
//! values abort the write.

use std::io::{Read, Write};

use crate::covariance::{EntanglementPoint, TimePoint};
use crate::error::{Error, Result};
use crate::model::StabilityScan;
use crate::search::SweepCurve;

pub const TIME_SERIES_HEADER: [&str; 8] = ["t", "E_N", "ent", "S_RH", "g_mw1", "g_mw2", "g_o1", "g_o2"];
pub const SPECTRUM_HEADER: [&str; 4] = ["omega_rad_s", "E_N", "ent", "S_RH"];
pub const SCAN_HEADER: [&str; 3] = ["g_o1", "g_o2", "S_RH"];

/// Shortest decimal that parses back to `x`.
pub fn format_f64(x: f64) -> Result<String> {
    if !x.is_finite() {
        return Err(Error::numeric(format!("refusing to write non-finite value {x}")));
    }
    Ok(format!("{x:e}"))
}

fn write_rows<const N: usize>(w: impl Write, header: &[&str], rows: impl IntoIterator<Item = [f64; N]>) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(header)?;
    let mut buf = Vec::with_capacity(N);
    for row in rows {
        buf.clear();
        for x in row {
            buf.push(format_f64(x)?);
        }
        out.write_record(&buf)?;
    }
    out.flush()?;
    Ok(())
}

/// `t, E_N, ent, S_RH, g_mw1, g_mw2, g_o1, g_o2`, one row per output time.
pub fn write_time_series(w: impl Write, series: &[TimePoint]) -> Result<()> {
    let rows = series.iter().map(|p| {
        let d = p.drives;
        [p.point.at(), p.point.e_n(), p.point.ent(), p.point.s_rh(), d.g_mw1, d.g_mw2, d.g_o1, d.g_o2]
    });
    write_rows(w, &TIME_SERIES_HEADER, rows)
}

/// `omega_rad_s, E_N, ent, S_RH`.
pub fn write_spectrum(w: impl Write, points: &[EntanglementPoint]) -> Result<()> {
    write_rows(w, &SPECTRUM_HEADER, points.iter().map(|p| [p.at(), p.e_n(), p.ent(), p.s_rh()]))
}

/// `g_o1, g_o2, S_RH`, one row per scanned pair.
pub fn write_stability_scan(w: impl Write, scan: &StabilityScan) -> Result<()> {
    write_rows(w, &SCAN_HEADER, scan.points.iter().map(|p| [p.g_o1, p.g_o2, p.s_rh]))
}

/// Long format with an `N_th` column; `axis` names the abscissa (`t` or
/// `omega_rad_s`).
pub fn write_sweep(w: impl Write, axis: &str, curves: &[SweepCurve]) -> Result<()> {
    let header = ["N_th", axis, "E_N", "ent", "S_RH"];
    let rows = curves
        .iter()
        .flat_map(|c| c.points.iter().map(move |p| [c.n_th, p.at(), p.e_n(), p.ent(), p.s_rh()]));
    write_rows(w, &header, rows)
}

/// Header and numeric rows of a CSV written by this module.
pub fn read_table(r: impl Read) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut rd = csv::Reader::from_reader(r);
    let header = rd.headers()?.iter().map(str::to_owned).collect();
    let mut rows = Vec::new();
    for rec in rd.records() {
        let rec = rec?;
        let row = rec
            .iter()
            .map(|s| s.parse::<f64>().map_err(|e| Error::Config(format!("bad number {s:?}: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    Ok((header, rows))
}
