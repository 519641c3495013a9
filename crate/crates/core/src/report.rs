//! Run artifacts: the per-step CSV (fixed column set) and the JSON report.
//! Formatting is deterministic so identical configs produce bitwise-identical
//! files.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::error::Result;

/// Fixed CSV columns: t, l2, wl2, flux, e_ident, nl_energy, gamma_term, iters.
#[derive(Clone, Copy, Debug)]
pub struct CsvRow {
    pub t: f64,
    pub l2: f64,
    pub wl2: f64,
    pub flux: f64,
    pub e_ident: f64,
    /// NaN when beta + gamma = 0 (functional undefined)
    pub nl_energy: f64,
    pub gamma_term: f64,
    pub iters: u32,
}

pub const CSV_HEADER: &str = "t,l2,wl2,flux,e_ident,nl_energy,gamma_term,iters";

fn fmt(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else {
        format!("{v:.17e}")
    }
}

pub fn render_csv(rows: &[CsvRow]) -> String {
    let mut out = String::with_capacity(rows.len() * 160 + 64);
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            fmt(r.t),
            fmt(r.l2),
            fmt(r.wl2),
            fmt(r.flux),
            fmt(r.e_ident),
            fmt(r.nl_energy),
            fmt(r.gamma_term),
            r.iters
        ));
    }
    out
}

pub fn write_csv(path: &Path, rows: &[CsvRow]) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    let mut f = std::fs::File::create(path)?;
    f.write_all(render_csv(rows).as_bytes())?;
    Ok(())
}

#[derive(Clone, Debug, Serialize)]
pub struct GridJson {
    pub length: f64,
    pub n_cells: usize,
    pub horizon: f64,
    pub n_steps: usize,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct SummaryJson {
    pub max_residual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub convergence_order: Option<f64>,
    #[serde(skip_serializing_if = "std::collections::BTreeMap::is_empty", default)]
    pub ratios: std::collections::BTreeMap<String, f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SeriesJson {
    pub t: Vec<f64>,
    pub residuals: Vec<f64>,
}

/// The report document: {scenario, grid, series, summary}.
#[derive(Clone, Debug, Serialize)]
pub struct ReportJson {
    pub scenario: String,
    pub grid: GridJson,
    pub series: SeriesJson,
    pub summary: SummaryJson,
}

pub fn write_json(path: &Path, report: &ReportJson) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    let text = serde_json::to_string_pretty(report)
        .map_err(|e| crate::error::Error::InvalidInput(format!("json: {e}")))?;
    std::fs::write(path, text)?;
    Ok(())
}

/// Calibration log format: {a, b, lambda0, eps}.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct CalibrationJson {
    pub a: f64,
    pub b: f64,
    pub lambda0: f64,
    pub eps: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_rendering_is_deterministic_and_handles_nan() {
        let rows = vec![CsvRow {
            t: 0.1,
            l2: 1.0,
            wl2: 2.0,
            flux: 0.0,
            e_ident: -3.5e-9,
            nl_energy: f64::NAN,
            gamma_term: f64::NAN,
            iters: 4,
        }];
        let a = render_csv(&rows);
        let b = render_csv(&rows);
        assert_eq!(a, b);
        assert!(a.starts_with(CSV_HEADER));
        assert!(a.contains(",nan,nan,4"));
    }
}
