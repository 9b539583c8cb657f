//! Cross-architecture comparison of metrics reports.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::metrics::{opt, LoopSettings, MetricsReport, SatMetrics};
use crate::error::{Error, Result};

/// One table column group: an architecture, or a repeated report of one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Column {
    pub label: String,
    pub loop_settings: LoopSettings,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub prn: u8,
    pub cn0: f64,
    pub elevation_deg: f64,
    /// Indexed like [`Comparison::columns`].
    pub cells: Vec<Option<SatMetrics>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub scenario: String,
    pub geometry_hash: String,
    pub seed: u64,
    pub columns: Vec<Column>,
    pub rows: Vec<Row>,
}

/// Merges reports into one table. Reports must share geometry and seed;
/// reports of one architecture covering different C/N0 schedules share a
/// column, while a repeat of an already seen (architecture, scenario) pair
/// gets a column of its own.
pub fn compare(reports: &[MetricsReport]) -> Result<Comparison> {
    let first = reports.first().ok_or_else(|| Error::InvalidParameter("compare needs at least one report".into()))?;
    for r in reports {
        if r.geometry_hash != first.geometry_hash {
            return Err(Error::Mismatch(format!(
                "scenario {:?} ({}) differs from {:?} ({})",
                r.scenario, r.geometry_hash, first.scenario, first.geometry_hash
            )));
        }
        if r.seed != first.seed {
            return Err(Error::Mismatch(format!("seed {} differs from {}", r.seed, first.seed)));
        }
    }

    let mut columns: Vec<Column> = Vec::new();
    let mut seen: Vec<Vec<String>> = Vec::new();
    let mut data: Vec<BTreeMap<(u8, u64), SatMetrics>> = Vec::new();
    for r in reports {
        let arch = r.architecture.name();
        let slot = (0..columns.len())
            .find(|&c| columns[c].label.split('#').next() == Some(arch) && !seen[c].contains(&r.scenario_hash));
        let c = match slot {
            Some(c) => c,
            None => {
                let repeats = columns.iter().filter(|c| c.label.split('#').next() == Some(arch)).count();
                let label = if repeats == 0 { arch.to_string() } else { format!("{arch}#{}", repeats + 1) };
                columns.push(Column { label, loop_settings: r.loop_settings });
                seen.push(Vec::new());
                data.push(BTreeMap::new());
                columns.len() - 1
            }
        };
        seen[c].push(r.scenario_hash.clone());
        for s in &r.satellites {
            let key = (s.prn, s.cn0.to_bits());
            match data[c].get(&key) {
                Some(old) if old.samples >= s.samples => {}
                _ => {
                    data[c].insert(key, s.clone());
                }
            }
        }
    }

    let mut keys: Vec<(u8, f64)> =
        data.iter().flat_map(|d| d.values().map(|s| (s.prn, s.cn0))).collect();
    keys.sort_by(|a, b| a.0.cmp(&b.0).then(b.1.total_cmp(&a.1)));
    keys.dedup();
    let rows = keys
        .into_iter()
        .map(|(prn, cn0)| {
            let cells: Vec<Option<SatMetrics>> = data.iter().map(|d| d.get(&(prn, cn0.to_bits())).cloned()).collect();
            let elevation_deg = cells.iter().flatten().next().map_or(f64::NAN, |s| s.elevation_deg);
            Row { prn, cn0, elevation_deg, cells }
        })
        .collect();
    Ok(Comparison {
        scenario: first.scenario.clone(),
        geometry_hash: first.geometry_hash.clone(),
        seed: first.seed,
        columns,
        rows,
    })
}

fn delta(a: Option<f64>, b: Option<f64>) -> Option<f64> {
    Some(a? - b?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotSeries {
    pub label: String,
    pub prn: u8,
    pub elevation_deg: f64,
    /// `(C/N0, RMSE)` pairs, ascending C/N0; levels without data are omitted.
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotPanel {
    pub metric: String,
    pub x_label: String,
    pub y_label: String,
    pub y_scale: String,
    pub series: Vec<PlotSeries>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotData {
    pub scenario: String,
    pub geometry_hash: String,
    pub seed: u64,
    pub columns: Vec<Column>,
    pub panels: Vec<PlotPanel>,
}

impl Comparison {
    /// Per-column RMSE and lock fraction, then differences against the
    /// first column.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("prn,cn0,elevation_deg");
        for c in &self.columns {
            let _ = write!(out, ",{0}_pr_rmse_m,{0}_fd_rmse_hz,{0}_lock_fraction,{0}_samples", c.label);
        }
        for c in self.columns.iter().skip(1) {
            let b = &self.columns[0].label;
            let _ = write!(out, ",{0}_minus_{b}_pr_rmse_m,{0}_minus_{b}_fd_rmse_hz", c.label);
        }
        out.push('\n');
        for r in &self.rows {
            let _ = write!(out, "{},{},{:.2}", r.prn, r.cn0, r.elevation_deg);
            for cell in &r.cells {
                match cell {
                    Some(s) => {
                        let _ = write!(out, ",{},{},{:.4},{}", opt(s.pr_rmse), opt(s.fd_rmse), s.lock_fraction, s.samples);
                    }
                    None => out.push_str(",,,,"),
                }
            }
            let base = r.cells[0].as_ref();
            for cell in r.cells.iter().skip(1) {
                let pr = delta(cell.as_ref().and_then(|s| s.pr_rmse), base.and_then(|s| s.pr_rmse));
                let fd = delta(cell.as_ref().and_then(|s| s.fd_rmse), base.and_then(|s| s.fd_rmse));
                let _ = write!(out, ",{},{}", opt(pr), opt(fd));
            }
            out.push('\n');
        }
        out
    }

    pub fn plot_data(&self) -> PlotData {
        let panel = |metric: &str, y_label: &str, pick: fn(&SatMetrics) -> Option<f64>| {
            let mut series = Vec::new();
            for (c, col) in self.columns.iter().enumerate() {
                let mut prns: Vec<u8> = self.rows.iter().map(|r| r.prn).collect();
                prns.dedup();
                for prn in prns {
                    let rows: Vec<&Row> = self.rows.iter().filter(|r| r.prn == prn).collect();
                    let mut points: Vec<(f64, f64)> = rows
                        .iter()
                        .filter_map(|r| r.cells[c].as_ref().and_then(pick).map(|v| (r.cn0, v)))
                        .collect();
                    points.sort_by(|a, b| a.0.total_cmp(&b.0));
                    if !points.is_empty() {
                        series.push(PlotSeries { label: col.label.clone(), prn, elevation_deg: rows[0].elevation_deg, points });
                    }
                }
            }
            PlotPanel {
                metric: metric.into(),
                x_label: "C/N0 [dB-Hz]".into(),
                y_label: y_label.into(),
                y_scale: "log".into(),
                series,
            }
        };
        PlotData {
            scenario: self.scenario.clone(),
            geometry_hash: self.geometry_hash.clone(),
            seed: self.seed,
            columns: self.columns.clone(),
            panels: vec![
                panel("pseudorange_rmse", "pseudorange RMSE [m]", |s| s.pr_rmse),
                panel("doppler_rmse", "Doppler RMSE [Hz]", |s| s.fd_rmse),
            ],
        }
    }

    pub fn plot_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.plot_data()).expect("plot data serializes");
        s.push('\n');
        s
    }
}
