//! Text renderings. Every function here is a pure function of serializable
//! data, so a JSON round trip renders identically.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use mfb_core::filters::{get_filter, packet_filters, Wavelet};
use mfb_core::hypothesis::TestReport;
use mfb_core::sim::{McResult, RelativePower, SweepPoint};
use serde::{Deserialize, Serialize};

use crate::battery::BatteryReport;

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn test_name(r: &TestReport) -> String {
    match r.wavelet {
        Some(w) => format!("{}[{w}]", r.test),
        None => r.test.to_string(),
    }
}

/// Pads columns to a common width; the first column is left aligned.
fn grid(rows: &[Vec<String>]) -> String {
    let cols = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..cols)
        .map(|c| {
            rows.iter()
                .filter_map(|r| r.get(c))
                .map(|s| s.chars().count())
                .max()
                .unwrap_or(0)
        })
        .collect();
    let mut out = String::new();
    for row in rows {
        let line: Vec<String> = row
            .iter()
            .enumerate()
            .map(|(c, s)| {
                if c == 0 {
                    format!("{s:<w$}", w = widths[c])
                } else {
                    format!("{s:>w$}", w = widths[c])
                }
            })
            .collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
    }
    out
}

/// Human-readable battery table; `*` marks p < 0.05.
pub fn battery_table(report: &BatteryReport) -> String {
    let mut rows = vec![["test", "variant", "m/K", "statistic", "df", "p-value", ""]
        .map(String::from)
        .to_vec()];
    let mut notes = Vec::new();
    for r in &report.reports {
        let mut flag = if r.reject_at_05 {
            "*".to_string()
        } else {
            String::new()
        };
        for n in &r.notes {
            notes.push(n.clone());
            let _ = write!(flag, "[{}]", notes.len());
        }
        rows.push(vec![
            test_name(r),
            r.variant.to_string(),
            r.m_or_k.to_string(),
            format!("{:.4}", r.statistic),
            r.df.to_string(),
            format!("{:.4}", r.p_value),
            flag,
        ]);
    }
    let mut out = format!("T = {}\n", report.observations);
    out.push_str(&grid(&rows));
    out.push_str("* p < 0.05\n");
    for (i, n) in notes.iter().enumerate() {
        let _ = writeln!(out, "[{}] {n}", i + 1);
    }
    for e in &report.errors {
        let _ = writeln!(out, "failed: {}: {}", e.test, e.error);
    }
    out
}

pub fn battery_csv(report: &BatteryReport) -> String {
    let mut out =
        String::from("test,variant,wavelet,m_or_K,statistic,df,p_value,reject_at_05,notes\n");
    for r in &report.reports {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.test,
            r.variant,
            r.wavelet.map(|w| w.to_string()).unwrap_or_default(),
            r.m_or_k,
            r.statistic,
            r.df,
            r.p_value,
            r.reject_at_05,
            csv_field(&r.notes.join("; "))
        );
    }
    out
}

/// Rates in percent, one row per (DGP, T) and one column per test, in
/// first-seen order.
pub fn rate_table(results: &[McResult]) -> String {
    let mut tests: Vec<&str> = Vec::new();
    let mut rows: Vec<(String, BTreeMap<&str, f64>)> = Vec::new();
    for r in results {
        if !tests.contains(&r.test.as_str()) {
            tests.push(&r.test);
        }
        let key = format!("{} T={}", r.dgp, r.len);
        let idx = match rows.iter().position(|(k, _)| *k == key) {
            Some(i) => i,
            None => {
                rows.push((key, BTreeMap::new()));
                rows.len() - 1
            }
        };
        rows[idx].1.insert(&r.test, 100.0 * r.rejection_rate);
    }
    let mut cells = vec![std::iter::once("model".to_string())
        .chain(tests.iter().map(|t| t.to_string()))
        .collect::<Vec<_>>()];
    for (key, rates) in &rows {
        let mut row = vec![key.clone()];
        row.extend(
            tests
                .iter()
                .map(|t| rates.get(t).map(|v| format!("{v:.2}")).unwrap_or_default()),
        );
        cells.push(row);
    }
    let mut out = grid(&cells);
    let errors: usize = results.iter().map(|r| r.errors).sum();
    if errors > 0 {
        let _ = writeln!(out, "{errors} failed replications");
    }
    out
}

pub fn relative_table(rows: &[RelativePower]) -> String {
    let mut cells = vec![["model", "reference", "versus", "relative"]
        .map(String::from)
        .to_vec()];
    for r in rows {
        cells.push(vec![
            r.dgp.clone(),
            r.reference.clone(),
            r.test.clone(),
            format!("{:.3}", r.relative),
        ]);
    }
    grid(&cells)
}

pub fn sweep_table(points: &[SweepPoint]) -> String {
    let mut cells = vec![["lag", "beta", "T", "m", "test", "power"]
        .map(String::from)
        .to_vec()];
    for p in points {
        cells.push(vec![
            p.lag.to_string(),
            p.beta.to_string(),
            p.len.to_string(),
            p.scale.to_string(),
            p.test.clone(),
            format!("{:.2}", 100.0 * p.power),
        ]);
    }
    grid(&cells)
}

/// Filter pair and packet bank for one wavelet and scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterDump {
    pub wavelet: Wavelet,
    pub scale: u32,
    pub h: Vec<f64>,
    pub g: Vec<f64>,
    pub filter_len: usize,
    pub bands: Vec<Vec<f64>>,
}

impl FilterDump {
    pub fn new(wavelet: Wavelet, scale: u32) -> mfb_core::Result<Self> {
        let pair = get_filter(wavelet);
        let bank = packet_filters(&pair, scale)?;
        Ok(FilterDump {
            wavelet,
            scale,
            h: pair.h,
            g: pair.g,
            filter_len: bank.filter_len,
            bands: bank.filters,
        })
    }
}

pub fn filters_csv(dump: &FilterDump) -> String {
    let mut out = String::from("filter,band,tap,value\n");
    for (name, taps) in [("h", &dump.h), ("g", &dump.g)] {
        for (l, v) in taps.iter().enumerate() {
            let _ = writeln!(out, "{name},,{l},{v}");
        }
    }
    for (n, taps) in dump.bands.iter().enumerate() {
        for (l, v) in taps.iter().enumerate() {
            let _ = writeln!(out, "packet,{n},{l},{v}");
        }
    }
    out
}

pub fn filters_table(dump: &FilterDump) -> String {
    let mut out = format!(
        "{} scale {}: {} bands of {} taps\n",
        dump.wavelet,
        dump.scale,
        dump.bands.len(),
        dump.filter_len
    );
    let fmt = |taps: &[f64]| {
        taps.iter()
            .map(|v| format!("{v:+.12}"))
            .collect::<Vec<_>>()
            .join(" ")
    };
    let _ = writeln!(out, "h  {}", fmt(&dump.h));
    let _ = writeln!(out, "g  {}", fmt(&dump.g));
    for (n, taps) in dump.bands.iter().enumerate() {
        let energy: f64 = taps.iter().map(|v| v * v).sum();
        let _ = writeln!(out, "band {n}: energy {energy:.12}  {}", fmt(taps));
    }
    out
}
