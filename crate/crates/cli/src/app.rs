//! Command definitions and dispatch.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand, ValueEnum};
use mfb_core::hypothesis::Variant;
use mfb_core::longrun::{Bandwidth, HacConfig};
use mfb_core::sim::{
    relative_power_csv, results_csv, run_power_study, run_scale_sweep, run_size_study, sweep_csv,
};
use mfb_core::Wavelet;
use serde::Serialize;

use crate::battery::{run_battery, BatteryConfig};
use crate::config::{parse_bandwidth, SimConfig};
use crate::ingest::{self, detect_format, Format, IngestSpec, Transform};
use crate::render;

#[derive(Debug, Parser)]
#[command(
    name = "mfb",
    version,
    about = "Wavelet multi-frequency-band tests for white noise"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the test battery on a CSV series.
    Test(TestArgs),
    /// Monte Carlo size, power or scale-sweep study.
    Simulate(SimulateArgs),
    /// Print a filter pair and its packet bank.
    Filters(FiltersArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Toggle {
    On,
    Off,
}

impl From<Toggle> for bool {
    fn from(t: Toggle) -> bool {
        t == Toggle::On
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Out {
    Json,
    Csv,
    Table,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    #[value(name = "csv_single_column")]
    SingleColumn,
    #[value(name = "csv_date_value")]
    DateValue,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TransformArg {
    None,
    #[value(name = "log_return_100")]
    LogReturn100,
    Diff,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Study {
    Size,
    Power,
    Sweep,
}

/// Scale list given as `3`, `1-5` or `1,2,4`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scales(pub Vec<u32>);

fn scales_arg(s: &str) -> Result<Scales, String> {
    parse_scales(s).map(Scales)
}

pub fn parse_scales(s: &str) -> Result<Vec<u32>, String> {
    let bad = || format!("cannot parse scales `{s}`");
    let mut out = Vec::new();
    for part in s.split(',') {
        match part.split_once('-') {
            Some((a, b)) => {
                let (a, b): (u32, u32) = (
                    a.trim().parse().map_err(|_| bad())?,
                    b.trim().parse().map_err(|_| bad())?,
                );
                if a > b {
                    return Err(bad());
                }
                out.extend(a..=b);
            }
            None => out.push(part.trim().parse().map_err(|_| bad())?),
        }
    }
    Ok(out)
}

#[derive(Debug, Args)]
pub struct TestArgs {
    /// CSV file: one value per line, or `date,value`.
    pub path: PathBuf,
    /// Input layout; detected from the first line when omitted.
    #[arg(long)]
    pub format: Option<FormatArg>,
    #[arg(long, value_enum, default_value = "none")]
    pub transform: TransformArg,
    /// First date kept (inclusive).
    #[arg(long)]
    pub start: Option<NaiveDate>,
    /// Last date kept (inclusive).
    #[arg(long)]
    pub end: Option<NaiveDate>,
    #[arg(long, value_enum, default_value = "on")]
    pub demean: Toggle,
    #[arg(long, value_delimiter = ',', default_value = "haar")]
    pub wavelet: Vec<Wavelet>,
    /// Scales as `3`, `1-5` or `1,2,4`.
    #[arg(long, value_parser = scales_arg, default_value = "1-5")]
    pub scale: Scales,
    #[arg(long, value_delimiter = ',', default_value = "g,triangle,e")]
    pub variant: Vec<Variant>,
    /// Also run the pyramid (level-only) test.
    #[arg(long)]
    pub gsm: bool,
    /// Ljung–Box lags, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub ljung_box: Vec<usize>,
    #[arg(long)]
    pub no_aq: bool,
    #[arg(long, value_parser = parse_bandwidth, default_value = "auto")]
    pub nw_bandwidth: Bandwidth,
    #[arg(long, value_enum, default_value = "on")]
    pub nw_center: Toggle,
    #[arg(long, value_enum, default_value = "table")]
    pub out: Out,
    /// Also write the JSON report to this file.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, value_enum)]
    pub study: Study,
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides the config's master seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides the config's worker count.
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long, value_parser = parse_bandwidth)]
    pub nw_bandwidth: Option<Bandwidth>,
    #[arg(long, value_enum)]
    pub nw_center: Option<Toggle>,
    #[arg(long, value_enum, default_value = "table")]
    pub out: Out,
    /// Write CSV tables and `manifest.json` here.
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FiltersArgs {
    #[arg(long, default_value = "haar")]
    pub wavelet: Wavelet,
    #[arg(long, default_value_t = 1)]
    pub scale: u32,
    #[arg(long, value_enum, default_value = "table")]
    pub out: Out,
}

pub fn run(cli: Cli, out: &mut dyn Write) -> Result<()> {
    match cli.command {
        Command::Test(a) => test(a, out),
        Command::Simulate(a) => simulate(a, out),
        Command::Filters(a) => filters(a, out),
    }
}

fn test(a: TestArgs, out: &mut dyn Write) -> Result<()> {
    let text = ingest::read(&a.path)?;
    let format = match a.format {
        Some(FormatArg::SingleColumn) => Format::CsvSingleColumn,
        Some(FormatArg::DateValue) => Format::CsvDateValue,
        None => detect_format(&text),
    };
    let date_range = match (a.start, a.end) {
        (None, None) => None,
        (s, e) => Some((s.unwrap_or(NaiveDate::MIN), e.unwrap_or(NaiveDate::MAX))),
    };
    let spec = IngestSpec {
        path: a.path.clone(),
        format,
        transform: match a.transform {
            TransformArg::None => Transform::None,
            TransformArg::LogReturn100 => Transform::LogReturn100,
            TransformArg::Diff => Transform::Diff,
        },
        date_range,
        demean: a.demean.into(),
    };
    let y = ingest::ingest_str(&text, &spec)
        .with_context(|| format!("reading {}", a.path.display()))?;
    let cfg = BatteryConfig {
        wavelets: a.wavelet,
        scales: a.scale.0,
        variants: a.variant,
        gsm: a.gsm,
        ljung_box: a.ljung_box,
        aq: !a.no_aq,
        hac: HacConfig {
            bandwidth: a.nw_bandwidth,
            center: a.nw_center.into(),
            ..HacConfig::default()
        },
    };
    let report = run_battery(&y, &cfg)?;
    if let Some(path) = &a.json {
        write_file(path, &serde_json::to_string_pretty(&report)?)?;
    }
    let text = match a.out {
        Out::Json => serde_json::to_string_pretty(&report)? + "\n",
        Out::Csv => render::battery_csv(&report),
        Out::Table => render::battery_table(&report),
    };
    out.write_all(text.as_bytes())?;
    Ok(())
}

#[derive(Debug, Serialize)]
struct Manifest {
    tool: &'static str,
    version: &'static str,
    study: &'static str,
    config: PathBuf,
    master_seed: u64,
    replications: usize,
    null_replications: Option<usize>,
    workers: usize,
    rng: &'static str,
    outputs: Vec<String>,
    runtime_seconds: f64,
}

#[derive(Debug, Serialize)]
struct SimulationJson<'a, T: Serialize> {
    manifest: &'a Manifest,
    #[serde(flatten)]
    body: T,
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

fn simulate(a: SimulateArgs, out: &mut dyn Write) -> Result<()> {
    let started = Instant::now();
    let cfg = SimConfig::load(&a.config)?;
    let mut study = cfg.study()?;
    if let Some(seed) = a.seed {
        study.master_seed = seed;
    }
    if let Some(w) = a.workers {
        study.workers = w.max(1);
    }
    if let Some(b) = a.nw_bandwidth {
        study.hac.bandwidth = b;
    }
    if let Some(c) = a.nw_center {
        study.hac.center = c.into();
    }

    // (file name, csv) pairs, a table and a JSON body per study kind
    let (files, table, body): (Vec<(&str, String)>, String, serde_json::Value) = match a.study {
        Study::Size => {
            let r = run_size_study(&cfg.dgps()?, &cfg.test_specs()?, &study)?;
            (
                vec![("size.csv", results_csv(&r))],
                render::rate_table(&r),
                serde_json::json!({ "results": r }),
            )
        }
        Study::Power => {
            let p = run_power_study(
                &cfg.dgps()?,
                &cfg.test_specs()?,
                cfg.null_replications(),
                &study,
            )?;
            let table =
                render::rate_table(&p.results) + "\n" + &render::relative_table(&p.relative);
            (
                vec![
                    ("power.csv", results_csv(&p.results)),
                    ("relative_power.csv", relative_power_csv(&p.relative)),
                ],
                table,
                serde_json::to_value(&p)?,
            )
        }
        Study::Sweep => {
            let sweep = cfg
                .sweep
                .as_ref()
                .context("sweep study needs a [sweep] table")?;
            let lengths = if cfg.lengths.is_empty() {
                vec![300]
            } else {
                cfg.lengths.clone()
            };
            let mut points = Vec::new();
            for len in lengths {
                points.extend(run_scale_sweep(
                    sweep.lag,
                    &sweep.betas,
                    &sweep.scales,
                    cfg.sweep_wavelet()?,
                    len,
                    cfg.null_replications(),
                    &study,
                )?);
            }
            (
                vec![("sweep.csv", sweep_csv(&points))],
                render::sweep_table(&points),
                serde_json::json!({ "points": points }),
            )
        }
    };

    let manifest = Manifest {
        tool: "mfb",
        version: env!("CARGO_PKG_VERSION"),
        study: match a.study {
            Study::Size => "size",
            Study::Power => "power",
            Study::Sweep => "sweep",
        },
        config: a.config.clone(),
        master_seed: study.master_seed,
        replications: study.replications,
        null_replications: (a.study != Study::Size).then(|| cfg.null_replications()),
        workers: study.workers,
        rng: mfb_core::sim::study::RNG_NAME,
        outputs: files.iter().map(|(n, _)| n.to_string()).collect(),
        runtime_seconds: started.elapsed().as_secs_f64(),
    };
    if let Some(dir) = &a.output_dir {
        std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
        for (name, csv) in &files {
            write_file(&dir.join(name), csv)?;
        }
        write_file(
            &dir.join("manifest.json"),
            &serde_json::to_string_pretty(&manifest)?,
        )?;
    }
    let text = match a.out {
        Out::Json => {
            serde_json::to_string_pretty(&SimulationJson {
                manifest: &manifest,
                body,
            })? + "\n"
        }
        Out::Csv => files
            .iter()
            .map(|(_, c)| c.as_str())
            .collect::<Vec<_>>()
            .join("\n"),
        Out::Table => table,
    };
    out.write_all(text.as_bytes())?;
    Ok(())
}

fn filters(a: FiltersArgs, out: &mut dyn Write) -> Result<()> {
    let dump = render::FilterDump::new(a.wavelet, a.scale)?;
    let text = match a.out {
        Out::Json => serde_json::to_string_pretty(&dump)? + "\n",
        Out::Csv => render::filters_csv(&dump),
        Out::Table => render::filters_table(&dump),
    };
    out.write_all(text.as_bytes())?;
    Ok(())
}
