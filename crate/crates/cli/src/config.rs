//! Simulation config files (TOML).
//!
//! ```toml
//! replications = 2000
//! null_replications = 5000
//! seed = 7
//! workers = 4
//! lengths = [100, 300]
//! models = ["N1", "N5", "A1(0.1,0.1)"]
//! tests = ["mfb:haar:2:g", "gsm:haar:2:g", "q:5", "aq"]
//! nw_bandwidth = "auto"
//!
//! [grid]          # power studies: every (beta1, beta2) pair of a family
//! family = "A1"
//! beta1 = [-0.1, 0.0, 0.1]
//! beta2 = [0.0, 0.3]
//!
//! [sweep]         # scale sweeps against AR(lag, beta)
//! lag = 5
//! betas = [0.0, 0.2, 0.4]
//! scales = [1, 2, 3, 4, 5]
//! wavelet = "haar"
//! ```

use std::path::Path;

use anyhow::{bail, Context, Result};
use mfb_core::hypothesis::TestSpec;
use mfb_core::longrun::{Bandwidth, HacConfig};
use mfb_core::sim::{DgpSpec, Innovation, Model, StudyConfig};
use mfb_core::Wavelet;
use serde::Deserialize;

pub const DEFAULT_REPLICATIONS: usize = 2000;
pub const DEFAULT_NULL_REPLICATIONS: usize = 5000;

/// `auto` or a non-negative lag.
pub fn parse_bandwidth(s: &str) -> Result<Bandwidth, String> {
    match s.trim() {
        "auto" => Ok(Bandwidth::Auto),
        n => n
            .parse()
            .map(Bandwidth::Fixed)
            .map_err(|_| format!("bandwidth must be `auto` or an integer, got `{n}`")),
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
enum BandwidthSetting {
    Lag(usize),
    Text(String),
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub family: String,
    pub beta1: Vec<f64>,
    pub beta2: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub lag: usize,
    pub betas: Vec<f64>,
    #[serde(default = "default_scales")]
    pub scales: Vec<u32>,
    #[serde(default = "default_wavelet")]
    pub wavelet: String,
}

fn default_scales() -> Vec<u32> {
    (1..=5).collect()
}

fn default_wavelet() -> String {
    "haar".into()
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    #[serde(default)]
    replications: Option<usize>,
    #[serde(default)]
    null_replications: Option<usize>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub workers: Option<usize>,
    #[serde(default)]
    pub skip_errors: bool,
    #[serde(default)]
    pub lengths: Vec<usize>,
    #[serde(default)]
    pub models: Vec<String>,
    #[serde(default)]
    pub tests: Vec<String>,
    #[serde(default)]
    pub innovation: Option<Innovation>,
    #[serde(default)]
    pub burn_in: Option<usize>,
    #[serde(default)]
    nw_bandwidth: Option<BandwidthSetting>,
    #[serde(default)]
    pub nw_center: Option<bool>,
    #[serde(default)]
    pub grid: Option<GridConfig>,
    #[serde(default)]
    pub sweep: Option<SweepConfig>,
}

impl SimConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("invalid config {}", path.display()))
    }

    pub fn parse(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn replications(&self) -> usize {
        self.replications.unwrap_or(DEFAULT_REPLICATIONS)
    }

    pub fn null_replications(&self) -> usize {
        self.null_replications.unwrap_or(DEFAULT_NULL_REPLICATIONS)
    }

    pub fn hac(&self) -> Result<HacConfig> {
        let mut hac = HacConfig::default();
        if let Some(b) = &self.nw_bandwidth {
            hac.bandwidth = match b {
                BandwidthSetting::Lag(n) => Bandwidth::Fixed(*n),
                BandwidthSetting::Text(s) => parse_bandwidth(s).map_err(anyhow::Error::msg)?,
            };
        }
        if let Some(c) = self.nw_center {
            hac.center = c;
        }
        Ok(hac)
    }

    pub fn study(&self) -> Result<StudyConfig> {
        let reps = self.replications();
        if reps == 0 {
            bail!("replications must be at least 1");
        }
        Ok(StudyConfig {
            replications: reps,
            master_seed: self.seed.unwrap_or(StudyConfig::default().master_seed),
            workers: self.workers.unwrap_or(1).max(1),
            skip_errors: self.skip_errors,
            hac: self.hac()?,
        })
    }

    pub fn test_specs(&self) -> Result<Vec<TestSpec>> {
        if self.tests.is_empty() {
            bail!("config lists no tests");
        }
        self.tests
            .iter()
            .map(|t| t.parse().with_context(|| format!("test `{t}`")))
            .collect()
    }

    fn models(&self) -> Result<Vec<Model>> {
        let mut out: Vec<Model> = self
            .models
            .iter()
            .map(|m| m.parse().with_context(|| format!("model `{m}`")))
            .collect::<Result<_>>()?;
        if let Some(grid) = &self.grid {
            for &b1 in &grid.beta1 {
                for &b2 in &grid.beta2 {
                    let id = format!("{}({b1},{b2})", grid.family);
                    out.push(id.parse().with_context(|| format!("grid model `{id}`"))?);
                }
            }
        }
        Ok(out)
    }

    pub fn dgps(&self) -> Result<Vec<DgpSpec>> {
        if self.lengths.is_empty() {
            bail!("config lists no sample lengths");
        }
        let models = self.models()?;
        if models.is_empty() {
            bail!("config lists no models");
        }
        let mut out = Vec::new();
        for &len in &self.lengths {
            for &model in &models {
                let mut spec = DgpSpec::new(model, len);
                if let Some(i) = self.innovation {
                    spec.innovation = i;
                }
                if let Some(b) = self.burn_in {
                    if !model.is_time_indexed() {
                        spec.burn_in = b;
                    }
                }
                spec.validate()
                    .with_context(|| format!("model {model} at T={len}"))?;
                out.push(spec);
            }
        }
        Ok(out)
    }

    pub fn sweep_wavelet(&self) -> Result<Wavelet> {
        let sweep = self.sweep.as_ref().context("config has no [sweep] table")?;
        Ok(sweep.wavelet.parse()?)
    }
}
