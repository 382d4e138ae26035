//! A configurable set of tests run on one series.

use mfb_core::hypothesis::{TestReport, TestSpec, Variant};
use mfb_core::{HacConfig, Series, Wavelet};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("battery needs at least one {0}")]
    Empty(&'static str),
    #[error("variant `{0}` is not a joint-test variant")]
    BadVariant(Variant),
    #[error("scale must be at least 1")]
    ZeroScale,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatteryConfig {
    pub wavelets: Vec<Wavelet>,
    pub scales: Vec<u32>,
    pub variants: Vec<Variant>,
    /// Also run the pyramid (level-only) test for each cell.
    pub gsm: bool,
    pub ljung_box: Vec<usize>,
    pub aq: bool,
    pub hac: HacConfig,
}

impl Default for BatteryConfig {
    fn default() -> Self {
        BatteryConfig {
            wavelets: vec![Wavelet::Haar],
            scales: (1..=5).collect(),
            variants: Variant::JOINT.to_vec(),
            gsm: false,
            ljung_box: Vec::new(),
            aq: true,
            hac: HacConfig::default(),
        }
    }
}

impl BatteryConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.wavelets.is_empty() {
            return Err(ConfigError::Empty("wavelet"));
        }
        if self.scales.is_empty() {
            return Err(ConfigError::Empty("scale"));
        }
        if self.variants.is_empty() {
            return Err(ConfigError::Empty("variant"));
        }
        if let Some(&v) = self.variants.iter().find(|v| **v == Variant::None) {
            return Err(ConfigError::BadVariant(v));
        }
        if self.scales.contains(&0) {
            return Err(ConfigError::ZeroScale);
        }
        Ok(())
    }

    /// Tests in output order: wavelet, then scale, then variant, MFB before
    /// GSM; baselines last.
    pub fn specs(&self) -> Vec<TestSpec> {
        let mut out = Vec::new();
        for &wavelet in &self.wavelets {
            for &scale in &self.scales {
                for &variant in &self.variants {
                    out.push(TestSpec::Mfb {
                        wavelet,
                        scale,
                        variant,
                    });
                    if self.gsm {
                        out.push(TestSpec::Gsm {
                            wavelet,
                            scale,
                            variant,
                        });
                    }
                }
            }
        }
        out.extend(self.ljung_box.iter().map(|&lag| TestSpec::LjungBox { lag }));
        if self.aq {
            out.push(TestSpec::Aq);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailedCell {
    pub test: String,
    pub error: String,
}

/// Battery output; this is the JSON document the renderers consume.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatteryReport {
    pub observations: usize,
    pub reports: Vec<TestReport>,
    pub errors: Vec<FailedCell>,
}

/// Runs every configured test. A failing cell is recorded, not fatal.
pub fn run_battery(y: &Series, cfg: &BatteryConfig) -> Result<BatteryReport, ConfigError> {
    cfg.validate()?;
    let mut reports = Vec::new();
    let mut errors = Vec::new();
    for spec in cfg.specs() {
        match spec.prepare(cfg.hac).and_then(|t| t.run(y)) {
            Ok(r) => reports.push(r),
            Err(e) => errors.push(FailedCell {
                test: spec.label(),
                error: e.to_string(),
            }),
        }
    }
    Ok(BatteryReport {
        observations: y.len(),
        reports,
        errors,
    })
}
