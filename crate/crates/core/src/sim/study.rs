//! Monte Carlo size, power and scale-sweep studies.
//!
//! Every replication owns a ChaCha8 stream keyed by the master seed, the
//! DGP label and the replication index, so results do not depend on the
//! number of worker threads.

use std::collections::HashMap;
use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dist::chi2_critical;
use crate::error::{Error, Result};
use crate::filters::Wavelet;
use crate::hypothesis::{TestSpec, Variant, NOMINAL_LEVEL};
use crate::longrun::HacConfig;
use crate::sim::dgp::{simulate_with_rng, DgpSpec, Model};

pub const RNG_NAME: &str = "ChaCha8";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StudyConfig {
    pub replications: usize,
    pub master_seed: u64,
    pub workers: usize,
    /// Drop failed replications from the rate denominator. Otherwise they
    /// count as non-rejections.
    pub skip_errors: bool,
    pub hac: HacConfig,
}

impl Default for StudyConfig {
    fn default() -> Self {
        StudyConfig {
            replications: 1000,
            master_seed: 20240101,
            workers: 1,
            skip_errors: false,
            hac: HacConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McResult {
    pub dgp: String,
    pub test: String,
    pub len: usize,
    pub replications: usize,
    pub errors: usize,
    pub rejections: usize,
    /// Rejections over replications, or over successful replications when
    /// errors are skipped.
    pub rejection_rate: f64,
    pub size_adjusted: bool,
    pub critical_value_used: f64,
    pub master_seed: u64,
    pub rng: String,
}

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, &b| {
        (h ^ b as u64).wrapping_mul(0x0100_0000_01b3)
    })
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Generator for replication `rep` of the DGP with label `label`.
pub fn replication_rng(master_seed: u64, label: &str, rep: u64) -> ChaCha8Rng {
    let mut rng =
        ChaCha8Rng::seed_from_u64(splitmix(master_seed ^ splitmix(fnv1a(label.as_bytes()))));
    rng.set_stream(rep);
    rng
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))
}

/// Test statistics per test (outer) and replication (inner); `None` marks a
/// failed test run. All tests see the same simulated path; a failure to
/// simulate aborts.
pub fn collect_statistics(
    dgp: &DgpSpec,
    tests: &[TestSpec],
    replications: usize,
    cfg: &StudyConfig,
) -> Result<Vec<Vec<Option<f64>>>> {
    dgp.validate()?;
    let prepared = tests
        .iter()
        .map(|t| t.prepare(cfg.hac))
        .collect::<Result<Vec<_>>>()?;
    let label = dgp.label();
    let rows: Vec<Result<Vec<Option<f64>>>> = pool(cfg.workers)?.install(|| {
        (0..replications)
            .into_par_iter()
            .map(|rep| {
                let mut rng = replication_rng(cfg.master_seed, &label, rep as u64);
                let y = simulate_with_rng(dgp, &mut rng)?;
                Ok(prepared
                    .iter()
                    .map(|t| t.run(&y).ok().map(|r| r.statistic))
                    .collect())
            })
            .collect()
    });
    let mut out = vec![Vec::with_capacity(replications); tests.len()];
    for row in rows {
        for (i, s) in row?.into_iter().enumerate() {
            out[i].push(s);
        }
    }
    Ok(out)
}

/// Empirical upper-`alpha` quantile: order statistic `ceil((1-alpha) n)`.
pub fn empirical_critical_value(stats: &[f64], alpha: f64) -> Result<f64> {
    if stats.is_empty() {
        return Err(Error::InvalidParameter(
            "no successful null replications for size adjustment".into(),
        ));
    }
    let mut s = stats.to_vec();
    s.sort_by(f64::total_cmp);
    let idx = ((1.0 - alpha) * s.len() as f64).ceil() as usize;
    Ok(s[idx.clamp(1, s.len()) - 1])
}

fn tally(
    dgp: &DgpSpec,
    test: &TestSpec,
    stats: &[Option<f64>],
    cv: f64,
    size_adjusted: bool,
    cfg: &StudyConfig,
) -> McResult {
    let ok: Vec<f64> = stats.iter().flatten().copied().collect();
    let rejections = ok.iter().filter(|&&s| s > cv).count();
    let denominator = if cfg.skip_errors {
        ok.len()
    } else {
        stats.len()
    };
    McResult {
        dgp: dgp.model.to_string(),
        test: test.label(),
        len: dgp.len,
        replications: stats.len(),
        errors: stats.len() - ok.len(),
        rejections,
        rejection_rate: if denominator == 0 {
            f64::NAN
        } else {
            rejections as f64 / denominator as f64
        },
        size_adjusted,
        critical_value_used: cv,
        master_seed: cfg.master_seed,
        rng: RNG_NAME.to_string(),
    }
}

/// Empirical size at the nominal 5% chi-squared critical value.
pub fn run_size_study(
    dgps: &[DgpSpec],
    tests: &[TestSpec],
    cfg: &StudyConfig,
) -> Result<Vec<McResult>> {
    let mut out = Vec::new();
    for dgp in dgps {
        let stats = collect_statistics(dgp, tests, cfg.replications, cfg)?;
        for (test, s) in tests.iter().zip(&stats) {
            let cv = chi2_critical(NOMINAL_LEVEL, test.df())?;
            out.push(tally(dgp, test, s, cv, false, cfg));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelativePower {
    pub dgp: String,
    pub reference: String,
    pub test: String,
    /// `power(reference) / power(test) - 1`
    pub relative: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerStudy {
    pub results: Vec<McResult>,
    pub relative: Vec<RelativePower>,
}

/// Critical values per (null DGP, test), computed once and shared by every
/// alternative with that null.
struct NullCache<'a> {
    tests: &'a [TestSpec],
    null_reps: usize,
    cfg: &'a StudyConfig,
    cache: HashMap<String, Vec<f64>>,
}

impl<'a> NullCache<'a> {
    fn critical_values(&mut self, null: &DgpSpec) -> Result<&[f64]> {
        let key = null.label();
        if !self.cache.contains_key(&key) {
            let stats = collect_statistics(null, self.tests, self.null_reps, self.cfg)?;
            let cvs = stats
                .iter()
                .map(|s| {
                    let ok: Vec<f64> = s.iter().flatten().copied().collect();
                    empirical_critical_value(&ok, NOMINAL_LEVEL)
                })
                .collect::<Result<Vec<_>>>()?;
            self.cache.insert(key.clone(), cvs);
        }
        Ok(&self.cache[&key])
    }
}

/// Size-adjusted power. The first test is the reference for relative power.
pub fn run_power_study(
    alternatives: &[DgpSpec],
    tests: &[TestSpec],
    null_reps: usize,
    cfg: &StudyConfig,
) -> Result<PowerStudy> {
    let mut nulls = NullCache {
        tests,
        null_reps,
        cfg,
        cache: HashMap::new(),
    };
    let mut results = Vec::new();
    let mut relative = Vec::new();
    for alt in alternatives {
        let cvs = nulls.critical_values(&alt.null())?.to_vec();
        let stats = collect_statistics(alt, tests, cfg.replications, cfg)?;
        let block: Vec<McResult> = tests
            .iter()
            .zip(&stats)
            .zip(&cvs)
            .map(|((t, s), &cv)| tally(alt, t, s, cv, true, cfg))
            .collect();
        if let Some((head, rest)) = block.split_first() {
            for r in rest {
                relative.push(RelativePower {
                    dgp: head.dgp.clone(),
                    reference: head.test.clone(),
                    test: r.test.clone(),
                    relative: head.rejection_rate / r.rejection_rate - 1.0,
                });
            }
        }
        results.extend(block);
    }
    Ok(PowerStudy { results, relative })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub lag: usize,
    pub beta: f64,
    pub len: usize,
    pub scale: u32,
    pub test: String,
    pub power: f64,
}

/// Size-adjusted power of `MFB_m^g` and `GSM_m^g` against `AR(lag, beta)`
/// over a grid of scales and coefficients.
pub fn run_scale_sweep(
    lag: usize,
    betas: &[f64],
    scales: &[u32],
    wavelet: Wavelet,
    len: usize,
    null_reps: usize,
    cfg: &StudyConfig,
) -> Result<Vec<SweepPoint>> {
    let tests: Vec<TestSpec> = scales
        .iter()
        .flat_map(|&scale| {
            [
                TestSpec::Mfb {
                    wavelet,
                    scale,
                    variant: Variant::G,
                },
                TestSpec::Gsm {
                    wavelet,
                    scale,
                    variant: Variant::G,
                },
            ]
        })
        .collect();
    let alts = betas
        .iter()
        .map(|&beta| {
            let spec = DgpSpec::new(Model::Ar { lag, beta }, len);
            spec.validate().map(|_| spec)
        })
        .collect::<Result<Vec<_>>>()?;
    let study = run_power_study(&alts, &tests, null_reps, cfg)?;
    let per_alt = tests.len();
    Ok(study
        .results
        .iter()
        .enumerate()
        .map(|(i, r)| SweepPoint {
            lag,
            beta: betas[i / per_alt],
            len,
            scale: scales[(i % per_alt) / 2],
            test: r.test.clone(),
            power: r.rejection_rate,
        })
        .collect())
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn results_csv(results: &[McResult]) -> String {
    let mut out = String::from(
        "dgp,test,T,replications,errors,rejections,rejection_rate,size_adjusted,critical_value,master_seed,rng\n",
    );
    for r in results {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            csv_field(&r.dgp),
            csv_field(&r.test),
            r.len,
            r.replications,
            r.errors,
            r.rejections,
            r.rejection_rate,
            r.size_adjusted,
            r.critical_value_used,
            r.master_seed,
            r.rng
        );
    }
    out
}

pub fn relative_power_csv(rows: &[RelativePower]) -> String {
    let mut out = String::from("dgp,reference,test,relative_power\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            csv_field(&r.dgp),
            csv_field(&r.reference),
            csv_field(&r.test),
            r.relative
        );
    }
    out
}

pub fn sweep_csv(points: &[SweepPoint]) -> String {
    let mut out = String::from("lag,beta,T,scale,test,power\n");
    for p in points {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            p.lag,
            p.beta,
            p.len,
            p.scale,
            csv_field(&p.test),
            p.power
        );
    }
    out
}
