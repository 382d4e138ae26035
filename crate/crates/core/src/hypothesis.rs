//! Joint white-noise tests: multi-frequency-band (packet) and multi-scale
//! (pyramid) variance-ratio tests, plus Ljung–Box and the automatic
//! robust portmanteau baselines.
//!
//! Both variance-ratio tests share one quadratic form `W' S^-1 W`:
//!
//! | variant    | standardization of `W`          | `S`                         |
//! |------------|---------------------------------|-----------------------------|
//! | `g`        | closed-form `a(v, v)`           | closed-form correlation `A` |
//! | `triangle` | `sigma2_hat`, Newey–West `avar` | closed-form correlation `A` |
//! | `e`        | `sigma2_hat`, Newey–West `avar` | Newey–West correlation      |

use std::fmt;
use std::str::FromStr;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::dist::chi2_sf;
use crate::error::{Error, Result};
use crate::filters::{get_filter, level_wavelet_filters, packet_filters, FilterPair, Wavelet};
use crate::longrun::{nw_lrcov_matrix, HacConfig};
use crate::transform::{modwpt, modwt, Series};
use crate::wvr::{standardize, xi_hat, xi_hat_levels, AnalyticCovariance, VarianceSource};

pub const NOMINAL_LEVEL: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TestKind {
    #[serde(rename = "MFB")]
    Mfb,
    #[serde(rename = "GSM")]
    Gsm,
    LjungBox,
    #[serde(rename = "AQ")]
    Aq,
}

impl fmt::Display for TestKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TestKind::Mfb => "MFB",
            TestKind::Gsm => "GSM",
            TestKind::LjungBox => "LjungBox",
            TestKind::Aq => "AQ",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    G,
    Triangle,
    E,
    None,
}

impl Variant {
    pub const JOINT: [Variant; 3] = [Variant::G, Variant::Triangle, Variant::E];

    pub fn name(self) -> &'static str {
        match self {
            Variant::G => "g",
            Variant::Triangle => "triangle",
            Variant::E => "e",
            Variant::None => "none",
        }
    }

    fn source(self) -> VarianceSource {
        match self {
            Variant::G => VarianceSource::Analytic,
            _ => VarianceSource::NeweyWest,
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "g" => Ok(Variant::G),
            "triangle" | "t" | "delta" => Ok(Variant::Triangle),
            "e" => Ok(Variant::E),
            "none" => Ok(Variant::None),
            _ => Err(Error::InvalidParameter(format!("unknown variant `{s}`"))),
        }
    }
}

/// Outcome of one test on one series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub test: TestKind,
    pub variant: Variant,
    pub wavelet: Option<Wavelet>,
    /// Scale `m` for MFB/GSM, lag `K` for Ljung–Box, selected lag for AQ.
    #[serde(rename = "m_or_K")]
    pub m_or_k: usize,
    pub statistic: f64,
    pub df: u32,
    pub p_value: f64,
    pub reject_at_05: bool,
    pub notes: Vec<String>,
}

impl TestReport {
    fn chi2(
        test: TestKind,
        variant: Variant,
        wavelet: Option<Wavelet>,
        m_or_k: usize,
        statistic: f64,
        df: u32,
        notes: Vec<String>,
    ) -> Result<Self> {
        let p_value = chi2_sf(statistic.max(0.0), df)?;
        Ok(TestReport {
            test,
            variant,
            wavelet,
            m_or_k,
            statistic,
            df,
            p_value,
            reject_at_05: p_value < NOMINAL_LEVEL,
            notes,
        })
    }
}

fn condition_number(m: &DMatrix<f64>) -> f64 {
    let eig = SymmetricEigen::new(m.clone());
    let max = eig.eigenvalues.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let min = eig.eigenvalues.iter().fold(f64::INFINITY, |a, &v| a.min(v));
    if min <= 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

fn factorize(rows: &[Vec<f64>]) -> Result<Cholesky<f64, Dyn>> {
    let k = rows.len();
    let m = DMatrix::from_fn(k, k, |i, j| rows[i][j]);
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::SingularCovariance {
            condition: f64::INFINITY,
        });
    }
    Cholesky::new(m.clone()).ok_or_else(|| Error::SingularCovariance {
        condition: condition_number(&m),
    })
}

/// `w' S^-1 w` from a Cholesky factor of `S`.
fn quadratic_form(factor: &Cholesky<f64, Dyn>, w: &[f64]) -> f64 {
    let v = DVector::from_column_slice(w);
    let u = factor
        .l_dirty()
        .solve_lower_triangular(&v)
        .expect("Cholesky factor has a positive diagonal");
    u.norm_squared()
}

/// Filters, null targets and the closed-form correlation shared by the
/// packet and pyramid tests.
#[derive(Debug, Clone)]
struct JointForm {
    filters: Vec<Vec<f64>>,
    targets: Vec<f64>,
    analytic_factor: Cholesky<f64, Dyn>,
    max_filter_len: usize,
}

impl JointForm {
    fn new(filters: Vec<Vec<f64>>, targets: Vec<f64>) -> Result<Self> {
        let analytic = AnalyticCovariance::from_filters(&filters);
        let analytic_factor = factorize(&analytic.correlation)?;
        let max_filter_len = filters.iter().map(Vec::len).max().unwrap_or(0);
        Ok(JointForm {
            filters,
            targets,
            analytic_factor,
            max_filter_len,
        })
    }

    /// Statistic and diagnostic notes given the detail ratios `xi`.
    fn evaluate(
        &self,
        y: &Series,
        xi: &[f64],
        variant: Variant,
        hac: &HacConfig,
    ) -> Result<(f64, Vec<String>)> {
        let keep_z = variant == Variant::E;
        let s = standardize(
            y,
            &self.filters,
            xi,
            &self.targets,
            variant.source(),
            hac,
            keep_z,
        )?;
        let mut notes = Vec::new();
        if y.len() < self.max_filter_len {
            notes.push(format!(
                "series length {} is below the filter length {}",
                y.len(),
                self.max_filter_len
            ));
        }
        for (k, &f) in s.floored.iter().enumerate() {
            if f {
                notes.push(format!("long-run variance floored for component {}", k + 1));
            }
        }
        let stat = match variant {
            Variant::G | Variant::Triangle => quadratic_form(&self.analytic_factor, &s.wv),
            Variant::E => {
                let z = s.z.expect("z kept for the estimated covariance");
                let cov = nw_lrcov_matrix(&z, hac)?;
                let k = cov.len();
                let corr: Vec<Vec<f64>> = (0..k)
                    .map(|i| {
                        (0..k)
                            .map(|j| cov[i][j] / (s.variances[i].sqrt() * s.variances[j].sqrt()))
                            .collect()
                    })
                    .collect();
                quadratic_form(&factorize(&corr)?, &s.wv)
            }
            Variant::None => {
                return Err(Error::InvalidParameter(
                    "variance-ratio tests need variant g, triangle or e".into(),
                ))
            }
        };
        Ok((stat, notes))
    }
}

fn check_variant(variant: Variant) -> Result<()> {
    if variant == Variant::None {
        return Err(Error::InvalidParameter(
            "variance-ratio tests need variant g, triangle or e".into(),
        ));
    }
    Ok(())
}

/// Multi-frequency-band test prepared for repeated use at one scale.
#[derive(Debug, Clone)]
pub struct MfbTest {
    wavelet: Wavelet,
    scale: u32,
    variant: Variant,
    hac: HacConfig,
    bank: crate::filters::PacketFilterBank,
    form: JointForm,
}

impl MfbTest {
    pub fn new(wavelet: Wavelet, scale: u32, variant: Variant, hac: HacConfig) -> Result<Self> {
        Self::with_filter(get_filter(wavelet), scale, variant, hac)
    }

    pub fn with_filter(
        pair: FilterPair,
        scale: u32,
        variant: Variant,
        hac: HacConfig,
    ) -> Result<Self> {
        check_variant(variant)?;
        let bank = packet_filters(&pair, scale)?;
        let detail = bank.filters[1..].to_vec();
        let targets = vec![0.5f64.powi(scale as i32); detail.len()];
        let form = JointForm::new(detail, targets)?;
        Ok(MfbTest {
            wavelet: pair.wavelet,
            scale,
            variant,
            hac,
            bank,
            form,
        })
    }

    pub fn df(&self) -> u32 {
        (1u32 << self.scale) - 1
    }

    pub fn run(&self, y: &Series) -> Result<TestReport> {
        let xi = xi_hat(&modwpt(y, &self.bank), y)?;
        let (stat, notes) = self.form.evaluate(y, &xi[1..], self.variant, &self.hac)?;
        TestReport::chi2(
            TestKind::Mfb,
            self.variant,
            Some(self.wavelet),
            self.scale as usize,
            stat,
            self.df(),
            notes,
        )
    }
}

/// Multi-scale test over pyramid levels `1..=m`.
#[derive(Debug, Clone)]
pub struct GsmTest {
    pair: FilterPair,
    scale: u32,
    variant: Variant,
    hac: HacConfig,
    form: JointForm,
}

impl GsmTest {
    pub fn new(wavelet: Wavelet, scale: u32, variant: Variant, hac: HacConfig) -> Result<Self> {
        check_variant(variant)?;
        let pair = get_filter(wavelet);
        // same tap budget as the packet bank at this scale
        packet_filters(&pair, scale)?;
        let filters = level_wavelet_filters(&pair, scale)?;
        let targets = (1..=scale).map(|j| 0.5f64.powi(j as i32)).collect();
        let form = JointForm::new(filters, targets)?;
        Ok(GsmTest {
            pair,
            scale,
            variant,
            hac,
            form,
        })
    }

    pub fn df(&self) -> u32 {
        self.scale
    }

    pub fn run(&self, y: &Series) -> Result<TestReport> {
        let coeffs = modwt(y, &self.pair, self.scale)?;
        let xi = xi_hat_levels(&coeffs, y)?;
        let (stat, notes) = self.form.evaluate(y, &xi, self.variant, &self.hac)?;
        TestReport::chi2(
            TestKind::Gsm,
            self.variant,
            Some(self.pair.wavelet),
            self.scale as usize,
            stat,
            self.df(),
            notes,
        )
    }
}

pub fn mfb_test(
    y: &Series,
    wavelet: Wavelet,
    scale: u32,
    variant: Variant,
    hac: &HacConfig,
) -> Result<TestReport> {
    MfbTest::new(wavelet, scale, variant, *hac)?.run(y)
}

pub fn gsm_test(
    y: &Series,
    wavelet: Wavelet,
    scale: u32,
    variant: Variant,
    hac: &HacConfig,
) -> Result<TestReport> {
    GsmTest::new(wavelet, scale, variant, *hac)?.run(y)
}

fn demeaned(y: &[f64]) -> Vec<f64> {
    let mu = y.iter().sum::<f64>() / y.len() as f64;
    y.iter().map(|v| v - mu).collect()
}

/// Ljung–Box `Q_K = T(T+2) sum_(k<=K) rho_k^2 / (T-k)` on the demeaned series.
pub fn ljung_box(y: &Series, max_lag: usize) -> Result<TestReport> {
    let t = y.len();
    if max_lag == 0 || max_lag >= t {
        return Err(Error::InvalidParameter(format!(
            "lag {max_lag} must lie in 1..{t}"
        )));
    }
    let x = demeaned(y.values());
    let denom: f64 = x.iter().map(|v| v * v).sum();
    if denom <= 0.0 {
        return Err(Error::ZeroEnergy);
    }
    let tf = t as f64;
    let q = (1..=max_lag)
        .map(|k| {
            let rho = x[k..].iter().zip(&x).map(|(a, b)| a * b).sum::<f64>() / denom;
            rho * rho / (tf - k as f64)
        })
        .sum::<f64>()
        * tf
        * (tf + 2.0);
    TestReport::chi2(
        TestKind::LjungBox,
        Variant::None,
        None,
        max_lag,
        q,
        max_lag as u32,
        Vec::new(),
    )
}

/// Tuning of the automatic robust portmanteau test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AqConfig {
    /// Threshold constant of the penalty switch.
    pub q: f64,
    /// Largest candidate lag; `None` means `min(20, T/4)`.
    pub max_lag: Option<usize>,
}

impl Default for AqConfig {
    fn default() -> Self {
        AqConfig {
            q: 2.4,
            max_lag: None,
        }
    }
}

pub const AQ_MIN_LEN: usize = 30;

/// Robust squared autocorrelations `gamma_k^2 / tau_k` for `k = 1..=d`.
pub fn robust_autocorrelations(y: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    let x = demeaned(y);
    (1..=max_lag)
        .map(|k| {
            let n = (x.len() - k) as f64;
            let (mut gamma, mut tau) = (0.0, 0.0);
            for (a, b) in x[k..].iter().zip(&x) {
                gamma += a * b;
                tau += a * a * b * b;
            }
            let (gamma, tau) = (gamma / n, tau / n);
            if tau <= 0.0 {
                return Err(Error::NonPositiveVariance {
                    index: k,
                    value: tau,
                });
            }
            Ok(gamma * gamma / tau)
        })
        .collect()
}

/// Automatic portmanteau test with data-driven lag; chi-squared(1) reference.
pub fn aq_test(y: &Series) -> Result<TestReport> {
    aq_test_with(y, &AqConfig::default())
}

pub fn aq_test_with(y: &Series, cfg: &AqConfig) -> Result<TestReport> {
    let t = y.len();
    if t < AQ_MIN_LEN {
        return Err(Error::SeriesTooShort {
            needed: AQ_MIN_LEN,
            got: t,
        });
    }
    let d = cfg.max_lag.unwrap_or((t / 4).min(20)).clamp(1, t - 1);
    let rho2 = robust_autocorrelations(y.values(), d)?;
    let tf = t as f64;
    let log_t = tf.ln();
    let max_abs = rho2.iter().fold(0.0f64, |a, r| a.max(r.sqrt()));
    let bic = tf.sqrt() * max_abs <= (cfg.q * log_t).sqrt();
    let mut best = (1usize, f64::NEG_INFINITY, 0.0);
    let mut cumulative = 0.0;
    for (i, r) in rho2.iter().enumerate() {
        let p = i + 1;
        cumulative += tf * r;
        let penalty = if bic {
            p as f64 * log_t
        } else {
            2.0 * p as f64
        };
        let crit = cumulative - penalty;
        if crit > best.1 {
            best = (p, crit, cumulative);
        }
    }
    let (lag, _, stat) = best;
    let notes = vec![format!(
        "selected lag {lag} of {d} ({} penalty)",
        if bic { "BIC" } else { "AIC" }
    )];
    TestReport::chi2(TestKind::Aq, Variant::None, None, lag, stat, 1, notes)
}

/// Declarative test choice used by the battery and the simulation harness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "test", rename_all = "snake_case")]
pub enum TestSpec {
    Mfb {
        wavelet: Wavelet,
        scale: u32,
        variant: Variant,
    },
    Gsm {
        wavelet: Wavelet,
        scale: u32,
        variant: Variant,
    },
    LjungBox {
        lag: usize,
    },
    Aq,
}

impl TestSpec {
    /// Short label such as `MFB_2^g[haar]` or `Q_5`.
    pub fn label(&self) -> String {
        match self {
            TestSpec::Mfb {
                wavelet,
                scale,
                variant,
            } => format!("MFB_{scale}^{variant}[{wavelet}]"),
            TestSpec::Gsm {
                wavelet,
                scale,
                variant,
            } => format!("GSM_{scale}^{variant}[{wavelet}]"),
            TestSpec::LjungBox { lag } => format!("Q_{lag}"),
            TestSpec::Aq => "AQ".to_string(),
        }
    }

    pub fn prepare(&self, hac: HacConfig) -> Result<PreparedTest> {
        Ok(match *self {
            TestSpec::Mfb {
                wavelet,
                scale,
                variant,
            } => PreparedTest::Mfb(MfbTest::new(wavelet, scale, variant, hac)?),
            TestSpec::Gsm {
                wavelet,
                scale,
                variant,
            } => PreparedTest::Gsm(GsmTest::new(wavelet, scale, variant, hac)?),
            TestSpec::LjungBox { lag } => PreparedTest::LjungBox(lag),
            TestSpec::Aq => PreparedTest::Aq(AqConfig::default()),
        })
    }

    pub fn df(&self) -> u32 {
        match *self {
            TestSpec::Mfb { scale, .. } => (1u32 << scale) - 1,
            TestSpec::Gsm { scale, .. } => scale,
            TestSpec::LjungBox { lag } => lag as u32,
            TestSpec::Aq => 1,
        }
    }
}

impl FromStr for TestSpec {
    type Err = Error;

    /// Parses `mfb:haar:2:g`, `gsm:d4:3:e`, `q:5` or `aq`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').map(str::trim).collect();
        let bad = || Error::InvalidParameter(format!("cannot parse test `{s}`"));
        let num = |p: &str| p.parse::<usize>().map_err(|_| bad());
        match parts.as_slice() {
            [kind, w, m, v] if kind.eq_ignore_ascii_case("mfb") => Ok(TestSpec::Mfb {
                wavelet: w.parse()?,
                scale: num(m)? as u32,
                variant: v.parse()?,
            }),
            [kind, w, m, v] if kind.eq_ignore_ascii_case("gsm") => Ok(TestSpec::Gsm {
                wavelet: w.parse()?,
                scale: num(m)? as u32,
                variant: v.parse()?,
            }),
            [kind, k] if kind.eq_ignore_ascii_case("q") || kind.eq_ignore_ascii_case("lb") => {
                Ok(TestSpec::LjungBox { lag: num(k)? })
            }
            [kind] if kind.eq_ignore_ascii_case("aq") => Ok(TestSpec::Aq),
            _ => Err(bad()),
        }
    }
}

/// A test with its filter banks and closed-form factors precomputed.
#[derive(Debug, Clone)]
pub enum PreparedTest {
    Mfb(MfbTest),
    Gsm(GsmTest),
    LjungBox(usize),
    Aq(AqConfig),
}

impl PreparedTest {
    pub fn run(&self, y: &Series) -> Result<TestReport> {
        match self {
            PreparedTest::Mfb(t) => t.run(y),
            PreparedTest::Gsm(t) => t.run(y),
            PreparedTest::LjungBox(k) => ljung_box(y, *k),
            PreparedTest::Aq(cfg) => aq_test_with(y, cfg),
        }
    }
}
