//! Wavelet and scaling filters, and their cascade into wavelet packet filters.
//!
//! Filters use the maximal-overlap normalization: the wavelet filter `h`
//! sums to zero, the scaling filter `g` sums to one, and both have squared
//! norm 1/2. Under this normalization the cascade needs no extra rescaling,
//! and every packet filter at scale `m` has squared norm `2^-m`.

#![allow(clippy::excessive_precision)]

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance for closed-form filter identities.
pub const FILTER_TOL: f64 = 1e-12;
/// Tolerance for identities of cascaded filters.
pub const CASCADE_TOL: f64 = 1e-10;
/// Default cap on the number of stored packet filter taps (`2^m * L_m`).
pub const DEFAULT_TAP_BUDGET: usize = 1 << 24;

/// Supported Daubechies extremal-phase wavelets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Wavelet {
    Haar,
    D4,
    D6,
    D8,
    D10,
}

impl Wavelet {
    pub const ALL: [Wavelet; 5] = [
        Wavelet::Haar,
        Wavelet::D4,
        Wavelet::D6,
        Wavelet::D8,
        Wavelet::D10,
    ];

    /// Filter length `L`.
    #[allow(clippy::len_without_is_empty)]
    pub fn len(self) -> usize {
        match self {
            Wavelet::Haar => 2,
            Wavelet::D4 => 4,
            Wavelet::D6 => 6,
            Wavelet::D8 => 8,
            Wavelet::D10 => 10,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Wavelet::Haar => "haar",
            Wavelet::D4 => "d4",
            Wavelet::D6 => "d6",
            Wavelet::D8 => "d8",
            Wavelet::D10 => "d10",
        }
    }
}

impl fmt::Display for Wavelet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Wavelet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "haar" | "d2" => Ok(Wavelet::Haar),
            "d4" => Ok(Wavelet::D4),
            "d6" => Ok(Wavelet::D6),
            "d8" => Ok(Wavelet::D8),
            "d10" => Ok(Wavelet::D10),
            _ => Err(Error::UnknownWavelet(s.to_string())),
        }
    }
}

// Daubechies scaling filters, normalized to sum one (squared norm 1/2).
// Computed by spectral factorization at 50 digits.
const D6_SCALING: [f64; 6] = [
    0.235_233_603_892_081_840_38,
    0.570_558_457_915_721_812_88,
    0.325_182_500_263_116_264_25,
    -0.095_467_207_784_163_680_753,
    -0.060_416_104_155_198_104_63,
    0.024_908_749_868_441_867_873,
];

const D8_SCALING: [f64; 8] = [
    0.162_901_714_025_649_174_14,
    0.505_472_857_545_914_431_44,
    0.446_100_069_123_379_811_59,
    -0.019_787_513_117_822_321_548,
    -0.132_253_583_684_519_868_03,
    0.021_808_150_237_088_626_329,
    0.023_251_800_535_490_882_303,
    -0.007_493_494_665_180_736_222_6,
];

const D10_SCALING: [f64; 10] = [
    0.113_209_491_291_779_178_82,
    0.426_971_771_352_514_166_22,
    0.512_163_472_129_598_536_62,
    0.097_883_480_673_904_674_029,
    -0.171_328_357_691_467_443_22,
    -0.022_800_565_941_773_648_742,
    0.054_851_329_321_066_823_522,
    -0.004_413_400_054_179_127_272_1,
    -0.008_895_935_050_977_095_739_8,
    0.002_358_713_969_533_935_762_4,
];

/// A wavelet filter `h` and its scaling filter `g`.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterPair {
    pub wavelet: Wavelet,
    pub h: Vec<f64>,
    pub g: Vec<f64>,
}

impl FilterPair {
    /// Builds a pair from a scaling filter; the wavelet filter follows from
    /// `g_l = (-1)^(l+1) h_(L-1-l)`.
    pub fn from_scaling(wavelet: Wavelet, g: Vec<f64>) -> Self {
        let len = g.len();
        let h = (0..len)
            .map(|l| {
                let v = g[len - 1 - l];
                if l % 2 == 0 {
                    v
                } else {
                    -v
                }
            })
            .collect();
        FilterPair { wavelet, h, g }
    }

    pub fn len(&self) -> usize {
        self.h.len()
    }

    pub fn is_empty(&self) -> bool {
        self.h.is_empty()
    }
}

/// Returns the filter pair for a named wavelet.
pub fn get_filter(wavelet: Wavelet) -> FilterPair {
    let g = match wavelet {
        Wavelet::Haar => vec![0.5, 0.5],
        Wavelet::D4 => {
            let r3 = 3f64.sqrt();
            vec![
                (1.0 + r3) / 8.0,
                (3.0 + r3) / 8.0,
                (3.0 - r3) / 8.0,
                (1.0 - r3) / 8.0,
            ]
        }
        Wavelet::D6 => D6_SCALING.to_vec(),
        Wavelet::D8 => D8_SCALING.to_vec(),
        Wavelet::D10 => D10_SCALING.to_vec(),
    };
    FilterPair::from_scaling(wavelet, g)
}

/// Convenience lookup by name.
pub fn get_filter_by_name(name: &str) -> Result<FilterPair> {
    Ok(get_filter(name.parse()?))
}

/// One filter identity checked by [`validate_filter`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FilterInvariant {
    LengthMismatch,
    WaveletSum,
    ScalingSum,
    WaveletNorm,
    ScalingNorm,
    WaveletEvenShift,
    ScalingEvenShift,
    CrossEvenShift,
    QuadratureMirror,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub invariant: FilterInvariant,
    pub residual: f64,
}

/// Violated invariants with their measured residuals. Empty means valid.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn residual(&self, invariant: FilterInvariant) -> Option<f64> {
        self.violations
            .iter()
            .find(|v| v.invariant == invariant)
            .map(|v| v.residual)
    }
}

/// `sum_l a_l b_(l + shift)` with out-of-range taps treated as zero.
fn shifted_dot(a: &[f64], b: &[f64], shift: isize) -> f64 {
    a.iter()
        .enumerate()
        .filter_map(|(l, &al)| {
            let k = l as isize + shift;
            (k >= 0 && (k as usize) < b.len()).then(|| al * b[k as usize])
        })
        .sum()
}

fn max_even_shift(a: &[f64], b: &[f64]) -> f64 {
    let span = a.len().max(b.len()) as isize;
    (1..=span / 2 + 1)
        .flat_map(|n| [2 * n, -2 * n])
        .map(|s| shifted_dot(a, b, s).abs())
        .fold(0.0, f64::max)
}

/// Checks every filter identity and reports the ones that fail.
pub fn validate_filter(pair: &FilterPair) -> ValidationReport {
    validate_filter_with_tol(pair, FILTER_TOL)
}

pub fn validate_filter_with_tol(pair: &FilterPair, tol: f64) -> ValidationReport {
    let mut report = ValidationReport::default();
    let (h, g) = (&pair.h, &pair.g);
    if h.len() != g.len() {
        report.violations.push(Violation {
            invariant: FilterInvariant::LengthMismatch,
            residual: (h.len() as f64 - g.len() as f64).abs(),
        });
        return report;
    }
    let len = h.len();
    let mirror = (0..len)
        .map(|l| {
            let sign = if l % 2 == 0 { -1.0 } else { 1.0 };
            (g[l] - sign * h[len - 1 - l]).abs()
        })
        .fold(0.0, f64::max);

    let checks = [
        (FilterInvariant::WaveletSum, h.iter().sum::<f64>().abs()),
        (
            FilterInvariant::ScalingSum,
            (g.iter().sum::<f64>() - 1.0).abs(),
        ),
        (
            FilterInvariant::WaveletNorm,
            (h.iter().map(|x| x * x).sum::<f64>() - 0.5).abs(),
        ),
        (
            FilterInvariant::ScalingNorm,
            (g.iter().map(|x| x * x).sum::<f64>() - 0.5).abs(),
        ),
        (FilterInvariant::WaveletEvenShift, max_even_shift(h, h)),
        (FilterInvariant::ScalingEvenShift, max_even_shift(g, g)),
        (FilterInvariant::CrossEvenShift, max_even_shift(g, h)),
        (FilterInvariant::QuadratureMirror, mirror),
    ];
    for (invariant, residual) in checks {
        if residual.is_nan() || residual > tol {
            report.violations.push(Violation {
                invariant,
                residual,
            });
        }
    }
    report
}

/// Cascaded packet filters for all `2^m` bands at one scale.
#[derive(Debug, Clone, PartialEq)]
pub struct PacketFilterBank {
    pub base: FilterPair,
    pub scale: u32,
    /// Row `n` is the band-`n` filter; every row has `filter_len` taps.
    pub filters: Vec<Vec<f64>>,
    pub filter_len: usize,
}

impl PacketFilterBank {
    pub fn bands(&self) -> usize {
        self.filters.len()
    }

    pub fn filter(&self, band: usize) -> Result<&[f64]> {
        self.filters
            .get(band)
            .map(Vec::as_slice)
            .ok_or(Error::BandOutOfRange {
                band,
                scale: self.scale,
            })
    }
}

/// Equivalent filter length `L_m = (2^m - 1)(L - 1) + 1`.
pub fn cascade_len(base_len: usize, scale: u32) -> usize {
    ((1usize << scale) - 1) * (base_len - 1) + 1
}

/// `out[l] = sum_k step[k] * parent[l - stride * k]`.
fn upsampled_convolve(step: &[f64], parent: &[f64], stride: usize) -> Vec<f64> {
    let len = parent.len() + stride * (step.len() - 1);
    let mut out = vec![0.0; len];
    for (k, &s) in step.iter().enumerate() {
        for (j, &p) in parent.iter().enumerate() {
            out[j + stride * k] += s * p;
        }
    }
    out
}

pub fn packet_filters(pair: &FilterPair, scale: u32) -> Result<PacketFilterBank> {
    packet_filters_with_budget(pair, scale, DEFAULT_TAP_BUDGET)
}

/// Builds the scale-`m` packet filter bank by the recursion
/// `v[m,n,l] = sum_k u[n,k] v[m-1, n/2, l - 2^(m-1) k]`, where `u` is the
/// scaling filter when `n mod 4` is 0 or 3 and the wavelet filter otherwise.
pub fn packet_filters_with_budget(
    pair: &FilterPair,
    scale: u32,
    tap_budget: usize,
) -> Result<PacketFilterBank> {
    if scale == 0 {
        return Err(Error::InvalidScale(scale));
    }
    if pair.is_empty() || pair.h.len() != pair.g.len() {
        return Err(Error::InvalidFilter(
            "filters must be non-empty and of equal length".into(),
        ));
    }
    if scale >= usize::BITS - 8 {
        return Err(Error::ScaleTooLarge {
            scale,
            entries: usize::MAX,
            budget: tap_budget,
        });
    }
    let filter_len = cascade_len(pair.len(), scale);
    let entries = filter_len.saturating_mul(1usize << scale);
    if entries > tap_budget {
        return Err(Error::ScaleTooLarge {
            scale,
            entries,
            budget: tap_budget,
        });
    }

    let mut level = vec![pair.g.clone(), pair.h.clone()];
    for j in 2..=scale {
        let stride = 1usize << (j - 1);
        level = (0..1usize << j)
            .map(|n| {
                let step = match n % 4 {
                    0 | 3 => &pair.g,
                    _ => &pair.h,
                };
                upsampled_convolve(step, &level[n / 2], stride)
            })
            .collect();
    }
    debug_assert!(level.iter().all(|f| f.len() == filter_len));

    Ok(PacketFilterBank {
        base: pair.clone(),
        scale,
        filters: level,
        filter_len,
    })
}

/// Pyramid-transform wavelet filters for levels `1..=m`: the level-`j`
/// filter is the wavelet filter upsampled by `2^(j-1)` applied after
/// `j - 1` upsampled scaling filters. Level `j` has `L_j` taps.
pub fn level_wavelet_filters(pair: &FilterPair, levels: u32) -> Result<Vec<Vec<f64>>> {
    if levels == 0 {
        return Err(Error::InvalidScale(levels));
    }
    let mut scaling = vec![1.0];
    let mut out = Vec::with_capacity(levels as usize);
    for j in 1..=levels {
        let stride = 1usize << (j - 1);
        out.push(upsampled_convolve(&pair.h, &scaling, stride));
        scaling = upsampled_convolve(&pair.g, &scaling, stride);
    }
    Ok(out)
}
