//! Wavelet variance ratios and their standardized statistics.
//!
//! For a band filter `v` the variance ratio estimate is
//! `xi = sum_t W_t^2 / sum_t y_t^2`. Writing `W_t^2` as the diagonal part
//! plus twice the cross part `z_t = sum_(i<j) v_i v_j y_(t-i) y_(t-j)` gives,
//! under circular filtering, `xi - |v|^2 = 2 sum_t z_t / sum_t y_t^2`.
//!
//! When the data have no fourth-order cross cumulants the long-run variance
//! of `z` is `sigma^4 sum_s sum_(i<j) v_i v_j v_(i-s) v_(j-s)`. Substituting
//! `d = j - i` factors that sum into filter autocorrelations:
//! `a(v, w) = 4 sum_(d>=1) R_v(d) R_w(d)` with `R_v(d) = sum_i v_i v_(i+d)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filters::PacketFilterBank;
use crate::longrun::{nw_lrv, sigma2_hat, HacConfig};
use crate::transform::{ModwtCoefficients, PacketCoefficients, Series};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarianceSource {
    Analytic,
    NeweyWest,
}

/// Per-band standardization input for [`wv_statistic`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WvScale {
    /// Closed-form `a(v, v)`.
    Analytic(f64),
    /// `sigma2_hat` and the long-run variance of `z`.
    Estimated { sigma2: f64, avar: f64 },
}

/// Ratios `sum_t W[n,t]^2 / sum_t y_t^2` for every band.
pub fn xi_hat(coeffs: &PacketCoefficients, y: &Series) -> Result<Vec<f64>> {
    let total = y.energy();
    if total <= 0.0 {
        return Err(Error::ZeroEnergy);
    }
    Ok((0..coeffs.rows.len())
        .map(|n| coeffs.band_energy(n) / total)
        .collect())
}

/// Per-level ratios for the pyramid transform.
pub fn xi_hat_levels(coeffs: &ModwtCoefficients, y: &Series) -> Result<Vec<f64>> {
    let total = y.energy();
    if total <= 0.0 {
        return Err(Error::ZeroEnergy);
    }
    Ok(coeffs
        .wavelet
        .iter()
        .map(|w| w.iter().map(|v| v * v).sum::<f64>() / total)
        .collect())
}

/// Circular cross-product sequence `z_t = sum_(i<j) v_i v_j y_(t-i) y_(t-j)`.
pub fn z_from_filter(filter: &[f64], y: &[f64]) -> Vec<f64> {
    let len = y.len();
    let taps = filter.len();
    let mut prod = vec![0.0; taps];
    (0..len)
        .map(|t| {
            for (i, (p, &v)) in prod.iter_mut().zip(filter).enumerate() {
                *p = v * y[(t + len * taps - i) % len];
            }
            // sum_i p_i * (p_(i+1) + ... + p_(L-1)) via a running suffix sum
            let mut suffix = 0.0;
            let mut z = 0.0;
            for &p in prod.iter().rev() {
                z += p * suffix;
                suffix += p;
            }
            z
        })
        .collect()
}

pub fn z_sequence(bank: &PacketFilterBank, band: usize, y: &Series) -> Result<Vec<f64>> {
    Ok(z_from_filter(bank.filter(band)?, y.values()))
}

/// `R(d) = sum_i f_i f_(i+d)` for `d = 1..len-1`; index 0 holds lag 1.
pub fn filter_autocorrelation(f: &[f64]) -> Vec<f64> {
    (1..f.len())
        .map(|d| {
            f[..f.len() - d]
                .iter()
                .zip(&f[d..])
                .map(|(a, b)| a * b)
                .sum()
        })
        .collect()
}

/// `a(v, w) = 4 sum_s sum_(i<j) v_i v_j w_(i-s) w_(j-s)`.
pub fn pair_a(v: &[f64], w: &[f64]) -> f64 {
    let rv = filter_autocorrelation(v);
    let rw = filter_autocorrelation(w);
    4.0 * rv.iter().zip(&rw).map(|(a, b)| a * b).sum::<f64>()
}

fn check_detail_band(bank: &PacketFilterBank, band: usize) -> Result<()> {
    if band == 0 || band >= bank.bands() {
        return Err(Error::BandOutOfRange {
            band,
            scale: bank.scale,
        });
    }
    Ok(())
}

/// Closed-form asymptotic (co)variance factor for bands `n1`, `n2 >= 1`.
pub fn analytic_a(bank: &PacketFilterBank, n1: usize, n2: usize) -> Result<f64> {
    check_detail_band(bank, n1)?;
    check_detail_band(bank, n2)?;
    Ok(pair_a(&bank.filters[n1], &bank.filters[n2]))
}

/// Matrix of `a(v_i, v_j)` and its correlation form.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticCovariance {
    pub a_matrix: Vec<Vec<f64>>,
    pub correlation: Vec<Vec<f64>>,
}

impl AnalyticCovariance {
    pub fn from_filters<F: AsRef<[f64]>>(filters: &[F]) -> Self {
        let acf: Vec<Vec<f64>> = filters
            .iter()
            .map(|f| filter_autocorrelation(f.as_ref()))
            .collect();
        let k = filters.len();
        let mut a_matrix = vec![vec![0.0; k]; k];
        for i in 0..k {
            for j in i..k {
                let v = 4.0 * acf[i].iter().zip(&acf[j]).map(|(a, b)| a * b).sum::<f64>();
                a_matrix[i][j] = v;
                a_matrix[j][i] = v;
            }
        }
        let correlation = (0..k)
            .map(|i| {
                (0..k)
                    .map(|j| {
                        if i == j {
                            1.0
                        } else {
                            a_matrix[i][j] / (a_matrix[i][i].sqrt() * a_matrix[j][j].sqrt())
                        }
                    })
                    .collect()
            })
            .collect();
        AnalyticCovariance {
            a_matrix,
            correlation,
        }
    }

    /// Covariance over the detail bands `1..2^m` of a packet bank.
    pub fn for_bank(bank: &PacketFilterBank) -> Self {
        Self::from_filters(&bank.filters[1..])
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.a_matrix.len())
            .map(|i| self.a_matrix[i][i])
            .collect()
    }
}

/// `WV = sqrt(T / a) (xi - target)` or `sqrt(T sigma^4 / (4 avar)) (xi - target)`.
pub fn wv_statistic(xi: f64, target: f64, scale: WvScale, len: usize) -> Result<f64> {
    let t = len as f64;
    let factor = match scale {
        WvScale::Analytic(a) if a > 0.0 => (t / a).sqrt(),
        WvScale::Analytic(a) => return Err(Error::NonPositiveVariance { index: 0, value: a }),
        WvScale::Estimated { sigma2, avar } if sigma2 > 0.0 && avar > 0.0 => {
            (t * sigma2 * sigma2 / (4.0 * avar)).sqrt()
        }
        WvScale::Estimated { sigma2, avar } => {
            return Err(Error::NonPositiveVariance {
                index: 0,
                value: if sigma2 > 0.0 { avar } else { sigma2 },
            })
        }
    };
    Ok(factor * (xi - target))
}

/// Vectorized [`wv_statistic`] over bands `1..=K`; `xi[k]` pairs with
/// `scales[k]`.
pub fn wv_statistics(xi: &[f64], target: f64, scales: &[WvScale], len: usize) -> Result<Vec<f64>> {
    if xi.len() != scales.len() {
        return Err(Error::LengthMismatch(xi.len(), scales.len()));
    }
    xi.iter()
        .zip(scales)
        .enumerate()
        .map(|(k, (&x, &s))| {
            wv_statistic(x, target, s, len).map_err(|e| match e {
                Error::NonPositiveVariance { value, .. } => Error::NonPositiveVariance {
                    index: k + 1,
                    value,
                },
                other => other,
            })
        })
        .collect()
}

/// Long-run variance of `z`, floored at `1e-12` times its sample variance.
/// Returns the value and whether the floor was applied.
pub fn floored_avar(z: &[f64], hac: &HacConfig) -> Result<(f64, bool)> {
    let lrv = nw_lrv(z, hac)?;
    let mu = if hac.center {
        z.iter().sum::<f64>() / z.len() as f64
    } else {
        0.0
    };
    let gamma0 = z.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / z.len() as f64;
    let floor = 1e-12 * gamma0;
    if lrv > floor {
        Ok((lrv, false))
    } else if floor > 0.0 {
        Ok((floor, true))
    } else {
        Err(Error::NonPositiveVariance {
            index: 0,
            value: lrv,
        })
    }
}

/// Packet variance ratios with their standardized statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct WvrResult {
    pub scale: u32,
    /// All `2^m` bands, including band 0.
    pub xi_hat: Vec<f64>,
    pub sigma2_hat: f64,
    /// `z` rows for bands `1..2^m`, when requested.
    pub z: Option<Vec<Vec<f64>>>,
    /// Statistics for bands `1..2^m`.
    pub wv: Vec<f64>,
    /// `a(v_n, v_n)` or the estimated long-run variance, per detail band.
    pub variances: Vec<f64>,
    pub floored: Vec<bool>,
    pub variance_source: VarianceSource,
}

/// Computes ratios and statistics for every detail band of `bank`.
pub fn wavelet_variance_ratios(
    y: &Series,
    bank: &PacketFilterBank,
    source: VarianceSource,
    hac: &HacConfig,
    keep_z: bool,
) -> Result<WvrResult> {
    let coeffs = crate::transform::modwpt(y, bank);
    let xi = xi_hat(&coeffs, y)?;
    let target = 0.5f64.powi(bank.scale as i32);
    let detail = &bank.filters[1..];
    let targets = vec![target; detail.len()];
    let standardized = standardize(y, detail, &xi[1..], &targets, source, hac, keep_z)?;
    Ok(WvrResult {
        scale: bank.scale,
        xi_hat: xi,
        sigma2_hat: standardized.sigma2,
        z: standardized.z,
        wv: standardized.wv,
        variances: standardized.variances,
        floored: standardized.floored,
        variance_source: source,
    })
}

/// Pyramid (multi-scale) analogue of [`WvrResult`].
#[derive(Debug, Clone, PartialEq)]
pub struct GsResult {
    pub scale: u32,
    pub xi_hat_levels: Vec<f64>,
    pub sigma2_hat: f64,
    pub gs: Vec<f64>,
    pub variances: Vec<f64>,
    pub floored: Vec<bool>,
    pub variance_source: VarianceSource,
}

/// Statistics for levels `1..=m` of a pyramid transform. `level_filters`
/// are the equivalent level filters from
/// [`level_wavelet_filters`](crate::filters::level_wavelet_filters).
pub fn gs_statistics(
    coeffs: &ModwtCoefficients,
    y: &Series,
    level_filters: &[Vec<f64>],
    source: VarianceSource,
    hac: &HacConfig,
) -> Result<GsResult> {
    if level_filters.len() != coeffs.wavelet.len() {
        return Err(Error::LengthMismatch(
            level_filters.len(),
            coeffs.wavelet.len(),
        ));
    }
    let xi = xi_hat_levels(coeffs, y)?;
    let targets: Vec<f64> = (1..=xi.len()).map(|j| 0.5f64.powi(j as i32)).collect();
    let s = standardize(y, level_filters, &xi, &targets, source, hac, false)?;
    Ok(GsResult {
        scale: coeffs.scale,
        xi_hat_levels: xi,
        sigma2_hat: s.sigma2,
        gs: s.wv,
        variances: s.variances,
        floored: s.floored,
        variance_source: source,
    })
}

pub(crate) struct Standardized {
    pub sigma2: f64,
    pub wv: Vec<f64>,
    pub variances: Vec<f64>,
    pub floored: Vec<bool>,
    pub z: Option<Vec<Vec<f64>>>,
}

/// Shared by the packet and pyramid statistics so that identical filters
/// give bit-identical results.
pub(crate) fn standardize<F: AsRef<[f64]>>(
    y: &Series,
    filters: &[F],
    xi: &[f64],
    targets: &[f64],
    source: VarianceSource,
    hac: &HacConfig,
    keep_z: bool,
) -> Result<Standardized> {
    let sigma2 = sigma2_hat(y.values());
    let need_z = keep_z || source == VarianceSource::NeweyWest;
    let z: Option<Vec<Vec<f64>>> = need_z.then(|| {
        filters
            .iter()
            .map(|f| z_from_filter(f.as_ref(), y.values()))
            .collect()
    });
    let (variances, floored, scales): (Vec<f64>, Vec<bool>, Vec<WvScale>) = match source {
        VarianceSource::Analytic => {
            let a: Vec<f64> = filters
                .iter()
                .map(|f| pair_a(f.as_ref(), f.as_ref()))
                .collect();
            let scales = a.iter().map(|&v| WvScale::Analytic(v)).collect();
            (a.clone(), vec![false; a.len()], scales)
        }
        VarianceSource::NeweyWest => {
            let zs = z.as_ref().expect("z computed for estimated variances");
            let mut vars = Vec::with_capacity(zs.len());
            let mut flags = Vec::with_capacity(zs.len());
            for (k, row) in zs.iter().enumerate() {
                let (v, f) = floored_avar(row, hac).map_err(|e| match e {
                    Error::NonPositiveVariance { value, .. } => Error::NonPositiveVariance {
                        index: k + 1,
                        value,
                    },
                    other => other,
                })?;
                vars.push(v);
                flags.push(f);
            }
            let scales = vars
                .iter()
                .map(|&avar| WvScale::Estimated { sigma2, avar })
                .collect();
            (vars, flags, scales)
        }
    };
    let wv = xi
        .iter()
        .zip(targets)
        .zip(&scales)
        .enumerate()
        .map(|(k, ((&x, &target), &scale))| {
            wv_statistic(x, target, scale, y.len()).map_err(|e| match e {
                Error::NonPositiveVariance { value, .. } => Error::NonPositiveVariance {
                    index: k + 1,
                    value,
                },
                other => other,
            })
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(Standardized {
        sigma2,
        wv,
        variances,
        floored,
        z: if keep_z { z } else { None },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filters::{get_filter, packet_filters, Wavelet};
    use crate::transform::modwpt;

    fn brute_a(v: &[f64], w: &[f64]) -> f64 {
        let (lv, lw) = (v.len() as isize, w.len() as isize);
        let at = |f: &[f64], k: isize| -> f64 {
            if k < 0 || k >= f.len() as isize {
                0.0
            } else {
                f[k as usize]
            }
        };
        let mut acc = 0.0;
        for s in -(lw - 1)..lv {
            for i in 0..lv {
                for j in (i + 1)..lv {
                    acc += at(v, i) * at(v, j) * at(w, i - s) * at(w, j - s);
                }
            }
        }
        4.0 * acc
    }

    fn brute_z(v: &[f64], y: &[f64]) -> Vec<f64> {
        let len = y.len() as isize;
        (0..len)
            .map(|t| {
                let mut z = 0.0;
                for i in 0..v.len() {
                    for j in (i + 1)..v.len() {
                        let yi = y[(t - i as isize).rem_euclid(len) as usize];
                        let yj = y[(t - j as isize).rem_euclid(len) as usize];
                        z += v[i] * v[j] * yi * yj;
                    }
                }
                z
            })
            .collect()
    }

    fn wiggly(n: usize) -> Vec<f64> {
        (0..n)
            .map(|i| ((i * i) as f64 * 0.37).sin() + 0.3 * (i as f64 * 1.3).cos())
            .collect()
    }

    #[test]
    fn haar_scale_one_value() {
        let bank = packet_filters(&get_filter(Wavelet::Haar), 1).unwrap();
        assert_eq!(analytic_a(&bank, 1, 1).unwrap(), 0.25);
    }

    #[test]
    fn autocorrelation_route_matches_quadruple_sum() {
        for w in [Wavelet::Haar, Wavelet::D4, Wavelet::D6] {
            let pair = get_filter(w);
            for m in 1..=3 {
                let bank = packet_filters(&pair, m).unwrap();
                for n1 in 1..bank.bands() {
                    for n2 in 1..bank.bands() {
                        let fast = analytic_a(&bank, n1, n2).unwrap();
                        let slow = brute_a(&bank.filters[n1], &bank.filters[n2]);
                        assert!((fast - slow).abs() < 1e-13, "{w} {m} {n1} {n2}");
                        let swapped = analytic_a(&bank, n2, n1).unwrap();
                        assert!((fast - swapped).abs() < 1e-12);
                    }
                }
            }
        }
        // unequal lengths, as used across pyramid levels
        let lv = crate::filters::level_wavelet_filters(&get_filter(Wavelet::D4), 3).unwrap();
        assert!((pair_a(&lv[0], &lv[2]) - brute_a(&lv[0], &lv[2])).abs() < 1e-13);
        assert!((pair_a(&lv[2], &lv[0]) - brute_a(&lv[2], &lv[0])).abs() < 1e-13);
    }

    #[test]
    fn band_zero_has_no_statistic() {
        let bank = packet_filters(&get_filter(Wavelet::Haar), 2).unwrap();
        assert!(analytic_a(&bank, 0, 1).is_err());
        assert!(analytic_a(&bank, 1, 4).is_err());
    }

    #[test]
    fn z_matches_double_sum() {
        let y = wiggly(29);
        for w in [Wavelet::Haar, Wavelet::D4] {
            let bank = packet_filters(&get_filter(w), 3).unwrap();
            for f in &bank.filters {
                let fast = z_from_filter(f, &y);
                let slow = brute_z(f, &y);
                for (a, b) in fast.iter().zip(&slow) {
                    assert!((a - b).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn haar_z_closed_form() {
        let y = wiggly(16);
        let z = z_from_filter(&[0.5, -0.5], &y);
        for t in 0..16 {
            let prev = y[(t + 15) % 16];
            assert!((z[t] + 0.25 * y[t] * prev).abs() < 1e-15);
        }
    }

    #[test]
    fn constant_series_z() {
        let c = 1.7;
        let y = vec![c; 20];
        let bank = packet_filters(&get_filter(Wavelet::D4), 2).unwrap();
        for f in &bank.filters {
            let s: f64 = f.iter().sum();
            let n2: f64 = f.iter().map(|v| v * v).sum();
            let want = c * c * (s * s - n2) / 2.0;
            for z in z_from_filter(f, &y) {
                assert!((z - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn ratios_sum_to_one_and_alternating_case() {
        let y = Series::new(vec![1.0, -1.0, 1.0, -1.0]).unwrap();
        let bank = packet_filters(&get_filter(Wavelet::Haar), 1).unwrap();
        let xi = xi_hat(&modwpt(&y, &bank), &y).unwrap();
        assert_eq!(xi, vec![0.0, 1.0]);

        let y = Series::new(wiggly(64)).unwrap();
        let bank = packet_filters(&get_filter(Wavelet::D8), 3).unwrap();
        let xi = xi_hat(&modwpt(&y, &bank), &y).unwrap();
        assert!((xi.iter().sum::<f64>() - 1.0).abs() < 1e-8);
        assert!(xi.iter().all(|&x| (0.0..=1.0).contains(&x)));

        let zero = Series::new(vec![0.0; 8]).unwrap();
        assert_eq!(xi_hat(&modwpt(&zero, &bank), &zero), Err(Error::ZeroEnergy));
    }

    #[test]
    fn haar_scale_one_statistic_is_negative_autocorrelation() {
        let y = Series::new(wiggly(50)).unwrap();
        let bank = packet_filters(&get_filter(Wavelet::Haar), 1).unwrap();
        let r = wavelet_variance_ratios(
            &y,
            &bank,
            VarianceSource::Analytic,
            &HacConfig::default(),
            false,
        )
        .unwrap();
        let v = y.values();
        let rho = (0..50).map(|t| v[t] * v[(t + 49) % 50]).sum::<f64>() / y.energy();
        assert!((r.wv[0] + (50f64).sqrt() * rho).abs() < 1e-12);
    }

    #[test]
    fn statistic_edge_cases() {
        assert_eq!(
            wv_statistic(0.25, 0.25, WvScale::Analytic(0.3), 100).unwrap(),
            0.0
        );
        assert!(matches!(
            wv_statistics(
                &[0.3, 0.2],
                0.25,
                &[WvScale::Analytic(0.1), WvScale::Analytic(0.0)],
                10
            ),
            Err(Error::NonPositiveVariance { index: 2, .. })
        ));
        assert!(wv_statistic(
            0.3,
            0.25,
            WvScale::Estimated {
                sigma2: 1.0,
                avar: -1.0
            },
            10
        )
        .is_err());
    }

    #[test]
    fn analytic_correlation_is_unit_diagonal() {
        let bank = packet_filters(&get_filter(Wavelet::D4), 3).unwrap();
        let cov = AnalyticCovariance::for_bank(&bank);
        for i in 0..7 {
            assert_eq!(cov.correlation[i][i], 1.0);
            assert!(cov.a_matrix[i][i] > 0.0);
            for j in 0..7 {
                assert_eq!(cov.a_matrix[i][j], cov.a_matrix[j][i]);
            }
        }
    }
}
