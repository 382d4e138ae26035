//! Bartlett-kernel (Newey–West) long-run variance and covariance.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kernel {
    Bartlett,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Bandwidth {
    /// `floor(4 (T/100)^(2/9))`
    Auto,
    Fixed(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HacConfig {
    pub kernel: Kernel,
    pub bandwidth: Bandwidth,
    /// Subtract the sequence mean before forming autocovariances.
    pub center: bool,
}

impl Default for HacConfig {
    fn default() -> Self {
        HacConfig {
            kernel: Kernel::Bartlett,
            bandwidth: Bandwidth::Auto,
            center: true,
        }
    }
}

impl HacConfig {
    /// Resolved truncation lag for a sequence of length `len`.
    pub fn lag(&self, len: usize) -> Result<usize> {
        match self.bandwidth {
            Bandwidth::Auto => Ok(auto_bandwidth(len)),
            Bandwidth::Fixed(b) if b < len => Ok(b),
            Bandwidth::Fixed(b) => Err(Error::InvalidParameter(format!(
                "bandwidth {b} must be below the series length {len}"
            ))),
        }
    }
}

pub fn auto_bandwidth(len: usize) -> usize {
    (4.0 * (len as f64 / 100.0).powf(2.0 / 9.0)).floor() as usize
}

fn bartlett(k: usize, lag: usize) -> f64 {
    1.0 - k as f64 / (lag as f64 + 1.0)
}

fn centered(x: &[f64], center: bool) -> Vec<f64> {
    if !center {
        return x.to_vec();
    }
    let mu = x.iter().sum::<f64>() / x.len() as f64;
    x.iter().map(|v| v - mu).collect()
}

/// `T^-1 sum_(t>=k) x_t y_(t-k)`
fn cross_cov(x: &[f64], y: &[f64], k: usize) -> f64 {
    x[k..].iter().zip(y).map(|(a, b)| a * b).sum::<f64>() / x.len() as f64
}

/// Bartlett long-run variance, truncated at zero from below.
pub fn nw_lrv(x: &[f64], cfg: &HacConfig) -> Result<f64> {
    if x.len() < 2 {
        return Err(Error::SeriesTooShort {
            needed: 2,
            got: x.len(),
        });
    }
    let lag = cfg.lag(x.len())?;
    let x = centered(x, cfg.center);
    let mut acc = cross_cov(&x, &x, 0);
    for k in 1..=lag {
        acc += 2.0 * bartlett(k, lag) * cross_cov(&x, &x, k);
    }
    Ok(acc.max(0.0))
}

/// Symmetrized Bartlett long-run covariance of two sequences.
pub fn nw_lrcov(x: &[f64], y: &[f64], cfg: &HacConfig) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 2 {
        return Err(Error::SeriesTooShort {
            needed: 2,
            got: x.len(),
        });
    }
    let lag = cfg.lag(x.len())?;
    let (x, y) = (centered(x, cfg.center), centered(y, cfg.center));
    let mut acc = cross_cov(&x, &y, 0);
    for k in 1..=lag {
        acc += bartlett(k, lag) * (cross_cov(&x, &y, k) + cross_cov(&y, &x, k));
    }
    Ok(acc)
}

/// Long-run covariance matrix of several equal-length sequences. The
/// diagonal uses the same estimator as [`nw_lrcov`], not the floored
/// [`nw_lrv`].
pub fn nw_lrcov_matrix(seqs: &[Vec<f64>], cfg: &HacConfig) -> Result<Vec<Vec<f64>>> {
    let k = seqs.len();
    let mut out = vec![vec![0.0; k]; k];
    for i in 0..k {
        for j in i..k {
            let c = nw_lrcov(&seqs[i], &seqs[j], cfg)?;
            out[i][j] = c;
            out[j][i] = c;
        }
    }
    Ok(out)
}

/// `T^-1 sum y_t^2`, no demeaning.
pub fn sigma2_hat(y: &[f64]) -> f64 {
    if y.is_empty() {
        return 0.0;
    }
    y.iter().map(|v| v * v).sum::<f64>() / y.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn normals(n: usize, seed: u64, sd: f64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| sd * Distribution::<f64>::sample(&StandardNormal, &mut rng))
            .collect()
    }

    #[test]
    fn zero_vector() {
        assert_eq!(nw_lrv(&[0.0; 50], &HacConfig::default()).unwrap(), 0.0);
        assert_eq!(sigma2_hat(&[0.0; 5]), 0.0);
    }

    #[test]
    fn iid_unit_variance() {
        let x = normals(10_000, 1, 1.0);
        let v = nw_lrv(&x, &HacConfig::default()).unwrap();
        assert!((v - 1.0).abs() < 0.1, "{v}");
    }

    #[test]
    fn alternating_sequence() {
        let t = 1000;
        let x: Vec<f64> = (0..t)
            .map(|i| if i % 2 == 0 { 1.0 } else { -1.0 })
            .collect();
        let cfg = HacConfig {
            bandwidth: Bandwidth::Fixed(1),
            center: false,
            ..HacConfig::default()
        };
        let v = nw_lrv(&x, &cfg).unwrap();
        let expected = 1.0 - (t as f64 - 1.0) / t as f64;
        assert!((v - expected).abs() < 1e-12, "{v}");
    }

    #[test]
    fn cross_covariance_properties() {
        let x = normals(10_000, 2, 1.0);
        let y = normals(10_000, 3, 1.0);
        let cfg = HacConfig::default();
        assert!((nw_lrcov(&x, &x, &cfg).unwrap() - nw_lrv(&x, &cfg).unwrap()).abs() < 1e-12);
        let xy = nw_lrcov(&x, &y, &cfg).unwrap();
        let yx = nw_lrcov(&y, &x, &cfg).unwrap();
        assert!((xy - yx).abs() < 1e-12);
        assert!(xy.abs() < 0.1);
        assert_eq!(
            nw_lrcov(&x[..10], &y[..9], &cfg),
            Err(Error::LengthMismatch(10, 9))
        );
    }

    #[test]
    fn sigma2() {
        assert_eq!(sigma2_hat(&[1.0, -1.0, 1.0, -1.0]), 1.0);
        let y = normals(10_000, 4, 2.0);
        assert!((sigma2_hat(&y) - 4.0).abs() < 0.2);
    }

    #[test]
    fn bandwidth_rules() {
        assert_eq!(auto_bandwidth(100), 4);
        assert_eq!(auto_bandwidth(1000), 6);
        let cfg = HacConfig {
            bandwidth: Bandwidth::Fixed(10),
            ..HacConfig::default()
        };
        assert!(cfg.lag(10).is_err());
        assert!(nw_lrv(&[1.0], &HacConfig::default()).is_err());
    }

    #[test]
    fn scale_equivariance() {
        let x = normals(500, 5, 1.0);
        let cfg = HacConfig::default();
        let c = -3.7;
        let scaled: Vec<f64> = x.iter().map(|v| c * v).collect();
        let a = nw_lrv(&x, &cfg).unwrap();
        let b = nw_lrv(&scaled, &cfg).unwrap();
        assert!((b - c * c * a).abs() < 1e-10 * b.abs());
    }
}
