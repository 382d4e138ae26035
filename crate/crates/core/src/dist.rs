//! Reference distributions used for p-values.

use statrs::distribution::{ChiSquared, Continuous, ContinuousCDF};
use statrs::function::gamma;

use crate::error::{Error, Result};

/// Upper tail of the chi-squared distribution with `df` degrees of freedom.
pub fn chi2_sf(x: f64, df: u32) -> Result<f64> {
    if df == 0 {
        return Err(Error::InvalidDegreesOfFreedom);
    }
    if x.is_nan() {
        return Err(Error::InvalidParameter(
            "chi-squared argument is NaN".into(),
        ));
    }
    if x <= 0.0 {
        return Ok(1.0);
    }
    if x.is_infinite() {
        return Ok(0.0);
    }
    Ok(gamma::gamma_ur(df as f64 / 2.0, x / 2.0).clamp(0.0, 1.0))
}

/// Upper `alpha` critical value of chi-squared with `df` degrees of freedom.
pub fn chi2_critical(alpha: f64, df: u32) -> Result<f64> {
    if df == 0 {
        return Err(Error::InvalidDegreesOfFreedom);
    }
    let dist = ChiSquared::new(df as f64)
        .map_err(|e| Error::InvalidParameter(format!("chi-squared: {e}")))?;
    // statrs inverts by bisection to ~1e-6; polish with Newton on the tail.
    let mut x = dist.inverse_cdf(1.0 - alpha);
    for _ in 0..4 {
        let step = (chi2_sf(x, df)? - alpha) / dist.pdf(x);
        if !step.is_finite() {
            break;
        }
        x += step;
    }
    Ok(x)
}

/// Upper tail of the standard normal.
pub fn normal_sf(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

/// One-sample Kolmogorov–Smirnov statistic against U(0, 1).
pub fn ks_uniform_statistic(sample: &[f64]) -> f64 {
    let mut xs: Vec<f64> = sample.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let x = x.clamp(0.0, 1.0);
            let above = (i as f64 + 1.0) / n - x;
            let below = x - i as f64 / n;
            above.max(below)
        })
        .fold(0.0, f64::max)
}

/// Asymptotic p-value of a KS statistic `d` from `n` observations, with
/// Stephens' small-sample correction.
pub fn ks_pvalue(d: f64, n: usize) -> f64 {
    let sn = (n as f64).sqrt();
    let lambda = (sn + 0.12 + 0.11 / sn) * d;
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut acc = 0.0;
    for k in 1..=200 {
        let k = k as f64;
        let term = (-2.0 * k * k * lambda * lambda).exp();
        acc += if k as u64 % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * acc).clamp(0.0, 1.0)
}

/// Convenience: KS test of `sample` against U(0, 1); returns `(D, p)`.
pub fn ks_uniform(sample: &[f64]) -> (f64, f64) {
    let d = ks_uniform_statistic(sample);
    (d, ks_pvalue(d, sample.len()))
}

#[cfg(test)]
mod tests {
    use super::*;

    // Closed forms for integer degrees of freedom:
    // even k: e^(-x/2) sum_(j<k/2) (x/2)^j / j!
    // odd k:  erfc(sqrt(x/2)) + e^(-x/2) sum_(j=1..(k-1)/2) (x/2)^(j-1/2) / Gamma(j+1/2)
    fn chi2_sf_oracle(x: f64, k: u32) -> f64 {
        let h = x / 2.0;
        if k.is_multiple_of(2) {
            let mut term = 1.0;
            let mut acc = 1.0;
            for j in 1..k / 2 {
                term *= h / j as f64;
                acc += term;
            }
            (-h).exp() * acc
        } else {
            let mut acc = libm::erfc(h.sqrt());
            // term_j = h^(j-1/2)/Gamma(j+1/2); term_1 = sqrt(h)/Gamma(3/2)
            let mut term = h.sqrt() / (std::f64::consts::PI.sqrt() / 2.0);
            for j in 1..=(k - 1) / 2 {
                if j > 1 {
                    term *= h / (j as f64 - 0.5);
                }
                acc += (-h).exp() * term;
            }
            acc
        }
    }

    #[test]
    fn chi2_matches_closed_form() {
        for k in 1..=31 {
            for &x in &[0.01, 0.5, 1.0, 3.0, 7.5, 15.0, 30.0, 60.0] {
                let got = chi2_sf(x, k).unwrap();
                let want = chi2_sf_oracle(x, k);
                assert!((got - want).abs() < 1e-10, "k={k} x={x}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn chi2_reference_points() {
        assert_eq!(chi2_sf(0.0, 3).unwrap(), 1.0);
        assert!((chi2_sf(3.8415, 1).unwrap() - 0.05).abs() < 1e-4);
        assert!((chi2_sf(7.8147, 3).unwrap() - 0.05).abs() < 1e-4);
        assert_eq!(chi2_sf(1.0, 0), Err(Error::InvalidDegreesOfFreedom));
        let c = chi2_critical(0.05, 3).unwrap();
        assert!((chi2_sf(c, 3).unwrap() - 0.05).abs() < 1e-9);
    }

    #[test]
    fn normal_tail() {
        assert_eq!(normal_sf(0.0), 0.5);
        assert!((normal_sf(1.6449) - 0.05).abs() < 1e-4);
        for &x in &[0.1, 0.7, 1.3, 2.9, 4.4] {
            assert!((normal_sf(-x) - (1.0 - normal_sf(x))).abs() < 1e-12);
        }
        // Phi(-1) from erfc(1/sqrt 2) = 0.15865525393145705
        assert!((normal_sf(1.0) - 0.158_655_253_931_457_05).abs() < 1e-12);
    }

    #[test]
    fn ks_on_grid_is_small() {
        let n = 1000;
        let grid: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
        let (d, p) = ks_uniform(&grid);
        assert!((d - 0.5 / n as f64).abs() < 1e-12);
        assert!(p > 0.99);
        let skewed: Vec<f64> = grid.iter().map(|x| x * x).collect();
        assert!(ks_uniform(&skewed).1 < 1e-6);
    }
}
