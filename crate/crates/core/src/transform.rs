//! Circular maximal-overlap packet and pyramid transforms.
//!
//! All filtering wraps around the series end: coefficient `t` is
//! `sum_l f[l] * y[(t - l) mod T]` on 0-based storage. The packet filters
//! and the pyramid filters are normalized so that both transforms preserve
//! the series energy exactly up to rounding.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::filters::{FilterPair, PacketFilterBank};

/// A finite, non-trivial observed series.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    values: Vec<f64>,
}

impl Series {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySeries);
        }
        if values.len() < 2 {
            return Err(Error::SeriesTooShort {
                needed: 2,
                got: values.len(),
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Series { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.values
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Copy with the sample mean subtracted.
    pub fn demeaned(&self) -> Series {
        let mu = self.mean();
        Series {
            values: self.values.iter().map(|v| v - mu).collect(),
        }
    }

    pub fn energy(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }
}

impl AsRef<[f64]> for Series {
    fn as_ref(&self) -> &[f64] {
        &self.values
    }
}

/// Packet coefficients at one scale: row `n` holds band `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct PacketCoefficients {
    pub scale: u32,
    pub rows: Vec<Vec<f64>>,
}

impl PacketCoefficients {
    pub fn band_energy(&self, band: usize) -> f64 {
        self.rows[band].iter().map(|w| w * w).sum()
    }

    pub fn total_energy(&self) -> f64 {
        (0..self.rows.len()).map(|n| self.band_energy(n)).sum()
    }
}

/// Pyramid coefficients: wavelet rows for levels `1..=m`, plus the level-`m`
/// smooth.
#[derive(Debug, Clone, PartialEq)]
pub struct ModwtCoefficients {
    pub scale: u32,
    pub wavelet: Vec<Vec<f64>>,
    pub smooth: Vec<f64>,
}

impl ModwtCoefficients {
    pub fn total_energy(&self) -> f64 {
        let w: f64 = self.wavelet.iter().flatten().map(|v| v * v).sum();
        w + self.smooth.iter().map(|v| v * v).sum::<f64>()
    }
}

/// `out[t] = sum_l filter[l] * x[(t - stride * l) mod T]`.
///
/// Every transform in the crate goes through this one routine, so identical
/// filters applied to identical input give bit-identical output.
pub fn circular_filter(x: &[f64], filter: &[f64], stride: usize) -> Vec<f64> {
    let len = x.len();
    let mut out = vec![0.0; len];
    if len == 0 {
        return out;
    }
    for (l, &f) in filter.iter().enumerate() {
        if f == 0.0 {
            continue;
        }
        let shift = (stride * l) % len;
        // t >= shift reads x[t - shift]; t < shift wraps to x[t + len - shift].
        let (head, tail) = out.split_at_mut(shift);
        for (o, &v) in tail.iter_mut().zip(&x[..len - shift]) {
            *o += f * v;
        }
        for (o, &v) in head.iter_mut().zip(&x[len - shift..]) {
            *o += f * v;
        }
    }
    out
}

/// Maximal-overlap discrete wavelet packet transform at the bank's scale.
pub fn modwpt(y: &Series, bank: &PacketFilterBank) -> PacketCoefficients {
    let rows = bank
        .filters
        .iter()
        .map(|f| circular_filter(y.values(), f, 1))
        .collect();
    PacketCoefficients {
        scale: bank.scale,
        rows,
    }
}

/// Maximal-overlap discrete wavelet transform (pyramid algorithm).
pub fn modwt(y: &Series, pair: &FilterPair, scale: u32) -> Result<ModwtCoefficients> {
    if scale == 0 {
        return Err(Error::InvalidScale(scale));
    }
    let mut smooth = y.values().to_vec();
    let mut wavelet = Vec::with_capacity(scale as usize);
    for j in 1..=scale {
        let stride = 1usize << (j - 1);
        wavelet.push(circular_filter(&smooth, &pair.h, stride));
        smooth = circular_filter(&smooth, &pair.g, stride);
    }
    Ok(ModwtCoefficients {
        scale,
        wavelet,
        smooth,
    })
}

/// Squared gain `|sum_l v[l] e^(-i 2 pi f l)|^2` of band `band` at frequency
/// `f` (cycles per sample).
pub fn squared_gain(bank: &PacketFilterBank, band: usize, f: f64) -> Result<f64> {
    if !(0.0..=0.5).contains(&f) {
        return Err(Error::InvalidParameter(format!(
            "frequency {f} outside [0, 1/2]"
        )));
    }
    Ok(filter_squared_gain(bank.filter(band)?, f))
}

/// Squared gain of an arbitrary filter; valid for any real `f`.
pub fn filter_squared_gain(filter: &[f64], f: f64) -> f64 {
    let (mut re, mut im) = (0.0, 0.0);
    for (l, &v) in filter.iter().enumerate() {
        let phase = 2.0 * PI * f * l as f64;
        re += v * phase.cos();
        im -= v * phase.sin();
    }
    re * re + im * im
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filters::{get_filter, packet_filters, Wavelet};

    fn series(v: &[f64]) -> Series {
        Series::new(v.to_vec()).unwrap()
    }

    #[test]
    fn series_validation() {
        assert_eq!(Series::new(vec![]), Err(Error::EmptySeries));
        assert!(matches!(
            Series::new(vec![1.0]),
            Err(Error::SeriesTooShort { .. })
        ));
        assert_eq!(Series::new(vec![1.0, f64::NAN]), Err(Error::NonFinite(1)));
    }

    #[test]
    fn constant_series_has_zero_detail() {
        let y = series(&[3.5; 37]);
        for w in Wavelet::ALL {
            let bank = packet_filters(&get_filter(w), 3).unwrap();
            let c = modwpt(&y, &bank);
            for row in &c.rows[1..] {
                assert!(row.iter().all(|v| v.abs() < 1e-12));
            }
            let p = modwt(&y, &get_filter(w), 3).unwrap();
            for row in &p.wavelet {
                assert!(row.iter().all(|v| v.abs() < 1e-12));
            }
            assert!(p.smooth.iter().all(|v| (v - 3.5).abs() < 1e-12));
        }
    }

    #[test]
    fn haar_alternating_by_hand() {
        let y = series(&[1.0, -1.0, 1.0, -1.0]);
        let bank = packet_filters(&get_filter(Wavelet::Haar), 1).unwrap();
        let c = modwpt(&y, &bank);
        // W[1,t] = (y_t - y_(t-1 mod T)) / 2
        assert_eq!(c.rows[1], vec![1.0, -1.0, 1.0, -1.0]);
        assert_eq!(c.rows[0], vec![0.0; 4]);
    }

    #[test]
    fn first_level_pyramid_matches_packet_row() {
        let y = series(&[0.3, -1.2, 2.2, 0.1, -0.7, 1.9, 0.4]);
        for w in Wavelet::ALL {
            let pair = get_filter(w);
            let bank = packet_filters(&pair, 1).unwrap();
            let p = modwt(&y, &pair, 1).unwrap();
            assert_eq!(p.wavelet[0], modwpt(&y, &bank).rows[1]);
        }
    }

    #[test]
    fn short_series_wraps_repeatedly() {
        // L_3 = 22 for D4, longer than T = 5: still energy preserving.
        let y = series(&[1.0, 2.0, -0.5, 0.25, -3.0]);
        let bank = packet_filters(&get_filter(Wavelet::D4), 3).unwrap();
        let c = modwpt(&y, &bank);
        assert!((c.total_energy() - y.energy()).abs() < 1e-10 * y.energy());
    }

    #[test]
    fn gain_endpoints() {
        let bank = packet_filters(&get_filter(Wavelet::Haar), 1).unwrap();
        assert!(squared_gain(&bank, 1, 0.0).unwrap().abs() < 1e-15);
        assert!((squared_gain(&bank, 1, 0.5).unwrap() - 1.0).abs() < 1e-15);
        assert!((squared_gain(&bank, 0, 0.0).unwrap() - 1.0).abs() < 1e-15);
        assert!(matches!(
            squared_gain(&bank, 2, 0.1),
            Err(Error::BandOutOfRange { .. })
        ));
        assert!(squared_gain(&bank, 1, 0.7).is_err());
    }
}
