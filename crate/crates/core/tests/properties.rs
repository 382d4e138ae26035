use mfb_core::filters::{get_filter, level_wavelet_filters, packet_filters, Wavelet};
use mfb_core::hypothesis::{gsm_test, mfb_test, Variant};
use mfb_core::longrun::{nw_lrv, HacConfig};
use mfb_core::transform::{modwpt, modwt, Series};
use mfb_core::wvr::{wavelet_variance_ratios, xi_hat, z_sequence, VarianceSource};
use proptest::prelude::*;

fn wavelet() -> impl Strategy<Value = Wavelet> {
    prop::sample::select(Wavelet::ALL.to_vec())
}

fn series(min: usize, max: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0f64..10.0, min..max)
        .prop_filter("nonzero energy", |v| v.iter().any(|x| x.abs() > 1e-3))
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn packet_transform_is_linear(
        w in wavelet(), m in 1u32..4, y1 in series(8, 80), a in -3.0f64..3.0, b in -3.0f64..3.0,
    ) {
        let y2: Vec<f64> = y1.iter().rev().map(|v| v.sin()).collect();
        let bank = packet_filters(&get_filter(w), m).unwrap();
        let mix: Vec<f64> = y1.iter().zip(&y2).map(|(p, q)| a * p + b * q).collect();
        let c1 = modwpt(&Series::new(y1).unwrap(), &bank);
        let c2 = modwpt(&Series::new(y2).unwrap(), &bank);
        let cm = modwpt(&Series::new(mix).unwrap(), &bank);
        for n in 0..bank.bands() {
            for t in 0..cm.rows[n].len() {
                let want = a * c1.rows[n][t] + b * c2.rows[n][t];
                prop_assert!((cm.rows[n][t] - want).abs() < 1e-10 * (1.0 + want.abs()));
            }
        }
    }

    #[test]
    fn circular_shift_commutes_exactly(w in wavelet(), m in 1u32..4, y in series(8, 64), s in 0usize..64) {
        let len = y.len();
        let s = s % len;
        let shifted: Vec<f64> = (0..len).map(|t| y[(t + len - s) % len]).collect();
        let bank = packet_filters(&get_filter(w), m).unwrap();
        let c = modwpt(&Series::new(y).unwrap(), &bank);
        let cs = modwpt(&Series::new(shifted).unwrap(), &bank);
        for n in 0..bank.bands() {
            for t in 0..len {
                prop_assert_eq!(cs.rows[n][t], c.rows[n][(t + len - s) % len]);
            }
        }
    }

    #[test]
    fn energy_is_preserved(w in wavelet(), m in 1u32..5, y in series(4, 100)) {
        let y = Series::new(y).unwrap();
        let pair = get_filter(w);
        let bank = packet_filters(&pair, m).unwrap();
        let e = y.energy();
        prop_assert!(close(modwpt(&y, &bank).total_energy(), e, 1e-10));
        prop_assert!(close(modwt(&y, &pair, m).unwrap().total_energy(), e, 1e-10));
        let xi = xi_hat(&modwpt(&y, &bank), &y).unwrap();
        prop_assert!((xi.iter().sum::<f64>() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn ratio_deviation_equals_z_sum(w in wavelet(), m in 1u32..4, y in series(4, 80)) {
        let y = Series::new(y).unwrap();
        let bank = packet_filters(&get_filter(w), m).unwrap();
        let xi = xi_hat(&modwpt(&y, &bank), &y).unwrap();
        let target = 0.5f64.powi(m as i32);
        for n in 0..bank.bands() {
            let z: f64 = z_sequence(&bank, n, &y).unwrap().iter().sum();
            let rhs = 2.0 * z / y.energy();
            prop_assert!(close(xi[n] - target, rhs, 1e-8), "band {}: {} vs {}", n, xi[n] - target, rhs);
        }
    }

    #[test]
    fn analytic_statistic_is_scale_free(w in wavelet(), m in 1u32..4, y in series(40, 120), k in -6i32..6) {
        // powers of two rescale without rounding, so equality is exact
        let c = 2f64.powi(k);
        let y0 = Series::new(y.clone()).unwrap();
        let y1 = Series::new(y.iter().map(|v| c * v).collect()).unwrap();
        let hac = HacConfig::default();
        let a = mfb_test(&y0, w, m, Variant::G, &hac).unwrap();
        let b = mfb_test(&y1, w, m, Variant::G, &hac).unwrap();
        prop_assert_eq!(a.statistic, b.statistic);
    }

    #[test]
    fn robust_statistics_are_scale_free(m in 1u32..3, y in series(60, 120), c in 0.01f64..50.0) {
        let y0 = Series::new(y.clone()).unwrap();
        let y1 = Series::new(y.iter().map(|v| -c * v).collect()).unwrap();
        let hac = HacConfig::default();
        for variant in [Variant::G, Variant::Triangle, Variant::E] {
            let (Ok(a), Ok(b)) = (
                mfb_test(&y0, Wavelet::Haar, m, variant, &hac),
                mfb_test(&y1, Wavelet::Haar, m, variant, &hac),
            ) else {
                continue;
            };
            prop_assert!(close(a.statistic, b.statistic, 1e-8), "{:?}: {} vs {}", variant, a.statistic, b.statistic);
        }
    }

    #[test]
    fn one_scale_tests_coincide(w in wavelet(), y in series(20, 100)) {
        let y = Series::new(y).unwrap();
        let hac = HacConfig::default();
        for variant in [Variant::G, Variant::Triangle, Variant::E] {
            let a = mfb_test(&y, w, 1, variant, &hac);
            let b = gsm_test(&y, w, 1, variant, &hac);
            match (a, b) {
                (Ok(a), Ok(b)) => {
                    prop_assert_eq!(a.statistic, b.statistic);
                    prop_assert_eq!(a.p_value, b.p_value);
                }
                (Err(a), Err(b)) => prop_assert_eq!(a, b),
                (a, b) => prop_assert!(false, "{:?} vs {:?}", a, b),
            }
        }
    }

    #[test]
    fn long_run_variance_is_nonnegative(y in series(2, 200)) {
        prop_assert!(nw_lrv(&y, &HacConfig::default()).unwrap() >= 0.0);
    }

    #[test]
    fn level_filters_have_dyadic_energy(w in wavelet(), levels in 1u32..6) {
        let filters = level_wavelet_filters(&get_filter(w), levels).unwrap();
        for (j, f) in filters.iter().enumerate() {
            let norm: f64 = f.iter().map(|v| v * v).sum();
            prop_assert!((norm - 0.5f64.powi(j as i32 + 1)).abs() < 1e-10);
        }
    }
}

#[test]
fn ratios_from_bank_and_from_result_agree() {
    let y = Series::new((0..64).map(|t| ((t * 7 % 13) as f64 - 6.0) / 3.0).collect()).unwrap();
    let bank = packet_filters(&get_filter(Wavelet::D4), 2).unwrap();
    let r = wavelet_variance_ratios(
        &y,
        &bank,
        VarianceSource::Analytic,
        &HacConfig::default(),
        true,
    )
    .unwrap();
    assert_eq!(r.xi_hat, xi_hat(&modwpt(&y, &bank), &y).unwrap());
    assert_eq!(r.z.unwrap().len(), 3);
    assert_eq!(r.wv.len(), 3);
}
