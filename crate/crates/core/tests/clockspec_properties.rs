use magictrap::clockspec::*;
use magictrap::HalfInt;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// red / blue from explicit thermal weights p_n = nbar^n / (nbar+1)^(n+1):
// red ~ sum p_n n, blue ~ sum p_n (n+1).
fn thermal_ratio(nbar: f64) -> f64 {
    let (mut red, mut blue) = (0.0, 0.0);
    for n in 0..=200 {
        let p = nbar.powi(n) / (nbar + 1.0).powi(n + 1);
        red += p * n as f64;
        blue += p * (n + 1) as f64;
    }
    red / blue
}

#[test]
fn sideband_ratio_matches_thermal_sum() {
    for nbar in [0.2, 1.0, 5.0] {
        let w = sideband_weights(0.3, nbar).unwrap();
        assert!((w.red / w.blue - thermal_ratio(nbar)).abs() < 1e-9, "{nbar}");
    }
}

#[test]
fn sideband_features_sit_at_trap_frequency() {
    let grid = linear_grid(-100e3, 100e3, 2001);
    let tr = sideband_spectrum(0.31, 49e3, 1.0, 2e3, &grid).unwrap();
    let pos: Vec<f64> = tr.features.iter().map(|f| f.position_hz).collect();
    assert_eq!(pos, vec![-49e3, 0.0, 49e3]);
    let at = |x: f64| tr.response[grid.iter().position(|&g| (g - x).abs() < 1.0).unwrap()];
    assert!(at(49e3) > at(-49e3));
    assert!(at(0.0) > at(49e3));
}

#[test]
fn nbar_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..20 {
        let nbar: f64 = rng.random_range(0.0..20.0);
        let w = sideband_weights(0.2, nbar).unwrap();
        let back = nbar_from_asymmetry(w.red / w.blue).unwrap();
        assert!((back - nbar).abs() < 1e-12 * nbar.max(1.0));
    }
}

#[test]
fn zeeman_multiplet_structure() {
    let tr = ClockTransition::sr87(-1.084e6);
    let lines = zeeman_multiplet(&tr, 5e-5).unwrap();
    assert_eq!(lines.len(), 10);
    assert_eq!(lines[0].m_f, HalfInt::from_twice(-9));
    for w in lines.windows(2) {
        assert!(((w[1].offset_hz - w[0].offset_hz) - tr.delta_g_hz_per_t * 5e-5).abs() < 1e-9);
    }
    for (a, b) in lines.iter().zip(lines.iter().rev()) {
        assert_eq!(a.offset_hz, -b.offset_hz);
    }
}

#[test]
fn pair_average_cancels_odd_shifts_at_every_field() {
    let tr = ClockTransition::sr87(-1.084e6);
    let vector_light_shift_per_m = 0.37;
    let nu0 = 12.5;
    for b in [0.0, 1e-5, 5e-5, 1e-4, 3e-4] {
        let lines = zeeman_multiplet(&tr, b).unwrap();
        let shifted = |m: HalfInt| {
            let z = lines.iter().find(|l| l.m_f == m).unwrap().offset_hz;
            nu0 + z + vector_light_shift_per_m * m.value()
        };
        let avg = pair_average(shifted(HalfInt::from_twice(9)), shifted(HalfInt::from_twice(-9)));
        assert!((avg - nu0).abs() <= 1e-12 * nu0);
    }
}

#[test]
fn three_sites_long_hand() {
    let ms = vec![
        Measurement { site: "A".into(), value_hz: 70.0, stat_hz: 3.0, sys_hz: 4.0 },
        Measurement { site: "B".into(), value_hz: 74.0, stat_hz: 6.0, sys_hz: 8.0 },
        Measurement { site: "C".into(), value_hz: 73.0, stat_hz: 1.0, sys_hz: 1.0 },
    ];
    // sigma^2 = 25, 100, 2
    let w = [1.0 / 25.0, 1.0 / 100.0, 0.5];
    let wsum: f64 = w.iter().sum();
    let mean = (70.0 * w[0] + 74.0 * w[1] + 73.0 * w[2]) / wsum;
    let chi2 = (w[0] * (70.0 - mean).powi(2) + w[1] * (74.0 - mean).powi(2) + w[2] * (73.0 - mean).powi(2)) / 2.0;
    let a = aggregate_measurements(&ms).unwrap();
    assert!((a.mean_hz - mean).abs() < 1e-12);
    assert!((a.sigma_mean_hz - wsum.powf(-0.5)).abs() < 1e-12);
    assert!((a.reduced_chi2 - chi2).abs() < 1e-12);
}

#[test]
fn illustrative_ledger_parses() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/data/measurements_illustrative.csv");
    let ms = read_measurements(std::fs::File::open(path).unwrap()).unwrap();
    assert_eq!(ms.len(), 4);
    assert!(aggregate_measurements(&ms).unwrap().chi2_defined);
}

proptest! {
    #[test]
    fn aggregate_invariances(
        values in prop::collection::vec((-100.0f64..100.0, 0.1f64..10.0, 0.1f64..10.0), 2..8),
        scale in 0.1f64..10.0,
        rot in 0usize..8,
    ) {
        let ms: Vec<Measurement> = values.iter().enumerate()
            .map(|(i, &(v, s, y))| Measurement { site: i.to_string(), value_hz: v, stat_hz: s, sys_hz: y })
            .collect();
        let a = aggregate_measurements(&ms).unwrap();
        let mut rotated = ms.clone();
        rotated.rotate_left(rot % ms.len());
        rotated.reverse();
        let b = aggregate_measurements(&rotated).unwrap();
        prop_assert!((a.mean_hz - b.mean_hz).abs() < 1e-9);
        let scaled: Vec<Measurement> = ms.iter()
            .map(|m| Measurement { stat_hz: m.stat_hz * scale, sys_hz: m.sys_hz * scale, ..m.clone() })
            .collect();
        let c = aggregate_measurements(&scaled).unwrap();
        prop_assert!((a.mean_hz - c.mean_hz).abs() < 1e-9);
        prop_assert!((c.sigma_mean_hz / a.sigma_mean_hz - scale).abs() < 1e-9);
    }

    #[test]
    fn sideband_ratio_increases_with_nbar(n1 in 0.0f64..50.0, dn in 1e-3f64..10.0, eta in 0.01f64..0.9) {
        let a = sideband_weights(eta, n1).unwrap();
        let b = sideband_weights(eta, n1 + dn).unwrap();
        prop_assert!(a.red >= 0.0 && a.blue > 0.0);
        prop_assert!(b.red / b.blue > a.red / a.blue);
    }

    #[test]
    fn rabi_fwhm_scales_as_inverse_time(t in 0.01f64..10.0) {
        let w = rabi_fwhm(pi_pulse_rabi(t), t, 1.0).unwrap().unwrap();
        prop_assert!((w * t - 0.798_685_355).abs() < 1e-8);
    }
}
