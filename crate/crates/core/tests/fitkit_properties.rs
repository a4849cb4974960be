use airbridge_core::fitkit::notch::synthetic_sweep;
use airbridge_core::fitkit::{
    fit_notch, fit_resistivity, fit_tls, geometric_ratio, linear_fit, notch_s21, photon_number,
    tls_loss, Dims, NotchModel, TlsParams, UnitGeometry,
};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Normal;

const LOSS_BASE: f64 = 5e-7;
const LOSS_PER_BRIDGE: f64 = 3.84e-9;
const RHO: f64 = 0.21e-6;

fn loss_points(noise: Option<(&mut ChaCha8Rng, f64)>) -> Vec<(f64, f64)> {
    let counts = (0..10).map(|k| 10.0 * k as f64);
    match noise {
        None => counts
            .map(|n| (n, LOSS_BASE + n * LOSS_PER_BRIDGE))
            .collect(),
        Some((rng, rel)) => {
            let d = Normal::new(0.0, rel).unwrap();
            counts
                .map(|n| (n, (LOSS_BASE + n * LOSS_PER_BRIDGE) * (1.0 + rng.sample(d))))
                .collect()
        }
    }
}

#[test]
fn loss_per_bridge_noiseless() {
    let fit = linear_fit(&loss_points(None), None).unwrap();
    assert!((fit.slope - LOSS_PER_BRIDGE).abs() < 1e-12);
    assert!((fit.intercept - LOSS_BASE).abs() < 1e-15);
    assert!((fit.r_squared - 1.0).abs() < 1e-12);
}

#[test]
fn loss_per_bridge_noise_statistics() {
    // 1% multiplicative noise on ten points; the slope estimate is unbiased
    // and its reported stderr matches the spread across seeds
    let mut rel = Vec::new();
    let mut reported = Vec::new();
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let fit = linear_fit(&loss_points(Some((&mut rng, 0.01))), None).unwrap();
        rel.push(fit.slope / LOSS_PER_BRIDGE - 1.0);
        reported.push(fit.slope_stderr / LOSS_PER_BRIDGE);
    }
    let mean = rel.iter().sum::<f64>() / 100.0;
    let spread = (rel.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / 99.0).sqrt();
    let typical = reported.iter().sum::<f64>() / 100.0;
    assert!(mean.abs() < 0.005, "bias {mean}");
    assert!(
        (spread / typical - 1.0).abs() < 0.3,
        "spread {spread} vs stderr {typical}"
    );
    assert!(spread > 0.01 && spread < 0.03);
}

fn chain_units(lengths: &[f64]) -> Vec<(UnitGeometry, f64)> {
    lengths
        .iter()
        .map(|&l| {
            let g = UnitGeometry {
                bridge: Dims::bridge(l, 16.0),
                pad: Some(Dims::pad(20.0, 30.0)),
            };
            let r = RHO * geometric_ratio(&g).unwrap();
            (g, r)
        })
        .collect()
}

#[test]
fn resistivity_exact() {
    let fit = fit_resistivity(&chain_units(&[20.0, 40.0, 60.0])).unwrap();
    assert!((fit.rho / RHO - 1.0).abs() < 1e-12);
}

#[test]
fn resistivity_monte_carlo() {
    let d = Normal::new(0.0, 0.05).unwrap();
    let mut hits = 0;
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let units: Vec<_> = chain_units(&[20.0, 60.0])
            .into_iter()
            .map(|(g, r)| (g, r * (1.0 + rng.sample(d))))
            .collect();
        let fit = fit_resistivity(&units).unwrap();
        if (fit.rho / RHO - 1.0).abs() < 0.10 {
            hits += 1;
        }
    }
    assert!(hits >= 95, "{hits}/100");
}

#[test]
fn notch_round_trip_grid() {
    for qi in [1e5, 1e6, 1e7] {
        for qc in [5e4, 1e5, 1e6] {
            for phi in [-0.3, 0.0, 0.3] {
                let m = NotchModel::from_quality(6.3, qi, qc, phi);
                let fit = fit_notch(&synthetic_sweep(&m, 10.0, 201))
                    .unwrap_or_else(|e| panic!("Qi={qi} Qc={qc} phi={phi}: {e}"));
                let tag = format!("Qi={qi} Qc={qc} phi={phi}");
                assert!((fit.f0 / 6.3 - 1.0).abs() < 1e-3, "{tag}");
                assert!(
                    (fit.q_internal / qi - 1.0).abs() < 1e-3,
                    "{tag}: {}",
                    fit.q_internal
                );
                assert!((fit.q_coupling / qc - 1.0).abs() < 1e-3, "{tag}");
                assert!((fit.phi - phi).abs() < 1e-3, "{tag}");
            }
        }
    }
}

fn noisy_sweep(m: &NotchModel, sigma: f64, seed: u64) -> Vec<(f64, Complex64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = Normal::new(0.0, sigma).unwrap();
    synthetic_sweep(m, 10.0, 201)
        .into_iter()
        .map(|(f, s)| (f, s + Complex64::new(rng.sample(d), rng.sample(d))))
        .collect()
}

#[test]
fn notch_monte_carlo() {
    let m = NotchModel::from_quality(6.3, 2.0e6, 1e5, 0.0);
    let mut hits = 0;
    for seed in 0..100u64 {
        if let Ok(fit) = fit_notch(&noisy_sweep(&m, 1e-3, 2000 + seed)) {
            if (fit.q_internal / 2.0e6 - 1.0).abs() < 0.05 {
                hits += 1;
            }
        }
    }
    assert!(hits >= 90, "{hits}/100");
}

#[test]
fn notch_noise_estimate() {
    let m = NotchModel::from_quality(6.3, 2.0e6, 1e5, 0.0);
    let fit = fit_notch(&noisy_sweep(&m, 1e-3, 7)).unwrap();
    assert!((fit.noise_estimate / 1e-3 - 1.0).abs() < 0.2);
    assert!(fit.diagnostics.is_empty(), "{:?}", fit.diagnostics);
}

#[test]
fn tls_round_trip_with_noise() {
    let t = TlsParams::new(1.0 / 2.08e6, 50.0, 1.0, 5.3e7).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let d = Normal::new(0.0, 0.01).unwrap();
    let pts: Vec<(f64, f64)> = (0..40)
        .map(|k| {
            let n = 10f64.powf(-2.0 + 0.25 * k as f64);
            (n, tls_loss(n, &t) * (1.0 + rng.sample(d)))
        })
        .collect();
    let fit = fit_tls(&pts).unwrap();
    assert!((fit.f_delta0 / t.f_delta0 - 1.0).abs() < 0.05);
    assert!((fit.q_hp / t.q_hp - 1.0).abs() < 0.05);
}

proptest! {
    #[test]
    fn linear_fit_equivariance(
        ys in prop::collection::vec(-100.0f64..100.0, 5..20),
        shift in -50.0f64..50.0,
        scale in 0.1f64..10.0,
    ) {
        let pts: Vec<(f64, f64)> = ys.iter().enumerate().map(|(i, y)| (i as f64, *y)).collect();
        let base = linear_fit(&pts, None).unwrap();
        let shifted: Vec<_> = pts.iter().map(|(x, y)| (*x, y + shift)).collect();
        let s = linear_fit(&shifted, None).unwrap();
        prop_assert!((s.slope - base.slope).abs() < 1e-9);
        prop_assert!((s.intercept - base.intercept - shift).abs() < 1e-9);
        let scaled: Vec<_> = pts.iter().map(|(x, y)| (x * scale, *y)).collect();
        let k = linear_fit(&scaled, None).unwrap();
        prop_assert!((k.slope * scale - base.slope).abs() < 1e-9 * (1.0 + base.slope.abs()));
        prop_assert!((0.0..=1.0).contains(&base.r_squared));
        prop_assert!(base.slope_stderr >= 0.0 && base.intercept_stderr >= 0.0);
    }

    #[test]
    fn linear_residuals_orthogonal(ys in prop::collection::vec(-1.0f64..1.0, 3..30)) {
        let pts: Vec<(f64, f64)> = ys.iter().enumerate().map(|(i, y)| (0.5 * i as f64, *y)).collect();
        let fit = linear_fit(&pts, None).unwrap();
        let r: Vec<f64> = pts.iter().map(|(x, y)| y - fit.predict(*x)).collect();
        let scale: f64 = pts.iter().map(|(x, y)| (x * y).abs() + y.abs()).sum::<f64>() + 1.0;
        prop_assert!(r.iter().sum::<f64>().abs() < 1e-10 * scale);
        prop_assert!(pts.iter().zip(&r).map(|((x, _), r)| x * r).sum::<f64>().abs() < 1e-10 * scale);
    }

    #[test]
    fn tls_monotone(
        fd in 1e-8f64..1e-5, nc in 0.1f64..1e4, beta in 0.1f64..3.0, qhp in 1e5f64..1e9,
        n in 0.0f64..1e6, dn in 0.0f64..1e6,
    ) {
        let t = TlsParams::new(fd, nc, beta, qhp).unwrap();
        prop_assert!(tls_loss(n + dn, &t) <= tls_loss(n, &t));
        prop_assert!(tls_loss(n, &t) > 1.0 / qhp);
    }

    #[test]
    fn photon_number_linear_in_power(dbm in -160.0f64..-60.0, step in -30.0f64..30.0) {
        let m = NotchModel::from_quality(6.3, 2e6, 1e5, 0.0);
        let ratio = photon_number(dbm + step, &m) / photon_number(dbm, &m);
        prop_assert!((ratio / 10f64.powf(step / 10.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn notch_far_detuned(offset in 50.0f64..500.0) {
        let m = NotchModel::from_quality(6.3, 1e6, 1e5, 0.2);
        let s = notch_s21(6.3 + offset * m.linewidth(), &m);
        prop_assert!((s - 1.0).norm() < 0.02);
    }
}
