//! Detection-function oracles: closed form vs quadrature, Monte-Carlo
//! integration, likelihood properties and parameter recovery.

use appeval::detfn::{self, fit, fit_mle, DistanceData, KeyFamily, KeyFunction};
use appeval::exec::Exec;
use appeval::synth::sample_point_transect;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Mean of g over points uniform in a disk of radius w, with its standard error.
fn mc_detection_probability(key: &KeyFunction, w: f64, n: usize, seed: u64) -> (f64, f64) {
    let chunks = 64;
    let per = n / chunks;
    let sums = Exec::Parallel.map_indexed(chunks, |c| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(1_000_003).wrapping_add(c as u64));
        let (mut s, mut ss) = (0.0, 0.0);
        for _ in 0..per {
            let g = key.eval(w * rng.random::<f64>().sqrt());
            s += g;
            ss += g * g;
        }
        (s, ss)
    });
    let total = (per * chunks) as f64;
    let s: f64 = sums.iter().map(|x| x.0).sum();
    let ss: f64 = sums.iter().map(|x| x.1).sum();
    let mean = s / total;
    let var = (ss / total - mean * mean) * total / (total - 1.0);
    (mean, (var / total).sqrt())
}

#[test]
fn half_normal_closed_form_matches_quadrature() {
    for i in 0..20 {
        for j in 0..20 {
            let sigma = 0.5 + 2.5 * i as f64;
            let w = 1.0 + 4.0 * j as f64;
            let key = KeyFunction::half_normal(sigma).unwrap();
            let closed = detfn::detection_probability(&key, w).unwrap();
            let quad = 2.0 * key.radial_integral_quadrature(w).unwrap() / (w * w);
            assert!((closed - quad).abs() < 1e-8, "sigma={sigma} w={w}: {closed} vs {quad}");
        }
    }
}

#[test]
fn hazard_rate_quadrature_matches_monte_carlo() {
    let key = KeyFunction::hazard_rate(5.0, 3.0).unwrap();
    let p = detfn::detection_probability(&key, 15.0).unwrap();
    let (mc, se) = mc_detection_probability(&key, 15.0, 10_000_000, 11);
    assert!((p - mc).abs() <= 3.0 * se, "quad {p} mc {mc} se {se}");
}

#[test]
fn key_functions_are_monotone() {
    let keys = [
        KeyFunction::half_normal(3.0).unwrap(),
        KeyFunction::hazard_rate(3.0, 1.2).unwrap(),
        KeyFunction::hazard_rate(8.0, 6.0).unwrap(),
    ];
    for key in keys {
        let mut prev = key.eval(0.0);
        assert_eq!(prev, 1.0);
        for i in 1..2000 {
            let g = key.eval(i as f64 * 0.02);
            assert!(g <= prev && g > 0.0, "{key:?} at {}", i as f64 * 0.02);
            prev = g;
        }
    }
}

fn weighted(d: &[f64]) -> Vec<(f64, f64)> {
    d.iter().map(|&r| (r, 1.0)).collect()
}

#[test]
fn half_normal_recovery_n5000() {
    let key = KeyFunction::half_normal(7.0).unwrap();
    let d = sample_point_transect(&key, 20.0, 5000, 2024);
    let f = fit_mle(&weighted(&d), KeyFamily::HalfNormal, 20.0, None).unwrap();
    assert!(f.converged);
    let rel = (f.key.sigma() - 7.0).abs() / 7.0;
    assert!(rel < 0.05, "sigma hat {}", f.key.sigma());
    assert!((f.aic - (2.0 - 2.0 * f.log_likelihood)).abs() < 1e-9);
}

#[test]
fn noiseless_binned_recovery() {
    let key = KeyFunction::half_normal(7.0).unwrap();
    let edges: Vec<f64> = (0..=10).map(|i| 2.0 * i as f64).collect();
    let total = key.radial_integral(20.0).unwrap();
    let counts: Vec<f64> = edges
        .windows(2)
        .map(|e| 10_000.0 * (key.radial_integral(e[1]).unwrap() - key.radial_integral(e[0]).unwrap()) / total)
        .collect();
    let f = fit(&DistanceData::binned(&counts, &edges).unwrap(), KeyFamily::HalfNormal).unwrap();
    assert!((f.key.sigma() - 7.0).abs() < 1e-4, "sigma hat {}", f.key.sigma());
}

#[test]
fn hazard_rate_recovery() {
    let truth = KeyFunction::hazard_rate(6.0, 3.5).unwrap();
    let d = sample_point_transect(&truth, 20.0, 20_000, 99);
    let f = fit_mle(&weighted(&d), KeyFamily::HazardRate, 20.0, None).unwrap();
    let KeyFunction::HazardRate { sigma, shape_b } = f.key else {
        panic!("wrong family")
    };
    assert!((sigma - 6.0).abs() / 6.0 < 0.05, "sigma {sigma}");
    assert!((shape_b - 3.5).abs() / 3.5 < 0.15, "b {shape_b}");
    let p_true = detfn::detection_probability(&truth, 20.0).unwrap();
    assert!((f.detection_prob - p_true).abs() / p_true < 0.03);
}

#[test]
fn count_expansion_gives_same_fit() {
    let key = KeyFunction::half_normal(5.0).unwrap();
    let d = sample_point_transect(&key, 15.0, 300, 5);
    let compact: Vec<(f64, f64)> = d.iter().map(|&r| (r, 3.0)).collect();
    let expanded: Vec<(f64, f64)> = d.iter().flat_map(|&r| [(r, 1.0); 3]).collect();
    for family in KeyFamily::ALL {
        let a = fit_mle(&compact, family, 15.0, None).unwrap();
        let b = fit_mle(&expanded, family, 15.0, None).unwrap();
        for (x, y) in a.key.params().iter().zip(b.key.params()) {
            assert!((x - y).abs() / y < 1e-6, "{family:?}: {x} vs {y}");
        }
        assert!((a.log_likelihood - b.log_likelihood).abs() < 1e-6 * b.log_likelihood.abs());
    }
}

#[test]
fn fitted_parameters_are_a_local_optimum() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for (family, truth) in [
        (KeyFamily::HalfNormal, KeyFunction::half_normal(6.0).unwrap()),
        (KeyFamily::HazardRate, KeyFunction::hazard_rate(6.0, 3.0).unwrap()),
    ] {
        let d = sample_point_transect(&truth, 20.0, 2000, 31);
        let data = DistanceData::exact(&weighted(&d), 20.0).unwrap();
        let f = fit(&data, family).unwrap();
        let best = data.log_likelihood(&f.key).unwrap();
        for _ in 0..100 {
            let mut jitter = || 1.0 + rng.random_range(-0.2..0.2);
            let perturbed = match f.key {
                KeyFunction::HalfNormal { sigma } => KeyFunction::HalfNormal { sigma: sigma * jitter() },
                KeyFunction::HazardRate { sigma, shape_b } => {
                    let b = (shape_b * jitter()).max(1.0 + 1e-9);
                    KeyFunction::HazardRate { sigma: sigma * jitter(), shape_b: b }
                }
            };
            let ll = data.log_likelihood(&perturbed).unwrap();
            assert!(best >= ll - 1e-9, "{family:?}: {best} < {ll} at {perturbed:?}");
        }
    }
}

#[test]
fn exact_and_fine_binned_fits_agree() {
    let key = KeyFunction::half_normal(7.0).unwrap();
    let d = sample_point_transect(&key, 20.0, 5000, 8);
    let edges: Vec<f64> = (0..=200).map(|i| 0.1 * i as f64).collect();
    let mut edges = edges;
    *edges.last_mut().unwrap() = 20.0;
    let exact = fit_mle(&weighted(&d), KeyFamily::HalfNormal, 20.0, None).unwrap();
    let binned = fit_mle(&weighted(&d), KeyFamily::HalfNormal, 20.0, Some(&edges)).unwrap();
    let rel = (exact.key.sigma() - binned.key.sigma()).abs() / exact.key.sigma();
    assert!(rel < 0.01, "exact {} binned {}", exact.key.sigma(), binned.key.sigma());
}

#[test]
fn uniform_in_area_distances_give_near_certain_detection() {
    // r = w sqrt(u) on a regular grid of u: no decline with distance at all
    let d: Vec<f64> = (0..500).map(|i| 10.0 * ((i as f64 + 0.5) / 500.0).sqrt()).collect();
    let f = fit_mle(&weighted(&d), KeyFamily::HalfNormal, 10.0, None).unwrap();
    assert!(f.detection_prob > 0.999, "{f:?}");
}
