//! Calibration of the statistical harness under its null hypotheses, and
//! power against clear alternatives.

use rand::Rng;
use rand_distr::{Distribution, Exp};
use walsh_spider::rng::substream;
use walsh_spider::stats::{
    chi_square_rays, independence_check, ks_one_sample, ks_two_sample, ks_weighted,
};

const SEEDS: u64 = 100;
const LEVEL: f64 = 0.01;

fn uniforms(seed: u64, n: usize) -> Vec<f64> {
    let mut rng = substream(seed, 1, 0);
    (0..n).map(|_| rng.gen::<f64>()).collect()
}

fn exponentials(seed: u64, rate: f64, n: usize) -> Vec<f64> {
    let mut rng = substream(seed, 2, 0);
    let law = Exp::new(rate).unwrap();
    (0..n).map(|_| law.sample(&mut rng)).collect()
}

/// Out of 100 null runs at level 0.01, 5 or more rejections has probability
/// about 0.003.
fn assert_calibrated(name: &str, passes: usize) {
    assert!(passes >= 95, "{name}: {passes}/100 null runs accepted");
}

#[test]
fn one_sample_ks_is_calibrated() {
    let passes = (0..SEEDS)
        .filter(|&s| {
            ks_one_sample("U", &uniforms(s, 1000), |x| x.clamp(0.0, 1.0), LEVEL)
                .unwrap()
                .passed
        })
        .count();
    assert_calibrated("one-sample KS", passes);
}

#[test]
fn two_sample_ks_is_calibrated() {
    let passes = (0..SEEDS)
        .filter(|&s| {
            ks_two_sample("U", &uniforms(s, 800), &uniforms(s + 1000, 500), LEVEL)
                .unwrap()
                .passed
        })
        .count();
    assert_calibrated("two-sample KS", passes);
}

#[test]
fn weighted_ks_is_calibrated() {
    // Importance sampling of Exp(1) from Exp(1/2) draws.
    let passes = (0..SEEDS)
        .filter(|&s| {
            let xs = exponentials(s, 0.5, 2000);
            let w: Vec<f64> = xs.iter().map(|x| (-0.5 * x).exp()).collect();
            ks_weighted("Exp(1)", &xs, &w, |x| 1.0 - (-x).exp(), LEVEL)
                .unwrap()
                .passed
        })
        .count();
    assert_calibrated("weighted KS", passes);
}

#[test]
fn chi_square_is_calibrated() {
    let probs = [0.1, 0.2, 0.3, 0.4];
    let passes = (0..SEEDS)
        .filter(|&s| {
            let mut counts = [0u64; 4];
            for u in uniforms(s, 2000) {
                let k = match u {
                    u if u < 0.1 => 0,
                    u if u < 0.3 => 1,
                    u if u < 0.6 => 2,
                    _ => 3,
                };
                counts[k] += 1;
            }
            chi_square_rays("cells", &counts, &probs, LEVEL)
                .unwrap()
                .passed
        })
        .count();
    assert_calibrated("chi-square", passes);
}

#[test]
fn independence_check_is_calibrated() {
    let passes = (0..SEEDS)
        .filter(|&s| {
            independence_check("U", &uniforms(s, 300), &uniforms(s + 500, 300), LEVEL, s)
                .unwrap()
                .passed
        })
        .count();
    assert_calibrated("independence", passes);
}

#[test]
fn clear_alternatives_are_rejected() {
    let xs = exponentials(3, 2.0, 2000);
    let r = ks_one_sample("Exp(2) vs Exp(1)", &xs, |x| 1.0 - (-x).exp(), 1e-6).unwrap();
    assert!(r.p_value < 1e-6, "{r}");
    let r = ks_two_sample("Exp(2) vs Exp(1)", &xs, &exponentials(4, 1.0, 2000), 1e-6).unwrap();
    assert!(r.p_value < 1e-6, "{r}");

    let a = uniforms(5, 500);
    let b: Vec<f64> = a
        .iter()
        .zip(uniforms(6, 500))
        .map(|(x, e)| x + 0.3 * e)
        .collect();
    let r = independence_check("dependent", &a, &b, LEVEL, 5).unwrap();
    assert!(!r.passed, "{r}");

    let r = chi_square_rays("skewed", &[400, 600], &[0.5, 0.5], 1e-6).unwrap();
    assert!(!r.passed, "{r}");
}

#[test]
fn uniform_weights_reduce_to_the_plain_test() {
    let xs = uniforms(7, 500);
    let plain = ks_one_sample("U", &xs, |x| x, LEVEL).unwrap();
    let weighted = ks_weighted("U", &xs, &vec![2.5; xs.len()], |x| x, LEVEL).unwrap();
    assert!((plain.statistic - weighted.statistic).abs() < 1e-12);
    assert!((plain.p_value - weighted.p_value).abs() < 1e-9);
}

#[test]
fn malformed_samples_are_rejected() {
    assert!(ks_one_sample("empty", &[], |x| x, LEVEL).is_err());
    assert!(ks_one_sample("nan", &[0.1, f64::NAN, 0.3], |x| x, LEVEL).is_err());
    assert!(ks_weighted("w", &[0.1; 50], &[-1.0; 50], |x| x, LEVEL).is_err());
    assert!(chi_square_rays("c", &[1, 2], &[1.0], LEVEL).is_err());
    assert!(independence_check("i", &[1.0, 2.0, 3.0], &[1.0, 2.0], LEVEL, 0).is_err());
}
