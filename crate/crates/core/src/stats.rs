//! Goodness-of-fit and independence tests with reproducible reports.

use std::fmt;

use rand::seq::SliceRandom;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};
use crate::rng::{map_paths, stream_id};

/// Default significance level.
pub const DEFAULT_LEVEL: f64 = 0.01;
/// Smallest sample accepted by the KS tests.
pub const MIN_KS_SAMPLES: usize = 100;
/// Permutations used by [`independence_check`].
pub const PERMUTATIONS: usize = 1000;

/// Outcome of one statistical check.
///
/// `passed` says whether the statistic lies on the accepting side of
/// `threshold`; for p-value tests the statistic is compared through its
/// p-value. A negative control is a check that is expected to reject, so the
/// check behaves as intended when `passed != negative_control`.
#[derive(Debug, Clone, PartialEq)]
pub struct TestReport {
    pub name: String,
    pub statistic: f64,
    /// `NaN` for checks that do not produce a p-value.
    pub p_value: f64,
    pub threshold: f64,
    pub passed: bool,
    pub n: usize,
    pub seed: u64,
    pub negative_control: bool,
}

impl TestReport {
    /// Whether the check behaved as intended.
    pub fn ok(&self) -> bool {
        self.passed != self.negative_control
    }

    pub fn as_negative_control(mut self) -> Self {
        self.negative_control = true;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Report for a p-value compared against `level`.
    pub fn from_p_value(name: &str, statistic: f64, p_value: f64, level: f64, n: usize) -> Self {
        Self {
            name: name.to_string(),
            statistic,
            p_value,
            threshold: level,
            passed: p_value >= level,
            n,
            seed: 0,
            negative_control: false,
        }
    }

    /// Report for `|statistic| < threshold`, typically a z-score.
    pub fn from_bound(name: &str, statistic: f64, threshold: f64, n: usize) -> Self {
        Self {
            name: name.to_string(),
            statistic,
            p_value: f64::NAN,
            threshold,
            passed: statistic.abs() < threshold,
            n,
            seed: 0,
            negative_control: false,
        }
    }

    /// Report for an arbitrary boolean criterion with the given measured value.
    pub fn from_condition(
        name: &str,
        statistic: f64,
        threshold: f64,
        passed: bool,
        n: usize,
    ) -> Self {
        Self {
            name: name.to_string(),
            statistic,
            p_value: f64::NAN,
            threshold,
            passed,
            n,
            seed: 0,
            negative_control: false,
        }
    }
}

impl fmt::Display for TestReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.ok() { "PASS" } else { "FAIL" };
        write!(f, "{verdict} {} stat={:.6e}", self.name, self.statistic)?;
        if !self.p_value.is_nan() {
            write!(f, " p={:.4e}", self.p_value)?;
        }
        write!(
            f,
            " threshold={} n={} seed={}",
            self.threshold, self.n, self.seed
        )?;
        if self.negative_control {
            write!(f, " (negative control)")?;
        }
        Ok(())
    }
}

/// z-score of `estimate - expected` against standard error `se`.
/// With a zero standard error, differences at rounding level count as zero
/// and any other difference gives an infinite z-score of the same sign.
pub fn z_score(estimate: f64, expected: f64, se: f64) -> f64 {
    let diff = estimate - expected;
    if se > 0.0 {
        diff / se
    } else if diff.abs() <= 1e-12 * expected.abs().max(1.0) {
        0.0
    } else {
        diff.signum() * f64::INFINITY
    }
}

/// Survival function of the Kolmogorov distribution.
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 1.18 {
        // Jacobi-theta form, fast for small arguments.
        let y = -std::f64::consts::PI.powi(2) / (8.0 * lambda * lambda);
        let mut cdf = 0.0;
        for k in 0..8 {
            let j = (2 * k + 1) as f64;
            cdf += (j * j * y).exp();
        }
        (1.0 - (2.0 * std::f64::consts::PI).sqrt() / lambda * cdf).clamp(0.0, 1.0)
    } else {
        let mut sf = 0.0;
        for k in 1..=20 {
            let kf = k as f64;
            let term = (-2.0 * kf * kf * lambda * lambda).exp();
            sf += if k % 2 == 1 { term } else { -term };
        }
        (2.0 * sf).clamp(0.0, 1.0)
    }
}

/// Asymptotic KS p-value with the usual small-sample correction.
fn ks_p_value(d: f64, n_eff: f64) -> f64 {
    let s = n_eff.sqrt();
    kolmogorov_sf((s + 0.12 + 0.11 / s) * d)
}

fn check_samples(test: &'static str, samples: &[f64], min: usize) -> Result<()> {
    if samples.len() < min {
        return Err(Error::InvalidSample {
            test,
            reason: format!("{} samples, at least {min} required", samples.len()),
        });
    }
    if samples.iter().any(|v| v.is_nan()) {
        return Err(Error::InvalidSample {
            test,
            reason: "NaN sample".into(),
        });
    }
    Ok(())
}

fn sorted(samples: &[f64]) -> Vec<f64> {
    let mut v = samples.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// One-sample KS test of `samples` against `cdf`.
pub fn ks_one_sample(
    name: &str,
    samples: &[f64],
    cdf: impl Fn(f64) -> f64,
    level: f64,
) -> Result<TestReport> {
    check_samples("ks_one_sample", samples, MIN_KS_SAMPLES)?;
    let xs = sorted(samples);
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n);
    }
    Ok(TestReport::from_p_value(
        name,
        d,
        ks_p_value(d, n),
        level,
        xs.len(),
    ))
}

/// Effective sample size `(sum w)^2 / sum w^2`.
pub fn effective_sample_size(weights: &[f64]) -> f64 {
    let s: f64 = weights.iter().sum();
    let s2: f64 = weights.iter().map(|w| w * w).sum();
    if s2 > 0.0 {
        s * s / s2
    } else {
        0.0
    }
}

/// KS test of a weighted sample against `cdf`; the p-value uses the effective
/// sample size.
pub fn ks_weighted(
    name: &str,
    samples: &[f64],
    weights: &[f64],
    cdf: impl Fn(f64) -> f64,
    level: f64,
) -> Result<TestReport> {
    check_samples("ks_weighted", samples, MIN_KS_SAMPLES)?;
    if weights.len() != samples.len() || weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
        return Err(Error::InvalidSample {
            test: "ks_weighted",
            reason: "weights must be finite, nonnegative and match the samples".into(),
        });
    }
    let mut idx: Vec<usize> = (0..samples.len()).collect();
    idx.sort_by(|&a, &b| samples[a].total_cmp(&samples[b]));
    let total: f64 = weights.iter().sum();
    let mut acc = 0.0;
    let mut d: f64 = 0.0;
    for &i in &idx {
        let f = cdf(samples[i]);
        let before = acc / total;
        acc += weights[i];
        d = d.max(acc / total - f).max(f - before);
    }
    let ess = effective_sample_size(weights);
    Ok(TestReport::from_p_value(
        name,
        d,
        ks_p_value(d, ess),
        level,
        samples.len(),
    ))
}

/// Two-sample KS test.
pub fn ks_two_sample(name: &str, a: &[f64], b: &[f64], level: f64) -> Result<TestReport> {
    check_samples("ks_two_sample", a, MIN_KS_SAMPLES)?;
    check_samples("ks_two_sample", b, MIN_KS_SAMPLES)?;
    let (xa, xb) = (sorted(a), sorted(b));
    let (na, nb) = (xa.len() as f64, xb.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < xa.len() && j < xb.len() {
        let v = xa[i].min(xb[j]);
        while i < xa.len() && xa[i] <= v {
            i += 1;
        }
        while j < xb.len() && xb[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    let n_eff = na * nb / (na + nb);
    Ok(TestReport::from_p_value(
        name,
        d,
        ks_p_value(d, n_eff),
        level,
        xa.len() + xb.len(),
    ))
}

/// Pearson chi-square test of category counts against `probs`.
pub fn chi_square_rays(
    name: &str,
    counts: &[u64],
    probs: &[f64],
    level: f64,
) -> Result<TestReport> {
    if counts.len() != probs.len() || counts.is_empty() {
        return Err(Error::InvalidSample {
            test: "chi_square_rays",
            reason: "one expected probability per category is required".into(),
        });
    }
    let n: u64 = counts.iter().sum();
    if n == 0 {
        return Err(Error::InvalidSample {
            test: "chi_square_rays",
            reason: "no observations".into(),
        });
    }
    let total_p: f64 = probs.iter().sum();
    let mut stat = 0.0;
    let mut cells = 0usize;
    for (&c, &p) in counts.iter().zip(probs) {
        let e = n as f64 * p / total_p;
        if e > 0.0 {
            stat += (c as f64 - e).powi(2) / e;
            cells += 1;
        } else if c > 0 {
            stat = f64::INFINITY;
        }
    }
    let p_value = if stat.is_infinite() {
        0.0
    } else if cells <= 1 {
        1.0
    } else {
        ChiSquared::new((cells - 1) as f64)
            .expect("positive degrees of freedom")
            .sf(stat)
    };
    Ok(TestReport::from_p_value(
        name, stat, p_value, level, n as usize,
    ))
}

/// Ranks with ties averaged, starting at 1.
fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut r = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            r[k] = avg;
        }
        i = j + 1;
    }
    r
}

fn centered(v: &[f64]) -> Vec<f64> {
    let m = v.iter().sum::<f64>() / v.len() as f64;
    v.iter().map(|x| x - m).collect()
}

fn correlation(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let da: f64 = a.iter().map(|x| x * x).sum();
    let db: f64 = b.iter().map(|y| y * y).sum();
    if da == 0.0 || db == 0.0 {
        0.0
    } else {
        num / (da * db).sqrt()
    }
}

/// Spearman rank correlation between the two samples.
pub fn spearman(a: &[f64], b: &[f64]) -> f64 {
    correlation(&centered(&ranks(a)), &centered(&ranks(b)))
}

/// Permutation test of independence based on the Spearman correlation.
/// Permutation `i` shuffles with substream `(seed, "permutation", i)`.
pub fn independence_check(
    name: &str,
    a: &[f64],
    b: &[f64],
    level: f64,
    seed: u64,
) -> Result<TestReport> {
    check_samples("independence_check", a, 3)?;
    check_samples("independence_check", b, 3)?;
    if a.len() != b.len() {
        return Err(Error::InvalidSample {
            test: "independence_check",
            reason: "samples must be paired".into(),
        });
    }
    let ra = centered(&ranks(a));
    let rb = centered(&ranks(b));
    let observed = correlation(&ra, &rb);
    let exceed = map_paths(seed, stream_id("permutation", 0), PERMUTATIONS, |_, rng| {
        let mut shuffled = rb.clone();
        shuffled.shuffle(rng);
        correlation(&ra, &shuffled).abs() >= observed.abs()
    })
    .into_iter()
    .filter(|&e| e)
    .count();
    let p_value = (1 + exceed) as f64 / (1 + PERMUTATIONS) as f64;
    Ok(TestReport::from_p_value(name, observed, p_value, level, a.len()).with_seed(seed))
}

/// Mean and standard error of the mean.
pub fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    (mean, (var / n).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bridge::normal;
    use crate::rng::substream;
    use rand::Rng;

    #[test]
    fn kolmogorov_sf_reference_values() {
        // scipy.special.kolmogorov
        for (x, want) in [
            (0.5, 0.963_945_243_664_875_1),
            (1.0, 0.269_999_671_677_354_56),
            (1.5, 0.022_217_962_616_525_127),
        ] {
            assert!((kolmogorov_sf(x) - want).abs() < 1e-10, "{x}");
        }
        assert_eq!(kolmogorov_sf(0.0), 1.0);
    }

    #[test]
    fn exact_counts_give_zero_statistic() {
        let r = chi_square_rays("c", &[30, 70], &[0.3, 0.7], DEFAULT_LEVEL).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert!(r.passed);
        let r = chi_square_rays("c", &[1, 0], &[0.0, 1.0], DEFAULT_LEVEL).unwrap();
        assert!(!r.passed);
    }

    #[test]
    fn exponential_against_wrong_rate_rejects() {
        let mut rng = substream(1, 0, 0);
        let xs: Vec<f64> = (0..10_000)
            .map(|_| -(1.0 - rng.gen::<f64>()).ln() / 2.0)
            .collect();
        let r = ks_one_sample("e", &xs, |x| 1.0 - (-x).exp(), DEFAULT_LEVEL).unwrap();
        assert!(r.p_value < 1e-6);
        let r = ks_one_sample("e", &xs, |x| 1.0 - (-2.0 * x).exp(), DEFAULT_LEVEL).unwrap();
        assert!(r.passed);
    }

    #[test]
    fn rejects_bad_samples() {
        assert!(ks_one_sample("k", &[0.1; 10], |x| x, DEFAULT_LEVEL).is_err());
        let mut v = vec![0.5; 200];
        v[3] = f64::NAN;
        assert!(ks_one_sample("k", &v, |x| x, DEFAULT_LEVEL).is_err());
    }

    #[test]
    fn weighted_ks_with_unit_weights_matches_plain() {
        let mut rng = substream(2, 0, 0);
        let xs: Vec<f64> = (0..500).map(|_| rng.gen::<f64>()).collect();
        let a = ks_one_sample("u", &xs, |x| x, DEFAULT_LEVEL).unwrap();
        let b = ks_weighted("u", &xs, &vec![1.0; 500], |x| x, DEFAULT_LEVEL).unwrap();
        assert!((a.statistic - b.statistic).abs() < 1e-15);
        assert!((a.p_value - b.p_value).abs() < 1e-12);
    }

    #[test]
    fn independence_detects_dependence() {
        let mut rng = substream(3, 0, 0);
        let a: Vec<f64> = (0..2000).map(|_| normal(&mut rng)).collect();
        let b: Vec<f64> = (0..2000).map(|_| normal(&mut rng)).collect();
        assert!(
            independence_check("i", &a, &b, DEFAULT_LEVEL, 5)
                .unwrap()
                .passed
        );
        let c: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + 0.3 * y).collect();
        assert!(
            !independence_check("d", &a, &c, DEFAULT_LEVEL, 5)
                .unwrap()
                .passed
        );
    }

    #[test]
    fn ranks_average_ties() {
        assert_eq!(ranks(&[3.0, 1.0, 3.0, 2.0]), vec![3.5, 1.0, 3.5, 2.0]);
    }

    #[test]
    fn report_verdicts() {
        let r = TestReport::from_bound("z", 6.0, 5.0, 10);
        assert!(!r.passed && !r.ok());
        assert!(r.as_negative_control().ok());
    }
}
