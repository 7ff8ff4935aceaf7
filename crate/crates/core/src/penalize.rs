//! Monte Carlo estimators for the penalized measures and their limit.
//!
//! The penalized law at horizon `t` reweights the spider from the origin by
//! `exp(alpha_{N_t} X_t + gamma L_t)`; it is estimated by self-normalised
//! importance sampling. The limit law is estimated by weighting paths up to
//! `s` with the limit martingale, without normalisation, so that `E[M_s] = 1`
//! remains testable.

use std::fmt;
use std::sync::Arc;

use crate::error::{ensure_positive, Error, Result};
use crate::formulas::{LimitDensity, PenaltyParams, RegimeTag};
use crate::grid::TimeGrid;
use crate::rng::{map_paths, stream_id};
use crate::sim::{PathPrefix, SpiderPath, SpiderSimulator};
use crate::space::{Ray, RaySpace, SpiderPoint};
use crate::stats::{mean_and_se, z_score, TestReport};

/// Estimates whose effective sample size falls below this are refused.
pub const MIN_ESS: f64 = 30.0;
/// Default number of uniform steps on `[0, s]`.
pub const DEFAULT_STEPS: usize = 16;

/// A path together with an importance weight.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedSample {
    pub path: SpiderPath,
    pub weight: f64,
}

type Evaluator = dyn Fn(&PathPrefix<'_>) -> f64 + Send + Sync;

/// A bounded functional of the path on `[0, s]`. It only ever receives the
/// path restricted to `[0, s]`.
#[derive(Clone)]
pub struct PathFunctional {
    name: String,
    horizon: f64,
    eval: Arc<Evaluator>,
}

impl fmt::Debug for PathFunctional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PathFunctional")
            .field("name", &self.name)
            .field("horizon", &self.horizon)
            .finish()
    }
}

impl PathFunctional {
    pub fn new(
        name: impl Into<String>,
        horizon: f64,
        eval: impl Fn(&PathPrefix<'_>) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        ensure_positive("s", horizon)?;
        Ok(Self {
            name: name.into(),
            horizon,
            eval: Arc::new(eval),
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn eval(&self, path: &SpiderPath) -> Result<f64> {
        Ok((self.eval)(&path.prefix(self.horizon)?))
    }

    pub fn constant(s: f64, c: f64) -> Result<Self> {
        Self::new(format!("const_{c}"), s, move |_| c)
    }

    /// `1{X_s > c}`.
    pub fn radius_above(s: f64, c: f64) -> Result<Self> {
        Self::new(format!("radius_above_{c}"), s, move |p| {
            f64::from(u8::from(p.radius() > c))
        })
    }

    /// `1{X_s <= c}`.
    pub fn radius_at_most(s: f64, c: f64) -> Result<Self> {
        Self::new(format!("radius_at_most_{c}"), s, move |p| {
            f64::from(u8::from(p.radius() <= c))
        })
    }

    /// `1{N_s = ray}`.
    pub fn on_ray(s: f64, ray: Ray) -> Result<Self> {
        Self::new(format!("on_ray_{ray}"), s, move |p| {
            f64::from(u8::from(p.ray() == ray))
        })
    }

    /// `exp(-L_s)`.
    pub fn exp_neg_local_time(s: f64) -> Result<Self> {
        Self::new("exp_neg_local_time", s, |p| (-p.local_time()).exp())
    }

    /// `1{L_s > c}`.
    pub fn local_time_above(s: f64, c: f64) -> Result<Self> {
        Self::new(format!("local_time_above_{c}"), s, move |p| {
            f64::from(u8::from(p.local_time() > c))
        })
    }

    /// `exp(-X_s)`, bounded and sensitive to the whole radial law.
    pub fn exp_neg_radius(s: f64) -> Result<Self> {
        Self::new("exp_neg_radius", s, |p| (-p.radius()).exp())
    }

    /// The bounded test battery: `1`, `1{X_s > c}`, `1{N_s = m}` for every
    /// ray, `exp(-L_s)`.
    pub fn battery(space: &RaySpace, s: f64, c: f64) -> Result<Vec<Self>> {
        let mut out = vec![Self::constant(s, 1.0)?, Self::radius_above(s, c)?];
        for ray in space.rays() {
            out.push(Self::on_ray(s, ray)?);
        }
        out.push(Self::exp_neg_local_time(s)?);
        Ok(out)
    }
}

/// A Monte Carlo estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub estimate: f64,
    pub se: f64,
    /// Effective sample size of the weights.
    pub ess: f64,
    pub n: usize,
}

/// Common inputs of the estimators.
#[derive(Debug, Clone)]
pub struct McConfig {
    pub n_paths: usize,
    /// Uniform steps on `[0, s]`.
    pub steps: usize,
    pub seed: u64,
}

impl McConfig {
    pub fn new(n_paths: usize, seed: u64) -> Self {
        Self {
            n_paths,
            steps: DEFAULT_STEPS,
            seed,
        }
    }

    pub fn with_steps(mut self, steps: usize) -> Self {
        self.steps = steps;
        self
    }

    fn check(&self) -> Result<()> {
        if self.n_paths < 2 {
            return Err(Error::invalid("n_paths", "at least two paths are required"));
        }
        if self.steps == 0 {
            return Err(Error::invalid("steps", "must be positive"));
        }
        Ok(())
    }
}

/// Self-normalised estimate from per-path values and log-weights.
pub fn self_normalized(values: &[f64], log_weights: &[f64]) -> Result<Estimate> {
    let top = log_weights
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    if !top.is_finite() {
        return Err(Error::Overflow("log-weight"));
    }
    let w: Vec<f64> = log_weights.iter().map(|lw| (lw - top).exp()).collect();
    let sw: f64 = w.iter().sum();
    let sw2: f64 = w.iter().map(|x| x * x).sum();
    let ess = sw * sw / sw2;
    if ess < MIN_ESS {
        return Err(Error::Unreliable {
            ess,
            threshold: MIN_ESS,
        });
    }
    let est = w.iter().zip(values).map(|(w, f)| w * f).sum::<f64>() / sw;
    let var = w
        .iter()
        .zip(values)
        .map(|(w, f)| (w * (f - est)).powi(2))
        .sum::<f64>()
        / (sw * sw);
    Ok(Estimate {
        estimate: est,
        se: var.sqrt(),
        ess,
        n: values.len(),
    })
}

/// Plain average of `weights * values` with an ESS guard on the weights.
pub fn weighted_mean(values: &[f64], weights: &[f64]) -> Result<Estimate> {
    let ess = crate::stats::effective_sample_size(weights);
    if ess.is_nan() || ess < MIN_ESS {
        return Err(Error::Unreliable {
            ess,
            threshold: MIN_ESS,
        });
    }
    let prod: Vec<f64> = values.iter().zip(weights).map(|(f, w)| f * w).collect();
    let (m, se) = mean_and_se(&prod);
    Ok(Estimate {
        estimate: m,
        se,
        ess,
        n: values.len(),
    })
}

fn check_horizons(functional: &PathFunctional, ts: &[f64]) -> Result<()> {
    for &t in ts {
        ensure_positive("t", t)?;
        if t < functional.horizon() {
            return Err(Error::invalid(
                "t",
                format!(
                    "horizon {t} precedes the functional horizon {}",
                    functional.horizon()
                ),
            ));
        }
    }
    Ok(())
}

/// Values of the functional and log-weights at each `t`, one entry per path.
fn penalized_samples(
    functional: &PathFunctional,
    ts: &[f64],
    space: &RaySpace,
    params: &PenaltyParams,
    cfg: &McConfig,
    stream: u64,
) -> Result<Vec<(f64, Vec<f64>)>> {
    let grid = TimeGrid::uniform_with_points(functional.horizon(), cfg.steps, ts)?;
    let idx: Vec<usize> = ts
        .iter()
        .map(|&t| grid.index_of(t).expect("t added to grid"))
        .collect();
    let sim = SpiderSimulator::new(space.clone(), grid);
    map_paths(cfg.seed, stream, cfg.n_paths, |_, rng| {
        let path = sim.simulate(SpiderPoint::origin(), rng)?;
        let f = functional.eval(&path)?;
        let lw = idx
            .iter()
            .map(|&i| params.log_weight(path.radial[i], path.label[i], path.local_time[i]))
            .collect();
        Ok((f, lw))
    })
    .into_iter()
    .collect()
}

/// Estimate of the penalized expectation of `functional` at horizon `t`.
pub fn penalized_expectation(
    functional: &PathFunctional,
    t: f64,
    space: &RaySpace,
    params: &PenaltyParams,
    cfg: &McConfig,
) -> Result<Estimate> {
    params.check(space)?;
    cfg.check()?;
    check_horizons(functional, &[t])?;
    let samples = penalized_samples(
        functional,
        &[t],
        space,
        params,
        cfg,
        stream_id("penalized", 0),
    )?;
    let values: Vec<f64> = samples.iter().map(|(f, _)| *f).collect();
    let lw: Vec<f64> = samples.iter().map(|(_, l)| l[0]).collect();
    self_normalized(&values, &lw)
}

/// Estimate of the limit-measure expectation of `functional`.
pub fn limit_expectation(
    functional: &PathFunctional,
    space: &RaySpace,
    params: &PenaltyParams,
    cfg: &McConfig,
) -> Result<Estimate> {
    limit_expectation_with(functional, space, &LimitDensity::new(space, params)?, cfg)
}

/// As [`limit_expectation`] with an explicit density, which may be a
/// deliberately corrupted one.
pub fn limit_expectation_with(
    functional: &PathFunctional,
    space: &RaySpace,
    density: &LimitDensity,
    cfg: &McConfig,
) -> Result<Estimate> {
    cfg.check()?;
    let s = functional.horizon();
    let sim = SpiderSimulator::new(space.clone(), TimeGrid::uniform(s, cfg.steps)?);
    let pairs: Vec<(f64, f64)> =
        map_paths(cfg.seed, stream_id("limit", 0), cfg.n_paths, |_, rng| {
            let path = sim.simulate(SpiderPoint::origin(), rng)?;
            let end = path.last();
            let m = density.value(
                s,
                end.radius,
                end.ray,
                *path.local_time.last().expect("nonempty"),
            );
            Ok((functional.eval(&path)?, m))
        })
        .into_iter()
        .collect::<Result<_>>()?;
    let (values, weights): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    weighted_mean(&values, &weights)
}

/// One row of a convergence table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    pub t: f64,
    pub estimate: f64,
    pub se: f64,
    pub ess: f64,
    pub limit_estimate: f64,
    pub limit_se: f64,
}

/// Default horizons `{s+1, 2s+1, 4s+1, 8s+1, 16s+1}`.
pub fn default_t_grid(s: f64) -> Vec<f64> {
    [1.0, 2.0, 4.0, 8.0, 16.0]
        .iter()
        .map(|k| k * s + 1.0)
        .collect()
}

/// Penalized estimates at every `t` of `t_grid` (from the same paths) next to
/// the limit estimate (from an independent stream).
pub fn convergence_report(
    functional: &PathFunctional,
    t_grid: &[f64],
    space: &RaySpace,
    params: &PenaltyParams,
    cfg: &McConfig,
) -> Result<Vec<ConvergenceRow>> {
    params.check(space)?;
    cfg.check()?;
    check_horizons(functional, t_grid)?;
    let limit = limit_expectation(functional, space, params, cfg)?;
    let samples = penalized_samples(
        functional,
        t_grid,
        space,
        params,
        cfg,
        stream_id("penalized", 0),
    )?;
    let values: Vec<f64> = samples.iter().map(|(f, _)| *f).collect();
    t_grid
        .iter()
        .enumerate()
        .map(|(j, &t)| {
            let lw: Vec<f64> = samples.iter().map(|(_, l)| l[j]).collect();
            let e = self_normalized(&values, &lw)?;
            Ok(ConvergenceRow {
                t,
                estimate: e.estimate,
                se: e.se,
                ess: e.ess,
                limit_estimate: limit.estimate,
                limit_se: limit.se,
            })
        })
        .collect()
}

/// Martingale property of the limit density between `s` and `s + h`: for
/// each member `G` of the battery, the z-score of `E[(M_{s+h} - M_s) G]`,
/// plus the z-score of `E[M_s] - 1`. The grid is `{0, s, s+h}`, which is
/// exact for these functionals.
pub fn martingale_check(
    space: &RaySpace,
    density: &LimitDensity,
    s: f64,
    h: f64,
    n_paths: usize,
    seed: u64,
) -> Result<Vec<TestReport>> {
    ensure_positive("s", s)?;
    ensure_positive("h", h)?;
    if n_paths < 2 {
        return Err(Error::invalid("n_paths", "at least two paths are required"));
    }
    let battery = PathFunctional::battery(space, s, 0.5)?;
    let sim = SpiderSimulator::new(space.clone(), TimeGrid::from_times(vec![s, s + h])?);
    let rows: Vec<(f64, f64, Vec<f64>)> =
        map_paths(seed, stream_id("martingale", 0), n_paths, |_, rng| {
            let path = sim.simulate(SpiderPoint::origin(), rng)?;
            let m_s = density.value(s, path.radial[1], path.label[1], path.local_time[1]);
            let m_sh = density.value(s + h, path.radial[2], path.label[2], path.local_time[2]);
            let g = battery
                .iter()
                .map(|f| f.eval(&path))
                .collect::<Result<Vec<_>>>()?;
            Ok((m_s, m_sh, g))
        })
        .into_iter()
        .collect::<Result<_>>()?;

    let mut reports = Vec::with_capacity(battery.len() + 1);
    let m_s: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let (mean, se) = mean_and_se(&m_s);
    reports.push(TestReport::from_bound(
        "E[M_s]=1",
        z_score(mean, 1.0, se),
        3.0,
        n_paths,
    ));
    for (j, f) in battery.iter().enumerate() {
        let diffs: Vec<f64> = rows.iter().map(|(a, b, g)| (b - a) * g[j]).collect();
        let (mean, se) = mean_and_se(&diffs);
        reports.push(TestReport::from_bound(
            &format!("increment[{}]", f.name()),
            z_score(mean, 0.0, se),
            3.0,
            n_paths,
        ));
    }
    Ok(reports.into_iter().map(|r| r.with_seed(seed)).collect())
}

/// Whether dropping the time factor breaks the martingale property, so that
/// the corrupted density is a meaningful negative control.
pub fn has_time_factor(tag: RegimeTag) -> bool {
    matches!(tag, RegimeTag::BangBang | RegimeTag::MaxDrift)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup(alpha: Vec<f64>, gamma: f64) -> (RaySpace, PenaltyParams) {
        (
            RaySpace::new(vec![0.3, 0.7]).unwrap(),
            PenaltyParams::new(alpha, gamma).unwrap(),
        )
    }

    #[test]
    fn constant_functional_is_exactly_one() {
        let (space, params) = setup(vec![0.2, -0.4], 0.3);
        let f = PathFunctional::constant(1.0, 1.0).unwrap();
        let e = penalized_expectation(&f, 3.0, &space, &params, &McConfig::new(500, 1)).unwrap();
        assert!((e.estimate - 1.0).abs() < 1e-12);
        assert!(e.se < 1e-12);
    }

    #[test]
    fn weight_scaling_invariance() {
        let values = [0.2, 0.9, 0.4, 1.0, 0.0];
        let lw = [0.1, -0.3, 2.0, 0.5, -1.0];
        let shifted: Vec<f64> = lw.iter().map(|l| l + 37.5).collect();
        let a = self_normalized(&values.repeat(20), &lw.repeat(20)).unwrap();
        let b = self_normalized(&values.repeat(20), &shifted.repeat(20)).unwrap();
        assert!((a.estimate - b.estimate).abs() < 1e-14);
        assert!((a.se - b.se).abs() < 1e-14);
    }

    #[test]
    fn degenerate_weights_are_refused() {
        let values = vec![1.0; 100];
        let mut lw = vec![0.0; 100];
        lw[0] = 50.0;
        assert!(matches!(
            self_normalized(&values, &lw),
            Err(Error::Unreliable { .. })
        ));
    }

    #[test]
    fn horizon_must_precede_t() {
        let (space, params) = setup(vec![0.0, 0.0], 0.0);
        let f = PathFunctional::constant(2.0, 1.0).unwrap();
        assert!(penalized_expectation(&f, 1.0, &space, &params, &McConfig::new(10, 1)).is_err());
    }

    #[test]
    fn functional_sees_only_prefix() {
        let space = RaySpace::uniform(2).unwrap();
        let f = PathFunctional::new("len", 1.0, |p| p.times.len() as f64).unwrap();
        let sim = SpiderSimulator::new(space, TimeGrid::uniform(4.0, 8).unwrap());
        let mut rng = crate::rng::substream(1, 1, 1);
        let path = sim.simulate(SpiderPoint::origin(), &mut rng).unwrap();
        assert_eq!(f.eval(&path).unwrap(), 3.0);
    }

    #[test]
    fn estimates_are_reproducible() {
        let (space, params) = setup(vec![0.5, -1.0], 0.2);
        let f = PathFunctional::radius_above(1.0, 0.5).unwrap();
        let cfg = McConfig::new(2000, 9);
        let a = convergence_report(&f, &[2.0, 3.0], &space, &params, &cfg).unwrap();
        let b = convergence_report(&f, &[2.0, 3.0], &space, &params, &cfg).unwrap();
        assert_eq!(a, b);
    }
}
