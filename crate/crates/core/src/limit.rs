//! Direct samplers for the limit processes, one per regime.
//!
//! * BangBang: `X = S - Y` with `Y` a Brownian motion of drift `gamma`, so the
//!   radial part is pulled back to the origin at rate `gamma` and keeps
//!   returning there.
//! * MaxDrift: `|B|` with `B` a Brownian motion of drift `max(alpha)`,
//!   reweighted by `((max(alpha) - gamma) / max(alpha)) exp(gamma L_inf)`. The
//!   last, never-ending excursion runs on a ray of maximal coefficient.
//! * `gamma < 0`: a spider until its local time reaches an independent
//!   `Exp(|gamma|)` level, then a Bessel(3) escape on a ray drawn from a
//!   fixed law.
//! * NullSpider: the spider itself.

use rand::Rng;
use rand_distr::{Distribution, Exp};

use crate::bridge::{normal, open_uniform, sample_bridge_local_time};
use crate::error::{ensure_positive, Error, Result};
use crate::formulas::{classify_regime, PenaltyParams, Regime, RegimeTag};
use crate::grid::TimeGrid;
use crate::penalize::WeightedSample;
use crate::sim::{label_excursions, reflected_on_grid, RadialSeries, SpiderPath};
use crate::space::{sample_index, Ray, RaySpace};

/// Everything a limit sampler needs.
#[derive(Debug, Clone)]
pub struct LimitLawSpec {
    pub regime: Regime,
    pub space: RaySpace,
    pub params: PenaltyParams,
    pub grid: TimeGrid,
}

impl LimitLawSpec {
    /// Uniform grid of `steps` steps on `[0, horizon]`.
    pub fn new(space: RaySpace, params: PenaltyParams, horizon: f64, steps: usize) -> Result<Self> {
        ensure_positive("horizon", horizon)?;
        Self::on_grid(space, params, TimeGrid::uniform(horizon, steps)?)
    }

    pub fn on_grid(space: RaySpace, params: PenaltyParams, grid: TimeGrid) -> Result<Self> {
        let regime = classify_regime(&space, &params)?;
        Ok(Self {
            regime,
            space,
            params,
            grid,
        })
    }

    pub fn horizon(&self) -> f64 {
        self.grid.horizon()
    }

    fn require(&self, accepted: &[RegimeTag]) -> Result<()> {
        if accepted.contains(&self.regime.tag) {
            Ok(())
        } else {
            Err(Error::WrongRegime {
                expected: accepted[0],
                found: self.regime.tag,
            })
        }
    }
}

/// Path under the BangBang limit law.
pub fn sample_bangbang<R: Rng + ?Sized>(spec: &LimitLawSpec, rng: &mut R) -> Result<SpiderPath> {
    spec.require(&[RegimeTag::BangBang])?;
    let series = reflected_on_grid(0.0, spec.params.gamma(), spec.grid.times(), rng);
    let labels = label_excursions(&series, &spec.space, Ray(0), rng);
    Ok(SpiderPath::from_parts(series, labels))
}

/// Path under the NullSpider limit law, which is the spider law.
pub fn sample_null_spider<R: Rng + ?Sized>(spec: &LimitLawSpec, rng: &mut R) -> Result<SpiderPath> {
    spec.require(&[RegimeTag::NullSpider])?;
    let series = reflected_on_grid(0.0, 0.0, spec.grid.times(), rng);
    let labels = label_excursions(&series, &spec.space, Ray(0), rng);
    Ok(SpiderPath::from_parts(series, labels))
}

/// Weighted MaxDrift sample with the total local time and the ray of the
/// final excursion.
#[derive(Debug, Clone, PartialEq)]
pub struct MaxDriftSample {
    pub sample: WeightedSample,
    /// Total local time over `[0, inf)`.
    pub limit_local_time: f64,
    /// Ray of the excursion that never returns to the origin.
    pub final_ray: Ray,
    /// Whether the radial part visits the origin after the horizon.
    pub returns_after_horizon: bool,
}

/// MaxDrift sampler.
///
/// `B` is simulated at grid times with exact bridge local times at zero.
/// Beyond the horizon nothing needs to be simulated: from `B_T = y` the
/// motion returns to zero with probability `exp(-2 abar y)` for `y > 0` (and
/// surely for `y <= 0`), after which it accumulates an independent
/// `Exp(abar)` amount of local time. The total local time, and therefore the
/// weight, is exact.
pub fn sample_maxdrift_weighted<R: Rng + ?Sized>(
    spec: &LimitLawSpec,
    rng: &mut R,
) -> Result<MaxDriftSample> {
    spec.require(&[RegimeTag::MaxDrift])?;
    let abar = spec.params.alpha_max();
    let gamma = spec.params.gamma();
    let times = spec.grid.times();

    let n = times.len();
    let mut radial = Vec::with_capacity(n);
    let mut local_time = Vec::with_capacity(n);
    let mut touched_zero = Vec::with_capacity(n);
    radial.push(0.0);
    local_time.push(0.0);
    touched_zero.push(false);
    let mut b = 0.0f64;
    let mut l = 0.0f64;
    for w in times.windows(2) {
        let h = w[1] - w[0];
        let next = b + abar * h + h.sqrt() * normal(rng);
        let dl = sample_bridge_local_time(b, next, h, rng);
        l += dl;
        touched_zero.push(dl > 0.0);
        local_time.push(l);
        radial.push(next.abs());
        b = next;
    }
    let series = RadialSeries {
        times: times.to_vec(),
        radial,
        local_time,
        touched_zero,
    };
    let mut labels = label_excursions(&series, &spec.space, Ray(0), rng);

    let returns = b <= 0.0 || open_uniform(rng) <= (-2.0 * abar * b).exp();
    let j_weights: Vec<f64> = spec
        .space
        .rays()
        .map(|r| {
            if spec.regime.in_argmax(r) {
                spec.space.weight(r)
            } else {
                0.0
            }
        })
        .collect();
    let final_ray = draw_from(&j_weights, rng);
    let mut total = l;
    if returns {
        total += Exp::new(abar).expect("positive rate").sample(rng);
    } else {
        // The excursion in progress is the last one.
        let start = series.touched_zero.iter().rposition(|&z| z).unwrap_or(0);
        for label in &mut labels[start..] {
            *label = final_ray;
        }
    }
    let weight = (abar - gamma) / abar * (gamma * total).exp();
    Ok(MaxDriftSample {
        sample: WeightedSample {
            path: SpiderPath::from_parts(series, labels),
            weight,
        },
        limit_local_time: total,
        final_ray,
        returns_after_horizon: returns,
    })
}

fn draw_from<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> Ray {
    let mut acc = 0.0;
    let cumulative: Vec<f64> = weights
        .iter()
        .map(|w| {
            acc += w;
            acc
        })
        .collect();
    sample_index(&cumulative, rng.gen::<f64>())
}

/// Law of the escape ray for `gamma < 0`, indexed by ray.
pub fn m_ray_law(space: &RaySpace, params: &PenaltyParams) -> Result<Vec<f64>> {
    let regime = classify_regime(space, params)?;
    let mu = space.weights();
    match regime.tag {
        RegimeTag::FlatRays => {
            let mass = regime.argmax_mass(space);
            Ok(space
                .rays()
                .map(|r| {
                    if regime.in_argmax(r) {
                        mu[r.0] / mass
                    } else {
                        0.0
                    }
                })
                .collect())
        }
        RegimeTag::AllNegative => {
            let g = params.gamma().abs();
            let a = params.alpha();
            let inv: f64 = mu.iter().zip(a).map(|(w, a)| w / a.abs()).sum();
            let denom: f64 = mu
                .iter()
                .zip(a)
                .map(|(w, a)| w * (a.abs() + g) / (a * a))
                .sum();
            Ok(mu
                .iter()
                .zip(a)
                .map(|(w, a)| w * (g / (a * a) + inv) / denom)
                .collect())
        }
        found => Err(Error::WrongRegime {
            expected: RegimeTag::AllNegative,
            found,
        }),
    }
}

/// One draw of the escape ray.
pub fn sample_m_ray<R: Rng + ?Sized>(
    space: &RaySpace,
    params: &PenaltyParams,
    rng: &mut R,
) -> Result<Ray> {
    Ok(draw_from(&m_ray_law(space, params)?, rng))
}

/// Norm of a three-dimensional Brownian motion from the origin at the given
/// times (the first of which is the origin of time).
pub fn bessel3_on_grid<R: Rng + ?Sized>(times: &[f64], rng: &mut R) -> Vec<f64> {
    let mut w = [0.0f64; 3];
    let mut out = Vec::with_capacity(times.len());
    out.push(0.0);
    for pair in times.windows(2) {
        let sd = (pair[1] - pair[0]).sqrt();
        for c in &mut w {
            *c += sd * normal(rng);
        }
        out.push((w[0] * w[0] + w[1] * w[1] + w[2] * w[2]).sqrt());
    }
    out
}

/// Bessel(3) process from zero on a uniform grid.
pub fn sample_bessel3<R: Rng + ?Sized>(
    horizon: f64,
    steps: usize,
    rng: &mut R,
) -> Result<Vec<f64>> {
    ensure_positive("horizon", horizon)?;
    Ok(bessel3_on_grid(
        TimeGrid::uniform(horizon, steps)?.times(),
        rng,
    ))
}

/// Sample of the `gamma < 0` limit law.
#[derive(Debug, Clone, PartialEq)]
pub struct NegativeGammaSample {
    pub path: SpiderPath,
    /// The exponential local-time level, equal to the total local time.
    pub limit_local_time: f64,
    /// Grid index at which the escape starts, if within the horizon.
    pub escape_index: Option<usize>,
    pub escape_ray: Ray,
}

/// `gamma < 0` sampler. The escape starts at the first grid time where the
/// spider's local time reaches the level; there the radial part is reset to
/// zero and the local time clipped to the level, an overshoot of at most one
/// grid step.
pub fn sample_negative_gamma<R: Rng + ?Sized>(
    spec: &LimitLawSpec,
    rng: &mut R,
) -> Result<NegativeGammaSample> {
    spec.require(&[RegimeTag::AllNegative, RegimeTag::FlatRays])?;
    let level = Exp::new(spec.params.gamma().abs())
        .expect("positive rate")
        .sample(rng);
    let escape_ray = sample_m_ray(&spec.space, &spec.params, rng)?;
    let times = spec.grid.times();
    let mut series = reflected_on_grid(0.0, 0.0, times, rng);
    let mut labels = label_excursions(&series, &spec.space, Ray(0), rng);
    let escape_index = series.local_time.iter().position(|&l| l >= level);
    if let Some(i) = escape_index {
        let escape = bessel3_on_grid(&times[i..], rng);
        for (k, r) in escape.into_iter().enumerate() {
            series.radial[i + k] = r;
            series.local_time[i + k] = level;
            series.touched_zero[i + k] = k == 0;
            labels[i + k] = escape_ray;
        }
    }
    Ok(NegativeGammaSample {
        path: SpiderPath::from_parts(series, labels),
        limit_local_time: level,
        escape_index,
        escape_ray,
    })
}

/// Any regime: a path with its weight (one except under MaxDrift).
pub fn sample_limit<R: Rng + ?Sized>(spec: &LimitLawSpec, rng: &mut R) -> Result<WeightedSample> {
    let unit = |path| WeightedSample { path, weight: 1.0 };
    match spec.regime.tag {
        RegimeTag::BangBang => sample_bangbang(spec, rng).map(unit),
        RegimeTag::MaxDrift => sample_maxdrift_weighted(spec, rng).map(|s| s.sample),
        RegimeTag::NullSpider => sample_null_spider(spec, rng).map(unit),
        RegimeTag::FlatRays | RegimeTag::AllNegative => {
            sample_negative_gamma(spec, rng).map(|s| unit(s.path))
        }
    }
}
