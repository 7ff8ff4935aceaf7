//! Verification suites. Each suite returns a list of [`TestReport`]s; a suite
//! succeeds when every report behaves as intended (checks pass, negative
//! controls fail).
//!
//! Path counts are the acceptance sizes times [`SuiteOptions::scale`], so a
//! small scale gives a quick smoke run of the same code.

use std::f64::consts::PI;
use std::fmt;

use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};
use crate::formulas::quad::{integrate, integrate_half_line, Tolerance};
use crate::formulas::{
    density_l_plus_x, eval_i_quadrature, eval_j, eval_j_quadrature, eval_q, eval_r, k_row, norm_sf,
    KRow, LimitDensity, PenaltyParams, RegimeTag,
};
use crate::grid::TimeGrid;
use crate::limit::{
    m_ray_law, sample_bangbang, sample_maxdrift_weighted, sample_negative_gamma, LimitLawSpec,
};
use crate::output::{header_line, reports_csv};
use crate::penalize::{
    convergence_report, default_t_grid, has_time_factor, martingale_check, McConfig, PathFunctional,
};
use crate::rng::{map_paths, stream_id, PathRng};
use crate::sim::{simulate_radial_with_local_time, SpiderSimulator};
use crate::space::{Ray, RaySpace, SpiderPoint};
use crate::stats::{
    chi_square_rays, independence_check, ks_one_sample, ks_two_sample, ks_weighted, mean_and_se,
    z_score, TestReport, DEFAULT_LEVEL,
};

/// Run-wide settings shared by all suites.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuiteOptions {
    pub seed: u64,
    /// Multiplier on every path count; `1.0` is the acceptance size.
    pub scale: f64,
}

impl SuiteOptions {
    pub fn new(seed: u64) -> Self {
        Self { seed, scale: 1.0 }
    }

    pub fn with_scale(mut self, scale: f64) -> Self {
        self.scale = scale;
        self
    }

    fn paths(&self, base: usize) -> usize {
        ((base as f64 * self.scale).round() as usize).max(200)
    }

    fn run<T, F>(&self, label: &str, tag: u64, n: usize, f: F) -> Result<Vec<T>>
    where
        T: Send,
        F: Fn(&mut PathRng) -> Result<T> + Sync,
    {
        map_paths(self.seed, stream_id(label, tag), n, |_, rng| f(rng))
            .into_iter()
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Suite {
    Lemma,
    Formulas,
    Majorant,
    Theorem1,
    Convergence,
    Theorem2,
    Pde,
    Reproducibility,
}

impl Suite {
    pub const ALL: [Suite; 8] = [
        Suite::Lemma,
        Suite::Formulas,
        Suite::Majorant,
        Suite::Theorem1,
        Suite::Convergence,
        Suite::Theorem2,
        Suite::Pde,
        Suite::Reproducibility,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Lemma => "lemma",
            Suite::Formulas => "formulas",
            Suite::Majorant => "majorant",
            Suite::Theorem1 => "theorem1",
            Suite::Convergence => "convergence",
            Suite::Theorem2 => "theorem2",
            Suite::Pde => "pde",
            Suite::Reproducibility => "reproducibility",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|s| s.name() == name)
            .ok_or_else(|| Error::UnknownSuite(name.to_string()))
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Reports of one suite run.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteOutcome {
    pub suite: Suite,
    pub options: SuiteOptions,
    pub reports: Vec<TestReport>,
}

impl SuiteOutcome {
    pub fn ok(&self) -> bool {
        self.reports.iter().all(TestReport::ok)
    }

    pub fn failures(&self) -> impl Iterator<Item = &TestReport> {
        self.reports.iter().filter(|r| !r.ok())
    }

    /// The configuration string hashed into the CSV header.
    pub fn config(&self) -> String {
        format!("suite={} scale={}", self.suite, self.options.scale)
    }

    pub fn to_csv(&self) -> String {
        let header = header_line(&self.config(), self.options.seed);
        reports_csv(&header, self.reports.iter().map(|r| (self.suite.name(), r)))
    }
}

pub fn run_suite(suite: Suite, opts: SuiteOptions) -> Result<SuiteOutcome> {
    let reports = match suite {
        Suite::Lemma => lemma(opts)?,
        Suite::Formulas => formulas(opts)?,
        Suite::Majorant => majorant(opts)?,
        Suite::Theorem1 => theorem1(opts)?,
        Suite::Convergence => convergence(opts)?,
        Suite::Theorem2 => theorem2(opts)?,
        Suite::Pde => pde()?,
        Suite::Reproducibility => reproducibility(opts)?,
    };
    let reports = reports
        .into_iter()
        .map(|r| r.with_seed(opts.seed))
        .collect();
    Ok(SuiteOutcome {
        suite,
        options: opts,
        reports,
    })
}

fn space(mu: &[f64]) -> RaySpace {
    RaySpace::new(mu.to_vec()).expect("valid weights")
}

fn params(alpha: &[f64], gamma: f64) -> PenaltyParams {
    PenaltyParams::new(alpha.to_vec(), gamma).expect("finite coefficients")
}

/// One parameter set per regime, on two rays with weights `(0.3, 0.7)`.
pub fn regime_cases() -> Vec<(RegimeTag, RaySpace, PenaltyParams)> {
    let mu = [0.3, 0.7];
    vec![
        (RegimeTag::BangBang, space(&mu), params(&[0.5, -1.0], 1.0)),
        (RegimeTag::MaxDrift, space(&mu), params(&[1.0, -0.5], 0.3)),
        (RegimeTag::NullSpider, space(&mu), params(&[0.0, -1.0], 0.0)),
        (RegimeTag::FlatRays, space(&mu), params(&[0.0, -1.0], -1.0)),
        (
            RegimeTag::AllNegative,
            space(&mu),
            params(&[-1.0, -2.0], -1.0),
        ),
    ]
}

/// CDF lookup at the sample points, computed by accumulating quadrature
/// between consecutive sorted samples.
fn cumulative_cdf(
    samples: &[f64],
    density: impl Fn(f64) -> f64,
    mass: f64,
) -> Result<impl Fn(f64) -> f64> {
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    let mut values = Vec::with_capacity(xs.len());
    let (mut prev, mut acc) = (0.0, 0.0);
    for &x in &xs {
        acc += integrate("cdf", &density, prev, x, Tolerance::default())?;
        values.push((acc / mass).min(1.0));
        prev = x;
    }
    Ok(
        move |x: f64| match xs.binary_search_by(|v| v.total_cmp(&x)) {
            Ok(i) => values[i],
            Err(_) => f64::NAN,
        },
    )
}

fn lemma(opts: SuiteOptions) -> Result<Vec<TestReport>> {
    let n = opts.paths(10_000);
    let t = 1.0;
    let mut out = Vec::new();
    for (tag, x) in [0.0, 0.5].into_iter().enumerate() {
        let draws = opts.run("lemma", tag as u64, n, |rng| {
            let s = simulate_radial_with_local_time(x, t, 1, rng)?;
            Ok((s.radial[1], s.local_time[1]))
        })?;
        let touched: Vec<(f64, f64)> = draws.iter().copied().filter(|&(_, l)| l > 0.0).collect();
        let ratio: Vec<f64> = touched.iter().map(|&(y, l)| y / (l + y)).collect();
        let sum: Vec<f64> = touched.iter().map(|&(y, l)| l + y).collect();

        let mass = 2.0 * norm_sf(x / t.sqrt());
        let frac = touched.len() as f64 / n as f64;
        let se = (mass * (1.0 - mass) / n as f64).sqrt();
        out.push(TestReport::from_bound(
            &format!("x={x} P(L_t>0)"),
            z_score(frac, mass, se),
            3.0,
            n,
        ));
        out.push(ks_one_sample(
            &format!("x={x} ratio uniform"),
            &ratio,
            |u| u.clamp(0.0, 1.0),
            DEFAULT_LEVEL,
        )?);
        out.push(independence_check(
            &format!("x={x} ratio independent of L+X"),
            &ratio,
            &sum,
            DEFAULT_LEVEL,
            opts.seed,
        )?);
        let cdf = cumulative_cdf(&sum, |z| density_l_plus_x(z, x, t), mass)?;
        out.push(ks_one_sample(
            &format!("x={x} L+X density"),
            &sum,
            cdf,
            DEFAULT_LEVEL,
        )?);
        if x == 0.0 {
            let (radial, local): (Vec<f64>, Vec<f64>) = draws.iter().copied().unzip();
            out.push(
                independence_check(
                    "x=0 X independent of L",
                    &radial,
                    &local,
                    DEFAULT_LEVEL,
                    opts.seed,
                )?
                .as_negative_control(),
            );
        }
    }
    Ok(out)
}

/// `E_x[exp(beta X_t + gamma L_t)]` restricted to paths that touch zero when
/// `touched_only`, over one exact grid step.
fn mc_exponential_moment(
    opts: SuiteOptions,
    label: &str,
    tag: u64,
    n: usize,
    (beta, gamma, x, t): (f64, f64, f64, f64),
    touched_only: bool,
) -> Result<(f64, f64)> {
    let values = opts.run(label, tag, n, |rng| {
        let s = simulate_radial_with_local_time(x, t, 1, rng)?;
        let (y, l) = (s.radial[1], s.local_time[1]);
        Ok(if touched_only && l <= 0.0 {
            0.0
        } else {
            (beta * y + gamma * l).exp()
        })
    })?;
    Ok(mean_and_se(&values))
}

fn formulas(opts: SuiteOptions) -> Result<Vec<TestReport>> {
    let mut out = Vec::new();

    let betas = [-2.0, -1.0, -0.5, -0.1, 0.0, 0.1, 0.5, 1.0, 2.0, 3.0];
    let xs = [0.1, 0.5, 1.0, 2.0, 5.0];
    let ts = [0.5, 1.0, 4.0, 10.0];
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for &b in &betas {
        for &x in &xs {
            for &t in &ts {
                let exact = eval_j(b, x, t)?.value;
                let quad = eval_j_quadrature(b, x, t)?.value;
                worst = worst.max(((exact - quad) / quad).abs());
                count += 1;
            }
        }
    }
    out.push(TestReport::from_bound(
        "J closed form vs quadrature",
        worst,
        1e-8,
        count,
    ));

    let mut worst: f64 = 0.0;
    let mut count = 0;
    for &b in betas.iter().filter(|b| **b > 0.0) {
        for &x in &xs {
            for &t in &ts {
                let gap = eval_j_quadrature(b, x, t)?.value - eval_j(-b, x, t)?.value;
                let rhs = 2.0 * (b * x).sinh() * (t * b * b / 2.0).exp();
                worst = worst.max(((gap - rhs) / rhs).abs());
                count += 1;
            }
        }
    }
    out.push(TestReport::from_bound(
        "J reflection identity",
        worst,
        1e-8,
        count,
    ));

    let points: [(f64, f64, f64, f64); 12] = [
        (-1.0, -2.0, 0.5, 50.0),
        (-0.5, -1.0, 0.2, 2.0),
        (0.0, -1.0, 0.3, 2.0),
        (-1.0, 0.0, 0.3, 2.0),
        (0.0, 0.0, 0.5, 1.0),
        (0.0, 0.0, 0.0, 1.0),
        (0.5, -0.5, 0.2, 2.0),
        (1.0, 0.3, 0.5, 1.0),
        (-0.5, 0.5, 0.2, 2.0),
        (0.2, 0.8, 0.0, 1.0),
        (0.5, 0.5, 0.3, 2.0),
        (0.7, 0.7, 0.0, 1.0),
    ];
    let n = opts.paths(200_000);
    for (tag, &p) in points.iter().enumerate() {
        let (b, g, x, t) = p;
        let quad = eval_i_quadrature(b, g, x, t)?.value;
        let (mc, se) = mc_exponential_moment(opts, "formulas-I", tag as u64, n, p, true)?;
        out.push(TestReport::from_bound(
            &format!(
                "I quadrature vs MC {:?} beta={b} gamma={g} x={x} t={t}",
                k_row(b, g)
            ),
            z_score(mc, quad, se),
            3.0,
            n,
        ));
    }
    Ok(out)
}

/// A row of the `K` table, the horizon at which it is checked and two
/// parameter sets `(beta, gamma, x)`.
pub type MajorantCase = (KRow, f64, [(f64, f64, f64); 2]);

pub fn majorant_cases() -> Vec<MajorantCase> {
    vec![
        (
            KRow::BothNegative,
            100.0,
            [(-2.0, -3.0, 0.0), (-2.0, -2.0, 0.5)],
        ),
        (
            KRow::BetaZeroGammaNegative,
            100.0,
            [(0.0, -1.0, 0.0), (0.0, -2.0, 0.3)],
        ),
        (
            KRow::GammaZeroBetaNegative,
            100.0,
            [(-1.0, 0.0, 0.0), (-2.0, 0.0, 0.3)],
        ),
        (KRow::BothZero, 100.0, [(0.0, 0.0, 0.0), (0.0, 0.0, 0.3)]),
        (
            KRow::BetaDominant,
            50.0,
            [(0.3, -0.5, 0.0), (0.3, -0.5, 0.5)],
        ),
        (
            KRow::GammaDominant,
            50.0,
            [(-0.5, 0.3, 0.0), (-0.5, 0.3, 0.5)],
        ),
        (
            KRow::EqualPositive,
            50.0,
            [(0.3, 0.3, 0.0), (0.35, 0.35, 0.0)],
        ),
    ]
}

/// Paths per majorant point at full scale.
pub const MAJORANT_PATHS: usize = 10_000_000;

fn majorant(opts: SuiteOptions) -> Result<Vec<TestReport>> {
    let mut out = Vec::new();
    let single = space(&[1.0]);
    let n = opts.paths(MAJORANT_PATHS);
    let mut tag = 0u64;
    for (row, t, draws) in majorant_cases() {
        for (b, g, x) in draws {
            let p = params(&[b], g);
            let q = eval_q(&single, &p, x, Ray(0), t)?.value;
            let exact = eval_r(&single, &p, x, Ray(0), t)?.value;
            let (r, se) = mc_exponential_moment(opts, "majorant", tag, n, (b, g, x, t), false)?;
            tag += 1;
            let label = format!("{row:?} beta={b} gamma={g} x={x} t={t}");
            let z = z_score(r, q, se);
            out.push(TestReport::from_condition(
                &format!("{label} R<=Q"),
                z,
                3.0,
                z < 3.0,
                n,
            ));
            let gap = r / q - 1.0;
            out.push(TestReport::from_bound(
                &format!("{label} |R/Q-1|"),
                gap,
                0.05,
                n,
            ));
            out.push(TestReport::from_bound(
                &format!("{label} |R/Q-1| quadrature"),
                exact / q - 1.0,
                0.05,
                1,
            ));
        }
    }
    Ok(out)
}

/// Paths per martingale check at full scale. The MaxDrift density is heavy
/// tailed and its sample means are visibly skewed at `10^5` paths.
pub const THEOREM1_PATHS: usize = 1_000_000;

fn theorem1(opts: SuiteOptions) -> Result<Vec<TestReport>> {
    let n = opts.paths(THEOREM1_PATHS);
    let s = 1.0;
    let mut out = Vec::new();
    for (tag, (regime, space, params)) in regime_cases().into_iter().enumerate() {
        let density = LimitDensity::new(&space, &params)?;
        for (j, h) in [0.5, 1.0].into_iter().enumerate() {
            let seed = opts.seed ^ stream_id("theorem1", (tag * 2 + j) as u64);
            for r in martingale_check(&space, &density, s, h, n, seed)? {
                out.push(TestReport {
                    name: format!("{regime} h={h} {}", r.name),
                    ..r
                });
            }
        }
        if has_time_factor(regime) {
            let corrupted = density.clone().without_time_factor();
            let seed = opts.seed ^ stream_id("theorem1-corrupted", tag as u64);
            let first = martingale_check(&space, &corrupted, s, 0.5, n, seed)?.remove(0);
            out.push(
                TestReport::from_bound(
                    &format!("{regime} corrupted density E[M_s]=1"),
                    first.statistic,
                    5.0,
                    n,
                )
                .as_negative_control(),
            );
        }
    }
    Ok(out)
}

/// Parameter sets of the convergence suite, chosen so that the exact gap
/// between the penalized law at `t = 17` and the limit is well below one
/// standard error at full scale.
pub fn convergence_cases() -> Vec<(RegimeTag, RaySpace, PenaltyParams)> {
    let mu = [0.3, 0.7];
    vec![
        (RegimeTag::BangBang, space(&mu), params(&[-0.5, -1.0], 0.5)),
        (RegimeTag::MaxDrift, space(&mu), params(&[0.5, -1.0], 0.2)),
        (RegimeTag::NullSpider, space(&mu), params(&[0.0, 0.0], 0.0)),
        (RegimeTag::FlatRays, space(&mu), params(&[0.0, -3.0], -1.0)),
        (
            RegimeTag::AllNegative,
            space(&mu),
            params(&[-2.0, -3.0], -2.0),
        ),
    ]
}

pub fn convergence_functionals(s: f64) -> Result<Vec<PathFunctional>> {
    Ok(vec![
        PathFunctional::on_ray(s, Ray(0))?,
        PathFunctional::exp_neg_local_time(s)?,
        PathFunctional::local_time_above(s, 0.5)?,
    ])
}

fn convergence(opts: SuiteOptions) -> Result<Vec<TestReport>> {
    let n = opts.paths(100_000);
    let s = 1.0;
    let t_grid = default_t_grid(s);
    let mut out = Vec::new();
    for (tag, (regime, space, params)) in convergence_cases().into_iter().enumerate() {
        for (j, f) in convergence_functionals(s)?.iter().enumerate() {
            let seed = opts.seed ^ stream_id("convergence", (tag * 8 + j) as u64);
            let rows = convergence_report(f, &t_grid, &space, &params, &McConfig::new(n, seed))?;
            let last = rows.last().expect("nonempty grid");
            let se = last.se.hypot(last.limit_se);
            out.push(TestReport::from_bound(
                &format!("{regime} {} t={}", f.name(), last.t),
                z_score(last.estimate, last.limit_estimate, se),
                3.0,
                n,
            ));
        }
    }
    Ok(out)
}

fn ray_counts(rays: impl IntoIterator<Item = Ray>, m: usize) -> Vec<u64> {
    let mut counts = vec![0u64; m];
    for r in rays {
        counts[r.0] += 1;
    }
    counts
}

/// `|B_t|` for a Brownian motion of drift `drift` from zero.
fn folded_normal_density(y: f64, drift: f64, t: f64) -> f64 {
    let c = 1.0 / (2.0 * PI * t).sqrt();
    c * ((-(y - drift * t).powi(2) / (2.0 * t)).exp()
        + (-(y + drift * t).powi(2) / (2.0 * t)).exp())
}

fn theorem2(opts: SuiteOptions) -> Result<Vec<TestReport>> {
    let n = opts.paths(10_000);
    let mut out = Vec::new();

    // BangBang: stationary radial law and recurrence.
    let (bb_space, bb_params) = (space(&[0.3, 0.7]), params(&[0.5, -1.0], 1.0));
    let grid = TimeGrid::from_times(vec![10.0, 20.0])?;
    let spec = LimitLawSpec::on_grid(bb_space.clone(), bb_params.clone(), grid.clone())?;
    let paths = opts.run("theorem2-bangbang", 0, n, |rng| sample_bangbang(&spec, rng))?;
    let rate = 2.0 * bb_params.gamma();
    let end: Vec<f64> = paths.iter().map(|p| p.radial[2]).collect();
    out.push(ks_one_sample(
        "BangBang X_20 ~ Exp(2 gamma)",
        &end,
        |x| -(-rate * x).exp_m1(),
        DEFAULT_LEVEL,
    )?);
    let recurrent = paths
        .iter()
        .filter(|p| p.local_time[2] > p.local_time[1])
        .count() as f64
        / n as f64;
    out.push(TestReport::from_condition(
        "BangBang zeros in [10, 20]",
        recurrent,
        0.99,
        recurrent >= 0.99,
        n,
    ));
    let sim = SpiderSimulator::new(bb_space, grid);
    let free = opts.run("theorem2-spider", 0, n, |rng| {
        sim.simulate(SpiderPoint::origin(), rng)
    })?;
    let free_end: Vec<f64> = free.iter().map(|p| p.radial[2]).collect();
    out.push(
        ks_two_sample(
            "BangBang X_20 vs spider X_20",
            &end,
            &free_end,
            DEFAULT_LEVEL,
        )?
        .as_negative_control(),
    );

    // MaxDrift with gamma > 0: weighted total local time and the final ray.
    let md_space = space(&[0.3, 0.7]);
    let md_params = params(&[1.0, -0.5], 0.3);
    let spec = LimitLawSpec::new(md_space.clone(), md_params.clone(), 5.0, 50)?;
    let draws = opts.run("theorem2-maxdrift", 0, n, |rng| {
        sample_maxdrift_weighted(&spec, rng)
    })?;
    let total: Vec<f64> = draws.iter().map(|d| d.limit_local_time).collect();
    let weights: Vec<f64> = draws.iter().map(|d| d.sample.weight).collect();
    let rate = md_params.alpha_max() - md_params.gamma();
    out.push(ks_weighted(
        "MaxDrift L_inf ~ Exp(abar - gamma)",
        &total,
        &weights,
        |x| -(-rate * x).exp_m1(),
        DEFAULT_LEVEL,
    )?);
    let on_top = |r: Ray| spec.regime.in_argmax(r);
    let bad_final = draws
        .iter()
        .filter(|d| {
            !on_top(d.final_ray) || (!d.returns_after_horizon && !on_top(d.sample.path.last().ray))
        })
        .count();
    out.push(TestReport::from_condition(
        "MaxDrift last excursion on a ray of maximal drift",
        bad_final as f64,
        0.0,
        bad_final == 0,
        n,
    ));

    // MaxDrift with gamma = 0 against the explicit construction.
    let (t, abar) = (2.0, 1.0);
    let zero_params = params(&[abar, -0.5], 0.0);
    let spec = LimitLawSpec::new(md_space.clone(), zero_params, t, 40)?;
    let draws = opts.run("theorem2-maxdrift-zero", 0, n, |rng| {
        sample_maxdrift_weighted(&spec, rng)
    })?;
    let sampled: Vec<f64> = draws.iter().map(|d| d.sample.path.last().radius).collect();
    let explicit = opts.run("theorem2-explicit", 0, n, |rng| {
        Ok((abar * t + t.sqrt() * crate::bridge::normal(rng)).abs())
    })?;
    out.push(ks_two_sample(
        "MaxDrift gamma=0 X_t vs explicit",
        &sampled,
        &explicit,
        DEFAULT_LEVEL,
    )?);
    let mean_tanh = integrate_half_line(
        "tanh",
        |y| (abar * y).tanh() * folded_normal_density(y, abar, t),
        abar * t,
        t.sqrt(),
        Tolerance::default(),
    )?;
    let top_mass = spec.regime.argmax_mass(&md_space);
    let probs: Vec<f64> = md_space
        .rays()
        .map(|r| {
            let w = md_space.weight(r);
            w * (1.0 - mean_tanh)
                + if on_top(r) {
                    w / top_mass * mean_tanh
                } else {
                    0.0
                }
        })
        .collect();
    let counts = ray_counts(
        draws.iter().map(|d| d.sample.path.last().ray),
        md_space.len(),
    );
    out.push(chi_square_rays(
        "MaxDrift gamma=0 N_t vs explicit",
        &counts,
        &probs,
        DEFAULT_LEVEL,
    )?);

    // gamma < 0: total local time, escape ray and the Bessel(3) escape.
    let negative = [
        (
            "FlatRays",
            space(&[0.2, 0.3, 0.5]),
            params(&[0.0, 0.0, -1.0], -1.0),
        ),
        (
            "AllNegative 7/11",
            space(&[0.5, 0.5]),
            params(&[-1.0, -2.0], -1.0),
        ),
    ];
    let (horizon, steps, lag) = (10.0, 100, 20);
    for (tag, (label, sp, pp)) in negative.into_iter().enumerate() {
        let spec = LimitLawSpec::new(sp.clone(), pp.clone(), horizon, steps)?;
        let draws = opts.run("theorem2-negative", tag as u64, n, |rng| {
            sample_negative_gamma(&spec, rng)
        })?;
        let rate = pp.gamma().abs();
        let levels: Vec<f64> = draws.iter().map(|d| d.limit_local_time).collect();
        out.push(ks_one_sample(
            &format!("{label} L_inf ~ Exp(|gamma|)"),
            &levels,
            |x| -(-rate * x).exp_m1(),
            DEFAULT_LEVEL,
        )?);
        let law = m_ray_law(&sp, &pp)?;
        let counts = ray_counts(draws.iter().map(|d| d.escape_ray), sp.len());
        out.push(chi_square_rays(
            &format!("{label} escape ray law"),
            &counts,
            &law,
            DEFAULT_LEVEL,
        )?);
        if tag == 1 {
            out.push(
                chi_square_rays(
                    &format!("{label} escape ray vs mu"),
                    &counts,
                    sp.weights(),
                    DEFAULT_LEVEL,
                )?
                .as_negative_control(),
            );
        }
        let dt = horizon / steps as f64;
        let u = lag as f64 * dt;
        let scaled: Vec<f64> = draws
            .iter()
            .filter_map(|d| {
                d.escape_index
                    .filter(|&i| i + lag <= steps)
                    .map(|i| d.path.radial[i + lag] / u.sqrt())
            })
            .collect();
        let chi3 = ChiSquared::new(3.0).expect("positive degrees of freedom");
        out.push(ks_one_sample(
            &format!("{label} escape X_(tau+{u})/sqrt({u}) ~ chi(3)"),
            &scaled,
            |z| chi3.cdf(z * z),
            DEFAULT_LEVEL,
        )?);
    }
    Ok(out)
}

/// Largest relative residual of the backward heat equation and of the flux
/// balance at the origin, by finite differences of step `FD_STEP`.
pub const FD_STEP: f64 = 1e-3;
pub const PDE_TOLERANCE: f64 = 1e-4;

pub fn heat_residual(density: &LimitDensity, s: f64, x: f64, ray: Ray, l: f64) -> f64 {
    let h = FD_STEP;
    let m = |s: f64, x: f64| density.value(s, x, ray, l);
    let centre = m(s, x);
    let ds = (m(s + h, x) - m(s - h, x)) / (2.0 * h);
    let dxx = (m(s, x + h) - 2.0 * centre + m(s, x - h)) / (h * h);
    (ds + 0.5 * dxx).abs() / centre
}

pub fn flux_residual(density: &LimitDensity, space: &RaySpace, s: f64, l: f64) -> f64 {
    let h = FD_STEP;
    let dl =
        (density.value(s, 0.0, Ray(0), l + h) - density.value(s, 0.0, Ray(0), l - h)) / (2.0 * h);
    let dx: f64 = space
        .rays()
        .map(|r| {
            let m = |x: f64| density.value(s, x, r, l);
            space.weight(r) * (-3.0 * m(0.0) + 4.0 * m(h) - m(2.0 * h)) / (2.0 * h)
        })
        .sum();
    (dl + dx).abs() / density.value(s, 0.0, Ray(0), l)
}

fn pde() -> Result<Vec<TestReport>> {
    let mut out = Vec::new();
    let ss = [0.5, 1.0, 2.0];
    let xs = [0.1, 0.25, 0.5, 1.0, 1.5, 2.0, 3.0];
    let ls = [0.5, 1.0];
    for (regime, space, params) in regime_cases() {
        let density = LimitDensity::new(&space, &params)?;
        let mut worst: f64 = 0.0;
        let mut count = 0;
        for &s in &ss {
            for &x in &xs {
                for &l in &ls {
                    for r in space.rays() {
                        worst = worst.max(heat_residual(&density, s, x, r, l));
                        count += 1;
                    }
                }
            }
        }
        out.push(TestReport::from_bound(
            &format!("{regime} heat equation"),
            worst,
            PDE_TOLERANCE,
            count,
        ));
        let mut worst: f64 = 0.0;
        for &s in &ss {
            for &l in &ls {
                worst = worst.max(flux_residual(&density, &space, s, l));
            }
        }
        out.push(TestReport::from_bound(
            &format!("{regime} flux balance at the origin"),
            worst,
            PDE_TOLERANCE,
            ss.len() * ls.len(),
        ));
    }
    Ok(out)
}

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::invalid("threads", e.to_string()))?;
    Ok(pool.install(f))
}

fn reproducibility(opts: SuiteOptions) -> Result<Vec<TestReport>> {
    let mut out = Vec::new();
    let small = opts.with_scale(0.1 * opts.scale);
    for suite in [Suite::Lemma, Suite::Theorem1, Suite::Theorem2] {
        let first = run_suite(suite, small)?.to_csv();
        let again = run_suite(suite, small)?.to_csv();
        let same = first == again;
        out.push(TestReport::from_condition(
            &format!("{suite} rerun byte-identical"),
            f64::from(u8::from(!same)),
            0.0,
            same,
            first.len(),
        ));
        let one = in_pool(1, || run_suite(suite, small))??.to_csv();
        let four = in_pool(4, || run_suite(suite, small))??.to_csv();
        let same = one == four && one == first;
        out.push(TestReport::from_condition(
            &format!("{suite} 1 vs 4 threads identical"),
            f64::from(u8::from(!same)),
            0.0,
            same,
            one.len(),
        ));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(Suite::from_name(s.name()).unwrap(), s);
        }
        assert!(matches!(
            Suite::from_name("nope"),
            Err(Error::UnknownSuite(_))
        ));
    }

    #[test]
    fn case_tables_cover_every_regime() {
        for cases in [regime_cases(), convergence_cases()] {
            let tags: Vec<RegimeTag> = cases.iter().map(|c| c.0).collect();
            assert_eq!(tags, RegimeTag::ALL.to_vec());
            for (tag, space, params) in cases {
                assert_eq!(
                    crate::formulas::classify_regime(&space, &params)
                        .unwrap()
                        .tag,
                    tag
                );
            }
        }
        let rows: Vec<KRow> = majorant_cases().iter().map(|c| c.0).collect();
        assert_eq!(rows, KRow::ALL.to_vec());
        for (row, _, draws) in majorant_cases() {
            for (b, g, _) in draws {
                assert_eq!(k_row(b, g), row);
            }
        }
    }

    #[test]
    fn pde_suite_is_deterministic_and_passes() {
        let a = run_suite(Suite::Pde, SuiteOptions::new(1)).unwrap();
        assert!(a.ok(), "{:?}", a.failures().collect::<Vec<_>>());
        assert_eq!(
            a.to_csv(),
            run_suite(Suite::Pde, SuiteOptions::new(1))
                .unwrap()
                .to_csv()
        );
    }
}
