use walsh_spider::formulas::{
    classify_regime, eval_i_quadrature, eval_j, eval_j_quadrature, eval_k, eval_l_majorant, eval_m,
    eval_q, eval_q_asymptotic, eval_r, eval_return_prob, FormulaKind, FormulaValue,
};
use walsh_spider::limit::{sample_limit, LimitLawSpec};
use walsh_spider::output::{convergence_csv, formulas_csv, header_line, paths_csv, FormulaRow};
use walsh_spider::penalize::{convergence_report, default_t_grid, McConfig, PathFunctional};
use walsh_spider::rng::{map_paths, stream_id};
use walsh_spider::suites::{run_suite, Suite, SuiteOptions};
use walsh_spider::{PenaltyParams, Ray, RaySpace, SpiderPoint, SpiderSimulator, TimeGrid};

use crate::config::Config;
use crate::CliError;

/// What a command produced.
pub struct Output {
    pub csv: String,
    /// One line for stderr, always naming the regime when there is one.
    pub summary: String,
    /// Set when the command ran but its verdict is negative.
    pub failure: Option<String>,
}

impl Output {
    fn ok(csv: String, summary: String) -> Self {
        Self {
            csv,
            summary,
            failure: None,
        }
    }
}

fn ray_space(cfg: &Config) -> Result<RaySpace, CliError> {
    let mu: Vec<f64> = cfg.require_list("mu")?;
    let space = match cfg.list::<String>("rays")? {
        Some(names) => RaySpace::with_names(names, mu)?,
        None => RaySpace::new(mu)?,
    };
    Ok(space)
}

fn penalty(cfg: &Config, space: &RaySpace) -> Result<PenaltyParams, CliError> {
    let alpha: Vec<f64> = cfg.require_list("alpha")?;
    let params = PenaltyParams::new(alpha, cfg.require("gamma")?)?;
    params.check(space)?;
    Ok(params)
}

fn header(cfg: &Config) -> Result<String, CliError> {
    Ok(header_line(&cfg.canonical(), cfg.require("seed")?))
}

fn ray_index(cfg: &Config, key: &'static str, space: &RaySpace) -> Result<Ray, CliError> {
    Ok(space.check(Ray(cfg.require(key)?))?)
}

pub fn simulate(cfg: &mut Config) -> Result<Output, CliError> {
    cfg.or_default("t", 1.0);
    cfg.or_default("steps", 100);
    cfg.or_default("n_paths", 10);
    cfg.or_default("seed", 0);
    cfg.or_default("x0", 0.0);
    cfg.or_default("start_ray", 0);
    cfg.or_default("gamma", 0.0);
    let space = ray_space(cfg)?;
    if cfg.raw("alpha").is_none() {
        cfg.set("alpha", vec!["0"; space.len()].join(","));
    }
    let params = penalty(cfg, &space)?;
    let regime = classify_regime(&space, &params)?;
    let start = SpiderPoint::new(cfg.require("x0")?, ray_index(cfg, "start_ray", &space)?)?;
    let grid = TimeGrid::uniform(cfg.require("t")?, cfg.require("steps")?)?;
    let n: usize = cfg.require("n_paths")?;
    let paths = SpiderSimulator::new(space, grid).simulate_many(
        start,
        cfg.require("seed")?,
        stream_id("simulate", 0),
        n,
    )?;
    Ok(Output::ok(
        paths_csv(&header(cfg)?, &paths, None),
        format!("regime={} paths={n}", regime.tag),
    ))
}

const FORMULAS: [&str; 10] = [
    "J",
    "J_quadrature",
    "L",
    "I",
    "K",
    "R",
    "Q",
    "Q_asymptotic",
    "M",
    "return_prob",
];

pub fn formulas(cfg: &mut Config) -> Result<Output, CliError> {
    cfg.or_default("beta", 0.0);
    cfg.or_default("gamma", 0.0);
    cfg.or_default("x", 0.0);
    cfg.or_default("t", 1.0);
    cfg.or_default("k", 0);
    cfg.or_default("l", 0.0);
    cfg.or_default("seed", 0);
    let name: String = cfg.require("name")?;
    if !FORMULAS.contains(&name.as_str()) {
        return Err(CliError::invalid(
            "name",
            format!(
                "unknown formula `{name}`, expected one of {}",
                FORMULAS.join(", ")
            ),
        ));
    }
    let betas: Vec<f64> = cfg.require_list("beta")?;
    let gammas: Vec<f64> = cfg.require_list("gamma")?;
    let xs: Vec<f64> = cfg.require_list("x")?;
    let ts: Vec<f64> = cfg.require_list("t")?;
    let on_space = matches!(name.as_str(), "R" | "Q" | "Q_asymptotic" | "M");

    let mut rows = Vec::new();
    let mut regimes: Vec<String> = Vec::new();
    let mut note_regime = |space: &RaySpace, params: &PenaltyParams| -> Result<(), CliError> {
        let tag = classify_regime(space, params)?.tag.to_string();
        if !regimes.contains(&tag) {
            regimes.push(tag);
        }
        Ok(())
    };

    if on_space {
        let space = ray_space(cfg)?;
        let alpha: Vec<f64> = cfg.require_list("alpha")?;
        let k = ray_index(cfg, "k", &space)?;
        let l: f64 = cfg.require("l")?;
        for &g in &gammas {
            let params = PenaltyParams::new(alpha.clone(), g)?;
            params.check(&space)?;
            note_regime(&space, &params)?;
            for &x in &xs {
                for &t in &ts {
                    let value = match name.as_str() {
                        "R" => eval_r(&space, &params, x, k, t)?,
                        "Q" => eval_q(&space, &params, x, k, t)?,
                        "Q_asymptotic" => eval_q_asymptotic(&space, &params, x, k, t)?,
                        _ => FormulaValue {
                            value: eval_m(&space, &params, t, x, k, l)?,
                            kind: FormulaKind::Exact,
                        },
                    };
                    rows.push(FormulaRow {
                        formula: name.clone(),
                        beta: params.alpha_of(k),
                        gamma: g,
                        x,
                        k: Some(k.0),
                        t,
                        value,
                    });
                }
            }
        }
    } else {
        let single = RaySpace::new(vec![1.0])?;
        for &b in &betas {
            for &g in &gammas {
                note_regime(&single, &PenaltyParams::new(vec![b], g)?)?;
                for &x in &xs {
                    for &t in &ts {
                        let value = match name.as_str() {
                            "J" => eval_j(b, x, t)?,
                            "J_quadrature" => eval_j_quadrature(b, x, t)?,
                            "L" => eval_l_majorant(b, x, t)?,
                            "I" => eval_i_quadrature(b, g, x, t)?,
                            "K" => eval_k(b, g, x, t)?,
                            _ => FormulaValue {
                                value: eval_return_prob(b, x)?,
                                kind: FormulaKind::Exact,
                            },
                        };
                        rows.push(FormulaRow {
                            formula: name.clone(),
                            beta: b,
                            gamma: g,
                            x,
                            k: None,
                            t,
                            value,
                        });
                    }
                }
            }
        }
    }
    let n = rows.len();
    Ok(Output::ok(
        formulas_csv(&header(cfg)?, &rows),
        format!("regime={} formula={name} rows={n}", regimes.join("/")),
    ))
}

/// `name` or `name:argument`, e.g. `on_ray:1`.
fn functional(spec: &str, s: f64, space: &RaySpace) -> Result<PathFunctional, CliError> {
    let (name, arg) = match spec.split_once(':') {
        Some((n, a)) => (n, Some(a)),
        None => (spec, None),
    };
    let number = || -> Result<f64, CliError> {
        arg.ok_or_else(|| CliError::invalid("functional", format!("`{name}` needs an argument")))?
            .parse()
            .map_err(|e| CliError::invalid("functional", format!("bad argument: {e}")))
    };
    let f = match name {
        "constant" => PathFunctional::constant(s, number()?)?,
        "radius_above" => PathFunctional::radius_above(s, number()?)?,
        "radius_at_most" => PathFunctional::radius_at_most(s, number()?)?,
        "local_time_above" => PathFunctional::local_time_above(s, number()?)?,
        "on_ray" => {
            let m = number()?;
            if m.fract() != 0.0 || m < 0.0 {
                return Err(CliError::invalid(
                    "functional",
                    "ray index must be an integer",
                ));
            }
            PathFunctional::on_ray(s, space.check(Ray(m as usize))?)?
        }
        "exp_neg_local_time" => PathFunctional::exp_neg_local_time(s)?,
        "exp_neg_radius" => PathFunctional::exp_neg_radius(s)?,
        other => {
            return Err(CliError::invalid(
                "functional",
                format!("unknown functional `{other}`"),
            ))
        }
    };
    Ok(f)
}

pub fn penalize(cfg: &mut Config) -> Result<Output, CliError> {
    cfg.or_default("s", 1.0);
    cfg.or_default("steps", walsh_spider::penalize::DEFAULT_STEPS);
    cfg.or_default("n_paths", 10_000);
    cfg.or_default("seed", 0);
    cfg.or_default("functional", "exp_neg_local_time");
    let space = ray_space(cfg)?;
    let params = penalty(cfg, &space)?;
    let regime = classify_regime(&space, &params)?;
    let s: f64 = cfg.require("s")?;
    if cfg.raw("t_grid").is_none() {
        let grid: Vec<String> = default_t_grid(s).iter().map(f64::to_string).collect();
        cfg.set("t_grid", grid.join(","));
    }
    let t_grid: Vec<f64> = cfg.require_list("t_grid")?;
    let spec: String = cfg.require("functional")?;
    let f = functional(&spec, s, &space)?;
    let mc = McConfig::new(cfg.require("n_paths")?, cfg.require("seed")?)
        .with_steps(cfg.require("steps")?);
    let rows = convergence_report(&f, &t_grid, &space, &params, &mc)?;
    let last = rows.last().expect("t_grid is nonempty");
    Ok(Output::ok(
        convergence_csv(&header(cfg)?, &rows),
        format!(
            "regime={} functional={} t={} estimate={} limit={}",
            regime.tag,
            f.name(),
            last.t,
            last.estimate,
            last.limit_estimate
        ),
    ))
}

pub fn limit_sample(cfg: &mut Config) -> Result<Output, CliError> {
    cfg.or_default("t", 1.0);
    cfg.or_default("steps", 100);
    cfg.or_default("n_paths", 10);
    cfg.or_default("seed", 0);
    let space = ray_space(cfg)?;
    let params = penalty(cfg, &space)?;
    let spec = LimitLawSpec::new(space, params, cfg.require("t")?, cfg.require("steps")?)?;
    let n: usize = cfg.require("n_paths")?;
    let samples = map_paths(
        cfg.require("seed")?,
        stream_id("limit-sample", 0),
        n,
        |_, rng| sample_limit(&spec, rng),
    )
    .into_iter()
    .collect::<Result<Vec<_>, _>>()?;
    let weights: Vec<f64> = samples.iter().map(|s| s.weight).collect();
    let paths: Vec<_> = samples.into_iter().map(|s| s.path).collect();
    Ok(Output::ok(
        paths_csv(&header(cfg)?, &paths, Some(&weights)),
        format!("regime={} paths={n}", spec.regime.tag),
    ))
}

pub fn verify(cfg: &mut Config) -> Result<Output, CliError> {
    cfg.or_default("seed", 0);
    cfg.or_default("scale", 1.0);
    let suite = Suite::from_name(&cfg.require::<String>("suite")?)?;
    let scale: f64 = cfg.require("scale")?;
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(CliError::invalid("scale", "must be positive"));
    }
    let outcome = run_suite(
        suite,
        SuiteOptions::new(cfg.require("seed")?).with_scale(scale),
    )?;
    let failed: Vec<&str> = outcome.failures().map(|r| r.name.as_str()).collect();
    let summary = format!(
        "regime=all suite={suite} checks={} failed={}",
        outcome.reports.len(),
        failed.len()
    );
    let failure = (!failed.is_empty()).then(|| failed.join("; "));
    Ok(Output {
        csv: outcome.to_csv(),
        summary,
        failure,
    })
}
