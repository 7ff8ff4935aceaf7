//! Direct limit samplers against the limit measure obtained by weighting free
//! spider paths with the martingale density. The two routes share nothing
//! but the law they are meant to represent.

use walsh_spider::formulas::classify_regime;
use walsh_spider::limit::{m_ray_law, sample_limit, LimitLawSpec};
use walsh_spider::penalize::{limit_expectation, weighted_mean, McConfig, PathFunctional};
use walsh_spider::rng::map_paths;
use walsh_spider::stats::z_score;
use walsh_spider::{PenaltyParams, RaySpace};

const HORIZON: f64 = 2.0;
const STEPS: usize = 200;
const PATHS: usize = 40_000;

fn case(mu: &[f64], alpha: &[f64], gamma: f64) -> (RaySpace, PenaltyParams) {
    (
        RaySpace::new(mu.to_vec()).unwrap(),
        PenaltyParams::new(alpha.to_vec(), gamma).unwrap(),
    )
}

fn cases() -> Vec<(RaySpace, PenaltyParams)> {
    vec![
        case(&[0.3, 0.7], &[0.5, -1.0], 1.0),
        case(&[0.3, 0.7], &[1.0, -0.5], 0.3),
        case(&[0.3, 0.7], &[0.0, -1.0], 0.0),
        case(&[0.2, 0.3, 0.5], &[0.0, 0.0, -1.0], -1.0),
        case(&[0.5, 0.5], &[-1.0, -2.0], -1.0),
    ]
}

#[test]
fn samplers_agree_with_the_weighted_limit_measure() {
    for (seed, (space, params)) in cases().into_iter().enumerate() {
        let tag = classify_regime(&space, &params).unwrap().tag;
        let mut functionals = vec![
            PathFunctional::exp_neg_local_time(HORIZON).unwrap(),
            PathFunctional::radius_above(HORIZON, 1.0).unwrap(),
        ];
        for r in space.rays() {
            functionals.push(PathFunctional::on_ray(HORIZON, r).unwrap());
        }
        let spec = LimitLawSpec::new(space.clone(), params.clone(), HORIZON, STEPS).unwrap();
        let samples = map_paths(seed as u64, 1, PATHS, |_, rng| {
            sample_limit(&spec, rng).unwrap()
        });
        let weights: Vec<f64> = samples.iter().map(|s| s.weight).collect();
        let cfg = McConfig::new(PATHS, 100 + seed as u64).with_steps(STEPS);
        for f in &functionals {
            let values: Vec<f64> = samples.iter().map(|s| f.eval(&s.path).unwrap()).collect();
            let direct = weighted_mean(&values, &weights).unwrap();
            let weighted = limit_expectation(f, &space, &params, &cfg).unwrap();
            let z = z_score(
                direct.estimate,
                weighted.estimate,
                direct.se.hypot(weighted.se),
            );
            assert!(
                z.abs() < 4.0,
                "{tag} {}: sampler {} +- {}, weighted {} +- {}",
                f.name(),
                direct.estimate,
                direct.se,
                weighted.estimate,
                weighted.se
            );
        }
    }
}

#[test]
fn maxdrift_weights_have_unit_mean() {
    let (space, params) = case(&[0.3, 0.7], &[1.0, -0.5], 0.3);
    let spec = LimitLawSpec::new(space, params, 3.0, 60).unwrap();
    let w: Vec<f64> = map_paths(5, 2, PATHS, |_, rng| {
        sample_limit(&spec, rng).unwrap().weight
    });
    let (m, se) = walsh_spider::stats::mean_and_se(&w);
    assert!(z_score(m, 1.0, se).abs() < 4.0, "mean weight {m} +- {se}");
}

#[test]
fn escape_ray_law_examples() {
    let (space, params) = case(&[0.5, 0.5], &[-1.0, -2.0], -1.0);
    let law = m_ray_law(&space, &params).unwrap();
    assert!((law[0] - 7.0 / 11.0).abs() < 1e-15);
    assert!((law[1] - 4.0 / 11.0).abs() < 1e-15);

    let (space, params) = case(&[0.2, 0.3, 0.5], &[0.0, 0.0, -1.0], -1.0);
    let law = m_ray_law(&space, &params).unwrap();
    assert_eq!(law, vec![0.4, 0.6, 0.0]);

    let (space, params) = case(&[0.2, 0.3, 0.5], &[-3.0, 0.0, -1.0], -0.5);
    assert_eq!(m_ray_law(&space, &params).unwrap(), vec![0.0, 1.0, 0.0]);

    let (space, params) = case(&[0.3, 0.7], &[0.5, -1.0], 1.0);
    assert!(m_ray_law(&space, &params).is_err());
}
