use std::fmt;

use super::params::PenaltyParams;
use crate::error::Result;
use crate::space::{Ray, RaySpace};

/// Which row of the limit-martingale table applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RegimeTag {
    /// `gamma > 0` and `gamma >= alpha_m` for every ray.
    BangBang,
    /// `max(alpha) > gamma` and `max(alpha) > 0`.
    MaxDrift,
    /// `gamma = 0` and every `alpha_m <= 0`.
    NullSpider,
    /// `gamma < 0`, every `alpha_m <= 0`, some equal to zero.
    FlatRays,
    /// `gamma < 0` and every `alpha_m < 0`.
    AllNegative,
}

impl RegimeTag {
    pub const ALL: [RegimeTag; 5] = [
        RegimeTag::BangBang,
        RegimeTag::MaxDrift,
        RegimeTag::NullSpider,
        RegimeTag::FlatRays,
        RegimeTag::AllNegative,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RegimeTag::BangBang => "BangBang",
            RegimeTag::MaxDrift => "MaxDrift",
            RegimeTag::NullSpider => "NullSpider",
            RegimeTag::FlatRays => "FlatRays",
            RegimeTag::AllNegative => "AllNegative",
        }
    }

    /// Whether `params` satisfies this row's condition, checked on its own so
    /// that tests can assert the rows partition the parameter space.
    pub fn matches(self, params: &PenaltyParams) -> bool {
        let g = params.gamma();
        let top = params.alpha_max();
        match self {
            RegimeTag::BangBang => g > 0.0 && g >= top,
            RegimeTag::MaxDrift => top > g && top > 0.0,
            RegimeTag::NullSpider => g == 0.0 && top <= 0.0,
            RegimeTag::FlatRays => g < 0.0 && top == 0.0,
            RegimeTag::AllNegative => g < 0.0 && top < 0.0,
        }
    }
}

impl fmt::Display for RegimeTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Classified parameters with the data each row needs.
#[derive(Debug, Clone, PartialEq)]
pub struct Regime {
    pub tag: RegimeTag,
    /// `{m : alpha_m = max(alpha)}` for MaxDrift, `{m : alpha_m = 0}` for
    /// FlatRays, empty otherwise.
    pub argmax_set: Vec<Ray>,
    /// Coefficient of the radial position in the martingale for the
    /// `gamma < 0` rows (`sum_k mu_k theta_k = |gamma|`); zeros otherwise.
    pub theta: Vec<f64>,
}

impl Regime {
    /// `mu` mass of the argmax set.
    pub fn argmax_mass(&self, space: &RaySpace) -> f64 {
        self.argmax_set.iter().map(|&r| space.weight(r)).sum()
    }

    pub fn in_argmax(&self, ray: Ray) -> bool {
        self.argmax_set.contains(&ray)
    }
}

pub fn classify_regime(space: &RaySpace, params: &PenaltyParams) -> Result<Regime> {
    params.check(space)?;
    let g = params.gamma();
    let top = params.alpha_max();
    let m = space.len();
    let tag = if g > 0.0 && g >= top {
        RegimeTag::BangBang
    } else if top > 0.0 && top > g {
        RegimeTag::MaxDrift
    } else if g == 0.0 {
        RegimeTag::NullSpider
    } else if top == 0.0 {
        RegimeTag::FlatRays
    } else {
        RegimeTag::AllNegative
    };
    debug_assert!(RegimeTag::ALL.iter().filter(|t| t.matches(params)).count() == 1);

    let mut regime = Regime {
        tag,
        argmax_set: Vec::new(),
        theta: vec![0.0; m],
    };
    match tag {
        RegimeTag::MaxDrift => regime.argmax_set = params.argmax(),
        RegimeTag::FlatRays => {
            regime.argmax_set = params.rays_where(|a| a == 0.0);
            let mass = regime.argmax_mass(space);
            for &r in &regime.argmax_set {
                regime.theta[r.0] = g.abs() / mass;
            }
        }
        RegimeTag::AllNegative => {
            let mu = space.weights();
            let a = params.alpha();
            let cross: f64 = mu.iter().zip(a).map(|(w, a)| w / (a * g)).sum();
            let denom: f64 = mu
                .iter()
                .zip(a)
                .map(|(w, a)| w * (a.abs() + g.abs()) / (a * a * g * g))
                .sum();
            for (theta, ak) in regime.theta.iter_mut().zip(a) {
                *theta = (1.0 / (ak * ak) + cross) / denom;
            }
        }
        RegimeTag::BangBang | RegimeTag::NullSpider => {}
    }
    Ok(regime)
}
