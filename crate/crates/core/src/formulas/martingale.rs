use super::params::PenaltyParams;
use super::regime::{classify_regime, Regime, RegimeTag};
use crate::error::Result;
use crate::space::{Ray, RaySpace};

/// Density process of the limit measure with respect to the spider from the
/// origin, as a function of `(s, X_s, N_s, L_s)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitDensity {
    regime: Regime,
    gamma: f64,
    alpha_max: f64,
    /// `(alpha_max - gamma) / (alpha_max * mu(J))`, MaxDrift only.
    sinh_coef: f64,
    with_time_factor: bool,
}

impl LimitDensity {
    pub fn new(space: &RaySpace, params: &PenaltyParams) -> Result<Self> {
        let regime = classify_regime(space, params)?;
        let gamma = params.gamma();
        let alpha_max = params.alpha_max();
        let sinh_coef = if regime.tag == RegimeTag::MaxDrift {
            (alpha_max - gamma) / (alpha_max * regime.argmax_mass(space))
        } else {
            0.0
        };
        Ok(Self {
            regime,
            gamma,
            alpha_max,
            sinh_coef,
            with_time_factor: true,
        })
    }

    /// The same density with the deterministic time factor removed. It is no
    /// longer a martingale in the BangBang and MaxDrift regimes and serves as
    /// a negative control.
    pub fn without_time_factor(mut self) -> Self {
        self.with_time_factor = false;
        self
    }

    pub fn regime(&self) -> &Regime {
        &self.regime
    }

    pub fn value(&self, s: f64, x: f64, ray: Ray, l: f64) -> f64 {
        let time = |rate: f64| {
            if self.with_time_factor {
                -0.5 * s * rate * rate
            } else {
                0.0
            }
        };
        let g = self.gamma;
        match self.regime.tag {
            RegimeTag::BangBang => (g * (l - x) + time(g)).exp(),
            RegimeTag::MaxDrift => {
                let a = self.alpha_max;
                let mut inner = (-a * x).exp();
                if self.regime.in_argmax(ray) {
                    inner += self.sinh_coef * (a * x).sinh();
                }
                (g * l + time(a)).exp() * inner
            }
            RegimeTag::NullSpider => 1.0,
            RegimeTag::FlatRays | RegimeTag::AllNegative => {
                (g * l).exp() * (1.0 + self.regime.theta[ray.0] * x)
            }
        }
    }
}

/// Limit martingale at time `s` for the state `(x, k)` with local time `l`.
pub fn eval_m(
    space: &RaySpace,
    params: &PenaltyParams,
    s: f64,
    x: f64,
    k: Ray,
    l: f64,
) -> Result<f64> {
    space.check(k)?;
    Ok(LimitDensity::new(space, params)?.value(s, x, k, l))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn density(mu: &[f64], alpha: &[f64], gamma: f64) -> (RaySpace, LimitDensity) {
        let space = RaySpace::new(mu.to_vec()).unwrap();
        let params = PenaltyParams::new(alpha.to_vec(), gamma).unwrap();
        let d = LimitDensity::new(&space, &params).unwrap();
        (space, d)
    }

    #[test]
    fn unit_at_time_zero_in_every_regime() {
        for (alpha, gamma) in [
            (vec![0.5, 0.2], 1.0),
            (vec![1.0, -1.0], 0.3),
            (vec![-1.0, 0.0], 0.0),
            (vec![0.0, -1.0], -1.0),
            (vec![-1.0, -2.0], -0.5),
        ] {
            let (_, d) = density(&[0.4, 0.6], &alpha, gamma);
            for k in 0..2 {
                assert_eq!(d.value(0.0, 0.0, Ray(k), 0.0), 1.0);
            }
        }
    }

    #[test]
    fn null_spider_is_constant() {
        let (_, d) = density(&[0.4, 0.6], &[-1.0, 0.0], 0.0);
        assert_eq!(d.value(3.0, 2.0, Ray(1), 5.0), 1.0);
    }

    #[test]
    fn worked_all_negative_example() {
        let (space, d) = density(&[0.5, 0.5], &[-1.0, -1.0], -1.0);
        let (x, l): (f64, f64) = (0.8, 0.3);
        let want = f64::exp(-l) * (1.0 + x);
        assert!((d.value(1.0, x, Ray(0), l) - want).abs() < 1e-15);
        let params = PenaltyParams::new(vec![-1.0, -1.0], -1.0).unwrap();
        assert!((eval_m(&space, &params, 1.0, x, Ray(1), l).unwrap() - want).abs() < 1e-15);
    }

    #[test]
    fn negative_control_differs() {
        let (_, d) = density(&[1.0], &[0.5], 1.0);
        let c = d.clone().without_time_factor();
        assert!(c.value(2.0, 0.1, Ray(0), 0.4) > d.value(2.0, 0.1, Ray(0), 0.4));
    }
}
