use crate::error::{Error, Result};
use crate::space::{Ray, RaySpace};

/// Per-ray coefficients `alpha` on the radial position and the global
/// coefficient `gamma` on local time.
#[derive(Debug, Clone, PartialEq)]
pub struct PenaltyParams {
    alpha: Vec<f64>,
    gamma: f64,
}

impl PenaltyParams {
    pub fn new(alpha: Vec<f64>, gamma: f64) -> Result<Self> {
        if alpha.is_empty() {
            return Err(Error::invalid(
                "alpha",
                "one coefficient per ray is required",
            ));
        }
        if let Some(a) = alpha.iter().find(|a| !a.is_finite()) {
            return Err(Error::invalid("alpha", format!("must be finite, got {a}")));
        }
        if !gamma.is_finite() {
            return Err(Error::invalid(
                "gamma",
                format!("must be finite, got {gamma}"),
            ));
        }
        Ok(Self { alpha, gamma })
    }

    /// Checks that there is exactly one coefficient per ray of `space`.
    pub fn check(&self, space: &RaySpace) -> Result<()> {
        if self.alpha.len() != space.len() {
            return Err(Error::invalid(
                "alpha",
                format!("{} coefficients for {} rays", self.alpha.len(), space.len()),
            ));
        }
        Ok(())
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn alpha_of(&self, ray: Ray) -> f64 {
        self.alpha[ray.0]
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Largest ray coefficient.
    pub fn alpha_max(&self) -> f64 {
        self.alpha.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Rays whose coefficient equals the maximum.
    pub fn argmax(&self) -> Vec<Ray> {
        let top = self.alpha_max();
        self.rays_where(|a| a == top)
    }

    pub(crate) fn rays_where(&self, pred: impl Fn(f64) -> bool) -> Vec<Ray> {
        (0..self.alpha.len())
            .filter(|&i| pred(self.alpha[i]))
            .map(Ray)
            .collect()
    }

    /// `exp(alpha_k x + gamma l)`, the penalisation weight at `(x, k, l)`.
    pub fn log_weight(&self, x: f64, ray: Ray, l: f64) -> f64 {
        self.alpha[ray.0] * x + self.gamma * l
    }
}
