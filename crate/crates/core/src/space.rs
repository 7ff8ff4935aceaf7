//! The ray space `(E, mu)` and points of the spider state space.

use std::fmt;

use rand::Rng;

use crate::error::{Error, Result};

/// Tolerance on `sum(mu) == 1`.
pub const MASS_TOLERANCE: f64 = 1e-12;

/// Index of a ray in a [`RaySpace`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Ray(pub usize);

impl fmt::Display for Ray {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Finite set of rays with strictly positive selection weights summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct RaySpace {
    names: Vec<String>,
    weights: Vec<f64>,
    cumulative: Vec<f64>,
}

impl RaySpace {
    /// Rays named `0, 1, ...`.
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        let names = (0..weights.len()).map(|i| i.to_string()).collect();
        Self::with_names(names, weights)
    }

    pub fn with_names(names: Vec<String>, weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::invalid("mu", "at least one ray is required"));
        }
        if names.len() != weights.len() {
            return Err(Error::invalid(
                "mu",
                format!("{} weights for {} rays", weights.len(), names.len()),
            ));
        }
        for &w in &weights {
            if !w.is_finite() || w <= 0.0 {
                return Err(Error::invalid(
                    "mu",
                    format!("every weight must be > 0, got {w}"),
                ));
            }
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::invalid(
                "mu",
                format!("weights sum to {total}, expected 1"),
            ));
        }
        let mut acc = 0.0;
        let cumulative = weights
            .iter()
            .map(|w| {
                acc += w;
                acc
            })
            .collect();
        Ok(Self {
            names,
            weights,
            cumulative,
        })
    }

    /// Uniform weights over `m` rays.
    pub fn uniform(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::invalid("mu", "at least one ray is required"));
        }
        let mut weights = vec![1.0 / m as f64; m];
        // Push rounding into the last weight so the sum is exact enough.
        let head: f64 = weights[..m - 1].iter().sum();
        weights[m - 1] = 1.0 - head;
        Self::new(weights)
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, ray: Ray) -> f64 {
        self.weights[ray.0]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn rays(&self) -> impl Iterator<Item = Ray> + '_ {
        (0..self.len()).map(Ray)
    }

    pub fn check(&self, ray: Ray) -> Result<Ray> {
        if ray.0 < self.len() {
            Ok(ray)
        } else {
            Err(Error::UnknownRay(ray.0))
        }
    }

    /// Draws a ray with law `mu`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Ray {
        sample_index(&self.cumulative, rng.gen::<f64>())
    }
}

/// Inverse-CDF lookup on a cumulative table whose last entry is ~1.
pub(crate) fn sample_index(cumulative: &[f64], u: f64) -> Ray {
    let total = *cumulative.last().expect("nonempty table");
    let target = u * total;
    let idx = cumulative.partition_point(|&c| c <= target);
    Ray(idx.min(cumulative.len() - 1))
}

/// A point `(x, k)` of the spider state space. At radius zero the ray is
/// irrelevant: all rays meet at the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpiderPoint {
    pub radius: f64,
    pub ray: Ray,
}

impl SpiderPoint {
    pub fn new(radius: f64, ray: Ray) -> Result<Self> {
        if !radius.is_finite() || radius < 0.0 {
            return Err(Error::invalid(
                "radius",
                format!("must be finite and >= 0, got {radius}"),
            ));
        }
        Ok(Self { radius, ray })
    }

    pub fn origin() -> Self {
        Self {
            radius: 0.0,
            ray: Ray(0),
        }
    }

    pub fn is_origin(&self) -> bool {
        self.radius == 0.0
    }
}

/// Tree metric on the spider: along a ray the distance is `|x - y|`, across
/// rays the path goes through the origin. Both branches agree when either
/// point is the origin.
pub fn spider_distance(a: SpiderPoint, b: SpiderPoint) -> f64 {
    if a.ray == b.ray {
        (a.radius - b.radius).abs()
    } else {
        a.radius + b.radius
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;

    fn pt(x: f64, k: usize) -> SpiderPoint {
        SpiderPoint::new(x, Ray(k)).unwrap()
    }

    #[test]
    fn distance_examples() {
        assert_eq!(spider_distance(pt(2.0, 0), pt(5.0, 0)), 3.0);
        assert_eq!(spider_distance(pt(2.0, 0), pt(2.0, 0)), 0.0);
        assert_eq!(spider_distance(pt(2.0, 0), pt(3.0, 1)), 5.0);
    }

    #[test]
    fn origin_is_identified_across_rays() {
        assert_eq!(spider_distance(pt(0.0, 0), pt(0.0, 3)), 0.0);
        assert_eq!(spider_distance(pt(0.0, 2), pt(1.5, 0)), 1.5);
    }

    #[test]
    fn rejects_bad_weights() {
        assert!(RaySpace::new(vec![]).is_err());
        assert!(RaySpace::new(vec![0.5, 0.4]).is_err());
        assert!(RaySpace::new(vec![1.0, 0.0]).is_err());
        assert!(RaySpace::new(vec![1.2, -0.2]).is_err());
        assert!(RaySpace::new(vec![0.3, 0.7]).is_ok());
        let err = RaySpace::new(vec![0.5, 0.6]).unwrap_err();
        assert!(err.to_string().contains("mu"));
    }

    #[test]
    fn sampling_frequencies_follow_weights() {
        let space = RaySpace::new(vec![0.2, 0.5, 0.3]).unwrap();
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(1);
        let n = 100_000;
        let mut counts = [0usize; 3];
        for _ in 0..n {
            counts[space.sample(&mut rng).0] += 1;
        }
        for (c, w) in counts.iter().zip(space.weights()) {
            let p = *c as f64 / n as f64;
            let se = (w * (1.0 - w) / n as f64).sqrt();
            assert!((p - w).abs() < 4.0 * se, "{p} vs {w}");
        }
    }

    proptest! {
        #[test]
        fn metric_axioms(x in 0.0..10.0f64, y in 0.0..10.0f64, z in 0.0..10.0f64,
                         k in 0usize..3, l in 0usize..3, m in 0usize..3) {
            let (a, b, c) = (pt(x, k), pt(y, l), pt(z, m));
            let ab = spider_distance(a, b);
            prop_assert!(ab >= 0.0);
            prop_assert_eq!(ab, spider_distance(b, a));
            prop_assert!(ab <= spider_distance(a, c) + spider_distance(c, b) + 1e-12);
            if ab == 0.0 {
                prop_assert!(x == y && (k == l || x == 0.0));
            }
        }
    }
}
