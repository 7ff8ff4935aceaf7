//! Adaptive double-exponential quadrature.
//!
//! The underlying tanh-sinh rule has a fixed evaluation budget per call, so
//! panels whose error estimate misses the target are bisected. Half-line
//! integrals are truncated once the integrand falls below `1e-14` times the
//! largest value seen.

use quadrature::double_exponential;

use crate::error::{Error, Result};

/// Absolute and relative error targets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            abs: 1e-10,
            rel: 1e-8,
        }
    }
}

impl Tolerance {
    /// Tighter targets used when a result is compared at `1e-8` relative.
    pub fn tight() -> Self {
        Self {
            abs: 1e-15,
            rel: 1e-12,
        }
    }
}

const MAX_DEPTH: u32 = 24;
const TRUNCATION: f64 = 1e-14;
const MAX_PANELS: usize = 4096;

fn adaptive<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, target: f64, depth: u32) -> (f64, f64) {
    let out = double_exponential::integrate(f, a, b, target);
    if out.error_estimate <= target || depth == 0 {
        return (out.integral, out.error_estimate);
    }
    let mid = 0.5 * (a + b);
    let (l, el) = adaptive(f, a, mid, 0.5 * target, depth - 1);
    let (r, er) = adaptive(f, mid, b, 0.5 * target, depth - 1);
    (l + r, el + er)
}

/// Integral of a smooth `f` over `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(
    name: &'static str,
    f: F,
    a: f64,
    b: f64,
    tol: Tolerance,
) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    // A coarse pass fixes the scale for the relative target.
    let rough = double_exponential::integrate(&f, a, b, 1e-3 * (b - a).abs()).integral;
    let target = tol.abs.max(tol.rel * rough.abs());
    let (value, err) = adaptive(&f, a, b, target, MAX_DEPTH);
    if !value.is_finite() || err > 10.0 * target.max(tol.rel * value.abs()) {
        return Err(Error::QuadratureDivergence {
            name,
            error_estimate: err,
        });
    }
    Ok(value)
}

/// Integral of a smooth, eventually decaying `f` over `[0, inf)`.
///
/// `peak` locates the bulk of the mass and `scale` its width; both only steer
/// the panel layout.
pub fn integrate_half_line<F: Fn(f64) -> f64>(
    name: &'static str,
    f: F,
    peak: f64,
    scale: f64,
    tol: Tolerance,
) -> Result<f64> {
    let peak = peak.max(0.0);
    let scale = if scale.is_finite() && scale > 0.0 {
        scale
    } else {
        1.0
    };
    // Breakpoints: [0, peak] in panels of at most a few widths, then march
    // right until the integrand is negligible.
    let mut points = vec![0.0];
    let n_left = (peak / (4.0 * scale)).ceil() as usize;
    for i in 1..=n_left {
        points.push(peak * i as f64 / n_left as f64);
    }
    let mut fmax = points.iter().map(|&z| f(z).abs()).fold(0.0, f64::max);
    let mut right = peak;
    loop {
        right += scale;
        points.push(right);
        let v = f(right).abs();
        fmax = fmax.max(v);
        if v <= TRUNCATION * fmax && right > peak + 3.0 * scale {
            break;
        }
        if points.len() > MAX_PANELS {
            return Err(Error::QuadratureDivergence {
                name,
                error_estimate: f64::INFINITY,
            });
        }
    }
    let panels: Vec<(f64, f64)> = points.windows(2).map(|w| (w[0], w[1])).collect();
    let rough: f64 = panels
        .iter()
        .map(|&(a, b)| double_exponential::integrate(&f, a, b, 1e-3 * fmax * (b - a)).integral)
        .sum();
    let target = tol.abs.max(tol.rel * rough.abs());
    let per_panel = target / panels.len() as f64;
    let mut total = 0.0;
    let mut err = 0.0;
    for &(a, b) in &panels {
        let (v, e) = adaptive(&f, a, b, per_panel, MAX_DEPTH);
        total += v;
        err += e;
    }
    if !total.is_finite() || err > 10.0 * target.max(tol.rel * total.abs()) {
        return Err(Error::QuadratureDivergence {
            name,
            error_estimate: err,
        });
    }
    Ok(total)
}
