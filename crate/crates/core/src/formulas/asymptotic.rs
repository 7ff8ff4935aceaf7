use std::f64::consts::PI;

use super::kernels::{eval_i_quadrature, eval_j, eval_k, eval_l_majorant};
use super::params::PenaltyParams;
use super::{FormulaKind, FormulaValue};
use crate::error::{ensure_nonnegative, ensure_positive, Result};
use crate::space::{Ray, RaySpace};

/// Majorant of the normaliser `E_(x,k)[exp(alpha_{N_t} X_t + gamma L_t)]`.
pub fn eval_q(
    space: &RaySpace,
    params: &PenaltyParams,
    x: f64,
    k: Ray,
    t: f64,
) -> Result<FormulaValue> {
    params.check(space)?;
    space.check(k)?;
    let g = params.gamma();
    let mut total = eval_l_majorant(params.alpha_of(k), x, t)?.value;
    for (w, &a) in space.weights().iter().zip(params.alpha()) {
        total += w * eval_k(a, g, x, t)?.value;
    }
    FormulaValue::new("Q", total, FormulaKind::Majorant)
}

/// The normaliser itself, `E_(x,k)[exp(alpha_{N_t} X_t + gamma L_t)]`:
/// before the first visit to zero the ray stays `k`, afterwards the ray is
/// independent of `(X_t, L_t)` with law `mu`, so
/// `R = J(alpha_k, x, t) + sum_m mu_m I(alpha_m, gamma, x, t)`.
pub fn eval_r(
    space: &RaySpace,
    params: &PenaltyParams,
    x: f64,
    k: Ray,
    t: f64,
) -> Result<FormulaValue> {
    params.check(space)?;
    space.check(k)?;
    let g = params.gamma();
    let mut total = eval_j(params.alpha_of(k), x, t)?.value;
    for (w, &a) in space.weights().iter().zip(params.alpha()) {
        total += w * eval_i_quadrature(a, g, x, t)?.value;
    }
    FormulaValue::new("R", total, FormulaKind::Quadrature)
}

/// Row of the table of large-time equivalents of the normaliser.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum QRow {
    /// `gamma > 0`, `gamma >= alpha`, with equality on a nonempty set.
    GammaTied,
    /// `gamma > 0` and `gamma > alpha_m` for all rays.
    GammaStrict,
    MaxDrift,
    /// `gamma = 0`, `max(alpha) = 0`.
    NullFlat,
    /// `gamma = 0`, every `alpha_m < 0`.
    NullNegative,
    /// `gamma < 0`, `max(alpha) = 0`.
    NegativeFlat,
    /// `gamma < 0`, every `alpha_m < 0`.
    NegativeAll,
}

impl QRow {
    pub fn of(params: &PenaltyParams) -> Self {
        let g = params.gamma();
        let top = params.alpha_max();
        if g > 0.0 && g >= top {
            if top == g {
                QRow::GammaTied
            } else {
                QRow::GammaStrict
            }
        } else if top > 0.0 && top > g {
            QRow::MaxDrift
        } else if g == 0.0 {
            if top == 0.0 {
                QRow::NullFlat
            } else {
                QRow::NullNegative
            }
        } else if top == 0.0 {
            QRow::NegativeFlat
        } else {
            QRow::NegativeAll
        }
    }
}

/// Simplest equivalent of the normaliser majorant as the horizon `u -> inf`.
pub fn eval_q_asymptotic(
    space: &RaySpace,
    params: &PenaltyParams,
    x: f64,
    k: Ray,
    u: f64,
) -> Result<FormulaValue> {
    params.check(space)?;
    space.check(k)?;
    ensure_nonnegative("x", x)?;
    ensure_positive("u", u)?;
    let g = params.gamma();
    let top = params.alpha_max();
    let mu = space.weights();
    let alpha = params.alpha();
    let mass_where = |pred: &dyn Fn(f64) -> bool| -> f64 {
        mu.iter()
            .zip(alpha)
            .filter(|(_, &a)| pred(a))
            .map(|(w, _)| w)
            .sum()
    };
    let value = match QRow::of(params) {
        QRow::GammaTied => {
            let mass = mass_where(&|a| a == g);
            2.0 * mass * u * g * g * (-g * x + 0.5 * u * g * g).exp()
        }
        QRow::GammaStrict => {
            let c: f64 = mu
                .iter()
                .zip(alpha)
                .map(|(w, a)| 2.0 * g * w / (g - a))
                .sum();
            c * (-g * x + 0.5 * u * g * g).exp()
        }
        QRow::MaxDrift => {
            let mass = mass_where(&|a| a == top);
            let mut inner = 2.0 * top / (top - g) * mass * (-top * x).exp();
            if params.alpha_of(k) == top {
                inner += 2.0 * (top * x).sinh();
            }
            (0.5 * u * top * top).exp() * inner
        }
        QRow::NullFlat => mass_where(&|a| a == 0.0),
        QRow::NullNegative => {
            let s: f64 = mu.iter().zip(alpha).map(|(w, a)| w / a.abs()).sum();
            (2.0 / (PI * u)).sqrt() * s
        }
        QRow::NegativeFlat => {
            let mass = mass_where(&|a| a == 0.0);
            let on_flat = if params.alpha_of(k) == 0.0 { x } else { 0.0 };
            (2.0 / (PI * u)).sqrt() * (mass / g.abs() + on_flat)
        }
        QRow::NegativeAll => {
            let ak = params.alpha_of(k);
            let base: f64 = mu
                .iter()
                .zip(alpha)
                .map(|(w, a)| w * (a.abs() + g.abs()) / (a * a * g * g))
                .sum();
            let cross: f64 = mu.iter().zip(alpha).map(|(w, a)| w / (a * g)).sum();
            (2.0 / (PI * u.powi(3))).sqrt() * (base + x * (1.0 / (ak * ak) + cross))
        }
    };
    FormulaValue::new("Q_asymptotic", value, FormulaKind::AsymptoticEquivalent)
}

/// Probability that `|B|`, with `B` a Brownian motion of drift `abar > 0`
/// currently at distance `y` from the origin, ever returns to zero.
pub fn eval_return_prob(abar: f64, y: f64) -> Result<f64> {
    ensure_positive("abar", abar)?;
    ensure_nonnegative("y", y)?;
    // exp(-a y) / cosh(a y) = 2 / (1 + exp(2 a y))
    Ok(2.0 / (1.0 + (2.0 * abar * y).exp()))
}
