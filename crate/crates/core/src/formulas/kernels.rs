//! Killed and local-time-weighted expectations of reflected Brownian motion.
//!
//! For a Brownian motion `Y` started at `x >= 0`, killed at its first zero
//! `T`, and for the reflected motion with local time `L`:
//!
//! * `J(beta, x, t) = E_x[exp(beta Y_t) ; T > t]`, with majorant `L(beta,x,t)`;
//! * `I(beta, gamma, x, t) = E_x[exp(beta |Y_t| + gamma L_t) ; T <= t]`, with
//!   majorant `K(beta, gamma, x, t)`.
//!
//! Each majorant is also an equivalent as `t -> inf`.

use std::f64::consts::PI;

use super::gauss::{erf, erfcx, norm_cdf};
use super::quad::{integrate_half_line, Tolerance};
use super::{FormulaKind, FormulaValue};
use crate::error::{ensure_finite, ensure_nonnegative, ensure_positive, Result};

fn check_args(beta: f64, x: f64, t: f64) -> Result<()> {
    ensure_finite("beta", beta)?;
    ensure_nonnegative("x", x)?;
    ensure_positive("t", t)
}

/// `2 sinh(beta x) exp(t beta^2 / 2)`, the gap between `J(beta)` and `J(-beta)`.
fn reflection_gap(beta: f64, x: f64, t: f64) -> f64 {
    2.0 * (beta * x).sinh() * (0.5 * t * beta * beta).exp()
}

/// `J(-b, x, t)` for `b > 0`, written with scaled complementary error
/// functions so that neither term underflows for large `t`.
fn j_negative(b: f64, x: f64, t: f64) -> f64 {
    let r = (2.0 * t).sqrt();
    let a_minus = (b * t - x) / r;
    let a_plus = (b * t + x) / r;
    let damp = (-x * x / (2.0 * t)).exp();
    let far = 0.5 * damp * erfcx(a_plus);
    let near = if a_minus >= 0.0 {
        0.5 * damp * erfcx(a_minus)
    } else {
        (0.5 * b * b * t - b * x).exp() * norm_cdf((x - b * t) / t.sqrt())
    };
    (near - far).max(0.0)
}

/// Closed form of `J(beta, x, t)`.
pub fn eval_j(beta: f64, x: f64, t: f64) -> Result<FormulaValue> {
    check_args(beta, x, t)?;
    let value = if x == 0.0 {
        0.0
    } else if beta == 0.0 {
        erf(x / (2.0 * t).sqrt())
    } else if beta < 0.0 {
        j_negative(-beta, x, t)
    } else {
        j_negative(beta, x, t) + reflection_gap(beta, x, t)
    };
    FormulaValue::new("J", value, FormulaKind::Exact)
}

/// `J(beta, x, t)` by quadrature of the killed transition density.
pub fn eval_j_quadrature(beta: f64, x: f64, t: f64) -> Result<FormulaValue> {
    check_args(beta, x, t)?;
    if x == 0.0 {
        return FormulaValue::new("J", 0.0, FormulaKind::Quadrature);
    }
    if 0.5 * beta * beta * t + beta * x > f64::MAX.ln() {
        return Err(crate::Error::Overflow("J"));
    }
    let norm = 1.0 / (2.0 * PI * t).sqrt();
    let f = |y: f64| {
        let d = x - y;
        (-d * d / (2.0 * t) + beta * y).exp() * -(-2.0 * x * y / t).exp_m1() * norm
    };
    let peak = x + beta * t;
    let value = integrate_half_line("J", f, peak, t.sqrt(), Tolerance::tight())?;
    FormulaValue::new("J", value, FormulaKind::Quadrature)
}

/// Majorant and large-time equivalent of `J`.
pub fn eval_l_majorant(beta: f64, x: f64, t: f64) -> Result<FormulaValue> {
    check_args(beta, x, t)?;
    let mut value = if beta == 0.0 {
        (2.0 / (PI * t)).sqrt() * x
    } else {
        (2.0 / (PI * t.powi(3))).sqrt() * x / (beta * beta)
    };
    if beta > 0.0 {
        value += reflection_gap(beta, x, t);
    }
    FormulaValue::new("L", value, FormulaKind::Majorant)
}

/// Density of `L_t + |Y_t|` on `{L_t > 0}` for the reflected motion from `x`.
pub fn density_l_plus_x(z: f64, x: f64, t: f64) -> f64 {
    let w = x + z;
    (2.0 / (PI * t.powi(3))).sqrt() * z * w * (-w * w / (2.0 * t)).exp()
}

/// Joint density of `(|Y_t|, L_t)` at `(y, l)` with `l > 0`, started from `x`.
pub fn joint_density_xl(y: f64, l: f64, x: f64, t: f64) -> f64 {
    let w = l + x + y;
    (2.0 / (PI * t.powi(3))).sqrt() * w * (-w * w / (2.0 * t)).exp()
}

/// Integrand of `I` in the variable `z = L_t + |Y_t|`: the density above
/// times the average of `exp(c z)` over `c` uniform between `beta` and
/// `gamma`.
pub fn i_integrand(beta: f64, gamma: f64, x: f64, t: f64, z: f64) -> f64 {
    let d = (beta - gamma).abs();
    let top = beta.max(gamma);
    let w = x + z;
    let mut log = (2.0 / (PI * t.powi(3))).sqrt().ln() - w * w / (2.0 * t) + top * z;
    if z > 0.0 {
        log += (z * w).ln();
    } else {
        return 0.0;
    }
    let avg = if d <= 1e-9 {
        1.0
    } else {
        let dz = d * z;
        -(-dz).exp_m1() / dz
    };
    log.exp() * avg
}

/// `I(beta, gamma, x, t)` by quadrature over `z`.
pub fn eval_i_quadrature(beta: f64, gamma: f64, x: f64, t: f64) -> Result<FormulaValue> {
    check_args(beta, x, t)?;
    ensure_finite("gamma", gamma)?;
    let top = beta.max(gamma);
    // Logarithm of the integrand near its peak.
    if top > 0.0 && 0.5 * top * top * t - top * x > f64::MAX.ln() {
        return Err(crate::Error::Overflow("I"));
    }
    let peak = top * t - x;
    let scale = if top < 0.0 {
        t.sqrt().min(1.0 / -top)
    } else {
        t.sqrt()
    };
    let value = integrate_half_line(
        "I",
        |z| i_integrand(beta, gamma, x, t, z),
        peak,
        scale,
        Tolerance::tight(),
    )?;
    FormulaValue::new("I", value, FormulaKind::Quadrature)
}

/// Row of the majorant table for `K` selected by the signs of `beta`, `gamma`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KRow {
    BothNegative,
    BetaZeroGammaNegative,
    GammaZeroBetaNegative,
    BothZero,
    BetaDominant,
    GammaDominant,
    EqualPositive,
}

impl KRow {
    pub const ALL: [KRow; 7] = [
        KRow::BothNegative,
        KRow::BetaZeroGammaNegative,
        KRow::GammaZeroBetaNegative,
        KRow::BothZero,
        KRow::BetaDominant,
        KRow::GammaDominant,
        KRow::EqualPositive,
    ];
}

pub fn k_row(beta: f64, gamma: f64) -> KRow {
    let top = beta.max(gamma);
    if top > 0.0 {
        if beta == gamma {
            KRow::EqualPositive
        } else if beta > gamma {
            KRow::BetaDominant
        } else {
            KRow::GammaDominant
        }
    } else if top < 0.0 {
        KRow::BothNegative
    } else if beta == 0.0 && gamma == 0.0 {
        KRow::BothZero
    } else if beta == 0.0 {
        KRow::BetaZeroGammaNegative
    } else {
        KRow::GammaZeroBetaNegative
    }
}

/// Majorant and large-time equivalent of `I`.
pub fn eval_k(beta: f64, gamma: f64, x: f64, t: f64) -> Result<FormulaValue> {
    check_args(beta, x, t)?;
    ensure_finite("gamma", gamma)?;
    let c1 = (2.0 / (PI * t)).sqrt();
    let value = match k_row(beta, gamma) {
        KRow::BothNegative => {
            let bg = beta * gamma;
            (2.0 / (PI * t.powi(3))).sqrt() * (x / bg + (beta.abs() + gamma.abs()) / (bg * bg))
        }
        KRow::BetaZeroGammaNegative => c1 / gamma.abs(),
        KRow::GammaZeroBetaNegative => c1 / beta.abs(),
        KRow::BothZero => 1.0,
        KRow::BetaDominant => {
            let d = beta - gamma;
            c1 / d + 2.0 * beta / d * (-beta * x + 0.5 * t * beta * beta).exp()
        }
        KRow::GammaDominant => {
            let d = gamma - beta;
            c1 / d + 2.0 * gamma / d * (-gamma * x + 0.5 * t * gamma * gamma).exp()
        }
        KRow::EqualPositive => {
            let g2t = t * gamma * gamma;
            gamma * (2.0 * t / PI).sqrt() + 2.0 * (g2t + 1.0) * (-gamma * x + 0.5 * g2t).exp()
        }
    };
    FormulaValue::new("K", value, FormulaKind::Majorant)
}
