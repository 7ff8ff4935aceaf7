//! Closed-form kernel: killed expectations, local-time laws, majorants and
//! asymptotic equivalents of the penalized normalisers, the regime
//! classification and the limit martingale.
//!
//! Everything here is a pure function of its arguments.

mod asymptotic;
mod gauss;
mod kernels;
mod martingale;
mod params;
pub mod quad;
mod regime;

use std::fmt;

pub use asymptotic::{eval_q, eval_q_asymptotic, eval_r, eval_return_prob, QRow};
pub use gauss::{erf, erfc, erfcx, norm_cdf, norm_sf};
pub use kernels::{
    density_l_plus_x, eval_i_quadrature, eval_j, eval_j_quadrature, eval_k, eval_l_majorant,
    i_integrand, joint_density_xl, k_row, KRow,
};
pub use martingale::{eval_m, LimitDensity};
pub use params::PenaltyParams;
pub use regime::{classify_regime, Regime, RegimeTag};

/// How a formula value relates to the quantity it describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FormulaKind {
    Exact,
    Majorant,
    AsymptoticEquivalent,
    Quadrature,
}

impl FormulaKind {
    pub fn as_str(self) -> &'static str {
        match self {
            FormulaKind::Exact => "exact",
            FormulaKind::Majorant => "majorant",
            FormulaKind::AsymptoticEquivalent => "asymptotic_equivalent",
            FormulaKind::Quadrature => "quadrature",
        }
    }
}

impl fmt::Display for FormulaKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A finite formula value tagged with its kind.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FormulaValue {
    pub value: f64,
    pub kind: FormulaKind,
}

impl FormulaValue {
    /// Fails with [`Error::Overflow`](crate::Error::Overflow) unless `value`
    /// is finite.
    pub(crate) fn new(name: &'static str, value: f64, kind: FormulaKind) -> crate::Result<Self> {
        if value.is_finite() {
            Ok(Self { value, kind })
        } else {
            Err(crate::Error::Overflow(name))
        }
    }
}
