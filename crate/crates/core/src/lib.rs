//! Simulation and verification toolkit for exponentially penalized Walsh
//! Brownian spiders.
//!
//! A Walsh spider lives on finitely many half-lines glued at the origin: its
//! distance to the origin is a reflected Brownian motion and every excursion
//! away from the origin picks its ray independently with law `mu`. This crate
//! provides
//!
//! * grid-exact path simulation with local time ([`sim`]),
//! * the closed-form kernel for the penalized expectations, their majorants
//!   and asymptotic equivalents, and the limit martingale ([`formulas`]),
//! * Monte Carlo estimators for the penalized and limit measures
//!   ([`penalize`]),
//! * direct samplers for the limit processes ([`limit`]),
//! * the statistical harness ([`stats`]) and the verification suites built on
//!   it ([`suites`]).
//!
//! All randomness is derived from a single 64-bit seed through
//! [`rng::substream`], so results do not depend on the number of worker
//! threads.

pub mod bridge;
pub mod error;
pub mod formulas;
pub mod grid;
pub mod limit;
pub mod output;
pub mod penalize;
pub mod rng;
pub mod sim;
pub mod space;
pub mod stats;
pub mod suites;

pub use error::{Error, Result};
pub use formulas::{FormulaKind, FormulaValue, PenaltyParams, Regime, RegimeTag};
pub use grid::TimeGrid;
pub use sim::{SpiderPath, SpiderSimulator};
pub use space::{Ray, RaySpace, SpiderPoint};
pub use stats::TestReport;
