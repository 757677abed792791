//! Long-short trading controllers as discrete-time stochastic systems.
//!
//! The crate models a pair of stocks traded by coupled long-short feedback
//! controllers: the gain-loss state evolves linearly in the stage returns,
//! which makes exact expected-gain and variance analytics possible alongside
//! seeded Monte-Carlo simulation with leverage accounting, plus a
//! random-search risk-return frontier over the design parameters.

pub mod analytics;
pub mod controller;
pub mod error;
pub mod market;
pub mod mat4;
pub mod montecarlo;
pub mod optimizer;
pub mod rng;

pub use analytics::{GainMoments, MomentSpec, QuadrantReport, SpectralParams};
pub use controller::{
    AccountSnapshot, ControllerParams, InvestmentQuad, SlsState, TrendState, TrendWeighting,
};
pub use error::{Result, SlsError};
pub use market::{DiscreteJointModel, GbmModel, ReturnModel, TruncatedNormalModel};
pub use montecarlo::{McReport, PathOutcome, SimConfig};
pub use optimizer::{Family, RiskReturnPoint, SearchRanges};
pub use rng::substream;
