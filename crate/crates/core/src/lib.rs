//! Optimization of STIRAP-type population transfer in multilevel chain
//! systems, using Pontryagin-principle adjoint gradients over a Gaussian
//! pulse family and a trust-region dogleg BFGS optimizer.
//!
//! The crate models an N-level nearest-neighbor chain (including a five-level
//! transmon reduction), propagates the effective non-Hermitian Schrödinger
//! equation, evaluates a leakage-penalized Bolza objective, and differentiates
//! it with respect to the six Gaussian pulse parameters via a backward
//! costate pass. Robustness scans compare an initial and an optimized
//! protocol under amplitude, timing, and frequency perturbations.
//!
//! All numerics are generic over the scalar type through [`scalar::Real`]
//! (`f32` or `f64`); concrete `f64` aliases are exported below.

// `!(x > 0)` keeps NaN out of the accepted branch; indexed loops mirror the
// matrix formulas they implement.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop)]
#![allow(clippy::manual_is_multiple_of)]

pub mod chain;
pub mod dynamics;
pub mod error;
pub mod grid;
pub mod linalg;
pub mod optimizer;
pub mod pmp;
pub mod pulses;
pub mod robustness;
pub mod scalar;
pub mod transmon;

pub use error::{Error, Result};

/// Concrete `f64` aliases for the main model types.
pub mod f64_types {
    pub type ChainSystem = crate::chain::ChainSystem<f64>;
    pub type Link = crate::chain::Link<f64>;
    pub type Decay = crate::chain::Decay<f64>;
    pub type ChannelValues = crate::chain::ChannelValues<f64>;
    pub type DarkState = crate::chain::DarkState<f64>;
    pub type GaussianParams = crate::pulses::GaussianParams<f64>;
    pub type GaussianPulse = crate::pulses::GaussianPulse<f64>;
    pub type TimeGrid = crate::grid::TimeGrid<f64>;
    pub type Trajectory = crate::dynamics::Trajectory<f64>;
    pub type TransmonSpec = crate::transmon::TransmonSpec<f64>;
    pub type LevelSpectrum = crate::transmon::LevelSpectrum<f64>;
    pub type FrameSpec = crate::transmon::FrameSpec<f64>;
    pub type CostWeights = crate::pmp::CostWeights<f64>;
    pub type ObjectiveReport = crate::pmp::ObjectiveReport<f64>;
    pub type GradientReport = crate::pmp::GradientReport<f64>;
    pub type CostateTrajectory = crate::pmp::CostateTrajectory<f64>;
    pub type DescentConfig = crate::pmp::DescentConfig<f64>;
    pub type TrustRegionConfig = crate::optimizer::TrustRegionConfig<f64>;
    pub type TrustRegionState = crate::optimizer::TrustRegionState<f64>;
    pub type Scenario = crate::robustness::Scenario<f64>;
    pub type ScanResult = crate::robustness::ScanResult<f64>;
    pub type Perturbation = crate::robustness::Perturbation<f64>;
}
