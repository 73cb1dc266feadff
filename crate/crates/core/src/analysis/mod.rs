//! Outage probability (simulated and analytic), the closed-form law of the
//! SU1 SIR bound, and achievable-rate curves.

use std::fmt;

use crate::mathkernel::MathError;

pub mod montecarlo;
mod outage;
mod rate;
mod su_bound;

pub use outage::{outage_bs_bounds, outage_mc, OutageBounds, OutageEstimate, Side, DEFAULT_GAMMA_TH};
pub use rate::{rate_curve, Policy, RateEstimate};
pub use su_bound::{dist_su_upper, su_tail_integral_quadrature, SuBoundLaw};

pub const MIN_OUTAGE_TRIALS: u64 = 10_000;
pub const MIN_RATE_TRIALS: u64 = 100_000;

#[derive(Debug, Clone, PartialEq)]
pub enum AnalysisError {
    TooFewTrials {
        requested: u64,
        minimum: u64,
    },
    InvalidThreshold(f64),
    /// Water level is zero, so SU1 never transmits.
    NoTransmission,
    Math(MathError),
}

impl fmt::Display for AnalysisError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::TooFewTrials { requested, minimum } => {
                write!(f, "{requested} trials requested, at least {minimum} needed")
            }
            Self::InvalidThreshold(t) => write!(f, "outage threshold {t} must be nonnegative"),
            Self::NoTransmission => write!(f, "secondary user never transmits (zero water level)"),
            Self::Math(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for AnalysisError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Self::Math(e) => Some(e),
            _ => None,
        }
    }
}

impl From<MathError> for AnalysisError {
    fn from(e: MathError) -> Self {
        Self::Math(e)
    }
}
