//! Numerical kernel: exponential-integral family, Gauss hypergeometric
//! function for integer parameters, adaptive Gauss-Kronrod quadrature and a
//! bracketing root finder for monotone functions.
//!
//! Every Meijer-G term that shows up in the water-level and distribution
//! formulas reduces to `e^x E1(x)` and elementary functions, so no general
//! Meijer-G evaluator lives here.

use std::fmt;

mod expint;
mod hypergeometric;
mod quadrature;
mod roots;

pub use expint::{exp_e1, integrated_psi_moment, tricomi_psi11, tricomi_psi11_remainder, tricomi_psi21, EULER_GAMMA};
pub use hypergeometric::{gauss_2f1, gauss_2f1_complement};
pub use quadrature::{integrate, Quadrature};
pub use roots::{solve_root_monotone, try_solve_root_monotone, Root, RootSearch};

/// Relative/absolute stopping tolerance plus an iteration budget.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NumericTolerance {
    rel_tol: f64,
    abs_tol: f64,
    max_iter: usize,
}

impl NumericTolerance {
    /// Default for special-function level accuracy.
    pub const SPECIAL: Self = Self { rel_tol: 1e-10, abs_tol: 0.0, max_iter: 1000 };
    /// Default for adaptive quadrature (`max_iter` counts subintervals).
    pub const QUADRATURE: Self = Self { rel_tol: 1e-8, abs_tol: 0.0, max_iter: 2000 };
    /// Default for root finding (`max_iter` counts bisection steps).
    pub const ROOT: Self = Self { rel_tol: 1e-10, abs_tol: 0.0, max_iter: 400 };

    pub fn new(rel_tol: f64, abs_tol: f64, max_iter: usize) -> Result<Self, MathError> {
        if !(rel_tol > 0.0) || !(abs_tol >= 0.0) || max_iter == 0 {
            return Err(MathError::InvalidTolerance { rel_tol, abs_tol, max_iter });
        }
        Ok(Self { rel_tol, abs_tol, max_iter })
    }

    pub fn rel_tol(&self) -> f64 {
        self.rel_tol
    }

    pub fn abs_tol(&self) -> f64 {
        self.abs_tol
    }

    pub fn max_iter(&self) -> usize {
        self.max_iter
    }

    /// Same budget with a different relative tolerance.
    pub fn with_rel_tol(self, rel_tol: f64) -> Result<Self, MathError> {
        Self::new(rel_tol, self.abs_tol, self.max_iter)
    }

    pub fn with_max_iter(self, max_iter: usize) -> Result<Self, MathError> {
        Self::new(self.rel_tol, self.abs_tol, max_iter)
    }

    /// Acceptable error for a quantity of magnitude `scale`.
    pub(crate) fn threshold(&self, scale: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * scale.abs())
    }
}

/// Failures reported by the numerical kernel.
#[derive(Debug, Clone, PartialEq)]
pub enum MathError {
    /// Argument outside the domain of `function`.
    Domain { function: &'static str, arg: f64 },
    /// Tolerance with non-positive relative part, negative absolute part or zero budget.
    InvalidTolerance { rel_tol: f64, abs_tol: f64, max_iter: usize },
    /// Quadrature did not reach the tolerance within the subinterval budget.
    IntegrationFailed { estimate: f64, error_estimate: f64, intervals: usize },
    /// The integrand produced a non-finite value.
    NonFiniteIntegrand { at: f64 },
    /// `g(0)` already exceeds the target, so no nonnegative root exists.
    TargetBelowFloor { target: f64, value_at_zero: f64 },
    /// Geometric doubling reached the ceiling without crossing the target.
    NoBracket { target: f64, ceiling: f64, value_at_ceiling: f64 },
    /// Bisection exhausted its budget or the bracket collapsed.
    RootNotConverged { best: f64, residual: f64, iterations: usize },
}

impl fmt::Display for MathError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Domain { function, arg } => write!(f, "{function}: argument {arg} outside domain"),
            Self::InvalidTolerance { rel_tol, abs_tol, max_iter } => {
                write!(f, "invalid tolerance (rel_tol={rel_tol}, abs_tol={abs_tol}, max_iter={max_iter})")
            }
            Self::IntegrationFailed { estimate, error_estimate, intervals } => write!(
                f,
                "quadrature did not converge after {intervals} subintervals \
                 (estimate {estimate}, error estimate {error_estimate})"
            ),
            Self::NonFiniteIntegrand { at } => write!(f, "integrand is not finite at x = {at}"),
            Self::TargetBelowFloor { target, value_at_zero } => {
                write!(f, "target {target} is below g(0) = {value_at_zero}")
            }
            Self::NoBracket { target, ceiling, value_at_ceiling } => {
                write!(f, "no bracket for target {target} below ceiling {ceiling} (g(ceiling) = {value_at_ceiling})")
            }
            Self::RootNotConverged { best, residual, iterations } => {
                write!(f, "root search stopped after {iterations} iterations at x = {best} (residual {residual})")
            }
        }
    }
}

impl std::error::Error for MathError {}
