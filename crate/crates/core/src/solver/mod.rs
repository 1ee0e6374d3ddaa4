//! Optimal allocation solvers.
//!
//! * [`solve_separable`]: water-filling for a static budget, bisection on the
//!   common marginal gain.
//! * [`closed_form_two_segment`] and [`closed_form_powerlaw`]: the analytic
//!   allocation relations, reduced to a scalar bisection on one area.
//! * [`solve_coupled`]: power budgets (instantaneous, energy, average power)
//!   and pooled execution, where the stationarity conditions no longer
//!   decouple per segment.
//! * [`solve_area_voltage`]: joint area and supply-voltage assignment under
//!   an area and an energy budget.
//!
//! [`solve`] dispatches on the scenario's resource model.

mod area_voltage;
mod closed_form;
mod coupled;
mod kkt;
mod separable;

use thiserror::Error;

use crate::model::{Allocation, ModelError, ResourceModel, Scenario};

pub use area_voltage::solve_area_voltage;
pub use closed_form::{closed_form_powerlaw, closed_form_two_segment};
pub use coupled::solve_coupled;
pub use kkt::{kkt_residual, objective_gradient};
pub use separable::solve_separable;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// Relative width at which a multiplier bracket counts as collapsed.
    pub multiplier_tol: f64,
    /// Relative tolerance on `|lhs - budget|` for binding constraints.
    pub budget_tol: f64,
    /// Iteration cap for each inner bisection.
    pub max_iters: usize,
    /// Iteration cap for outer multiplier loops.
    pub outer_iters: usize,
    /// Relative tolerance on the stationarity residual.
    pub kkt_tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            multiplier_tol: 1e-12,
            budget_tol: 1e-9,
            max_iters: 200,
            outer_iters: 100,
            kkt_tol: 1e-7,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), SolveError> {
        let pos = |v: f64| v.is_finite() && v > 0.0;
        if !(pos(self.multiplier_tol) && pos(self.budget_tol) && pos(self.kkt_tol)) {
            return Err(SolveError::InvalidConfig("tolerances must be positive".into()));
        }
        if self.max_iters == 0 || self.outer_iters == 0 {
            return Err(SolveError::InvalidConfig("iteration limits must be positive".into()));
        }
        if self.kkt_tol < self.multiplier_tol {
            return Err(SolveError::InvalidConfig(
                "kkt_tol must not be smaller than multiplier_tol".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error("unsupported scenario for this solver: {0}")]
    Unsupported(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("degenerate constraint: {0}")]
    Degenerate(String),
    #[error("no convergence: {reason} (residual {residual:e})")]
    NonConvergence {
        reason: String,
        residual: f64,
        best: Option<Box<Allocation>>,
        /// Outer-loop residual history, at most `max_iters` long.
        trace: Vec<f64>,
    },
}

/// Solves any scenario with the appropriate method.
pub fn solve(scenario: &Scenario, cfg: &SolverConfig) -> Result<Allocation, SolveError> {
    match scenario.resource() {
        ResourceModel::StaticBudget { .. } if scenario.pooling().is_none() => solve_separable(scenario, cfg),
        ResourceModel::AreaEnergy { .. } => solve_area_voltage(scenario, cfg),
        _ => solve_coupled(scenario, cfg),
    }
}

/// Bisection on a monotone predicate in log space: `below(v)` is true for
/// `v` under the root. Returns the final bracket.
pub(crate) fn bisect_log(mut lo: f64, mut hi: f64, iters: usize, mut below: impl FnMut(f64) -> bool) -> (f64, f64) {
    for _ in 0..iters {
        let mid = (0.5 * (lo.ln() + hi.ln())).exp();
        if !(mid > lo && mid < hi) {
            break;
        }
        if below(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo, hi)
}

/// Linear-space counterpart of [`bisect_log`].
pub(crate) fn bisect_linear(mut lo: f64, mut hi: f64, iters: usize, mut below: impl FnMut(f64) -> bool) -> (f64, f64) {
    for _ in 0..iters {
        let mid = lo + 0.5 * (hi - lo);
        if !(mid > lo && mid < hi) {
            break;
        }
        if below(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo, hi)
}

fn relative_gap(lhs: f64, budget: f64) -> f64 {
    (lhs - budget).abs() / budget
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_is_valid() {
        SolverConfig::default().validate().unwrap();
        let bad = SolverConfig {
            kkt_tol: 1e-15,
            ..SolverConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = SolverConfig {
            max_iters: 0,
            ..SolverConfig::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn bisection_helpers_find_roots() {
        let (lo, hi) = bisect_log(1e-6, 1e6, 200, |v| v * v < 2.0);
        assert!((lo - 2f64.sqrt()).abs() < 1e-15 && (hi - lo) < 1e-15);
        let (lo, _) = bisect_linear(0.0, 10.0, 200, |v| v < 3.25);
        assert!((lo - 3.25).abs() < 1e-14);
    }
}
