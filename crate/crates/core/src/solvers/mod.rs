//! Social optimum, unregulated Nash equilibrium, equilibrium certification
//! and the price of anarchy.
//!
//! Both solvers start from the zero profile and are deterministic. The
//! social optimum uses projected gradient descent on `G(x) = sum_i g_i(x)`
//! over `x >= 0`; the Nash equilibrium uses Gauss-Seidel best-response
//! sweeps in ascending player order. Neither procedure is claimed to converge
//! on every game: non-convergence is reported, never hidden.

pub mod closed_form;
mod nash;
mod optimum;

use serde::{Deserialize, Serialize};

use crate::error::SolverError;
use crate::game::{GameSpec, InvestmentProfile};

pub use nash::{best_response, solve_unregulated_ne, verify_ne};
pub use optimum::{projected_kkt_residual, solve_social_optimum};

/// Tolerances, iteration caps and seeds for every numerical routine in the
/// crate. The mechanism routines read their fields from here as well.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// Projected-gradient stopping tolerance (infinity norm).
    pub grad_tol: f64,
    /// Iteration cap for gradient descent; sweep cap for best-response play.
    pub max_iter: usize,
    /// Backtracking shrink factor.
    pub shrink: f64,
    /// Armijo sufficient-decrease constant.
    pub sufficient_decrease: f64,
    /// Best-response sweeps stop once no effort moves by more than this.
    pub sweep_tol: f64,
    /// Random deviations tried per player when certifying a message profile.
    pub sample_count: usize,
    pub seed: u64,
    /// Slack in the best-response strategy bound.
    pub bound_eps: f64,
    /// An unregulated profile is certified when no deviation gains more.
    pub certify_tol: f64,
    /// A message profile is certified when no deviation gains more.
    pub mechanism_tol: f64,
    /// Largest projected-KKT residual accepted for a candidate optimum.
    pub kkt_tol: f64,
    /// Step size of the heuristic message dynamic.
    pub damping: f64,
    pub max_rounds: usize,
    /// The message dynamic stops once no message entry moves by more.
    pub dynamics_tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            grad_tol: 1e-10,
            max_iter: 100_000,
            shrink: 0.5,
            sufficient_decrease: 1e-4,
            sweep_tol: 1e-10,
            sample_count: 200,
            seed: 0,
            bound_eps: 0.01,
            certify_tol: 1e-8,
            mechanism_tol: 1e-6,
            kkt_tol: 1e-6,
            damping: 0.1,
            max_rounds: 10_000,
            dynamics_tol: 1e-9,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), SolverError> {
        let positive = [
            ("grad_tol", self.grad_tol),
            ("sweep_tol", self.sweep_tol),
            ("bound_eps", self.bound_eps),
            ("certify_tol", self.certify_tol),
            ("mechanism_tol", self.mechanism_tol),
            ("kkt_tol", self.kkt_tol),
            ("sufficient_decrease", self.sufficient_decrease),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(SolverError::Config(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        if !(self.shrink > 0.0 && self.shrink < 1.0) {
            return Err(SolverError::Config(format!(
                "shrink must lie in (0, 1), got {}",
                self.shrink
            )));
        }
        if self.sample_count == 0 {
            return Err(SolverError::Config(
                "sample_count must be at least 1".into(),
            ));
        }
        if self.max_iter == 0 || self.max_rounds == 0 {
            return Err(SolverError::Config(
                "iteration caps must be at least 1".into(),
            ));
        }
        if !(self.damping.is_finite() && self.damping >= 0.0) {
            return Err(SolverError::Config(format!(
                "damping must be nonnegative, got {}",
                self.damping
            )));
        }
        if !(self.dynamics_tol.is_finite() && self.dynamics_tol >= 0.0) {
            return Err(SolverError::Config(format!(
                "dynamics_tol must be nonnegative, got {}",
                self.dynamics_tol
            )));
        }
        Ok(())
    }
}

/// Result of [`solve_social_optimum`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimumReport {
    pub profile: InvestmentProfile,
    pub converged: bool,
    pub iterations: usize,
    /// Infinity norm of `x - max(0, x - grad G(x))`.
    pub kkt_residual: f64,
    pub active: Vec<bool>,
    /// Set when the optimum is not pinned down uniquely (flat directions
    /// among the active players or a degenerate inactive player).
    pub non_unique: bool,
}

/// Result of [`solve_unregulated_ne`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquilibriumReport {
    pub profile: InvestmentProfile,
    pub converged: bool,
    /// Best-response sweeps performed.
    pub iterations: usize,
    /// Largest cost reduction any player obtains by deviating alone.
    pub max_deviation: f64,
    pub active: Vec<bool>,
    pub non_unique: bool,
}

impl EquilibriumReport {
    pub fn certified(&self, tol: f64) -> bool {
        self.max_deviation <= tol
    }
}

/// Marginal costs this close to zero at an inactive player count as
/// indifference, i.e. a possible alternative equilibrium.
pub(crate) const DEGENERACY_TOL: f64 = 1e-8;

/// Efforts at or below this are reported as inactive.
pub(crate) const ACTIVE_TOL: f64 = 1e-12;

/// Price of anarchy `G(x_ne) / G(x_opt)` for a given pair of profiles.
pub fn price_of_anarchy(
    spec: &GameSpec,
    equilibrium: &[f64],
    optimum: &[f64],
) -> Result<f64, SolverError> {
    let ne_cost = spec.social_cost(equilibrium)?;
    let opt_cost = spec.social_cost(optimum)?;
    if !(opt_cost.is_finite() && opt_cost > 0.0) {
        return Err(SolverError::DegenerateSocialCost { value: opt_cost });
    }
    Ok(ne_cost / opt_cost)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn poa_values() {
        let s1 = GameSpec::total_effort(vec![0.5, 0.8, 1.0, 1.2, 1.5], 1.0, 1.0).unwrap();
        let ne = [2f64.ln(), 0.0, 0.0, 0.0, 0.0];
        let so = [10f64.ln(), 0.0, 0.0, 0.0, 0.0];
        assert_abs_diff_eq!(
            price_of_anarchy(&s1, &ne, &so).unwrap(),
            1.7238457209284719,
            epsilon = 1e-12
        );
        assert_eq!(price_of_anarchy(&s1, &so, &so).unwrap(), 1.0);

        let two = GameSpec::total_effort(vec![0.5, 0.8], 1.0, 1.0).unwrap();
        let rho = price_of_anarchy(&two, &[2f64.ln(), 0.0], &[4f64.ln(), 0.0]).unwrap();
        assert_abs_diff_eq!(rho, 1.1285896762946077, epsilon = 1e-12);
    }

    #[test]
    fn poa_guards_degenerate_denominator() {
        // risk and effort cost both underflow to zero
        let g = GameSpec::total_effort(vec![1e-300], 1.0, 1e300).unwrap();
        assert!(matches!(
            price_of_anarchy(&g, &[0.0], &[1e-30]),
            Err(SolverError::DegenerateSocialCost { .. })
        ));
    }

    #[test]
    fn config_validation() {
        assert!(SolverConfig::default().validate().is_ok());
        let bad = SolverConfig {
            sample_count: 0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = SolverConfig {
            grad_tol: -1.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = SolverConfig {
            shrink: 1.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }
}
