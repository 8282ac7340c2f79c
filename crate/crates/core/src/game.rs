//! Game data model: players, unit costs, parametric risk functions, and the
//! cost/utility evaluations every other module is built on.
//!
//! A player's cost is `g_i(x) = f_i(x) + c_i x_i` and its utility under a
//! transfer `t_i` is `u_i = -g_i(x) - t_i`. Risk functions are closed
//! parametric families so that positivity, monotonicity and convexity can be
//! checked on construction instead of trusted.

use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::GameError;

/// Parametric risk family shared by all players of a game.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum RiskModel {
    /// `f_i(x) = alpha * exp(-beta * sum_j x_j)` for every player.
    TotalEffortExp { alpha: f64, beta: f64 },
    /// `f_i(x) = alphas[i] * exp(-sum_j weights[i][j] * x_j)`.
    WeightedEffortExp {
        alphas: Vec<f64>,
        weights: Vec<Vec<f64>>,
    },
}

impl RiskModel {
    pub fn family_name(&self) -> &'static str {
        match self {
            RiskModel::TotalEffortExp { .. } => "total_effort_exp",
            RiskModel::WeightedEffortExp { .. } => "weighted_effort_exp",
        }
    }

    fn validate(&self, n: usize) -> Result<(), GameError> {
        let positive = |field: String, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(GameError::NonPositiveParameter { field, value: v })
            }
        };
        match self {
            RiskModel::TotalEffortExp { alpha, beta } => {
                positive("alpha".into(), *alpha)?;
                positive("beta".into(), *beta)
            }
            RiskModel::WeightedEffortExp { alphas, weights } => {
                if alphas.len() != n {
                    return Err(GameError::DimensionMismatch {
                        what: "alphas",
                        expected: n,
                        got: alphas.len(),
                    });
                }
                if weights.len() != n {
                    return Err(GameError::DimensionMismatch {
                        what: "weights",
                        expected: n,
                        got: weights.len(),
                    });
                }
                for (i, a) in alphas.iter().enumerate() {
                    positive(format!("alphas[{i}]"), *a)?;
                }
                for (i, row) in weights.iter().enumerate() {
                    if row.len() != n {
                        return Err(GameError::DimensionMismatch {
                            what: "weights row",
                            expected: n,
                            got: row.len(),
                        });
                    }
                    for (j, w) in row.iter().enumerate() {
                        positive(format!("weights[{i}][{j}]"), *w)?;
                    }
                }
                Ok(())
            }
        }
    }

    /// Risk scale at zero investment, `f_i(0)`.
    fn base(&self, i: usize) -> f64 {
        match self {
            RiskModel::TotalEffortExp { alpha, .. } => *alpha,
            RiskModel::WeightedEffortExp { alphas, .. } => alphas[i],
        }
    }

    /// Coefficient vector `a_i` such that `f_i(x) = f_i(0) * exp(-a_i . x)`.
    fn exposure(&self, i: usize, j: usize) -> f64 {
        match self {
            RiskModel::TotalEffortExp { beta, .. } => *beta,
            RiskModel::WeightedEffortExp { weights, .. } => weights[i][j],
        }
    }
}

/// A validated interdependent security game.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameSpec {
    costs: Vec<f64>,
    risk_model: RiskModel,
}

impl GameSpec {
    pub fn new(costs: Vec<f64>, risk_model: RiskModel) -> Result<Self, GameError> {
        if costs.is_empty() {
            return Err(GameError::NoPlayers);
        }
        for (i, c) in costs.iter().enumerate() {
            if !(c.is_finite() && *c > 0.0) {
                return Err(GameError::NonPositiveCost {
                    index: i,
                    value: *c,
                });
            }
        }
        risk_model.validate(costs.len())?;
        Ok(Self { costs, risk_model })
    }

    /// Shorthand for the total-effort family.
    pub fn total_effort(costs: Vec<f64>, alpha: f64, beta: f64) -> Result<Self, GameError> {
        Self::new(costs, RiskModel::TotalEffortExp { alpha, beta })
    }

    pub fn n(&self) -> usize {
        self.costs.len()
    }

    pub fn costs(&self) -> &[f64] {
        &self.costs
    }

    pub fn cost(&self, i: usize) -> f64 {
        self.costs[i]
    }

    pub fn risk_model(&self) -> &RiskModel {
        &self.risk_model
    }

    /// Pairs of players with exactly equal unit costs. Solvers break such
    /// ties by lowest index.
    pub fn cost_ties(&self) -> Vec<(usize, usize)> {
        let mut ties = Vec::new();
        for i in 0..self.n() {
            for j in i + 1..self.n() {
                if self.costs[i] == self.costs[j] {
                    ties.push((i, j));
                }
            }
        }
        ties
    }

    /// Index of the cheapest player, lowest index on ties.
    pub fn cheapest_player(&self) -> usize {
        let mut best = 0;
        for (i, c) in self.costs.iter().enumerate() {
            if *c < self.costs[best] {
                best = i;
            }
        }
        best
    }

    fn check_index(&self, i: usize) -> Result<(), GameError> {
        if i >= self.n() {
            Err(GameError::PlayerOutOfRange {
                index: i,
                n: self.n(),
            })
        } else {
            Ok(())
        }
    }

    fn check_profile(&self, x: &[f64]) -> Result<(), GameError> {
        if x.len() != self.n() {
            return Err(GameError::DimensionMismatch {
                what: "investment profile",
                expected: self.n(),
                got: x.len(),
            });
        }
        for (j, v) in x.iter().enumerate() {
            if !v.is_finite() {
                return Err(GameError::NonFiniteInvestment { index: j });
            }
            if *v < 0.0 {
                return Err(GameError::NegativeInvestment {
                    index: j,
                    value: *v,
                });
            }
        }
        Ok(())
    }

    /// Security risk `f_i(x)`.
    pub fn risk(&self, i: usize, x: &[f64]) -> Result<f64, GameError> {
        self.check_index(i)?;
        self.check_profile(x)?;
        Ok(self.risk_at(i, x))
    }

    /// Cost `g_i(x) = f_i(x) + c_i x_i`.
    pub fn cost_g(&self, i: usize, x: &[f64]) -> Result<f64, GameError> {
        self.check_index(i)?;
        self.check_profile(x)?;
        Ok(self.cost_at(i, x))
    }

    /// Utility `u_i = -g_i(x) - t_i`.
    pub fn utility(&self, i: usize, x: &[f64], tax: f64) -> Result<f64, GameError> {
        Ok(-self.cost_g(i, x)? - tax)
    }

    /// Social cost `G(x) = sum_i g_i(x)`, accumulated in player order.
    pub fn social_cost(&self, x: &[f64]) -> Result<f64, GameError> {
        self.check_profile(x)?;
        Ok(self.social_cost_at(x))
    }

    /// Analytic gradient of `g_i` with respect to the whole profile.
    pub fn grad_cost_g(&self, i: usize, x: &[f64]) -> Result<Vec<f64>, GameError> {
        self.check_index(i)?;
        self.check_profile(x)?;
        Ok(self.grad_cost_at(i, x))
    }

    /// Upper bound on every best response: `max_i (f_i(0) + eps) / c_i`.
    ///
    /// At `x_i = (f_i(0) + eps) / c_i` the marginal cost of player `i` is
    /// already positive whatever the others do, so each best response lies in
    /// `[0, bound]`.
    pub fn strategy_bound(&self, eps: f64) -> Result<f64, GameError> {
        if !(eps.is_finite() && eps > 0.0) {
            return Err(GameError::NonPositiveSlack { value: eps });
        }
        Ok((0..self.n())
            .map(|i| self.player_bound(i, eps))
            .fold(0.0, f64::max))
    }

    pub(crate) fn player_bound(&self, i: usize, eps: f64) -> f64 {
        (self.risk_model.base(i) + eps) / self.costs[i]
    }

    // Unchecked evaluations. These are defined on all of R^n through the
    // analytic formula; the public wrappers restrict to x >= 0.

    fn exponent(&self, i: usize, x: &[f64]) -> f64 {
        match &self.risk_model {
            RiskModel::TotalEffortExp { beta, .. } => beta * x.iter().sum::<f64>(),
            RiskModel::WeightedEffortExp { weights, .. } => {
                weights[i].iter().zip(x).map(|(w, v)| w * v).sum()
            }
        }
    }

    pub(crate) fn risk_at(&self, i: usize, x: &[f64]) -> f64 {
        self.risk_model.base(i) * (-self.exponent(i, x)).exp()
    }

    pub(crate) fn cost_at(&self, i: usize, x: &[f64]) -> f64 {
        self.risk_at(i, x) + self.costs[i] * x[i]
    }

    pub(crate) fn social_cost_at(&self, x: &[f64]) -> f64 {
        (0..self.n()).map(|i| self.cost_at(i, x)).sum()
    }

    /// `d g_i / d x_j`.
    pub(crate) fn partial_cost_at(&self, i: usize, j: usize, x: &[f64]) -> f64 {
        let own = if i == j { self.costs[i] } else { 0.0 };
        -self.risk_model.exposure(i, j) * self.risk_at(i, x) + own
    }

    pub(crate) fn grad_cost_at(&self, i: usize, x: &[f64]) -> Vec<f64> {
        let f = self.risk_at(i, x);
        (0..self.n())
            .map(|j| {
                let own = if i == j { self.costs[i] } else { 0.0 };
                -self.risk_model.exposure(i, j) * f + own
            })
            .collect()
    }

    /// Gradient of the social cost, `sum_i grad g_i`.
    pub(crate) fn grad_social_at(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n();
        let mut grad = self.costs.clone();
        for i in 0..n {
            let f = self.risk_at(i, x);
            for (j, g) in grad.iter_mut().enumerate() {
                *g -= self.risk_model.exposure(i, j) * f;
            }
        }
        grad
    }

    /// Hessian of the social cost; the linear cost terms contribute nothing.
    pub(crate) fn hessian_social_at(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let n = self.n();
        let mut h = vec![vec![0.0; n]; n];
        for i in 0..n {
            let f = self.risk_at(i, x);
            for (j, row) in h.iter_mut().enumerate() {
                let aj = self.risk_model.exposure(i, j);
                for (k, v) in row.iter_mut().enumerate() {
                    *v += f * aj * self.risk_model.exposure(i, k);
                }
            }
        }
        h
    }
}

/// A nonnegative vector of security efforts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct InvestmentProfile(Vec<f64>);

impl InvestmentProfile {
    pub fn new(x: Vec<f64>) -> Result<Self, GameError> {
        for (j, v) in x.iter().enumerate() {
            if !v.is_finite() {
                return Err(GameError::NonFiniteInvestment { index: j });
            }
            if *v < 0.0 {
                return Err(GameError::NegativeInvestment {
                    index: j,
                    value: *v,
                });
            }
        }
        Ok(Self(x))
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![0.0; n])
    }

    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for InvestmentProfile {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// Per-player monetary transfers; negative entries are rewards.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TaxProfile(Vec<f64>);

impl TaxProfile {
    pub fn new(t: Vec<f64>) -> Self {
        Self(t)
    }

    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn is_balanced(&self, tol: f64) -> bool {
        self.total().abs() <= tol
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for TaxProfile {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn s1() -> GameSpec {
        GameSpec::total_effort(vec![0.5, 0.8, 1.0, 1.2, 1.5], 1.0, 1.0).unwrap()
    }

    #[test]
    fn risk_total_effort_values() {
        let g = s1();
        assert_eq!(g.risk(3, &[0.0; 5]).unwrap(), 1.0);
        let ln2 = 2f64.ln();
        let x = [ln2 / 2.0, 0.0, ln2 / 4.0, 0.0, ln2 / 4.0];
        assert_abs_diff_eq!(g.risk(0, &x).unwrap(), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn risk_weighted_value() {
        let g = GameSpec::new(
            vec![1.0, 1.0],
            RiskModel::WeightedEffortExp {
                alphas: vec![2.0, 1.0],
                weights: vec![vec![1.0, 3.0], vec![1.0, 1.0]],
            },
        )
        .unwrap();
        assert_abs_diff_eq!(
            g.risk(0, &[1.0, 0.0]).unwrap(),
            0.735758882342885,
            epsilon = 1e-12
        );
    }

    #[test]
    fn cost_and_utility_at_social_optimum() {
        let g = s1();
        let x = [10f64.ln(), 0.0, 0.0, 0.0, 0.0];
        assert_eq!(g.cost_g(0, &[0.0; 5]).unwrap(), 1.0);
        assert_abs_diff_eq!(g.cost_g(0, &x).unwrap(), 1.251292546497023, epsilon = 1e-12);
        assert_abs_diff_eq!(g.cost_g(1, &x).unwrap(), 0.1, epsilon = 1e-15);
        assert_abs_diff_eq!(
            g.utility(0, &x, -0.921034037197618).unwrap(),
            -0.330258509299405,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            g.utility(1, &x, 0.230258509299405).unwrap(),
            -0.330258509299405,
            epsilon = 1e-12
        );
        assert_eq!(g.utility(2, &x, 0.0).unwrap(), -g.cost_g(2, &x).unwrap());
    }

    #[test]
    fn social_cost_values() {
        let g = s1();
        let ne = [2f64.ln(), 0.0, 0.0, 0.0, 0.0];
        let so = [10f64.ln(), 0.0, 0.0, 0.0, 0.0];
        assert_abs_diff_eq!(
            g.social_cost(&ne).unwrap(),
            2.846573590279973,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            g.social_cost(&so).unwrap(),
            1.651292546497023,
            epsilon = 1e-12
        );
        let single = GameSpec::total_effort(vec![2.0], 1.0, 1.0).unwrap();
        assert_eq!(single.social_cost(&[0.0]).unwrap(), 1.0);
    }

    #[test]
    fn gradient_at_social_optimum() {
        let g = s1();
        let x = [10f64.ln(), 0.0, 0.0, 0.0, 0.0];
        let grad = g.grad_cost_g(0, &x).unwrap();
        let expected = [0.4, -0.1, -0.1, -0.1, -0.1];
        for (a, b) in grad.iter().zip(expected) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-15);
        }
        // risk part is symmetric in the total-effort family
        let g2 = g.grad_cost_g(3, &[0.1, 0.2, 0.3, 0.4, 0.5]).unwrap();
        assert_eq!(g2[0], g2[1]);
        assert_eq!(g2[0], g2[4]);
        assert_abs_diff_eq!(g2[3] - g2[0], 1.2, epsilon = 1e-15);
    }

    #[test]
    fn strategy_bound_values() {
        assert_abs_diff_eq!(s1().strategy_bound(0.01).unwrap(), 2.02, epsilon = 1e-15);
        let single = GameSpec::total_effort(vec![2.0], 1.0, 1.0).unwrap();
        assert_eq!(single.strategy_bound(1.0).unwrap(), 1.0);
        let tiny = GameSpec::total_effort(vec![0.5, 2.0], 1e-300, 1.0).unwrap();
        assert_abs_diff_eq!(tiny.strategy_bound(0.01).unwrap(), 0.02, epsilon = 1e-15);
        assert!(matches!(
            s1().strategy_bound(0.0),
            Err(GameError::NonPositiveSlack { .. })
        ));
    }

    #[test]
    fn rejects_bad_input() {
        let g = s1();
        assert!(matches!(
            g.risk(5, &[0.0; 5]),
            Err(GameError::PlayerOutOfRange { index: 5, n: 5 })
        ));
        assert!(matches!(
            g.cost_g(0, &[0.0, -1.0, 0.0, 0.0, 0.0]),
            Err(GameError::NegativeInvestment { index: 1, .. })
        ));
        assert!(matches!(
            g.social_cost(&[0.0; 4]),
            Err(GameError::DimensionMismatch { .. })
        ));
        assert!(matches!(
            GameSpec::total_effort(vec![0.5, -1.0], 1.0, 1.0),
            Err(GameError::NonPositiveCost { index: 1, .. })
        ));
        assert!(matches!(
            GameSpec::total_effort(vec![], 1.0, 1.0),
            Err(GameError::NoPlayers)
        ));
        assert!(matches!(
            GameSpec::total_effort(vec![1.0], 0.0, 1.0),
            Err(GameError::NonPositiveParameter { .. })
        ));
        let bad_w = GameSpec::new(
            vec![1.0, 1.0],
            RiskModel::WeightedEffortExp {
                alphas: vec![1.0, 1.0],
                weights: vec![vec![1.0, 0.0], vec![1.0, 1.0]],
            },
        );
        assert!(matches!(bad_w, Err(GameError::NonPositiveParameter { .. })));
    }

    #[test]
    fn ties_are_reported() {
        let g = GameSpec::total_effort(vec![0.5, 0.5, 0.7], 1.0, 1.0).unwrap();
        assert_eq!(g.cost_ties(), vec![(0, 1)]);
        assert_eq!(g.cheapest_player(), 0);
        assert!(s1().cost_ties().is_empty());
    }
}
