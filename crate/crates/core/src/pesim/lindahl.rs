//! Personalized (Lindahl) prices and the equilibrium message profile built
//! from them.
//!
//! At a social optimum `x*` the KKT conditions of `min G(x), x >= 0` read
//! `sum_i (grad g_i(x*) - lambda_i) = 0` with `lambda_i >= 0` and
//! `lambda_i' x* = 0`. Setting `l_i = -grad g_i(x*) + lambda_i` makes `x*`
//! optimal for every player's priced problem `min g_i(x) + l_i' x` and
//! makes the prices sum to zero. Only `sum_i lambda_i` is pinned down; it is
//! split evenly across players.

use serde::Serialize;

use super::search::{coordinate_descent, local_grid, priced_cost};
use super::{Message, MessageProfile, MIN_PLAYERS};
use crate::error::MechanismError;
use crate::game::GameSpec;
use crate::solvers::{projected_kkt_residual, SolverConfig};

/// Efforts above this count as active when assigning multipliers.
const ACTIVE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LindahlSystem {
    /// `prices[i]` is player `i`'s personalized price vector `l_i`.
    pub prices: Vec<Vec<f64>>,
    /// `multipliers[i]` is `lambda_i`, nonnegative and zero on active
    /// coordinates.
    pub multipliers: Vec<Vec<f64>>,
}

impl LindahlSystem {
    /// Largest component of `sum_i l_i` in absolute value.
    pub fn price_sum_residual(&self) -> f64 {
        let n = self.prices.first().map_or(0, Vec::len);
        (0..n)
            .map(|k| self.prices.iter().map(|l| l[k]).sum::<f64>().abs())
            .fold(0.0, f64::max)
    }

    /// Largest component of `l_i + grad g_i(x) - lambda_i` over all players.
    pub fn stationarity_residual(&self, spec: &GameSpec, x: &[f64]) -> f64 {
        let mut worst = 0.0f64;
        for (i, (l, lam)) in self.prices.iter().zip(&self.multipliers).enumerate() {
            let grad = spec.grad_cost_at(i, x);
            for k in 0..l.len() {
                worst = worst.max((l[k] + grad[k] - lam[k]).abs());
            }
        }
        worst
    }

    /// Largest `|lambda_i' x|` over all players.
    pub fn slackness_residual(&self, x: &[f64]) -> f64 {
        self.multipliers
            .iter()
            .map(|lam| super::dot(lam, x).abs())
            .fold(0.0, f64::max)
    }
}

/// Builds the Lindahl system for a candidate social optimum `x_star`,
/// which must pass the projected-KKT check at `cfg.kkt_tol`.
pub fn lindahl_prices(
    spec: &GameSpec,
    x_star: &[f64],
    cfg: &SolverConfig,
) -> Result<LindahlSystem, MechanismError> {
    let residual = projected_kkt_residual(spec, x_star)?;
    if residual > cfg.kkt_tol {
        return Err(MechanismError::KktResidual {
            residual,
            tol: cfg.kkt_tol,
        });
    }
    let n = spec.n();
    let share = 1.0 / n as f64;
    let social_grad = spec.grad_social_at(x_star);
    let mut prices = Vec::with_capacity(n);
    let mut multipliers = Vec::with_capacity(n);
    for i in 0..n {
        let grad = spec.grad_cost_at(i, x_star);
        // the residual share keeps sum_i l_i = 0 even when x_star is only
        // KKT-accurate to the tolerance
        let l: Vec<f64> = (0..n).map(|k| -grad[k] + social_grad[k] * share).collect();
        let lam: Vec<f64> = (0..n)
            .map(|k| {
                if x_star[k] > ACTIVE_TOL {
                    0.0
                } else {
                    social_grad[k].max(0.0) * share
                }
            })
            .collect();
        prices.push(l);
        multipliers.push(lam);
    }
    Ok(LindahlSystem {
        prices,
        multipliers,
    })
}

/// Equilibrium message profile together with the price seed it was built
/// from.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquilibriumConstruction {
    pub profile: MessageProfile,
    /// `pi_1 = seed * (1, ..., 1)`.
    pub seed: f64,
}

/// Messages `m_i = (pi_i, x*)` with `pi_{i+1} - pi_{i+2} = l_i`.
///
/// The prices follow `pi_i = pi_{i-1} - l_{i-2}` from
/// `pi_1 = M (1, ..., 1)`, `M = sum_i max_j |l_ij|`, which keeps every price
/// nonnegative. The recursion closes up because the `l_i` sum to zero.
pub fn construct_equilibrium_messages(
    spec: &GameSpec,
    x_star: &[f64],
    lindahl: &LindahlSystem,
) -> Result<EquilibriumConstruction, MechanismError> {
    let n = spec.n();
    if n < MIN_PLAYERS {
        return Err(MechanismError::TooFewPlayers { n });
    }
    spec.social_cost(x_star)?;
    if lindahl.prices.len() != n || lindahl.prices.iter().any(|l| l.len() != n) {
        return Err(MechanismError::ProfileSize {
            expected: n,
            got: lindahl.prices.len(),
        });
    }
    let seed: f64 = lindahl
        .prices
        .iter()
        .map(|l| l.iter().fold(0.0f64, |a, v| a.max(v.abs())))
        .sum();
    let residual = lindahl.price_sum_residual();
    if residual > 1e-9 * (1.0 + seed) {
        return Err(MechanismError::UnbalancedPrices { residual });
    }

    let l = &lindahl.prices;
    let mut prices = vec![vec![seed; n]];
    for p in 1..n {
        let prev = &prices[p - 1];
        let lp = &l[(p + n - 2) % n];
        let next: Vec<f64> = prev.iter().zip(lp).map(|(a, b)| (a - b).max(0.0)).collect();
        prices.push(next);
    }
    let messages = prices
        .into_iter()
        .map(|prices| Message {
            prices,
            proposal: x_star.to_vec(),
        })
        .collect();
    Ok(EquilibriumConstruction {
        profile: MessageProfile::new(messages)?,
        seed,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExternalityVerdict {
    /// Player paying the price.
    pub payer: usize,
    /// Player whose investment benefits the payer.
    pub investor: usize,
    /// `d g_payer / d x_investor` at the allocation.
    pub marginal: f64,
    pub price: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExternalityReport {
    pub verdicts: Vec<ExternalityVerdict>,
    pub holds: bool,
}

/// For every pair `i != j` with `x_j > 0`: a negative marginal
/// `d g_i / d x_j` must come with a positive price `l_ij`, so that `i` pays
/// `l_ij x_j > 0` for the benefit of `j`'s investment.
pub fn externality_sign_check(
    spec: &GameSpec,
    allocation: &[f64],
    lindahl: &LindahlSystem,
) -> Result<ExternalityReport, MechanismError> {
    let n = spec.n();
    if allocation.len() != n || lindahl.prices.len() != n {
        return Err(MechanismError::ProfileSize {
            expected: n,
            got: allocation.len(),
        });
    }
    let mut verdicts = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i == j || allocation[j] <= 0.0 {
                continue;
            }
            let marginal = spec.partial_cost_at(i, j, allocation);
            let price = lindahl.prices[i][j];
            let holds = marginal >= 0.0 || (price > 0.0 && price * allocation[j] > 0.0);
            verdicts.push(ExternalityVerdict {
                payer: i,
                investor: j,
                marginal,
                price,
                holds,
            });
        }
    }
    let holds = verdicts.iter().all(|v| v.holds);
    Ok(ExternalityReport { verdicts, holds })
}

/// How much player `i` could lower `g_i(x) + l_i' x` below its value at
/// `x_star` over `x >= 0`, searching a 0.01-spaced grid around `x_star` and
/// then running coordinate descent. Zero when `x_star` is individually
/// optimal under the Lindahl price.
pub fn lindahl_optimality_gap(
    spec: &GameSpec,
    x_star: &[f64],
    lindahl: &LindahlSystem,
    i: usize,
) -> Result<f64, MechanismError> {
    spec.cost_g(i, x_star)?;
    let l = &lindahl.prices[i];
    let base = priced_cost(spec, i, l, x_star);
    let mut best = base;
    let mut best_point = x_star.to_vec();
    for p in local_grid(x_star, 1e-2, 50, 10) {
        let v = priced_cost(spec, i, l, &p);
        if v < best {
            best = v;
            best_point = p;
        }
    }
    let upper = 10.0 * (x_star.iter().fold(1.0f64, |a, v| a.max(*v)) + 1.0);
    for start in [x_star.to_vec(), best_point] {
        let (_, v) = coordinate_descent(spec, i, l, &start, upper, 500);
        best = best.min(v);
    }
    Ok((base - best).max(0.0))
}
