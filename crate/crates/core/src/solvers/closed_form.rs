//! Closed-form solutions for the total-effort exponential family.
//!
//! With `f(x) = alpha * exp(-beta * sum_j x_j)` only the cheapest player
//! ever invests. Selfishly it stops where `alpha * beta * exp(-beta s) = c`;
//! socially it stops where `n * alpha * beta * exp(-beta s) = c`. These
//! formulas are independent of the numerical solvers and serve as their
//! cross-checks.

use crate::game::{GameSpec, RiskModel};

fn params(spec: &GameSpec) -> Option<(f64, f64)> {
    match spec.risk_model() {
        RiskModel::TotalEffortExp { alpha, beta } => Some((*alpha, *beta)),
        RiskModel::WeightedEffortExp { .. } => None,
    }
}

/// Effort at which a player with unit cost `cost` stops investing when the
/// risk it faces is scaled by `scale` (1 for selfish play, `n` socially).
fn stopping_total(alpha: f64, beta: f64, scale: f64, cost: f64) -> f64 {
    ((scale * alpha * beta / cost).ln() / beta).max(0.0)
}

/// Best response of player `i` given the others' total effort.
pub fn best_response(spec: &GameSpec, i: usize, others_total: f64) -> Option<f64> {
    let (alpha, beta) = params(spec)?;
    Some((stopping_total(alpha, beta, 1.0, spec.cost(i)) - others_total).max(0.0))
}

/// Unregulated equilibrium: the cheapest player (lowest index on ties)
/// invests `max(0, ln(alpha beta / c_min) / beta)`.
pub fn unregulated_ne(spec: &GameSpec) -> Option<Vec<f64>> {
    let (alpha, beta) = params(spec)?;
    let k = spec.cheapest_player();
    let mut x = vec![0.0; spec.n()];
    x[k] = stopping_total(alpha, beta, 1.0, spec.cost(k));
    Some(x)
}

/// Social optimum: the cheapest player invests
/// `max(0, ln(n alpha beta / c_min) / beta)`.
pub fn social_optimum(spec: &GameSpec) -> Option<Vec<f64>> {
    let (alpha, beta) = params(spec)?;
    let k = spec.cheapest_player();
    let mut x = vec![0.0; spec.n()];
    x[k] = stopping_total(alpha, beta, spec.n() as f64, spec.cost(k));
    Some(x)
}

/// `rho = (n - ln c_1) / (1 + ln n - ln c_1)`, the price of anarchy of the
/// unit total-effort game (`alpha = beta = 1`) when `c_1 < 1`.
pub fn unit_price_of_anarchy(n: usize, c_min: f64) -> f64 {
    let n = n as f64;
    (n - c_min.ln()) / (1.0 + n.ln() - c_min.ln())
}

/// Price of anarchy from the closed-form profiles, for any `alpha, beta`.
pub fn price_of_anarchy(spec: &GameSpec) -> Option<f64> {
    let (alpha, beta) = params(spec)?;
    let n = spec.n() as f64;
    let c = spec.cost(spec.cheapest_player());
    let social = |s: f64| n * alpha * (-beta * s).exp() + c * s;
    let ne = stopping_total(alpha, beta, 1.0, c);
    let opt = stopping_total(alpha, beta, n, c);
    Some(social(ne) / social(opt))
}
