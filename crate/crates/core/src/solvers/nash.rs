use super::optimum::degenerate_complementarity;
use super::{EquilibriumReport, SolverConfig, ACTIVE_TOL};
use crate::error::SolverError;
use crate::game::{GameSpec, InvestmentProfile};

/// Best response of player `i` to the other entries of `x` (the `i`-th
/// entry is ignored). Minimizes the convex scalar function
/// `t -> g_i(t, x_-i)` on `[0, (f_i(0) + eps) / c_i]` by bisection on its
/// derivative.
pub fn best_response(
    spec: &GameSpec,
    i: usize,
    x: &[f64],
    cfg: &SolverConfig,
) -> Result<f64, SolverError> {
    cfg.validate()?;
    spec.cost_g(i, x)?;
    Ok(best_response_at(spec, i, x, cfg.bound_eps))
}

pub(crate) fn best_response_at(spec: &GameSpec, i: usize, x: &[f64], eps: f64) -> f64 {
    let mut probe = x.to_vec();
    let mut slope = |t: f64| {
        probe[i] = t;
        spec.partial_cost_at(i, i, &probe)
    };
    if slope(0.0) >= 0.0 {
        return 0.0;
    }
    let mut lo = 0.0;
    let mut hi = spec.player_bound(i, eps);
    while slope(hi) <= 0.0 {
        // unreachable for the supported families; kept for rounding at the bound
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if slope(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Largest cost reduction any single player can obtain by deviating from
/// `x`. Zero (up to rounding) exactly at a Nash equilibrium of the
/// unregulated game.
pub fn verify_ne(spec: &GameSpec, x: &[f64], cfg: &SolverConfig) -> Result<f64, SolverError> {
    cfg.validate()?;
    spec.social_cost(x)?;
    Ok(max_deviation(spec, x, cfg.bound_eps))
}

fn max_deviation(spec: &GameSpec, x: &[f64], eps: f64) -> f64 {
    let mut worst = 0.0f64;
    let mut probe = x.to_vec();
    for i in 0..spec.n() {
        let current = spec.cost_at(i, x);
        probe[i] = best_response_at(spec, i, x, eps);
        let gain = current - spec.cost_at(i, &probe);
        probe[i] = x[i];
        worst = worst.max(gain);
    }
    worst
}

/// Gauss-Seidel best-response play from the zero profile.
pub fn solve_unregulated_ne(
    spec: &GameSpec,
    cfg: &SolverConfig,
) -> Result<EquilibriumReport, SolverError> {
    cfg.validate()?;
    let n = spec.n();
    let mut x = vec![0.0; n];
    let mut converged = false;
    let mut sweeps = 0;
    while sweeps < cfg.max_iter {
        sweeps += 1;
        let mut change = 0.0f64;
        for i in 0..n {
            let br = best_response_at(spec, i, &x, cfg.bound_eps);
            change = change.max((br - x[i]).abs());
            x[i] = br;
        }
        if change < cfg.sweep_tol {
            converged = true;
            break;
        }
    }

    let active: Vec<bool> = x.iter().map(|v| *v > ACTIVE_TOL).collect();
    let own_marginal: Vec<f64> = (0..n).map(|i| spec.partial_cost_at(i, i, &x)).collect();
    Ok(EquilibriumReport {
        max_deviation: max_deviation(spec, &x, cfg.bound_eps),
        non_unique: degenerate_complementarity(&active, &own_marginal),
        profile: InvestmentProfile::new(x)?,
        converged,
        iterations: sweeps,
        active,
    })
}
