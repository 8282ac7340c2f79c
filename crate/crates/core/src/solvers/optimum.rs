use nalgebra::{DMatrix, SymmetricEigen};

use super::{OptimumReport, SolverConfig, ACTIVE_TOL, DEGENERACY_TOL};
use crate::error::SolverError;
use crate::game::{GameSpec, InvestmentProfile, RiskModel};

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn project_step(x: &[f64], grad: &[f64], t: f64) -> Vec<f64> {
    x.iter()
        .zip(grad)
        .map(|(v, g)| (v - t * g).max(0.0))
        .collect()
}

fn residual(x: &[f64], grad: &[f64]) -> f64 {
    x.iter()
        .zip(grad)
        .map(|(v, g)| (v - (v - g).max(0.0)).abs())
        .fold(0.0, f64::max)
}

/// Infinity norm of the projected gradient `x - max(0, x - grad G(x))`.
/// Zero exactly at minimizers of `G` over `x >= 0`.
pub fn projected_kkt_residual(spec: &GameSpec, x: &[f64]) -> Result<f64, SolverError> {
    spec.social_cost(x)?;
    Ok(residual(x, &spec.grad_social_at(x)))
}

/// Minimizes `G(x) = sum_i g_i(x)` over `x >= 0` by projected gradient
/// descent with Barzilai-Borwein trial steps and Armijo backtracking.
pub fn solve_social_optimum(
    spec: &GameSpec,
    cfg: &SolverConfig,
) -> Result<OptimumReport, SolverError> {
    cfg.validate()?;
    let n = spec.n();
    let mut x = vec![0.0; n];
    let mut fx = spec.social_cost_at(&x);
    let mut grad = spec.grad_social_at(&x);
    let mut step = 1.0;
    let mut iterations = 0;
    let mut converged = false;

    loop {
        if residual(&x, &grad) <= cfg.grad_tol {
            converged = true;
            break;
        }
        if iterations >= cfg.max_iter {
            break;
        }
        iterations += 1;

        // rounding allowance so steps near the optimum are not rejected on noise
        let slack = 8.0 * f64::EPSILON * fx.abs();
        let mut t = step;
        let mut accepted = None;
        for _ in 0..200 {
            let cand = project_step(&x, &grad, t);
            let fc = spec.social_cost_at(&cand);
            let moved: Vec<f64> = cand.iter().zip(&x).map(|(a, b)| a - b).collect();
            if fc <= fx + cfg.sufficient_decrease * dot(&grad, &moved) + slack {
                accepted = Some((cand, fc, moved));
                break;
            }
            t *= cfg.shrink;
        }
        let Some((cand, fc, moved)) = accepted else {
            break;
        };
        let new_grad = spec.grad_social_at(&cand);
        let dg: Vec<f64> = new_grad.iter().zip(&grad).map(|(a, b)| a - b).collect();
        let sy = dot(&moved, &dg);
        step = if sy > 0.0 {
            (dot(&moved, &moved) / sy).clamp(1e-12, 1e12)
        } else {
            (2.0 * t).min(1e12)
        };
        if moved.iter().all(|m| *m == 0.0) {
            // no representable progress left
            x = cand;
            grad = new_grad;
            converged = residual(&x, &grad) <= cfg.grad_tol;
            break;
        }
        x = cand;
        fx = fc;
        grad = new_grad;
    }

    let mut non_unique = false;
    if matches!(spec.risk_model(), RiskModel::TotalEffortExp { .. }) {
        non_unique |= consolidate_ties(spec, &mut x);
        grad = spec.grad_social_at(&x);
    }
    let active: Vec<bool> = x.iter().map(|v| *v > ACTIVE_TOL).collect();
    non_unique |= degenerate_complementarity(&active, &grad);
    non_unique |= singular_on_active_set(spec, &x, &active);

    Ok(OptimumReport {
        kkt_residual: residual(&x, &grad),
        profile: InvestmentProfile::new(x)?,
        converged,
        iterations,
        active,
        non_unique,
    })
}

/// In the total-effort family effort spread over exactly tied players has
/// the same social cost as giving all of it to the lowest index. Returns
/// whether anything was merged.
fn consolidate_ties(spec: &GameSpec, x: &mut [f64]) -> bool {
    let mut merged = false;
    for i in 0..x.len() {
        for j in i + 1..x.len() {
            if x[j] > 0.0 && spec.cost(i) == spec.cost(j) {
                x[i] += x[j];
                x[j] = 0.0;
                merged = true;
            }
        }
    }
    merged
}

pub(crate) fn degenerate_complementarity(active: &[bool], marginal: &[f64]) -> bool {
    active.iter().any(|a| *a)
        && active
            .iter()
            .zip(marginal)
            .any(|(a, m)| !*a && m.abs() <= DEGENERACY_TOL)
}

/// Whether the Hessian of `G` restricted to the active coordinates is
/// singular, in which case the optimum has flat directions.
fn singular_on_active_set(spec: &GameSpec, x: &[f64], active: &[bool]) -> bool {
    let idx: Vec<usize> = (0..x.len()).filter(|j| active[*j]).collect();
    if idx.len() < 2 {
        return false;
    }
    let h = spec.hessian_social_at(x);
    let m = DMatrix::from_fn(idx.len(), idx.len(), |r, c| h[idx[r]][idx[c]]);
    let eig = SymmetricEigen::new(m).eigenvalues;
    let max = eig.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let min = eig.iter().fold(f64::INFINITY, |a, v| a.min(*v));
    min <= 1e-10 * max
}
