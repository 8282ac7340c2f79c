//! A damped message-exchange dynamic.
//!
//! This is a heuristic. No convergence to an equilibrium of the mechanism
//! is claimed; the run reports whether its last profile happens to pass
//! [`verify_mechanism_ne`].
//!
//! Each round visits the players in order. Player `i` takes one scaled
//! gradient step on its own utility with respect to its proposal,
//! projected so the allocation stays nonnegative, then raises its price on
//! every coordinate where its proposal still differs from player `i+1`'s.

use serde::Serialize;

use super::{outcome, verify_mechanism_ne, MechanismCertificate, MessageProfile, Outcome};
use crate::error::MechanismError;
use crate::game::GameSpec;
use crate::solvers::SolverConfig;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DynamicsRecord {
    pub round: usize,
    pub profile: MessageProfile,
    pub outcome: Outcome,
    pub social_cost: f64,
    /// Largest change of any message entry during the round.
    pub movement: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DynamicsRun {
    /// One record per round, holding the state after that round.
    pub trajectory: Vec<DynamicsRecord>,
    pub converged: bool,
    pub rounds: usize,
    pub certificate: MechanismCertificate,
}

impl DynamicsRun {
    pub fn final_record(&self) -> &DynamicsRecord {
        self.trajectory
            .last()
            .expect("at least one round is always run")
    }
}

/// Runs the dynamic from `initial` with step `cfg.damping` for at most
/// `cfg.max_rounds` rounds, stopping once a round moves no message entry by
/// more than `cfg.dynamics_tol`.
pub fn run_dynamics(
    spec: &GameSpec,
    initial: &MessageProfile,
    cfg: &SolverConfig,
) -> Result<DynamicsRun, MechanismError> {
    cfg.validate()?;
    let mut profile = initial.clone().for_game(spec)?;
    let n = profile.n();
    let nf = n as f64;
    let step = cfg.damping;
    let mut trajectory = Vec::new();
    let mut converged = false;

    for round in 1..=cfg.max_rounds {
        let mut movement = 0.0f64;
        for i in 0..n {
            let sum = profile.proposal_sum();
            let allocation: Vec<f64> = sum.iter().map(|s| s / nf).collect();
            let grad_g = spec.grad_cost_at(i, &allocation);
            let next = profile.at(i + 1).proposal.clone();
            let (up, down) = (
                profile.at(i + 1).prices.clone(),
                profile.at(i + 2).prices.clone(),
            );
            let msg = &mut profile.messages_mut()[i];
            for k in 0..n {
                let pi = msg.prices[k];
                let gap = msg.proposal[k] - next[k];
                // d u_i / d x_ik
                let ascent = -(grad_g[k] + up[k] - down[k]) / nf - 2.0 * pi * gap;
                let others = sum[k] - msg.proposal[k];
                let moved = (msg.proposal[k] + step * ascent / (1.0 + 2.0 * pi)).max(-others);
                movement = movement.max((moved - msg.proposal[k]).abs());
                msg.proposal[k] = moved;
            }
            for ((p, v), w) in msg.prices.iter_mut().zip(&msg.proposal).zip(&next) {
                let rise = step * (v - w).abs();
                movement = movement.max(rise);
                *p += rise;
            }
        }
        let out = outcome(&profile);
        let social_cost = spec.social_cost_at(&out.allocation);
        trajectory.push(DynamicsRecord {
            round,
            profile: profile.clone(),
            outcome: out,
            social_cost,
            movement,
        });
        if movement <= cfg.dynamics_tol {
            converged = true;
            break;
        }
    }

    let certificate = verify_mechanism_ne(spec, &profile, cfg)?;
    Ok(DynamicsRun {
        rounds: trajectory.len(),
        trajectory,
        converged,
        certificate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pesim::{construct_equilibrium_messages, lindahl_prices};

    fn s1() -> GameSpec {
        GameSpec::total_effort(vec![0.5, 0.8, 1.0, 1.2, 1.5], 1.0, 1.0).unwrap()
    }

    #[test]
    fn equilibrium_is_a_fixed_point() {
        let x = [10f64.ln(), 0.0, 0.0, 0.0, 0.0];
        let cfg = SolverConfig::default();
        let sys = lindahl_prices(&s1(), &x, &cfg).unwrap();
        let m = construct_equilibrium_messages(&s1(), &x, &sys)
            .unwrap()
            .profile;
        let run = run_dynamics(&s1(), &m, &cfg).unwrap();
        assert!(run.converged);
        assert_eq!(run.rounds, 1);
        assert!(run.final_record().movement <= 1e-9);
        assert!(run.certificate.certified);
    }

    #[test]
    fn zero_step_stands_still() {
        let cfg = SolverConfig {
            damping: 0.0,
            ..Default::default()
        };
        let m = MessageProfile::random(5, 42).unwrap();
        let run = run_dynamics(&s1(), &m, &cfg).unwrap();
        assert!(run.converged);
        assert_eq!(run.rounds, 1);
        assert_eq!(run.final_record().profile, m);
    }

    #[test]
    fn trajectory_is_budget_balanced_and_admissible() {
        let cfg = SolverConfig {
            max_rounds: 500,
            dynamics_tol: 0.0,
            ..Default::default()
        };
        let m = MessageProfile::random(5, 42).unwrap();
        let run = run_dynamics(&s1(), &m, &cfg).unwrap();
        assert_eq!(run.rounds, 500);
        for rec in &run.trajectory {
            assert!(rec.outcome.taxes.total().abs() <= 1e-9);
            assert!(rec.outcome.allocation.iter().all(|v| *v >= -1e-12));
            assert!(rec.social_cost.is_finite());
        }
    }
}
