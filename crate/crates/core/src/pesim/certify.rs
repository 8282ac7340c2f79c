use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::search::{coordinate_descent, local_grid};
use super::{dot, penalty, MessageProfile};
use crate::error::MechanismError;
use crate::game::GameSpec;
use crate::solvers::SolverConfig;

/// Outcome of a unilateral-deviation search over a message profile.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MechanismCertificate {
    /// Largest utility gain found for any player, never negative.
    pub max_gain: f64,
    pub per_player: Vec<f64>,
    pub certified: bool,
    /// The profile's own allocation has negative entries.
    pub negative_allocation: bool,
    /// Random deviations moved back into the admissible set `x_hat >= 0`.
    pub clamped_samples: usize,
}

/// Player `i`'s view of the profile with everyone else's message fixed.
struct Deviator<'a> {
    spec: &'a GameSpec,
    profile: &'a MessageProfile,
    i: usize,
    others: Vec<f64>,
    balancing: f64,
}

impl<'a> Deviator<'a> {
    fn new(spec: &'a GameSpec, profile: &'a MessageProfile, i: usize) -> Self {
        let mut others = profile.proposal_sum();
        for (o, v) in others.iter_mut().zip(&profile.at(i).proposal) {
            *o -= v;
        }
        Self {
            spec,
            profile,
            i,
            others,
            balancing: -profile.discrepancy_penalty(i + 1),
        }
    }

    fn n(&self) -> f64 {
        self.profile.n() as f64
    }

    /// Utility of sending `(prices, proposal)` instead of the current message.
    fn utility(&self, prices: &[f64], proposal: &[f64]) -> f64 {
        let allocation: Vec<f64> = self
            .others
            .iter()
            .zip(proposal)
            .map(|(o, v)| (o + v) / self.n())
            .collect();
        let price = dot(&self.profile.at(self.i + 1).prices, &allocation)
            - dot(&self.profile.at(self.i + 2).prices, &allocation);
        let own = penalty(prices, proposal, &self.profile.at(self.i + 1).proposal);
        -self.spec.cost_at(self.i, &allocation) - (price + own + self.balancing)
    }

    /// Utility of steering the allocation to `target` with zero own prices.
    fn utility_of_allocation(&self, target: &[f64]) -> f64 {
        let proposal = self.proposal_for(target);
        self.utility(&vec![0.0; target.len()], &proposal)
    }

    fn proposal_for(&self, target: &[f64]) -> Vec<f64> {
        target
            .iter()
            .zip(&self.others)
            .map(|(t, o)| self.n() * t - o)
            .collect()
    }

    /// Lindahl price the player currently faces, `pi_{i+1} - pi_{i+2}`.
    fn faced_price(&self) -> Vec<f64> {
        self.profile
            .at(self.i + 1)
            .prices
            .iter()
            .zip(&self.profile.at(self.i + 2).prices)
            .map(|(a, b)| a - b)
            .collect()
    }
}

/// Searches for profitable unilateral deviations from `profile`.
///
/// Dropping one's own prices to zero never hurts a deviator, and with zero
/// prices the proposal can steer the allocation anywhere. For each player
/// the search therefore minimizes `g_i(x) + l_i' x` over admissible
/// allocations `x >= 0` (grid around the current allocation, then
/// coordinate descent), and on top of that tries `cfg.sample_count` seeded
/// random messages. The profile is certified when no gain exceeds
/// `cfg.mechanism_tol`.
pub fn verify_mechanism_ne(
    spec: &GameSpec,
    profile: &MessageProfile,
    cfg: &SolverConfig,
) -> Result<MechanismCertificate, MechanismError> {
    cfg.validate()?;
    let profile = profile.clone().for_game(spec)?;
    let n = profile.n();
    let allocation: Vec<f64> = profile
        .proposal_sum()
        .iter()
        .map(|s| s / n as f64)
        .collect();
    let scale = allocation.iter().fold(1.0f64, |a, v| a.max(v.abs()));
    let upper = 2.0 * scale + 10.0 * spec.strategy_bound(cfg.bound_eps)?;
    let max_price = profile
        .messages()
        .iter()
        .flat_map(|m| m.prices.iter())
        .fold(0.0f64, |a, p| a.max(*p));

    let mut per_player = Vec::with_capacity(n);
    let mut clamped_samples = 0;
    for i in 0..n {
        let dev = Deviator::new(spec, &profile, i);
        let current = dev.utility(&profile.at(i).prices, &profile.at(i).proposal);
        let mut best = current;

        // analytic family: zero own prices, allocation chosen freely
        let center: Vec<f64> = allocation.iter().map(|v| v.max(0.0)).collect();
        let mut best_target = center.clone();
        let mut best_target_u = dev.utility_of_allocation(&center);
        for p in local_grid(&center, 1e-2, 50, 0) {
            let u = dev.utility_of_allocation(&p);
            if u > best_target_u {
                best_target_u = u;
                best_target = p;
            }
        }
        let faced = dev.faced_price();
        for start in [center.clone(), best_target, vec![0.0; n]] {
            let (x, _) = coordinate_descent(spec, i, &faced, &start, upper, 500);
            best_target_u = best_target_u.max(dev.utility_of_allocation(&x));
        }
        best = best.max(best_target_u);

        // seeded random messages
        let mut rng = ChaCha8Rng::seed_from_u64(
            cfg.seed ^ (0x9e37_79b9_7f4a_7c15u64.wrapping_mul(i as u64 + 1)),
        );
        for s in 0..cfg.sample_count {
            let prices: Vec<f64> = if s % 2 == 0 {
                vec![0.0; n]
            } else {
                (0..n)
                    .map(|_| rng.random_range(0.0..=2.0 * max_price + 1.0))
                    .collect()
            };
            let radius = [0.01, 0.1, 1.0][s % 3] * (1.0 + scale) * n as f64;
            let mut clamped = false;
            let proposal: Vec<f64> = profile
                .at(i)
                .proposal
                .iter()
                .zip(&dev.others)
                .map(|(v, o)| {
                    let cand = v + rng.random_range(-radius..=radius);
                    if cand + o < 0.0 {
                        clamped = true;
                        -o
                    } else {
                        cand
                    }
                })
                .collect();
            clamped_samples += usize::from(clamped);
            best = best.max(dev.utility(&prices, &proposal));
        }
        per_player.push((best - current).max(0.0));
    }

    let max_gain = per_player.iter().copied().fold(0.0, f64::max);
    Ok(MechanismCertificate {
        certified: max_gain <= cfg.mechanism_tol,
        max_gain,
        per_player,
        negative_allocation: allocation.iter().any(|v| *v < 0.0),
        clamped_samples,
    })
}
