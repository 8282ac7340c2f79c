//! The message-exchange mechanism that implements the social optimum.
//!
//! Every player `i` reports a message `m_i = (pi_i, x_i)`: a nonnegative
//! price vector and a proposed investment profile. The regulator averages
//! the proposals,
//!
//! ```text
//! x_hat = (1/n) sum_i x_i
//! ```
//!
//! and charges each player
//!
//! ```text
//! t_i = (pi_{i+1} - pi_{i+2})' x_hat
//!     + (x_i - x_{i+1})' diag(pi_i) (x_i - x_{i+1})
//!     - (x_{i+1} - x_{i+2})' diag(pi_{i+1}) (x_{i+1} - x_{i+2})
//! ```
//!
//! with indices taken cyclically. Summed over players the price terms and
//! the quadratic terms telescope, so the taxes balance for every message
//! profile, not only at equilibrium.
//!
//! Player utilities under the mechanism are `-g_i(x_hat) - t_i`. Risk
//! functions are only meaningful for nonnegative investment, so deviations
//! that would push the averaged allocation below zero are treated as
//! inadmissible by the certification and the dynamic.

mod certify;
mod dynamics;
mod lindahl;
mod search;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::MechanismError;
use crate::game::{GameSpec, TaxProfile};

pub use certify::{verify_mechanism_ne, MechanismCertificate};
pub use dynamics::{run_dynamics, DynamicsRecord, DynamicsRun};
pub use lindahl::{
    construct_equilibrium_messages, externality_sign_check, lindahl_optimality_gap, lindahl_prices,
    EquilibriumConstruction, ExternalityReport, ExternalityVerdict, LindahlSystem,
};

/// Smallest player count the mechanism accepts. With two players the
/// cyclic indices make `pi_{i+2} = pi_i`, so a player's own price report
/// would enter its own price term.
pub const MIN_PLAYERS: usize = 3;

/// One player's report: a price vector and a proposed investment profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Message {
    pub prices: Vec<f64>,
    pub proposal: Vec<f64>,
}

/// A full, validated message profile; player indices wrap around.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawProfile", into = "RawProfile")]
pub struct MessageProfile {
    messages: Vec<Message>,
}

#[derive(Serialize, Deserialize)]
struct RawProfile {
    messages: Vec<Message>,
}

impl TryFrom<RawProfile> for MessageProfile {
    type Error = MechanismError;

    fn try_from(raw: RawProfile) -> Result<Self, Self::Error> {
        MessageProfile::new(raw.messages)
    }
}

impl From<MessageProfile> for RawProfile {
    fn from(p: MessageProfile) -> Self {
        RawProfile {
            messages: p.messages,
        }
    }
}

impl MessageProfile {
    pub fn new(messages: Vec<Message>) -> Result<Self, MechanismError> {
        let n = messages.len();
        if n < MIN_PLAYERS {
            return Err(MechanismError::TooFewPlayers { n });
        }
        for (player, m) in messages.iter().enumerate() {
            for (what, v) in [("prices", &m.prices), ("proposal", &m.proposal)] {
                if v.len() != n {
                    return Err(MechanismError::MessageDimension {
                        player,
                        what,
                        expected: n,
                        got: v.len(),
                    });
                }
                if v.iter().any(|e| !e.is_finite()) {
                    return Err(MechanismError::NonFiniteMessage { player });
                }
            }
            if let Some((index, value)) = m.prices.iter().enumerate().find(|(_, p)| **p < 0.0) {
                return Err(MechanismError::NegativePrice {
                    player,
                    index,
                    value: *value,
                });
            }
        }
        Ok(Self { messages })
    }

    /// Checks that the profile belongs to a game with `spec.n()` players.
    pub fn for_game(self, spec: &GameSpec) -> Result<Self, MechanismError> {
        if self.n() != spec.n() {
            return Err(MechanismError::ProfileSize {
                expected: spec.n(),
                got: self.n(),
            });
        }
        Ok(self)
    }

    /// Every player sends the same message.
    pub fn uniform(n: usize, prices: Vec<f64>, proposal: Vec<f64>) -> Result<Self, MechanismError> {
        Self::new(vec![Message { prices, proposal }; n])
    }

    /// Prices uniform in `[0, 1)`, proposals uniform in `[0, 2)`.
    pub fn random(n: usize, seed: u64) -> Result<Self, MechanismError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let messages = (0..n)
            .map(|_| Message {
                prices: (0..n).map(|_| rng.random_range(0.0..1.0)).collect(),
                proposal: (0..n).map(|_| rng.random_range(0.0..2.0)).collect(),
            })
            .collect();
        Self::new(messages)
    }

    pub fn n(&self) -> usize {
        self.messages.len()
    }

    pub fn messages(&self) -> &[Message] {
        &self.messages
    }

    /// Message of player `i`, wrapping around past `n`.
    pub fn at(&self, i: usize) -> &Message {
        &self.messages[i % self.n()]
    }

    pub(crate) fn messages_mut(&mut self) -> &mut [Message] {
        &mut self.messages
    }

    /// Scales every price vector by `factor`.
    pub fn scale_prices(&self, factor: f64) -> Result<Self, MechanismError> {
        let messages = self
            .messages
            .iter()
            .map(|m| Message {
                prices: m.prices.iter().map(|p| p * factor).collect(),
                proposal: m.proposal.clone(),
            })
            .collect();
        Self::new(messages)
    }

    /// Sum of all proposals; dividing by `n` gives the allocation.
    pub(crate) fn proposal_sum(&self) -> Vec<f64> {
        let mut sum = vec![0.0; self.n()];
        for m in &self.messages {
            for (s, v) in sum.iter_mut().zip(&m.proposal) {
                *s += v;
            }
        }
        sum
    }

    /// `(x_i - x_{i+1})' diag(pi_i) (x_i - x_{i+1})`.
    pub(crate) fn discrepancy_penalty(&self, i: usize) -> f64 {
        penalty(
            &self.at(i).prices,
            &self.at(i).proposal,
            &self.at(i + 1).proposal,
        )
    }
}

pub(crate) fn penalty(prices: &[f64], own: &[f64], next: &[f64]) -> f64 {
    prices
        .iter()
        .zip(own.iter().zip(next))
        .map(|(p, (a, b))| p * (a - b) * (a - b))
        .sum()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// The three components of one player's tax.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TaxTerms {
    /// `(pi_{i+1} - pi_{i+2})' x_hat`.
    pub price: f64,
    /// Penalty on the gap between this player's proposal and the next one's.
    pub own_penalty: f64,
    /// Minus the next player's penalty; independent of this player's message.
    pub balancing: f64,
}

impl TaxTerms {
    pub fn total(&self) -> f64 {
        self.price + self.own_penalty + self.balancing
    }
}

/// Allocation and taxes produced by the outcome function.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Outcome {
    pub allocation: Vec<f64>,
    pub taxes: TaxProfile,
    pub terms: Vec<TaxTerms>,
}

impl Outcome {
    /// Whether the averaged proposals leave the nonnegative orthant.
    pub fn negative_allocation(&self) -> bool {
        self.allocation.iter().any(|v| *v < 0.0)
    }
}

/// Maps a message profile to the allocation and the tax profile.
pub fn outcome(profile: &MessageProfile) -> Outcome {
    let n = profile.n();
    let inv_n = 1.0 / n as f64;
    let allocation: Vec<f64> = profile.proposal_sum().iter().map(|s| s * inv_n).collect();
    let price_dots: Vec<f64> = profile
        .messages()
        .iter()
        .map(|m| dot(&m.prices, &allocation))
        .collect();
    let penalties: Vec<f64> = (0..n).map(|i| profile.discrepancy_penalty(i)).collect();
    let terms: Vec<TaxTerms> = (0..n)
        .map(|i| TaxTerms {
            price: price_dots[(i + 1) % n] - price_dots[(i + 2) % n],
            own_penalty: penalties[i],
            balancing: -penalties[(i + 1) % n],
        })
        .collect();
    let taxes = TaxProfile::new(terms.iter().map(TaxTerms::total).collect());
    Outcome {
        allocation,
        taxes,
        terms,
    }
}

/// Utility `-g_i(x_hat) - t_i` of player `i` at the outcome of `profile`.
/// Uses the analytic extension of the risk function when the allocation
/// has negative entries.
pub fn mechanism_utility(
    spec: &GameSpec,
    profile: &MessageProfile,
    i: usize,
) -> Result<f64, MechanismError> {
    let profile = profile.clone().for_game(spec)?;
    let out = outcome(&profile);
    Ok(-spec.cost_at(i, &out.allocation) - out.taxes[i])
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn identical_messages_give_zero_taxes() {
        let p =
            MessageProfile::uniform(4, vec![0.3, 1.0, 0.0, 2.0], vec![1.0, 0.5, 0.0, 2.0]).unwrap();
        let out = outcome(&p);
        assert_eq!(out.allocation, vec![1.0, 0.5, 0.0, 2.0]);
        assert!(out.taxes.iter().all(|t| *t == 0.0));
    }

    #[test]
    fn hand_computed_three_player_taxes() {
        let p = MessageProfile::new(vec![
            Message {
                prices: vec![1.0, 0.0, 2.0],
                proposal: vec![3.0, 0.0, 0.0],
            },
            Message {
                prices: vec![0.0, 1.0, 0.0],
                proposal: vec![0.0, 3.0, 0.0],
            },
            Message {
                prices: vec![2.0, 2.0, 2.0],
                proposal: vec![0.0, 0.0, 3.0],
            },
        ])
        .unwrap();
        let out = outcome(&p);
        assert_eq!(out.allocation, vec![1.0, 1.0, 1.0]);
        // price dots: 3, 1, 6; penalties: 9, 9, 36
        assert_abs_diff_eq!(out.taxes[0], (1.0 - 6.0) + 9.0 - 9.0, epsilon = 1e-14);
        assert_abs_diff_eq!(out.taxes[1], (6.0 - 3.0) + 9.0 - 36.0, epsilon = 1e-14);
        assert_abs_diff_eq!(out.taxes[2], (3.0 - 1.0) + 36.0 - 9.0, epsilon = 1e-14);
        assert_abs_diff_eq!(out.taxes.total(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn rejects_invalid_profiles() {
        let two = MessageProfile::uniform(2, vec![0.0; 2], vec![0.0; 2]);
        assert!(matches!(two, Err(MechanismError::TooFewPlayers { n: 2 })));
        let neg = MessageProfile::uniform(3, vec![0.0, -1.0, 0.0], vec![0.0; 3]);
        assert!(matches!(
            neg,
            Err(MechanismError::NegativePrice { index: 1, .. })
        ));
        let short = MessageProfile::uniform(3, vec![0.0; 3], vec![0.0; 2]);
        assert!(matches!(
            short,
            Err(MechanismError::MessageDimension { .. })
        ));
        let spec = GameSpec::total_effort(vec![1.0; 4], 1.0, 1.0).unwrap();
        let p = MessageProfile::uniform(3, vec![0.0; 3], vec![0.0; 3]).unwrap();
        assert!(matches!(
            p.for_game(&spec),
            Err(MechanismError::ProfileSize { .. })
        ));
    }

    #[test]
    fn negative_proposals_pass_through() {
        let p = MessageProfile::new(vec![
            Message {
                prices: vec![0.0; 3],
                proposal: vec![-3.0, 0.0, 0.0],
            },
            Message {
                prices: vec![0.0; 3],
                proposal: vec![0.0; 3],
            },
            Message {
                prices: vec![0.0; 3],
                proposal: vec![0.0; 3],
            },
        ])
        .unwrap();
        let out = outcome(&p);
        assert_eq!(out.allocation[0], -1.0);
        assert!(out.negative_allocation());
    }
}
