//! Seeded scenario generators shared by the integration tests.
#![allow(dead_code)]

use idsgame::game::{GameSpec, RiskModel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn s1() -> GameSpec {
    GameSpec::total_effort(vec![0.5, 0.8, 1.0, 1.2, 1.5], 1.0, 1.0).unwrap()
}

pub fn s2() -> GameSpec {
    GameSpec::total_effort(vec![0.2, 3.0, 3.5, 4.0, 4.5], 1.0, 1.0).unwrap()
}

pub fn total_effort(rng: &mut ChaCha8Rng, n: usize) -> GameSpec {
    let costs = (0..n).map(|_| rng.random_range(0.05..3.0)).collect();
    let alpha = rng.random_range(0.5..3.0);
    let beta = rng.random_range(0.5..2.0);
    GameSpec::total_effort(costs, alpha, beta).unwrap()
}

/// Weighted family whose own weight dominates, so most players have a
/// reason to invest.
pub fn weighted(rng: &mut ChaCha8Rng, n: usize) -> GameSpec {
    let costs = (0..n).map(|_| rng.random_range(0.05..1.5)).collect();
    let alphas = (0..n).map(|_| rng.random_range(0.5..2.0)).collect();
    let weights = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        rng.random_range(0.8..1.5)
                    } else {
                        rng.random_range(0.05..0.6)
                    }
                })
                .collect()
        })
        .collect();
    GameSpec::new(costs, RiskModel::WeightedEffortExp { alphas, weights }).unwrap()
}

pub fn any_family(rng: &mut ChaCha8Rng, n: usize) -> GameSpec {
    if rng.random_bool(0.5) {
        total_effort(rng, n)
    } else {
        weighted(rng, n)
    }
}

pub fn point(rng: &mut ChaCha8Rng, n: usize, hi: f64) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(0.0..hi)).collect()
}

pub mod strategies {
    use idsgame::game::{GameSpec, RiskModel};
    use proptest::prelude::*;

    pub fn total_effort(n: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = GameSpec> {
        n.prop_flat_map(|n| {
            (
                proptest::collection::vec(0.05f64..3.0, n),
                0.5f64..3.0,
                0.5f64..2.0,
            )
        })
        .prop_map(|(costs, alpha, beta)| GameSpec::total_effort(costs, alpha, beta).unwrap())
    }

    pub fn weighted(n: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = GameSpec> {
        n.prop_flat_map(|n| {
            (
                proptest::collection::vec(0.05f64..1.5, n),
                proptest::collection::vec(0.5f64..2.0, n),
                proptest::collection::vec(proptest::collection::vec(0.05f64..1.5, n), n),
            )
        })
        .prop_map(|(costs, alphas, weights)| {
            GameSpec::new(costs, RiskModel::WeightedEffortExp { alphas, weights }).unwrap()
        })
    }

    /// Weighted spec whose off-diagonal weights sum to less than the
    /// diagonal in every row. Best-response play contracts on these.
    pub fn dominant_weighted(
        n: std::ops::RangeInclusive<usize>,
    ) -> impl Strategy<Value = GameSpec> {
        n.prop_flat_map(|n| {
            (
                proptest::collection::vec(0.05f64..1.5, n),
                proptest::collection::vec(0.5f64..2.0, n),
                proptest::collection::vec(0.5f64..1.5, n),
                proptest::collection::vec(proptest::collection::vec(0.05f64..1.0, n), n),
            )
        })
        .prop_map(|(costs, alphas, diag, raw)| {
            let weights = raw
                .into_iter()
                .enumerate()
                .map(|(i, row)| {
                    let off: f64 = row
                        .iter()
                        .enumerate()
                        .filter(|(j, _)| *j != i)
                        .map(|(_, w)| w)
                        .sum();
                    let scale = if off > 0.0 { 0.9 * diag[i] / off } else { 0.0 };
                    row.iter()
                        .enumerate()
                        .map(|(j, w)| if j == i { diag[i] } else { w * scale })
                        .collect()
                })
                .collect();
            GameSpec::new(costs, RiskModel::WeightedEffortExp { alphas, weights }).unwrap()
        })
    }

    pub fn any_family(n: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = GameSpec> {
        prop_oneof![total_effort(n.clone()), weighted(n)]
    }

    /// A spec together with a nonnegative point of matching size.
    pub fn with_point(
        spec: impl Strategy<Value = GameSpec>,
        hi: f64,
    ) -> impl Strategy<Value = (GameSpec, Vec<f64>)> {
        spec.prop_flat_map(move |s| {
            let n = s.n();
            (Just(s), proptest::collection::vec(0.0..hi, n))
        })
    }

    /// Total-effort spec with costs sorted ascending.
    pub fn sorted_total_effort(
        n: std::ops::RangeInclusive<usize>,
    ) -> impl Strategy<Value = GameSpec> {
        n.prop_flat_map(|n| {
            (
                proptest::collection::vec(0.05f64..5.0, n),
                0.5f64..3.0,
                0.5f64..2.0,
            )
        })
        .prop_map(|(mut costs, alpha, beta)| {
            costs.sort_by(f64::total_cmp);
            GameSpec::total_effort(costs, alpha, beta).unwrap()
        })
    }
}
