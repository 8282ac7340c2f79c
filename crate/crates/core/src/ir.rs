//! Participation versus opting out in the total-effort game.
//!
//! Player 0 (the cheapest) considers staying out of the mechanism. The
//! remaining `n - 1` players then coordinate on their own social optimum
//! given the loner's effort, and the loner best-responds to that, knowing
//! the group will react. With `f = alpha exp(-beta S)` the group's
//! cheapest member tops the total up to
//!
//! ```text
//! T = max(0, ln((n - 1) alpha beta / c_2) / beta)
//! ```
//!
//! so the loner's cost is `alpha exp(-beta T) + c_1 x` below `T` and
//! `alpha exp(-beta x) + c_1 x` above it. The loner pays no tax.
//!
//! Inside the mechanism the loner gets the social optimum `x*` and pays its
//! Lindahl tax `t_1 = l_1' x*`. The gap `u_in - u_out` is negative when
//! opting out pays.

use serde::Serialize;

use crate::error::IrError;
use crate::game::{GameSpec, RiskModel};
use crate::pesim::lindahl_prices;
use crate::solvers::{closed_form, SolverConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    /// The loner invests nothing and the group covers `T`.
    FreeRide,
    /// The loner invests past `T` and the group stops investing.
    AllEffort,
    /// Nobody invests.
    MixedCorner,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::FreeRide => "free-ride",
            Regime::AllEffort => "all-effort",
            Regime::MixedCorner => "mixed-corner",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SequentialOutcome {
    pub loner_effort: f64,
    /// Effort of the cheapest participating player.
    pub investor_effort: f64,
    pub threshold: f64,
    pub regime: Regime,
    /// Loner utility when opting out.
    pub u_out: f64,
    /// Loner utility inside the mechanism, when computed.
    pub u_in: Option<f64>,
    pub gap: Option<f64>,
    /// Loner's Lindahl tax at the social optimum.
    pub loner_tax: Option<f64>,
    pub social_optimum: Option<Vec<f64>>,
    /// Every participant other than the investor is at a corner of the
    /// group problem, i.e. its marginal group cost is nonnegative.
    pub others_inactive: bool,
    /// The literal gap formula, when `alpha = beta = 1`.
    pub formula_gap: Option<f64>,
    /// The regime in which the formula's derivation holds: all-effort with
    /// `c_1 < 1` and `alpha = beta = 1`.
    pub formula_applies: bool,
}

impl SequentialOutcome {
    pub fn total_effort(&self) -> f64 {
        self.loner_effort + self.investor_effort
    }
}

fn total_effort_params(spec: &GameSpec) -> Result<(f64, f64), IrError> {
    match spec.risk_model() {
        RiskModel::TotalEffortExp { alpha, beta } => Ok((*alpha, *beta)),
        other => Err(IrError::WrongFamily {
            family: other.family_name(),
        }),
    }
}

fn check(spec: &GameSpec) -> Result<(f64, f64), IrError> {
    let params = total_effort_params(spec)?;
    if spec.n() < 2 {
        return Err(IrError::TooFewPlayers { n: spec.n() });
    }
    for i in 1..spec.n() {
        if spec.cost(i) < spec.cost(i - 1) {
            return Err(IrError::UnsortedCosts {
                index: i,
                prev: i - 1,
            });
        }
    }
    Ok(params)
}

/// Cost to the loner of effort `x`, given the group's reaction.
pub fn loner_cost(spec: &GameSpec, x: f64) -> Result<f64, IrError> {
    let (alpha, beta) = check(spec)?;
    let t = threshold(spec.n(), alpha, beta, spec.cost(1));
    Ok(alpha * (-beta * x.max(t)).exp() + spec.cost(0) * x)
}

fn threshold(n: usize, alpha: f64, beta: f64, c2: f64) -> f64 {
    (((n - 1) as f64 * alpha * beta / c2).ln() / beta).max(0.0)
}

/// Solves the loner's sequential game. The Lindahl side is left empty;
/// see [`ir_gap_numeric`].
pub fn sequential_equilibrium(spec: &GameSpec) -> Result<SequentialOutcome, IrError> {
    let (alpha, beta) = check(spec)?;
    let n = spec.n();
    let (c1, c2) = (spec.cost(0), spec.cost(1));
    let t = threshold(n, alpha, beta, c2);

    // best point of each piece; the lower piece is flat in risk so 0 wins
    let low = alpha * (-beta * t).exp();
    let solo = ((alpha * beta / c1).ln() / beta).max(t);
    let high = alpha * (-beta * solo).exp() + c1 * solo;

    let (loner, investor, regime) = if low <= high {
        if t > 0.0 {
            (0.0, t, Regime::FreeRide)
        } else {
            (0.0, 0.0, Regime::MixedCorner)
        }
    } else {
        (solo, 0.0, Regime::AllEffort)
    };
    let total = loner + investor;
    let u_out = -(alpha * (-beta * total).exp() + c1 * loner);

    let group_marginal = -((n - 1) as f64) * alpha * beta * (-beta * total).exp();
    let others_inactive = (2..n).all(|j| group_marginal + spec.cost(j) >= -1e-12);

    let unit = alpha == 1.0 && beta == 1.0;
    Ok(SequentialOutcome {
        loner_effort: loner,
        investor_effort: investor,
        threshold: t,
        regime,
        u_out,
        u_in: None,
        gap: None,
        loner_tax: None,
        social_optimum: None,
        others_inactive,
        formula_gap: unit.then(|| ir_gap_formula(n, c1)),
        formula_applies: unit && regime == Regime::AllEffort && c1 < 1.0,
    })
}

/// `(c_1 / n) ((n - 1)(1 - ln c_1) - ln n)`, the participation gap of the
/// unit game in the all-effort regime, evaluated literally for any `c_1`.
pub fn ir_gap_formula(n: usize, c1: f64) -> f64 {
    let nf = n as f64;
    c1 / nf * ((nf - 1.0) * (1.0 - c1.ln()) - nf.ln())
}

/// Sequential game plus the loner's utility inside the mechanism, taxed at
/// its Lindahl price.
pub fn ir_gap_numeric(spec: &GameSpec, cfg: &SolverConfig) -> Result<SequentialOutcome, IrError> {
    let mut out = sequential_equilibrium(spec)?;
    let x_star = closed_form::social_optimum(spec).expect("total-effort family checked");
    let lindahl = lindahl_prices(spec, &x_star, cfg)?;
    let tax: f64 = lindahl.prices[0]
        .iter()
        .zip(&x_star)
        .map(|(l, x)| l * x)
        .sum();
    let u_in = -spec.cost_at(0, &x_star) - tax;
    out.u_in = Some(u_in);
    out.gap = Some(u_in - out.u_out);
    out.loner_tax = Some(tax);
    out.social_optimum = Some(x_star);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn spec(costs: &[f64]) -> GameSpec {
        GameSpec::total_effort(costs.to_vec(), 1.0, 1.0).unwrap()
    }

    #[test]
    fn s1_free_rides() {
        let out =
            ir_gap_numeric(&spec(&[0.5, 0.8, 1.0, 1.2, 1.5]), &SolverConfig::default()).unwrap();
        assert_eq!(out.regime, Regime::FreeRide);
        assert_abs_diff_eq!(out.threshold, 5f64.ln(), epsilon = 1e-12);
        assert_eq!(out.loner_effort, 0.0);
        assert_abs_diff_eq!(out.investor_effort, 1.6094379124341003, epsilon = 1e-12);
        assert_abs_diff_eq!(out.u_out, -0.2, epsilon = 1e-12);
        assert_abs_diff_eq!(out.u_in.unwrap(), -0.330258509299405, epsilon = 1e-12);
        assert_abs_diff_eq!(out.gap.unwrap(), -0.130258509299405, epsilon = 1e-12);
        assert!(out.others_inactive);
        assert!(!out.formula_applies);
    }

    #[test]
    fn s2_exerts_all_effort() {
        let out =
            ir_gap_numeric(&spec(&[0.2, 3.0, 3.5, 4.0, 4.5]), &SolverConfig::default()).unwrap();
        assert_eq!(out.regime, Regime::AllEffort);
        assert_abs_diff_eq!(out.threshold, (4.0f64 / 3.0).ln(), epsilon = 1e-12);
        assert_abs_diff_eq!(out.loner_effort, 5f64.ln(), epsilon = 1e-12);
        assert_eq!(out.investor_effort, 0.0);
        assert_abs_diff_eq!(out.u_out, -0.5218875824868201, epsilon = 1e-12);
        assert_abs_diff_eq!(out.u_in.unwrap(), -0.16875503299472803, epsilon = 1e-12);
        assert_abs_diff_eq!(out.gap.unwrap(), 0.3531325494920921, epsilon = 1e-12);
        assert!(out.formula_applies);
        assert_abs_diff_eq!(out.formula_gap.unwrap(), out.gap.unwrap(), epsilon = 1e-12);
    }

    #[test]
    fn two_players_play_solo() {
        let out = ir_gap_numeric(&spec(&[0.5, 2.5]), &SolverConfig::default()).unwrap();
        assert_eq!(out.threshold, 0.0);
        assert_eq!(out.regime, Regime::AllEffort);
        assert_abs_diff_eq!(out.loner_effort, 2f64.ln(), epsilon = 1e-12);
        assert_abs_diff_eq!(out.gap.unwrap(), 0.25, epsilon = 1e-12);
    }

    #[test]
    fn tax_is_the_reward_share() {
        let s = spec(&[0.2, 3.0, 3.5, 4.0, 4.5]);
        let out = ir_gap_numeric(&s, &SolverConfig::default()).unwrap();
        let x1 = out.social_optimum.as_ref().unwrap()[0];
        assert_abs_diff_eq!(
            out.loner_tax.unwrap(),
            -(1.0 - 0.2) * 0.2 * x1,
            epsilon = 1e-12
        );
    }

    #[test]
    fn nobody_invests_when_effort_is_dear() {
        let out = sequential_equilibrium(&spec(&[2.0, 5.0, 6.0])).unwrap();
        assert_eq!(out.regime, Regime::MixedCorner);
        assert_eq!(out.total_effort(), 0.0);
        assert_abs_diff_eq!(out.u_out, -1.0);
    }

    #[test]
    fn formula_values() {
        let e = std::f64::consts::E;
        assert_abs_diff_eq!(ir_gap_formula(5, e), -0.8749811662805349, epsilon = 1e-12);
        assert_abs_diff_eq!(ir_gap_formula(5, 0.2), 0.3531325494920921, epsilon = 1e-12);
        let root = (1.0 - 5f64.ln() / 4.0).exp();
        assert_abs_diff_eq!(ir_gap_formula(5, root), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn general_parameters() {
        // alpha = 2, beta = 0.5, c = (0.1, 0.4, 1): T = ln(2 * 2 * 0.5 / 0.4) / 0.5
        let s = GameSpec::total_effort(vec![0.1, 0.4, 1.0], 2.0, 0.5).unwrap();
        let out = ir_gap_numeric(&s, &SolverConfig::default()).unwrap();
        assert_abs_diff_eq!(out.threshold, 2.0 * 5f64.ln(), epsilon = 1e-12);
        assert!(out.formula_gap.is_none());
        let grid_min = (0..=200_000)
            .map(|k| loner_cost(&s, k as f64 * 1e-4).unwrap())
            .fold(f64::INFINITY, f64::min);
        assert!(-out.u_out <= grid_min + 1e-9);
    }

    #[test]
    fn rejects_bad_inputs() {
        let weighted = GameSpec::new(
            vec![1.0, 2.0],
            RiskModel::WeightedEffortExp {
                alphas: vec![1.0, 1.0],
                weights: vec![vec![1.0, 1.0], vec![1.0, 1.0]],
            },
        )
        .unwrap();
        assert!(matches!(
            sequential_equilibrium(&weighted),
            Err(IrError::WrongFamily { .. })
        ));
        assert!(matches!(
            sequential_equilibrium(&spec(&[1.0])),
            Err(IrError::TooFewPlayers { n: 1 })
        ));
        assert!(matches!(
            sequential_equilibrium(&spec(&[1.0, 0.5])),
            Err(IrError::UnsortedCosts { index: 1, prev: 0 })
        ));
    }
}
