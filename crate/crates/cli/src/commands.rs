use std::path::{Path, PathBuf};

use idsgame::error::{IrError, MechanismError, SolverError};
use idsgame::game::{GameSpec, RiskModel};
use idsgame::ir::ir_gap_numeric;
use idsgame::pesim::{
    construct_equilibrium_messages, externality_sign_check, lindahl_prices, outcome, run_dynamics,
    verify_mechanism_ne, MechanismCertificate, MessageProfile, Outcome, MIN_PLAYERS,
};
use idsgame::solvers::{
    closed_form, price_of_anarchy, solve_social_optimum, solve_unregulated_ne, EquilibriumReport,
    OptimumReport, SolverConfig,
};
use serde_json::{json, Value};

use crate::error::CliError;
use crate::report::{sha256_hex, Check, Report};
use crate::spec::SpecDocument;

/// Largest budget imbalance accepted in any emitted tax vector.
pub const BUDGET_TOL: f64 = 1e-9;
/// Agreement required between a numeric solve and its closed form.
pub const CLOSED_FORM_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum SolveMode {
    Social,
    Ne,
    Poa,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum MechanismAction {
    Construct,
    Verify,
    Dynamics,
}

fn solver_err(e: SolverError) -> CliError {
    match e {
        SolverError::Game(g) => CliError::Invalid {
            field: "spec".into(),
            reason: g.to_string(),
        },
        SolverError::Config(msg) => CliError::Invalid {
            field: "solver".into(),
            reason: msg,
        },
        other => CliError::Certification(other.to_string()),
    }
}

fn mechanism_err(e: MechanismError) -> CliError {
    match e {
        MechanismError::Solver(s) => solver_err(s),
        MechanismError::TooFewPlayers { .. } => CliError::Invalid {
            field: "n".into(),
            reason: e.to_string(),
        },
        MechanismError::KktResidual { .. } => CliError::NotConverged(e.to_string()),
        MechanismError::UnbalancedPrices { .. } => CliError::Certification(e.to_string()),
        other => CliError::Invalid {
            field: "profile".into(),
            reason: other.to_string(),
        },
    }
}

fn ir_err(e: IrError) -> CliError {
    match e {
        IrError::Mechanism(m) => mechanism_err(m),
        IrError::WrongFamily { .. } => CliError::Invalid {
            field: "risk_model.family".into(),
            reason: format!(
                "{e}; the participation analysis relies on only the two cheapest players \
                 being able to invest, which holds for total effort only"
            ),
        },
        IrError::UnsortedCosts { .. } => CliError::Invalid {
            field: "costs".into(),
            reason: e.to_string(),
        },
        IrError::TooFewPlayers { .. } => CliError::Invalid {
            field: "n".into(),
            reason: e.to_string(),
        },
        IrError::Game(g) => CliError::Invalid {
            field: "spec".into(),
            reason: g.to_string(),
        },
    }
}

fn base_config(doc: &SpecDocument, cfg: &SolverConfig, extra: Value) -> Value {
    let mut config = json!({ "solver": cfg, "n": doc.game.n() });
    if let (Value::Object(c), Value::Object(e)) = (&mut config, extra) {
        c.extend(e);
    }
    config
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn optimum_outputs(spec: &GameSpec, opt: &OptimumReport) -> Value {
    json!({
        "profile": opt.profile,
        "social_cost": spec.social_cost(&opt.profile).expect("validated profile"),
        "converged": opt.converged,
        "iterations": opt.iterations,
        "kkt_residual": opt.kkt_residual,
        "active": opt.active,
        "non_unique": opt.non_unique,
    })
}

fn equilibrium_outputs(spec: &GameSpec, ne: &EquilibriumReport) -> Value {
    json!({
        "profile": ne.profile,
        "social_cost": spec.social_cost(&ne.profile).expect("validated profile"),
        "converged": ne.converged,
        "sweeps": ne.iterations,
        "max_deviation": ne.max_deviation,
        "active": ne.active,
        "non_unique": ne.non_unique,
    })
}

pub struct Figure {
    pub equilibrium: Vec<f64>,
    pub optimum: Vec<f64>,
}

impl Figure {
    /// Rows of `player,ne,social`, players numbered from 1.
    pub fn write_csv(&self, path: &Path) -> Result<(), CliError> {
        let mut w = csv_writer(path)?;
        let io = |e: csv::Error| output_err(path, e);
        w.write_record(["player", "ne", "social"]).map_err(io)?;
        for (i, (a, b)) in self.equilibrium.iter().zip(&self.optimum).enumerate() {
            w.write_record([(i + 1).to_string(), a.to_string(), b.to_string()])
                .map_err(io)?;
        }
        w.flush().map_err(|e| output_err(path, e))
    }
}

fn output_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Output {
        path: path.display().to_string(),
        reason: e.to_string(),
    }
}

fn csv_writer(path: &Path) -> Result<csv::Writer<std::fs::File>, CliError> {
    csv::Writer::from_path(path).map_err(|e| output_err(path, e))
}

pub fn solve(
    doc: &SpecDocument,
    cfg: &SolverConfig,
    mode: SolveMode,
) -> Result<(Report, Option<Figure>), CliError> {
    let spec = &doc.game;
    let mut checks = Vec::new();
    let mut outputs = serde_json::Map::new();
    let mut not_converged = Vec::new();
    let mut figure = None;

    let opt = match mode {
        SolveMode::Social | SolveMode::Poa => {
            let opt = solve_social_optimum(spec, cfg).map_err(solver_err)?;
            if !opt.converged {
                not_converged.push(format!(
                    "social optimum: iteration cap {} reached",
                    cfg.max_iter
                ));
            }
            checks.push(Check::at_most(
                "optimum_kkt_residual",
                opt.kkt_residual,
                cfg.kkt_tol,
            ));
            if let Some(cf) = closed_form::social_optimum(spec) {
                checks.push(Check::at_most(
                    "optimum_closed_form_gap",
                    max_abs_diff(&opt.profile, &cf),
                    CLOSED_FORM_TOL,
                ));
            }
            outputs.insert("social_optimum".into(), optimum_outputs(spec, &opt));
            Some(opt)
        }
        SolveMode::Ne => None,
    };
    let ne = match mode {
        SolveMode::Ne | SolveMode::Poa => {
            let ne = solve_unregulated_ne(spec, cfg).map_err(solver_err)?;
            if !ne.converged {
                not_converged.push(format!("equilibrium: sweep cap {} reached", cfg.max_iter));
            }
            checks.push(Check::at_most(
                "equilibrium_max_deviation",
                ne.max_deviation,
                cfg.certify_tol,
            ));
            if let Some(cf) = closed_form::unregulated_ne(spec) {
                checks.push(Check::at_most(
                    "equilibrium_closed_form_gap",
                    max_abs_diff(&ne.profile, &cf),
                    CLOSED_FORM_TOL,
                ));
            }
            outputs.insert("equilibrium".into(), equilibrium_outputs(spec, &ne));
            Some(ne)
        }
        SolveMode::Social => None,
    };
    if let (Some(opt), Some(ne)) = (&opt, &ne) {
        let rho = price_of_anarchy(spec, &ne.profile, &opt.profile).map_err(solver_err)?;
        outputs.insert("price_of_anarchy".into(), json!(rho));
        let cf = closed_form::price_of_anarchy(spec);
        outputs.insert("closed_form_price_of_anarchy".into(), json!(cf));
        if let Some(cf) = cf {
            checks.push(Check::at_most(
                "price_of_anarchy_closed_form_gap",
                (rho - cf).abs(),
                CLOSED_FORM_TOL,
            ));
        }
        let table: Vec<Value> = ne
            .profile
            .iter()
            .zip(opt.profile.iter())
            .enumerate()
            .map(|(i, (a, b))| json!({ "player": i + 1, "ne": a, "social": b }))
            .collect();
        outputs.insert("per_player".into(), Value::Array(table));
        figure = Some(Figure {
            equilibrium: ne.profile.to_vec(),
            optimum: opt.profile.to_vec(),
        });
    }

    let mode_name = match mode {
        SolveMode::Social => "social",
        SolveMode::Ne => "ne",
        SolveMode::Poa => "poa",
    };
    let report = Report {
        command: "solve",
        input_digest: sha256_hex(&doc.bytes),
        config: base_config(doc, cfg, json!({ "mode": mode_name })),
        outputs: Value::Object(outputs),
        checks,
        not_converged: (!not_converged.is_empty()).then(|| not_converged.join("; ")),
    };
    Ok((report, figure))
}

pub struct MechanismArgs<'a> {
    pub action: MechanismAction,
    pub profile: Option<&'a Path>,
    pub profile_out: Option<PathBuf>,
    pub csv: Option<PathBuf>,
}

pub fn read_profile(path: &Path) -> Result<MessageProfile, CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::Unreadable {
        path: path.display().to_string(),
        reason: e.to_string(),
    })?;
    let value: Value = serde_json::from_slice(&bytes).map_err(|e| CliError::Malformed {
        line: e.line(),
        column: e.column(),
        reason: e.to_string(),
    })?;
    serde_json::from_value(value).map_err(|e| CliError::Invalid {
        field: "profile".into(),
        reason: e.to_string(),
    })
}

fn write_profile(path: &Path, profile: &MessageProfile) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(profile).expect("profile serializes");
    std::fs::write(path, text + "\n").map_err(|e| output_err(path, e))
}

fn outcome_outputs(out: &Outcome) -> Value {
    json!({
        "allocation": out.allocation,
        "taxes": out.taxes,
        "tax_sum": out.taxes.total(),
        "tax_terms": out.terms,
        "negative_allocation": out.negative_allocation(),
    })
}

fn certificate_checks(cert: &MechanismCertificate, cfg: &SolverConfig, checks: &mut Vec<Check>) {
    checks.push(Check::at_most(
        "mechanism_max_gain",
        cert.max_gain,
        cfg.mechanism_tol,
    ));
}

pub fn mechanism(
    doc: &SpecDocument,
    cfg: &SolverConfig,
    args: &MechanismArgs,
) -> Result<Report, CliError> {
    let spec = &doc.game;
    if spec.n() < MIN_PLAYERS {
        return Err(mechanism_err(MechanismError::TooFewPlayers { n: spec.n() }));
    }
    let mut checks = Vec::new();
    let mut not_converged = None;
    let (action, outputs) = match args.action {
        MechanismAction::Construct => {
            let opt = solve_social_optimum(spec, cfg).map_err(solver_err)?;
            if !opt.converged {
                not_converged = Some(format!(
                    "social optimum: iteration cap {} reached",
                    cfg.max_iter
                ));
            }
            let sys = lindahl_prices(spec, &opt.profile, cfg).map_err(mechanism_err)?;
            let built =
                construct_equilibrium_messages(spec, &opt.profile, &sys).map_err(mechanism_err)?;
            let out = outcome(&built.profile);
            let cert = verify_mechanism_ne(spec, &built.profile, cfg).map_err(mechanism_err)?;
            let externality =
                externality_sign_check(spec, &out.allocation, &sys).map_err(mechanism_err)?;
            checks.push(Check::at_most(
                "tax_sum",
                out.taxes.total().abs(),
                BUDGET_TOL,
            ));
            checks.push(Check::at_most(
                "lindahl_price_sum",
                sys.price_sum_residual(),
                BUDGET_TOL,
            ));
            checks.push(Check::at_most(
                "allocation_vs_optimum",
                max_abs_diff(&out.allocation, &opt.profile),
                CLOSED_FORM_TOL,
            ));
            certificate_checks(&cert, cfg, &mut checks);
            if let Some(path) = &args.profile_out {
                write_profile(path, &built.profile)?;
            }
            let outputs = json!({
                "social_optimum": opt.profile,
                "lindahl": sys,
                "price_seed": built.seed,
                "profile": built.profile,
                "outcome": outcome_outputs(&out),
                "certificate": cert,
                "externality": externality,
            });
            ("construct", outputs)
        }
        MechanismAction::Verify => {
            let path = args.profile.ok_or_else(|| CliError::Invalid {
                field: "--profile".into(),
                reason: "verify needs a message profile file".into(),
            })?;
            let profile = read_profile(path)?.for_game(spec).map_err(mechanism_err)?;
            let out = outcome(&profile);
            let cert = verify_mechanism_ne(spec, &profile, cfg).map_err(mechanism_err)?;
            checks.push(Check::at_most(
                "tax_sum",
                out.taxes.total().abs(),
                BUDGET_TOL,
            ));
            certificate_checks(&cert, cfg, &mut checks);
            let outputs = json!({
                "profile_digest": sha256_hex(&serde_json::to_vec(&profile).expect("profile serializes")),
                "outcome": outcome_outputs(&out),
                "social_cost": if out.negative_allocation() {
                    Value::Null
                } else {
                    json!(spec.social_cost(&out.allocation).expect("nonnegative allocation"))
                },
                "certificate": cert,
            });
            ("verify", outputs)
        }
        MechanismAction::Dynamics => {
            let initial = match args.profile {
                Some(path) => read_profile(path)?,
                None => MessageProfile::random(spec.n(), cfg.seed).map_err(mechanism_err)?,
            };
            let run = run_dynamics(spec, &initial, cfg).map_err(mechanism_err)?;
            if !run.converged {
                not_converged = Some(format!(
                    "dynamics: round cap {} reached without settling",
                    cfg.max_rounds
                ));
            }
            let worst_balance = run
                .trajectory
                .iter()
                .map(|r| r.outcome.taxes.total().abs())
                .fold(0.0, f64::max);
            checks.push(Check::at_most(
                "tax_sum_all_rounds",
                worst_balance,
                BUDGET_TOL,
            ));
            certificate_checks(&run.certificate, cfg, &mut checks);
            if let Some(path) = &args.csv {
                write_trajectory(path, &run.trajectory)?;
            }
            let last = run.final_record();
            if let Some(path) = &args.profile_out {
                write_profile(path, &last.profile)?;
            }
            let outputs = json!({
                "heuristic": true,
                "rounds": run.rounds,
                "converged": run.converged,
                "final_movement": last.movement,
                "final_profile": last.profile,
                "outcome": outcome_outputs(&last.outcome),
                "social_cost": last.social_cost,
                "certificate": run.certificate,
            });
            ("dynamics", outputs)
        }
    };
    Ok(Report {
        command: "mechanism",
        input_digest: sha256_hex(&doc.bytes),
        config: base_config(doc, cfg, json!({ "action": action })),
        outputs,
        checks,
        not_converged,
    })
}

fn write_trajectory(
    path: &Path,
    trajectory: &[idsgame::pesim::DynamicsRecord],
) -> Result<(), CliError> {
    let n = trajectory.first().map_or(0, |r| r.outcome.allocation.len());
    let mut w = csv_writer(path)?;
    let io = |e: csv::Error| output_err(path, e);
    let mut header = vec!["round".to_string(), "messages_digest".to_string()];
    header.extend((1..=n).map(|i| format!("x_hat_{i}")));
    header.extend((1..=n).map(|i| format!("t_{i}")));
    header.extend(["social_cost".to_string(), "movement".to_string()]);
    w.write_record(&header).map_err(io)?;
    for rec in trajectory {
        let digest = sha256_hex(&serde_json::to_vec(&rec.profile).expect("profile serializes"));
        let mut row = vec![rec.round.to_string(), digest[..16].to_string()];
        row.extend(rec.outcome.allocation.iter().map(f64::to_string));
        row.extend(rec.outcome.taxes.iter().map(f64::to_string));
        row.extend([rec.social_cost.to_string(), rec.movement.to_string()]);
        w.write_record(&row).map_err(io)?;
    }
    w.flush().map_err(|e| output_err(path, e))
}

pub fn ir(doc: &SpecDocument, cfg: &SolverConfig) -> Result<Report, CliError> {
    let spec = &doc.game;
    let out = ir_gap_numeric(spec, cfg).map_err(ir_err)?;
    let gap = out.gap.expect("numeric gap is filled in");
    let x_star = out.social_optimum.as_ref().expect("optimum is filled in");
    let n = spec.n() as f64;
    let reward = -(1.0 - 1.0 / n) * spec.cost(0) * x_star[0];
    let tax = out.loner_tax.expect("tax is filled in");

    let note = match (out.formula_gap, out.formula_applies) {
        (None, _) => "closed form defined for alpha = beta = 1 only",
        (Some(_), true) => "valid: all-effort regime with c_1 < 1",
        (Some(_), false) => "outside clamped-validity regime",
    };
    let unit = matches!(spec.risk_model(), RiskModel::TotalEffortExp { alpha, beta } if *alpha == 1.0 && *beta == 1.0);
    let mut checks = vec![Check {
        name: "higher_cost_players_inactive",
        value: if out.others_inactive { 0.0 } else { 1.0 },
        tolerance: 0.0,
        passed: out.others_inactive,
    }];
    checks.push(Check::at_most(
        "loner_tax_vs_reward_share",
        (tax - reward).abs(),
        BUDGET_TOL,
    ));
    if out.formula_applies {
        let f = out.formula_gap.expect("applies implies present");
        checks.push(Check::at_most(
            "formula_vs_numeric_gap",
            (f - gap).abs(),
            1e-9,
        ));
    }
    let outputs = json!({
        "regime": out.regime.as_str(),
        "threshold": out.threshold,
        "loner_effort": out.loner_effort,
        "investor_effort": out.investor_effort,
        "u_in": out.u_in,
        "u_out": out.u_out,
        "gap": gap,
        "individually_rational": gap >= 0.0,
        "loner_tax": tax,
        "social_optimum": x_star,
        "formula": {
            "value": out.formula_gap,
            "applies": out.formula_applies,
            "note": note,
            "unit_game": unit,
        },
    });
    Ok(Report {
        command: "ir",
        input_digest: sha256_hex(&doc.bytes),
        config: base_config(doc, cfg, json!({})),
        outputs,
        checks,
        not_converged: None,
    })
}
