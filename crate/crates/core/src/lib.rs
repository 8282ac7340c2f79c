//! Interdependent security games.
//!
//! Users choose security efforts whose benefit spills over to everyone.
//! This crate solves such games (the unregulated equilibrium, the social
//! optimum, the price of anarchy), implements a budget-balanced message
//! mechanism whose equilibria reach the optimum, and analyzes when a user
//! would rather stay out of it.
//!
//! - [`game`]: game specifications, risk models, costs and gradients.
//! - [`solvers`]: equilibrium and optimum solvers, closed forms for the
//!   total-effort family.
//! - [`pesim`]: the message mechanism, Lindahl prices, equilibrium
//!   construction and certification.
//! - [`ir`]: participation versus opting out.
//!
//! ```
//! use idsgame::game::GameSpec;
//! use idsgame::pesim::{construct_equilibrium_messages, lindahl_prices, verify_mechanism_ne};
//! use idsgame::solvers::{solve_social_optimum, SolverConfig};
//!
//! let spec = GameSpec::total_effort(vec![0.5, 0.8, 1.0, 1.2, 1.5], 1.0, 1.0)?;
//! let cfg = SolverConfig::default();
//! let x = solve_social_optimum(&spec, &cfg)?.profile;
//! let prices = lindahl_prices(&spec, &x, &cfg)?;
//! let messages = construct_equilibrium_messages(&spec, &x, &prices)?.profile;
//! assert!(verify_mechanism_ne(&spec, &messages, &cfg)?.certified);
//! # Ok::<(), Box<dyn std::error::Error>>(())
//! ```

pub mod error;
pub mod game;
pub mod ir;
pub mod pesim;
pub mod solvers;

// The guide's snippets run as doc-tests, one module per chapter.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/model.md")]
    mod model {}
    #[doc = include_str!("../../../book/src/equilibria.md")]
    mod equilibria {}
    #[doc = include_str!("../../../book/src/mechanism.md")]
    mod mechanism {}
    #[doc = include_str!("../../../book/src/lindahl.md")]
    mod lindahl {}
    #[doc = include_str!("../../../book/src/participation.md")]
    mod participation {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
