use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GameError {
    #[error("a game needs at least one player")]
    NoPlayers,
    #[error("cost of player {index} must be positive and finite, got {value}")]
    NonPositiveCost { index: usize, value: f64 },
    #[error("risk parameter `{field}` must be positive and finite, got {value}")]
    NonPositiveParameter { field: String, value: f64 },
    #[error("{what} has length {got}, expected {expected}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("player index {index} out of range for {n} players")]
    PlayerOutOfRange { index: usize, n: usize },
    #[error("investment of player {index} is negative ({value})")]
    NegativeInvestment { index: usize, value: f64 },
    #[error("investment of player {index} is not finite")]
    NonFiniteInvestment { index: usize },
    #[error("strategy-bound slack must be positive, got {value}")]
    NonPositiveSlack { value: f64 },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error(transparent)]
    Game(#[from] GameError),
    #[error("invalid solver configuration: {0}")]
    Config(String),
    #[error("social cost at the optimum is {value}; the price of anarchy is undefined")]
    DegenerateSocialCost { value: f64 },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MechanismError {
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("the mechanism needs at least 3 players, got {n}")]
    TooFewPlayers { n: usize },
    #[error("message profile has {got} messages for a {expected}-player game")]
    ProfileSize { expected: usize, got: usize },
    #[error("message {player}: {what} has length {got}, expected {expected}")]
    MessageDimension {
        player: usize,
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("message {player}: price component {index} is {value}, prices must be nonnegative")]
    NegativePrice {
        player: usize,
        index: usize,
        value: f64,
    },
    #[error("message {player}: non-finite entry")]
    NonFiniteMessage { player: usize },
    #[error("candidate optimum fails the KKT check: residual {residual:.3e} > {tol:.3e}")]
    KktResidual { residual: f64, tol: f64 },
    #[error("Lindahl prices do not sum to zero: max |sum| = {residual:.3e}")]
    UnbalancedPrices { residual: f64 },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IrError {
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Mechanism(#[from] MechanismError),
    #[error("individual-rationality analysis requires the total-effort family, got {family}")]
    WrongFamily { family: &'static str },
    #[error("individual-rationality analysis needs at least 2 players, got {n}")]
    TooFewPlayers { n: usize },
    #[error("costs must be sorted ascending (player {index} is cheaper than player {prev})")]
    UnsortedCosts { index: usize, prev: usize },
}
