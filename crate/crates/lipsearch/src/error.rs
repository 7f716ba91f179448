use crate::rational::Rat;
use thiserror::Error;

/// Errors shared across the crate. Variants map onto the failure modes of
/// the window calculus, the policy, the adversary and the discrete oracle.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter left its documented domain (c outside (0,1], location
    /// outside [0,1], grid sizes too large, ...).
    #[error("out of range: {0}")]
    OutOfRange(String),

    /// No L-Lipschitz index reaching the standard is consistent with the
    /// history: a pairwise Lipschitz violation or an empty search window.
    #[error("infeasible history: {0}")]
    InfeasibleHistory(String),

    /// The requested quantity has no defined value (phi at N = 0, adversary
    /// play when no search is ever worthwhile).
    #[error("undefined: {0}")]
    Undefined(String),

    /// Strict admission: the history cannot arise from left-to-right play.
    #[error("history not reachable by left-to-right play: {0}")]
    NotLToRReachable(String),

    /// A simulation ran past its step budget without the policy stopping.
    #[error("no stop after {max_steps} steps")]
    NonTerminating { max_steps: usize },

    /// The observation does not split the window into two nonempty sides.
    /// Boxed so the error stays small enough to return by value everywhere.
    #[error("observation (x = {x}, z = {z}) does not bifurcate the window")]
    NotBifurcated { x: Box<Rat>, z: Box<Rat> },

    /// The two-period solver only covers the empty history and the history
    /// after its own first search.
    #[error("unsupported two-period history: {0}")]
    UnsupportedHistory(String),

    /// The oracle would explore more states than the configured cap.
    #[error("state budget exceeded: {states} states explored, cap {cap}")]
    BudgetExceeded { states: usize, cap: usize },

    /// A piecewise-linear index failed validation; the message names the
    /// offending breakpoint or segment.
    #[error("invalid quality index: {0}")]
    InvalidIndex(String),

    /// A number in a file could not be read as an exact rational within the
    /// denominator bound.
    #[error("invalid number: {0}")]
    InvalidNumber(String),

    /// Structurally malformed JSON input.
    #[error("malformed input: {0}")]
    Malformed(String),
}

pub type Result<T> = std::result::Result<T, Error>;
