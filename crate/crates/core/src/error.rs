use alloc::string::String;

use crate::pauli::Phase;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("site index {index} outside the valid range {min}..={max}")]
    IndexOutOfRange { index: usize, min: usize, max: usize },

    #[error("parity error: {0}")]
    Parity(String),

    #[error("operator lengths differ: {left} vs {right} sites")]
    ShapeMismatch { left: usize, right: usize },

    #[error("alpha = {0} lies outside the cluster phase |alpha| < pi/4")]
    PhaseRange(f64),

    #[error("invalid chain: {0}")]
    InvalidChain(String),

    #[error("invalid solver parameters: {0}")]
    InvalidParams(String),

    #[error("operator with phase {0} is not Hermitian")]
    NotHermitian(Phase),

    #[error("expectation value has imaginary part {0:e}")]
    ImaginaryExpectation(f64),

    #[error("solver did not converge (best residual {best_residual:e}, last energies {last_energies:?})")]
    Convergence {
        best_residual: f64,
        last_energies: Option<(f64, f64)>,
    },

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("wrong state representation: {0}")]
    Representation(String),

    #[error("singular input: {0}")]
    Singular(String),

    #[error("{delta} does not divide {n}")]
    Divisibility { delta: usize, n: usize },

    #[error("distance {0} not covered by the sampled grid")]
    OutOfGrid(usize),

    #[error("invalid schedule: {0}")]
    Schedule(String),

    #[error("state is not converged")]
    NotConverged,

    #[error("parse error: {0}")]
    Parse(String),

    #[error("{0}")]
    Domain(String),
}
