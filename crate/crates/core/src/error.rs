use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix must be square and non-empty (got {rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("negative entry at ({row}, {col})")]
    NegativeEntry { row: usize, col: usize },
    #[error("non-finite entry at ({row}, {col})")]
    NonFiniteEntry { row: usize, col: usize },
    #[error("row {row} sums to {sum}, expected 1")]
    RowSumViolation { row: usize, sum: f64 },
    #[error("vertex {0} has no outgoing weight")]
    ZeroRow(usize),
    #[error("vertex {vertex} out of range for a graph with {size} vertices")]
    VertexOutOfRange { vertex: usize, size: usize },
    #[error("duplicate edge ({from}, {to})")]
    DuplicateEdge { from: usize, to: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("division by the zero series")]
    DivisionByZeroSeries,
    #[error("coefficient of w^{requested} requested beyond truncation order {order}")]
    TruncationExceeded { requested: i64, order: i64 },
    #[error("linear system is singular (z = {z})")]
    SingularSystem { z: f64 },
    #[error("deformed resolvent denominator vanishes ({0:e})")]
    DenominatorVanishes(f64),
    #[error("transition matrix is not strongly connected")]
    NotStronglyConnected,
    #[error("final-value extrapolation did not converge (last two estimates {0} and {1})")]
    ExtrapolationDiverged(f64, f64),
    #[error("endpoint {0} is unreachable, normalized average undefined")]
    UnreachableEndpoint(usize),
    #[error("no sampled path was accepted by the endpoint condition")]
    NoAcceptedPaths,
}

impl Error {
    /// True for errors caused by malformed input rather than by a computation
    /// that could not be carried out.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::NotSquare { .. }
                | Error::NegativeEntry { .. }
                | Error::NonFiniteEntry { .. }
                | Error::RowSumViolation { .. }
                | Error::ZeroRow(_)
                | Error::VertexOutOfRange { .. }
                | Error::DuplicateEdge { .. }
                | Error::InvalidArgument(_)
        )
    }
}
