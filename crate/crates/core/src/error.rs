use thiserror::Error;

/// Errors raised by the operator algebra, the basis machinery and the solvers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GentileError {
    #[error("maximum occupation number must be at least 1, got {0}")]
    InvalidOrder(u64),

    #[error("occupation {occupation} exceeds the single-mode ladder top n = {n}")]
    OccupationOutOfRange { occupation: u32, n: u32 },

    #[error("basis too large for (n={n}, nu={nu}, m={m}): dimension {} exceeds cap {cap}", dim.map_or("overflow".to_string(), |d| d.to_string()))]
    Sizing {
        n: u32,
        nu: usize,
        m: usize,
        /// `None` when the dimension overflows a machine integer.
        dim: Option<u128>,
        cap: usize,
    },

    #[error("operator dimension {dim} exceeds the dense cap {cap}")]
    DenseCap { dim: usize, cap: usize },

    #[error("sector total {total} is not reachable with m={m} states of capacity n={n}")]
    InvalidSector { total: u32, n: u32, m: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("state is not a member of the basis: {0}")]
    NotInBasis(String),

    #[error("ordinal {index} out of range for basis of dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("operators act on different bases")]
    BasisMismatch,

    #[error("matrix is not Hermitian: max |A - A^dagger| = {asymmetry:e}")]
    NonHermitian { asymmetry: f64 },

    #[error("unsupported Casimir order p = {0}")]
    UnsupportedOrder(u32),
}

impl GentileError {
    /// Sizing-type failures map onto a distinct CLI exit code.
    pub fn is_sizing(&self) -> bool {
        matches!(self, GentileError::Sizing { .. } | GentileError::DenseCap { .. })
    }

    /// Invalid user-supplied parameters, as opposed to numerical failures.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            GentileError::InvalidOrder(_) | GentileError::InvalidSector { .. } | GentileError::InvalidParameter(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, GentileError>;
