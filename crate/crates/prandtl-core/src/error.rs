use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("non-finite value in {what}")]
    NonFinite { what: &'static str },

    #[error("field shape {found:?} does not match grid {expected:?}")]
    ShapeMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },

    #[error("history window too short: need {required} time levels, have {available}")]
    HistoryTooShort { required: usize, available: usize },

    #[error("CFL violated: dt = {dt:e} but advection requires dt <= {max_dt:e}")]
    Cfl { dt: f64, max_dt: f64 },

    #[error("tridiagonal system is not diagonally dominant at row {row}")]
    NotDiagonallyDominant { row: usize },

    #[error("monotonicity lost in iterate {iterate} at time level {level}: min u_y = {min_omega:e}")]
    MonotonicityLoss {
        iterate: usize,
        level: usize,
        min_omega: f64,
    },

    #[error("infeasible initial data: {0}")]
    Infeasible(String),

    #[error("Oleinik violation: vorticity {value:e} <= 0 at node ({i}, {j})")]
    NonPositiveVorticity { i: usize, j: usize, value: f64 },
}

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
