//! Wall condition selector.

use alloc::format;

use crate::error::{invalid, Result};

/// Robin `u_y = beta u` for finite `beta > 0`; Dirichlet `u = 0` stands for `beta = inf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Wall {
    Robin(f64),
    Dirichlet,
}

impl Wall {
    /// `+inf` selects the Dirichlet branch; zero, negative and NaN are rejected.
    pub fn from_beta(beta: f64) -> Result<Self> {
        if beta == f64::INFINITY {
            Ok(Wall::Dirichlet)
        } else if beta.is_finite() && beta > 0.0 {
            Ok(Wall::Robin(beta))
        } else {
            Err(invalid("beta", format!("{beta} is not in (0, inf]")))
        }
    }

    pub fn beta(&self) -> f64 {
        match self {
            Wall::Robin(b) => *b,
            Wall::Dirichlet => f64::INFINITY,
        }
    }

    pub fn is_dirichlet(&self) -> bool {
        matches!(self, Wall::Dirichlet)
    }
}
