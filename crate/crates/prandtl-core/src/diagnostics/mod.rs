//! Weighted norms, the transformed vorticity variables and the measurements
//! built on them.
//!
//! For a multi-index `(alpha, sigma)` the transformed variable is
//!
//! ```text
//! W_{alpha,sigma} = u_y d_y( d^alpha d_y^sigma f / u_y ),
//! f = u - U when sigma = 0 and f = u otherwise.
//! ```

pub mod decay;
pub mod energy;
pub mod hardy;
pub mod identities;
pub mod norms;
pub mod residuals;
pub mod traces;
pub mod transform;

pub use decay::{decay_fit, DecayFit};
pub use energy::{energy_record, energy_series, EnergyParams, EnergyRecord, EnergySeries, EnvelopeFit};
pub use hardy::{hardy_equivalence_check, HardyCheck};
pub use norms::{weighted_norm, weighted_sobolev_norm};
pub use residuals::{omega_y_residual, w_equation_residual, ResidualPair};
pub use traces::{beta_trace_norms, TraceNorms};
pub use transform::{compute_w, Probe, WField, U_Y_FLOOR};
