//! Tracking differentiators and their describing-function analysis.
//!
//! The crate models three members of one differentiator family as
//! continuous-time systems driven by a signal `v(t)`:
//!
//! * the linear (high-gain) differentiator,
//! * the nonlinear differentiator built on the signed power `sig(y)^α`,
//! * the hybrid differentiator that sums both.
//!
//! All three share [`DiffParams`]; the linear and nonlinear variants are the
//! hybrid with the other pair of gains set to zero. On top of the dynamics the
//! crate provides equivalent linearization through the describing function of
//! `sig(y)^α` ([`describing`]), a fixed-step simulator ([`simulation`]),
//! swept-sine identification ([`sweep`]) and a disturbance estimation
//! experiment ([`uncertainty`]).

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` also rejects NaN

pub mod describing;
pub mod dynamics;
mod error;
pub mod presets;
pub mod signals;
pub mod simulation;
pub mod sweep;
pub mod uncertainty;

pub use describing::{
    bode_table, describing_gain, first_order_response, freq_response, linearize, log_space,
    omega_factor, EquivalentLinearization, FreqPoint,
};
pub use dynamics::{sig_pow, DiffParams, DiffState, HighGainState};
pub use error::{Result, TdError};
pub use presets::{preset, ExperimentPreset, PRESET_NAMES};
pub use signals::{NoiseSpec, SignalSpec};
pub use simulation::{SimConfig, TimeSeries};
pub use sweep::{MeasuredResponse, SweepConfig};
pub use uncertainty::PlantConfig;
