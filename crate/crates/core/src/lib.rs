//! Profitability analysis of block-withholding mining strategies.
//!
//! The crate computes closed-form cycle metrics (expected duration, revenue,
//! official-chain growth, difficulty adjustment and apparent hashrate) for
//! trail-stubborn mining and related strategies, exposes the absorbing
//! random-walk toolkit behind them, and ships a discrete-event Monte Carlo
//! simulator that independently verifies every formula. On top of that sit
//! mixed-strategy composition and dominance-map sweeps over the
//! `(q, gamma)` parameter plane.

pub mod analytic;
mod error;
pub mod hiker;
pub mod mixed;
pub mod params;
pub mod simulator;
pub mod sweep;

pub use error::{Error, Result};
