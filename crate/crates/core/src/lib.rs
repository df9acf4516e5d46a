//! Discrete-slot Monte Carlo simulator for TDD duplexing over LEO satellite
//! links.
//!
//! A single LEO satellite serves a population of fixed UEs drawn by
//! elevation angle. The crate models the slant-range geometry and link
//! budget per UE, schedules TDD slots at the satellite reference point under
//! either the timing-advance benchmark (`ta`) or the guard-period-packing
//! allocator (`essa`), selects which UEs transmit by best SNR (`mg`) or
//! minimum differential delay (`ms`), checks every schedule against a
//! continuous-time interference oracle, and reports guard period, channel
//! usage, and capacity with confidence intervals over seeded Monte Carlo
//! runs.
//!
//! Core math is generic over the scalar type (f32/f64) via [`SimFloat`];
//! the harness and the `simulate` CLI run on [`Scalar`] = f64.

pub mod channel;
pub mod config;
pub mod float;
pub mod geometry;
pub mod metrics;
pub mod output;
pub mod scheduler;
pub mod sim;
pub mod tdd;

pub use float::SimFloat;

/// The scalar type used by the simulation harness.
pub type Scalar = f64;

/// Concrete aliases for the main domain types at the harness scalar.
pub type UeGeometry = geometry::UeGeometry<Scalar>;
pub type LinkQuality = channel::LinkQuality<Scalar>;
pub type ChannelProfile = channel::ChannelProfile<Scalar>;
pub type LinkBudgetParams = channel::LinkBudgetParams<Scalar>;
pub type SlotTimeline = tdd::SlotTimeline<Scalar>;
pub type SelectionResult = scheduler::SelectionResult<Scalar>;
pub type MetricsReport = metrics::MetricsReport<Scalar>;
