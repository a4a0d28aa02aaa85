//! Threshold detection and end-to-end error analysis of the two-hop link.

mod analysis;
mod config;
mod sweep;

pub use analysis::{
    detect, direct_error, hop_error_probs, optimize_thresholds, relay_prior, two_hop_error,
    DirectResult, ErrorBreakdown, HopErrors, HopSide, LinkAnalysis, ThresholdChoice,
};
pub use config::{
    BindingRates, Kinetics, LinkConfig, Medium, Protocol, RelayPrefixMode, Thresholds, Topology,
};
pub use sweep::{
    sweep_allocation, sweep_kinetics, sweep_relay_position, AllocationPoint, KineticsPoint,
    RelayPositionPoint,
};
