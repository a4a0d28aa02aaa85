use rayon::prelude::*;
use serde::Serialize;

use super::{optimize_thresholds, LinkConfig};
use crate::channel::ChannelModel;
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RelayPositionPoint {
    pub ratio: f64,
    pub tau_r: i64,
    pub tau_d: i64,
    pub pe: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AllocationPoint {
    pub n_a: u64,
    pub n_b: u64,
    pub tau_r: i64,
    pub tau_d: i64,
    pub pe: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KineticsPoint {
    pub k_on: f64,
    pub k_off: f64,
    pub tau_r: i64,
    pub tau_d: i64,
    pub pe: f64,
}

/// Re-optimizes thresholds with the relay at each `ratio * d_sd`.
pub fn sweep_relay_position(
    model: &ChannelModel,
    config: &LinkConfig,
    ratios: &[f64],
) -> Result<Vec<RelayPositionPoint>> {
    ratios
        .par_iter()
        .map(|&ratio| {
            let c = config.with_ratio(ratio)?;
            let best = optimize_thresholds(model, &c, None)?;
            Ok(RelayPositionPoint {
                ratio,
                tau_r: best.tau_r,
                tau_d: best.tau_d,
                pe: best.pe,
            })
        })
        .collect()
}

/// Splits `budget` as `(n_a, budget - n_a)` for each entry of `n_a_values`.
pub fn sweep_allocation(
    model: &ChannelModel,
    config: &LinkConfig,
    budget: u64,
    n_a_values: &[u64],
) -> Result<Vec<AllocationPoint>> {
    n_a_values
        .par_iter()
        .map(|&n_a| {
            let c = config.with_allocation(budget, n_a)?;
            let best = optimize_thresholds(model, &c, None)?;
            Ok(AllocationPoint {
                n_a,
                n_b: budget - n_a,
                tau_r: best.tau_r,
                tau_d: best.tau_d,
                pe: best.pe,
            })
        })
        .collect()
}

/// Applies each `(k_on, k_off)` pair to both receivers.
pub fn sweep_kinetics(
    model: &ChannelModel,
    config: &LinkConfig,
    k_on: &[f64],
    k_off: &[f64],
) -> Result<Vec<KineticsPoint>> {
    let grid: Vec<(f64, f64)> = k_on
        .iter()
        .flat_map(|&a| k_off.iter().map(move |&b| (a, b)))
        .collect();
    grid.par_iter()
        .map(|&(k_on, k_off)| {
            let best = optimize_thresholds(model, &config.with_rates(k_on, k_off), None)?;
            Ok(KineticsPoint {
                k_on,
                k_off,
                tau_r: best.tau_r,
                tau_d: best.tau_d,
                pe: best.pe,
            })
        })
        .collect()
}
