//! Particle-based Monte Carlo of the two-hop link.
//!
//! Two propagation engines share the same surface rules. `TimeStep` moves
//! every molecule in three dimensions with fixed steps of `dt`. `Event` jumps
//! each molecule directly to its next contact with its ligand receiver using
//! the exact first-passage law of free diffusion to a sphere; it is exact for
//! free flights and is the default for the BER harness.

mod ber;
mod engine;
mod hop;
mod kernel;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use ber::{simulate_two_hop_ber, two_hop_trace, wilson_interval, SimBerResult, TracePoint};
pub use engine::{BindState, Molecule, Species};
pub use hop::{estimate_psi_mc, simulate_hop, slot_count_samples, HopTrace, PsiEstimate};
pub use kernel::{
    association_probability, brownian_step, dissociation_probability, dissociation_step,
    escape_probability, mirror, surface_interaction, EscapeSampler, Sphere, SurfaceOutcome, Vec3,
};

/// How a molecule touching its ligand receiver is resolved.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundaryRule {
    /// End-of-step detection; bind with `k_on sqrt(pi dt / D)` (capped at 1),
    /// otherwise mirror. Dissociation with `1 - exp(-k_off dt)`.
    ErbanChapman,
    /// Contacts include bridge crossings. A contact or dissociation attempt
    /// releases the molecule to `r + h` with the escape probability that
    /// reproduces the reactive boundary, otherwise the molecule stays bound.
    #[default]
    Splitting,
}

/// Offset from the surface at which released molecules are placed.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DesorbPlacement {
    /// Half-normal offset with scale `sqrt(2 D dt)`.
    #[default]
    SurfaceOffset,
    /// Fixed offset (um).
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Engine {
    #[default]
    Event,
    TimeStep,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    /// Sampling interval and step size (s).
    pub dt: f64,
    pub snapshots: u64,
    pub seed: u64,
    #[serde(default)]
    pub boundary_rule: BoundaryRule,
    #[serde(default)]
    pub desorb_placement: DesorbPlacement,
    #[serde(default)]
    pub engine: Engine,
    /// Whether receivers reflect molecules of the other species.
    #[serde(default)]
    pub opaque_bodies: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            dt: 0.002,
            snapshots: 10_000,
            seed: 1,
            boundary_rule: BoundaryRule::default(),
            desorb_placement: DesorbPlacement::default(),
            engine: Engine::default(),
            opaque_bodies: false,
        }
    }
}

impl SimConfig {
    /// Checks the settings against a bit interval and returns steps per bit.
    pub fn validate(&self, bit_interval: f64) -> Result<usize> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "dt must be > 0, got {}",
                self.dt
            )));
        }
        if self.dt > bit_interval {
            return Err(Error::InvalidConfig(format!(
                "dt = {} exceeds the bit interval {bit_interval}",
                self.dt
            )));
        }
        let ratio = bit_interval / self.dt;
        if (ratio - ratio.round()).abs() > 1e-6 * ratio {
            return Err(Error::InvalidConfig(format!(
                "bit interval {bit_interval} is not a multiple of dt = {}",
                self.dt
            )));
        }
        if self.snapshots == 0 {
            return Err(Error::InvalidConfig("snapshots must be >= 1".into()));
        }
        if let DesorbPlacement::Fixed(eps) = self.desorb_placement {
            if !(eps >= 0.0 && eps.is_finite()) {
                return Err(Error::InvalidConfig(format!(
                    "desorption offset must be >= 0, got {eps}"
                )));
            }
        }
        if self.engine == Engine::Event {
            if self.boundary_rule == BoundaryRule::ErbanChapman {
                return Err(Error::InvalidConfig(
                    "the erban-chapman rule needs the time-step engine".into(),
                ));
            }
            if self.opaque_bodies {
                return Err(Error::InvalidConfig(
                    "opaque bodies need the time-step engine".into(),
                ));
            }
        }
        Ok(ratio.round() as usize)
    }
}

/// Runs `f` on a dedicated pool with `threads` workers.
pub fn run_with_threads<T, F>(threads: usize, f: F) -> Result<T>
where
    T: Send,
    F: FnOnce() -> T + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("cannot build thread pool: {e}")))?;
    Ok(pool.install(f))
}
