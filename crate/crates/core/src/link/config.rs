use serde::{Deserialize, Serialize};

use crate::channel::{BitSeq, HopChannel, ReceiverKinetics};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Topology {
    /// Source to destination distance (um).
    pub d_sd: f64,
    /// Source to relay distance (um).
    pub d_sr: f64,
    /// Relay receiver radius (um).
    pub r_r: f64,
    /// Destination receiver radius (um).
    pub r_d: f64,
}

impl Topology {
    /// Relay to destination distance; the three nodes are collinear.
    pub fn d_rd(&self) -> f64 {
        self.d_sd - self.d_sr
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Medium {
    /// Diffusion coefficient shared by both species (um^2/s).
    pub diffusion: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BindingRates {
    pub k_on: f64,
    pub k_off: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Kinetics {
    pub relay: BindingRates,
    pub destination: BindingRates,
}

/// How the relay's own decisions on the prefix slots enter the second hop.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RelayPrefixMode {
    /// The relay re-sends the known prefix.
    #[default]
    Fixed,
    /// Average over every prefix the relay may have decoded.
    Enumerated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Protocol {
    /// Bit interval (s).
    pub bit_interval: f64,
    pub n_a: u64,
    pub n_b: u64,
    pub p0: f64,
    pub p1: f64,
    /// Known bits sent before the information bit.
    pub prefix: BitSeq,
    /// One-based slot of the information bit at the relay; equals prefix length + 1.
    pub eval_slot: usize,
    /// Total molecules `n_a + n_b`, enforced when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<u64>,
    #[serde(default)]
    pub relay_mode: RelayPrefixMode,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Thresholds {
    pub tau_r: i64,
    pub tau_d: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkConfig {
    pub topology: Topology,
    pub medium: Medium,
    pub kinetics: Kinetics,
    pub protocol: Protocol,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub thresholds: Option<Thresholds>,
}

impl Default for LinkConfig {
    /// Parameter set of the reference scenario: 30 um link, relay midway.
    fn default() -> Self {
        LinkConfig {
            topology: Topology {
                d_sd: 30.0,
                d_sr: 15.0,
                r_r: 5.0,
                r_d: 5.0,
            },
            medium: Medium { diffusion: 79.4 },
            kinetics: Kinetics {
                relay: BindingRates {
                    k_on: 1e4,
                    k_off: 100.0,
                },
                destination: BindingRates {
                    k_on: 1e4,
                    k_off: 100.0,
                },
            },
            protocol: Protocol {
                bit_interval: 0.7,
                n_a: 1000,
                n_b: 1000,
                p0: 0.5,
                p1: 0.5,
                prefix: BitSeq::new(vec![true, true]),
                eval_slot: 3,
                budget: Some(2000),
                relay_mode: RelayPrefixMode::Fixed,
            },
            thresholds: None,
        }
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!("{name} must be > 0, got {v}")))
    }
}

impl LinkConfig {
    pub fn validate(&self) -> Result<()> {
        let t = &self.topology;
        positive("topology.d_sd", t.d_sd)?;
        positive("topology.d_sr", t.d_sr)?;
        positive("topology.r_r", t.r_r)?;
        positive("topology.r_d", t.r_d)?;
        positive("medium.diffusion", self.medium.diffusion)?;
        if t.d_sr >= t.d_sd {
            return Err(Error::InvalidConfig(format!(
                "relay distance {} must be below the source-destination distance {}",
                t.d_sr, t.d_sd
            )));
        }
        if t.d_sr <= t.r_r {
            return Err(Error::InvalidConfig(format!(
                "source lies inside the relay sphere (d_sr = {}, r_r = {})",
                t.d_sr, t.r_r
            )));
        }
        if t.d_rd() <= t.r_d {
            return Err(Error::InvalidConfig(format!(
                "relay lies inside the destination sphere (d_rd = {}, r_d = {})",
                t.d_rd(),
                t.r_d
            )));
        }
        for (name, rates) in [
            ("kinetics.relay", self.kinetics.relay),
            ("kinetics.destination", self.kinetics.destination),
        ] {
            ReceiverKinetics::new(1.0, rates.k_on, rates.k_off)
                .map_err(|e| e.context(name.to_string()))?;
        }
        let p = &self.protocol;
        positive("protocol.bit_interval", p.bit_interval)?;
        let in_unit = |v: f64| (0.0..=1.0).contains(&v);
        if !in_unit(p.p0) || !in_unit(p.p1) || (p.p0 + p.p1 - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidConfig(format!(
                "priors must be probabilities summing to 1, got p0 = {}, p1 = {}",
                p.p0, p.p1
            )));
        }
        if p.eval_slot != p.prefix.len() + 1 {
            return Err(Error::InvalidConfig(format!(
                "eval_slot {} must equal prefix length + 1 = {}",
                p.eval_slot,
                p.prefix.len() + 1
            )));
        }
        if let Some(b) = p.budget {
            if p.n_a + p.n_b != b {
                return Err(Error::InvalidConfig(format!(
                    "n_a + n_b = {} does not match the budget {b}",
                    p.n_a + p.n_b
                )));
            }
        }
        Ok(())
    }

    /// Source to relay hop, carried by species A.
    pub fn first_hop(&self) -> Result<HopChannel> {
        let rates = self.kinetics.relay;
        HopChannel::new(
            self.medium.diffusion,
            self.topology.d_sr,
            ReceiverKinetics::new(self.topology.r_r, rates.k_on, rates.k_off)?,
        )
    }

    /// Relay to destination hop, carried by species B.
    pub fn second_hop(&self) -> Result<HopChannel> {
        let rates = self.kinetics.destination;
        HopChannel::new(
            self.medium.diffusion,
            self.topology.d_rd(),
            ReceiverKinetics::new(self.topology.r_d, rates.k_on, rates.k_off)?,
        )
    }

    /// Source straight to the destination receiver.
    pub fn direct_hop(&self) -> Result<HopChannel> {
        let rates = self.kinetics.destination;
        HopChannel::new(
            self.medium.diffusion,
            self.topology.d_sd,
            ReceiverKinetics::new(self.topology.r_d, rates.k_on, rates.k_off)?,
        )
    }

    /// Copy with the relay placed at `ratio * d_sd`.
    pub fn with_ratio(&self, ratio: f64) -> Result<LinkConfig> {
        let mut c = self.clone();
        c.topology.d_sr = ratio * self.topology.d_sd;
        c.validate()
            .map_err(|e| e.context(format!("relay position ratio {ratio}")))?;
        Ok(c)
    }

    /// Copy with the source emitting `n_a` and the relay the rest of `budget`.
    pub fn with_allocation(&self, budget: u64, n_a: u64) -> Result<LinkConfig> {
        if n_a > budget {
            return Err(Error::InvalidConfig(format!(
                "n_a = {n_a} exceeds budget {budget}"
            )));
        }
        let mut c = self.clone();
        c.protocol.n_a = n_a;
        c.protocol.n_b = budget - n_a;
        c.protocol.budget = Some(budget);
        Ok(c)
    }

    /// Copy with both receivers switched to the given rates.
    pub fn with_rates(&self, k_on: f64, k_off: f64) -> LinkConfig {
        let mut c = self.clone();
        let rates = BindingRates { k_on, k_off };
        c.kinetics = Kinetics {
            relay: rates,
            destination: rates,
        };
        c
    }
}
