use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{ChannelModel, HopChannel};
use crate::error::{Error, Result};
use crate::numerics::SkellamDist;

/// On-off keyed symbol sequence. Parsed from strings such as `"1 1 0"` or `"110"`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct BitSeq(Vec<bool>);

impl BitSeq {
    pub fn new(bits: Vec<bool>) -> Self {
        BitSeq(bits)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.0
    }

    /// Copy with `bit` appended.
    pub fn with_last(&self, bit: bool) -> BitSeq {
        let mut v = self.0.clone();
        v.push(bit);
        BitSeq(v)
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        self.0.iter().copied()
    }
}

impl From<Vec<bool>> for BitSeq {
    fn from(v: Vec<bool>) -> Self {
        BitSeq(v)
    }
}

impl FromStr for BitSeq {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .filter(|c| !c.is_whitespace() && *c != ',')
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::InvalidConfig(format!(
                    "bit sequence {s:?} contains {other:?}; expected 0 or 1"
                ))),
            })
            .collect::<Result<Vec<_>>>()
            .map(BitSeq)
    }
}

impl fmt::Display for BitSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: Vec<&str> = self.iter().map(|b| if b { "1" } else { "0" }).collect();
        f.write_str(&s.join(" "))
    }
}

impl Serialize for BitSeq {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        ser.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for BitSeq {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(de)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Which slot of which sequence a Skellam count refers to.
#[derive(Debug, Clone, PartialEq)]
pub struct SlotContext {
    pub bits: BitSeq,
    /// Molecules released per transmitted 1.
    pub emission: u64,
    /// One-based slot index `n`.
    pub slot_index: usize,
    /// Bit interval in seconds.
    pub bit_interval: f64,
}

impl SlotContext {
    pub fn new(bits: BitSeq, emission: u64, slot_index: usize, bit_interval: f64) -> Result<Self> {
        let ctx = SlotContext {
            bits,
            emission,
            slot_index,
            bit_interval,
        };
        ctx.validate()?;
        Ok(ctx)
    }

    pub fn validate(&self) -> Result<()> {
        if self.bits.is_empty() {
            return Err(Error::InvalidConfig("bit sequence is empty".into()));
        }
        if self.slot_index == 0 || self.slot_index > self.bits.len() {
            return Err(Error::InvalidConfig(format!(
                "slot index {} outside 1..={}",
                self.slot_index,
                self.bits.len()
            )));
        }
        if !(self.bit_interval > 0.0 && self.bit_interval.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "bit interval must be > 0, got {}",
                self.bit_interval
            )));
        }
        Ok(())
    }
}

impl ChannelModel {
    /// Poisson means of the cumulative complex counts at the end of slot `n`
    /// and slot `n - 1`.
    pub fn mean_bound_pair(&self, ctx: &SlotContext, hop: &HopChannel) -> Result<(f64, f64)> {
        ctx.validate()?;
        let n = ctx.slot_index;
        let emission = ctx.emission as f64;
        let mut lambda1 = 0.0;
        let mut lambda2 = 0.0;
        for (i, bit) in ctx.bits.iter().take(n).enumerate() {
            if !bit || ctx.emission == 0 {
                continue;
            }
            // slot i + 1 in one-based terms
            let age = (n - i) as f64 * ctx.bit_interval;
            lambda1 += emission * self.psi(age, hop)?;
            if i + 1 < n {
                let age = (n - i - 1) as f64 * ctx.bit_interval;
                lambda2 += emission * self.psi(age, hop)?;
            }
        }
        Ok((lambda1, lambda2))
    }

    /// Distribution of the net change in complex count during slot `n`.
    pub fn slot_count_distribution(
        &self,
        ctx: &SlotContext,
        hop: &HopChannel,
    ) -> Result<SkellamDist> {
        let (l1, l2) = self.mean_bound_pair(ctx, hop)?;
        SkellamDist::new(l1, l2)
    }
}
