use std::ops::RangeInclusive;

use serde::Serialize;

use super::{LinkConfig, RelayPrefixMode};
use crate::channel::{BitSeq, ChannelModel, HopChannel, SlotContext};
use crate::error::{Error, Result};
use crate::numerics::{PmfTable, SkellamDist};

/// Threshold detector: a net slot count at or above `tau` decodes as 1.
pub fn detect(count: i64, tau: i64) -> bool {
    count >= tau
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HopErrors {
    /// `P(decide 0 | sent 1)`
    pub miss: f64,
    /// `P(decide 1 | sent 0)`
    pub false_alarm: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HopSide {
    First,
    Second,
}

/// Conditional detection probabilities of both hops and the end-to-end error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorBreakdown {
    pub p_s1r0: f64,
    pub p_s0r1: f64,
    pub p_s1r1: f64,
    pub p_s0r0: f64,
    pub p_r1d0: f64,
    pub p_r0d1: f64,
    pub p_r1d1: f64,
    pub p_r0d0: f64,
    pub pe: f64,
}

impl ErrorBreakdown {
    pub fn from_hops(first: HopErrors, second: HopErrors, p0: f64, p1: f64) -> Self {
        let mut b = ErrorBreakdown {
            p_s1r0: first.miss,
            p_s0r1: first.false_alarm,
            p_s1r1: 1.0 - first.miss,
            p_s0r0: 1.0 - first.false_alarm,
            p_r1d0: second.miss,
            p_r0d1: second.false_alarm,
            p_r1d1: 1.0 - second.miss,
            p_r0d0: 1.0 - second.false_alarm,
            pe: 0.0,
        };
        b.pe = b.chain_rule_pe(p0, p1);
        b
    }

    /// End-to-end error for arbitrary priors, conditioning on the relay's decision.
    pub fn chain_rule_pe(&self, p0: f64, p1: f64) -> f64 {
        p1 * (self.p_s1r1 * self.p_r1d0 + self.p_s1r0 * self.p_r0d0)
            + p0 * (self.p_s0r0 * self.p_r0d1 + self.p_s0r1 * self.p_r1d1)
    }

    /// The four-term sum for equiprobable bits.
    pub fn equal_prior_pe(&self) -> f64 {
        0.5 * (self.p_s1r1 * self.p_r1d0
            + self.p_s1r0 * self.p_r0d0
            + self.p_s0r0 * self.p_r0d1
            + self.p_s0r1 * self.p_r1d1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThresholdChoice {
    pub tau_r: i64,
    pub tau_d: i64,
    pub pe: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DirectResult {
    pub tau: i64,
    pub pe: f64,
}

/// Slot-count statistics of one hop given the bit in the evaluated slot.
#[derive(Debug, Clone)]
struct BinaryTables {
    one: PmfTable,
    zero: PmfTable,
    upper: f64,
}

impl BinaryTables {
    fn build(
        model: &ChannelModel,
        hop: &HopChannel,
        prefix: &BitSeq,
        emission: u64,
        bt: f64,
    ) -> Result<Self> {
        let dist = |bit: bool| -> Result<SkellamDist> {
            let bits = prefix.with_last(bit);
            let n = bits.len();
            model.slot_count_distribution(&SlotContext::new(bits, emission, n, bt)?, hop)
        };
        let (one, zero) = (dist(true)?, dist(false)?);
        Ok(BinaryTables {
            upper: upper_bound(&one).max(upper_bound(&zero)),
            one: one.table(),
            zero: zero.table(),
        })
    }

    fn errors(&self, tau: i64) -> HopErrors {
        HopErrors {
            miss: self.one.cdf(tau - 1),
            false_alarm: self.zero.sf(tau - 1),
        }
    }
}

fn upper_bound(d: &SkellamDist) -> f64 {
    d.lambda1 + 5.0 * (d.lambda1 + d.lambda2).sqrt()
}

/// Precomputed count statistics for a two-hop link, reusable across thresholds.
#[derive(Debug, Clone)]
pub struct LinkAnalysis {
    p0: f64,
    p1: f64,
    first: BinaryTables,
    /// Relay prefix histories and the second-hop statistics each one induces.
    second: Vec<(BitSeq, BinaryTables)>,
    /// Relay slot statistics for the prefix slots, used to weight histories.
    prefix_slots: Vec<PmfTable>,
}

impl LinkAnalysis {
    pub fn new(model: &ChannelModel, config: &LinkConfig) -> Result<Self> {
        config.validate()?;
        let p = &config.protocol;
        let bt = p.bit_interval;
        let h1 = config.first_hop()?;
        let h2 = config.second_hop()?;
        let first = BinaryTables::build(model, &h1, &p.prefix, p.n_a, bt)?;

        // The relay is silent in slot 1 and repeats its slot-j decision in slot j + 1.
        let relay_seq =
            |history: &BitSeq| BitSeq::new(std::iter::once(false).chain(history.iter()).collect());
        let histories: Vec<BitSeq> = match p.relay_mode {
            RelayPrefixMode::Fixed => vec![p.prefix.clone()],
            RelayPrefixMode::Enumerated => all_sequences(p.prefix.len()),
        };
        let second = histories
            .into_iter()
            .map(|h| {
                let t = BinaryTables::build(model, &h2, &relay_seq(&h), p.n_b, bt)?;
                Ok((h, t))
            })
            .collect::<Result<Vec<_>>>()?;

        let prefix_slots = match p.relay_mode {
            RelayPrefixMode::Fixed => Vec::new(),
            RelayPrefixMode::Enumerated => (1..=p.prefix.len())
                .map(|j| {
                    let bits = BitSeq::new(p.prefix.as_slice()[..j].to_vec());
                    let ctx = SlotContext::new(bits, p.n_a, j, bt)?;
                    Ok(model.slot_count_distribution(&ctx, &h1)?.table())
                })
                .collect::<Result<Vec<_>>>()?,
        };
        Ok(LinkAnalysis {
            p0: p.p0,
            p1: p.p1,
            first,
            second,
            prefix_slots,
        })
    }

    pub fn first_hop_errors(&self, tau_r: i64) -> HopErrors {
        self.first.errors(tau_r)
    }

    /// Second-hop errors; `tau_r` only matters when relay prefixes are enumerated.
    pub fn second_hop_errors(&self, tau_r: i64, tau_d: i64) -> HopErrors {
        self.history_weights(tau_r)
            .into_iter()
            .zip(&self.second)
            .fold(
                HopErrors {
                    miss: 0.0,
                    false_alarm: 0.0,
                },
                |acc, (w, (_, t))| {
                    let e = t.errors(tau_d);
                    HopErrors {
                        miss: acc.miss + w * e.miss,
                        false_alarm: acc.false_alarm + w * e.false_alarm,
                    }
                },
            )
    }

    fn history_weights(&self, tau_r: i64) -> Vec<f64> {
        if self.prefix_slots.is_empty() {
            return vec![1.0];
        }
        let p_one: Vec<f64> = self.prefix_slots.iter().map(|t| t.sf(tau_r - 1)).collect();
        self.second
            .iter()
            .map(|(h, _)| {
                h.iter()
                    .zip(&p_one)
                    .map(|(b, &p)| if b { p } else { 1.0 - p })
                    .product()
            })
            .collect()
    }

    pub fn breakdown(&self, tau_r: i64, tau_d: i64) -> ErrorBreakdown {
        ErrorBreakdown::from_hops(
            self.first_hop_errors(tau_r),
            self.second_hop_errors(tau_r, tau_d),
            self.p0,
            self.p1,
        )
    }

    /// Probability that the relay sends 0 in the slot after the information bit.
    pub fn relay_prior(&self, tau_r: i64) -> f64 {
        let e = self.first_hop_errors(tau_r);
        self.p0 * (1.0 - e.false_alarm) + self.p1 * e.miss
    }

    /// `[0, ceil(max lambda1 + 5 sigma)]` over every slot distribution involved.
    pub fn default_range(&self) -> RangeInclusive<i64> {
        let hi = self
            .second
            .iter()
            .map(|(_, t)| t.upper)
            .fold(self.first.upper, f64::max);
        0..=(hi.ceil() as i64).max(1)
    }

    /// Exhaustive search of `range x range`; ties go to the smallest pair.
    pub fn optimize(&self, range: RangeInclusive<i64>) -> Result<ThresholdChoice> {
        if range.is_empty() {
            return Err(Error::InvalidConfig(format!(
                "empty threshold range {range:?}"
            )));
        }
        let taus: Vec<i64> = range.collect();
        let fixed_second: Option<Vec<HopErrors>> = self
            .prefix_slots
            .is_empty()
            .then(|| taus.iter().map(|&t| self.second[0].1.errors(t)).collect());
        let mut best = ThresholdChoice {
            tau_r: taus[0],
            tau_d: taus[0],
            pe: f64::INFINITY,
        };
        for &tau_r in &taus {
            let first = self.first_hop_errors(tau_r);
            let second: Vec<HopErrors> = match &fixed_second {
                Some(v) => v.clone(),
                None => taus
                    .iter()
                    .map(|&t| self.second_hop_errors(tau_r, t))
                    .collect(),
            };
            for (&tau_d, s) in taus.iter().zip(&second) {
                let pe = ErrorBreakdown::from_hops(first, *s, self.p0, self.p1).pe;
                if improves(pe, best.pe) {
                    best = ThresholdChoice { tau_r, tau_d, pe };
                }
            }
        }
        Ok(best)
    }
}

/// Strict improvement beyond rounding noise.
fn improves(candidate: f64, incumbent: f64) -> bool {
    if incumbent.is_infinite() {
        return true;
    }
    candidate < incumbent - 1e-12 * incumbent.abs()
}

fn all_sequences(len: usize) -> Vec<BitSeq> {
    (0..1u32 << len)
        .map(|code| BitSeq::new((0..len).map(|j| code >> (len - 1 - j) & 1 == 1).collect()))
        .collect()
}

fn thresholds(config: &LinkConfig) -> Result<super::Thresholds> {
    config
        .thresholds
        .ok_or_else(|| Error::InvalidConfig("thresholds are not set".into()))
}

/// Miss and false-alarm probabilities of one hop at the configured threshold.
pub fn hop_error_probs(
    model: &ChannelModel,
    config: &LinkConfig,
    side: HopSide,
) -> Result<HopErrors> {
    let th = thresholds(config)?;
    let a = LinkAnalysis::new(model, config)?;
    Ok(match side {
        HopSide::First => a.first_hop_errors(th.tau_r),
        HopSide::Second => a.second_hop_errors(th.tau_r, th.tau_d),
    })
}

pub fn relay_prior(model: &ChannelModel, config: &LinkConfig) -> Result<f64> {
    let th = thresholds(config)?;
    Ok(LinkAnalysis::new(model, config)?.relay_prior(th.tau_r))
}

pub fn two_hop_error(model: &ChannelModel, config: &LinkConfig) -> Result<ErrorBreakdown> {
    let th = thresholds(config)?;
    Ok(LinkAnalysis::new(model, config)?.breakdown(th.tau_r, th.tau_d))
}

/// Exhaustive threshold search; `None` uses [`LinkAnalysis::default_range`].
pub fn optimize_thresholds(
    model: &ChannelModel,
    config: &LinkConfig,
    range: Option<RangeInclusive<i64>>,
) -> Result<ThresholdChoice> {
    let a = LinkAnalysis::new(model, config)?;
    let range = range.unwrap_or_else(|| a.default_range());
    a.optimize(range)
}

/// Single-hop source to destination error at the best threshold, with
/// `n_direct` molecules per 1 and the same prefix.
pub fn direct_error(
    model: &ChannelModel,
    config: &LinkConfig,
    n_direct: u64,
) -> Result<DirectResult> {
    config.validate()?;
    let p = &config.protocol;
    let t = BinaryTables::build(
        model,
        &config.direct_hop()?,
        &p.prefix,
        n_direct,
        p.bit_interval,
    )?;
    let mut best = DirectResult {
        tau: 0,
        pe: f64::INFINITY,
    };
    for tau in 0..=(t.upper.ceil() as i64).max(1) {
        let e = t.errors(tau);
        let pe = p.p1 * e.miss + p.p0 * e.false_alarm;
        if improves(pe, best.pe) {
            best = DirectResult { tau, pe };
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::link::Thresholds;

    fn hop_errors(miss: f64, false_alarm: f64) -> HopErrors {
        HopErrors { miss, false_alarm }
    }

    #[test]
    fn detector() {
        assert!(detect(5, 5));
        assert!(!detect(4, 5));
        assert!(!detect(-3, 0));
    }

    #[test]
    fn breakdown_identities() {
        let perfect =
            ErrorBreakdown::from_hops(hop_errors(0.0, 0.0), hop_errors(0.0, 0.0), 0.5, 0.5);
        assert_eq!(perfect.pe, 0.0);
        for first in [
            hop_errors(0.0, 0.0),
            hop_errors(0.3, 0.1),
            hop_errors(1.0, 0.0),
        ] {
            let b = ErrorBreakdown::from_hops(first, hop_errors(0.5, 0.5), 0.5, 0.5);
            assert_eq!(b.pe, 0.5);
        }
        let b = ErrorBreakdown::from_hops(hop_errors(0.12, 0.07), hop_errors(0.03, 0.2), 0.5, 0.5);
        assert!((b.pe - b.equal_prior_pe()).abs() <= 4.0 * f64::EPSILON * b.pe);
        assert_eq!(b.p_s1r0 + b.p_s1r1, 1.0);
        assert_eq!(b.p_r0d1 + b.p_r0d0, 1.0);
    }

    #[test]
    fn sequences_enumerated_in_order() {
        let s: Vec<String> = all_sequences(2).iter().map(|b| b.to_string()).collect();
        assert_eq!(s, ["0 0", "0 1", "1 0", "1 1"]);
    }

    #[test]
    fn extreme_thresholds() {
        let model = ChannelModel::default();
        let mut c = LinkConfig {
            thresholds: Some(Thresholds {
                tau_r: -1_000_000,
                tau_d: 0,
            }),
            ..Default::default()
        };
        let e = hop_error_probs(&model, &c, HopSide::First).unwrap();
        assert_eq!((e.miss, e.false_alarm), (0.0, 1.0));
        c.thresholds = Some(Thresholds {
            tau_r: 1_000_000,
            tau_d: 0,
        });
        let e = hop_error_probs(&model, &c, HopSide::First).unwrap();
        assert_eq!((e.miss, e.false_alarm), (1.0, 0.0));
        assert_eq!(relay_prior(&model, &c).unwrap(), 1.0);
    }

    #[test]
    fn needs_thresholds() {
        let model = ChannelModel::default();
        assert!(two_hop_error(&model, &LinkConfig::default()).is_err());
    }

    #[test]
    fn silent_link() {
        let model = ChannelModel::default();
        let mut c = LinkConfig::default();
        c.protocol.n_a = 0;
        c.protocol.n_b = 0;
        c.protocol.budget = None;
        let best = optimize_thresholds(&model, &c, None).unwrap();
        assert_eq!((best.tau_r, best.tau_d, best.pe), (0, 0, 0.5));
        assert_eq!(direct_error(&model, &c, 0).unwrap().pe, 0.5);
    }

    #[test]
    fn single_candidate() {
        let model = ChannelModel::default();
        let c = LinkConfig::default();
        let best = optimize_thresholds(&model, &c, Some(5..=5)).unwrap();
        assert_eq!((best.tau_r, best.tau_d), (5, 5));
        let a = LinkAnalysis::new(&model, &c).unwrap();
        assert_eq!(best.pe, a.breakdown(5, 5).pe);
        #[allow(clippy::reversed_empty_ranges)]
        let empty = 5..=4;
        assert!(a.optimize(empty).is_err());
    }

    proptest::proptest! {
        #[test]
        fn detection_is_monotone(count in -500i64..500, tau in -500i64..500) {
            proptest::prop_assert!(!detect(count, tau) || detect(count + 1, tau));
            proptest::prop_assert!(!detect(count, tau + 1) || detect(count, tau));
        }

        #[test]
        fn breakdown_identity(
            m1 in 0.0f64..1.0, f1 in 0.0f64..1.0, m2 in 0.0f64..1.0, f2 in 0.0f64..1.0,
        ) {
            let b = ErrorBreakdown::from_hops(hop_errors(m1, f1), hop_errors(m2, f2), 0.5, 0.5);
            proptest::prop_assert!((b.pe - b.equal_prior_pe()).abs() <= 4.0 * f64::EPSILON * b.pe.max(1e-300));
            proptest::prop_assert!((0.0..=1.0).contains(&b.pe));
        }
    }
}
