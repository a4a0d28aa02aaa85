use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::engine::{Release, Scene, Species, Tally};
use super::hop::stream_rng;
use super::kernel::Sphere;
use super::SimConfig;
use crate::channel::ReceiverKinetics;
use crate::error::{Error, Result};
use crate::link::{detect, ErrorBreakdown, LinkConfig, Thresholds};

const Z95: f64 = 1.959_963_984_540_054;

/// Wilson score interval for `successes` out of `trials` at 95% confidence.
pub fn wilson_interval(successes: f64, trials: f64) -> (f64, f64) {
    if trials <= 0.0 {
        return (0.0, 1.0);
    }
    let p = successes / trials;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / trials;
    let center = (p + z2 / (2.0 * trials)) / denom;
    let half = Z95 * (p * (1.0 - p) / trials + z2 / (4.0 * trials * trials)).sqrt() / denom;
    // the bounds are exactly 0 and 1 at the extremes; avoid rounding residue
    let lo = if p <= 0.0 {
        0.0
    } else {
        (center - half).max(0.0)
    };
    let hi = if p >= 1.0 {
        1.0
    } else {
        (center + half).min(1.0)
    };
    (lo, hi)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimBerResult {
    pub pe: f64,
    pub ci95: (f64, f64),
    pub snapshots: u64,
    pub ones: u64,
    pub zeros: u64,
    pub errors_one: u64,
    pub errors_zero: u64,
    /// Fraction of snapshots in which the relay forwarded a 0 for the information bit.
    pub relay_zero_rate: f64,
    /// Empirical conditional frequencies; `NaN` where a condition never occurred.
    pub breakdown: ErrorBreakdown,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TracePoint {
    pub time_s: f64,
    pub complexes_r: u32,
    pub complexes_d: u32,
}

struct TwoHop {
    scene: Scene,
    spb: usize,
    thresholds: Thresholds,
    n_a: u64,
    n_b: u64,
    prefix: Vec<bool>,
    relay_center: [f64; 3],
}

#[derive(Debug, Clone, Copy, Default)]
struct Outcome {
    sent: bool,
    relay: bool,
    dest: bool,
}

const RELAY: usize = 0;
const DEST: usize = 1;

impl TwoHop {
    fn new(sim: &SimConfig, link: &LinkConfig) -> Result<Self> {
        link.validate()?;
        let thresholds = link
            .thresholds
            .ok_or_else(|| Error::InvalidConfig("thresholds are required for simulation".into()))?;
        let p = &link.protocol;
        let spb = sim.validate(p.bit_interval)?;
        let t = &link.topology;
        if sim.opaque_bodies && t.d_rd() < t.r_r + t.r_d {
            return Err(Error::InvalidConfig(format!(
                "opaque receivers overlap (d_rd = {}, r_r + r_d = {})",
                t.d_rd(),
                t.r_r + t.r_d
            )));
        }
        let k = &link.kinetics;
        let relay_center = [t.d_sr, 0.0, 0.0];
        let bodies = vec![
            (
                Sphere {
                    center: relay_center,
                    radius: t.r_r,
                },
                ReceiverKinetics::new(t.r_r, k.relay.k_on, k.relay.k_off)?,
                Species::A,
            ),
            (
                Sphere {
                    center: [t.d_sd, 0.0, 0.0],
                    radius: t.r_d,
                },
                ReceiverKinetics::new(t.r_d, k.destination.k_on, k.destination.k_off)?,
                Species::B,
            ),
        ];
        let n_steps = spb * (p.prefix.len() + 2);
        Ok(TwoHop {
            scene: Scene::new(bodies, link.medium.diffusion, n_steps, sim),
            spb,
            thresholds,
            n_a: p.n_a,
            n_b: p.n_b,
            prefix: p.prefix.as_slice().to_vec(),
            relay_center,
        })
    }

    fn run(&self, bit: bool, rng: &mut ChaCha8Rng) -> (Outcome, Tally) {
        let bits: Vec<bool> = self.prefix.iter().copied().chain([bit]).collect();
        let n = bits.len();
        let mut tally = self.scene.empty_tally();
        let sources: Vec<Release> = bits
            .iter()
            .enumerate()
            .filter(|&(_, &b)| b)
            .map(|(i, _)| Release {
                species: Species::A,
                start: [0.0; 3],
                step: i * self.spb,
                count: self.n_a,
            })
            .collect();
        self.scene.run(&sources, rng, &mut tally);
        let at_relay = tally.counts(RELAY);
        let slot = |c: &[u32], j: usize| c[j * self.spb] as i64 - c[(j - 1) * self.spb] as i64;
        let decisions: Vec<bool> = (1..=n)
            .map(|j| detect(slot(&at_relay, j), self.thresholds.tau_r))
            .collect();
        // the decision on slot j is forwarded at the start of slot j + 1
        let forwards: Vec<Release> = decisions
            .iter()
            .enumerate()
            .filter(|&(_, &d)| d)
            .map(|(j, _)| Release {
                species: Species::B,
                start: self.relay_center,
                step: (j + 1) * self.spb,
                count: self.n_b,
            })
            .collect();
        self.scene.run(&forwards, rng, &mut tally);
        let at_dest = tally.counts(DEST);
        let outcome = Outcome {
            sent: bit,
            relay: decisions[n - 1],
            dest: detect(slot(&at_dest, n + 1), self.thresholds.tau_d),
        };
        (outcome, tally)
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Counts {
    /// [sent][relay]
    first: [[u64; 2]; 2],
    /// [relay][dest]
    second: [[u64; 2]; 2],
    /// [sent] -> errors
    errors: [u64; 2],
    sent: [u64; 2],
}

impl Counts {
    fn add(mut self, o: Outcome) -> Self {
        let (s, r, d) = (o.sent as usize, o.relay as usize, o.dest as usize);
        self.first[s][r] += 1;
        self.second[r][d] += 1;
        self.sent[s] += 1;
        if o.dest != o.sent {
            self.errors[s] += 1;
        }
        self
    }

    fn merge(mut self, o: Counts) -> Self {
        for i in 0..2 {
            for j in 0..2 {
                self.first[i][j] += o.first[i][j];
                self.second[i][j] += o.second[i][j];
            }
            self.errors[i] += o.errors[i];
            self.sent[i] += o.sent[i];
        }
        self
    }
}

fn ratio(a: u64, b: u64) -> f64 {
    if b == 0 {
        f64::NAN
    } else {
        a as f64 / b as f64
    }
}

/// End-to-end bit error rate over `sim.snapshots` independent realizations.
///
/// The first `round(p1 * snapshots)` snapshots carry a 1 in the information
/// slot, the rest a 0; the estimate weights the two sub-ensembles by the priors.
pub fn simulate_two_hop_ber(sim: &SimConfig, link: &LinkConfig) -> Result<SimBerResult> {
    let world = TwoHop::new(sim, link)?;
    let (p0, p1) = (link.protocol.p0, link.protocol.p1);
    let ones = (p1 * sim.snapshots as f64).round() as u64;
    let counts = (0..sim.snapshots)
        .into_par_iter()
        .map(|s| world.run(s < ones, &mut stream_rng(sim.seed, s)).0)
        .fold(Counts::default, Counts::add)
        .reduce(Counts::default, Counts::merge);

    let rate = |s: usize| {
        if counts.sent[s] == 0 {
            0.0
        } else {
            counts.errors[s] as f64 / counts.sent[s] as f64
        }
    };
    let pe = p1 * rate(1) + p0 * rate(0);
    let n = sim.snapshots as f64;
    let f = &counts.first;
    let g = &counts.second;
    let relay_zero = f[0][0] + f[1][0];
    let breakdown = ErrorBreakdown {
        p_s1r0: ratio(f[1][0], counts.sent[1]),
        p_s0r1: ratio(f[0][1], counts.sent[0]),
        p_s1r1: ratio(f[1][1], counts.sent[1]),
        p_s0r0: ratio(f[0][0], counts.sent[0]),
        p_r1d0: ratio(g[1][0], g[1][0] + g[1][1]),
        p_r0d1: ratio(g[0][1], g[0][0] + g[0][1]),
        p_r1d1: ratio(g[1][1], g[1][0] + g[1][1]),
        p_r0d0: ratio(g[0][0], g[0][0] + g[0][1]),
        pe,
    };
    Ok(SimBerResult {
        pe,
        ci95: wilson_interval(pe * n, n),
        snapshots: sim.snapshots,
        ones: counts.sent[1],
        zeros: counts.sent[0],
        errors_one: counts.errors[1],
        errors_zero: counts.errors[0],
        relay_zero_rate: relay_zero as f64 / n,
        breakdown,
    })
}

/// Complex counts at both receivers over one realization with information bit `bit`.
pub fn two_hop_trace(
    sim: &SimConfig,
    link: &LinkConfig,
    snapshot: u64,
    bit: bool,
) -> Result<Vec<TracePoint>> {
    let world = TwoHop::new(sim, link)?;
    let (_, tally) = world.run(bit, &mut stream_rng(sim.seed, snapshot));
    let (r, d) = (tally.counts(RELAY), tally.counts(DEST));
    Ok(r.iter()
        .zip(&d)
        .enumerate()
        .map(|(k, (&cr, &cd))| TracePoint {
            time_s: k as f64 * sim.dt,
            complexes_r: cr,
            complexes_d: cd,
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_basics() {
        let (lo, hi) = wilson_interval(50.0, 100.0);
        assert!((lo - 0.4038).abs() < 1e-4 && (hi - 0.5962).abs() < 1e-4);
        let (lo, hi) = wilson_interval(0.0, 100.0);
        assert_eq!(lo, 0.0);
        assert!(hi > 0.03 && hi < 0.04);
    }

    fn small(thresholds: Thresholds) -> (SimConfig, LinkConfig) {
        let sim = SimConfig {
            snapshots: 200,
            ..Default::default()
        };
        let mut link = LinkConfig::default();
        link.protocol.n_a = 100;
        link.protocol.n_b = 100;
        link.protocol.budget = None;
        link.thresholds = Some(thresholds);
        (sim, link)
    }

    #[test]
    fn always_one() {
        let (sim, link) = small(Thresholds {
            tau_r: -1_000_000,
            tau_d: -1_000_000,
        });
        let r = simulate_two_hop_ber(&sim, &link).unwrap();
        assert_eq!(r.pe, link.protocol.p0);
        assert_eq!(r.relay_zero_rate, 0.0);
    }

    #[test]
    fn silent_source() {
        let (sim, mut link) = small(Thresholds { tau_r: 1, tau_d: 1 });
        link.protocol.n_a = 0;
        let r = simulate_two_hop_ber(&sim, &link).unwrap();
        assert_eq!(r.pe, link.protocol.p1);
        assert!(r.ci95.0 <= 0.5 && 0.5 <= r.ci95.1);
    }

    #[test]
    fn needs_thresholds() {
        let (sim, mut link) = small(Thresholds { tau_r: 1, tau_d: 1 });
        link.thresholds = None;
        assert!(simulate_two_hop_ber(&sim, &link).is_err());
    }

    #[test]
    fn trace_shape() {
        let (sim, link) = small(Thresholds { tau_r: 5, tau_d: 5 });
        let tr = two_hop_trace(&sim, &link, 0, true).unwrap();
        assert_eq!(tr.len(), 4 * 350 + 1);
        assert_eq!(tr[0].complexes_r, 0);
        assert!(tr.iter().take(350).all(|p| p.complexes_d == 0));
        assert!(tr.last().unwrap().complexes_d > 0);
    }
}
