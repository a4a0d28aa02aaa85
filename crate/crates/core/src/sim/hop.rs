use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::engine::{Release, Scene, Species};
use super::kernel::Sphere;
use super::SimConfig;
use crate::channel::{BitSeq, HopChannel};
use crate::error::{Error, Result};

/// Molecules per independent random stream in ensemble estimates.
const CHUNK: u64 = 4096;

pub(crate) fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Complex counts of one hop in one realization.
#[derive(Debug, Clone, PartialEq)]
pub struct HopTrace {
    pub dt: f64,
    /// Bound complexes at `k * dt`, `k = 0..=steps`.
    pub complex_count: Vec<u32>,
    /// Net change of the complex count over each slot.
    pub slot_counts: Vec<i64>,
}

impl HopTrace {
    fn from_counts(dt: f64, counts: Vec<u32>, steps_per_bit: usize, slots: usize) -> Self {
        let slot_counts = (1..=slots)
            .map(|n| counts[n * steps_per_bit] as i64 - counts[(n - 1) * steps_per_bit] as i64)
            .collect();
        HopTrace {
            dt,
            complex_count: counts,
            slot_counts,
        }
    }
}

fn hop_scene(hop: &HopChannel, n_steps: usize, sim: &SimConfig) -> Scene {
    let sphere = Sphere {
        center: [hop.distance, 0.0, 0.0],
        radius: hop.receiver.radius,
    };
    Scene::new(
        vec![(sphere, hop.receiver, Species::A)],
        hop.diffusion,
        n_steps,
        sim,
    )
}

/// One realization of a single hop: `emission` molecules leave the origin at
/// the start of every slot whose bit is 1.
pub fn simulate_hop(
    hop: &HopChannel,
    bits: &BitSeq,
    emission: u64,
    bit_interval: f64,
    sim: &SimConfig,
    snapshot: u64,
) -> Result<HopTrace> {
    hop.validate()?;
    let spb = sim.validate(bit_interval)?;
    let scene = hop_scene(hop, spb * bits.len(), sim);
    Ok(run_hop(
        &scene,
        bits,
        emission,
        spb,
        sim.dt,
        &mut stream_rng(sim.seed, snapshot),
    ))
}

fn run_hop(
    scene: &Scene,
    bits: &BitSeq,
    emission: u64,
    spb: usize,
    dt: f64,
    rng: &mut ChaCha8Rng,
) -> HopTrace {
    let releases: Vec<Release> = bits
        .iter()
        .enumerate()
        .filter(|&(_, b)| b)
        .map(|(i, _)| Release {
            species: Species::A,
            start: [0.0; 3],
            step: i * spb,
            count: emission,
        })
        .collect();
    let mut tally = scene.empty_tally();
    scene.run(&releases, rng, &mut tally);
    HopTrace::from_counts(dt, tally.counts(0), spb, bits.len())
}

/// Net count of slot `slot` (one-based) in each of `sim.snapshots` independent
/// realizations, in snapshot order.
pub fn slot_count_samples(
    hop: &HopChannel,
    bits: &BitSeq,
    emission: u64,
    bit_interval: f64,
    slot: usize,
    sim: &SimConfig,
) -> Result<Vec<i64>> {
    hop.validate()?;
    let spb = sim.validate(bit_interval)?;
    if slot == 0 || slot > bits.len() {
        return Err(Error::InvalidConfig(format!(
            "slot {slot} outside 1..={}",
            bits.len()
        )));
    }
    let scene = hop_scene(hop, spb * slot, sim);
    let prefix = BitSeq::new(bits.as_slice()[..slot].to_vec());
    Ok((0..sim.snapshots)
        .into_par_iter()
        .map(|s| {
            let trace = run_hop(
                &scene,
                &prefix,
                emission,
                spb,
                sim.dt,
                &mut stream_rng(sim.seed, s),
            );
            trace.slot_counts[slot - 1]
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PsiEstimate {
    pub t: f64,
    pub psi_hat: f64,
    pub std_err: f64,
}

/// Bound fraction of `molecules` ligands released together at `t = 0`,
/// sampled at each time of `t_grid` (rounded to the `dt` grid).
pub fn estimate_psi_mc(
    hop: &HopChannel,
    t_grid: &[f64],
    molecules: u64,
    sim: &SimConfig,
) -> Result<Vec<PsiEstimate>> {
    hop.validate()?;
    if molecules < 1000 {
        return Err(Error::InvalidConfig(format!(
            "at least 1000 molecules are needed, got {molecules}"
        )));
    }
    let t_max = t_grid.iter().copied().fold(0.0, f64::max);
    if t_grid.iter().any(|&t| !(t.is_finite() && t >= 0.0)) {
        return Err(Error::InvalidConfig(
            "sample times must be finite and >= 0".into(),
        ));
    }
    let n_steps = (t_max / sim.dt).round() as usize;
    sim.validate(sim.dt * n_steps.max(1) as f64)?;
    let scene = hop_scene(hop, n_steps, sim);
    let chunks = molecules.div_ceil(CHUNK);
    let bound: Vec<u64> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let count = CHUNK.min(molecules - c * CHUNK);
            let mut tally = scene.empty_tally();
            let rel = Release {
                species: Species::A,
                start: [0.0; 3],
                step: 0,
                count,
            };
            scene.run(&[rel], &mut stream_rng(sim.seed, c), &mut tally);
            let counts = tally.counts(0);
            t_grid
                .iter()
                .map(|&t| counts[((t / sim.dt).round() as usize).min(n_steps)] as u64)
                .collect::<Vec<u64>>()
        })
        .reduce(
            || vec![0; t_grid.len()],
            |a, b| a.iter().zip(&b).map(|(x, y)| x + y).collect(),
        );
    let m = molecules as f64;
    Ok(t_grid
        .iter()
        .zip(bound)
        .map(|(&t, b)| {
            let p = b as f64 / m;
            PsiEstimate {
                t,
                psi_hat: p,
                std_err: (p * (1.0 - p) / m).sqrt(),
            }
        })
        .collect())
}
