use rand::Rng;
use statrs::function::erf::erfc_inv;

use super::kernel::{
    bridge_hit_probability, brownian_step, dissociation_step, mirror, norm, radial_point, sub,
    surface_interaction, EscapeSampler, Sphere, SurfaceOutcome, Vec3,
};
use super::{BoundaryRule, Engine, SimConfig};
use crate::channel::ReceiverKinetics;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Species {
    A,
    B,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BindState {
    Free,
    Bound { receiver: usize, since: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Molecule {
    pub position: Vec3,
    pub species: Species,
    pub state: BindState,
}

/// A receiver sphere together with the species it binds.
#[derive(Debug, Clone)]
pub(crate) struct Body {
    pub sphere: Sphere,
    pub kinetics: ReceiverKinetics,
    pub ligand: Species,
    sampler: EscapeSampler,
}

/// A batch of identical molecules released at one point and step.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Release {
    pub species: Species,
    pub start: Vec3,
    pub step: usize,
    pub count: u64,
}

/// Geometry, kinetics and stepping parameters of one simulated world.
#[derive(Debug, Clone)]
pub(crate) struct Scene {
    bodies: Vec<Body>,
    diffusion: f64,
    dt: f64,
    n_steps: usize,
    sim: SimConfig,
}

/// Per-body complex-count increments indexed by sample step.
#[derive(Debug, Clone)]
pub(crate) struct Tally {
    diff: Vec<Vec<i64>>,
}

impl Tally {
    /// Complex count at every sample step for body `b`.
    pub fn counts(&self, b: usize) -> Vec<u32> {
        let mut c = 0i64;
        self.diff[b][..self.diff[b].len() - 1]
            .iter()
            .map(|d| {
                c += d;
                c as u32
            })
            .collect()
    }

    fn mark(&mut self, b: usize, step: usize, delta: i64) {
        let row = &mut self.diff[b];
        let k = step.min(row.len() - 1);
        row[k] += delta;
    }
}

impl Scene {
    pub fn new(
        bodies: Vec<(Sphere, ReceiverKinetics, Species)>,
        diffusion: f64,
        n_steps: usize,
        sim: &SimConfig,
    ) -> Self {
        let bodies = bodies
            .into_iter()
            .map(|(sphere, kinetics, ligand)| Body {
                sampler: EscapeSampler::new(
                    sphere.radius,
                    diffusion,
                    kinetics.k_on,
                    sim.dt,
                    sim.desorb_placement,
                ),
                sphere,
                kinetics,
                ligand,
            })
            .collect();
        Scene {
            bodies,
            diffusion,
            dt: sim.dt,
            n_steps,
            sim: sim.clone(),
        }
    }

    pub fn empty_tally(&self) -> Tally {
        Tally {
            // one overflow slot past the last sample absorbs late events
            diff: vec![vec![0; self.n_steps + 2]; self.bodies.len()],
        }
    }

    pub fn run<R: Rng + ?Sized>(&self, releases: &[Release], rng: &mut R, tally: &mut Tally) {
        for rel in releases {
            let Some(lig) = self.bodies.iter().position(|b| b.ligand == rel.species) else {
                continue;
            };
            for _ in 0..rel.count {
                match self.sim.engine {
                    Engine::Event => self.event_molecule(rel, lig, rng, tally),
                    Engine::TimeStep => self.stepped_molecule(rel, lig, rng, tally),
                }
            }
        }
    }

    /// Exact free flights between contacts with the ligand receiver.
    fn event_molecule<R: Rng + ?Sized>(
        &self,
        rel: &Release,
        lig: usize,
        rng: &mut R,
        tally: &mut Tally,
    ) {
        let body = &self.bodies[lig];
        let (r, d) = (body.sphere.radius, self.diffusion);
        let k_off = body.kinetics.k_off;
        if body.kinetics.k_on == 0.0 {
            return;
        }
        let horizon = self.n_steps as f64 * self.dt;
        let mut t = rel.step as f64 * self.dt;
        let mut rho = norm(sub(rel.start, body.sphere.center));
        let step_of = |t: f64| (t / self.dt).ceil() as usize;
        loop {
            // first passage to the sphere: P(T <= s) = (r/rho) erfc((rho - r) / (2 sqrt(D s)))
            let reach = r / rho;
            let u: f64 = rng.random();
            if u >= reach {
                return;
            }
            let x = erfc_inv(u / reach);
            t += ((rho - r) / (2.0 * x)).powi(2) / d;
            if t > horizon {
                return;
            }
            if rng.random::<f64>() < body.sampler.mean_escape {
                rho = r + body.sampler.sample_offset(rng);
                continue;
            }
            tally.mark(lig, step_of(t), 1);
            if k_off == 0.0 {
                return;
            }
            let e: f64 = rng.random();
            t += -(1.0 - e).ln() / (k_off * body.sampler.mean_escape);
            if t > horizon {
                return;
            }
            tally.mark(lig, step_of(t), -1);
            rho = r + body.sampler.sample_offset(rng);
        }
    }

    /// Fixed-step three-dimensional propagation.
    fn stepped_molecule<R: Rng + ?Sized>(
        &self,
        rel: &Release,
        lig: usize,
        rng: &mut R,
        tally: &mut Tally,
    ) {
        let (dt, d) = (self.dt, self.diffusion);
        let body = &self.bodies[lig];
        let sphere = body.sphere;
        let kin = body.kinetics;
        let release_p = body.sampler.release_probability(kin.k_off, dt);
        let mut m = Molecule {
            position: rel.start,
            species: rel.species,
            state: BindState::Free,
        };
        // a molecule released inside an opaque body may leave it freely
        let mut exempt: Option<usize> = self
            .bodies
            .iter()
            .position(|b| norm(sub(rel.start, b.sphere.center)) < b.sphere.radius);

        for k in rel.step + 1..=self.n_steps {
            let t = k as f64 * dt;
            if let BindState::Bound { .. } = m.state {
                let freed = match self.sim.boundary_rule {
                    BoundaryRule::Splitting => (rng.random::<f64>() < release_p).then(|| {
                        radial_point(
                            sphere.center,
                            m.position,
                            sphere.radius + body.sampler.sample_offset(rng),
                        )
                    }),
                    BoundaryRule::ErbanChapman => dissociation_step(
                        m.position,
                        sphere,
                        kin.k_off,
                        dt,
                        d,
                        self.sim.desorb_placement,
                        rng,
                    ),
                };
                if let Some(p) = freed {
                    m.position = p;
                    m.state = BindState::Free;
                    tally.mark(lig, k, -1);
                }
                continue;
            }

            let old = m.position;
            let mut new = brownian_step(old, dt, d, rng);
            if self.sim.opaque_bodies {
                for (j, other) in self.bodies.iter().enumerate() {
                    if j == lig {
                        continue;
                    }
                    let inside = norm(sub(new, other.sphere.center)) < other.sphere.radius;
                    if exempt == Some(j) {
                        if !inside {
                            exempt = None;
                        }
                    } else if inside {
                        new = mirror(new, other.sphere);
                    }
                }
            }
            if exempt == Some(lig) {
                // released at the centre of its own ligand receiver; not a
                // configuration the link produces, treat as already outside
                exempt = None;
            }

            let h1 = norm(sub(old, sphere.center)) - sphere.radius;
            let h2 = norm(sub(new, sphere.center)) - sphere.radius;
            match self.sim.boundary_rule {
                BoundaryRule::ErbanChapman => {
                    if h2 < 0.0 {
                        match surface_interaction(old, new, sphere, kin.k_on, dt, d, rng) {
                            SurfaceOutcome::Bound(p) => {
                                m.position = p;
                                m.state = BindState::Bound {
                                    receiver: lig,
                                    since: t,
                                };
                                tally.mark(lig, k, 1);
                                continue;
                            }
                            SurfaceOutcome::Reflected(p) => new = p,
                        }
                    }
                }
                BoundaryRule::Splitting => {
                    let contact =
                        h2 < 0.0 || rng.random::<f64>() < bridge_hit_probability(h1, h2, d, dt);
                    if contact {
                        let escape =
                            kin.k_on == 0.0 || rng.random::<f64>() < body.sampler.mean_escape;
                        if escape {
                            new = radial_point(
                                sphere.center,
                                new,
                                sphere.radius + body.sampler.sample_offset(rng),
                            );
                        } else {
                            // the complex may also break up in the remainder of the step
                            let frac: f64 = rng.random();
                            let p = body.sampler.release_probability(kin.k_off, frac * dt);
                            if rng.random::<f64>() < p {
                                new = radial_point(
                                    sphere.center,
                                    new,
                                    sphere.radius + body.sampler.sample_offset(rng),
                                );
                            } else {
                                m.position = radial_point(sphere.center, new, sphere.radius);
                                m.state = BindState::Bound {
                                    receiver: lig,
                                    since: t,
                                };
                                tally.mark(lig, k, 1);
                                continue;
                            }
                        }
                    }
                }
            }
            debug_assert!(norm(sub(new, sphere.center)) >= sphere.radius * (1.0 - 1e-12));
            m.position = new;
        }
    }
}
