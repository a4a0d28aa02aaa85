//! Single-molecule update rules shared by both simulation engines.

use log::warn;
use rand::Rng;
use rand_distr::StandardNormal;

use super::DesorbPlacement;
use crate::numerics::gauss_kronrod_15;

pub type Vec3 = [f64; 3];

pub(crate) fn sub(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub(crate) fn norm(a: Vec3) -> f64 {
    (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt()
}

/// Point at distance `radius` from `center` in the direction of `towards`.
pub(crate) fn radial_point(center: Vec3, towards: Vec3, radius: f64) -> Vec3 {
    let v = sub(towards, center);
    let n = norm(v);
    let u = if n > 0.0 {
        [v[0] / n, v[1] / n, v[2] / n]
    } else {
        [1.0, 0.0, 0.0]
    };
    [
        center[0] + radius * u[0],
        center[1] + radius * u[1],
        center[2] + radius * u[2],
    ]
}

/// Spherical body as seen by the step rules.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sphere {
    pub center: Vec3,
    pub radius: f64,
}

/// Free diffusion over `dt`: each axis moves by `N(0, 2 D dt)`.
pub fn brownian_step<R: Rng + ?Sized>(pos: Vec3, dt: f64, diffusion: f64, rng: &mut R) -> Vec3 {
    if diffusion == 0.0 {
        return pos;
    }
    let s = (2.0 * diffusion * dt).sqrt();
    let mut out = pos;
    for x in &mut out {
        let g: f64 = rng.sample(StandardNormal);
        *x += s * g;
    }
    out
}

/// Binding probability per boundary crossing in the classic reactive-boundary
/// discretization, `k_on sqrt(pi dt / D)`. May exceed 1.
pub fn association_probability(k_on: f64, dt: f64, diffusion: f64) -> f64 {
    k_on * (std::f64::consts::PI * dt / diffusion).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SurfaceOutcome {
    Bound(Vec3),
    Reflected(Vec3),
}

/// Resolves a step from `old` (outside) to `new` (inside `sphere`): binds at the
/// crossing point with probability `p_on`, otherwise mirrors `new` about the surface.
pub fn surface_interaction<R: Rng + ?Sized>(
    old: Vec3,
    new: Vec3,
    sphere: Sphere,
    k_on: f64,
    dt: f64,
    diffusion: f64,
    rng: &mut R,
) -> SurfaceOutcome {
    let mut p_on = association_probability(k_on, dt, diffusion);
    if p_on > 1.0 {
        warn!("association probability {p_on:.3} exceeds 1 and is capped; reduce dt");
        p_on = 1.0;
    }
    if p_on > 0.0 && rng.random::<f64>() < p_on {
        SurfaceOutcome::Bound(crossing_point(old, new, sphere))
    } else {
        SurfaceOutcome::Reflected(mirror(new, sphere))
    }
}

/// Reflection of an interior point to the same depth outside the surface.
pub fn mirror(inside: Vec3, sphere: Sphere) -> Vec3 {
    let depth = sphere.radius - norm(sub(inside, sphere.center));
    radial_point(sphere.center, inside, sphere.radius + depth)
}

/// First intersection of the segment `old -> new` with the sphere surface.
pub(crate) fn crossing_point(old: Vec3, new: Vec3, sphere: Sphere) -> Vec3 {
    let o = sub(old, sphere.center);
    let d = sub(new, old);
    let a = d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
    let b = 2.0 * (o[0] * d[0] + o[1] * d[1] + o[2] * d[2]);
    let c = o[0] * o[0] + o[1] * o[1] + o[2] * o[2] - sphere.radius * sphere.radius;
    let disc = b * b - 4.0 * a * c;
    if a == 0.0 || disc < 0.0 {
        return radial_point(sphere.center, new, sphere.radius);
    }
    let s = ((-b - disc.sqrt()) / (2.0 * a)).clamp(0.0, 1.0);
    let p = [old[0] + s * d[0], old[1] + s * d[1], old[2] + s * d[2]];
    // land exactly on the surface despite rounding
    radial_point(sphere.center, p, sphere.radius)
}

/// One dissociation trial for a bound molecule at `surface_pos`. Returns the new
/// free position if the complex breaks up during `dt`.
pub fn dissociation_step<R: Rng + ?Sized>(
    surface_pos: Vec3,
    sphere: Sphere,
    k_off: f64,
    dt: f64,
    diffusion: f64,
    placement: DesorbPlacement,
    rng: &mut R,
) -> Option<Vec3> {
    if k_off == 0.0 || rng.random::<f64>() >= dissociation_probability(k_off, dt) {
        return None;
    }
    let h = match placement {
        DesorbPlacement::SurfaceOffset => {
            let g: f64 = rng.sample(StandardNormal);
            (2.0 * diffusion * dt).sqrt() * g.abs()
        }
        DesorbPlacement::Fixed(eps) => eps,
    };
    Some(radial_point(sphere.center, surface_pos, sphere.radius + h))
}

pub fn dissociation_probability(k_off: f64, dt: f64) -> f64 {
    -(-k_off * dt).exp_m1()
}

/// Probability that a molecule touching the surface and then moved to `r + h`
/// should be released rather than bound, so that the eventual escape
/// probability from contact equals `D / (D + k_on r)`.
pub fn escape_probability(h: f64, radius: f64, diffusion: f64, k_on: f64) -> f64 {
    diffusion * (radius + h) / (h * (diffusion + k_on * radius) + diffusion * radius)
}

/// Brownian-bridge probability that a step between two outside points touched a
/// plane at distances `h1`, `h2`.
pub(crate) fn bridge_hit_probability(h1: f64, h2: f64, diffusion: f64, dt: f64) -> f64 {
    (-h1 * h2 / (diffusion * dt)).exp()
}

/// Contact resolution for the splitting boundary: averaged escape probability
/// and a sampler for the release offset conditioned on escaping.
#[derive(Debug, Clone)]
pub struct EscapeSampler {
    /// `E[p_s(h)]` over the offset law.
    pub mean_escape: f64,
    /// Offsets and their cumulative escape-weighted mass, for inversion.
    grid: Vec<f64>,
    cdf: Vec<f64>,
}

const GRID_CELLS: usize = 1024;
const GRID_SIGMAS: f64 = 10.0;

impl EscapeSampler {
    pub fn new(
        radius: f64,
        diffusion: f64,
        k_on: f64,
        dt: f64,
        placement: DesorbPlacement,
    ) -> Self {
        let ps = |h: f64| escape_probability(h, radius, diffusion, k_on);
        match placement {
            DesorbPlacement::Fixed(eps) => EscapeSampler {
                mean_escape: ps(eps),
                grid: vec![eps, eps],
                cdf: vec![0.0, 1.0],
            },
            DesorbPlacement::SurfaceOffset => {
                let sigma = (2.0 * diffusion * dt).sqrt();
                let norm = (2.0 / std::f64::consts::PI).sqrt() / sigma;
                let density = |h: f64| ps(h) * norm * (-0.5 * (h / sigma).powi(2)).exp();
                let width = GRID_SIGMAS * sigma / GRID_CELLS as f64;
                let grid: Vec<f64> = (0..=GRID_CELLS).map(|k| k as f64 * width).collect();
                let mut cdf = Vec::with_capacity(grid.len());
                cdf.push(0.0);
                for w in grid.windows(2) {
                    let (v, _) = gauss_kronrod_15(&density, w[0], w[1]);
                    cdf.push(cdf.last().copied().unwrap_or(0.0) + v);
                }
                let mean_escape = cdf[GRID_CELLS];
                cdf.iter_mut().for_each(|c| *c /= mean_escape);
                EscapeSampler {
                    mean_escape,
                    grid,
                    cdf,
                }
            }
        }
    }

    /// Offset of a released molecule, given that it escapes.
    pub fn sample_offset<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        let k = self
            .cdf
            .partition_point(|&c| c < u)
            .clamp(1, self.cdf.len() - 1);
        let (c0, c1) = (self.cdf[k - 1], self.cdf[k]);
        let f = if c1 > c0 { (u - c0) / (c1 - c0) } else { 0.0 };
        self.grid[k - 1] + f * (self.grid[k] - self.grid[k - 1])
    }

    /// Per-step probability that a bound molecule is released.
    pub fn release_probability(&self, k_off: f64, dt: f64) -> f64 {
        dissociation_probability(k_off * self.mean_escape, dt)
    }
}
