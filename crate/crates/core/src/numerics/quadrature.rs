//! Integration over `(0, inf)` for the three integral shapes the channel model
//! needs: `sin(z) f(z)`, `cos(z) f(z)` and plain `f(z)`.
//!
//! Oscillatory weights split the axis at the zeros of the weight, integrate
//! each panel with adaptive Gauss-Kronrod, and accelerate the alternating
//! partial sums by iterated averaging. The smooth kind walks geometrically
//! growing panels until contributions drop below the tolerance. The first
//! panel is always integrated in `z = u^2` so `z^(-1/2)` endpoint behaviour
//! is removed.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};

/// Default absolute tolerance for semi-infinite integrals.
pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IntegralKind {
    /// `int_0^inf sin(z) f(z) dz`
    OscillatorySin,
    /// `int_0^inf cos(z) f(z) dz`
    OscillatoryCos,
    /// `int_0^inf f(z) dz`
    Smooth,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureOptions {
    pub tol: f64,
    pub max_panels: usize,
    /// Partial sums entering one iterated-averaging estimate.
    pub averaging_depth: usize,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        QuadratureOptions {
            tol: DEFAULT_TOL,
            max_panels: 20_000,
            averaging_depth: 24,
        }
    }
}

impl QuadratureOptions {
    pub fn with_tol(tol: f64) -> Self {
        QuadratureOptions {
            tol,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub panels: usize,
}

/// Integrates the weighted `f` over `(0, inf)` to absolute tolerance `tol`.
pub fn integrate_semi_infinite<F>(f: F, kind: IntegralKind, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    integrate_semi_infinite_with(f, kind, &QuadratureOptions::with_tol(tol)).map(|e| e.value)
}

pub fn integrate_semi_infinite_with<F>(
    f: F,
    kind: IntegralKind,
    opts: &QuadratureOptions,
) -> Result<Estimate>
where
    F: Fn(f64) -> f64,
{
    if opts.tol.is_nan() || opts.tol <= 0.0 {
        return Err(Error::Domain(format!(
            "tolerance must be > 0, got {}",
            opts.tol
        )));
    }
    match kind {
        IntegralKind::Smooth => smooth(&f, opts),
        IntegralKind::OscillatorySin => oscillatory(&|z| z.sin() * f(z), 0.0, PI, opts),
        IntegralKind::OscillatoryCos => oscillatory(&|z| z.cos() * f(z), -FRAC_PI_2, PI, opts),
    }
}

/// Integral of `g` over `[0, b]` computed in `z = u^2`.
fn first_panel(g: &dyn Fn(f64) -> f64, b: f64, tol: f64) -> (f64, f64) {
    let h = |u: f64| 2.0 * u * g(u * u);
    adaptive_gauss_kronrod(&h, 0.0, b.sqrt(), tol)
}

fn smooth(f: &dyn Fn(f64) -> f64, opts: &QuadratureOptions) -> Result<Estimate> {
    let panel_tol = opts.tol / 20.0;
    let (mut total, mut err) = first_panel(f, 1.0, panel_tol);
    let mut a = 1.0;
    let mut quiet = 0;
    for panel in 1..opts.max_panels.min(1100) {
        let b = 2.0 * a;
        let (v, e) = adaptive_gauss_kronrod(f, a, b, panel_tol);
        total += v;
        err += e;
        if v.abs() < opts.tol / 10.0 {
            quiet += 1;
            if quiet >= 2 && panel >= 3 {
                return finish(total, err, panel + 1, opts);
            }
        } else {
            quiet = 0;
        }
        a = b;
    }
    Err(Error::NonConvergence {
        estimate: total,
        achieved: err,
        requested: opts.tol,
        panels: opts.max_panels,
    })
}

fn finish(value: f64, error: f64, panels: usize, opts: &QuadratureOptions) -> Result<Estimate> {
    if !value.is_finite() {
        return Err(Error::NonConvergence {
            estimate: value,
            achieved: f64::INFINITY,
            requested: opts.tol,
            panels,
        });
    }
    Ok(Estimate {
        value,
        error,
        panels,
    })
}

/// Panels run between consecutive zeros `offset + k * period` of the weight,
/// starting from zero.
fn oscillatory(
    g: &dyn Fn(f64) -> f64,
    offset: f64,
    period: f64,
    opts: &QuadratureOptions,
) -> Result<Estimate> {
    let panel_tol = opts.tol / 100.0;
    let depth = opts.averaging_depth.max(2);
    let mut edge = offset + period;
    let (first, mut quad_err) = first_panel(g, edge, panel_tol);
    let mut sums = vec![first];
    let mut prev_estimate: Option<f64> = None;
    let mut settled = 0;
    let mut last_diff = f64::INFINITY;
    let mut quiet = 0;

    for panel in 1..opts.max_panels {
        let next = edge + period;
        let (v, e) = adaptive_gauss_kronrod(g, edge, next, panel_tol);
        edge = next;
        quad_err += e;
        let s = sums.last().copied().unwrap_or(0.0) + v;
        sums.push(s);

        // Terms that have decayed to nothing: the plain partial sum is final.
        if v.abs() < opts.tol / 100.0 {
            quiet += 1;
            if quiet >= 3 {
                return finish(s, quad_err + v.abs(), panel + 1, opts);
            }
        } else {
            quiet = 0;
        }

        if sums.len() < depth {
            continue;
        }
        let estimate = iterated_average(&sums[sums.len() - depth..]);
        if let Some(p) = prev_estimate {
            last_diff = (estimate - p).abs();
            if last_diff < opts.tol {
                settled += 1;
                if settled >= 2 {
                    return finish(estimate, quad_err + last_diff, panel + 1, opts);
                }
            } else {
                settled = 0;
            }
        }
        prev_estimate = Some(estimate);
    }
    Err(Error::NonConvergence {
        estimate: prev_estimate.unwrap_or(sums[sums.len() - 1]),
        achieved: last_diff + quad_err,
        requested: opts.tol,
        panels: opts.max_panels,
    })
}

/// Repeatedly replaces the sequence by the means of adjacent entries until a
/// single value remains.
fn iterated_average(partial_sums: &[f64]) -> f64 {
    let mut row = partial_sums.to_vec();
    while row.len() > 1 {
        for i in 0..row.len() - 1 {
            row[i] = 0.5 * (row[i] + row[i + 1]);
        }
        row.pop();
    }
    row[0]
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// 15-point Kronrod rule with the embedded 7-point Gauss rule as error estimate.
pub fn gauss_kronrod_15(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let pair = f(c - dx) + f(c + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// Globally adaptive bisection on `[a, b]` to absolute tolerance `tol`.
/// Returns the best estimate and its error even if the subdivision cap is hit.
pub fn adaptive_gauss_kronrod(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> (f64, f64) {
    const MAX_INTERVALS: usize = 400;
    let (v, e) = gauss_kronrod_15(f, a, b);
    let mut intervals = vec![(a, b, v, e)];
    let mut total = v;
    let mut err = e;
    while err > tol && intervals.len() < MAX_INTERVALS {
        let worst = intervals
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .map(|(i, _)| i)
            .unwrap_or(0);
        let (lo, hi, pv, pe) = intervals.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            intervals.push((lo, hi, pv, pe));
            break;
        }
        let (v1, e1) = gauss_kronrod_15(f, lo, mid);
        let (v2, e2) = gauss_kronrod_15(f, mid, hi);
        total += v1 + v2 - pv;
        err += e1 + e2 - pe;
        intervals.push((lo, mid, v1, e1));
        intervals.push((mid, hi, v2, e2));
    }
    // re-sum to shed the drift of the running updates
    let total: f64 = if intervals.len() > 1 {
        intervals.iter().map(|iv| iv.2).sum()
    } else {
        total
    };
    let err: f64 = intervals.iter().map(|iv| iv.3).sum();
    (total, err)
}
