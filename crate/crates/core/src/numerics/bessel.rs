//! Logarithm of the modified Bessel function of the first kind, I_m(x), for
//! integer orders.
//!
//! Small and moderate arguments use the ascending series, summed with a
//! running rescale so the partial sum never overflows. Large arguments use the
//! Debye uniform expansion (orders >= 1) or Hankel's expansion (order 0).

use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// Above this argument the asymptotic expansions take over from the series.
const SERIES_LIMIT: f64 = 700.0;

const RESCALE: f64 = 1e250;

/// Returns `ln I_order(x)`.
///
/// `I_m(0)` is zero for `m >= 1`, in which case `-inf` is returned.
pub fn log_bessel_i(order: u32, x: f64) -> Result<f64> {
    if x.is_nan() || x < 0.0 {
        return Err(Error::Domain(format!("log_bessel_i: x = {x} must be >= 0")));
    }
    if x == 0.0 {
        return Ok(if order == 0 { 0.0 } else { f64::NEG_INFINITY });
    }
    if x.is_infinite() {
        return Ok(f64::INFINITY);
    }
    if x <= SERIES_LIMIT {
        Ok(ln_series(order, x))
    } else if order == 0 {
        Ok(ln_hankel_order0(x))
    } else {
        Ok(ln_debye(order as f64, x))
    }
}

fn ln_series(order: u32, x: f64) -> f64 {
    let m = order as f64;
    let y = 0.25 * x * x;
    let mut term = 1.0_f64;
    let mut sum = 1.0_f64;
    let mut log_offset = 0.0_f64;
    let mut k = 0.0_f64;
    loop {
        k += 1.0;
        let ratio = y / (k * (k + m));
        term *= ratio;
        sum += term;
        if sum > RESCALE {
            sum /= RESCALE;
            term /= RESCALE;
            log_offset += RESCALE.ln();
        }
        if ratio < 1.0 && term <= sum * 1e-17 {
            break;
        }
    }
    m * (0.5 * x).ln() - ln_gamma(m + 1.0) + sum.ln() + log_offset
}

/// Debye expansion of I_nu(nu z) with the first five correction polynomials.
fn ln_debye(nu: f64, x: f64) -> f64 {
    let z = x / nu;
    let s = (1.0 + z * z).sqrt();
    let p = 1.0 / s;
    let eta = s + (z / (1.0 + s)).ln();
    let p2 = p * p;
    let u1 = p * (3.0 - 5.0 * p2) / 24.0;
    let u2 = p2 * (81.0 - 462.0 * p2 + 385.0 * p2 * p2) / 1152.0;
    let u3 = p * p2 * (30375.0 - 369603.0 * p2 + 765765.0 * p2 * p2 - 425425.0 * p2 * p2 * p2)
        / 414720.0;
    let u4 = p2
        * p2
        * (4465125.0 - 94121676.0 * p2 + 349922430.0 * p2 * p2 - 446185740.0 * p2 * p2 * p2
            + 185910725.0 * p2 * p2 * p2 * p2)
        / 39813120.0;
    let inv = 1.0 / nu;
    let series = 1.0 + inv * (u1 + inv * (u2 + inv * (u3 + inv * u4)));
    nu * eta - 0.5 * (2.0 * std::f64::consts::PI * nu).ln() - 0.25 * (1.0 + z * z).ln()
        + series.ln()
}

fn ln_hankel_order0(x: f64) -> f64 {
    // I_0(x) ~ e^x / sqrt(2 pi x) * sum_k prod_{j<=k} (2j-1)^2 / (k! (8x)^k)
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..12 {
        let j = (2 * k - 1) as f64;
        term *= j * j / (k as f64 * 8.0 * x);
        sum += term;
    }
    x - 0.5 * (2.0 * std::f64::consts::PI * x).ln() + sum.ln()
}
