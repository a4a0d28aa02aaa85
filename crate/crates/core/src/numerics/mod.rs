//! Special functions and quadrature kernels used by the channel model.

mod bessel;
mod quadrature;
mod skellam;

pub use bessel::log_bessel_i;
pub use quadrature::{
    adaptive_gauss_kronrod, gauss_kronrod_15, integrate_semi_infinite,
    integrate_semi_infinite_with, Estimate, IntegralKind, QuadratureOptions, DEFAULT_TOL,
};
pub use skellam::{
    ln_poisson_pmf, poisson_pmf, skellam_cdf, skellam_pmf, PmfTable, SkellamDist, TAIL_SIGMAS,
};

/// Complex value used by the frequency-domain channel transform.
pub type ComplexVal = num_complex::Complex64;
