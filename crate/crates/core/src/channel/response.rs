use std::collections::HashMap;

use log::warn;
use parking_lot::RwLock;

use super::transform::{kernel, TransformForm};
use super::HopChannel;
use crate::error::{Error, Result};
use crate::numerics::{integrate_semi_infinite_with, IntegralKind, QuadratureOptions};

/// Default absolute tolerance on the binding response.
pub const DEFAULT_PSI_TOL: f64 = 1e-9;

/// Computes `psi(t)` for `hop` without memoization, using the default kernel.
pub fn binding_response(t: f64, hop: &HopChannel, tol: f64) -> Result<f64> {
    ChannelModel::new(ResponseOptions {
        tol,
        ..Default::default()
    })
    .psi(t, hop)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResponseOptions {
    pub tol: f64,
    pub form: TransformForm,
    /// Panel cap handed to the semi-infinite quadrature.
    pub max_panels: usize,
}

impl Default for ResponseOptions {
    fn default() -> Self {
        ResponseOptions {
            tol: DEFAULT_PSI_TOL,
            form: TransformForm::default(),
            max_panels: QuadratureOptions::default().max_panels,
        }
    }
}

type HopKey = [u64; 5];

/// Analytical channel with memoized binding responses.
///
/// Safe to share between threads; concurrent callers see the same values as
/// sequential ones because each entry is a pure function of its key.
#[derive(Debug, Default)]
pub struct ChannelModel {
    opts: ResponseOptions,
    psi_cache: RwLock<HashMap<(HopKey, u64), f64>>,
    tail_cache: RwLock<HashMap<HopKey, f64>>,
}

impl ChannelModel {
    pub fn new(opts: ResponseOptions) -> Self {
        ChannelModel {
            opts,
            ..Default::default()
        }
    }

    pub fn options(&self) -> &ResponseOptions {
        &self.opts
    }

    /// Expected fraction of molecules released at `t = 0` that are bound at `t`.
    pub fn psi(&self, t: f64, hop: &HopChannel) -> Result<f64> {
        if !(t.is_finite() && t > 0.0) {
            return Err(Error::Domain(format!(
                "binding response needs t > 0, got {t}"
            )));
        }
        if self.opts.tol.is_nan() || self.opts.tol <= 0.0 {
            return Err(Error::Domain(format!(
                "tolerance must be > 0, got {}",
                self.opts.tol
            )));
        }
        hop.validate()?;
        let key = (hop.key(), t.to_bits());
        if let Some(&v) = self.psi_cache.read().get(&key) {
            return Ok(v);
        }
        let v = self
            .compute(t, hop)
            .map_err(|e| e.context(format!("binding response at t = {t} s for {hop:?}")))?;
        self.psi_cache.write().insert(key, v);
        Ok(v)
    }

    fn quad(&self, hop: &HopChannel) -> QuadratureOptions {
        let scale = 4.0 * hop.receiver.radius * hop.diffusion;
        QuadratureOptions {
            tol: self.opts.tol / (3.0 * scale),
            max_panels: self.opts.max_panels,
            ..Default::default()
        }
    }

    /// `int_0^inf Im U(w) / w dw`, independent of `t`.
    fn tail(&self, hop: &HopChannel) -> Result<f64> {
        let key = hop.key();
        if let Some(&v) = self.tail_cache.read().get(&key) {
            return Ok(v);
        }
        let form = self.opts.form;
        let v = integrate_semi_infinite_with(
            |w| kernel(w, hop, form).im / w,
            IntegralKind::Smooth,
            &self.quad(hop),
        )?
        .value;
        self.tail_cache.write().insert(key, v);
        Ok(v)
    }

    fn compute(&self, t: f64, hop: &HopChannel) -> Result<f64> {
        let form = self.opts.form;
        let opts = self.quad(hop);
        let re = integrate_semi_infinite_with(
            |z| kernel(z / t, hop, form).re / z,
            IntegralKind::OscillatorySin,
            &opts,
        )?
        .value;
        let im = integrate_semi_infinite_with(
            |z| kernel(z / t, hop, form).im / z,
            IntegralKind::OscillatoryCos,
            &opts,
        )?
        .value;
        let psi = 4.0 * hop.receiver.radius * hop.diffusion * (re + im - self.tail(hop)?);
        self.check_range(psi, t)
    }

    fn check_range(&self, psi: f64, t: f64) -> Result<f64> {
        let slack = 10.0 * self.opts.tol;
        if (0.0..=1.0).contains(&psi) {
            return Ok(psi);
        }
        if psi.is_finite() && psi > -slack && psi < 1.0 + slack {
            let clamped = psi.clamp(0.0, 1.0);
            warn!("binding response {psi:e} at t = {t} s clamped to {clamped}");
            return Ok(clamped);
        }
        Err(Error::ResponseOutOfRange {
            value: psi,
            t,
            tol: self.opts.tol,
        })
    }

    /// Number of memoized `(hop, t)` entries.
    pub fn cached_len(&self) -> usize {
        self.psi_cache.read().len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::ReceiverKinetics;
    use statrs::function::erf::erfc;

    fn hop(d: f64, k_on: f64, k_off: f64) -> HopChannel {
        HopChannel::new(79.4, d, ReceiverKinetics::new(5.0, k_on, k_off).unwrap()).unwrap()
    }

    #[test]
    fn absorbing_limit_matches_first_passage() {
        let model = ChannelModel::default();
        let h = hop(15.0, 1e8, 0.0);
        for &t in &[0.1, 0.5, 1.0] {
            let got = model.psi(t, &h).unwrap();
            let exact = 5.0 / 15.0 * erfc(10.0 / (2.0 * (79.4 * t).sqrt()));
            assert!(
                ((got - exact) / exact).abs() < 0.02,
                "t={t}: {got} vs {exact}"
            );
        }
    }

    #[test]
    fn near_zero_time_is_empty() {
        let model = ChannelModel::default();
        let v = model.psi(1e-6, &hop(15.0, 1e4, 100.0)).unwrap();
        assert!((0.0..1e-6).contains(&v));
    }

    #[test]
    fn zero_association_never_binds() {
        let model = ChannelModel::default();
        for &t in &[0.05, 0.7, 2.1] {
            assert!(model.psi(t, &hop(15.0, 0.0, 10.0)).unwrap().abs() < 1e-9);
        }
    }

    #[test]
    fn known_values() {
        // Reference values from an independent high-precision inversion.
        let model = ChannelModel::default();
        let cases = [
            (1e4, 100.0, 0.7, 0.102346),
            (1e4, 100.0, 1.4, 0.135162),
            (2e3, 10.0, 0.7, 0.106854),
            (2e3, 10.0, 2.1, 0.164152),
        ];
        for (kon, koff, t, v) in cases {
            let got = model.psi(t, &hop(15.0, kon, koff)).unwrap();
            assert!((got - v).abs() < 2e-6, "({kon},{koff}) t={t}: {got} vs {v}");
        }
    }

    #[test]
    fn memoizes() {
        let model = ChannelModel::default();
        let h = hop(15.0, 1e4, 100.0);
        let a = model.psi(0.7, &h).unwrap();
        let b = model.psi(0.7, &h).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
        assert_eq!(model.cached_len(), 1);
        assert_eq!(a, binding_response(0.7, &h, DEFAULT_PSI_TOL).unwrap());
    }

    #[test]
    fn rejects_bad_arguments() {
        let model = ChannelModel::default();
        let h = hop(15.0, 1e4, 100.0);
        assert!(model.psi(0.0, &h).is_err());
        assert!(binding_response(0.5, &h, 0.0).is_err());
    }

    #[test]
    fn range_policy() {
        let model = ChannelModel::default();
        assert_eq!(model.check_range(-1e-9, 1.0).unwrap(), 0.0);
        assert_eq!(model.check_range(1.0 + 1e-9, 1.0).unwrap(), 1.0);
        assert!(matches!(
            model.check_range(-1e-3, 1.0),
            Err(Error::ResponseOutOfRange { .. })
        ));
        assert!(model.check_range(f64::NAN, 1.0).is_err());
    }
}
