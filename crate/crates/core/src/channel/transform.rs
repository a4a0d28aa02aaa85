use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::HopChannel;
use crate::error::{Error, Result};
use crate::numerics::ComplexVal;

/// Which closed form of the frequency-domain kernel to evaluate.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TransformForm {
    /// Reversible-binding flux transform: the kernel vanishes when `k_on = 0`
    /// and relaxes to the bound equilibrium when `k_off > 0`.
    #[default]
    ReactiveFlux,
    /// The complement bracket `1 - q / (1/r + kappa/D + q)`. It keeps a
    /// nonzero reflecting-sphere term at `k_on = 0`.
    Complement,
}

/// Evaluates `U(w)` for the default [`TransformForm`].
pub fn u_transform(w: f64, hop: &HopChannel) -> Result<ComplexVal> {
    u_transform_with(w, hop, TransformForm::default())
}

pub fn u_transform_with(w: f64, hop: &HopChannel, form: TransformForm) -> Result<ComplexVal> {
    if !(w.is_finite() && w > 0.0) {
        return Err(Error::Domain(format!("u_transform: w = {w} must be > 0")));
    }
    Ok(kernel(w, hop, form))
}

/// Unchecked kernel used inside the integrands.
pub(crate) fn kernel(w: f64, hop: &HopChannel, form: TransformForm) -> ComplexVal {
    let d = hop.distance;
    let dc = hop.diffusion;
    let r = hop.receiver.radius;
    let jw = ComplexVal::new(0.0, w);
    let q = (jw / dc).sqrt();
    let kappa = jw * hop.receiver.k_on / (jw + hop.receiver.k_off);
    let admittance = kappa / dc;
    let denom = 1.0 / r + admittance + q;
    let bracket = match form {
        TransformForm::ReactiveFlux => admittance / denom,
        TransformForm::Complement => 1.0 - q / denom,
    };
    bracket * (-(d - r) * q).exp() / (4.0 * PI * d * dc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::ReceiverKinetics;

    fn reference_hop(k_on: f64, k_off: f64) -> HopChannel {
        HopChannel::new(79.4, 15.0, ReceiverKinetics::new(5.0, k_on, k_off).unwrap()).unwrap()
    }

    /// Component-wise real arithmetic, written out without the complex type.
    fn oracle(w: f64, hop: &HopChannel, form: TransformForm) -> (f64, f64) {
        let (d, dc, r) = (hop.distance, hop.diffusion, hop.receiver.radius);
        let (kon, koff) = (hop.receiver.k_on, hop.receiver.k_off);
        // sqrt(j w / D) = sqrt(w / (2D)) (1 + j)
        let s = (w / (2.0 * dc)).sqrt();
        let (qr, qi) = (s, s);
        // kappa = kon * j w / (koff + j w) = kon * (w^2 + j w koff) / (koff^2 + w^2)
        let m = koff * koff + w * w;
        let (kr, ki) = (kon * w * w / m, kon * w * koff / m);
        let (ar, ai) = (kr / dc, ki / dc);
        let (dr, di) = (1.0 / r + ar + qr, ai + qi);
        let dd = dr * dr + di * di;
        let (nr, ni) = match form {
            TransformForm::ReactiveFlux => (ar, ai),
            TransformForm::Complement => (dr - qr, di - qi),
        };
        let (br, bi) = ((nr * dr + ni * di) / dd, (ni * dr - nr * di) / dd);
        let mag = (-(d - r) * s).exp() / (4.0 * PI * d * dc);
        let (c, sn) = ((-(d - r) * s).cos(), (-(d - r) * s).sin());
        let (er, ei) = (mag * c, mag * sn);
        (br * er - bi * ei, br * ei + bi * er)
    }

    #[test]
    fn matches_componentwise_oracle() {
        let hop = reference_hop(1e4, 100.0);
        for form in [TransformForm::ReactiveFlux, TransformForm::Complement] {
            for &w in &[1e-4, 0.1, 1.0, 7.5, 300.0, 1e4] {
                let u = u_transform_with(w, &hop, form).unwrap();
                let (er, ei) = oracle(w, &hop, form);
                let scale = er.hypot(ei);
                assert!(
                    (u.re - er).abs() <= 1e-12 * scale && (u.im - ei).abs() <= 1e-12 * scale,
                    "{form:?} w={w}: {u} vs {er}+{ei}i"
                );
            }
        }
    }

    #[test]
    fn zero_association() {
        let hop = reference_hop(0.0, 100.0);
        let (d, dc, r) = (15.0, 79.4, 5.0);
        for &w in &[0.01, 1.0, 50.0] {
            let u = u_transform_with(w, &hop, TransformForm::Complement).unwrap();
            let q = (ComplexVal::new(0.0, w) / dc).sqrt();
            let expect = (1.0 - q / (1.0 / r + q)) * (-(d - r) * q).exp() / (4.0 * PI * d * dc);
            assert!((u - expect).norm() <= 1e-14 * expect.norm());
            assert_eq!(u_transform(w, &hop).unwrap(), ComplexVal::new(0.0, 0.0));
        }
    }

    #[test]
    fn low_frequency_limit() {
        let hop = reference_hop(1e4, 100.0);
        let u = u_transform_with(1e-12, &hop, TransformForm::Complement).unwrap();
        let limit = 1.0 / (4.0 * PI * 15.0 * 79.4);
        assert!((u.re - limit).abs() < 1e-5 * limit);
        assert!(u.im.abs() < 1e-5 * limit);
    }

    #[test]
    fn magnitude_decays() {
        // The reactive form starts at zero when k_off > 0, so only its
        // irreversible case is monotone.
        let cases = [
            (TransformForm::Complement, reference_hop(2e3, 10.0)),
            (TransformForm::Complement, reference_hop(1e4, 100.0)),
            (TransformForm::ReactiveFlux, reference_hop(2e3, 0.0)),
        ];
        for (form, hop) in cases {
            let mut prev = f64::INFINITY;
            for k in 0..200 {
                let w = 1e-3 * 1.1_f64.powi(k);
                let m = u_transform_with(w, &hop, form).unwrap().norm();
                assert!(m <= prev * (1.0 + 1e-12), "{form:?} at w={w}");
                prev = m;
            }
        }
    }

    #[test]
    fn rejects_nonpositive_frequency() {
        let hop = reference_hop(1e4, 100.0);
        assert!(matches!(u_transform(0.0, &hop), Err(Error::Domain(_))));
        assert!(u_transform(-1.0, &hop).is_err());
        assert!(u_transform(f64::NAN, &hop).is_err());
    }
}
