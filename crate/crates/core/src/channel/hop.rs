use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Spherical receiver with reversible surface binding.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReceiverKinetics {
    /// Sphere radius (um).
    pub radius: f64,
    /// Association rate (um/s).
    pub k_on: f64,
    /// Dissociation rate (1/s).
    pub k_off: f64,
}

impl ReceiverKinetics {
    pub fn new(radius: f64, k_on: f64, k_off: f64) -> Result<Self> {
        let r = ReceiverKinetics {
            radius,
            k_on,
            k_off,
        };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "receiver radius must be > 0, got {}",
                self.radius
            )));
        }
        if !(self.k_on >= 0.0 && self.k_on.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "k_on must be >= 0, got {}",
                self.k_on
            )));
        }
        if !(self.k_off >= 0.0 && self.k_off.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "k_off must be >= 0, got {}",
                self.k_off
            )));
        }
        Ok(())
    }

    pub fn surface_area(&self) -> f64 {
        4.0 * std::f64::consts::PI * self.radius * self.radius
    }
}

/// One transmitter-to-receiver diffusion hop.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HopChannel {
    /// Diffusion coefficient of the carrier species (um^2/s).
    pub diffusion: f64,
    /// Transmitter point to receiver centre (um).
    pub distance: f64,
    pub receiver: ReceiverKinetics,
}

impl HopChannel {
    pub fn new(diffusion: f64, distance: f64, receiver: ReceiverKinetics) -> Result<Self> {
        let h = HopChannel {
            diffusion,
            distance,
            receiver,
        };
        h.validate()?;
        Ok(h)
    }

    pub fn validate(&self) -> Result<()> {
        self.receiver.validate()?;
        if !(self.diffusion > 0.0 && self.diffusion.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "diffusion coefficient must be > 0, got {}",
                self.diffusion
            )));
        }
        if !(self.distance > self.receiver.radius && self.distance.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "transmitter at {} um lies inside the receiver of radius {} um",
                self.distance, self.receiver.radius
            )));
        }
        Ok(())
    }

    pub(crate) fn key(&self) -> [u64; 5] {
        [
            self.diffusion.to_bits(),
            self.distance.to_bits(),
            self.receiver.radius.to_bits(),
            self.receiver.k_on.to_bits(),
            self.receiver.k_off.to_bits(),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        let rx = ReceiverKinetics::new(5.0, 1e4, 100.0).unwrap();
        assert!(HopChannel::new(79.4, 15.0, rx).is_ok());
        assert!(HopChannel::new(79.4, 5.0, rx).is_err());
        assert!(HopChannel::new(0.0, 15.0, rx).is_err());
        assert!(ReceiverKinetics::new(0.0, 1.0, 1.0).is_err());
        assert!(ReceiverKinetics::new(1.0, -1.0, 1.0).is_err());
        assert!(ReceiverKinetics::new(1.0, 1.0, f64::NAN).is_err());
        assert!((rx.surface_area() - 100.0 * std::f64::consts::PI).abs() < 1e-12);
    }
}
