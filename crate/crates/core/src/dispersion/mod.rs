//! Voigt-model surface wave dispersion.
//!
//! A Kelvin-Voigt solid has complex shear modulus `G* = mu1 + i*omega*mu2`. A
//! harmonic shear wave in it travels at the phase speed
//!
//! ```text
//! c_shear = sqrt( 2 (mu1^2 + omega^2 mu2^2) / (rho (mu1 + sqrt(mu1^2 + omega^2 mu2^2))) )
//! ```
//!
//! and the surface (Rayleigh) wave of a near-incompressible half-space is
//! slower by the factor [`RAYLEIGH_FACTOR`]. The forward model is inverted for
//! `(mu1, mu2)` by least squares in [`fit_voigt`].

mod fit;
pub mod io;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::{is_pos, Scalar};

pub use fit::{fit_objective, fit_voigt, fit_voigt_with, FitOptions};

/// Shear speed divided by surface wave speed for a near-incompressible solid.
pub const RAYLEIGH_FACTOR: f64 = 1.05;

#[derive(Debug, Error)]
pub enum DispersionError {
    #[error("{what} must be finite and positive, got {value}")]
    Domain { what: &'static str, value: f64 },
    #[error("need at least 2 dispersion points with distinct frequencies, got {distinct}")]
    InsufficientData { distinct: usize },
    #[error("least-squares fit did not converge after {iterations} iterations (best rms {:.3e} m/s)", best.rms_residual)]
    NonConvergence {
        iterations: usize,
        best: Box<VoigtFit<f64>>,
    },
    #[error("dispersion csv: {0}")]
    Csv(String),
}

fn domain<T: Scalar>(what: &'static str, value: T) -> DispersionError {
    DispersionError::Domain {
        what,
        value: value.to_f64_lossy(),
    }
}

/// Kelvin-Voigt shear parameters plus mass density.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VoigtMaterial<T = f64> {
    /// Shear elasticity, Pa.
    pub mu1: T,
    /// Shear viscosity, Pa s.
    pub mu2: T,
    /// Mass density, kg/m^3.
    pub rho: T,
}

impl<T: Scalar> VoigtMaterial<T> {
    pub fn new(mu1: T, mu2: T, rho: T) -> Result<Self, DispersionError> {
        let m = Self { mu1, mu2, rho };
        m.validate()?;
        Ok(m)
    }

    /// Sponge phantom: mu1 = 6.83 kPa, mu2 = 24 Pa s, cellulose density 1500 kg/m^3.
    pub fn sponge() -> Self {
        Self {
            mu1: T::lit(6830.0),
            mu2: T::lit(24.0),
            rho: T::lit(1500.0),
        }
    }

    /// Transmission gel: mu1 = 1.3 kPa, mu2 = 24 Pa s, 1000 kg/m^3.
    pub fn gel() -> Self {
        Self {
            mu1: T::lit(1300.0),
            mu2: T::lit(24.0),
            rho: T::lit(1000.0),
        }
    }

    pub fn validate(&self) -> Result<(), DispersionError> {
        if !is_pos(self.mu1) {
            return Err(domain("mu1", self.mu1));
        }
        if !self.mu2.is_finite() || self.mu2 < T::zero() {
            return Err(domain("mu2", self.mu2));
        }
        if !is_pos(self.rho) {
            return Err(domain("rho", self.rho));
        }
        Ok(())
    }

    /// Magnitude of the complex shear modulus at angular frequency `omega`.
    pub fn modulus_magnitude(&self, omega: T) -> T {
        self.mu1.hypot(omega * self.mu2)
    }
}

/// One measured (or simulated) point of a dispersion curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DispersionPoint<T = f64> {
    /// Hz.
    pub frequency: T,
    /// m/s.
    pub speed: T,
    /// m/s, optional standard deviation of `speed`.
    pub speed_sd: Option<T>,
}

impl<T: Scalar> DispersionPoint<T> {
    pub fn new(frequency: T, speed: T) -> Result<Self, DispersionError> {
        let p = Self {
            frequency,
            speed,
            speed_sd: None,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), DispersionError> {
        if !is_pos(self.frequency) {
            return Err(domain("frequency", self.frequency));
        }
        if !is_pos(self.speed) {
            return Err(domain("speed", self.speed));
        }
        if let Some(sd) = self.speed_sd {
            if !sd.is_finite() || sd < T::zero() {
                return Err(domain("speed_sd", sd));
            }
        }
        Ok(())
    }
}

/// Storage, loss and long-term shear moduli at one frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ViscoModuli<T = f64> {
    pub storage: T,
    pub loss: T,
    pub long_term: T,
}

/// Result of a least-squares Voigt identification.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VoigtFit<T = f64> {
    pub material: VoigtMaterial<T>,
    /// Root-mean-square speed residual, m/s.
    pub rms_residual: T,
    pub n_points: usize,
}

fn check_frequency<T: Scalar>(frequency: T) -> Result<T, DispersionError> {
    if !is_pos(frequency) {
        return Err(domain("frequency", frequency));
    }
    Ok(T::TAU() * frequency)
}

/// Shear wave phase speed of a Voigt solid, m/s.
pub fn shear_wave_speed<T: Scalar>(
    mat: &VoigtMaterial<T>,
    frequency: T,
) -> Result<T, DispersionError> {
    mat.validate()?;
    let omega = check_frequency(frequency)?;
    Ok(shear_speed_unchecked(mat.mu1, mat.mu2, mat.rho, omega))
}

/// Surface wave phase speed of a Voigt solid, m/s.
pub fn surface_wave_speed<T: Scalar>(
    mat: &VoigtMaterial<T>,
    frequency: T,
) -> Result<T, DispersionError> {
    Ok(shear_wave_speed(mat, frequency)? / T::lit(RAYLEIGH_FACTOR))
}

#[inline]
pub(crate) fn shear_speed_unchecked<T: Scalar>(mu1: T, mu2: T, rho: T, omega: T) -> T {
    let g2 = mu1 * mu1 + (omega * mu2) * (omega * mu2);
    let g = g2.sqrt();
    (T::lit(2.0) * g2 / (rho * (mu1 + g))).sqrt()
}

/// Storage, loss and long-term moduli of a Voigt solid.
pub fn voigt_moduli<T: Scalar>(
    mat: &VoigtMaterial<T>,
    frequency: T,
) -> Result<ViscoModuli<T>, DispersionError> {
    mat.validate()?;
    let omega = check_frequency(frequency)?;
    Ok(ViscoModuli {
        storage: mat.mu1,
        loss: omega * mat.mu2,
        long_term: mat.mu1,
    })
}
