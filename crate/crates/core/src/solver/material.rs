//! Region materials and their conversion to solver constants.

use serde::{Deserialize, Serialize};

use super::SolverError;
use crate::dispersion::VoigtMaterial;
use crate::scalar::{is_pos, Scalar};

/// Poisson ratio assigned to Voigt regions, for which only shear parameters are known.
pub const VOIGT_POISSON: f64 = 0.499;

/// Linear elastic solid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElasticMaterial<T = f64> {
    pub youngs_modulus: T,
    pub poisson_ratio: T,
    pub rho: T,
}

impl<T: Scalar> ElasticMaterial<T> {
    pub fn new(youngs_modulus: T, poisson_ratio: T, rho: T) -> Result<Self, SolverError> {
        let m = Self {
            youngs_modulus,
            poisson_ratio,
            rho,
        };
        m.validate()?;
        Ok(m)
    }

    /// Acoustic standoff pad: E = 36.7 kPa, nu = 0.499, 1000 kg/m^3.
    pub fn standoff_pad() -> Self {
        Self {
            youngs_modulus: T::lit(36_700.0),
            poisson_ratio: T::lit(0.499),
            rho: T::lit(1000.0),
        }
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        let nu = self.poisson_ratio;
        if !is_pos(self.youngs_modulus)
            || !is_pos(self.rho)
            || !nu.is_finite()
            || nu < T::zero()
            || nu >= T::lit(0.5)
        {
            return Err(SolverError::InvalidInput(format!(
                "invalid elastic material {self:?}"
            )));
        }
        Ok(())
    }

    pub fn shear_modulus(&self) -> T {
        self.youngs_modulus / (T::lit(2.0) * (T::one() + self.poisson_ratio))
    }

    /// Plane-stress dilatational speed `sqrt(E / (rho (1 - nu^2)))`.
    pub fn p_wave_speed(&self) -> T {
        let nu = self.poisson_ratio;
        (self.youngs_modulus / (self.rho * (T::one() - nu * nu))).sqrt()
    }

    pub fn s_wave_speed(&self) -> T {
        (self.shear_modulus() / self.rho).sqrt()
    }
}

/// Sponge description: Voigt parameters plus the void ratio used for the effective-density option.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpongeSpec<T = f64> {
    pub material: VoigtMaterial<T>,
    pub void_ratio: T,
    pub use_effective_density: bool,
}

impl<T: Scalar> Default for SpongeSpec<T> {
    fn default() -> Self {
        Self {
            material: VoigtMaterial::sponge(),
            void_ratio: T::lit(0.7),
            use_effective_density: false,
        }
    }
}

impl<T: Scalar> SpongeSpec<T> {
    /// Density used by the solver: `rho / (1 + e)` in effective-density mode, else `rho`.
    pub fn solver_density(&self) -> T {
        if self.use_effective_density {
            self.material.rho / (T::one() + self.void_ratio)
        } else {
            self.material.rho
        }
    }

    pub fn solver_material(&self) -> VoigtMaterial<T> {
        VoigtMaterial {
            rho: self.solver_density(),
            ..self.material
        }
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        self.material
            .validate()
            .map_err(|e| SolverError::InvalidInput(e.to_string()))?;
        if !self.void_ratio.is_finite() || self.void_ratio < T::zero() {
            return Err(SolverError::InvalidInput("void_ratio must be >= 0".into()));
        }
        Ok(())
    }
}

/// Constants the integrator needs for one region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionProps<T> {
    pub youngs: T,
    pub poisson: T,
    pub rho: T,
    /// Voigt retardation time `mu2 / mu1`, s; stress = D (strain + tau * strain rate).
    pub retardation: T,
}

impl<T: Scalar> RegionProps<T> {
    pub fn elastic(m: &ElasticMaterial<T>) -> Self {
        Self {
            youngs: m.youngs_modulus,
            poisson: m.poisson_ratio,
            rho: m.rho,
            retardation: T::zero(),
        }
    }

    /// Isotropic Voigt solid: shear modulus `mu1`, Poisson ratio [`VOIGT_POISSON`],
    /// viscous part proportional to the elastic one.
    pub fn voigt(m: &VoigtMaterial<T>) -> Self {
        let nu = T::lit(VOIGT_POISSON);
        Self {
            youngs: T::lit(2.0) * m.mu1 * (T::one() + nu),
            poisson: nu,
            rho: m.rho,
            retardation: m.mu2 / m.mu1,
        }
    }

    pub fn as_elastic(&self) -> ElasticMaterial<T> {
        ElasticMaterial {
            youngs_modulus: self.youngs,
            poisson_ratio: self.poisson,
            rho: self.rho,
        }
    }
}
