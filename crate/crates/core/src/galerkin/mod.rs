//! Galerkin discretization of the mixed R13 system on the unit cube.

pub mod basis;
pub mod export;
pub mod fields;
pub mod forms;
pub mod linop;
pub mod load;
pub mod space;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use fields::{bc_residuals, compute_closures, BcResiduals, Closures};
pub use forms::{assemble_form, assemble_system, FormId, MixedSystem};
pub use load::{assemble_load, BoundaryData, FaceData, Source, VolumeSources};
pub use space::{DiscreteSpaces, Field, Pairing, PressureMode};

/// Knudsen number, modified accommodation factor and velocity prescription strength.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub kn: f64,
    pub chi_tilde: f64,
    pub epsilon_w: f64,
}

impl ModelParams {
    pub fn new(kn: f64, chi_tilde: f64, epsilon_w: f64) -> Result<Self> {
        let p = Self {
            kn,
            chi_tilde,
            epsilon_w,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.kn > 0.0 && self.kn.is_finite()) {
            return Err(Error::InvalidParameter {
                field: "kn",
                reason: format!("must be > 0, got {}", self.kn),
            });
        }
        if !(self.chi_tilde > 0.0 && self.chi_tilde.is_finite()) {
            return Err(Error::InvalidParameter {
                field: "chi_tilde",
                reason: format!("must be > 0, got {}", self.chi_tilde),
            });
        }
        if !(self.epsilon_w >= 0.0 && self.epsilon_w.is_finite()) {
            return Err(Error::InvalidParameter {
                field: "epsilon_w",
                reason: format!("must be ≥ 0, got {}", self.epsilon_w),
            });
        }
        Ok(())
    }
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            kn: 1.0,
            chi_tilde: 1.0,
            epsilon_w: 0.0,
        }
    }
}
