//! Surface wave speed estimation from displacement records.
//!
//! Two independent routes: the slope of single-frequency phase against
//! distance, and the location of the wavenumber-frequency peak of the 2D
//! spectrum. Sign convention: waves travelling towards +x have positive
//! wavenumber.

mod kspace;
mod noise;
mod phase;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use kspace::{
    kspace_peak_speed, kspace_transform, kspace_transform_with, write_kspace_csv, KSpaceMap,
    KSpaceOptions,
};
pub use noise::add_measurement_noise;
pub use phase::{phase_delay_speed, phase_delay_speed_with, single_bin_phasors, PhaseOptions};

#[derive(Debug, Error, PartialEq)]
pub enum AnalysisError {
    #[error("precondition: {0}")]
    Precondition(String),
    #[error("phase slope {slope:.3e} rad/m is too small to indicate propagation")]
    DegenerateSlope { slope: f64 },
    #[error("ambiguous phase unwrap between positions {index} and {}", index + 1)]
    Aliasing { index: usize },
    #[error("unreliable k-space peak: {0}")]
    UnreliablePeak(String),
    #[error("k-space csv: {0}")]
    Csv(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    PhaseGradient,
    Kspace,
}

impl Method {
    pub const ALL: [Method; 2] = [Method::PhaseGradient, Method::Kspace];

    pub fn tag(self) -> &'static str {
        match self {
            Method::PhaseGradient => "phase_gradient",
            Method::Kspace => "kspace",
        }
    }

    pub fn from_tag(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.tag() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Diagnostics<T> {
    Kspace { f_peak: T, k_peak: T },
    PhaseGradient { slope: T, r_squared: T },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpeedEstimate<T = f64> {
    /// m/s.
    pub speed: T,
    pub method: Method,
    /// 95 % confidence half-width, m/s.
    pub ci_halfwidth: Option<T>,
    pub diagnostics: Diagnostics<T>,
}
