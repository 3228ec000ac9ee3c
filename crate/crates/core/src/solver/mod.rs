//! Plane-stress time-domain simulation of the layered phantom.

pub mod element;
mod explicit;
pub mod material;
pub mod model;
pub mod record;

use thiserror::Error;

pub use explicit::{
    simulate, simulate_detailed, simulate_with_drive, stable_time_step, time_step_bound,
    Excitation, RecordLayout, SimulationOutput, SolverConfig,
};
pub use material::{ElasticMaterial, RegionProps, SpongeSpec};
pub use model::{
    build_half_space, build_model, HalfSpaceGeometry, PhantomGeometry, PhantomModel, Region,
};
pub use record::{read_record_csv, write_record_csv, WavefieldRecord};

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("meshing: {0}")]
    Meshing(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("instability at step {step} (t = {time:.6e} s)")]
    Unstable { step: usize, time: f64 },
    #[error("wavefield csv: {0}")]
    Csv(String),
}
