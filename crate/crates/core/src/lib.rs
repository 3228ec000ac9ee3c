//! Surface wave propagation in layered viscoelastic phantoms.
//!
//! The numeric core is generic over [`scalar::Scalar`] (`f32` or `f64`); the
//! aliases below name the common concrete instantiations. Experiment
//! orchestration and file output run in `f64`.

pub mod scalar;

pub mod dispersion;
pub mod stats;

pub mod analysis;
pub mod solver;

pub mod experiments;

pub use scalar::Scalar;

pub type VoigtMaterialF32 = dispersion::VoigtMaterial<f32>;
pub type VoigtMaterialF64 = dispersion::VoigtMaterial<f64>;
pub type WavefieldRecordF32 = solver::WavefieldRecord<f32>;
pub type WavefieldRecordF64 = solver::WavefieldRecord<f64>;
pub type PhantomModelF32 = solver::PhantomModel<f32>;
pub type PhantomModelF64 = solver::PhantomModel<f64>;
pub type SpeedEstimateF32 = analysis::SpeedEstimate<f32>;
pub type SpeedEstimateF64 = analysis::SpeedEstimate<f64>;
pub type KSpaceMapF32 = analysis::KSpaceMap<f32>;
pub type KSpaceMapF64 = analysis::KSpaceMap<f64>;
