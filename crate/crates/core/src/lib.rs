//! Driven dissipative qubit networks used as quantum reservoir computers.
//!
//! The numerical core is generic over `f32`/`f64` through [`scalar::Real`]; the aliases
//! below fix the scalar to `f64`, which is what the experiments use.

pub mod absorption;
pub mod error;
pub mod linalg;
pub mod lindblad;
pub mod memory;
pub mod operators;
pub mod pipeline;
pub mod reservoir;
pub mod scalar;
pub mod seed;
pub mod superop;

pub use error::{Error, Result};
pub use reservoir::{ShotModel, Topology};
pub use scalar::Real;

pub type ComplexMatrix = operators::CMatrix<f64>;
pub type ComplexVector = operators::CVector<f64>;
pub type DensityOperator = lindblad::DensityOperator<f64>;
pub type Liouvillian = lindblad::Liouvillian<f64>;
pub type QubitNetworkSpec = reservoir::QubitNetworkSpec<f64>;
pub type InputSequence = reservoir::InputSequence<f64>;
pub type StateCollectMatrix = pipeline::StateCollectMatrix<f64>;
pub type ReadoutWeights = pipeline::ReadoutWeights<f64>;
pub type Reservoir = pipeline::Reservoir<f64>;
pub type CapacityRecord = memory::CapacityRecord<f64>;
pub type CapacityCurve = memory::CapacityCurve<f64>;
pub type StmcCell = memory::StmcCell<f64>;
pub type CorrelationTrace = absorption::CorrelationTrace<f64>;
pub type AbsorptionSpectrum = absorption::AbsorptionSpectrum<f64>;
