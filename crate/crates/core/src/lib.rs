//! Link-level simulation primitives for multi-user mmWave receivers with
//! low-resolution ADCs: geometric channel draws, constant-modulus analog
//! combining, Lloyd-Max quantization with the additive quantization noise
//! model, per-chain ADC bit allocation, spectral/energy-efficiency metrics,
//! and a learning-based blind detector for one-bit front ends.

pub mod bit_alloc;
pub mod blind;
pub mod channel;
pub mod combining;
pub mod error;
mod gauss;
pub mod metrics;
pub mod quantizer;
pub mod rng;

pub use bit_alloc::{BitAllocation, PowerBudget};
pub use blind::{DitherConfig, LikelihoodTable, SymbolCodebook, WmdDecoder};
pub use channel::{ArrayGeometry, ChannelEnsembleConfig, MultiUserChannel, PathSet};
pub use combining::{AnalogCombiner, SecondStageKind, StageTag};
pub use error::{Error, Result};
pub use metrics::{ArchTag, DigitalCombiner, OperatingPoint, PowerModel};
pub use quantizer::{AqnmModel, DistortionTable, Resolution, ScalarCodebook};

/// Complex matrix type used throughout.
pub type CMatrix = nalgebra::DMatrix<num_complex::Complex64>;
/// Complex vector type used throughout.
pub type CVector = nalgebra::DVector<num_complex::Complex64>;
