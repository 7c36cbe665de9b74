#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod broadband;
pub mod capacity;
pub mod error;
pub mod optics;
pub mod quadrature;
pub mod scalar;
pub mod scenarios;
pub mod special;
pub mod transfer;

pub use error::{Error, Result};
pub use optics::*;
pub use scalar::Real;
pub use special::sinc;

/// Double-precision instantiations.
pub type Setup = OpticalSetup<f64>;
pub type Thresholds = RegimeThresholds<f64>;
pub type Budget64 = PhotonBudget<f64>;
pub type Pupil64 = transfer::Pupil<f64>;
pub type Grid = transfer::ModeGrid<f64>;
pub type Transfer = transfer::TransferMatrix<f64>;
pub type Spectrum = transfer::TransmissivitySpectrum<f64>;
pub type Capacity = capacity::CapacityResult<f64>;
pub type Comparison = scenarios::ComparisonReport<f64>;

/// Single-precision instantiations.
pub type Setup32 = OpticalSetup<f32>;
pub type Transfer32 = transfer::TransferMatrix<f32>;
pub type Spectrum32 = transfer::TransmissivitySpectrum<f32>;
