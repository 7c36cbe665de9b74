//! Discretized diffraction operator, its transmissivity spectrum and the
//! pixel overlap kernel.

mod grid;
mod matrix;
mod overlap;
mod pupil;
mod spectrum;

pub use grid::{Dimension, ModeGrid, MAX_MODES_2D};
pub use matrix::{build_transfer_matrix, singular_values, QuadratureSpec, TransferMatrix, TransferOptions};
pub use overlap::{overlap, overlap_closed_form, Position};
pub use pupil::Pupil;
pub use spectrum::{plateau_count, TransmissivitySpectrum, PASSIVITY_TOLERANCE};
