use serde::Serialize;

use crate::error::{Error, Result};
use crate::optics::OpticalSetup;
use crate::scalar::Real;

/// Hard-edged lens aperture. Sizes are physical lengths in meters on the lens
/// plane; a zero size describes a fully closed aperture.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "shape")]
pub enum Pupil<T> {
    Circular { radius: T },
    /// Transmits `|x| ≤ half_width` for every `y`.
    #[serde(rename = "slit")]
    Slit1D { half_width: T },
    Rectangular { half_x: T, half_y: T },
}

impl<T: Real> Pupil<T> {
    /// Circular aperture whose radius equals the setup's pupil scale `R`.
    pub fn matched_circular(setup: &OpticalSetup<T>) -> Self {
        Pupil::Circular { radius: setup.pupil_radius }
    }

    pub fn matched_slit(setup: &OpticalSetup<T>) -> Self {
        Pupil::Slit1D { half_width: setup.pupil_radius }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Pupil::Circular { .. } => "circular",
            Pupil::Slit1D { .. } => "slit",
            Pupil::Rectangular { .. } => "rectangular",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let sizes: &[T] = match self {
            Pupil::Circular { radius } => &[*radius],
            Pupil::Slit1D { half_width } => &[*half_width],
            Pupil::Rectangular { half_x, half_y } => &[*half_x, *half_y],
        };
        for &s in sizes {
            if !(s >= T::zero() && s.is_finite()) {
                return Err(Error::InvalidSetup(format!("pupil size {s} must be nonnegative and finite")));
            }
        }
        Ok(())
    }

    /// Characteristic function `P(x, y)`.
    pub fn transmits(&self, x: T, y: T) -> bool {
        match *self {
            Pupil::Circular { radius } => x * x + y * y <= radius * radius,
            Pupil::Slit1D { half_width } => x.abs() <= half_width,
            Pupil::Rectangular { half_x, half_y } => x.abs() <= half_x && y.abs() <= half_y,
        }
    }

    /// True when the transmitting set has zero area.
    pub fn is_closed(&self) -> bool {
        match *self {
            Pupil::Circular { radius } => radius == T::zero(),
            Pupil::Slit1D { half_width } => half_width == T::zero(),
            Pupil::Rectangular { half_x, half_y } => half_x == T::zero() || half_y == T::zero(),
        }
    }

    /// The same aperture rescaled by `s` (used to express it in the
    /// dimensionless coordinates of the mode expansion).
    pub(crate) fn scaled(&self, s: T) -> Self {
        match *self {
            Pupil::Circular { radius } => Pupil::Circular { radius: radius * s },
            Pupil::Slit1D { half_width } => Pupil::Slit1D { half_width: half_width * s },
            Pupil::Rectangular { half_x, half_y } => Pupil::Rectangular { half_x: half_x * s, half_y: half_y * s },
        }
    }

    /// Largest half-extent along either axis (infinite along a slit).
    pub(crate) fn half_extent(&self) -> T {
        match *self {
            Pupil::Circular { radius } => radius,
            Pupil::Slit1D { half_width } => half_width,
            Pupil::Rectangular { half_x, half_y } => half_x.max(half_y),
        }
    }
}
