//! Turns merged settings into concrete library inputs.

use anyhow::Result;
use diffraction_channel::transfer::{Dimension, ModeGrid, Pupil, QuadratureSpec, TransferOptions};
use diffraction_channel::{Setup, SetupSpec, Thresholds};
use serde::Serialize;

use crate::config::{Format, PupilShape, Settings};
use crate::exit::Usage;

pub const DEFAULT_WAVELENGTH: f64 = 5e-7;
pub const DEFAULT_OBJECT_DISTANCE: f64 = 1.0;
pub const DEFAULT_PUPIL_RADIUS: f64 = 1e-2;

fn usage<T>(msg: impl Into<String>) -> Result<T> {
    Err(Usage(msg.into()).into())
}

/// Lens geometry with a placeholder object size.
pub fn lens(s: &Settings) -> Result<Setup> {
    let lens_given = s.image_distance.is_some() || s.focal_length.is_some();
    let spec = SetupSpec {
        wavelength: Some(s.wavelength.unwrap_or(DEFAULT_WAVELENGTH)),
        object_distance: Some(s.object_distance.unwrap_or(DEFAULT_OBJECT_DISTANCE)),
        image_distance: s.image_distance,
        focal_length: s.focal_length,
        magnification: if lens_given { s.magnification } else { Some(s.magnification.unwrap_or(1.0)) },
        pupil_radius: Some(s.pupil_radius.unwrap_or(DEFAULT_PUPIL_RADIUS)),
        object_size: Some(1.0),
    };
    Ok(spec.resolve()?)
}

pub fn with_ratio(lens: &Setup, ratio: f64) -> Result<Setup> {
    if !(ratio > 0.0 && ratio.is_finite()) {
        return usage(format!("ratio {ratio} must be positive"));
    }
    Ok(lens.with_object_size(ratio * lens.rayleigh_length())?)
}

/// Full setup; the object is given either directly or as `L/x_R`.
pub fn setup(s: &Settings) -> Result<Setup> {
    let base = lens(s)?;
    match (s.object_size, s.ratio) {
        (Some(_), Some(_)) => usage("give either object-size or ratio, not both"),
        (Some(l), None) => Ok(base.with_object_size(l)?),
        (None, Some(r)) => with_ratio(&base, r),
        (None, None) => usage("object-size or ratio is required"),
    }
}

pub fn thresholds(s: &Settings) -> Result<Thresholds> {
    let d = Thresholds::default();
    Ok(Thresholds::new(s.far_threshold.unwrap_or(d.far), s.near_threshold.unwrap_or(d.near))?)
}

pub fn format(s: &Settings, default: Format) -> Format {
    s.format.unwrap_or(default)
}

pub fn flag(v: Option<bool>) -> bool {
    v.unwrap_or(false)
}

pub fn dimension(s: &Settings) -> Result<Dimension> {
    match s.dim.unwrap_or(1) {
        1 => Ok(Dimension::One),
        2 => Ok(Dimension::Two),
        d => usage(format!("dim must be 1 or 2, got {d}")),
    }
}

/// Aperture, mode grid and quadrature settings for one object size.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TransferPlan {
    pub dim: usize,
    pub pupil: Pupil<f64>,
    pub n_max: usize,
    pub quadrature_order: Option<usize>,
    pub quadrature_tolerance: f64,
    pub tail_closure: bool,
    #[serde(skip)]
    pub grid: ModeGrid<f64>,
    #[serde(skip)]
    pub options: TransferOptions<f64>,
}

pub fn transfer(s: &Settings, setup: &Setup) -> Result<TransferPlan> {
    let dim = dimension(s)?;
    let shape = s.pupil.unwrap_or(match dim {
        Dimension::One => PupilShape::Slit,
        Dimension::Two => PupilShape::Circular,
    });
    let scale = s.aperture_scale.unwrap_or(1.0);
    let aspect = s.aspect.unwrap_or(1.0);
    if !(scale >= 0.0 && scale.is_finite()) || !(aspect > 0.0 && aspect.is_finite()) {
        return usage(format!("aperture-scale {scale} must be nonnegative and aspect {aspect} positive"));
    }
    let half = scale * setup.pupil_radius;
    let pupil = match shape {
        PupilShape::Circular => Pupil::Circular { radius: half },
        PupilShape::Slit => Pupil::Slit1D { half_width: half },
        PupilShape::Rectangular => Pupil::Rectangular { half_x: half, half_y: half * aspect },
    };
    // half-extent of the aperture in mode units
    let rho = setup.ratio() * scale * if shape == PupilShape::Rectangular { aspect.max(1.0) } else { 1.0 };
    let grid = match s.n_max {
        Some(n) => ModeGrid::new(dim, n)?,
        None => ModeGrid::adequate(dim, rho)?,
    };
    let quadrature = QuadratureSpec { order: s.quadrature_order, ..QuadratureSpec::default() };
    let tail_closure = !flag(s.no_tail_closure);
    Ok(TransferPlan {
        dim: dim.as_usize(),
        pupil,
        n_max: grid.n_max,
        quadrature_order: s.quadrature_order,
        quadrature_tolerance: quadrature.tolerance,
        tail_closure,
        grid,
        options: TransferOptions { quadrature, tail_closure },
    })
}
