//! Link geometry, the lossy-channel entropy function and regime
//! classification.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::{rel_diff, Real};

/// Reduced Planck constant in J·s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Speed of light in m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

const LENS_TOLERANCE: f64 = 1e-12;

/// `g(x) = (x+1)·log₂(x+1) − x·log₂x` for `x > 0`, zero otherwise.
///
/// Bits carried by a lossy bosonic mode whose output holds `x` mean photons.
pub fn g<T: Real>(x: T) -> T {
    if !(x > T::zero()) {
        return T::zero();
    }
    if x < T::lit(1e-300) {
        // -x·log₂x + x·log₂e; the O(x²) remainder is below the denormal range
        return x * (T::LOG2_E() - x.log2());
    }
    // (x+1)ln(x+1) − x ln x rewritten without the large cancelling terms
    (x.ln_1p() + x * (T::one() / x).ln_1p()) * T::LOG2_E()
}

/// `g(base + x) − g(base)` evaluated without cancellation for small `x`.
pub fn g_increment<T: Real>(base: T, x: T) -> T {
    if !(base > T::zero()) {
        return g(x);
    }
    if !(x > T::zero()) {
        return T::zero();
    }
    let a = base;
    let a1 = base + T::one();
    let nats = x * (T::one() / (a + x)).ln_1p() + a1 * (x / a1).ln_1p() - a * (x / a).ln_1p();
    nats.max(T::zero()) * T::LOG2_E()
}

/// Thin-lens imaging link.
///
/// Lengths are in meters. The object occupies a square of side `object_size`
/// at distance `object_distance` before a lens of radius `pupil_radius`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OpticalSetup<T> {
    pub wavelength: T,
    pub object_distance: T,
    pub image_distance: T,
    pub focal_length: T,
    pub pupil_radius: T,
    pub object_size: T,
    pub magnification: T,
}

/// Partially specified geometry: any two of focal length, image distance
/// and magnification (together with the object distance) fix the lens.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SetupSpec<T> {
    pub wavelength: Option<T>,
    pub object_distance: Option<T>,
    pub image_distance: Option<T>,
    pub focal_length: Option<T>,
    pub magnification: Option<T>,
    pub pupil_radius: Option<T>,
    pub object_size: Option<T>,
}

impl<T> Default for SetupSpec<T> {
    fn default() -> Self {
        Self {
            wavelength: None,
            object_distance: None,
            image_distance: None,
            focal_length: None,
            magnification: None,
            pupil_radius: None,
            object_size: None,
        }
    }
}

fn positive<T: Real>(name: &str, v: T) -> Result<T> {
    if v > T::zero() && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::InvalidSetup(format!("{name} must be positive and finite, got {v}")))
    }
}

fn required<T: Real>(name: &str, v: Option<T>) -> Result<T> {
    positive(name, v.ok_or_else(|| Error::InvalidSetup(format!("{name} is required")))?)
}

impl<T: Real> SetupSpec<T> {
    pub fn resolve(&self) -> Result<OpticalSetup<T>> {
        let wavelength = required("wavelength", self.wavelength)?;
        let d_o = required("object distance", self.object_distance)?;
        let pupil_radius = required("pupil radius", self.pupil_radius)?;
        let object_size = required("object size", self.object_size)?;
        let d_i_in = self.image_distance.map(|v| positive("image distance", v)).transpose()?;
        let f_in = self.focal_length.map(|v| positive("focal length", v)).transpose()?;
        let m_in = self.magnification.map(|v| positive("magnification", v)).transpose()?;

        let d_i = match (d_i_in, m_in, f_in) {
            (Some(d_i), _, _) => d_i,
            (None, Some(m), _) => m * d_o,
            (None, None, Some(f)) => {
                if f >= d_o {
                    return Err(Error::InvalidSetup(format!(
                        "focal length {f} must be shorter than the object distance {d_o} for a real image"
                    )));
                }
                T::one() / (T::one() / f - T::one() / d_o)
            }
            (None, None, None) => {
                return Err(Error::InvalidSetup(
                    "one of image distance, focal length or magnification is required".into(),
                ))
            }
        };
        let focal_length = T::one() / (T::one() / d_o + T::one() / d_i);
        let magnification = d_i / d_o;
        let tol = T::lit(LENS_TOLERANCE);
        if let Some(f) = f_in {
            if rel_diff(f, focal_length) > tol {
                return Err(Error::InvalidSetup(format!(
                    "thin-lens condition violated: 1/{d_o} + 1/{d_i} != 1/{f}"
                )));
            }
        }
        if let Some(m) = m_in {
            if rel_diff(m, magnification) > tol {
                return Err(Error::InvalidSetup(format!(
                    "magnification {m} inconsistent with D_i/D_o = {magnification}"
                )));
            }
        }
        Ok(OpticalSetup {
            wavelength,
            object_distance: d_o,
            image_distance: d_i,
            focal_length,
            pupil_radius,
            object_size,
            magnification,
        })
    }
}

impl<T: Real> OpticalSetup<T> {
    pub fn from_focal_length(wavelength: T, object_distance: T, focal_length: T, pupil_radius: T, object_size: T) -> Result<Self> {
        SetupSpec {
            wavelength: Some(wavelength),
            object_distance: Some(object_distance),
            focal_length: Some(focal_length),
            pupil_radius: Some(pupil_radius),
            object_size: Some(object_size),
            ..Default::default()
        }
        .resolve()
    }

    pub fn from_image_distance(wavelength: T, object_distance: T, image_distance: T, pupil_radius: T, object_size: T) -> Result<Self> {
        SetupSpec {
            wavelength: Some(wavelength),
            object_distance: Some(object_distance),
            image_distance: Some(image_distance),
            pupil_radius: Some(pupil_radius),
            object_size: Some(object_size),
            ..Default::default()
        }
        .resolve()
    }

    pub fn from_magnification(wavelength: T, object_distance: T, magnification: T, pupil_radius: T, object_size: T) -> Result<Self> {
        SetupSpec {
            wavelength: Some(wavelength),
            object_distance: Some(object_distance),
            magnification: Some(magnification),
            pupil_radius: Some(pupil_radius),
            object_size: Some(object_size),
            ..Default::default()
        }
        .resolve()
    }

    /// Reference link (λ = 500 nm, D_o = 1 m, R = 1 cm, M = 1) with the object
    /// size chosen so that `L / x_R = ratio`.
    pub fn with_ratio(ratio: T) -> Result<Self> {
        let base = Self::from_magnification(T::lit(5e-7), T::one(), T::one(), T::lit(1e-2), T::one())?;
        base.with_object_size(positive("ratio", ratio)? * base.rayleigh_length())
    }

    pub fn with_object_size(mut self, object_size: T) -> Result<Self> {
        self.object_size = positive("object size", object_size)?;
        Ok(self)
    }

    /// Re-validates every field and the lens relations.
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("wavelength", self.wavelength),
            ("object distance", self.object_distance),
            ("image distance", self.image_distance),
            ("focal length", self.focal_length),
            ("pupil radius", self.pupil_radius),
            ("object size", self.object_size),
            ("magnification", self.magnification),
        ] {
            positive(name, v)?;
        }
        let tol = T::lit(LENS_TOLERANCE);
        let lens = T::one() / self.object_distance + T::one() / self.image_distance;
        if rel_diff(lens, T::one() / self.focal_length) > tol {
            return Err(Error::InvalidSetup("thin-lens condition violated".into()));
        }
        if rel_diff(self.magnification, self.image_distance / self.object_distance) > tol {
            return Err(Error::InvalidSetup("magnification differs from D_i/D_o".into()));
        }
        Ok(())
    }

    /// `x_R = λ·D_o / R`.
    pub fn rayleigh_length(&self) -> T {
        self.wavelength * self.object_distance / self.pupil_radius
    }

    /// `L / x_R`.
    pub fn ratio(&self) -> T {
        self.object_size / self.rayleigh_length()
    }

    /// Total propagation distance `D = D_o + D_i`.
    pub fn total_distance(&self) -> T {
        self.object_distance + self.image_distance
    }

    /// Free-space Fresnel number `M²L⁴ / (λD)²`.
    pub fn fresnel_number(&self) -> T {
        let l2 = self.object_size * self.object_size;
        let m = self.magnification;
        let ld = self.wavelength * self.total_distance();
        m * m * l2 * l2 / (ld * ld)
    }

    /// Angular frequency `2πc/λ`.
    pub fn angular_frequency(&self) -> T {
        T::TAU() * T::lit(SPEED_OF_LIGHT) / self.wavelength
    }
}

pub fn rayleigh_length<T: Real>(setup: &OpticalSetup<T>) -> Result<T> {
    setup.validate()?;
    Ok(setup.rayleigh_length())
}

pub fn fresnel_number<T: Real>(setup: &OpticalSetup<T>) -> Result<T> {
    setup.validate()?;
    Ok(setup.fresnel_number())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    FarField,
    Intermediate,
    NearField,
}

/// Cut points on a dimensionless ratio separating the far and near field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegimeThresholds<T> {
    pub far: T,
    pub near: T,
}

impl<T: Real> Default for RegimeThresholds<T> {
    fn default() -> Self {
        Self { far: T::lit(0.2), near: T::lit(5.0) }
    }
}

impl<T: Real> RegimeThresholds<T> {
    pub fn new(far: T, near: T) -> Result<Self> {
        if far > T::zero() && far < near && near.is_finite() {
            Ok(Self { far, near })
        } else {
            Err(Error::InvalidThresholds { far: far.as_f64(), near: near.as_f64() })
        }
    }

    pub fn classify(&self, ratio: T) -> Regime {
        if ratio <= self.far {
            Regime::FarField
        } else if ratio >= self.near {
            Regime::NearField
        } else {
            Regime::Intermediate
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegimeReport<T> {
    pub ratio: T,
    pub regime: Regime,
    pub thresholds: RegimeThresholds<T>,
}

/// Tags the lens link by `L / x_R`.
pub fn classify_regime<T: Real>(setup: &OpticalSetup<T>, thresholds: RegimeThresholds<T>) -> Result<RegimeReport<T>> {
    let thresholds = RegimeThresholds::new(thresholds.far, thresholds.near)?;
    let ratio = rayleigh_length(setup).map(|x_r| setup.object_size / x_r)?;
    Ok(RegimeReport { ratio, regime: thresholds.classify(ratio), thresholds })
}

/// Input resources for one channel use.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Budget<T> {
    /// Mean photon number.
    Photons(T),
    /// Mean power in watts over a window of `window` seconds.
    Power { power: T, window: T },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhotonBudget<T> {
    pub budget: Budget<T>,
    /// Mean thermal background photons per mode.
    pub thermal: T,
}

impl<T: Real> PhotonBudget<T> {
    pub fn photons(n: T) -> Self {
        Self { budget: Budget::Photons(n), thermal: T::zero() }
    }

    pub fn power(power: T, window: T) -> Self {
        Self { budget: Budget::Power { power, window }, thermal: T::zero() }
    }

    pub fn with_thermal(mut self, thermal: T) -> Self {
        self.thermal = thermal;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |v: T| v >= T::zero() && v.is_finite();
        match self.budget {
            Budget::Photons(n) if !ok(n) => return Err(Error::Domain(format!("photon number {n} must be nonnegative"))),
            Budget::Power { power, window } if !ok(power) || !(window > T::zero()) => {
                return Err(Error::Domain(format!("power {power} must be nonnegative and window {window} positive")))
            }
            _ => {}
        }
        if !ok(self.thermal) {
            return Err(Error::Domain(format!("thermal occupation {} must be nonnegative", self.thermal)));
        }
        Ok(())
    }

    /// The constrained total: photons, or energy `P·T` in joules.
    pub fn total(&self) -> T {
        match self.budget {
            Budget::Photons(n) => n,
            Budget::Power { power, window } => power * window,
        }
    }

    pub fn is_energy(&self) -> bool {
        matches!(self.budget, Budget::Power { .. })
    }
}
