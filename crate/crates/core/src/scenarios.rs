//! Refocusing lens (a) versus free-space propagation (b) versus a bare hole
//! in an absorbing screen (c), at equal object size and distances.

use serde::{Serialize, Serializer};

use crate::error::Result;
use crate::optics::{g, g_increment, OpticalSetup, Regime, RegimeThresholds};
use crate::scalar::Real;

/// A dimensionless figure that may not apply to the current geometry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gain<T> {
    Value(T),
    /// The ratio is 0/0 (no photons sent).
    Undefined,
    /// The geometry is outside the regime the formula assumes.
    Invalid,
}

impl<T: Real> Gain<T> {
    pub fn value(&self) -> Option<T> {
        match self {
            Gain::Value(v) => Some(*v),
            _ => None,
        }
    }

    pub fn is_valid(&self) -> bool {
        !matches!(self, Gain::Invalid)
    }

    fn gated(valid: bool, v: impl FnOnce() -> Gain<T>) -> Self {
        if valid {
            v()
        } else {
            Gain::Invalid
        }
    }

    fn ratio(num: T, den: T) -> Self {
        if den > T::zero() && num.is_finite() {
            Gain::Value(num / den)
        } else {
            Gain::Undefined
        }
    }
}

impl<T: Serialize> Serialize for Gain<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Gain::Value(v) => v.serialize(s),
            Gain::Undefined => s.serialize_str("undefined"),
            Gain::Invalid => s.serialize_str("invalid"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegimeFlags<T> {
    /// `L·R/(λ·D_o) = L/x_R`.
    pub ratio_a: T,
    /// `L²·M/(λ·D_o·(M+1))`, the square root of the Fresnel number.
    pub ratio_b: T,
    pub regime_a: Regime,
    pub regime_b: Regime,
}

/// Transmissivities and mode counts of both links.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScenarioParams<T> {
    #[serde(skip)]
    pub setup: OpticalSetup<T>,
    pub eta_a: T,
    pub eta_b: T,
    pub nu_a: T,
    pub nu_b: T,
    pub flags: RegimeFlags<T>,
}

/// Upper bounds on the pinhole link and its two free-space legs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PinholeBounds<T> {
    /// Leg transmissivities (far field) or mode counts (near field):
    /// object → screen and screen → image.
    pub legs: Option<[T; 2]>,
    pub eta_c: Gain<T>,
    pub nu_c: Gain<T>,
}

impl<T: Real> ScenarioParams<T> {
    pub fn new(setup: &OpticalSetup<T>, thresholds: RegimeThresholds<T>) -> Result<Self> {
        setup.validate()?;
        let thresholds = RegimeThresholds::new(thresholds.far, thresholds.near)?;
        let ld = setup.wavelength * setup.object_distance;
        let m = setup.magnification;
        let l = setup.object_size;
        let ratio_a = l * setup.pupil_radius / ld;
        let ratio_b = l * l * m / (ld * (m + T::one()));
        let pi = T::PI();
        let a2 = ratio_a * ratio_a;
        Ok(Self {
            setup: *setup,
            eta_a: pi * pi * a2 * a2,
            eta_b: pi * ratio_b * ratio_b,
            nu_a: pi * a2,
            nu_b: pi * ratio_b * ratio_b,
            flags: RegimeFlags {
                ratio_a,
                ratio_b,
                regime_a: thresholds.classify(ratio_a),
                regime_b: thresholds.classify(ratio_b),
            },
        })
    }

    fn a_far(&self) -> bool {
        self.flags.regime_a == Regime::FarField
    }

    fn a_near(&self) -> bool {
        self.flags.regime_a == Regime::NearField
    }

    fn b_far(&self) -> bool {
        self.flags.regime_b == Regime::FarField
    }

    fn b_near(&self) -> bool {
        self.flags.regime_b == Regime::NearField
    }

    /// `π(R²/(λD_o))²·((M+1)/M)²`, evaluated regardless of regime.
    pub fn r1_value(&self) -> T {
        let s = &self.setup;
        let x = s.pupil_radius * s.pupil_radius / (s.wavelength * s.object_distance);
        let m = (s.magnification + T::one()) / s.magnification;
        T::PI() * x * x * m * m
    }

    /// `((M+1)/M)²·(R/L)²`, evaluated regardless of regime.
    pub fn r2_value(&self) -> T {
        let s = &self.setup;
        let m = (s.magnification + T::one()) / s.magnification;
        let q = s.pupil_radius / s.object_size;
        m * m * q * q
    }

    /// Transmissivity ratio; requires (a) in the far field.
    pub fn r1(&self) -> Gain<T> {
        Gain::gated(self.a_far(), || Gain::Value(self.r1_value()))
    }

    /// Mode-count ratio; requires (a) in the near field.
    pub fn r2(&self) -> Gain<T> {
        Gain::gated(self.a_near(), || Gain::Value(self.r2_value()))
    }

    /// `C_(a)/C_(b)` with both links single-mode (far field).
    pub fn gain_g1(&self, nbar: T, nth: T) -> Gain<T> {
        Gain::gated(self.a_far() && self.b_far(), || {
            Gain::ratio(g_increment(nth, self.eta_a * nbar), g_increment(nth, self.eta_b * nbar))
        })
    }

    /// `C_(a)/C_(b)` with both links in the near field and `r2 > 1`.
    pub fn gain_g2(&self, nbar: T) -> Gain<T> {
        let r2 = self.r2_value();
        Gain::gated(self.a_near() && self.b_near() && r2 > T::one(), || {
            Gain::ratio(r2 * g(nbar / self.nu_a), g(r2 * nbar / self.nu_a))
        })
    }

    /// `C_(a)/C_(b)` with (a) near field and (b) far field.
    pub fn gain_g3(&self, nbar: T, nth: T) -> Gain<T> {
        Gain::gated(self.a_near() && self.b_far(), || {
            Gain::ratio(self.nu_a * g_increment(nth, nbar / self.nu_a), g_increment(nth, self.eta_b * nbar))
        })
    }

    /// Bounds on the screen-with-hole link: the product of the leg
    /// transmissivities in the far field, the common leg mode count in the
    /// near field.
    pub fn pinhole_bounds(&self) -> PinholeBounds<T> {
        let s = &self.setup;
        let pi = T::PI();
        let os = s.object_size * s.pupil_radius / (s.wavelength * s.object_distance);
        let image_size = s.magnification * s.object_size;
        let si = s.pupil_radius * image_size / (s.wavelength * s.image_distance);
        let legs = [pi * os * os, pi * si * si];
        PinholeBounds {
            legs: (self.a_far() || self.a_near()).then_some(legs),
            eta_c: Gain::gated(self.a_far(), || Gain::Value(legs[0] * legs[1])),
            nu_c: Gain::gated(self.a_near(), || Gain::Value(legs[0].min(legs[1]))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComparisonReport<T> {
    pub eta_a: T,
    pub eta_b: T,
    pub nu_a: T,
    pub nu_b: T,
    pub r1: Gain<T>,
    pub r2: Gain<T>,
    #[serde(rename = "G1")]
    pub g1: Gain<T>,
    #[serde(rename = "G2")]
    pub g2: Gain<T>,
    #[serde(rename = "G3")]
    pub g3: Gain<T>,
    pub thermal: bool,
    pub regime_flags: RegimeFlags<T>,
    pub pinhole_bounds: PinholeBounds<T>,
}

/// Everything at once. A positive `nth` switches G1 and G3 to their
/// thermal-noise forms.
pub fn compare<T: Real>(setup: &OpticalSetup<T>, nbar: T, nth: T, thresholds: RegimeThresholds<T>) -> Result<ComparisonReport<T>> {
    for (name, v) in [("photon number", nbar), ("thermal occupation", nth)] {
        if !(v >= T::zero() && v.is_finite()) {
            return Err(crate::Error::Domain(format!("{name} {v} must be nonnegative")));
        }
    }
    let p = ScenarioParams::new(setup, thresholds)?;
    Ok(ComparisonReport {
        eta_a: p.eta_a,
        eta_b: p.eta_b,
        nu_a: p.nu_a,
        nu_b: p.nu_b,
        r1: p.r1(),
        r2: p.r2(),
        g1: p.gain_g1(nbar, nth),
        g2: p.gain_g2(nbar),
        g3: p.gain_g3(nbar, nth),
        thermal: nth > T::zero(),
        regime_flags: p.flags,
        pinhole_bounds: p.pinhole_bounds(),
    })
}
