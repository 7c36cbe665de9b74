use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Values within this distance above 1 are rounding noise and are clamped.
pub const PASSIVITY_TOLERANCE: f64 = 1e-6;

/// Mode transmissivities sorted in descending order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransmissivitySpectrum<T> {
    values: Vec<T>,
    /// Carrier angular frequency in rad/s, needed for energy budgets.
    pub angular_frequency: Option<T>,
}

impl<T: Real> TransmissivitySpectrum<T> {
    /// Sorts, clamps `(1, 1 + 1e-6]` to 1 and tiny negative rounding to 0.
    pub fn new(mut values: Vec<T>) -> Result<Self> {
        let tol = T::lit(PASSIVITY_TOLERANCE);
        for v in values.iter_mut() {
            if !v.is_finite() {
                return Err(Error::Domain(format!("non-finite transmissivity {v}")));
            }
            if *v > T::one() + tol {
                return Err(Error::PassivityViolation { value: v.as_f64(), tolerance: PASSIVITY_TOLERANCE });
            }
            if *v < -tol {
                return Err(Error::Domain(format!("negative transmissivity {v}")));
            }
            *v = v.clamp(T::zero(), T::one());
        }
        values.sort_by(|a, b| b.partial_cmp(a).expect("finite"));
        Ok(Self { values, angular_frequency: None })
    }

    pub fn with_angular_frequency(mut self, omega: T) -> Self {
        self.angular_frequency = Some(omega);
        self
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max(&self) -> T {
        self.values.first().copied().unwrap_or(T::zero())
    }

    /// Number of modes with `η > threshold`.
    pub fn plateau_count(&self, threshold: T) -> usize {
        self.values.partition_point(|&v| v > threshold)
    }
}

/// Number of values of `spec` strictly above `threshold`.
pub fn plateau_count<T: Real>(spec: &TransmissivitySpectrum<T>, threshold: T) -> Result<usize> {
    if !(threshold > T::zero() && threshold < T::one()) {
        return Err(Error::Domain(format!("plateau threshold {threshold} must lie in (0, 1)")));
    }
    Ok(spec.plateau_count(threshold))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sorted_and_clamped() {
        let s = TransmissivitySpectrum::new(vec![0.2, 1.0 + 5e-7, -1e-9, 0.7]).unwrap();
        assert_eq!(s.values(), &[1.0, 0.7, 0.2, 0.0]);
        assert!(matches!(
            TransmissivitySpectrum::new(vec![1.0 + 2e-6]),
            Err(Error::PassivityViolation { .. })
        ));
    }

    #[test]
    fn plateau() {
        let s = TransmissivitySpectrum::new(vec![1.0f64; 5]).unwrap();
        assert_eq!(plateau_count(&s, 0.5).unwrap(), 5);
        let s = TransmissivitySpectrum::new(vec![0.9, 0.5, 0.4]).unwrap();
        assert_eq!(plateau_count(&s, 0.5).unwrap(), 1);
        assert!(plateau_count(&s, 1.0).is_err());
    }
}
