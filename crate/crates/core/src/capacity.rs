//! Capacity of parallel lossy bosonic modes.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::optics::{classify_regime, g, g_increment, OpticalSetup, PhotonBudget, Regime, RegimeReport, RegimeThresholds, HBAR};
use crate::scalar::Real;
use crate::transfer::TransmissivitySpectrum;

/// Modes below this transmissivity are left out of water-filling.
pub const ETA_FLOOR: f64 = 1e-12;

const MAX_BRACKET_STEPS: usize = 1_000_000;
const MAX_BISECTIONS: usize = 200;

fn check_eta<T: Real>(eta: T) -> Result<()> {
    if eta >= T::zero() && eta <= T::one() {
        Ok(())
    } else {
        Err(Error::Domain(format!("transmissivity {eta} outside [0, 1]")))
    }
}

fn check_nonneg<T: Real>(name: &str, v: T) -> Result<()> {
    if v >= T::zero() && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} {v} must be nonnegative")))
    }
}

/// `g(η·n̄)`: bits per use of a pure-loss mode.
pub fn lossy_capacity<T: Real>(eta: T, nbar: T) -> Result<T> {
    check_eta(eta)?;
    check_nonneg("photon number", nbar)?;
    Ok(g(eta * nbar))
}

/// `g(η·n̄ + n̄_th) − g(n̄_th)`: the same mode over a thermal background.
pub fn thermal_capacity<T: Real>(eta: T, nbar: T, nth: T) -> Result<T> {
    check_eta(eta)?;
    check_nonneg("photon number", nbar)?;
    check_nonneg("thermal occupation", nth)?;
    Ok(g_increment(nth, eta * nbar))
}

/// Optimal split of the budget.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhotonAllocation<T> {
    /// Mean photons sent into each entry.
    pub photons: Vec<T>,
    /// Number of degenerate modes sharing each entry (1 for a resolved spectrum).
    pub modes: Vec<T>,
    /// Lagrange multiplier; absent when nothing was optimized (empty budget).
    pub multiplier: Option<T>,
    /// `|Σ cost·n̄ − budget| / budget`.
    pub residual: T,
}

impl<T: Real> PhotonAllocation<T> {
    fn empty(len: usize) -> Self {
        Self { photons: vec![T::zero(); len], modes: vec![T::one(); len], multiplier: None, residual: T::zero() }
    }

    pub fn total(&self) -> T {
        self.photons.iter().fold(T::zero(), |s, &n| s + n)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    NumericalSvd,
    ClosedFormFf,
    ClosedFormNf,
    Waterfill,
}

/// Which formula produced a capacity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Provenance {
    pub method: Method,
    /// 1 or 2 transverse dimensions; absent for abstract spectra.
    pub dimension: Option<usize>,
    pub polarized: bool,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Flags {
    /// A closed form was evaluated outside the regime it assumes.
    pub regime_violation: bool,
    /// Positive budget but nothing is transmitted.
    pub no_transmission: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CapacityResult<T> {
    /// Bits per channel use.
    pub capacity: T,
    pub allocation: PhotonAllocation<T>,
    pub regime: Option<RegimeReport<T>>,
    pub provenance: Provenance,
    pub flags: Flags,
}

/// A group of `modes` identical modes with transmissivity `eta` whose photons
/// each cost `cost` units of the budget.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Channel<T> {
    pub modes: T,
    pub eta: T,
    pub cost: T,
}

pub(crate) struct Solution<T> {
    pub photons: Vec<T>,
    pub multiplier: Option<T>,
    pub residual: T,
    pub capacity: T,
}

/// `1/(2^x − 1)`, accurate for small `x`.
pub(crate) fn bose<T: Real>(x: T) -> T {
    T::one() / (x * T::LN_2()).exp_m1()
}

/// Stationary photon number of a channel at multiplier `mu`.
fn occupation<T: Real>(c: &Channel<T>, mu: T, nth: T) -> T {
    let per_mode = (bose(mu * c.cost / c.eta) - nth) / c.eta;
    if per_mode > T::zero() {
        c.modes * per_mode
    } else {
        T::zero()
    }
}

fn spent<T: Real>(chs: &[Channel<T>], mu: T, nth: T) -> T {
    chs.iter().fold(T::zero(), |s, c| s + c.cost * occupation(c, mu, nth))
}

/// Water-filling over `chs`; channels with `eta ≤ floor` get nothing.
pub(crate) fn solve_channels<T: Real>(chs: &[Channel<T>], budget: T, nth: T, floor: T) -> Result<Solution<T>> {
    let none = || Solution { photons: vec![T::zero(); chs.len()], multiplier: None, residual: T::zero(), capacity: T::zero() };
    if budget == T::zero() {
        return Ok(none());
    }
    let live: Vec<usize> = (0..chs.len()).filter(|&j| chs[j].eta > floor && chs[j].modes > T::zero()).collect();
    if live.is_empty() {
        return Ok(none());
    }
    let active: Vec<Channel<T>> = live.iter().map(|&j| chs[j]).collect();

    // Everything on the most efficient channel overestimates its share, so
    // the multiplier found there spends at least the budget.
    let best = active
        .iter()
        .max_by(|a, b| (a.eta / a.cost).partial_cmp(&(b.eta / b.cost)).expect("finite"))
        .expect("nonempty");
    let x = best.eta * budget / (best.cost * best.modes) + nth;
    let mut lo = (T::one() / x).ln_1p() * T::LOG2_E() * best.eta / best.cost;
    if !(lo > T::zero() && lo.is_finite()) {
        return Err(Error::Nonconvergence(format!("degenerate multiplier bracket {lo}")));
    }
    let mut hi = lo;
    let mut steps = 0;
    while spent(&active, hi, nth) > budget {
        hi *= T::lit(2.0);
        steps += 1;
        if steps > MAX_BRACKET_STEPS || !hi.is_finite() {
            return Err(Error::Nonconvergence("multiplier bracket did not close".into()));
        }
    }
    // bisect until the bracket collapses
    let mut mu = hi;
    for _ in 0..MAX_BISECTIONS {
        let mid = lo + (hi - lo) * T::lit(0.5);
        if mid <= lo || mid >= hi {
            break;
        }
        mu = mid;
        if spent(&active, mid, nth) > budget {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut photons = vec![T::zero(); chs.len()];
    let mut capacity = T::zero();
    let mut used = T::zero();
    for (&j, c) in live.iter().zip(&active) {
        let n = occupation(c, mu, nth);
        photons[j] = n;
        used += c.cost * n;
        capacity += c.modes * g_increment(nth, c.eta * n / c.modes);
    }
    Ok(Solution { photons, multiplier: Some(mu), residual: ((used - budget) / budget).abs(), capacity })
}

/// Maximizes `Σ g(η_j n̄_j + n̄_th) − g(n̄_th)` under the budget.
///
/// With a photon budget every photon costs 1; with a power budget each costs
/// `ħω_j` against the energy `P·T`, so `omegas` (rad/s) is required.
pub fn waterfill<T: Real>(etas: &[T], budget: &PhotonBudget<T>, omegas: Option<&[T]>) -> Result<CapacityResult<T>> {
    budget.validate()?;
    for &e in etas {
        check_eta(e)?;
    }
    let costs: Vec<T> = if budget.is_energy() {
        let om = omegas.ok_or_else(|| Error::Domain("a power budget needs mode frequencies".into()))?;
        if om.len() != etas.len() {
            return Err(Error::Domain(format!("{} frequencies for {} modes", om.len(), etas.len())));
        }
        om.iter()
            .map(|&w| {
                if w > T::zero() && w.is_finite() {
                    Ok(T::lit(HBAR) * w)
                } else {
                    Err(Error::Domain(format!("angular frequency {w} must be positive")))
                }
            })
            .collect::<Result<_>>()?
    } else {
        vec![T::one(); etas.len()]
    };
    let chs: Vec<Channel<T>> = etas.iter().zip(&costs).map(|(&eta, &cost)| Channel { modes: T::one(), eta, cost }).collect();
    let total = budget.total();
    let sol = solve_channels(&chs, total, budget.thermal, T::lit(ETA_FLOOR))?;
    let mut allocation = PhotonAllocation::empty(etas.len());
    allocation.photons = sol.photons;
    allocation.multiplier = sol.multiplier;
    allocation.residual = sol.residual;
    Ok(CapacityResult {
        capacity: sol.capacity,
        allocation,
        regime: None,
        provenance: Provenance { method: Method::Waterfill, dimension: None, polarized: false },
        flags: Flags { regime_violation: false, no_transmission: total > T::zero() && sol.multiplier.is_none() },
    })
}

/// Water-filling over a computed spectrum.
pub fn capacity_numerical<T: Real>(spectrum: &TransmissivitySpectrum<T>, budget: &PhotonBudget<T>) -> Result<CapacityResult<T>> {
    let omegas = spectrum.angular_frequency.map(|w| vec![w; spectrum.len()]);
    let mut r = waterfill(spectrum.values(), budget, omegas.as_deref())?;
    r.provenance.method = Method::NumericalSvd;
    Ok(r)
}

/// `modes` degenerate modes of transmissivity `eta` sharing `nbar` photons.
#[allow(clippy::too_many_arguments)]
fn equipartition<T: Real>(eta: T, modes: T, nbar: T, method: Method, dimension: usize, polarized: bool, regime: RegimeReport<T>, expected: Regime) -> CapacityResult<T> {
    let per_mode = eta * nbar / modes;
    let multiplier = (per_mode > T::zero()).then(|| eta * (T::one() / per_mode).ln_1p() * T::LOG2_E());
    CapacityResult {
        capacity: modes * g(per_mode),
        allocation: PhotonAllocation { photons: vec![nbar], modes: vec![modes], multiplier, residual: T::zero() },
        regime: Some(regime),
        provenance: Provenance { method, dimension: Some(dimension), polarized },
        flags: Flags { regime_violation: regime.regime != expected, no_transmission: false },
    }
}

fn prepare<T: Real>(setup: &OpticalSetup<T>, nbar: T, thresholds: RegimeThresholds<T>) -> Result<RegimeReport<T>> {
    check_nonneg("photon number", nbar)?;
    classify_regime(setup, thresholds)
}

fn polarization<T: Real>(polarized: bool) -> T {
    if polarized {
        T::lit(2.0)
    } else {
        T::one()
    }
}

/// Far-field 2D link: one mode with `η = π²(L/x_R)⁴`.
pub fn capacity_ff_2d<T: Real>(setup: &OpticalSetup<T>, nbar: T, polarized: bool, thresholds: RegimeThresholds<T>) -> Result<CapacityResult<T>> {
    let report = prepare(setup, nbar, thresholds)?;
    let r2 = report.ratio * report.ratio;
    let eta = T::PI() * T::PI() * r2 * r2;
    Ok(equipartition(eta, polarization(polarized), nbar, Method::ClosedFormFf, 2, polarized, report, Regime::FarField))
}

/// Near-field 2D link: `ν = π(L/x_R)²` lossless modes.
pub fn capacity_nf_2d<T: Real>(setup: &OpticalSetup<T>, nbar: T, polarized: bool, thresholds: RegimeThresholds<T>) -> Result<CapacityResult<T>> {
    let report = prepare(setup, nbar, thresholds)?;
    let nu = T::PI() * report.ratio * report.ratio * polarization(polarized);
    Ok(equipartition(T::one(), nu, nbar, Method::ClosedFormNf, 2, polarized, report, Regime::NearField))
}

/// Far-field slit: one mode with `η = 2L/x_R`.
pub fn capacity_ff_1d<T: Real>(setup: &OpticalSetup<T>, nbar: T, thresholds: RegimeThresholds<T>) -> Result<CapacityResult<T>> {
    let report = prepare(setup, nbar, thresholds)?;
    let eta = T::lit(2.0) * report.ratio;
    Ok(equipartition(eta, T::one(), nbar, Method::ClosedFormFf, 1, false, report, Regime::FarField))
}

/// Near-field slit: `2L/x_R` lossless modes.
pub fn capacity_nf_1d<T: Real>(setup: &OpticalSetup<T>, nbar: T, thresholds: RegimeThresholds<T>) -> Result<CapacityResult<T>> {
    let report = prepare(setup, nbar, thresholds)?;
    let nu = T::lit(2.0) * report.ratio;
    Ok(equipartition(T::one(), nu, nbar, Method::ClosedFormNf, 1, false, report, Regime::NearField))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rel_diff;
    use proptest::prelude::*;

    const G3: f64 = 3.245_112_497_836_5;

    fn photons(n: f64) -> PhotonBudget<f64> {
        PhotonBudget::photons(n)
    }

    #[test]
    fn single_mode_values() {
        assert_eq!(lossy_capacity(1.0, 1.0).unwrap(), 2.0);
        assert_eq!(lossy_capacity(0.0, 10.0).unwrap(), 0.0);
        assert!((lossy_capacity(0.2f64, 4.0).unwrap() - 1.783_936_907_708_8).abs() < 1e-9);
        assert!(lossy_capacity(1.5, 1.0).is_err());
        assert!(lossy_capacity(0.5, -1.0).is_err());
    }

    #[test]
    fn thermal_values() {
        assert!((thermal_capacity(1.0f64, 1.0, 1.0).unwrap() - 0.754_887_502_163_468_2).abs() < 1e-9);
        assert_eq!(thermal_capacity(0.3, 2.0, 0.0).unwrap(), lossy_capacity(0.3, 2.0).unwrap());
        let mut last = f64::INFINITY;
        for i in 0..40 {
            let c = thermal_capacity(0.7, 3.0, i as f64 * 0.25).unwrap();
            assert!(c < last);
            last = c;
        }
        assert!(thermal_capacity(0.3, 2.0, -1.0).is_err());
    }

    #[test]
    fn equal_modes_split_evenly() {
        let r = waterfill(&[1.0, 1.0], &photons(2.0), None).unwrap();
        assert!((r.capacity - 4.0).abs() < 1e-10);
        for &n in &r.allocation.photons {
            assert!((n - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn dead_mode_gets_nothing() {
        let r = waterfill(&[1.0, 0.0], &photons(3.0), None).unwrap();
        assert_eq!(r.allocation.photons[1], 0.0);
        assert!((r.allocation.photons[0] - 3.0).abs() < 1e-10);
        assert!((r.capacity - G3).abs() < 1e-9);
    }

    #[test]
    fn nothing_transmitted() {
        let r = waterfill(&[0.0, 0.0], &photons(3.0), None).unwrap();
        assert_eq!(r.capacity, 0.0);
        assert!(r.flags.no_transmission);
        let r = waterfill(&[0.5], &photons(0.0), None).unwrap();
        assert_eq!(r.capacity, 0.0);
        assert!(!r.flags.no_transmission);
    }

    #[test]
    fn floor_exclusion_is_negligible() {
        let with = waterfill(&[0.9, 0.4, 5e-13], &photons(2.0), None).unwrap();
        let chs: Vec<Channel<f64>> =
            [0.9, 0.4, 5e-13].iter().map(|&eta| Channel { modes: 1.0, eta, cost: 1.0 }).collect();
        let without = solve_channels(&chs, 2.0, 0.0, 0.0).unwrap();
        assert!((with.capacity - without.capacity).abs() < 1e-10);
    }

    #[test]
    fn energy_budget() {
        let w = 3.7e15;
        let b = PhotonBudget::power(1e-12, 1e-3);
        let r = waterfill(&[1.0, 1.0], &b, Some(&[w, w])).unwrap();
        let n = 1e-15 / (HBAR * w);
        assert!(rel_diff(r.allocation.total(), n) < 1e-10);
        assert!(rel_diff(r.capacity, 2.0 * g(n / 2.0)) < 1e-10);
        assert!(waterfill(&[1.0], &b, None).is_err());
    }

    #[test]
    fn thermal_waterfill_matches_single_mode() {
        let b = photons(2.0).with_thermal(0.5);
        let r = waterfill(&[0.6], &b, None).unwrap();
        assert!(rel_diff(r.capacity, thermal_capacity(0.6, 2.0, 0.5).unwrap()) < 1e-10);
    }

    #[test]
    fn grid_search_oracle_three_modes() {
        let etas = [0.9, 0.5, 0.1];
        let r = waterfill(&etas, &photons(2.0), None).unwrap();
        let obj = |a: f64, b: f64| g(0.9 * a) + g(0.5 * b) + g(0.1 * (2.0 - a - b).max(0.0));
        let mut best = (0.0, 0.0, f64::MIN);
        for i in 0..=2000 {
            for j in 0..=(2000 - i) {
                let (a, b) = (i as f64 * 1e-3, j as f64 * 1e-3);
                let v = obj(a, b);
                if v > best.2 {
                    best = (a, b, v);
                }
            }
        }
        let mut step = 1e-3;
        while step > 1e-10 {
            let (a0, b0, _) = best;
            for da in [-1.0, 0.0, 1.0] {
                for db in [-1.0, 0.0, 1.0] {
                    let (a, b) = (a0 + da * step, b0 + db * step);
                    if a >= 0.0 && b >= 0.0 && a + b <= 2.0 && obj(a, b) > best.2 {
                        best = (a, b, obj(a, b));
                    }
                }
            }
            if best.0 == a0 && best.1 == b0 {
                step *= 0.5;
            }
        }
        assert!((r.capacity - best.2).abs() < 1e-5, "{} vs {}", r.capacity, best.2);
    }

    #[test]
    fn closed_forms() {
        let t = RegimeThresholds::default();
        let ff = OpticalSetup::<f64>::with_ratio(0.1).unwrap();
        let nf = OpticalSetup::<f64>::with_ratio(10.0).unwrap();
        let c = capacity_ff_2d(&ff, 4.0, false, t).unwrap();
        assert!((c.capacity - 0.037_229_171_031_075_11).abs() < 1e-9);
        assert!(!c.flags.regime_violation);
        assert_eq!(capacity_ff_2d(&ff, 0.0, false, t).unwrap().capacity, 0.0);
        let c = capacity_nf_2d(&nf, 4.0, false, t).unwrap();
        assert!((c.capacity - 30.988_772_432_580_138).abs() < 1e-9);
        assert!(capacity_nf_2d(&ff, 4.0, false, t).unwrap().flags.regime_violation);
        assert!((capacity_ff_1d(&ff, 4.0, t).unwrap().capacity - 1.783_936_907_708_8).abs() < 1e-9);
        assert!((capacity_nf_1d(&nf, 4.0, t).unwrap().capacity - 15.600_538_119_560_499).abs() < 1e-9);
        assert_eq!(capacity_nf_1d(&nf, 0.0, t).unwrap().capacity, 0.0);
        assert!(capacity_ff_1d(&nf, 4.0, t).unwrap().flags.regime_violation);
    }

    #[test]
    fn polarization_and_mode_count() {
        let t = RegimeThresholds::default();
        let ff = OpticalSetup::<f64>::with_ratio(0.1).unwrap();
        for n in [1e-3, 1.0, 1e3] {
            let u = capacity_ff_2d(&ff, n, false, t).unwrap().capacity;
            let p = capacity_ff_2d(&ff, n, true, t).unwrap().capacity;
            assert!(p >= u);
        }
        let mut last = 0.0;
        for ratio in [5.0, 6.0, 8.0, 12.0, 20.0] {
            let c = capacity_nf_2d(&OpticalSetup::<f64>::with_ratio(ratio).unwrap(), 4.0, false, t).unwrap().capacity;
            assert!(c > last);
            last = c;
        }
    }

    #[test]
    fn single_value_spectrum() {
        let s = TransmissivitySpectrum::new(vec![0.37]).unwrap();
        let r = capacity_numerical(&s, &photons(5.0)).unwrap();
        assert!(rel_diff(r.capacity, lossy_capacity(0.37, 5.0).unwrap()) < 1e-10);
        assert_eq!(r.provenance.method, Method::NumericalSvd);
    }

    fn spectrum_strategy() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(prop_oneof![Just(0.0), 1e-3..1.0f64], 2..8)
    }

    proptest! {
        #[test]
        fn allocation_is_optimal(etas in spectrum_strategy(), nbar in 0.05..20.0f64, nth in prop_oneof![Just(0.0), 0.0..3.0f64]) {
            let b = photons(nbar).with_thermal(nth);
            let r = waterfill(&etas, &b, None).unwrap();
            prop_assume!(!r.flags.no_transmission);
            let n = &r.allocation.photons;
            prop_assert!(r.allocation.residual < 1e-10);
            prop_assert!((r.allocation.total() - nbar).abs() <= 1e-10 * nbar);
            let obj = |n: &[f64]| etas.iter().zip(n).map(|(&e, &x)| g_increment(nth, e * x)).sum::<f64>();
            let base = obj(n);
            let delta = 1e-4;
            for i in 0..n.len() {
                if etas[i] == 0.0 {
                    prop_assert_eq!(n[i], 0.0);
                }
                for j in 0..n.len() {
                    if i == j || n[i] < delta {
                        continue;
                    }
                    let mut m = n.clone();
                    m[i] -= delta;
                    m[j] += delta;
                    prop_assert!(obj(&m) - base <= 1e-9);
                }
            }
        }

        #[test]
        fn capacity_is_monotone(etas in spectrum_strategy(), nbar in 0.05..20.0f64, k in 0usize..8) {
            let c0 = waterfill(&etas, &photons(nbar), None).unwrap().capacity;
            let c1 = waterfill(&etas, &photons(nbar * 1.01), None).unwrap().capacity;
            prop_assert!(c1 >= c0 - 1e-12);
            let mut up = etas.clone();
            let k = k % up.len();
            up[k] = (up[k] + 0.05).min(1.0);
            let c2 = waterfill(&up, &photons(nbar), None).unwrap().capacity;
            prop_assert!(c2 >= c0 - 1e-12);
        }

        #[test]
        fn equal_transmissivities_equal_shares(eta in 1e-3..1.0f64, count in 2usize..7, nbar in 0.01..50.0f64) {
            let r = waterfill(&vec![eta; count], &photons(nbar), None).unwrap();
            let n = &r.allocation.photons;
            for w in n.windows(2) {
                prop_assert!((w[0] - w[1]).abs() < 1e-10);
            }
        }
    }
}
