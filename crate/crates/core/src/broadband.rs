//! Capacities over a band of carrier frequencies under a mean-power budget.
//!
//! Everything here is `f64`: products such as `β·ħ` are around `1e-63` and
//! underflow single precision.

use serde::Serialize;
use std::f64::consts::{LOG2_E, PI, TAU};

use crate::capacity::{bose, solve_channels, Channel};
use crate::error::{Error, Result};
use crate::optics::{g, OpticalSetup, RegimeThresholds, HBAR, SPEED_OF_LIGHT};
use crate::quadrature::{Adaptive, GaussLegendre};
use crate::scalar::rel_diff;

const ROOT_TOLERANCE: f64 = 1e-12;
const MAX_BISECTIONS: usize = 400;
const MAX_EXPANSIONS: usize = 2_000;
/// Integration error budget for the Planck-type integrals.
const INTEGRAL_TOLERANCE: f64 = 1e-10;

/// Carrier band `[Ω, Ω + δΩ]` observed over a window `T`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrequencyBand {
    /// Ω in rad/s.
    pub lower: f64,
    /// δΩ in rad/s; may be infinite.
    pub width: f64,
    /// T in seconds.
    pub window: f64,
}

impl FrequencyBand {
    pub fn new(lower: f64, width: f64, window: f64) -> Result<Self> {
        if !(lower > 0.0 && lower.is_finite()) {
            return Err(Error::Domain(format!("band edge {lower} must be positive")));
        }
        if !(width > 0.0) {
            return Err(Error::Domain(format!("band width {width} must be positive")));
        }
        if !(window > 0.0 && window.is_finite()) {
            return Err(Error::Domain(format!("time window {window} must be positive")));
        }
        Ok(Self { lower, width, window })
    }

    pub fn upper(&self) -> f64 {
        self.lower + self.width
    }

    pub fn is_bounded(&self) -> bool {
        self.width.is_finite()
    }

    pub fn spacing(&self) -> f64 {
        TAU / self.window
    }

    /// Resolvable frequencies `2πj/T` inside the band.
    pub fn grid(&self) -> Result<Vec<f64>> {
        if !self.is_bounded() {
            return Err(Error::Domain("an unbounded band has no finite frequency grid".into()));
        }
        let dw = self.spacing();
        let first = (self.lower / dw).ceil() as u64;
        let last = (self.upper() / dw).floor() as u64;
        Ok((first..=last).map(|j| j as f64 * dw).collect())
    }
}

/// Per-frequency transmissivity (far field, `αω⁴`) and mode count (near
/// field, `βω²`) prefactors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralCoefficients {
    /// s⁴
    pub alpha: f64,
    /// s²
    pub beta: f64,
}

impl SpectralCoefficients {
    pub fn new(setup: &OpticalSetup<f64>) -> Result<Self> {
        setup.validate()?;
        let a = setup.object_size * setup.pupil_radius / (TAU * SPEED_OF_LIGHT * setup.object_distance);
        let alpha = PI * PI * a.powi(4);
        let beta = PI * a * a;
        let identity = beta * beta;
        if rel_diff(alpha, identity) > 1e-12 {
            return Err(Error::Domain(format!("α = {alpha:e} but β² = {identity:e}")));
        }
        Ok(Self { alpha, beta })
    }
}

/// `L/x_R` at angular frequency `omega`.
pub fn ratio_at(setup: &OpticalSetup<f64>, omega: f64) -> f64 {
    setup.object_size * omega * setup.pupil_radius / (TAU * SPEED_OF_LIGHT * setup.object_distance)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpectralMode {
    /// Sum over the resolvable frequencies.
    Discrete,
    /// Integral over the band (large-window limit).
    Continuum,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MultiplierKind {
    /// Lagrange multiplier `μ` of the power constraint.
    Mu,
    /// `q = ln2·μħ/T`.
    Q,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralAllocation {
    /// Frequencies of the discrete grid (empty in continuum mode).
    pub frequencies: Vec<f64>,
    /// Mean photons per frequency.
    pub photons: Vec<f64>,
    pub multiplier: Option<f64>,
    pub multiplier_kind: MultiplierKind,
    /// Relative power mismatch.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralResult {
    /// Bits per window.
    pub capacity: f64,
    pub allocation: SpectralAllocation,
    pub mode: SpectralMode,
    /// Some frequency in the band falls outside the assumed regime.
    pub regime_violation: bool,
}

/// Integrates over `[a, b]` to a relative accuracy of roughly `rel`.
fn integrate_rel(a: f64, b: f64, rel: f64, f: impl Fn(f64) -> f64) -> Result<f64> {
    let coarse = GaussLegendre::new(24).integrate(a, b, &f).abs();
    let q = Adaptive::new((rel * coarse).max(f64::MIN_POSITIVE));
    q.integrate(a, b, f)
}

fn validate_power(power: f64) -> Result<()> {
    if power >= 0.0 && power.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("power {power} must be nonnegative")))
    }
}

fn empty(mode: SpectralMode, kind: MultiplierKind, frequencies: Vec<f64>, violation: bool) -> SpectralResult {
    let photons = vec![0.0; frequencies.len()];
    SpectralResult {
        capacity: 0.0,
        allocation: SpectralAllocation { frequencies, photons, multiplier: None, multiplier_kind: kind, residual: 0.0 },
        mode,
        regime_violation: violation,
    }
}

/// Finds `x` with `f(x) = target` for `f` decreasing on `(0, ∞)`, bisecting
/// in `ln x` from `seed` expanded by factors of 4.
fn solve_decreasing(seed: f64, target: f64, f: impl Fn(f64) -> Result<f64>) -> Result<(f64, f64)> {
    let mut lo = seed;
    let mut hi = seed;
    let mut f_lo = f(lo)?;
    let mut f_hi = f_lo;
    let mut steps = 0;
    while f_lo < target {
        let next = lo / 4.0;
        let v = f(next)?;
        if v < f_lo {
            return Err(Error::Nonconvergence(format!("power is not decreasing near {next:e}")));
        }
        hi = lo;
        f_hi = f_lo;
        lo = next;
        f_lo = v;
        steps += 1;
        if steps > MAX_EXPANSIONS || lo == 0.0 {
            return Err(Error::Nonconvergence("could not bracket the multiplier from above".into()));
        }
    }
    while f_hi > target {
        let next = hi * 4.0;
        let v = f(next)?;
        if v > f_hi {
            return Err(Error::Nonconvergence(format!("power is not decreasing near {next:e}")));
        }
        lo = hi;
        f_lo = f_hi;
        hi = next;
        f_hi = v;
        steps += 1;
        if steps > MAX_EXPANSIONS || !hi.is_finite() {
            return Err(Error::Nonconvergence("could not bracket the multiplier from below".into()));
        }
    }
    let _ = f_lo;
    let mut best = (hi, f_hi);
    for _ in 0..MAX_BISECTIONS {
        let mid = (lo.ln() * 0.5 + hi.ln() * 0.5).exp();
        if mid <= lo || mid >= hi {
            break;
        }
        let v = f(mid)?;
        best = (mid, v);
        if ((v - target) / target).abs() < ROOT_TOLERANCE {
            break;
        }
        if v > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((best.0, ((best.1 - target) / target).abs()))
}

fn check_regime(setup: &OpticalSetup<f64>, band: &FrequencyBand, thresholds: RegimeThresholds<f64>, far: bool) -> Result<bool> {
    let t = RegimeThresholds::new(thresholds.far, thresholds.near)?;
    Ok(if far {
        !(ratio_at(setup, band.upper()) <= t.far)
    } else {
        !(ratio_at(setup, band.lower) >= t.near)
    })
}

/// Far-field capacity over the band: one mode per frequency with
/// transmissivity `αω⁴`.
pub fn capacity_ff_spectral(
    setup: &OpticalSetup<f64>,
    band: &FrequencyBand,
    power: f64,
    mode: SpectralMode,
    thresholds: RegimeThresholds<f64>,
) -> Result<SpectralResult> {
    validate_power(power)?;
    let c = SpectralCoefficients::new(setup)?;
    let violation = check_regime(setup, band, thresholds, true)?;
    let t = band.window;
    match mode {
        SpectralMode::Discrete => {
            let omegas = band.grid()?;
            let chs: Vec<Channel<f64>> =
                omegas.iter().map(|&w| Channel { modes: 1.0, eta: c.alpha * w.powi(4), cost: HBAR * w / t }).collect();
            discrete(chs, omegas, power, mode, MultiplierKind::Mu, violation)
        }
        SpectralMode::Continuum => {
            if !band.is_bounded() {
                return Err(Error::Domain("the far-field continuum needs a bounded band".into()));
            }
            if power == 0.0 {
                return Ok(empty(mode, MultiplierKind::Mu, Vec::new(), violation));
            }
            let (a, b) = (band.lower, band.upper());
            // κ = μħ/(αT); the optimal occupation at ω is 1/(2^{κ/ω³} − 1)
            let spent = |kappa: f64| {
                integrate_rel(a, b, 1e-13, |w| bose(kappa / (w * w * w)) / (w * w * w))
                    .map(|i| HBAR / (2.0 * c.alpha * PI) * i)
            };
            let y = 2.0 * c.alpha * PI * a.powi(3) * power / (HBAR * band.width);
            let seed = a.powi(3) * (1.0 / y).ln_1p() * LOG2_E;
            let (kappa, residual) = solve_decreasing(seed, power, spent)?;
            let capacity = t / TAU * integrate_rel(a, b, 1e-13, |w| g(bose(kappa / (w * w * w))))?;
            Ok(SpectralResult {
                capacity,
                allocation: SpectralAllocation {
                    frequencies: Vec::new(),
                    photons: Vec::new(),
                    multiplier: Some(kappa * c.alpha * t / HBAR),
                    multiplier_kind: MultiplierKind::Mu,
                    residual,
                },
                mode,
                regime_violation: violation,
            })
        }
    }
}

fn discrete(
    chs: Vec<Channel<f64>>,
    omegas: Vec<f64>,
    power: f64,
    mode: SpectralMode,
    kind: MultiplierKind,
    violation: bool,
) -> Result<SpectralResult> {
    if omegas.is_empty() {
        return Err(Error::Domain("the band contains no resolvable frequency".into()));
    }
    let sol = solve_channels(&chs, power, 0.0, 0.0)?;
    Ok(SpectralResult {
        capacity: sol.capacity,
        allocation: SpectralAllocation {
            frequencies: omegas,
            photons: sol.photons,
            multiplier: sol.multiplier,
            multiplier_kind: kind,
            residual: sol.residual,
        },
        mode,
        regime_violation: violation,
    })
}

/// Thermal-state entropy `g(1/(eˣ − 1))` in bits.
fn thermal_entropy(x: f64) -> f64 {
    if x <= 0.0 {
        return f64::INFINITY;
    }
    (x / x.exp_m1() - (-(-x).exp_m1()).ln()) * LOG2_E
}

/// Mean power spent by the near-field optimum at rescaled multiplier `q`.
fn nf_power(c: &SpectralCoefficients, band: &FrequencyBand, q: f64) -> Result<f64> {
    if band.is_bounded() {
        let i = integrate_rel(band.lower, band.upper(), 1e-13, |w| w.powi(3) / (q * w).exp_m1())?;
        Ok(c.beta * HBAR / TAU * i)
    } else {
        Ok(c.beta * HBAR / (TAU * q.powi(4)) * f_integral(q * band.lower)?)
    }
}

fn nf_capacity(c: &SpectralCoefficients, band: &FrequencyBand, q: f64) -> Result<f64> {
    let t = band.window;
    if band.is_bounded() {
        let i = integrate_rel(band.lower, band.upper(), 1e-13, |w| w * w * thermal_entropy(q * w))?;
        Ok(c.beta * t / TAU * i)
    } else {
        Ok(c.beta * t / (TAU * q.powi(3)) * g_integral(q * band.lower)?)
    }
}

/// Broadband seed `q ≈ (βπ³ħ/(30P))^{1/4}`.
fn q_seed(c: &SpectralCoefficients, power: f64) -> f64 {
    (c.beta * PI.powi(3) * HBAR / (30.0 * power)).powf(0.25)
}

/// Rescaled multiplier `q` meeting the power budget for the near-field
/// optimum over `[Ω, Ω + δΩ]` (`δΩ` may be infinite).
pub fn solve_q(setup: &OpticalSetup<f64>, lower: f64, width: f64, power: f64, window: f64) -> Result<f64> {
    if !(power > 0.0 && power.is_finite()) {
        return Err(Error::Domain(format!("power {power} must be positive")));
    }
    let band = FrequencyBand::new(lower, width, window)?;
    let c = SpectralCoefficients::new(setup)?;
    solve_q_inner(&c, &band, power).map(|(q, _)| q)
}

fn solve_q_inner(c: &SpectralCoefficients, band: &FrequencyBand, power: f64) -> Result<(f64, f64)> {
    solve_decreasing(q_seed(c, power), power, |q| nf_power(c, band, q))
}

/// Near-field capacity over the band: `βω²` lossless modes per frequency.
pub fn capacity_nf_spectral(
    setup: &OpticalSetup<f64>,
    band: &FrequencyBand,
    power: f64,
    mode: SpectralMode,
    thresholds: RegimeThresholds<f64>,
) -> Result<SpectralResult> {
    validate_power(power)?;
    let c = SpectralCoefficients::new(setup)?;
    let violation = check_regime(setup, band, thresholds, false)?;
    match mode {
        SpectralMode::Discrete => {
            let omegas = band.grid()?;
            let t = band.window;
            let chs: Vec<Channel<f64>> =
                omegas.iter().map(|&w| Channel { modes: c.beta * w * w, eta: 1.0, cost: HBAR * w / t }).collect();
            discrete(chs, omegas, power, mode, MultiplierKind::Mu, violation)
        }
        SpectralMode::Continuum => {
            if power == 0.0 {
                return Ok(empty(mode, MultiplierKind::Q, Vec::new(), violation));
            }
            let (q, residual) = solve_q_inner(&c, band, power)?;
            Ok(SpectralResult {
                capacity: nf_capacity(&c, band, q)?,
                allocation: SpectralAllocation {
                    frequencies: Vec::new(),
                    photons: Vec::new(),
                    multiplier: Some(q),
                    multiplier_kind: MultiplierKind::Q,
                    residual,
                },
                mode,
                regime_violation: violation,
            })
        }
    }
}

/// Upper integration limit for `∫_z^∞`, with the neglected tail bounded by
/// `x³e⁻ˣ` integrated exactly.
fn truncation(z: f64) -> Result<f64> {
    let x = (z + 50.0).max(50.0);
    // ∫_x^∞ t³e^{-t} dt, doubled to cover 1/(1 − e^{-t}) ≤ 2 and the extra
    // (t + 1) factor of the entropy integrand
    let tail = 2.0 * (-x).exp() * (x.powi(3) + 3.0 * x * x + 6.0 * x + 6.0) * (1.0 + 1.0 / x) * LOG2_E;
    if tail > INTEGRAL_TOLERANCE {
        return Err(Error::QuadratureNonconvergence(format!("tail beyond {x} is {tail:e}")));
    }
    Ok(x)
}

fn check_z(z: f64) -> Result<()> {
    if z >= 0.0 && z.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("lower limit {z} must be nonnegative")))
    }
}

/// `F(z) = ∫_z^∞ x³/(eˣ − 1) dx`.
pub fn f_integral(z: f64) -> Result<f64> {
    check_z(z)?;
    let top = truncation(z)?;
    Adaptive::new(INTEGRAL_TOLERANCE * 1e-2).integrate(z, top, |x| if x == 0.0 { 0.0 } else { x.powi(3) / x.exp_m1() })
}

/// `G(z) = ∫_z^∞ x²·g(1/(eˣ − 1)) dx`.
pub fn g_integral(z: f64) -> Result<f64> {
    check_z(z)?;
    let top = truncation(z)?;
    Adaptive::new(INTEGRAL_TOLERANCE * 1e-2).integrate(z, top, |x| if x == 0.0 { 0.0 } else { x * x * thermal_entropy(x) })
}

/// `∫₀^∞ x^{2n−1}/(e^{px} − 1) dx` by quadrature.
pub fn bose_moment(n: u32, p: f64) -> Result<f64> {
    if n == 0 || !(p > 0.0 && p.is_finite()) {
        return Err(Error::Domain(format!("moment needs n ≥ 1 and p > 0, got n = {n}, p = {p}")));
    }
    let k = 2 * n as i32 - 1;
    // substitute y = p·x
    let top = 50.0 + 15.0 * n as f64;
    let v = Adaptive::new(1e-14).integrate(0.0, top, |y| if y == 0.0 { 0.0 } else { y.powi(k) / y.exp_m1() })?;
    Ok(v / p.powi(k + 1))
}

/// Semiclassical broadband checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BroadbandChecks {
    /// Minimum of `P/(ħΩ²)`.
    pub semiclassical_min: f64,
    /// Maximum of `qΩ`.
    pub q_omega_max: f64,
}

impl Default for BroadbandChecks {
    fn default() -> Self {
        Self { semiclassical_min: 1e3, q_omega_max: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BroadbandEstimate {
    /// Closed-form unbounded-band capacity, bits per window.
    pub capacity: f64,
    /// `P/(ħΩ²)`.
    pub semiclassical: f64,
    /// Broadband multiplier estimate `(βπ³ħ/(30P))^{1/4}`.
    pub q: f64,
    /// `q·Ω`.
    pub q_omega: f64,
    /// `|F(qΩ) − F(0)|/F(0)`: error of pushing the band edge to zero.
    pub edge_error: f64,
    /// `βT/(2πq³)·G(0)` with the same `q`.
    pub asymptote: f64,
    pub semiclassical_ok: bool,
    pub q_omega_ok: bool,
}

/// Closed-form near-field capacity for an unbounded band starting at `Ω`,
/// `(βπ²T/(3·15^{1/4}))·(2πP/(βħ))^{3/4}·log₂e`.
pub fn capacity_nf_broadband(
    setup: &OpticalSetup<f64>,
    lower: f64,
    power: f64,
    window: f64,
    checks: BroadbandChecks,
) -> Result<BroadbandEstimate> {
    validate_power(power)?;
    let band = FrequencyBand::new(lower, f64::INFINITY, window)?;
    let c = SpectralCoefficients::new(setup)?;
    let capacity = c.beta * PI * PI * window / (3.0 * 15f64.powf(0.25)) * (TAU * power / (c.beta * HBAR)).powf(0.75) * LOG2_E;
    let semiclassical = power / (HBAR * lower * lower);
    if power == 0.0 {
        return Ok(BroadbandEstimate {
            capacity,
            semiclassical,
            q: f64::INFINITY,
            q_omega: f64::INFINITY,
            edge_error: 1.0,
            asymptote: 0.0,
            semiclassical_ok: false,
            q_omega_ok: false,
        });
    }
    let q = q_seed(&c, power);
    let q_omega = q * band.lower;
    let f0 = f_integral(0.0)?;
    let edge_error = if q_omega.is_finite() && q_omega < 1e3 { (f_integral(q_omega)? - f0).abs() / f0 } else { 1.0 };
    Ok(BroadbandEstimate {
        capacity,
        semiclassical,
        q,
        q_omega,
        edge_error,
        asymptote: c.beta * window / (TAU * q.powi(3)) * g_integral(0.0)?,
        semiclassical_ok: semiclassical >= checks.semiclassical_min,
        q_omega_ok: q_omega <= checks.q_omega_max,
    })
}

/// Far-field narrowband closed form `(TδΩ/2π)·g(2πPαΩ³/(ħδΩ))`.
pub fn capacity_ff_narrowband(setup: &OpticalSetup<f64>, band: &FrequencyBand, power: f64) -> Result<f64> {
    validate_power(power)?;
    let c = SpectralCoefficients::new(setup)?;
    let (w, dw, t) = (band.lower, band.width, band.window);
    Ok(t * dw / TAU * g(TAU * power * c.alpha * w.powi(3) / (HBAR * dw)))
}

/// Near-field narrowband closed form `(β/2π)·T·Ω²δΩ·g(2πP/(βħΩ³δΩ))`.
pub fn capacity_nf_narrowband(setup: &OpticalSetup<f64>, band: &FrequencyBand, power: f64) -> Result<f64> {
    validate_power(power)?;
    let c = SpectralCoefficients::new(setup)?;
    let (w, dw, t) = (band.lower, band.width, band.window);
    Ok(c.beta / TAU * t * w * w * dw * g(TAU * power / (c.beta * HBAR * w.powi(3) * dw)))
}

/// The same narrowband capacity written as `δΩT/2π` copies of the
/// single-frequency near-field capacity with `n̄(Ω) = 2πP/(ħΩδΩ)`.
pub fn capacity_nf_narrowband_modes(setup: &OpticalSetup<f64>, band: &FrequencyBand, power: f64) -> Result<f64> {
    validate_power(power)?;
    setup.validate()?;
    let (w, dw, t) = (band.lower, band.width, band.window);
    let x_r = TAU * SPEED_OF_LIGHT * setup.object_distance / (w * setup.pupil_radius);
    let ratio = setup.object_size / x_r;
    let nbar = TAU * power / (HBAR * w * dw);
    let nu = PI * ratio * ratio;
    Ok(dw * t / TAU * nu * g(nbar / nu))
}

/// `∫₀^∞ x^{2n−1}/(e^{px} − 1) dx = (−1)^{n+1}(2π/p)^{2n}B_{2n}/(4n)` for n ≤ 3.
pub fn planck_moment_exact(n: u32, p: f64) -> Option<f64> {
    let b = match n {
        1 => 1.0 / 6.0,
        2 => -1.0 / 30.0,
        3 => 1.0 / 42.0,
        _ => return None,
    };
    let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
    Some(sign * (TAU / p).powi(2 * n as i32) * b / (4.0 * n as f64))
}
