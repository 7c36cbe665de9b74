//! Overlap between the diffraction patterns of two object-plane pixels.

use nalgebra::{Complex, ComplexField};

use super::pupil::Pupil;
use crate::error::{Error, Result};
use crate::optics::OpticalSetup;
use crate::quadrature::{composite_nodes, GaussLegendre, PANEL_NODES};
use crate::scalar::Real;
use crate::special::{bessel_j1, sinc};

/// Object-plane position in meters. Slit pupils use only the first component.
pub type Position<T> = [T; 2];

struct Geometry<T> {
    x_r: T,
    /// Separation in units of `x_R`.
    k: [T; 2],
    phase: Complex<T>,
}

fn geometry<T: Real>(setup: &OpticalSetup<T>, pupil: &Pupil<T>, a: Position<T>, b: Position<T>) -> Result<Geometry<T>> {
    setup.validate()?;
    pupil.validate()?;
    if a.iter().chain(&b).any(|v| !v.is_finite()) {
        return Err(Error::Domain("positions must be finite".into()));
    }
    let x_r = setup.rayleigh_length();
    let one_axis = matches!(pupil, Pupil::Slit1D { .. });
    let sq = |p: Position<T>| if one_axis { p[0] * p[0] } else { p[0] * p[0] + p[1] * p[1] };
    let theta = T::PI() * (sq(a) - sq(b)) / (setup.wavelength * setup.object_distance);
    let k = if one_axis { [(a[0] - b[0]) / x_r, T::zero()] } else { [(a[0] - b[0]) / x_r, (a[1] - b[1]) / x_r] };
    Ok(Geometry { x_r, k, phase: Complex::new(theta.cos(), theta.sin()) })
}

/// Closed-form overlap `C_{k,k'}`; for a circular pupil of radius `a` and
/// `a' = a/R`, `C = e^{iδϑ}·x_R⁻²·a'·J1(2πa'·d/x_R)/(d/x_R)`.
pub fn overlap_closed_form<T: Real>(
    setup: &OpticalSetup<T>,
    pupil: &Pupil<T>,
    r_k: Position<T>,
    r_k2: Position<T>,
) -> Result<Complex<T>> {
    let geo = geometry(setup, pupil, r_k, r_k2)?;
    let r = setup.pupil_radius;
    let two = T::lit(2.0);
    // ∫ exp(−i2π k·u) over an interval of half-width h
    let window = |h: T, k: T| two * h * sinc(two * h * k);
    let (integral, norm) = match *pupil {
        Pupil::Circular { radius } => {
            let a = radius / r;
            let d = geo.k[0].hypot(geo.k[1]);
            let x = T::TAU() * a * d;
            let v = if x < T::lit(1e-8) { T::PI() * a * a } else { a * bessel_j1(x) / d };
            (v, geo.x_r * geo.x_r)
        }
        Pupil::Slit1D { half_width } => (window(half_width / r, geo.k[0]), geo.x_r),
        Pupil::Rectangular { half_x, half_y } => {
            (window(half_x / r, geo.k[0]) * window(half_y / r, geo.k[1]), geo.x_r * geo.x_r)
        }
    };
    Ok(geo.phase * (integral / norm))
}

fn fourier_nodes<T: Real>(pupil: &Pupil<T>, r: T, order: usize) -> (Vec<[T; 2]>, Vec<T>) {
    let rule = GaussLegendre::new(PANEL_NODES);
    let mut pts = Vec::new();
    let mut ws = Vec::new();
    match *pupil {
        Pupil::Circular { radius } => {
            let a = radius / r;
            let (ts, tw) = composite_nodes(&rule, -T::FRAC_PI_2(), T::FRAC_PI_2(), order);
            for (&t, &wt) in ts.iter().zip(&tw) {
                let chord = a * t.cos();
                let (ys, yw) = composite_nodes(&rule, -chord, chord, order);
                for (y, w) in ys.into_iter().zip(yw) {
                    pts.push([a * t.sin(), y]);
                    ws.push(wt * chord * w);
                }
            }
        }
        Pupil::Slit1D { half_width } => {
            let h = half_width / r;
            let (xs, xw) = composite_nodes(&rule, -h, h, order);
            pts.extend(xs.into_iter().map(|x| [x, T::zero()]));
            ws = xw;
        }
        Pupil::Rectangular { half_x, half_y } => {
            let (xs, xw) = composite_nodes(&rule, -half_x / r, half_x / r, order);
            let (ys, yw) = composite_nodes(&rule, -half_y / r, half_y / r, order);
            for (&x, &wx) in xs.iter().zip(&xw) {
                for (&y, &wy) in ys.iter().zip(&yw) {
                    pts.push([x, y]);
                    ws.push(wx * wy);
                }
            }
        }
    }
    (pts, ws)
}

/// Overlap `C_{k,k'}` by direct quadrature of the pupil Fourier integral.
pub fn overlap<T: Real>(setup: &OpticalSetup<T>, pupil: &Pupil<T>, r_k: Position<T>, r_k2: Position<T>) -> Result<Complex<T>> {
    let geo = geometry(setup, pupil, r_k, r_k2)?;
    if pupil.is_closed() {
        return Ok(Complex::new(T::zero(), T::zero()));
    }
    let r = setup.pupil_radius;
    let extent = pupil.half_extent() / r;
    let cycles = T::lit(2.0) * extent * geo.k[0].abs().max(geo.k[1].abs()) + extent;
    let order = (T::lit(16.0) * cycles.ceil()).to_usize().unwrap_or(usize::MAX).max(32);
    let integrate = |order: usize| {
        let (pts, ws) = fourier_nodes(pupil, r, order);
        pts.iter().zip(&ws).fold(Complex::new(T::zero(), T::zero()), |acc, (p, &w)| {
            let arg = -T::TAU() * (geo.k[0] * p[0] + geo.k[1] * p[1]);
            acc + Complex::new(arg.cos(), arg.sin()) * w
        })
    };
    let coarse = integrate(order);
    let fine = integrate(2 * order);
    let scale = T::PI() * extent * extent + T::lit(2.0) * extent;
    if (coarse - fine).modulus() > T::lit(1e-11).max(T::EPSILON * T::lit(1e3)) * scale {
        return Err(Error::QuadratureNonconvergence(format!("overlap integral unresolved at order {order}")));
    }
    let norm = if matches!(pupil, Pupil::Slit1D { .. }) { geo.x_r } else { geo.x_r * geo.x_r };
    Ok(geo.phase * fine / norm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rel_diff;

    fn setup() -> OpticalSetup<f64> {
        OpticalSetup::from_magnification(5e-7, 1.0, 1.0, 1e-2, 1e-3).unwrap()
    }

    #[test]
    fn peak_value() {
        let s = setup();
        let p = Pupil::matched_circular(&s);
        let x_r = s.rayleigh_length();
        let c = overlap_closed_form(&s, &p, [0.0, 0.0], [0.0, 0.0]).unwrap();
        assert!(rel_diff(c.norm(), std::f64::consts::PI / (x_r * x_r)) < 1e-14);
    }

    #[test]
    fn first_zero() {
        let s = setup();
        let p = Pupil::matched_circular(&s);
        let x_r = s.rayleigh_length();
        let d = 3.831_705_970_207_512 / std::f64::consts::TAU * x_r;
        let peak = overlap_closed_form(&s, &p, [0.0; 2], [0.0; 2]).unwrap().norm();
        let at = overlap_closed_form(&s, &p, [d, 0.0], [0.0; 2]).unwrap().norm();
        assert!(at < 1e-10 * peak);
        assert!(rel_diff(d / x_r, 0.6098) < 1e-4);
    }

    #[test]
    fn quadrature_matches_closed_form() {
        let s = setup();
        let x_r = s.rayleigh_length();
        let pupils = [
            Pupil::matched_circular(&s),
            Pupil::matched_slit(&s),
            Pupil::Rectangular { half_x: 1e-2, half_y: 5e-3 },
        ];
        for p in pupils {
            for t in [0.1, 1.0, 3.0] {
                let a = [1e-5, 2e-5];
                let b = [a[0] - 0.6 * t * x_r, a[1] - 0.8 * t * x_r];
                let q = overlap(&s, &p, a, b).unwrap();
                let c = overlap_closed_form(&s, &p, a, b).unwrap();
                assert!((q - c).norm() <= 1e-8 * c.norm(), "{} at {t}: {q} vs {c}", p.name());
            }
        }
    }

    #[test]
    fn decays_away_from_peak() {
        let s = setup();
        let p = Pupil::matched_circular(&s);
        let x_r = s.rayleigh_length();
        let peak = overlap_closed_form(&s, &p, [0.0; 2], [0.0; 2]).unwrap().norm();
        for i in 1..400 {
            let d = i as f64 * 0.01 * x_r;
            let c = overlap_closed_form(&s, &p, [d, 0.0], [0.0; 2]).unwrap().norm();
            assert!(c < peak);
            if d > 2.0 * x_r {
                assert!(c < 0.1 * peak, "d = {}", d / x_r);
            }
        }
    }

    #[test]
    fn phase_depends_on_absolute_positions() {
        let s = setup();
        let p = Pupil::matched_circular(&s);
        let c1 = overlap_closed_form(&s, &p, [0.0; 2], [1e-5, 0.0]).unwrap();
        let c2 = overlap_closed_form(&s, &p, [1e-4, 0.0], [1.1e-4, 0.0]).unwrap();
        assert!(rel_diff(c1.norm(), c2.norm()) < 1e-12);
        assert!((c1 - c2).norm() > 1e-3 * c1.norm());
    }
}
