//! Special functions used by the kernels: normalized sinc and the Bessel
//! function of the first kind of order one.

use crate::scalar::Real;

/// `sin(πx) / (πx)`, equal to 1 at the origin.
pub fn sinc<T: Real>(x: T) -> T {
    let px = T::PI() * x;
    if px.abs() < T::lit(1e-4) {
        // 1 - (πx)²/6 + (πx)⁴/120 is exact to rounding below 1e-4
        let p2 = px * px;
        T::one() - p2 / T::lit(6.0) + p2 * p2 / T::lit(120.0)
    } else {
        px.sin() / px
    }
}

/// Bessel function `J₁(x)`.
///
/// Miller's backward recurrence normalized by `J₀ + 2ΣJ₂ₖ = 1` for
/// `|x| ≤ 25`, Hankel's asymptotic expansion beyond.
pub fn bessel_j1<T: Real>(x: T) -> T {
    let ax = x.abs();
    let sign = if x < T::zero() { -T::one() } else { T::one() };
    if ax == T::zero() {
        return T::zero();
    }
    let v = if ax <= T::lit(25.0) {
        j1_miller(ax)
    } else {
        j1_hankel(ax)
    };
    sign * v
}

fn j1_miller<T: Real>(x: T) -> T {
    let xf = x.as_f64();
    let start = 2 * ((xf as usize + 30 + (40.0 * xf).sqrt() as usize) / 2);
    let two_over_x = T::lit(2.0) / x;
    let big = T::lit(1e10);
    let mut j_next = T::zero();
    let mut j_cur = T::lit(1e-30);
    let mut even_sum = T::zero();
    let mut j1 = T::zero();
    let mut j0 = T::zero();
    for k in (1..=start).rev() {
        let mut j_prev = T::from_usize_lossy(k) * two_over_x * j_cur - j_next;
        if j_prev.abs() > big {
            let s = T::one() / big;
            j_prev *= s;
            j_cur *= s;
            even_sum *= s;
            j1 *= s;
        }
        j_next = j_cur;
        j_cur = j_prev;
        // j_cur now holds J_{k-1}
        match k - 1 {
            0 => j0 = j_cur,
            1 => j1 = j_cur,
            m if m % 2 == 0 => even_sum += j_cur,
            _ => {}
        }
    }
    j1 / (j0 + T::lit(2.0) * even_sum)
}

fn j1_hankel<T: Real>(x: T) -> T {
    let mu = T::lit(4.0);
    let eight_x = T::lit(8.0) * x;
    let mut p = T::zero();
    let mut q = T::zero();
    let mut term = T::one();
    let mut prev = T::INFINITY;
    for k in 0..200usize {
        if k > 0 {
            let odd = T::from_usize_lossy(2 * k - 1);
            term = term * (mu - odd * odd) / (T::from_usize_lossy(k) * eight_x);
        }
        if term.abs() > prev {
            break;
        }
        prev = term.abs();
        // P collects even k with alternating signs, Q the odd ones
        match k % 4 {
            0 => p += term,
            1 => q += term,
            2 => p -= term,
            _ => q -= term,
        }
        if term.abs() < T::EPSILON * T::lit(1e-3) {
            break;
        }
    }
    let chi = x - T::lit(0.75) * T::PI();
    (T::lit(2.0) / (T::PI() * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}
