//! Discretized lens transfer operator.
//!
//! In the scaled pupil coordinate `u = r·L/(λ·D_o)` the window integrals of
//! the kernel reduce to sincs and all quadratic phases cancel, leaving
//!
//! ```text
//! T[n_i][n_o] = ∫ P(u) Π_axes sinc(n_o + u)·sinc(n_i + u) du
//! ```
//!
//! which is real, symmetric and `0 ≤ T ≤ 1`. Entries are still exposed as
//! complex numbers (with zero imaginary part) so externally supplied complex
//! matrices go through the same spectrum code.
//!
//! A finite index window only sees part of the pupil-truncated field; the
//! missing high-index contribution is carried by a handful of extra "tail"
//! modes. Since `Σ_n sinc(n+a)·sinc(n+b) = sinc(a−b)`, the tail Gram kernel on
//! the quadrature nodes is known exactly, and a pivoted Cholesky factor `B` of
//! it gives the closed operator `[A|B]ᵀ[A|B]`, whose spectrum no longer depends
//! on `n_max`.

use nalgebra::{Complex, DMatrix};
use serde::Serialize;

use super::grid::{Dimension, ModeGrid};
use super::pupil::Pupil;
use super::spectrum::TransmissivitySpectrum;
use crate::error::{Error, Result};
use crate::optics::OpticalSetup;
use crate::quadrature::{composite_nodes, GaussLegendre, PANEL_NODES};
use crate::scalar::Real;
use crate::special::sinc;

const AUTO_REFINEMENTS: usize = 3;

/// Pupil quadrature settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureSpec<T> {
    /// Nodes per axis; `None` starts at `max(32, 8·ceil(ρ))` for pupil
    /// half-extent `ρ` and refines until the doubling check passes.
    pub order: Option<usize>,
    pub min_order: usize,
    /// Largest absolute entry change allowed when the order is doubled.
    pub tolerance: T,
    /// Run the order-doubling check.
    pub verify: bool,
}

impl<T: Real> Default for QuadratureSpec<T> {
    fn default() -> Self {
        Self { order: None, min_order: 16, tolerance: T::lit(1e-8), verify: true }
    }
}

impl<T: Real> QuadratureSpec<T> {
    pub fn resolve(&self, rho: T) -> Result<usize> {
        let auto = || (T::lit(8.0) * rho.ceil()).to_usize().unwrap_or(usize::MAX).max(32);
        let order = self.order.unwrap_or_else(auto);
        if order < self.min_order {
            return Err(Error::QuadratureOrder { order, min: self.min_order });
        }
        Ok(order)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransferOptions<T> {
    pub quadrature: QuadratureSpec<T>,
    /// Append tail modes so the spectrum is independent of the index cutoff.
    pub tail_closure: bool,
}

impl<T: Real> Default for TransferOptions<T> {
    fn default() -> Self {
        Self { quadrature: QuadratureSpec::default(), tail_closure: true }
    }
}

/// Transfer matrix with its index map.
///
/// The first `grid.modes()` rows are the grid modes in the grid's flat order
/// (for separable pupils, grid and tail modes interleave; see
/// [`TransferMatrix::mode_index`]).
#[derive(Debug, Clone)]
pub struct TransferMatrix<T: Real> {
    entries: DMatrix<Complex<T>>,
    grid: ModeGrid<T>,
    setup: Option<OpticalSetup<T>>,
    labels: Vec<Option<[i64; 2]>>,
    tail_modes: usize,
    order: usize,
    singular: Option<Vec<T>>,
}

impl<T: Real> TransferMatrix<T> {
    /// Wraps an arbitrary square matrix indexed by `grid`.
    pub fn from_entries(entries: DMatrix<Complex<T>>, grid: ModeGrid<T>) -> Result<Self> {
        let d = grid.modes();
        if entries.nrows() != d || entries.ncols() != d {
            return Err(Error::InvalidSetup(format!(
                "matrix is {}x{}, grid has {d} modes",
                entries.nrows(),
                entries.ncols()
            )));
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Domain("matrix entries must be finite".into()));
        }
        Ok(Self {
            entries,
            grid,
            setup: None,
            labels: (0..d).map(|k| Some(grid.index(k))).collect(),
            tail_modes: 0,
            order: 0,
            singular: None,
        })
    }

    pub fn entries(&self) -> &DMatrix<Complex<T>> {
        &self.entries
    }

    pub fn grid(&self) -> &ModeGrid<T> {
        &self.grid
    }

    pub fn setup(&self) -> Option<&OpticalSetup<T>> {
        self.setup.as_ref()
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    /// Number of rows that are not plain grid modes.
    pub fn tail_modes(&self) -> usize {
        self.tail_modes
    }

    /// Quadrature nodes per axis used for assembly (0 for wrapped matrices).
    pub fn quadrature_order(&self) -> usize {
        self.order
    }

    /// Grid index `(n_x, n_y)` of row `k`, or `None` for a tail mode.
    pub fn mode_index(&self, k: usize) -> Option<[i64; 2]> {
        self.labels.get(k).copied().flatten()
    }

    /// Row of grid mode `n`.
    pub fn position(&self, n: [i64; 2]) -> Option<usize> {
        self.labels.iter().position(|l| *l == Some(n))
    }

    /// Entry between two grid modes.
    pub fn entry(&self, n_i: [i64; 2], n_o: [i64; 2]) -> Option<Complex<T>> {
        Some(self.entries[(self.position(n_i)?, self.position(n_o)?)])
    }

    fn real_symmetric(&self) -> Option<DMatrix<T>> {
        let zero = self.entries.iter().all(|z| z.im == T::zero());
        let re = self.entries.map(|z| z.re);
        (zero && re == re.transpose()).then_some(re)
    }
}

/// Singular values in descending order.
fn singular_values_raw<T: Real>(t: &TransferMatrix<T>) -> Result<Vec<T>> {
    if t.dim() == 0 {
        return Ok(Vec::new());
    }
    let mut s: Vec<T> = match t.real_symmetric() {
        Some(re) => re.symmetric_eigenvalues().iter().map(|v| v.abs()).collect(),
        None => {
            let svd = t.entries.clone().try_svd(false, false, T::EPSILON, 10_000).ok_or(Error::DecompositionFailure)?;
            svd.singular_values.iter().copied().collect()
        }
    };
    if s.iter().any(|v| !v.is_finite()) {
        return Err(Error::DecompositionFailure);
    }
    s.sort_by(|a, b| b.partial_cmp(a).expect("finite"));
    Ok(s)
}

/// Mode transmissivities of `t`.
///
/// In 2D these are the squared singular values. In 1D the one-axis matrix is
/// already the Gram matrix of the aperture-truncated mode amplitudes, so its
/// singular values are the power transmissivities themselves (far field:
/// `η₀ → 2L/x_R`).
pub fn singular_values<T: Real>(t: &TransferMatrix<T>) -> Result<TransmissivitySpectrum<T>> {
    let s = match &t.singular {
        Some(s) => s.clone(),
        None => singular_values_raw(t)?,
    };
    let eta = match t.grid.dimension {
        Dimension::One => s,
        Dimension::Two => s.into_iter().map(|v| v * v).collect(),
    };
    let spec = TransmissivitySpectrum::new(eta)?;
    Ok(match &t.setup {
        Some(setup) => spec.with_angular_frequency(setup.angular_frequency()),
        None => spec,
    })
}

struct Nodes<T> {
    x: Vec<T>,
    /// Empty for one-axis node sets.
    y: Vec<T>,
    w: Vec<T>,
}

fn interval_nodes<T: Real>(half: T, order: usize) -> Nodes<T> {
    let rule = GaussLegendre::new(PANEL_NODES);
    let (x, w) = composite_nodes(&rule, -half, half, order);
    Nodes { x, y: Vec::new(), w }
}

/// Disc of radius `rho` through `x = ρ·sin θ`, `y` along the chord. The chord
/// half-length `ρ·cos θ` is smooth in `θ`, so the rule converges spectrally
/// despite the hard edge.
fn disc_nodes<T: Real>(rho: T, order: usize) -> Nodes<T> {
    let rule = GaussLegendre::new(PANEL_NODES);
    let (ts, tw) = composite_nodes(&rule, -T::FRAC_PI_2(), T::FRAC_PI_2(), order);
    let mut nodes = Nodes { x: Vec::new(), y: Vec::new(), w: Vec::new() };
    let (mut ys, mut yw) = (Vec::new(), Vec::new());
    for (&t, &wt) in ts.iter().zip(&tw) {
        let chord = rho * t.cos();
        ys.clear();
        yw.clear();
        let (y, w) = composite_nodes(&rule, -chord, chord, order);
        ys.extend(y);
        yw.extend(w);
        let x = rho * t.sin();
        for (&y, &w) in ys.iter().zip(&yw) {
            nodes.x.push(x);
            nodes.y.push(y);
            nodes.w.push(wt * chord * w);
        }
    }
    nodes
}

/// `Q × (2N+1)` matrix of `sinc(n + u_q)`.
fn axis_sincs<T: Real>(coords: &[T], grid: &ModeGrid<T>) -> DMatrix<T> {
    let ns: Vec<T> = grid.axis().map(|n| T::lit(n as f64)).collect();
    DMatrix::from_fn(coords.len(), ns.len(), |q, j| sinc(ns[j] + coords[q]))
}

struct Amplitudes<T: Real> {
    a: DMatrix<T>,
    px: DMatrix<T>,
    py: Option<DMatrix<T>>,
}

/// Weighted mode amplitudes `A[q][n] = √w_q · Π sinc(n + u_q)`.
fn amplitudes<T: Real>(nodes: &Nodes<T>, grid: &ModeGrid<T>) -> Amplitudes<T> {
    let q = nodes.w.len();
    let sw: Vec<T> = nodes.w.iter().map(|w| w.sqrt()).collect();
    let px = axis_sincs(&nodes.x, grid);
    if nodes.y.is_empty() {
        let a = DMatrix::from_fn(q, px.ncols(), |i, j| sw[i] * px[(i, j)]);
        return Amplitudes { a, px, py: None };
    }
    let py = axis_sincs(&nodes.y, grid);
    let p = grid.per_axis();
    let a = DMatrix::from_fn(q, p * p, |i, k| sw[i] * px[(i, k / p)] * py[(i, k % p)]);
    Amplitudes { a, px, py: Some(py) }
}

/// Weighted Gram kernel of the indices outside the grid, factored by pivoted
/// Cholesky to the numerical rank. Kernel columns are generated on demand.
fn tail_factor<T: Real>(nodes: &Nodes<T>, amp: &Amplitudes<T>) -> DMatrix<T> {
    let q = nodes.w.len();
    let sw: Vec<T> = nodes.w.iter().map(|w| w.sqrt()).collect();
    let entry = |i: usize, j: usize| {
        let inner = |p: &DMatrix<T>| p.row(i).dot(&p.row(j));
        let full_x = sinc(nodes.x[i] - nodes.x[j]);
        let rest = match &amp.py {
            None => full_x - inner(&amp.px),
            Some(py) => full_x * sinc(nodes.y[i] - nodes.y[j]) - inner(&amp.px) * inner(py),
        };
        sw[i] * sw[j] * rest
    };
    let diag: Vec<T> = (0..q).map(|i| entry(i, i)).collect();
    pivoted_cholesky(diag, |p, col: &mut [T]| {
        for (i, c) in col.iter_mut().enumerate() {
            *c = entry(i, p);
        }
    })
}

/// Low-rank `L` with `E ≈ L·Lᵀ` for positive semidefinite `E` given by its
/// diagonal and a column oracle, stopping when the discarded trace (a bound
/// on the eigenvalue error) is negligible.
fn pivoted_cholesky<T: Real>(mut diag: Vec<T>, column: impl Fn(usize, &mut [T])) -> DMatrix<T> {
    let q = diag.len();
    let trace0: T = diag.iter().fold(T::zero(), |s, &d| s + d.max(T::zero()));
    let tol = T::lit(1e-12).max(T::EPSILON * T::from_usize_lossy(q)) * trace0.max(T::one());
    let mut cols: Vec<Vec<T>> = Vec::new();
    while cols.len() < q {
        let remaining = diag.iter().fold(T::zero(), |s, &d| s + d.max(T::zero()));
        if remaining <= tol {
            break;
        }
        let (p, dp) = diag
            .iter()
            .copied()
            .enumerate()
            .fold((0, T::zero()), |best, (i, d)| if d > best.1 { (i, d) } else { best });
        if dp <= T::zero() {
            break;
        }
        let s = dp.sqrt();
        let mut col = vec![T::zero(); q];
        column(p, &mut col);
        for prev in &cols {
            let f = prev[p];
            for (c, v) in col.iter_mut().zip(prev) {
                *c -= *v * f;
            }
        }
        for c in col.iter_mut() {
            *c /= s;
        }
        col[p] = s;
        for (d, c) in diag.iter_mut().zip(&col) {
            *d -= *c * *c;
        }
        diag[p] = T::zero();
        cols.push(col);
    }
    DMatrix::from_fn(q, cols.len(), |i, j| cols[j][i])
}

/// Gram matrix for one node family, with optional tail closure, after the
/// order-doubling check. An automatic order keeps doubling until the check
/// passes. Returns the matrix, the tail rank and the order used.
fn assemble<T: Real>(
    nodes_at: impl Fn(usize) -> Nodes<T>,
    order: usize,
    grid: &ModeGrid<T>,
    opts: &TransferOptions<T>,
) -> Result<(DMatrix<T>, usize, usize)> {
    let refinements = if opts.quadrature.order.is_none() { AUTO_REFINEMENTS } else { 0 };
    let mut order = order;
    let mut nodes = nodes_at(order);
    let mut amp = amplitudes(&nodes, grid);
    let mut gram = amp.a.transpose() * &amp.a;
    if opts.quadrature.verify {
        let mut attempt = 0;
        loop {
            let fine_nodes = nodes_at(2 * order);
            let fine_amp = amplitudes(&fine_nodes, grid);
            let fine = fine_amp.a.transpose() * &fine_amp.a;
            let change = (&gram - &fine).amax();
            if change <= opts.quadrature.tolerance {
                break;
            }
            if attempt == refinements || !change.is_finite() {
                return Err(Error::QuadratureNonconvergence(format!(
                    "doubling the pupil order from {order} changed an entry by {:e}",
                    change.as_f64()
                )));
            }
            attempt += 1;
            order *= 2;
            nodes = fine_nodes;
            amp = fine_amp;
            gram = fine;
        }
    }
    if !opts.tail_closure {
        return Ok((gram, 0, order));
    }
    let b = tail_factor(&nodes, &amp);
    let r = b.ncols();
    let d = gram.nrows();
    let mut t = DMatrix::zeros(d + r, d + r);
    t.view_mut((0, 0), (d, d)).copy_from(&gram);
    if r > 0 {
        let cross = amp.a.transpose() * &b;
        t.view_mut((0, d), (d, r)).copy_from(&cross);
        t.view_mut((d, 0), (r, d)).copy_from(&cross.transpose());
        t.view_mut((d, d), (r, r)).copy_from(&(b.transpose() * &b));
    }
    Ok((t, r, order))
}

/// One-axis matrix for a slit of half-width `half` (mode units), with labels.
fn slit_axis<T: Real>(half: T, order: usize, grid: &ModeGrid<T>, opts: &TransferOptions<T>) -> Result<(DMatrix<T>, Vec<Option<i64>>, usize)> {
    let (m, r, used) = assemble(|o| interval_nodes(half, o), order, grid, opts)?;
    let labels = grid.axis().map(Some).chain(std::iter::repeat_n(None, r)).collect();
    Ok((m, labels, used))
}

fn kron<T: Real>(a: &DMatrix<T>, b: &DMatrix<T>) -> DMatrix<T> {
    a.kronecker(b)
}

/// Assembles the transfer matrix of `setup` seen through `pupil` on `grid`.
///
/// Errors if the grid is too coarse for the pupil, the quadrature order is
/// below the configured minimum or fails the doubling check, or the result
/// is not passive.
pub fn build_transfer_matrix<T: Real>(
    setup: &OpticalSetup<T>,
    pupil: &Pupil<T>,
    grid: &ModeGrid<T>,
    opts: &TransferOptions<T>,
) -> Result<TransferMatrix<T>> {
    setup.validate()?;
    pupil.validate()?;
    let scale = setup.object_size / (setup.wavelength * setup.object_distance);
    let scaled = pupil.scaled(scale);
    let rho = scaled.half_extent();
    grid.check_adequate(rho)?;
    let order = opts.quadrature.resolve(rho)?;

    let d = grid.modes();
    let grid_labels = || (0..d).map(|k| Some(grid.index(k))).collect::<Vec<_>>();
    let (real, labels, tail, order) = if pupil.is_closed() {
        (DMatrix::zeros(d, d), grid_labels(), 0, order)
    } else {
        match (grid.dimension, scaled) {
            (Dimension::One, Pupil::Slit1D { half_width }) => {
                let (m, labels, used) = slit_axis(half_width, order, grid, opts)?;
                let labels = labels.into_iter().map(|l| l.map(|n| [n, 0])).collect();
                let tail = m.nrows() - d;
                (m, labels, tail, used)
            }
            (Dimension::Two, Pupil::Circular { radius }) => {
                let (m, r, used) = assemble(|o| disc_nodes(radius, o), order, grid, opts)?;
                let mut labels = grid_labels();
                labels.extend(std::iter::repeat_n(None, r));
                (m, labels, r, used)
            }
            (Dimension::Two, Pupil::Rectangular { half_x, half_y }) => {
                let (mx, lx, ux) = slit_axis(half_x, order, grid, opts)?;
                let (my, ly, uy) = slit_axis(half_y, order, grid, opts)?;
                let labels = pair_labels(&lx, &ly);
                let m = kron(&mx, &my);
                let tail = m.nrows() - d;
                (m, labels, tail, ux.max(uy))
            }
            (Dimension::Two, Pupil::Slit1D { half_width }) => {
                let (mx, lx, used) = slit_axis(half_width, order, grid, opts)?;
                let ly: Vec<Option<i64>> = grid.axis().map(Some).collect();
                let labels = pair_labels(&lx, &ly);
                let m = kron(&mx, &DMatrix::identity(grid.per_axis(), grid.per_axis()));
                let tail = m.nrows() - d;
                (m, labels, tail, used)
            }
            (dim, p) => return Err(Error::UnsupportedPupil { pupil: p.name(), dimension: dim.as_usize() }),
        }
    };
    if real.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("non-finite transfer matrix entry".into()));
    }
    let mut t = TransferMatrix {
        entries: real.map(|v| Complex::new(v, T::zero())),
        grid: *grid,
        setup: Some(*setup),
        labels,
        tail_modes: tail,
        order,
        singular: None,
    };
    let s = singular_values_raw(&t)?;
    let top = s.first().copied().unwrap_or(T::zero());
    let top_eta = if grid.dimension == Dimension::Two { top * top } else { top };
    if top_eta > T::one() + T::lit(super::spectrum::PASSIVITY_TOLERANCE) {
        return Err(Error::PassivityViolation {
            value: top_eta.as_f64(),
            tolerance: super::spectrum::PASSIVITY_TOLERANCE,
        });
    }
    t.singular = Some(s);
    Ok(t)
}

fn pair_labels(lx: &[Option<i64>], ly: &[Option<i64>]) -> Vec<Option<[i64; 2]>> {
    lx.iter()
        .flat_map(|a| ly.iter().map(move |b| Some([(*a)?, (*b)?])))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rel_diff;

    fn one_d(ratio: f64) -> (OpticalSetup<f64>, Pupil<f64>, ModeGrid<f64>) {
        let s = OpticalSetup::with_ratio(ratio).unwrap();
        let p = Pupil::matched_slit(&s);
        let g = ModeGrid::adequate(Dimension::One, ratio).unwrap();
        (s, p, g)
    }

    #[test]
    fn far_field_1d_entry() {
        let (s, p, g) = one_d(0.01);
        let t = build_transfer_matrix(&s, &p, &g, &TransferOptions::default()).unwrap();
        let t00 = t.entry([0, 0], [0, 0]).unwrap().norm();
        assert!(rel_diff(t00, 0.02) < 0.02, "T00 = {t00}");
        for k in 0..t.dim() {
            for l in 0..t.dim() {
                if (k, l) != (t.position([0, 0]).unwrap(), t.position([0, 0]).unwrap()) {
                    assert!(t.entries()[(k, l)].norm() * 100.0 < t00);
                }
            }
        }
        assert!(t.entries().iter().all(|z| z.im == 0.0));
    }

    #[test]
    fn closed_pupil_gives_zero_matrix() {
        let s = OpticalSetup::with_ratio(1.0).unwrap();
        let g = ModeGrid::adequate(Dimension::Two, 1.0).unwrap();
        let t = build_transfer_matrix(&s, &Pupil::Circular { radius: 0.0 }, &g, &TransferOptions::default()).unwrap();
        assert_eq!(t.dim(), g.modes());
        assert!(t.entries().iter().all(|z| z.norm() == 0.0));
        assert!(singular_values(&t).unwrap().values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn near_field_plateau_1d() {
        let (s, p, g) = one_d(10.0);
        let t = build_transfer_matrix(&s, &p, &g, &TransferOptions::default()).unwrap();
        let spec = singular_values(&t).unwrap();
        let count = spec.plateau_count(0.5);
        assert!((18..=22).contains(&count), "plateau {count}");
        assert!(spec.max() <= 1.0);
        assert!(spec.values()[5] > 0.999);
    }

    #[test]
    fn grid_convergence_with_tail_modes() {
        for ratio in [0.1, 1.0, 10.0] {
            let (s, p, g) = one_d(ratio);
            let bigger = ModeGrid::new(Dimension::One, (g.n_max * 3).div_ceil(2)).unwrap();
            let opts = TransferOptions::default();
            let a = singular_values(&build_transfer_matrix(&s, &p, &g, &opts).unwrap()).unwrap();
            let b = singular_values(&build_transfer_matrix(&s, &p, &bigger, &opts).unwrap()).unwrap();
            for (x, y) in a.values().iter().zip(b.values()).take_while(|(x, _)| **x > 1e-6) {
                assert!(rel_diff(*x, *y) < 1e-4, "ratio {ratio}: {x} vs {y}");
            }
        }
    }

    #[test]
    fn truncated_grid_without_closure_is_slow_to_converge() {
        let (s, p, g) = one_d(1.0);
        let opts = TransferOptions { tail_closure: false, ..Default::default() };
        let bigger = ModeGrid::new(Dimension::One, 3).unwrap();
        let a = singular_values(&build_transfer_matrix(&s, &p, &g, &opts).unwrap()).unwrap();
        let b = singular_values(&build_transfer_matrix(&s, &p, &bigger, &opts).unwrap()).unwrap();
        assert!(rel_diff(a.values()[1], b.values()[1]) > 1e-4);
    }

    #[test]
    fn parity_symmetry() {
        let (s, p, g) = one_d(3.0);
        let opts = TransferOptions { tail_closure: false, ..Default::default() };
        let t = build_transfer_matrix(&s, &p, &g, &opts).unwrap();
        let d = g.modes();
        let m = t.entries();
        for i in 0..d {
            for j in 0..d {
                let flipped = m[(g.mirror(i), g.mirror(j))];
                assert!((m[(i, j)] - flipped).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn far_field_2d_circular() {
        let ratio = 0.05f64;
        let s = OpticalSetup::with_ratio(ratio).unwrap();
        let g = ModeGrid::adequate(Dimension::Two, ratio).unwrap();
        let t = build_transfer_matrix(&s, &Pupil::matched_circular(&s), &g, &TransferOptions::default()).unwrap();
        let eta = singular_values(&t).unwrap().max();
        let expect = std::f64::consts::PI.powi(2) * ratio.powi(4);
        assert!(rel_diff(eta, expect) < 0.05, "{eta} vs {expect}");
    }

    #[test]
    fn separable_pupils_2d() {
        let s = OpticalSetup::with_ratio(0.5).unwrap();
        let g = ModeGrid::adequate(Dimension::Two, 0.5).unwrap();
        let opts = TransferOptions::default();
        let r = s.pupil_radius;
        let rect = build_transfer_matrix(&s, &Pupil::Rectangular { half_x: r, half_y: r }, &g, &opts).unwrap();
        let one = build_transfer_matrix(&s, &Pupil::matched_slit(&s), &ModeGrid::new(Dimension::One, g.n_max).unwrap(), &opts)
            .unwrap();
        let s1: f64 = singular_values(&one).unwrap().max();
        let s2 = singular_values(&rect).unwrap().max();
        assert!(rel_diff(s2, s1.powi(4)) < 1e-10);
        assert_eq!(rect.mode_index(0), Some([-1, -1]));
        let slit = build_transfer_matrix(&s, &Pupil::matched_slit(&s), &g, &opts).unwrap();
        assert!(rel_diff(singular_values(&slit).unwrap().max(), s1 * s1) < 1e-10);
    }

    #[test]
    fn unsupported_and_bad_inputs() {
        let s = OpticalSetup::with_ratio(1.0).unwrap();
        let g1 = ModeGrid::adequate(Dimension::One, 1.0).unwrap();
        let opts = TransferOptions::default();
        assert!(matches!(
            build_transfer_matrix(&s, &Pupil::matched_circular(&s), &g1, &opts),
            Err(Error::UnsupportedPupil { .. })
        ));
        let small = ModeGrid::new(Dimension::One, 1).unwrap();
        assert!(matches!(
            build_transfer_matrix(&s, &Pupil::matched_slit(&s), &small, &opts),
            Err(Error::GridTooSmall { .. })
        ));
        let low = TransferOptions { quadrature: QuadratureSpec { order: Some(8), ..Default::default() }, ..opts };
        assert!(matches!(
            build_transfer_matrix(&s, &Pupil::matched_slit(&s), &g1, &low),
            Err(Error::QuadratureOrder { .. })
        ));
        let strict = TransferOptions {
            quadrature: QuadratureSpec { order: Some(16), tolerance: 1e-30, ..Default::default() },
            ..opts
        };
        assert!(matches!(
            build_transfer_matrix(&s, &Pupil::matched_slit(&s), &g1, &strict),
            Err(Error::QuadratureNonconvergence(_))
        ));
    }

    #[test]
    fn wrapped_matrices() {
        let g = ModeGrid::<f64>::new(Dimension::One, 2).unwrap();
        let id = TransferMatrix::from_entries(DMatrix::identity(5, 5), g).unwrap();
        assert!(singular_values(&id).unwrap().values().iter().all(|&v| v == 1.0));
        let zero = TransferMatrix::from_entries(DMatrix::zeros(5, 5), g).unwrap();
        assert!(singular_values(&zero).unwrap().values().iter().all(|&v| v == 0.0));
        // a non-Hermitian complex unitary goes through the general SVD
        let phase = DMatrix::from_fn(5, 5, |i, j| {
            if (i + 1) % 5 == j {
                Complex::new(0.0, 1.0)
            } else {
                Complex::new(0.0, 0.0)
            }
        });
        let spec = singular_values(&TransferMatrix::from_entries(phase, g).unwrap()).unwrap();
        assert!(spec.values().iter().all(|&v| (v - 1.0).abs() < 1e-12));
        let gain = DMatrix::identity(5, 5) * Complex::new(1.1, 0.0);
        assert!(matches!(
            singular_values(&TransferMatrix::from_entries(gain, g).unwrap()),
            Err(Error::PassivityViolation { .. })
        ));
    }

    #[test]
    fn single_precision_build() {
        let s = OpticalSetup::<f32>::with_ratio(0.1).unwrap();
        let g = ModeGrid::adequate(Dimension::One, 0.1).unwrap();
        let opts = TransferOptions { quadrature: QuadratureSpec { tolerance: 1e-5, ..Default::default() }, ..Default::default() };
        let t = build_transfer_matrix(&s, &Pupil::matched_slit(&s), &g, &opts).unwrap();
        let eta = singular_values(&t).unwrap().max();
        assert!((eta - 0.2).abs() < 0.01, "{eta}");
    }
}
