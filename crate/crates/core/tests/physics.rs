use diffraction_channel::capacity::{capacity_ff_1d, capacity_ff_2d, capacity_nf_1d, capacity_numerical};
use diffraction_channel::transfer::{
    build_transfer_matrix, singular_values, Dimension, ModeGrid, Pupil, QuadratureSpec, TransferOptions, PASSIVITY_TOLERANCE,
};
use diffraction_channel::{PhotonBudget, Setup, Spectrum, Thresholds};
use rand::{Rng, SeedableRng};

fn spectrum(dim: Dimension, ratio: f64, opts: &TransferOptions<f64>) -> Spectrum {
    let setup = Setup::with_ratio(ratio).unwrap();
    let pupil = match dim {
        Dimension::One => Pupil::matched_slit(&setup),
        Dimension::Two => Pupil::matched_circular(&setup),
    };
    let grid = ModeGrid::adequate(dim, ratio).unwrap();
    let t = build_transfer_matrix(&setup, &pupil, &grid, opts).unwrap();
    singular_values(&t).unwrap()
}

#[test]
fn plateau_2d_near_shannon_number() {
    let s = spectrum(Dimension::Two, 3.0, &TransferOptions::default());
    // η is the square of the concentration eigenvalue in 2D
    let count = s.plateau_count(0.25) as f64;
    let shannon = std::f64::consts::PI * 9.0;
    assert!((count - shannon).abs() <= 0.2 * shannon, "{count} modes above 1/4");
    assert!(s.max() <= 1.0 + PASSIVITY_TOLERANCE);
}

#[test]
fn far_field_2d_attenuation() {
    let r: f64 = 0.05;
    let s = spectrum(Dimension::Two, r, &TransferOptions::default());
    let expected = std::f64::consts::PI.powi(2) * r.powi(4);
    assert!((s.max() / expected - 1.0).abs() < 0.05, "{} vs {expected}", s.max());
}

#[test]
fn numerical_capacity_tracks_closed_forms_1d() {
    let budget = PhotonBudget::photons(4.0);
    let thr = Thresholds::default();
    let near = capacity_numerical(&spectrum(Dimension::One, 10.0, &TransferOptions::default()), &budget).unwrap();
    let nf = capacity_nf_1d(&Setup::with_ratio(10.0).unwrap(), 4.0, thr).unwrap();
    assert!((near.capacity / nf.capacity - 1.0).abs() < 0.05, "{} vs {}", near.capacity, nf.capacity);

    let far = capacity_numerical(&spectrum(Dimension::One, 0.1, &TransferOptions::default()), &budget).unwrap();
    let ff = capacity_ff_1d(&Setup::with_ratio(0.1).unwrap(), 4.0, thr).unwrap();
    assert!((far.capacity / ff.capacity - 1.0).abs() < 0.05, "{} vs {}", far.capacity, ff.capacity);
}

#[test]
fn numerical_capacity_tracks_far_field_2d() {
    let budget = PhotonBudget::photons(4.0);
    let s = spectrum(Dimension::Two, 0.1, &TransferOptions::default());
    let num = capacity_numerical(&s, &budget).unwrap();
    let ff = capacity_ff_2d(&Setup::with_ratio(0.1).unwrap(), 4.0, false, Thresholds::default()).unwrap();
    assert!((num.capacity / ff.capacity - 1.0).abs() < 0.05, "{} vs {}", num.capacity, ff.capacity);
}

#[test]
fn quadrature_doubling_leaves_capacity_unchanged() {
    let budget = PhotonBudget::photons(4.0);
    for (dim, ratio) in [(Dimension::One, 0.3), (Dimension::One, 5.0), (Dimension::Two, 1.0)] {
        let rho_order = |k: usize| TransferOptions {
            quadrature: QuadratureSpec { order: Some(k), ..QuadratureSpec::default() },
            ..TransferOptions::default()
        };
        let a = capacity_numerical(&spectrum(dim, ratio, &rho_order(64)), &budget).unwrap().capacity;
        let b = capacity_numerical(&spectrum(dim, ratio, &rho_order(128)), &budget).unwrap().capacity;
        assert!((a - b).abs() < 1e-6, "{dim:?} {ratio}: {a} vs {b}");
    }
}

#[test]
fn random_builds_are_passive() {
    let mut rng = rand::rngs::StdRng::seed_from_u64(7);
    for _ in 0..40 {
        let ratio = 10f64.powf(rng.random_range(-1.5..1.2));
        let setup = Setup::with_ratio(ratio).unwrap();
        let scale: f64 = rng.random_range(0.3..2.0);
        let pupil = Pupil::Slit1D { half_width: scale * setup.pupil_radius };
        let grid = ModeGrid::adequate(Dimension::One, scale * ratio).unwrap();
        let t = build_transfer_matrix(&setup, &pupil, &grid, &TransferOptions::default()).unwrap();
        let s = singular_values(&t).unwrap();
        assert!(s.max() <= 1.0 + PASSIVITY_TOLERANCE);
    }
    for ratio in [0.2, 0.7, 1.5] {
        let setup = Setup::with_ratio(ratio).unwrap();
        for pupil in [
            Pupil::matched_circular(&setup),
            Pupil::Rectangular { half_x: setup.pupil_radius, half_y: 0.5 * setup.pupil_radius },
        ] {
            let grid = ModeGrid::adequate(Dimension::Two, ratio).unwrap();
            let t = build_transfer_matrix(&setup, &pupil, &grid, &TransferOptions::default()).unwrap();
            assert!(singular_values(&t).unwrap().max() <= 1.0 + PASSIVITY_TOLERANCE);
        }
    }
}

#[test]
fn capacity_grows_with_ratio() {
    let budget = PhotonBudget::photons(4.0);
    let mut last = 0.0;
    for k in 0..12 {
        let ratio = 0.1 * 100f64.powf(k as f64 / 11.0);
        let c = capacity_numerical(&spectrum(Dimension::One, ratio, &TransferOptions::default()), &budget).unwrap().capacity;
        assert!(c > last, "ratio {ratio}: {c} after {last}");
        last = c;
    }
}
