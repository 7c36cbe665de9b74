use diffraction_channel::scenarios::{compare, Gain, ScenarioParams};
use diffraction_channel::{Regime, Setup, Thresholds};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn log_uniform(rng: &mut StdRng, lo: f64, hi: f64) -> f64 {
    (rng.random_range(lo.ln()..hi.ln())).exp()
}

fn random_setup(rng: &mut StdRng) -> Setup {
    let lambda = log_uniform(rng, 4e-7, 1.6e-6);
    let d_o = log_uniform(rng, 0.1, 10.0);
    let m = log_uniform(rng, 0.2, 5.0);
    let r = log_uniform(rng, 1e-4, 1e-1);
    let l = log_uniform(rng, 1e-7, 1e-2);
    Setup::from_magnification(lambda, d_o, m, r, l).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn ratio_identities_on_random_setups() {
    let mut rng = StdRng::seed_from_u64(11);
    for _ in 0..500 {
        let s = random_setup(&mut rng);
        let p = ScenarioParams::new(&s, Thresholds::default()).unwrap();
        assert!(rel(p.r1_value(), p.eta_a / p.eta_b) < 1e-12);
        assert!(rel(p.r2_value(), p.nu_a / p.nu_b) < 1e-12);
        let b = p.pinhole_bounds();
        if let Gain::Value(eta_c) = b.eta_c {
            assert!(rel(eta_c, p.eta_a) < 1e-12);
        }
        if let Gain::Value(nu_c) = b.nu_c {
            assert!(rel(nu_c, p.nu_a) < 1e-12);
        }
        match p.flags.regime_a {
            Regime::FarField => assert!(b.eta_c.is_valid() && !p.r2().is_valid()),
            Regime::NearField => assert!(b.nu_c.is_valid() && !p.r1().is_valid()),
            Regime::Intermediate => assert!(!b.eta_c.is_valid() && !b.nu_c.is_valid()),
        }
    }
}

#[test]
fn far_field_lens_with_gain_implies_far_field_propagation() {
    let mut rng = StdRng::seed_from_u64(12);
    let mut premises = 0;
    let mut n = 0;
    while n < 1000 {
        let s = random_setup(&mut rng);
        let p = ScenarioParams::new(&s, Thresholds::default()).unwrap();
        n += 1;
        if p.flags.regime_a == Regime::FarField && p.r1_value() > 1.0 {
            premises += 1;
            assert_eq!(p.flags.regime_b, Regime::FarField, "{s:?}");
            assert!(p.flags.ratio_b < std::f64::consts::PI.sqrt() * p.flags.ratio_a.powi(2));
        }
    }
    assert!(premises > 100, "only {premises} setups exercised the premise");
}

#[test]
fn thermal_g1_tends_to_r1() {
    let s = Setup::from_magnification(5e-7, 1.0, 1.0, 1e-2, 1e-6).unwrap();
    let nth = 1.0;
    let r = compare(&s, 1e-10 * nth, nth, Thresholds::default()).unwrap();
    let r1 = r.r1.value().unwrap();
    assert!(r.thermal);
    assert!(rel(r.g1.value().unwrap(), r1) < 1e-3);
}

#[test]
fn g2_tends_to_r2() {
    let s = Setup::from_magnification(5e-7, 1.0, 1.0, 5.5e-3, 1e-2).unwrap();
    let p = ScenarioParams::new(&s, Thresholds::default()).unwrap();
    assert!(rel(p.r2_value(), 1.21) < 1e-12);
    let g2 = p.gain_g2(1e9 * p.nu_a).value().unwrap();
    assert!(rel(g2, p.r2_value()) < 1e-2, "{g2}");
}

#[test]
fn g3_tends_to_nu_a() {
    let (lambda, d_o) = (5e-7, 1.0);
    // ratio_a = 10 and ratio_a·ratio_b = 1/π so that η_b·ν_a = 1
    let l = (2.0 * lambda * d_o / (10.0 * std::f64::consts::PI)).sqrt();
    let r = 10.0 * lambda * d_o / l;
    let s = Setup::from_magnification(lambda, d_o, 1.0, r, l).unwrap();
    let p = ScenarioParams::new(&s, Thresholds::default()).unwrap();
    assert_eq!((p.flags.regime_a, p.flags.regime_b), (Regime::NearField, Regime::FarField));
    let g3 = p.gain_g3(1e9 * p.nu_a, 0.0).value().unwrap();
    assert!(rel(g3, p.nu_a) < 0.05, "{g3} vs {}", p.nu_a);
}

#[test]
fn gains_are_monotone_in_photon_number() {
    let far = ScenarioParams::new(&Setup::from_magnification(5e-7, 1.0, 1.0, 1e-2, 1e-6).unwrap(), Thresholds::default()).unwrap();
    let near = ScenarioParams::new(&Setup::from_magnification(5e-7, 1.0, 1.0, 5.5e-3, 1e-2).unwrap(), Thresholds::default()).unwrap();
    let ns: Vec<f64> = (0..60).map(|k| 10f64.powf(-6.0 + 0.25 * k as f64)).collect();
    let g1: Vec<f64> = ns.iter().map(|&n| far.gain_g1(n, 0.0).value().unwrap()).collect();
    let g2: Vec<f64> = ns.iter().map(|&n| near.gain_g2(n).value().unwrap()).collect();
    assert!(g1.windows(2).all(|w| w[1] <= w[0]));
    assert!(g2.windows(2).all(|w| w[1] >= w[0]));
    assert!(g1[0] <= far.r1_value() && *g1.last().unwrap() >= 1.0);
    assert!(*g2.last().unwrap() <= near.r2_value());
}

#[test]
fn zero_photons_leave_gains_undefined() {
    let s = Setup::from_magnification(5e-7, 1.0, 1.0, 1e-2, 1e-6).unwrap();
    let r = compare(&s, 0.0, 0.0, Thresholds::default()).unwrap();
    assert_eq!(r.g1, Gain::Undefined);
    assert_eq!(r.g2, Gain::Invalid);
    let json = serde_json::to_value(r).unwrap();
    assert_eq!(json["G1"], "undefined");
    assert_eq!(json["G2"], "invalid");
}
