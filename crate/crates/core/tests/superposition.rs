use approx::assert_relative_eq;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use std::f64::consts::{FRAC_1_SQRT_2, PI};
use subquantum::exec::Exec;
use subquantum::superposition::*;

fn random_path<R: Rng>(rng: &mut R) -> PathWave {
    let v = |rng: &mut R| Vec3(std::array::from_fn(|_| rng.random_range(-3.0..3.0)));
    PathWave::new(
        rng.random_range(0.1..3.0),
        rng.random_range(-5.0..5.0),
        v(rng),
        v(rng),
        rng.random_range(0.5..2.0),
    )
    .unwrap()
}

#[test]
fn path_fields_are_consistent() {
    let p = PathWave::new(
        2.0,
        0.3,
        Vec3::new(1.0, 2.0, 0.0),
        Vec3::new(0.0, 4.0, -2.0),
        0.5,
    )
    .unwrap();
    assert_eq!(p.k(), Vec3::new(2.0, 4.0, 0.0));
    assert_eq!(p.k_u(), Vec3::new(0.0, -2.0, 1.0));
    assert!(PathWave::new(0.0, 0.0, Vec3::ZERO, Vec3::ZERO, 1.0).is_err());
    assert!(PathWave::new(1.0, 0.0, Vec3::new(f64::NAN, 0.0, 0.0), Vec3::ZERO, 1.0).is_err());
}

#[test]
fn complex_momentum_limits() {
    let plane =
        PathWave::from_wave_vectors(1.0, 0.0, Vec3::new(2.0, 0.0, 0.0), Vec3::ZERO, 1.5).unwrap();
    let m = plane.complex_momentum();
    assert_eq!(m.re, Vec3::new(3.0, 0.0, 0.0));
    assert_eq!(m.im, Vec3::ZERO);
    let diffusive =
        PathWave::from_wave_vectors(1.0, 0.0, Vec3::ZERO, Vec3::new(0.0, 1.0, 0.0), 1.0).unwrap();
    assert_eq!(diffusive.complex_momentum().re, Vec3::ZERO);
}

#[test]
fn coefficients() {
    let mut rng = rand::rngs::StdRng::seed_from_u64(1);
    let p = random_path(&mut rng);
    let c = coefficient(&p, p.k_tot_sqr()).unwrap();
    assert_relative_eq!(c.norm_sqr(), 1.0, max_relative = 1e-14);
    assert_relative_eq!(
        p.log_derivative().norm_sqr(),
        p.k_tot_sqr(),
        max_relative = 1e-14
    );
    let k = Vec3::new(0.0, 0.0, 1.5);
    let a = PathWave::from_wave_vectors(1.0, 0.0, k, Vec3::ZERO, 1.0).unwrap();
    let b = PathWave::from_wave_vectors(1.0, 1.0, k, Vec3::ZERO, 1.0).unwrap();
    let n = 2.0 * 1.5 * 1.5;
    assert_relative_eq!(
        coefficient(&a, n).unwrap().norm_sqr(),
        0.5,
        max_relative = 1e-15
    );
    assert_relative_eq!(
        coefficient(&b, n).unwrap().norm_sqr(),
        0.5,
        max_relative = 1e-15
    );
    assert!(coefficient(&a, 0.0).is_err());
}

#[test]
fn born_normalization_for_random_sets() {
    let mut rng = rand::rngs::StdRng::seed_from_u64(7);
    for n in [1usize, 3, 4, 5, 8] {
        let paths: Vec<PathWave> = (0..n).map(|_| random_path(&mut rng)).collect();
        let setup = SuperpositionSetup::new(paths, Sign::Plus).unwrap();
        assert!((setup.born_total() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn two_path_setup_requires_equal_wave_numbers() {
    let a =
        PathWave::from_wave_vectors(1.0, 0.0, Vec3::new(1.0, 0.0, 0.0), Vec3::ZERO, 1.0).unwrap();
    let b =
        PathWave::from_wave_vectors(1.0, 0.0, Vec3::new(2.0, 0.0, 0.0), Vec3::ZERO, 1.0).unwrap();
    assert!(SuperpositionSetup::new(vec![a, b], Sign::Plus).is_err());
    let s = SuperpositionSetup::two_path(1.0, 0.5, 0.25, Sign::Minus).unwrap();
    assert_relative_eq!(s.relative_phase().unwrap(), 0.25, max_relative = 1e-15);
    assert_relative_eq!(s.born_total(), 1.0, max_relative = 1e-15);
}

#[test]
fn two_path_intensity_values() {
    let r = FRAC_1_SQRT_2;
    assert!((two_path_intensity(r, r, 0.0, Sign::Plus).unwrap() * 0.5 - 1.0).abs() < 1e-15);
    assert!(two_path_intensity(r, r, PI, Sign::Plus).unwrap().abs() < 1e-15);
    assert_eq!(
        two_path_intensity(0.7, 0.0, 1.3, Sign::Plus).unwrap(),
        0.7 * 0.7
    );
    assert!(two_path_intensity(-1.0, 0.5, 0.0, Sign::Plus).is_err());
}

#[test]
fn double_slit_values() {
    assert!((double_slit(0.0) - 1.0).abs() < 1e-15);
    assert!(double_slit(PI).abs() < 1e-15);
    assert!((double_slit(PI / 2.0) - 0.5).abs() < 1e-15);
}

#[test]
fn two_particle_values() {
    let r = Vec3::new(1.0, 0.0, 0.0);
    let k2 = Vec3::new(0.3, 0.1, 0.0);
    let at = |phase: f64| two_particle_intensity(r, k2 + Vec3::new(phase, 0.0, 0.0), k2);
    assert!((at(0.0) - 1.0).abs() < 1e-15);
    assert!(at(PI / 2.0).abs() < 1e-15);
    assert!((at(PI / 4.0) - 0.5).abs() < 1e-15);
}

#[test]
fn product_rule_special_cases() {
    let mut rng = rand::rngs::StdRng::seed_from_u64(3);
    let p = random_path(&mut rng);
    let unit = PathWave::new(1.0, 0.0, Vec3::ZERO, Vec3::ZERO, p.hbar()).unwrap();
    let (lhs, rhs) = product_rule_check(&p, &unit);
    assert_relative_eq!(lhs, p.k_tot_sqr(), max_relative = 1e-12);
    assert_relative_eq!(rhs, p.k_tot_sqr(), max_relative = 1e-12);
    let k = Vec3::new(0.5, -1.0, 2.0);
    let ku = Vec3::new(0.2, 0.0, 0.1);
    let p1 = PathWave::from_wave_vectors(1.0, 0.3, k, ku, 1.0).unwrap();
    let p2 = PathWave::from_wave_vectors(0.5, -0.2, -k, ku, 1.0).unwrap();
    let (lhs, rhs) = product_rule_check(&p1, &p2);
    assert_relative_eq!(rhs, (ku * 2.0).norm_sqr(), max_relative = 1e-14);
    assert_relative_eq!(lhs, rhs, max_relative = 1e-12);
}

#[test]
fn single_path_reduction_is_exact() {
    let cfg = ReductionConfig::new(10_000, 0.0, 5);
    let r = ktot_reduction_check(&cfg, &Exec::default()).unwrap();
    assert!((r.mean_full - 2.0).abs() < 1e-12);
    assert!(r.stderr < 1e-12);
    assert_eq!(r.rejected, 0);
}

#[test]
fn reduction_holds_for_isotropic_and_fails_for_aligned() {
    let exec = Exec::default();
    let mut cfg = ReductionConfig::new(50_000, 1.0, 11);
    cfg.magnitudes = MagnitudeLaw::Uniform { spread: 0.5 };
    let r = ktot_reduction_check(&cfg, &exec).unwrap();
    assert!(r.within(3.0), "{r:?}");
    cfg.correlation = GradientCorrelation::Aligned;
    let r = ktot_reduction_check(&cfg, &exec).unwrap();
    assert!(!r.within(3.0), "{r:?}");
    assert!(ktot_reduction_check(&ReductionConfig::new(100, 1.0, 0), &exec).is_err());
}

proptest! {
    #[test]
    fn complex_modulus_identity(seed in any::<u64>()) {
        let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
        let p = random_path(&mut rng);
        let m = p.complex_momentum();
        let expected = p.hbar() * p.hbar() * p.k_tot_sqr();
        prop_assert!((m.norm_sqr() - expected).abs() <= 1e-12 * expected.max(1.0));
    }

    #[test]
    fn product_rule_identity(seed in any::<u64>()) {
        let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
        let (p1, mut p2) = (random_path(&mut rng), random_path(&mut rng));
        p2 = PathWave::new(p2.amplitude(), p2.action(), p2.s_grad(), p2.r_grad(), p1.hbar()).unwrap();
        let (lhs, rhs) = product_rule_check(&p1, &p2);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1.0));
    }

    #[test]
    fn intensities_are_bounded(phase in -20.0f64..20.0, r in any::<[f64; 3]>(), k in -5.0f64..5.0) {
        let d = double_slit(phase);
        prop_assert!((-1e-16..=1.0 + 1e-15).contains(&d));
        let r = Vec3(r.map(|c| if c.is_finite() { c % 10.0 } else { 0.0 }));
        let p = two_particle_intensity(r, Vec3::new(k, 0.0, 0.0), Vec3::ZERO);
        prop_assert!((-1e-16..=1.0 + 1e-15).contains(&p));
    }

    #[test]
    fn sign_flip_is_half_turn(ra in 0.0f64..3.0, rb in 0.0f64..3.0, phase in -10.0f64..10.0) {
        let minus = two_path_intensity(ra, rb, phase, Sign::Minus).unwrap();
        let plus = two_path_intensity(ra, rb, phase + PI, Sign::Plus).unwrap();
        prop_assert!((minus - plus).abs() <= 1e-12 * (ra * ra + rb * rb).max(1.0));
    }
}
