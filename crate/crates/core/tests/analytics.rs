use approx::assert_relative_eq;
use proptest::prelude::*;
use subquantum::analytics::*;
use subquantum::error::Error;
use subquantum::numerics::{gaussian, UniformGrid};

fn natural() -> PacketSpec {
    PacketSpec::default()
}

fn narrow() -> PacketSpec {
    PacketSpec::new(1.0, 1.0, 0.5).unwrap()
}

#[test]
fn derived_scales() {
    let s = natural().scales();
    assert_eq!(
        (s.diffusion, s.u0, s.omega, s.diffusion_length),
        (0.5, 0.5, 0.25, 2.0)
    );
    let s = narrow().scales();
    assert_eq!(
        (s.diffusion, s.u0, s.omega, s.diffusion_length),
        (0.5, 1.0, 1.0, 1.0)
    );
    let s = PacketSpec::new(2.0, 4.0, 1.0).unwrap().scales();
    assert_eq!(
        (s.diffusion, s.u0, s.omega, s.diffusion_length),
        (0.25, 0.25, 0.125, 2.0)
    );
}

#[test]
fn invalid_specs_rejected() {
    assert!(PacketSpec::new(0.0, 1.0, 1.0).is_err());
    assert!(PacketSpec::new(1.0, -1.0, 1.0).is_err());
    assert!(PacketSpec::new(1.0, 1.0, f64::NAN).is_err());
    assert!(natural().with_drift(f64::INFINITY).validate().is_err());
}

#[test]
fn variance_values() {
    assert_eq!(natural().variance(0.0).unwrap(), 1.0);
    assert_relative_eq!(natural().variance(2.0).unwrap(), 2.0, max_relative = 1e-15);
    assert_relative_eq!(narrow().variance(2.0).unwrap(), 4.25, max_relative = 1e-15);
    assert_eq!(natural().variance(-0.1), Err(Error::NegativeTime(-0.1)));
}

#[test]
fn diffusivity_schedule_values() {
    assert_eq!(natural().diffusivity(0.0).unwrap(), 0.0);
    assert_eq!(natural().diffusivity(1.0).unwrap(), 0.25);
    assert_eq!(narrow().diffusivity(4.0).unwrap(), 4.0);
    assert!(natural().diffusivity(-1.0).is_err());
}

#[test]
fn time_averaged_diffusivity_values() {
    let spec = natural();
    assert_eq!(spec.time_averaged_diffusivity(1.0).unwrap(), 0.125);
    let t = 2.0;
    let brownian = 1.0 + 2.0 * spec.time_averaged_diffusivity(t).unwrap() * t;
    assert_relative_eq!(brownian, spec.variance(t).unwrap(), max_relative = 1e-15);
    assert_eq!(
        spec.time_averaged_diffusivity(0.0),
        Err(Error::NonPositiveTime(0.0))
    );
}

#[test]
fn time_averaged_diffusivity_matches_quadrature() {
    let spec = narrow();
    let t = 2.0;
    let integral =
        subquantum::numerics::trapezoid_fn(|s| spec.diffusivity(s).unwrap(), 0.0, t, 1000);
    assert_relative_eq!(
        spec.time_averaged_diffusivity(t).unwrap(),
        integral / t,
        max_relative = 1e-12
    );
}

#[test]
fn trajectory_values() {
    let spec = natural().with_drift(1.0);
    assert_eq!(spec.trajectory(0.0, 3.0).unwrap(), 3.0);
    assert_relative_eq!(
        spec.trajectory(1.0, 2.0).unwrap(),
        2.0 + 2f64.sqrt(),
        max_relative = 1e-15
    );
    assert_relative_eq!(
        natural().trajectory(-1.0, 2.0).unwrap(),
        -(2f64.sqrt()),
        max_relative = 1e-15
    );
    assert!(spec.trajectory(1.0, -2.0).is_err());
}

#[test]
fn velocity_field_values() {
    let spec = natural().with_drift(1.0);
    assert_eq!(spec.velocity_field(5.0, 0.0).unwrap(), 1.0);
    assert_eq!(spec.velocity_field(2.0, 2.0).unwrap(), 1.0);
    let expected = 1.0 + 2f64.sqrt() / 4.0;
    let x = 2.0 + 2f64.sqrt();
    assert_relative_eq!(
        spec.velocity_field(x, 2.0).unwrap(),
        expected,
        max_relative = 1e-14
    );
    let h = 1e-5;
    let fd = (spec.trajectory(1.0, 2.0 + h).unwrap() - spec.trajectory(1.0, 2.0 - h).unwrap())
        / (2.0 * h);
    assert!((fd - expected).abs() < 1e-6);
}

#[test]
fn uncertainty_product_values() {
    assert_eq!(natural().uncertainty_product(0.0).unwrap(), 0.5);
    let spec = PacketSpec::new(1.0, 1.0, 0.2).unwrap();
    assert_relative_eq!(
        spec.uncertainty_product(7.3).unwrap(),
        0.5,
        max_relative = 1e-15
    );
    let spec = PacketSpec::new(2.0, 1.0, 1.0).unwrap();
    assert_relative_eq!(
        spec.uncertainty_product(1.0).unwrap(),
        1.0,
        max_relative = 1e-15
    );
}

#[test]
fn avg_quantum_potential_values() {
    let spec = natural();
    assert_eq!(spec.avg_quantum_potential(), 0.125);
    assert_eq!(
        spec.avg_quantum_potential(),
        0.5 * spec.hbar * spec.scales().omega
    );
    let wide = PacketSpec::new(1.0, 1.0, 2.0).unwrap();
    let numeric = quantum_potential_quadrature(&wide, 1 << 17).unwrap();
    assert!(
        (numeric - wide.avg_quantum_potential()).abs() < 1e-8,
        "{numeric}"
    );
}

#[test]
fn fisher_gaussians() {
    for sigma in [1.0, 2.0] {
        let grid = UniformGrid::centered(0.0, 10.0 * sigma, 4096).unwrap();
        let p = grid.sample(|x| gaussian(x, 0.0, sigma));
        let (lhs, rhs) = fisher_identity(&p, grid.step).unwrap();
        let expected = 1.0 / (sigma * sigma);
        assert!((lhs - expected).abs() < 1e-6 * expected, "{lhs}");
        assert!((rhs - expected).abs() < 1e-6 * expected, "{rhs}");
    }
}

#[test]
fn fisher_uniform_and_zeros() {
    let (lhs, rhs) = fisher_identity(&[0.1; 100], 0.1).unwrap();
    assert_eq!((lhs, rhs), (0.0, 0.0));
    let mut p = vec![0.1; 10];
    p[4] = 0.0;
    assert_eq!(
        fisher_identity(&p, 0.1),
        Err(Error::NonPositiveLog {
            index: 4,
            value: 0.0
        })
    );
}

#[test]
fn zitterbewegung_values() {
    let w = zitterbewegung_frequency(9.109e-31, 2.998e8, 1.0546e-34).unwrap();
    assert!((w / 7.76e20 - 1.0).abs() < 5e-3, "{w}");
    assert_eq!(zitterbewegung_frequency(1.0, 1.0, 1.0).unwrap(), 1.0);
    assert_eq!(
        zitterbewegung_frequency(2.0, 3.0, 0.5).unwrap(),
        2.0 * zitterbewegung_frequency(1.0, 3.0, 0.5).unwrap()
    );
    assert!(zitterbewegung_frequency(0.0, 1.0, 1.0).is_err());
}

fn spec_strategy() -> impl Strategy<Value = PacketSpec> {
    (
        0.1f64..5.0,
        0.1f64..5.0,
        0.05f64..5.0,
        -3.0f64..3.0,
        -3.0f64..3.0,
    )
        .prop_map(|(hbar, mass, sigma0, v, x0)| {
            PacketSpec::new(hbar, mass, sigma0)
                .unwrap()
                .with_drift(v)
                .with_center(x0)
        })
}

proptest! {
    #[test]
    fn brownian_form_equals_variance_law(spec in spec_strategy(), t in 1e-3f64..20.0) {
        let brownian = spec.sigma0.powi(2) + 2.0 * spec.time_averaged_diffusivity(t).unwrap() * t;
        let direct = spec.variance(t).unwrap();
        prop_assert!((brownian - direct).abs() <= 1e-12 * direct);
    }

    #[test]
    fn uncertainty_is_half_hbar(spec in spec_strategy(), t in 0.0f64..50.0) {
        let p = spec.uncertainty_product(t).unwrap();
        prop_assert!((p - 0.5 * spec.hbar).abs() <= 1e-14 * spec.hbar);
    }

    #[test]
    fn trajectory_ratio_is_time_invariant(spec in spec_strategy(), x in -4.0f64..4.0, t in 0.0f64..20.0) {
        let ratio = (spec.trajectory(x, t).unwrap() - spec.x0 - spec.v * t) / spec.sigma(t).unwrap();
        prop_assert!((ratio - x / spec.sigma0).abs() <= 1e-12 * (1.0 + (x / spec.sigma0).abs()));
        let alt = spec.trajectory_via_omega(x, t).unwrap();
        prop_assert!((alt - spec.trajectory(x, t).unwrap()).abs() <= 1e-12 * (1.0 + alt.abs()));
    }

    #[test]
    fn quantum_potential_is_half_hbar_omega(spec in spec_strategy()) {
        let s = spec.scales();
        let half = 0.5 * spec.hbar * s.omega;
        prop_assert!((spec.avg_quantum_potential() - half).abs() <= 1e-14 * half);
        let kinetic = 0.5 * spec.mass * s.u0 * s.u0;
        prop_assert!((kinetic - half).abs() <= 1e-14 * half);
    }

    #[test]
    fn fluctuation_energy_is_conserved(spec in spec_strategy(), t in 0.0f64..30.0) {
        let e0 = spec.energy_split(0.0).unwrap();
        let et = spec.energy_split(t).unwrap();
        prop_assert_eq!(e0.exchanged, 0.0);
        prop_assert!(et.exchanged >= 0.0);
        prop_assert!((et.total() - e0.total()).abs() <= 4.0 * f64::EPSILON * e0.total());
    }
}
