use approx::assert_relative_eq;
use subquantum::analytics::{DiffusivitySchedule, PacketSpec};
use subquantum::error::Error;
use subquantum::exec::Exec;
use subquantum::walkers::*;

fn config(n: usize, seed: u64) -> EnsembleConfig {
    EnsembleConfig::new(n, 0.05, 2.0, seed).unwrap()
}

#[test]
fn config_validation() {
    assert!(EnsembleConfig::new(999, 0.1, 1.0, 0).is_err());
    assert!(EnsembleConfig::new(1000, 0.0, 1.0, 0).is_err());
    assert!(EnsembleConfig::new(1000, 0.5, 0.1, 0).is_err());
}

#[test]
fn initial_sample_statistics() {
    let n = 100_000;
    let exec = Exec::default();
    let ens = WalkerEnsemble::sample_initial(PacketSpec::default(), config(n, 1), &exec).unwrap();
    let m = ens.moments(&exec);
    assert!(m.mean.abs() < 4.0 / (n as f64).sqrt());
    assert!((m.variance - 1.0).abs() < 4.0 * (2.0 / n as f64).sqrt());
    assert!(ens.diffusive_displacements().iter().all(|&d| d == 0.0));
    assert_eq!(ens.t(), 0.0);
    let again = WalkerEnsemble::sample_initial(PacketSpec::default(), config(n, 1), &exec).unwrap();
    assert_eq!(ens, again);
}

#[test]
fn frozen_diffusivity_only_translates() {
    let spec = PacketSpec::default().with_drift(2.0);
    let mut cfg = config(1000, 3);
    cfg.schedule = DiffusivitySchedule::Frozen;
    let exec = Exec::sequential();
    let mut ens = WalkerEnsemble::sample_initial(spec, cfg, &exec).unwrap();
    ens.advance(4, &exec).unwrap();
    assert!(ens.diffusive_displacements().iter().all(|&d| d == 0.0));
    for (x, x0) in ens.positions().iter().zip(ens.initial_positions()) {
        assert_relative_eq!(*x, x0 + 2.0 * 0.2, epsilon = 1e-12);
    }
    assert!(matches!(
        ens.orthogonality_stats(&exec),
        Err(Error::Degenerate(_))
    ));
}

#[test]
fn midpoint_rule_increment_variance_is_exact() {
    // sum over steps of 2 D(t_mid) dt equals u0^2 t^2 for the linear law
    let spec = PacketSpec::default();
    let dt = 0.05;
    let steps = 40;
    let total: f64 = (0..steps)
        .map(|k| 2.0 * spec.diffusivity((k as f64 + 0.5) * dt).unwrap() * dt)
        .sum();
    assert_relative_eq!(total, 0.25 * 4.0, max_relative = 1e-14);
}

#[test]
fn variance_law_and_orthogonality() {
    let n = 200_000;
    let exec = Exec::default();
    let spec = PacketSpec::default();
    let mut ens = WalkerEnsemble::sample_initial(spec, config(n, 42), &exec).unwrap();
    ens.advance_to(2.0, &exec).unwrap();
    assert_relative_eq!(ens.t(), 2.0, max_relative = 1e-12);
    let m = ens.moments(&exec);
    assert!((m.variance - 2.0).abs() < 3.0 * 2.0 * (2.0 / (n as f64 - 1.0)).sqrt());
    let (rho, bound) = ens.orthogonality_stats(&exec).unwrap();
    assert!(rho.abs() < bound, "{rho} vs {bound}");
    let ct = ens.cross_term_decomposition(&exec);
    assert!(ct.linear_term.abs() < 3.0 * ct.stderr_linear);
    assert!((ct.quadratic_term - 1.0).abs() < 3.0 * ct.stderr_quadratic);
    let residual = ct.x2 - ct.x2_init - ct.quadratic_term;
    assert!(residual.abs() < 3.0 * ct.stderr_linear);
}

#[test]
fn horizon_is_enforced() {
    let exec = Exec::sequential();
    let mut ens =
        WalkerEnsemble::sample_initial(PacketSpec::default(), config(1000, 0), &exec).unwrap();
    assert!(matches!(
        ens.advance(41, &exec),
        Err(Error::HorizonExceeded { .. })
    ));
    ens.advance(40, &exec).unwrap();
}

#[test]
fn zero_time_decomposition_is_initial() {
    let exec = Exec::sequential();
    let ens =
        WalkerEnsemble::sample_initial(PacketSpec::default(), config(1000, 5), &exec).unwrap();
    let ct = ens.cross_term_decomposition(&exec);
    assert_eq!(ct.linear_term, 0.0);
    assert_eq!(ct.quadratic_term, 0.0);
    assert_eq!(ct.x2, ct.x2_init);
}

#[test]
fn perfectly_correlated_control_fails() {
    let exec = Exec::sequential();
    let fresh =
        WalkerEnsemble::sample_initial(PacketSpec::default(), config(5000, 9), &exec).unwrap();
    let init = fresh.initial_positions().to_vec();
    let ens = WalkerEnsemble::from_parts(
        PacketSpec::default(),
        config(5000, 9),
        init.clone(),
        init,
        0,
    )
    .unwrap();
    let (rho, bound) = ens.orthogonality_stats(&exec).unwrap();
    assert_relative_eq!(rho, 1.0, max_relative = 1e-12);
    assert!(rho.abs() > bound);
}

#[test]
fn from_parts_matches_advanced_ensemble() {
    let exec = Exec::sequential();
    let cfg = config(1000, 4);
    let mut ens = WalkerEnsemble::sample_initial(PacketSpec::default(), cfg, &exec).unwrap();
    ens.advance(7, &exec).unwrap();
    let rebuilt = WalkerEnsemble::from_parts(
        PacketSpec::default(),
        cfg,
        ens.initial_positions().to_vec(),
        ens.diffusive_displacements().to_vec(),
        7,
    )
    .unwrap();
    assert_eq!(rebuilt.positions(), ens.positions());
    assert!(WalkerEnsemble::from_parts(
        PacketSpec::default(),
        cfg,
        vec![0.0; 3],
        vec![0.0; 1000],
        0
    )
    .is_err());
}

#[test]
fn degenerate_moments() {
    let exec = Exec::sequential();
    let ens = WalkerEnsemble::from_parts(
        PacketSpec::default(),
        config(1000, 5),
        vec![3.5; 1000],
        vec![0.0; 1000],
        0,
    )
    .unwrap();
    let m = ens.moments(&exec);
    assert_eq!((m.mean, m.variance), (3.5, 0.0));
}

#[test]
fn drift_moves_mean_only() {
    let exec = Exec::default();
    let mut a =
        WalkerEnsemble::sample_initial(PacketSpec::default(), config(20_000, 8), &exec).unwrap();
    let mut b = WalkerEnsemble::sample_initial(
        PacketSpec::default().with_drift(-1.25),
        config(20_000, 8),
        &exec,
    )
    .unwrap();
    a.advance(20, &exec).unwrap();
    b.advance(20, &exec).unwrap();
    let (ma, mb) = (a.moments(&exec), b.moments(&exec));
    assert_relative_eq!(mb.mean - ma.mean, -1.25 * 1.0, epsilon = 1e-12);
    assert_relative_eq!(mb.variance, ma.variance, max_relative = 1e-10);
}

#[test]
fn histogram_uncertainty_product() {
    let exec = Exec::default();
    let mut ens =
        WalkerEnsemble::sample_initial(PacketSpec::default(), config(400_000, 21), &exec).unwrap();
    ens.advance_to(1.0, &exec).unwrap();
    let est = ens.uncertainty_from_histogram(100, &exec).unwrap();
    assert!((est.product / 0.5 - 1.0).abs() < 0.02, "{est:?}");
}
