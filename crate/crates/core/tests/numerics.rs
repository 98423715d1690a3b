use approx::assert_relative_eq;
use subquantum::error::Error;
use subquantum::numerics::*;

#[test]
fn compensated_sum_recovers_small_terms() {
    let mut values = vec![1.0e16, 1.0, -1.0e16];
    values.extend(std::iter::repeat_n(1.0, 9));
    assert_eq!(compensated_sum(values.iter().copied()), 10.0);
    assert_ne!(values.iter().sum::<f64>(), 10.0);
}

#[test]
fn merge_matches_single_pass() {
    let xs: Vec<f64> = (0..1000).map(|i| (i as f64).sin() * 1e-3 + 1.0).collect();
    let whole = compensated_sum(xs.iter().copied());
    let mut left: CompensatedSum = xs[..400].iter().copied().collect();
    let right: CompensatedSum = xs[400..].iter().copied().collect();
    left.merge(&right);
    assert_relative_eq!(left.value(), whole, max_relative = 1e-15);
}

#[test]
fn trapezoid_integrates_gaussian() {
    let grid = UniformGrid::centered(0.0, 10.0, 4001).unwrap();
    let p = grid.sample(|x| gaussian(x, 0.0, 1.0));
    assert_relative_eq!(trapezoid(&p, grid.step), 1.0, max_relative = 1e-12);
}

#[test]
fn gradient_exact_for_quadratics() {
    let grid = UniformGrid::spanning(-1.0, 2.0, 31).unwrap();
    let f = grid.sample(|x| 3.0 * x * x - x + 2.0);
    let g = gradient(&f, grid.step).unwrap();
    for (i, gi) in g.iter().enumerate() {
        assert_relative_eq!(*gi, 6.0 * grid.x(i) - 1.0, epsilon = 1e-10);
    }
    let s = second_difference(&f, grid.step).unwrap();
    assert!(s.iter().all(|v| (v - 6.0).abs() < 1e-9));
}

#[test]
fn coarse_grids_rejected() {
    assert_eq!(gradient(&[1.0, 2.0], 0.1), Err(Error::GridTooCoarse(2)));
    assert!(UniformGrid::spanning(0.0, 1.0, 2).is_err());
}
