use chronoflip::haar::{haar_moment, monte_carlo_moments, MomentSpec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// E|U_ij|^{2k} = k!(d−1)!/(d+k−1)!, from the Dirichlet law of |U_ij|² on a
/// uniformly random unit vector.
fn single_entry_moment(d: usize, k: usize) -> f64 {
    factorial(k) * factorial(d - 1) / factorial(d + k - 1)
}

#[test]
fn single_entry_moments_match_closed_form() {
    for d in 2..=4 {
        for k in 1..=3 {
            let spec = MomentSpec::new(d, vec![(0, 1); k], vec![(0, 1); k]);
            let got: f64 = haar_moment(&spec).unwrap();
            assert!(
                (got - single_entry_moment(d, k)).abs() < 1e-12,
                "d={d} k={k}: {got}"
            );
        }
    }
}

#[test]
fn row_norm_sum_rule_at_degree_three() {
    // Σ_{j,l,m} E[|U_0j|²|U_0l|²|U_0m|²] = E[(Σ_j |U_0j|²)³] = 1
    let d = 3;
    let mut total = 0.0;
    for j in 0..d {
        for l in 0..d {
            for m in 0..d {
                let spec = MomentSpec::new(
                    d,
                    vec![(0, j), (0, l), (0, m)],
                    vec![(0, j), (0, l), (0, m)],
                );
                total += haar_moment::<f64>(&spec).unwrap();
            }
        }
    }
    assert!((total - 1.0).abs() < 1e-12, "{total}");
}

#[test]
fn degree_three_moments_agree_with_sampling() {
    let d = 3;
    let specs = vec![
        MomentSpec::new(d, vec![(0, 0); 3], vec![(0, 0); 3]),
        MomentSpec::new(
            d,
            vec![(0, 0), (1, 1), (2, 2)],
            vec![(0, 0), (1, 1), (2, 2)],
        ),
        MomentSpec::new(
            d,
            vec![(0, 0), (1, 1), (2, 2)],
            vec![(0, 1), (1, 2), (2, 0)],
        ),
        MomentSpec::new(
            d,
            vec![(0, 0), (1, 1), (2, 2)],
            vec![(0, 1), (1, 0), (2, 2)],
        ),
        MomentSpec::new(
            d,
            vec![(0, 0), (0, 1), (1, 0)],
            vec![(0, 0), (0, 1), (1, 0)],
        ),
        MomentSpec::new(
            d,
            vec![(0, 0), (1, 1), (1, 2)],
            vec![(0, 1), (1, 0), (1, 2)],
        ),
    ];
    let exact: Vec<f64> = specs.iter().map(|s| haar_moment(s).unwrap()).collect();
    // the permutation monomial and the swapped pair have nonzero values of opposite sign
    assert!(exact[2] > 0.0 && exact[3] < 0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let est = monte_carlo_moments(&specs, 1_000_000, &mut rng);
    for (k, (e, x)) in est.iter().zip(&exact).enumerate() {
        assert!(
            e.sigmas(*x) < 5.0,
            "monomial {k}: estimate {} ± {}, exact {x}",
            e.mean_re,
            e.std_err
        );
    }
}
