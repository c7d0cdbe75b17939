use std::sync::OnceLock;

use num_complex::Complex;
use num_traits::Zero;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::linalg::{ket, kron_vec};

type M = ComplexMatrix<f64>;

fn solved() -> &'static (MinimaxSdp<f64>, SdpSolution<f64>) {
    static CELL: OnceLock<(MinimaxSdp<f64>, SdpSolution<f64>)> = OnceLock::new();
    CELL.get_or_init(|| {
        let (sp, sm) = builtin_sets::<f64>();
        let sdp = build_minimax_sdp(&sp, &sm).unwrap();
        let sol = solve_sdp(&sdp.problem, &SolverOptions::default()).unwrap();
        (sdp, sol)
    })
}

/// (Λ ⊗ id_R)(ρ) for a map given by its Choi operator J on (in, out).
fn apply_local(j: &M, rho: &M, din: usize, dout: usize, dr: usize) -> M {
    M::from_fn(dout * dr, dout * dr, |row, col| {
        let (o, r) = (row / dr, row % dr);
        let (op, rp) = (col / dr, col % dr);
        let mut acc = Complex::zero();
        for i in 0..din {
            for k in 0..din {
                acc += rho[(i * dr + r, k * dr + rp)] * j[(i * dout + o, k * dout + op)];
            }
        }
        acc
    })
}

/// Probability of outcome `pov` in the circuit: prepare ρ on (X_i, R), run
/// the first box, wire its output into the second, measure (Y_o, R).
fn sequential_probability(first: &M, second: &M, rho: &M, pov: &M, d: usize) -> Complex<f64> {
    let s1 = apply_local(first, rho, d, d, d);
    let s2 = apply_local(second, &s1, d, d, d);
    pov.trace_product(&s2)
}

/// Compiles the tester element of a bilinear probability functional
/// p(J_A, J_B) = Tr[T (J_A ⊗ J_B)ᵀ] by evaluating it on matrix units.
fn compile(p: impl Fn(&M, &M) -> Complex<f64>, d: usize) -> M {
    let k = d * d;
    let unit = |a: usize, b: usize| {
        let mut e = M::zeros(k, k);
        e[(a, b)] = Complex::new(1.0, 0.0);
        e
    };
    let mut t = M::zeros(k * k, k * k);
    for a in 0..k {
        for b in 0..k {
            let ea = unit(a, b);
            for c in 0..k {
                for e in 0..k {
                    t[(a * k + c, b * k + e)] = p(&ea, &unit(c, e));
                }
            }
        }
    }
    t
}

fn phi_plus(d: usize) -> M {
    let mut v = vec![Complex::zero(); d * d];
    for i in 0..d {
        v[i * d + i] = Complex::new(1.0 / (d as f64).sqrt(), 0.0);
    }
    M::projector(&v)
}

fn random_povm(rng: &mut ChaCha8Rng) -> (M, M) {
    let u = random::haar_unitary::<f64, _>(4, rng);
    let p = M::projector(&u.column(0)) + M::projector(&u.column(1));
    (p.clone(), M::identity(4) - p)
}

#[test]
fn bookkeeping() {
    let (sdp, _) = (
        build_minimax_sdp(&builtin_sets::<f64>().0, &builtin_sets::<f64>().1).unwrap(),
        (),
    );
    let p = &sdp.problem;
    assert_eq!(
        p.blocks,
        vec![
            BlockKind::Psd(16),
            BlockKind::Psd(16),
            BlockKind::Nonneg(22)
        ]
    );
    let names: Vec<&str> = p.groups.iter().map(|g| g.0.as_str()).collect();
    assert_eq!(
        names,
        [
            "family-i",
            "family-ii",
            "family-iii",
            "family-iv",
            "epigraph"
        ]
    );
    assert_eq!(p.groups.last().unwrap().1, 21);
    assert_eq!(p.groups[..4].iter().map(|g| g.1).sum::<usize>(), 169);
    assert_eq!(p.num_constraints(), 190);
    assert_eq!((sdp.n_plus, sdp.n_minus), (13, 8));
    for c in &p.constraints {
        for (_, a) in &c.terms {
            if let Block::Psd(m) = a {
                assert!(m.hermitian_deviation() <= 1e-12);
            }
        }
    }
}

#[test]
fn uniform_split_is_feasible_at_one_half() {
    let (sp, sm) = builtin_sets::<f64>();
    let sdp = build_minimax_sdp(&sp, &sm).unwrap();
    let x = sdp.point(&Tester::uniform(2), 0.5);
    let ax = sdp.problem.apply(&x);
    for (a, b) in ax.iter().zip(sdp.problem.rhs()) {
        assert!((a - b).abs() < 1e-12);
    }
    let slack = x[EPIGRAPH_BLOCK].as_nonneg().unwrap();
    assert!(slack[1..].iter().all(|s| s.abs() < 1e-12));
    assert_eq!(sdp.problem.objective_value(&x), 0.5);
}

#[test]
fn trivial_error_terms() {
    let (sp, sm) = builtin_sets::<f64>();
    let uniform = Tester::<f64>::uniform(2);
    let e = error_terms(&uniform, &sp, &sm).unwrap();
    assert!(e.values().all(|v| (v - 0.5).abs() < 1e-12));
    let all_plus = Tester::new(uniform.total(), M::zeros(16, 16), 2, 1e-9).unwrap();
    let e = error_terms(&all_plus, &sp, &sm).unwrap();
    assert!(e.e0.iter().all(|x| x.value == 0.0));
    assert!(e.e1.iter().all(|x| (x.value - 1.0).abs() < 1e-12));
}

#[test]
fn invalid_testers_are_rejected() {
    let (sp, sm) = builtin_sets::<f64>();
    let u = Tester::<f64>::uniform(2);
    let scaled = Tester {
        t_plus: u.t_plus.scale_real(1.5),
        ..u.clone()
    };
    assert!(error_terms(&scaled, &sp, &sm).is_err());
    let mut neg = u.clone();
    neg.t_minus[(0, 0)] -= Complex::new(0.2, 0.0);
    neg.t_plus[(0, 0)] += Complex::new(0.2, 0.0);
    assert!(matches!(neg.validate(1e-9), Err(Error::NotPsd(_))));
}

#[test]
fn sequential_circuits_compile_to_valid_testers() {
    let d = 2;
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let rho = phi_plus(d);
    let (p0, p1) = random_povm(&mut rng);
    // A then B
    let fwd: Vec<M> = [&p0, &p1]
        .iter()
        .map(|pov| compile(|ja, jb| sequential_probability(ja, jb, &rho, pov, d), d))
        .collect();
    let t = Tester::new(fwd[0].clone(), fwd[1].clone(), d, 1e-10).unwrap();
    assert!(t.residuals().unwrap().max() <= 1e-12);
    // the compiled elements reproduce the circuit on unitary boxes
    for _ in 0..5 {
        let u = random::haar_unitary::<f64, _>(d, &mut rng);
        let v = random::haar_unitary::<f64, _>(d, &mut rng);
        let (tp, _) = t.probabilities(&u, &v);
        let direct = sequential_probability(&box_choi(&v), &box_choi(&u), &rho, &p0, d);
        assert!((tp - direct.re).abs() < 1e-12 && direct.im.abs() < 1e-12);
    }
    // B then A, with a product input and a two-outcome measurement
    let psi = kron_vec(
        &random::random_state::<f64, _>(d, &mut rng),
        &ket::<f64>(d, 1),
    );
    let rho2 = M::projector(&psi);
    let bwd: Vec<M> = [&p0, &p1]
        .iter()
        .map(|pov| compile(|ja, jb| sequential_probability(jb, ja, &rho2, pov, d), d))
        .collect();
    let t = Tester::new(bwd[0].clone(), bwd[1].clone(), d, 1e-10).unwrap();
    assert!(t.residuals().unwrap().max() <= 1e-12);
}

#[test]
fn optimum_matches_known_value() {
    let (sdp, sol) = solved();
    assert!(
        (sol.objective - 0.112149).abs() <= 5e-4,
        "objective {}",
        sol.objective
    );
    assert!(sol.primal_residual <= 1e-7);
    assert!(sol.psd_violation <= 1e-7);
    assert!(sol.relative_gap <= 1e-5);
    assert!(sol.dual_objective <= sol.objective + 1e-9);
    // the returned tester is valid and realizes the objective
    let tester = sdp.tester(&sol.x).unwrap();
    tester.validate(1e-6).unwrap();
    let (sp, sm) = builtin_sets::<f64>();
    let e = error_terms(&tester, &sp, &sm).unwrap();
    assert!(
        (e.max() - sol.objective).abs() < 1e-5,
        "{} vs {}",
        e.max(),
        sol.objective
    );
    assert!(e.values().all(|v| (-1e-10..=1.0 + 1e-10).contains(&v)));
}

#[test]
fn iterates_stay_hermitian_and_best_is_monotone() {
    let (_, sol) = solved();
    let mut prev = f64::INFINITY;
    for h in &sol.history {
        assert!(h.hermitian_deviation <= 1e-12);
        if let Some(b) = h.best_objective {
            assert!(b <= prev);
            prev = b;
        }
    }
}

#[test]
fn seeds_agree() {
    let (sdp, sol) = solved();
    let other = solve_sdp(
        &sdp.problem,
        &SolverOptions {
            seed: 7,
            ..Default::default()
        },
    )
    .unwrap();
    assert!((other.objective - sol.objective).abs() <= 1e-5);
}

#[test]
fn random_feasible_testers_do_no_better() {
    let (sdp, sol) = solved();
    let (sp, sm) = builtin_sets::<f64>();
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for _ in 0..20 {
        let t = random_feasible_tester(&sdp.constraints, &mut rng).unwrap();
        assert!(tester_min_eig(&t).unwrap() > -1e-9);
        let e = error_terms(&t, &sp, &sm).unwrap();
        assert!(e.max() >= sol.objective - 1e-5);
    }
}
