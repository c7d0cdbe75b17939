//! The two-box game: decide whether a pair of unknown gates satisfies
//! UVᵀ = UᵀV or UVᵀ = −UᵀV.
//!
//! With both boxes usable in either time direction the controlled gates
//! S_U = U⊗|0⟩⟨0| + Uᵀ⊗|1⟩⟨1| and S_V = Vᵀ⊗|0⟩⟨0| + V⊗|1⟩⟨1| give
//! S_U S_V (|ψ⟩⊗|+⟩) = (UVᵀ|ψ⟩|0⟩ + UᵀV|ψ⟩|1⟩)/√2, and measuring the control
//! in the |±⟩ basis wins with certainty.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use num_complex::Complex;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{kron_vec, pauli, vnorm, ComplexMatrix};
use crate::scalar::Real;
use crate::timeflip::controlled;

/// Absolute Frobenius tolerance for the promises.
pub const PROMISE_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PromiseClass {
    /// UVᵀ = UᵀV
    Plus,
    /// UVᵀ = −UᵀV
    Minus,
    None,
}

impl fmt::Display for PromiseClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Plus => "plus",
            Self::Minus => "minus",
            Self::None => "none",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct GamePair<T: Real> {
    pub name: String,
    pub u: ComplexMatrix<T>,
    pub v: ComplexMatrix<T>,
    pub declared_class: PromiseClass,
}

impl<T: Real> GamePair<T> {
    pub fn new(
        name: impl Into<String>,
        u: ComplexMatrix<T>,
        v: ComplexMatrix<T>,
        declared: PromiseClass,
    ) -> Self {
        Self {
            name: name.into(),
            u,
            v,
            declared_class: declared,
        }
    }

    /// Checks the declared class against the residuals.
    pub fn validate(&self, tol: T) -> Result<()> {
        let got = classify_pair(&self.u, &self.v, tol)?;
        if self.declared_class != PromiseClass::None && got != self.declared_class {
            return Err(Error::PromiseViolated);
        }
        Ok(())
    }
}

fn check_pair<T: Real>(u: &ComplexMatrix<T>, v: &ComplexMatrix<T>) -> Result<()> {
    u.require_square()?;
    if u.shape() != v.shape() {
        return Err(Error::DimMismatch(format!(
            "gates {:?} and {:?}",
            u.shape(),
            v.shape()
        )));
    }
    let tol = T::default_tol() * T::lit(10.0);
    for g in [u, v] {
        let dev = g.unitary_deviation();
        if dev > tol {
            return Err(Error::NotUnitary(dev.as_f64()));
        }
    }
    Ok(())
}

/// ‖UVᵀ − UᵀV‖_F and ‖UVᵀ + UᵀV‖_F
pub fn promise_residuals<T: Real>(u: &ComplexMatrix<T>, v: &ComplexMatrix<T>) -> (T, T) {
    let a = u.matmul(&v.transpose());
    let b = u.transpose().matmul(v);
    (a.distance(&b), (a + b).frobenius_norm())
}

pub fn classify_pair<T: Real>(
    u: &ComplexMatrix<T>,
    v: &ComplexMatrix<T>,
    tol: T,
) -> Result<PromiseClass> {
    check_pair(u, v)?;
    let (plus, minus) = promise_residuals(u, v);
    Ok(if plus <= tol {
        PromiseClass::Plus
    } else if minus <= tol {
        PromiseClass::Minus
    } else {
        PromiseClass::None
    })
}

/// S_U S_V (|ψ⟩ ⊗ |+⟩), ordered target ⊗ control.
pub fn strategy_output<T: Real>(
    u: &ComplexMatrix<T>,
    v: &ComplexMatrix<T>,
    psi: &[Complex<T>],
) -> Result<Vec<Complex<T>>> {
    check_pair(u, v)?;
    if psi.len() != u.rows() {
        return Err(Error::DimMismatch(format!(
            "state of length {} for {}-dim gates",
            psi.len(),
            u.rows()
        )));
    }
    let n = vnorm(psi);
    if (n - T::one()).abs() > T::lit(1e-9) {
        return Err(Error::InvalidArgument(format!("target state has norm {n}")));
    }
    let su = controlled(u, &u.transpose());
    let sv = controlled(&v.transpose(), v);
    let s = T::lit(FRAC_1_SQRT_2);
    let plus = [Complex::new(s, T::zero()), Complex::new(s, T::zero())];
    Ok(su.matmul(&sv).matvec(&kron_vec(psi, &plus)))
}

/// Probabilities of the control outcomes |+⟩ and |−⟩.
pub fn control_probabilities<T: Real>(state: &[Complex<T>]) -> (T, T) {
    let s = T::lit(FRAC_1_SQRT_2);
    let mut p = T::zero();
    let mut m = T::zero();
    for t in 0..state.len() / 2 {
        let (a, b) = (state[2 * t], state[2 * t + 1]);
        p += ((a + b) * s).norm_sqr();
        m += ((a - b) * s).norm_sqr();
    }
    (p, m)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GameResult {
    pub outcome: PromiseClass,
    pub p_plus: f64,
    pub p_minus: f64,
}

impl GameResult {
    /// Probability of the outcome that contradicts `truth`.
    pub fn error_probability(&self, truth: PromiseClass) -> f64 {
        match truth {
            PromiseClass::Plus => self.p_minus,
            PromiseClass::Minus => self.p_plus,
            PromiseClass::None => f64::NAN,
        }
    }
}

/// Runs the time-flip strategy on |0⟩ ⊗ |+⟩; fails when the pair satisfies
/// neither promise.
pub fn play_game<T: Real>(u: &ComplexMatrix<T>, v: &ComplexMatrix<T>) -> Result<GameResult> {
    if classify_pair(u, v, T::lit(PROMISE_TOL))? == PromiseClass::None {
        return Err(Error::PromiseViolated);
    }
    let mut psi = vec![Complex::zero(); u.rows()];
    psi[0] = Complex::new(T::one(), T::zero());
    let out = strategy_output(u, v, &psi)?;
    let (p, m) = control_probabilities(&out);
    Ok(GameResult {
        outcome: if p >= m {
            PromiseClass::Plus
        } else {
            PromiseClass::Minus
        },
        p_plus: p.as_f64(),
        p_minus: m.as_f64(),
    })
}

fn c(re: f64, im: f64) -> (f64, f64) {
    (re, im)
}

fn gate<T: Real>(entries: [(f64, f64); 4], scale: f64) -> ComplexMatrix<T> {
    let e = entries.map(|(a, b)| (a * scale, b * scale));
    ComplexMatrix::complex(2, 2, &e)
}

/// Named single-qubit gates used by the built-in sets.
pub fn named_gate<T: Real>(name: &str) -> Option<ComplexMatrix<T>> {
    let s = FRAC_1_SQRT_2;
    Some(match name {
        "I" => ComplexMatrix::identity(2),
        "X" => pauli::x(),
        "Y" => pauli::y(),
        "Z" => pauli::z(),
        "(X-Y)/√2" => gate([c(0., 0.), c(1., 1.), c(1., -1.), c(0., 0.)], s),
        "(X+Y)/√2" => gate([c(0., 0.), c(1., -1.), c(1., 1.), c(0., 0.)], s),
        "(Z-Y)/√2" => gate([c(1., 0.), c(0., 1.), c(0., -1.), c(-1., 0.)], s),
        "(Z+Y)/√2" => gate([c(1., 0.), c(0., -1.), c(0., 1.), c(-1., 0.)], s),
        "(I+iY)/√2" => gate([c(1., 0.), c(1., 0.), c(-1., 0.), c(1., 0.)], s),
        "(I-iY)/√2" => gate([c(1., 0.), c(-1., 0.), c(1., 0.), c(1., 0.)], s),
        _ => return None,
    })
}

const S0_NAMES: [(&str, &str); 13] = [
    ("I", "I"),
    ("I", "X"),
    ("I", "Z"),
    ("X", "I"),
    ("X", "X"),
    ("X", "Z"),
    ("Z", "I"),
    ("Z", "X"),
    ("Z", "Z"),
    ("(X-Y)/√2", "(X+Y)/√2"),
    ("(X+Y)/√2", "(X-Y)/√2"),
    ("(Z-Y)/√2", "(Z+Y)/√2"),
    ("(Z+Y)/√2", "(Z-Y)/√2"),
];

const S1_NAMES: [(&str, &str); 8] = [
    ("Y", "I"),
    ("Y", "X"),
    ("Y", "Z"),
    ("I", "Y"),
    ("X", "Y"),
    ("Z", "Y"),
    ("(I+iY)/√2", "(I-iY)/√2"),
    ("(I-iY)/√2", "(I+iY)/√2"),
];

fn build<T: Real>(names: &[(&str, &str)], class: PromiseClass) -> Vec<GamePair<T>> {
    names
        .iter()
        .map(|(a, b)| {
            GamePair::new(
                format!("({a}, {b})"),
                named_gate(a).expect("known gate"),
                named_gate(b).expect("known gate"),
                class,
            )
        })
        .collect()
}

/// The fixed subsets S′₀ ⊂ S₊ (13 pairs) and S′₁ ⊂ S₋ (8 pairs).
pub fn builtin_sets<T: Real>() -> (Vec<GamePair<T>>, Vec<GamePair<T>>) {
    (
        build(&S0_NAMES, PromiseClass::Plus),
        build(&S1_NAMES, PromiseClass::Minus),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::Channel;
    use crate::linalg::random;
    use crate::scalar::re;
    use crate::timeflip::supermap_s1;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    type M = ComplexMatrix<f64>;

    /// H·diag(1, i): neither symmetric nor antisymmetric
    fn hs() -> M {
        pauli::h::<f64>().matmul(&M::complex(
            2,
            2,
            &[(1.0, 0.0), (0.0, 0.0), (0.0, 0.0), (0.0, 1.0)],
        ))
    }

    #[test]
    fn simple_classifications() {
        let tol = PROMISE_TOL;
        assert_eq!(
            classify_pair(&M::identity(2), &M::identity(2), tol).unwrap(),
            PromiseClass::Plus
        );
        assert_eq!(
            classify_pair(&pauli::y(), &M::identity(2), tol).unwrap(),
            PromiseClass::Minus
        );
        assert_eq!(
            classify_pair(&pauli::x::<f64>(), &pauli::z(), tol).unwrap(),
            PromiseClass::Plus
        );
        assert_eq!(
            classify_pair(&pauli::h::<f64>(), &pauli::x(), tol).unwrap(),
            PromiseClass::Plus
        );
        assert_eq!(
            classify_pair(&hs(), &pauli::x(), tol).unwrap(),
            PromiseClass::None
        );
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let u = random::haar_unitary::<f64, _>(2, &mut rng);
            let v = random::haar_unitary::<f64, _>(2, &mut rng);
            let (a, b) = promise_residuals(&u, &v);
            assert!(a > 1e-3 && b > 1e-3);
            assert_eq!(classify_pair(&u, &v, tol).unwrap(), PromiseClass::None);
        }
        assert!(matches!(
            classify_pair(&M::real(2, 2, &[1.0, 1.0, 0.0, 1.0]), &M::identity(2), tol),
            Err(Error::NotUnitary(_))
        ));
    }

    #[test]
    fn strategy_on_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let psi = random::random_state::<f64, _>(2, &mut rng);
        let s = FRAC_1_SQRT_2;
        let out = strategy_output(&M::identity(2), &M::identity(2), &psi).unwrap();
        assert!(crate::linalg::vdistance(&out, &kron_vec(&psi, &[re(s), re(s)])) < 1e-15);

        // (Y, I): UVᵀ = Y, UᵀV = −Y, so the output is Y|ψ⟩ ⊗ |−⟩
        let out = strategy_output(&pauli::y(), &M::identity(2), &psi).unwrap();
        let want = kron_vec(&pauli::y::<f64>().matvec(&psi), &[re(s), re(-s)]);
        assert!(crate::linalg::vdistance(&out, &want) < 1e-15);

        let (u, v) = (
            named_gate::<f64>("(X-Y)/√2").unwrap(),
            named_gate("(X+Y)/√2").unwrap(),
        );
        let (p, m) = control_probabilities(&strategy_output(&u, &v, &psi).unwrap());
        assert!((p - 1.0).abs() < 1e-12 && m < 1e-12);
    }

    #[test]
    fn play_labels_and_promise_errors() {
        assert_eq!(
            play_game(&M::identity(2), &M::identity(2)).unwrap().outcome,
            PromiseClass::Plus
        );
        assert_eq!(
            play_game(&pauli::y(), &M::identity(2)).unwrap().outcome,
            PromiseClass::Minus
        );
        let (u, v) = (
            named_gate::<f64>("(X-Y)/√2").unwrap(),
            named_gate("(X+Y)/√2").unwrap(),
        );
        assert_eq!(play_game(&u, &v).unwrap().outcome, PromiseClass::Plus);
        assert!(matches!(
            play_game(&hs(), &pauli::x()),
            Err(Error::PromiseViolated)
        ));
    }

    #[test]
    fn builtin_sets_are_perfectly_discriminated() {
        let (s0, s1) = builtin_sets::<f64>();
        assert_eq!((s0.len(), s1.len()), (13, 8));
        for pair in s0.iter().chain(&s1) {
            assert!(pair.u.is_unitary(1e-15) && pair.v.is_unitary(1e-15));
            let (rp, rm) = promise_residuals(&pair.u, &pair.v);
            let r = if pair.declared_class == PromiseClass::Plus {
                rp
            } else {
                rm
            };
            assert!(r <= 1e-12, "{}: {r:e}", pair.name);
            pair.validate(PROMISE_TOL).unwrap();
            let res = play_game(&pair.u, &pair.v).unwrap();
            assert_eq!(res.outcome, pair.declared_class);
            assert!(res.error_probability(pair.declared_class) <= 1e-12);
        }
        let last = &s1[6];
        assert_eq!(
            classify_pair(&last.u, &last.v, PROMISE_TOL).unwrap(),
            PromiseClass::Minus
        );
    }

    #[test]
    fn class_invariant_under_phase_on_u() {
        let (s0, s1) = builtin_sets::<f64>();
        for pair in s0.iter().chain(&s1) {
            for theta in [0.3, 1.7, -2.2] {
                let u = pair.u.scale(Complex::from_polar(1.0, theta));
                assert_eq!(
                    classify_pair(&u, &pair.v, 1e-12).unwrap(),
                    pair.declared_class
                );
            }
        }
    }

    #[test]
    fn block_algebra_matches_bipartite_supermap() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let (s0, s1) = builtin_sets::<f64>();
        let mut pairs: Vec<(M, M)> = s0
            .iter()
            .chain(&s1)
            .map(|p| (p.u.clone(), p.v.clone()))
            .collect();
        for _ in 0..5 {
            pairs.push((
                random::haar_unitary(2, &mut rng),
                random::haar_unitary(2, &mut rng),
            ));
        }
        for (u, v) in pairs {
            let psi = random::random_state::<f64, _>(2, &mut rng);
            let out = strategy_output(&u, &v, &psi).unwrap();
            let s = supermap_s1(
                &Channel::unitary(&u).unwrap(),
                &Channel::unitary(&v).unwrap(),
            )
            .unwrap();
            let s2 = FRAC_1_SQRT_2;
            let input = M::projector(&kron_vec(&psi, &[re(s2), re(s2)]));
            let rho = s.apply(&input).unwrap();
            assert!(rho.distance(&M::projector(&out)) < 1e-12);
        }
    }
}
