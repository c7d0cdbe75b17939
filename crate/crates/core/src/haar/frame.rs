//! The frame operator of the unitary channels and the Ω operator of the
//! two-copy transpose problem, each computed exactly by a design average or
//! by Weingarten calculus.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::clifford::single_qubit_clifford_group;
use super::weingarten::Weingarten;
use crate::error::{Error, Result};
use crate::linalg::{
    bell_projector, double_ket_projector, kron_all, permute_systems, ComplexMatrix,
};
use crate::scalar::Real;

pub const MAX_DIM: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TwirlMethod {
    /// Average over the single-qubit Clifford group (d = 2 only).
    Design,
    Weingarten,
}

impl fmt::Display for TwirlMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Design => "design",
            Self::Weingarten => "weingarten",
        })
    }
}

impl FromStr for TwirlMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "design" => Ok(Self::Design),
            "weingarten" => Ok(Self::Weingarten),
            other => Err(Error::InvalidArgument(format!("unknown method `{other}`"))),
        }
    }
}

fn check_method(d: usize, method: TwirlMethod) -> Result<()> {
    match method {
        TwirlMethod::Design if d != 2 => Err(Error::Unsupported(format!(
            "design twirl needs d = 2, got {d}"
        ))),
        TwirlMethod::Weingarten if d == 0 || d > MAX_DIM => Err(Error::Unsupported(format!(
            "Weingarten twirl for d = {d} (supported up to {MAX_DIM})"
        ))),
        _ => Ok(()),
    }
}

/// Splits a flat index into `n` base-`d` digits, most significant first.
fn digits(mut x: usize, d: usize, n: usize) -> Vec<usize> {
    let mut out = vec![0; n];
    for k in (0..n).rev() {
        out[k] = x % d;
        x /= d;
    }
    out
}

/// F = (1/d²) ∫dU |U⟩⟩⟨⟨U| ⊗ |Ū⟩⟩⟨⟨Ū| on systems (1, 2, 3, 4).
pub fn frame_operator<T: Real>(d: usize, method: TwirlMethod) -> Result<ComplexMatrix<T>> {
    check_method(d, method)?;
    let norm = T::lit((d * d) as f64).recip();
    match method {
        TwirlMethod::Design => {
            let g = single_qubit_clifford_group::<T>();
            Ok(
                g.average(|u| double_ket_projector(u).kron(&double_ket_projector(&u.conj())))
                    .scale_real(norm),
            )
        }
        TwirlMethod::Weingarten => {
            let w = Weingarten::<T>::new(2, d)?;
            let n = d.pow(4);
            // entry: U[a,b] Ū[c,e] Ū[a',b'] U[c',e']
            Ok(ComplexMatrix::from_fn(n, n, |x, y| {
                let p = digits(x, d, 4);
                let q = digits(y, d, 4);
                let m =
                    w.moment_indices(&[p[0], q[2]], &[p[1], q[3]], &[q[0], p[2]], &[q[1], p[3]]);
                Complex::new(m * norm, T::zero())
            }))
        }
    }
}

/// E₁₃ ⊗ E₂₄ / d² + (1 − 1/d²) E⊥₁₃ ⊗ E⊥₂₄ / (d² − 1)², with E the
/// normalized maximally entangled projector.
pub fn frame_operator_closed_form<T: Real>(d: usize) -> ComplexMatrix<T> {
    let e = bell_projector::<T>(d);
    let ep = ComplexMatrix::identity(d * d) - e.clone();
    let d2 = T::lit((d * d) as f64);
    let coef = if d > 1 {
        (T::one() - d2.recip()) / ((d2 - T::one()) * (d2 - T::one()))
    } else {
        T::zero()
    };
    let m13_24 = e.kron(&e).scale_real(d2.recip()) + ep.kron(&ep).scale_real(coef);
    permute_systems(&m13_24, &[d, d, d, d], &[0, 2, 1, 3]).expect("fixed dims")
}

/// Ω = (1/d²) ∫dU |Ū⟩⟩⟨⟨Ū|_{A_i A_o} ⊗ |Ū⟩⟩⟨⟨Ū|_{B_i B_o} ⊗ |Uᵀ⟩⟩⟨⟨Uᵀ|_{C_i C_o},
/// factors ordered (A_i, A_o, B_i, B_o, C_i, C_o). Here |X⟩⟩_{in,out} puts
/// the column index on the input, i.e. it is the row-major vector of Xᵀ, so
/// the integrand is |U†⟩⟩⟨⟨U†| ⊗ |U†⟩⟩⟨⟨U†| ⊗ |U⟩⟩⟨⟨U| in row-major form.
pub fn omega_operator<T: Real>(d: usize, method: TwirlMethod) -> Result<ComplexMatrix<T>> {
    check_method(d, method)?;
    let norm = T::lit((d * d) as f64).recip();
    match method {
        TwirlMethod::Design => {
            let g = single_qubit_clifford_group::<T>();
            Ok(g.average(|u| {
                let ud = double_ket_projector(&u.adjoint());
                kron_all(&[&ud, &ud, &double_ket_projector(u)])
            })
            .scale_real(norm))
        }
        TwirlMethod::Weingarten => {
            let w = Weingarten::<T>::new(3, d)?;
            let n = d.pow(6);
            Ok(ComplexMatrix::from_fn(n, n, |x, y| {
                let p = digits(x, d, 6);
                let q = digits(y, d, 6);
                // U:  (ao',ai'), (bo',bi'), (ci,co)
                // Ū:  (ao,ai), (bo,bi), (ci',co')
                let m = w.moment_indices(
                    &[q[1], q[3], p[4]],
                    &[q[0], q[2], p[5]],
                    &[p[1], p[3], q[4]],
                    &[p[0], p[2], q[5]],
                );
                Complex::new(m * norm, T::zero())
            }))
        }
    }
}

/// Ū_{A_i} ⊗ V̄_{A_o} ⊗ Ū_{B_i} ⊗ V̄_{B_o} ⊗ V_{C_i} ⊗ U_{C_o}, which commutes
/// with Ω.
pub fn omega_symmetry<T: Real>(u: &ComplexMatrix<T>, v: &ComplexMatrix<T>) -> ComplexMatrix<T> {
    let (uc, vc) = (u.conj(), v.conj());
    kron_all(&[&uc, &vc, &uc, &vc, v, u])
}

/// Tr[S Ω] for a supermap Choi operator on the same six factors.
pub fn transpose_fidelity<T: Real>(s: &ComplexMatrix<T>, omega: &ComplexMatrix<T>) -> Result<T> {
    if s.shape() != omega.shape() {
        return Err(Error::DimMismatch(format!(
            "supermap {:?} vs Ω {:?}",
            s.shape(),
            omega.shape()
        )));
    }
    Ok(s.trace_product(omega).re)
}

/// Choi operator of the supermap that ignores both inputs and outputs the
/// identity channel: I/d on each input pair and |I⟩⟩⟨⟨I| on C.
pub fn identity_output_supermap<T: Real>(d: usize) -> ComplexMatrix<T> {
    let id = ComplexMatrix::<T>::identity(d * d).scale_real(T::lit(d as f64).recip());
    let c = double_ket_projector(&ComplexMatrix::<T>::identity(d));
    kron_all(&[&id, &id, &c])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{eigvals_hermitian, min_eig, random};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn frame_routes_agree_with_closed_form() {
        let f_design = frame_operator::<f64>(2, TwirlMethod::Design).unwrap();
        let closed = frame_operator_closed_form::<f64>(2);
        assert!(f_design.distance(&closed) < 1e-12);
        assert!(
            frame_operator::<f64>(2, TwirlMethod::Weingarten)
                .unwrap()
                .distance(&closed)
                < 1e-12
        );
        for d in [3, 4] {
            let f = frame_operator::<f64>(d, TwirlMethod::Weingarten).unwrap();
            assert!(f.distance(&frame_operator_closed_form(d)) < 1e-10);
        }
    }

    #[test]
    fn qubit_frame_spectrum() {
        let vals = eigvals_hermitian(&frame_operator_closed_form::<f64>(2)).unwrap();
        assert!((vals[0] - 0.25).abs() < 1e-12);
        for v in &vals[1..10] {
            assert!((v - 1.0 / 12.0).abs() < 1e-12);
        }
        for v in &vals[10..] {
            assert!(v.abs() < 1e-12);
        }
    }

    #[test]
    fn unsupported_pairs() {
        assert!(frame_operator::<f64>(3, TwirlMethod::Design).is_err());
        assert!(omega_operator::<f64>(5, TwirlMethod::Weingarten).is_err());
        assert_eq!(
            "design".parse::<TwirlMethod>().unwrap(),
            TwirlMethod::Design
        );
    }

    #[test]
    fn omega_routes_agree_and_symmetry_holds() {
        let a = omega_operator::<f64>(2, TwirlMethod::Design).unwrap();
        let b = omega_operator::<f64>(2, TwirlMethod::Weingarten).unwrap();
        assert!(a.distance(&b) < 1e-12);
        assert!((a.trace().re - 2.0).abs() < 1e-12);
        assert!(min_eig(&a).unwrap() > -1e-11);
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..3 {
            let u = random::haar_unitary::<f64, _>(2, &mut rng);
            let v = random::haar_unitary::<f64, _>(2, &mut rng);
            let w = omega_symmetry(&u, &v);
            let comm = a.matmul(&w) - w.matmul(&a);
            assert!(comm.max_abs() < 1e-12);
        }
    }

    #[test]
    fn identity_output_fidelity_is_haar_average() {
        let omega = omega_operator::<f64>(2, TwirlMethod::Design).unwrap();
        let s = identity_output_supermap::<f64>(2);
        let f = transpose_fidelity(&s, &omega).unwrap();
        // independent estimate of ∫dU |Tr Uᵀ|²/d²
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let n = 50_000;
        let mut acc = 0.0;
        let mut acc2 = 0.0;
        for _ in 0..n {
            let u = random::haar_unitary::<f64, _>(2, &mut rng);
            let x = u.transpose().trace().norm_sqr() / 4.0;
            acc += x;
            acc2 += x * x;
        }
        let mean = acc / n as f64;
        let se = ((acc2 / n as f64 - mean * mean) / n as f64).sqrt();
        assert!((f - mean).abs() < 5.0 * se, "{f} vs {mean} ± {se}");
        assert!((f - 0.25).abs() < 1e-12);
    }
}
