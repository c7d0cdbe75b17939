//! Statevector simulation of the teleportation circuit that realizes the
//! time flip probabilistically.
//!
//! Registers are ordered (S, R1, R2, C): the target input S, the two halves
//! R1, R2 of the resource (I ⊗ U)|Φ⟩, and the qubit control C. The control
//! swaps R1 and R2, then (S, R1) is measured in the Bell basis and the output
//! lives on (R2, C).

use num_complex::Complex;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::channels::Channel;
use crate::error::{Error, Result};
use crate::linalg::{vnorm, weyl, ComplexMatrix};
use crate::scalar::Real;

/// X^a Z^b for m = a·d + b.
pub fn bell_basis<T: Real>(d: usize) -> Vec<ComplexMatrix<T>> {
    (0..d * d).map(|m| weyl(d, m / d, m % d)).collect()
}

/// The Bell state (U_m† ⊗ I)|Φ⟩ that outcome `m` projects onto, as a
/// d² vector.
pub fn bell_state<T: Real>(d: usize, m: usize) -> Vec<Complex<T>> {
    let um = weyl::<T>(d, m / d, m % d).adjoint();
    let s = T::lit(d as f64).sqrt().recip();
    let mut v = vec![Complex::zero(); d * d];
    for i in 0..d {
        for j in 0..d {
            v[i * d + j] = um[(i, j)] * s;
        }
    }
    v
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct TeleportOutcome<T: Real> {
    pub outcome_index: usize,
    pub probability: T,
    /// Normalized state on target ⊗ control.
    pub conditional_state: Vec<Complex<T>>,
}

/// Unnormalized (R2, C) amplitudes for each Bell outcome, from the circuit
/// run on |φ⟩ ⊗ (I⊗K)|Φ⟩ ⊗ (α|0⟩ + β|1⟩).
fn run_circuit<T: Real>(
    k: &ComplexMatrix<T>,
    psi: &[Complex<T>],
    ctrl: [Complex<T>; 2],
) -> Vec<Vec<Complex<T>>> {
    let d = psi.len();
    let idx = |s: usize, r1: usize, r2: usize, c: usize| ((s * d + r1) * d + r2) * 2 + c;
    let inv_sqrt_d = T::lit(d as f64).sqrt().recip();

    // preparation: (I⊗K)|Φ⟩ has amplitude K[r2, r1]/√d
    let mut state = vec![Complex::<T>::zero(); d * d * d * 2];
    for s in 0..d {
        for r1 in 0..d {
            for r2 in 0..d {
                let res = k[(r2, r1)] * inv_sqrt_d;
                for (c, a) in ctrl.iter().enumerate() {
                    state[idx(s, r1, r2, c)] = psi[s] * res * a;
                }
            }
        }
    }

    // controlled swap of R1 and R2
    let mut swapped = state.clone();
    for s in 0..d {
        for r1 in 0..d {
            for r2 in 0..d {
                swapped[idx(s, r1, r2, 1)] = state[idx(s, r2, r1, 1)];
            }
        }
    }

    // Bell measurement on (S, R1)
    (0..d * d)
        .map(|m| {
            let b = bell_state::<T>(d, m);
            let mut out = vec![Complex::zero(); 2 * d];
            for s in 0..d {
                for r1 in 0..d {
                    let w = b[s * d + r1].conj();
                    if w.is_zero() {
                        continue;
                    }
                    for r2 in 0..d {
                        for c in 0..2 {
                            out[r2 * 2 + c] += w * swapped[idx(s, r1, r2, c)];
                        }
                    }
                }
            }
            out
        })
        .collect()
}

fn check_unitary<T: Real>(u: &ComplexMatrix<T>) -> Result<()> {
    u.require_square()?;
    let dev = u.unitary_deviation();
    if dev > T::default_tol() * T::lit(10.0) {
        return Err(Error::NotUnitary(dev.as_f64()));
    }
    Ok(())
}

pub fn simulate_flip_circuit<T: Real>(
    u: &ComplexMatrix<T>,
    psi: &[Complex<T>],
    alpha: Complex<T>,
    beta: Complex<T>,
) -> Result<Vec<TeleportOutcome<T>>> {
    check_unitary(u)?;
    let d = u.rows();
    if psi.len() != d {
        return Err(Error::DimMismatch(format!(
            "state of length {} for a {d}-dim gate",
            psi.len()
        )));
    }
    let tol = T::lit(1e-9);
    let norm = alpha.norm_sqr() + beta.norm_sqr();
    if (norm - T::one()).abs() > tol {
        return Err(Error::InvalidArgument(format!("|alpha|²+|beta|² = {norm}")));
    }
    let n = vnorm(psi);
    if (n - T::one()).abs() > tol {
        return Err(Error::InvalidArgument(format!("target state has norm {n}")));
    }
    Ok(run_circuit(u, psi, [alpha, beta])
        .into_iter()
        .enumerate()
        .map(|(m, amp)| {
            let n = vnorm(&amp);
            TeleportOutcome {
                outcome_index: m,
                probability: n * n,
                conditional_state: amp.into_iter().map(|z| z / n).collect(),
            }
        })
        .collect())
}

/// The linear map (S, C) → (R2, C) of one Bell outcome, with the resource
/// built from `k`.
fn branch_operator<T: Real>(k: &ComplexMatrix<T>, m: usize) -> ComplexMatrix<T> {
    let d = k.rows();
    let mut op = ComplexMatrix::zeros(2 * d, 2 * d);
    for j in 0..d {
        let mut psi = vec![Complex::zero(); d];
        psi[j] = Complex::one();
        for c in 0..2 {
            let mut ctrl = [Complex::zero(); 2];
            ctrl[c] = Complex::one();
            let col = &run_circuit(k, &psi, ctrl)[m];
            for (row, z) in col.iter().enumerate() {
                op[(row, j * 2 + c)] = *z;
            }
        }
    }
    op
}

/// Channel heralded by outcome m = 0, renormalized by d². Each Kraus
/// operator of the input gives one branch of the resource.
pub fn postselected_channel_of<T: Real>(c: &Channel<T>) -> Result<Channel<T>> {
    c.require_bistochastic(T::default_tol())?;
    let d = T::lit(c.d_in() as f64);
    Channel::new(
        c.kraus()
            .iter()
            .map(|k| branch_operator(k, 0).scale_real(d))
            .collect(),
    )
}

pub fn postselected_channel<T: Real>(u: &ComplexMatrix<T>) -> Result<Channel<T>> {
    check_unitary(u)?;
    postselected_channel_of(&Channel::unitary(u)?)
}

/// The circuit with the measurement outcome discarded: all d² branches
/// together, unnormalized.
pub fn averaged_channel<T: Real>(u: &ComplexMatrix<T>) -> Result<Channel<T>> {
    check_unitary(u)?;
    let d = u.rows();
    Channel::new((0..d * d).map(|m| branch_operator(u, m)).collect())
}
