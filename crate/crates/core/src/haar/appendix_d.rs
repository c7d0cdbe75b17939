//! Operator inequalities bounding the fidelity Tr[SΩ] of two-copy
//! strategies that try to turn U ⊗ U into Uᵀ in a definite time direction:
//! 5/6 for qubits and 6/d² in general.

use serde::{Deserialize, Serialize};

use super::frame::{omega_operator, TwirlMethod};
use super::isotypic::isotypic_projectors;
use crate::error::{Error, Result};
use crate::linalg::{
    kron_all, min_eig, partial_trace_systems, permute_systems, swap_operator, ComplexMatrix,
};
use crate::scalar::Real;

/// Weight of the Q-projectors in the qubit states ρ±.
pub const QUBIT_ALPHA: f64 = 0.6;
pub const QUBIT_BOUND: f64 = 5.0 / 6.0;

pub fn general_bound(d: usize) -> f64 {
    6.0 / (d * d) as f64
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QubitInequalityReport {
    pub alpha: f64,
    /// min_eig(Choi_N ⊗ I_{C_o} − (6/5) Ω)
    pub min_eig: f64,
    /// ‖Tr_{A_o}ρ₊ − Tr_{A_o}ρ₋‖_F
    pub marginal_distance_bc: f64,
    /// ‖Tr_{B_o}ρ₊ − Tr_{B_o}ρ₋‖_F
    pub marginal_distance_ac: f64,
    pub trace_rho_plus: f64,
    pub trace_rho_minus: f64,
    pub tolerance: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IsotypicInequalityReport {
    pub d: usize,
    pub bound: f64,
    /// min_eig((6/d²) ρ ⊗ I_{A_i B_i C_o} − Ω)
    pub min_eig: f64,
    pub trace_rho: f64,
    pub ranks: [usize; 3],
    pub tolerance: f64,
    pub holds: bool,
}

/// Q± = Σ_n |Φ±_n⟩⟨Φ±_n| on (A_o, B_o, C_i) with
/// |Φ±_n⟩ = (|n⟩|I⟩⟩_{B_o C_i} ± |I⟩⟩_{A_o C_i}|n⟩)/√(2(d±1)).
pub fn q_projector<T: Real>(d: usize, plus: bool) -> ComplexMatrix<T> {
    let sign = if plus { T::one() } else { -T::one() };
    let norm = T::lit(2.0 * (d as f64 + if plus { 1.0 } else { -1.0 }))
        .sqrt()
        .recip();
    let n3 = d * d * d;
    let mut q = ComplexMatrix::zeros(n3, n3);
    for n in 0..d {
        let mut v = vec![num_complex::Complex::new(T::zero(), T::zero()); n3];
        for a in 0..d {
            for b in 0..d {
                for c in 0..d {
                    let mut x = T::zero();
                    if a == n && b == c {
                        x += T::one();
                    }
                    if a == c && b == n {
                        x += sign;
                    }
                    v[(a * d + b) * d + c] = num_complex::Complex::new(x * norm, T::zero());
                }
            }
        }
        q += &ComplexMatrix::projector(&v);
    }
    q
}

/// Projectors (I ± SWAP)/2 on two copies of C^d.
pub fn sym_antisym<T: Real>(d: usize) -> (ComplexMatrix<T>, ComplexMatrix<T>) {
    let id = ComplexMatrix::<T>::identity(d * d);
    let sw = swap_operator::<T>(d);
    let half = T::lit(0.5);
    (
        (id.clone() + sw.clone()).scale_real(half),
        (id - sw).scale_real(half),
    )
}

/// The states ρ₊, ρ₋ on (A_o, B_o, C_i) for qubits.
pub fn qubit_states<T: Real>(alpha: T) -> (ComplexMatrix<T>, ComplexMatrix<T>) {
    let d = 2;
    let qp = q_projector::<T>(d, true);
    let qm = q_projector::<T>(d, false);
    let (p_plus, _) = sym_antisym::<T>(d);
    let q_perp = p_plus.kron(&ComplexMatrix::identity(d)) - qp.clone();
    let one = T::one();
    let half = T::lit(0.5);
    let rho_p = qp.scale_real(alpha * half) + q_perp.scale_real((one - alpha) * T::lit(0.25));
    let rho_m = qm.scale_real(alpha * half) + qp.scale_real((one - alpha) * half);
    (rho_p, rho_m)
}

/// Choi operator of N: ρ ↦ Tr[P₊ρ]ρ₊ + Tr[P₋ρ]ρ₋, on (A_i, B_i, A_o, B_o, C_i).
pub fn qubit_measure_prepare_choi<T: Real>(alpha: T) -> ComplexMatrix<T> {
    let (rho_p, rho_m) = qubit_states(alpha);
    let (p_plus, p_minus) = sym_antisym::<T>(2);
    p_plus.kron(&rho_p) + p_minus.kron(&rho_m)
}

pub fn appendix_d_inequality_d2<T: Real>(tol: T) -> Result<QubitInequalityReport> {
    let d = 2;
    let alpha = T::lit(QUBIT_ALPHA);
    let (rho_p, rho_m) = qubit_states(alpha);
    let marg = |r: &ComplexMatrix<T>, k: usize| partial_trace_systems(r, &[d, d, d], &[k]);
    let dist_bc = marg(&rho_p, 0)?.distance(&marg(&rho_m, 0)?);
    let dist_ac = marg(&rho_p, 1)?.distance(&marg(&rho_m, 1)?);

    let choi = qubit_measure_prepare_choi(alpha).kron(&ComplexMatrix::identity(d));
    // (A_i, B_i, A_o, B_o, C_i, C_o) -> (A_i, A_o, B_i, B_o, C_i, C_o)
    let choi = permute_systems(&choi, &[d; 6], &[0, 2, 1, 3, 4, 5])?;
    let omega = omega_operator::<T>(d, TwirlMethod::Design)?;
    let gap = choi - omega.scale_real(T::lit(6.0 / 5.0));
    let m = min_eig(&gap.hermitian_part())?;
    Ok(QubitInequalityReport {
        alpha: QUBIT_ALPHA,
        min_eig: m.as_f64(),
        marginal_distance_bc: dist_bc.as_f64(),
        marginal_distance_ac: dist_ac.as_f64(),
        trace_rho_plus: rho_p.trace().re.as_f64(),
        trace_rho_minus: rho_m.trace().re.as_f64(),
        tolerance: tol.as_f64(),
        holds: m >= -tol,
    })
}

/// ρ = (1/6) Σ_j m_j P_j ⊗ I_{M_j} / d_j on (A_o, B_o, C_i).
pub fn isotypic_state<T: Real>(d: usize) -> Result<(ComplexMatrix<T>, [usize; 3])> {
    let p = isotypic_projectors::<T>(d)?;
    let dims = p.irrep_dims();
    let mult = p.multiplicities();
    let n = d * d * d;
    let mut rho = ComplexMatrix::zeros(n, n);
    for (k, proj) in p.projectors().into_iter().enumerate() {
        if dims[k] == 0 {
            continue;
        }
        rho += &proj.scale_real(T::lit(mult[k] as f64 / (6 * dims[k]) as f64));
    }
    Ok((rho, p.ranks()))
}

/// The 6/d² inequality, for d = 3 (and d = 2 as a consistency run, where
/// the antisymmetric block is empty and ρ has trace 5/6).
pub fn appendix_d_inequality_isotypic<T: Real>(
    d: usize,
    tol: T,
) -> Result<IsotypicInequalityReport> {
    if !(2..=3).contains(&d) {
        return Err(Error::Unsupported(format!(
            "isotypic inequality for d = {d}"
        )));
    }
    let (rho, ranks) = isotypic_state::<T>(d)?;
    let bound = general_bound(d);
    let lhs = kron_all(&[
        &rho.scale_real(T::lit(bound)),
        &ComplexMatrix::identity(d * d * d),
    ]);
    // (A_o, B_o, C_i, A_i, B_i, C_o) -> (A_i, A_o, B_i, B_o, C_i, C_o)
    let lhs = permute_systems(&lhs, &[d; 6], &[3, 0, 4, 1, 2, 5])?;
    let method = if d == 2 {
        TwirlMethod::Design
    } else {
        TwirlMethod::Weingarten
    };
    let omega = omega_operator::<T>(d, method)?;
    let m = min_eig(&(lhs - omega).hermitian_part())?;
    Ok(IsotypicInequalityReport {
        d,
        bound,
        min_eig: m.as_f64(),
        trace_rho: rho.trace().re.as_f64(),
        ranks,
        tolerance: tol.as_f64(),
        holds: m >= -tol,
    })
}

pub fn appendix_d_inequality_d3<T: Real>(tol: T) -> Result<IsotypicInequalityReport> {
    appendix_d_inequality_isotypic(3, tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn q_projectors_are_rank_d_projectors() {
        for plus in [true, false] {
            let q = q_projector::<f64>(2, plus);
            assert!(q.matmul(&q).distance(&q) < 1e-12);
            assert!((q.trace().re - 2.0).abs() < 1e-12);
        }
        // Q₊ sits inside the symmetric subspace of A_o B_o
        let (p_plus, _) = sym_antisym::<f64>(2);
        let big = p_plus.kron(&ComplexMatrix::identity(2));
        let q = q_projector::<f64>(2, true);
        assert!(big.matmul(&q).distance(&q) < 1e-12);
    }

    #[test]
    fn qubit_inequality_holds() {
        let rep = appendix_d_inequality_d2::<f64>(1e-9).unwrap();
        assert!(rep.holds, "{rep:?}");
        assert!(rep.marginal_distance_bc < 1e-12);
        assert!(rep.marginal_distance_ac < 1e-12);
        assert!((rep.trace_rho_plus - 1.0).abs() < 1e-12);
        assert!((rep.trace_rho_minus - 1.0).abs() < 1e-12);
        // both states are positive
        let (p, m) = qubit_states(0.6f64);
        assert!(min_eig(&p).unwrap() > -1e-12 && min_eig(&m).unwrap() > -1e-12);
    }

    #[test]
    fn qubit_inequality_is_tight_in_alpha() {
        // a larger multiple of Ω breaks the inequality
        let d = 2;
        let choi = qubit_measure_prepare_choi(0.6f64).kron(&ComplexMatrix::identity(d));
        let choi = permute_systems(&choi, &[d; 6], &[0, 2, 1, 3, 4, 5]).unwrap();
        let omega = omega_operator::<f64>(d, TwirlMethod::Design).unwrap();
        let gap = choi - omega.scale_real(1.3);
        assert!(min_eig(&gap.hermitian_part()).unwrap() < -1e-6);
    }

    #[test]
    fn isotypic_inequality_d2_consistency() {
        let rep = appendix_d_inequality_isotypic::<f64>(2, 1e-9).unwrap();
        assert!(rep.holds, "{rep:?}");
        assert!((rep.trace_rho - 5.0 / 6.0).abs() < 1e-10);
    }

    #[test]
    fn isotypic_inequality_d3() {
        let rep = appendix_d_inequality_d3::<f64>(1e-8).unwrap();
        assert!(rep.holds, "{rep:?}");
        assert!((rep.trace_rho - 1.0).abs() < 1e-10);
        assert_eq!(rep.ranks, [6, 15, 6]);
    }
}
