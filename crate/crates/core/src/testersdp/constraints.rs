//! Affine constraints on testers T over (A_i, A_o, B_i, B_o):
//!
//! (i)   T = [I_{A_o}⊗Tr_{A_o}T + I_{B_o}⊗Tr_{B_o}T]/d − I_{A_oB_o}⊗Tr_{A_oB_o}T/d²
//! (ii)  Tr_{A_iA_o}T = I_{B_o}⊗Tr_{A_iA_oB_o}T/d
//! (iii) Tr_{B_iB_o}T = I_{A_o}⊗Tr_{A_oB_iB_o}T/d
//! (iv)  Tr T = d²
//!
//! The homogeneous parts are written as self-adjoint maps R_f, so the span
//! of their images is the orthogonal complement of the valid subspace.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{kron_all, partial_trace_systems, permute_systems, ComplexMatrix};
use crate::scalar::{cplx, re, Real};

pub const A_IN: usize = 0;
pub const A_OUT: usize = 1;
pub const B_IN: usize = 2;
pub const B_OUT: usize = 3;

/// I_S ⊗ Tr_S(m), with the identity put back on the traced factors.
pub fn trace_replace<T: Real>(
    m: &ComplexMatrix<T>,
    dims: &[usize],
    systems: &[usize],
) -> Result<ComplexMatrix<T>> {
    let reduced = partial_trace_systems(m, dims, systems)?;
    let s_dim: usize = systems.iter().map(|&k| dims[k]).product();
    let full = kron_all(&[&ComplexMatrix::identity(s_dim), &reduced]);
    let kept: Vec<usize> = (0..dims.len()).filter(|k| !systems.contains(k)).collect();
    let mut current: Vec<usize> = systems.to_vec();
    current.extend(&kept);
    let cur_dims: Vec<usize> = current.iter().map(|&k| dims[k]).collect();
    let order: Vec<usize> = (0..dims.len())
        .map(|k| current.iter().position(|&c| c == k).unwrap())
        .collect();
    permute_systems(&full, &cur_dims, &order)
}

/// Self-adjoint residual map of family `f` ∈ {0, 1, 2}.
pub fn residual_map<T: Real>(t: &ComplexMatrix<T>, d: usize, f: usize) -> Result<ComplexMatrix<T>> {
    let dims = [d; 4];
    let inv_d = T::lit(d as f64).recip();
    Ok(match f {
        0 => {
            let a = trace_replace(t, &dims, &[A_OUT])?;
            let b = trace_replace(t, &dims, &[B_OUT])?;
            let ab = trace_replace(t, &dims, &[A_OUT, B_OUT])?;
            t.clone() - (a + b).scale_real(inv_d) + ab.scale_real(inv_d * inv_d)
        }
        1 => {
            trace_replace(t, &dims, &[A_IN, A_OUT])?
                - trace_replace(t, &dims, &[A_IN, A_OUT, B_OUT])?.scale_real(inv_d)
        }
        2 => {
            trace_replace(t, &dims, &[B_IN, B_OUT])?
                - trace_replace(t, &dims, &[A_OUT, B_IN, B_OUT])?.scale_real(inv_d)
        }
        _ => return Err(Error::InvalidArgument(format!("constraint family {f}"))),
    })
}

/// Frobenius norms of the violations of (i)-(iv), each in its own space.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstraintResiduals {
    pub i: f64,
    pub ii: f64,
    pub iii: f64,
    pub iv: f64,
}

impl ConstraintResiduals {
    pub fn max(&self) -> f64 {
        self.i.max(self.ii).max(self.iii).max(self.iv)
    }
}

pub fn constraint_residuals<T: Real>(
    t: &ComplexMatrix<T>,
    d: usize,
) -> Result<ConstraintResiduals> {
    let n = d.pow(4);
    if t.shape() != (n, n) {
        return Err(Error::DimMismatch(format!(
            "tester of shape {:?} for d = {d}",
            t.shape()
        )));
    }
    let dims = [d; 4];
    let inv_d = T::lit(d as f64).recip();
    let id = ComplexMatrix::<T>::identity(d);
    // reduced operators live on (X_i, X_o); the identity sits on X_o
    let ii = partial_trace_systems(t, &dims, &[A_IN, A_OUT])?
        - partial_trace_systems(t, &dims, &[A_IN, A_OUT, B_OUT])?
            .kron(&id)
            .scale_real(inv_d);
    let r = partial_trace_systems(t, &dims, &[A_OUT, B_IN, B_OUT])?;
    let iii = partial_trace_systems(t, &dims, &[B_IN, B_OUT])? - r.kron(&id).scale_real(inv_d);
    Ok(ConstraintResiduals {
        i: residual_map(t, d, 0)?.frobenius_norm().as_f64(),
        ii: ii.frobenius_norm().as_f64(),
        iii: iii.frobenius_norm().as_f64(),
        iv: (t.trace().re - T::lit((d * d) as f64)).abs().as_f64() + t.trace().im.abs().as_f64(),
    })
}

/// Orthonormal basis of n×n Hermitian matrices under Re Tr(A B).
pub fn hermitian_basis<T: Real>(n: usize) -> Vec<ComplexMatrix<T>> {
    let s = T::lit(0.5f64.sqrt());
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        let mut e = ComplexMatrix::zeros(n, n);
        e[(i, i)] = re(T::one());
        out.push(e);
        for j in i + 1..n {
            let mut a = ComplexMatrix::zeros(n, n);
            a[(i, j)] = re(s);
            a[(j, i)] = re(s);
            out.push(a);
            let mut b = ComplexMatrix::zeros(n, n);
            b[(i, j)] = cplx::<T>(0.0, 1.0) * s;
            b[(j, i)] = cplx::<T>(0.0, -1.0) * s;
            out.push(b);
        }
    }
    out
}

fn real_inner<T: Real>(a: &ComplexMatrix<T>, b: &ComplexMatrix<T>) -> T {
    a.data()
        .iter()
        .zip(b.data())
        .map(|(x, y)| x.re * y.re + x.im * y.im)
        .sum()
}

/// The tester constraint set as orthonormal Hermitian functionals:
/// ⟨G_k, T⟩ = 0 for the homogeneous families and ⟨I/d², T⟩ = 1 for the
/// trace.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct TesterConstraints<T: Real> {
    pub d: usize,
    /// Orthonormal G_k, grouped by family (i), (ii), (iii).
    pub basis: Vec<ComplexMatrix<T>>,
    /// Number of new independent rows contributed by each family, in order.
    pub family_ranks: [usize; 3],
}

impl<T: Real> TesterConstraints<T> {
    pub fn dim(&self) -> usize {
        self.d.pow(4)
    }

    /// Dimension of the space of Hermitian T satisfying (i)-(iii).
    pub fn valid_dimension(&self) -> usize {
        self.dim() * self.dim() - self.basis.len()
    }

    /// The normalized trace functional and its right-hand side.
    pub fn trace_row(&self) -> (ComplexMatrix<T>, T) {
        let n = self.dim();
        let norm = T::lit(n as f64).sqrt();
        (
            ComplexMatrix::identity(n).scale_real(norm.recip()),
            T::lit((self.d * self.d) as f64) / norm,
        )
    }

    /// Orthogonal projection onto the affine set (i)-(iv).
    pub fn project(&self, t: &ComplexMatrix<T>) -> ComplexMatrix<T> {
        let mut out = t.hermitian_part();
        for g in &self.basis {
            let c = real_inner(g, &out);
            out = out - g.scale_real(c);
        }
        let n = self.dim();
        let shift = (T::lit((self.d * self.d) as f64) - out.trace().re) / T::lit(n as f64);
        out + ComplexMatrix::identity(n).scale_real(shift)
    }

    pub fn residuals(&self, t: &ComplexMatrix<T>) -> Result<ConstraintResiduals> {
        constraint_residuals(t, self.d)
    }
}

/// Builds the constraint functionals by Gram-Schmidt over the images of a
/// Hermitian basis under the residual maps.
pub fn tester_constraints<T: Real>(d: usize) -> Result<TesterConstraints<T>> {
    // the dense Gram-Schmidt is O(d^16); only qubits are practical
    if d != 2 {
        return Err(Error::Unsupported(format!(
            "tester constraints for d = {d} (supported: 2)"
        )));
    }
    let n = d.pow(4);
    let herm = hermitian_basis::<T>(n);
    let mut basis: Vec<ComplexMatrix<T>> = Vec::new();
    let mut family_ranks = [0usize; 3];
    let tol = T::lit(1e-8);
    for (f, rank) in family_ranks.iter_mut().enumerate() {
        for h in &herm {
            let img = residual_map(h, d, f)?.hermitian_part();
            let scale = img.frobenius_norm();
            if scale <= tol {
                continue;
            }
            let mut v = img;
            for _pass in 0..2 {
                for g in &basis {
                    let c = real_inner(g, &v);
                    v = v - g.scale_real(c);
                }
            }
            let r = v.frobenius_norm();
            if r > tol * scale {
                basis.push(v.scale_real(r.recip()));
                *rank += 1;
            }
        }
    }
    Ok(TesterConstraints {
        d,
        basis,
        family_ranks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use crate::linalg::random;

    #[test]
    fn trace_replace_matches_direct_formula() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let m = random::random_hermitian::<f64, _>(8, &mut rng);
        let dims = [2, 2, 2];
        // middle factor: compare entrywise with δ_{bb'} Σ_c m[(a,c,e),(a',c,e')]
        let r = trace_replace(&m, &dims, &[1]).unwrap();
        for a in 0..2 {
            for b in 0..2 {
                for e in 0..2 {
                    for ap in 0..2 {
                        for bp in 0..2 {
                            for ep in 0..2 {
                                let want = if b == bp {
                                    (0..2)
                                        .map(|c| m[(a * 4 + c * 2 + e, ap * 4 + c * 2 + ep)])
                                        .sum()
                                } else {
                                    num_complex::Complex::new(0.0, 0.0)
                                };
                                let got = r[(a * 4 + b * 2 + e, ap * 4 + bp * 2 + ep)];
                                assert!((got - want).norm() < 1e-12);
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn residual_maps_are_self_adjoint() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = random::random_hermitian::<f64, _>(16, &mut rng);
        let b = random::random_hermitian::<f64, _>(16, &mut rng);
        for f in 0..3 {
            let lhs = real_inner(&residual_map(&a, 2, f).unwrap(), &b);
            let rhs = real_inner(&a, &residual_map(&b, 2, f).unwrap());
            assert!((lhs - rhs).abs() < 1e-10, "family {f}");
        }
    }

    #[test]
    fn qubit_constraint_counts() {
        let c = tester_constraints::<f64>(2).unwrap();
        assert_eq!(c.basis.len(), 168);
        assert_eq!(c.valid_dimension(), 88);
        assert_eq!(c.family_ranks.iter().sum::<usize>(), 168);
        for (i, g) in c.basis.iter().enumerate().step_by(7) {
            assert!(g.hermitian_deviation() < 1e-12);
            for h in c.basis.iter().skip(i) {
                let want = if std::ptr::eq(g, h) { 1.0 } else { 0.0 };
                assert!((real_inner(g, h) - want).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn uniform_tester_is_valid_and_scaling_is_not() {
        let t = ComplexMatrix::<f64>::identity(16).scale_real(0.25);
        let r = constraint_residuals(&t, 2).unwrap();
        assert!(r.max() <= 1e-12, "{r:?}");
        let r = constraint_residuals(&t.scale_real(1.1), 2).unwrap();
        assert!((r.iv - 0.4).abs() < 1e-12);
        assert!(r.i < 1e-12 && r.ii < 1e-12 && r.iii < 1e-12);
    }

    #[test]
    fn projection_lands_in_the_affine_set() {
        let c = tester_constraints::<f64>(2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let h = random::random_hermitian::<f64, _>(16, &mut rng);
        let p = c.project(&h);
        assert!(c.residuals(&p).unwrap().max() < 1e-10);
        // idempotent
        assert!(c.project(&p).distance(&p) < 1e-10);
        // functionals vanish on the projection exactly when (i)-(iii) hold
        for g in &c.basis {
            assert!(real_inner(g, &p).abs() < 1e-10);
        }
    }
}
