//! Dense complex linear algebra shared by every other module.

mod eigen;
mod matrix;
pub mod random;
mod subsystems;

pub use eigen::{
    cholesky, cholesky_real, cholesky_solve_real, eig_hermitian, eigvals_hermitian,
    forward_substitute, invert_lower, is_psd, max_eig, min_eig, pinv_hermitian, rank_hermitian,
    sqrt_psd, Eigen,
};
pub use matrix::{ket, kron, kron_all, kron_vec, normalize, vdistance, vdot, vnorm, ComplexMatrix};
pub use subsystems::{
    embed, partial_trace, partial_trace_systems, partial_transpose, partial_transpose_systems,
    permute_systems, permute_vector, reorder, SystemDims,
};

use num_complex::Complex;
use num_traits::One;

use crate::error::{Error, Result};
use crate::scalar::{cplx, Real};

/// |A⟩⟩ = Σ ⟨m|A|n⟩ |m⟩⊗|n⟩, i.e. the row-major entries of A.
pub fn double_ket<T: Real>(a: &ComplexMatrix<T>) -> Vec<Complex<T>> {
    a.data().to_vec()
}

/// Inverse of [`double_ket`] for a `rows`×`cols` operator.
pub fn unvec<T: Real>(v: &[Complex<T>], rows: usize, cols: usize) -> Result<ComplexMatrix<T>> {
    ComplexMatrix::from_vec(rows, cols, v.to_vec())
}

/// |A⟩⟩⟨⟨A|
pub fn double_ket_projector<T: Real>(a: &ComplexMatrix<T>) -> ComplexMatrix<T> {
    ComplexMatrix::projector(a.data())
}

/// SWAP(|φ⟩⊗|ψ⟩) = |ψ⟩⊗|φ⟩ on C^d ⊗ C^d.
pub fn swap_operator<T: Real>(d: usize) -> ComplexMatrix<T> {
    let mut s = ComplexMatrix::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            s[(j * d + i, i * d + j)] = Complex::one();
        }
    }
    s
}

/// E = |I⟩⟩⟨⟨I|/d
pub fn bell_projector<T: Real>(d: usize) -> ComplexMatrix<T> {
    double_ket_projector(&ComplexMatrix::identity(d)).scale_real(T::lit(d as f64).recip())
}

/// Integer square root for sizes that must be perfect squares.
pub fn exact_sqrt(n: usize) -> Result<usize> {
    let r = (n as f64).sqrt().round() as usize;
    if r * r == n {
        Ok(r)
    } else {
        Err(Error::DimMismatch(format!("{n} is not a perfect square")))
    }
}

/// Schmidt decomposition |ψ⟩ = Σ_k c_k |α_k⟩|β_k⟩ of a vector on C^d1 ⊗ C^d2.
/// Returns min(d1, d2) terms with descending coefficients; the α_k and β_k
/// are orthonormal even where c_k vanishes.
#[allow(clippy::type_complexity)]
pub fn schmidt<T: Real>(
    psi: &[Complex<T>],
    d1: usize,
    d2: usize,
) -> Result<Vec<(T, Vec<Complex<T>>, Vec<Complex<T>>)>> {
    if psi.len() != d1 * d2 {
        return Err(Error::DimMismatch(format!(
            "vector of length {} on {d1}x{d2}",
            psi.len()
        )));
    }
    let a = unvec(psi, d1, d2)?;
    let rho1 = a.matmul(&a.adjoint());
    let eig = eig_hermitian(&rho1)?;
    let tiny = T::epsilon().sqrt() * T::one().max(vnorm(psi));
    let r = d1.min(d2);
    let mut terms: Vec<(T, Vec<Complex<T>>, Vec<Complex<T>>)> = Vec::with_capacity(r);
    for k in 0..r {
        let c = eig.values[k].max(T::zero()).sqrt();
        let alpha = eig.vectors.column(k);
        let beta = if c > tiny {
            // β_k = (⟨α_k| ⊗ I)|ψ⟩ / c_k
            (0..d2)
                .map(|j| {
                    (0..d1)
                        .map(|i| alpha[i].conj() * a[(i, j)])
                        .sum::<Complex<T>>()
                        / c
                })
                .collect()
        } else {
            let mut found = None;
            for e in 0..d2 {
                let mut v = ket::<T>(d2, e);
                for (_, _, b) in &terms {
                    let ov = vdot(b, &v);
                    for (x, y) in v.iter_mut().zip(b) {
                        *x -= ov * y;
                    }
                }
                if vnorm(&v) > T::lit(0.5) {
                    found = Some(normalize(&v));
                    break;
                }
            }
            found.expect("orthonormal completion exists")
        };
        terms.push((c, alpha, beta));
    }
    Ok(terms)
}

/// The Pauli matrices.
pub mod pauli {
    use super::*;

    pub fn x<T: Real>() -> ComplexMatrix<T> {
        ComplexMatrix::real(2, 2, &[0.0, 1.0, 1.0, 0.0])
    }

    pub fn y<T: Real>() -> ComplexMatrix<T> {
        ComplexMatrix::complex(2, 2, &[(0.0, 0.0), (0.0, -1.0), (0.0, 1.0), (0.0, 0.0)])
    }

    pub fn z<T: Real>() -> ComplexMatrix<T> {
        ComplexMatrix::real(2, 2, &[1.0, 0.0, 0.0, -1.0])
    }

    pub fn h<T: Real>() -> ComplexMatrix<T> {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        ComplexMatrix::real(2, 2, &[s, s, s, -s])
    }
}

/// Cyclic shift X|j⟩ = |j+1 mod d⟩.
pub fn shift<T: Real>(d: usize) -> ComplexMatrix<T> {
    let mut m = ComplexMatrix::zeros(d, d);
    for j in 0..d {
        m[((j + 1) % d, j)] = Complex::one();
    }
    m
}

/// Clock Z|j⟩ = ω^j |j⟩ with ω = e^{2πi/d}.
pub fn clock<T: Real>(d: usize) -> ComplexMatrix<T> {
    let entries: Vec<Complex<T>> = (0..d)
        .map(|j| {
            let th = 2.0 * std::f64::consts::PI * j as f64 / d as f64;
            cplx(th.cos(), th.sin())
        })
        .collect();
    ComplexMatrix::diag(&entries)
}

/// X^a Z^b
pub fn weyl<T: Real>(d: usize, a: usize, b: usize) -> ComplexMatrix<T> {
    let mut m = ComplexMatrix::zeros(d, d);
    for j in 0..d {
        let th = 2.0 * std::f64::consts::PI * ((j * b) % d) as f64 / d as f64;
        m[((j + a) % d, j)] = cplx(th.cos(), th.sin());
    }
    m
}
