//! Seeded random operators for tests and Monte Carlo checks.

use num_complex::Complex;
use num_traits::Zero;
use rand::Rng;
use rand_distr::StandardNormal;

use super::matrix::{vnorm, ComplexMatrix};
use crate::scalar::Real;

/// Standard complex Gaussian with E|z|² = 1.
pub fn gaussian_complex<T: Real, R: Rng + ?Sized>(rng: &mut R) -> Complex<T> {
    let a: f64 = rng.sample(StandardNormal);
    let b: f64 = rng.sample(StandardNormal);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    Complex::new(T::lit(a * s), T::lit(b * s))
}

pub fn ginibre<T: Real, R: Rng + ?Sized>(
    rows: usize,
    cols: usize,
    rng: &mut R,
) -> ComplexMatrix<T> {
    ComplexMatrix::from_fn(rows, cols, |_, _| gaussian_complex(rng))
}

pub fn random_state<T: Real, R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<Complex<T>> {
    let v: Vec<Complex<T>> = (0..d).map(|_| gaussian_complex(rng)).collect();
    let n = vnorm(&v);
    v.into_iter().map(|z| z / n).collect()
}

/// Haar-distributed unitary: QR of a Ginibre matrix with R's diagonal made
/// positive (Gram–Schmidt produces exactly that normalization).
pub fn haar_unitary<T: Real, R: Rng + ?Sized>(d: usize, rng: &mut R) -> ComplexMatrix<T> {
    let g = ginibre::<T, R>(d, d, rng);
    let mut q: Vec<Vec<Complex<T>>> = Vec::with_capacity(d);
    for j in 0..d {
        let mut v = g.column(j);
        // two passes of modified Gram–Schmidt for orthogonality to working precision
        for _ in 0..2 {
            for u in &q {
                let c: Complex<T> = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                for (x, y) in v.iter_mut().zip(u) {
                    *x -= c * y;
                }
            }
        }
        let n = vnorm(&v);
        q.push(v.into_iter().map(|z| z / n).collect());
    }
    ComplexMatrix::from_columns(&q).expect("square")
}

/// Haar unitary rescaled to unit determinant.
pub fn haar_special_unitary<T: Real, R: Rng + ?Sized>(d: usize, rng: &mut R) -> ComplexMatrix<T> {
    let u = haar_unitary::<T, R>(d, rng);
    let det = determinant(&u);
    let root = Complex::from_polar(T::one(), -det.arg() / T::lit(d as f64));
    u.scale(root)
}

/// Determinant by Gaussian elimination with partial pivoting.
pub fn determinant<T: Real>(m: &ComplexMatrix<T>) -> Complex<T> {
    let n = m.rows();
    assert!(m.is_square(), "determinant of a non-square matrix");
    let mut a = m.data().to_vec();
    let mut det = Complex::new(T::one(), T::zero());
    for k in 0..n {
        let p = (k..n)
            .max_by(|&i, &j| {
                a[i * n + k]
                    .norm()
                    .partial_cmp(&a[j * n + k].norm())
                    .unwrap()
            })
            .unwrap();
        if a[p * n + k].is_zero() {
            return Complex::zero();
        }
        if p != k {
            for j in 0..n {
                a.swap(k * n + j, p * n + j);
            }
            det = -det;
        }
        let piv = a[k * n + k];
        det *= piv;
        for i in k + 1..n {
            let f = a[i * n + k] / piv;
            for j in k..n {
                let t = a[k * n + j];
                a[i * n + j] -= f * t;
            }
        }
    }
    det
}

/// G G† / Tr for a d×rank Ginibre G.
pub fn random_density<T: Real, R: Rng + ?Sized>(
    d: usize,
    rank: usize,
    rng: &mut R,
) -> ComplexMatrix<T> {
    let g = ginibre::<T, R>(d, rank, rng);
    let rho = g.matmul(&g.adjoint());
    let tr = rho.trace().re;
    rho.scale_real(tr.recip()).hermitian_part()
}

/// (G + G†)/2 for a Ginibre G.
pub fn random_hermitian<T: Real, R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexMatrix<T> {
    ginibre::<T, R>(n, n, rng).hermitian_part()
}
