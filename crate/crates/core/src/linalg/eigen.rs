//! Hermitian eigendecomposition and the factorizations built on it.
//!
//! The matrix is reduced to real symmetric tridiagonal form by complex
//! Householder reflections followed by a diagonal phase change, and the
//! tridiagonal problem is solved by implicit QL iteration.

use num_complex::Complex;
use num_traits::{One, Zero};

use super::matrix::ComplexMatrix;
use crate::error::{Error, Result};
use crate::scalar::{re, Real};

/// Eigenvalues in descending order with matching orthonormal eigenvector
/// columns.
#[derive(Clone, Debug)]
pub struct Eigen<T: Real> {
    pub values: Vec<T>,
    pub vectors: ComplexMatrix<T>,
}

impl<T: Real> Eigen<T> {
    /// V diag(f(λ)) V†
    pub fn reconstruct_with(&self, f: impl Fn(T) -> T) -> ComplexMatrix<T> {
        let n = self.values.len();
        let v = &self.vectors;
        let fl: Vec<T> = self.values.iter().map(|&x| f(x)).collect();
        let mut out = ComplexMatrix::zeros(n, n);
        for k in 0..n {
            if fl[k].is_zero() {
                continue;
            }
            let col = v.column(k);
            for i in 0..n {
                let a = col[i] * fl[k];
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    out[(i, j)] += a * col[j].conj();
                }
            }
        }
        out
    }

    pub fn reconstruct(&self) -> ComplexMatrix<T> {
        self.reconstruct_with(|x| x)
    }
}

fn check_hermitian<T: Real>(m: &ComplexMatrix<T>) -> Result<()> {
    m.require_square()?;
    let dev = m.hermitian_deviation();
    let scale = T::one().max(m.frobenius_norm());
    if !(dev <= T::default_tol() * scale) {
        return Err(Error::NotHermitian(dev.as_f64()));
    }
    Ok(())
}

/// Householder reduction of a Hermitian matrix. Returns the real diagonal,
/// the real (nonnegative) subdiagonal and, if requested, the unitary W with
/// m = W T W†.
fn tridiagonalize<T: Real>(
    m: &ComplexMatrix<T>,
    want_vectors: bool,
) -> (Vec<T>, Vec<T>, Option<ComplexMatrix<T>>) {
    let n = m.rows();
    let mut a = m.hermitian_part().into_data();
    let mut reflectors: Vec<Vec<Complex<T>>> = Vec::with_capacity(n.saturating_sub(2));
    let two = T::lit(2.0);

    for k in 0..n.saturating_sub(2) {
        let len = n - k - 1;
        let x: Vec<Complex<T>> = (0..len).map(|i| a[(k + 1 + i) * n + k]).collect();
        let alpha = x.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
        let tail = x[1..].iter().map(|z| z.norm_sqr()).sum::<T>();
        if alpha.is_zero() || tail <= T::epsilon() * T::epsilon() * alpha * alpha {
            reflectors.push(Vec::new());
            continue;
        }
        let phase = if x[0].norm().is_zero() {
            Complex::one()
        } else {
            x[0] / x[0].norm()
        };
        let mut v = x.clone();
        v[0] += phase * alpha;
        let vn = v.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
        for z in v.iter_mut() {
            *z /= vn;
        }
        // p = A22 v, K = v†p, q = p − K v, A22 -= 2(v q† + q v†)
        let off = k + 1;
        let mut p = vec![Complex::zero(); len];
        for i in 0..len {
            let row = &a[(off + i) * n + off..(off + i) * n + n];
            p[i] = row.iter().zip(&v).map(|(x, y)| x * y).sum();
        }
        let kk: Complex<T> = v.iter().zip(&p).map(|(x, y)| x.conj() * y).sum();
        let q: Vec<Complex<T>> = p.iter().zip(&v).map(|(pi, vi)| pi - vi * kk.re).collect();
        for i in 0..len {
            let row = &mut a[(off + i) * n + off..(off + i) * n + n];
            for j in 0..len {
                row[j] -= (v[i] * q[j].conj() + q[i] * v[j].conj()) * two;
            }
        }
        let sub = -phase * alpha;
        a[off * n + k] = sub;
        a[k * n + off] = sub.conj();
        for i in 1..len {
            a[(off + i) * n + k] = Complex::zero();
            a[k * n + off + i] = Complex::zero();
        }
        reflectors.push(v);
    }

    let diag: Vec<T> = (0..n).map(|i| a[i * n + i].re).collect();
    let sub: Vec<Complex<T>> = (0..n.saturating_sub(1))
        .map(|i| a[(i + 1) * n + i])
        .collect();

    // Phases φ with conj(φ_{i+1}) e_i φ_i = |e_i| make the tridiagonal real.
    let mut phases = vec![Complex::<T>::one(); n];
    let mut e = vec![T::zero(); n];
    for i in 0..sub.len() {
        let r = sub[i].norm();
        e[i] = r;
        phases[i + 1] = if r.is_zero() {
            phases[i]
        } else {
            phases[i] * sub[i] / r
        };
    }

    if !want_vectors {
        return (diag, e, None);
    }

    // W = H_0 H_1 ... H_{n-3} D
    let mut w = ComplexMatrix::<T>::identity(n);
    for (k, v) in reflectors.iter().enumerate().rev() {
        if v.is_empty() {
            continue;
        }
        let off = k + 1;
        let data = w.data_mut();
        // rows off.. of W get (I − 2vv†) applied from the left
        let mut s = vec![Complex::<T>::zero(); n];
        for (i, vi) in v.iter().enumerate() {
            let row = &data[(off + i) * n..(off + i + 1) * n];
            let c = vi.conj();
            for (sj, x) in s.iter_mut().zip(row) {
                *sj += c * x;
            }
        }
        for (i, vi) in v.iter().enumerate() {
            let row = &mut data[(off + i) * n..(off + i + 1) * n];
            let c = vi * two;
            for (x, sj) in row.iter_mut().zip(&s) {
                *x -= c * sj;
            }
        }
    }
    let data = w.data_mut();
    for i in 0..n {
        for j in 0..n {
            data[i * n + j] *= phases[j];
        }
    }
    (diag, e, Some(w))
}

/// Implicit QL on a real symmetric tridiagonal matrix (diagonal `d`,
/// subdiagonal `e` with `e[i]` coupling `i` and `i+1`). When `zt` is given,
/// its rows accumulate the eigenvectors.
fn tql2<T: Real>(d: &mut [T], e: &mut [T], mut zt: Option<&mut [Vec<T>]>) -> Result<()> {
    let n = d.len();
    if n == 0 {
        return Ok(());
    }
    e[n - 1] = T::zero();
    let eps = T::epsilon();
    let mut f = T::zero();
    let mut tst1 = T::zero();
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 && e[m].abs() > eps * tst1 {
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > 64 {
                    return Err(Error::NoConvergence);
                }
                let g = d[l];
                let mut p = (d[l + 1] - g) / (e[l] * T::lit(2.0));
                let mut r = p.hypot(T::one());
                if p < T::zero() {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = T::one();
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = T::zero();
                let mut s2 = T::zero();
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    if let Some(z) = zt.as_deref_mut() {
                        let (lo, hi) = z.split_at_mut(i + 1);
                        let zi = &mut lo[i];
                        let zi1 = &mut hi[0];
                        for k in 0..n {
                            let h = zi1[k];
                            zi1[k] = s * zi[k] + c * h;
                            zi[k] = c * zi[k] - s * h;
                        }
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = T::zero();
    }
    Ok(())
}

/// Full eigendecomposition of a Hermitian matrix.
pub fn eig_hermitian<T: Real>(m: &ComplexMatrix<T>) -> Result<Eigen<T>> {
    check_hermitian(m)?;
    let n = m.rows();
    let (mut d, mut e, w) = tridiagonalize(m, true);
    let w = w.expect("vectors requested");
    let mut zt: Vec<Vec<T>> = (0..n)
        .map(|i| {
            let mut r = vec![T::zero(); n];
            r[i] = T::one();
            r
        })
        .collect();
    tql2(&mut d, &mut e, Some(&mut zt))?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[j].partial_cmp(&d[i]).unwrap_or(std::cmp::Ordering::Equal));
    let values = order.iter().map(|&i| d[i]).collect();
    // V[:, k] = W z_{order[k]}
    let wd = w.data();
    let mut vectors = ComplexMatrix::zeros(n, n);
    let vd = vectors.data_mut();
    for i in 0..n {
        let wrow = &wd[i * n..(i + 1) * n];
        for (k, &src) in order.iter().enumerate() {
            let z = &zt[src];
            let mut acc = Complex::zero();
            for (a, &b) in wrow.iter().zip(z) {
                acc += a * b;
            }
            vd[i * n + k] = acc;
        }
    }
    Ok(Eigen { values, vectors })
}

/// Eigenvalues only, descending.
pub fn eigvals_hermitian<T: Real>(m: &ComplexMatrix<T>) -> Result<Vec<T>> {
    check_hermitian(m)?;
    let (mut d, mut e, _) = tridiagonalize(m, false);
    tql2(&mut d, &mut e, None)?;
    d.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    Ok(d)
}

pub fn min_eig<T: Real>(m: &ComplexMatrix<T>) -> Result<T> {
    Ok(*eigvals_hermitian(m)?.last().expect("nonempty matrix"))
}

pub fn max_eig<T: Real>(m: &ComplexMatrix<T>) -> Result<T> {
    Ok(eigvals_hermitian(m)?[0])
}

/// Hermitian within the default tolerance and no eigenvalue below `-tol`.
pub fn is_psd<T: Real>(m: &ComplexMatrix<T>, tol: T) -> bool {
    matches!(min_eig(m), Ok(x) if x >= -tol)
}

/// Number of eigenvalues with magnitude above `tol`.
pub fn rank_hermitian<T: Real>(m: &ComplexMatrix<T>, tol: T) -> Result<usize> {
    Ok(eigvals_hermitian(m)?
        .into_iter()
        .filter(|x| x.abs() > tol)
        .count())
}

/// Moore–Penrose pseudo-inverse of a Hermitian matrix; eigenvalues with
/// magnitude at most `tol` are treated as zero.
pub fn pinv_hermitian<T: Real>(m: &ComplexMatrix<T>, tol: T) -> Result<ComplexMatrix<T>> {
    let eig = eig_hermitian(m)?;
    Ok(eig.reconstruct_with(|x| if x.abs() > tol { x.recip() } else { T::zero() }))
}

/// Principal square root of a PSD matrix; small negative eigenvalues are
/// clamped to zero.
pub fn sqrt_psd<T: Real>(m: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
    let eig = eig_hermitian(m)?;
    Ok(eig.reconstruct_with(|x| x.max(T::zero()).sqrt()))
}

/// Lower-triangular L with m = L L†. Fails unless m is positive definite.
pub fn cholesky<T: Real>(m: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
    let n = m.require_square()?;
    let mut l = ComplexMatrix::<T>::zeros(n, n);
    for j in 0..n {
        let mut djj = m[(j, j)].re;
        for k in 0..j {
            djj -= l[(j, k)].norm_sqr();
        }
        if !(djj > T::zero()) {
            return Err(Error::NotPsd(djj.as_f64()));
        }
        let ljj = djj.sqrt();
        l[(j, j)] = re(ljj);
        for i in j + 1..n {
            let mut s = m[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = s / ljj;
        }
    }
    Ok(l)
}

/// Solves L x = b for lower-triangular L.
pub fn forward_substitute<T: Real>(l: &ComplexMatrix<T>, b: &[Complex<T>]) -> Vec<Complex<T>> {
    let n = l.rows();
    let mut x = vec![Complex::zero(); n];
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[(i, k)] * x[k];
        }
        x[i] = s / l[(i, i)];
    }
    x
}

/// L⁻¹ for lower-triangular L.
pub fn invert_lower<T: Real>(l: &ComplexMatrix<T>) -> ComplexMatrix<T> {
    let n = l.rows();
    let mut inv = ComplexMatrix::zeros(n, n);
    for j in 0..n {
        let mut e = vec![Complex::zero(); n];
        e[j] = Complex::one();
        let col = forward_substitute(l, &e);
        for i in 0..n {
            inv[(i, j)] = col[i];
        }
    }
    inv
}

/// Cholesky factor of a dense real symmetric positive definite matrix
/// (row-major, n×n). Returns `None` if a pivot is not positive.
pub fn cholesky_real<T: Real>(a: &[T], n: usize) -> Option<Vec<T>> {
    let mut l = vec![T::zero(); n * n];
    for j in 0..n {
        let mut d = a[j * n + j];
        for k in 0..j {
            d -= l[j * n + k] * l[j * n + k];
        }
        if !(d > T::zero()) {
            return None;
        }
        let ljj = d.sqrt();
        l[j * n + j] = ljj;
        for i in j + 1..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            l[i * n + j] = s / ljj;
        }
    }
    Some(l)
}

/// Solves (L Lᵀ) x = b given the real Cholesky factor.
pub fn cholesky_solve_real<T: Real>(l: &[T], n: usize, b: &[T]) -> Vec<T> {
    let mut y = vec![T::zero(); n];
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[i * n + k] * y[k];
        }
        y[i] = s / l[i * n + i];
    }
    let mut x = vec![T::zero(); n];
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in i + 1..n {
            s -= l[k * n + i] * x[k];
        }
        x[i] = s / l[i * n + i];
    }
    x
}
