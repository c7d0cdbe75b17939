//! Isotypic decomposition of (C^d)^{⊗3} under Ū ⊗ Ū ⊗ U.
//!
//! The representation contains a d-dimensional irrep with multiplicity two
//! and two irreps of dimension d(d₊−1) and d(d₋−1), d± = d(d±1)/2. A generic
//! element of the commutant has one eigenspace per irrep copy, so the
//! projectors are read off its spectrum.

use num_complex::Complex;
use num_traits::Zero;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::weingarten::Weingarten;
use crate::error::{Error, Result};
use crate::linalg::{eig_hermitian, kron_all, random, ComplexMatrix};
use crate::scalar::Real;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct IsotypicProjectors<T: Real> {
    pub d: usize,
    /// The multiplicity-two block of the d-dimensional irrep (rank 2d).
    pub j0: ComplexMatrix<T>,
    /// Irrep of dimension d(d₊−1).
    pub sym: ComplexMatrix<T>,
    /// Irrep of dimension d(d₋−1); zero for d = 2.
    pub anti: ComplexMatrix<T>,
}

impl<T: Real> IsotypicProjectors<T> {
    pub fn projectors(&self) -> [&ComplexMatrix<T>; 3] {
        [&self.j0, &self.sym, &self.anti]
    }

    /// Irrep dimensions d_j in the order (j0, sym, anti).
    pub fn irrep_dims(&self) -> [usize; 3] {
        irrep_dims(self.d)
    }

    pub fn multiplicities(&self) -> [usize; 3] {
        [2, 1, 1]
    }

    pub fn ranks(&self) -> [usize; 3] {
        let r = |p: &ComplexMatrix<T>| p.trace().re.as_f64().round() as usize;
        [r(&self.j0), r(&self.sym), r(&self.anti)]
    }
}

pub fn irrep_dims(d: usize) -> [usize; 3] {
    let dp = d * (d + 1) / 2;
    let dm = d * (d - 1) / 2;
    [d, d * (dp - 1), d * dm.saturating_sub(1)]
}

/// Ū ⊗ Ū ⊗ U
pub fn representation<T: Real>(u: &ComplexMatrix<T>) -> ComplexMatrix<T> {
    let uc = u.conj();
    kron_all(&[&uc, &uc, u])
}

fn digits3(x: usize, d: usize) -> [usize; 3] {
    [x / (d * d), (x / d) % d, x % d]
}

/// Exact group average ∫dU W H W† with W = Ū ⊗ Ū ⊗ U.
pub fn twirl<T: Real>(h: &ComplexMatrix<T>, d: usize) -> Result<ComplexMatrix<T>> {
    let n = d * d * d;
    if h.shape() != (n, n) {
        return Err(Error::DimMismatch(format!(
            "operator {:?} on (C^{d})^3",
            h.shape()
        )));
    }
    let w = Weingarten::<T>::new(3, d)?;
    Ok(ComplexMatrix::from_fn(n, n, |x, y| {
        let (a, b) = (digits3(x, d), digits3(y, d));
        let mut acc = Complex::zero();
        for xp in 0..n {
            let ap = digits3(xp, d);
            for yp in 0..n {
                let hv = h[(xp, yp)];
                if hv.is_zero() {
                    continue;
                }
                let bp = digits3(yp, d);
                // U: rows (a2, b0, b1), cols (a2', b0', b1'); Ū: rows (a0, a1, b2), cols (a0', a1', b2')
                let m = w.moment_indices(
                    &[a[2], b[0], b[1]],
                    &[ap[2], bp[0], bp[1]],
                    &[a[0], a[1], b[2]],
                    &[ap[0], ap[1], bp[2]],
                );
                if m != T::zero() {
                    acc += hv * m;
                }
            }
        }
        acc
    }))
}

fn cluster<T: Real>(values: &[T], tol: T) -> Vec<Vec<usize>> {
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (i, &v) in values.iter().enumerate() {
        match groups.last_mut() {
            Some(g) if (values[*g.last().unwrap()] - v).abs() <= tol => g.push(i),
            _ => groups.push(vec![i]),
        }
    }
    groups
}

fn projector_from<T: Real>(vectors: &ComplexMatrix<T>, cols: &[usize]) -> ComplexMatrix<T> {
    let n = vectors.rows();
    let mut p = ComplexMatrix::zeros(n, n);
    for &c in cols {
        let v = vectors.column(c);
        p += &ComplexMatrix::projector(&v);
    }
    p
}

/// Computes the three isotypic projectors for d ∈ {2, 3}.
pub fn isotypic_projectors<T: Real>(d: usize) -> Result<IsotypicProjectors<T>> {
    if !(2..=3).contains(&d) {
        return Err(Error::Unsupported(format!(
            "isotypic projectors for d = {d} (supported: 2, 3)"
        )));
    }
    let n = d * d * d;
    let [dj0, dsym, danti] = irrep_dims(d);
    let mut rng = ChaCha8Rng::seed_from_u64(0x150);
    for _attempt in 0..8 {
        let h = random::random_hermitian::<T, _>(n, &mut rng);
        let c = twirl(&h, d)?.hermitian_part();
        let eig = eig_hermitian(&c)?;
        let scale = eig.values.iter().fold(T::zero(), |m, v| m.max(v.abs()));
        let groups = cluster(&eig.values, scale * T::lit(1e-7));
        let mut j0_cols = Vec::new();
        let mut sym_cols = None;
        let mut anti_cols = None;
        let mut ok = true;
        for g in &groups {
            match g.len() {
                s if s == dj0 => j0_cols.extend_from_slice(g),
                s if s == dsym && sym_cols.is_none() => sym_cols = Some(g.clone()),
                s if s == danti && anti_cols.is_none() => anti_cols = Some(g.clone()),
                _ => ok = false,
            }
        }
        let anti_cols = if danti == 0 {
            Some(Vec::new())
        } else {
            anti_cols
        };
        if !ok || j0_cols.len() != 2 * dj0 {
            continue;
        }
        let (Some(sym_cols), Some(anti_cols)) = (sym_cols, anti_cols) else {
            continue;
        };
        return Ok(IsotypicProjectors {
            d,
            j0: projector_from(&eig.vectors, &j0_cols),
            sym: projector_from(&eig.vectors, &sym_cols),
            anti: projector_from(&eig.vectors, &anti_cols),
        });
    }
    Err(Error::NoConvergence)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn ranks_and_completeness() {
        for (d, want) in [(2, [4, 4, 0]), (3, [6, 15, 6])] {
            let p = isotypic_projectors::<f64>(d).unwrap();
            assert_eq!(p.ranks(), want);
            let n = d * d * d;
            let sum = p.j0.clone() + p.sym.clone() + p.anti.clone();
            assert!(sum.distance(&ComplexMatrix::identity(n)) < 1e-10);
            let ps = p.projectors();
            for (a, pa) in ps.iter().enumerate() {
                for (b, pb) in ps.iter().enumerate() {
                    let prod = pa.matmul(pb);
                    let want = if a == b {
                        (*pa).clone()
                    } else {
                        ComplexMatrix::zeros(n, n)
                    };
                    assert!(prod.distance(&want) < 1e-10);
                }
            }
        }
    }

    #[test]
    fn projectors_commute_with_representation() {
        let mut rng = ChaCha8Rng::seed_from_u64(44);
        for d in [2, 3] {
            let p = isotypic_projectors::<f64>(d).unwrap();
            for _ in 0..3 {
                let w = representation(&random::haar_unitary::<f64, _>(d, &mut rng));
                for q in p.projectors() {
                    assert!((q.matmul(&w) - w.matmul(q)).max_abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn twirl_is_invariant_and_idempotent() {
        let mut rng = ChaCha8Rng::seed_from_u64(45);
        let h = random::random_hermitian::<f64, _>(8, &mut rng);
        let t = twirl(&h, 2).unwrap();
        assert!(twirl(&t, 2).unwrap().distance(&t) < 1e-12);
        let w = representation(&random::haar_unitary::<f64, _>(2, &mut rng));
        assert!(w.matmul(&t).matmul(&w.adjoint()).distance(&t) < 1e-12);
        assert!((t.trace() - h.trace()).norm() < 1e-12);
    }

    #[test]
    fn unsupported_dimension() {
        assert!(matches!(
            isotypic_projectors::<f64>(4),
            Err(Error::Unsupported(_))
        ));
    }
}
