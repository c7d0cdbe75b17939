//! Finite unitary designs; the single-qubit Clifford group is a 3-design.

use num_complex::Complex;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::weingarten::{MomentSpec, Weingarten};
use crate::error::Result;
use crate::linalg::{pauli, ComplexMatrix};
use crate::scalar::{cplx, Real};

/// Uniformly weighted unitaries reproducing Haar moments up to `strength`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct UnitaryDesign<T: Real> {
    pub unitaries: Vec<ComplexMatrix<T>>,
    pub strength: usize,
}

impl<T: Real> UnitaryDesign<T> {
    pub fn len(&self) -> usize {
        self.unitaries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.unitaries.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.unitaries.first().map_or(0, |u| u.rows())
    }

    /// Uniform average of `f` over the design.
    pub fn average(&self, f: impl Fn(&ComplexMatrix<T>) -> ComplexMatrix<T>) -> ComplexMatrix<T> {
        let mut it = self.unitaries.iter();
        let first = f(it.next().expect("non-empty design"));
        let sum = it.fold(first, |acc, u| acc + f(u));
        sum.scale_real(T::lit(self.len() as f64).recip())
    }

    pub fn moment(&self, spec: &MomentSpec) -> Complex<T> {
        let n = T::lit(self.len() as f64);
        self.unitaries
            .iter()
            .map(|u| spec.evaluate(u))
            .fold(Complex::zero(), |a, b| a + b)
            / n
    }

    /// Largest deviation from the Haar value over all balanced monomials of
    /// degree `t`.
    pub fn moment_deviation(&self, t: usize) -> Result<T> {
        let d = self.dim();
        let w = Weingarten::<T>::new(t, d)?;
        let mut worst = T::zero();
        for spec in MomentSpec::all(d, t) {
            let dev = (self.moment(&spec) - Complex::new(w.moment(&spec)?, T::zero())).norm();
            if dev > worst {
                worst = dev;
            }
        }
        Ok(worst)
    }
}

/// Multiplies by a phase so that the first entry of non-negligible modulus
/// (row-major) is real and positive.
pub fn canonical_phase<T: Real>(u: &ComplexMatrix<T>) -> ComplexMatrix<T> {
    let tol = T::lit(1e-9);
    match u.data().iter().find(|z| z.norm() > tol) {
        Some(z) => u.scale(z.conj() / z.norm()),
        None => u.clone(),
    }
}

/// Equality of two unitaries up to a global phase.
pub fn equal_up_to_phase<T: Real>(a: &ComplexMatrix<T>, b: &ComplexMatrix<T>, tol: T) -> bool {
    canonical_phase(a).distance(&canonical_phase(b)) <= tol
}

/// The 24 phase-canonical single-qubit Cliffords, generated from H and
/// S = diag(1, i).
pub fn single_qubit_clifford_group<T: Real>() -> UnitaryDesign<T> {
    let h = pauli::h::<T>();
    let mut s = ComplexMatrix::<T>::identity(2);
    s[(1, 1)] = cplx(0.0, 1.0);
    let gens = [h, s];
    let tol = T::lit(1e-6);
    let mut group = vec![ComplexMatrix::identity(2)];
    let mut frontier = group.clone();
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for g in &frontier {
            for s in &gens {
                let c = canonical_phase(&s.matmul(g));
                if !group.iter().any(|x| x.distance(&c) <= tol) {
                    group.push(c.clone());
                    next.push(c);
                }
            }
        }
        frontier = next;
    }
    UnitaryDesign {
        unitaries: group,
        strength: 3,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn has_24_elements_and_contains_paulis() {
        let g = single_qubit_clifford_group::<f64>();
        assert_eq!(g.len(), 24);
        for p in [
            ComplexMatrix::identity(2),
            pauli::x(),
            pauli::y(),
            pauli::z(),
            pauli::h(),
        ] {
            assert!(g.unitaries.iter().any(|u| equal_up_to_phase(u, &p, 1e-12)));
        }
        for u in &g.unitaries {
            assert!(u.is_unitary(1e-12));
        }
    }

    #[test]
    fn closed_under_products() {
        let g = single_qubit_clifford_group::<f64>();
        for a in &g.unitaries {
            for b in &g.unitaries {
                let c = a.matmul(b);
                assert!(g.unitaries.iter().any(|u| equal_up_to_phase(u, &c, 1e-12)));
            }
        }
    }

    #[test]
    fn three_design() {
        let g = single_qubit_clifford_group::<f64>();
        for t in 1..=3 {
            let dev = g.moment_deviation(t).unwrap();
            assert!(dev < 1e-12, "t={t}: {dev:e}");
        }
    }

    #[test]
    fn pauli_group_is_only_one_design() {
        let paulis = UnitaryDesign {
            unitaries: vec![
                ComplexMatrix::<f64>::identity(2),
                pauli::x(),
                pauli::y(),
                pauli::z(),
            ],
            strength: 1,
        };
        assert!(paulis.moment_deviation(1).unwrap() < 1e-14);
        assert!(paulis.moment_deviation(2).unwrap() > 1e-3);
    }
}
