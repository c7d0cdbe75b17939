//! Quantum channels in Kraus and Choi form.
//!
//! The Choi operator is Σ 𝓜(|m⟩⟨n|)⊗|m⟩⟨n|, output factor first. With the
//! row-major double ket this is Σ_i |C_i⟩⟩⟨⟨C_i| for Kraus operators C_i.

use num_complex::Complex;
use num_traits::Zero;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::random::haar_unitary;
use crate::linalg::{
    double_ket, eig_hermitian, is_psd, min_eig, partial_trace_systems, unvec, weyl, ComplexMatrix,
    SystemDims,
};
use crate::scalar::{re, Real};

/// Completely positive map given by Kraus operators, each `d_out`×`d_in`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ChannelRepr<T>", bound = "T: Real")]
pub struct Channel<T: Real> {
    d_in: usize,
    d_out: usize,
    kraus: Vec<ComplexMatrix<T>>,
}

#[derive(Deserialize)]
#[serde(bound = "T: Real")]
struct ChannelRepr<T: Real> {
    d_in: usize,
    d_out: usize,
    kraus: Vec<ComplexMatrix<T>>,
}

impl<T: Real> TryFrom<ChannelRepr<T>> for Channel<T> {
    type Error = Error;

    fn try_from(r: ChannelRepr<T>) -> Result<Self> {
        let c = Channel::new(r.kraus)?;
        if c.d_in != r.d_in || c.d_out != r.d_out {
            return Err(Error::DimMismatch(format!(
                "declared {}->{} but Kraus operators are {}x{}",
                r.d_in, r.d_out, c.d_out, c.d_in
            )));
        }
        Ok(c)
    }
}

impl<T: Real> Channel<T> {
    pub fn new(kraus: Vec<ComplexMatrix<T>>) -> Result<Self> {
        let first = kraus.first().ok_or_else(|| {
            Error::InvalidArgument("a channel needs at least one Kraus operator".into())
        })?;
        let (d_out, d_in) = first.shape();
        if let Some(k) = kraus.iter().find(|k| k.shape() != (d_out, d_in)) {
            return Err(Error::DimMismatch(format!(
                "Kraus operators of shapes {d_out}x{d_in} and {}x{}",
                k.rows(),
                k.cols()
            )));
        }
        Ok(Self { d_in, d_out, kraus })
    }

    pub fn d_in(&self) -> usize {
        self.d_in
    }

    pub fn d_out(&self) -> usize {
        self.d_out
    }

    pub fn kraus(&self) -> &[ComplexMatrix<T>] {
        &self.kraus
    }

    pub fn identity(d: usize) -> Self {
        Self {
            d_in: d,
            d_out: d,
            kraus: vec![ComplexMatrix::identity(d)],
        }
    }

    /// ρ ↦ UρU†; `u` must be unitary within the default tolerance.
    pub fn unitary(u: &ComplexMatrix<T>) -> Result<Self> {
        let dev = u.unitary_deviation();
        if !(dev <= T::default_tol()) {
            return Err(Error::NotUnitary(dev.as_f64()));
        }
        Self::new(vec![u.clone()])
    }

    /// ρ ↦ Tr[ρ] ρ0 with Kraus operators √λ_k |ψ_k⟩⟨j|.
    pub fn constant(rho0: &ComplexMatrix<T>) -> Result<Self> {
        check_density(rho0, T::default_tol())?;
        let d = rho0.rows();
        let eig = eig_hermitian(rho0)?;
        let mut kraus = Vec::new();
        for (k, &lam) in eig.values.iter().enumerate() {
            if lam <= T::default_tol() {
                continue;
            }
            let psi: Vec<Complex<T>> = eig
                .vectors
                .column(k)
                .into_iter()
                .map(|z| z * lam.sqrt())
                .collect();
            for j in 0..d {
                kraus.push(ComplexMatrix::from_fn(d, d, |r, c| {
                    if c == j {
                        psi[r]
                    } else {
                        Complex::zero()
                    }
                }));
            }
        }
        Self::new(kraus)
    }

    /// ρ ↦ Tr[ρ] I/d, with the d² Weyl operators X^aZ^b/√(d²) as Kraus set.
    pub fn depolarizing(d: usize) -> Self {
        let s = T::lit(d as f64).recip();
        let kraus = (0..d)
            .flat_map(|a| (0..d).map(move |b| (a, b)))
            .map(|(a, b)| weyl::<T>(d, a, b).scale_real(s))
            .collect();
        Self {
            d_in: d,
            d_out: d,
            kraus,
        }
    }

    /// Classical channel with `p[y][x]` = p(y|x); Kraus set √p(y|x) |y⟩⟨x|.
    pub fn classical(p: &[Vec<T>]) -> Result<Self> {
        let d_out = p.len();
        let d_in = p.first().map_or(0, Vec::len);
        if d_out == 0 || d_in == 0 || p.iter().any(|row| row.len() != d_in) {
            return Err(Error::NotStochastic(
                "table must be a nonempty rectangle".into(),
            ));
        }
        let tol = T::default_tol();
        for x in 0..d_in {
            let mut sum = T::zero();
            for (y, row) in p.iter().enumerate() {
                if row[x] < -tol || !row[x].is_finite() {
                    return Err(Error::NotStochastic(format!("p({y}|{x}) = {}", row[x])));
                }
                sum += row[x];
            }
            if (sum - T::one()).abs() > tol {
                return Err(Error::NotStochastic(format!("column {x} sums to {sum}")));
            }
        }
        let mut kraus = Vec::new();
        for (y, row) in p.iter().enumerate() {
            for (x, &pyx) in row.iter().enumerate() {
                if pyx > T::zero() {
                    let mut k = ComplexMatrix::zeros(d_out, d_in);
                    k[(y, x)] = re(pyx.sqrt());
                    kraus.push(k);
                }
            }
        }
        Self::new(kraus)
    }

    pub fn choi(&self) -> ChoiOperator<T> {
        let n = self.d_out * self.d_in;
        let mut m = ComplexMatrix::zeros(n, n);
        for k in &self.kraus {
            m += &ComplexMatrix::projector(&double_ket(k));
        }
        ChoiOperator {
            matrix: m,
            d_out: self.d_out,
            d_in: self.d_in,
        }
    }

    /// Kraus operators √λ_k unvec(v_k) from the eigendecomposition of `j`;
    /// eigenvalues within `tol` of zero are dropped.
    pub fn from_choi(j: &ChoiOperator<T>, tol: T) -> Result<Self> {
        let eig = eig_hermitian(&j.matrix)?;
        let lowest = *eig.values.last().expect("nonempty");
        if lowest < -tol {
            return Err(Error::NotPsd(lowest.as_f64()));
        }
        let mut kraus = Vec::new();
        for (k, &lam) in eig.values.iter().enumerate() {
            if lam <= tol {
                continue;
            }
            let v: Vec<Complex<T>> = eig
                .vectors
                .column(k)
                .into_iter()
                .map(|z| z * lam.sqrt())
                .collect();
            kraus.push(unvec(&v, j.d_out, j.d_in)?);
        }
        if kraus.is_empty() {
            kraus.push(ComplexMatrix::zeros(j.d_out, j.d_in));
        }
        Self::new(kraus)
    }

    /// Σ C_i ρ C_i†
    pub fn apply(&self, rho: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
        if rho.shape() != (self.d_in, self.d_in) {
            return Err(Error::DimMismatch(format!(
                "input of shape {}x{} for a channel on dimension {}",
                rho.rows(),
                rho.cols(),
                self.d_in
            )));
        }
        let mut out = ComplexMatrix::zeros(self.d_out, self.d_out);
        for k in &self.kraus {
            out += &k.matmul(rho).matmul(&k.adjoint());
        }
        Ok(out)
    }

    /// ‖Σ C_i†C_i − I‖_F
    pub fn trace_preservation_deviation(&self) -> T {
        let mut s = ComplexMatrix::zeros(self.d_in, self.d_in);
        for k in &self.kraus {
            s += &k.adjoint().matmul(k);
        }
        s.distance(&ComplexMatrix::identity(self.d_in))
    }

    /// ‖Σ C_iC_i† − I‖_F, infinite when input and output dimensions differ.
    pub fn unitality_deviation(&self) -> T {
        if self.d_in != self.d_out {
            return T::infinity();
        }
        let mut s = ComplexMatrix::zeros(self.d_out, self.d_out);
        for k in &self.kraus {
            s += &k.matmul(&k.adjoint());
        }
        s.distance(&ComplexMatrix::identity(self.d_out))
    }

    pub fn is_cptp(&self, tol: T) -> bool {
        self.trace_preservation_deviation() <= tol
    }

    /// Trace preserving and unital.
    pub fn is_bistochastic(&self, tol: T) -> bool {
        self.is_cptp(tol) && self.unitality_deviation() <= tol
    }

    pub fn require_bistochastic(&self, tol: T) -> Result<()> {
        let dev = self
            .trace_preservation_deviation()
            .max(self.unitality_deviation());
        if dev <= tol {
            Ok(())
        } else {
            Err(Error::NotBistochastic(dev.as_f64()))
        }
    }

    /// Kraus operators mixed by the columns of an isometry `w`
    /// (K'_a = Σ_i w[a,i] K_i); the map is unchanged.
    pub fn remix(&self, w: &ComplexMatrix<T>) -> Result<Self> {
        if w.cols() != self.kraus.len() {
            return Err(Error::DimMismatch(format!(
                "mixing matrix has {} columns for {} Kraus operators",
                w.cols(),
                self.kraus.len()
            )));
        }
        let kraus = (0..w.rows())
            .map(|a| {
                let mut k = ComplexMatrix::zeros(self.d_out, self.d_in);
                for (i, ki) in self.kraus.iter().enumerate() {
                    k += &ki.scale(w[(a, i)]);
                }
                k
            })
            .collect();
        Self::new(kraus)
    }
}

/// c2 ∘ c1 (apply `c1` first).
pub fn compose<T: Real>(c2: &Channel<T>, c1: &Channel<T>) -> Result<Channel<T>> {
    if c1.d_out != c2.d_in {
        return Err(Error::DimMismatch(format!(
            "cannot feed a {}-dimensional output into a {}-dimensional input",
            c1.d_out, c2.d_in
        )));
    }
    let kraus = c2
        .kraus
        .iter()
        .flat_map(|b| c1.kraus.iter().map(move |a| b.matmul(a)))
        .collect();
    Channel::new(kraus)
}

/// c1 ⊗ c2
pub fn tensor<T: Real>(c1: &Channel<T>, c2: &Channel<T>) -> Channel<T> {
    let kraus = c1
        .kraus
        .iter()
        .flat_map(|a| c2.kraus.iter().map(move |b| a.kron(b)))
        .collect();
    Channel::new(kraus).expect("Kraus shapes agree by construction")
}

/// Random CPTP map on dimension `d` with `n_kraus` Kraus operators cut from
/// a Haar-random isometry.
pub fn random_channel<T: Real, R: Rng + ?Sized>(
    d: usize,
    n_kraus: usize,
    rng: &mut R,
) -> Channel<T> {
    let u = haar_unitary::<T, R>(d * n_kraus, rng);
    let kraus = (0..n_kraus)
        .map(|k| ComplexMatrix::from_fn(d, d, |i, j| u[(k * d + i, j)]))
        .collect();
    Channel::new(kraus).expect("equal shapes")
}

/// Random mixture of `n` Haar unitaries; always bistochastic.
pub fn random_mixed_unitary<T: Real, R: Rng + ?Sized>(
    d: usize,
    n: usize,
    rng: &mut R,
) -> Channel<T> {
    let weights: Vec<f64> = (0..n).map(|_| rng.random::<f64>() + 0.05).collect();
    let total: f64 = weights.iter().sum();
    let kraus = weights
        .iter()
        .map(|w| haar_unitary::<T, R>(d, rng).scale_real(T::lit((w / total).sqrt())))
        .collect();
    Channel::new(kraus).expect("equal shapes")
}

/// Hermitian, PSD and unit trace within `tol`.
pub fn check_density<T: Real>(rho: &ComplexMatrix<T>, tol: T) -> Result<()> {
    rho.require_square()?;
    let h = rho.hermitian_deviation();
    if !(h <= tol) {
        return Err(Error::NotDensity(format!(
            "not Hermitian (deviation {h:e})"
        )));
    }
    let tr = rho.trace();
    if !((tr - re(T::one())).norm() <= tol) {
        return Err(Error::NotDensity(format!("trace {}", tr)));
    }
    let low = min_eig(rho)?;
    if low < -tol {
        return Err(Error::NotDensity(format!("eigenvalue {low:e}")));
    }
    Ok(())
}

/// Choi operator of a linear map, factors ordered (out, in).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct ChoiOperator<T: Real> {
    matrix: ComplexMatrix<T>,
    d_out: usize,
    d_in: usize,
}

impl<T: Real> ChoiOperator<T> {
    pub fn new(matrix: ComplexMatrix<T>, d_out: usize, d_in: usize) -> Result<Self> {
        let n = matrix.require_square()?;
        if n != d_out * d_in {
            return Err(Error::DimMismatch(format!(
                "Choi of size {n} for dims {d_out}x{d_in}"
            )));
        }
        Ok(Self {
            matrix,
            d_out,
            d_in,
        })
    }

    /// Choi of an arbitrary linear map given by its action on matrix units.
    pub fn from_map(
        d_out: usize,
        d_in: usize,
        f: impl Fn(&ComplexMatrix<T>) -> ComplexMatrix<T>,
    ) -> Self {
        let n = d_out * d_in;
        let mut m = ComplexMatrix::zeros(n, n);
        for a in 0..d_in {
            for b in 0..d_in {
                let mut unit = ComplexMatrix::zeros(d_in, d_in);
                unit[(a, b)] = re(T::one());
                let img = f(&unit);
                for i in 0..d_out {
                    for j in 0..d_out {
                        m[(i * d_in + a, j * d_in + b)] = img[(i, j)];
                    }
                }
            }
        }
        Self {
            matrix: m,
            d_out,
            d_in,
        }
    }

    pub fn matrix(&self) -> &ComplexMatrix<T> {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix<T> {
        self.matrix
    }

    pub fn d_out(&self) -> usize {
        self.d_out
    }

    pub fn d_in(&self) -> usize {
        self.d_in
    }

    pub fn dims(&self) -> SystemDims {
        SystemDims::of(&[("out", self.d_out), ("in", self.d_in)])
    }

    /// 𝓜(ρ) = Tr_in[J (I ⊗ ρᵀ)]
    pub fn apply(&self, rho: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
        if rho.shape() != (self.d_in, self.d_in) {
            return Err(Error::DimMismatch(format!(
                "input of shape {}x{} for a map on dimension {}",
                rho.rows(),
                rho.cols(),
                self.d_in
            )));
        }
        let prod = self
            .matrix
            .matmul(&ComplexMatrix::identity(self.d_out).kron(&rho.transpose()));
        partial_trace_systems(&prod, &[self.d_out, self.d_in], &[1])
    }

    /// Tr_in[J] = 𝓜(I)
    pub fn image_of_identity(&self) -> ComplexMatrix<T> {
        partial_trace_systems(&self.matrix, &[self.d_out, self.d_in], &[1])
            .expect("consistent dims")
    }

    /// Tr_out[J], equal to I_in exactly when the map is trace preserving.
    pub fn output_trace(&self) -> ComplexMatrix<T> {
        partial_trace_systems(&self.matrix, &[self.d_out, self.d_in], &[0])
            .expect("consistent dims")
    }

    pub fn is_cp(&self, tol: T) -> bool {
        is_psd(&self.matrix, tol)
    }

    pub fn min_eig(&self) -> Result<T> {
        min_eig(&self.matrix)
    }

    pub fn is_trace_preserving(&self, tol: T) -> bool {
        self.output_trace()
            .distance(&ComplexMatrix::identity(self.d_in))
            <= tol
    }

    pub fn distance(&self, other: &Self) -> T {
        assert_eq!(
            (self.d_out, self.d_in),
            (other.d_out, other.d_in),
            "Choi dims differ"
        );
        self.matrix.distance(&other.matrix)
    }

    /// a·self + b·other, for affine combinations of maps.
    pub fn combine(&self, a: T, other: &Self, b: T) -> Result<Self> {
        if (self.d_out, self.d_in) != (other.d_out, other.d_in) {
            return Err(Error::DimMismatch("Choi dims differ".into()));
        }
        Ok(Self {
            matrix: self.matrix.scale_real(a) + other.matrix.scale_real(b),
            d_out: self.d_out,
            d_in: self.d_in,
        })
    }
}
