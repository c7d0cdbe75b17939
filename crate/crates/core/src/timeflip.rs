//! The quantum time flip and related supermaps.
//!
//! Controlled channels act on target ⊗ control, with control |0⟩ selecting
//! the forward use of the input channel and |1⟩ the transposed one.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::channels::{Channel, ChoiOperator};
use crate::error::{Error, Result};
use crate::linalg::{
    embed, partial_trace, permute_systems, reorder, swap_operator, ComplexMatrix, SystemDims,
};
use crate::scalar::Real;

fn control_projector<T: Real>(bit: usize) -> ComplexMatrix<T> {
    let mut p = ComplexMatrix::zeros(2, 2);
    p[(bit, bit)] = Complex::one();
    p
}

/// K₀ ⊗ |0⟩⟨0| + K₁ ⊗ |1⟩⟨1|
pub fn controlled<T: Real>(k0: &ComplexMatrix<T>, k1: &ComplexMatrix<T>) -> ComplexMatrix<T> {
    k0.kron(&control_projector(0)) + k1.kron(&control_projector(1))
}

/// Kraus operators C_i ⊗ |0⟩⟨0| + C_iᵀ ⊗ |1⟩⟨1|. The input must be
/// bistochastic, otherwise the result is not a channel.
pub fn time_flip<T: Real>(c: &Channel<T>) -> Result<Channel<T>> {
    c.require_bistochastic(T::default_tol())?;
    Channel::new(
        c.kraus()
            .iter()
            .map(|k| controlled(k, &k.transpose()))
            .collect(),
    )
}

/// V Choi(𝓒) V† with V = I⊗I⊗|00⟩ + SWAP⊗|11⟩, returned on
/// (target_out, control_out) ⊗ (target_in, control_in). Linear in the
/// input, so it is defined for every map.
pub fn time_flip_choi<T: Real>(c: &Channel<T>) -> ChoiOperator<T> {
    time_flip_choi_of(&c.choi()).expect("square channel")
}

/// [`time_flip_choi`] on a Choi operator with equal input and output
/// dimension.
pub fn time_flip_choi_of<T: Real>(j: &ChoiOperator<T>) -> Result<ChoiOperator<T>> {
    let d = j.d_in();
    if j.d_out() != d {
        return Err(Error::DimMismatch(
            "time flip needs equal input and output dimensions".into(),
        ));
    }
    let mut ket00 = ComplexMatrix::zeros(4, 1);
    ket00[(0, 0)] = Complex::one();
    let mut ket11 = ComplexMatrix::zeros(4, 1);
    ket11[(3, 0)] = Complex::one();
    // isometry into (t_out, t_in, c_out, c_in)
    let v = ComplexMatrix::identity(d * d).kron(&ket00) + swap_operator::<T>(d).kron(&ket11);
    let big = v.matmul(j.matrix()).matmul(&v.adjoint());
    let m = permute_systems(&big, &[d, d, 2, 2], &[0, 2, 1, 3])?;
    ChoiOperator::new(m, 2 * d, 2 * d)
}

/// Choi operator of a supermap, factors ordered (B_o, B_i, A_o, A_i): the
/// supermap turns channels A_i → A_o into channels B_i → B_o.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct SuperChoi<T: Real> {
    matrix: ComplexMatrix<T>,
    dims: SystemDims,
}

pub const SUPERMAP_LABELS: [&str; 4] = ["B_o", "B_i", "A_o", "A_i"];

impl<T: Real> SuperChoi<T> {
    pub fn new(
        matrix: ComplexMatrix<T>,
        b_out: usize,
        b_in: usize,
        a_out: usize,
        a_in: usize,
    ) -> Result<Self> {
        let dims = SystemDims::new([("B_o", b_out), ("B_i", b_in), ("A_o", a_out), ("A_i", a_in)])?;
        dims.check_square(&matrix)?;
        Ok(Self { matrix, dims })
    }

    pub fn matrix(&self) -> &ComplexMatrix<T> {
        &self.matrix
    }

    pub fn dims(&self) -> &SystemDims {
        &self.dims
    }

    fn dim(&self, label: &str) -> usize {
        self.dims.dim_of(label).expect("fixed labels")
    }

    /// The same operator with the roles of A_i and A_o exchanged.
    pub fn exchange_input_output(&self) -> Result<Self> {
        let (ao, ai) = (self.dim("A_o"), self.dim("A_i"));
        if ao != ai {
            return Err(Error::DimMismatch(format!(
                "cannot exchange A_i ({ai}) and A_o ({ao})"
            )));
        }
        let m = permute_systems(&self.matrix, &self.dims.dims(), &[0, 1, 3, 2])?;
        Self::new(m, self.dim("B_o"), self.dim("B_i"), ao, ai)
    }

    /// Output Choi Tr_A[S (I_B ⊗ Choi(𝓝)ᵀ)] for an input map on A.
    pub fn apply(&self, input: &ChoiOperator<T>) -> Result<ChoiOperator<T>> {
        let (ao, ai) = (self.dim("A_o"), self.dim("A_i"));
        if (input.d_out(), input.d_in()) != (ao, ai) {
            return Err(Error::DimMismatch(format!(
                "supermap expects maps {ai}->{ao}, got {}->{}",
                input.d_in(),
                input.d_out()
            )));
        }
        let nb = self.dim("B_o") * self.dim("B_i");
        let prod = self
            .matrix
            .matmul(&ComplexMatrix::identity(nb).kron(&input.matrix().transpose()));
        let out = partial_trace(&prod, &self.dims, &["A_o", "A_i"])?;
        ChoiOperator::new(out, self.dim("B_o"), self.dim("B_i"))
    }
}

/// |V⟩⟩⟨⟨V| with |V⟩⟩ = |I⟩⟩_{A_i B_it}|I⟩⟩_{A_o B_ot}|0⟩|0⟩ +
/// |I⟩⟩_{A_i B_ot}|I⟩⟩_{A_o B_it}|1⟩|1⟩, where B_o = (B_ot, B_oc) and
/// B_i = (B_it, B_ic) split into target and control.
pub fn flip_supermap_choi<T: Real>(d: usize) -> SuperChoi<T> {
    // fine index order (B_ot, B_oc, B_it, B_ic, A_o, A_i)
    let idx = |bot: usize, boc: usize, bit: usize, bic: usize, ao: usize, ai: usize| {
        ((((bot * 2 + boc) * d + bit) * 2 + bic) * d + ao) * d + ai
    };
    let n = 4 * d * d * d * d;
    let mut v = vec![Complex::<T>::zero(); n];
    for a in 0..d {
        for b in 0..d {
            // forward: A_i = B_it = a, A_o = B_ot = b
            v[idx(b, 0, a, 0, b, a)] += Complex::one();
            // backward: A_i = B_ot = a, A_o = B_it = b
            v[idx(a, 1, b, 1, b, a)] += Complex::one();
        }
    }
    SuperChoi::new(ComplexMatrix::projector(&v), 2 * d, 2 * d, d, d).expect("consistent dims")
}

/// The supermap 𝓝 ↦ 𝓝: |I⟩⟩⟨⟨I|_{A_i B_i} ⊗ |I⟩⟩⟨⟨I|_{A_o B_o} in the
/// (B_o, B_i, A_o, A_i) order.
pub fn identity_supermap_choi<T: Real>(d: usize) -> SuperChoi<T> {
    let idx = |bo: usize, bi: usize, ao: usize, ai: usize| ((bo * d + bi) * d + ao) * d + ai;
    let mut v = vec![Complex::<T>::zero(); d * d * d * d];
    for a in 0..d {
        for b in 0..d {
            v[idx(b, a, b, a)] = Complex::one();
        }
    }
    SuperChoi::new(ComplexMatrix::projector(&v), d, d, d, d).expect("consistent dims")
}

/// Residuals of the two normalization conditions for a supermap on
/// bistochastic channels.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalizationReport {
    /// ‖Tr_{A_i A_o B_o}[S]/d − I_{B_i}‖_F
    pub residual_identity: f64,
    /// ‖Tr_{B_o}[S] − (affine combination of its marginals)‖_F
    pub residual_marginals: f64,
    pub tolerance: f64,
    pub identity_ok: bool,
    pub marginals_ok: bool,
}

impl NormalizationReport {
    pub fn passed(&self) -> bool {
        self.identity_ok && self.marginals_ok
    }
}

/// Checks (i) Tr_{A_i A_o B_o}[S]/d = I_{B_i} and (ii)
/// Tr_{B_o}[S] = (I_{A_i}/d)⊗Tr_{A_i B_o}[S] + (I_{A_o}/d)⊗Tr_{A_o B_o}[S]
///   − (I_{A_i}/d)⊗(I_{A_o}/d)⊗Tr_{A_i A_o B_o}[S].
/// Only A_i ≅ A_o is supported.
pub fn check_supermap_normalization<T: Real>(
    s: &SuperChoi<T>,
    tol: T,
) -> Result<NormalizationReport> {
    let d = s.dim("A_i");
    if s.dim("A_o") != d {
        return Err(Error::Unsupported(format!(
            "normalization is characterized for A_i ≅ A_o only (got {} and {})",
            d,
            s.dim("A_o")
        )));
    }
    let dims = s.dims();
    let m = s.matrix();
    let inv_d = T::lit(d as f64).recip();

    let on_bi = partial_trace(m, dims, &["A_i", "A_o", "B_o"])?;
    let residual_identity = on_bi
        .scale_real(inv_d)
        .distance(&ComplexMatrix::identity(on_bi.rows()));

    let target = dims.without(&["B_o"])?; // (B_i, A_o, A_i)
    let lhs = partial_trace(m, dims, &["B_o"])?;
    let t1 = partial_trace(m, dims, &["A_i", "B_o"])?;
    let t2 = partial_trace(m, dims, &["A_o", "B_o"])?;
    let t3 = partial_trace(m, dims, &["A_i", "A_o", "B_o"])?;
    let rhs = embed(&t1, &target.without(&["A_i"])?, &target)?.scale_real(inv_d)
        + embed(&t2, &target.without(&["A_o"])?, &target)?.scale_real(inv_d)
        - embed(&t3, &target.select(&["B_i"])?, &target)?.scale_real(inv_d * inv_d);
    let residual_marginals = lhs.distance(&rhs);

    Ok(NormalizationReport {
        residual_identity: residual_identity.as_f64(),
        residual_marginals: residual_marginals.as_f64(),
        tolerance: tol.as_f64(),
        identity_ok: residual_identity <= tol,
        marginals_ok: residual_marginals <= tol,
    })
}

/// The three bipartite supermaps on pairs of bistochastic channels.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SupermapKind {
    /// A₁A₂ᵀ ⊗ |0⟩⟨0| + A₁ᵀA₂ ⊗ |1⟩⟨1|
    S1,
    /// The quantum SWITCH: A₁A₂ ⊗ |0⟩⟨0| + A₂A₁ ⊗ |1⟩⟨1|
    S2,
    /// A₁A₂ ⊗ |0⟩⟨0| + A₂ᵀA₁ᵀ ⊗ |1⟩⟨1|
    S3,
}

impl fmt::Display for SupermapKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::S1 => "s1",
            Self::S2 => "s2",
            Self::S3 => "s3",
        })
    }
}

impl FromStr for SupermapKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "s1" => Ok(Self::S1),
            "s2" | "switch" => Ok(Self::S2),
            "s3" => Ok(Self::S3),
            other => Err(Error::InvalidArgument(format!(
                "unknown supermap `{other}`"
            ))),
        }
    }
}

pub fn bipartite_supermap<T: Real>(
    kind: SupermapKind,
    a1: &Channel<T>,
    a2: &Channel<T>,
) -> Result<Channel<T>> {
    let tol = T::default_tol();
    a1.require_bistochastic(tol)?;
    a2.require_bistochastic(tol)?;
    if a1.d_in() != a2.d_in() {
        return Err(Error::DimMismatch(format!(
            "inputs on dimensions {} and {}",
            a1.d_in(),
            a2.d_in()
        )));
    }
    let mut kraus = Vec::with_capacity(a1.kraus().len() * a2.kraus().len());
    for m in a1.kraus() {
        for n in a2.kraus() {
            let (k0, k1) = match kind {
                SupermapKind::S1 => (m.matmul(&n.transpose()), m.transpose().matmul(n)),
                SupermapKind::S2 => (m.matmul(n), n.matmul(m)),
                SupermapKind::S3 => (m.matmul(n), n.transpose().matmul(&m.transpose())),
            };
            kraus.push(controlled(&k0, &k1));
        }
    }
    Channel::new(kraus)
}

pub fn supermap_s1<T: Real>(a1: &Channel<T>, a2: &Channel<T>) -> Result<Channel<T>> {
    bipartite_supermap(SupermapKind::S1, a1, a2)
}

pub fn supermap_s2<T: Real>(a1: &Channel<T>, a2: &Channel<T>) -> Result<Channel<T>> {
    bipartite_supermap(SupermapKind::S2, a1, a2)
}

pub fn supermap_s3<T: Real>(a1: &Channel<T>, a2: &Channel<T>) -> Result<Channel<T>> {
    bipartite_supermap(SupermapKind::S3, a1, a2)
}

/// Reorders a Choi operator on (t_out, c_out, t_in, c_in) into
/// (c_out, c_in, t_out, t_in) blocks, which makes the control structure
/// easy to read off.
pub fn control_major<T: Real>(j: &ChoiOperator<T>, d: usize) -> Result<ComplexMatrix<T>> {
    let dims = SystemDims::of(&[("t_out", d), ("c_out", 2), ("t_in", d), ("c_in", 2)]);
    reorder(j.matrix(), &dims, &["c_out", "c_in", "t_out", "t_in"])
}
