//! Block-diagonal SDPs in standard form:
//! minimize ⟨C, X⟩ subject to ⟨A_k, X⟩ = b_k, X ⪰ 0, where X is a list of
//! Hermitian PSD blocks and nonnegative vectors, and ⟨A, B⟩ = Re Tr(A B).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BlockKind {
    /// Hermitian n×n positive semidefinite block.
    Psd(usize),
    /// Nonnegative vector of length n.
    Nonneg(usize),
}

impl BlockKind {
    pub fn size(&self) -> usize {
        match *self {
            Self::Psd(n) | Self::Nonneg(n) => n,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub enum Block<T: Real> {
    Psd(ComplexMatrix<T>),
    Nonneg(Vec<T>),
}

impl<T: Real> Block<T> {
    pub fn zeros(kind: BlockKind) -> Self {
        match kind {
            BlockKind::Psd(n) => Self::Psd(ComplexMatrix::zeros(n, n)),
            BlockKind::Nonneg(n) => Self::Nonneg(vec![T::zero(); n]),
        }
    }

    pub fn identity(kind: BlockKind) -> Self {
        match kind {
            BlockKind::Psd(n) => Self::Psd(ComplexMatrix::identity(n)),
            BlockKind::Nonneg(n) => Self::Nonneg(vec![T::one(); n]),
        }
    }

    pub fn kind(&self) -> BlockKind {
        match self {
            Self::Psd(m) => BlockKind::Psd(m.rows()),
            Self::Nonneg(v) => BlockKind::Nonneg(v.len()),
        }
    }

    pub fn as_psd(&self) -> Option<&ComplexMatrix<T>> {
        match self {
            Self::Psd(m) => Some(m),
            Self::Nonneg(_) => None,
        }
    }

    pub fn as_nonneg(&self) -> Option<&[T]> {
        match self {
            Self::Nonneg(v) => Some(v),
            Self::Psd(_) => None,
        }
    }

    /// Re Tr(A B) or the dot product.
    pub fn inner(&self, other: &Self) -> T {
        match (self, other) {
            (Self::Psd(a), Self::Psd(b)) => {
                // Re Tr(A B) = Σ_ij Re(A_ij B_ji)
                let n = a.rows();
                let (ad, bd) = (a.data(), b.data());
                let mut acc = T::zero();
                for i in 0..n {
                    for j in 0..n {
                        let (x, y) = (ad[i * n + j], bd[j * n + i]);
                        acc += x.re * y.re - x.im * y.im;
                    }
                }
                acc
            }
            (Self::Nonneg(a), Self::Nonneg(b)) => a.iter().zip(b).map(|(x, y)| *x * *y).sum(),
            _ => panic!("inner product of mismatched blocks"),
        }
    }

    /// self += a · other
    pub fn axpy(&mut self, a: T, other: &Self) {
        match (self, other) {
            (Self::Psd(x), Self::Psd(y)) => {
                for (p, q) in x.data_mut().iter_mut().zip(y.data()) {
                    *p += *q * a;
                }
            }
            (Self::Nonneg(x), Self::Nonneg(y)) => {
                for (p, q) in x.iter_mut().zip(y) {
                    *p += *q * a;
                }
            }
            _ => panic!("axpy on mismatched blocks"),
        }
    }

    pub fn scaled(&self, a: T) -> Self {
        let mut out = Self::zeros(self.kind());
        out.axpy(a, self);
        out
    }

    pub fn norm_sq(&self) -> T {
        self.inner(self)
    }

    pub fn is_finite(&self) -> bool {
        match self {
            Self::Psd(m) => m
                .data()
                .iter()
                .all(|z| z.re.is_finite() && z.im.is_finite()),
            Self::Nonneg(v) => v.iter().all(|x| x.is_finite()),
        }
    }
}

/// A block-sparse linear functional X ↦ Σ_terms ⟨A_blk, X_blk⟩.
pub type SparseBlocks<T> = Vec<(usize, Block<T>)>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Constraint<T: Real> {
    pub terms: SparseBlocks<T>,
    pub rhs: T,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct SdpProblem<T: Real> {
    pub blocks: Vec<BlockKind>,
    pub objective: SparseBlocks<T>,
    pub constraints: Vec<Constraint<T>>,
    /// Named ranges of consecutive constraints, for bookkeeping.
    pub groups: Vec<(String, usize)>,
}

impl<T: Real> SdpProblem<T> {
    pub fn new(blocks: Vec<BlockKind>) -> Self {
        Self {
            blocks,
            objective: Vec::new(),
            constraints: Vec::new(),
            groups: Vec::new(),
        }
    }

    pub fn set_objective(&mut self, terms: SparseBlocks<T>) {
        self.objective = terms;
    }

    pub fn add_constraint(&mut self, terms: SparseBlocks<T>, rhs: T) {
        self.constraints.push(Constraint { terms, rhs });
    }

    /// Starts a named group covering the constraints added from now on.
    pub fn begin_group(&mut self, name: impl Into<String>) {
        self.groups.push((name.into(), 0));
    }

    /// Closes the last group at the current constraint count.
    pub fn end_group(&mut self) {
        let before: usize = self.groups.iter().rev().skip(1).map(|g| g.1).sum();
        if let Some(g) = self.groups.last_mut() {
            g.1 = self.constraints.len() - before;
        }
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn rhs(&self) -> Vec<T> {
        self.constraints.iter().map(|c| c.rhs).collect()
    }

    /// Dense objective operator C.
    pub fn objective_blocks(&self) -> Vec<Block<T>> {
        let mut c: Vec<Block<T>> = self.blocks.iter().map(|k| Block::zeros(*k)).collect();
        for (b, term) in &self.objective {
            c[*b].axpy(T::one(), term);
        }
        c
    }

    /// A(X)
    pub fn apply(&self, x: &[Block<T>]) -> Vec<T> {
        self.constraints
            .iter()
            .map(|c| c.terms.iter().map(|(b, a)| a.inner(&x[*b])).sum())
            .collect()
    }

    /// Aᵀ(y) = Σ_k y_k A_k
    pub fn adjoint(&self, y: &[T]) -> Vec<Block<T>> {
        let mut out: Vec<Block<T>> = self.blocks.iter().map(|k| Block::zeros(*k)).collect();
        for (c, &yk) in self.constraints.iter().zip(y) {
            for (b, a) in &c.terms {
                out[*b].axpy(yk, a);
            }
        }
        out
    }

    pub fn objective_value(&self, x: &[Block<T>]) -> T {
        self.objective.iter().map(|(b, c)| c.inner(&x[*b])).sum()
    }

    /// Shapes match the block layout, PSD coefficients are Hermitian and
    /// all data is finite.
    pub fn validate(&self) -> Result<()> {
        let check = |terms: &SparseBlocks<T>, what: &str| -> Result<()> {
            for (b, a) in terms {
                let kind = self.blocks.get(*b).ok_or_else(|| {
                    Error::InvalidArgument(format!("{what} refers to missing block {b}"))
                })?;
                if a.kind() != *kind {
                    return Err(Error::DimMismatch(format!(
                        "{what}: block {b} is {:?}, term is {:?}",
                        kind,
                        a.kind()
                    )));
                }
                if !a.is_finite() {
                    return Err(Error::InvalidArgument(format!(
                        "{what} has non-finite data"
                    )));
                }
                if let Block::Psd(m) = a {
                    let dev = m.hermitian_deviation();
                    if dev > T::default_tol() * T::lit(10.0) * (T::one() + m.max_abs()) {
                        return Err(Error::NotHermitian(dev.as_f64()));
                    }
                }
            }
            Ok(())
        };
        check(&self.objective, "objective")?;
        for (k, c) in self.constraints.iter().enumerate() {
            check(&c.terms, &format!("constraint {k}"))?;
            if !c.rhs.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "constraint {k} has a non-finite right-hand side"
                )));
            }
        }
        if self.constraints.is_empty() {
            return Err(Error::InvalidArgument("problem has no constraints".into()));
        }
        Ok(())
    }
}
