//! Labeled tensor factors and the index gymnastics on them: partial trace,
//! partial transpose, reordering and padding with identities.

use num_complex::Complex;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::matrix::ComplexMatrix;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Ordered tensor factors with unique labels. Factor `k` of a composite
/// index is the `k`-th most significant digit.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SystemDims {
    systems: Vec<(String, usize)>,
}

impl SystemDims {
    pub fn new<S: Into<String>>(systems: impl IntoIterator<Item = (S, usize)>) -> Result<Self> {
        let systems: Vec<(String, usize)> =
            systems.into_iter().map(|(l, d)| (l.into(), d)).collect();
        for (i, (label, dim)) in systems.iter().enumerate() {
            if *dim == 0 {
                return Err(Error::DimMismatch(format!(
                    "system `{label}` has dimension 0"
                )));
            }
            if systems[..i].iter().any(|(l, _)| l == label) {
                return Err(Error::DuplicateLabel(label.clone()));
            }
        }
        Ok(Self { systems })
    }

    /// Panicking constructor for literal label lists.
    pub fn of(systems: &[(&str, usize)]) -> Self {
        Self::new(systems.iter().copied()).expect("valid literal system list")
    }

    pub fn len(&self) -> usize {
        self.systems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.systems.is_empty()
    }

    /// Product of all factor dimensions.
    pub fn total(&self) -> usize {
        self.systems.iter().map(|(_, d)| d).product()
    }

    pub fn labels(&self) -> Vec<&str> {
        self.systems.iter().map(|(l, _)| l.as_str()).collect()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.systems.iter().map(|(_, d)| *d).collect()
    }

    pub fn position(&self, label: &str) -> Result<usize> {
        self.systems
            .iter()
            .position(|(l, _)| l == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn dim_of(&self, label: &str) -> Result<usize> {
        Ok(self.systems[self.position(label)?].1)
    }

    pub fn positions(&self, labels: &[&str]) -> Result<Vec<usize>> {
        let pos = labels
            .iter()
            .map(|l| self.position(l))
            .collect::<Result<Vec<_>>>()?;
        for (i, p) in pos.iter().enumerate() {
            if pos[..i].contains(p) {
                return Err(Error::DuplicateLabel(labels[i].to_string()));
            }
        }
        Ok(pos)
    }

    /// The factors not named in `labels`, in their original order.
    pub fn without(&self, labels: &[&str]) -> Result<Self> {
        self.positions(labels)?;
        Ok(Self {
            systems: self
                .systems
                .iter()
                .filter(|(l, _)| !labels.contains(&l.as_str()))
                .cloned()
                .collect(),
        })
    }

    /// The named factors in the order given.
    pub fn select(&self, labels: &[&str]) -> Result<Self> {
        let pos = self.positions(labels)?;
        Ok(Self {
            systems: pos.iter().map(|&p| self.systems[p].clone()).collect(),
        })
    }

    pub fn relabel(&self, from: &str, to: &str) -> Result<Self> {
        let p = self.position(from)?;
        let mut systems = self.systems.clone();
        systems[p].0 = to.to_string();
        Self::new(systems)
    }

    pub fn check_square<T: Real>(&self, m: &ComplexMatrix<T>) -> Result<()> {
        let n = m.require_square()?;
        if n != self.total() {
            return Err(Error::DimMismatch(format!(
                "matrix of size {n} annotated with systems of total dimension {}",
                self.total()
            )));
        }
        Ok(())
    }
}

fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * dims[k + 1];
    }
    s
}

/// Flat offsets of every multi-index over the factors `which`, measured with
/// the strides of the full space.
fn offsets(dims: &[usize], which: &[usize]) -> Vec<usize> {
    let st = strides(dims);
    let mut out = vec![0usize];
    for &k in which {
        let mut next = Vec::with_capacity(out.len() * dims[k]);
        for &o in &out {
            for a in 0..dims[k] {
                next.push(o + a * st[k]);
            }
        }
        out = next;
    }
    out
}

fn check_order(n: usize, order: &[usize]) -> Result<()> {
    let mut seen = vec![false; n];
    if order.len() != n {
        return Err(Error::InvalidArgument(format!(
            "permutation of length {} for {n} systems",
            order.len()
        )));
    }
    for &k in order {
        if k >= n || seen[k] {
            return Err(Error::InvalidArgument(format!(
                "{order:?} is not a permutation"
            )));
        }
        seen[k] = true;
    }
    Ok(())
}

/// Reorders tensor factors: factor `k` of the result is factor `order[k]`
/// of the input.
pub fn permute_systems<T: Real>(
    m: &ComplexMatrix<T>,
    dims: &[usize],
    order: &[usize],
) -> Result<ComplexMatrix<T>> {
    let n = m.require_square()?;
    if dims.iter().product::<usize>() != n {
        return Err(Error::DimMismatch(format!(
            "dims {dims:?} for a matrix of size {n}"
        )));
    }
    check_order(dims.len(), order)?;
    let map = offsets(dims, order);
    let src = m.data();
    let mut data = Vec::with_capacity(n * n);
    for &r in &map {
        let row = &src[r * n..(r + 1) * n];
        data.extend(map.iter().map(|&c| row[c]));
    }
    ComplexMatrix::from_vec(n, n, data)
}

/// Vector counterpart of [`permute_systems`].
pub fn permute_vector<T: Real>(
    v: &[Complex<T>],
    dims: &[usize],
    order: &[usize],
) -> Result<Vec<Complex<T>>> {
    if dims.iter().product::<usize>() != v.len() {
        return Err(Error::DimMismatch(format!(
            "dims {dims:?} for a vector of length {}",
            v.len()
        )));
    }
    check_order(dims.len(), order)?;
    Ok(offsets(dims, order).into_iter().map(|i| v[i]).collect())
}

/// Traces out the factors listed in `traced`, keeping the rest in order.
pub fn partial_trace_systems<T: Real>(
    m: &ComplexMatrix<T>,
    dims: &[usize],
    traced: &[usize],
) -> Result<ComplexMatrix<T>> {
    let n = m.require_square()?;
    if dims.iter().product::<usize>() != n {
        return Err(Error::DimMismatch(format!(
            "dims {dims:?} for a matrix of size {n}"
        )));
    }
    if traced.iter().any(|&k| k >= dims.len()) {
        return Err(Error::InvalidArgument(format!(
            "system index out of range in {traced:?}"
        )));
    }
    let kept: Vec<usize> = (0..dims.len()).filter(|k| !traced.contains(k)).collect();
    let kept_off = offsets(dims, &kept);
    let traced_off = offsets(dims, traced);
    let nk = kept_off.len();
    let src = m.data();
    let mut out = ComplexMatrix::zeros(nk, nk);
    let dst = out.data_mut();
    for (i, &ri) in kept_off.iter().enumerate() {
        for (j, &cj) in kept_off.iter().enumerate() {
            let mut acc = Complex::zero();
            for &t in &traced_off {
                acc += src[(ri + t) * n + cj + t];
            }
            dst[i * nk + j] = acc;
        }
    }
    Ok(out)
}

/// Transposes the listed factors only.
pub fn partial_transpose_systems<T: Real>(
    m: &ComplexMatrix<T>,
    dims: &[usize],
    systems: &[usize],
) -> Result<ComplexMatrix<T>> {
    let n = m.require_square()?;
    if dims.iter().product::<usize>() != n {
        return Err(Error::DimMismatch(format!(
            "dims {dims:?} for a matrix of size {n}"
        )));
    }
    if systems.iter().any(|&k| k >= dims.len()) {
        return Err(Error::InvalidArgument(format!(
            "system index out of range in {systems:?}"
        )));
    }
    let others: Vec<usize> = (0..dims.len()).filter(|k| !systems.contains(k)).collect();
    let t_off = offsets(dims, systems);
    let o_off = offsets(dims, &others);
    let src = m.data();
    let mut out = ComplexMatrix::zeros(n, n);
    let dst = out.data_mut();
    for &ra in &o_off {
        for &rb in &t_off {
            for &ca in &o_off {
                for &cb in &t_off {
                    dst[(ra + rb) * n + ca + cb] = src[(ra + cb) * n + ca + rb];
                }
            }
        }
    }
    Ok(out)
}

/// Tr over the labeled factors; the result lives on the remaining factors.
pub fn partial_trace<T: Real>(
    m: &ComplexMatrix<T>,
    dims: &SystemDims,
    traced: &[&str],
) -> Result<ComplexMatrix<T>> {
    dims.check_square(m)?;
    let pos = dims.positions(traced)?;
    partial_trace_systems(m, &dims.dims(), &pos)
}

pub fn partial_transpose<T: Real>(
    m: &ComplexMatrix<T>,
    dims: &SystemDims,
    systems: &[&str],
) -> Result<ComplexMatrix<T>> {
    dims.check_square(m)?;
    let pos = dims.positions(systems)?;
    partial_transpose_systems(m, &dims.dims(), &pos)
}

/// Reorders `m` so that its factors appear in the order `target`.
pub fn reorder<T: Real>(
    m: &ComplexMatrix<T>,
    dims: &SystemDims,
    target: &[&str],
) -> Result<ComplexMatrix<T>> {
    dims.check_square(m)?;
    let pos = dims.positions(target)?;
    if pos.len() != dims.len() {
        return Err(Error::InvalidArgument(format!(
            "{target:?} does not list every system"
        )));
    }
    permute_systems(m, &dims.dims(), &pos)
}

/// Extends `m` (on `dims`) by identities on the factors of `full` that `dims`
/// lacks, with factors arranged in the order of `full`.
pub fn embed<T: Real>(
    m: &ComplexMatrix<T>,
    dims: &SystemDims,
    full: &SystemDims,
) -> Result<ComplexMatrix<T>> {
    dims.check_square(m)?;
    let mut padded = dims.clone();
    let mut out = m.clone();
    for (label, d) in full.systems.iter() {
        match dims.dim_of(label) {
            Ok(dm) if dm == *d => {}
            Ok(dm) => {
                return Err(Error::DimMismatch(format!(
                    "system `{label}` has dimension {dm} vs {d}"
                )));
            }
            Err(_) => {
                out = out.kron(&ComplexMatrix::identity(*d));
                padded.systems.push((label.clone(), *d));
            }
        }
    }
    if padded.len() != full.len() {
        return Err(Error::InvalidArgument(
            "operator carries systems missing from the target space".into(),
        ));
    }
    reorder(&out, &padded, &full.labels())
}
