//! Testers for two boxes used in an indefinite time direction, and the
//! minimax SDP for the worst-case error of telling S+ pairs from S− pairs.
//!
//! A tester {T₊, T₋} on (A_i, A_o, B_i, B_o) assigns to boxes with Choi
//! operators J_A, J_B the outcome probabilities Tr[T_x (J_A ⊗ J_B)ᵀ], where
//! J = Σ_ij |i⟩⟨j| ⊗ U|i⟩⟨j|U† is ordered (input, output).

pub mod constraints;
pub mod problem;
pub mod solver;

use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use constraints::{
    constraint_residuals, tester_constraints, ConstraintResiduals, TesterConstraints,
};
pub use problem::{Block, BlockKind, Constraint, SdpProblem};
pub use solver::{solve_sdp, IterationRecord, SdpError, SdpSolution, SolverOptions};

use crate::error::{Error, Result};
use crate::game::{builtin_sets, GamePair};
use crate::linalg::{double_ket_projector, min_eig, random, sqrt_psd, ComplexMatrix, SystemDims};
use crate::scalar::Real;

/// Tolerance for accepting a tester (PSD and constraint residuals).
pub const TESTER_TOL: f64 = 1e-6;

/// Block indices of the minimax SDP.
pub const T_PLUS_BLOCK: usize = 0;
pub const T_MINUS_BLOCK: usize = 1;
/// Nonnegative block [t, s_1, ..., s_n] of the epigraph variable and slacks.
pub const EPIGRAPH_BLOCK: usize = 2;

/// Σ_ij |i⟩⟨j| ⊗ U|i⟩⟨j|U† on (input, output).
pub fn box_choi<T: Real>(u: &ComplexMatrix<T>) -> ComplexMatrix<T> {
    double_ket_projector(&u.transpose())
}

/// (J_V ⊗ J_U)ᵀ on (A_i, A_o, B_i, B_o): the V box sits in slot A.
pub fn pair_operator<T: Real>(u: &ComplexMatrix<T>, v: &ComplexMatrix<T>) -> ComplexMatrix<T> {
    box_choi(v).kron(&box_choi(u)).transpose()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Tester<T: Real> {
    /// Guess "S+".
    pub t_plus: ComplexMatrix<T>,
    /// Guess "S−".
    pub t_minus: ComplexMatrix<T>,
    pub dims: SystemDims,
}

impl<T: Real> Tester<T> {
    pub fn new(
        t_plus: ComplexMatrix<T>,
        t_minus: ComplexMatrix<T>,
        d: usize,
        tol: T,
    ) -> Result<Self> {
        let t = Self::unchecked(t_plus, t_minus, d)?;
        t.validate(tol)?;
        Ok(t)
    }

    fn unchecked(t_plus: ComplexMatrix<T>, t_minus: ComplexMatrix<T>, d: usize) -> Result<Self> {
        let n = d.pow(4);
        for m in [&t_plus, &t_minus] {
            if m.shape() != (n, n) {
                return Err(Error::DimMismatch(format!(
                    "tester element {:?} for d = {d}",
                    m.shape()
                )));
            }
        }
        let dims = SystemDims::new([("A_i", d), ("A_o", d), ("B_i", d), ("B_o", d)])?;
        Ok(Self {
            t_plus,
            t_minus,
            dims,
        })
    }

    /// T₊ = T₋ = I/(2d²).
    pub fn uniform(d: usize) -> Self {
        let half = ComplexMatrix::identity(d.pow(4)).scale_real(T::lit(0.5 / (d * d) as f64));
        Self::unchecked(half.clone(), half, d).expect("shapes agree")
    }

    pub fn d(&self) -> usize {
        self.dims.dims()[0]
    }

    pub fn total(&self) -> ComplexMatrix<T> {
        self.t_plus.clone() + self.t_minus.clone()
    }

    pub fn residuals(&self) -> Result<ConstraintResiduals> {
        constraint_residuals(&self.total(), self.d())
    }

    pub fn validate(&self, tol: T) -> Result<()> {
        for m in [&self.t_plus, &self.t_minus] {
            let dev = m.hermitian_deviation();
            if dev > tol {
                return Err(Error::NotHermitian(dev.as_f64()));
            }
            let lo = min_eig(&m.hermitian_part())?;
            if lo < -tol {
                return Err(Error::NotPsd(lo.as_f64()));
            }
        }
        let r = self.residuals()?;
        if r.max() > tol.as_f64() {
            return Err(Error::InvalidArgument(format!(
                "tester constraints violated: {r:?}"
            )));
        }
        Ok(())
    }

    /// Tr[T₊ P] and Tr[T₋ P] for the boxes (U, V).
    pub fn probabilities(&self, u: &ComplexMatrix<T>, v: &ComplexMatrix<T>) -> (T, T) {
        let p = pair_operator(u, v);
        (
            self.t_plus.trace_product(&p).re,
            self.t_minus.trace_product(&p).re,
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairError {
    pub name: String,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorTerms {
    /// Tr[T₋ P] for each S+ pair.
    pub e0: Vec<PairError>,
    /// Tr[T₊ P] for each S− pair.
    pub e1: Vec<PairError>,
}

impl ErrorTerms {
    pub fn max(&self) -> f64 {
        self.e0
            .iter()
            .chain(&self.e1)
            .map(|e| e.value)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.e0.iter().chain(&self.e1).map(|e| e.value)
    }
}

fn check_pairs<T: Real>(pairs: &[GamePair<T>], d: usize) -> Result<()> {
    for p in pairs {
        if p.u.shape() != (d, d) || p.v.shape() != (d, d) {
            return Err(Error::DimMismatch(format!(
                "pair `{}` is not {d}x{d}",
                p.name
            )));
        }
    }
    Ok(())
}

/// Error probabilities of a valid tester on the two pair sets.
pub fn error_terms<T: Real>(
    tester: &Tester<T>,
    s_plus: &[GamePair<T>],
    s_minus: &[GamePair<T>],
) -> Result<ErrorTerms> {
    tester.validate(T::lit(TESTER_TOL))?;
    let d = tester.d();
    check_pairs(s_plus, d)?;
    check_pairs(s_minus, d)?;
    let term = |p: &GamePair<T>, plus: bool| {
        let (tp, tm) = tester.probabilities(&p.u, &p.v);
        PairError {
            name: p.name.clone(),
            value: if plus { tm } else { tp }.as_f64(),
        }
    };
    Ok(ErrorTerms {
        e0: s_plus.iter().map(|p| term(p, true)).collect(),
        e1: s_minus.iter().map(|p| term(p, false)).collect(),
    })
}

/// The minimax program min t s.t. e_k(T±) ≤ t, T± ⪰ 0, T₊ + T₋ a tester.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct MinimaxSdp<T: Real> {
    pub problem: SdpProblem<T>,
    pub constraints: TesterConstraints<T>,
    pub pair_names: Vec<String>,
    pub n_plus: usize,
    pub n_minus: usize,
}

impl<T: Real> MinimaxSdp<T> {
    pub fn d(&self) -> usize {
        self.constraints.d
    }

    /// Reads the tester out of a solution without validating it.
    pub fn tester(&self, x: &[Block<T>]) -> Result<Tester<T>> {
        let get = |k: usize| {
            x.get(k).and_then(|b| b.as_psd()).cloned().ok_or_else(|| {
                Error::InvalidArgument(format!("solution block {k} is not a PSD block"))
            })
        };
        Tester::unchecked(get(T_PLUS_BLOCK)?, get(T_MINUS_BLOCK)?, self.d())
    }

    /// Packs a tester and epigraph value into solver variables, with the
    /// slacks set to t − e_k.
    pub fn point(&self, tester: &Tester<T>, t: T) -> Vec<Block<T>> {
        let mut lp = vec![t];
        let epi = &self.problem.constraints
            [self.problem.constraints.len() - self.n_plus - self.n_minus..];
        let x = vec![
            Block::Psd(tester.t_plus.clone()),
            Block::Psd(tester.t_minus.clone()),
        ];
        for c in epi {
            let e: T = c
                .terms
                .iter()
                .filter(|(b, _)| *b != EPIGRAPH_BLOCK)
                .map(|(b, a)| a.inner(&x[*b]))
                .sum();
            lp.push(t - e);
        }
        let mut out = x;
        out.push(Block::Nonneg(lp));
        out
    }
}

pub fn build_minimax_sdp<T: Real>(
    s_plus: &[GamePair<T>],
    s_minus: &[GamePair<T>],
) -> Result<MinimaxSdp<T>> {
    let d = s_plus
        .first()
        .or(s_minus.first())
        .map(|p| p.u.rows())
        .ok_or_else(|| Error::InvalidArgument("no pairs".into()))?;
    check_pairs(s_plus, d)?;
    check_pairs(s_minus, d)?;
    let constraints = tester_constraints::<T>(d)?;
    let n = d.pow(4);
    let n_pairs = s_plus.len() + s_minus.len();
    let mut p = SdpProblem::new(vec![
        BlockKind::Psd(n),
        BlockKind::Psd(n),
        BlockKind::Nonneg(1 + n_pairs),
    ]);
    let mut c = vec![T::zero(); 1 + n_pairs];
    c[0] = T::one();
    p.set_objective(vec![(EPIGRAPH_BLOCK, Block::Nonneg(c))]);

    let both = |g: &ComplexMatrix<T>| {
        vec![
            (T_PLUS_BLOCK, Block::Psd(g.clone())),
            (T_MINUS_BLOCK, Block::Psd(g.clone())),
        ]
    };
    let mut k = 0;
    for (f, name) in ["i", "ii", "iii"].iter().enumerate() {
        p.begin_group(format!("family-{name}"));
        for g in &constraints.basis[k..k + constraints.family_ranks[f]] {
            p.add_constraint(both(g), T::zero());
        }
        k += constraints.family_ranks[f];
        p.end_group();
    }
    p.begin_group("family-iv");
    let (tr, rhs) = constraints.trace_row();
    p.add_constraint(both(&tr), rhs);
    p.end_group();

    // e_k(T) − t + s_k = 0
    p.begin_group("epigraph");
    let mut names = Vec::with_capacity(n_pairs);
    let rows = s_plus
        .iter()
        .map(|q| (q, T_MINUS_BLOCK))
        .chain(s_minus.iter().map(|q| (q, T_PLUS_BLOCK)));
    for (k, (pair, blk)) in rows.enumerate() {
        let mut lp = vec![T::zero(); 1 + n_pairs];
        lp[0] = -T::one();
        lp[k + 1] = T::one();
        p.add_constraint(
            vec![
                (blk, Block::Psd(pair_operator(&pair.u, &pair.v))),
                (EPIGRAPH_BLOCK, Block::Nonneg(lp)),
            ],
            T::zero(),
        );
        names.push(pair.name.clone());
    }
    p.end_group();
    p.validate()?;
    Ok(MinimaxSdp {
        problem: p,
        constraints,
        pair_names: names,
        n_plus: s_plus.len(),
        n_minus: s_minus.len(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    /// Primal objective t.
    pub objective: f64,
    pub dual_objective: f64,
    pub gap: f64,
    pub relative_gap: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub psd_violation: f64,
    pub iterations: usize,
    /// Largest error term of the returned tester, recomputed from T±.
    pub max_error: f64,
    pub errors: ErrorTerms,
    pub tester_residuals: ConstraintResiduals,
    pub options: SolverOptions,
    pub wall_time_s: f64,
}

/// Solves the minimax SDP for the built-in qubit pair sets.
pub fn optimal_error_bound(
    d: usize,
    opts: &SolverOptions,
) -> std::result::Result<BoundReport, SdpError<f64>> {
    if d != 2 {
        return Err(Error::Unsupported(format!(
            "built-in pair sets exist for d = 2 only, not {d}"
        ))
        .into());
    }
    let start = Instant::now();
    let (s_plus, s_minus) = builtin_sets::<f64>();
    let sdp = build_minimax_sdp(&s_plus, &s_minus)?;
    let sol = solve_sdp(&sdp.problem, opts)?;
    let tester = sdp.tester(&sol.x)?;
    let errors = error_terms(&tester, &s_plus, &s_minus)?;
    Ok(BoundReport {
        objective: sol.objective,
        dual_objective: sol.dual_objective,
        gap: sol.gap,
        relative_gap: sol.relative_gap,
        primal_residual: sol.primal_residual,
        dual_residual: sol.dual_residual,
        psd_violation: sol.psd_violation,
        iterations: sol.iterations,
        max_error: errors.max(),
        tester_residuals: tester.residuals()?,
        errors,
        options: *opts,
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

/// A random valid tester: a random PSD operator is projected onto the
/// affine constraint set and pulled toward I/d² just enough to stay PSD;
/// the split T₊ = √T E √T uses a random 0 ⪯ E ⪯ I.
pub fn random_feasible_tester<T: Real, R: Rng + ?Sized>(
    c: &TesterConstraints<T>,
    rng: &mut R,
) -> Result<Tester<T>> {
    let d = c.d;
    let n = c.dim();
    let rank = rng.random_range(1..=n);
    let g = random::ginibre::<T, _>(n, rank, rng);
    let w = g.matmul(&g.adjoint());
    let w = w.scale_real(T::lit((d * d) as f64) / w.trace().re);
    let center = ComplexMatrix::identity(n).scale_real(T::lit(1.0 / (d * d) as f64));
    let dir = c.project(&w) - center.clone();
    let lo = min_eig(&dir.hermitian_part())?;
    let floor = T::lit(1.0 / (d * d) as f64);
    let s = if lo < -floor { floor / -lo } else { T::one() };
    let t = (center + dir.scale_real(s)).hermitian_part();

    let u = random::haar_unitary::<T, _>(n, rng);
    let lambdas: Vec<T> = (0..n).map(|_| T::lit(rng.random::<f64>())).collect();
    let e = u
        .matmul(&ComplexMatrix::real_diag(&lambdas))
        .matmul(&u.adjoint());
    let root = sqrt_psd(&t)?;
    let t_plus = root.matmul(&e).matmul(&root).hermitian_part();
    let t_minus = (t - t_plus.clone()).hermitian_part();
    Tester::new(t_plus, t_minus, d, T::lit(TESTER_TOL))
}

/// Smallest eigenvalue over both tester elements.
pub fn tester_min_eig<T: Real>(tester: &Tester<T>) -> Result<T> {
    Ok(min_eig(&tester.t_plus.hermitian_part())?.min(min_eig(&tester.t_minus.hermitian_part())?))
}

#[cfg(test)]
mod tests;
