//! Infeasible primal-dual interior-point method for [`SdpProblem`]s.
//!
//! Search directions are HKM (ΔX = σμZ⁻¹ − X − sym(X ΔZ Z⁻¹)) with a
//! Mehrotra predictor-corrector step. PSD blocks are complex Hermitian with
//! the real inner product Re Tr(A B), so the Schur complement
//! M_ij = Re Tr(A_i X A_j Z⁻¹) is real symmetric.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error as ThisError;

use super::problem::{Block, SdpProblem};
use crate::error::Error;
use crate::linalg::{
    cholesky, cholesky_real, cholesky_solve_real, invert_lower, min_eig, random, ComplexMatrix,
};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub max_iter: usize,
    /// Relative duality gap |p − d| / (1 + |p| + |d|).
    pub eps_gap: f64,
    /// Absolute primal residual ‖A(X) − b‖ and relative dual residual.
    pub eps_feas: f64,
    /// Drives a small perturbation of the starting point.
    pub seed: u64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            max_iter: 200_000,
            eps_gap: 1e-5,
            eps_feas: 1e-7,
            seed: 42,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub mu: f64,
    /// Lowest primal objective among iterates with primal residual ≤ eps_feas.
    pub best_objective: Option<f64>,
    /// Largest anti-Hermitian component over the PSD blocks of X and Z.
    pub hermitian_deviation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct SdpSolution<T: Real> {
    pub x: Vec<Block<T>>,
    pub y: Vec<T>,
    pub z: Vec<Block<T>>,
    pub objective: f64,
    pub dual_objective: f64,
    /// ‖A(X) − b‖₂
    pub primal_residual: f64,
    /// ‖C − Z − Aᵀy‖_F
    pub dual_residual: f64,
    /// max(0, −λ_min) over the blocks of X.
    pub psd_violation: f64,
    pub gap: f64,
    pub relative_gap: f64,
    pub iterations: usize,
    pub history: Vec<IterationRecord>,
}

impl<T: Real> SdpSolution<T> {
    /// Builds a solution report, recomputing every residual from the
    /// given variables.
    pub fn evaluate(
        problem: &SdpProblem<T>,
        x: Vec<Block<T>>,
        y: Vec<T>,
        z: Vec<Block<T>>,
        iterations: usize,
        history: Vec<IterationRecord>,
    ) -> crate::error::Result<Self> {
        let pobj = problem.objective_value(&x).as_f64();
        let dobj: f64 = problem
            .rhs()
            .iter()
            .zip(&y)
            .map(|(b, y)| (*b * *y).as_f64())
            .sum();
        let primal_residual = norm(&sub(&problem.rhs(), &problem.apply(&x)));
        let rd = dual_residual_blocks(problem, &y, &z);
        let dual_residual = blocks_norm(&rd);
        let mut psd_violation = 0.0f64;
        for b in &x {
            let lo = match b {
                Block::Psd(m) => min_eig(&m.hermitian_part())?,
                Block::Nonneg(v) => v.iter().fold(T::infinity(), |a, &b| a.min(b)),
            };
            psd_violation = psd_violation.max(-lo.as_f64());
        }
        let gap = (pobj - dobj).abs();
        Ok(Self {
            x,
            y,
            z,
            objective: pobj,
            dual_objective: dobj,
            primal_residual,
            dual_residual,
            psd_violation,
            gap,
            relative_gap: gap / (1.0 + pobj.abs() + dobj.abs()),
            iterations,
            history,
        })
    }

    pub fn best_objective(&self) -> Option<f64> {
        self.history.last().and_then(|h| h.best_objective)
    }
}

#[derive(Debug, ThisError)]
pub enum SdpError<T: Real> {
    #[error("iteration limit reached after {} iterations (objective {:.6e}, primal residual {:.3e})", best.iterations, best.objective, best.primal_residual)]
    IterationLimit { best: Box<SdpSolution<T>> },

    #[error("problem appears infeasible: {0}")]
    Infeasible(String),

    #[error(transparent)]
    Problem(#[from] Error),
}

fn norm<T: Real>(v: &[T]) -> f64 {
    v.iter().map(|x| (*x * *x).as_f64()).sum::<f64>().sqrt()
}

fn sub<T: Real>(a: &[T], b: &[T]) -> Vec<T> {
    a.iter().zip(b).map(|(x, y)| *x - *y).collect()
}

fn blocks_norm<T: Real>(b: &[Block<T>]) -> f64 {
    b.iter().map(|x| x.norm_sq().as_f64()).sum::<f64>().sqrt()
}

fn blocks_inner<T: Real>(a: &[Block<T>], b: &[Block<T>]) -> T {
    a.iter().zip(b).map(|(x, y)| x.inner(y)).sum()
}

/// C − Z − Aᵀy
fn dual_residual_blocks<T: Real>(p: &SdpProblem<T>, y: &[T], z: &[Block<T>]) -> Vec<Block<T>> {
    let mut rd = p.objective_blocks();
    let aty = p.adjoint(y);
    for ((r, zb), ab) in rd.iter_mut().zip(z).zip(&aty) {
        r.axpy(-T::one(), zb);
        r.axpy(-T::one(), ab);
    }
    rd
}

fn inverse<T: Real>(b: &Block<T>) -> Result<Block<T>, Error> {
    Ok(match b {
        Block::Psd(m) => {
            let li = invert_lower(&cholesky(m)?);
            Block::Psd(li.adjoint().matmul(&li))
        }
        Block::Nonneg(v) => Block::Nonneg(v.iter().map(|x| x.recip()).collect()),
    })
}

/// a · b · c, elementwise for vector blocks.
fn prod3<T: Real>(a: &Block<T>, b: &Block<T>, c: &Block<T>) -> Block<T> {
    match (a, b, c) {
        (Block::Psd(a), Block::Psd(b), Block::Psd(c)) => Block::Psd(a.matmul(b).matmul(c)),
        (Block::Nonneg(a), Block::Nonneg(b), Block::Nonneg(c)) => Block::Nonneg(
            a.iter()
                .zip(b)
                .zip(c)
                .map(|((x, y), z)| *x * *y * *z)
                .collect(),
        ),
        _ => panic!("mismatched blocks"),
    }
}

fn herm<T: Real>(b: Block<T>) -> Block<T> {
    match b {
        Block::Psd(m) => Block::Psd(m.hermitian_part()),
        v => v,
    }
}

/// Largest α with x + α·dx ⪰ 0 (infinite if dx ⪰ 0).
fn max_step<T: Real>(x: &Block<T>, dx: &Block<T>) -> Result<T, Error> {
    match (x, dx) {
        (Block::Psd(x), Block::Psd(dx)) => {
            let li = invert_lower(&cholesky(x)?);
            let w = li.matmul(dx).matmul(&li.adjoint()).hermitian_part();
            let lo = min_eig(&w)?;
            Ok(if lo < T::zero() {
                -lo.recip()
            } else {
                T::infinity()
            })
        }
        (Block::Nonneg(x), Block::Nonneg(dx)) => Ok(x
            .iter()
            .zip(dx)
            .filter(|(_, d)| **d < T::zero())
            .map(|(v, d)| -*v / *d)
            .fold(T::infinity(), |a, b| a.min(b))),
        _ => panic!("mismatched blocks"),
    }
}

fn hermitian_deviation<T: Real>(blocks: &[Block<T>]) -> f64 {
    blocks
        .iter()
        .filter_map(|b| b.as_psd())
        .map(|m| m.hermitian_deviation().as_f64())
        .fold(0.0, f64::max)
}

struct Direction<T: Real> {
    dx: Vec<Block<T>>,
    dy: Vec<T>,
    dz: Vec<Block<T>>,
}

fn starting_point<T: Real>(p: &SdpProblem<T>, seed: u64) -> (Vec<Block<T>>, Vec<Block<T>>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nmax = p.blocks.iter().map(|k| k.size()).max().unwrap_or(1) as f64;
    let c_norm = blocks_norm(&p.objective_blocks());
    let mut xi = 10f64.max(nmax.sqrt());
    let mut eta = xi.max(c_norm);
    for c in &p.constraints {
        let a = c
            .terms
            .iter()
            .map(|(_, t)| t.norm_sq().as_f64())
            .sum::<f64>()
            .sqrt();
        xi = xi.max((1.0 + c.rhs.as_f64().abs()) / (1.0 + a));
        eta = eta.max(a);
    }
    let mut perturbed = |scale: f64| -> Vec<Block<T>> {
        p.blocks
            .iter()
            .map(|k| match *k {
                super::problem::BlockKind::Psd(n) => {
                    let g = random::ginibre::<T, _>(n, n, &mut rng);
                    let pert = g.matmul(&g.adjoint()).scale_real(T::lit(0.05 / n as f64));
                    Block::Psd((ComplexMatrix::identity(n) + pert).scale_real(T::lit(scale)))
                }
                super::problem::BlockKind::Nonneg(n) => Block::Nonneg(
                    (0..n)
                        .map(|_| T::lit(scale * (1.0 + 0.05 * rng.random::<f64>())))
                        .collect(),
                ),
            })
            .collect()
    };
    let x = perturbed(xi);
    let z = perturbed(eta);
    (x, z)
}

/// Solves `p` to the tolerances in `opts`.
pub fn solve_sdp<T: Real>(
    p: &SdpProblem<T>,
    opts: &SolverOptions,
) -> Result<SdpSolution<T>, SdpError<T>> {
    p.validate()?;
    let m = p.num_constraints();
    let b = p.rhs();
    let c_norm = blocks_norm(&p.objective_blocks());
    let n_total: usize = p.blocks.iter().map(|k| k.size()).sum();
    let n_total_t = T::lit(n_total as f64);

    // constraint indices touching each block
    let mut touching: Vec<Vec<(usize, &Block<T>)>> = vec![Vec::new(); p.blocks.len()];
    for (k, c) in p.constraints.iter().enumerate() {
        for (blk, a) in &c.terms {
            touching[*blk].push((k, a));
        }
    }

    let (mut x, mut z) = starting_point(p, opts.seed);
    let mut y = vec![T::zero(); m];
    let mut history = Vec::new();
    let mut best: Option<f64> = None;
    let mut stalled = 0usize;

    for iter in 0..opts.max_iter {
        let rp = sub(&b, &p.apply(&x));
        let rd = dual_residual_blocks(p, &y, &z);
        let pobj = p.objective_value(&x).as_f64();
        let dobj: f64 = b.iter().zip(&y).map(|(b, y)| (*b * *y).as_f64()).sum();
        let mu = blocks_inner(&x, &z) / n_total_t;
        let pres = norm(&rp);
        let dres = blocks_norm(&rd) / (1.0 + c_norm);
        let rgap = (pobj - dobj).abs() / (1.0 + pobj.abs() + dobj.abs());
        if pres <= opts.eps_feas {
            best = Some(best.map_or(pobj, |v: f64| v.min(pobj)));
        }
        history.push(IterationRecord {
            iteration: iter,
            primal_objective: pobj,
            dual_objective: dobj,
            primal_residual: pres,
            dual_residual: dres,
            mu: mu.as_f64(),
            best_objective: best,
            hermitian_deviation: hermitian_deviation(&x).max(hermitian_deviation(&z)),
        });
        if pres <= opts.eps_feas && dres <= opts.eps_feas && rgap <= opts.eps_gap {
            return Ok(SdpSolution::evaluate(p, x, y, z, iter, history)?);
        }
        let size = blocks_norm(&x).max(blocks_norm(&z)).max(norm(&y));
        if !size.is_finite() || size > 1e12 {
            return Err(SdpError::Infeasible(format!(
                "iterates diverged (norm {size:.3e}) at iteration {iter}"
            )));
        }

        let zinv = z.iter().map(inverse).collect::<Result<Vec<_>, _>>()?;

        // Schur complement
        let mut schur = vec![T::zero(); m * m];
        for (blk, list) in touching.iter().enumerate() {
            for &(j, aj) in list {
                let k = prod3(&x[blk], aj, &zinv[blk]);
                for &(i, ai) in list {
                    schur[i * m + j] += ai.inner(&k);
                }
            }
        }
        for i in 0..m {
            for j in 0..i {
                let s = (schur[i * m + j] + schur[j * m + i]) * T::lit(0.5);
                schur[i * m + j] = s;
                schur[j * m + i] = s;
            }
        }
        let chol = factor_schur(&mut schur, m).ok_or_else(|| {
            SdpError::Infeasible(format!(
                "Schur complement lost definiteness at iteration {iter}"
            ))
        })?;

        let xrdz: Vec<Block<T>> = (0..x.len())
            .map(|k| prod3(&x[k], &rd[k], &zinv[k]))
            .collect();
        let a_xrdz = p.apply(&xrdz);
        let direction = |h: Vec<Block<T>>| -> Direction<T> {
            let ah = p.apply(&h);
            let rhs: Vec<T> = (0..m).map(|k| rp[k] - ah[k] + a_xrdz[k]).collect();
            let dy = cholesky_solve_real(&chol, m, &rhs);
            let aty = p.adjoint(&dy);
            let dz: Vec<Block<T>> = rd
                .iter()
                .zip(&aty)
                .map(|(r, a)| {
                    let mut d = r.clone();
                    d.axpy(-T::one(), a);
                    herm(d)
                })
                .collect();
            let dx = h
                .into_iter()
                .enumerate()
                .map(|(k, mut hk)| {
                    hk.axpy(-T::one(), &herm(prod3(&x[k], &dz[k], &zinv[k])));
                    herm(hk)
                })
                .collect();
            Direction { dx, dy, dz }
        };
        let steps = |d: &Direction<T>| -> Result<(T, T), Error> {
            let mut ap = T::infinity();
            let mut ad = T::infinity();
            for k in 0..x.len() {
                ap = ap.min(max_step(&x[k], &d.dx[k])?);
                ad = ad.min(max_step(&z[k], &d.dz[k])?);
            }
            Ok((ap, ad))
        };

        // predictor
        let h: Vec<Block<T>> = x.iter().map(|b| b.scaled(-T::one())).collect();
        let pred = direction(h);
        let (ap, ad) = steps(&pred)?;
        let (ap, ad) = (ap.min(T::one()), ad.min(T::one()));
        let mut mu_aff = T::zero();
        for k in 0..x.len() {
            let mut xa = x[k].clone();
            xa.axpy(ap, &pred.dx[k]);
            let mut za = z[k].clone();
            za.axpy(ad, &pred.dz[k]);
            mu_aff += xa.inner(&za);
        }
        mu_aff /= n_total_t;
        let ratio = (mu_aff / mu).max(T::zero()).min(T::one());
        let sigma = ratio * ratio * ratio;

        // corrector
        let h: Vec<Block<T>> = (0..x.len())
            .map(|k| {
                let mut hk = zinv[k].scaled(sigma * mu);
                hk.axpy(-T::one(), &x[k]);
                hk.axpy(-T::one(), &herm(prod3(&pred.dx[k], &pred.dz[k], &zinv[k])));
                hk
            })
            .collect();
        let corr = direction(h);
        let (ap_max, ad_max) = steps(&corr)?;
        let gamma = T::lit(0.9) + T::lit(0.09) * ap.min(ad);
        let ap = (gamma * ap_max).min(T::one());
        let ad = (gamma * ad_max).min(T::one());
        for k in 0..x.len() {
            x[k].axpy(ap, &corr.dx[k]);
            z[k].axpy(ad, &corr.dz[k]);
        }
        for (yk, dk) in y.iter_mut().zip(&corr.dy) {
            *yk += ad * *dk;
        }

        if ap < T::lit(1e-10) && ad < T::lit(1e-10) {
            stalled += 1;
            if stalled >= 30 {
                return Err(SdpError::Infeasible(format!(
                    "step lengths collapsed at iteration {iter}"
                )));
            }
        } else {
            stalled = 0;
        }
    }
    let iterations = opts.max_iter;
    Err(SdpError::IterationLimit {
        best: Box::new(SdpSolution::evaluate(p, x, y, z, iterations, history)?),
    })
}

/// Cholesky of the Schur complement, adding a tiny diagonal shift if
/// rounding has made it indefinite.
fn factor_schur<T: Real>(schur: &mut [T], m: usize) -> Option<Vec<T>> {
    if let Some(l) = cholesky_real(schur, m) {
        return Some(l);
    }
    let dmax = (0..m)
        .map(|i| schur[i * m + i].abs())
        .fold(T::zero(), |a, b| a.max(b));
    let mut shift = dmax * T::lit(1e-14);
    for _ in 0..6 {
        for i in 0..m {
            schur[i * m + i] += shift;
        }
        if let Some(l) = cholesky_real(schur, m) {
            return Some(l);
        }
        shift *= T::lit(100.0);
    }
    None
}
