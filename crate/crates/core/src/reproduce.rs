//! The twelve end-to-end checks behind `reproduce-all` and the acceptance
//! test target, each with its pinned tolerance.

use std::time::Instant;

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::channels::{compose, random_channel, random_mixed_unitary, Channel, ChoiOperator};
use crate::error::{Error, Result};
use crate::game::{builtin_sets, play_game};
use crate::haar::{
    appendix_d_inequality_d2, appendix_d_inequality_d3, frame_operator, frame_operator_closed_form,
    single_qubit_clifford_group, TwirlMethod,
};
use crate::inversion::{
    counterexample_channel, decompose_channel, invert_channel, invert_general,
    project_bistochastic, qubit_adjoint_extension_g, qubit_projection_closed_form,
    unitary_decomposition_coefficient, InversionKind,
};
use crate::linalg::{
    double_ket, double_ket_projector, eigvals_hermitian, ket, min_eig, random, vdistance,
    ComplexMatrix,
};
use crate::teleport::{postselected_channel, simulate_flip_circuit};
use crate::testersdp::{optimal_error_bound, SolverOptions};
use crate::timeflip::{check_supermap_normalization, flip_supermap_choi, time_flip};

type M = ComplexMatrix<f64>;

pub const BOUND_TARGET: f64 = 0.112149;
pub const BOUND_TOL: f64 = 5e-4;
pub const BOUND_MAX_SECONDS: f64 = 600.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReproduceConfig {
    pub seed: u64,
    pub solver: SolverOptions,
    /// Multiplies every numeric tolerance; 1 runs the pinned values.
    pub tolerance_scale: f64,
    /// Overrides the sample count of the randomized criteria.
    pub trials: Option<usize>,
}

impl ReproduceConfig {
    fn tol(&self, t: f64) -> f64 {
        t * self.tolerance_scale
    }

    fn trials(&self, default: usize) -> usize {
        self.trials.unwrap_or(default)
    }
}

impl Default for ReproduceConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            solver: SolverOptions::default(),
            tolerance_scale: 1.0,
            trials: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriterionResult {
    pub id: usize,
    pub name: String,
    pub passed: bool,
    /// Worst observed deviation for the criterion's main check.
    pub measured: f64,
    pub tolerance: f64,
    pub detail: String,
    pub wall_time_s: f64,
}

impl CriterionResult {
    /// One-line summary.
    pub fn line(&self) -> String {
        format!(
            "[{}] {:>2}. {} (measured {:.3e}, tolerance {:.1e}) {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.measured,
            self.tolerance,
            self.detail
        )
    }
}

pub const CRITERIA: [&str; 12] = [
    "SDP bound",
    "perfect game",
    "teleportation realization",
    "bistochastic projection",
    "d=3 counterexample",
    "d=2 positivity",
    "frame operator",
    "unitary-span reconstruction",
    "supermap normalization",
    "operator inequalities",
    "inversion axioms",
    "G-extension",
];

/// Tracks the worst value of a deviation.
#[derive(Default)]
struct Worst(f64);

impl Worst {
    fn see(&mut self, v: f64) {
        if !(v <= self.0) {
            self.0 = v;
        }
    }
}

struct Outcome {
    passed: bool,
    measured: f64,
    tolerance: f64,
    detail: String,
}

fn rng_for(cfg: &ReproduceConfig, id: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(id as u64 * 0x9E37_79B9))
}

fn random_control<R: Rng + ?Sized>(rng: &mut R) -> (Complex<f64>, Complex<f64>) {
    let v = random::random_state::<f64, _>(2, rng);
    (v[0], v[1])
}

fn bound(cfg: &ReproduceConfig) -> Result<Outcome> {
    let start = Instant::now();
    let r = optimal_error_bound(2, &cfg.solver)
        .map_err(|e| Error::InvalidArgument(format!("solver failed: {e}")))?;
    let secs = start.elapsed().as_secs_f64();
    let dev = (r.objective - BOUND_TARGET).abs();
    Ok(Outcome {
        passed: dev <= cfg.tol(BOUND_TOL)
            && r.primal_residual <= cfg.tol(1e-7)
            && secs <= BOUND_MAX_SECONDS,
        measured: dev,
        tolerance: cfg.tol(BOUND_TOL),
        detail: format!(
            "objective {:.7}, dual {:.7}, primal residual {:.1e}, {} iterations, {:.2} s",
            r.objective, r.dual_objective, r.primal_residual, r.iterations, secs
        ),
    })
}

fn game(cfg: &ReproduceConfig) -> Result<Outcome> {
    let (sp, sm) = builtin_sets::<f64>();
    let mut worst = Worst::default();
    let mut wrong_label = 0;
    for pair in sp.iter().chain(&sm) {
        let res = play_game(&pair.u, &pair.v)?;
        if res.outcome != pair.declared_class {
            wrong_label += 1;
        }
        worst.see(res.error_probability(pair.declared_class));
    }
    let n = sp.len() + sm.len();
    Ok(Outcome {
        passed: worst.0 <= cfg.tol(1e-12) && wrong_label == 0 && sp.len() == 13 && sm.len() == 8,
        measured: worst.0,
        tolerance: cfg.tol(1e-12),
        detail: format!(
            "{n} pairs ({} plus, {} minus), {wrong_label} misclassified",
            sp.len(),
            sm.len()
        ),
    })
}

fn teleport(cfg: &ReproduceConfig) -> Result<Outcome> {
    let mut rng = rng_for(cfg, 3);
    let mut prob = Worst::default();
    let mut choi = Worst::default();
    for (d, count) in [(2usize, cfg.trials(50)), (3, cfg.trials(20))] {
        for _ in 0..count {
            let u = random::haar_unitary::<f64, _>(d, &mut rng);
            let psi = random::random_state::<f64, _>(d, &mut rng);
            let (a, b) = random_control(&mut rng);
            let out = simulate_flip_circuit(&u, &psi, a, b)?;
            prob.see((out[0].probability - 1.0 / (d * d) as f64).abs());
            let flip = time_flip(&Channel::unitary(&u)?)?;
            choi.see(postselected_channel(&u)?.choi().distance(&flip.choi()));
        }
    }
    Ok(Outcome {
        passed: prob.0 <= cfg.tol(1e-12) && choi.0 <= cfg.tol(1e-10),
        measured: prob.0,
        tolerance: cfg.tol(1e-12),
        detail: format!(
            "{} unitaries; worst Choi distance {:.1e} (tolerance {:.0e})",
            cfg.trials(50) + cfg.trials(20),
            choi.0,
            cfg.tol(1e-10)
        ),
    })
}

fn projection(cfg: &ReproduceConfig) -> Result<Outcome> {
    let mut rng = rng_for(cfg, 4);
    let mut idem = Worst::default();
    let mut dec = Worst::default();
    for k in 0..cfg.trials(100) {
        let d = 2 + k % 2;
        let n_kraus = 1 + rng.random_range(0..d * d);
        let c = random_channel::<f64, _>(d, n_kraus, &mut rng);
        let p = project_bistochastic(&c.choi())?;
        idem.see(project_bistochastic(&p)?.distance(&p));
        dec.see(decompose_channel(&c)?.recombine().distance(&c.choi()));
    }
    let mut theta = Worst::default();
    for d in [2, 3] {
        let rho0 = random::random_density::<f64, _>(d, d, &mut rng);
        let k = Channel::constant(&rho0)?;
        for kind in [InversionKind::Transpose, InversionKind::Adjoint] {
            theta.see(
                invert_general(&k, kind)?
                    .choi()
                    .distance(&Channel::depolarizing(d).choi()),
            );
        }
    }
    let worst = idem.0.max(dec.0).max(theta.0);
    Ok(Outcome {
        passed: worst <= cfg.tol(1e-12),
        measured: worst,
        tolerance: cfg.tol(1e-12),
        detail: format!(
            "idempotence {:.1e}, decomposition {:.1e}, constant channel {:.1e} over {} channels",
            idem.0,
            dec.0,
            theta.0,
            cfg.trials(100)
        ),
    })
}

fn counterexample(cfg: &ReproduceConfig) -> Result<Outcome> {
    let d = 3;
    let c = counterexample_channel::<f64>(d)?;
    let p = project_bistochastic(&c.choi())?;
    let v = p.apply(&M::projector(&ket(d, 0)))?[(0, 0)].re;
    let dev = (v - (-1.0 / 6.0)).abs();
    let raised = matches!(
        invert_general(&c, InversionKind::Transpose),
        Err(Error::NonPositiveProjection(_))
    );
    Ok(Outcome {
        passed: dev <= cfg.tol(1e-12) && raised,
        measured: dev,
        tolerance: cfg.tol(1e-12),
        detail: format!("diagonal entry {v:.15}, non-positive projection error raised: {raised}"),
    })
}

fn qubit_positivity(cfg: &ReproduceConfig) -> Result<Outcome> {
    let mut rng = rng_for(cfg, 6);
    let mut neg = Worst::default();
    let mut closed = Worst::default();
    let mut lowest = f64::INFINITY;
    for _ in 0..cfg.trials(1000) {
        let psi = random::random_state::<f64, _>(4, &mut rng);
        let j = ChoiOperator::new(M::projector(&psi), 2, 2)?;
        let p = project_bistochastic(&j)?;
        let lo = min_eig(p.matrix())?;
        lowest = lowest.min(lo);
        neg.see(-lo);
        closed.see(p.matrix().distance(&qubit_projection_closed_form(&psi)?));
    }
    Ok(Outcome {
        passed: lowest >= -cfg.tol(1e-12) && closed.0 <= cfg.tol(1e-12),
        measured: closed.0,
        tolerance: cfg.tol(1e-12),
        detail: format!(
            "{} rank-1 maps; lowest eigenvalue {lowest:.2e}",
            cfg.trials(1000)
        ),
    })
}

fn frame(cfg: &ReproduceConfig) -> Result<Outcome> {
    let f2 = frame_operator::<f64>(2, TwirlMethod::Design)?;
    let dev2 = f2.distance(&frame_operator_closed_form(2));
    let spec = eigvals_hermitian(&f2.hermitian_part())?;
    let mut want = vec![0.25];
    want.extend([1.0 / 12.0; 9]);
    want.extend([0.0; 6]);
    let spec_dev = spec
        .iter()
        .zip(&want)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let f3 = frame_operator::<f64>(3, TwirlMethod::Weingarten)?;
    let dev3 = f3.distance(&frame_operator_closed_form(3));
    Ok(Outcome {
        passed: dev2 <= cfg.tol(1e-10) && spec_dev <= cfg.tol(1e-10) && dev3 <= cfg.tol(1e-9),
        measured: dev2,
        tolerance: cfg.tol(1e-10),
        detail: format!(
            "spectrum deviation {spec_dev:.1e}; d=3 Weingarten deviation {dev3:.1e} (tolerance {:.0e})",
            cfg.tol(1e-9)
        ),
    })
}

fn reconstruction(cfg: &ReproduceConfig) -> Result<Outcome> {
    let mut rng = rng_for(cfg, 8);
    let design = single_qubit_clifford_group::<f64>();
    let n = design.len() as f64;
    let mut worst = Worst::default();
    for _ in 0..cfg.trials(20) {
        let terms = rng.random_range(2..=5);
        let b = random_mixed_unitary::<f64, _>(2, terms, &mut rng);
        let mut sum = M::zeros(4, 4);
        for u in &design.unitaries {
            sum +=
                &double_ket_projector(u).scale_real(unitary_decomposition_coefficient(&b, u)? / n);
        }
        worst.see(sum.distance(b.choi().matrix()));
    }
    Ok(Outcome {
        passed: worst.0 <= cfg.tol(1e-10),
        measured: worst.0,
        tolerance: cfg.tol(1e-10),
        detail: format!("{} channels, 24-element Clifford average", cfg.trials(20)),
    })
}

fn supermap(cfg: &ReproduceConfig) -> Result<Outcome> {
    let mut worst = Worst::default();
    let mut all = true;
    for d in [2, 3] {
        let s = flip_supermap_choi::<f64>(d);
        for s in [s.clone(), s.exchange_input_output()?] {
            let r = check_supermap_normalization(&s, cfg.tol(1e-12))?;
            all &= r.passed();
            worst.see(r.residual_identity.max(r.residual_marginals));
        }
    }
    Ok(Outcome {
        passed: all && worst.0 <= cfg.tol(1e-12),
        measured: worst.0,
        tolerance: cfg.tol(1e-12),
        detail: "d = 2, 3, inputs and outputs of A exchanged as well".into(),
    })
}

fn inequalities(cfg: &ReproduceConfig) -> Result<Outcome> {
    let q = appendix_d_inequality_d2::<f64>(cfg.tol(1e-9))?;
    let g = appendix_d_inequality_d3::<f64>(cfg.tol(1e-8))?;
    Ok(Outcome {
        passed: q.holds && g.holds,
        measured: (-q.min_eig).max(0.0),
        tolerance: cfg.tol(1e-9),
        detail: format!(
            "d=2 min eigenvalue {:.3e}; d=3 min eigenvalue {:.3e} (tolerance {:.0e})",
            q.min_eig,
            g.min_eig,
            cfg.tol(1e-8)
        ),
    })
}

fn mixture(a: &Channel<f64>, p: f64, b: &Channel<f64>) -> Result<Channel<f64>> {
    let mut kraus: Vec<M> = a.kraus().iter().map(|k| k.scale_real(p.sqrt())).collect();
    kraus.extend(b.kraus().iter().map(|k| k.scale_real((1.0 - p).sqrt())));
    Channel::new(kraus)
}

fn axioms(cfg: &ReproduceConfig) -> Result<Outcome> {
    let mut rng = rng_for(cfg, 11);
    let mut worst = Worst::default();
    let mut kraus = Worst::default();
    for trial in 0..cfg.trials(40) {
        let d = 2 + trial % 2;
        let a = random_mixed_unitary::<f64, _>(d, 3, &mut rng);
        let b = random_mixed_unitary::<f64, _>(d, 2, &mut rng);
        let p = rng.random::<f64>();
        for kind in [InversionKind::Transpose, InversionKind::Adjoint] {
            let inv = |c: &Channel<f64>| invert_channel(c, kind);
            // order reversal
            let lhs = inv(&compose(&b, &a)?);
            let rhs = compose(&inv(&a), &inv(&b))?;
            worst.see(lhs.choi().distance(&rhs.choi()));
            // identity
            worst.see(
                inv(&Channel::identity(d))
                    .choi()
                    .distance(&Channel::identity(d).choi()),
            );
            // mixtures
            let lhs = inv(&mixture(&a, p, &b)?).choi();
            let rhs = inv(&a).choi().combine(p, &inv(&b).choi(), 1.0 - p)?;
            worst.see(lhs.distance(&rhs));
            // involution
            worst.see(inv(&inv(&a)).choi().distance(&a.choi()));
        }
        // time flip does not depend on the Kraus representation
        let n = a.kraus().len() + 2;
        let w = random::haar_unitary::<f64, _>(n, &mut rng);
        let w = M::from_fn(n, a.kraus().len(), |i, j| w[(i, j)]);
        kraus.see(
            time_flip(&a.remix(&w)?)?
                .choi()
                .distance(&time_flip(&a)?.choi()),
        );
    }
    let all = worst.0.max(kraus.0);
    Ok(Outcome {
        passed: all <= cfg.tol(1e-12),
        measured: all,
        tolerance: cfg.tol(1e-12),
        detail: format!(
            "{} channel pairs; axioms {:.1e}, Kraus independence {:.1e}",
            cfg.trials(40),
            worst.0,
            kraus.0
        ),
    })
}

fn g_extension(cfg: &ReproduceConfig) -> Result<Outcome> {
    let mut rng = rng_for(cfg, 12);
    let g = qubit_adjoint_extension_g::<f64>();
    let mut worst = Worst::default();
    for _ in 0..cfg.trials(100) {
        let u = random::haar_special_unitary::<f64, _>(2, &mut rng);
        let gu = g.matvec(&double_ket(&u));
        let minus: Vec<Complex<f64>> = double_ket(&u.adjoint()).into_iter().map(|z| -z).collect();
        worst.see(vdistance(&gu, &minus));
    }
    Ok(Outcome {
        passed: worst.0 <= cfg.tol(1e-12),
        measured: worst.0,
        tolerance: cfg.tol(1e-12),
        detail: format!("{} SU(2) elements", cfg.trials(100)),
    })
}

/// Runs criterion `id` (1-based).
pub fn run_criterion(id: usize, cfg: &ReproduceConfig) -> Result<CriterionResult> {
    let name = CRITERIA
        .get(id.wrapping_sub(1))
        .ok_or_else(|| Error::InvalidArgument(format!("no criterion {id}")))?;
    let start = Instant::now();
    let out = match id {
        1 => bound(cfg),
        2 => game(cfg),
        3 => teleport(cfg),
        4 => projection(cfg),
        5 => counterexample(cfg),
        6 => qubit_positivity(cfg),
        7 => frame(cfg),
        8 => reconstruction(cfg),
        9 => supermap(cfg),
        10 => inequalities(cfg),
        11 => axioms(cfg),
        _ => g_extension(cfg),
    };
    let out = out.unwrap_or_else(|e| Outcome {
        passed: false,
        measured: f64::NAN,
        tolerance: f64::NAN,
        detail: format!("error: {e}"),
    });
    Ok(CriterionResult {
        id,
        name: (*name).to_string(),
        passed: out.passed,
        measured: out.measured,
        tolerance: out.tolerance,
        detail: out.detail,
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

pub fn run_all(cfg: &ReproduceConfig) -> Vec<CriterionResult> {
    (1..=CRITERIA.len())
        .map(|id| run_criterion(id, cfg).expect("valid id"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_criterion() {
        assert!(run_criterion(0, &ReproduceConfig::default()).is_err());
        assert!(run_criterion(13, &ReproduceConfig::default()).is_err());
    }

    #[test]
    fn zero_tolerance_fails() {
        let cfg = ReproduceConfig {
            tolerance_scale: 0.0,
            ..Default::default()
        };
        assert!(!run_criterion(12, &cfg).unwrap().passed);
    }

    #[test]
    fn cheap_criteria_pass() {
        for id in [2, 5, 9, 12] {
            let r = run_criterion(id, &ReproduceConfig::default()).unwrap();
            assert!(r.passed, "{}", r.line());
        }
    }
}
