//! Input-output inversions of bistochastic channels, the projection onto
//! their linear span, and the results built on that projection.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::channels::{Channel, ChoiOperator};
use crate::error::{Error, Result};
use crate::linalg::{
    double_ket_projector, exact_sqrt, min_eig, partial_transpose_systems, permute_systems,
    swap_operator, ComplexMatrix,
};
use crate::scalar::Real;

/// The two canonical inversions: Kraus operators C ↦ Cᵀ or C ↦ C†.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InversionKind {
    Transpose,
    Adjoint,
}

impl fmt::Display for InversionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Transpose => "transpose",
            Self::Adjoint => "adjoint",
        })
    }
}

impl FromStr for InversionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "transpose" => Ok(Self::Transpose),
            "adjoint" => Ok(Self::Adjoint),
            other => Err(Error::InvalidArgument(format!(
                "unknown inversion `{other}`"
            ))),
        }
    }
}

/// Kraus-level inversion. Defined for any map; bistochastic channels are
/// sent to bistochastic channels.
pub fn invert_channel<T: Real>(c: &Channel<T>, kind: InversionKind) -> Channel<T> {
    let kraus = c
        .kraus()
        .iter()
        .map(|k| match kind {
            InversionKind::Transpose => k.transpose(),
            InversionKind::Adjoint => k.adjoint(),
        })
        .collect();
    Channel::new(kraus).expect("shapes agree")
}

fn square_side<T: Real>(x: &ComplexMatrix<T>) -> Result<usize> {
    exact_sqrt(x.require_square()?)
}

/// SWAP·X·SWAP†, the transpose inversion acting on a Choi operator.
pub fn choi_transpose_supermap<T: Real>(x: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
    let d = square_side(x)?;
    permute_systems(x, &[d, d], &[1, 0])
}

/// SWAP·Xᵀ·SWAP†, the adjoint inversion acting on a Choi operator.
pub fn choi_adjoint_supermap<T: Real>(x: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
    let d = square_side(x)?;
    permute_systems(&x.transpose(), &[d, d], &[1, 0])
}

/// Applies an inversion to the first of two subsystems of a bipartite map.
/// `x` is the Choi operator on (out₁, out₂, in₁, in₂) with local dims
/// `d1`, `d2`. The transpose variant only exchanges out₁ and in₁; the
/// adjoint variant also transposes them, which is where complete positivity
/// can fail.
pub fn local_inversion_choi<T: Real>(
    x: &ComplexMatrix<T>,
    d1: usize,
    d2: usize,
    kind: InversionKind,
) -> Result<ComplexMatrix<T>> {
    let dims = [d1, d2, d1, d2];
    let y = match kind {
        InversionKind::Transpose => x.clone(),
        InversionKind::Adjoint => partial_transpose_systems(x, &dims, &[0, 2])?,
    };
    permute_systems(&y, &dims, &[2, 1, 0, 3])
}

/// ‖M − (Tr M/d) I‖_F / max(1, ‖M‖_F)
fn proportionality_residual<T: Real>(m: &ComplexMatrix<T>) -> T {
    let d = m.rows();
    let scaled = ComplexMatrix::identity(d).scale(m.trace() / T::lit(d as f64));
    m.distance(&scaled) / T::one().max(m.frobenius_norm())
}

/// True when 𝓜(I) ∝ I and 𝓜ᵀ(I) ∝ I, i.e. both partial traces of the Choi
/// operator are proportional to the identity.
pub fn in_bistochastic_span<T: Real>(j: &ChoiOperator<T>, tol: T) -> bool {
    proportionality_residual(&j.image_of_identity()) <= tol
        && proportionality_residual(&j.output_trace()) <= tol
}

/// Π(𝓜)(ρ) = 𝓜(ρ) + 2Tr[𝓜(I)] Tr[ρ] I/d² − 𝓜(I) Tr[ρ]/d − Tr[𝓜(ρ)] I/d.
///
/// In Choi form: J + (2 Tr J/d²) I⊗I − Tr_in[J]⊗I/d − I⊗Tr_out[J]/d.
pub fn project_bistochastic<T: Real>(j: &ChoiOperator<T>) -> Result<ChoiOperator<T>> {
    let d = j.d_in();
    if j.d_out() != d {
        return Err(Error::DimMismatch(format!(
            "projection needs equal input and output dimensions, got {}->{}",
            d,
            j.d_out()
        )));
    }
    let dd = T::lit(d as f64);
    let id = ComplexMatrix::<T>::identity(d);
    let m = j.matrix();
    let mut out = m.clone();
    out += &ComplexMatrix::identity(d * d).scale(m.trace() * T::lit(2.0) / (dd * dd));
    out -= &j.image_of_identity().kron(&id).scale_real(dd.recip());
    out -= &id.kron(&j.output_trace()).scale_real(dd.recip());
    ChoiOperator::new(out, d, d)
}

/// The three pieces of 𝓒 = Π(𝓒) + K_{𝓒(I/d)} − K_{I/d}.
#[derive(Clone, Debug)]
pub struct Decomposition<T: Real> {
    pub pi_part: ChoiOperator<T>,
    /// Constant channel onto 𝓒(I/d).
    pub k1: Channel<T>,
    /// Completely depolarizing channel.
    pub k2: Channel<T>,
}

impl<T: Real> Decomposition<T> {
    /// Choi of Π(𝓒) + K₁ − K₂.
    pub fn recombine(&self) -> ChoiOperator<T> {
        let m = self.pi_part.matrix().clone() + self.k1.choi().into_matrix()
            - self.k2.choi().into_matrix();
        ChoiOperator::new(m, self.pi_part.d_out(), self.pi_part.d_in()).expect("dims agree")
    }
}

pub fn decompose_channel<T: Real>(c: &Channel<T>) -> Result<Decomposition<T>> {
    let dev = c.trace_preservation_deviation();
    if !(dev <= T::default_tol()) {
        return Err(Error::NotTracePreserving(dev.as_f64()));
    }
    let d = c.d_in();
    if c.d_out() != d {
        return Err(Error::DimMismatch(
            "decomposition needs equal input and output dimensions".into(),
        ));
    }
    let mixed = ComplexMatrix::identity(d).scale_real(T::lit(d as f64).recip());
    let image = c.apply(&mixed)?.hermitian_part();
    Ok(Decomposition {
        pi_part: project_bistochastic(&c.choi())?,
        k1: Channel::constant(&image)?,
        k2: Channel::depolarizing(d),
    })
}

/// Θ(𝓒) = Θ(Π(𝓒)): project, then invert. Fails with
/// [`Error::NonPositiveProjection`] when Π(𝓒) is not completely positive.
pub fn invert_general<T: Real>(c: &Channel<T>, kind: InversionKind) -> Result<Channel<T>> {
    let tol = T::default_tol();
    let projected = project_bistochastic(&c.choi())?;
    let low = min_eig(projected.matrix())?;
    if low < -tol {
        return Err(Error::NonPositiveProjection(low.as_f64()));
    }
    let pc = Channel::from_choi(&projected, tol)?;
    Ok(invert_channel(&pc, kind))
}

/// c(U) = (d²−1) Tr[Choi(𝓤) Choi(𝓑)] − ((d²−2)/d) Tr[𝓑(I)], the weight of
/// 𝓤 when the bistochastic channel 𝓑 is written as a Haar average of
/// unitary channels.
pub fn unitary_decomposition_coefficient<T: Real>(
    b: &Channel<T>,
    u: &ComplexMatrix<T>,
) -> Result<T> {
    b.require_bistochastic(T::default_tol())?;
    let d = b.d_in();
    if u.shape() != (d, d) {
        return Err(Error::DimMismatch(format!(
            "unitary of size {} for a channel on {d}",
            u.rows()
        )));
    }
    let dev = u.unitary_deviation();
    if !(dev <= T::default_tol()) {
        return Err(Error::NotUnitary(dev.as_f64()));
    }
    let dd = T::lit(d as f64);
    let overlap = double_ket_projector(u).trace_product(b.choi().matrix()).re;
    let tr_image = b.choi().image_of_identity().trace().re;
    Ok((dd * dd - T::one()) * overlap - (dd * dd - T::lit(2.0)) / dd * tr_image)
}

/// G = I⊗I − |I⟩⟩⟨⟨I| on two qubits; G|U⟩⟩ = −|U†⟩⟩ for every U in SU(2).
pub fn qubit_adjoint_extension_g<T: Real>() -> ComplexMatrix<T> {
    ComplexMatrix::identity(4) - double_ket_projector(&ComplexMatrix::identity(2))
}

/// The classical channel on d ≥ 3 levels whose projection Π is not
/// positive. Level 0 plays the special role: p(0|0) = (d−2)/(2(d−1)),
/// p(y|0) = (1 − p(0|0))/(d−1) for y ≠ 0, and every x ≠ 0 goes to 0.
pub fn counterexample_channel<T: Real>(d: usize) -> Result<Channel<T>> {
    if d < 3 {
        return Err(Error::InvalidArgument(format!(
            "the counterexample needs d >= 3, got {d}"
        )));
    }
    let df = d as f64;
    let p00 = (df - 2.0) / (2.0 * (df - 1.0));
    let rest = (1.0 - p00) / (df - 1.0);
    let mut p = vec![vec![T::zero(); d]; d];
    p[0][0] = T::lit(p00);
    for y in 1..d {
        p[y][0] = T::lit(rest);
    }
    for x in 1..d {
        p[0][x] = T::one();
    }
    Channel::classical(&p)
}

/// ½|Ψ⟩⟨Ψ| + ½|Ψ′⟩⟨Ψ′| where |Ψ′⟩ exchanges the two Schmidt coefficients
/// of the two-qubit vector |Ψ⟩. For unit |Ψ⟩ this is the projected Choi
/// operator of the map with Choi |Ψ⟩⟨Ψ|.
///
/// Reshaped to a 2×2 matrix, Ψ′ equals adj(Ψ)† up to a global phase, so no
/// decomposition is needed.
pub fn qubit_projection_closed_form<T: Real>(psi: &[Complex<T>]) -> Result<ComplexMatrix<T>> {
    if psi.len() != 4 {
        return Err(Error::DimMismatch(format!(
            "two-qubit vector expected, got length {}",
            psi.len()
        )));
    }
    let swapped = [psi[3].conj(), -psi[2].conj(), -psi[1].conj(), psi[0].conj()];
    let half = T::lit(0.5);
    Ok(ComplexMatrix::projector(psi).scale_real(half)
        + ComplexMatrix::projector(&swapped).scale_real(half))
}

/// Choi of the SWAP gate on two d-dimensional systems, factors ordered
/// (out₁, out₂, in₁, in₂).
pub fn swap_gate_choi<T: Real>(d: usize) -> ComplexMatrix<T> {
    double_ket_projector(&swap_operator::<T>(d))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{compose, random_channel, random_mixed_unitary};
    use crate::linalg::{double_ket, pauli, random};
    use crate::scalar::{cplx, re};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    type M = ComplexMatrix<f64>;
    type Ch = Channel<f64>;
    use InversionKind::{Adjoint, Transpose};

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(23)
    }

    fn rz() -> M {
        // exp(−iπZ/4)
        let s = std::f64::consts::FRAC_1_SQRT_2;
        M::complex(2, 2, &[(s, -s), (0.0, 0.0), (0.0, 0.0), (s, s)])
    }

    #[test]
    fn invert_examples() {
        let x = Ch::unitary(&pauli::x()).unwrap();
        assert_eq!(invert_channel(&x, Transpose).choi(), x.choi());
        let r = Ch::unitary(&rz()).unwrap();
        assert!(invert_channel(&r, Transpose).choi().distance(&r.choi()) < 1e-15);
        let r_dag = Ch::unitary(&rz().adjoint()).unwrap();
        assert!(invert_channel(&r, Adjoint).choi().distance(&r_dag.choi()) < 1e-15);
        // diagonal oracle: exp(+iπZ/4) entries
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let expect = M::complex(2, 2, &[(s, s), (0.0, 0.0), (0.0, 0.0), (s, -s)]);
        assert!(invert_channel(&r, Adjoint).kraus()[0].distance(&expect) < 1e-15);
        for kind in [Transpose, Adjoint] {
            assert_eq!(invert_channel(&Ch::identity(3), kind), Ch::identity(3));
        }
    }

    #[test]
    fn choi_supermaps_match_kraus() {
        let id = Ch::identity(2).choi().into_matrix();
        assert_eq!(choi_transpose_supermap(&id).unwrap(), id);
        assert_eq!(choi_adjoint_supermap(&id).unwrap(), id);
        let jx = Ch::unitary(&pauli::x()).unwrap().choi().into_matrix();
        assert_eq!(choi_transpose_supermap(&jx).unwrap(), jx);

        let mut r = rng();
        for d in [2, 3] {
            let c = random_channel::<f64, _>(d, 3, &mut r);
            let j = c.choi().into_matrix();
            let t = invert_channel(&c, Transpose).choi().into_matrix();
            assert!(choi_transpose_supermap(&j).unwrap().distance(&t) < 1e-12);
            let a = invert_channel(&c, Adjoint).choi().into_matrix();
            assert!(choi_adjoint_supermap(&j).unwrap().distance(&a) < 1e-12);
        }
        let u = random::haar_unitary::<f64, _>(3, &mut r);
        let ju = Ch::unitary(&u).unwrap().choi().into_matrix();
        let jud = Ch::unitary(&u.adjoint()).unwrap().choi().into_matrix();
        assert!(choi_adjoint_supermap(&ju).unwrap().distance(&jud) < 1e-12);
        assert!(choi_transpose_supermap(&M::identity(3)).is_err());
    }

    #[test]
    fn adjoint_is_not_completely_positive() {
        let j = swap_gate_choi::<f64>(2);
        let t = local_inversion_choi(&j, 2, 2, Transpose).unwrap();
        assert!(min_eig(&t).unwrap() > -1e-12);
        let a = local_inversion_choi(&j, 2, 2, Adjoint).unwrap();
        assert!(min_eig(&a).unwrap() < -0.5);
    }

    #[test]
    fn span_membership() {
        let mut r = rng();
        let u1 = Ch::unitary(&random::haar_unitary(2, &mut r)).unwrap();
        let u2 = Ch::unitary(&random::haar_unitary(2, &mut r)).unwrap();
        assert!(in_bistochastic_span(&u1.choi(), 1e-9));
        let zero = Ch::constant(&M::real(2, 2, &[1.0, 0.0, 0.0, 0.0])).unwrap();
        assert!(!in_bistochastic_span(&zero.choi(), 1e-9));
        let affine = u1.choi().combine(2.0, &u2.choi(), -1.0).unwrap();
        assert!(in_bistochastic_span(&affine, 1e-9));
    }

    #[test]
    fn projection_examples() {
        let mut r = rng();
        let u = Ch::unitary(&random::haar_unitary(3, &mut r)).unwrap();
        assert!(project_bistochastic(&u.choi()).unwrap().distance(&u.choi()) < 1e-12);
        for d in [2, 3] {
            let rho0 = random::random_density::<f64, _>(d, 2, &mut r);
            let k = Ch::constant(&rho0).unwrap();
            let p = project_bistochastic(&k.choi()).unwrap();
            assert!(p.distance(&Ch::depolarizing(d).choi()) < 1e-12);
        }
    }

    #[test]
    fn counterexample_values() {
        let c = counterexample_channel::<f64>(3).unwrap();
        assert!(c.is_cptp(1e-12));
        assert!(!c.is_bistochastic(1e-9));
        // row sums of p: 9/4, 3/8, 3/8
        let img = c.apply(&M::identity(3)).unwrap();
        for (i, v) in [2.25, 0.375, 0.375].iter().enumerate() {
            assert!((img[(i, i)].re - v).abs() < 1e-15);
        }
        for d in [3usize, 4, 5] {
            let c = counterexample_channel::<f64>(d).unwrap();
            let p = project_bistochastic(&c.choi()).unwrap();
            let out = p.apply(&M::projector(&crate::linalg::ket(d, 0))).unwrap();
            let expect = -((d as f64) - 2.0) / (2.0 * d as f64);
            assert!((out[(0, 0)].re - expect).abs() < 1e-12, "d = {d}");
            assert!(matches!(
                invert_general(&c, Transpose),
                Err(Error::NonPositiveProjection(_))
            ));
        }
        assert!(counterexample_channel::<f64>(2).is_err());
    }

    #[test]
    fn decomposition() {
        let mut r = rng();
        let b = random_mixed_unitary::<f64, _>(2, 3, &mut r);
        let dec = decompose_channel(&b).unwrap();
        assert!(dec.pi_part.distance(&b.choi()) < 1e-12);
        assert!(dec.k1.choi().distance(&Ch::depolarizing(2).choi()) < 1e-12);

        let p0 = M::real(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        let k = Ch::constant(&p0).unwrap();
        let dec = decompose_channel(&k).unwrap();
        assert!(dec.pi_part.distance(&Ch::depolarizing(2).choi()) < 1e-12);
        assert!(dec.k1.choi().distance(&k.choi()) < 1e-12);

        let c = random_channel::<f64, _>(3, 2, &mut r);
        assert!(
            decompose_channel(&c)
                .unwrap()
                .recombine()
                .distance(&c.choi())
                < 1e-12
        );
        let bad = Ch::new(vec![M::identity(2).scale_real(2.0)]).unwrap();
        assert!(matches!(
            decompose_channel(&bad),
            Err(Error::NotTracePreserving(_))
        ));
    }

    #[test]
    fn general_inversion() {
        let p0 = M::real(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        let k = Ch::constant(&p0).unwrap();
        for kind in [Transpose, Adjoint] {
            let t = invert_general(&k, kind).unwrap();
            assert!(t.choi().distance(&Ch::depolarizing(2).choi()) < 1e-12);
        }
        let mut r = rng();
        let b = random_mixed_unitary::<f64, _>(3, 2, &mut r);
        for kind in [Transpose, Adjoint] {
            let t = invert_general(&b, kind).unwrap();
            assert!(t.choi().distance(&invert_channel(&b, kind).choi()) < 1e-10);
        }
    }

    #[test]
    fn g_extension() {
        let g = qubit_adjoint_extension_g::<f64>();
        let i = double_ket(&M::identity(2));
        let gi = g.matvec(&i);
        assert!(crate::linalg::vdistance(&gi, &i.iter().map(|z| -z).collect::<Vec<_>>()) < 1e-15);
        // U = iY
        let u = pauli::y::<f64>().scale(cplx(0.0, 1.0));
        let gu = g.matvec(&double_ket(&u));
        assert!(crate::linalg::vdistance(&gu, &double_ket(&u)) < 1e-15);
        let neg_udag: Vec<_> = double_ket(&u.adjoint()).into_iter().map(|z| -z).collect();
        assert!(crate::linalg::vdistance(&gu, &neg_udag) < 1e-15);
    }

    #[test]
    fn coefficient_for_identity_channel() {
        let mut r = rng();
        let b = Ch::identity(2);
        for _ in 0..5 {
            let u = random::haar_unitary::<f64, _>(2, &mut r);
            let c = unitary_decomposition_coefficient(&b, &u).unwrap();
            let tr = u.trace().norm_sqr();
            assert!((c - (3.0 * tr - 2.0)).abs() < 1e-12);
        }
        let k = Ch::constant(&M::real(2, 2, &[1.0, 0.0, 0.0, 0.0])).unwrap();
        assert!(unitary_decomposition_coefficient(&k, &M::identity(2)).is_err());
    }

    #[test]
    fn closed_form_projection() {
        let mut r = rng();
        for _ in 0..20 {
            let psi = random::random_state::<f64, _>(4, &mut r);
            let j = ChoiOperator::new(M::projector(&psi), 2, 2).unwrap();
            let p = project_bistochastic(&j).unwrap();
            let closed = qubit_projection_closed_form(&psi).unwrap();
            assert!(p.matrix().distance(&closed) < 1e-12);
            assert!(min_eig(p.matrix()).unwrap() > -1e-12);
        }
        // product and maximally entangled edge cases
        let prod: Vec<_> = [1.0, 0.0, 0.0, 0.0].iter().map(|&x| re(x)).collect();
        let p =
            project_bistochastic(&ChoiOperator::new(M::projector(&prod), 2, 2).unwrap()).unwrap();
        assert!(
            p.matrix()
                .distance(&qubit_projection_closed_form(&prod).unwrap())
                < 1e-12
        );
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let bell: Vec<_> = [s, 0.0, 0.0, s].iter().map(|&x| re(x)).collect();
        let p =
            project_bistochastic(&ChoiOperator::new(M::projector(&bell), 2, 2).unwrap()).unwrap();
        assert!(
            p.matrix()
                .distance(&qubit_projection_closed_form(&bell).unwrap())
                < 1e-12
        );
    }

    #[test]
    fn order_reversal_example() {
        let mut r = rng();
        let a = random_mixed_unitary::<f64, _>(2, 2, &mut r);
        let b = random_mixed_unitary::<f64, _>(2, 2, &mut r);
        for kind in [Transpose, Adjoint] {
            let lhs = invert_channel(&compose(&b, &a).unwrap(), kind);
            let rhs = compose(&invert_channel(&a, kind), &invert_channel(&b, kind)).unwrap();
            assert!(lhs.choi().distance(&rhs.choi()) < 1e-12);
        }
    }

    #[test]
    fn kind_parsing() {
        assert_eq!("transpose".parse::<InversionKind>().unwrap(), Transpose);
        assert_eq!("Adjoint".parse::<InversionKind>().unwrap(), Adjoint);
        assert!("inverse".parse::<InversionKind>().is_err());
        assert_eq!(serde_json::to_string(&Adjoint).unwrap(), "\"adjoint\"");
    }
}

#[cfg(test)]
mod proptests {
    use super::*;
    use crate::channels::{random_channel, random_mixed_unitary};
    use crate::linalg::random;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn projection_is_idempotent_and_lands_in_span(seed in any::<u64>(), d in 2usize..4) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let j = ChoiOperator::new(random::random_hermitian::<f64, _>(d * d, &mut rng), d, d).unwrap();
            let p = project_bistochastic(&j).unwrap();
            let pp = project_bistochastic(&p).unwrap();
            prop_assert!(pp.distance(&p) <= 1e-12);
            prop_assert!(in_bistochastic_span(&p, 1e-9));
        }

        #[test]
        fn involution(seed in any::<u64>(), d in 2usize..4) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let c = random_mixed_unitary::<f64, _>(d, 3, &mut rng);
            for kind in [InversionKind::Transpose, InversionKind::Adjoint] {
                let twice = invert_channel(&invert_channel(&c, kind), kind);
                prop_assert!(twice.choi().distance(&c.choi()) <= 1e-12);
                prop_assert!(invert_channel(&c, kind).is_bistochastic(1e-9));
            }
        }

        #[test]
        fn qubit_projection_stays_positive(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let c = random_channel::<f64, _>(2, 1, &mut rng);
            let k = ComplexMatrix::<f64>::from_fn(2, 2, |i, j| c.kraus()[0][(i, j)]);
            let j = ChoiOperator::new(crate::linalg::double_ket_projector(&k), 2, 2).unwrap();
            let p = project_bistochastic(&j).unwrap();
            prop_assert!(min_eig(p.matrix()).unwrap() >= -1e-12);
        }
    }
}

#[cfg(test)]
mod design_tests {
    use super::*;
    use crate::channels::random_mixed_unitary;
    use crate::haar::single_qubit_clifford_group;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn clifford_average_reconstructs_bistochastic_channel() {
        let design = single_qubit_clifford_group::<f64>();
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..5 {
            let b = random_mixed_unitary::<f64, _>(2, 3, &mut rng);
            let mut sum = ComplexMatrix::zeros(4, 4);
            let mut weight = 0.0;
            for u in &design.unitaries {
                let c = unitary_decomposition_coefficient(&b, u).unwrap();
                sum += &double_ket_projector(u).scale_real(c);
                weight += c;
            }
            let n = design.len() as f64;
            assert!(sum.scale_real(1.0 / n).distance(b.choi().matrix()) < 1e-12);
            assert!((weight / n - 1.0).abs() < 1e-12);
        }
    }
}
