//! Haar moments up to degree 3 from the pseudo-inverse of the permutation
//! Gram matrix.

use num_complex::Complex;
use num_traits::{One, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{pinv_hermitian, random, ComplexMatrix};
use crate::scalar::Real;

pub const MAX_DEGREE: usize = 3;

/// All permutations of 0..k in lexicographic order.
pub fn permutations(k: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                rec(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::with_capacity(k), &mut vec![false; k], &mut out);
    out
}

pub fn cycle_count(p: &[usize]) -> usize {
    let mut seen = vec![false; p.len()];
    let mut cycles = 0;
    for start in 0..p.len() {
        if !seen[start] {
            cycles += 1;
            let mut i = start;
            while !seen[i] {
                seen[i] = true;
                i = p[i];
            }
        }
    }
    cycles
}

fn inverse(p: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; p.len()];
    for (i, &j) in p.iter().enumerate() {
        inv[j] = i;
    }
    inv
}

/// Which tensor slots carry U and which carry Ū, with their matrix indices.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MomentSpec {
    pub d: usize,
    /// (row, col) of each U factor
    pub u: Vec<(usize, usize)>,
    /// (row, col) of each Ū factor
    pub u_conj: Vec<(usize, usize)>,
}

impl MomentSpec {
    pub fn new(d: usize, u: Vec<(usize, usize)>, u_conj: Vec<(usize, usize)>) -> Self {
        Self { d, u, u_conj }
    }

    pub fn degree(&self) -> usize {
        self.u.len().max(self.u_conj.len())
    }

    pub fn is_balanced(&self) -> bool {
        self.u.len() == self.u_conj.len()
    }

    /// The monomial evaluated on one unitary.
    pub fn evaluate<T: Real>(&self, u: &ComplexMatrix<T>) -> Complex<T> {
        let mut z = Complex::one();
        for &(i, j) in &self.u {
            z *= u[(i, j)];
        }
        for &(i, j) in &self.u_conj {
            z *= u[(i, j)].conj();
        }
        z
    }

    /// Every balanced monomial of degree `k` in dimension `d`.
    pub fn all(d: usize, k: usize) -> Vec<Self> {
        let n = 4 * k;
        let total = d.pow(n as u32);
        (0..total)
            .map(|mut code| {
                let mut digits = vec![0; n];
                for x in digits.iter_mut() {
                    *x = code % d;
                    code /= d;
                }
                let u = (0..k).map(|m| (digits[2 * m], digits[2 * m + 1])).collect();
                let c = (0..k)
                    .map(|m| (digits[2 * k + 2 * m], digits[2 * k + 2 * m + 1]))
                    .collect();
                Self::new(d, u, c)
            })
            .collect()
    }
}

/// Wg = G⁺ with G[σ,τ] = d^{#cycles(σ⁻¹τ)} over S_k.
#[derive(Clone, Debug)]
pub struct Weingarten<T: Real> {
    d: usize,
    k: usize,
    perms: Vec<Vec<usize>>,
    wg: Vec<T>,
}

impl<T: Real> Weingarten<T> {
    pub fn new(k: usize, d: usize) -> Result<Self> {
        if k == 0 || k > MAX_DEGREE {
            return Err(Error::Unsupported(format!(
                "Weingarten degree {k} (supported: 1..={MAX_DEGREE})"
            )));
        }
        if d == 0 {
            return Err(Error::InvalidArgument("dimension must be positive".into()));
        }
        let perms = permutations(k);
        let n = perms.len();
        let g = ComplexMatrix::<T>::from_fn(n, n, |a, b| {
            let s_inv = inverse(&perms[a]);
            let prod: Vec<usize> = perms[b].iter().map(|&t| s_inv[t]).collect();
            Complex::new(T::lit(d as f64).powi(cycle_count(&prod) as i32), T::zero())
        });
        let wg = pinv_hermitian(&g, T::lit(1e-9))?;
        Ok(Self {
            d,
            k,
            perms,
            wg: wg.data().iter().map(|z| z.re).collect(),
        })
    }

    pub fn degree(&self) -> usize {
        self.k
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// Weingarten matrix entry for permutation indices (a, b).
    pub fn wg(&self, a: usize, b: usize) -> T {
        self.wg[a * self.perms.len() + b]
    }

    pub fn perms(&self) -> &[Vec<usize>] {
        &self.perms
    }

    /// E[Π U_{i_m j_m} Π Ū_{i'_m j'_m}] for index tuples of length k.
    pub fn moment_indices(&self, i: &[usize], j: &[usize], ip: &[usize], jp: &[usize]) -> T {
        let n = self.perms.len();
        let matches = |a: &[usize], b: &[usize], p: &[usize]| (0..self.k).all(|m| a[m] == b[p[m]]);
        let mut acc = T::zero();
        for s in 0..n {
            if !matches(i, ip, &self.perms[s]) {
                continue;
            }
            for t in 0..n {
                if matches(j, jp, &self.perms[t]) {
                    acc += self.wg(s, t);
                }
            }
        }
        acc
    }

    pub fn moment(&self, spec: &MomentSpec) -> Result<T> {
        if spec.d != self.d {
            return Err(Error::DimMismatch(format!(
                "moment in d={} with Weingarten d={}",
                spec.d, self.d
            )));
        }
        if !spec.is_balanced() {
            return Ok(T::zero());
        }
        if spec.degree() != self.k {
            return Err(Error::DimMismatch(format!(
                "degree {} with Weingarten k={}",
                spec.degree(),
                self.k
            )));
        }
        let i: Vec<usize> = spec.u.iter().map(|p| p.0).collect();
        let j: Vec<usize> = spec.u.iter().map(|p| p.1).collect();
        let ip: Vec<usize> = spec.u_conj.iter().map(|p| p.0).collect();
        let jp: Vec<usize> = spec.u_conj.iter().map(|p| p.1).collect();
        Ok(self.moment_indices(&i, &j, &ip, &jp))
    }
}

/// Haar moment of an arbitrary monomial; zero when unbalanced.
pub fn haar_moment<T: Real>(spec: &MomentSpec) -> Result<T> {
    if !spec.is_balanced() {
        return Ok(T::zero());
    }
    Weingarten::new(spec.degree(), spec.d)?.moment(spec)
}

/// Sample mean and standard error of a monomial over Haar samples.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloEstimate {
    pub mean_re: f64,
    pub mean_im: f64,
    pub std_err: f64,
    pub samples: usize,
}

impl MonteCarloEstimate {
    /// |mean − exact| in units of the standard error (with a floor for
    /// monomials whose value is deterministic).
    pub fn sigmas(&self, exact: f64) -> f64 {
        let dev = ((self.mean_re - exact).powi(2) + self.mean_im.powi(2)).sqrt();
        dev / self.std_err.max(1e-12)
    }
}

pub fn monte_carlo_moments<R: Rng + ?Sized>(
    specs: &[MomentSpec],
    samples: usize,
    rng: &mut R,
) -> Vec<MonteCarloEstimate> {
    let d = specs.first().map_or(1, |s| s.d);
    let mut sum = vec![Complex::<f64>::zero(); specs.len()];
    let mut sum_sq = vec![0.0; specs.len()];
    for _ in 0..samples {
        let u = random::haar_unitary::<f64, R>(d, rng);
        for (k, s) in specs.iter().enumerate() {
            let z = s.evaluate(&u);
            sum[k] += z;
            sum_sq[k] += z.norm_sqr();
        }
    }
    let n = samples as f64;
    sum.iter()
        .zip(&sum_sq)
        .map(|(s, &q)| {
            let mean = s / n;
            let var = (q / n - mean.norm_sqr()).max(0.0);
            MonteCarloEstimate {
                mean_re: mean.re,
                mean_im: mean.im,
                std_err: (var / n).sqrt(),
                samples,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn permutation_basics() {
        assert_eq!(permutations(3).len(), 6);
        assert_eq!(cycle_count(&[0, 1, 2]), 3);
        assert_eq!(cycle_count(&[1, 2, 0]), 1);
        assert_eq!(cycle_count(&[1, 0, 2]), 2);
    }

    #[test]
    fn first_moment() {
        for d in 1..5 {
            let w = Weingarten::<f64>::new(1, d).unwrap();
            for i in 0..d {
                for j in 0..d {
                    for k in 0..d {
                        for l in 0..d {
                            let m = w.moment_indices(&[i], &[j], &[k], &[l]);
                            let want = if i == k && j == l {
                                1.0 / d as f64
                            } else {
                                0.0
                            };
                            assert!((m - want).abs() < 1e-14);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn second_moment_closed_values() {
        // E|U_00|⁴ = 2/(d(d+1)), E|U_00|²|U_11|² = 1/(d²−1)
        for d in 2..5 {
            let w = Weingarten::<f64>::new(2, d).unwrap();
            let df = d as f64;
            let a = w.moment_indices(&[0, 0], &[0, 0], &[0, 0], &[0, 0]);
            assert!((a - 2.0 / (df * (df + 1.0))).abs() < 1e-13);
            let b = w.moment_indices(&[0, 1], &[0, 1], &[0, 1], &[0, 1]);
            assert!((b - 1.0 / (df * df - 1.0)).abs() < 1e-13);
        }
    }

    #[test]
    fn unbalanced_and_unsupported() {
        let s = MomentSpec::new(2, vec![(0, 0)], vec![]);
        assert_eq!(haar_moment::<f64>(&s).unwrap(), 0.0);
        assert!(matches!(
            Weingarten::<f64>::new(4, 4),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn unitarity_sum_rule() {
        // Σ_j E[U_{0j} Ū_{0j} U_{1k} Ū_{1k}] = E[|U_{1k}|²] = 1/d
        for d in [2, 3] {
            let w = Weingarten::<f64>::new(2, d).unwrap();
            let s: f64 = (0..d)
                .map(|j| w.moment_indices(&[0, 1], &[j, 1], &[0, 1], &[j, 1]))
                .sum();
            assert!((s - 1.0 / d as f64).abs() < 1e-13);
        }
        // the same rule one degree up, including d < k
        for d in [2, 3] {
            let w = Weingarten::<f64>::new(3, d).unwrap();
            let s: f64 = (0..d)
                .map(|j| w.moment_indices(&[0, 1, 1], &[j, 0, 1], &[0, 1, 1], &[j, 0, 1]))
                .sum();
            let w2 = Weingarten::<f64>::new(2, d).unwrap();
            let want = w2.moment_indices(&[1, 1], &[0, 1], &[1, 1], &[0, 1]);
            assert!((s - want).abs() < 1e-13);
        }
    }

    #[test]
    fn monte_carlo_agreement() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        for d in [2, 3] {
            for k in 1..=3 {
                let w = Weingarten::<f64>::new(k, d).unwrap();
                // a few structured monomials: diagonal powers and mixed rows
                let mut specs = vec![
                    MomentSpec::new(d, vec![(0, 0); k], vec![(0, 0); k]),
                    MomentSpec::new(
                        d,
                        (0..k).map(|m| (m % d, 0)).collect(),
                        (0..k).map(|m| (m % d, 0)).collect(),
                    ),
                    MomentSpec::new(
                        d,
                        (0..k).map(|m| (0, m % d)).collect(),
                        (0..k).map(|m| (0, (m + 1) % d)).collect(),
                    ),
                ];
                if k >= 2 {
                    specs.push(MomentSpec::new(
                        d,
                        vec![(0, 0), (1, 1)],
                        vec![(0, 1), (1, 0)],
                    ));
                    if k == 3 {
                        specs.last_mut().unwrap().u.push((0, 0));
                        specs.last_mut().unwrap().u_conj.push((0, 0));
                    }
                }
                let est = monte_carlo_moments(&specs, 100_000, &mut rng);
                for (s, e) in specs.iter().zip(&est) {
                    let exact = w.moment(s).unwrap();
                    assert!(e.sigmas(exact) < 5.0, "d={d} k={k} {s:?}: {e:?} vs {exact}");
                }
            }
        }
    }
}
