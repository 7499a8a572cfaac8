//! See-saw optimization of `⟨μ₁…μₙ|M|μ₁…μₙ⟩` over unit product states.
//!
//! Each step fixes every factor but one; the optimal remaining factor is the
//! extremal eigenvector of the contracted operator `⟨μ_others|M|μ_others⟩`.
//! A run is a local method: maximization yields a lower bound on the supremum,
//! minimization an upper bound on the infimum.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::linalg::{hermitian_eig, ComplexMatrix, ComplexVector};
use crate::{Error, Result};

/// Default number of random restarts.
pub const DEFAULT_RESTARTS: usize = 32;
/// Per-restart cap on full rounds over all parties.
pub const MAX_ROUNDS: usize = 500;
/// A round improving the objective by less than this ends the restart.
pub const CONVERGENCE_TOL: f64 = 1e-12;

const TOL_UNIT: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Maximize,
    Minimize,
}

impl Direction {
    /// True if `a` is strictly better than `b`.
    fn better(self, a: f64, b: f64) -> bool {
        match self {
            Direction::Maximize => a > b,
            Direction::Minimize => a < b,
        }
    }

    fn gain(self, new: f64, old: f64) -> f64 {
        match self {
            Direction::Maximize => new - old,
            Direction::Minimize => old - new,
        }
    }
}

/// `μ₁ ⊗ μ₂ ⊗ … ⊗ μₙ`, one unit vector per party.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductState {
    factors: Vec<ComplexVector>,
}

impl ProductState {
    pub fn new(factors: Vec<ComplexVector>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidState("product state without factors".into()));
        }
        for (k, f) in factors.iter().enumerate() {
            if f.dims().len() != 1 {
                return Err(Error::InvalidState(format!("factor {k} spans several parties")));
            }
            if (f.norm() - 1.0).abs() > TOL_UNIT {
                return Err(Error::InvalidState(format!("factor {k} has norm {}", f.norm())));
            }
        }
        Ok(Self { factors })
    }

    /// Computational basis product state with the given local indices.
    pub fn basis(dims: &[usize], indices: &[usize]) -> Result<Self> {
        if dims.len() != indices.len() {
            return Err(Error::DimensionMismatch("one index per party is required".into()));
        }
        let factors = dims
            .iter()
            .zip(indices)
            .map(|(&d, &i)| ComplexVector::basis(vec![d], i))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { factors })
    }

    pub fn factors(&self) -> &[ComplexVector] {
        &self.factors
    }

    pub fn dims(&self) -> Vec<usize> {
        self.factors.iter().map(|f| f.dim()).collect()
    }

    /// The full ket on `H_1 ⊗ … ⊗ H_n`.
    pub fn to_vector(&self) -> ComplexVector {
        let mut iter = self.factors.iter();
        let first = iter.next().expect("non-empty by construction").clone();
        iter.fold(first, |acc, f| acc.kron(f))
    }

    fn random(dims: &[usize], rng: &mut ChaCha8Rng) -> Self {
        let factors = dims
            .iter()
            .map(|&d| {
                let amps: Vec<Complex64> = (0..d)
                    .map(|_| Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng)))
                    .collect();
                let n = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                let amps = amps.into_iter().map(|z| z / n).collect();
                ComplexVector::new(vec![d], amps).expect("length matches")
            })
            .collect();
        Self { factors }
    }
}

/// Outcome of a multi-restart see-saw search.
#[derive(Debug, Clone, PartialEq)]
pub struct OptResult {
    /// Expectation of the operator at `state`.
    pub value: f64,
    /// The optimizing product state.
    pub state: ProductState,
    pub restarts_used: usize,
    /// True when every restart stopped on the convergence threshold rather than the round cap.
    pub converged: bool,
}

/// One local run from a given starting point.
#[derive(Debug, Clone)]
pub struct SeesawRun {
    pub value: f64,
    pub state: ProductState,
    pub converged: bool,
    /// Objective after every single-party update, starting with the initial value.
    pub trace: Vec<f64>,
}

/// `⟨μ_others|m|μ_others⟩` on party `k` (0-based).
fn contract(m: &ComplexMatrix, factors: &[ComplexVector], k: usize) -> ComplexMatrix {
    let dims = m.dims();
    let d = m.dim();
    let dk = dims[k];

    // Weight of each full basis index with party k's digit left free.
    let mut local = vec![0usize; d];
    let mut weight = vec![Complex64::new(0.0, 0.0); d];
    for (idx, (loc, w)) in local.iter_mut().zip(weight.iter_mut()).enumerate() {
        let mut rest = idx;
        let mut acc = Complex64::new(1.0, 0.0);
        for j in (0..dims.len()).rev() {
            let digit = rest % dims[j];
            rest /= dims[j];
            if j == k {
                *loc = digit;
            } else {
                acc *= factors[j].data()[digit];
            }
        }
        *w = acc;
    }

    let mut out = vec![Complex64::new(0.0, 0.0); dk * dk];
    let data = m.data();
    for r in 0..d {
        let wr = weight[r].conj();
        if wr == Complex64::new(0.0, 0.0) {
            continue;
        }
        let row = &data[r * d..(r + 1) * d];
        let a = local[r];
        for c in 0..d {
            out[a * dk + local[c]] += wr * row[c] * weight[c];
        }
    }
    ComplexMatrix::new(vec![dk], out).expect("square by construction")
}

/// Runs the see-saw from `initial` until a round gains less than
/// [`CONVERGENCE_TOL`] or [`MAX_ROUNDS`] rounds have passed.
pub fn seesaw_from(m: &ComplexMatrix, initial: ProductState, direction: Direction) -> Result<SeesawRun> {
    m.ensure_hermitian()?;
    if initial.dims() != m.dims() {
        return Err(Error::DimensionMismatch(format!(
            "product state dims {:?} vs operator dims {:?}",
            initial.dims(),
            m.dims()
        )));
    }
    let mut factors = initial.factors;
    let mut value = m.expectation(&ProductState { factors: factors.clone() }.to_vector())?;
    let mut trace = vec![value];
    let mut converged = false;

    for _ in 0..MAX_ROUNDS {
        let before = value;
        for k in 0..factors.len() {
            let sd = hermitian_eig(&contract(m, &factors, k))?;
            let pick = match direction {
                Direction::Maximize => sd.top_index(),
                Direction::Minimize => 0,
            };
            value = sd.eigenvalues()[pick];
            factors[k] = sd.eigenvectors()[pick].clone();
            trace.push(value);
        }
        if direction.gain(value, before) < CONVERGENCE_TOL {
            converged = true;
            break;
        }
    }

    let state = ProductState { factors };
    let value = m.expectation(&state.to_vector())?;
    Ok(SeesawRun { value, state, converged, trace })
}

/// Multi-restart search. Restart `r` starts from a random product state drawn
/// from ChaCha8 stream `r` of `seed`; restarts run in parallel and the best
/// value wins, ties going to the lowest restart index.
pub fn optimize(m: &ComplexMatrix, direction: Direction, restarts: usize, seed: u64) -> Result<OptResult> {
    m.ensure_hermitian()?;
    let restarts = restarts.max(1);
    let dims = m.dims().to_vec();
    let runs = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(r as u64);
            seesaw_from(m, ProductState::random(&dims, &mut rng), direction)
        })
        .collect::<Result<Vec<_>>>()?;

    let converged = runs.iter().all(|r| r.converged);
    let best = runs
        .into_iter()
        .reduce(|best, run| if direction.better(run.value, best.value) { run } else { best })
        .expect("at least one restart");
    Ok(OptResult { value: best.value, state: best.state, restarts_used: restarts, converged })
}

/// Best found `sup ⟨μ|m|μ⟩` over product states (a lower bound on the supremum).
pub fn max_product_expectation(m: &ComplexMatrix, restarts: usize, seed: u64) -> Result<OptResult> {
    optimize(m, Direction::Maximize, restarts, seed)
}

/// Best found `inf ⟨μ|m|μ⟩` over product states (an upper bound on the infimum).
pub fn min_product_expectation(m: &ComplexMatrix, restarts: usize, seed: u64) -> Result<OptResult> {
    optimize(m, Direction::Minimize, restarts, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::{bell_plus, bell_pt_sigma, isotropic, random_density};
    use proptest::prelude::*;
    use rand::Rng;

    fn random_hermitian(dims: &[usize], seed: u64) -> ComplexMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d: usize = dims.iter().product();
        let mut data = vec![Complex64::new(0.0, 0.0); d * d];
        for i in 0..d {
            data[i * d + i] = Complex64::new(rng.random_range(-1.0..1.0), 0.0);
            for j in (i + 1)..d {
                let z = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                data[i * d + j] = z;
                data[j * d + i] = z.conj();
            }
        }
        ComplexMatrix::new(dims.to_vec(), data).unwrap()
    }

    #[test]
    fn isotropic_bounds() {
        let sigma = isotropic(0.2).unwrap();
        let max = max_product_expectation(sigma.matrix(), DEFAULT_RESTARTS, 0).unwrap();
        assert!((max.value - 0.3).abs() < 1e-9, "{}", max.value);
        assert!(max.converged);
        let min = min_product_expectation(sigma.matrix(), DEFAULT_RESTARTS, 0).unwrap();
        assert!((min.value - 0.2).abs() < 1e-9, "{}", min.value);
    }

    #[test]
    fn product_projector_and_scalar() {
        let p = ProductState::basis(&[2, 2], &[0, 0]).unwrap().to_vector().projector();
        let max = max_product_expectation(&p, 8, 1).unwrap();
        assert!((max.value - 1.0).abs() < 1e-12);
        let f = max.state.factors();
        assert!((f[0].data()[0].norm() - 1.0).abs() < 1e-9);
        assert!((f[1].data()[0].norm() - 1.0).abs() < 1e-9);

        let id = ComplexMatrix::identity(&[2, 2]).unwrap().scale(0.25);
        for dir in [Direction::Maximize, Direction::Minimize] {
            let r = optimize(&id, dir, 4, 2).unwrap();
            assert!((r.value - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn bell_projector_and_dual_example() {
        let bell = bell_plus().density();
        let max = max_product_expectation(bell.matrix(), DEFAULT_RESTARTS, 3).unwrap();
        assert!((max.value - 0.5).abs() < 1e-9);
        let min = min_product_expectation(bell_pt_sigma().matrix(), DEFAULT_RESTARTS, 3).unwrap();
        assert!((min.value - 3.0 / 16.0).abs() < 1e-9, "{}", min.value);
    }

    #[test]
    fn stored_value_matches_state() {
        let m = random_hermitian(&[2, 3], 9);
        for dir in [Direction::Maximize, Direction::Minimize] {
            let r = optimize(&m, dir, 8, 4).unwrap();
            let v = m.expectation(&r.state.to_vector()).unwrap();
            assert!((v - r.value).abs() <= 1e-10);
        }
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let m = random_hermitian(&[2, 2, 2], 5);
        let a = max_product_expectation(&m, 16, 77).unwrap();
        let b = max_product_expectation(&m, 16, 77).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.value.to_bits(), b.value.to_bits());
    }

    #[test]
    fn single_party_reduces_to_extremal_eigenvalue() {
        let m = random_hermitian(&[4], 2);
        let sd = hermitian_eig(&m).unwrap();
        let r = max_product_expectation(&m, 2, 0).unwrap();
        assert!((r.value - sd.max()).abs() < 1e-12);
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = ComplexMatrix::from_real(vec![2], &[0.0, 1.0, 0.0, 0.0]).unwrap();
        assert!(matches!(max_product_expectation(&m, 1, 0), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn product_state_validation() {
        let v = ComplexVector::from_real(vec![2], &[1.0, 1.0]).unwrap();
        assert!(ProductState::new(vec![v]).is_err());
        assert!(ProductState::new(vec![]).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn bounded_by_extremal_eigenvalues(seed in 0u64..1000, shape in 0usize..3) {
            let dims: &[usize] = [&[2usize, 2][..], &[2, 3][..], &[2, 2, 2][..]][shape];
            let m = random_hermitian(dims, seed);
            let sd = hermitian_eig(&m).unwrap();
            let max = max_product_expectation(&m, 4, seed).unwrap();
            let min = min_product_expectation(&m, 4, seed).unwrap();
            prop_assert!(max.value <= sd.max() + 1e-9);
            prop_assert!(min.value >= sd.min() - 1e-9);
        }

        #[test]
        fn ascent_is_monotone(seed in 0u64..1000) {
            let m = random_density(&[2, 3], seed).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let start = ProductState::random(&[2, 3], &mut rng);
            let run = seesaw_from(m.matrix(), start, Direction::Maximize).unwrap();
            for w in run.trace.windows(2) {
                prop_assert!(w[1] >= w[0] - 1e-14, "{} -> {}", w[0], w[1]);
            }
        }
    }
}
