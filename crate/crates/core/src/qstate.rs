//! Validated quantum states, purification and partial purification.

use std::fmt;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::linalg::{hermitian_eig, ComplexMatrix, ComplexVector, SpectralDecomposition};
use crate::{Error, Result, TOL_EIG};

const TOL_TRACE: f64 = 1e-10;
const TOL_NORM: f64 = 1e-10;
/// Selected eigenvalues this close to λ_M count as maximal.
const TOL_MAX_EIG: f64 = 1e-12;

/// A Hermitian positive semidefinite operator, unit trace when `normalized`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    mat: ComplexMatrix,
    normalized: bool,
}

impl DensityMatrix {
    /// Validates Hermiticity, positivity and unit trace.
    pub fn new(mat: ComplexMatrix) -> Result<Self> {
        let tr = mat.trace();
        if (tr.re - 1.0).abs() > TOL_TRACE || tr.im.abs() > TOL_TRACE {
            return Err(Error::InvalidState(format!("trace {tr} is not 1")));
        }
        Self::check_psd(&mat)?;
        Ok(Self { mat, normalized: true })
    }

    /// Validates Hermiticity and positivity only.
    pub fn unnormalized(mat: ComplexMatrix) -> Result<Self> {
        Self::check_psd(&mat)?;
        Ok(Self { mat, normalized: false })
    }

    fn check_psd(mat: &ComplexMatrix) -> Result<()> {
        let sd = hermitian_eig(mat)?;
        if sd.min() < -TOL_EIG {
            return Err(Error::InvalidState(format!(
                "negative eigenvalue {:e}",
                sd.min()
            )));
        }
        Ok(())
    }

    pub fn maximally_mixed(dims: &[usize]) -> Result<Self> {
        let id = ComplexMatrix::identity(dims)?;
        let d = id.dim() as f64;
        Ok(Self { mat: id.scale(1.0 / d), normalized: true })
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.mat
    }

    pub fn dims(&self) -> &[usize] {
        self.mat.dims()
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn trace(&self) -> f64 {
        self.mat.trace().re
    }

    /// `self ⊗ other`; normalized only if both factors are.
    pub fn kron(&self, other: &Self) -> Self {
        Self {
            mat: self.mat.kron(&other.mat),
            normalized: self.normalized && other.normalized,
        }
    }

    pub(crate) fn from_parts(mat: ComplexMatrix, normalized: bool) -> Self {
        Self { mat, normalized }
    }
}

/// A ket; partial purifications are carried with `normalized = false`.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    vec: ComplexVector,
    normalized: bool,
}

impl PureState {
    pub fn new(vec: ComplexVector) -> Result<Self> {
        let n = vec.norm();
        if (n - 1.0).abs() > TOL_NORM {
            return Err(Error::InvalidState(format!("norm {n} is not 1")));
        }
        Ok(Self { vec, normalized: true })
    }

    pub fn unnormalized(vec: ComplexVector) -> Self {
        Self { vec, normalized: false }
    }

    pub fn vector(&self) -> &ComplexVector {
        &self.vec
    }

    pub fn dims(&self) -> &[usize] {
        self.vec.dims()
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn norm_sqr(&self) -> f64 {
        self.vec.norm_sqr()
    }

    /// `|ψ⟩⟨ψ|`, flagged like the state itself.
    pub fn density(&self) -> DensityMatrix {
        DensityMatrix { mat: self.vec.projector(), normalized: self.normalized }
    }
}

/// Which eigenpairs go into a partial purification and which ancilla basis
/// vector each one is paired with.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PurificationSelection {
    pairs: Vec<(usize, usize)>,
    ancilla_dim: usize,
}

impl PurificationSelection {
    /// `pairs` are `(eigen-index, ancilla slot)`; eigen-indices refer to the
    /// ascending order of [`SpectralDecomposition`].
    pub fn new(pairs: Vec<(usize, usize)>, ancilla_dim: usize) -> Result<Self> {
        if ancilla_dim == 0 {
            return Err(Error::SelectionOutOfRange("ancilla dimension is zero".into()));
        }
        if pairs.is_empty() {
            return Err(Error::SelectionOutOfRange("empty selection".into()));
        }
        if pairs.len() > ancilla_dim {
            return Err(Error::SelectionOutOfRange(format!(
                "{} pairs do not fit an ancilla of dimension {ancilla_dim}",
                pairs.len()
            )));
        }
        for (k, &(eig, slot)) in pairs.iter().enumerate() {
            if slot >= ancilla_dim {
                return Err(Error::SelectionOutOfRange(format!(
                    "ancilla slot {slot} >= {ancilla_dim}"
                )));
            }
            if pairs[..k].iter().any(|&(e, s)| e == eig || s == slot) {
                return Err(Error::SelectionOutOfRange(format!(
                    "pair {eig}:{slot} repeats an eigen-index or a slot"
                )));
            }
        }
        Ok(Self { pairs, ancilla_dim })
    }

    /// Parses the `eig:slot,eig:slot` syntax.
    pub fn parse(text: &str, ancilla_dim: usize) -> Result<Self> {
        let mut pairs = Vec::new();
        for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (e, s) = item
                .split_once(':')
                .ok_or_else(|| Error::Parse(format!("selection item {item:?} is not eig:slot")))?;
            let e = e.trim().parse().map_err(|_| Error::Parse(format!("bad eigen-index {e:?}")))?;
            let s = s.trim().parse().map_err(|_| Error::Parse(format!("bad ancilla slot {s:?}")))?;
            pairs.push((e, s));
        }
        Self::new(pairs, ancilla_dim)
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn ancilla_dim(&self) -> usize {
        self.ancilla_dim
    }

    pub fn eigen_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.pairs.iter().map(|p| p.0)
    }
}

impl fmt::Display for PurificationSelection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, (e, s)) in self.pairs.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{e}:{s}")?;
        }
        Ok(())
    }
}

pub fn spectral(d: &DensityMatrix) -> Result<SpectralDecomposition> {
    hermitian_eig(d.matrix())
}

/// Minimal purification `Σᵢ √pᵢ |eᵢ⟩|i⟩`, ancilla dimension equal to the rank.
pub fn purify(d: &DensityMatrix) -> Result<PureState> {
    let rank = spectral(d)?.rank();
    purify_with_ancilla(d, rank)
}

/// Purification into an ancilla of dimension `ancilla_dim ≥ rank`; unused
/// ancilla slots carry zero amplitude.
pub fn purify_with_ancilla(d: &DensityMatrix, ancilla_dim: usize) -> Result<PureState> {
    if !d.is_normalized() {
        return Err(Error::InvalidState("purification needs a normalized state".into()));
    }
    let sd = spectral(d)?;
    let rank = sd.rank();
    if ancilla_dim < rank {
        return Err(Error::ParamOutOfRange(format!(
            "ancilla dimension {ancilla_dim} is below the rank {rank}"
        )));
    }
    let first = sd.len() - rank;
    let vec = superpose(&sd, (first..sd.len()).zip(0..rank), ancilla_dim)?;
    PureState::new(vec)
}

/// Unnormalized `Σ √λᵢ |φᵢ⟩|slotᵢ⟩` over the selected eigenpairs.
pub fn partial_purify(d: &DensityMatrix, sel: &PurificationSelection) -> Result<PureState> {
    let sd = spectral(d)?;
    check_selection(sel, &sd)?;
    let vec = superpose(&sd, sel.pairs().iter().copied(), sel.ancilla_dim())?;
    Ok(PureState::unnormalized(vec))
}

pub(crate) fn check_selection(sel: &PurificationSelection, sd: &SpectralDecomposition) -> Result<()> {
    for e in sel.eigen_indices() {
        if e >= sd.len() {
            return Err(Error::SelectionOutOfRange(format!(
                "eigen-index {e} >= {}",
                sd.len()
            )));
        }
        if sd.eigenvalues()[e] <= TOL_EIG {
            return Err(Error::SelectionOutOfRange(format!(
                "eigen-index {e} has a zero eigenvalue"
            )));
        }
    }
    Ok(())
}

fn superpose(
    sd: &SpectralDecomposition,
    pairs: impl Iterator<Item = (usize, usize)>,
    ancilla_dim: usize,
) -> Result<ComplexVector> {
    let d = sd.eigenvectors()[0].dim();
    let mut amps = vec![Complex64::new(0.0, 0.0); d * ancilla_dim];
    for (e, slot) in pairs {
        let weight = sd.eigenvalues()[e].max(0.0).sqrt();
        for (i, z) in sd.eigenvectors()[e].data().iter().enumerate() {
            amps[i * ancilla_dim + slot] += z * weight;
        }
    }
    let mut dims = sd.dims().to_vec();
    dims.push(ancilla_dim);
    ComplexVector::new(dims, amps)
}

/// True iff some selected eigen-index attains λ_M (within `1e-12`).
pub fn has_max_eigenvalue(sel: &PurificationSelection, sd: &SpectralDecomposition) -> bool {
    let top = sd.max();
    sel.eigen_indices()
        .any(|e| e < sd.len() && (sd.eigenvalues()[e] - top).abs() <= TOL_MAX_EIG)
}

/// `(|00⟩ + |11⟩)/√2`.
pub fn bell_plus() -> PureState {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let v = ComplexVector::from_real(vec![2, 2], &[h, 0.0, 0.0, h]).expect("fixed shape");
    PureState::new(v).expect("unit norm")
}

/// Isotropic two-qubit state `q|ψ⁺⟩⟨ψ⁺| + (1 − q)I/4`.
pub fn isotropic(q: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::ParamOutOfRange(format!("q = {q} is outside [0, 1]")));
    }
    let a = (1.0 + q) / 4.0;
    let b = (1.0 - q) / 4.0;
    let h = q / 2.0;
    #[rustfmt::skip]
    let entries = [
        a,   0.0, 0.0, h,
        0.0, b,   0.0, 0.0,
        0.0, 0.0, b,   0.0,
        h,   0.0, 0.0, a,
    ];
    DensityMatrix::new(ComplexMatrix::from_real(vec![2, 2], &entries)?)
}

/// The two-qubit state `σ` with `|ψ⁺⟩⟨ψ⁺|^Γ / 4 = σ − (3/16)·I`.
pub fn bell_pt_sigma() -> DensityMatrix {
    #[rustfmt::skip]
    let entries = [
        5.0 / 16.0, 0.0,        0.0,        0.0,
        0.0,        3.0 / 16.0, 1.0 / 8.0,  0.0,
        0.0,        1.0 / 8.0,  3.0 / 16.0, 0.0,
        0.0,        0.0,        0.0,        5.0 / 16.0,
    ];
    let m = ComplexMatrix::from_real(vec![2, 2], &entries).expect("fixed shape");
    DensityMatrix::new(m).expect("valid state")
}

/// Seeded random full-rank state `GG†/tr(GG†)` with complex Gaussian `G`.
pub fn random_density(dims: &[usize], seed: u64) -> Result<DensityMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d: usize = dims.iter().product();
    let g: Vec<Complex64> = (0..d * d)
        .map(|_| Complex64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng)))
        .collect();
    let g = ComplexMatrix::new(dims.to_vec(), g)?;
    let gg = g.matmul(&g.adjoint())?;
    let tr = gg.trace().re;
    // Symmetrize away the rounding in the product.
    let m = gg.add(&gg.adjoint())?.scale(0.5 / tr);
    DensityMatrix::new(m)
}

/// Seeded random unit ket with complex Gaussian amplitudes.
pub fn random_pure(dims: &[usize], seed: u64) -> Result<PureState> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d: usize = dims.iter().product();
    let amps: Vec<Complex64> = (0..d)
        .map(|_| Complex64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng)))
        .collect();
    let v = ComplexVector::new(dims.to_vec(), amps)?;
    let n = v.norm();
    PureState::new(v.scale(Complex64::new(1.0 / n, 0.0)))
}
