//! Witnesses `W = c·I − σ` and `W = σ − c·I`: construction, c-intervals,
//! expectation values and verification.
//!
//! For `W = c·I − σ` the admissible interval is `c_min ≤ c < λ_M(σ)` with
//! `c_min = sup ⟨μ|σ|μ⟩` over unit product states; for `W = σ − c·I` it is
//! `λ₀(σ) < c ≤ c_max` with `c_max = inf ⟨μ|σ|μ⟩`. The spectral side is exact.
//! The optimized side comes from the see-saw, which only bounds the true
//! extremum from one direction, so it is widened by [`TOL_INTERVAL`].

mod seesaw;

pub use seesaw::{
    max_product_expectation, min_product_expectation, optimize, seesaw_from, Direction, OptResult,
    ProductState, SeesawRun, CONVERGENCE_TOL, DEFAULT_RESTARTS, MAX_ROUNDS,
};

use std::fmt;

use crate::linalg::{hermitian_eig, ComplexMatrix, ComplexVector};
use crate::qstate::{spectral, DensityMatrix};
use crate::{Error, Result, TOL_EIG, TOL_INTERVAL, TOL_NEG, TOL_POS};

/// Which canonical form a witness is stored in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WitnessForm {
    /// `W = c·I − σ`
    CMinusSigma,
    /// `W = σ − c·I`
    SigmaMinusC,
}

impl WitnessForm {
    pub fn as_str(self) -> &'static str {
        match self {
            WitnessForm::CMinusSigma => "c_minus_sigma",
            WitnessForm::SigmaMinusC => "sigma_minus_c",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "c_minus_sigma" => Ok(WitnessForm::CMinusSigma),
            "sigma_minus_c" => Ok(WitnessForm::SigmaMinusC),
            other => Err(Error::Parse(format!("unknown witness form {other:?}"))),
        }
    }
}

impl fmt::Display for WitnessForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// How much validation [`make_witness`] performs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Check {
    Strict,
    None,
}

/// A witness stored as `(form, c, σ)`.
///
/// `σ` may be unnormalized (partial purifications, tensor extensions).
#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    form: WitnessForm,
    c: f64,
    sigma: DensityMatrix,
}

impl Witness {
    /// Assembles a witness without checking the c-interval.
    pub fn new_unchecked(form: WitnessForm, c: f64, sigma: DensityMatrix) -> Self {
        Self { form, c, sigma }
    }

    pub fn form(&self) -> WitnessForm {
        self.form
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn sigma(&self) -> &DensityMatrix {
        &self.sigma
    }

    pub fn dims(&self) -> &[usize] {
        self.sigma.dims()
    }

    /// The operator `W` itself.
    pub fn matrix(&self) -> ComplexMatrix {
        let s = self.sigma.matrix();
        match self.form {
            WitnessForm::CMinusSigma => s.scale(-1.0).shift_diagonal(self.c),
            WitnessForm::SigmaMinusC => s.shift_diagonal(-self.c),
        }
    }
}

/// The admissible c-interval of a σ for one witness form.
#[derive(Debug, Clone, PartialEq)]
pub struct CInterval {
    pub form: WitnessForm,
    /// λ_M(σ) for `c·I − σ`, λ₀(σ) for `σ − c·I`; always a strict bound.
    pub spectral_bound: f64,
    /// See-saw estimate of c_min (resp. c_max); the closed side.
    pub optimized: OptResult,
}

impl CInterval {
    /// Computes both sides for `sigma`.
    pub fn compute(form: WitnessForm, sigma: &DensityMatrix, restarts: usize, seed: u64) -> Result<Self> {
        let sd = spectral(sigma)?;
        let (spectral_bound, optimized) = match form {
            WitnessForm::CMinusSigma => (sd.max(), max_product_expectation(sigma.matrix(), restarts, seed)?),
            WitnessForm::SigmaMinusC => (sd.min(), min_product_expectation(sigma.matrix(), restarts, seed)?),
        };
        Ok(Self { form, spectral_bound, optimized })
    }

    pub fn optimized_bound(&self) -> f64 {
        self.optimized.value
    }

    pub fn contains(&self, c: f64) -> bool {
        let opt = self.optimized.value;
        match self.form {
            WitnessForm::CMinusSigma => c >= opt - TOL_INTERVAL && spectral_strictly_below(c, self.spectral_bound),
            WitnessForm::SigmaMinusC => c <= opt + TOL_INTERVAL && spectral_strictly_above(c, self.spectral_bound),
        }
    }
}

impl fmt::Display for CInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.form {
            WitnessForm::CMinusSigma => write!(f, "[{}, {})", self.optimized.value, self.spectral_bound),
            WitnessForm::SigmaMinusC => write!(f, "({}, {}]", self.spectral_bound, self.optimized.value),
        }
    }
}

// Strict spectral comparisons: values within the eigenvalue tolerance count as equal.
fn spectral_strictly_below(c: f64, lambda_max: f64) -> bool {
    c < lambda_max - TOL_EIG
}

fn spectral_strictly_above(c: f64, lambda_min: f64) -> bool {
    c > lambda_min + TOL_EIG
}

/// Checks only the spectral (strict) side of the interval.
///
/// Extensions use this: the optimized side is what they provably preserve.
pub fn check_spectral_side(w: &Witness) -> Result<()> {
    let sd = spectral(w.sigma())?;
    let (ok, interval) = match w.form {
        WitnessForm::CMinusSigma => (spectral_strictly_below(w.c, sd.max()), format!("(-inf, {})", sd.max())),
        WitnessForm::SigmaMinusC => (spectral_strictly_above(w.c, sd.min()), format!("({}, inf)", sd.min())),
    };
    if ok {
        Ok(())
    } else {
        Err(Error::COutOfInterval { c: w.c, interval })
    }
}

/// Builds a witness, optionally validating `c` against the admissible interval.
pub fn make_witness(
    form: WitnessForm,
    sigma: DensityMatrix,
    c: f64,
    check: Check,
    restarts: usize,
    seed: u64,
) -> Result<Witness> {
    if !c.is_finite() {
        return Err(Error::ParamOutOfRange(format!("c = {c}")));
    }
    if check == Check::Strict {
        let interval = CInterval::compute(form, &sigma, restarts, seed)?;
        if !interval.contains(c) {
            return Err(Error::COutOfInterval { c, interval: interval.to_string() });
        }
    }
    Ok(Witness { form, c, sigma })
}

/// `tr(W·ρ)`.
pub fn evaluate(w: &Witness, rho: &DensityMatrix) -> Result<f64> {
    if w.dims() != rho.dims() {
        return Err(Error::DimensionMismatch(format!(
            "witness on {:?}, state on {:?}",
            w.dims(),
            rho.dims()
        )));
    }
    let overlap = w.sigma.matrix().trace_product(rho.matrix())?.re;
    let tr = rho.trace();
    Ok(match w.form {
        WitnessForm::CMinusSigma => w.c * tr - overlap,
        WitnessForm::SigmaMinusC => overlap - w.c * tr,
    })
}

/// Result of checking the two witness conditions.
#[derive(Debug, Clone, PartialEq)]
pub struct WitnessReport {
    /// Smallest expectation found over product states. Both the see-saw and the
    /// grid only ever overestimate the true minimum.
    pub min_product_expectation: f64,
    /// `−λ₀(W)`.
    pub witnessing_margin: f64,
    pub is_witness: bool,
    /// Product state attaining `min_product_expectation`.
    pub certificate_state: ProductState,
    /// Eigenvector of λ₀(W): the most strongly detected state.
    pub violating_state: ComplexVector,
    /// Whether the product-state search converged.
    pub converged: bool,
}

impl WitnessReport {
    pub(crate) fn assemble(
        min_product_expectation: f64,
        certificate_state: ProductState,
        converged: bool,
        w: &ComplexMatrix,
    ) -> Result<Self> {
        let sd = hermitian_eig(w)?;
        let witnessing_margin = -sd.min();
        Ok(Self {
            min_product_expectation,
            witnessing_margin,
            is_witness: min_product_expectation >= -TOL_POS && witnessing_margin > TOL_NEG,
            certificate_state,
            violating_state: sd.eigenvectors()[0].clone(),
            converged,
        })
    }
}

/// Checks positivity on product states (see-saw) and the existence of a negative eigenvalue.
pub fn verify_witness(w: &Witness, restarts: usize, seed: u64) -> Result<WitnessReport> {
    let m = w.matrix();
    let opt = min_product_expectation(&m, restarts, seed)?;
    WitnessReport::assemble(opt.value, opt.state, opt.converged, &m)
}

/// Heuristic completely-entangled-subspace test for `span(basis)`.
///
/// Returns `max ⟨μ|P|μ⟩ < 1 − 1e-6` together with the search result. A `false`
/// answer is conclusive (a product state lies in the subspace); `true` rests on
/// the see-saw having found the global maximum.
pub fn is_ces(basis: &[ComplexVector], restarts: usize, seed: u64) -> Result<(bool, OptResult)> {
    let first = basis
        .first()
        .ok_or_else(|| Error::InvalidState("empty basis".into()))?;
    if basis.iter().any(|v| v.dims() != first.dims()) {
        return Err(Error::DimensionMismatch("basis vectors live on different spaces".into()));
    }
    let mut worst: f64 = 0.0;
    for (i, a) in basis.iter().enumerate() {
        for (j, b) in basis.iter().enumerate() {
            let want = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((a.inner(b) - want).norm());
        }
    }
    if worst > 1e-10 {
        return Err(Error::NotOrthonormal(worst));
    }
    let mut projector = ComplexMatrix::zeros(first.dims())?;
    for v in basis {
        projector = projector.add(&v.projector())?;
    }
    let opt = max_product_expectation(&projector, restarts, seed)?;
    Ok((opt.value < 1.0 - 1e-6, opt))
}
