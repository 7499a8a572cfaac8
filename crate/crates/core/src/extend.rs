//! Bipartite to n-partite witness extensions.
//!
//! Every operation here keeps `c` bit-for-bit and only replaces `σ`:
//!
//! | operation | new σ |
//! |---|---|
//! | [`purify_extend`] | `|ψ⟩⟨ψ|`, `ψ` the minimal purification of σ |
//! | [`purify_extend_n`] | `|ψ⟩⟨ψ| ⊗ |ψ₄⟩⟨ψ₄| ⊗ … ⊗ |ψₙ⟩⟨ψₙ|` |
//! | [`partial_purify_extend`] | `|φ⟩⟨φ|`, `φ` a partial purification containing λ_M |
//! | [`mixed_tensor_extend`] | `σ ⊗ σ₃/λ_M(σ₃) ⊗ … ⊗ σₙ/λ_M(σₙ)` |
//! | [`identity_extend`] | `σ ⊗ I ⊗ … ⊗ I` |
//!
//! Only [`identity_extend`] accepts the `σ − c·I` form; the others need
//! `c·I − σ` because purifying pushes λ₀ to zero.
//!
//! Partial purification with pure tails is [`partial_purify_extend`] followed
//! by [`append_pure_tails`].

use rayon::prelude::*;

use crate::linalg::{ComplexMatrix, SpectralDecomposition};
use crate::qstate::{
    check_selection, has_max_eigenvalue, partial_purify, purify, spectral, DensityMatrix, PureState,
    PurificationSelection,
};
use crate::witness::{check_spectral_side, evaluate, Witness, WitnessForm};
use crate::{Error, Result, TOL_EIG};

/// Largest `rank · ancilla_dim` that [`enumerate_partial_purifications`] will expand.
pub const ENUMERATION_CAP: usize = 64;

const TOL_TAIL_NORM: f64 = 1e-10;

fn require_c_minus_sigma(w: &Witness, op: &'static str) -> Result<()> {
    match w.form() {
        WitnessForm::CMinusSigma => Ok(()),
        WitnessForm::SigmaMinusC => Err(Error::FormNotSupported(op)),
    }
}

fn finish(w: Witness) -> Result<Witness> {
    check_spectral_side(&w)?;
    Ok(w)
}

/// `c·I − |ψ⟩⟨ψ|` with `ψ` the minimal purification of σ (ancilla dimension = rank).
pub fn purify_extend(w: &Witness) -> Result<Witness> {
    require_c_minus_sigma(w, "purify_extend")?;
    let psi = purify(w.sigma())?;
    finish(Witness::new_unchecked(WitnessForm::CMinusSigma, w.c(), psi.density()))
}

/// [`purify_extend`] followed by tensoring normalized pure states onto σ.
pub fn purify_extend_n(w: &Witness, tails: &[PureState]) -> Result<Witness> {
    append_pure_tails(purify_extend(w)?, tails)
}

/// Replaces σ by `σ ⊗ |ψ₁⟩⟨ψ₁| ⊗ … ⊗ |ψₖ⟩⟨ψₖ|` for a `c·I − σ` witness whose σ is pure
/// (a purification or a partial purification).
pub fn append_pure_tails(w: Witness, tails: &[PureState]) -> Result<Witness> {
    require_c_minus_sigma(&w, "append_pure_tails")?;
    let mut sigma = w.sigma().clone();
    for (k, tail) in tails.iter().enumerate() {
        if !tail.is_normalized() || (tail.norm_sqr() - 1.0).abs() > TOL_TAIL_NORM {
            return Err(Error::UnnormalizedTail(k));
        }
        sigma = sigma.kron(&tail.density());
    }
    finish(Witness::new_unchecked(WitnessForm::CMinusSigma, w.c(), sigma))
}

/// `c*·I − |φ⟩⟨φ|` for a partial purification `φ` selected by `sel`.
///
/// The selection has to contain a maximum eigenpair of σ. `c*` is `c_prime` if
/// given, which must then satisfy `c ≤ c' < ‖φ‖²`; otherwise `c*` is `w.c()`.
pub fn partial_purify_extend(
    w: &Witness,
    sel: &PurificationSelection,
    c_prime: Option<f64>,
) -> Result<Witness> {
    require_c_minus_sigma(w, "partial_purify_extend")?;
    let sd = spectral(w.sigma())?;
    check_selection(sel, &sd)?;
    if !has_max_eigenvalue(sel, &sd) {
        return Err(Error::MaxEigenvalueNotSelected);
    }
    let phi = partial_purify(w.sigma(), sel)?;
    let c = match c_prime {
        None => w.c(),
        Some(cp) => {
            // λ_M of the unnormalized |φ⟩⟨φ| is its squared norm.
            let upper = phi.norm_sqr();
            if !(cp >= w.c() && cp < upper) {
                return Err(Error::CPrimeOutOfInterval { c_prime: cp, lower: w.c(), upper });
            }
            cp
        }
    };
    finish(Witness::new_unchecked(WitnessForm::CMinusSigma, c, phi.density()))
}

/// Extends over many selections in parallel; results come back in input order.
pub fn partial_purify_extend_all(
    w: &Witness,
    selections: &[PurificationSelection],
) -> Vec<Result<Witness>> {
    selections
        .par_iter()
        .map(|sel| partial_purify_extend(w, sel, None))
        .collect()
}

fn binomial(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

/// Number of partial purifications with maximum eigenvalue:
/// `Σ_{i=1}^{min(d3,R)} C(R−1, i−1) · d3!/(d3−i)!`.
///
/// Saturates at `u128::MAX`.
pub fn count_partial_purifications(rank: usize, ancilla_dim: usize) -> u128 {
    let (r, d) = (rank as u128, ancilla_dim as u128);
    let mut total: u128 = 0;
    let mut falling: u128 = 1;
    for i in 1..=r.min(d) {
        falling = falling.saturating_mul(d - i + 1);
        total = total.saturating_add(binomial(r - 1, i - 1).saturating_mul(falling));
    }
    total
}

fn combinations(pool: &[usize], k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for (i, &x) in pool.iter().enumerate() {
        for mut rest in combinations(&pool[i + 1..], k - 1) {
            rest.insert(0, x);
            out.push(rest);
        }
    }
    out
}

fn injections(count: usize, slots: usize) -> Vec<Vec<usize>> {
    fn go(count: usize, slots: usize, used: &mut Vec<bool>, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == count {
            out.push(cur.clone());
            return;
        }
        for s in 0..slots {
            if !used[s] {
                used[s] = true;
                cur.push(s);
                go(count, slots, used, cur, out);
                cur.pop();
                used[s] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(count, slots, &mut vec![false; slots], &mut Vec::new(), &mut out);
    out
}

/// All selections containing the top eigen-index, with injective slot
/// assignments into an ancilla of dimension `ancilla_dim`, sorted
/// lexicographically.
///
/// With a degenerate λ_M only the highest-index representative is forced in;
/// the other top-eigenspace indices are treated like any other eigenpair, so the
/// list length equals [`count_partial_purifications`] for every spectrum.
pub fn enumerate_partial_purifications(
    sd: &SpectralDecomposition,
    ancilla_dim: usize,
) -> Result<Vec<PurificationSelection>> {
    if ancilla_dim == 0 {
        return Err(Error::ParamOutOfRange("ancilla dimension must be at least 1".into()));
    }
    let rank = sd.rank();
    if rank == 0 {
        return Err(Error::InvalidState("zero operator has no purification".into()));
    }
    if rank * ancilla_dim > ENUMERATION_CAP {
        return Err(Error::CountTooLarge {
            rank,
            ancilla_dim,
            count: count_partial_purifications(rank, ancilla_dim),
        });
    }
    let top = sd.top_index();
    let others: Vec<usize> = (sd.len() - rank..top).filter(|&e| sd.eigenvalues()[e] > TOL_EIG).collect();

    let mut out = Vec::new();
    for size in 1..=rank.min(ancilla_dim) {
        for mut chosen in combinations(&others, size - 1) {
            chosen.push(top);
            for slots in injections(size, ancilla_dim) {
                let mut pairs: Vec<(usize, usize)> = chosen.iter().copied().zip(slots).collect();
                pairs.sort_unstable();
                out.push(PurificationSelection::new(pairs, ancilla_dim)?);
            }
        }
    }
    out.sort();
    Ok(out)
}

/// `c·I − σ ⊗ σ₃/λ_M(σ₃) ⊗ … ⊗ σₙ/λ_M(σₙ)` for normalized tail states.
pub fn mixed_tensor_extend(w: &Witness, tails: &[DensityMatrix]) -> Result<Witness> {
    require_c_minus_sigma(w, "mixed_tensor_extend")?;
    let mut sigma = w.sigma().clone();
    for (k, tail) in tails.iter().enumerate() {
        if !tail.is_normalized() {
            return Err(Error::InvalidState(format!("tail {k} is not normalized")));
        }
        let top = spectral(tail)?.max();
        if top <= TOL_EIG {
            return Err(Error::ZeroMaxEigenvalue(k));
        }
        sigma = sigma.kron(&DensityMatrix::from_parts(tail.matrix().scale(1.0 / top), false));
    }
    finish(Witness::new_unchecked(WitnessForm::CMinusSigma, w.c(), sigma))
}

/// Replaces σ by `σ ⊗ I_{d₃} ⊗ … ⊗ I_{dₙ}`; works for both forms.
pub fn identity_extend(w: &Witness, tail_dims: &[usize]) -> Result<Witness> {
    if tail_dims.contains(&0) {
        return Err(Error::InvalidDims(format!("tail dimensions {tail_dims:?}")));
    }
    let mut sigma = w.sigma().clone();
    for &d in tail_dims {
        // I_1 keeps a normalized σ normalized.
        let id = DensityMatrix::from_parts(ComplexMatrix::identity(&[d])?, d == 1);
        sigma = sigma.kron(&id);
    }
    finish(Witness::new_unchecked(w.form(), w.c(), sigma))
}

/// `tr(W_ext · ρ₁₂ ⊗ ρ₃ ⊗ … ⊗ ρₙ)`.
pub fn detect_product_extension(
    w_ext: &Witness,
    rho12: &DensityMatrix,
    tails: &[DensityMatrix],
) -> Result<f64> {
    let rho = tails.iter().fold(rho12.clone(), |acc, t| acc.kron(t));
    evaluate(w_ext, &rho)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ComplexVector;
    use crate::qstate::{bell_plus, bell_pt_sigma, isotropic};
    use crate::witness::{make_witness, verify_witness, Check};

    fn isotropic_witness(q: f64) -> Witness {
        make_witness(WitnessForm::CMinusSigma, isotropic(q).unwrap(), (1.0 + q) / 4.0, Check::None, 1, 0).unwrap()
    }

    fn dual_witness() -> Witness {
        make_witness(WitnessForm::SigmaMinusC, bell_pt_sigma(), 3.0 / 16.0, Check::None, 1, 0).unwrap()
    }

    /// Exhaustive count: every injective partial map eigen-index → slot that uses the top index.
    fn brute_force_count(rank: usize, slots: usize) -> u128 {
        let top = rank - 1;
        let mut count = 0;
        let mut assign = vec![0usize; rank]; // 0 = unused, s+1 = slot s
        loop {
            let used: Vec<usize> = assign.iter().filter(|&&a| a > 0).copied().collect();
            let mut sorted = used.clone();
            sorted.sort_unstable();
            sorted.dedup();
            if assign[top] > 0 && sorted.len() == used.len() {
                count += 1;
            }
            let mut k = 0;
            loop {
                if k == rank {
                    return count;
                }
                assign[k] += 1;
                if assign[k] <= slots {
                    break;
                }
                assign[k] = 0;
                k += 1;
            }
        }
    }

    fn nondegenerate_spectrum(rank: usize) -> SpectralDecomposition {
        let diag: Vec<f64> = (1..=rank).map(|k| k as f64).collect();
        let total: f64 = diag.iter().sum();
        let diag: Vec<f64> = diag.iter().map(|x| x / total).collect();
        let m = ComplexMatrix::from_diagonal(vec![rank], &diag).unwrap();
        spectral(&DensityMatrix::new(m).unwrap()).unwrap()
    }

    #[test]
    fn counting_formula_examples() {
        assert_eq!(count_partial_purifications(4, 1), 1);
        assert_eq!(count_partial_purifications(4, 2), 8);
        assert_eq!(count_partial_purifications(2, 2), 4);
        assert_eq!(count_partial_purifications(1, 5), 5);
    }

    #[test]
    fn counting_matches_brute_force() {
        for r in 1..=5 {
            for d in 1..=6 {
                assert_eq!(count_partial_purifications(r, d), brute_force_count(r, d), "R={r} d3={d}");
            }
        }
    }

    #[test]
    fn enumeration_matches_formula() {
        for r in 1..=5 {
            for d in 1..=r {
                let sels = enumerate_partial_purifications(&nondegenerate_spectrum(r), d).unwrap();
                assert_eq!(sels.len() as u128, count_partial_purifications(r, d), "R={r} d3={d}");
                assert!(sels.windows(2).all(|w| w[0] < w[1]));
                let sd = nondegenerate_spectrum(r);
                assert!(sels.iter().all(|s| has_max_eigenvalue(s, &sd)));
            }
        }
    }

    #[test]
    fn enumeration_of_isotropic_state() {
        let sd = spectral(&isotropic(0.2).unwrap()).unwrap();
        let sels = enumerate_partial_purifications(&sd, 2).unwrap();
        assert_eq!(sels.len(), 8);
        let one = enumerate_partial_purifications(&sd, 1).unwrap();
        assert_eq!(one, vec![PurificationSelection::new(vec![(3, 0)], 1).unwrap()]);

        let rank_one = spectral(&bell_plus().density()).unwrap();
        assert_eq!(enumerate_partial_purifications(&rank_one, 3).unwrap().len(), 3);
        assert_eq!(count_partial_purifications(1, 3), 3);
    }

    #[test]
    fn enumeration_cap() {
        let sd = spectral(&DensityMatrix::maximally_mixed(&[2, 4]).unwrap()).unwrap();
        match enumerate_partial_purifications(&sd, 9) {
            Err(Error::CountTooLarge { rank: 8, ancilla_dim: 9, count }) => {
                assert_eq!(count, count_partial_purifications(8, 9));
            }
            other => panic!("{other:?}"),
        }
        assert!(enumerate_partial_purifications(&sd, 0).is_err());
    }

    #[test]
    fn purification_extension_of_isotropic_witness() {
        let w = isotropic_witness(0.2);
        let ext = purify_extend(&w).unwrap();
        assert_eq!(ext.dims(), &[2, 2, 4]);
        assert_eq!(ext.c().to_bits(), w.c().to_bits());
        let report = verify_witness(&ext, 32, 0).unwrap();
        assert!(report.is_witness);
        assert!((report.witnessing_margin - 0.7).abs() < 1e-10);
    }

    #[test]
    fn rank_one_purification_has_trivial_ancilla() {
        let phi = ComplexVector::from_real(vec![2, 2], &[0.6, 0.0, 0.0, 0.8]).unwrap();
        let sigma = PureState::new(phi.clone()).unwrap().density();
        let w = Witness::new_unchecked(WitnessForm::CMinusSigma, 0.7, sigma);
        let ext = purify_extend(&w).unwrap();
        assert_eq!(ext.dims(), &[2, 2, 1]);
        let expected = phi.kron(&ComplexVector::basis(vec![1], 0).unwrap()).projector();
        assert!(ext.sigma().matrix().max_abs_diff(&expected) < 1e-12);
    }

    #[test]
    fn single_system_seed_witness() {
        let seed = Witness::new_unchecked(WitnessForm::CMinusSigma, 0.5, DensityMatrix::maximally_mixed(&[2]).unwrap());
        assert!(seed.matrix().frobenius_norm() == 0.0);
        let ext = purify_extend(&seed).unwrap();
        assert_eq!(ext.dims(), &[2, 2]);
        // Purifies to (|01⟩ + |10⟩)/√2 under the tie ordering; the (|00⟩ + |11⟩)/√2
        // version is a permuted full selection.
        let crossed = PurificationSelection::new(vec![(0, 1), (1, 0)], 2).unwrap();
        let bell = partial_purify_extend(&seed, &crossed, None).unwrap();
        let want = bell_plus().density().into_matrix().scale(-1.0).shift_diagonal(0.5);
        assert!(bell.matrix().max_abs_diff(&want) < 1e-15);
        for w in [&ext, &bell] {
            let report = verify_witness(w, 16, 0).unwrap();
            assert!(report.is_witness);
        }
    }

    #[test]
    fn pure_tails() {
        let w = isotropic_witness(0.2);
        let zero = PureState::new(ComplexVector::basis(vec![2], 0).unwrap()).unwrap();
        let ext = purify_extend_n(&w, &[zero]).unwrap();
        assert_eq!(ext.dims(), &[2, 2, 4, 2]);
        assert_eq!(purify_extend_n(&w, &[]).unwrap(), purify_extend(&w).unwrap());
        let min = crate::linalg::hermitian_eig(&ext.matrix()).unwrap().min();
        assert!((min - (w.c() - 1.0)).abs() < 1e-10);

        let bad = PureState::unnormalized(ComplexVector::from_real(vec![2], &[1.0, 1.0]).unwrap());
        assert!(matches!(purify_extend_n(&w, &[bad]), Err(Error::UnnormalizedTail(0))));
    }

    #[test]
    fn isotropic_partial_purification_witnesses() {
        let q = 0.2;
        let w = isotropic_witness(q);
        for text in ["3:0,2:1", "3:0,1:1", "3:1,0:0"] {
            let sel = PurificationSelection::parse(text, 2).unwrap();
            let ext = partial_purify_extend(&w, &sel, None).unwrap();
            assert_eq!(ext.dims(), &[2, 2, 2]);
            assert_eq!(ext.c(), w.c());
            let report = verify_witness(&ext, 32, 0).unwrap();
            assert!(report.is_witness, "{text}");
            assert!(!ext.sigma().is_normalized());
        }
        let missing = PurificationSelection::parse("2:0,1:1", 2).unwrap();
        assert!(matches!(partial_purify_extend(&w, &missing, None), Err(Error::MaxEigenvalueNotSelected)));
    }

    #[test]
    fn c_prime_bounds() {
        let w = isotropic_witness(0.2);
        let sel = PurificationSelection::parse("3:0,2:1", 2).unwrap();
        let ext = partial_purify_extend(&w, &sel, Some(0.5)).unwrap();
        assert_eq!(ext.c(), 0.5);
        assert!(verify_witness(&ext, 16, 0).unwrap().is_witness);
        for bad in [0.25, 0.6, 0.7] {
            assert!(matches!(
                partial_purify_extend(&w, &sel, Some(bad)),
                Err(Error::CPrimeOutOfInterval { .. })
            ));
        }
    }

    #[test]
    fn dual_form_is_rejected_by_purifications() {
        let w = dual_witness();
        assert!(matches!(purify_extend(&w), Err(Error::FormNotSupported(_))));
        let sel = PurificationSelection::parse("3:0", 1).unwrap();
        assert!(matches!(partial_purify_extend(&w, &sel, None), Err(Error::FormNotSupported(_))));
        assert!(matches!(mixed_tensor_extend(&w, &[]), Err(Error::FormNotSupported(_))));
    }

    #[test]
    fn mixed_tails() {
        let w = isotropic_witness(0.2);
        let half = DensityMatrix::maximally_mixed(&[2]).unwrap();
        let a = mixed_tensor_extend(&w, &[half]).unwrap();
        let b = identity_extend(&w, &[2]).unwrap();
        assert!(a.matrix().max_abs_diff(&b.matrix()) < 1e-15);

        let tail = DensityMatrix::new(ComplexMatrix::from_diagonal(vec![2], &[0.7, 0.3]).unwrap()).unwrap();
        let ext = mixed_tensor_extend(&w, &[tail]).unwrap();
        let expected = isotropic(0.2).unwrap().matrix().kron(&ComplexMatrix::from_diagonal(vec![2], &[1.0, 3.0 / 7.0]).unwrap());
        assert!(ext.sigma().matrix().max_abs_diff(&expected) < 1e-15);
        assert!(verify_witness(&ext, 32, 0).unwrap().is_witness);

        let one = PureState::new(ComplexVector::basis(vec![3], 2).unwrap()).unwrap().density();
        let ext = mixed_tensor_extend(&w, std::slice::from_ref(&one)).unwrap();
        assert!(ext.sigma().matrix().max_abs_diff(&isotropic(0.2).unwrap().matrix().kron(one.matrix())) < 1e-15);
    }

    #[test]
    fn identity_extension_of_dual_witness() {
        let w = dual_witness();
        for (tail, dims) in [(4usize, vec![2usize, 2, 4]), (2, vec![2, 2, 2])] {
            let ext = identity_extend(&w, &[tail]).unwrap();
            assert_eq!(ext.dims(), dims.as_slice());
            assert_eq!(ext.form(), WitnessForm::SigmaMinusC);
            assert!(verify_witness(&ext, 32, 0).unwrap().is_witness);
        }
        let same = identity_extend(&w, &[1]).unwrap();
        assert_eq!(same.dims(), &[2, 2, 1]);
        assert_eq!(same.matrix().data(), w.matrix().data());
        assert!(identity_extend(&w, &[0]).is_err());
    }

    #[test]
    fn product_extension_detection() {
        let (q, p) = (0.2, 0.5);
        let ext = identity_extend(&isotropic_witness(q), &[2]).unwrap();
        let v = detect_product_extension(&ext, &isotropic(p).unwrap(), &[DensityMatrix::maximally_mixed(&[2]).unwrap()])
            .unwrap();
        assert!((v - q * (1.0 - 3.0 * p) / 4.0).abs() < 1e-14);

        let dual = identity_extend(&dual_witness(), &[2]).unwrap();
        let zero = PureState::new(ComplexVector::basis(vec![2], 0).unwrap()).unwrap().density();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let singlet = PureState::new(ComplexVector::from_real(vec![2, 2], &[0.0, h, -h, 0.0]).unwrap()).unwrap();
        let v = detect_product_extension(&dual, &singlet.density(), &[zero]).unwrap();
        assert!((v + 0.125).abs() < 1e-14);

        assert!(detect_product_extension(&dual, &bell_plus().density(), &[]).is_err());
    }

    #[test]
    fn batch_extension_keeps_order() {
        let w = isotropic_witness(0.2);
        let sd = spectral(w.sigma()).unwrap();
        let sels = enumerate_partial_purifications(&sd, 2).unwrap();
        let batch = partial_purify_extend_all(&w, &sels);
        for (sel, got) in sels.iter().zip(batch) {
            assert_eq!(got.unwrap(), partial_purify_extend(&w, sel, None).unwrap());
        }
    }
}
