use proptest::prelude::*;
use witness_forge::extend::*;
use witness_forge::linalg::hermitian_eig;
use witness_forge::oracle::{grid_product_extremum, Mode};
use witness_forge::qstate::{purify, random_density, random_pure, spectral};
use witness_forge::witness::{max_product_expectation, verify_witness};
use witness_forge::{DensityMatrix, PureState, Witness, WitnessForm};

/// `c·I − σ` with `c` just above the global product maximum (grid oracle), if that is below λ_M.
fn random_witness(dims: &[usize], seed: u64) -> Option<Witness> {
    let sigma = random_density(dims, seed).unwrap();
    let c = grid_product_extremum(sigma.matrix(), Mode::Max, 64).unwrap() + 1e-6;
    let top = spectral(&sigma).unwrap().max();
    (top - c > 1e-6).then(|| Witness::new_unchecked(WitnessForm::CMinusSigma, c, sigma))
}

fn assert_witness(w: &Witness, c: f64) {
    assert_eq!(w.c().to_bits(), c.to_bits());
    let r = verify_witness(w, 32, 1).unwrap();
    assert!(r.is_witness, "dims {:?}: min {} margin {}", w.dims(), r.min_product_expectation, r.witnessing_margin);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn extensions_preserve_witnesses(seed in 0u64..10_000, wide in any::<bool>()) {
        let dims = if wide { vec![2, 3] } else { vec![2, 2] };
        let Some(w) = random_witness(&dims, seed) else { return Ok(()); };
        let c = w.c();

        assert_witness(&purify_extend(&w).unwrap(), c);
        let tail = random_pure(&[2], seed).unwrap();
        assert_witness(&purify_extend_n(&w, &[tail]).unwrap(), c);
        let mixed = random_density(&[2], seed + 1).unwrap();
        assert_witness(&mixed_tensor_extend(&w, &[mixed]).unwrap(), c);
        assert_witness(&identity_extend(&w, &[3]).unwrap(), c);

        let sd = spectral(w.sigma()).unwrap();
        let sels = enumerate_partial_purifications(&sd, 2).unwrap();
        prop_assert_eq!(sels.len() as u128, count_partial_purifications(sd.rank(), 2));
        for sel in sels.iter().step_by(5) {
            assert_witness(&partial_purify_extend(&w, sel, None).unwrap(), c);
        }
    }

    #[test]
    fn identity_extension_of_dual_form(seed in 0u64..10_000) {
        let sigma = random_density(&[2, 2], seed).unwrap();
        let c = grid_product_extremum(sigma.matrix(), Mode::Min, 64).unwrap() - 1e-6;
        let low = spectral(&sigma).unwrap().min();
        prop_assume!(c - low > 1e-6);
        let w = Witness::new_unchecked(WitnessForm::SigmaMinusC, c, sigma);
        assert_witness(&identity_extend(&w, &[2]).unwrap(), c);
    }
}

#[test]
fn purification_reduces_back() {
    for dims in [vec![2, 2], vec![2, 3]] {
        for seed in 0..20 {
            let sigma = random_density(&dims, seed).unwrap();
            let psi = purify(&sigma).unwrap();
            let back = psi.density().matrix().partial_trace(&[1, 2]).unwrap();
            assert!(back.sub(sigma.matrix()).unwrap().frobenius_norm() <= 1e-10);
        }
    }
}

#[test]
fn purification_keeps_product_maximum() {
    for seed in 0..5 {
        let sigma = random_density(&[2, 2], 500 + seed).unwrap();
        let base = grid_product_extremum(sigma.matrix(), Mode::Max, 128).unwrap();
        let psi = purify(&sigma).unwrap().density();
        let ext = max_product_expectation(psi.matrix(), 64, seed).unwrap().value;
        assert!((ext - base).abs() < 1e-6, "seed {seed}: {ext} vs {base}");
    }
}

#[test]
fn normalized_mixed_tail_keeps_product_maximum_and_top_eigenvalue() {
    let sigma = random_density(&[2, 2], 7).unwrap();
    let base = max_product_expectation(sigma.matrix(), 32, 0).unwrap().value;
    let top = spectral(&sigma).unwrap().max();
    let w = Witness::new_unchecked(WitnessForm::CMinusSigma, base, sigma);
    for seed in 0..10 {
        let tail = random_density(&[2], 900 + seed).unwrap();
        let ext = mixed_tensor_extend(&w, &[tail]).unwrap();
        let m = ext.sigma().matrix();
        assert!((max_product_expectation(m, 32, 0).unwrap().value - base).abs() < 1e-5);
        assert!((hermitian_eig(m).unwrap().max() - top).abs() < 1e-10);
    }
}

#[test]
fn pure_tail_must_be_normalized() {
    let w = random_witness(&[2, 2], 3).expect("entangled top eigenvector");
    let good = random_pure(&[3], 0).unwrap();
    let bad = PureState::unnormalized(good.vector().scale(witness_forge::Complex64::new(0.5, 0.0)));
    assert!(purify_extend_n(&w, &[good.clone(), bad]).is_err());
    let zero_tail = DensityMatrix::maximally_mixed(&[1]).unwrap();
    assert!(mixed_tensor_extend(&w, &[zero_tail]).is_ok());
}
