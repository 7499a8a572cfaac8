use witness_forge::extend::partial_purify_extend;
use witness_forge::oracle::{exhaustive_witness_check, grid_product_extremum, grid_search, Mode};
use witness_forge::qstate::{bell_pt_sigma, isotropic, random_density};
use witness_forge::witness::{max_product_expectation, min_product_expectation, verify_witness};
use witness_forge::{ComplexMatrix, PurificationSelection, Witness, WitnessForm};

/// Indefinite Hermitian operator: difference of two seeded random states.
fn random_hermitian(dims: &[usize], seed: u64) -> ComplexMatrix {
    let a = random_density(dims, 2 * seed).unwrap().into_matrix();
    let b = random_density(dims, 2 * seed + 1).unwrap().into_matrix();
    a.sub(&b.scale(0.7)).unwrap()
}

#[test]
fn seesaw_agrees_with_grid_on_two_qubits() {
    for seed in 0..20 {
        let m = random_hermitian(&[2, 2], seed);
        let grid_max = grid_product_extremum(&m, Mode::Max, 256).unwrap();
        let grid_min = grid_product_extremum(&m, Mode::Min, 256).unwrap();
        let ss_max = max_product_expectation(&m, 32, seed).unwrap().value;
        let ss_min = min_product_expectation(&m, 32, seed).unwrap().value;
        assert!((grid_max - ss_max).abs() <= 1e-4, "seed {seed}: {grid_max} vs {ss_max}");
        assert!((grid_min - ss_min).abs() <= 1e-4, "seed {seed}: {grid_min} vs {ss_min}");
    }
}

#[test]
fn raw_grid_is_close_before_polish() {
    for seed in 0..5 {
        let m = random_hermitian(&[2, 2], seed);
        let r = grid_search(&m, Mode::Max, 256).unwrap();
        assert!(r.value >= r.raw - 1e-12);
        assert!(r.value - r.raw <= 1e-3, "seed {seed}");
    }
}

#[test]
fn seesaw_agrees_with_grid_on_larger_parties() {
    for dims in [vec![2, 3], vec![3, 3], vec![2, 4], vec![4, 4], vec![2, 2, 2]] {
        for seed in 0..3 {
            let m = random_hermitian(&dims, 100 + seed);
            // Ququart grids are 32× coarser per angle.
            let res = if dims.contains(&4) { 256 } else { 64 };
            let grid = grid_product_extremum(&m, Mode::Max, res).unwrap();
            let ss = max_product_expectation(&m, 32, seed).unwrap().value;
            assert!((grid - ss).abs() <= 1e-4, "{dims:?} seed {seed}: {grid} vs {ss}");
        }
    }
}

#[test]
fn closed_form_extrema() {
    for q in [0.1, 0.2, 0.3] {
        let s = isotropic(q).unwrap().into_matrix();
        assert!((grid_product_extremum(&s, Mode::Max, 256).unwrap() - (1.0 + q) / 4.0).abs() < 1e-6);
        assert!((grid_product_extremum(&s, Mode::Min, 256).unwrap() - (1.0 - q) / 4.0).abs() < 1e-6);
    }
    let pt = bell_pt_sigma().into_matrix();
    assert!((grid_product_extremum(&pt, Mode::Min, 256).unwrap() - 3.0 / 16.0).abs() < 1e-6);
}

#[test]
fn grid_witness_checks() {
    let q = 0.2;
    let w = Witness::new_unchecked(WitnessForm::CMinusSigma, (1.0 + q) / 4.0, isotropic(q).unwrap());
    let r = exhaustive_witness_check(&w, 64).unwrap();
    assert!(r.is_witness);
    assert!(r.min_product_expectation.abs() < 1e-8);
    assert!((r.witnessing_margin - 0.1).abs() < 1e-12);

    let above = Witness::new_unchecked(WitnessForm::CMinusSigma, 0.5, isotropic(q).unwrap());
    assert!(!exhaustive_witness_check(&above, 64).unwrap().is_witness);

    for text in ["3:0,2:1", "3:0,1:1", "3:1,0:0"] {
        let sel = PurificationSelection::parse(text, 2).unwrap();
        let ext = partial_purify_extend(&w, &sel, None).unwrap();
        let grid = exhaustive_witness_check(&ext, 64).unwrap();
        let ss = verify_witness(&ext, 32, 0).unwrap();
        assert!(grid.is_witness, "{text}");
        assert!((grid.witnessing_margin - ss.witnessing_margin).abs() < 1e-10);
        assert!((grid.min_product_expectation - ss.min_product_expectation).abs() < 1e-6);
    }
}
