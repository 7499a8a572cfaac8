//! Brute-force product-state search for small systems.
//!
//! Independent of the see-saw: every party but one is swept over a fixed angle
//! grid, and the remaining (largest) party is optimized exactly with
//! nalgebra's Hermitian eigensolver, or a closed form for qubits. The best grid
//! point is then polished with one see-saw run.
//!
//! A `d`-dimensional factor is parameterized with its first amplitude real and
//! nonnegative:
//!
//! ```text
//! r₀ = cos α₁,  r₁ = sin α₁ cos α₂,  …,  r_{d−1} = sin α₁ ⋯ sin α_{d−1}
//! μ_k = r_k · e^{iφ_k}   (φ₀ = 0)
//! ```
//!
//! with each `α ∈ [0, π/2]` on `n + 1` points and each `φ ∈ [0, 2π)` on `n`
//! points. For a qubit `α = θ/2` and `n = resolution`. Qutrits use
//! `n = resolution/8` and ququarts `n = resolution/32`, to keep the grid near
//! the qubit size. Doubling the resolution refines every axis by nesting, so the
//! raw extremum can only improve.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;

use crate::linalg::{ComplexMatrix, ComplexVector};
use crate::witness::{seesaw_from, Direction, ProductState, Witness, WitnessReport};
use crate::{Complex64, Error, Result, TOL_NEG, TOL_POS};

pub const MIN_RESOLUTION: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Max,
    Min,
}

impl Mode {
    fn sign(self) -> f64 {
        match self {
            Mode::Max => 1.0,
            Mode::Min => -1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridResult {
    /// Best value on the grid, before polishing.
    pub raw: f64,
    /// Value after the see-saw polish; the expectation at `state`.
    pub value: f64,
    pub state: ProductState,
    pub converged: bool,
    /// Number of grid points visited (the exact party not counted).
    pub points: usize,
}

/// True when the oracle covers `dims`: up to three qubits, or up to two parties of dimension ≤ 4.
pub fn supports(dims: &[usize]) -> bool {
    let qubits = dims.len() <= 3 && dims.iter().all(|&d| d == 2);
    let small = dims.len() <= 2 && dims.iter().all(|&d| (1..=4).contains(&d));
    !dims.is_empty() && (qubits || small)
}

fn per_angle(d: usize, resolution: usize) -> usize {
    match d {
        2 => resolution,
        3 => (resolution / 8).max(1),
        _ => (resolution / 32).max(1),
    }
}

/// All grid vectors for one party, in mixed-radix order (angles, then phases).
fn party_grid(d: usize, n: usize) -> Vec<Vec<Complex64>> {
    if d == 1 {
        return vec![vec![Complex64::new(1.0, 0.0)]];
    }
    let k = d - 1;
    let angle_points = n + 1;
    let total = angle_points.pow(k as u32) * n.pow(k as u32);
    let mut out = Vec::with_capacity(total);
    for idx in 0..total {
        let mut rest = idx;
        let mut phases = vec![0.0; k];
        for p in phases.iter_mut().rev() {
            *p = 2.0 * PI * (rest % n) as f64 / n as f64;
            rest /= n;
        }
        let mut alphas = vec![0.0; k];
        for a in alphas.iter_mut().rev() {
            *a = FRAC_PI_2 * (rest % angle_points) as f64 / n as f64;
            rest /= angle_points;
        }
        let mut v = Vec::with_capacity(d);
        let mut s = 1.0;
        for j in 0..d {
            let r = if j < k { s * alphas[j].cos() } else { s };
            if j < k {
                s *= alphas[j].sin();
            }
            let phase = if j == 0 { 0.0 } else { phases[j - 1] };
            v.push(Complex64::from_polar(r, phase));
        }
        out.push(v);
    }
    out
}

/// Contracts the party at `pos` of `dims` against `v`: `⟨v|M|v⟩` on that slot.
fn contract(data: &[Complex64], dims: &[usize], pos: usize, v: &[Complex64], out: &mut Vec<Complex64>) {
    let dk = dims[pos];
    let outer: usize = dims[..pos].iter().product();
    let inner: usize = dims[pos + 1..].iter().product();
    let n = outer * dk * inner;
    let m = outer * inner;
    out.clear();
    out.resize(m * m, Complex64::new(0.0, 0.0));
    for o in 0..outer {
        for i in 0..inner {
            let r_out = o * inner + i;
            for a in 0..dk {
                let va = v[a].conj();
                let row = ((o * dk + a) * inner + i) * n;
                for o2 in 0..outer {
                    for b in 0..dk {
                        let w = va * v[b];
                        let col = (o2 * dk + b) * inner;
                        let dst = r_out * m + o2 * inner;
                        for i2 in 0..inner {
                            out[dst + i2] += w * data[row + col + i2];
                        }
                    }
                }
            }
        }
    }
}

fn nalgebra_eig(data: &[Complex64], d: usize) -> SymmetricEigen<Complex64, nalgebra::Dyn> {
    SymmetricEigen::new(DMatrix::from_row_slice(d, d, data))
}

/// Extreme eigenvalue of a `d × d` Hermitian block.
fn exact_extreme(data: &[Complex64], d: usize, mode: Mode) -> f64 {
    match d {
        1 => data[0].re,
        2 => {
            let (a, c) = (data[0].re, data[3].re);
            let half = 0.5 * (a - c);
            let r = (half * half + data[1].norm_sqr()).sqrt();
            0.5 * (a + c) + mode.sign() * r
        }
        _ => {
            let ev = nalgebra_eig(data, d).eigenvalues;
            match mode {
                Mode::Max => ev.max(),
                Mode::Min => ev.min(),
            }
        }
    }
}

fn exact_vector(data: &[Complex64], d: usize, mode: Mode) -> Vec<Complex64> {
    if d == 1 {
        return vec![Complex64::new(1.0, 0.0)];
    }
    let eig = nalgebra_eig(data, d);
    let ev = &eig.eigenvalues;
    let pick = (0..d)
        .reduce(|best, j| if mode.sign() * ev[j] > mode.sign() * ev[best] { j } else { best })
        .expect("d ≥ 1");
    let col = eig.eigenvectors.column(pick);
    let norm = col.norm();
    col.iter().map(|z| z / norm).collect()
}

struct Plan {
    exact: usize,
    gridded: Vec<usize>,
    grids: Vec<Vec<Vec<Complex64>>>,
}

impl Plan {
    fn new(dims: &[usize], resolution: usize) -> Self {
        // The largest party (last on ties) is solved exactly.
        let exact = (0..dims.len()).rev().max_by_key(|&k| (dims[k], k)).expect("nonempty");
        let gridded: Vec<usize> = (0..dims.len()).filter(|&k| k != exact).collect();
        let grids = gridded
            .iter()
            .map(|&k| party_grid(dims[k], per_angle(dims[k], resolution)))
            .collect();
        Self { exact, gridded, grids }
    }

    /// Position of gridded party `level` once the earlier gridded parties are contracted away.
    fn position(&self, level: usize) -> usize {
        usize::from(self.gridded[level] > self.exact)
    }

    /// Dims of the parties still uncontracted at `level`, in original order.
    fn remaining_dims(&self, dims: &[usize], level: usize) -> Vec<usize> {
        (0..dims.len())
            .filter(|&k| k == self.exact || self.gridded[level..].contains(&k))
            .map(|k| dims[k])
            .collect()
    }
}

/// Best `(score, index)` over the sub-grid from `level` on; score is the value times the mode sign.
fn search(plan: &Plan, dims: &[usize], data: &[Complex64], level: usize, mode: Mode) -> (f64, usize) {
    let d_exact = dims[plan.exact];
    if level == plan.gridded.len() {
        return (mode.sign() * exact_extreme(data, d_exact, mode), 0);
    }
    let cur = plan.remaining_dims(dims, level);
    let pos = plan.position(level);
    let sub: usize = plan.grids[level + 1..].iter().map(Vec::len).product();
    let mut buf = Vec::new();
    let mut best = (f64::NEG_INFINITY, 0);
    for (g, v) in plan.grids[level].iter().enumerate() {
        contract(data, &cur, pos, v, &mut buf);
        let (score, idx) = search(plan, dims, &buf, level + 1, mode);
        if score > best.0 {
            best = (score, g * sub + idx);
        }
    }
    best
}

fn check_args(m: &ComplexMatrix, resolution: usize) -> Result<()> {
    m.ensure_hermitian()?;
    if !supports(m.dims()) {
        return Err(Error::UnsupportedDims(m.dims().to_vec()));
    }
    if resolution < MIN_RESOLUTION {
        return Err(Error::ParamOutOfRange(format!(
            "resolution {resolution} is below {MIN_RESOLUTION}"
        )));
    }
    Ok(())
}

/// Grid search followed by a see-saw polish from the best grid point.
pub fn grid_search(m: &ComplexMatrix, mode: Mode, resolution: usize) -> Result<GridResult> {
    check_args(m, resolution)?;
    let dims = m.dims().to_vec();
    let plan = Plan::new(&dims, resolution);
    let points: usize = plan.grids.iter().map(Vec::len).product();

    let (score, index) = if plan.gridded.is_empty() {
        search(&plan, &dims, m.data(), 0, mode)
    } else {
        let sub: usize = plan.grids[1..].iter().map(Vec::len).product();
        let top = plan.remaining_dims(&dims, 0);
        let pos = plan.position(0);
        plan.grids[0]
            .par_iter()
            .enumerate()
            .map(|(g, v)| {
                let mut buf = Vec::new();
                contract(m.data(), &top, pos, v, &mut buf);
                let (s, idx) = search(&plan, &dims, &buf, 1, mode);
                (s, g * sub + idx)
            })
            .reduce(
                || (f64::NEG_INFINITY, usize::MAX),
                |a, b| if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a },
            )
    };
    let raw = mode.sign() * score;

    // Rebuild the argmax: decode the grid index, then solve the exact party.
    let mut chosen = Vec::with_capacity(plan.gridded.len());
    let mut rest = index;
    for grid in plan.grids.iter().rev() {
        chosen.push(grid[rest % grid.len()].clone());
        rest /= grid.len();
    }
    chosen.reverse();
    let mut data = m.data().to_vec();
    let mut buf = Vec::new();
    for (level, v) in chosen.iter().enumerate() {
        contract(&data, &plan.remaining_dims(&dims, level), plan.position(level), v, &mut buf);
        std::mem::swap(&mut data, &mut buf);
    }
    let exact_vec = exact_vector(&data, dims[plan.exact], mode);

    let mut factors = vec![None; dims.len()];
    factors[plan.exact] = Some(exact_vec);
    for (&k, v) in plan.gridded.iter().zip(chosen) {
        factors[k] = Some(v);
    }
    let factors = factors
        .into_iter()
        .zip(&dims)
        .map(|(f, &d)| ComplexVector::new(vec![d], f.expect("every party assigned")))
        .collect::<Result<Vec<_>>>()?;
    let start = ProductState::new(factors)?;

    let direction = match mode {
        Mode::Max => Direction::Maximize,
        Mode::Min => Direction::Minimize,
    };
    let polished = seesaw_from(m, start, direction)?;
    Ok(GridResult {
        raw,
        value: polished.value,
        state: polished.state,
        converged: polished.converged,
        points,
    })
}

/// Polished grid extremum of `⟨μ|m|μ⟩` over product states.
pub fn grid_product_extremum(m: &ComplexMatrix, mode: Mode, resolution: usize) -> Result<f64> {
    Ok(grid_search(m, mode, resolution)?.value)
}

/// [`WitnessReport`] from the grid minimum; the spectral margin also comes from nalgebra.
pub fn exhaustive_witness_check(w: &Witness, resolution: usize) -> Result<WitnessReport> {
    let m = w.matrix();
    let grid = grid_search(&m, Mode::Min, resolution)?;
    let eig = nalgebra_eig(m.data(), m.dim());
    let ev = &eig.eigenvalues;
    let low = (0..ev.len())
        .reduce(|best, j| if ev[j] < ev[best] { j } else { best })
        .expect("nonempty");
    let col: Vec<Complex64> = eig.eigenvectors.column(low).iter().copied().collect();
    let witnessing_margin = -ev[low];
    Ok(WitnessReport {
        min_product_expectation: grid.value,
        witnessing_margin,
        is_witness: grid.value >= -TOL_POS && witnessing_margin > TOL_NEG,
        certificate_state: grid.state,
        violating_state: ComplexVector::new(m.dims().to_vec(), col)?,
        converged: grid.converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::{bell_plus, bell_pt_sigma, isotropic};

    #[test]
    fn grid_vectors_are_unit_and_nested() {
        for d in 2..=4 {
            let coarse = party_grid(d, 2);
            let fine = party_grid(d, 4);
            for v in &fine {
                let n: f64 = v.iter().map(|z| z.norm_sqr()).sum();
                assert!((n - 1.0).abs() < 1e-14);
                assert!(v[0].im == 0.0 && v[0].re >= 0.0);
            }
            for v in &coarse {
                assert!(fine.iter().any(|u| u.iter().zip(v).all(|(a, b)| (a - b).norm() < 1e-14)));
            }
        }
        assert_eq!(party_grid(2, 8).len(), 9 * 8);
    }

    #[test]
    fn contraction_matches_direct_expectation() {
        let m = bell_pt_sigma().into_matrix();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let a = vec![Complex64::new(h, 0.0), Complex64::new(0.0, h)];
        let mut out = Vec::new();
        contract(m.data(), &[2, 2], 0, &a, &mut out);
        let b = [Complex64::new(0.6, 0.0), Complex64::new(0.0, -0.8)];
        let direct: Complex64 = (0..2).flat_map(|i| (0..2).map(move |j| (i, j))).map(|(i, j)| b[i].conj() * out[i * 2 + j] * b[j]).sum();
        let full = ComplexVector::new(vec![2], a).unwrap().kron(&ComplexVector::new(vec![2], b.to_vec()).unwrap());
        assert!((direct.re - m.expectation(&full).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn known_extrema() {
        let sq = isotropic(0.2).unwrap().into_matrix();
        assert!((grid_product_extremum(&sq, Mode::Max, 64).unwrap() - 0.3).abs() < 1e-6);
        assert!((grid_product_extremum(&sq, Mode::Min, 64).unwrap() - 0.2).abs() < 1e-6);
        let bell = bell_plus().vector().projector();
        assert!((grid_product_extremum(&bell, Mode::Max, 64).unwrap() - 0.5).abs() < 1e-6);
        let pt = bell_pt_sigma().into_matrix();
        assert!((grid_product_extremum(&pt, Mode::Min, 64).unwrap() - 3.0 / 16.0).abs() < 1e-6);
        let mixed = ComplexMatrix::identity(&[2, 2]).unwrap().scale(0.25);
        for mode in [Mode::Max, Mode::Min] {
            let r = grid_search(&mixed, mode, 32).unwrap();
            assert!((r.raw - 0.25).abs() < 1e-15, "{}", r.raw);
            assert!((r.value - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn refinement_is_monotone() {
        let m = isotropic(0.37).unwrap().into_matrix().sub(&bell_pt_sigma().into_matrix()).unwrap();
        let m = m.with_dims(vec![2, 2]).unwrap();
        let mut prev = f64::NEG_INFINITY;
        for res in [32, 64, 128] {
            let raw = grid_search(&m, Mode::Max, res).unwrap().raw;
            assert!(raw >= prev - 1e-12);
            prev = raw;
        }
    }

    #[test]
    fn unsupported_shapes() {
        for dims in [vec![5, 2], vec![2, 2, 2, 2], vec![3, 2, 2]] {
            let m = ComplexMatrix::identity(&dims).unwrap();
            assert!(matches!(grid_search(&m, Mode::Max, 32), Err(Error::UnsupportedDims(_))));
        }
        let m = ComplexMatrix::identity(&[2, 2]).unwrap();
        assert!(matches!(grid_search(&m, Mode::Max, 16), Err(Error::ParamOutOfRange(_))));
        assert!(supports(&[4, 3]) && supports(&[2, 2, 2]) && supports(&[3]));
    }

    #[test]
    fn exact_party_can_be_first() {
        // [4, 2]: the ququart is solved exactly and the qubit is gridded.
        let psi = ComplexVector::from_real(vec![4, 2], &[0.5, 0.0, 0.0, 0.5, 0.5, 0.0, 0.0, 0.5]).unwrap();
        let m = psi.projector();
        let r = grid_search(&m, Mode::Max, 32).unwrap();
        assert!((r.value - 0.5).abs() < 1e-6);
        assert_eq!(r.state.dims(), vec![4, 2]);
    }

    #[test]
    fn closed_form_matches_nalgebra() {
        let blocks = [
            [1.0, 0.3, -0.2, 0.3, 0.2, -0.5],
            [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
            [-2.0, 1.0, 1.0, 0.1, 0.1, 4.0],
        ];
        for [a, br, bi, _, _, c] in blocks {
            let data = [
                Complex64::new(a, 0.0),
                Complex64::new(br, bi),
                Complex64::new(br, -bi),
                Complex64::new(c, 0.0),
            ];
            let ev = nalgebra_eig(&data, 2).eigenvalues;
            assert!((exact_extreme(&data, 2, Mode::Max) - ev.max()).abs() < 1e-12);
            assert!((exact_extreme(&data, 2, Mode::Min) - ev.min()).abs() < 1e-12);
        }
    }
}
