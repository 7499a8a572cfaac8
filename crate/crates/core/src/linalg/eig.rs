//! Cyclic Jacobi eigensolver for complex Hermitian matrices.
//!
//! Each rotation first removes the phase of the pivot `a_pq` with a diagonal
//! unitary and then applies the classical real Jacobi rotation, so the whole
//! step is the unitary `U = D·J` and `A ← U†AU`, `V ← VU`.

use std::cmp::Ordering;

use num_complex::Complex64;

use super::{ComplexMatrix, ComplexVector};
use crate::{Error, Result, TOL_EIG};

/// Sweep budget of the cyclic Jacobi iteration.
pub const JACOBI_SWEEPS: usize = 100;

/// Entries below this modulus do not fix the phase of an eigenvector.
const PHASE_TOL: f64 = 1e-12;
/// Quantization used to compare eigenvector entries when breaking eigenvalue ties.
const TIE_KEY_SCALE: f64 = 1e9;

/// Eigen-decomposition of a Hermitian matrix.
///
/// Eigenvalues are ascending. Ties (within `1e-10` relative to the spectral
/// scale) are ordered lexicographically by the phase-fixed eigenvector entries,
/// real part before imaginary part. Each eigenvector's first entry of modulus
/// above `1e-12` is real and positive.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDecomposition {
    dims: Vec<usize>,
    eigenvalues: Vec<f64>,
    eigenvectors: Vec<ComplexVector>,
}

impl SpectralDecomposition {
    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &[ComplexVector] {
        &self.eigenvectors
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Smallest eigenvalue, λ₀.
    pub fn min(&self) -> f64 {
        self.eigenvalues[0]
    }

    /// Largest eigenvalue, λ_M.
    pub fn max(&self) -> f64 {
        self.eigenvalues[self.len() - 1]
    }

    /// Index of the maximum eigenpair (the last one in the ordering).
    pub fn top_index(&self) -> usize {
        self.len() - 1
    }

    /// Number of eigenvalues above `1e-10`.
    pub fn rank(&self) -> usize {
        self.eigenvalues.iter().filter(|&&x| x > TOL_EIG).count()
    }

    /// `Σ λᵢ |eᵢ⟩⟨eᵢ|`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(&self.dims).expect("dims validated on construction");
        for (&lambda, v) in self.eigenvalues.iter().zip(&self.eigenvectors) {
            out = out
                .add(&v.projector().scale(lambda))
                .expect("eigenvectors share the matrix dims");
        }
        out
    }
}

/// Diagonalizes a Hermitian matrix.
///
/// Fails with [`Error::NotHermitian`] if any entry of `m − m†` exceeds `1e-10`
/// and with [`Error::NoConvergence`] if [`JACOBI_SWEEPS`] sweeps do not suffice.
pub fn hermitian_eig(m: &ComplexMatrix) -> Result<SpectralDecomposition> {
    m.ensure_hermitian()?;
    let n = m.dim();

    // Work on the exactly Hermitian part.
    let mut a = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        for j in 0..n {
            a[i * n + j] = (m.get(i, j) + m.get(j, i).conj()) * 0.5;
        }
    }
    let mut v = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        v[i * n + i] = Complex64::new(1.0, 0.0);
    }

    let scale = m.frobenius_norm();
    let threshold = f64::EPSILON * 1e-3 * scale;

    let mut converged = false;
    for _ in 0..JACOBI_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                let modulus = apq.norm();
                if modulus <= threshold || modulus == 0.0 {
                    continue;
                }
                rotated = true;
                rotate(&mut a, &mut v, n, p, q, apq, modulus);
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NoConvergence(JACOBI_SWEEPS));
    }

    let mut pairs: Vec<(f64, Vec<Complex64>)> = (0..n)
        .map(|j| {
            let mut col: Vec<Complex64> = (0..n).map(|i| v[i * n + j]).collect();
            fix_phase(&mut col);
            (a[j * n + j].re, col)
        })
        .collect();
    order_pairs(&mut pairs);

    let dims = m.dims().to_vec();
    let mut eigenvalues = Vec::with_capacity(n);
    let mut eigenvectors = Vec::with_capacity(n);
    for (lambda, col) in pairs {
        eigenvalues.push(lambda);
        eigenvectors.push(ComplexVector::new(dims.clone(), col)?);
    }
    Ok(SpectralDecomposition { dims, eigenvalues, eigenvectors })
}

fn rotate(
    a: &mut [Complex64],
    v: &mut [Complex64],
    n: usize,
    p: usize,
    q: usize,
    apq: Complex64,
    modulus: f64,
) {
    let phase = apq / modulus;
    let app = a[p * n + p].re;
    let aqq = a[q * n + q].re;
    let tau = (aqq - app) / (2.0 * modulus);
    let t = if tau.abs() > 1e150 {
        0.5 / tau
    } else {
        let sign = if tau >= 0.0 { 1.0 } else { -1.0 };
        sign / (tau.abs() + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;

    let u_pp = Complex64::new(c, 0.0);
    let u_pq = Complex64::new(s, 0.0);
    let u_qp = -phase.conj() * s;
    let u_qq = phase.conj() * c;

    for k in 0..n {
        let (akp, akq) = (a[k * n + p], a[k * n + q]);
        a[k * n + p] = akp * u_pp + akq * u_qp;
        a[k * n + q] = akp * u_pq + akq * u_qq;
    }
    for k in 0..n {
        let (apk, aqk) = (a[p * n + k], a[q * n + k]);
        a[p * n + k] = u_pp.conj() * apk + u_qp.conj() * aqk;
        a[q * n + k] = u_pq.conj() * apk + u_qq.conj() * aqk;
    }
    a[p * n + q] = Complex64::new(0.0, 0.0);
    a[q * n + p] = Complex64::new(0.0, 0.0);
    a[p * n + p] = Complex64::new(a[p * n + p].re, 0.0);
    a[q * n + q] = Complex64::new(a[q * n + q].re, 0.0);

    for k in 0..n {
        let (vkp, vkq) = (v[k * n + p], v[k * n + q]);
        v[k * n + p] = vkp * u_pp + vkq * u_qp;
        v[k * n + q] = vkp * u_pq + vkq * u_qq;
    }
}

fn fix_phase(col: &mut [Complex64]) {
    if let Some(z) = col.iter().copied().find(|z| z.norm() > PHASE_TOL) {
        let rot = z.conj() / z.norm();
        for x in col.iter_mut() {
            *x *= rot;
        }
        // The pivot entry is real by construction; drop the rounding residue.
        if let Some(first) = col.iter_mut().find(|x| x.norm() > PHASE_TOL) {
            *first = Complex64::new(first.norm(), 0.0);
        }
    }
}

fn tie_key(col: &[Complex64]) -> Vec<(i64, i64)> {
    col.iter()
        .map(|z| {
            (
                (z.re * TIE_KEY_SCALE).round() as i64,
                (z.im * TIE_KEY_SCALE).round() as i64,
            )
        })
        .collect()
}

fn order_pairs(pairs: &mut [(f64, Vec<Complex64>)]) {
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    let spread = pairs.iter().map(|p| p.0.abs()).fold(1.0, f64::max);
    let tie = TOL_EIG * spread;

    let mut start = 0;
    while start < pairs.len() {
        let mut end = start + 1;
        while end < pairs.len() && pairs[end].0 - pairs[end - 1].0 <= tie {
            end += 1;
        }
        if end - start > 1 {
            let run = &mut pairs[start..end];
            let mut keyed: Vec<_> = run.iter().map(|p| (tie_key(&p.1), p.clone())).collect();
            keyed.sort_by(|x, y| match x.0.cmp(&y.0) {
                Ordering::Equal => x.1 .0.total_cmp(&y.1 .0),
                other => other,
            });
            for (slot, (_, pair)) in run.iter_mut().zip(keyed) {
                *slot = pair;
            }
        }
        start = end;
    }
}
