//! Dense complex linear algebra on tensor-product Hilbert spaces.
//!
//! Every matrix and vector carries its per-party dimension vector `dims`; the
//! full dimension is `D = dims.iter().product()`. Basis indices are row-major
//! over the parties, party 1 being the most significant digit.

mod eig;

pub use eig::{hermitian_eig, SpectralDecomposition, JACOBI_SWEEPS};

use num_complex::Complex64;

use crate::{Error, Result, TOL_HERM};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

fn check_dims(dims: &[usize]) -> Result<usize> {
    if dims.is_empty() {
        return Err(Error::InvalidDims("dimension list is empty".into()));
    }
    if dims.contains(&0) {
        return Err(Error::InvalidDims(format!("zero local dimension in {dims:?}")));
    }
    Ok(dims.iter().product())
}

/// Splits a flat basis index into per-party digits.
fn digits(mut index: usize, dims: &[usize], out: &mut [usize]) {
    for (slot, &d) in out.iter_mut().zip(dims).rev() {
        *slot = index % d;
        index /= d;
    }
}

fn flatten(digits: &[usize], dims: &[usize]) -> usize {
    digits.iter().zip(dims).fold(0, |acc, (&x, &d)| acc * d + x)
}

/// Dense square complex matrix over `H_1 ⊗ … ⊗ H_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    dims: Vec<usize>,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    /// Builds a matrix from row-major entries.
    pub fn new(dims: Vec<usize>, data: Vec<Complex64>) -> Result<Self> {
        let d = check_dims(&dims)?;
        if data.len() != d * d {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {d}x{d} matrix",
                data.len()
            )));
        }
        Ok(Self { dims, data })
    }

    pub fn from_real(dims: Vec<usize>, data: &[f64]) -> Result<Self> {
        Self::new(dims, data.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn zeros(dims: &[usize]) -> Result<Self> {
        let d = check_dims(dims)?;
        Ok(Self { dims: dims.to_vec(), data: vec![ZERO; d * d] })
    }

    pub fn identity(dims: &[usize]) -> Result<Self> {
        let mut m = Self::zeros(dims)?;
        let d = m.dim();
        for i in 0..d {
            m.data[i * d + i] = ONE;
        }
        Ok(m)
    }

    pub fn from_diagonal(dims: Vec<usize>, diag: &[f64]) -> Result<Self> {
        let mut m = Self::zeros(&dims)?;
        let d = m.dim();
        if diag.len() != d {
            return Err(Error::DimensionMismatch(format!(
                "{} diagonal entries for dimension {d}",
                diag.len()
            )));
        }
        for (i, &x) in diag.iter().enumerate() {
            m.data[i * d + i] = Complex64::new(x, 0.0);
        }
        Ok(m)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn parties(&self) -> usize {
        self.dims.len()
    }

    /// Full dimension `D`.
    pub fn dim(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.dim() + col]
    }

    /// Same entries, new tensor factorization of the same total dimension.
    pub fn with_dims(mut self, dims: Vec<usize>) -> Result<Self> {
        let d = check_dims(&dims)?;
        if d != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "cannot relabel dimension {} as {dims:?}",
                self.dim()
            )));
        }
        self.dims = dims;
        Ok(self)
    }

    fn same_shape(&self, other: &Self) -> Result<()> {
        if self.dims != other.dims {
            return Err(Error::DimensionMismatch(format!(
                "{:?} vs {:?}",
                self.dims, other.dims
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        Ok(Self { dims: self.dims.clone(), data })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Ok(Self { dims: self.dims.clone(), data })
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            dims: self.dims.clone(),
            data: self.data.iter().map(|z| z * factor).collect(),
        }
    }

    /// `self + shift·I`.
    pub fn shift_diagonal(&self, shift: f64) -> Self {
        let mut out = self.clone();
        let d = self.dim();
        for i in 0..d {
            out.data[i * d + i] += shift;
        }
        out
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        let d = self.dim();
        let mut data = vec![ZERO; d * d];
        for i in 0..d {
            for k in 0..d {
                let a = self.data[i * d + k];
                if a == ZERO {
                    continue;
                }
                for j in 0..d {
                    data[i * d + j] += a * other.data[k * d + j];
                }
            }
        }
        Ok(Self { dims: self.dims.clone(), data })
    }

    pub fn adjoint(&self) -> Self {
        let d = self.dim();
        let mut data = vec![ZERO; d * d];
        for i in 0..d {
            for j in 0..d {
                data[j * d + i] = self.data[i * d + j].conj();
            }
        }
        Self { dims: self.dims.clone(), data }
    }

    pub fn trace(&self) -> Complex64 {
        let d = self.dim();
        (0..d).map(|i| self.data[i * d + i]).sum()
    }

    /// `tr(self · other)` without forming the product.
    pub fn trace_product(&self, other: &Self) -> Result<Complex64> {
        self.same_shape(other)?;
        let d = self.dim();
        let mut acc = ZERO;
        for i in 0..d {
            for j in 0..d {
                acc += self.data[i * d + j] * other.data[j * d + i];
            }
        }
        Ok(acc)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entrywise modulus of `self − other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Largest entrywise modulus of `m − m†`.
    pub fn hermiticity_error(&self) -> f64 {
        let d = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..d {
            for j in i..d {
                let diff = self.data[i * d + j] - self.data[j * d + i].conj();
                worst = worst.max(diff.norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermiticity_error() <= TOL_HERM
    }

    pub fn ensure_hermitian(&self) -> Result<()> {
        let err = self.hermiticity_error();
        if err > TOL_HERM {
            return Err(Error::NotHermitian(err));
        }
        Ok(())
    }

    /// `⟨v|self|v⟩`; real part only, the caller is expected to pass a Hermitian matrix.
    pub fn expectation(&self, v: &ComplexVector) -> Result<f64> {
        if v.dim() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "vector of dimension {} against matrix of dimension {}",
                v.dim(),
                self.dim()
            )));
        }
        let d = self.dim();
        let x = v.data();
        let mut acc = ZERO;
        for i in 0..d {
            let mut row = ZERO;
            for j in 0..d {
                row += self.data[i * d + j] * x[j];
            }
            acc += x[i].conj() * row;
        }
        Ok(acc.re)
    }

    /// Kronecker product; the result's dims are `self.dims ++ other.dims`.
    pub fn kron(&self, other: &Self) -> Self {
        let (da, db) = (self.dim(), other.dim());
        let d = da * db;
        let mut data = vec![ZERO; d * d];
        for i in 0..da {
            for j in 0..da {
                let a = self.data[i * da + j];
                if a == ZERO {
                    continue;
                }
                for k in 0..db {
                    let row = (i * db + k) * d + j * db;
                    for l in 0..db {
                        data[row + l] = a * other.data[k * db + l];
                    }
                }
            }
        }
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        Self { dims, data }
    }

    fn check_party(&self, party: usize) -> Result<usize> {
        if party == 0 || party > self.parties() {
            return Err(Error::BadPartyIndex { index: party, parties: self.parties() });
        }
        Ok(party - 1)
    }

    /// Traces out every party not listed in `keep` (1-based); kept parties stay in
    /// their original order.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<Self> {
        if keep.is_empty() {
            return Err(Error::BadPartyIndex { index: 0, parties: self.parties() });
        }
        let n = self.parties();
        let mut kept = vec![false; n];
        for &p in keep {
            let k = self.check_party(p)?;
            kept[k] = true;
        }
        let out_dims: Vec<usize> =
            (0..n).filter(|&k| kept[k]).map(|k| self.dims[k]).collect();
        let dout: usize = out_dims.iter().product();
        let d = self.dim();
        let mut data = vec![ZERO; dout * dout];

        let mut rd = vec![0; n];
        let mut cd = vec![0; n];
        let mut rk = Vec::with_capacity(n);
        let mut ck = Vec::with_capacity(n);
        for r in 0..d {
            digits(r, &self.dims, &mut rd);
            for c in 0..d {
                digits(c, &self.dims, &mut cd);
                if (0..n).any(|k| !kept[k] && rd[k] != cd[k]) {
                    continue;
                }
                rk.clear();
                ck.clear();
                for k in (0..n).filter(|&k| kept[k]) {
                    rk.push(rd[k]);
                    ck.push(cd[k]);
                }
                let (i, j) = (flatten(&rk, &out_dims), flatten(&ck, &out_dims));
                data[i * dout + j] += self.data[r * d + c];
            }
        }
        Ok(Self { dims: out_dims, data })
    }

    /// Transposes the indices of one party (1-based).
    pub fn partial_transpose(&self, party: usize) -> Result<Self> {
        let k = self.check_party(party)?;
        let d = self.dim();
        let n = self.parties();
        let mut data = vec![ZERO; d * d];
        let mut rd = vec![0; n];
        let mut cd = vec![0; n];
        for r in 0..d {
            digits(r, &self.dims, &mut rd);
            for c in 0..d {
                digits(c, &self.dims, &mut cd);
                std::mem::swap(&mut rd[k], &mut cd[k]);
                let (r2, c2) = (flatten(&rd, &self.dims), flatten(&cd, &self.dims));
                std::mem::swap(&mut rd[k], &mut cd[k]);
                data[r2 * d + c2] = self.data[r * d + c];
            }
        }
        Ok(Self { dims: self.dims.clone(), data })
    }
}

/// Free-function form of [`ComplexMatrix::kron`].
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kron(b)
}

/// A ket on `H_1 ⊗ … ⊗ H_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexVector {
    dims: Vec<usize>,
    data: Vec<Complex64>,
}

impl ComplexVector {
    pub fn new(dims: Vec<usize>, data: Vec<Complex64>) -> Result<Self> {
        let d = check_dims(&dims)?;
        if data.len() != d {
            return Err(Error::DimensionMismatch(format!(
                "{} amplitudes for dimension {d}",
                data.len()
            )));
        }
        Ok(Self { dims, data })
    }

    pub fn from_real(dims: Vec<usize>, data: &[f64]) -> Result<Self> {
        Self::new(dims, data.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    /// Computational basis ket `|index⟩`.
    pub fn basis(dims: Vec<usize>, index: usize) -> Result<Self> {
        let d = check_dims(&dims)?;
        if index >= d {
            return Err(Error::ParamOutOfRange(format!("basis index {index} >= {d}")));
        }
        let mut data = vec![ZERO; d];
        data[index] = ONE;
        Ok(Self { dims, data })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.data.len()
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn with_dims(mut self, dims: Vec<usize>) -> Result<Self> {
        let d = check_dims(&dims)?;
        if d != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "cannot relabel dimension {} as {dims:?}",
                self.dim()
            )));
        }
        self.dims = dims;
        Ok(self)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self {
            dims: self.dims.clone(),
            data: self.data.iter().map(|z| z * factor).collect(),
        }
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> Complex64 {
        self.data.iter().zip(&other.data).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn kron(&self, other: &Self) -> Self {
        let mut data = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.data {
            for b in &other.data {
                data.push(a * b);
            }
        }
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        Self { dims, data }
    }

    /// `|self⟩⟨self|`.
    pub fn projector(&self) -> ComplexMatrix {
        let d = self.dim();
        let mut data = Vec::with_capacity(d * d);
        for a in &self.data {
            for b in &self.data {
                data.push(a * b.conj());
            }
        }
        ComplexMatrix { dims: self.dims.clone(), data }
    }
}
