//! MatrixFile v1 and canonical JSON output.
//!
//! ```json
//! {
//!   "data": [
//!     [[2.5000000000000000e-1, 0.0000000000000000e0], ...],
//!     ...
//!   ],
//!   "dims": [2, 2],
//!   "kind": "density",
//!   "normalized": true,
//!   "version": "1"
//! }
//! ```
//!
//! `data` is row-major with each entry an `[re, im]` pair; a `pure` file holds
//! a flat list of pairs. A `witness` file adds `form`, `c` and `sigma` (σ in
//! the same nested layout) and stores the materialized `W` in `data`;
//! `normalized` refers to σ.
//!
//! The canonical writer sorts keys, prints every real with 17 significant
//! digits (`{:.16e}`), and puts innermost arrays on one line, so
//! `write(parse(f)) == f` byte for byte for any file it produced.

use std::fmt::Write as _;

use serde_json::{Map, Number, Value};

use crate::linalg::{ComplexMatrix, ComplexVector};
use crate::qstate::{DensityMatrix, PureState};
use crate::witness::{Witness, WitnessForm};
use crate::{Complex64, Error, Result};

pub const FORMAT_VERSION: &str = "1";

/// Largest entrywise gap tolerated between a witness file's `data` and `c·I − σ` (or `σ − c·I`).
pub const WITNESS_DATA_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum MatrixFile {
    Density(DensityMatrix),
    Pure(PureState),
    Hermitian(ComplexMatrix),
    Witness(Witness),
}

impl MatrixFile {
    pub fn kind(&self) -> &'static str {
        match self {
            MatrixFile::Density(_) => "density",
            MatrixFile::Pure(_) => "pure",
            MatrixFile::Hermitian(_) => "hermitian",
            MatrixFile::Witness(_) => "witness",
        }
    }

    pub fn dims(&self) -> &[usize] {
        match self {
            MatrixFile::Density(d) => d.dims(),
            MatrixFile::Pure(p) => p.dims(),
            MatrixFile::Hermitian(m) => m.dims(),
            MatrixFile::Witness(w) => w.dims(),
        }
    }

    /// The operator the file describes; a ket becomes its projector.
    pub fn operator(&self) -> ComplexMatrix {
        match self {
            MatrixFile::Density(d) => d.matrix().clone(),
            MatrixFile::Pure(p) => p.vector().projector(),
            MatrixFile::Hermitian(m) => m.clone(),
            MatrixFile::Witness(w) => w.matrix(),
        }
    }

    pub fn to_value(&self) -> Value {
        let mut obj = Map::new();
        obj.insert("version".into(), FORMAT_VERSION.into());
        obj.insert("kind".into(), self.kind().into());
        obj.insert("dims".into(), dims_value(self.dims()));
        let (data, normalized) = match self {
            MatrixFile::Density(d) => (matrix_value(d.matrix()), d.is_normalized()),
            MatrixFile::Pure(p) => (vector_value(p.vector()), p.is_normalized()),
            MatrixFile::Hermitian(m) => (matrix_value(m), false),
            MatrixFile::Witness(w) => {
                obj.insert("form".into(), w.form().as_str().into());
                obj.insert("c".into(), real(w.c()));
                obj.insert("sigma".into(), matrix_value(w.sigma().matrix()));
                (matrix_value(&w.matrix()), w.sigma().is_normalized())
            }
        };
        obj.insert("data".into(), data);
        obj.insert("normalized".into(), normalized.into());
        Value::Object(obj)
    }

    pub fn from_value(v: &Value) -> Result<Self> {
        let obj = v.as_object().ok_or_else(|| parse_err("top level is not an object"))?;
        let version = field(obj, "version")?.as_str().ok_or_else(|| parse_err("version is not a string"))?;
        if version != FORMAT_VERSION {
            return Err(parse_err(format!("unsupported version {version:?}")));
        }
        let kind = field(obj, "kind")?.as_str().ok_or_else(|| parse_err("kind is not a string"))?;
        let dims = parse_dims(field(obj, "dims")?)?;
        let normalized = field(obj, "normalized")?
            .as_bool()
            .ok_or_else(|| parse_err("normalized is not a boolean"))?;
        let data = field(obj, "data")?;
        match kind {
            "density" => {
                let m = parse_matrix(data, &dims)?;
                Ok(MatrixFile::Density(if normalized {
                    DensityMatrix::new(m)?
                } else {
                    DensityMatrix::unnormalized(m)?
                }))
            }
            "pure" => {
                let v = parse_vector(data, &dims)?;
                Ok(MatrixFile::Pure(if normalized { PureState::new(v)? } else { PureState::unnormalized(v) }))
            }
            "hermitian" => {
                let m = parse_matrix(data, &dims)?;
                m.ensure_hermitian()?;
                Ok(MatrixFile::Hermitian(m))
            }
            "witness" => {
                let form_text = field(obj, "form")?.as_str().ok_or_else(|| parse_err("form is not a string"))?;
                let form = WitnessForm::parse(form_text).map_err(|_| parse_err(format!("unknown form {form_text:?}")))?;
                let c = field(obj, "c")?.as_f64().ok_or_else(|| parse_err("c is not a number"))?;
                let s = parse_matrix(field(obj, "sigma")?, &dims)?;
                let sigma = if normalized { DensityMatrix::new(s)? } else { DensityMatrix::unnormalized(s)? };
                let w = Witness::new_unchecked(form, c, sigma);
                let stored = parse_matrix(data, &dims)?;
                let gap = stored.max_abs_diff(&w.matrix());
                if gap > WITNESS_DATA_TOL {
                    return Err(parse_err(format!("data differs from the witness built from sigma and c by {gap:e}")));
                }
                Ok(MatrixFile::Witness(w))
            }
            other => Err(parse_err(format!("unknown kind {other:?}"))),
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(text).map_err(|e| parse_err(e.to_string()))?;
        Self::from_value(&v)
    }

    /// Canonical text, newline-terminated.
    pub fn write(&self) -> String {
        to_canonical_json(&self.to_value())
    }
}

fn parse_err(msg: impl Into<String>) -> Error {
    Error::Parse(msg.into())
}

fn field<'a>(obj: &'a Map<String, Value>, key: &str) -> Result<&'a Value> {
    obj.get(key).ok_or_else(|| parse_err(format!("missing field {key:?}")))
}

fn parse_dims(v: &Value) -> Result<Vec<usize>> {
    let arr = v.as_array().ok_or_else(|| parse_err("dims is not an array"))?;
    if arr.is_empty() {
        return Err(parse_err("dims is empty"));
    }
    arr.iter()
        .map(|d| match d.as_u64() {
            Some(n) if n > 0 => Ok(n as usize),
            _ => Err(parse_err(format!("bad dimension {d}"))),
        })
        .collect()
}

fn parse_entry(v: &Value) -> Result<Complex64> {
    match v.as_array().map(Vec::as_slice) {
        Some([re, im]) => match (re.as_f64(), im.as_f64()) {
            (Some(re), Some(im)) => Ok(Complex64::new(re, im)),
            _ => Err(parse_err(format!("entry {v} is not numeric"))),
        },
        _ => Err(parse_err(format!("entry {v} is not an [re, im] pair"))),
    }
}

fn parse_vector(v: &Value, dims: &[usize]) -> Result<ComplexVector> {
    let arr = v.as_array().ok_or_else(|| parse_err("vector data is not an array"))?;
    let data = arr.iter().map(parse_entry).collect::<Result<Vec<_>>>()?;
    ComplexVector::new(dims.to_vec(), data).map_err(|e| parse_err(e.to_string()))
}

fn parse_matrix(v: &Value, dims: &[usize]) -> Result<ComplexMatrix> {
    let rows = v.as_array().ok_or_else(|| parse_err("matrix data is not an array"))?;
    let d: usize = dims.iter().product();
    if rows.len() != d {
        return Err(parse_err(format!("{} rows for dims {dims:?}", rows.len())));
    }
    let mut data = Vec::with_capacity(d * d);
    for row in rows {
        let row = row.as_array().ok_or_else(|| parse_err("matrix row is not an array"))?;
        if row.len() != d {
            return Err(parse_err(format!("row of length {} for dims {dims:?}", row.len())));
        }
        for e in row {
            data.push(parse_entry(e)?);
        }
    }
    ComplexMatrix::new(dims.to_vec(), data).map_err(|e| parse_err(e.to_string()))
}

/// A JSON real. Non-finite values have no JSON form and become `null`.
pub fn real(x: f64) -> Value {
    Number::from_f64(x).map(Value::Number).unwrap_or(Value::Null)
}

pub fn complex_value(z: Complex64) -> Value {
    Value::Array(vec![real(z.re), real(z.im)])
}

pub fn dims_value(dims: &[usize]) -> Value {
    Value::Array(dims.iter().map(|&d| Value::from(d as u64)).collect())
}

pub fn vector_value(v: &ComplexVector) -> Value {
    Value::Array(v.data().iter().copied().map(complex_value).collect())
}

pub fn matrix_value(m: &ComplexMatrix) -> Value {
    let d = m.dim();
    Value::Array(
        m.data()
            .chunks(d)
            .map(|row| Value::Array(row.iter().copied().map(complex_value).collect()))
            .collect(),
    )
}

fn depth(v: &Value) -> usize {
    match v {
        Value::Array(a) => 1 + a.iter().map(depth).max().unwrap_or(0),
        Value::Object(_) => usize::MAX / 2,
        _ => 0,
    }
}

fn write_number(out: &mut String, n: &Number) {
    if let Some(i) = n.as_i64() {
        write!(out, "{i}").expect("string write");
    } else if let Some(u) = n.as_u64() {
        write!(out, "{u}").expect("string write");
    } else {
        let x = n.as_f64().expect("finite JSON number");
        write!(out, "{x:.16e}").expect("string write");
    }
}

fn write_value(out: &mut String, v: &Value, indent: usize) {
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => write_number(out, n),
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(a) if a.is_empty() => out.push_str("[]"),
        Value::Array(a) if depth(v) <= 2 => {
            out.push('[');
            for (i, x) in a.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_value(out, x, indent);
            }
            out.push(']');
        }
        Value::Array(a) => {
            out.push_str("[\n");
            for (i, x) in a.iter().enumerate() {
                out.push_str(&"  ".repeat(indent + 1));
                write_value(out, x, indent + 1);
                out.push_str(if i + 1 < a.len() { ",\n" } else { "\n" });
            }
            out.push_str(&"  ".repeat(indent));
            out.push(']');
        }
        Value::Object(o) if o.is_empty() => out.push_str("{}"),
        Value::Object(o) => {
            let mut keys: Vec<&String> = o.keys().collect();
            keys.sort();
            out.push_str("{\n");
            for (i, k) in keys.iter().enumerate() {
                out.push_str(&"  ".repeat(indent + 1));
                out.push_str(&Value::String((*k).clone()).to_string());
                out.push_str(": ");
                write_value(out, &o[k.as_str()], indent + 1);
                out.push_str(if i + 1 < keys.len() { ",\n" } else { "\n" });
            }
            out.push_str(&"  ".repeat(indent));
            out.push('}');
        }
    }
}

/// Sorted keys, 17-significant-digit reals, innermost arrays inline, trailing newline.
pub fn to_canonical_json(v: &Value) -> String {
    let mut out = String::new();
    write_value(&mut out, v, 0);
    out.push('\n');
    out
}
