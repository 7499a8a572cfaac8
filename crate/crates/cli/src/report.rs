use std::fmt;
use std::path::Path;
use std::time::Duration;

use serde_json::{Map, Value};
use witness_forge::io::{dims_value, real, to_canonical_json, vector_value, MatrixFile};
use witness_forge::{ProductState, TOL_EIG, TOL_HERM, TOL_INTERVAL, TOL_NEG, TOL_POS};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io(String),
    Core(witness_forge::Error),
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "UsageError",
            CliError::Io(_) => "IoError",
            CliError::Core(e) => e.kind(),
        }
    }

    pub fn exit_code(&self) -> u8 {
        use witness_forge::Error::*;
        match self {
            CliError::Usage(_) | CliError::Io(_) => 1,
            CliError::Core(e) => match e {
                NoConvergence(_) => 3,
                COutOfInterval { .. }
                | FormNotSupported(_)
                | MaxEigenvalueNotSelected
                | CPrimeOutOfInterval { .. }
                | UnnormalizedTail(_)
                | ZeroMaxEigenvalue(_)
                | CountTooLarge { .. } => 2,
                _ => 1,
            },
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Io(m) => f.write_str(m),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<witness_forge::Error> for CliError {
    fn from(e: witness_forge::Error) -> Self {
        CliError::Core(e)
    }
}

pub fn read_file(path: &Path) -> Result<MatrixFile, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    MatrixFile::parse(&text).map_err(|e| match e {
        witness_forge::Error::Parse(m) => CliError::Core(witness_forge::Error::Parse(format!("{}: {m}", path.display()))),
        other => CliError::Core(other),
    })
}

pub fn write_file(path: &Path, file: &MatrixFile) -> Result<(), CliError> {
    std::fs::write(path, file.write()).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

pub fn product_state_value(s: &ProductState) -> Value {
    let mut o = Map::new();
    o.insert("dims".into(), dims_value(&s.dims()));
    o.insert("factors".into(), Value::Array(s.factors().iter().map(vector_value).collect()));
    Value::Object(o)
}

pub fn reals(xs: &[f64]) -> Value {
    Value::Array(xs.iter().copied().map(real).collect())
}

/// Collects one command's report.
pub struct Ctx {
    name: &'static str,
    argv: Vec<String>,
    pub seed: u64,
    pub restarts: usize,
    results: Map<String, Value>,
    error: Option<Value>,
    wall_time: Option<Duration>,
    /// Printed instead of a report (e.g. a generated file with no `-o`).
    raw: Option<String>,
}

impl Ctx {
    pub fn new(name: &'static str, seed: u64, restarts: usize) -> Self {
        Self {
            name,
            argv: std::env::args().skip(1).collect(),
            seed,
            restarts,
            results: Map::new(),
            error: None,
            wall_time: None,
            raw: None,
        }
    }

    pub fn set(&mut self, key: &str, v: impl Into<Value>) {
        self.results.insert(key.into(), v.into());
    }

    pub fn set_real(&mut self, key: &str, x: f64) {
        self.results.insert(key.into(), real(x));
    }

    pub fn raw_output(&mut self, text: String) {
        self.raw = Some(text);
    }

    pub fn fail(&mut self, e: &CliError) {
        let mut o = Map::new();
        o.insert("kind".into(), e.kind().into());
        o.insert("message".into(), e.to_string().into());
        o.insert("exit_code".into(), e.exit_code().into());
        self.error = Some(Value::Object(o));
        self.raw = None;
    }

    pub fn set_wall_time(&mut self, d: Duration) {
        self.wall_time = Some(d);
    }

    pub fn to_value(&self) -> Value {
        let mut tol = Map::new();
        tol.insert("eig".into(), real(TOL_EIG));
        tol.insert("herm".into(), real(TOL_HERM));
        tol.insert("interval".into(), real(TOL_INTERVAL));
        tol.insert("neg".into(), real(TOL_NEG));
        tol.insert("pos".into(), real(TOL_POS));

        let mut cmd = Map::new();
        cmd.insert("name".into(), self.name.into());
        cmd.insert("argv".into(), Value::Array(self.argv.iter().map(|a| a.as_str().into()).collect()));

        let mut o = Map::new();
        o.insert("command".into(), Value::Object(cmd));
        o.insert("seed".into(), self.seed.into());
        o.insert("restarts".into(), self.restarts.into());
        o.insert("tolerances".into(), Value::Object(tol));
        match &self.error {
            Some(err) => {
                o.insert("status".into(), "error".into());
                o.insert("error".into(), err.clone());
            }
            None => {
                o.insert("status".into(), "ok".into());
                o.insert("results".into(), Value::Object(self.results.clone()));
            }
        }
        if let Some(d) = self.wall_time {
            o.insert("wall_time_ms".into(), real(d.as_secs_f64() * 1e3));
        }
        Value::Object(o)
    }

    pub fn emit(&self) {
        match &self.raw {
            Some(text) => print!("{text}"),
            None => print!("{}", to_canonical_json(&self.to_value())),
        }
    }
}
