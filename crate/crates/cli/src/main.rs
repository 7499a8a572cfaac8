//! `witness-forge`: build, check and extend entanglement witnesses from JSON matrix files.
//!
//! Reports go to stdout as canonical JSON, a one-line summary goes to stderr.
//! Exit codes: 0 success, 1 bad input or usage, 2 domain violation (c outside
//! its interval, extension hypothesis not met, not a witness), 3 numerical
//! non-convergence.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use report::{CliError, Ctx};

#[derive(Parser, Debug)]
#[command(name = "witness-forge", version, about = "Entanglement witnesses of the form c·I − σ and σ − c·I")]
struct Cli {
    /// Seed for every randomized search.
    #[arg(long, global = true, env = "WITNESS_FORGE_SEED", default_value_t = 0)]
    seed: u64,
    /// Random restarts for see-saw searches.
    #[arg(long, global = true, default_value_t = 32)]
    restarts: usize,
    /// Add wall-clock time to the report (makes reports differ between runs).
    #[arg(long, global = true)]
    timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Eigenvalues (ascending), eigenvectors and rank of a density or Hermitian file.
    Spectral { input: PathBuf },
    /// Optimized and spectral ends of the c-interval of a state.
    Cbounds(CboundsArgs),
    /// Build or verify witness files.
    #[command(subcommand)]
    Witness(WitnessCommand),
    /// tr(W·ρ) for a witness file and a state file.
    Eval { witness: PathBuf, state: PathBuf },
    /// Extend a bipartite witness to more parties.
    Extend(ExtendArgs),
    /// List every partial purification that keeps the top eigenpair.
    Enumerate {
        input: PathBuf,
        #[arg(long)]
        ancilla_dim: usize,
    },
    /// Write a standard state as a matrix file.
    Generate(GenerateArgs),
}

#[derive(Args, Debug)]
pub struct CboundsArgs {
    pub input: PathBuf,
    /// `min`: c_min for c·I − σ; `max`: c_max for σ − c·I.
    #[arg(long, value_enum, default_value_t = BoundMode::Min)]
    pub mode: BoundMode,
    /// Also run the grid oracle when the dims allow it.
    #[arg(long)]
    pub oracle: bool,
    #[arg(long, default_value_t = 256)]
    pub resolution: usize,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundMode {
    Min,
    Max,
}

#[derive(Subcommand, Debug)]
enum WitnessCommand {
    /// W from σ and c, checking c against its interval unless `--check none`.
    Make(MakeArgs),
    /// Product-state positivity and the negative eigenvalue; exit 0 iff W is a witness.
    Verify(VerifyArgs),
}

#[derive(Args, Debug)]
pub struct MakeArgs {
    pub sigma: PathBuf,
    #[arg(long)]
    pub c: f64,
    #[arg(long, value_enum, default_value_t = FormArg::CMinusSigma)]
    pub form: FormArg,
    #[arg(long, value_enum, default_value_t = CheckArg::Strict)]
    pub check: CheckArg,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum FormArg {
    #[value(name = "c_minus_sigma", alias = "c-minus-sigma")]
    CMinusSigma,
    #[value(name = "sigma_minus_c", alias = "sigma-minus-c")]
    SigmaMinusC,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum CheckArg {
    Strict,
    None,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    pub witness: PathBuf,
    /// Cross-check with the grid oracle (small dims only).
    #[arg(long)]
    pub oracle: bool,
    #[arg(long, default_value_t = 64)]
    pub resolution: usize,
}

#[derive(Args, Debug)]
pub struct ExtendArgs {
    pub witness: PathBuf,
    #[arg(long, value_enum)]
    pub method: Method,
    /// `eig:slot` pairs, e.g. "3:0,2:1"; eigen-indices follow the ascending order of `spectral`.
    #[arg(long)]
    pub selection: Option<String>,
    #[arg(long)]
    pub ancilla_dim: Option<usize>,
    /// State files tensored on after the base extension.
    #[arg(long, value_delimiter = ',')]
    pub tails: Vec<PathBuf>,
    /// Identity dimensions for `--method identity`, e.g. "4" or "2,3".
    #[arg(long, value_delimiter = ',')]
    pub tail_dims: Vec<usize>,
    /// Raised constant for `--method partial`.
    #[arg(long)]
    pub c_prime: Option<f64>,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Purify,
    PureTails,
    Partial,
    Mixed,
    Identity,
}

#[derive(Args, Debug)]
pub struct GenerateArgs {
    #[arg(value_enum)]
    pub state: StateKind,
    /// Mixing weight for `isotropic`.
    #[arg(long)]
    pub q: Option<f64>,
    /// Party dims for `maximally-mixed`, `random-density`, `random-pure`, `basis`.
    #[arg(long, value_delimiter = ',')]
    pub dims: Vec<usize>,
    /// Basis index for `basis`.
    #[arg(long, default_value_t = 0)]
    pub index: usize,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum StateKind {
    /// q|ψ⁺⟩⟨ψ⁺| + (1 − q)I/4
    Isotropic,
    /// (|00⟩ + |11⟩)/√2
    Bell,
    /// σ with |ψ⁺⟩⟨ψ⁺|^Γ/4 = σ − (3/16)I
    BellPtSigma,
    MaximallyMixed,
    RandomDensity,
    RandomPure,
    Basis,
}

fn run(cli: Cli, ctx: &mut Ctx) -> Result<u8, CliError> {
    match cli.command {
        Command::Spectral { input } => commands::spectral(ctx, &input),
        Command::Cbounds(a) => commands::cbounds(ctx, &a),
        Command::Witness(WitnessCommand::Make(a)) => commands::witness_make(ctx, &a),
        Command::Witness(WitnessCommand::Verify(a)) => commands::witness_verify(ctx, &a),
        Command::Eval { witness, state } => commands::eval(ctx, &witness, &state),
        Command::Extend(a) => commands::extend(ctx, &a),
        Command::Enumerate { input, ancilla_dim } => commands::enumerate(ctx, &input, ancilla_dim),
        Command::Generate(a) => commands::generate(ctx, &a),
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Spectral { .. } => "spectral",
        Command::Cbounds(_) => "cbounds",
        Command::Witness(WitnessCommand::Make(_)) => "witness make",
        Command::Witness(WitnessCommand::Verify(_)) => "witness verify",
        Command::Eval { .. } => "eval",
        Command::Extend(_) => "extend",
        Command::Enumerate { .. } => "enumerate",
        Command::Generate(_) => "generate",
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let start = Instant::now();
    let mut ctx = Ctx::new(command_name(&cli.command), cli.seed, cli.restarts);
    let timing = cli.timing;
    let code = match run(cli, &mut ctx) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ctx.fail(&e);
            e.exit_code()
        }
    };
    if timing {
        ctx.set_wall_time(start.elapsed());
    }
    ctx.emit();
    ExitCode::from(code)
}
