use std::path::Path;

use serde_json::{Map, Value};
use witness_forge::extend::{
    append_pure_tails, count_partial_purifications, enumerate_partial_purifications, identity_extend,
    mixed_tensor_extend, partial_purify_extend, purify_extend, purify_extend_n,
};
use witness_forge::io::{dims_value, real, vector_value, MatrixFile};
use witness_forge::linalg::hermitian_eig;
use witness_forge::oracle::{exhaustive_witness_check, grid_search, supports, Mode};
use witness_forge::qstate::{
    bell_plus, bell_pt_sigma, isotropic, random_density, random_pure, spectral as decompose, DensityMatrix, PureState,
    PurificationSelection,
};
use witness_forge::witness::{
    evaluate, make_witness, max_product_expectation, min_product_expectation, verify_witness, CInterval, Check,
    WitnessReport,
};
use witness_forge::{ComplexVector, Witness, WitnessForm, TOL_EIG};

use crate::report::{product_state_value, read_file, reals, write_file, CliError, Ctx};
use crate::{BoundMode, CboundsArgs, CheckArg, ExtendArgs, FormArg, GenerateArgs, MakeArgs, Method, StateKind, VerifyArgs};

/// Agreement demanded between the see-saw and the grid oracle in `cbounds --oracle`.
const ORACLE_AGREEMENT: f64 = 1e-4;

type CmdResult = Result<u8, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn density_of(file: MatrixFile, path: &Path) -> Result<DensityMatrix, CliError> {
    match file {
        MatrixFile::Density(d) => Ok(d),
        MatrixFile::Pure(p) => Ok(p.density()),
        other => Err(usage(format!("{}: expected a density or pure file, got {}", path.display(), other.kind()))),
    }
}

fn read_density(path: &Path) -> Result<DensityMatrix, CliError> {
    density_of(read_file(path)?, path)
}

fn read_witness(path: &Path) -> Result<Witness, CliError> {
    match read_file(path)? {
        MatrixFile::Witness(w) => Ok(w),
        other => Err(usage(format!("{}: expected a witness file, got {}", path.display(), other.kind()))),
    }
}

fn read_pure(path: &Path) -> Result<PureState, CliError> {
    match read_file(path)? {
        MatrixFile::Pure(p) => Ok(p),
        other => Err(usage(format!("{}: expected a pure file, got {}", path.display(), other.kind()))),
    }
}

fn report_value(r: &WitnessReport) -> Value {
    let mut o = Map::new();
    o.insert("min_product_expectation".into(), real(r.min_product_expectation));
    o.insert("witnessing_margin".into(), real(r.witnessing_margin));
    o.insert("is_witness".into(), r.is_witness.into());
    o.insert("converged".into(), r.converged.into());
    o.insert("certificate_state".into(), product_state_value(&r.certificate_state));
    o.insert("violating_state".into(), vector_value(&r.violating_state));
    Value::Object(o)
}

fn put_witness(ctx: &mut Ctx, w: &Witness, output: Option<&Path>) -> Result<(), CliError> {
    let file = MatrixFile::Witness(w.clone());
    match output {
        Some(path) => {
            write_file(path, &file)?;
            ctx.set("output", path.display().to_string());
        }
        None => ctx.set("witness", file.to_value()),
    }
    Ok(())
}

pub fn spectral(ctx: &mut Ctx, input: &Path) -> CmdResult {
    let m = match read_file(input)? {
        MatrixFile::Density(d) => d.into_matrix(),
        MatrixFile::Hermitian(m) => m,
        other => return Err(usage(format!("spectral needs a density or hermitian file, got {}", other.kind()))),
    };
    let sd = hermitian_eig(&m)?;
    ctx.set("dims", dims_value(m.dims()));
    ctx.set("eigenvalues", reals(sd.eigenvalues()));
    ctx.set("eigenvectors", Value::Array(sd.eigenvectors().iter().map(vector_value).collect()));
    ctx.set("rank", sd.rank());
    ctx.set_real("lambda_min", sd.min());
    ctx.set_real("lambda_max", sd.max());
    eprintln!("eigenvalues {:?}, rank {}", sd.eigenvalues(), sd.rank());
    Ok(0)
}

pub fn cbounds(ctx: &mut Ctx, a: &CboundsArgs) -> CmdResult {
    let sigma = read_density(&a.input)?;
    let sd = decompose(&sigma)?;
    let m = sigma.matrix();
    let (form, opt, spectral_bound, grid_mode) = match a.mode {
        BoundMode::Min => (WitnessForm::CMinusSigma, max_product_expectation(m, ctx.restarts, ctx.seed)?, sd.max(), Mode::Max),
        BoundMode::Max => (WitnessForm::SigmaMinusC, min_product_expectation(m, ctx.restarts, ctx.seed)?, sd.min(), Mode::Min),
    };
    let name = match a.mode {
        BoundMode::Min => "c_min",
        BoundMode::Max => "c_max",
    };
    ctx.set("mode", name);
    ctx.set("form", form.as_str());
    ctx.set("dims", dims_value(sigma.dims()));
    ctx.set_real("bound", opt.value);
    ctx.set_real("spectral_bound", spectral_bound);
    ctx.set("spectral_bracket", reals(&[sd.min(), sd.max()]));
    ctx.set("converged", opt.converged);
    ctx.set("restarts_used", opt.restarts_used);
    ctx.set("argument_state", product_state_value(&opt.state));
    eprintln!("{name} = {:.10} (see-saw, {} restarts); spectral bracket [{:.10}, {:.10}]", opt.value, opt.restarts_used, sd.min(), sd.max());

    if a.oracle {
        let oracle = if supports(sigma.dims()) {
            let g = grid_search(m, grid_mode, a.resolution)?;
            eprintln!("oracle {name} = {:.10} (grid {}, {} points)", g.value, a.resolution, g.points);
            let mut o = Map::new();
            o.insert("value".into(), real(g.value));
            o.insert("raw".into(), real(g.raw));
            o.insert("resolution".into(), a.resolution.into());
            o.insert("points".into(), g.points.into());
            o.insert("agrees".into(), ((g.value - opt.value).abs() <= ORACLE_AGREEMENT).into());
            Value::Object(o)
        } else {
            eprintln!("oracle skipped: dims {:?} unsupported", sigma.dims());
            Value::Null
        };
        ctx.set("oracle", oracle);
    }
    if !opt.converged {
        return Err(CliError::Core(witness_forge::Error::NoConvergence(witness_forge::witness::MAX_ROUNDS)));
    }
    Ok(0)
}

pub fn witness_make(ctx: &mut Ctx, a: &MakeArgs) -> CmdResult {
    let sigma = read_density(&a.sigma)?;
    let form = match a.form {
        FormArg::CMinusSigma => WitnessForm::CMinusSigma,
        FormArg::SigmaMinusC => WitnessForm::SigmaMinusC,
    };
    let check = match a.check {
        CheckArg::Strict => Check::Strict,
        CheckArg::None => Check::None,
    };
    if check == Check::Strict {
        let interval = CInterval::compute(form, &sigma, ctx.restarts, ctx.seed)?;
        ctx.set("interval", interval.to_string());
        ctx.set_real("optimized_bound", interval.optimized_bound());
        ctx.set_real("spectral_bound", interval.spectral_bound);
    }
    let w = make_witness(form, sigma, a.c, check, ctx.restarts, ctx.seed)?;
    ctx.set("form", form.as_str());
    ctx.set_real("c", w.c());
    ctx.set("dims", dims_value(w.dims()));
    ctx.set("checked", check == Check::Strict);
    put_witness(ctx, &w, a.output.as_deref())?;
    eprintln!("built {} witness with c = {}", form, w.c());
    Ok(0)
}

pub fn witness_verify(ctx: &mut Ctx, a: &VerifyArgs) -> CmdResult {
    let w = read_witness(&a.witness)?;
    let r = verify_witness(&w, ctx.restarts, ctx.seed)?;
    ctx.set("form", w.form().as_str());
    ctx.set_real("c", w.c());
    ctx.set("dims", dims_value(w.dims()));
    ctx.set("seesaw", report_value(&r));
    let mut ok = r.is_witness;
    eprintln!(
        "see-saw: min product expectation {:.3e}, margin {:.3e}, witness: {}",
        r.min_product_expectation, r.witnessing_margin, r.is_witness
    );
    if a.oracle {
        if supports(w.dims()) {
            let g = exhaustive_witness_check(&w, a.resolution)?;
            eprintln!("grid: min product expectation {:.3e}, witness: {}", g.min_product_expectation, g.is_witness);
            ok &= g.is_witness;
            ctx.set("oracle", report_value(&g));
        } else {
            ctx.set("oracle", Value::Null);
        }
    }
    ctx.set("is_witness", ok);
    Ok(if ok { 0 } else { 2 })
}

pub fn eval(ctx: &mut Ctx, witness: &Path, state: &Path) -> CmdResult {
    let w = read_witness(witness)?;
    let rho = read_density(state)?;
    let v = evaluate(&w, &rho)?;
    ctx.set_real("value", v);
    ctx.set("detected", v < 0.0);
    eprintln!("tr(W·ρ) = {v:.12}{}", if v < 0.0 { " (entanglement detected)" } else { "" });
    Ok(0)
}

fn parse_selection(a: &ExtendArgs) -> Result<PurificationSelection, CliError> {
    let text = a.selection.as_deref().ok_or_else(|| usage("--method partial needs --selection"))?;
    let d = match a.ancilla_dim {
        Some(d) => d,
        // Smallest ancilla that holds every slot.
        None => PurificationSelection::parse(text, usize::MAX)?.pairs().iter().map(|&(_, s)| s + 1).max().unwrap_or(1),
    };
    Ok(PurificationSelection::parse(text, d)?)
}

pub fn extend(ctx: &mut Ctx, a: &ExtendArgs) -> CmdResult {
    let w = read_witness(&a.witness)?;
    let partial_only = a.selection.is_some() || a.ancilla_dim.is_some() || a.c_prime.is_some();
    if partial_only && a.method != Method::Partial {
        return Err(usage("--selection, --ancilla-dim and --c-prime apply to --method partial only"));
    }
    if !a.tail_dims.is_empty() && a.method != Method::Identity {
        return Err(usage("--tail-dims applies to --method identity only"));
    }
    if !a.tails.is_empty() && matches!(a.method, Method::Purify | Method::Identity) {
        return Err(usage("--tails does not apply to this method; use pure-tails, partial or mixed"));
    }

    let ext = match a.method {
        Method::Purify => purify_extend(&w)?,
        Method::PureTails => {
            let tails = a.tails.iter().map(|p| read_pure(p)).collect::<Result<Vec<_>, _>>()?;
            purify_extend_n(&w, &tails)?
        }
        Method::Partial => {
            let sel = parse_selection(a)?;
            ctx.set("selection", sel.to_string());
            let base = partial_purify_extend(&w, &sel, a.c_prime)?;
            let tails = a.tails.iter().map(|p| read_pure(p)).collect::<Result<Vec<_>, _>>()?;
            append_pure_tails(base, &tails)?
        }
        Method::Mixed => {
            let tails = a.tails.iter().map(|p| read_density(p)).collect::<Result<Vec<_>, _>>()?;
            mixed_tensor_extend(&w, &tails)?
        }
        Method::Identity => {
            if a.tail_dims.is_empty() {
                return Err(usage("--method identity needs --tail-dims"));
            }
            identity_extend(&w, &a.tail_dims)?
        }
    };

    let method = match a.method {
        Method::Purify => "purify",
        Method::PureTails => "pure-tails",
        Method::Partial => "partial",
        Method::Mixed => "mixed",
        Method::Identity => "identity",
    };
    ctx.set("method", method);
    ctx.set("input_dims", dims_value(w.dims()));
    ctx.set("dims", dims_value(ext.dims()));
    ctx.set("form", ext.form().as_str());
    ctx.set_real("c", ext.c());
    ctx.set("sigma_normalized", ext.sigma().is_normalized());
    let r = verify_witness(&ext, ctx.restarts, ctx.seed)?;
    ctx.set("verify", report_value(&r));
    put_witness(ctx, &ext, a.output.as_deref())?;
    eprintln!(
        "{method}: {:?} -> {:?}, c = {}; witness: {} (min {:.3e}, margin {:.3e})",
        w.dims(),
        ext.dims(),
        ext.c(),
        r.is_witness,
        r.min_product_expectation,
        r.witnessing_margin
    );
    Ok(0)
}

pub fn enumerate(ctx: &mut Ctx, input: &Path, ancilla_dim: usize) -> CmdResult {
    let sigma = read_density(input)?;
    let sd = decompose(&sigma)?;
    let sels = enumerate_partial_purifications(&sd, ancilla_dim)?;
    let count = count_partial_purifications(sd.rank(), ancilla_dim);
    let nonzero: Vec<f64> = sd.eigenvalues().iter().copied().filter(|&x| x > TOL_EIG).collect();
    let nondegenerate = nonzero.windows(2).all(|p| p[1] - p[0] > TOL_EIG);
    let matches = sels.len() as u128 == count;
    ctx.set("eigenvalues", reals(sd.eigenvalues()));
    ctx.set("rank", sd.rank());
    ctx.set("ancilla_dim", ancilla_dim);
    ctx.set("nondegenerate", nondegenerate);
    ctx.set("count_formula", u64::try_from(count).expect("capped enumeration"));
    ctx.set("count_enumerated", sels.len());
    ctx.set("matches_formula", matches);
    ctx.set("selections", Value::Array(sels.iter().map(|s| s.to_string().into()).collect()));
    eprintln!("{} selections (formula: {count})", sels.len());
    if nondegenerate && !matches {
        return Err(CliError::Usage(format!("enumeration gave {} selections, formula {count}", sels.len())));
    }
    Ok(0)
}

pub fn generate(ctx: &mut Ctx, a: &GenerateArgs) -> CmdResult {
    let need_dims = || {
        if a.dims.is_empty() {
            Err(usage("this state needs --dims"))
        } else {
            Ok(a.dims.as_slice())
        }
    };
    let file = match a.state {
        StateKind::Isotropic => {
            let q = a.q.ok_or_else(|| usage("isotropic needs --q"))?;
            MatrixFile::Density(isotropic(q)?)
        }
        StateKind::Bell => MatrixFile::Pure(bell_plus()),
        StateKind::BellPtSigma => MatrixFile::Density(bell_pt_sigma()),
        StateKind::MaximallyMixed => MatrixFile::Density(DensityMatrix::maximally_mixed(need_dims()?)?),
        StateKind::RandomDensity => MatrixFile::Density(random_density(need_dims()?, ctx.seed)?),
        StateKind::RandomPure => MatrixFile::Pure(random_pure(need_dims()?, ctx.seed)?),
        StateKind::Basis => MatrixFile::Pure(PureState::new(ComplexVector::basis(need_dims()?.to_vec(), a.index)?)?),
    };
    match &a.output {
        Some(path) => {
            write_file(path, &file)?;
            ctx.set("kind", file.kind());
            ctx.set("dims", dims_value(file.dims()));
            ctx.set("output", path.display().to_string());
            eprintln!("wrote {} {:?} to {}", file.kind(), file.dims(), path.display());
        }
        None => ctx.raw_output(file.write()),
    }
    Ok(0)
}
