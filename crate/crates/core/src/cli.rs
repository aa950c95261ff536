//! The `gaussian-pnr` command line driver.
//!
//! Every subcommand reads JSON and writes JSON (or CSV for counts and
//! `--csv` distributions) to `--output` or standard output. Exit codes: 0 on
//! success, 1 for unreadable input, 2 for inputs failing validation, 3 when a
//! computation does not converge.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use crate::decompositions::{
    diagonal_representative, normal_parameters, validate_normal_parameters, NormalParameters, CLUSTER_TOL,
};
use crate::error::Error;
use crate::fock::{modes_from_diagonal, oracle_distribution, OracleMode};
use crate::gaussian::{validate_state, GaussianState, StateJson, PHYSICALITY_TOL};
use crate::inverse::{fit_normal_parameters, same_distribution, InversionConfig};
use crate::photon::{photon_distribution, sample_counts, DistributionConfig, PhotonDistribution, DEFAULT_TAIL_EPS};

#[derive(Parser, Debug)]
#[command(name = "gaussian-pnr", version, about = "Total photon-number statistics of multimode Gaussian states")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// State or normal parameters -> photon-number distribution.
    Forward(Opts),
    /// Distribution -> fitted normal parameters.
    Invert(Opts),
    /// State -> normal parameters.
    NormalParams(Opts),
    /// Two states -> whether they give the same distribution.
    Equivalent(Opts),
    /// Distribution -> i.i.d. counts as CSV.
    Sample(Opts),
    /// State or normal parameters -> validity report.
    Validate(Opts),
    /// Normal parameters -> diagonal representative state.
    Representative(Opts),
    /// Product of single-mode states -> distribution by brute force in Fock space.
    Oracle(Opts),
}

#[derive(Args, Debug)]
struct Opts {
    /// Input JSON file; `-` reads standard input.
    #[arg(long, short)]
    input: Vec<PathBuf>,
    #[arg(long, short)]
    output: Option<PathBuf>,
    #[arg(long)]
    nmax: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_TAIL_EPS)]
    tail_eps: f64,
    /// Fit tolerance for `invert`, comparison tolerance for `equivalent`.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    #[arg(long)]
    max_components: Option<usize>,
    /// Mode count for `invert` when the input does not carry a `modes` field.
    #[arg(long)]
    modes: Option<usize>,
    /// Fixed Fock cutoff per mode for `oracle`.
    #[arg(long)]
    fock_dim: Option<usize>,
    /// Write distributions as `n,p_n` CSV.
    #[arg(long)]
    csv: bool,
}

/// Failure of a subcommand, carrying its exit code.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Self { code: 1, message: message.into() }
    }

    fn invalid(message: impl Into<String>) -> Self {
        Self { code: 2, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Conditioning(_) | Error::Truncation { .. } | Error::Range(_) | Error::Branch(_) => 3,
            _ => 2,
        };
        Self { code, message: e.to_string() }
    }
}

type Outcome = std::result::Result<(String, i32), Failure>;

/// Parses `argv` (program name first), runs the subcommand and returns the
/// process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let (name, opts) = match &cli.command {
        Command::Forward(o) => ("forward", o),
        Command::Invert(o) => ("invert", o),
        Command::NormalParams(o) => ("normal-params", o),
        Command::Equivalent(o) => ("equivalent", o),
        Command::Sample(o) => ("sample", o),
        Command::Validate(o) => ("validate", o),
        Command::Representative(o) => ("representative", o),
        Command::Oracle(o) => ("oracle", o),
    };
    log::debug!("{name}: {opts:?}");
    let result = match &cli.command {
        Command::Forward(o) => forward(o),
        Command::Invert(o) => invert(o),
        Command::NormalParams(o) => normal_params_cmd(o),
        Command::Equivalent(o) => equivalent(o),
        Command::Sample(o) => sample(o),
        Command::Validate(o) => validate(o),
        Command::Representative(o) => representative(o),
        Command::Oracle(o) => oracle(o),
    };
    match result {
        Ok((text, code)) => match write_output(opts.output.as_deref(), &text) {
            Ok(()) => code,
            Err(e) => {
                eprintln!("error: cannot write output: {e}");
                1
            }
        },
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

fn write_output(path: Option<&Path>, text: &str) -> std::io::Result<()> {
    match path {
        Some(p) => fs::write(p, text),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()
        }
    }
}

fn read_text(path: &Path) -> std::result::Result<String, Failure> {
    if path == Path::new("-") {
        std::io::read_to_string(std::io::stdin()).map_err(|e| Failure::input(format!("cannot read standard input: {e}")))
    } else {
        fs::read_to_string(path).map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display())))
    }
}

/// Reads one JSON document; syntax errors are reported with their position.
fn read_json(path: &Path) -> std::result::Result<Value, Failure> {
    let text = read_text(path)?;
    serde_json::from_str(&text).map_err(|e| {
        Failure::input(format!("{}: malformed JSON at line {} column {}: {e}", path.display(), e.line(), e.column()))
    })
}

fn inputs(opts: &Opts, count: usize) -> std::result::Result<Vec<Value>, Failure> {
    let paths: Vec<PathBuf> = if opts.input.is_empty() { vec![PathBuf::from("-")] } else { opts.input.clone() };
    if paths.len() != count {
        return Err(Failure::input(format!("expected {count} --input file(s), got {}", paths.len())));
    }
    paths.iter().map(|p| read_json(p)).collect()
}

fn single_input(opts: &Opts) -> std::result::Result<Value, Failure> {
    Ok(inputs(opts, 1)?.remove(0))
}

fn decode<T: serde::de::DeserializeOwned>(v: Value, what: &str) -> std::result::Result<T, Failure> {
    serde_json::from_value(v).map_err(|e| Failure::invalid(format!("invalid {what}: {e}")))
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("output types serialize");
    s.push('\n');
    s
}

enum Described {
    State(GaussianState),
    Params(NormalParameters),
}

fn is_state(v: &Value) -> bool {
    v.get("cov").is_some()
}

fn state_or_params(v: Value) -> std::result::Result<Described, Failure> {
    if is_state(&v) {
        Ok(Described::State(decode(v, "state")?))
    } else if v.get("triples").is_some() {
        Ok(Described::Params(decode(v, "normal parameters")?))
    } else if let Some(params) = v.get("params") {
        // output of `invert`
        Ok(Described::Params(decode(params.clone(), "normal parameters")?))
    } else {
        Err(Failure::invalid("expected a state (with \"cov\") or normal parameters (with \"triples\" or \"params\")"))
    }
}

fn params_of(d: Described) -> NormalParameters {
    match d {
        Described::State(s) => normal_parameters(&s, CLUSTER_TOL),
        Described::Params(p) => p,
    }
}

fn distribution_text(p: &PhotonDistribution, csv: bool) -> String {
    if csv {
        p.to_csv()
    } else {
        to_json(p)
    }
}

fn forward(opts: &Opts) -> Outcome {
    let params = params_of(state_or_params(single_input(opts)?)?);
    let report = validate_normal_parameters(&params);
    if !report.valid {
        return Err(Failure::invalid(format!("invalid normal parameters: {}", report.failures.join("; "))));
    }
    let cfg = DistributionConfig { nmax: opts.nmax, tail_eps: opts.tail_eps };
    let p = photon_distribution(&params, &cfg)?;
    if opts.csv {
        return Ok((p.to_csv(), 0));
    }
    let mut out = serde_json::to_value(&p).expect("distributions serialize");
    out["modes"] = json!(params.modes());
    Ok((to_json(&out), 0))
}

fn invert(opts: &Opts) -> Outcome {
    let v = single_input(opts)?;
    let modes = match (opts.modes, v.get("modes").and_then(Value::as_u64)) {
        (Some(m), _) => m,
        (None, Some(m)) => m as usize,
        (None, None) => return Err(Failure::invalid("the mode count is required: pass --modes or a \"modes\" field")),
    };
    let p: PhotonDistribution = decode(v, "distribution")?;
    let mut cfg = InversionConfig { max_components: opts.max_components, ..Default::default() };
    if let Some(tol) = opts.tol {
        cfg.fit_tolerance = tol;
    }
    let result = fit_normal_parameters(&p, modes, &cfg)?;
    let code = if result.converged { 0 } else { 3 };
    if code != 0 {
        eprintln!("warning: fit did not converge (residual {:e})", result.residual);
    }
    Ok((to_json(&result), code))
}

fn normal_params_cmd(opts: &Opts) -> Outcome {
    let state: GaussianState = decode(single_input(opts)?, "state")?;
    Ok((to_json(&normal_parameters(&state, CLUSTER_TOL)), 0))
}

fn equivalent(opts: &Opts) -> Outcome {
    let mut v = inputs(opts, 2)?;
    let b: GaussianState = decode(v.pop().expect("two inputs"), "state")?;
    let a: GaussianState = decode(v.pop().expect("two inputs"), "state")?;
    let tol = opts.tol.unwrap_or(1e-8);
    let out = json!({
        "equivalent": same_distribution(&a, &b, tol),
        "a": normal_parameters(&a, CLUSTER_TOL.max(tol)),
        "b": normal_parameters(&b, CLUSTER_TOL.max(tol)),
    });
    Ok((to_json(&out), 0))
}

fn sample(opts: &Opts) -> Outcome {
    let p: PhotonDistribution = decode(single_input(opts)?, "distribution")?;
    let counts = sample_counts(&p, opts.samples, opts.seed);
    let mut out = String::from("count\n");
    for c in counts {
        out.push_str(&format!("{c}\n"));
    }
    Ok((out, 0))
}

fn validate(opts: &Opts) -> Outcome {
    let v = single_input(opts)?;
    let (report, valid) = if is_state(&v) {
        let raw: StateJson = decode(v, "state")?;
        let (cov, disp) = raw.to_matrices()?;
        let report = validate_state(&cov, &disp, PHYSICALITY_TOL)?;
        let valid = report.physical && report.symmetric;
        (serde_json::to_value(&report), valid)
    } else {
        let params: NormalParameters = decode(v, "normal parameters")?;
        let report = validate_normal_parameters(&params);
        let valid = report.valid;
        (serde_json::to_value(&report), valid)
    };
    let report = report.expect("reports serialize");
    Ok((to_json(&report), if valid { 0 } else { 2 }))
}

fn representative(opts: &Opts) -> Outcome {
    let params: NormalParameters = decode(single_input(opts)?, "normal parameters")?;
    Ok((to_json(&diagonal_representative(&params)?), 0))
}

fn oracle(opts: &Opts) -> Outcome {
    let v = single_input(opts)?;
    let modes: Vec<OracleMode> = if is_state(&v) {
        let state: GaussianState = decode(v, "state")?;
        modes_from_diagonal(&state)?
    } else {
        match v.get("modes") {
            Some(m) => decode(m.clone(), "oracle modes")?,
            None => return Err(Failure::invalid("expected {\"modes\": [{\"nu\", \"r\", \"alpha\"}, …]} or a diagonal state")),
        }
    };
    if let Some(m) = modes.iter().find(|m| !(m.nu >= 1.0) || !m.r.is_finite()) {
        return Err(Failure::invalid(format!("unphysical oracle mode {m:?}")));
    }
    let p = oracle_distribution(&modes, opts.fock_dim)?;
    Ok((distribution_text(&p, opts.csv), 0))
}
