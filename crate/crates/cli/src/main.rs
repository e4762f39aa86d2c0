//! `twoproc`: family generation, stream extraction, entropy evaluation,
//! verification suites and amplification rates.
//!
//! Exit codes: 0 ok, 1 verification failure, 2 bad arguments, 3 bad input
//! data, 4 solver failure.

mod fixtures;
mod output;

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};
use tempfile::NamedTempFile;
use twoproc::bitlinalg::MatrixFamily;
use twoproc::dira::{self, DiraParams};
use twoproc::entropy::{self, Bipartite};
use twoproc::extractor::{extract_stream, ExtractionJob, ExtractorSpec};
use twoproc::par::ExecMode;
use twoproc::quantum::{instrument_from_json, state_from_json, CqState};
use twoproc::verify;
use twoproc::Error;

#[derive(Parser)]
#[command(name = "twoproc", version, about = "Two-process randomness extraction toolkit")]
struct Cli {
    /// Human-readable output instead of JSON.
    #[arg(long, global = true)]
    plain: bool,
    /// Seed for randomized commands; echoed in every result.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Target bracket width of SDP solves, in bits.
    #[arg(long, global = true, env = "TWOPROC_GAP", default_value_t = entropy::DEFAULT_GAP)]
    gap: f64,
    /// Run batch work on one thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a DEOR matrix family as JSON.
    GenFamily {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        /// 0: field multiplication matrices; 1: circulant shifts (n prime, 2 primitive mod n).
        #[arg(long)]
        r: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Extract from two LSB-first bit files.
    Extract(ExtractArgs),
    /// Evaluate a conditional entropy of a state file.
    Entropy(EntropyArgs),
    /// Run a verification suite.
    Verify {
        #[arg(long, value_enum)]
        suite: Suite,
        #[arg(long, default_value_t = 20)]
        count: usize,
    },
    /// Output length of the amplification protocol.
    DiraRate {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        h: f64,
        #[arg(long)]
        mu: f64,
        #[arg(long)]
        eps: f64,
        #[arg(long = "eps-s")]
        eps_s: f64,
        #[arg(long)]
        c: f64,
        #[arg(long)]
        privatization: bool,
    },
    /// Regenerate the reference fixtures.
    Fixtures {
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct ExtractArgs {
    /// Inner-product extractor on N-bit blocks.
    #[arg(long, value_name = "N", conflicts_with = "family", required_unless_present = "family")]
    ip: Option<usize>,
    /// DEOR extractor from a family file.
    #[arg(long, value_name = "PATH")]
    family: Option<PathBuf>,
    #[arg(long)]
    x: PathBuf,
    #[arg(long)]
    y: PathBuf,
    #[arg(long)]
    blocks: u64,
    /// Append Y to every output block.
    #[arg(long)]
    strong: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EntropyArgs {
    #[arg(long, value_enum)]
    kind: Kind,
    #[arg(long)]
    state: PathBuf,
    /// Conditioned systems, comma separated.
    #[arg(long, value_delimiter = ',')]
    a: Vec<String>,
    /// Conditioning systems, comma separated.
    #[arg(long, value_delimiter = ',')]
    b: Vec<String>,
    /// Instrument file (k2 only).
    #[arg(long, required_if_eq("kind", "k2"))]
    instrument: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Hmin,
    H2,
    Hinf,
    Pguess,
    K2,
}

#[derive(Clone, Copy, ValueEnum)]
enum Suite {
    IpBound,
    DeorBound,
    Xor,
    Tightness,
    Counterexample,
    Chaining,
    AltModel,
}

/// A failed command: exit code plus an optional result still worth printing.
struct Failure {
    code: u8,
    message: String,
    partial: Option<Value>,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::InvalidParameter(_)
            | Error::NotPrime(_)
            | Error::NotPrimitiveRoot(_)
            | Error::UnsupportedDegree(_) => 2,
            Error::SolverStalled { .. } => 4,
            _ => 3,
        };
        Failure {
            code,
            message: e.to_string(),
            partial: None,
        }
    }
}

fn bad_args(message: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        message: message.into(),
        partial: None,
    }
}

type Outcome = Result<(Value, bool), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mode = if cli.sequential { ExecMode::Sequential } else { ExecMode::default() };
    let result = run(&cli, mode);
    let print = |fields: Value| println!("{}", output::render(&output::envelope(command_name(&cli.command), cli.seed, fields), cli.plain));
    match result {
        Ok((fields, pass)) => {
            print(fields);
            ExitCode::from(if pass { 0 } else { 1 })
        }
        Err(f) => {
            if let Some(partial) = f.partial {
                print(partial);
            }
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::GenFamily { .. } => "gen-family",
        Command::Extract(_) => "extract",
        Command::Entropy(_) => "entropy",
        Command::Verify { .. } => "verify",
        Command::DiraRate { .. } => "dira-rate",
        Command::Fixtures { .. } => "fixtures",
    }
}

fn run(cli: &Cli, mode: ExecMode) -> Outcome {
    if !(cli.gap.is_finite() && cli.gap > 0.0) {
        return Err(bad_args(format!("gap must be positive, got {}", cli.gap)));
    }
    match &cli.command {
        Command::GenFamily { n, m, r, out } => gen_family(*n, *m, *r, out),
        Command::Extract(args) => extract(args, mode),
        Command::Entropy(args) => entropy_cmd(args, cli.gap),
        Command::Verify { suite, count } => verify_cmd(*suite, cli.seed, *count, cli.gap, mode),
        Command::DiraRate {
            n,
            h,
            mu,
            eps,
            eps_s,
            c,
            privatization,
        } => dira_rate(DiraParams {
            n: *n,
            h: *h,
            mu: *mu,
            eps: *eps,
            eps_s: *eps_s,
            c: *c,
            privatization: *privatization,
        }),
        Command::Fixtures { out } => {
            let files = fixtures::write_all(out)?;
            Ok((json!({"dir": out, "files": files}), true))
        }
    }
}

/// Writes `bytes` next to `path` and renames it into place.
pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> twoproc::Result<()> {
    let mut tmp = temp_beside(path)?;
    tmp.write_all(bytes)?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

/// A temp file in the directory of `path`, readable like a normal output file.
fn temp_beside(path: &Path) -> std::io::Result<NamedTempFile> {
    let mut builder = tempfile::Builder::new();
    #[cfg(unix)]
    builder.permissions(std::os::unix::fs::PermissionsExt::from_mode(0o644));
    builder.tempfile_in(parent_dir(path))
}

fn parent_dir(path: &Path) -> &Path {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    }
}

fn check_output_dir(path: &Path) -> Result<(), Failure> {
    if parent_dir(path).is_dir() {
        Ok(())
    } else {
        Err(bad_args(format!("output directory of {} does not exist", path.display())))
    }
}

fn check_input(path: &Path) -> Result<(), Failure> {
    if path.is_file() {
        Ok(())
    } else {
        Err(Failure::from(Error::Io(std::io::Error::new(
            std::io::ErrorKind::NotFound,
            format!("{}: no such file", path.display()),
        ))))
    }
}

fn read_text(path: &Path) -> Result<String, Failure> {
    check_input(path)?;
    Ok(fs::read_to_string(path).map_err(Error::from)?)
}

fn to_value<T: Serialize>(v: &T) -> Result<Value, Failure> {
    Ok(serde_json::to_value(v).map_err(Error::from)?)
}

fn gen_family(n: usize, m: usize, r: usize, out: &Path) -> Outcome {
    check_output_dir(out)?;
    let family = match r {
        0 => MatrixFamily::field(n, m),
        1 => MatrixFamily::circulant(n, m),
        _ => return Err(bad_args(format!("r must be 0 (field) or 1 (circulant), got {r}"))),
    }?;
    write_atomic(out, family.to_json()?.as_bytes())?;
    Ok((
        json!({"out": out, "n": family.n(), "m": family.m(), "r": family.r(), "matrices": family.matrices().len()}),
        true,
    ))
}

fn extract(args: &ExtractArgs, mode: ExecMode) -> Outcome {
    check_input(&args.x)?;
    check_input(&args.y)?;
    check_output_dir(&args.out)?;
    let spec = match (&args.ip, &args.family) {
        (Some(n), _) => ExtractorSpec::ip(*n)?,
        (None, Some(path)) => ExtractorSpec::deor(MatrixFamily::from_json(&read_text(path)?)?),
        (None, None) => return Err(bad_args("one of --ip or --family is required")),
    };
    let job = ExtractionJob::new(spec, args.strong, args.blocks).with_mode(mode);
    let open = |p: &Path| File::open(p).map(BufReader::new).map_err(Error::from);
    // the temp file is removed on drop unless the whole stream succeeded
    let tmp = temp_beside(&args.out).map_err(Error::from)?;
    let mut sink = BufWriter::new(tmp);
    let stats = extract_stream(&job, open(&args.x)?, open(&args.y)?, &mut sink)?;
    let tmp = sink.into_inner().map_err(|e| Error::from(e.into_error()))?;
    tmp.persist(&args.out).map_err(|e| Error::from(e.error))?;
    Ok((
        json!({
            "out": args.out,
            "extractor": match job.spec.family() { Some(_) => "deor", None => "ip" },
            "n": job.spec.n(),
            "m": job.spec.m(),
            "strong": args.strong,
            "output_bits_per_block": job.spec.output_bits(args.strong),
            "blocks": stats.blocks,
            "input_bytes": stats.input_bytes,
            "output_bytes": stats.output_bytes,
        }),
        true,
    ))
}

fn entropy_cmd(args: &EntropyArgs, gap: f64) -> Outcome {
    let rho = state_from_json(&read_text(&args.state)?)?;
    let a: Vec<&str> = args.a.iter().map(String::as_str).collect();
    let b: Vec<&str> = args.b.iter().map(String::as_str).collect();
    let base = |quantity: &str| json!({"quantity": quantity, "a": a, "b": b, "gap": gap});
    let merge = |mut v: Value, extra: Value| {
        if let (Value::Object(m), Value::Object(e)) = (&mut v, extra) {
            m.extend(e);
        }
        v
    };
    let bipartite = || {
        if a.is_empty() {
            Err(bad_args("--a must name at least one system"))
        } else {
            Ok(Bipartite::from_state(&rho, &a, &b)?)
        }
    };
    let result = match args.kind {
        Kind::Hmin => entropy::h_min(&bipartite()?, gap).map(|r| ("hmin", r)),
        Kind::H2 => entropy::h2_down(&bipartite()?).map(|r| ("h2", r)),
        Kind::Hinf => entropy::h_inf_down(&bipartite()?).map(|r| ("hinf", r)),
        Kind::Pguess => {
            if a.len() != 1 {
                return Err(bad_args("pguess needs exactly one classical system in --a"));
            }
            let order: Vec<&str> = a.iter().chain(&b).copied().collect();
            let cq = CqState::from_density(&rho.reduce(&order)?)?;
            return match entropy::p_guess(&cq, gap) {
                Ok(g) => Ok((
                    merge(
                        base("pguess"),
                        json!({
                            "value": g.value,
                            "value_bits": -g.value.log2(),
                            "lower": g.lower,
                            "upper": g.upper,
                            "iterations": g.iterations,
                        }),
                    ),
                    true,
                )),
                Err(e) => Err(stalled(e, base("pguess"))),
            };
        }
        Kind::K2 => {
            let path = args.instrument.as_ref().ok_or_else(|| bad_args("k2 needs --instrument"))?;
            let inst = instrument_from_json(&read_text(path)?)?;
            let names: Vec<&str> = inst.input().iter().map(|s| s.name.as_str()).collect();
            let sigma = rho.reduce(&names)?;
            let value = entropy::k2_functional(&inst, &sigma)?;
            return Ok((
                merge(
                    base("k2"),
                    json!({"value_bits": value, "lower": value, "upper": value, "iterations": 0}),
                ),
                true,
            ));
        }
    };
    match result {
        Ok((quantity, r)) => Ok((
            merge(
                base(quantity),
                json!({
                    "value_bits": r.value,
                    "lower": r.lower,
                    "upper": r.upper,
                    "iterations": r.iterations,
                    "certificate": r.kind,
                }),
            ),
            true,
        )),
        Err(e) => Err(stalled(e, base(kind_name(args.kind)))),
    }
}

fn kind_name(k: Kind) -> &'static str {
    match k {
        Kind::Hmin => "hmin",
        Kind::H2 => "h2",
        Kind::Hinf => "hinf",
        Kind::Pguess => "pguess",
        Kind::K2 => "k2",
    }
}

/// Keeps the bracket of a stalled solve in the printed result.
fn stalled(e: Error, mut base: Value) -> Failure {
    let partial = match &e {
        Error::SolverStalled { lower, upper, iterations } => {
            if let Value::Object(m) = &mut base {
                m.insert("lower".into(), (*lower).into());
                m.insert("upper".into(), (*upper).into());
                m.insert("iterations".into(), (*iterations).into());
                m.insert("converged".into(), false.into());
            }
            Some(base)
        }
        _ => None,
    };
    Failure {
        partial,
        ..Failure::from(e)
    }
}

fn verify_cmd(suite: Suite, seed: u64, count: usize, gap: f64, mode: ExecMode) -> Outcome {
    let (name, reports): (&str, Vec<Value>) = match suite {
        Suite::IpBound => ("ip-bound", values(verify::ip_bound_suite(mode, seed, count, gap)?)?),
        Suite::DeorBound => ("deor-bound", values(verify::deor_bound_suite(mode, seed, count, gap)?)?),
        Suite::Xor => ("xor", values(verify::xor_suite(mode, seed, count)?)?),
        Suite::Tightness => ("tightness", values(verify::tightness_suite(gap)?)?),
        Suite::Counterexample => ("counterexample", values(vec![verify::check_counterexample(gap)?])?),
        Suite::Chaining => ("chaining", values(dira::chaining_suite(mode, seed, count, gap)?)?),
        Suite::AltModel => ("alt-model", values(verify::alt_model_suite(mode, seed, count)?)?),
    };
    let passed = reports.iter().filter(|r| report_passed(r)).count();
    let failed = reports.len() - passed;
    Ok((
        json!({"suite": name, "passed": passed, "failed": failed, "reports": reports}),
        failed == 0,
    ))
}

fn values<T: Serialize>(reports: Vec<T>) -> Result<Vec<Value>, Failure> {
    reports.iter().map(to_value).collect()
}

/// Reports carry either `pass` or `holds`.
fn report_passed(r: &Value) -> bool {
    ["pass", "holds"].iter().any(|k| r.get(k) == Some(&Value::Bool(true)))
}

fn dira_rate(p: DiraParams) -> Outcome {
    let rate = dira::dira_rate(&p)?;
    let epsilon_check = dira::dira_epsilon(&p, rate.m)?;
    Ok((
        json!({
            "m": rate.m,
            "flag": rate.flag,
            "epsilon_check": epsilon_check,
            "k2": rate.k2,
            "raw": rate.raw,
            "privatization": rate.privatization,
            "params": to_value(&p)?,
        }),
        true,
    ))
}
