//! Command-line driver for `fusionframe`.
//!
//! Exit codes: 0 success or converged, 2 input error, 3 iteration budget
//! exhausted, 4 numerical divergence.

pub mod geometry;
pub mod reproduce;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fusionframe::admissibility::{self, admissibility, majorizes, tff_necessary_check};
use fusionframe::flow::DescentError;
use fusionframe::{
    check_property_s, check_spectral_membership, classify_critical_point, descend, ffp,
    frame_operator, instability_certificate, is_fusion_frame, is_tight, tol, welch_bound,
    welch_gap, AnyFrame, DescentSettings, DescentTrace, Error as CoreError, Field, FrameConfig,
    OperatorFrame, Scalar, SpectralData,
};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;
pub const EXIT_DIVERGED: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Diverged(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => EXIT_INPUT,
            CliError::Diverged(_) => EXIT_DIVERGED,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "fusionframe",
    version,
    about = "Construct and certify tight fusion frames"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a random fusion frame.
    Generate(GenerateArgs),
    /// Run gradient descent on the fusion frame potential.
    Tighten(TightenArgs),
    /// Report a verdict about a frame file.
    Check(CheckArgs),
    /// Decide classical admissibility (majorization of r by lambda).
    Majorize(MajorizeArgs),
    /// Batch descent for d = 3, k = (1, 1, 2) with minimizer geometry checks.
    ReproduceFig(reproduce::ReproduceArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct FrameArgs {
    #[arg(long, default_value = "real")]
    pub field: Field,
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    pub ranks: Vec<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl FrameArgs {
    pub fn config(&self) -> Result<FrameConfig, CliError> {
        let d = self
            .d
            .ok_or_else(|| CliError::Input("--d is required".into()))?;
        Ok(FrameConfig::new(self.field, d, self.ranks.clone())?)
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DescentArgs {
    #[arg(long, default_value_t = 1e-2)]
    pub step: f64,
    #[arg(long, default_value_t = 100_000)]
    pub max_iters: usize,
    #[arg(long, default_value_t = tol::CONVERGENCE)]
    pub grad_tol: f64,
    #[arg(long, default_value_t = 1)]
    pub record_every: usize,
    #[arg(long, default_value_t = 30)]
    pub max_halvings: u32,
}

impl DescentArgs {
    pub fn settings(&self) -> Result<DescentSettings, CliError> {
        let s = DescentSettings {
            step_size: self.step,
            max_halvings: self.max_halvings,
            max_iters: self.max_iters,
            grad_tol: self.grad_tol,
            record_every: self.record_every,
        };
        s.validate()?;
        Ok(s)
    }
}

#[derive(Debug, Args, Serialize)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub frame: FrameArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct TightenArgs {
    /// Start from this frame file instead of a random frame.
    #[arg(long = "in")]
    pub input: Option<PathBuf>,
    #[command(flatten)]
    pub frame: FrameArgs,
    #[command(flatten)]
    pub descent: DescentArgs,
    /// Final frame file.
    #[arg(long, default_value = "tightened.json")]
    pub out: PathBuf,
    /// Trace CSV; defaults to the output path with a `.csv` extension.
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Which {
    Tight,
    Critical,
    PropertyS,
    Certificate,
    Spectra,
}

#[derive(Debug, Args, Serialize)]
pub struct CheckArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, value_enum)]
    pub which: Which,
    /// Target frame-operator spectrum (for `spectra`).
    #[arg(long, value_delimiter = ',')]
    pub lambda: Vec<f64>,
    /// Target block spectra concatenated in block order (for `spectra`);
    /// defaults to all ones.
    #[arg(long, value_delimiter = ',')]
    pub r: Vec<f64>,
    #[arg(long, default_value_t = tol::STRUCTURAL)]
    pub tol: f64,
    /// Also write the report here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct MajorizeArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    pub lambda: Vec<f64>,
    #[arg(long, value_delimiter = ',', required = true)]
    pub r: Vec<f64>,
    #[arg(long, default_value_t = tol::MAJORIZATION)]
    pub tol: f64,
}

/// Provenance written next to every command's primary output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub parameters: Value,
    pub seed: Option<u64>,
    pub version: String,
    pub duration_secs: f64,
    pub outputs: Vec<PathBuf>,
}

impl RunManifest {
    pub fn new(command: &str, parameters: &impl Serialize, seed: Option<u64>) -> Self {
        Self {
            command: command.into(),
            parameters: serde_json::to_value(parameters).unwrap_or(Value::Null),
            seed,
            version: env!("CARGO_PKG_VERSION").into(),
            duration_secs: 0.0,
            outputs: Vec::new(),
        }
    }

    pub fn finish(mut self, started: Instant, path: &Path) -> Result<(), CliError> {
        self.duration_secs = started.elapsed().as_secs_f64();
        write_json(
            path,
            &serde_json::to_value(&self).expect("manifest serializes"),
        )
    }
}

/// `frame.json` → `frame.json.manifest.json`.
pub fn manifest_path(output: &Path) -> PathBuf {
    let mut s = output.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

pub(crate) fn write_json(path: &Path, value: &Value) -> Result<(), CliError> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::Input(e.to_string()))?;
    s.push('\n');
    std::fs::write(path, s).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn write_frame(path: &Path, frame: &AnyFrame) -> Result<(), CliError> {
    frame
        .write(path)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn read_frame(path: &Path) -> Result<AnyFrame, CliError> {
    AnyFrame::read(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn emit(out: &mut dyn Write, value: &Value) -> Result<(), CliError> {
    writeln!(
        out,
        "{}",
        serde_json::to_string_pretty(value).expect("json")
    )?;
    Ok(())
}

/// Runs a parsed command, writing its report to `out`; returns the exit code.
pub fn run(cli: Cli, out: &mut dyn Write) -> i32 {
    let result = match cli.command {
        Command::Generate(args) => cmd_generate(&args, out),
        Command::Tighten(args) => cmd_tighten(&args, out),
        Command::Check(args) => cmd_check(&args, out),
        Command::Majorize(args) => cmd_majorize(&args, out),
        Command::ReproduceFig(args) => reproduce::cmd_reproduce_fig(&args, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn frame_summary<T: Scalar>(frame: &OperatorFrame<T>) -> Value {
    let config = frame.config();
    json!({
        "field": config.field(),
        "d": config.d(),
        "ranks": config.ranks(),
        "ffp": ffp(frame),
        "welch_bound": welch_bound(&config),
        "welch_gap": welch_gap(frame),
        "tight": is_tight(frame, tol::STRUCTURAL),
        "fusion_frame": is_fusion_frame(frame, tol::STRUCTURAL),
    })
}

fn any_summary(frame: &AnyFrame) -> Value {
    match frame {
        AnyFrame::Real(f) => frame_summary(f),
        AnyFrame::Complex(f) => frame_summary(f),
    }
}

pub fn cmd_generate(args: &GenerateArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let started = Instant::now();
    let config = args.frame.config()?;
    let frame = AnyFrame::random(&config, args.frame.seed)?;
    write_frame(&args.out, &frame)?;
    let mut manifest = RunManifest::new("generate", args, Some(args.frame.seed));
    manifest.outputs.push(args.out.clone());
    manifest.finish(started, &manifest_path(&args.out))?;
    let mut summary = any_summary(&frame);
    summary["out"] = json!(args.out);
    emit(out, &summary)?;
    Ok(EXIT_OK)
}

/// Trace path used by `tighten` when `--trace` is not given.
pub fn default_trace_path(out: &Path) -> PathBuf {
    out.with_extension("csv")
}

pub(crate) fn write_trace<T: Scalar>(path: &Path, trace: &DescentTrace<T>) -> Result<(), CliError> {
    let file = std::fs::File::create(path)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let mut w = std::io::BufWriter::new(file);
    trace.write_csv(&mut w)?;
    w.flush()?;
    Ok(())
}

struct TightenOutcome {
    summary: Value,
    code: i32,
    diverged: Option<String>,
}

fn tighten_frame<T: Scalar>(
    start: &OperatorFrame<T>,
    settings: &DescentSettings,
    out: &Path,
    trace_path: &Path,
) -> Result<TightenOutcome, CliError>
where
    AnyFrame: From<OperatorFrame<T>>,
{
    if !is_fusion_frame(start, tol::STRUCTURAL) {
        return Err(CliError::Input("input is not a fusion frame".into()));
    }
    let (trace, diverged) = match descend(start, settings) {
        Ok(trace) => (trace, None),
        Err(DescentError::Diverged { iter, trace }) => (
            *trace,
            Some(format!("descent diverged at iteration {iter}")),
        ),
        Err(DescentError::Invalid(e)) => return Err(e.into()),
    };
    write_trace(trace_path, &trace)?;
    write_frame(out, &AnyFrame::from(trace.final_frame.clone()))?;
    let config = start.config();
    let code = if diverged.is_some() {
        EXIT_DIVERGED
    } else if trace.converged {
        EXIT_OK
    } else {
        EXIT_BUDGET
    };
    let summary = json!({
        "final_ffp": trace.final_ffp(),
        "final_grad_norm": trace.final_grad_norm(),
        "welch_bound": welch_bound(&config),
        "welch_gap": trace.final_ffp() - welch_bound(&config),
        "converged": trace.converged,
        "iterations": trace.iterations,
        "tight": is_tight(&trace.final_frame, tol::STRUCTURAL),
        "out": out,
        "trace": trace_path,
    });
    Ok(TightenOutcome {
        summary,
        code,
        diverged,
    })
}

pub fn cmd_tighten(args: &TightenArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let started = Instant::now();
    let settings = args.descent.settings()?;
    let start = match &args.input {
        Some(path) => read_frame(path)?,
        None => AnyFrame::random(&args.frame.config()?, args.frame.seed)?,
    };
    let trace_path = args
        .trace
        .clone()
        .unwrap_or_else(|| default_trace_path(&args.out));
    let outcome = match &start {
        AnyFrame::Real(f) => tighten_frame(f, &settings, &args.out, &trace_path)?,
        AnyFrame::Complex(f) => tighten_frame(f, &settings, &args.out, &trace_path)?,
    };
    let seed = args.input.is_none().then_some(args.frame.seed);
    let mut manifest = RunManifest::new("tighten", args, seed);
    manifest.outputs = vec![args.out.clone(), trace_path];
    manifest.finish(started, &manifest_path(&args.out))?;
    emit(out, &outcome.summary)?;
    if let Some(msg) = outcome.diverged {
        return Err(CliError::Diverged(msg));
    }
    Ok(outcome.code)
}

fn check_report<T: Scalar>(frame: &OperatorFrame<T>, args: &CheckArgs) -> Result<Value, CliError>
where
    AnyFrame: From<OperatorFrame<T>>,
{
    let tol = args.tol;
    let needs_fusion = !matches!(args.which, Which::Tight | Which::Spectra);
    if needs_fusion && !is_fusion_frame(frame, tol::STRUCTURAL) {
        return Err(CliError::Input(
            "input is not a fusion frame (rows must be orthonormal and S positive definite)".into(),
        ));
    }
    let report = match args.which {
        Which::Tight => {
            let mut v = frame_summary(frame);
            v["tight"] = json!(is_tight(frame, tol));
            v["spectrum"] = json!(frame_operator(frame).spectrum());
            v
        }
        Which::Critical => {
            let r = classify_critical_point(frame, tol)?;
            let aligned = AnyFrame::from(r.aligned_frame.clone()).to_json_string()?;
            json!({
                "gradient_norm": r.gradient_norm,
                "is_critical": r.is_critical,
                "is_tight": r.is_tight,
                "row_spaces_invariant": r.row_spaces_invariant,
                "row_eigenvalues": r.row_eigenvalues,
                "aligned_frame": serde_json::from_str::<Value>(&aligned).expect("frame json"),
            })
        }
        Which::PropertyS => {
            let verdict = check_property_s(frame, tol)?;
            let mut v = verdict.to_json();
            v["tff_check"] = json!(tff_necessary_check(&frame.config()));
            v
        }
        Which::Certificate => match instability_certificate(frame, tol) {
            Ok(Some(cert)) => json!({ "certificate": cert.to_json(), "tight": false }),
            Ok(None) => json!({ "certificate": null, "tight": true }),
            Err(e) => json!({ "certificate": null, "tight": false, "reason": e.to_string() }),
        },
        Which::Spectra => {
            let mut lambda = args.lambda.clone();
            if lambda.is_empty() {
                return Err(CliError::Input("--which spectra needs --lambda".into()));
            }
            lambda.sort_by(|a, b| b.total_cmp(a));
            let ranks = frame.ranks();
            let target = if args.r.is_empty() {
                SpectralData::fusion(&ranks, lambda)?
            } else {
                if args.r.len() != frame.n() {
                    return Err(CliError::Input(format!(
                        "--r has {} values, expected n = {}",
                        args.r.len(),
                        frame.n()
                    )));
                }
                let mut rest = args.r.as_slice();
                let mut r = Vec::with_capacity(ranks.len());
                for &k in &ranks {
                    let mut ri = rest[..k].to_vec();
                    ri.sort_by(|a, b| b.total_cmp(a));
                    r.push(ri);
                    rest = &rest[k..];
                }
                SpectralData::new(r, lambda)?
            };
            let matched = check_spectral_membership(frame, &target, tol)?;
            let block_spectra: Vec<Vec<f64>> = frame
                .blocks()
                .iter()
                .map(|a| fusionframe::linalg::eigh(&(a * a.adjoint())).values)
                .collect();
            json!({
                "match": matched,
                "spectrum": frame_operator(frame).spectrum(),
                "block_spectra": block_spectra,
                "target": target,
                "admissibility": admissibility(&target, tol::MAJORIZATION),
            })
        }
    };
    Ok(report)
}

pub fn cmd_check(args: &CheckArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let frame = read_frame(&args.input)?;
    let mut report = match &frame {
        AnyFrame::Real(f) => check_report(f, args)?,
        AnyFrame::Complex(f) => check_report(f, args)?,
    };
    report["which"] = json!(args.which);
    if let Some(path) = &args.out {
        write_json(path, &report)?;
    }
    emit(out, &report)?;
    Ok(EXIT_OK)
}

pub fn cmd_majorize(args: &MajorizeArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let holds = majorizes(&args.lambda, &args.r, args.tol)?;
    let query = admissibility::MajorizationQuery::new(&args.lambda, &args.r)?;
    emit(
        out,
        &json!({
            "majorizes": holds,
            "lambda": query.lambda(),
            "r": query.r(),
            "slack": admissibility::majorization_slack(query.lambda(), query.r()),
        }),
    )?;
    Ok(EXIT_OK)
}
