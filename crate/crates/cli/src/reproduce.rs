//! `reproduce-fig`: many descents from random starts for `d = 3`,
//! `k = (1, 1, 2)` over ℝ.
//!
//! Seeds: run `j` uses the `j`-th `u64` drawn from `ChaCha8Rng` seeded with
//! the master seed. Each run writes `run_XXX.csv` (columns
//! `iter,ffp,grad_norm`) and `run_XXX.json` (final frame); `summary.json`
//! collects the results in run order.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::Args;
use fusionframe::flow::DescentError;
use fusionframe::{
    descend, random_fusion_frame, AnyFrame, DescentSettings, Field, FrameConfig, OperatorFrame,
};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::geometry::{analyze_112, MinimizerGeometry};
use crate::{emit, write_json, write_trace, CliError, DescentArgs, RunManifest, EXIT_OK};

pub const MINIMUM: f64 = 5.5;
pub const MINIMUM_TOL: f64 = 1e-4;
pub const ANGLE_TOL: f64 = 1e-3;

/// Lower bound a non-tight minimizer must clear: `16/3 + 0.1`.
pub fn ffp_floor() -> f64 {
    16.0 / 3.0 + 0.1
}

#[derive(Debug, Args, Serialize)]
pub struct ReproduceArgs {
    #[arg(long, default_value_t = 100)]
    pub seeds: usize,
    /// Master seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "reproduce-out")]
    pub out: PathBuf,
    #[command(flatten)]
    pub descent: DescentArgs,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunResult {
    pub run: usize,
    pub seed: u64,
    pub final_ffp: f64,
    pub final_grad_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    pub diverged: bool,
    pub reached_minimum: bool,
    pub geometry: Option<MinimizerGeometry>,
    pub perpendicular: bool,
    pub mercedes_benz: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReproduceSummary {
    pub runs: usize,
    pub master_seed: u64,
    pub converged: usize,
    pub reached_minimum: usize,
    pub fraction_reached_minimum: f64,
    /// Every converged run ends with FFP above `16/3 + 0.1`.
    pub converged_above_floor: bool,
    /// Every converged run at the minimum has the Mercedes–Benz angles.
    pub geometry_ok: bool,
    /// Every converged run at the minimum has `Q` at a right dihedral
    /// angle to `𝒮`.
    pub perpendicular_ok: bool,
    pub max_angle_error: f64,
    pub dihedral_angle_min: f64,
    pub dihedral_angle_max: f64,
    pub results: Vec<RunResult>,
}

/// Per-run seeds expanded from the master seed.
pub fn run_seeds(master: u64, count: usize) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    (0..count).map(|_| rng.next_u64()).collect()
}

fn thread_pool() -> Result<rayon::ThreadPool, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var("FUSIONFRAME_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .map_err(|_| CliError::Input(format!("FUSIONFRAME_THREADS={v:?} is not a count")))?;
        builder = builder.num_threads(n);
    }
    builder
        .build()
        .map_err(|e| CliError::Input(format!("thread pool: {e}")))
}

fn one_run(
    run: usize,
    seed: u64,
    config: &FrameConfig,
    settings: &DescentSettings,
    dir: &Path,
) -> Result<RunResult, CliError> {
    let start: OperatorFrame<f64> = random_fusion_frame(config, seed)?;
    let (trace, diverged) = match descend(&start, settings) {
        Ok(t) => (t, false),
        Err(DescentError::Diverged { trace, .. }) => (*trace, true),
        Err(DescentError::Invalid(e)) => return Err(e.into()),
    };
    write_trace(&dir.join(format!("run_{run:03}.csv")), &trace)?;
    AnyFrame::from(trace.final_frame.clone())
        .write(dir.join(format!("run_{run:03}.json")))
        .map_err(CliError::from)?;
    let final_ffp = trace.final_ffp();
    let reached_minimum = (final_ffp - MINIMUM).abs() <= MINIMUM_TOL;
    let geometry = analyze_112(&trace.final_frame);
    let (perpendicular, mercedes_benz) = geometry.as_ref().map_or((false, false), |g| {
        (g.is_perpendicular(ANGLE_TOL), g.is_mercedes_benz(ANGLE_TOL))
    });
    Ok(RunResult {
        run,
        seed,
        final_ffp,
        final_grad_norm: trace.final_grad_norm(),
        iterations: trace.iterations,
        converged: trace.converged,
        diverged,
        reached_minimum,
        geometry,
        perpendicular,
        mercedes_benz,
    })
}

pub fn summarize(master_seed: u64, results: Vec<RunResult>) -> ReproduceSummary {
    let runs = results.len();
    let converged: Vec<&RunResult> = results.iter().filter(|r| r.converged).collect();
    let reached_minimum = results.iter().filter(|r| r.reached_minimum).count();
    let at_min: Vec<&RunResult> = converged
        .iter()
        .copied()
        .filter(|r| r.reached_minimum)
        .collect();
    let geoms: Vec<&MinimizerGeometry> =
        at_min.iter().filter_map(|r| r.geometry.as_ref()).collect();
    let max_angle_error = geoms.iter().map(|g| g.max_angle_error).fold(0.0, f64::max);
    let dihedral_angle_min = geoms
        .iter()
        .map(|g| g.dihedral_angle)
        .fold(f64::INFINITY, f64::min);
    let dihedral_angle_max = geoms
        .iter()
        .map(|g| g.dihedral_angle)
        .fold(f64::NEG_INFINITY, f64::max);
    ReproduceSummary {
        runs,
        master_seed,
        converged: converged.len(),
        reached_minimum,
        fraction_reached_minimum: if runs == 0 {
            0.0
        } else {
            reached_minimum as f64 / runs as f64
        },
        converged_above_floor: converged.iter().all(|r| r.final_ffp > ffp_floor()),
        geometry_ok: at_min.iter().all(|r| r.mercedes_benz),
        perpendicular_ok: at_min.iter().all(|r| r.perpendicular),
        max_angle_error,
        dihedral_angle_min,
        dihedral_angle_max,
        results,
    }
}

/// Runs the batch and writes every per-run file plus `summary.json`.
pub fn reproduce(
    seeds: usize,
    master_seed: u64,
    settings: &DescentSettings,
    dir: &Path,
) -> Result<ReproduceSummary, CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Input(format!("{}: {e}", dir.display())))?;
    let config = FrameConfig::new(Field::Real, 3, vec![1, 1, 2])?;
    let per_run = run_seeds(master_seed, seeds);
    let pool = thread_pool()?;
    let results: Result<Vec<RunResult>, CliError> = pool.install(|| {
        per_run
            .par_iter()
            .enumerate()
            .map(|(run, &seed)| one_run(run, seed, &config, settings, dir))
            .collect()
    });
    let summary = summarize(master_seed, results?);
    write_json(
        &dir.join("summary.json"),
        &serde_json::to_value(&summary).expect("summary serializes"),
    )?;
    Ok(summary)
}

pub fn cmd_reproduce_fig(args: &ReproduceArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let started = Instant::now();
    let settings = args.descent.settings()?;
    let summary = reproduce(args.seeds, args.seed, &settings, &args.out)?;
    let mut manifest = RunManifest::new("reproduce-fig", args, Some(args.seed));
    manifest.outputs.push(args.out.join("summary.json"));
    for run in 0..args.seeds {
        manifest
            .outputs
            .push(args.out.join(format!("run_{run:03}.csv")));
        manifest
            .outputs
            .push(args.out.join(format!("run_{run:03}.json")));
    }
    manifest.finish(started, &args.out.join("manifest.json"))?;
    emit(
        out,
        &json!({
            "runs": summary.runs,
            "converged": summary.converged,
            "reached_minimum": summary.reached_minimum,
            "fraction_reached_minimum": summary.fraction_reached_minimum,
            "converged_above_floor": summary.converged_above_floor,
            "geometry_ok": summary.geometry_ok,
            "perpendicular_ok": summary.perpendicular_ok,
            "max_angle_error": summary.max_angle_error,
            "dihedral_angle_min": summary.dihedral_angle_min,
            "dihedral_angle_max": summary.dihedral_angle_max,
            "summary": args.out.join("summary.json"),
        }),
    )?;
    Ok(EXIT_OK)
}
