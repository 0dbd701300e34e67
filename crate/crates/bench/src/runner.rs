//! Batch execution of an [`ExperimentSpec`].
//!
//! Output layout (`spec.output`):
//!
//! ```text
//! experiment.toml      resolved configuration
//! traces/run_NNNN.csv  one solver trace per run
//! summary.csv          one row per run, schema SUMMARY_SCHEMA
//! summary.json         the same records plus per-repeat hypervolumes
//! trajectories.csv     run_id,iter,F1..FM
//! front.csv            F1..FM,x1..xq along the Pareto front
//! ```

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use foops::baselines::{ls_solve, simplex_grid, LSConfig};
use foops::merit::{merit_eval, InnerMethod};
use foops::metrics::{hypervolume_2d, hypervolume_mc, pareto_stationarity_residual, FrontSample};
use foops::solver::solve;
use foops::{linalg, MOProblem, MeritConfig, PreferenceSpec, SolveTrace};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{ExperimentSpec, MethodSpec};
use crate::error::{BenchError, Result};

pub const SUMMARY_SCHEMA: &str = "foops-summary/1";

/// Columns of `summary.csv` before the per-objective and per-coordinate blocks
/// `ray1..rayM, lambda1..lambdaM, F1..FM, x1..xq`.
pub const SUMMARY_COLUMNS: [&str; 16] = [
    "run_id",
    "method",
    "preference",
    "repeat",
    "seed",
    "status",
    "iterations",
    "f0",
    "preference_violation",
    "merit_gap",
    "merit_gap_certified",
    "stationarity_residual",
    "hypervolume",
    "wall_time_secs",
    "trace_file",
    "error",
];

const MC_SAMPLES: usize = 200_000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRecord {
    pub run_id: usize,
    pub method: String,
    pub preference: Option<usize>,
    pub ray: Vec<f64>,
    pub repeat: usize,
    pub seed: u64,
    pub lambda: Vec<f64>,
    /// Solver status, or `diverged` / `failed`.
    pub status: String,
    pub iterations: usize,
    pub x: Vec<f64>,
    pub objectives: Vec<f64>,
    pub f0: f64,
    /// `||H(F(x))||^2`, `NaN` without a preference.
    pub preference_violation: f64,
    /// Gap column of the trace's final row.
    pub merit_gap: f64,
    /// Gap recomputed at the final point with a certified inner step.
    pub merit_gap_certified: f64,
    pub stationarity_residual: f64,
    /// Hypervolume of the final points of all runs sharing this repeat.
    pub hypervolume: f64,
    pub wall_time_secs: f64,
    pub trace_file: Option<String>,
    pub error: Option<String>,
}

impl RunRecord {
    pub fn failed(&self) -> bool {
        self.status == "diverged" || self.status == "failed"
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    pub schema: String,
    pub name: String,
    pub method: String,
    pub problem: String,
    pub output_dir: PathBuf,
    pub nadir: Vec<f64>,
    pub hypervolume_by_repeat: Vec<f64>,
    pub runs: Vec<RunRecord>,
}

impl ExperimentReport {
    pub fn failures(&self) -> usize {
        self.runs.iter().filter(|r| r.failed()).count()
    }
}

struct Job {
    run_id: usize,
    preference: Option<usize>,
    repeat: usize,
    seed: u64,
    x0: Vec<f64>,
    lambda: Option<Vec<f64>>,
}

/// Creates the output tree and checks it is writable.
pub fn prepare_output(dir: &Path) -> Result<()> {
    let traces = dir.join("traces");
    fs::create_dir_all(&traces).map_err(|e| BenchError::io(&traces, e))?;
    let probe = dir.join(".write_probe");
    fs::write(&probe, b"").map_err(|e| BenchError::io(&probe, e))?;
    fs::remove_file(&probe).map_err(|e| BenchError::io(&probe, e))
}

/// Runs every (preference, repeat[, weight]) job of the experiment in
/// parallel and writes all output files.
///
/// Individual run failures are recorded in the report; only configuration
/// and I/O problems are returned as errors.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentReport> {
    spec.validate()?;
    prepare_output(&spec.output)?;
    let config_path = spec.output.join("experiment.toml");
    fs::write(&config_path, spec.to_toml_string()?).map_err(|e| BenchError::io(&config_path, e))?;

    let base = spec.problem.build()?;
    let prefs = spec.preferences.resolve()?;
    let problems: Vec<MOProblem> = prefs
        .iter()
        .map(|r| base.clone().with_preference(r))
        .collect::<foops::Result<_>>()?;
    warn_about_steps(spec);

    let jobs = plan_jobs(spec, &base, prefs.len())?;
    log::info!("{}: {} runs on {}", spec.name, jobs.len(), base.name());

    let results: Vec<(RunRecord, Option<SolveTrace>)> = jobs
        .par_iter()
        .map(|job| {
            let problem = job.preference.map_or(&base, |i| &problems[i]);
            let pref = job.preference.map(|i| &prefs[i]);
            execute(spec, problem, pref, job)
        })
        .collect();

    let (mut runs, traces): (Vec<RunRecord>, Vec<Option<SolveTrace>>) = results.into_iter().unzip();
    let nadir = spec.nadir();
    let hypervolume_by_repeat = (0..spec.repeats)
        .map(|r| {
            let points: Vec<Vec<f64>> = runs
                .iter()
                .filter(|run| run.repeat == r && !run.failed() && linalg::is_finite(&run.objectives))
                .map(|run| run.objectives.clone())
                .collect();
            group_hypervolume(points, &nadir, spec.seed + r as u64)
        })
        .collect::<Result<Vec<f64>>>()?;
    for run in &mut runs {
        run.hypervolume = hypervolume_by_repeat[run.repeat];
    }

    let report = ExperimentReport {
        schema: SUMMARY_SCHEMA.into(),
        name: spec.name.clone(),
        method: spec.method.label().into(),
        problem: base.name().into(),
        output_dir: spec.output.clone(),
        nadir,
        hypervolume_by_repeat,
        runs,
    };
    write_summary_csv(&spec.output.join("summary.csv"), &report, base.num_objectives(), base.dim())?;
    let json_path = spec.output.join("summary.json");
    let file = File::create(&json_path).map_err(|e| BenchError::io(&json_path, e))?;
    serde_json::to_writer_pretty(BufWriter::new(file), &report)
        .map_err(|e| BenchError::io(&json_path, e.into()))?;
    write_trajectories(&spec.output.join("trajectories.csv"), &report.runs, &traces, base.num_objectives())?;
    write_front(&spec.output.join("front.csv"), spec, &base)?;

    let failed = report.failures();
    if failed > 0 {
        log::warn!("{failed} of {} runs failed", report.runs.len());
    }
    Ok(report)
}

fn plan_jobs(spec: &ExperimentSpec, base: &MOProblem, n_prefs: usize) -> Result<Vec<Job>> {
    let pref_slots: Vec<Option<usize>> = if n_prefs == 0 { vec![None] } else { (0..n_prefs).map(Some).collect() };
    let weights: Vec<Option<Vec<f64>>> = match &spec.method {
        MethodSpec::LsSweep { n_weights, .. } => simplex_grid(base.num_objectives(), *n_weights)?
            .into_iter()
            .map(|w| {
                let total: f64 = w.iter().sum();
                Some(w.iter().map(|v| v / total).collect())
            })
            .collect(),
        _ => vec![None],
    };
    let mut jobs = Vec::new();
    for preference in pref_slots {
        for repeat in 0..spec.repeats {
            let seed = spec.seed + repeat as u64;
            let x0 = spec.init.sample(base.dim(), seed)?;
            for lambda in &weights {
                jobs.push(Job {
                    run_id: jobs.len(),
                    preference,
                    repeat,
                    seed,
                    x0: x0.clone(),
                    lambda: lambda.clone(),
                });
            }
        }
    }
    Ok(jobs)
}

fn warn_about_steps(spec: &ExperimentSpec) {
    let MethodSpec::Foops(cfg) = &spec.method else { return };
    let est = spec.problem.smoothness();
    let certified = est.inner_step(&cfg.merit);
    if cfg.beta > certified {
        log::warn!(
            "beta = {} exceeds the certified inner step 1/L_h = {certified:.3e}; inner iterates may oscillate",
            cfg.beta
        );
    }
    if !est.inner_strongly_convex(&cfg.merit) {
        log::warn!(
            "l = {} does not exceed the objective smoothness bound {:.3}; the inner problem may be nonconvex",
            cfg.merit.l,
            est.hessian_bound
        );
    }
}

fn merit_config(spec: &ExperimentSpec) -> MeritConfig {
    match &spec.method {
        MethodSpec::Foops(cfg) => cfg.merit,
        _ => MeritConfig::default(),
    }
}

fn execute(
    spec: &ExperimentSpec,
    problem: &MOProblem,
    pref: Option<&PreferenceSpec>,
    job: &Job,
) -> (RunRecord, Option<SolveTrace>) {
    let outcome = match &spec.method {
        MethodSpec::Foops(cfg) => solve(problem, cfg, &job.x0),
        MethodSpec::Ls { lambda, run } => LSConfig::new(lambda.clone(), run.settings(job.x0.clone()))
            .and_then(|cfg| ls_solve(problem, &cfg)),
        MethodSpec::LsSweep { run, .. } => {
            let lambda = job.lambda.clone().unwrap_or_default();
            LSConfig::new(lambda, run.settings(job.x0.clone())).and_then(|cfg| ls_solve(problem, &cfg))
        }
    };
    let (status, trace, error) = match outcome {
        Ok(trace) => (status_label(&trace), Some(trace), None),
        Err(foops::Error::Diverged { iteration, reason, trace }) => {
            ("diverged".to_string(), Some(*trace), Some(format!("diverged at iteration {iteration}: {reason}")))
        }
        Err(e) => ("failed".to_string(), None, Some(e.to_string())),
    };

    let lambda = match &spec.method {
        MethodSpec::Ls { lambda, .. } => lambda.clone(),
        _ => job.lambda.clone().unwrap_or_default(),
    };
    let mut record = RunRecord {
        run_id: job.run_id,
        method: spec.method.label().into(),
        preference: job.preference,
        ray: pref.map(|p| p.ray().to_vec()).unwrap_or_default(),
        repeat: job.repeat,
        seed: job.seed,
        lambda,
        status,
        iterations: 0,
        x: Vec::new(),
        objectives: Vec::new(),
        f0: f64::NAN,
        preference_violation: f64::NAN,
        merit_gap: f64::NAN,
        merit_gap_certified: f64::NAN,
        stationarity_residual: f64::NAN,
        hypervolume: f64::NAN,
        wall_time_secs: 0.0,
        trace_file: None,
        error,
    };

    let Some(trace) = trace else { return (record, None) };
    record.wall_time_secs = trace.wall_time_secs;
    if let Some(last) = trace.last() {
        record.iterations = last.iter;
        record.x = last.x.clone();
        record.objectives = last.objectives.clone();
        record.f0 = last.f0;
        record.merit_gap = last.merit_gap;
        if let Some(p) = pref {
            record.preference_violation = p.violation(&last.objectives).unwrap_or(f64::NAN);
        }
        if linalg::is_finite(&last.x) {
            let mcfg = merit_config(spec);
            let inner = InnerMethod::pgd(spec.problem.smoothness().inner_step(&mcfg));
            match merit_eval(&mcfg, problem, &last.x, &last.x, &inner) {
                Ok(eval) => record.merit_gap_certified = eval.gap,
                Err(e) => log::warn!("run {}: certified merit failed: {e}", job.run_id),
            }
            record.stationarity_residual = pareto_stationarity_residual(problem, &last.x).unwrap_or(f64::NAN);
        }
    }

    let rel = format!("traces/run_{:04}.csv", job.run_id);
    let path = spec.output.join(&rel);
    let written = File::create(&path)
        .map_err(|e| e.to_string())
        .and_then(|f| trace.write_csv(BufWriter::new(f)).map_err(|e| e.to_string()));
    match written {
        Ok(()) => record.trace_file = Some(rel),
        Err(e) => {
            record.status = "failed".into();
            record.error = Some(format!("writing {}: {e}", path.display()));
        }
    }
    (record, Some(trace))
}

fn status_label(trace: &SolveTrace) -> String {
    serde_json::to_value(trace.status)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_else(|| format!("{:?}", trace.status))
}

fn group_hypervolume(points: Vec<Vec<f64>>, nadir: &[f64], seed: u64) -> Result<f64> {
    let sample = FrontSample::new(points, nadir.to_vec())?;
    if nadir.len() == 2 {
        Ok(hypervolume_2d(&sample)?)
    } else {
        Ok(hypervolume_mc(&sample, MC_SAMPLES, seed)?.0)
    }
}

fn num(v: f64) -> String {
    v.to_string()
}

fn padded(values: &[f64], len: usize) -> impl Iterator<Item = String> + '_ {
    (0..len).map(move |i| values.get(i).map(|v| num(*v)).unwrap_or_default())
}

pub fn summary_header(m: usize, q: usize) -> Vec<String> {
    let mut h: Vec<String> = SUMMARY_COLUMNS.iter().map(|c| c.to_string()).collect();
    h.extend((1..=m).map(|i| format!("ray{i}")));
    h.extend((1..=m).map(|i| format!("lambda{i}")));
    h.extend((1..=m).map(|i| format!("F{i}")));
    h.extend((1..=q).map(|i| format!("x{i}")));
    h
}

fn write_summary_csv(path: &Path, report: &ExperimentReport, m: usize, q: usize) -> Result<()> {
    let io = |e: csv::Error| BenchError::io(path, e.into());
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    w.write_record(summary_header(m, q)).map_err(io)?;
    for r in &report.runs {
        let mut rec = vec![
            r.run_id.to_string(),
            r.method.clone(),
            r.preference.map(|p| p.to_string()).unwrap_or_default(),
            r.repeat.to_string(),
            r.seed.to_string(),
            r.status.clone(),
            r.iterations.to_string(),
            num(r.f0),
            num(r.preference_violation),
            num(r.merit_gap),
            num(r.merit_gap_certified),
            num(r.stationarity_residual),
            num(r.hypervolume),
            num(r.wall_time_secs),
            r.trace_file.clone().unwrap_or_default(),
            r.error.clone().unwrap_or_default(),
        ];
        rec.extend(padded(&r.ray, m));
        rec.extend(padded(&r.lambda, m));
        rec.extend(padded(&r.objectives, m));
        rec.extend(padded(&r.x, q));
        w.write_record(&rec).map_err(io)?;
    }
    w.flush().map_err(|e| BenchError::io(path, e))
}

fn write_trajectories(path: &Path, runs: &[RunRecord], traces: &[Option<SolveTrace>], m: usize) -> Result<()> {
    let io = |e: csv::Error| BenchError::io(path, e.into());
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    let mut header = vec!["run_id".to_string(), "iter".to_string()];
    header.extend((1..=m).map(|i| format!("F{i}")));
    w.write_record(&header).map_err(io)?;
    for (run, trace) in runs.iter().zip(traces) {
        for row in trace.iter().flat_map(|t| &t.rows) {
            let mut rec = vec![run.run_id.to_string(), row.iter.to_string()];
            rec.extend(row.objectives.iter().map(|v| num(*v)));
            w.write_record(&rec).map_err(io)?;
        }
    }
    w.flush().map_err(|e| BenchError::io(path, e))
}

fn write_front(path: &Path, spec: &ExperimentSpec, problem: &MOProblem) -> Result<()> {
    let io = |e: csv::Error| BenchError::io(path, e.into());
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    let (m, q) = (problem.num_objectives(), problem.dim());
    let mut header: Vec<String> = (1..=m).map(|i| format!("F{i}")).collect();
    header.extend((1..=q).map(|i| format!("x{i}")));
    w.write_record(&header).map_err(io)?;
    for x in spec.problem.pareto_set_samples(problem, 2001) {
        let mut rec: Vec<String> = problem.objectives(&x).iter().map(|v| num(*v)).collect();
        rec.extend(x.iter().map(|v| num(*v)));
        w.write_record(&rec).map_err(io)?;
    }
    w.flush().map_err(|e| BenchError::io(path, e))
}
