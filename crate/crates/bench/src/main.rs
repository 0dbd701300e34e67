use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use foops_bench::config::{parse_problem, LsRun};
use foops_bench::surface::{merit_surface, write_surface_csv};
use foops_bench::{compare_methods, run_experiment, BenchError, ExperimentSpec, MethodSpec, Overrides, Result};

#[derive(Parser)]
#[command(name = "foops", version, about = "Preference-guided multi-objective optimization experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment.
    Run(RunArgs),
    /// Linear-scalarization weight sweep.
    Sweep {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, default_value_t = 101)]
        n_weights: usize,
    },
    /// Run several experiments on the same problem and tabulate them.
    Compare {
        /// Experiment config files (TOML); give the flag once per file.
        #[arg(long = "config", required = true)]
        configs: Vec<PathBuf>,
        /// Directory for comparison.csv.
        #[arg(long, default_value = "results/comparison")]
        out: PathBuf,
    },
    /// Dump v_{l,tau}(x) and the grid merit of the fig2 problem.
    MeritSurface {
        #[arg(long, default_value = "results/merit_surface.csv")]
        out: PathBuf,
        #[arg(long = "l", value_delimiter = ',', default_values_t = [0.0, 0.5, 2.0])]
        ls: Vec<f64>,
        #[arg(long = "tau", value_delimiter = ',', default_values_t = [0.01, 0.1])]
        taus: Vec<f64>,
        #[arg(long, default_value_t = 301)]
        points: usize,
        #[arg(long, default_value_t = -1.5, allow_hyphen_values = true)]
        lo: f64,
        #[arg(long, default_value_t = 1.5, allow_hyphen_values = true)]
        hi: f64,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Experiment config (TOML). Without it, defaults for --problem are used.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    problem: Option<String>,
    #[arg(long)]
    q: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// foops, ls or ls_sweep.
    #[arg(long)]
    method: Option<String>,
    #[arg(long)]
    gamma0: Option<f64>,
    #[arg(long)]
    gamma_step: Option<f64>,
    #[arg(long)]
    gamma_max: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    /// Inner steps per outer iteration.
    #[arg(long = "K")]
    k: Option<usize>,
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long = "l")]
    l: Option<f64>,
    #[arg(long)]
    theta: Option<f64>,
    /// Stopping threshold (squared gradient mapping for foops).
    #[arg(long)]
    eps: Option<f64>,
}

impl RunArgs {
    fn spec(&self) -> Result<ExperimentSpec> {
        let mut spec = match &self.config {
            Some(path) => ExperimentSpec::from_file(path)?,
            None => {
                let name = self.problem.as_deref().unwrap_or("example1");
                ExperimentSpec::new(parse_problem(name, self.q)?)
            }
        };
        let overrides = Overrides {
            problem: self.problem.clone(),
            q: self.q,
            seed: self.seed,
            out: self.out.clone(),
            method: self.method.clone(),
            gamma0: self.gamma0,
            gamma_step: self.gamma_step,
            gamma_max: self.gamma_max,
            alpha: self.alpha,
            beta: self.beta,
            k: self.k,
            tau: self.tau,
            l: self.l,
            theta: self.theta,
            eps: self.eps,
        };
        overrides.apply(&mut spec)?;
        Ok(spec)
    }
}

fn run(spec: &ExperimentSpec) -> Result<()> {
    let report = run_experiment(spec)?;
    for r in &report.runs {
        println!(
            "run {:>4} pref {:>2} repeat {:>2} {:<13} f0 {:.3e} gap {:.3e} |H|^2 {:.3e}",
            r.run_id,
            r.preference.map(|p| p.to_string()).unwrap_or_else(|| "-".into()),
            r.repeat,
            r.status,
            r.f0,
            r.merit_gap_certified,
            r.preference_violation
        );
    }
    println!("results written to {}", report.output_dir.display());
    match report.failures() {
        0 => Ok(()),
        failed => Err(BenchError::RunsFailed { failed, total: report.runs.len() }),
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run(args) => run(&args.spec()?),
        Command::Sweep { run: args, n_weights } => {
            let mut spec = args.spec()?;
            if !matches!(spec.method, MethodSpec::LsSweep { .. }) {
                let base = match &spec.method {
                    MethodSpec::Ls { run, .. } => *run,
                    _ => LsRun::default(),
                };
                let mut run = base;
                if let Some(a) = args.alpha {
                    run.alpha = a;
                }
                spec.method = MethodSpec::LsSweep { n_weights, run };
            } else if let MethodSpec::LsSweep { n_weights: n, .. } = &mut spec.method {
                *n = n_weights;
            }
            run(&spec)
        }
        Command::Compare { configs, out } => {
            let specs = configs
                .iter()
                .map(|p| ExperimentSpec::from_file(p))
                .collect::<Result<Vec<_>>>()?;
            let (table, _) = compare_methods(&specs)?;
            std::fs::create_dir_all(&out).map_err(|e| BenchError::io(&out, e))?;
            let path = out.join("comparison.csv");
            table.write_csv(&path)?;
            for row in &table.rows {
                println!(
                    "{:<20} {:<9} pref {:>2}  min |H|^2 {:.3e}  mean gap {:.3e}  mean HV {:.4}",
                    row.experiment,
                    row.method,
                    row.preference.map(|p| p.to_string()).unwrap_or_else(|| "-".into()),
                    row.min_preference_violation,
                    row.mean_merit_gap,
                    row.mean_hypervolume
                );
            }
            println!("table written to {}", path.display());
            Ok(())
        }
        Command::MeritSurface { out, ls, taus, points, lo, hi } => {
            let rows = merit_surface(&ls, &taus, lo, hi, points)?;
            if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir).map_err(|e| BenchError::io(dir, e))?;
            }
            write_surface_csv(&out, &rows)?;
            println!("{} rows written to {}", rows.len(), out.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
