use std::fs;
use std::path::Path;

use foops::solver::Initializer;
use foops::SolverConfig;
use foops_bench::config::{LsRun, PreferenceList};
use foops_bench::{
    compare_methods, compare_reports, run_experiment, BenchError, ExperimentSpec, MethodSpec, ProblemSpec,
};

fn spec_in(dir: &Path, problem: ProblemSpec) -> ExperimentSpec {
    ExperimentSpec { output: dir.to_path_buf(), ..ExperimentSpec::new(problem) }
}

fn small_foops(t_max: usize) -> MethodSpec {
    MethodSpec::Foops(SolverConfig { t_max, ..SolverConfig::default() })
}

fn read_rows(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(str::to_string).collect();
    let rows = r.records().map(|rec| rec.unwrap().iter().map(str::to_string).collect()).collect();
    (header, rows)
}

fn column(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap_or_else(|| panic!("missing column {name}"))
}

#[test]
fn run_writes_all_outputs_and_summary_matches_traces() {
    let dir = tempfile::tempdir().unwrap();
    let spec = ExperimentSpec {
        repeats: 2,
        method: small_foops(60),
        ..spec_in(dir.path(), ProblemSpec::Example1 { q: 3 })
    };
    let report = run_experiment(&spec).unwrap();
    assert_eq!(report.runs.len(), 10);
    assert_eq!(report.failures(), 0);
    for f in ["experiment.toml", "summary.csv", "summary.json", "trajectories.csv", "front.csv"] {
        assert!(dir.path().join(f).is_file(), "{f} missing");
    }

    let (sh, srows) = read_rows(&dir.path().join("summary.csv"));
    assert_eq!(&sh[..3], ["run_id", "method", "preference"]);
    assert_eq!(srows.len(), 10);
    for (run, srow) in report.runs.iter().zip(&srows) {
        let (th, trows) = read_rows(&dir.path().join(run.trace_file.as_ref().unwrap()));
        let last = trows.last().unwrap();
        for name in ["f0", "merit_gap", "F1", "F2", "x1", "x2", "x3"] {
            assert_eq!(last[column(&th, name)], srow[column(&sh, name)], "column {name}");
        }
        assert_eq!(last[column(&th, "iter")], srow[column(&sh, "iterations")]);
        assert_eq!(run.iterations, 60);
    }

    // All runs of one repeat share the hypervolume of their final points.
    for r in &report.runs {
        assert_eq!(r.hypervolume, report.hypervolume_by_repeat[r.repeat]);
        assert!(r.hypervolume > 0.0 && r.hypervolume < 1.0);
    }

    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(json["schema"], "foops-summary/1");
    assert_eq!(json["runs"].as_array().unwrap().len(), 10);

    let (fh, frows) = read_rows(&dir.path().join("front.csv"));
    assert_eq!(&fh[..2], ["F1", "F2"]);
    assert!(frows.len() > 100);
    let (jh, jrows) = read_rows(&dir.path().join("trajectories.csv"));
    assert_eq!(jh, ["run_id", "iter", "F1", "F2"]);
    assert_eq!(jrows.len(), 10 * 61);
}

#[test]
fn identical_configs_give_identical_traces() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let make = |dir: &Path| ExperimentSpec {
        init: Initializer::Fixed { x0: vec![0.35, -0.2, 0.4] },
        method: small_foops(100),
        ..spec_in(dir, ProblemSpec::Example1 { q: 3 })
    };
    let ra = run_experiment(&make(a.path())).unwrap();
    run_experiment(&make(b.path())).unwrap();
    for run in &ra.runs {
        let rel = run.trace_file.as_ref().unwrap();
        assert_eq!(fs::read(a.path().join(rel)).unwrap(), fs::read(b.path().join(rel)).unwrap());
    }
    assert_eq!(
        fs::read(a.path().join("trajectories.csv")).unwrap(),
        fs::read(b.path().join("trajectories.csv")).unwrap()
    );
}

#[test]
fn unwritable_output_fails_before_solving() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, b"x").unwrap();
    let spec = spec_in(&blocker.join("out"), ProblemSpec::Fig2);
    let err = run_experiment(&spec).unwrap_err();
    assert!(matches!(err, BenchError::Io { .. }), "{err}");
    assert_eq!(err.exit_code(), 2);
}

#[test]
fn failed_runs_are_recorded_without_aborting() {
    let dir = tempfile::tempdir().unwrap();
    let spec = ExperimentSpec {
        preferences: PreferenceList { rays: vec![vec![1.0, 1.0], vec![1.0, 3.0]], fan: None },
        init: Initializer::Fixed { x0: vec![0.9] },
        method: MethodSpec::Ls { lambda: vec![0.5, 0.5], run: LsRun { alpha: 50.0, ..LsRun::default() } },
        ..spec_in(dir.path(), ProblemSpec::QuadraticPair)
    };
    let report = run_experiment(&spec).unwrap();
    assert_eq!(report.runs.len(), 2);
    assert_eq!(report.failures(), 2);
    assert!(report.runs.iter().all(|r| r.status == "diverged" && r.error.is_some()));
    assert!(dir.path().join("summary.csv").is_file());
}

#[test]
fn comparing_a_method_with_itself_gives_identical_columns() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let make = |dir: &Path| ExperimentSpec {
        name: "same".into(),
        // beta = 1 / L_h for the quadratic pair at l = 1, tau = 0.01.
        method: MethodSpec::Foops(SolverConfig { t_max: 50, alpha: 0.05, beta: 1.0 / 403.0, ..SolverConfig::default() }),
        ..spec_in(dir, ProblemSpec::QuadraticPair)
    };
    let (table, reports) = compare_methods(&[make(a.path()), make(b.path())]).unwrap();
    assert_eq!(table.rows.len(), 2);
    let strip = |mut r: foops_bench::compare::ComparisonRow| {
        r.experiment.clear();
        format!("{r:?}")
    };
    assert_eq!(strip(table.rows[0].clone()), strip(table.rows[1].clone()));

    assert_eq!(table.rows[0].failures, 0);
    assert!(table.rows[0].mean_f0.is_finite());

    let single = compare_reports(&reports[..1]);
    assert_eq!(format!("{:?}", single.rows), format!("{:?}", &table.rows[..1]));
    table.write_csv(&a.path().join("comparison.csv")).unwrap();
}

#[test]
fn foops_beats_the_ls_sweep_on_preference_violation() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let foops = ExperimentSpec {
        name: "foops".into(),
        seed: 1,
        ..spec_in(a.path(), ProblemSpec::Example1 { q: 20 })
    };
    let ls = ExperimentSpec {
        name: "ls".into(),
        method: MethodSpec::LsSweep { n_weights: 101, run: LsRun::default() },
        output: b.path().to_path_buf(),
        ..foops.clone()
    };
    let (table, _) = compare_methods(&[foops, ls]).unwrap();
    let (f_rows, l_rows) = table.rows.split_at(5);
    for (f, l) in f_rows.iter().zip(l_rows) {
        assert_eq!(f.preference, l.preference);
        assert!(
            f.min_preference_violation < l.min_preference_violation,
            "preference {:?}: foops {} vs ls {}",
            f.preference,
            f.min_preference_violation,
            l.min_preference_violation
        );
    }
}
