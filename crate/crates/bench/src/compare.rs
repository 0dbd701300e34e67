//! Head-to-head tables across experiments that share a problem and
//! preference set.

use std::path::Path;

use serde::Serialize;

use crate::config::ExperimentSpec;
use crate::error::{BenchError, Result};
use crate::runner::{run_experiment, ExperimentReport};

pub const COMPARISON_COLUMNS: [&str; 12] = [
    "experiment",
    "method",
    "preference",
    "runs",
    "failures",
    "min_preference_violation",
    "mean_preference_violation",
    "min_merit_gap",
    "mean_merit_gap",
    "min_f0",
    "mean_f0",
    "mean_hypervolume",
];

/// One line per experiment and preference. Merit gaps are the certified
/// post-hoc values, so methods without a merit trace are scored alike.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub experiment: String,
    pub method: String,
    pub preference: Option<usize>,
    pub runs: usize,
    pub failures: usize,
    pub min_preference_violation: f64,
    pub mean_preference_violation: f64,
    pub min_merit_gap: f64,
    pub mean_merit_gap: f64,
    pub min_f0: f64,
    pub mean_f0: f64,
    pub mean_hypervolume: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonTable {
    pub rows: Vec<ComparisonRow>,
}

impl ComparisonTable {
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let io = |e: csv::Error| BenchError::io(path, e.into());
        let mut w = csv::Writer::from_path(path).map_err(io)?;
        w.write_record(COMPARISON_COLUMNS).map_err(io)?;
        for r in &self.rows {
            w.write_record([
                r.experiment.clone(),
                r.method.clone(),
                r.preference.map(|p| p.to_string()).unwrap_or_default(),
                r.runs.to_string(),
                r.failures.to_string(),
                r.min_preference_violation.to_string(),
                r.mean_preference_violation.to_string(),
                r.min_merit_gap.to_string(),
                r.mean_merit_gap.to_string(),
                r.min_f0.to_string(),
                r.mean_f0.to_string(),
                r.mean_hypervolume.to_string(),
            ])
            .map_err(io)?;
        }
        w.flush().map_err(|e| BenchError::io(path, e))
    }
}

/// Errors unless every spec has the same problem and the same resolved rays.
pub fn check_comparable(specs: &[ExperimentSpec]) -> Result<()> {
    let Some(first) = specs.first() else {
        return Err(BenchError::InvalidComparison("no experiments given".into()));
    };
    let rays = |s: &ExperimentSpec| -> Result<Vec<Vec<f64>>> {
        Ok(s.preferences.resolve()?.iter().map(|p| p.ray().to_vec()).collect())
    };
    let reference = rays(first)?;
    for s in &specs[1..] {
        if s.problem != first.problem {
            return Err(BenchError::InvalidComparison(format!(
                "{} uses {:?} but {} uses {:?}",
                s.name, s.problem, first.name, first.problem
            )));
        }
        if rays(s)? != reference {
            return Err(BenchError::InvalidComparison(format!(
                "{} and {} use different preferences",
                s.name, first.name
            )));
        }
    }
    Ok(())
}

/// Runs each experiment and tabulates the results.
pub fn compare_methods(specs: &[ExperimentSpec]) -> Result<(ComparisonTable, Vec<ExperimentReport>)> {
    check_comparable(specs)?;
    for s in specs {
        s.validate()?;
    }
    let reports = specs.iter().map(run_experiment).collect::<Result<Vec<_>>>()?;
    Ok((compare_reports(&reports), reports))
}

pub fn compare_reports(reports: &[ExperimentReport]) -> ComparisonTable {
    let mut rows = Vec::new();
    for report in reports {
        let mut prefs: Vec<Option<usize>> = report.runs.iter().map(|r| r.preference).collect();
        prefs.dedup();
        prefs.sort();
        prefs.dedup();
        for pref in prefs {
            let runs: Vec<_> = report.runs.iter().filter(|r| r.preference == pref).collect();
            let ok: Vec<_> = runs.iter().filter(|r| !r.failed()).collect();
            let stat = |f: &dyn Fn(&crate::runner::RunRecord) -> f64| {
                let vals: Vec<f64> = ok.iter().map(|r| f(r)).filter(|v| v.is_finite()).collect();
                if vals.is_empty() {
                    (f64::NAN, f64::NAN)
                } else {
                    let min = vals.iter().copied().fold(f64::INFINITY, f64::min);
                    (min, vals.iter().sum::<f64>() / vals.len() as f64)
                }
            };
            let (min_pv, mean_pv) = stat(&|r| r.preference_violation);
            let (min_gap, mean_gap) = stat(&|r| r.merit_gap_certified);
            let (min_f0, mean_f0) = stat(&|r| r.f0);
            let (_, mean_hv) = stat(&|r| r.hypervolume);
            rows.push(ComparisonRow {
                experiment: report.name.clone(),
                method: report.method.clone(),
                preference: pref,
                runs: runs.len(),
                failures: runs.len() - ok.len(),
                min_preference_violation: min_pv,
                mean_preference_violation: mean_pv,
                min_merit_gap: min_gap,
                mean_merit_gap: mean_gap,
                min_f0,
                mean_f0,
                mean_hypervolume: mean_hv,
            });
        }
    }
    ComparisonTable { rows }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{PreferenceList, ProblemSpec};

    #[test]
    fn mismatched_experiments_are_rejected() {
        let a = ExperimentSpec::new(ProblemSpec::Fig2);
        let b = ExperimentSpec::new(ProblemSpec::QuadraticPair);
        assert!(matches!(check_comparable(&[a.clone(), b]), Err(BenchError::InvalidComparison(_))));
        let c = ExperimentSpec {
            preferences: PreferenceList { rays: vec![vec![1.0, 2.0]], fan: None },
            ..a.clone()
        };
        assert!(matches!(check_comparable(&[a.clone(), c]), Err(BenchError::InvalidComparison(_))));
        assert!(check_comparable(&[a.clone(), a]).is_ok());
        assert!(check_comparable(&[]).is_err());
    }
}
