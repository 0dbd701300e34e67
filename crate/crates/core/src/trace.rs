//! Per-iteration solver history and its CSV / JSON serialization.
//!
//! CSV schema (version [`TRACE_SCHEMA`]), one header row then one row per
//! outer iteration:
//!
//! ```text
//! iter,gamma,f0,merit_value,merit_gap,penalty,grad_mapping_norm,inner_iters,inner_residual,F1..FM,x1..xq
//! ```
//!
//! Floats are written in shortest round-trip form, so identical traces give
//! byte-identical files. Columns that do not apply to a method (merit terms
//! for linear scalarization) are written as `NaN`.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::Result;

pub const TRACE_SCHEMA: &str = "foops-trace/1";

pub const FIXED_COLUMNS: [&str; 9] = [
    "iter",
    "gamma",
    "f0",
    "merit_value",
    "merit_gap",
    "penalty",
    "grad_mapping_norm",
    "inner_iters",
    "inner_residual",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    /// Stopping test met with a certified inner solve.
    Converged,
    MaxIter,
    /// Stopping test met, but the last inner residual exceeded the inner
    /// tolerance, so the merit gradient behind the test is inexact.
    InnerWarning,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iter: usize,
    pub x: Vec<f64>,
    pub objectives: Vec<f64>,
    pub f0: f64,
    pub merit_value: f64,
    pub merit_gap: f64,
    pub penalty: f64,
    pub gamma: f64,
    /// `||x - Proj(x - alpha d)|| / alpha` for the update direction `d`.
    pub grad_mapping_norm: f64,
    pub inner_iters: usize,
    pub inner_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveTrace {
    pub method: String,
    pub problem: String,
    pub rows: Vec<TraceRow>,
    pub status: SolveStatus,
    pub wall_time_secs: f64,
}

/// Final-iterate summary. Every number is copied from the last trace row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceSummary {
    pub schema: String,
    pub method: String,
    pub problem: String,
    pub status: SolveStatus,
    pub iterations: usize,
    pub x: Vec<f64>,
    pub objectives: Vec<f64>,
    pub f0: f64,
    pub merit_gap: f64,
    pub grad_mapping_norm: f64,
    pub wall_time_secs: f64,
}

impl SolveTrace {
    pub fn new(method: impl Into<String>, problem: impl Into<String>) -> Self {
        Self {
            method: method.into(),
            problem: problem.into(),
            rows: Vec::new(),
            status: SolveStatus::MaxIter,
            wall_time_secs: 0.0,
        }
    }

    pub fn last(&self) -> Option<&TraceRow> {
        self.rows.last()
    }

    pub fn final_x(&self) -> Option<&[f64]> {
        self.rows.last().map(|r| r.x.as_slice())
    }

    pub fn header(&self) -> Vec<String> {
        let (m, q) = self
            .rows
            .first()
            .map_or((0, 0), |r| (r.objectives.len(), r.x.len()));
        FIXED_COLUMNS
            .iter()
            .map(|c| c.to_string())
            .chain((1..=m).map(|i| format!("F{i}")))
            .chain((1..=q).map(|i| format!("x{i}")))
            .collect()
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(self.header())?;
        for r in &self.rows {
            let mut rec = vec![
                r.iter.to_string(),
                r.gamma.to_string(),
                r.f0.to_string(),
                r.merit_value.to_string(),
                r.merit_gap.to_string(),
                r.penalty.to_string(),
                r.grad_mapping_norm.to_string(),
                r.inner_iters.to_string(),
                r.inner_residual.to_string(),
            ];
            rec.extend(r.objectives.iter().map(f64::to_string));
            rec.extend(r.x.iter().map(f64::to_string));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn summary(&self) -> Option<TraceSummary> {
        let last = self.rows.last()?;
        Some(TraceSummary {
            schema: TRACE_SCHEMA.to_string(),
            method: self.method.clone(),
            problem: self.problem.clone(),
            status: self.status,
            iterations: last.iter,
            x: last.x.clone(),
            objectives: last.objectives.clone(),
            f0: last.f0,
            merit_gap: last.merit_gap,
            grad_mapping_norm: last.grad_mapping_norm,
            wall_time_secs: self.wall_time_secs,
        })
    }

    pub fn write_summary_json<W: Write>(&self, writer: W) -> Result<()> {
        serde_json::to_writer_pretty(writer, &self.summary())?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(iter: usize) -> TraceRow {
        TraceRow {
            iter,
            x: vec![0.1, 0.2],
            objectives: vec![0.5, 0.25],
            f0: 1.0 / 3.0,
            merit_value: -0.006,
            merit_gap: 0.0009,
            penalty: 0.0009,
            gamma: 0.05,
            grad_mapping_norm: 1e-3,
            inner_iters: 100,
            inner_residual: f64::NAN,
        }
    }

    #[test]
    fn csv_header_and_rows() {
        let mut t = SolveTrace::new("foops", "p");
        t.rows = vec![row(0), row(1)];
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "iter,gamma,f0,merit_value,merit_gap,penalty,grad_mapping_norm,inner_iters,inner_residual,F1,F2,x1,x2"
        );
        let first: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(first.len(), 13);
        assert_eq!(first[8], "NaN");
        let f0: f64 = first[2].parse().unwrap();
        assert_eq!(f0, 1.0 / 3.0);
    }

    #[test]
    fn summary_copies_last_row() {
        let mut t = SolveTrace::new("foops", "p");
        assert!(t.summary().is_none());
        t.rows = vec![row(0), row(7)];
        let s = t.summary().unwrap();
        assert_eq!(s.iterations, 7);
        assert_eq!(s.merit_gap, 0.0009);
        assert_eq!(s.schema, TRACE_SCHEMA);
    }
}
