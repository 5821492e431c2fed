//! Experiment orchestration for the CLI: spec files and presets, running
//! several solver configurations on one problem, and CSV output.
//!
//! CSV schemas:
//!
//! - per-run trace `<label>.trace.csv`: `n,tol,delta,dist,elapsed_s`
//! - summary `summary.csv`: `algorithm,iterations,final_tol,final_dist,wall_s,snr`
//!
//! Floats are written with 17 significant digits; empty fields mean "not
//! applicable".

mod builtins;
mod spec;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::thread;

pub use builtins::{builtin, BUILTINS};
pub use spec::{parse_vector, set_run_key, BuiltProblem, ExperimentSpec, ProblemSpec, RunSpec};

use crate::error::{Error, Result};
use crate::problems::{snr, ControlProblem};
use crate::solvers::{run, RunRecord, Termination};
use crate::space::Vector;

/// One row per configured run.
#[derive(Debug, Clone)]
pub struct ReportRow {
    pub label: String,
    pub algorithm: String,
    pub iterations: usize,
    pub wall_s: f64,
    pub final_tol: Option<f64>,
    pub final_dist: Option<f64>,
    pub snr: Option<f64>,
    pub terminated_by: Termination,
}

#[derive(Debug, Clone)]
pub struct ComparisonReport {
    pub experiment: String,
    pub rows: Vec<ReportRow>,
    /// The full record behind each row, in the same order.
    pub records: Vec<RunRecord>,
    pub files: Vec<PathBuf>,
}

impl ComparisonReport {
    pub fn any_numerical_failure(&self) -> bool {
        self.rows.iter().any(|r| matches!(r.terminated_by, Termination::NumericalFailure { .. }))
    }

    pub fn row(&self, label: &str) -> Option<(&ReportRow, &RunRecord)> {
        let i = self.rows.iter().position(|r| r.label == label)?;
        Some((&self.rows[i], &self.records[i]))
    }

    /// Fixed-width table for terminals.
    pub fn render(&self) -> String {
        let mut out = format!("experiment {}\n", self.experiment);
        out.push_str(&format!(
            "{:<24} {:>10} {:>12} {:>12} {:>10} {:>9}  {}\n",
            "run", "iterations", "final_tol", "final_dist", "wall_s", "snr_db", "stop"
        ));
        let opt = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.4e}"));
        for r in &self.rows {
            let stop = match &r.terminated_by {
                Termination::NumericalFailure { iteration, detail } => format!("numerical failure at {iteration}: {detail}"),
                t => t.as_str().to_string(),
            };
            out.push_str(&format!(
                "{:<24} {:>10} {:>12} {:>12} {:>10.4} {:>9}  {}\n",
                r.label,
                r.iterations,
                opt(r.final_tol),
                opt(r.final_dist),
                r.wall_s,
                r.snr.map_or("-".to_string(), |s| format!("{s:.4}")),
                stop
            ));
        }
        out
    }
}

fn fmt_f(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f).unwrap_or_default()
}

fn write_trace(path: &Path, record: &RunRecord) -> Result<()> {
    let mut f = std::io::BufWriter::new(fs::File::create(path)?);
    writeln!(f, "n,tol,delta,dist,elapsed_s")?;
    for k in 0..record.iterations {
        let dist = record.distances.as_ref().map(|d| d[k]);
        writeln!(
            f,
            "{},{},{},{},{}",
            k + 1,
            fmt_f(record.residuals[k]),
            fmt_f(record.deltas[k]),
            fmt_opt(dist),
            fmt_f(record.elapsed[k])
        )?;
    }
    Ok(())
}

fn write_iterates(path: &Path, iterates: &[Vector]) -> Result<()> {
    let mut f = std::io::BufWriter::new(fs::File::create(path)?);
    for (k, w) in iterates.iter().enumerate() {
        let cells: Vec<String> = w.iter().map(|x| fmt_f(*x)).collect();
        writeln!(f, "{},{}", k + 1, cells.join(","))?;
    }
    Ok(())
}

fn write_summary(path: &Path, rows: &[ReportRow]) -> Result<()> {
    let mut f = fs::File::create(path)?;
    writeln!(f, "algorithm,iterations,final_tol,final_dist,wall_s,snr")?;
    for r in rows {
        writeln!(
            f,
            "{},{},{},{},{},{}",
            r.label,
            r.iterations,
            fmt_opt(r.final_tol),
            fmt_opt(r.final_dist),
            fmt_f(r.wall_s),
            fmt_opt(r.snr)
        )?;
    }
    Ok(())
}

fn file_stem(label: &str) -> String {
    label.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '.' { c } else { '_' }).collect()
}

/// Runs every configuration in `spec` on its problem.
///
/// All configurations are validated against the problem before the first
/// run starts. Runs execute on separate threads; a numerical failure ends
/// only that run and is reported in its row. When `spec.out` is set the
/// traces and summary are written there.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ComparisonReport> {
    spec.validate()?;
    let built = spec.problem.build()?;
    let configs: Vec<_> = spec.runs.iter().map(|r| spec.effective_config(r)).collect();
    for (run, cfg) in spec.runs.iter().zip(&configs) {
        cfg.validate_for(&built.problem).map_err(|e| match e {
            Error::InvalidConfig(v) => Error::InvalidConfig(v.into_iter().map(|m| format!("[{}] {m}", run.label)).collect()),
            other => Error::Usage(format!("[{}] {other}", run.label)),
        })?;
    }

    let problem = &built.problem;
    let records: Vec<Result<RunRecord>> = thread::scope(|s| {
        let handles: Vec<_> = configs.iter().map(|cfg| s.spawn(move || run(problem, cfg))).collect();
        handles.into_iter().map(|h| h.join().expect("solver thread panicked")).collect()
    });
    let records = records.into_iter().collect::<Result<Vec<_>>>()?;

    let rows = spec
        .runs
        .iter()
        .zip(&records)
        .map(|(run, rec)| ReportRow {
            label: run.label.clone(),
            algorithm: rec.algorithm.name().to_string(),
            iterations: rec.iterations,
            wall_s: rec.wall_time,
            final_tol: rec.final_residual(),
            final_dist: rec.final_distance(),
            snr: built.reference.as_ref().map(|r| snr(r, &rec.final_iterate).unwrap_or(f64::NAN)),
            terminated_by: rec.terminated_by.clone(),
        })
        .collect::<Vec<_>>();

    let mut report = ComparisonReport { experiment: spec.name.clone(), rows, records, files: Vec::new() };
    if let Some(dir) = &spec.out {
        fs::create_dir_all(dir)?;
        for (row, rec) in report.rows.iter().zip(&report.records) {
            let stem = file_stem(&row.label);
            let path = dir.join(format!("{stem}.trace.csv"));
            write_trace(&path, rec)?;
            report.files.push(path);
            if let Some(its) = &rec.iterates {
                let path = dir.join(format!("{stem}.iterates.csv"));
                write_iterates(&path, its)?;
                report.files.push(path);
            }
            if let Some(control) = &built.control {
                let (c, s) = emit_control_tables(rec, control, dir, &stem)?;
                report.files.extend([c, s]);
            }
        }
        let path = dir.join("summary.csv");
        write_summary(&path, &report.rows)?;
        report.files.push(path);
    }
    Ok(report)
}

/// Writes `<stem>.control.csv` (`t,z0,…`; `K` rows) and `<stem>.state.csv`
/// (`t,x0,…`; `K + 1` rows) for a control-problem run.
pub fn emit_control_tables(record: &RunRecord, problem: &ControlProblem, dir: &Path, stem: &str) -> Result<(PathBuf, PathBuf)> {
    let z = &record.final_iterate;
    if z.dim() != problem.control_dim() {
        return Err(Error::usage(format!(
            "record holds {} controls but the problem has {}",
            z.dim(),
            problem.control_dim()
        )));
    }
    let sol = problem.solution(z.as_slice())?;
    let header = |prefix: &str, n: usize| {
        let cols: Vec<String> = (0..n).map(|i| format!("{prefix}{i}")).collect();
        format!("t,{}", cols.join(","))
    };
    let table = |path: &Path, head: String, rows: &[Vec<f64>]| -> Result<()> {
        let mut f = std::io::BufWriter::new(fs::File::create(path)?);
        writeln!(f, "{head}")?;
        for (t, row) in sol.times.iter().zip(rows) {
            let cells: Vec<String> = row.iter().map(|x| fmt_f(*x)).collect();
            writeln!(f, "{},{}", fmt_f(*t), cells.join(","))?;
        }
        Ok(())
    };
    let control_path = dir.join(format!("{stem}.control.csv"));
    let state_path = dir.join(format!("{stem}.state.csv"));
    table(&control_path, header("z", problem.channels()), &sol.controls)?;
    table(&state_path, header("x", problem.state_dim()), &sol.states)?;
    Ok((control_path, state_path))
}
