//! CSV and text output of an [`ExperimentReport`].
//!
//! Column schemas (rates in bits/s):
//!
//! * `summary.csv`: `scheme,label,seeds,mean_sum_rate_bps,std_sum_rate_bps,mean_accepted_switches`
//! * `per_ue.csv`: `scheme,seed,ue,rate_bps,gdop,satellites` (satellites space-separated)
//! * `dc_trace.csv`: `scheme,seed,sat,ues,iteration,surrogate_bps,sum_rate_bps,change_bps,converged,solver_converged`
//!   (iteration 0 is the initial point and has an empty change)
//! * `switches.csv`: `scheme,seed,pass,ue,candidate,gdop,u_old_bps,u_new_bps,accepted`
//!   (empty `u_new_bps` when the inner scheme could not serve the candidate)
//! * `failures.csv`: `seed,scheme,message`
//! * `beams.csv` (optional): `scheme,seed,sat,ue,element,re,im`
//!
//! Wall-clock times only appear in `summary.txt`, so reruns give
//! byte-identical CSV files.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::experiment::ExperimentReport;
use crate::HarnessError;

fn join(ids: &[usize]) -> String {
    ids.iter()
        .map(|i| i.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

fn writer(dir: &Path, name: &str) -> Result<(csv::Writer<fs::File>, PathBuf), HarnessError> {
    let path = dir.join(name);
    let w = csv::Writer::from_path(&path).map_err(|e| HarnessError::Csv(path.clone(), e))?;
    Ok((w, path))
}

macro_rules! row {
    ($w:expr, $path:expr, [$($field:expr),* $(,)?]) => {
        $w.write_record(&[$($field.to_string()),*]).map_err(|e| HarnessError::Csv($path.clone(), e))?
    };
}

fn flush(mut w: csv::Writer<fs::File>, path: &Path) -> Result<(), HarnessError> {
    w.flush().map_err(|e| HarnessError::io(path, e))
}

/// Writes all report files into `dir` (created if needed). Returns the paths written.
pub fn emit_reports(report: &ExperimentReport, dir: &Path) -> Result<Vec<PathBuf>, HarnessError> {
    fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    let mut written = Vec::new();

    let (mut w, path) = writer(dir, "summary.csv")?;
    row!(
        w,
        path,
        [
            "scheme",
            "label",
            "seeds",
            "mean_sum_rate_bps",
            "std_sum_rate_bps",
            "mean_accepted_switches"
        ]
    );
    for s in &report.summary {
        row!(
            w,
            path,
            [
                s.scheme,
                s.scheme.label(),
                s.seeds,
                s.mean_sum_rate,
                s.std_sum_rate,
                s.mean_switches
            ]
        );
    }
    flush(w, &path)?;
    written.push(path);

    let (mut w, path) = writer(dir, "per_ue.csv")?;
    row!(
        w,
        path,
        ["scheme", "seed", "ue", "rate_bps", "gdop", "satellites"]
    );
    for r in &report.runs {
        for (c, rate) in r.per_ue_rate.iter().enumerate() {
            row!(
                w,
                path,
                [
                    r.scheme,
                    r.seed,
                    c,
                    rate,
                    r.per_ue_gdop[c],
                    join(&r.coalitions[c])
                ]
            );
        }
    }
    flush(w, &path)?;
    written.push(path);

    let (mut w, path) = writer(dir, "dc_trace.csv")?;
    row!(
        w,
        path,
        [
            "scheme",
            "seed",
            "sat",
            "ues",
            "iteration",
            "surrogate_bps",
            "sum_rate_bps",
            "change_bps",
            "converged",
            "solver_converged"
        ]
    );
    for r in &report.runs {
        for t in &r.dc_traces {
            for i in 0..t.trace.sum_rate.len() {
                let change = if i == 0 {
                    String::new()
                } else {
                    t.trace.change[i - 1].to_string()
                };
                row!(
                    w,
                    path,
                    [
                        r.scheme,
                        r.seed,
                        t.sat,
                        join(&t.ues),
                        i,
                        t.trace.surrogate[i],
                        t.trace.sum_rate[i],
                        change,
                        t.converged,
                        t.solver_converged
                    ]
                );
            }
        }
    }
    flush(w, &path)?;
    written.push(path);

    let (mut w, path) = writer(dir, "switches.csv")?;
    row!(
        w,
        path,
        [
            "scheme",
            "seed",
            "pass",
            "ue",
            "candidate",
            "gdop",
            "u_old_bps",
            "u_new_bps",
            "accepted"
        ]
    );
    for r in &report.runs {
        for s in &r.switches {
            let u_new = s.u_new.map(|u| u.to_string()).unwrap_or_default();
            row!(
                w,
                path,
                [
                    r.scheme,
                    r.seed,
                    s.pass,
                    s.ue,
                    join(&s.candidate),
                    s.gdop,
                    s.u_old,
                    u_new,
                    s.accepted
                ]
            );
        }
    }
    flush(w, &path)?;
    written.push(path);

    let (mut w, path) = writer(dir, "failures.csv")?;
    row!(w, path, ["seed", "scheme", "message"]);
    for f in &report.failures {
        row!(
            w,
            path,
            [
                f.seed,
                f.scheme.map(|s| s.to_string()).unwrap_or_default(),
                f.message
            ]
        );
    }
    flush(w, &path)?;
    written.push(path);

    if report.config.output.beams {
        let (mut w, path) = writer(dir, "beams.csv")?;
        row!(
            w,
            path,
            ["scheme", "seed", "sat", "ue", "element", "re", "im"]
        );
        for r in &report.runs {
            for (s, c, beam) in r.beams.iter() {
                for (k, v) in beam.iter().enumerate() {
                    row!(w, path, [r.scheme, r.seed, s, c, k, v.re, v.im]);
                }
            }
        }
        flush(w, &path)?;
        written.push(path);
    }

    let path = dir.join("summary.txt");
    fs::write(&path, text_summary(report)).map_err(|e| HarnessError::io(&path, e))?;
    written.push(path);
    Ok(written)
}

/// Human-readable summary, including timings.
pub fn text_summary(report: &ExperimentReport) -> String {
    let mut out = String::new();
    let radio = report.config.radio_params();
    let _ = writeln!(
        out,
        "{} satellites, {} cells, I = {}, gamma = {}, {}x{} antennas, {} seeds requested, {} failed",
        report.config.scenario.satellites,
        report.config.scenario.cells,
        report.config.selection.serving,
        report.config.selection.gdop_threshold,
        radio.antennas_x,
        radio.antennas_y,
        report.seeds.len(),
        report.failures.len(),
    );
    let _ = writeln!(out);
    let _ = writeln!(
        out,
        "{:<16} {:<11} {:>5} {:>12} {:>12} {:>9} {:>10}",
        "scheme", "label", "seeds", "mean Gbps", "std Gbps", "switches", "time s"
    );
    for s in &report.summary {
        let _ = writeln!(
            out,
            "{:<16} {:<11} {:>5} {:>12.4} {:>12.4} {:>9.1} {:>10.2}",
            s.scheme.to_string(),
            s.scheme.label(),
            s.seeds,
            s.mean_sum_rate / 1e9,
            s.std_sum_rate / 1e9,
            s.mean_switches,
            s.elapsed.as_secs_f64(),
        );
    }
    if !report.failures.is_empty() {
        let _ = writeln!(out);
        for f in &report.failures {
            let scheme = f
                .scheme
                .map(|s| s.to_string())
                .unwrap_or_else(|| "scenario".into());
            let _ = writeln!(
                out,
                "warning: seed {} excluded ({scheme}): {}",
                f.seed, f.message
            );
        }
    }
    let _ = writeln!(out);
    let _ = writeln!(out, "wall clock {:.2} s", report.elapsed.as_secs_f64());
    out
}
