//! Inspection dumps of a single seed: scenario table, channels and solver traces.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use leo_ican_core::beamforming::mrt_beams;
use leo_ican_core::convex::{solve_surrogate, SolverOptions, SurrogateProblem};
use leo_ican_core::geometry::elevation;
use leo_ican_core::math::linear_to_db;
use leo_ican_core::selection::gdop_greedy_selection;
use leo_ican_core::{ChannelSet, LinkAssignment, Scenario};

use crate::config::ExperimentConfig;
use crate::HarnessError;

/// Plain-text table of satellite and user positions.
pub fn scenario_table(scenario: &Scenario) -> String {
    let mut out = String::new();
    let r = &scenario.radio;
    let _ = writeln!(out, "seed {}", scenario.seed);
    let _ = writeln!(
        out,
        "frequency {} Hz, bandwidth {} Hz, beam power {} W, noise {} W, atmosphere gain {}, array {}x{}",
        r.frequency_hz, r.bandwidth_hz, r.beam_power_w, r.noise_power_w, r.atmosphere_gain, r.antennas_x, r.antennas_y
    );
    let _ = writeln!(out);
    let _ = writeln!(
        out,
        "{:<5} {:>3} {:>16} {:>16} {:>16} {:>14}",
        "kind", "id", "x_m", "y_m", "z_m", "elev_center_deg"
    );
    for s in &scenario.satellites {
        let p = s.position;
        let el = elevation(&scenario.center, &p).to_degrees();
        let _ = writeln!(
            out,
            "{:<5} {:>3} {:>16.3} {:>16.3} {:>16.3} {:>14.3}",
            "sat", s.id, p.x, p.y, p.z, el
        );
    }
    for (c, p) in scenario.ues.iter().enumerate() {
        let _ = writeln!(
            out,
            "{:<5} {:>3} {:>16.3} {:>16.3} {:>16.3} {:>14}",
            "ue", c, p.x, p.y, p.z, ""
        );
    }
    out
}

/// Writes `channels.csv`: `sat,ue,path_gain_db,theta_x,theta_y,phase_rad,element,re,im`.
pub fn write_channels(channels: &ChannelSet, path: &Path) -> Result<(), HarnessError> {
    let mut w =
        csv::Writer::from_path(path).map_err(|e| HarnessError::Csv(path.to_path_buf(), e))?;
    let err = |e| HarnessError::Csv(path.to_path_buf(), e);
    w.write_record([
        "sat",
        "ue",
        "path_gain_db",
        "theta_x",
        "theta_y",
        "phase_rad",
        "element",
        "re",
        "im",
    ])
    .map_err(err)?;
    for s in 0..channels.satellite_count() {
        for c in 0..channels.ue_count() {
            let ch = channels.get(s, c);
            for (k, v) in ch.h.iter().enumerate() {
                w.write_record(&[
                    s.to_string(),
                    c.to_string(),
                    linear_to_db(ch.path_gain).to_string(),
                    ch.steering.0.to_string(),
                    ch.steering.1.to_string(),
                    ch.phase.to_string(),
                    k.to_string(),
                    v.re.to_string(),
                    v.im.to_string(),
                ])
                .map_err(err)?;
            }
        }
    }
    w.flush().map_err(|e| HarnessError::io(path, e))
}

/// Writes `solver_trace.csv`: the inner solver's first subproblem (anchored
/// at the matched-filter point) for every satellite under the minimum-GDOP
/// assignment. Columns `sat,ues,iteration,objective_bps,residual`.
pub fn write_solver_traces(
    config: &ExperimentConfig,
    scenario: &Scenario,
    channels: &ChannelSet,
    path: &Path,
) -> Result<(), HarnessError> {
    let serving = config.selection.serving;
    let coalitions = (0..scenario.ue_count())
        .map(|c| gdop_greedy_selection(scenario, c, serving).map(|(s, _)| s))
        .collect::<Result<Vec<_>, _>>()?;
    let assignment = LinkAssignment::from_coalitions(scenario.satellite_count(), &coalitions);
    let radio = &scenario.radio;
    let options = SolverOptions {
        record_trace: true,
        ..config.dc_options().solver
    };
    let mut w =
        csv::Writer::from_path(path).map_err(|e| HarnessError::Csv(path.to_path_buf(), e))?;
    let err = |e| HarnessError::Csv(path.to_path_buf(), e);
    w.write_record(["sat", "ues", "iteration", "objective_bps", "residual"])
        .map_err(err)?;
    for s in 0..scenario.satellite_count() {
        let ues = assignment.served_ues(s);
        if ues.is_empty() {
            continue;
        }
        let h = channels.satellite_channels(s, &ues);
        let beams = mrt_beams(&h, radio.beam_power_w)
            .map_err(|c| leo_ican_core::Error::ZeroChannel { sat: s, ue: ues[c] })?;
        let anchor = beams.iter().map(|b| b * b.adjoint()).collect();
        let problem = SurrogateProblem::new(
            h,
            anchor,
            radio.noise_power_w,
            radio.bandwidth_hz,
            radio.beam_power_w,
        )?;
        let solution = solve_surrogate(&problem, &options)?;
        let label = ues
            .iter()
            .map(|u| u.to_string())
            .collect::<Vec<_>>()
            .join(" ");
        for p in &solution.trace {
            w.write_record(&[
                s.to_string(),
                label.clone(),
                p.iteration.to_string(),
                p.objective.to_string(),
                p.residual.to_string(),
            ])
            .map_err(err)?;
        }
    }
    w.flush().map_err(|e| HarnessError::io(path, e))
}

/// Writes `scenario.txt`, `channels.csv` and `solver_trace.csv` for one seed.
pub fn inspect(
    config: &ExperimentConfig,
    seed: u64,
    dir: &Path,
) -> Result<Vec<PathBuf>, HarnessError> {
    fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    let (scenario, channels) = crate::experiment::realize(config, seed)?;
    let table = dir.join("scenario.txt");
    fs::write(&table, scenario_table(&scenario)).map_err(|e| HarnessError::io(&table, e))?;
    let ch = dir.join("channels.csv");
    write_channels(&channels, &ch)?;
    let trace = dir.join("solver_trace.csv");
    write_solver_traces(config, &scenario, &channels, &trace)?;
    Ok(vec![table, ch, trace])
}
