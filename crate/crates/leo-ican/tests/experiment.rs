use leo_ican::experiment::{realize, run_seed};
use leo_ican::{emit_reports, run_experiment, ExperimentConfig, SchemeId};
use leo_ican_core::metrics::sum_rate;
use leo_ican_core::selection::{cfg_selection, gdop_greedy_outcome};

fn lines(path: &std::path::Path) -> Vec<String> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(str::to_string)
        .collect()
}

fn fast_config() -> ExperimentConfig {
    let mut cfg = ExperimentConfig::default();
    cfg.schemes = vec![SchemeId::BASELINE_1, SchemeId::BASELINE_2];
    cfg
}

#[test]
fn single_run_matches_direct_computation() {
    let cfg = fast_config();
    let report = run_experiment(&cfg, &[6]).unwrap();
    assert!(report.failures.is_empty());
    let (scenario, channels) = realize(&cfg, 6).unwrap();
    for run in &report.runs {
        let inner = cfg.beamforming(run.scheme.beamforming);
        let direct = cfg_selection(&scenario, &channels, &inner, &cfg.selection_params()).unwrap();
        assert_eq!(run.coalitions, direct.structure.coalitions);
        let assignment = direct.structure.assignment(scenario.satellite_count());
        let radio = &scenario.radio;
        let u = sum_rate(
            &channels,
            &direct.beams,
            &assignment,
            radio.bandwidth_hz,
            radio.noise_power_w,
        )
        .unwrap();
        assert!((run.sum_rate - u).abs() <= 1e-9 * u);
        let per_ue: f64 = run.per_ue_rate.iter().sum();
        assert!((per_ue - run.sum_rate).abs() <= 1e-9 * run.sum_rate);
        assert_eq!(
            report.summary_for(run.scheme).unwrap().mean_sum_rate,
            run.sum_rate
        );
    }
}

#[test]
fn schemes_share_the_realization() {
    let mut cfg = ExperimentConfig::default();
    cfg.schemes = vec![SchemeId::PROPOSAL, SchemeId::BASELINE_3];
    let runs = run_seed(&cfg, 2).unwrap();
    assert_eq!(runs.len(), 2);
    assert_eq!(runs[0].initial_utility, runs[1].initial_utility);
    assert!((runs[1].sum_rate - runs[1].initial_utility).abs() <= 1e-9 * runs[1].sum_rate);
    assert!(runs[0].sum_rate >= runs[0].initial_utility * (1.0 - 1e-9));

    let (scenario, channels) = realize(&cfg, 2).unwrap();
    let greedy = gdop_greedy_outcome(
        &scenario,
        &channels,
        &cfg.beamforming(leo_ican::BeamformingKind::Dc),
        &cfg.selection_params(),
    )
    .unwrap();
    assert_eq!(greedy.structure.coalitions, runs[1].coalitions);
}

#[test]
fn summary_statistics_over_seeds() {
    let mut cfg = fast_config();
    cfg.schemes = vec![SchemeId::BASELINE_1];
    let report = run_experiment(&cfg, &[0, 1, 2]).unwrap();
    let rates: Vec<f64> = report.runs.iter().map(|r| r.sum_rate).collect();
    assert_eq!(
        report.runs.iter().map(|r| r.seed).collect::<Vec<_>>(),
        vec![0, 1, 2]
    );
    let mean = rates.iter().sum::<f64>() / 3.0;
    let var = rates.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / 2.0;
    let s = report.summary_for(SchemeId::BASELINE_1).unwrap();
    assert_eq!(s.seeds, 3);
    assert!((s.mean_sum_rate - mean).abs() <= 1e-12 * mean);
    assert!((s.std_sum_rate - var.sqrt()).abs() <= 1e-9 * var.sqrt().max(1.0));
}

#[test]
fn empty_seed_list_writes_headers_only() {
    let report = run_experiment(&fast_config(), &[]).unwrap();
    let dir = tempfile::tempdir().unwrap();
    emit_reports(&report, dir.path()).unwrap();
    for name in ["per_ue.csv", "dc_trace.csv", "switches.csv", "failures.csv"] {
        assert_eq!(lines(&dir.path().join(name)).len(), 1, "{name}");
    }
    let summary = lines(&dir.path().join("summary.csv"));
    assert!(summary.len() <= 3);
    assert!(summary[0].starts_with("scheme,label,seeds"));
}

#[test]
fn one_seed_one_scheme_row_counts() {
    let mut cfg = fast_config();
    cfg.schemes = vec![SchemeId::BASELINE_1];
    cfg.output.beams = true;
    let report = run_experiment(&cfg, &[4]).unwrap();
    let dir = tempfile::tempdir().unwrap();
    emit_reports(&report, dir.path()).unwrap();
    let per_ue = lines(&dir.path().join("per_ue.csv"));
    assert_eq!(per_ue.len(), 1 + cfg.scenario.cells);
    assert!(per_ue[1].starts_with("cfg:mrt,4,0,"));
    let beams = lines(&dir.path().join("beams.csv"));
    let n = cfg.radio.antennas_x * cfg.radio.antennas_y;
    assert_eq!(
        beams.len(),
        1 + cfg.scenario.cells * cfg.selection.serving * n
    );
    let switches = lines(&dir.path().join("switches.csv"));
    assert_eq!(switches.len(), 1 + report.runs[0].switches.len());
    assert!(dir.path().join("summary.txt").exists());
}

#[test]
fn infeasible_threshold_is_recorded_and_excluded() {
    let mut cfg = fast_config();
    cfg.selection.gdop_threshold = 1.0;
    let report = run_experiment(&cfg, &[0, 1]).unwrap();
    assert!(report.runs.is_empty());
    assert_eq!(report.failures.len(), 2);
    assert!(report.summary.iter().all(|s| s.seeds == 0));
    let dir = tempfile::tempdir().unwrap();
    emit_reports(&report, dir.path()).unwrap();
    assert_eq!(lines(&dir.path().join("failures.csv")).len(), 3);
}

#[test]
fn unwritable_output_fails() {
    let report = run_experiment(&fast_config(), &[]).unwrap();
    let file = tempfile::NamedTempFile::new().unwrap();
    assert!(emit_reports(&report, &file.path().join("sub")).is_err());
}
