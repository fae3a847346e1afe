//! Monte-Carlo runs: every seed draws one scenario and one channel
//! realization, and every scheme is evaluated on that same draw.

use std::time::{Duration, Instant};

use leo_ican_core::beamforming::{BeamformerSet, DcTrace};
use leo_ican_core::metrics::per_ue_rates;
use leo_ican_core::selection::{
    cfg_selection, gdop_greedy_outcome, SelectionOutcome, SwitchRecord,
};
use leo_ican_core::{generate_scenario, ChannelSet, Scenario};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::{ExperimentConfig, SchemeId, SelectionKind};
use crate::HarnessError;

/// Channel phases come from a separate ChaCha stream of the seed.
const CHANNEL_STREAM: u64 = 1;

/// Scenario and channels of one seed.
pub fn realize(
    config: &ExperimentConfig,
    seed: u64,
) -> Result<(Scenario, ChannelSet), HarnessError> {
    let scenario = generate_scenario(&config.scenario_spec(), seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(CHANNEL_STREAM);
    let channels = ChannelSet::build(&scenario, &mut rng)?;
    Ok((scenario, channels))
}

#[derive(Debug, Clone, PartialEq)]
pub struct DcTraceEntry {
    pub sat: usize,
    pub ues: Vec<usize>,
    pub trace: DcTrace,
    pub converged: bool,
    pub solver_converged: bool,
}

/// One scheme on one seed.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemeRun {
    pub scheme: SchemeId,
    pub seed: u64,
    pub sum_rate: f64,
    pub initial_utility: f64,
    pub per_ue_rate: Vec<f64>,
    pub per_ue_gdop: Vec<f64>,
    pub coalitions: Vec<Vec<usize>>,
    pub switches: Vec<SwitchRecord>,
    pub dc_traces: Vec<DcTraceEntry>,
    pub beams: BeamformerSet,
    pub solves: usize,
    pub elapsed: Duration,
}

impl SchemeRun {
    pub fn accepted_switches(&self) -> usize {
        self.switches.iter().filter(|s| s.accepted).count()
    }
}

/// Runs one scheme on an already realized seed.
pub fn run_scheme(
    config: &ExperimentConfig,
    scheme: SchemeId,
    scenario: &Scenario,
    channels: &ChannelSet,
) -> Result<SchemeRun, HarnessError> {
    let start = Instant::now();
    let inner = config.beamforming(scheme.beamforming);
    let params = config.selection_params();
    let outcome: SelectionOutcome = match scheme.selection {
        SelectionKind::Cfg => cfg_selection(scenario, channels, &inner, &params)?,
        SelectionKind::GdopGreedy => gdop_greedy_outcome(scenario, channels, &inner, &params)?,
    };
    let assignment = outcome.structure.assignment(scenario.satellite_count());
    let radio = &scenario.radio;
    let per_ue_rate = per_ue_rates(
        channels,
        &outcome.beams,
        &assignment,
        radio.bandwidth_hz,
        radio.noise_power_w,
    )?;
    let dc_traces = outcome
        .designs
        .iter()
        .filter_map(|d| {
            d.dc.as_ref().map(|dc| DcTraceEntry {
                sat: d.sat,
                ues: d.ues.clone(),
                trace: dc.trace.clone(),
                converged: dc.converged,
                solver_converged: dc.solver_converged,
            })
        })
        .collect();
    Ok(SchemeRun {
        scheme,
        seed: scenario.seed,
        sum_rate: per_ue_rate.iter().sum(),
        initial_utility: outcome.initial_utility,
        per_ue_rate,
        per_ue_gdop: outcome.structure.gdop,
        coalitions: outcome.structure.coalitions,
        switches: outcome.switches,
        dc_traces,
        beams: outcome.beams,
        solves: outcome.solves,
        elapsed: start.elapsed(),
    })
}

/// All configured schemes on one seed, in configuration order.
pub fn run_seed(config: &ExperimentConfig, seed: u64) -> Result<Vec<SchemeRun>, SeedFailure> {
    let fail = |scheme: Option<SchemeId>, e: HarnessError| SeedFailure {
        seed,
        scheme,
        message: e.to_string(),
    };
    let (scenario, channels) = realize(config, seed).map_err(|e| fail(None, e))?;
    config
        .schemes
        .iter()
        .map(|&scheme| {
            run_scheme(config, scheme, &scenario, &channels).map_err(|e| fail(Some(scheme), e))
        })
        .collect()
}

/// A seed excluded from the aggregates, with the first error it hit.
#[derive(Debug, Clone, PartialEq)]
pub struct SeedFailure {
    pub seed: u64,
    pub scheme: Option<SchemeId>,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchemeSummary {
    pub scheme: SchemeId,
    pub seeds: usize,
    pub mean_sum_rate: f64,
    /// Sample standard deviation; zero for fewer than two seeds.
    pub std_sum_rate: f64,
    pub mean_switches: f64,
    pub elapsed: Duration,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub seeds: Vec<u64>,
    /// Runs of successful seeds, seed-major in seed-list order.
    pub runs: Vec<SchemeRun>,
    pub failures: Vec<SeedFailure>,
    pub summary: Vec<SchemeSummary>,
    pub elapsed: Duration,
}

impl ExperimentReport {
    pub fn summary_for(&self, scheme: SchemeId) -> Option<&SchemeSummary> {
        self.summary.iter().find(|s| s.scheme == scheme)
    }

    pub fn runs_for(&self, scheme: SchemeId) -> impl Iterator<Item = &SchemeRun> {
        self.runs.iter().filter(move |r| r.scheme == scheme)
    }
}

fn summarize(scheme: SchemeId, runs: &[SchemeRun]) -> SchemeSummary {
    let mine: Vec<&SchemeRun> = runs.iter().filter(|r| r.scheme == scheme).collect();
    let n = mine.len();
    let mean = if n == 0 {
        0.0
    } else {
        mine.iter().map(|r| r.sum_rate).sum::<f64>() / n as f64
    };
    let var = if n < 2 {
        0.0
    } else {
        mine.iter()
            .map(|r| (r.sum_rate - mean).powi(2))
            .sum::<f64>()
            / (n - 1) as f64
    };
    SchemeSummary {
        scheme,
        seeds: n,
        mean_sum_rate: mean,
        std_sum_rate: var.sqrt(),
        mean_switches: if n == 0 {
            0.0
        } else {
            mine.iter()
                .map(|r| r.accepted_switches() as f64)
                .sum::<f64>()
                / n as f64
        },
        elapsed: mine.iter().map(|r| r.elapsed).sum(),
    }
}

/// Runs every seed (in parallel) and aggregates over the seeds that
/// succeeded for all schemes.
pub fn run_experiment(
    config: &ExperimentConfig,
    seeds: &[u64],
) -> Result<ExperimentReport, HarnessError> {
    config.validate()?;
    let start = Instant::now();
    let results: Vec<Result<Vec<SchemeRun>, SeedFailure>> = seeds
        .par_iter()
        .map(|&seed| run_seed(config, seed))
        .collect();
    let mut runs = Vec::new();
    let mut failures = Vec::new();
    for r in results {
        match r {
            Ok(mut v) => runs.append(&mut v),
            Err(f) => failures.push(f),
        }
    }
    let summary = config
        .schemes
        .iter()
        .map(|&s| summarize(s, &runs))
        .collect();
    Ok(ExperimentReport {
        config: config.clone(),
        seeds: seeds.to_vec(),
        runs,
        failures,
        summary,
        elapsed: start.elapsed(),
    })
}
