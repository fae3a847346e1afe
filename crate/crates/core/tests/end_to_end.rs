use leo_ican_core::beamforming::{BeamformingScheme, DcInit, DcOptions};
use leo_ican_core::geometry::{elevation, EARTH_RADIUS_M};
use leo_ican_core::metrics::{gdop_of, per_ue_rates, sum_rate};
use leo_ican_core::selection::{cfg_selection, gdop_greedy_outcome, SelectionParams};
use leo_ican_core::{generate_scenario, ChannelSet, Position3D, ScenarioSpec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn desk(seed: u64) -> (leo_ican_core::Scenario, ChannelSet) {
    let scenario = generate_scenario(&ScenarioSpec::default(), seed).unwrap();
    let channels = ChannelSet::build(&scenario, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
    (scenario, channels)
}

#[test]
fn desk_scenario_invariants() {
    let spec = ScenarioSpec::default();
    for seed in 0..5 {
        let (scenario, channels) = desk(seed);
        assert_eq!(scenario.satellite_count(), 7);
        assert_eq!(scenario.ue_count(), 7);
        for s in &scenario.satellites {
            assert!((s.position.norm() - EARTH_RADIUS_M - spec.altitude_m).abs() < 1e3);
            assert!(s.frame.orthonormality_error() < 1e-9);
            assert!(s.frame.boresight.dot(&s.position.vector()) < 0.0);
            for ue in &scenario.ues {
                assert!(elevation(ue, &s.position) > 0.0);
            }
        }
        for ue in &scenario.ues {
            assert!((ue.norm() - EARTH_RADIUS_M).abs() < 10e3);
        }
        for s in 0..7 {
            for c in 0..7 {
                let ch = channels.get(s, c);
                let expected = ch.path_gain * ch.atmosphere_gain * 16.0;
                assert!((ch.h.norm_squared() - expected).abs() <= 1e-9 * expected);
            }
        }
    }
}

#[test]
fn cfg_with_dc_is_consistent() {
    let (scenario, channels) = desk(3);
    let params = SelectionParams::default();
    let scheme = BeamformingScheme::Dc(DcOptions::default());
    let out = cfg_selection(&scenario, &channels, &scheme, &params).unwrap();
    let radio = &scenario.radio;
    let assignment = out.structure.assignment(scenario.satellite_count());
    let direct = sum_rate(
        &channels,
        &out.beams,
        &assignment,
        radio.bandwidth_hz,
        radio.noise_power_w,
    )
    .unwrap();
    assert!((direct - out.structure.utility).abs() <= 1e-9 * direct);
    let per_ue: f64 = per_ue_rates(
        &channels,
        &out.beams,
        &assignment,
        radio.bandwidth_hz,
        radio.noise_power_w,
    )
    .unwrap()
    .iter()
    .sum();
    assert!((per_ue - direct).abs() <= 1e-9 * direct);
    assert!(out
        .structure
        .is_feasible(params.serving, params.gdop_threshold));
    let sats = scenario.satellite_positions();
    for (c, m) in out.structure.coalitions.iter().enumerate() {
        let chosen: Vec<Position3D> = m.iter().map(|&s| sats[s]).collect();
        assert_eq!(
            gdop_of(&scenario.ues[c], &chosen).unwrap(),
            out.structure.gdop[c]
        );
    }
    for (_, _, w) in out.beams.iter() {
        assert!(w.norm_squared() <= radio.beam_power_w * (1.0 + 1e-8));
    }
    assert!(out.structure.utility >= out.initial_utility);

    let greedy = gdop_greedy_outcome(&scenario, &channels, &scheme, &params).unwrap();
    assert_eq!(greedy.initial_utility, out.initial_utility);
    assert_eq!(greedy.structure.utility, out.initial_utility);
}

#[test]
fn selection_is_pure_with_deterministic_inner_scheme() {
    let (scenario, channels) = desk(8);
    let params = SelectionParams::default();
    for scheme in [BeamformingScheme::Mrt, BeamformingScheme::Zf] {
        let a = cfg_selection(&scenario, &channels, &scheme, &params).unwrap();
        let b = cfg_selection(&scenario, &channels, &scheme, &params).unwrap();
        assert_eq!(a, b);
    }
}

#[test]
fn random_start_is_reproducible() {
    let (scenario, channels) = desk(1);
    let scheme = BeamformingScheme::Dc(DcOptions {
        init: DcInit::Random { seed: 42 },
        ..DcOptions::default()
    });
    let a = scheme
        .design(0, &[0, 2, 5], &channels, &scenario.radio)
        .unwrap();
    let b = scheme
        .design(0, &[0, 2, 5], &channels, &scenario.radio)
        .unwrap();
    assert_eq!(a, b);
    let c = scheme
        .design(1, &[0, 2, 5], &channels, &scenario.radio)
        .unwrap();
    assert_ne!(
        a.dc.unwrap().trace.sum_rate[0],
        c.dc.unwrap().trace.sum_rate[0]
    );
}

#[test]
fn multi_pass_never_ends_below_single_pass_start() {
    let (scenario, channels) = desk(4);
    let single = cfg_selection(
        &scenario,
        &channels,
        &BeamformingScheme::Mrt,
        &SelectionParams::default(),
    )
    .unwrap();
    let multi = cfg_selection(
        &scenario,
        &channels,
        &BeamformingScheme::Mrt,
        &SelectionParams {
            multi_pass: true,
            ..SelectionParams::default()
        },
    )
    .unwrap();
    assert_eq!(multi.initial_utility, single.initial_utility);
    assert!(multi.structure.utility >= multi.initial_utility);
    assert!(multi.passes >= 1);
}
