//! Invariant suites over random instances. Each check reports the worst
//! measured value against its limit.

use std::fmt;

use leo_ican_core::beamforming::{
    dc_beamforming, dc_split_rate, taylor_g_bar, zf_beams, BeamformingScheme, DcOptions,
};
use leo_ican_core::convex::{solve_surrogate, SolverOptions, SurrogateProblem};
use leo_ican_core::metrics::gdop_of;
use leo_ican_core::selection::{cfg_selection, min_gdop_subset, SelectionParams};
use leo_ican_core::{
    generate_scenario, CMatrix, CVector, ChannelSet, Position3D, RadioParams, ScenarioSpec, C64,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::oracle::{exhaustive_cfg_optimum, exhaustive_min_gdop, gdop_adjugate, single_user_rate};
use crate::HarnessError;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub measured: f64,
    pub limit: f64,
    pub detail: String,
}

impl Check {
    fn at_most(name: &str, measured: f64, limit: f64, detail: String) -> Self {
        Self {
            name: name.to_string(),
            passed: measured <= limit,
            measured,
            limit,
            detail,
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        write!(
            f,
            "{verdict} {}: measured {:.3e}, limit {:.3e} ({})",
            self.name, self.measured, self.limit, self.detail
        )
    }
}

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller.
    let u: f64 = rng.random::<f64>().max(f64::MIN_POSITIVE);
    let v: f64 = rng.random();
    (-2.0 * u.ln()).sqrt() * (std::f64::consts::TAU * v).cos()
}

fn complex_gaussian(rng: &mut ChaCha8Rng, n: usize) -> CVector {
    CVector::from_fn(n, |_, _| {
        C64::new(gaussian(rng), gaussian(rng)) * std::f64::consts::FRAC_1_SQRT_2
    })
}

/// Channels of one satellite with per-user SNR `P‖h‖²/σ²` log-uniform in
/// [-10, 30] dB and a shared component so users interfere.
pub fn random_satellite_channels(
    rng: &mut ChaCha8Rng,
    radio: &RadioParams,
    n: usize,
    k: usize,
) -> Vec<CVector> {
    let common = complex_gaussian(rng, n);
    let share: f64 = rng.random();
    (0..k)
        .map(|_| {
            let own = complex_gaussian(rng, n);
            let mixed =
                &common * C64::new(share.sqrt(), 0.0) + own * C64::new((1.0 - share).sqrt(), 0.0);
            let snr = 10f64.powf(rng.random_range(-1.0..3.0));
            let scale = (snr * radio.noise_power_w / radio.beam_power_w).sqrt() / mixed.norm();
            mixed * C64::new(scale, 0.0)
        })
        .collect()
}

/// Random PSD matrix of random rank with trace in `(0, power]`.
pub fn random_feasible(rng: &mut ChaCha8Rng, n: usize, power: f64) -> CMatrix {
    let rank = rng.random_range(1..=n);
    let mut q = CMatrix::zeros(n, n);
    for _ in 0..rank {
        let v = complex_gaussian(rng, n);
        q += &v * v.adjoint();
    }
    let t = q.trace().re;
    q * C64::new(power * rng.random_range(0.05..1.0) / t, 0.0)
}

/// Monotone ascent of the relaxed sum rate along the DC iterations, and the
/// minorant property of the linearized term, on random per-satellite
/// instances with `N <= 8`, `K <= 3`.
pub fn mm_checks(instances: usize, points: usize, seed: u64) -> Result<Vec<Check>, HarnessError> {
    let radio = RadioParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst_drop: f64 = 0.0;
    let mut worst_minorant: f64 = 0.0;
    let mut worst_anchor: f64 = 0.0;
    let mut iterations = 0;
    for _ in 0..instances {
        let n = rng.random_range(1..=8);
        let k = rng.random_range(1..=3);
        let h = random_satellite_channels(&mut rng, &radio, n, k);
        let out = dc_beamforming(
            &h,
            radio.beam_power_w,
            radio.noise_power_w,
            radio.bandwidth_hz,
            &DcOptions::default(),
        )?;
        iterations += out.trace.iterations;
        for pair in out.trace.sum_rate.windows(2) {
            worst_drop = worst_drop.max((pair[0] - pair[1]) / pair[0].abs().max(f64::MIN_POSITIVE));
        }
        let anchor: Vec<CMatrix> = (0..k)
            .map(|_| random_feasible(&mut rng, n, radio.beam_power_w))
            .collect();
        let at_anchor = taylor_g_bar(
            &anchor,
            &anchor,
            &h,
            radio.noise_power_w,
            radio.bandwidth_hz,
        );
        for (gb, (_, g)) in at_anchor.iter().zip(dc_split_rate(
            &anchor,
            &h,
            radio.noise_power_w,
            radio.bandwidth_hz,
        )) {
            worst_anchor = worst_anchor.max((gb - g).abs() / g.abs());
        }
        for _ in 0..points {
            let point: Vec<CMatrix> = (0..k)
                .map(|_| random_feasible(&mut rng, n, radio.beam_power_w))
                .collect();
            let gbar = taylor_g_bar(&point, &anchor, &h, radio.noise_power_w, radio.bandwidth_hz);
            for (gb, (f, g)) in gbar.iter().zip(dc_split_rate(
                &point,
                &h,
                radio.noise_power_w,
                radio.bandwidth_hz,
            )) {
                // f - gbar <= f - g, i.e. gbar >= g.
                let excess = ((f - gb) - (f - g)) / (f - g).abs().max(g.abs());
                worst_minorant = worst_minorant.max(excess);
            }
        }
    }
    Ok(vec![
        Check::at_most(
            "relaxed sum rate non-decreasing over DC iterations",
            worst_drop,
            1e-6,
            format!("{instances} instances, {iterations} iterations, worst relative drop"),
        ),
        Check::at_most(
            "linearized term is a minorant",
            worst_minorant,
            1e-9,
            format!(
                "{} random points, worst relative excess",
                instances * points
            ),
        ),
        Check::at_most(
            "linearization exact at the anchor",
            worst_anchor,
            1e-9,
            format!("{instances} anchors, worst relative gap"),
        ),
    ])
}

/// DC beamforming for a lone user against `B log2(1 + P‖h‖²/σ²)`.
pub fn single_user_check(instances: usize, seed: u64) -> Result<Check, HarnessError> {
    let radio = RadioParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..instances {
        let n = rng.random_range(1..=16);
        let h = random_satellite_channels(&mut rng, &radio, n, 1);
        let out = dc_beamforming(
            &h,
            radio.beam_power_w,
            radio.noise_power_w,
            radio.bandwidth_hz,
            &DcOptions::default(),
        )?;
        let oracle = single_user_rate(
            &h[0],
            radio.beam_power_w,
            radio.noise_power_w,
            radio.bandwidth_hz,
        );
        worst = worst.max((out.sum_rate - oracle).abs() / oracle);
    }
    Ok(Check::at_most(
        "single-user DC rate matches closed form",
        worst,
        1e-3,
        format!("{instances} instances, worst relative error"),
    ))
}

/// Zero-forcing cross terms and total power on random full-rank instances.
pub fn zf_checks(instances: usize, seed: u64) -> Result<Vec<Check>, HarnessError> {
    let radio = RadioParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst_cross: f64 = 0.0;
    let mut worst_power: f64 = 0.0;
    for _ in 0..instances {
        let n = rng.random_range(2..=16);
        let k = rng.random_range(1..=n.min(6));
        let h: Vec<CVector> = (0..k)
            .map(|_| {
                complex_gaussian(&mut rng, n)
                    * C64::new((radio.noise_power_w / radio.beam_power_w).sqrt(), 0.0)
            })
            .collect();
        let (w, beta) = zf_beams(&h, radio.beam_power_w)?;
        for (c, hc) in h.iter().enumerate() {
            for (j, wj) in w.iter().enumerate() {
                if c != j {
                    worst_cross = worst_cross.max(hc.dotc(wj).norm_sqr().sqrt() / beta);
                }
            }
        }
        let total: f64 = w.iter().map(|v| v.norm_squared()).sum();
        let target = radio.beam_power_w * k as f64;
        worst_power = worst_power.max((total - target).abs() / target);
    }
    Ok(vec![
        Check::at_most(
            "ZF cross terms over beta",
            worst_cross,
            1e-9,
            format!("{instances} instances, worst"),
        ),
        Check::at_most(
            "ZF total power equals P|C_s|",
            worst_power,
            1e-9,
            format!("{instances} instances, worst relative error"),
        ),
    ])
}

fn random_rotation(rng: &mut ChaCha8Rng) -> [[f64; 3]; 3] {
    let q: Vec<f64> = (0..4).map(|_| gaussian(rng)).collect();
    let n = q.iter().map(|x| x * x).sum::<f64>().sqrt();
    let (w, x, y, z) = (q[0] / n, q[1] / n, q[2] / n, q[3] / n);
    [
        [
            1.0 - 2.0 * (y * y + z * z),
            2.0 * (x * y - w * z),
            2.0 * (x * z + w * y),
        ],
        [
            2.0 * (x * y + w * z),
            1.0 - 2.0 * (x * x + z * z),
            2.0 * (y * z - w * x),
        ],
        [
            2.0 * (x * z - w * y),
            2.0 * (y * z + w * x),
            1.0 - 2.0 * (x * x + y * y),
        ],
    ]
}

fn rotate(r: &[[f64; 3]; 3], p: &Position3D) -> Position3D {
    let v = [p.x, p.y, p.z];
    let row = |i: usize| r[i][0] * v[0] + r[i][1] * v[1] + r[i][2] * v[2];
    Position3D::new(row(0), row(1), row(2))
}

/// A user on the sphere and `count` satellites in its upper hemisphere.
fn random_geometry(rng: &mut ChaCha8Rng, count: usize) -> (Position3D, Vec<Position3D>) {
    let re = leo_ican_core::geometry::EARTH_RADIUS_M;
    let ue = Position3D::new(re, 0.0, 0.0);
    let sats = (0..count)
        .map(|_| {
            let zenith = rng.random_range(0.0..1.3f64);
            let azimuth = rng.random_range(0.0..std::f64::consts::TAU);
            let range = rng.random_range(6e5..2e6);
            Position3D::new(
                re + range * zenith.cos(),
                range * zenith.sin() * azimuth.cos(),
                range * zenith.sin() * azimuth.sin(),
            )
        })
        .collect();
    (ue, sats)
}

/// Axis-aligned value, rotation invariance, monotonicity under an added
/// satellite, and the GDOP-greedy subset against full enumeration.
pub fn gdop_checks(instances: usize, seed: u64) -> Result<Vec<Check>, HarnessError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let origin = Position3D::new(0.0, 0.0, 0.0);
    let axes = [
        Position3D::new(1.0, 0.0, 0.0),
        Position3D::new(0.0, 1.0, 0.0),
        Position3D::new(0.0, 0.0, 1.0),
    ];
    let axis_error = (gdop_of(&origin, &axes)? - 3f64.sqrt()).abs();

    let mut worst_rotation: f64 = 0.0;
    for _ in 0..instances {
        let count = rng.random_range(4..=7);
        let (ue, sats) = random_geometry(&mut rng, count);
        let r = random_rotation(&mut rng);
        let before = gdop_of(&ue, &sats)?;
        let turned: Vec<Position3D> = sats.iter().map(|p| rotate(&r, p)).collect();
        let after = gdop_of(&rotate(&r, &ue), &turned)?;
        worst_rotation = worst_rotation.max((after - before).abs() / before);
    }

    let mut worst_increase: f64 = 0.0;
    for _ in 0..instances {
        let count = rng.random_range(4..=7);
        let (ue, mut sats) = random_geometry(&mut rng, count);
        let before = gdop_of(&ue, &sats)?;
        let (_, extra) = random_geometry(&mut rng, 1);
        sats.push(extra[0]);
        let after = gdop_of(&ue, &sats)?;
        worst_increase = worst_increase.max((after - before) / before);
    }

    let mut mismatches = 0;
    let mut cases = 0;
    for _ in 0..instances {
        let s = rng.random_range(4..=8);
        let (ue, sats) = random_geometry(&mut rng, s);
        let candidates: Vec<usize> = (0..s).collect();
        for k in 3..=s.min(5) {
            cases += 1;
            let fast = min_gdop_subset(&ue, &sats, &candidates, k);
            let slow = exhaustive_min_gdop(&ue, &sats, &candidates, k);
            let same = match (&fast, &slow) {
                (Some((a, ga)), Some((b, gb))) => a == b || (ga - gb).abs() <= 1e-9 * gb,
                (None, None) => true,
                _ => false,
            };
            if !same {
                mismatches += 1;
            }
        }
    }
    Ok(vec![
        Check::at_most(
            "axis-aligned GDOP equals sqrt(3)",
            axis_error,
            1e-12,
            "absolute error".into(),
        ),
        Check::at_most(
            "GDOP rotation invariant",
            worst_rotation,
            1e-9,
            format!("{instances} rotations, worst relative change"),
        ),
        Check::at_most(
            "adding a satellite never raises GDOP",
            worst_increase,
            1e-12,
            format!("{instances} geometries, worst relative increase"),
        ),
        Check::at_most(
            "greedy subset matches enumeration (S <= 8)",
            mismatches as f64,
            0.0,
            format!("{cases} cases, mismatches"),
        ),
    ])
}

/// Spec of the tiny coalition instances: 5 satellites, 2 users, 2x2 arrays.
pub fn tiny_spec() -> ScenarioSpec {
    ScenarioSpec {
        satellites: 5,
        cells: 2,
        radio: RadioParams {
            antennas_x: 2,
            antennas_y: 2,
            ..RadioParams::default()
        },
        ..ScenarioSpec::default()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CfgStudy {
    pub checks: Vec<Check>,
    /// `(seed, cfg utility, initial utility, exhaustive optimum)`.
    pub rows: Vec<(u64, f64, f64, f64)>,
}

/// Coalition feasibility, monotonicity and gap to the exhaustive optimum on
/// tiny instances (`S = 5`, `C = 2`, `I = 3`, 2x2 arrays) with DC beams.
pub fn cfg_checks(instances: usize, seed: u64) -> Result<CfgStudy, HarnessError> {
    let spec = tiny_spec();
    let params = SelectionParams {
        serving: 3,
        ..SelectionParams::default()
    };
    let scheme = BeamformingScheme::Dc(DcOptions::default());
    let mut infeasible = 0;
    let mut worst_drop: f64 = 0.0;
    let mut gaps = Vec::new();
    let mut rows = Vec::new();
    for i in 0..instances as u64 {
        let s = seed + i;
        let scenario = generate_scenario(&spec, s)?;
        let mut rng = ChaCha8Rng::seed_from_u64(s);
        rng.set_stream(1);
        let channels = ChannelSet::build(&scenario, &mut rng)?;
        let out = cfg_selection(&scenario, &channels, &scheme, &params)?;
        let sats = scenario.satellite_positions();
        for (c, m) in out.structure.coalitions.iter().enumerate() {
            let chosen: Vec<Position3D> = m.iter().map(|&k| sats[k]).collect();
            let g = gdop_adjugate(&scenario.ues[c], &chosen).unwrap_or(f64::INFINITY);
            if m.len() != params.serving || g > params.gdop_threshold {
                infeasible += 1;
            }
        }
        worst_drop =
            worst_drop.max((out.initial_utility - out.structure.utility) / out.initial_utility);
        let best = exhaustive_cfg_optimum(
            &scenario,
            &channels,
            &scheme,
            params.serving,
            params.gdop_threshold,
        )?;
        gaps.push(((best.utility - out.structure.utility) / best.utility).max(0.0));
        rows.push((s, out.structure.utility, out.initial_utility, best.utility));
    }
    let mean_gap = gaps.iter().sum::<f64>() / gaps.len().max(1) as f64;
    let max_gap = gaps.iter().copied().fold(0.0, f64::max);
    Ok(CfgStudy {
        checks: vec![
            Check::at_most(
                "coalitions have I members and GDOP <= gamma",
                infeasible as f64,
                0.0,
                format!("{instances} instances, violating coalitions"),
            ),
            Check::at_most(
                "final utility >= initial utility",
                worst_drop,
                0.0,
                format!("{instances} instances, worst relative drop"),
            ),
            Check::at_most(
                "mean gap to exhaustive optimum",
                mean_gap,
                0.10,
                format!("{instances} instances, max gap {max_gap:.4}"),
            ),
        ],
        rows,
    })
}

/// Surrogate solver against the closed-form single-user optimum, and the
/// analytic gradient against central differences.
pub fn solver_checks(
    instances: usize,
    points: usize,
    seed: u64,
) -> Result<Vec<Check>, HarnessError> {
    let radio = RadioParams::default();
    let (p, s2, b) = (radio.beam_power_w, radio.noise_power_w, radio.bandwidth_hz);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst_opt: f64 = 0.0;
    for _ in 0..instances {
        let n = rng.random_range(1..=16);
        let h = random_satellite_channels(&mut rng, &radio, n, 1);
        let anchor = vec![random_feasible(&mut rng, n, p)];
        let problem = SurrogateProblem::new(h.clone(), anchor, s2, b, p)?;
        let solution = solve_surrogate(&problem, &SolverOptions::default())?;
        let oracle = single_user_rate(&h[0], p, s2, b);
        worst_opt = worst_opt.max((solution.objective - oracle).abs() / oracle);
    }
    let mut worst_grad: f64 = 0.0;
    for _ in 0..points {
        let n = rng.random_range(1..=6);
        let k = rng.random_range(1..=3);
        let h = random_satellite_channels(&mut rng, &radio, n, k);
        let anchor: Vec<CMatrix> = (0..k).map(|_| random_feasible(&mut rng, n, p)).collect();
        let problem = SurrogateProblem::new(h, anchor, s2, b, p)?;
        let point: Vec<CMatrix> = (0..k).map(|_| random_feasible(&mut rng, n, p)).collect();
        let dir: Vec<CMatrix> = (0..k)
            .map(|_| {
                let a = CMatrix::from_fn(n, n, |_, _| {
                    C64::new(gaussian(&mut rng), gaussian(&mut rng))
                });
                (&a + a.adjoint()) * C64::new(0.5, 0.0)
            })
            .collect();
        let grad = problem.gradient(&point);
        let analytic: f64 = grad
            .iter()
            .zip(&dir)
            .map(|(g, d)| (g.adjoint() * d).trace().re)
            .sum();
        let eps = 1e-6 * p;
        let shifted = |sign: f64| -> Vec<CMatrix> {
            point
                .iter()
                .zip(&dir)
                .map(|(q, d)| q + d * C64::new(sign * eps, 0.0))
                .collect()
        };
        let fd =
            (problem.objective(&shifted(1.0)) - problem.objective(&shifted(-1.0))) / (2.0 * eps);
        let scale = grad
            .iter()
            .zip(&dir)
            .map(|(g, d)| g.norm() * d.norm())
            .sum::<f64>();
        worst_grad = worst_grad.max((analytic - fd).abs() / analytic.abs().max(1e-3 * scale));
    }
    Ok(vec![
        Check::at_most(
            "surrogate solver reaches single-user optimum",
            worst_opt,
            1e-4,
            format!("{instances} instances, worst relative error"),
        ),
        Check::at_most(
            "analytic gradient matches central differences",
            worst_grad,
            1e-5,
            format!("{points} points, worst relative error"),
        ),
    ])
}

/// Every suite with `scale` times the default instance counts (at least one).
pub fn full_suite(scale: f64, seed: u64) -> Result<Vec<Check>, HarnessError> {
    let n = |base: usize| ((base as f64 * scale).round() as usize).max(1);
    let mut checks = Vec::new();
    checks.extend(mm_checks(n(100), n(100), seed)?);
    checks.push(single_user_check(n(50), seed + 1)?);
    checks.extend(zf_checks(n(50), seed + 2)?);
    checks.extend(gdop_checks(n(100), seed + 3)?);
    checks.extend(cfg_checks(n(20), seed + 4)?.checks);
    checks.extend(solver_checks(n(50), n(100), seed + 5)?);
    Ok(checks)
}
