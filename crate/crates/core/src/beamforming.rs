//! Per-satellite beamforming: the DC-programming design over lifted PSD
//! variables and the matched-filter (MRT) and zero-forcing baselines.
//!
//! Satellites use orthogonal carriers, so every satellite's design only
//! depends on the channels of the users it serves.

use alloc::vec::Vec;

use nalgebra::SymmetricEigen;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::channel::ChannelSet;
use crate::convex::{self, quad_form, solve_surrogate, SolverOptions, SurrogateProblem};
use crate::error::{Error, Result};
use crate::math::{self, LN_2};
use crate::metrics::{rate, LinkAssignment};
use crate::radio::RadioParams;
use crate::{CMatrix, CVector, C64};

/// Beamformers for the active links of a network. Inactive links hold none.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamformerSet {
    satellites: usize,
    ues: usize,
    beams: Vec<Option<CVector>>,
}

impl BeamformerSet {
    pub fn new(satellites: usize, ues: usize) -> Self {
        Self {
            satellites,
            ues,
            beams: alloc::vec![None; satellites * ues],
        }
    }

    pub fn satellite_count(&self) -> usize {
        self.satellites
    }

    pub fn ue_count(&self) -> usize {
        self.ues
    }

    pub fn insert(&mut self, sat: usize, ue: usize, w: CVector) {
        self.beams[sat * self.ues + ue] = Some(w);
    }

    pub fn get(&self, sat: usize, ue: usize) -> Option<&CVector> {
        self.beams[sat * self.ues + ue].as_ref()
    }

    /// `(sat, ue, w)` for every defined beam, satellite-major.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, &CVector)> {
        self.beams
            .iter()
            .enumerate()
            .filter_map(move |(i, w)| w.as_ref().map(|w| (i / self.ues, i % self.ues, w)))
    }
}

/// Per-user `(f_c, g_c)` of the rate split `R_c = f_c - g_c`.
pub fn dc_split_rate(
    q: &[CMatrix],
    h: &[CVector],
    noise_power: f64,
    bandwidth: f64,
) -> Vec<(f64, f64)> {
    h.iter()
        .enumerate()
        .map(|(c, hc)| {
            let mut total = 0.0;
            let mut interference = 0.0;
            for (j, qj) in q.iter().enumerate() {
                let v = quad_form(hc, qj);
                total += v;
                if j != c {
                    interference += v;
                }
            }
            (
                bandwidth * math::log2(noise_power + total),
                bandwidth * math::log2(noise_power + interference),
            )
        })
        .collect()
}

/// Per-user first-order expansion `gbar_c(q_new; q_anchor)` of `g_c`.
pub fn taylor_g_bar(
    q_new: &[CMatrix],
    q_anchor: &[CMatrix],
    h: &[CVector],
    noise_power: f64,
    bandwidth: f64,
) -> Vec<f64> {
    h.iter()
        .enumerate()
        .map(|(c, hc)| {
            let mut at_anchor = 0.0;
            let mut at_new = 0.0;
            for j in 0..q_new.len() {
                if j != c {
                    at_anchor += quad_form(hc, &q_anchor[j]);
                    at_new += quad_form(hc, &q_new[j]);
                }
            }
            bandwidth * math::log2(at_anchor + noise_power)
                + bandwidth * (at_new - at_anchor) / (LN_2 * (at_anchor + noise_power))
        })
        .collect()
}

/// Relaxed sum rate `sum_c f_c(Q) - g_c(Q)`.
pub fn relaxed_sum_rate(q: &[CMatrix], h: &[CVector], noise_power: f64, bandwidth: f64) -> f64 {
    dc_split_rate(q, h, noise_power, bandwidth)
        .iter()
        .map(|(f, g)| f - g)
        .sum()
}

/// Link rates of one satellite's users under beams `w` (same order as `h`).
pub fn satellite_link_rates(
    h: &[CVector],
    w: &[CVector],
    noise_power: f64,
    bandwidth: f64,
) -> Vec<f64> {
    h.iter()
        .enumerate()
        .map(|(c, hc)| {
            let signal = hc.dotc(&w[c]).norm_sqr();
            let interference: f64 = w
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != c)
                .map(|(_, wj)| hc.dotc(wj).norm_sqr())
                .sum();
            rate(bandwidth, signal / (interference + noise_power))
        })
        .collect()
}

/// Dominant eigenpair beam `sqrt(lambda_max) b_max`, with the phase fixed so
/// the largest-magnitude entry is real and positive.
pub fn rank1_extract(q: &CMatrix) -> Result<CVector> {
    let asymmetry = convex::hermitian_asymmetry(q);
    if asymmetry > convex::HERMITIAN_TOLERANCE {
        return Err(Error::NotHermitian { asymmetry });
    }
    let eig = SymmetricEigen::new((q + q.adjoint()) * C64::new(0.5, 0.0));
    let slack = convex::FEASIBILITY_TOLERANCE * q.trace().re.abs().max(1.0);
    let min_eigenvalue = eig
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    if min_eigenvalue < -slack {
        return Err(Error::NotPsd { min_eigenvalue });
    }
    let mut best = 0;
    for (i, &l) in eig.eigenvalues.iter().enumerate() {
        if l > eig.eigenvalues[best] {
            best = i;
        }
    }
    let lambda = eig.eigenvalues[best].max(0.0);
    let mut w: CVector =
        eig.eigenvectors.column(best).into_owned() * C64::new(math::sqrt(lambda), 0.0);
    let mut pivot = 0;
    for i in 0..w.len() {
        if w[i].norm_sqr() > w[pivot].norm_sqr() {
            pivot = i;
        }
    }
    let magnitude = math::sqrt(w[pivot].norm_sqr());
    if magnitude > 0.0 {
        w *= w[pivot].conj() / magnitude;
    }
    Ok(w)
}

/// Matched-filter beams `sqrt(P / ‖h‖²) h` for one satellite.
pub fn mrt_beams(h: &[CVector], power: f64) -> core::result::Result<Vec<CVector>, usize> {
    h.iter()
        .enumerate()
        .map(|(c, hc)| {
            let energy = hc.norm_squared();
            if energy == 0.0 {
                Err(c)
            } else {
                Ok(hc * C64::new(math::sqrt(power / energy), 0.0))
            }
        })
        .collect()
}

/// Zero-forcing beams for one satellite: `W = beta H^H (H H^H)^-1`, with the
/// common scale `beta = sqrt(P K / ‖H†‖_F²)`. Returns the beams and `beta`.
pub fn zf_beams(h: &[CVector], power: f64) -> Result<(Vec<CVector>, f64)> {
    let k = h.len();
    if k == 0 {
        return Err(Error::EmptyServedSet);
    }
    let n = h[0].len();
    if k > n {
        return Err(Error::ZfDimensionOverflow {
            users: k,
            antennas: n,
        });
    }
    let gram = CMatrix::from_fn(k, k, |i, j| h[i].dotc(&h[j]));
    let eig = SymmetricEigen::new(gram.clone());
    let max = eig.eigenvalues.iter().copied().fold(0.0, f64::max);
    let min = eig
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    let condition = if min > 0.0 { max / min } else { f64::INFINITY };
    if !(condition < 1e12) {
        return Err(Error::ZfRankDeficient { condition });
    }
    let inverse = gram
        .try_inverse()
        .ok_or(Error::ZfRankDeficient { condition })?;
    // Column c of H^H is h_c.
    let pinv: Vec<CVector> = (0..k)
        .map(|c| {
            let mut col = CVector::zeros(n);
            for (j, hj) in h.iter().enumerate() {
                col += hj * inverse[(j, c)];
            }
            col
        })
        .collect();
    let frob2: f64 = pinv.iter().map(|v| v.norm_squared()).sum();
    let beta = math::sqrt(power * k as f64 / frob2);
    Ok((
        pinv.into_iter().map(|v| v * C64::new(beta, 0.0)).collect(),
        beta,
    ))
}

/// How the DC iteration picks its first feasible point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DcInit {
    /// `Q_c = P ĥ_c ĥ_c^H`, the matched-filter point.
    Mrt,
    /// `Q_c = P u u^H` for a seeded random unit vector `u`.
    Random { seed: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DcOptions {
    /// Stop once `sum_c |F(Q^{n+1}) - F(Q^n)|` drops below this, bits/s.
    pub delta_bps: f64,
    pub max_outer: usize,
    pub init: DcInit,
    pub solver: SolverOptions,
}

impl Default for DcOptions {
    fn default() -> Self {
        Self {
            delta_bps: 0.5e6,
            max_outer: 50,
            init: DcInit::Mrt,
            solver: SolverOptions::default(),
        }
    }
}

/// Iteration log of the DC scheme. Entry 0 is the initial point.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DcTrace {
    /// Surrogate value `sum_c F(Q^n)` (equal to the true rate at entry 0).
    pub surrogate: Vec<f64>,
    /// True relaxed sum rate `sum_c f_c - g_c` at `Q^n`.
    pub sum_rate: Vec<f64>,
    /// `sum_c |F(Q^{n+1}) - F(Q^n)|` for each update.
    pub change: Vec<f64>,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DcOutcome {
    /// Beams in the order of the input channels.
    pub beams: Vec<CVector>,
    /// Lifted solution before rank-1 extraction.
    pub q: Vec<CMatrix>,
    pub trace: DcTrace,
    /// Sum rate achieved by `beams`.
    pub sum_rate: f64,
    /// Every inner solve met its tolerance.
    pub solver_converged: bool,
    /// The outer loop met `delta_bps` before `max_outer`.
    pub converged: bool,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn initial_point(h: &[CVector], power: f64, init: DcInit) -> Result<Vec<CMatrix>> {
    let n = h[0].len();
    match init {
        DcInit::Mrt => {
            let beams = mrt_beams(h, power).map_err(|ue| Error::ZeroChannel { sat: 0, ue })?;
            Ok(beams.iter().map(|w| w * w.adjoint()).collect())
        }
        DcInit::Random { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            Ok((0..h.len())
                .map(|_| {
                    let u = CVector::from_fn(n, |_, _| {
                        C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
                    });
                    let u = &u / C64::new(u.norm(), 0.0);
                    (&u * u.adjoint()) * C64::new(power, 0.0)
                })
                .collect())
        }
    }
}

/// DC beamforming for one satellite: successive surrogate maximization from a
/// feasible start, followed by rank-1 extraction of each lifted block.
pub fn dc_beamforming(
    h: &[CVector],
    power: f64,
    noise_power: f64,
    bandwidth: f64,
    options: &DcOptions,
) -> Result<DcOutcome> {
    if h.is_empty() {
        return Err(Error::EmptyServedSet);
    }
    let mut q = initial_point(h, power, options.init)?;
    let start = relaxed_sum_rate(&q, h, noise_power, bandwidth);
    let mut trace = DcTrace {
        surrogate: alloc::vec![start],
        sum_rate: alloc::vec![start],
        change: Vec::new(),
        iterations: 0,
    };
    let mut solver_converged = true;
    let mut converged = false;
    for _ in 0..options.max_outer {
        let problem = SurrogateProblem::new(h.to_vec(), q, noise_power, bandwidth, power)?;
        let solution = solve_surrogate(&problem, &options.solver)?;
        solver_converged &= solution.converged;
        let before = problem.per_user_objective(&problem.anchor);
        let after = problem.per_user_objective(&solution.q);
        let change: f64 = before.iter().zip(&after).map(|(a, b)| (b - a).abs()).sum();
        q = solution.q;
        trace.iterations += 1;
        trace.surrogate.push(after.iter().sum());
        trace
            .sum_rate
            .push(relaxed_sum_rate(&q, h, noise_power, bandwidth));
        trace.change.push(change);
        if change < options.delta_bps {
            converged = true;
            break;
        }
    }
    let beams = q.iter().map(rank1_extract).collect::<Result<Vec<_>>>()?;
    let sum_rate = satellite_link_rates(h, &beams, noise_power, bandwidth)
        .iter()
        .sum();
    Ok(DcOutcome {
        beams,
        q,
        trace,
        sum_rate,
        solver_converged,
        converged,
    })
}

/// Inner-layer scheme applied to every satellite.
#[derive(Debug, Clone, PartialEq)]
pub enum BeamformingScheme {
    Mrt,
    Zf,
    Dc(DcOptions),
}

/// One satellite's beams for a given served set.
#[derive(Debug, Clone, PartialEq)]
pub struct SatelliteDesign {
    pub sat: usize,
    /// Served users, ascending.
    pub ues: Vec<usize>,
    pub beams: Vec<CVector>,
    pub link_rates: Vec<f64>,
    pub sum_rate: f64,
    pub dc: Option<DcOutcome>,
}

impl BeamformingScheme {
    pub fn name(&self) -> &'static str {
        match self {
            BeamformingScheme::Mrt => "mrt",
            BeamformingScheme::Zf => "zf",
            BeamformingScheme::Dc(_) => "dc",
        }
    }

    /// Designs the beams of satellite `sat` serving `ues` (ascending). Random
    /// DC starts are seeded from the option seed, the satellite and the set,
    /// so the result is a pure function of its arguments.
    pub fn design(
        &self,
        sat: usize,
        ues: &[usize],
        channels: &ChannelSet,
        radio: &RadioParams,
    ) -> Result<SatelliteDesign> {
        let h = channels.satellite_channels(sat, ues);
        if h.is_empty() {
            return Ok(SatelliteDesign {
                sat,
                ues: Vec::new(),
                beams: Vec::new(),
                link_rates: Vec::new(),
                sum_rate: 0.0,
                dc: None,
            });
        }
        let power = radio.beam_power_w;
        let zero_channel = |c: usize| Error::ZeroChannel { sat, ue: ues[c] };
        let (beams, dc) = match self {
            BeamformingScheme::Mrt => (mrt_beams(&h, power).map_err(zero_channel)?, None),
            BeamformingScheme::Zf => (zf_beams(&h, power)?.0, None),
            BeamformingScheme::Dc(options) => {
                let mut options = options.clone();
                if let DcInit::Random { seed } = options.init {
                    let mixed = ues
                        .iter()
                        .fold(splitmix64(seed ^ splitmix64(sat as u64)), |acc, &c| {
                            splitmix64(acc ^ c as u64)
                        });
                    options.init = DcInit::Random { seed: mixed };
                }
                let outcome =
                    dc_beamforming(&h, power, radio.noise_power_w, radio.bandwidth_hz, &options)
                        .map_err(|e| match e {
                            Error::ZeroChannel { ue, .. } => zero_channel(ue),
                            other => other,
                        })?;
                (outcome.beams.clone(), Some(outcome))
            }
        };
        let link_rates = satellite_link_rates(&h, &beams, radio.noise_power_w, radio.bandwidth_hz);
        Ok(SatelliteDesign {
            sat,
            ues: ues.to_vec(),
            beams,
            sum_rate: link_rates.iter().sum(),
            link_rates,
            dc,
        })
    }

    /// Designs every satellite for a full assignment.
    pub fn design_network(
        &self,
        channels: &ChannelSet,
        assignment: &LinkAssignment,
        radio: &RadioParams,
    ) -> Result<(BeamformerSet, Vec<SatelliteDesign>)> {
        let mut beams = BeamformerSet::new(assignment.satellite_count(), assignment.ue_count());
        let mut designs = Vec::with_capacity(assignment.satellite_count());
        for s in 0..assignment.satellite_count() {
            let design = self.design(s, &assignment.served_ues(s), channels, radio)?;
            for (c, w) in design.ues.iter().zip(&design.beams) {
                beams.insert(s, *c, w.clone());
            }
            designs.push(design);
        }
        Ok((beams, designs))
    }
}

/// MRT beams for every active link.
pub fn mrt_beamforming(
    channels: &ChannelSet,
    assignment: &LinkAssignment,
    power: f64,
) -> Result<BeamformerSet> {
    let mut out = BeamformerSet::new(assignment.satellite_count(), assignment.ue_count());
    for s in 0..assignment.satellite_count() {
        let ues = assignment.served_ues(s);
        let beams = mrt_beams(&channels.satellite_channels(s, &ues), power)
            .map_err(|c| Error::ZeroChannel { sat: s, ue: ues[c] })?;
        for (c, w) in ues.into_iter().zip(beams) {
            out.insert(s, c, w);
        }
    }
    Ok(out)
}

/// ZF beams for every active link.
pub fn zf_beamforming(
    channels: &ChannelSet,
    assignment: &LinkAssignment,
    power: f64,
) -> Result<BeamformerSet> {
    let mut out = BeamformerSet::new(assignment.satellite_count(), assignment.ue_count());
    for s in 0..assignment.satellite_count() {
        let ues = assignment.served_ues(s);
        if ues.is_empty() {
            continue;
        }
        let (beams, _) = zf_beams(&channels.satellite_channels(s, &ues), power)?;
        for (c, w) in ues.into_iter().zip(beams) {
            out.insert(s, c, w);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    fn random_vector(rng: &mut ChaCha8Rng, n: usize) -> CVector {
        CVector::from_fn(n, |_, _| {
            C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        })
    }

    fn random_psd(rng: &mut ChaCha8Rng, n: usize, power: f64) -> CMatrix {
        let a = CMatrix::from_fn(n, n, |_, _| {
            C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        });
        let m = &a * a.adjoint();
        let scale = power * rng.random::<f64>() / m.trace().re;
        m * C64::new(scale, 0.0)
    }

    fn cv(entries: &[(f64, f64)]) -> CVector {
        CVector::from_iterator(entries.len(), entries.iter().map(|&(r, i)| C64::new(r, i)))
    }

    #[test]
    fn zero_q_split() {
        let h = alloc::vec![cv(&[(1.0, 0.0), (0.0, 1.0)]), cv(&[(0.5, 0.5), (1.0, 0.0)])];
        let q = alloc::vec![CMatrix::zeros(2, 2); 2];
        for (f, g) in dc_split_rate(&q, &h, 0.25, 3.0) {
            assert!((f - 3.0 * 0.25f64.log2()).abs() < 1e-15);
            assert!((g - f).abs() < 1e-15);
        }
        let single = dc_split_rate(
            &[random_psd(&mut ChaCha8Rng::seed_from_u64(0), 2, 1.0)],
            &h[..1],
            0.25,
            3.0,
        );
        assert!((single[0].1 - 3.0 * 0.25f64.log2()).abs() < 1e-15);
    }

    #[test]
    fn taylor_bound_at_anchor_and_scalar_expansion() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let h: Vec<CVector> = (0..3).map(|_| random_vector(&mut rng, 3)).collect();
        let anchor: Vec<CMatrix> = (0..3).map(|_| random_psd(&mut rng, 3, 2.0)).collect();
        let at = taylor_g_bar(&anchor, &anchor, &h, 0.1, 2.0);
        let exact = dc_split_rate(&anchor, &h, 0.1, 2.0);
        for (a, (_, g)) in at.iter().zip(exact) {
            assert!((a - g).abs() <= 1e-12 * g.abs().max(1.0));
        }
        // One antenna, two users: g_1 depends on q_2 only.
        // gbar_1 = B log2(|h1|^2 a2 + s) + B |h1|^2 (b2 - a2) / (ln2 (|h1|^2 a2 + s)).
        let h = alloc::vec![cv(&[(0.6, 0.8)]), cv(&[(2.0, 0.0)])];
        let anchor = alloc::vec![
            CMatrix::from_element(1, 1, C64::new(1.5, 0.0)),
            CMatrix::from_element(1, 1, C64::new(0.7, 0.0))
        ];
        let new = alloc::vec![
            CMatrix::from_element(1, 1, C64::new(0.2, 0.0)),
            CMatrix::from_element(1, 1, C64::new(2.5, 0.0))
        ];
        let (b, s): (f64, f64) = (4.0, 0.3);
        let expected_1 =
            b * (0.7 + s).log2() + b * (2.5 - 0.7) / (core::f64::consts::LN_2 * (0.7 + s));
        let expected_2 = b * (4.0 * 1.5 + s).log2()
            + b * 4.0 * (0.2 - 1.5) / (core::f64::consts::LN_2 * (4.0 * 1.5 + s));
        let got = taylor_g_bar(&new, &anchor, &h, s, b);
        assert!((got[0] - expected_1).abs() < 1e-12);
        assert!((got[1] - expected_2).abs() < 1e-12);
    }

    #[test]
    fn rank1_examples() {
        let mut q = CMatrix::zeros(2, 2);
        q[(0, 0)] = C64::new(2.0, 0.0);
        let w = rank1_extract(&q).unwrap();
        assert!((w[0] - C64::new(2f64.sqrt(), 0.0)).norm() < 1e-12);
        assert!(w[1].norm() < 1e-12);
        let u = cv(&[(0.3, -0.4), (1.0, 0.2), (-0.1, 0.0)]);
        let w = rank1_extract(&(&u * u.adjoint())).unwrap();
        let phase = w.dotc(&u);
        assert!((phase.norm() - u.norm_squared()).abs() < 1e-10);
        assert!((&w * w.adjoint() - &u * u.adjoint()).norm() < 1e-10);
        let mut bad = CMatrix::zeros(2, 2);
        bad[(1, 1)] = C64::new(-1.0, 0.0);
        assert!(matches!(rank1_extract(&bad), Err(Error::NotPsd { .. })));
    }

    #[test]
    fn rank1_is_best_rank1_approximation() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let q = random_psd(&mut rng, 4, 3.0);
            let w = rank1_extract(&q).unwrap();
            let err = (&q - &w * w.adjoint()).norm();
            // Eckart-Young: the residual equals the norm of the trailing spectrum.
            let eig = SymmetricEigen::new(q.clone());
            let mut values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
            values.sort_by(|a, b| b.total_cmp(a));
            let tail = values[1..].iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!((err - tail).abs() < 1e-10);
            for _ in 0..20 {
                let v = random_vector(&mut rng, 4);
                assert!((&q - &v * v.adjoint()).norm() >= err - 1e-12);
            }
            assert!(w.norm_squared() <= q.trace().re + 1e-12);
        }
    }

    #[test]
    fn mrt_examples() {
        let w = mrt_beams(&[cv(&[(1.0, 0.0), (0.0, 0.0)])], 4.0).unwrap();
        assert!((w[0][0] - C64::new(2.0, 0.0)).norm() < 1e-15);
        assert_eq!(mrt_beams(&[CVector::zeros(2)], 1.0), Err(0));
    }

    #[test]
    fn zf_examples() {
        let h = cv(&[(1.0, 1.0), (0.0, -2.0), (0.5, 0.0)]);
        let (w, beta) = zf_beams(core::slice::from_ref(&h), 3.0).unwrap();
        assert!((w[0].norm_squared() - 3.0).abs() < 1e-12);
        assert!((h.dotc(&w[0]) - C64::new(beta, 0.0)).norm() < 1e-12);
        let mrt = mrt_beams(core::slice::from_ref(&h), 3.0).unwrap();
        assert!((h.dotc(&mrt[0]).norm() - h.dotc(&w[0]).norm()).abs() < 1e-12);

        let e = |i: usize| {
            CVector::from_fn(3, |r, _| {
                if r == i {
                    C64::new(1.0, 0.0)
                } else {
                    C64::new(0.0, 0.0)
                }
            })
        };
        let (w, beta) = zf_beams(&[e(0), e(2)], 5.0).unwrap();
        assert!((beta - 5f64.sqrt()).abs() < 1e-12);
        assert!((&w[0] - e(0) * C64::new(beta, 0.0)).norm() < 1e-12);

        assert!(matches!(
            zf_beams(&[e(0), e(1), e(2), e(0)], 1.0),
            Err(Error::ZfDimensionOverflow {
                users: 4,
                antennas: 3
            })
        ));
        assert!(matches!(
            zf_beams(&[e(0), e(0)], 1.0),
            Err(Error::ZfRankDeficient { .. })
        ));
    }

    #[test]
    fn zf_nulls_cross_terms() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let h: Vec<CVector> = (0..3).map(|_| random_vector(&mut rng, 4)).collect();
            let (w, beta) = zf_beams(&h, 7.0).unwrap();
            for (c, hc) in h.iter().enumerate() {
                for (j, wj) in w.iter().enumerate() {
                    let v = hc.dotc(wj);
                    if c == j {
                        assert!((v - C64::new(beta, 0.0)).norm() < 1e-9 * beta);
                    } else {
                        assert!(v.norm() / beta < 1e-9);
                    }
                }
            }
            let total: f64 = w.iter().map(|v| v.norm_squared()).sum();
            assert!((total - 21.0).abs() < 1e-9 * 21.0);
        }
    }

    #[test]
    fn dc_single_user_reaches_matched_filter() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for init in [DcInit::Mrt, DcInit::Random { seed: 4 }] {
            let h = alloc::vec![random_vector(&mut rng, 4)];
            let (p, s, b) = (2.0, 0.01, 5e7);
            let out = dc_beamforming(
                &h,
                p,
                s,
                b,
                &DcOptions {
                    init,
                    ..DcOptions::default()
                },
            )
            .unwrap();
            let closed = b * (1.0 + p * h[0].norm_squared() / s).log2();
            assert!((out.sum_rate - closed).abs() <= 1e-3 * closed);
            assert!(out.beams[0].norm_squared() <= p + 1e-8);
        }
    }

    #[test]
    fn dc_orthogonal_users_get_their_own_matched_filters() {
        let h = alloc::vec![
            cv(&[(1.0, 0.0), (0.0, 0.0), (0.0, 0.0)]),
            cv(&[(0.0, 0.0), (0.0, 2.0), (0.0, 0.0)])
        ];
        let (p, s, b) = (1.0, 0.1, 1e6);
        let out = dc_beamforming(
            &h,
            p,
            s,
            b,
            &DcOptions {
                delta_bps: 1.0,
                ..DcOptions::default()
            },
        )
        .unwrap();
        let oracle: f64 = h
            .iter()
            .map(|v| b * (1.0 + p * v.norm_squared() / s).log2())
            .sum();
        assert!((out.sum_rate - oracle).abs() <= 1e-3 * oracle);
    }

    #[test]
    fn dc_trace_is_monotone_and_terminates() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let radio = RadioParams::default();
        let scale = (1e-16f64).sqrt();
        let h: Vec<CVector> = (0..2)
            .map(|_| random_vector(&mut rng, 16) * C64::new(scale, 0.0))
            .collect();
        let out = dc_beamforming(
            &h,
            radio.beam_power_w,
            radio.noise_power_w,
            radio.bandwidth_hz,
            &DcOptions::default(),
        )
        .unwrap();
        assert!(out.converged);
        for pair in out.trace.sum_rate.windows(2) {
            assert!(pair[1] >= pair[0] * (1.0 - 1e-6));
        }
        assert!(*out.trace.change.last().unwrap() < 0.5e6);
    }

    #[test]
    fn scheme_design_matches_direct_calls() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let vectors: Vec<CVector> = (0..6)
            .map(|_| random_vector(&mut rng, 4) * C64::new(1e-7, 0.0))
            .collect();
        let channels = ChannelSet::from_vectors(2, 3, vectors).unwrap();
        let assignment = LinkAssignment::from_coalitions(
            2,
            &[alloc::vec![0, 1], alloc::vec![0], alloc::vec![1]],
        );
        let radio = RadioParams::default();
        let (mrt, designs) = BeamformingScheme::Mrt
            .design_network(&channels, &assignment, &radio)
            .unwrap();
        assert_eq!(
            mrt,
            mrt_beamforming(&channels, &assignment, radio.beam_power_w).unwrap()
        );
        let total: f64 = designs.iter().map(|d| d.sum_rate).sum();
        let direct = crate::metrics::sum_rate(
            &channels,
            &mrt,
            &assignment,
            radio.bandwidth_hz,
            radio.noise_power_w,
        )
        .unwrap();
        assert!((total - direct).abs() <= 1e-9 * direct);
        let (zf, _) = BeamformingScheme::Zf
            .design_network(&channels, &assignment, &radio)
            .unwrap();
        assert_eq!(
            zf,
            zf_beamforming(&channels, &assignment, radio.beam_power_w).unwrap()
        );
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn split_matches_rate_formula_for_rank1(seed in 0u64..10_000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = 1 + rng.random_range(0..5);
            let k = 1 + rng.random_range(0..4);
            let h: Vec<CVector> = (0..k).map(|_| random_vector(&mut rng, n)).collect();
            let w: Vec<CVector> = (0..k).map(|_| random_vector(&mut rng, n)).collect();
            let q: Vec<CMatrix> = w.iter().map(|v| v * v.adjoint()).collect();
            let split = dc_split_rate(&q, &h, 0.2, 7.0);
            let direct = satellite_link_rates(&h, &w, 0.2, 7.0);
            for ((f, g), r) in split.iter().zip(direct) {
                prop_assert!(((f - g) - r).abs() <= 1e-9 * r.abs().max(1.0));
            }
        }

        #[test]
        fn linearization_is_a_minorant(seed in 0u64..10_000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = 1 + rng.random_range(0..5);
            let k = 1 + rng.random_range(0..4);
            let h: Vec<CVector> = (0..k).map(|_| random_vector(&mut rng, n)).collect();
            let anchor: Vec<CMatrix> = (0..k).map(|_| random_psd(&mut rng, n, 2.0)).collect();
            let point: Vec<CMatrix> = (0..k).map(|_| random_psd(&mut rng, n, 2.0)).collect();
            let gbar = taylor_g_bar(&point, &anchor, &h, 0.05, 3.0);
            let exact = dc_split_rate(&point, &h, 0.05, 3.0);
            for (gb, (_, g)) in gbar.iter().zip(exact) {
                prop_assert!(*gb >= g - 1e-9 * g.abs().max(1.0));
            }
        }

        #[test]
        fn mrt_uses_full_power(seed in 0u64..10_000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let h = random_vector(&mut rng, 5);
            let w = mrt_beams(core::slice::from_ref(&h), 3.5).unwrap();
            prop_assert!((w[0].norm_squared() - 3.5).abs() <= 1e-12 * 3.5);
            prop_assert!((h.dotc(&w[0]).norm() - h.norm() * w[0].norm()).abs() < 1e-12);
        }
    }
}
