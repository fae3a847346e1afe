//! Brute-force references, written independently of the optimized code paths.

use std::collections::HashMap;

use leo_ican_core::beamforming::{BeamformerSet, BeamformingScheme};
use leo_ican_core::geometry::{elevation, Position3D};
use leo_ican_core::metrics::sum_rate;
use leo_ican_core::{CVector, ChannelSet, LinkAssignment, Scenario};

use crate::HarnessError;

/// `B log2(1 + P ‖h‖² / σ²)`, the best single-user rate.
pub fn single_user_rate(h: &CVector, power: f64, noise_power: f64, bandwidth: f64) -> f64 {
    bandwidth * (1.0 + power * h.norm_squared() / noise_power).log2()
}

/// GDOP from the explicit adjugate of `GᵀG`; `None` when the determinant is
/// numerically zero.
pub fn gdop_adjugate(ue: &Position3D, sats: &[Position3D]) -> Option<f64> {
    let mut m = [[0.0f64; 3]; 3];
    for s in sats {
        let d = [ue.x - s.x, ue.y - s.y, ue.z - s.z];
        let n = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] += d[i] * d[j] / (n * n);
            }
        }
    }
    let cof =
        |r0: usize, r1: usize, c0: usize, c1: usize| m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0];
    let c00 = cof(1, 2, 1, 2);
    let c11 = cof(0, 2, 0, 2);
    let c22 = cof(0, 1, 0, 1);
    let det = m[0][0] * c00 - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    if det.abs() < 1e-12 {
        return None;
    }
    Some(((c00 + c11 + c22) / det).sqrt())
}

/// All `k`-subsets of `items`, by bitmask.
pub fn bitmask_subsets(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    let n = items.len();
    let mut out: Vec<Vec<usize>> = (0u64..(1u64 << n))
        .filter(|m| m.count_ones() as usize == k)
        .map(|m| {
            (0..n)
                .filter(|i| m & (1 << i) != 0)
                .map(|i| items[i])
                .collect()
        })
        .collect();
    out.sort();
    out
}

/// Minimum-GDOP `k`-subset of `candidates` by full enumeration; the first
/// minimum in lexicographic order wins.
pub fn exhaustive_min_gdop(
    ue: &Position3D,
    sats: &[Position3D],
    candidates: &[usize],
    k: usize,
) -> Option<(Vec<usize>, f64)> {
    let mut best: Option<(Vec<usize>, f64)> = None;
    for subset in bitmask_subsets(candidates, k) {
        let chosen: Vec<Position3D> = subset.iter().map(|&s| sats[s]).collect();
        if let Some(g) = gdop_adjugate(ue, &chosen) {
            if best.as_ref().is_none_or(|(_, b)| g < *b) {
                best = Some((subset, g));
            }
        }
    }
    best
}

/// Optimum over every coalition structure whose coalitions all have size
/// `serving` and GDOP at most `threshold`, with beams from `scheme`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExhaustiveOptimum {
    pub utility: f64,
    pub coalitions: Vec<Vec<usize>>,
    pub structures: usize,
}

pub fn exhaustive_cfg_optimum(
    scenario: &Scenario,
    channels: &ChannelSet,
    scheme: &BeamformingScheme,
    serving: usize,
    threshold: f64,
) -> Result<ExhaustiveOptimum, HarnessError> {
    let sats: Vec<Position3D> = scenario.satellites.iter().map(|s| s.position).collect();
    let options: Vec<Vec<Vec<usize>>> = scenario
        .ues
        .iter()
        .map(|ue| {
            let visible: Vec<usize> = (0..sats.len())
                .filter(|&s| elevation(ue, &sats[s]) >= 0.0)
                .collect();
            bitmask_subsets(&visible, serving)
                .into_iter()
                .filter(|subset| {
                    let chosen: Vec<Position3D> = subset.iter().map(|&s| sats[s]).collect();
                    gdop_adjugate(ue, &chosen).is_some_and(|g| g <= threshold)
                })
                .collect()
        })
        .collect();
    if let Some(ue) = options.iter().position(|o| o.is_empty()) {
        return Err(leo_ican_core::Error::EmptyPreferenceList { ue, threshold }.into());
    }
    let radio = &scenario.radio;
    let mut designs: HashMap<(usize, Vec<usize>), Option<Vec<CVector>>> = HashMap::new();
    let mut best: Option<(f64, Vec<Vec<usize>>)> = None;
    let mut index = vec![0usize; options.len()];
    let mut structures = 0;
    'outer: loop {
        structures += 1;
        let coalitions: Vec<Vec<usize>> = index
            .iter()
            .enumerate()
            .map(|(c, &i)| options[c][i].clone())
            .collect();
        let assignment = LinkAssignment::from_coalitions(scenario.satellite_count(), &coalitions);
        let mut beams = BeamformerSet::new(scenario.satellite_count(), scenario.ue_count());
        let mut servable = true;
        for s in 0..scenario.satellite_count() {
            let ues = assignment.served_ues(s);
            let entry = designs.entry((s, ues.clone())).or_insert_with(|| {
                scheme
                    .design(s, &ues, channels, radio)
                    .ok()
                    .map(|d| d.beams)
            });
            match entry {
                Some(ws) => {
                    for (c, w) in ues.iter().zip(ws.iter()) {
                        beams.insert(s, *c, w.clone());
                    }
                }
                None => servable = false,
            }
        }
        if servable {
            let u = sum_rate(
                channels,
                &beams,
                &assignment,
                radio.bandwidth_hz,
                radio.noise_power_w,
            )?;
            if best.as_ref().is_none_or(|(b, _)| u > *b) {
                best = Some((u, coalitions));
            }
        }
        let mut c = 0;
        loop {
            if c == index.len() {
                break 'outer;
            }
            index[c] += 1;
            if index[c] < options[c].len() {
                break;
            }
            index[c] = 0;
            c += 1;
        }
    }
    let (utility, coalitions) = best.ok_or(HarnessError::Oracle("no structure can be served"))?;
    Ok(ExhaustiveOptimum {
        utility,
        coalitions,
        structures,
    })
}
