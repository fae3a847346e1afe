//! Satellite selection: the GDOP-greedy baseline and the coalition formation
//! game, where each user's coalition is the set of `I` satellites serving it.

use alloc::collections::BTreeMap;
use alloc::rc::Rc;
use alloc::vec::Vec;

use crate::beamforming::{BeamformerSet, BeamformingScheme, SatelliteDesign};
use crate::channel::ChannelSet;
use crate::error::{Error, Result};
use crate::geometry::{elevation, Position3D, Scenario};
use crate::metrics::{gdop_of, LinkAssignment};

/// Largest constellation searched exhaustively by [`gdop_greedy_selection`].
pub const EXHAUSTIVE_LIMIT: usize = 16;

/// Relative gain a switch must bring in multi-pass mode.
pub const STRICT_IMPROVEMENT: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionParams {
    /// Satellites per user, `I`.
    pub serving: usize,
    /// GDOP threshold `gamma`.
    pub gdop_threshold: f64,
    /// Repeat the switch pass until nothing is accepted.
    pub multi_pass: bool,
    pub max_passes: usize,
    /// Keep at most this many entries of each preference list.
    pub preference_cap: Option<usize>,
}

impl Default for SelectionParams {
    fn default() -> Self {
        Self {
            serving: 4,
            gdop_threshold: 6.0,
            multi_pass: false,
            max_passes: 20,
            preference_cap: None,
        }
    }
}

/// All `k`-subsets of `0..n` in lexicographic order.
pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.clone());
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if idx[i] < n - k + i {
                break;
            }
            if i == 0 {
                return out;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

fn subset_gdop(ue: &Position3D, sats: &[Position3D], subset: &[usize]) -> Option<f64> {
    let chosen: Vec<Position3D> = subset.iter().map(|&s| sats[s]).collect();
    gdop_of(ue, &chosen).ok()
}

/// Indices of satellites above the horizon of `ue`.
pub fn visible_satellites(scenario: &Scenario, ue: usize) -> Vec<usize> {
    let pos = &scenario.ues[ue];
    (0..scenario.satellite_count())
        .filter(|&s| elevation(pos, &scenario.satellites[s].position) >= 0.0)
        .collect()
}

/// Minimum-GDOP `serving`-subset of `candidates` (indices into `sats`).
/// Exhaustive up to [`EXHAUSTIVE_LIMIT`] candidates with lexicographic
/// tie-breaking; beyond that the best triple is grown one satellite at a time.
pub fn min_gdop_subset(
    ue: &Position3D,
    sats: &[Position3D],
    candidates: &[usize],
    serving: usize,
) -> Option<(Vec<usize>, f64)> {
    if serving > candidates.len() || serving < 3 {
        return None;
    }
    let pick = |local: &[usize]| -> Vec<usize> { local.iter().map(|&i| candidates[i]).collect() };
    let best_of = |pool: Vec<Vec<usize>>| {
        let mut best: Option<(Vec<usize>, f64)> = None;
        for local in pool {
            let subset = pick(&local);
            if let Some(g) = subset_gdop(ue, sats, &subset) {
                if best.as_ref().is_none_or(|(_, b)| g < *b) {
                    best = Some((local, g));
                }
            }
        }
        best
    };
    if candidates.len() <= EXHAUSTIVE_LIMIT {
        return best_of(subsets(candidates.len(), serving)).map(|(l, g)| (pick(&l), g));
    }
    let (mut local, mut g) = best_of(subsets(candidates.len(), 3))?;
    while local.len() < serving {
        let mut step: Option<(usize, f64)> = None;
        for extra in 0..candidates.len() {
            if local.contains(&extra) {
                continue;
            }
            let mut trial = local.clone();
            trial.push(extra);
            trial.sort_unstable();
            if let Some(t) = subset_gdop(ue, sats, &pick(&trial)) {
                if step.is_none_or(|(_, b)| t < b) {
                    step = Some((extra, t));
                }
            }
        }
        let (extra, t) = step?;
        local.push(extra);
        local.sort_unstable();
        g = t;
    }
    Some((pick(&local), g))
}

/// The `serving`-subset of visible satellites minimizing the GDOP of `ue`.
pub fn gdop_greedy_selection(
    scenario: &Scenario,
    ue: usize,
    serving: usize,
) -> Result<(Vec<usize>, f64)> {
    let visible = visible_satellites(scenario, ue);
    if visible.len() < serving || serving < 3 {
        return Err(Error::TooFewSatellites {
            have: visible.len(),
            need: serving.max(3),
        });
    }
    min_gdop_subset(
        &scenario.ues[ue],
        &scenario.satellite_positions(),
        &visible,
        serving,
    )
    .ok_or(Error::NoFeasibleSubset { ue })
}

/// GDOP-feasible subsets of one user, ascending by GDOP.
#[derive(Debug, Clone, PartialEq)]
pub struct PreferenceList {
    pub ue: usize,
    pub entries: Vec<(Vec<usize>, f64)>,
}

impl PreferenceList {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Every `serving`-subset of visible satellites with GDOP at most `threshold`,
/// sorted ascending by GDOP. Equal GDOPs keep lexicographic order.
pub fn build_preference_list(
    scenario: &Scenario,
    ue: usize,
    serving: usize,
    threshold: f64,
) -> Result<PreferenceList> {
    let visible = visible_satellites(scenario, ue);
    if visible.len() < serving || serving < 3 {
        return Err(Error::TooFewSatellites {
            have: visible.len(),
            need: serving.max(3),
        });
    }
    let sats = scenario.satellite_positions();
    let mut entries: Vec<(Vec<usize>, f64)> = subsets(visible.len(), serving)
        .into_iter()
        .filter_map(|local| {
            let subset: Vec<usize> = local.iter().map(|&i| visible[i]).collect();
            subset_gdop(&scenario.ues[ue], &sats, &subset).map(|g| (subset, g))
        })
        .filter(|(_, g)| *g <= threshold)
        .collect();
    entries.sort_by(|a, b| a.1.total_cmp(&b.1));
    Ok(PreferenceList { ue, entries })
}

/// Serving sets of all users with their GDOPs and the network utility.
#[derive(Debug, Clone, PartialEq)]
pub struct CoalitionStructure {
    pub coalitions: Vec<Vec<usize>>,
    pub gdop: Vec<f64>,
    pub utility: f64,
}

impl CoalitionStructure {
    pub fn assignment(&self, satellites: usize) -> LinkAssignment {
        LinkAssignment::from_coalitions(satellites, &self.coalitions)
    }

    /// Checks `|M_c| = I` and `GDOP_c <= gamma` for every user.
    pub fn is_feasible(&self, serving: usize, threshold: f64) -> bool {
        self.coalitions.iter().all(|m| m.len() == serving)
            && self.gdop.iter().all(|g| *g <= threshold)
    }
}

/// Memoized per-satellite designs keyed by `(satellite, served users)`.
pub struct DesignCache<'a> {
    channels: &'a ChannelSet,
    scenario: &'a Scenario,
    scheme: &'a BeamformingScheme,
    designs: BTreeMap<(usize, Vec<usize>), Result<Rc<SatelliteDesign>>>,
    solves: usize,
}

impl<'a> DesignCache<'a> {
    pub fn new(
        scenario: &'a Scenario,
        channels: &'a ChannelSet,
        scheme: &'a BeamformingScheme,
    ) -> Self {
        Self {
            channels,
            scenario,
            scheme,
            designs: BTreeMap::new(),
            solves: 0,
        }
    }

    /// Number of designs actually computed.
    pub fn solves(&self) -> usize {
        self.solves
    }

    pub fn design(&mut self, sat: usize, ues: &[usize]) -> Result<Rc<SatelliteDesign>> {
        let key = (sat, ues.to_vec());
        if let Some(hit) = self.designs.get(&key) {
            return hit.clone();
        }
        self.solves += 1;
        let made = self
            .scheme
            .design(sat, ues, self.channels, &self.scenario.radio)
            .map(Rc::new);
        self.designs.insert(key, made.clone());
        made
    }

    /// Designs of every satellite for the given coalitions.
    pub fn designs_for(&mut self, coalitions: &[Vec<usize>]) -> Result<Vec<Rc<SatelliteDesign>>> {
        let assignment =
            LinkAssignment::from_coalitions(self.scenario.satellite_count(), coalitions);
        (0..self.scenario.satellite_count())
            .map(|s| self.design(s, &assignment.served_ues(s)))
            .collect()
    }

    /// Network sum rate `U` of the given coalitions.
    pub fn utility(&mut self, coalitions: &[Vec<usize>]) -> Result<f64> {
        Ok(self
            .designs_for(coalitions)?
            .iter()
            .map(|d| d.sum_rate)
            .sum())
    }
}

/// One tentative switch of the coalition search.
#[derive(Debug, Clone, PartialEq)]
pub struct SwitchRecord {
    pub pass: usize,
    pub ue: usize,
    pub candidate: Vec<usize>,
    pub gdop: f64,
    pub u_old: f64,
    /// `None` when the inner scheme cannot serve the candidate structure.
    pub u_new: Option<f64>,
    pub accepted: bool,
}

/// Result of a selection run with its beams.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionOutcome {
    pub structure: CoalitionStructure,
    pub initial_utility: f64,
    pub beams: BeamformerSet,
    pub designs: Vec<SatelliteDesign>,
    pub switches: Vec<SwitchRecord>,
    pub passes: usize,
    /// Distinct per-satellite designs computed.
    pub solves: usize,
}

fn infeasible_for_scheme(e: &Error) -> bool {
    matches!(
        e,
        Error::ZfDimensionOverflow { .. } | Error::ZfRankDeficient { .. }
    )
}

fn finish(
    cache: &mut DesignCache<'_>,
    coalitions: Vec<Vec<usize>>,
    gdop: Vec<f64>,
    initial_utility: f64,
    switches: Vec<SwitchRecord>,
    passes: usize,
) -> Result<SelectionOutcome> {
    let designs = cache.designs_for(&coalitions)?;
    let mut beams = BeamformerSet::new(cache.scenario.satellite_count(), cache.scenario.ue_count());
    for d in &designs {
        for (c, w) in d.ues.iter().zip(&d.beams) {
            beams.insert(d.sat, *c, w.clone());
        }
    }
    let utility = designs.iter().map(|d| d.sum_rate).sum();
    Ok(SelectionOutcome {
        structure: CoalitionStructure {
            coalitions,
            gdop,
            utility,
        },
        initial_utility,
        beams,
        designs: designs.iter().map(|d| (**d).clone()).collect(),
        switches,
        passes,
        solves: cache.solves(),
    })
}

fn greedy_structure(
    scenario: &Scenario,
    params: &SelectionParams,
) -> Result<(Vec<Vec<usize>>, Vec<f64>)> {
    let mut coalitions = Vec::with_capacity(scenario.ue_count());
    let mut gdops = Vec::with_capacity(scenario.ue_count());
    for c in 0..scenario.ue_count() {
        let (subset, g) = gdop_greedy_selection(scenario, c, params.serving)?;
        if g > params.gdop_threshold {
            return Err(Error::EmptyPreferenceList {
                ue: c,
                threshold: params.gdop_threshold,
            });
        }
        coalitions.push(subset);
        gdops.push(g);
    }
    Ok((coalitions, gdops))
}

/// The GDOP-greedy baseline: every user takes its minimum-GDOP subset and
/// the inner scheme designs the beams.
pub fn gdop_greedy_outcome(
    scenario: &Scenario,
    channels: &ChannelSet,
    scheme: &BeamformingScheme,
    params: &SelectionParams,
) -> Result<SelectionOutcome> {
    let (coalitions, gdops) = greedy_structure(scenario, params)?;
    let mut cache = DesignCache::new(scenario, channels, scheme);
    let u = cache.utility(&coalitions)?;
    finish(&mut cache, coalitions, gdops, u, Vec::new(), 0)
}

/// Coalition formation: start from the GDOP-greedy structure, then let each user in
/// id order try every entry of its preference list, keeping a switch when the
/// utility does not drop (or rises by [`STRICT_IMPROVEMENT`] in multi-pass
/// mode). Entries equal to the current coalition are skipped.
pub fn cfg_selection(
    scenario: &Scenario,
    channels: &ChannelSet,
    scheme: &BeamformingScheme,
    params: &SelectionParams,
) -> Result<SelectionOutcome> {
    let mut preferences = Vec::with_capacity(scenario.ue_count());
    for c in 0..scenario.ue_count() {
        let mut list = build_preference_list(scenario, c, params.serving, params.gdop_threshold)?;
        if list.is_empty() {
            return Err(Error::EmptyPreferenceList {
                ue: c,
                threshold: params.gdop_threshold,
            });
        }
        if let Some(cap) = params.preference_cap {
            list.entries.truncate(cap.max(1));
        }
        preferences.push(list);
    }
    let (mut coalitions, mut gdops) = match greedy_structure(scenario, params) {
        Ok(s) => s,
        Err(Error::EmptyPreferenceList { .. }) => preferences
            .iter()
            .map(|p| (p.entries[0].0.clone(), p.entries[0].1))
            .unzip(),
        Err(e) => return Err(e),
    };
    let mut cache = DesignCache::new(scenario, channels, scheme);
    let initial_utility = cache.utility(&coalitions)?;
    let mut u_old = initial_utility;
    let mut switches = Vec::new();
    let max_passes = if params.multi_pass {
        params.max_passes.max(1)
    } else {
        1
    };
    let mut passes = 0;
    while passes < max_passes {
        passes += 1;
        let mut accepted_any = false;
        for (c, list) in preferences.iter().enumerate() {
            for (candidate, g) in &list.entries {
                if *candidate == coalitions[c] {
                    continue;
                }
                let previous = core::mem::replace(&mut coalitions[c], candidate.clone());
                let u_new = match cache.utility(&coalitions) {
                    Ok(u) => Some(u),
                    Err(e) if infeasible_for_scheme(&e) => None,
                    Err(e) => return Err(e),
                };
                let accepted = match u_new {
                    Some(u) if params.multi_pass => u > u_old + STRICT_IMPROVEMENT * u_old.abs(),
                    Some(u) => u >= u_old,
                    None => false,
                };
                switches.push(SwitchRecord {
                    pass: passes,
                    ue: c,
                    candidate: candidate.clone(),
                    gdop: *g,
                    u_old,
                    u_new,
                    accepted,
                });
                if accepted {
                    u_old = u_new.unwrap_or(u_old);
                    gdops[c] = *g;
                    accepted_any = true;
                } else {
                    coalitions[c] = previous;
                }
            }
        }
        if !accepted_any {
            break;
        }
    }
    finish(
        &mut cache,
        coalitions,
        gdops,
        initial_utility,
        switches,
        passes,
    )
}
