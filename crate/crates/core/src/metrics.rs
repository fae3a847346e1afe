//! Communication and navigation metrics: per-link SINR and rate, sum rate,
//! and the per-user GDOP of a serving-satellite set.
//!
//! Satellites transmit on orthogonal carriers, so a link only sees
//! interference from the other beams of its own satellite.

use alloc::vec::Vec;

use nalgebra::{Matrix3, SymmetricEigen, Vector3};

use crate::beamforming::BeamformerSet;
use crate::channel::ChannelSet;
use crate::error::{Error, Result};
use crate::geometry::{distance, Position3D};
use crate::math;

/// Smallest admissible eigenvalue of `GᵀG` before the geometry counts as singular.
pub const GDOP_SINGULARITY_THRESHOLD: f64 = 1e-10;

/// Binary service indicator between satellites and users.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinkAssignment {
    satellites: usize,
    ues: usize,
    alpha: Vec<bool>,
}

impl LinkAssignment {
    pub fn empty(satellites: usize, ues: usize) -> Self {
        Self {
            satellites,
            ues,
            alpha: alloc::vec![false; satellites * ues],
        }
    }

    /// Assignment where user `c` is served by every satellite in `coalitions[c]`.
    pub fn from_coalitions(satellites: usize, coalitions: &[Vec<usize>]) -> Self {
        let mut a = Self::empty(satellites, coalitions.len());
        for (c, sats) in coalitions.iter().enumerate() {
            for &s in sats {
                a.set(s, c, true);
            }
        }
        a
    }

    pub fn satellite_count(&self) -> usize {
        self.satellites
    }

    pub fn ue_count(&self) -> usize {
        self.ues
    }

    pub fn set(&mut self, sat: usize, ue: usize, active: bool) {
        self.alpha[sat * self.ues + ue] = active;
    }

    pub fn is_active(&self, sat: usize, ue: usize) -> bool {
        self.alpha[sat * self.ues + ue]
    }

    /// Users served by `sat`, ascending.
    pub fn served_ues(&self, sat: usize) -> Vec<usize> {
        (0..self.ues).filter(|&c| self.is_active(sat, c)).collect()
    }

    /// Satellites serving `ue`, ascending.
    pub fn serving_satellites(&self, ue: usize) -> Vec<usize> {
        (0..self.satellites)
            .filter(|&s| self.is_active(s, ue))
            .collect()
    }

    pub fn active_links(&self) -> usize {
        self.alpha.iter().filter(|a| **a).count()
    }
}

fn beam(beams: &BeamformerSet, sat: usize, ue: usize) -> Result<&crate::CVector> {
    beams.get(sat, ue).ok_or(Error::MissingBeam { sat, ue })
}

/// SINR of the active link `(sat, ue)`.
pub fn sinr(
    sat: usize,
    ue: usize,
    channels: &ChannelSet,
    beams: &BeamformerSet,
    assignment: &LinkAssignment,
    noise_power: f64,
) -> Result<f64> {
    if !assignment.is_active(sat, ue) {
        return Err(Error::InactiveLink { sat, ue });
    }
    let h = channels.h(sat, ue);
    let signal = h.dotc(beam(beams, sat, ue)?).norm_sqr();
    let mut interference = 0.0;
    for other in assignment.served_ues(sat) {
        if other != ue {
            interference += h.dotc(beam(beams, sat, other)?).norm_sqr();
        }
    }
    Ok(signal / (interference + noise_power))
}

/// Shannon rate `B log2(1 + SINR)`, bits/s.
pub fn rate(bandwidth: f64, sinr: f64) -> f64 {
    bandwidth * math::log2(1.0 + sinr)
}

/// Rate of every active link, satellite-major.
pub fn link_rates(
    channels: &ChannelSet,
    beams: &BeamformerSet,
    assignment: &LinkAssignment,
    bandwidth: f64,
    noise_power: f64,
) -> Result<Vec<(usize, usize, f64)>> {
    let mut out = Vec::with_capacity(assignment.active_links());
    for s in 0..assignment.satellite_count() {
        for c in assignment.served_ues(s) {
            let r = rate(
                bandwidth,
                sinr(s, c, channels, beams, assignment, noise_power)?,
            );
            out.push((s, c, r));
        }
    }
    Ok(out)
}

/// Total rate received by each user over all of its serving satellites.
pub fn per_ue_rates(
    channels: &ChannelSet,
    beams: &BeamformerSet,
    assignment: &LinkAssignment,
    bandwidth: f64,
    noise_power: f64,
) -> Result<Vec<f64>> {
    let mut totals = alloc::vec![0.0; assignment.ue_count()];
    for (_, c, r) in link_rates(channels, beams, assignment, bandwidth, noise_power)? {
        totals[c] += r;
    }
    Ok(totals)
}

/// Sum of all active link rates.
pub fn sum_rate(
    channels: &ChannelSet,
    beams: &BeamformerSet,
    assignment: &LinkAssignment,
    bandwidth: f64,
    noise_power: f64,
) -> Result<f64> {
    Ok(
        link_rates(channels, beams, assignment, bandwidth, noise_power)?
            .iter()
            .map(|l| l.2)
            .sum(),
    )
}

/// Unit line-of-sight rows `(p_ue - p_sat) / d` for one user.
#[derive(Debug, Clone, PartialEq)]
pub struct GeometryMatrix {
    pub rows: Vec<Vector3<f64>>,
}

impl GeometryMatrix {
    pub fn gram(&self) -> Matrix3<f64> {
        self.rows
            .iter()
            .fold(Matrix3::zeros(), |acc, r| acc + r * r.transpose())
    }
}

pub fn geometry_matrix(ue: &Position3D, sats: &[Position3D]) -> Result<GeometryMatrix> {
    if sats.is_empty() {
        return Err(Error::TooFewSatellites { have: 0, need: 1 });
    }
    let rows = sats
        .iter()
        .map(|s| {
            let d = distance(ue, s);
            if d == 0.0 {
                return Err(Error::ZeroDistance);
            }
            Ok((ue.vector() - s.vector()) / d)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GeometryMatrix { rows })
}

/// `sqrt(tr((GᵀG)^-1))` with a fixed receiver clock (three columns).
///
/// Geometries whose Gram matrix has an eigenvalue below
/// [`GDOP_SINGULARITY_THRESHOLD`] are reported as singular.
pub fn gdop(g: &GeometryMatrix) -> Result<f64> {
    if g.rows.len() < 3 {
        return Err(Error::TooFewSatellites {
            have: g.rows.len(),
            need: 3,
        });
    }
    let gram = g.gram();
    let min_eigenvalue = SymmetricEigen::new(gram)
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    if min_eigenvalue < GDOP_SINGULARITY_THRESHOLD {
        return Err(Error::SingularGeometry { min_eigenvalue });
    }
    let inverse = gram
        .try_inverse()
        .ok_or(Error::SingularGeometry { min_eigenvalue })?;
    Ok(math::sqrt(inverse.trace()))
}

/// GDOP of `ue` served by the satellites at `sats`.
pub fn gdop_of(ue: &Position3D, sats: &[Position3D]) -> Result<f64> {
    gdop(&geometry_matrix(ue, sats)?)
}
