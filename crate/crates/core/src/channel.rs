//! Satellite-to-user channel vectors: free-space path loss, a fixed
//! atmospheric gain, a random carrier phase and the planar-array response.

use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::geometry::{distance, upa_angles, Position3D, SatelliteState, Scenario};
use crate::math;
use crate::radio::RadioParams;
use crate::{CVector, C64};

/// Free-space path gain `(wavelength / (4 pi d))^2`.
pub fn path_loss(wavelength: f64, d: f64) -> Result<f64> {
    if !(d > 0.0) {
        return Err(Error::ZeroDistance);
    }
    if !(wavelength > 0.0) {
        return Err(Error::InvalidWavelength);
    }
    Ok(math::powi(wavelength / (4.0 * math::PI * d), 2))
}

fn uniform_linear_response(theta: f64, count: usize) -> Vec<C64> {
    let scale = 1.0 / math::sqrt(count as f64);
    (0..count)
        .map(|m| {
            let phase = -math::PI * m as f64 * theta;
            C64::new(math::cos(phase), math::sin(phase)) * scale
        })
        .collect()
}

/// Planar-array response `v_x(theta_x) ⊗ v_y(theta_y)`, x-major: entry
/// `m * ny + n` is `v_x[m] * v_y[n]`. Unit norm.
pub fn upa_response(theta_x: f64, theta_y: f64, nx: usize, ny: usize) -> CVector {
    let vx = uniform_linear_response(theta_x, nx);
    let vy = uniform_linear_response(theta_y, ny);
    CVector::from_iterator(
        nx * ny,
        vx.iter().flat_map(|a| vy.iter().map(move |b| a * b)),
    )
}

/// One satellite-user channel together with the quantities it was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelVector {
    pub h: CVector,
    pub path_gain: f64,
    pub atmosphere_gain: f64,
    /// Carrier phase, radians in `[0, 2 pi)`.
    pub phase: f64,
    pub steering: (f64, f64),
}

impl ChannelVector {
    /// Assembles `sqrt(G_pl G_at N) e^{-j phase} v` from its parts.
    pub fn compose(
        path_gain: f64,
        atmosphere_gain: f64,
        phase: f64,
        steering: (f64, f64),
        nx: usize,
        ny: usize,
    ) -> Self {
        let v = upa_response(steering.0, steering.1, nx, ny);
        let amplitude = math::sqrt(path_gain * atmosphere_gain * (nx * ny) as f64);
        let rotation = C64::new(math::cos(phase), -math::sin(phase)) * amplitude;
        Self {
            h: v * rotation,
            path_gain,
            atmosphere_gain,
            phase,
            steering,
        }
    }
}

/// Draws the channel for one link. The only random quantity is the carrier
/// phase, taken from `rng`.
pub fn channel_vector<R: Rng + ?Sized>(
    sat: &SatelliteState,
    ue: &Position3D,
    radio: &RadioParams,
    rng: &mut R,
) -> Result<ChannelVector> {
    let steering = upa_angles(sat, ue)?;
    let path_gain = path_loss(radio.wavelength_m(), distance(&sat.position, ue))?;
    let phase = rng.random::<f64>() * math::TAU;
    Ok(ChannelVector::compose(
        path_gain,
        radio.atmosphere_gain,
        phase,
        steering,
        radio.antennas_x,
        radio.antennas_y,
    ))
}

/// Channels for every satellite-user pair of a scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    satellites: usize,
    ues: usize,
    links: Vec<ChannelVector>,
}

impl ChannelSet {
    /// Builds all `S x C` channels, drawing phases satellite-major.
    pub fn build<R: Rng + ?Sized>(scenario: &Scenario, rng: &mut R) -> Result<Self> {
        let mut links = Vec::with_capacity(scenario.satellite_count() * scenario.ue_count());
        for sat in &scenario.satellites {
            for ue in &scenario.ues {
                links.push(channel_vector(sat, ue, &scenario.radio, rng)?);
            }
        }
        Ok(Self {
            satellites: scenario.satellite_count(),
            ues: scenario.ue_count(),
            links,
        })
    }

    /// Wraps explicit channels laid out satellite-major.
    pub fn from_links(satellites: usize, ues: usize, links: Vec<ChannelVector>) -> Result<Self> {
        if links.len() != satellites * ues {
            return Err(Error::DimensionMismatch(
                "link count must equal satellites x users",
            ));
        }
        Ok(Self {
            satellites,
            ues,
            links,
        })
    }

    /// Channels given as raw vectors, with zeroed generative metadata.
    pub fn from_vectors(satellites: usize, ues: usize, vectors: Vec<CVector>) -> Result<Self> {
        let links = vectors
            .into_iter()
            .map(|h| ChannelVector {
                h,
                path_gain: 0.0,
                atmosphere_gain: 0.0,
                phase: 0.0,
                steering: (0.0, 0.0),
            })
            .collect();
        Self::from_links(satellites, ues, links)
    }

    pub fn satellite_count(&self) -> usize {
        self.satellites
    }

    pub fn ue_count(&self) -> usize {
        self.ues
    }

    pub fn get(&self, sat: usize, ue: usize) -> &ChannelVector {
        &self.links[sat * self.ues + ue]
    }

    pub fn h(&self, sat: usize, ue: usize) -> &CVector {
        &self.get(sat, ue).h
    }

    /// Channels of the listed users on one satellite.
    pub fn satellite_channels(&self, sat: usize, ues: &[usize]) -> Vec<CVector> {
        ues.iter().map(|&c| self.h(sat, c).clone()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{generate_scenario, ScenarioSpec};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn path_loss_examples() {
        let d = 1234.5;
        assert!((path_loss(4.0 * math::PI * d, d).unwrap() - 1.0).abs() < 1e-15);
        let lambda = crate::radio::SPEED_OF_LIGHT / 4e9;
        let loss_db = -math::linear_to_db(path_loss(lambda, 600e3).unwrap());
        // 20 log10(4 pi 600e3 / 0.0749481145) = 160.0520...
        assert!((loss_db - 160.052_0).abs() < 1e-3, "{loss_db}");
        let ratio = path_loss(lambda, 2.0 * d).unwrap() / path_loss(lambda, d).unwrap();
        assert!((ratio - 0.25).abs() < 1e-15);
        assert_eq!(path_loss(lambda, 0.0), Err(Error::ZeroDistance));
    }

    #[test]
    fn upa_response_examples() {
        let v = upa_response(0.3, -0.2, 1, 1);
        assert_eq!(v.len(), 1);
        assert!((v[0] - C64::new(1.0, 0.0)).norm() < 1e-15);
        let s = 1.0 / 2f64.sqrt();
        let v = upa_response(0.0, 0.0, 2, 1);
        assert!((v[0] - C64::new(s, 0.0)).norm() < 1e-15);
        assert!((v[1] - C64::new(s, 0.0)).norm() < 1e-15);
        let v = upa_response(1.0, 0.0, 2, 1);
        assert!((v[1] - C64::new(-s, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn scalar_channel_magnitude() {
        let ch = ChannelVector::compose(1e-16, 1.0, 1.0, (0.1, 0.2), 1, 1);
        assert!((ch.h[0].norm() - 1e-8).abs() < 1e-20);
        let expected = C64::new(1.0f64.cos(), -1.0f64.sin()) * 1e-8;
        assert!((ch.h[0] - expected).norm() < 1e-20);
    }

    #[test]
    fn channels_are_deterministic() {
        let spec = ScenarioSpec::default();
        let sc = generate_scenario(&spec, 3).unwrap();
        let a = ChannelSet::build(&sc, &mut ChaCha8Rng::seed_from_u64(11)).unwrap();
        let b = ChannelSet::build(&sc, &mut ChaCha8Rng::seed_from_u64(11)).unwrap();
        assert_eq!(a, b);
        for s in 0..sc.satellite_count() {
            for c in 0..sc.ue_count() {
                let ch = a.get(s, c);
                let expected = ch.path_gain * ch.atmosphere_gain * 16.0;
                assert!((ch.h.norm_squared() - expected).abs() <= 1e-9 * expected);
            }
        }
    }

    #[test]
    fn phase_is_uniform() {
        let sc = generate_scenario(
            &ScenarioSpec {
                satellites: 1,
                cells: 1,
                ..Default::default()
            },
            0,
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let draws = 20_000;
        let mut acc = C64::new(0.0, 0.0);
        for _ in 0..draws {
            let ch = channel_vector(&sc.satellites[0], &sc.ues[0], &sc.radio, &mut rng).unwrap();
            assert!((0.0..math::TAU).contains(&ch.phase));
            acc += C64::new(ch.phase.cos(), ch.phase.sin());
        }
        assert!((acc / draws as f64).norm() < 0.05);
    }

    proptest! {
        #[test]
        fn upa_response_is_unit_kronecker(
            tx in -1.0f64..1.0, ty in -1.0f64..1.0, nx in 1usize..9, ny in 1usize..9,
        ) {
            let v = upa_response(tx, ty, nx, ny);
            prop_assert!((v.norm() - 1.0).abs() < 1e-12);
            let vx = upa_response(tx, 0.0, nx, 1);
            let vy = upa_response(0.0, ty, 1, ny);
            for m in 0..nx {
                for n in 0..ny {
                    prop_assert!((v[m * ny + n] - vx[m] * vy[n]).norm() < 1e-12);
                }
            }
            let every = v.iter().all(|e| (e.norm() - v[0].norm()).abs() < 1e-12);
            prop_assert!(every);
        }

        #[test]
        fn channel_norm_identity(
            gain in 1e-20f64..1e-10, atm in 0.1f64..1.0, phase in 0.0f64..core::f64::consts::TAU,
            tx in -1.0f64..1.0, ty in -1.0f64..1.0, nx in 1usize..6, ny in 1usize..6,
        ) {
            let ch = ChannelVector::compose(gain, atm, phase, (tx, ty), nx, ny);
            let expected = gain * atm * (nx * ny) as f64;
            prop_assert!((ch.h.norm_squared() - expected).abs() <= 1e-9 * expected);
        }
    }
}
