use crate::error::{Error, Result};
use crate::math;

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Link-level radio parameters shared by every satellite in a scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct RadioParams {
    pub frequency_hz: f64,
    /// Bandwidth of each satellite's carrier.
    pub bandwidth_hz: f64,
    /// Per-beam transmit power budget, watts.
    pub beam_power_w: f64,
    /// Receiver noise power over the full bandwidth, watts.
    pub noise_power_w: f64,
    /// Linear atmospheric gain (<= 1).
    pub atmosphere_gain: f64,
    pub antennas_x: usize,
    pub antennas_y: usize,
}

impl RadioParams {
    /// Builds parameters from the usual link-budget quantities.
    pub fn from_link_budget(
        frequency_hz: f64,
        bandwidth_hz: f64,
        beam_power_dbw: f64,
        noise_density_dbm_hz: f64,
        atmosphere_loss_db: f64,
        antennas_x: usize,
        antennas_y: usize,
    ) -> Self {
        let noise_density_w_hz = math::db_to_linear(noise_density_dbm_hz - 30.0);
        Self {
            frequency_hz,
            bandwidth_hz,
            beam_power_w: math::db_to_linear(beam_power_dbw),
            noise_power_w: noise_density_w_hz * bandwidth_hz,
            atmosphere_gain: math::db_to_linear(-atmosphere_loss_db),
            antennas_x,
            antennas_y,
        }
    }

    pub fn wavelength_m(&self) -> f64 {
        SPEED_OF_LIGHT / self.frequency_hz
    }

    pub fn antenna_count(&self) -> usize {
        self.antennas_x * self.antennas_y
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v > 0.0 && v.is_finite();
        if !positive(self.frequency_hz) {
            return Err(Error::InvalidSpec("carrier frequency must be positive"));
        }
        if !positive(self.bandwidth_hz) {
            return Err(Error::InvalidSpec("bandwidth must be positive"));
        }
        if !positive(self.beam_power_w) {
            return Err(Error::InvalidSpec("beam power must be positive"));
        }
        if !positive(self.noise_power_w) {
            return Err(Error::InvalidSpec("noise power must be positive"));
        }
        if !positive(self.atmosphere_gain) {
            return Err(Error::InvalidSpec("atmosphere gain must be positive"));
        }
        if self.antennas_x == 0 || self.antennas_y == 0 {
            return Err(Error::InvalidSpec("antenna counts must be at least 1"));
        }
        Ok(())
    }
}

impl Default for RadioParams {
    /// 4 GHz, 50 MHz, 26 dBW per beam, -174 dBm/Hz, 0.5 dB atmosphere, 4x4 array.
    fn default() -> Self {
        Self::from_link_budget(4e9, 50e6, 26.0, -174.0, 0.5, 4, 4)
    }
}
