//! Flat fading and AWGN with perfect channel knowledge at the receiver.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::transceivers::RxObservation;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Fading {
    Awgn,
    #[default]
    Rayleigh,
}

/// Channel model shared by all users.
///
/// User 1 has unit mean power gain; every other user has mean gain
/// `10^(-gain_ratio_db / 10)`, so `gain_ratio_db` is `E|h_1|^2 / E|h_2|^2`
/// in dB.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelSpec {
    pub fading: Fading,
    #[serde(default)]
    pub gain_ratio_db: f64,
    #[serde(default = "default_antennas")]
    pub num_antennas: usize,
    /// Symbols per fading realization; 1 is fast (per-symbol) fading.
    #[serde(default = "default_coherence")]
    pub coherence: usize,
}

fn default_antennas() -> usize {
    1
}

fn default_coherence() -> usize {
    1
}

impl Default for ChannelSpec {
    fn default() -> Self {
        ChannelSpec {
            fading: Fading::Rayleigh,
            gain_ratio_db: 0.0,
            num_antennas: 1,
            coherence: 1,
        }
    }
}

impl ChannelSpec {
    pub fn rayleigh(gain_ratio_db: f64, num_antennas: usize) -> Self {
        ChannelSpec {
            fading: Fading::Rayleigh,
            gain_ratio_db,
            num_antennas,
            coherence: 1,
        }
    }

    pub fn awgn() -> Self {
        ChannelSpec {
            fading: Fading::Awgn,
            ..ChannelSpec::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.gain_ratio_db.is_finite() {
            return Err(Error::invalid("gain_ratio_db", "must be finite"));
        }
        if self.num_antennas == 0 {
            return Err(Error::invalid("num_antennas", "need at least one antenna"));
        }
        if self.coherence == 0 {
            return Err(Error::invalid("coherence", "must be at least 1 symbol"));
        }
        Ok(())
    }

    /// Mean power gain `E|h_k|^2` of user `k` (0-based).
    pub fn mean_gain(&self, user: usize) -> f64 {
        if user == 0 {
            1.0
        } else {
            10f64.powf(-self.gain_ratio_db / 10.0)
        }
    }

    /// Fills `out` with one gain per antenna for user `k`.
    pub fn fill_channel<R: Rng + ?Sized>(&self, user: usize, rng: &mut R, out: &mut [Complex64]) {
        let g = self.mean_gain(user);
        match self.fading {
            Fading::Awgn => out.fill(Complex64::new(g.sqrt(), 0.0)),
            Fading::Rayleigh => {
                let s = (g / 2.0).sqrt();
                for h in out {
                    *h = complex_normal(rng) * s;
                }
            }
        }
    }

    /// Draws the gains of user `k` on every receive antenna.
    pub fn draw_channel<R: Rng + ?Sized>(&self, user: usize, rng: &mut R) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.num_antennas];
        self.fill_channel(user, rng, &mut out);
        out
    }
}

/// Total transmit SNR `P_T / N_0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub snr_total_db: f64,
}

impl NoiseSpec {
    pub fn new(snr_total_db: f64) -> Result<Self> {
        if !snr_total_db.is_finite() {
            return Err(Error::invalid("snr_total_db", "must be finite"));
        }
        Ok(NoiseSpec { snr_total_db })
    }

    /// `N_0` for the given total transmit power.
    pub fn noise_density(&self, total_power: f64) -> f64 {
        total_power / 10f64.powf(self.snr_total_db / 10.0)
    }
}

/// `CN(0, 2)` sample: unit variance per real dimension.
fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Writes `r_l = h_l s + z_l` into `samples`, `z_l ~ CN(0, N_0)`.
pub fn fill_observation<R: Rng + ?Sized>(
    sample: Complex64,
    gains: &[Complex64],
    noise_density: f64,
    rng: &mut R,
    samples: &mut [Complex64],
) {
    let s = (noise_density / 2.0).sqrt();
    for (r, h) in samples.iter_mut().zip(gains) {
        *r = h * sample + complex_normal(rng) * s;
    }
}

/// Passes one transmitted sample through the per-antenna gains and adds
/// noise of density `N_0`. The observation carries the true gains.
pub fn transmit_through<R: Rng + ?Sized>(
    sample: Complex64,
    gains: &[Complex64],
    noise_density: f64,
    rng: &mut R,
) -> Result<RxObservation> {
    let mut samples = vec![Complex64::new(0.0, 0.0); gains.len()];
    fill_observation(sample, gains, noise_density, rng, &mut samples);
    RxObservation::new(samples, gains.to_vec(), noise_density)
}
