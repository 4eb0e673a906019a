//! Transmit-side superposition and the receivers compared in the simulator:
//! the ACMA modified-ML joint receiver, JD-NOMA joint detection with fixed
//! rotations, PD-NOMA successive interference cancellation, and plain
//! single-user ML detection.
//!
//! All receivers assume perfect channel knowledge and combine `L` receive
//! antennas by summing per-antenna squared residuals. Ties go to the
//! smallest candidate index.

use num_complex::Complex64;

use crate::config::{OffsetMode, SystemConfig};
use crate::constellation::{compose, user_alphabets, CompositeConstellation, Constellation};
use crate::error::{Error, Result};
use crate::optimizer::{LookupTable, OffsetVector};

/// Received samples on `L` antennas plus the gains that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct RxObservation {
    samples: Vec<Complex64>,
    channel: Vec<Complex64>,
    noise_density: f64,
}

impl RxObservation {
    pub fn new(samples: Vec<Complex64>, channel: Vec<Complex64>, noise_density: f64) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::invalid("samples", "need at least one antenna"));
        }
        if samples.len() != channel.len() {
            return Err(Error::invalid(
                "channel",
                format!("{} gains for {} samples", channel.len(), samples.len()),
            ));
        }
        if channel.iter().any(|h| !h.re.is_finite() || !h.im.is_finite()) {
            return Err(Error::invalid("channel", "gains must be finite"));
        }
        if channel.iter().all(|h| h.norm_sqr() == 0.0) {
            return Err(Error::invalid("channel", "all gains are zero"));
        }
        if noise_density.is_nan() || noise_density < 0.0 {
            return Err(Error::invalid("noise_density", "must be non-negative"));
        }
        Ok(RxObservation {
            samples,
            channel,
            noise_density,
        })
    }

    /// Noiseless observation of `s` through unit gain on one antenna.
    pub fn noiseless(s: Complex64) -> Self {
        RxObservation {
            samples: vec![s],
            channel: vec![Complex64::new(1.0, 0.0)],
            noise_density: 0.0,
        }
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn channel(&self) -> &[Complex64] {
        &self.channel
    }

    pub fn noise_density(&self) -> f64 {
        self.noise_density
    }

    pub fn num_antennas(&self) -> usize {
        self.samples.len()
    }
}

/// Detected symbol index per user and the metric of the winning hypothesis.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectionResult {
    pub indices: Vec<usize>,
    pub metric: f64,
}

#[inline]
fn residual(samples: &[Complex64], gains: &[Complex64], s: Complex64) -> f64 {
    samples
        .iter()
        .zip(gains)
        .map(|(r, h)| (r - h * s).norm_sqr())
        .sum()
}

/// Index and metric of the candidate closest to the observation.
#[inline]
pub(crate) fn nearest(
    candidates: &[Complex64],
    samples: &[Complex64],
    gains: &[Complex64],
) -> (usize, f64) {
    if let ([r], [h]) = (samples, gains) {
        let mut best = (0, f64::INFINITY);
        for (i, s) in candidates.iter().enumerate() {
            let m = (r - h * s).norm_sqr();
            if m < best.1 {
                best = (i, m);
            }
        }
        return best;
    }
    let mut best = (0, f64::INFINITY);
    for (i, &s) in candidates.iter().enumerate() {
        let m = residual(samples, gains, s);
        if m < best.1 {
            best = (i, m);
        }
    }
    best
}

/// Offsets the transmitter applies: presets in static mode, otherwise the
/// supplied (searched) offsets.
pub fn transmit_offsets(config: &SystemConfig, offsets: &OffsetVector) -> Result<OffsetVector> {
    match config.mode() {
        OffsetMode::Static => OffsetVector::new(config.preset_offsets().unwrap_or_default().to_vec()),
        OffsetMode::Dynamic => Ok(offsets.clone()),
    }
}

/// Composite sample `sum_k sqrt(alpha_k P_T) x_k(m_k) e^{j delta_k}`.
pub fn acma_transmit(
    indices: &[usize],
    config: &SystemConfig,
    offsets: &OffsetVector,
) -> Result<Complex64> {
    let offsets = transmit_offsets(config, offsets)?;
    if indices.len() != config.num_users() || offsets.len() != config.num_users() {
        return Err(Error::invalid(
            "indices",
            format!("expected {} symbol indices", config.num_users()),
        ));
    }
    if let Some((k, &m)) = indices
        .iter()
        .enumerate()
        .find(|(k, &m)| m >= config.mod_orders()[*k] as usize)
    {
        return Err(Error::invalid(
            "indices",
            format!("index {m} out of range for user {} ({}-QAM)", k + 1, config.mod_orders()[k]),
        ));
    }
    let alphabets = user_alphabets(config, offsets.as_slice());
    Ok(indices.iter().zip(&alphabets).map(|(&m, a)| a[m]).sum())
}

/// Exhaustive joint ML over a fixed set of composite candidates.
#[derive(Debug, Clone)]
pub struct JointDetector {
    composite: CompositeConstellation,
}

impl JointDetector {
    pub fn new(config: &SystemConfig, offsets: &OffsetVector) -> Result<Self> {
        Ok(JointDetector {
            composite: compose(config, offsets)?,
        })
    }

    pub fn composite(&self) -> &CompositeConstellation {
        &self.composite
    }

    /// Winning composite index and its metric.
    #[inline]
    pub fn nearest(&self, samples: &[Complex64], gains: &[Complex64]) -> (usize, f64) {
        nearest(self.composite.points(), samples, gains)
    }

    pub fn detect(&self, obs: &RxObservation) -> DetectionResult {
        let (i, metric) = self.nearest(obs.samples(), obs.channel());
        DetectionResult {
            indices: self.composite.label(i).to_vec(),
            metric,
        }
    }
}

/// Modified-ML receiver: offsets come from the shared lookup table (or the
/// static presets), then all composite hypotheses are searched jointly.
#[derive(Debug, Clone)]
pub struct AcmaReceiver {
    detector: JointDetector,
}

impl AcmaReceiver {
    pub fn new(config: &SystemConfig, lookup: &LookupTable) -> Result<Self> {
        let offsets = match config.mode() {
            OffsetMode::Static => {
                OffsetVector::new(config.preset_offsets().unwrap_or_default().to_vec())?
            }
            OffsetMode::Dynamic => lookup.get(config)?.offsets.clone(),
        };
        Ok(AcmaReceiver {
            detector: JointDetector::new(config, &offsets)?,
        })
    }

    pub fn offsets(&self) -> &OffsetVector {
        self.detector.composite().offsets()
    }

    pub fn detector(&self) -> &JointDetector {
        &self.detector
    }

    pub fn detect(&self, obs: &RxObservation) -> DetectionResult {
        self.detector.detect(obs)
    }
}

pub fn mml_detect(
    obs: &RxObservation,
    config: &SystemConfig,
    lookup: &LookupTable,
) -> Result<DetectionResult> {
    Ok(AcmaReceiver::new(config, lookup)?.detect(obs))
}

/// Joint detection against candidates built with externally fixed
/// rotations. If the transmitter used different rotations, the mismatch is
/// simply not modelled by the receiver.
pub fn jd_detect(
    obs: &RxObservation,
    config: &SystemConfig,
    rotations: &OffsetVector,
) -> Result<DetectionResult> {
    Ok(JointDetector::new(config, rotations)?.detect(obs))
}

/// Successive interference cancellation without phase offsets. Users are
/// decoded in order of decreasing power (ties by user order), each by
/// single-user ML on the residual, and their reconstruction subtracted.
#[derive(Debug, Clone)]
pub struct SicReceiver {
    order: Vec<usize>,
    alphabets: Vec<Vec<Complex64>>,
}

impl SicReceiver {
    pub fn new(config: &SystemConfig) -> Result<Self> {
        config.validate()?;
        let k = config.num_users();
        let mut order: Vec<usize> = (0..k).collect();
        let alpha = config.power_coeffs();
        order.sort_by(|&a, &b| alpha[b].total_cmp(&alpha[a]));
        Ok(SicReceiver {
            order,
            alphabets: user_alphabets(config, &vec![0.0; k]),
        })
    }

    /// Users in decoding order.
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// Decodes all users into `out`, using `scratch` as the residual buffer.
    /// Returns the residual energy after the last cancellation.
    pub(crate) fn detect_into(
        &self,
        samples: &[Complex64],
        gains: &[Complex64],
        scratch: &mut Vec<Complex64>,
        out: &mut [usize],
    ) -> f64 {
        scratch.clear();
        scratch.extend_from_slice(samples);
        for &user in &self.order {
            let alphabet = &self.alphabets[user];
            let (m, _) = nearest(alphabet, scratch, gains);
            out[user] = m;
            for (r, h) in scratch.iter_mut().zip(gains) {
                *r -= h * alphabet[m];
            }
        }
        scratch.iter().map(|r| r.norm_sqr()).sum()
    }

    pub fn detect(&self, obs: &RxObservation) -> DetectionResult {
        let mut indices = vec![0; self.alphabets.len()];
        let mut scratch = Vec::with_capacity(obs.num_antennas());
        let metric = self.detect_into(obs.samples(), obs.channel(), &mut scratch, &mut indices);
        DetectionResult { indices, metric }
    }
}

pub fn sic_detect(obs: &RxObservation, config: &SystemConfig) -> Result<DetectionResult> {
    Ok(SicReceiver::new(config)?.detect(obs))
}

/// Nearest point of `sqrt(power) x` after channel weighting.
pub fn single_user_detect(obs: &RxObservation, constellation: &Constellation, power: f64) -> usize {
    let scaled: Vec<Complex64> = constellation
        .points()
        .iter()
        .map(|x| x * power.sqrt())
        .collect();
    nearest(&scaled, obs.samples(), obs.channel()).0
}
