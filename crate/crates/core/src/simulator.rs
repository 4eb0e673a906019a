//! Monte Carlo SER and throughput engine.
//!
//! Trials are grouped in fixed blocks of [`BLOCK_TRIALS`]; every block owns
//! RNG streams derived from `(seed, grid point, block index)`, so block
//! results do not depend on which thread computes them. Blocks are folded in
//! index order and the stopping rule is checked after each one, which makes
//! the outcome identical for any worker count.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::analytic::{is_square_qam_order, square_qam_d2min, square_qam_ser};
use crate::channel::{fill_observation, ChannelSpec, NoiseSpec};
use crate::config::{OffsetMode, SystemConfig};
use crate::constellation::{compose, make_qam, CompositeConstellation};
use crate::error::{Error, Result};
use crate::optimizer::{min_squared_distance, LookupTable, OffsetVector};
use crate::transceivers::{nearest, transmit_offsets, AcmaReceiver, JointDetector, SicReceiver};

/// Trials per RNG block.
pub const BLOCK_TRIALS: u64 = 1000;
/// Smallest accepted `symbols_per_point`.
pub const MIN_SYMBOLS_PER_POINT: u64 = 10_000;
/// Trial cap as a multiple of `symbols_per_point`.
pub const CAP_FACTOR: u64 = 100;
pub const DEFAULT_SYMBOLS_PER_POINT: u64 = 100_000;
pub const DEFAULT_MIN_ERRORS: u64 = 200;

/// Multiple-access scheme under test.
#[derive(Debug, Clone, PartialEq)]
pub enum Scheme {
    /// Searched offsets at the transmitter, modified-ML joint receiver.
    Acma,
    /// Fixed rotations, joint ML receiver. `receive` may differ from
    /// `transmit` to model a receiver that cannot follow the rotation.
    JdNoma {
        transmit: OffsetVector,
        receive: OffsetVector,
    },
    /// No rotation, SIC receiver.
    PdNoma,
    /// User `k` alone in a fraction `alpha_k` of the slots at full power.
    Tdma,
    /// One user with the whole resource.
    SingleUser { order: u32 },
}

impl Scheme {
    /// JD-NOMA with the same rotations at both ends.
    pub fn jd_noma(rotations: OffsetVector) -> Self {
        Scheme::JdNoma {
            transmit: rotations.clone(),
            receive: rotations,
        }
    }

    /// Short label used in reports.
    pub fn label(&self) -> String {
        let deg = |v: &OffsetVector| {
            v.degrees()
                .iter()
                .map(|d| format!("{}", (d * 1e6).round() / 1e6))
                .collect::<Vec<_>>()
                .join("/")
        };
        match self {
            Scheme::Acma => "acma".into(),
            Scheme::JdNoma { transmit, receive } if transmit == receive => {
                format!("jd-noma[{}deg]", deg(transmit))
            }
            Scheme::JdNoma { transmit, receive } => {
                format!("jd-noma[tx {}deg rx {}deg]", deg(transmit), deg(receive))
            }
            Scheme::PdNoma => "pd-noma".into(),
            Scheme::Tdma => "tdma".into(),
            Scheme::SingleUser { order } => format!("single-user-{order}qam"),
        }
    }
}

/// Everything needed to reproduce one SER curve.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub scheme: Scheme,
    pub config: SystemConfig,
    pub channel: ChannelSpec,
    pub snr_grid_db: Vec<f64>,
    /// Values of `alpha_1` for two-user sweeps.
    pub alpha_grid: Option<Vec<f64>>,
    pub symbols_per_point: u64,
    pub min_errors: u64,
    pub seed: u64,
}

impl ExperimentSpec {
    pub fn new(scheme: Scheme, config: SystemConfig, channel: ChannelSpec, snr_grid_db: Vec<f64>) -> Self {
        ExperimentSpec {
            scheme,
            config,
            channel,
            snr_grid_db,
            alpha_grid: None,
            symbols_per_point: DEFAULT_SYMBOLS_PER_POINT,
            min_errors: DEFAULT_MIN_ERRORS,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.config.validate()?;
        self.channel.validate()?;
        if self.symbols_per_point < MIN_SYMBOLS_PER_POINT {
            return Err(Error::invalid(
                "symbols_per_point",
                format!("must be at least {MIN_SYMBOLS_PER_POINT}"),
            ));
        }
        if !BLOCK_TRIALS.is_multiple_of(self.channel.coherence as u64) {
            return Err(Error::invalid(
                "coherence",
                format!("must divide the block length {BLOCK_TRIALS}"),
            ));
        }
        check_grid("snr_grid_db", &self.snr_grid_db)?;
        if let Some(alpha) = &self.alpha_grid {
            check_grid("alpha_grid", alpha)?;
            if alpha.iter().any(|a| !(0.0..=1.0).contains(a)) {
                return Err(Error::invalid("alpha_grid", "values must lie in [0, 1]"));
            }
        }
        let k = self.config.num_users();
        match &self.scheme {
            Scheme::JdNoma { transmit, receive } => {
                if transmit.len() != k || receive.len() != k {
                    return Err(Error::invalid("rotations", format!("expected {k} rotations")));
                }
            }
            Scheme::SingleUser { order } => {
                make_qam(*order)?;
            }
            _ => {}
        }
        Ok(())
    }

    fn cap(&self) -> u64 {
        self.symbols_per_point * CAP_FACTOR
    }
}

fn check_grid(field: &'static str, grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::invalid(field, "grid is empty"));
    }
    if grid.iter().any(|x| !x.is_finite()) {
        return Err(Error::invalid(field, "grid values must be finite"));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid(field, "grid must be strictly increasing"));
    }
    Ok(())
}

/// Error and trial counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Tally {
    pub errors: u64,
    pub trials: u64,
}

impl Tally {
    pub fn ser(&self) -> f64 {
        if self.trials == 0 {
            0.0
        } else {
            self.errors as f64 / self.trials as f64
        }
    }

    /// Normal-approximation 95% half-width, `1.96 sqrt(p(1-p)/n)`.
    pub fn ci_halfwidth(&self) -> f64 {
        if self.trials == 0 {
            return 0.0;
        }
        let p = self.ser();
        1.96 * (p * (1.0 - p) / self.trials as f64).sqrt()
    }

    fn add(&mut self, other: Tally) {
        self.errors += other.errors;
        self.trials += other.trials;
    }
}

/// One grid point of a curve.
#[derive(Debug, Clone, PartialEq)]
pub struct SerPoint {
    pub snr_db: f64,
    pub alpha: Vec<f64>,
    /// Own-symbol errors at each user's receiver.
    pub users: Vec<Tally>,
    /// Receivers whose full decision tuple was wrong, pooled over users.
    pub composite: Tally,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SerResult {
    pub scheme: Scheme,
    pub mod_orders: Vec<u32>,
    pub channel: ChannelSpec,
    pub points: Vec<SerPoint>,
}

impl SerResult {
    pub fn num_users(&self) -> usize {
        self.mod_orders.len()
    }

    /// Per-user SER curve.
    pub fn ser_curve(&self, user: usize) -> Vec<f64> {
        self.points.iter().map(|p| p.users[user].ser()).collect()
    }

    /// SNR at which the user's SER first falls through `target`,
    /// interpolated linearly in `log10(SER)` between grid points.
    pub fn snr_at_ser(&self, user: usize, target: f64) -> Option<f64> {
        let pts: Vec<(f64, f64)> = self
            .points
            .iter()
            .map(|p| (p.snr_db, p.users[user].ser()))
            .collect();
        crossing(&pts, target)
    }

    /// Same as [`Self::snr_at_ser`] for the pooled composite error rate.
    pub fn composite_snr_at_ser(&self, target: f64) -> Option<f64> {
        let pts: Vec<(f64, f64)> = self
            .points
            .iter()
            .map(|p| (p.snr_db, p.composite.ser()))
            .collect();
        crossing(&pts, target)
    }
}

fn crossing(pts: &[(f64, f64)], target: f64) -> Option<f64> {
    pts.windows(2).find_map(|w| {
        let ((x0, y0), (x1, y1)) = (w[0], w[1]);
        if y0 >= target && y1 < target {
            if y1 <= 0.0 {
                return Some(x1);
            }
            let (l0, l1, lt) = (y0.log10(), y1.log10(), target.log10());
            Some(x0 + (lt - l0) / (l1 - l0) * (x1 - x0))
        } else {
            None
        }
    })
}

/// Transmit/receive pair prepared once per configuration.
enum Link {
    Joint {
        tx: CompositeConstellation,
        rx: JointDetector,
    },
    Sic {
        tx: CompositeConstellation,
        rx: SicReceiver,
    },
    /// Per-user alphabets at full power, one receiver each.
    Orthogonal { alphabets: Vec<Vec<Complex64>> },
}

impl Link {
    fn build(scheme: &Scheme, config: &SystemConfig, lookup: &LookupTable) -> Result<Self> {
        let k = config.num_users();
        Ok(match scheme {
            Scheme::Acma => {
                let rx = AcmaReceiver::new(config, lookup)?;
                let tx_offsets = transmit_offsets(config, rx.offsets())?;
                Link::Joint {
                    tx: compose(config, &tx_offsets)?,
                    rx: rx.detector().clone(),
                }
            }
            Scheme::JdNoma { transmit, receive } => Link::Joint {
                tx: compose(config, transmit)?,
                rx: JointDetector::new(config, receive)?,
            },
            Scheme::PdNoma => Link::Sic {
                tx: compose(config, &OffsetVector::zeros(k))?,
                rx: SicReceiver::new(config)?,
            },
            Scheme::Tdma => Link::Orthogonal {
                alphabets: orthogonal_alphabets(config.mod_orders(), config.total_power())?,
            },
            Scheme::SingleUser { order } => Link::Orthogonal {
                alphabets: orthogonal_alphabets(&[*order], config.total_power())?,
            },
        })
    }

    fn receivers(&self) -> usize {
        match self {
            Link::Joint { tx, .. } | Link::Sic { tx, .. } => tx.num_users(),
            Link::Orthogonal { alphabets } => alphabets.len(),
        }
    }
}

fn orthogonal_alphabets(orders: &[u32], power: f64) -> Result<Vec<Vec<Complex64>>> {
    orders
        .iter()
        .map(|&m| {
            Ok(make_qam(m)?
                .points()
                .iter()
                .map(|x| x * power.sqrt())
                .collect())
        })
        .collect()
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Independent data, channel and noise streams for one block.
fn block_rngs(seed: u64, point: u64, block: u64) -> [ChaCha8Rng; 3] {
    let key = splitmix64(splitmix64(splitmix64(seed) ^ point) ^ block);
    std::array::from_fn(|purpose| {
        let mut rng = ChaCha8Rng::seed_from_u64(key);
        rng.set_stream(purpose as u64);
        rng
    })
}

#[derive(Debug, Clone)]
struct BlockTally {
    users: Vec<Tally>,
    composite: Tally,
}

struct PointJob<'a> {
    link: &'a Link,
    channel: &'a ChannelSpec,
    noise_density: f64,
    seed: u64,
    point: u64,
}

impl PointJob<'_> {
    fn run_block(&self, block: u64) -> BlockTally {
        let [mut data_rng, mut chan_rng, mut noise_rng] = block_rngs(self.seed, self.point, block);
        let receivers = self.link.receivers();
        let l = self.channel.num_antennas;
        let coherence = self.channel.coherence as u64;
        let zero = Complex64::new(0.0, 0.0);
        let mut gains = vec![vec![zero; l]; receivers];
        let mut samples = vec![zero; l];
        let mut scratch = Vec::with_capacity(l);
        let mut decisions = vec![0usize; receivers];
        let mut symbols = vec![0usize; receivers];
        let mut users = vec![Tally::default(); receivers];
        let mut composite = Tally::default();

        for t in 0..BLOCK_TRIALS {
            if t % coherence == 0 {
                for (k, g) in gains.iter_mut().enumerate() {
                    self.channel.fill_channel(k, &mut chan_rng, g);
                }
            }
            match self.link {
                Link::Joint { tx, rx } => {
                    let c = data_rng.random_range(0..tx.len());
                    let sent = tx.label(c);
                    for k in 0..receivers {
                        fill_observation(tx.points()[c], &gains[k], self.noise_density, &mut noise_rng, &mut samples);
                        let (d, _) = rx.nearest(&samples, &gains[k]);
                        let got = rx.composite().label(d);
                        users[k].errors += u64::from(got[k] != sent[k]);
                        composite.errors += u64::from(got != sent);
                    }
                }
                Link::Sic { tx, rx } => {
                    let c = data_rng.random_range(0..tx.len());
                    let sent = tx.label(c);
                    for k in 0..receivers {
                        fill_observation(tx.points()[c], &gains[k], self.noise_density, &mut noise_rng, &mut samples);
                        rx.detect_into(&samples, &gains[k], &mut scratch, &mut decisions);
                        users[k].errors += u64::from(decisions[k] != sent[k]);
                        composite.errors += u64::from(decisions[..] != *sent);
                    }
                }
                Link::Orthogonal { alphabets } => {
                    for (k, alphabet) in alphabets.iter().enumerate() {
                        symbols[k] = data_rng.random_range(0..alphabet.len());
                        fill_observation(alphabet[symbols[k]], &gains[k], self.noise_density, &mut noise_rng, &mut samples);
                        let (d, _) = nearest(alphabet, &samples, &gains[k]);
                        let wrong = u64::from(d != symbols[k]);
                        users[k].errors += wrong;
                        composite.errors += wrong;
                    }
                }
            }
        }
        for u in &mut users {
            u.trials = BLOCK_TRIALS;
        }
        composite.trials = BLOCK_TRIALS * receivers as u64;
        BlockTally { users, composite }
    }
}

fn simulate_point(
    spec: &ExperimentSpec,
    link: &Link,
    snr_db: f64,
    point: u64,
) -> Result<(Vec<Tally>, Tally)> {
    let noise_density = NoiseSpec::new(snr_db)?.noise_density(spec.config.total_power());
    let job = PointJob {
        link,
        channel: &spec.channel,
        noise_density,
        seed: spec.seed,
        point,
    };
    let mut users = vec![Tally::default(); link.receivers()];
    let mut composite = Tally::default();
    let batch = (rayon::current_num_threads() as u64 * 2).clamp(1, 256);
    let mut next = 0u64;
    loop {
        let tallies: Vec<BlockTally> = (next..next + batch)
            .into_par_iter()
            .map(|b| job.run_block(b))
            .collect();
        for bt in tallies {
            for (u, t) in users.iter_mut().zip(bt.users) {
                u.add(t);
            }
            composite.add(bt.composite);
            let trials = users[0].trials;
            let enough = trials >= spec.symbols_per_point
                && users.iter().all(|u| u.errors >= spec.min_errors);
            if enough || trials >= spec.cap() {
                return Ok((users, composite));
            }
        }
        next += batch;
    }
}

fn result_orders(spec: &ExperimentSpec) -> Vec<u32> {
    match spec.scheme {
        Scheme::SingleUser { order } => vec![order],
        _ => spec.config.mod_orders().to_vec(),
    }
}

fn result_alpha(spec: &ExperimentSpec, config: &SystemConfig) -> Vec<f64> {
    match spec.scheme {
        Scheme::SingleUser { .. } => vec![1.0],
        _ => config.power_coeffs().to_vec(),
    }
}

/// Simulates every point of the SNR grid.
///
/// Fails before simulating if the scheme needs a lookup entry that
/// `lookup` does not hold.
pub fn run_ser(spec: &ExperimentSpec, lookup: &LookupTable) -> Result<SerResult> {
    spec.validate()?;
    let link = Link::build(&spec.scheme, &spec.config, lookup)?;
    let alpha = result_alpha(spec, &spec.config);
    let points = spec
        .snr_grid_db
        .iter()
        .enumerate()
        .map(|(i, &snr_db)| {
            let (users, composite) = simulate_point(spec, &link, snr_db, i as u64)?;
            Ok(SerPoint {
                snr_db,
                alpha: alpha.clone(),
                users,
                composite,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SerResult {
        scheme: spec.scheme.clone(),
        mod_orders: result_orders(spec),
        channel: spec.channel.clone(),
        points,
    })
}

/// Two-user sweep over `alpha_1` at the single SNR in `snr_grid_db`, with
/// `alpha_2 = 1 - alpha_1`. ACMA offsets are re-read from the lookup at
/// every point.
pub fn run_alpha_sweep(spec: &ExperimentSpec, lookup: &LookupTable) -> Result<SerResult> {
    spec.validate()?;
    let alpha_grid = spec
        .alpha_grid
        .as_ref()
        .ok_or_else(|| Error::invalid("alpha_grid", "an alpha sweep needs an alpha grid"))?;
    if spec.config.num_users() != 2 {
        return Err(Error::invalid("mod_orders", "alpha sweeps are defined for two users"));
    }
    let &[snr_db] = spec.snr_grid_db.as_slice() else {
        return Err(Error::invalid("snr_grid_db", "an alpha sweep uses exactly one SNR"));
    };
    let configs = alpha_grid
        .iter()
        .map(|&a| spec.config.with_power_coeffs(vec![a, 1.0 - a]))
        .collect::<Result<Vec<_>>>()?;
    // build every link first so a lookup miss fails before any simulation
    let links = configs
        .iter()
        .map(|cfg| Link::build(&spec.scheme, cfg, lookup))
        .collect::<Result<Vec<_>>>()?;
    let points = configs
        .iter()
        .zip(&links)
        .enumerate()
        .map(|(i, (cfg, link))| {
            let (users, composite) = simulate_point(spec, link, snr_db, i as u64)?;
            Ok(SerPoint {
                snr_db,
                alpha: result_alpha(spec, cfg),
                users,
                composite,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SerResult {
        scheme: spec.scheme.clone(),
        mod_orders: result_orders(spec),
        channel: spec.channel.clone(),
        points,
    })
}

/// Runs `f` on a dedicated pool of `workers` threads (0 = rayon default).
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::invalid("workers", e.to_string()))?;
    Ok(pool.install(f))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThroughputPoint {
    pub snr_db: f64,
    pub alpha: Vec<f64>,
    /// Each user's contribution `w_k log2(M_k) (1 - SER_k)`.
    pub per_user: Vec<f64>,
    pub omega: f64,
}

/// Sum throughput in bits per channel use.
#[derive(Debug, Clone, PartialEq)]
pub struct ThroughputResult {
    pub scheme: Scheme,
    pub points: Vec<ThroughputPoint>,
}

/// `Omega = sum_k w_k log2(M_k) (1 - SER_k)` with `w_k = alpha_k` for TDMA
/// (slot share) and 1 otherwise.
pub fn throughput(ser: &SerResult) -> ThroughputResult {
    let points = ser
        .points
        .iter()
        .map(|p| {
            let per_user: Vec<f64> = p
                .users
                .iter()
                .zip(&ser.mod_orders)
                .enumerate()
                .map(|(k, (t, &m))| {
                    let w = if ser.scheme == Scheme::Tdma { p.alpha[k] } else { 1.0 };
                    w * (m as f64).log2() * (1.0 - t.ser())
                })
                .collect();
            ThroughputPoint {
                snr_db: p.snr_db,
                alpha: p.alpha.clone(),
                omega: per_user.iter().sum(),
                per_user,
            }
        })
        .collect();
    ThroughputResult {
        scheme: ser.scheme.clone(),
        points,
    }
}

/// Reference curve for ACMA: the SER of square `Sigma`-QAM evaluated at the
/// SNR scaled by `d2_acma / d2_Sigma-QAM`.
#[derive(Debug, Clone, PartialEq)]
pub struct SerUpperBound {
    pub composite_order: u64,
    pub d2_acma: f64,
    pub d2_reference: f64,
}

impl SerUpperBound {
    pub fn ratio(&self) -> f64 {
        self.d2_acma / self.d2_reference
    }

    /// SNR penalty against `Sigma`-QAM implied by the distance ratio.
    pub fn gap_db(&self) -> f64 {
        -10.0 * self.ratio().log10()
    }

    /// Bound at total SNR `P_T/N_0` (dB) for the receiver of `user`.
    pub fn ser(&self, snr_db: f64, channel: &ChannelSpec, user: usize) -> f64 {
        let snr = 10f64.powf(snr_db / 10.0) * channel.mean_gain(user) * self.ratio();
        square_qam_ser(self.composite_order, snr, channel.fading, channel.num_antennas)
    }
}

pub fn ser_upper_bound(config: &SystemConfig, offsets: &OffsetVector) -> Result<SerUpperBound> {
    let order = config.composite_size() as u64;
    if !is_square_qam_order(order) {
        return Err(Error::BoundUnavailable(format!(
            "composite size {order} is not a square QAM order"
        )));
    }
    let offsets = match config.mode() {
        OffsetMode::Static => transmit_offsets(config, offsets)?,
        OffsetMode::Dynamic => offsets.clone(),
    };
    let d2_acma = min_squared_distance(&compose(config, &offsets)?)?.value();
    if d2_acma <= 0.0 {
        return Err(Error::BoundUnavailable(
            "composite constellation has colliding points".into(),
        ));
    }
    Ok(SerUpperBound {
        composite_order: order,
        d2_acma,
        d2_reference: config.total_power() * square_qam_d2min(order),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::Fading;
    use crate::optimizer::{build_lookup, SearchGrid};
    use std::f64::consts::PI;

    fn cfg(m: &[u32], a: &[f64]) -> SystemConfig {
        SystemConfig::new(m.to_vec(), a.to_vec(), 1.0).unwrap()
    }

    fn empty_lookup() -> LookupTable {
        LookupTable::from_json(r#"{"resolution":20,"entries":[]}"#).unwrap()
    }

    fn spec(scheme: Scheme, config: SystemConfig, snr: Vec<f64>) -> ExperimentSpec {
        ExperimentSpec {
            symbols_per_point: 10_000,
            min_errors: 0,
            seed: 3,
            ..ExperimentSpec::new(scheme, config, ChannelSpec::awgn(), snr)
        }
    }

    #[test]
    fn tally_statistics() {
        let t = Tally { errors: 25, trials: 100 };
        assert_eq!(t.ser(), 0.25);
        assert!((t.ci_halfwidth() - 1.96 * (0.25f64 * 0.75 / 100.0).sqrt()).abs() < 1e-15);
        assert_eq!(Tally::default().ser(), 0.0);
    }

    #[test]
    fn crossing_interpolates_in_log_domain() {
        let pts = [(0.0, 1e-1), (10.0, 1e-3)];
        assert!((crossing(&pts, 1e-2).unwrap() - 5.0).abs() < 1e-12);
        assert_eq!(crossing(&pts, 1e-4), None);
        assert_eq!(crossing(&[(0.0, 0.5), (2.0, 0.0)], 1e-2), Some(2.0));
    }

    #[test]
    fn throughput_arithmetic() {
        let mk = |scheme, e: [u64; 2], alpha: Vec<f64>| SerResult {
            scheme,
            mod_orders: vec![16, 16],
            channel: ChannelSpec::awgn(),
            points: vec![SerPoint {
                snr_db: 0.0,
                alpha,
                users: e.iter().map(|&errors| Tally { errors, trials: 100 }).collect(),
                composite: Tally::default(),
            }],
        };
        assert_eq!(throughput(&mk(Scheme::Acma, [0, 0], vec![0.5, 0.5])).points[0].omega, 8.0);
        assert_eq!(throughput(&mk(Scheme::Acma, [50, 50], vec![0.5, 0.5])).points[0].omega, 4.0);
        let tdma = throughput(&mk(Scheme::Tdma, [0, 0], vec![0.1, 0.9])).points[0].omega;
        assert!((tdma - 4.0).abs() < 1e-12);
    }

    #[test]
    fn validation_errors() {
        let c = cfg(&[4], &[1.0]);
        let mut s = spec(Scheme::SingleUser { order: 4 }, c.clone(), vec![0.0, 1.0]);
        assert!(s.validate().is_ok());
        s.symbols_per_point = 100;
        assert!(s.validate().is_err());
        let s = spec(Scheme::SingleUser { order: 4 }, c.clone(), vec![1.0, 0.0]);
        assert!(s.validate().is_err());
        let s = spec(Scheme::SingleUser { order: 4 }, c.clone(), vec![]);
        assert!(s.validate().is_err());
        let s = spec(Scheme::SingleUser { order: 8 }, c, vec![0.0]);
        assert!(s.validate().is_err());
    }

    #[test]
    fn acma_lookup_miss_fails_fast() {
        let s = spec(Scheme::Acma, cfg(&[16, 4], &[0.35, 0.65]), vec![10.0]);
        assert!(matches!(run_ser(&s, &empty_lookup()), Err(Error::NotPrecomputed { .. })));
    }

    #[test]
    fn ser_invariants_hold() {
        let lookup = build_lookup(&[vec![16, 4]], &SearchGrid::harmonic(20).unwrap(), 20).unwrap();
        let s = spec(Scheme::Acma, cfg(&[16, 4], &[0.35, 0.65]), vec![5.0, 15.0]);
        let r = run_ser(&s, &lookup).unwrap();
        for p in &r.points {
            for t in &p.users {
                assert!(t.errors <= t.trials);
                assert!(t.trials >= 10_000);
            }
            assert_eq!(p.composite.trials, 2 * p.users[0].trials);
        }
        assert!(r.points[0].users[0].ser() > r.points[1].users[0].ser());
    }

    #[test]
    fn noiseless_acma_is_error_free() {
        let lookup = build_lookup(&[vec![16, 4]], &SearchGrid::harmonic(20).unwrap(), 20).unwrap();
        let mut s = spec(Scheme::Acma, cfg(&[16, 4], &[0.35, 0.65]), vec![300.0]);
        s.channel = ChannelSpec::rayleigh(0.0, 1);
        let r = run_ser(&s, &lookup).unwrap();
        assert_eq!(r.points[0].users.iter().map(|t| t.errors).sum::<u64>(), 0);
    }

    #[test]
    fn alpha_sweep_shape() {
        let lookup = build_lookup(&[vec![4, 4]], &SearchGrid::harmonic(20).unwrap(), 20).unwrap();
        let mut s = spec(Scheme::Acma, cfg(&[4, 4], &[0.5, 0.5]), vec![20.0]);
        s.alpha_grid = Some(vec![0.1, 0.3, 0.5]);
        let r = run_alpha_sweep(&s, &lookup).unwrap();
        assert_eq!(r.points.len(), 3);
        assert_eq!(r.points[1].alpha, vec![0.3, 0.7]);
        s.snr_grid_db = vec![10.0, 20.0];
        assert!(run_alpha_sweep(&s, &lookup).is_err());
    }

    #[test]
    fn bound_matches_reference_when_ratio_is_one() {
        // a single 64-QAM user is its own Sigma-QAM
        let c = cfg(&[64], &[1.0]);
        let b = ser_upper_bound(&c, &OffsetVector::zeros(1)).unwrap();
        assert!((b.ratio() - 1.0).abs() < 1e-12);
        let ch = ChannelSpec::awgn();
        let direct = square_qam_ser(64, 100.0, Fading::Awgn, 1);
        assert!((b.ser(20.0, &ch, 0) - direct).abs() < 1e-15);
    }

    #[test]
    fn bound_gap_for_two_16qam_users() {
        let c = cfg(&[16, 16], &[0.5, 0.5]);
        let b = ser_upper_bound(&c, &OffsetVector::new(vec![2.0 * PI / 3.0, 0.0]).unwrap()).unwrap();
        assert_eq!(b.composite_order, 256);
        assert!(b.gap_db() > 0.0 && b.gap_db() <= 2.6, "{}", b.gap_db());
        assert!(matches!(
            ser_upper_bound(&cfg(&[4, 4], &[0.5, 0.5]), &OffsetVector::zeros(2)),
            Err(Error::BoundUnavailable(_))
        ));
    }

    #[test]
    fn labels() {
        assert_eq!(Scheme::Acma.label(), "acma");
        let jd = Scheme::jd_noma(OffsetVector::new(vec![9.4f64.to_radians(), 0.0]).unwrap());
        assert_eq!(jd.label(), "jd-noma[9.4/0deg]");
        assert_eq!(Scheme::SingleUser { order: 256 }.label(), "single-user-256qam");
    }
}
