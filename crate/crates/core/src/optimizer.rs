//! Minimum-distance objective and the sequential phase-offset grid search.
//!
//! User `K` is the unrotated phase reference. Users `1..K-1` are searched one
//! at a time over the candidate grid, each with the offsets of the users
//! before it already fixed, so the cost grows linearly in `K`.
//!
//! Ties (scores within [`TIE_RELATIVE_TOLERANCE`] of the best) resolve to
//! zero rotation when zero is among them, otherwise to the largest tied
//! angle. This is the outcome of scanning the candidates in the order
//! `0, 2pi/V, 2pi/(V-1), ..., 2pi/1` and keeping the latest maximum, where
//! the final candidate `2pi` wraps back onto zero.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::SystemConfig;
use crate::constellation::{compose, CompositeConstellation, SUPPORTED_ORDERS};
use crate::error::{Error, Result};

/// Relative tolerance under which two objective values count as tied.
pub const TIE_RELATIVE_TOLERANCE: f64 = 1e-12;

/// Composite size above which the pairwise scan is split across threads.
const PARALLEL_DISTANCE_THRESHOLD: usize = 2048;

/// Per-user phase offsets in radians, normalized to `[0, 2pi)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct OffsetVector(Vec<f64>);

impl OffsetVector {
    pub fn new(offsets: Vec<f64>) -> Result<Self> {
        if offsets.iter().any(|d| !d.is_finite()) {
            return Err(Error::invalid("offsets", "offsets must be finite"));
        }
        Ok(OffsetVector(offsets.into_iter().map(normalize_angle).collect()))
    }

    pub fn zeros(num_users: usize) -> Self {
        OffsetVector(vec![0.0; num_users])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn degrees(&self) -> Vec<f64> {
        self.0.iter().map(|d| d.to_degrees()).collect()
    }

    /// Adds the same angle to every user.
    pub fn shifted(&self, by: f64) -> Result<Self> {
        OffsetVector::new(self.0.iter().map(|d| d + by).collect())
    }
}

impl TryFrom<Vec<f64>> for OffsetVector {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        OffsetVector::new(v)
    }
}

impl From<OffsetVector> for Vec<f64> {
    fn from(v: OffsetVector) -> Self {
        v.0
    }
}

fn normalize_angle(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if r >= TAU || r == 0.0 {
        0.0
    } else {
        r
    }
}

/// How grid candidates are spaced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum GridKind {
    /// `{0} U {2pi/(V-v+1) : v = 1..V}`, dense near zero.
    #[default]
    Harmonic,
    /// `{2pi v / V : v = 0..V-1}`.
    Uniform,
}

/// Candidate rotations for one user, sorted ascending with duplicates removed.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchGrid {
    num_candidates: usize,
    kind: GridKind,
    candidates: Vec<f64>,
}

impl SearchGrid {
    pub fn new(num_candidates: usize, kind: GridKind) -> Result<Self> {
        if num_candidates == 0 {
            return Err(Error::invalid("num_candidates", "V must be at least 1"));
        }
        let v = num_candidates;
        let raw: Vec<f64> = match kind {
            GridKind::Harmonic => std::iter::once(0.0)
                .chain((1..=v).map(|i| TAU / (v - i + 1) as f64))
                .collect(),
            GridKind::Uniform => (0..v).map(|i| TAU * i as f64 / v as f64).collect(),
        };
        let mut candidates: Vec<f64> = raw.into_iter().map(normalize_angle).collect();
        candidates.sort_by(f64::total_cmp);
        candidates.dedup();
        Ok(SearchGrid {
            num_candidates,
            kind,
            candidates,
        })
    }

    /// The harmonic grid with `V` candidates.
    pub fn harmonic(num_candidates: usize) -> Result<Self> {
        Self::new(num_candidates, GridKind::Harmonic)
    }

    pub fn num_candidates(&self) -> usize {
        self.num_candidates
    }

    pub fn kind(&self) -> GridKind {
        self.kind
    }

    pub fn candidates(&self) -> &[f64] {
        &self.candidates
    }
}

/// Squared minimum Euclidean distance of a composite constellation.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MinDistance(pub f64);

impl MinDistance {
    pub fn value(self) -> f64 {
        self.0
    }
}

/// Exhaustive minimum of `|s_a - s_b|^2` over every pair of points whose
/// labels differ in at least one user with nonzero power. Symbol changes of
/// a zero-power user are not transmitted and so are not counted as
/// distinct signals.
pub fn min_squared_distance(composite: &CompositeConstellation) -> Result<MinDistance> {
    let n = composite.len();
    if n < 2 {
        return Err(Error::invalid(
            "composite",
            format!("need at least 2 points, got {n}"),
        ));
    }
    let pts = composite.points();
    let keys = composite.active_keys();

    let row_min = |i: usize| -> f64 {
        let a = pts[i];
        let mut best = f64::INFINITY;
        match keys {
            None => {
                for b in &pts[i + 1..] {
                    let dr = a.re - b.re;
                    let di = a.im - b.im;
                    best = best.min(dr * dr + di * di);
                }
            }
            Some(keys) => {
                for (j, b) in pts.iter().enumerate().skip(i + 1) {
                    if keys[i] != keys[j] {
                        let dr = a.re - b.re;
                        let di = a.im - b.im;
                        best = best.min(dr * dr + di * di);
                    }
                }
            }
        }
        best
    };

    let best = if n > PARALLEL_DISTANCE_THRESHOLD {
        (0..n - 1)
            .into_par_iter()
            .map(row_min)
            .reduce(|| f64::INFINITY, f64::min)
    } else {
        (0..n - 1).map(row_min).fold(f64::INFINITY, f64::min)
    };
    if !best.is_finite() {
        return Err(Error::invalid(
            "composite",
            "no pair of points differs in a powered user",
        ));
    }
    Ok(MinDistance(best))
}

fn is_tied(score: f64, best: f64) -> bool {
    score >= best - TIE_RELATIVE_TOLERANCE * best.abs()
}

/// Index of the winning candidate under the zero-first, then largest-angle
/// tie rule.
pub(crate) fn select_candidate(candidates: &[f64], scores: &[f64]) -> usize {
    let best = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let tied = |i: usize| is_tied(scores[i], best);
    if let Some(z) = candidates.iter().position(|&c| c == 0.0) {
        if tied(z) {
            return z;
        }
    }
    (0..candidates.len())
        .filter(|&i| tied(i))
        .max_by(|&a, &b| candidates[a].total_cmp(&candidates[b]))
        .expect("non-empty grid")
}

/// Sequential grid search for the offsets maximizing the composite minimum
/// distance. Returns the offsets and the distance they achieve.
pub fn optimize_offsets(
    config: &SystemConfig,
    grid: &SearchGrid,
) -> Result<(OffsetVector, MinDistance)> {
    config.validate()?;
    let k = config.num_users();
    let mut offsets = vec![0.0; k];
    for user in 0..k.saturating_sub(1) {
        let scores = grid
            .candidates()
            .iter()
            .map(|&c| {
                offsets[user] = c;
                let comp = compose(config, &OffsetVector(offsets.clone()))?;
                Ok(min_squared_distance(&comp)?.0)
            })
            .collect::<Result<Vec<f64>>>()?;
        offsets[user] = grid.candidates()[select_candidate(grid.candidates(), &scores)];
    }
    let offsets = OffsetVector(offsets);
    let d2 = min_squared_distance(&compose(config, &offsets)?)?;
    Ok((offsets, d2))
}

/// One row of a two-user offset sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub alpha1: f64,
    pub offset: f64,
    pub d2min: f64,
}

/// Runs the search for `alpha = [a, 1 - a]` at every `a` in the grid.
pub fn sweep_offsets(
    mod_orders: &[u32],
    alpha_grid: &[f64],
    grid: &SearchGrid,
) -> Result<Vec<SweepRow>> {
    if mod_orders.len() != 2 {
        return Err(Error::invalid(
            "mod_orders",
            "offset sweeps are defined for two users",
        ));
    }
    if alpha_grid.is_empty() {
        return Err(Error::invalid("alpha_grid", "grid is empty"));
    }
    alpha_grid
        .iter()
        .map(|&a| {
            let cfg = SystemConfig::new(mod_orders.to_vec(), vec![a, 1.0 - a], 1.0)?;
            let (offsets, d2) = optimize_offsets(&cfg, grid)?;
            Ok(SweepRow {
                alpha1: a,
                offset: offsets.as_slice()[0],
                d2min: d2.0,
            })
        })
        .collect()
}

/// Key of a lookup entry: modulation orders and the power split in units
/// of `1/Q`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LookupKey {
    pub mod_orders: Vec<u32>,
    pub steps: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LookupEntry {
    pub offsets: OffsetVector,
    /// Minimum distance at unit total power.
    pub d2min: MinDistance,
}

/// Offsets precomputed offline for every power split on a `1/Q` grid.
/// Distances are stored at unit total power; they scale linearly with it
/// while the offsets do not change.
#[derive(Debug, Clone, PartialEq)]
pub struct LookupTable {
    resolution: u32,
    entries: BTreeMap<LookupKey, LookupEntry>,
}

/// Splits `total` into `parts` positive integers, in lexicographic order.
fn compositions(total: u32, parts: usize) -> Vec<Vec<u32>> {
    if parts == 1 {
        return if total >= 1 { vec![vec![total]] } else { vec![] };
    }
    let mut out = Vec::new();
    for first in 1..total {
        for mut rest in compositions(total - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Largest-remainder rounding of `alpha * Q` so the steps sum to `Q`.
pub fn quantize_alpha(alpha: &[f64], resolution: u32) -> Vec<u32> {
    let q = resolution as f64;
    let scaled: Vec<f64> = alpha.iter().map(|a| a * q).collect();
    let mut steps: Vec<u32> = scaled.iter().map(|s| s.floor().max(0.0) as u32).collect();
    let assigned: u32 = steps.iter().sum();
    let mut order: Vec<usize> = (0..alpha.len()).collect();
    // stable: equal remainders keep user order
    order.sort_by(|&a, &b| {
        (scaled[b] - scaled[b].floor()).total_cmp(&(scaled[a] - scaled[a].floor()))
    });
    for &i in order.iter().take(resolution.saturating_sub(assigned) as usize) {
        steps[i] += 1;
    }
    steps
}

impl LookupTable {
    pub fn resolution(&self) -> u32 {
        self.resolution
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&LookupKey, &LookupEntry)> {
        self.entries.iter()
    }

    pub fn key_for(&self, config: &SystemConfig) -> LookupKey {
        LookupKey {
            mod_orders: config.mod_orders().to_vec(),
            steps: quantize_alpha(config.power_coeffs(), self.resolution),
        }
    }

    /// Entry for the quantized power split of `config`.
    pub fn get(&self, config: &SystemConfig) -> Result<&LookupEntry> {
        self.entries
            .get(&self.key_for(config))
            .ok_or_else(|| Error::NotPrecomputed {
                mod_orders: config.mod_orders().to_vec(),
                alpha: config.power_coeffs().to_vec(),
                resolution: self.resolution,
            })
    }

    pub fn contains(&self, config: &SystemConfig) -> bool {
        self.get(config).is_ok()
    }

    /// Recomputes every stored distance from its offsets and returns the
    /// largest absolute deviation.
    pub fn max_recompute_error(&self) -> Result<f64> {
        self.entries
            .iter()
            .map(|(key, entry)| {
                let cfg = key_config(key, self.resolution)?;
                let d2 = min_squared_distance(&compose(&cfg, &entry.offsets)?)?;
                Ok((d2.0 - entry.d2min.0).abs())
            })
            .try_fold(0.0f64, |acc, e: Result<f64>| Ok(acc.max(e?)))
    }

    pub fn to_json(&self) -> Result<String> {
        let file = LookupFile {
            resolution: self.resolution,
            entries: self
                .entries
                .iter()
                .map(|(k, e)| LookupFileEntry {
                    mod_orders: k.mod_orders.clone(),
                    alpha: k
                        .steps
                        .iter()
                        .map(|&s| s as f64 / self.resolution as f64)
                        .collect(),
                    offsets: e.offsets.as_slice().to_vec(),
                    d2min: e.d2min.0,
                })
                .collect(),
        };
        serde_json::to_string_pretty(&file).map_err(|e| Error::Serialization(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: LookupFile =
            serde_json::from_str(text).map_err(|e| Error::Serialization(e.to_string()))?;
        if file.resolution < 2 {
            return Err(Error::invalid("resolution", "Q must be at least 2"));
        }
        let q = file.resolution as f64;
        let mut entries = BTreeMap::new();
        for e in file.entries {
            let steps: Vec<u32> = e.alpha.iter().map(|a| (a * q).round() as u32).collect();
            if e.alpha.iter().zip(&steps).any(|(a, &s)| (a * q - s as f64).abs() > 1e-6)
                || steps.iter().sum::<u32>() != file.resolution
            {
                return Err(Error::invalid(
                    "alpha",
                    format!("{:?} is not on the 1/{} grid", e.alpha, file.resolution),
                ));
            }
            let key = LookupKey {
                mod_orders: e.mod_orders,
                steps,
            };
            key_config(&key, file.resolution)?;
            if e.offsets.len() != key.mod_orders.len() {
                return Err(Error::invalid("offsets", "length differs from mod_orders"));
            }
            entries.insert(
                key,
                LookupEntry {
                    offsets: OffsetVector::new(e.offsets)?,
                    d2min: MinDistance(e.d2min),
                },
            );
        }
        Ok(LookupTable {
            resolution: file.resolution,
            entries,
        })
    }
}

fn key_config(key: &LookupKey, resolution: u32) -> Result<SystemConfig> {
    let alpha = key
        .steps
        .iter()
        .map(|&s| s as f64 / resolution as f64)
        .collect();
    SystemConfig::new(key.mod_orders.clone(), alpha, 1.0)
}

#[derive(Serialize, Deserialize)]
struct LookupFile {
    resolution: u32,
    entries: Vec<LookupFileEntry>,
}

#[derive(Serialize, Deserialize)]
struct LookupFileEntry {
    mod_orders: Vec<u32>,
    alpha: Vec<f64>,
    offsets: Vec<f64>,
    d2min: f64,
}

/// Runs the search for every interior power split at step `1/Q` of each
/// modulation combination. Cells are evaluated in parallel and merged by key.
pub fn build_lookup(
    family: &[Vec<u32>],
    grid: &SearchGrid,
    resolution: u32,
) -> Result<LookupTable> {
    if resolution < 2 {
        return Err(Error::invalid("resolution", "Q must be at least 2"));
    }
    for orders in family {
        if orders.is_empty() || orders.iter().any(|m| !SUPPORTED_ORDERS.contains(m)) {
            return Err(Error::invalid(
                "family",
                format!("invalid modulation combination {orders:?}"),
            ));
        }
    }
    let keys: Vec<LookupKey> = family
        .iter()
        .flat_map(|orders| {
            compositions(resolution, orders.len())
                .into_iter()
                .map(move |steps| LookupKey {
                    mod_orders: orders.clone(),
                    steps,
                })
        })
        .collect();
    let entries = keys
        .into_par_iter()
        .map(|key| {
            let cfg = key_config(&key, resolution)?;
            let (offsets, d2min) = optimize_offsets(&cfg, grid)?;
            Ok((key, LookupEntry { offsets, d2min }))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LookupTable {
        resolution,
        entries: entries.into_iter().collect(),
    })
}
