//! JSON experiment manifests.
//!
//! ```json
//! {
//!   "command": "ser",
//!   "system": { "mod_orders": [16, 4], "power_coeffs": [0.35, 0.65] },
//!   "schemes": [{ "kind": "acma" }, { "kind": "jd_noma", "rotation_deg": [9.4, 0] }],
//!   "channel": { "fading": "rayleigh", "gain_ratio_db": 0, "num_antennas": 1 },
//!   "snr_db": { "start": 10, "stop": 40, "step": 2 },
//!   "seed": 7,
//!   "output_dir": "out/fig3b"
//! }
//! ```

use std::fmt;
use std::path::{Path, PathBuf};

use acma_core::{
    ChannelSpec, ExperimentSpec, GridKind, OffsetMode, OffsetVector, Scheme, SearchGrid,
    SystemConfig,
};
use serde::Deserialize;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {reason}")]
    Config { path: String, reason: String },
    #[error(transparent)]
    Core(#[from] acma_core::Error),
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    fn config(path: &Path, reason: impl Into<String>) -> Self {
        CliError::Config {
            path: path.display().to_string(),
            reason: reason.into(),
        }
    }

    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        CliError::Io {
            context: context.into(),
            source,
        }
    }

    /// 1 for anything wrong with the inputs, 2 for failures while running.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } => 1,
            CliError::Core(acma_core::Error::InvalidParameter { .. })
            | CliError::Core(acma_core::Error::NotPrecomputed { .. }) => 1,
            CliError::Core(_) | CliError::Io { .. } => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Optimize,
    Lookup,
    Constellation,
    Ser,
    AlphaSweep,
    Throughput,
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Command::Optimize => "optimize",
            Command::Lookup => "lookup",
            Command::Constellation => "constellation",
            Command::Ser => "ser",
            Command::AlphaSweep => "alpha-sweep",
            Command::Throughput => "throughput",
        })
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SystemFile {
    mod_orders: Vec<u32>,
    power_coeffs: Vec<f64>,
    #[serde(default = "one")]
    total_power: f64,
    #[serde(default)]
    mode: OffsetMode,
    preset_offsets_deg: Option<Vec<f64>>,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum SchemeFile {
    Acma,
    JdNoma {
        rotation_deg: Vec<f64>,
        receive_deg: Option<Vec<f64>>,
    },
    PdNoma,
    Tdma,
    SingleUser {
        order: u32,
    },
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum ChannelFile {
    One(ChannelSpec),
    Many(Vec<ChannelSpec>),
}

impl Default for ChannelFile {
    fn default() -> Self {
        ChannelFile::One(ChannelSpec::default())
    }
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum GridFile {
    List(Vec<f64>),
    Range { start: f64, stop: f64, step: f64 },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SearchFile {
    #[serde(default = "twenty")]
    candidates: usize,
    #[serde(default)]
    kind: GridKind,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct LookupFile {
    #[serde(default = "twenty_u32")]
    resolution: u32,
    families: Option<Vec<Vec<u32>>>,
}

fn twenty() -> usize {
    20
}

fn twenty_u32() -> u32 {
    20
}

impl Default for SearchFile {
    fn default() -> Self {
        SearchFile {
            candidates: 20,
            kind: GridKind::Harmonic,
        }
    }
}

impl Default for LookupFile {
    fn default() -> Self {
        LookupFile {
            resolution: 20,
            families: None,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ManifestFile {
    command: Option<Command>,
    #[serde(default)]
    description: String,
    system: SystemFile,
    #[serde(default)]
    schemes: Vec<SchemeFile>,
    /// One channel, or a list to run every scheme under each.
    #[serde(default)]
    channel: ChannelFile,
    snr_db: Option<GridFile>,
    alpha_grid: Option<GridFile>,
    symbols_per_point: Option<u64>,
    min_errors: Option<u64>,
    #[serde(default)]
    seed: u64,
    #[serde(default)]
    search: SearchFile,
    #[serde(default)]
    lookup: LookupFile,
    output_dir: Option<PathBuf>,
}

/// A validated experiment.
#[derive(Debug, Clone)]
pub struct RunManifest {
    pub command: Option<Command>,
    pub description: String,
    pub config: SystemConfig,
    /// One spec per (scheme, channel), sharing grids and seed.
    pub specs: Vec<ExperimentSpec>,
    pub search: SearchGrid,
    pub lookup_resolution: u32,
    pub lookup_families: Vec<Vec<u32>>,
    pub alpha_grid: Option<Vec<f64>>,
    pub output_dir: PathBuf,
    pub seed: u64,
}

pub fn parse_config(path: &Path) -> Result<RunManifest, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::config(path, format!("cannot read file: {e}")))?;
    parse_str(&text, path)
}

/// Parses manifest text; `origin` is only used in error messages.
pub fn parse_str(text: &str, origin: &Path) -> Result<RunManifest, CliError> {
    let file: ManifestFile = serde_json::from_str(text)
        .map_err(|e| CliError::config(origin, format!("malformed manifest: {e}")))?;
    let field_err = |e: acma_core::Error| CliError::config(origin, e.to_string());

    let s = &file.system;
    let mut config = SystemConfig::new(s.mod_orders.clone(), s.power_coeffs.clone(), s.total_power)
        .map_err(field_err)?;
    match (s.mode, &s.preset_offsets_deg) {
        (OffsetMode::Static, Some(deg)) => {
            config = config
                .with_static_offsets(deg.iter().map(|d| d.to_radians()).collect())
                .map_err(field_err)?;
        }
        (OffsetMode::Static, None) => {
            return Err(CliError::config(
                origin,
                "system.preset_offsets_deg is required in static mode",
            ))
        }
        (OffsetMode::Dynamic, Some(_)) => {
            return Err(CliError::config(
                origin,
                "system.preset_offsets_deg is only allowed in static mode",
            ))
        }
        (OffsetMode::Dynamic, None) => {}
    }

    let snr = file
        .snr_db
        .map(|g| expand(g, origin, "snr_db"))
        .transpose()?
        .unwrap_or_default();
    let alpha_grid = file
        .alpha_grid
        .map(|g| expand(g, origin, "alpha_grid"))
        .transpose()?;
    let search = SearchGrid::new(file.search.candidates, file.search.kind).map_err(field_err)?;

    let channels = match file.channel {
        ChannelFile::One(c) => vec![c],
        ChannelFile::Many(v) if v.is_empty() => {
            return Err(CliError::config(origin, "channel list is empty"))
        }
        ChannelFile::Many(v) => v,
    };
    let k = config.num_users();
    let mut specs = Vec::new();
    for (i, scheme) in file.schemes.iter().enumerate() {
        let scheme = to_scheme(scheme, k)
            .map_err(|e| CliError::config(origin, format!("schemes[{i}]: {e}")))?;
        for channel in &channels {
            let mut spec = ExperimentSpec::new(scheme.clone(), config.clone(), channel.clone(), snr.clone());
            spec.alpha_grid = alpha_grid.clone();
            spec.seed = file.seed;
            if let Some(n) = file.symbols_per_point {
                spec.symbols_per_point = n;
            }
            if let Some(n) = file.min_errors {
                spec.min_errors = n;
            }
            specs.push(spec);
        }
    }

    let families = file
        .lookup
        .families
        .unwrap_or_else(|| vec![config.mod_orders().to_vec()]);
    if families.is_empty() {
        return Err(CliError::config(origin, "lookup.families is empty"));
    }
    if file.lookup.resolution < 2 {
        return Err(CliError::config(origin, "lookup.resolution must be at least 2"));
    }

    for (i, c) in channels.iter().enumerate() {
        c.validate()
            .map_err(|e| CliError::config(origin, format!("channel[{i}]: {e}")))?;
    }
    let manifest = RunManifest {
        command: file.command,
        description: file.description,
        config,
        specs,
        search,
        lookup_resolution: file.lookup.resolution,
        lookup_families: families,
        alpha_grid,
        output_dir: file.output_dir.unwrap_or_else(|| PathBuf::from("out")),
        seed: file.seed,
    };
    manifest.check_specs().map_err(field_err)?;
    Ok(manifest)
}

fn expand(grid: GridFile, origin: &Path, field: &str) -> Result<Vec<f64>, CliError> {
    match grid {
        GridFile::List(v) => Ok(v),
        GridFile::Range { start, stop, step } => {
            if !start.is_finite() || !stop.is_finite() || step.is_nan() || step <= 0.0 || stop < start {
                return Err(CliError::config(
                    origin,
                    format!("{field}: range needs finite start <= stop and step > 0"),
                ));
            }
            let n = ((stop - start) / step + 1e-9).floor() as usize;
            Ok((0..=n).map(|i| start + i as f64 * step).collect())
        }
    }
}

fn to_scheme(s: &SchemeFile, k: usize) -> Result<Scheme, String> {
    let rad = |deg: &[f64]| -> Result<OffsetVector, String> {
        if deg.len() != k {
            return Err(format!("expected {k} rotations, got {}", deg.len()));
        }
        OffsetVector::new(deg.iter().map(|d| d.to_radians()).collect()).map_err(|e| e.to_string())
    };
    Ok(match s {
        SchemeFile::Acma => Scheme::Acma,
        SchemeFile::JdNoma {
            rotation_deg,
            receive_deg,
        } => Scheme::JdNoma {
            transmit: rad(rotation_deg)?,
            receive: rad(receive_deg.as_deref().unwrap_or(rotation_deg))?,
        },
        SchemeFile::PdNoma => Scheme::PdNoma,
        SchemeFile::Tdma => Scheme::Tdma,
        SchemeFile::SingleUser { order } => Scheme::SingleUser { order: *order },
    })
}

impl RunManifest {
    /// Validates every simulation spec that has an SNR grid.
    pub(crate) fn check_specs(&self) -> acma_core::Result<()> {
        for spec in &self.specs {
            if !spec.snr_grid_db.is_empty() {
                spec.validate()?;
            }
        }
        Ok(())
    }

    /// Number of users.
    pub fn num_users(&self) -> usize {
        self.config.num_users()
    }
}
