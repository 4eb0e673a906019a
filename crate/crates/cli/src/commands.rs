//! Runs one manifest under one subcommand. Every artifact is computed in
//! memory first and only written once the whole command has succeeded.

use std::path::PathBuf;

use acma_core::report::{
    write_constellation_csv, write_results_csv_padded, write_sweep_csv, write_throughput_csv_padded,
};
use acma_core::simulator::with_workers;
use acma_core::transceivers::transmit_offsets;
use acma_core::{
    build_lookup, compose, min_squared_distance, optimize_offsets, run_alpha_sweep, run_ser,
    ser_upper_bound, sweep_offsets, throughput, LookupTable, OffsetMode, OffsetVector, Scheme,
    SerResult,
};
use serde_json::json;

use crate::manifest::{CliError, Command, RunManifest};

/// Command-line values that take precedence over the manifest.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub symbols: Option<u64>,
    pub min_errors: Option<u64>,
    pub workers: Option<usize>,
}

/// What a command printed and wrote.
#[derive(Debug, Clone, Default)]
pub struct Summary {
    pub lines: Vec<String>,
    pub files: Vec<PathBuf>,
}

struct Artifacts {
    lines: Vec<String>,
    files: Vec<(&'static str, Vec<u8>)>,
}

impl Artifacts {
    fn new() -> Self {
        Artifacts {
            lines: Vec::new(),
            files: Vec::new(),
        }
    }

    fn line(&mut self, s: impl Into<String>) {
        self.lines.push(s.into());
    }
}

fn config_error(reason: impl Into<String>) -> CliError {
    CliError::Config {
        path: "arguments".into(),
        reason: reason.into(),
    }
}

pub fn execute(
    command: Command,
    mut manifest: RunManifest,
    overrides: &Overrides,
) -> Result<Summary, CliError> {
    if let Some(declared) = manifest.command {
        if declared != command {
            return Err(config_error(format!(
                "manifest is for `{declared}`, not `{command}`"
            )));
        }
    }
    if let Some(out) = &overrides.out {
        manifest.output_dir = out.clone();
    }
    for spec in &mut manifest.specs {
        if let Some(seed) = overrides.seed {
            spec.seed = seed;
        }
        if let Some(n) = overrides.symbols {
            spec.symbols_per_point = n;
        }
        if let Some(n) = overrides.min_errors {
            spec.min_errors = n;
        }
    }
    manifest.check_specs()?;

    let artifacts = match overrides.workers {
        Some(0) => return Err(config_error("--workers must be at least 1")),
        Some(n) => with_workers(n, || dispatch(command, &manifest))??,
        None => dispatch(command, &manifest)?,
    };

    let dir = &manifest.output_dir;
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::io(format!("creating {}", dir.display()), e))?;
    let mut files = Vec::new();
    for (name, bytes) in artifacts.files {
        let path = dir.join(name);
        std::fs::write(&path, bytes)
            .map_err(|e| CliError::io(format!("writing {}", path.display()), e))?;
        files.push(path);
    }
    Ok(Summary {
        lines: artifacts.lines,
        files,
    })
}

fn dispatch(command: Command, m: &RunManifest) -> Result<Artifacts, CliError> {
    match command {
        Command::Optimize => optimize(m),
        Command::Lookup => lookup(m),
        Command::Constellation => constellation(m),
        Command::Ser => ser(m),
        Command::AlphaSweep => alpha_sweep(m),
        Command::Throughput => throughput_cmd(m),
    }
}

fn fmt_offsets(a: &mut Artifacts, offsets: &OffsetVector) {
    for (k, d) in offsets.as_slice().iter().enumerate() {
        a.line(format!("delta_{} = {:.6} rad ({:.2} deg)", k + 1, d, d.to_degrees()));
    }
}

fn optimize(m: &RunManifest) -> Result<Artifacts, CliError> {
    let mut a = Artifacts::new();
    let (offsets, d2) = optimize_offsets(&m.config, &m.search)?;
    fmt_offsets(&mut a, &offsets);
    a.line(format!("d2min = {:.6}", d2.value()));
    let record = json!({
        "mod_orders": m.config.mod_orders(),
        "alpha": m.config.power_coeffs(),
        "total_power": m.config.total_power(),
        "offsets": offsets.as_slice(),
        "offsets_deg": offsets.degrees(),
        "d2min": d2.value(),
    });
    a.files.push(("offsets.json", pretty(&record)?));
    if let Some(grid) = &m.alpha_grid {
        let rows = sweep_offsets(m.config.mod_orders(), grid, &m.search)?;
        let mut buf = Vec::new();
        write_sweep_csv(&mut buf, &rows)?;
        a.line(format!("offset sweep over {} values of alpha_1", rows.len()));
        a.files.push(("offset_sweep.csv", buf));
    }
    Ok(a)
}

fn lookup(m: &RunManifest) -> Result<Artifacts, CliError> {
    let mut a = Artifacts::new();
    let table = build_lookup(&m.lookup_families, &m.search, m.lookup_resolution)?;
    a.line(format!(
        "{} entries at resolution 1/{}, max recompute error {:.1e}",
        table.len(),
        table.resolution(),
        table.max_recompute_error()?
    ));
    a.files.push(("lookup.json", table.to_json()?.into_bytes()));
    Ok(a)
}

fn constellation(m: &RunManifest) -> Result<Artifacts, CliError> {
    let mut a = Artifacts::new();
    let offsets = match m.config.mode() {
        OffsetMode::Static => transmit_offsets(&m.config, &OffsetVector::zeros(m.num_users()))?,
        OffsetMode::Dynamic => optimize_offsets(&m.config, &m.search)?.0,
    };
    let comp = compose(&m.config, &offsets)?;
    fmt_offsets(&mut a, &offsets);
    a.line(format!(
        "{} composite points, d2min = {:.6}",
        comp.len(),
        min_squared_distance(&comp)?.value()
    ));
    let mut buf = Vec::new();
    write_constellation_csv(&mut buf, &comp)?;
    a.files.push(("constellation.csv", buf));
    for spec in &m.specs {
        if let Scheme::JdNoma { transmit, .. } = &spec.scheme {
            let comp = compose(&m.config, transmit)?;
            a.line(format!(
                "{}: d2min = {:.6}",
                spec.scheme.label(),
                min_squared_distance(&comp)?.value()
            ));
            let mut buf = Vec::new();
            write_constellation_csv(&mut buf, &comp)?;
            a.files.push(("constellation_jd_noma.csv", buf));
            break;
        }
    }
    Ok(a)
}

fn require_schemes(m: &RunManifest) -> Result<(), CliError> {
    if m.specs.is_empty() {
        return Err(config_error("manifest lists no schemes"));
    }
    if m.specs[0].snr_grid_db.is_empty() {
        return Err(config_error("manifest has no snr_db grid"));
    }
    Ok(())
}

fn table_for(m: &RunManifest) -> Result<LookupTable, CliError> {
    let mut families = m.lookup_families.clone();
    if !families.iter().any(|f| f == m.config.mod_orders()) {
        families.push(m.config.mod_orders().to_vec());
    }
    Ok(build_lookup(&families, &m.search, m.lookup_resolution)?)
}

fn crossing_line(r: &SerResult) -> String {
    let users: Vec<String> = (0..r.num_users())
        .map(|k| match r.snr_at_ser(k, 1e-2) {
            Some(s) => format!("U{} {:.2} dB", k + 1, s),
            None => format!("U{} not reached", k + 1),
        })
        .collect();
    format!(
        "{:<24} L={} ratio {} dB  SER 1e-2 at: {} ({} points)",
        r.scheme.label(),
        r.channel.num_antennas,
        r.channel.gain_ratio_db,
        users.join(", "),
        r.points.len()
    )
}

fn results_csv(results: &[SerResult]) -> Result<Vec<u8>, CliError> {
    let width = results.iter().map(SerResult::num_users).max().unwrap_or(1);
    let mut buf = Vec::new();
    for (i, r) in results.iter().enumerate() {
        write_results_csv_padded(&mut buf, r, i == 0, width)?;
    }
    Ok(buf)
}

fn ser(m: &RunManifest) -> Result<Artifacts, CliError> {
    require_schemes(m)?;
    let table = table_for(m)?;
    let mut a = Artifacts::new();
    let results = m
        .specs
        .iter()
        .map(|s| run_ser(s, &table))
        .collect::<acma_core::Result<Vec<_>>>()?;
    for r in &results {
        a.line(crossing_line(r));
    }
    let acma: Vec<&SerResult> = results.iter().filter(|r| r.scheme == Scheme::Acma).collect();
    if !acma.is_empty() {
        let offsets = match m.config.mode() {
            OffsetMode::Static => transmit_offsets(&m.config, &OffsetVector::zeros(m.num_users()))?,
            OffsetMode::Dynamic => table.get(&m.config)?.offsets.clone(),
        };
        if let Ok(bound) = ser_upper_bound(&m.config, &offsets) {
            a.line(format!(
                "bound: {}-QAM reference, predicted gap {:.2} dB",
                bound.composite_order,
                bound.gap_db()
            ));
            let mut text = String::from("ratio_db,antennas,snr_db,ser_bound\n");
            for r in &acma {
                for p in &r.points {
                    text.push_str(&format!(
                        "{},{},{},{}\n",
                        r.channel.gain_ratio_db,
                        r.channel.num_antennas,
                        p.snr_db,
                        bound.ser(p.snr_db, &r.channel, 0)
                    ));
                }
            }
            a.files.push(("bound.csv", text.into_bytes()));
        }
    }
    a.files.push(("results.csv", results_csv(&results)?));
    Ok(a)
}

fn alpha_sweep(m: &RunManifest) -> Result<Artifacts, CliError> {
    require_schemes(m)?;
    if m.alpha_grid.is_none() {
        return Err(config_error("alpha-sweep needs alpha_grid"));
    }
    let table = table_for(m)?;
    let mut a = Artifacts::new();
    let results = m
        .specs
        .iter()
        .map(|s| run_alpha_sweep(s, &table))
        .collect::<acma_core::Result<Vec<_>>>()?;
    for r in &results {
        let cells: Vec<String> = r
            .points
            .iter()
            .map(|p| {
                let sers: Vec<String> = p.users.iter().map(|t| format!("{:.1e}", t.ser())).collect();
                format!("{:.2}:[{}]", p.alpha[0], sers.join(" "))
            })
            .collect();
        a.line(format!("{:<24} {}", r.scheme.label(), cells.join(" ")));
    }
    a.files.push(("results.csv", results_csv(&results)?));
    Ok(a)
}

fn throughput_cmd(m: &RunManifest) -> Result<Artifacts, CliError> {
    require_schemes(m)?;
    let table = table_for(m)?;
    let mut a = Artifacts::new();
    let mut buf = Vec::new();
    let mut results = Vec::new();
    for (i, spec) in m.specs.iter().enumerate() {
        let r = run_ser(spec, &table)?;
        let th = throughput(&r);
        write_throughput_csv_padded(&mut buf, &r, &th, i == 0, m.num_users())?;
        let last = th.points.last().expect("non-empty grid");
        a.line(format!(
            "{:<24} ratio {} dB  Omega = {:.2} bits/use at {} dB",
            r.scheme.label(),
            r.channel.gain_ratio_db,
            last.omega,
            last.snr_db
        ));
        results.push(r);
    }
    a.files.push(("throughput.csv", buf));
    a.files.push(("results.csv", results_csv(&results)?));
    Ok(a)
}

fn pretty(v: &serde_json::Value) -> Result<Vec<u8>, CliError> {
    serde_json::to_vec_pretty(v)
        .map_err(|e| acma_core::Error::Serialization(e.to_string()).into())
}
