//! CSV artifacts consumed by the plotting scripts.
//!
//! * constellation: `label_user1..label_userK,re,im`
//! * results: `scheme,K,mods,alpha1..alphaK,ratio_db,antennas,snr_db,user,ser,errors,trials,ci_halfwidth,omega`,
//!   one row per user and an aggregate `user = sum` row per grid point
//!   (pooled composite error rate, total throughput)
//! * throughput: `scheme,K,mods,alpha1..alphaK,ratio_db,antennas,snr_db,omega`
//! * offset sweep: `alpha1,offset_rad,offset_deg,d2min`

use std::io::Write;

use crate::constellation::CompositeConstellation;
use crate::error::{Error, Result};
use crate::optimizer::SweepRow;
use crate::simulator::{throughput, SerResult, ThroughputResult};

fn csv_err(e: impl std::fmt::Display) -> Error {
    Error::Serialization(e.to_string())
}

fn mods_field(orders: &[u32]) -> String {
    orders.iter().map(u32::to_string).collect::<Vec<_>>().join("x")
}

pub fn write_constellation_csv<W: Write>(out: W, comp: &CompositeConstellation) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = (1..=comp.num_users()).map(|k| format!("label_user{k}")).collect();
    header.extend(["re".into(), "im".into()]);
    w.write_record(&header).map_err(csv_err)?;
    for (i, label) in comp.labels().enumerate() {
        let mut row: Vec<String> = label.iter().map(usize::to_string).collect();
        row.push(comp.points()[i].re.to_string());
        row.push(comp.points()[i].im.to_string());
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush().map_err(csv_err)
}

fn results_header(k: usize, tail: &[&str]) -> Vec<String> {
    let mut h: Vec<String> = ["scheme", "K", "mods"].iter().map(|s| s.to_string()).collect();
    h.extend((1..=k).map(|i| format!("alpha{i}")));
    h.extend(["ratio_db", "antennas", "snr_db"].iter().map(|s| s.to_string()));
    h.extend(tail.iter().map(|s| s.to_string()));
    h
}

fn row_prefix(ser: &SerResult, alpha: &[f64], snr_db: f64, width: usize) -> Vec<String> {
    let mut row = vec![
        ser.scheme.label(),
        ser.num_users().to_string(),
        mods_field(&ser.mod_orders),
    ];
    row.extend(alpha.iter().map(f64::to_string));
    row.extend((alpha.len()..width).map(|_| String::new()));
    row.push(ser.channel.gain_ratio_db.to_string());
    row.push(ser.channel.num_antennas.to_string());
    row.push(snr_db.to_string());
    row
}

/// Writes the results table. With `header == false` only data rows are
/// written, for appending several schemes with the same K to one file.
pub fn write_results_csv<W: Write>(out: W, ser: &SerResult, header: bool) -> Result<()> {
    write_results_csv_padded(out, ser, header, ser.num_users())
}

/// Like [`write_results_csv`] with `alpha_columns` alpha fields; results
/// with fewer users leave the extra fields empty.
pub fn write_results_csv_padded<W: Write>(
    out: W,
    ser: &SerResult,
    header: bool,
    alpha_columns: usize,
) -> Result<()> {
    let width = alpha_columns.max(ser.num_users());
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    if header {
        w.write_record(results_header(
            width,
            &["user", "ser", "errors", "trials", "ci_halfwidth", "omega"],
        ))
        .map_err(csv_err)?;
    }
    let omega = throughput(ser);
    for (p, tp) in ser.points.iter().zip(&omega.points) {
        for (k, t) in p.users.iter().enumerate() {
            let mut row = row_prefix(ser, &p.alpha, p.snr_db, width);
            row.extend([
                (k + 1).to_string(),
                t.ser().to_string(),
                t.errors.to_string(),
                t.trials.to_string(),
                t.ci_halfwidth().to_string(),
                tp.per_user[k].to_string(),
            ]);
            w.write_record(&row).map_err(csv_err)?;
        }
        let mut row = row_prefix(ser, &p.alpha, p.snr_db, width);
        row.extend([
            "sum".to_string(),
            p.composite.ser().to_string(),
            p.composite.errors.to_string(),
            p.composite.trials.to_string(),
            p.composite.ci_halfwidth().to_string(),
            tp.omega.to_string(),
        ]);
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush().map_err(csv_err)
}

pub fn write_throughput_csv<W: Write>(
    out: W,
    ser: &SerResult,
    omega: &ThroughputResult,
    header: bool,
) -> Result<()> {
    write_throughput_csv_padded(out, ser, omega, header, ser.num_users())
}

pub fn write_throughput_csv_padded<W: Write>(
    out: W,
    ser: &SerResult,
    omega: &ThroughputResult,
    header: bool,
    alpha_columns: usize,
) -> Result<()> {
    let width = alpha_columns.max(ser.num_users());
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    if header {
        w.write_record(results_header(width, &["omega"]))
            .map_err(csv_err)?;
    }
    for p in &omega.points {
        let mut row = row_prefix(ser, &p.alpha, p.snr_db, width);
        row.push(p.omega.to_string());
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush().map_err(csv_err)
}

pub fn write_sweep_csv<W: Write>(out: W, rows: &[SweepRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["alpha1", "offset_rad", "offset_deg", "d2min"])
        .map_err(csv_err)?;
    for r in rows {
        w.write_record([
            r.alpha1.to_string(),
            r.offset.to_string(),
            r.offset.to_degrees().to_string(),
            r.d2min.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(csv_err)
}
