//! CSV serialization of BER records.
//!
//! Floats are written with 17 significant digits so a parse of the
//! emitted file reproduces the exact values, and the byte stream is a
//! pure function of the records.

use std::io::Write;
use std::path::Path;

use isic_core::detectors::Scheme;
use isic_core::sim::BerRecord;

pub const HEADER: &str =
    "scheme,N,M,mod,K,snr_db,trials,bits,bit_errors,ber,flops_init,flops_per_iter";
pub const CONVENTION_COMMENT: &str = "# snr_convention=N/sigma2";

/// 17 significant digits; round-trips any finite f64.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Records sorted by (scheme, SNR), serialized as one CSV document.
pub fn csv_string(records: &[BerRecord]) -> String {
    let mut sorted: Vec<&BerRecord> = records.iter().collect();
    sorted.sort_by(|a, b| {
        (a.scheme, a.n_tx, a.n_rx)
            .cmp(&(b.scheme, b.n_tx, b.n_rx))
            .then(a.snr_db.partial_cmp(&b.snr_db).expect("finite SNR"))
    });
    let mut out = String::new();
    out.push_str(CONVENTION_COMMENT);
    out.push('\n');
    out.push_str(HEADER);
    out.push('\n');
    for r in sorted {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}\n",
            r.scheme,
            r.n_tx,
            r.n_rx,
            r.order,
            r.iterations,
            format_float(r.snr_db),
            r.trials,
            r.bits,
            r.bit_errors,
            format_float(r.ber),
            format_float(r.flops_init),
            format_float(r.flops_per_iter),
        ));
    }
    out
}

/// Write the CSV document to `path`.
pub fn emit_csv(records: &[BerRecord], path: &Path) -> std::io::Result<()> {
    let mut file = std::fs::File::create(path)?;
    file.write_all(csv_string(records).as_bytes())
}

/// Parse a document produced by [`csv_string`]. Failure counts are
/// not serialized and come back as zero.
pub fn parse_csv(text: &str) -> Result<Vec<BerRecord>, String> {
    let mut records = Vec::new();
    let mut saw_header = false;
    for (lineno, line) in text.lines().enumerate() {
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if !saw_header {
            if line != HEADER {
                return Err(format!("line {}: unexpected header `{line}`", lineno + 1));
            }
            saw_header = true;
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 12 {
            return Err(format!(
                "line {}: expected 12 fields, got {}",
                lineno + 1,
                fields.len()
            ));
        }
        let scheme = Scheme::parse(fields[0])
            .ok_or_else(|| format!("line {}: unknown scheme `{}`", lineno + 1, fields[0]))?;
        let err = |what: &str| format!("line {}: bad {what}", lineno + 1);
        records.push(BerRecord {
            scheme,
            n_tx: fields[1].parse().map_err(|_| err("N"))?,
            n_rx: fields[2].parse().map_err(|_| err("M"))?,
            order: fields[3].parse().map_err(|_| err("mod"))?,
            iterations: fields[4].parse().map_err(|_| err("K"))?,
            snr_db: fields[5].parse().map_err(|_| err("snr_db"))?,
            trials: fields[6].parse().map_err(|_| err("trials"))?,
            bits: fields[7].parse().map_err(|_| err("bits"))?,
            bit_errors: fields[8].parse().map_err(|_| err("bit_errors"))?,
            ber: fields[9].parse().map_err(|_| err("ber"))?,
            flops_init: fields[10].parse().map_err(|_| err("flops_init"))?,
            flops_per_iter: fields[11].parse().map_err(|_| err("flops_per_iter"))?,
            failures: 0,
        });
    }
    if !saw_header {
        return Err("no header line found".into());
    }
    Ok(records)
}
