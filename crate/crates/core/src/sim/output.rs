//! CSV persistence for BER records and LLR dumps.
//!
//! Reals are written in scientific notation with 17 significant digits,
//! which round-trips every `f64` exactly.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use crate::channel::{snr_to_sigma2, RngStream};
use crate::detect::{detect_mpmht, OrderingVariant};
use crate::sim::config::{DetectorId, SweepConfig};
use crate::sim::sweep::{draw_trial, trial_stream, BerRecord};
use crate::softout::{maxlog_llr, scale_llrs};
use crate::modem::Constellation;
use crate::{Error, Result};

pub const BER_COLUMNS: [&str; 9] = [
    "detector", "snr_db", "bits", "errors", "ber", "mismatch_ml", "mean_cond", "trials", "wall_s",
];

pub const LLR_COLUMNS: [&str; 7] = ["trial", "layer", "bit", "llr_raw", "rank", "alpha", "llr_scaled"];

pub fn format_real(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> Error + '_ {
    move |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    }
}

fn create(path: &Path) -> Result<File> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|source| Error::Io {
            path: dir.to_path_buf(),
            source,
        })?;
    }
    File::create(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes records to any sink; `label` names the sink in errors.
pub fn write_records<W: Write>(records: &[BerRecord], sink: W, label: &Path) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(BER_COLUMNS).map_err(csv_err(label))?;
    for r in records {
        w.write_record([
            r.detector.name().to_string(),
            format_real(r.snr_db),
            r.bits.to_string(),
            r.errors.to_string(),
            format_real(r.ber),
            r.mismatch_ml.map(|m| m.to_string()).unwrap_or_default(),
            format_real(r.mean_cond),
            r.trials.to_string(),
            format_real(r.wall_s),
        ])
        .map_err(csv_err(label))?;
    }
    w.flush().map_err(|source| Error::Io {
        path: label.to_path_buf(),
        source,
    })
}

pub fn write_csv(records: &[BerRecord], path: &Path) -> Result<()> {
    write_records(records, create(path)?, path)
}

pub fn read_csv(path: &Path) -> Result<Vec<BerRecord>> {
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut rdr = csv::Reader::from_reader(file);
    let header = rdr.headers().map_err(csv_err(path))?.clone();
    if header.iter().ne(BER_COLUMNS) {
        return Err(Error::contract(format!(
            "{}: unexpected header {:?}",
            path.display(),
            header
        )));
    }
    let bad = |row: usize, what: &str| {
        Error::contract(format!("{}: row {row}: bad {what}", path.display()))
    };
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(csv_err(path))?;
        let row = i + 2;
        let get = |j: usize| rec.get(j).unwrap_or("");
        let real = |j: usize| get(j).parse::<f64>().map_err(|_| bad(row, BER_COLUMNS[j]));
        let count = |j: usize| get(j).parse::<u64>().map_err(|_| bad(row, BER_COLUMNS[j]));
        out.push(BerRecord {
            detector: get(0).parse::<DetectorId>().map_err(|_| bad(row, "detector"))?,
            snr_db: real(1)?,
            bits: count(2)?,
            errors: count(3)?,
            ber: real(4)?,
            mismatch_ml: if get(5).is_empty() { None } else { Some(count(5)?) },
            mean_cond: real(6)?,
            trials: count(7)?,
            wall_s: real(8)?,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LlrRow {
    pub trial: u64,
    pub layer: usize,
    pub bit: usize,
    pub llr_raw: f64,
    pub rank: usize,
    pub alpha: f64,
    pub llr_scaled: f64,
}

/// MP-MHT soft output for `trials` trials at the first SNR point of `cfg`,
/// scaled with `cfg.llr_scale`. Uses the full-permutation list only when
/// `mpmht_full` is the sole MP-MHT detector enabled.
pub fn llr_dump(cfg: &SweepConfig, trials: u64) -> Result<Vec<LlrRow>> {
    cfg.validate()?;
    let variant = if cfg.has(DetectorId::MpmhtFull) && !cfg.has(DetectorId::MpmhtCyclic) {
        OrderingVariant::Full
    } else {
        OrderingVariant::Cyclic
    };
    let c = Constellation::new(cfg.modulation);
    let sigma2 = snr_to_sigma2(cfg.snr_db[0], cfg.n_t);
    let mut rows = Vec::with_capacity(trials as usize * cfg.n_t * c.bits_per_symbol());
    for trial in 0..trials {
        let mut rng = RngStream::new(cfg.seed, trial_stream(0, trial));
        let draw = draw_trial(cfg, &c, sigma2, &mut rng)?;
        let out = detect_mpmht(&draw.y, &draw.h, &c, variant)?;
        let llr = maxlog_llr(&out.list, &c)?;
        let llr = if out.list.len() >= 2 {
            scale_llrs(&llr, out.list.len(), cfg.llr_scale)?
        } else {
            llr
        };
        for layer in 0..llr.layers() {
            for bit in 0..llr.bits_per_symbol() {
                let i = llr.index(layer, bit);
                rows.push(LlrRow {
                    trial,
                    layer,
                    bit,
                    llr_raw: llr.values[i],
                    rank: llr.competitor_rank[i],
                    alpha: llr.alpha[i],
                    llr_scaled: llr.scaled[i],
                });
            }
        }
    }
    Ok(rows)
}

pub fn write_llr_rows<W: Write>(rows: &[LlrRow], sink: W, label: &Path) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(LLR_COLUMNS).map_err(csv_err(label))?;
    for r in rows {
        w.write_record([
            r.trial.to_string(),
            r.layer.to_string(),
            r.bit.to_string(),
            format_real(r.llr_raw),
            r.rank.to_string(),
            format_real(r.alpha),
            format_real(r.llr_scaled),
        ])
        .map_err(csv_err(label))?;
    }
    w.flush().map_err(|source| Error::Io {
        path: label.to_path_buf(),
        source,
    })
}

pub fn write_llr_csv(rows: &[LlrRow], path: &Path) -> Result<()> {
    write_llr_rows(rows, create(path)?, path)
}
