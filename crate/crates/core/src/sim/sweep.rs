//! Paired Monte-Carlo BER sweeps.
//!
//! Trial `i` at SNR index `k` draws everything from
//! `RngStream::new(seed, (k << 40) | i)`: first the channel, then the bits,
//! then the noise. All enabled detectors see the same `(H, x, n)`.
//!
//! Trials are grouped into fixed batches and batches into fixed rounds. A
//! round is evaluated (in parallel when available), then batches are merged
//! in index order and the stop rule is tested after each batch, so the
//! result does not depend on how many workers ran the round.

use std::time::Instant;

use num_complex::Complex64;

use crate::channel::{add_noise, draw_channel, draw_channel_conditioned, snr_to_sigma2, RngStream};
use crate::detect::{
    check_oracle_guard, detect_ml, detect_mpmht_with, detect_zf_qr, pivot_orderings, Candidate,
    PivotOrdering,
};
use crate::linalg::{residual_norm_sqr, ComplexMatrix, ComplexVector};
use crate::modem::Constellation;
use crate::sim::config::{DetectorId, SweepConfig};
use crate::{Error, Result};

pub const BATCH_TRIALS: u64 = 64;
pub const ROUND_BATCHES: u64 = 32;

/// One in this many trials re-checks `metric(detector) >= metric(ML)`.
const SPOT_CHECK_EVERY: u64 = 100;

/// Serial or data-parallel evaluation of each round of batches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Serial,
    /// Uses rayon when the `parallel` feature is enabled, serial otherwise.
    #[default]
    Parallel,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BerRecord {
    pub detector: DetectorId,
    pub snr_db: f64,
    pub bits: u64,
    pub errors: u64,
    pub ber: f64,
    /// Trials whose hard vector differs from ML; `None` when ML is disabled.
    pub mismatch_ml: Option<u64>,
    pub mean_cond: f64,
    pub trials: u64,
    pub wall_s: f64,
}

/// Stream id of trial `trial` at SNR index `snr_index`.
pub fn trial_stream(snr_index: usize, trial: u64) -> u64 {
    ((snr_index as u64) << 40) | trial
}

/// One transmitted block.
#[derive(Debug, Clone)]
pub struct TrialDraw {
    pub h: ComplexMatrix,
    pub cond: f64,
    pub bits: Vec<u8>,
    pub symbols: Vec<usize>,
    pub y: ComplexVector,
}

/// Draws the channel, payload and noise of one trial.
pub fn draw_trial(
    cfg: &SweepConfig,
    c: &Constellation,
    sigma2: f64,
    rng: &mut RngStream,
) -> Result<TrialDraw> {
    let ch = match cfg.min_cond {
        Some(mc) => draw_channel_conditioned(rng, cfg.n_r, cfg.n_t, mc)?,
        None => draw_channel(rng, cfg.n_r, cfg.n_t)?,
    };
    let bps = c.bits_per_symbol();
    let bits = rng.bits(cfg.n_t * bps);
    let symbols = bits
        .chunks_exact(bps)
        .map(|b| c.map_bits(b))
        .collect::<Result<Vec<_>>>()?;
    let x: Vec<Complex64> = symbols.iter().map(|&s| c.point(s)).collect();
    let clean = ch.h.mul_vec(&ComplexVector::from_vec_unchecked(x))?;
    let y = add_noise(&clean, sigma2, rng)?;
    Ok(TrialDraw {
        h: ch.h,
        cond: ch.cond,
        bits,
        symbols,
        y,
    })
}

#[derive(Debug, Clone, Default)]
struct Tally {
    trials: u64,
    errors: Vec<u64>,
    mismatches: Vec<u64>,
    cond_sum: f64,
    seconds: Vec<f64>,
}

impl Tally {
    fn new(n: usize) -> Self {
        Tally {
            trials: 0,
            errors: vec![0; n],
            mismatches: vec![0; n],
            cond_sum: 0.0,
            seconds: vec![0.0; n],
        }
    }

    fn absorb(&mut self, other: &Tally) {
        self.trials += other.trials;
        self.cond_sum += other.cond_sum;
        for i in 0..self.errors.len() {
            self.errors[i] += other.errors[i];
            self.mismatches[i] += other.mismatches[i];
            self.seconds[i] += other.seconds[i];
        }
    }
}

/// Everything constant across the trials of one sweep.
struct Plan<'a> {
    cfg: &'a SweepConfig,
    constellation: Constellation,
    cyclic: Vec<PivotOrdering>,
    full: Vec<PivotOrdering>,
    ml_slot: Option<usize>,
}

impl Plan<'_> {
    fn detect(&self, d: DetectorId, y: &ComplexVector, h: &ComplexMatrix) -> Result<Candidate> {
        let c = &self.constellation;
        match d {
            DetectorId::Ml => detect_ml(y, h, c),
            DetectorId::ZfQr => detect_zf_qr(y, h, c),
            DetectorId::MpmhtCyclic => Ok(detect_mpmht_with(y, h, c, &self.cyclic)?.hard),
            DetectorId::MpmhtFull => Ok(detect_mpmht_with(y, h, c, &self.full)?.hard),
        }
    }

    fn run_batch(&self, snr_index: usize, sigma2: f64, start: u64, end: u64) -> Result<Tally> {
        let cfg = self.cfg;
        let c = &self.constellation;
        let n_det = cfg.detectors.len();
        let mut tally = Tally::new(n_det);
        let mut decided: Vec<Candidate> = Vec::with_capacity(n_det);
        for trial in start..end {
            let mut rng = RngStream::new(cfg.seed, trial_stream(snr_index, trial));
            let draw = draw_trial(cfg, c, sigma2, &mut rng)?;
            decided.clear();
            for (slot, &d) in cfg.detectors.iter().enumerate() {
                let t0 = cfg.record_wall_time.then(Instant::now);
                let cand = self.detect(d, &draw.y, &draw.h)?;
                if let Some(t0) = t0 {
                    tally.seconds[slot] += t0.elapsed().as_secs_f64();
                }
                let mut errs = 0;
                for (t, &s) in cand.symbols.iter().enumerate() {
                    errs += (s ^ draw.symbols[t]).count_ones() as u64;
                }
                tally.errors[slot] += errs;
                decided.push(cand);
            }
            if let Some(ml) = self.ml_slot {
                for slot in 0..n_det {
                    if decided[slot].symbols != decided[ml].symbols {
                        tally.mismatches[slot] += 1;
                    }
                }
                if trial % SPOT_CHECK_EVERY == 0 {
                    self.spot_check(&draw, &decided, ml)?;
                }
            }
            tally.cond_sum += draw.cond;
            tally.trials += 1;
        }
        Ok(tally)
    }

    /// Every detector's full metric must be at least the ML metric.
    fn spot_check(&self, draw: &TrialDraw, decided: &[Candidate], ml: usize) -> Result<()> {
        let c = &self.constellation;
        let y = draw.y.as_slice();
        let ml_metric = residual_norm_sqr(y, &draw.h, &decided[ml].transmit_vector(c));
        for (slot, cand) in decided.iter().enumerate() {
            let m = residual_norm_sqr(y, &draw.h, &cand.transmit_vector(c));
            if m < ml_metric * (1.0 - 1e-9) - 1e-12 {
                return Err(Error::Invariant(format!(
                    "{} metric {m} below ML metric {ml_metric}",
                    self.cfg.detectors[slot]
                )));
            }
        }
        Ok(())
    }
}

fn run_round(
    plan: &Plan<'_>,
    snr_index: usize,
    sigma2: f64,
    ranges: &[(u64, u64)],
    exec: Execution,
) -> Result<Vec<Tally>> {
    let job = |&(s, e): &(u64, u64)| plan.run_batch(snr_index, sigma2, s, e);
    match exec {
        Execution::Serial => ranges.iter().map(job).collect(),
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            ranges.par_iter().map(job).collect()
        }
        #[cfg(not(feature = "parallel"))]
        Execution::Parallel => ranges.iter().map(job).collect(),
    }
}

/// Runs the sweep described by `cfg` with data-parallel batches.
pub fn run_ber_sweep(cfg: &SweepConfig) -> Result<Vec<BerRecord>> {
    run_ber_sweep_with(cfg, Execution::Parallel)
}

pub fn run_ber_sweep_with(cfg: &SweepConfig, exec: Execution) -> Result<Vec<BerRecord>> {
    cfg.validate()?;
    if cfg.has(DetectorId::Ml) {
        check_oracle_guard(cfg.modulation.order(), cfg.n_t)?;
    }
    match (exec, cfg.threads) {
        #[cfg(feature = "parallel")]
        (Execution::Parallel, Some(n)) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::contract(format!("cannot start {n} worker threads: {e}")))?;
            pool.install(|| sweep(cfg, exec))
        }
        _ => sweep(cfg, exec),
    }
}

fn sweep(cfg: &SweepConfig, exec: Execution) -> Result<Vec<BerRecord>> {
    let plan = Plan {
        cfg,
        constellation: Constellation::new(cfg.modulation),
        cyclic: pivot_orderings(cfg.n_t, crate::detect::OrderingVariant::Cyclic)?,
        full: if cfg.has(DetectorId::MpmhtFull) {
            pivot_orderings(cfg.n_t, crate::detect::OrderingVariant::Full)?
        } else {
            Vec::new()
        },
        ml_slot: cfg.detectors.iter().position(|&d| d == DetectorId::Ml),
    };
    let n_det = cfg.detectors.len();
    let bits_per_trial = (cfg.n_t * plan.constellation.bits_per_symbol()) as u64;

    let mut per_snr = Vec::with_capacity(cfg.snr_db.len());
    for (k, &snr) in cfg.snr_db.iter().enumerate() {
        let sigma2 = snr_to_sigma2(snr, cfg.n_t);
        let mut total = Tally::new(n_det);
        let mut next = 0u64;
        'rounds: while next < cfg.max_trials {
            let ranges: Vec<(u64, u64)> = (0..ROUND_BATCHES)
                .map(|b| next + b * BATCH_TRIALS)
                .take_while(|&s| s < cfg.max_trials)
                .map(|s| (s, (s + BATCH_TRIALS).min(cfg.max_trials)))
                .collect();
            next = ranges.last().map_or(cfg.max_trials, |r| r.1);
            for tally in run_round(&plan, k, sigma2, &ranges, exec)? {
                total.absorb(&tally);
                if total.errors.iter().all(|&e| e >= cfg.min_errors) {
                    break 'rounds;
                }
            }
        }
        per_snr.push((snr, total));
    }

    let mut records = Vec::with_capacity(n_det * per_snr.len());
    for (slot, &d) in cfg.detectors.iter().enumerate() {
        for (snr, tally) in &per_snr {
            let bits = tally.trials * bits_per_trial;
            let errors = tally.errors[slot];
            records.push(BerRecord {
                detector: d,
                snr_db: *snr,
                bits,
                errors,
                ber: if bits == 0 { 0.0 } else { errors as f64 / bits as f64 },
                mismatch_ml: plan.ml_slot.map(|_| tally.mismatches[slot]),
                mean_cond: tally.cond_sum / tally.trials.max(1) as f64,
                trials: tally.trials,
                wall_s: if cfg.record_wall_time { tally.seconds[slot] } else { 0.0 },
            });
        }
    }
    Ok(records)
}
