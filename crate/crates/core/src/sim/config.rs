//! Sweep configuration files.
//!
//! One `key = value` pair per line; `#` starts a comment. Recognised keys and
//! defaults:
//!
//! | key          | value                                        | default                       |
//! |--------------|----------------------------------------------|-------------------------------|
//! | `nt`, `nr`   | antenna counts, `1 <= nt <= 8`, `nr >= nt`   | required                      |
//! | `mod`        | `qpsk`, `qam16`, `qam64`, `qam256`           | required                      |
//! | `snr_db`     | comma list, strictly increasing              | required                      |
//! | `detectors`  | comma list of `ml`, `zfqr`, `mpmht_cyclic`, `mpmht_full` | `ml,zfqr,mpmht_cyclic` (without `ml` if the oracle guard is exceeded) |
//! | `min_errors` | bit errors per SNR point before stopping     | 100                           |
//! | `max_trials` | trial cap per SNR point                      | 1000000                       |
//! | `seed`       | unsigned 64-bit                              | 1                             |
//! | `min_cond`   | reject channels with condition number ≤ this | unset                         |
//! | `llr_scale`  | `none`, `linear`, `exp`                      | `none`                        |
//! | `beta`       | linear scaling slope in `[0, 1]`             | 0.5                           |
//! | `gamma`      | exponential decay rate `> 0`                 | 1.0                           |
//! | `out`        | output CSV path                              | standard output               |

use std::collections::HashMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::detect::{check_oracle_guard, OrderingVariant, MAX_LAYERS};
use crate::modem::Modulation;
use crate::softout::{ScalingKind, ScalingScheme};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DetectorId {
    Ml,
    ZfQr,
    MpmhtCyclic,
    MpmhtFull,
}

impl DetectorId {
    pub const ALL: [DetectorId; 4] = [
        DetectorId::Ml,
        DetectorId::ZfQr,
        DetectorId::MpmhtCyclic,
        DetectorId::MpmhtFull,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DetectorId::Ml => "ml",
            DetectorId::ZfQr => "zfqr",
            DetectorId::MpmhtCyclic => "mpmht_cyclic",
            DetectorId::MpmhtFull => "mpmht_full",
        }
    }

    pub fn variant(self) -> Option<OrderingVariant> {
        match self {
            DetectorId::MpmhtCyclic => Some(OrderingVariant::Cyclic),
            DetectorId::MpmhtFull => Some(OrderingVariant::Full),
            _ => None,
        }
    }
}

impl fmt::Display for DetectorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DetectorId {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Self::ALL
            .into_iter()
            .find(|d| d.name() == s)
            .ok_or_else(|| format!("unknown detector `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub n_t: usize,
    pub n_r: usize,
    pub modulation: Modulation,
    pub snr_db: Vec<f64>,
    /// Enabled detectors; records follow this order.
    pub detectors: Vec<DetectorId>,
    pub min_errors: u64,
    pub max_trials: u64,
    pub seed: u64,
    pub min_cond: Option<f64>,
    pub llr_scale: ScalingScheme,
    pub out: Option<PathBuf>,
    /// Worker threads; `None` uses the global pool.
    pub threads: Option<usize>,
    /// Fill `wall_s` with measured time. Off by default so that repeated runs
    /// write byte-identical CSV.
    pub record_wall_time: bool,
}

pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_MIN_ERRORS: u64 = 100;
pub const DEFAULT_MAX_TRIALS: u64 = 1_000_000;
pub const DEFAULT_BETA: f64 = 0.5;
pub const DEFAULT_GAMMA: f64 = 1.0;

impl SweepConfig {
    /// A config with documented defaults for everything but the system shape.
    pub fn new(n_t: usize, n_r: usize, modulation: Modulation, snr_db: Vec<f64>) -> Self {
        let detectors = if check_oracle_guard(modulation.order(), n_t).is_ok() {
            vec![DetectorId::Ml, DetectorId::ZfQr, DetectorId::MpmhtCyclic]
        } else {
            vec![DetectorId::ZfQr, DetectorId::MpmhtCyclic]
        };
        SweepConfig {
            n_t,
            n_r,
            modulation,
            snr_db,
            detectors,
            min_errors: DEFAULT_MIN_ERRORS,
            max_trials: DEFAULT_MAX_TRIALS,
            seed: DEFAULT_SEED,
            min_cond: None,
            llr_scale: ScalingScheme::None,
            out: None,
            threads: None,
            record_wall_time: false,
        }
    }

    pub fn with_detectors(mut self, detectors: &[DetectorId]) -> Self {
        self.detectors = detectors.to_vec();
        self
    }

    pub fn with_stop_rule(mut self, min_errors: u64, max_trials: u64) -> Self {
        self.min_errors = min_errors;
        self.max_trials = max_trials;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_min_cond(mut self, min_cond: f64) -> Self {
        self.min_cond = Some(min_cond);
        self
    }

    pub fn has(&self, d: DetectorId) -> bool {
        self.detectors.contains(&d)
    }

    /// Checks the invariants a sweep relies on.
    pub fn validate(&self) -> Result<()> {
        self.check().map_err(|(_, msg)| Error::config(None, msg))
    }

    /// Like [`validate`](Self::validate) but reports the offending key.
    fn check(&self) -> std::result::Result<(), (&'static str, String)> {
        if self.n_t == 0 || self.n_t > MAX_LAYERS {
            return Err(("nt", format!("nt must be in 1..={MAX_LAYERS}, got {}", self.n_t)));
        }
        if self.n_r < self.n_t {
            return Err(("nr", format!("nr ({}) must be >= nt ({})", self.n_r, self.n_t)));
        }
        if self.snr_db.is_empty() || self.snr_db.iter().any(|s| !s.is_finite()) {
            return Err(("snr_db", "snr_db must be a non-empty list of finite values".into()));
        }
        if self.snr_db.windows(2).any(|w| w[1] <= w[0]) {
            return Err(("snr_db", "snr_db must be strictly increasing".into()));
        }
        if self.detectors.is_empty() {
            return Err(("detectors", "at least one detector is required".into()));
        }
        if self.min_errors == 0 {
            return Err(("min_errors", "min_errors must be >= 1".into()));
        }
        if self.max_trials == 0 {
            return Err(("max_trials", "max_trials must be >= 1".into()));
        }
        if let Some(mc) = self.min_cond {
            if !(mc >= 1.0) || !mc.is_finite() {
                return Err(("min_cond", format!("min_cond must be a finite value >= 1, got {mc}")));
            }
        }
        if self.threads == Some(0) {
            return Err(("threads", "threads must be >= 1".into()));
        }
        Ok(())
    }
}

/// Parses and validates a configuration file body.
pub fn parse_config(text: &str) -> Result<SweepConfig> {
    let mut entries: HashMap<&str, (usize, &str)> = HashMap::new();
    const KEYS: [&str; 13] = [
        "nt", "nr", "mod", "snr_db", "detectors", "min_errors", "max_trials", "seed", "min_cond",
        "llr_scale", "beta", "gamma", "out",
    ];
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::config(Some(line_no), format!("expected `key = value`, got `{line}`")));
        };
        let (key, value) = (key.trim(), value.trim());
        if !KEYS.contains(&key) {
            return Err(Error::config(Some(line_no), format!("unknown key `{key}`")));
        }
        if value.is_empty() {
            return Err(Error::config(Some(line_no), format!("empty value for `{key}`")));
        }
        if let Some((prev, _)) = entries.insert(key, (line_no, value)) {
            return Err(Error::config(
                Some(line_no),
                format!("duplicate key `{key}` (first set on line {prev})"),
            ));
        }
    }

    fn field<T: FromStr>(entries: &HashMap<&str, (usize, &str)>, key: &str) -> Result<Option<T>>
    where
        T::Err: fmt::Display,
    {
        match entries.get(key) {
            None => Ok(None),
            Some(&(line, v)) => v
                .parse::<T>()
                .map(Some)
                .map_err(|e| Error::config(Some(line), format!("bad value `{v}` for `{key}`: {e}"))),
        }
    }
    fn list<T: FromStr>(entries: &HashMap<&str, (usize, &str)>, key: &str) -> Result<Option<Vec<T>>>
    where
        T::Err: fmt::Display,
    {
        match entries.get(key) {
            None => Ok(None),
            Some(&(line, v)) => v
                .split(',')
                .map(|item| {
                    let item = item.trim();
                    item.parse::<T>().map_err(|e| {
                        Error::config(Some(line), format!("bad item `{item}` in `{key}`: {e}"))
                    })
                })
                .collect::<Result<Vec<T>>>()
                .map(Some),
        }
    }
    let required = |key: &str| Error::config(None, format!("missing required key `{key}`"));
    let line_of = |key: &str| entries.get(key).map(|&(l, _)| l);

    let n_t: usize = field(&entries, "nt")?.ok_or_else(|| required("nt"))?;
    let n_r: usize = field(&entries, "nr")?.ok_or_else(|| required("nr"))?;
    let modulation: Modulation = field(&entries, "mod")?.ok_or_else(|| required("mod"))?;
    let snr_db: Vec<f64> = list(&entries, "snr_db")?.ok_or_else(|| required("snr_db"))?;

    let mut cfg = SweepConfig::new(n_t, n_r, modulation, snr_db);
    if let Some(mut dets) = list::<DetectorId>(&entries, "detectors")? {
        let mut seen = Vec::with_capacity(dets.len());
        dets.retain(|d| {
            let fresh = !seen.contains(d);
            seen.push(*d);
            fresh
        });
        cfg.detectors = dets;
    }
    if let Some(v) = field(&entries, "min_errors")? {
        cfg.min_errors = v;
    }
    if let Some(v) = field(&entries, "max_trials")? {
        cfg.max_trials = v;
    }
    if let Some(v) = field(&entries, "seed")? {
        cfg.seed = v;
    }
    cfg.min_cond = field(&entries, "min_cond")?;
    cfg.out = field::<String>(&entries, "out")?.map(PathBuf::from);

    let kind: ScalingKind = field(&entries, "llr_scale")?.unwrap_or(ScalingKind::None);
    let beta: f64 = field(&entries, "beta")?.unwrap_or(DEFAULT_BETA);
    let gamma: f64 = field(&entries, "gamma")?.unwrap_or(DEFAULT_GAMMA);
    cfg.llr_scale = match kind {
        ScalingKind::None => ScalingScheme::None,
        ScalingKind::Linear => ScalingScheme::linear(beta)
            .map_err(|e| Error::config(line_of("beta").or(line_of("llr_scale")), e.to_string()))?,
        ScalingKind::Exponential => ScalingScheme::exponential(gamma)
            .map_err(|e| Error::config(line_of("gamma").or(line_of("llr_scale")), e.to_string()))?,
    };

    cfg.check()
        .map_err(|(key, msg)| Error::config(line_of(key), msg))?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_defaults() {
        let cfg = parse_config("nt = 2\nnr = 2\nmod = qpsk\nsnr_db = 0, 5, 10\n").unwrap();
        assert_eq!(cfg.n_t, 2);
        assert_eq!(cfg.modulation, Modulation::Qpsk);
        assert_eq!(cfg.snr_db, vec![0.0, 5.0, 10.0]);
        assert_eq!(cfg.seed, 1);
        assert_eq!(cfg.min_errors, 100);
        assert_eq!(cfg.max_trials, 1_000_000);
        assert_eq!(cfg.llr_scale, ScalingScheme::None);
        assert_eq!(cfg.detectors, vec![DetectorId::Ml, DetectorId::ZfQr, DetectorId::MpmhtCyclic]);
        assert!(cfg.out.is_none() && cfg.min_cond.is_none());
    }

    #[test]
    fn full_config() {
        let text = "\
# 4x4 ill-conditioned
nt = 4
nr = 4
mod = qam16   # trailing comment
snr_db = 10,12.5
detectors = mpmht_full, ml, ml
min_errors = 200
max_trials = 5000
seed = 99
min_cond = 500
llr_scale = exp
gamma = 2.5
out = results/ber.csv
";
        let cfg = parse_config(text).unwrap();
        assert_eq!(cfg.detectors, vec![DetectorId::MpmhtFull, DetectorId::Ml]);
        assert_eq!(cfg.min_cond, Some(500.0));
        assert_eq!(cfg.llr_scale, ScalingScheme::Exponential { gamma: 2.5 });
        assert_eq!(cfg.out, Some(PathBuf::from("results/ber.csv")));
        assert_eq!((cfg.seed, cfg.min_errors, cfg.max_trials), (99, 200, 5000));
    }

    #[test]
    fn large_systems_default_without_oracle() {
        let cfg = parse_config("nt = 8\nnr = 8\nmod = qam64\nsnr_db = 20").unwrap();
        assert!(!cfg.has(DetectorId::Ml));
    }

    fn err_line(text: &str) -> Option<usize> {
        match parse_config(text) {
            Err(Error::Config { line, .. }) => line,
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn errors_name_the_line() {
        assert_eq!(err_line("nt = 3\nnr = 2\nmod = qpsk\nsnr_db = 0"), Some(2));
        assert_eq!(err_line("nt = 2\nnr = 2\nmod = qpsk\nsnr_db = 0\nfoo = 1"), Some(5));
        assert_eq!(err_line("nt = 2\nnr = 2\nmod = psk8\nsnr_db = 0"), Some(3));
        assert_eq!(err_line("nt = 2\nnr = 2\nmod = qpsk\nsnr_db = 0, x"), Some(4));
        assert_eq!(err_line("nt = 2\nnr = 2\nmod = qpsk\nsnr_db = 5, 0"), Some(4));
        assert_eq!(err_line("nt = 2\nnt = 2\nnr = 2\nmod = qpsk\nsnr_db = 0"), Some(2));
        assert_eq!(err_line("nt 2"), Some(1));
        assert_eq!(err_line("nt = 2\nnr = 2\nmod = qpsk"), None);
        assert_eq!(
            err_line("nt = 2\nnr = 2\nmod = qpsk\nsnr_db = 0\nllr_scale = linear\nbeta = 3"),
            Some(6)
        );
        assert_eq!(err_line("nt = 2\nnr = 2\nmod = qpsk\nsnr_db = 0\nmin_cond = 0.3"), Some(5));
        assert_eq!(err_line("nt = 2\nnr = 2\nmod = qpsk\nsnr_db = 0\ndetectors = ml, mmse"), Some(5));
    }
}
