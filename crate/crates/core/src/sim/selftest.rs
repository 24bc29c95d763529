//! 2×2 oracle equivalence: MP-MHT against exhaustive ML, hard and soft.

use crate::channel::{snr_to_sigma2, RngStream};
use crate::detect::{detect_ml, detect_mpmht, OrderingVariant};
use crate::modem::Modulation;
use crate::sim::config::SweepConfig;
use crate::sim::sweep::{draw_trial, trial_stream};
use crate::softout::{llr_oracle_ml, maxlog_llr};
use crate::modem::Constellation;
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EquivalenceReport {
    pub trials: u64,
    /// Trials whose MP-MHT hard vector differs from ML.
    pub hard_mismatches: u64,
    /// Largest `|LLR_list − LLR_oracle|` over all bits and trials.
    pub max_llr_error: f64,
}

impl EquivalenceReport {
    fn merge(self, other: Self) -> Self {
        EquivalenceReport {
            trials: self.trials + other.trials,
            hard_mismatches: self.hard_mismatches + other.hard_mismatches,
            max_llr_error: self.max_llr_error.max(other.max_llr_error),
        }
    }
}

/// Compares MP-MHT (cyclic orderings) with the ML oracle on `trials`
/// seeded 2×2 trials at one SNR.
pub fn two_by_two_equivalence(
    modulation: Modulation,
    snr_db: f64,
    trials: u64,
    seed: u64,
) -> Result<EquivalenceReport> {
    let cfg = SweepConfig::new(2, 2, modulation, vec![snr_db]).with_seed(seed);
    let c = Constellation::new(modulation);
    let sigma2 = snr_to_sigma2(snr_db, 2);

    let one = |trial: u64| -> Result<EquivalenceReport> {
        let mut rng = RngStream::new(seed, trial_stream(0, trial));
        let d = draw_trial(&cfg, &c, sigma2, &mut rng)?;
        let ml = detect_ml(&d.y, &d.h, &c)?;
        let out = detect_mpmht(&d.y, &d.h, &c, OrderingVariant::Cyclic)?;
        let soft = maxlog_llr(&out.list, &c)?;
        let oracle = llr_oracle_ml(&d.y, &d.h, &c, None)?;
        let max_llr_error = soft
            .values
            .iter()
            .zip(&oracle.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        Ok(EquivalenceReport {
            trials: 1,
            hard_mismatches: u64::from(out.hard.symbols != ml.symbols),
            max_llr_error,
        })
    };

    #[cfg(feature = "parallel")]
    let reports: Vec<EquivalenceReport> = {
        use rayon::prelude::*;
        (0..trials).into_par_iter().map(one).collect::<Result<_>>()?
    };
    #[cfg(not(feature = "parallel"))]
    let reports: Vec<EquivalenceReport> = (0..trials).map(one).collect::<Result<_>>()?;

    Ok(reports
        .into_iter()
        .fold(EquivalenceReport::default(), EquivalenceReport::merge))
}
