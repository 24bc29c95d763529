//! Multi-pivot multiple-hypothesis trellis (MP-MHT) MIMO detection.
//!
//! After a QR decomposition the triangular system `ỹ = R x̃ + ñ` behaves like
//! a causal spatial ISI channel over the transmit layers. The MP-MHT detector
//! walks that trellis once per *pivot*: the pivot layer is placed in the last
//! column of `H` so it owns the interference-free bottom row of `R`, every
//! constellation point is hypothesised for it, and each remaining layer keeps
//! only its conditionally best symbol. The union of all pivot runs is a
//! candidate list of `N_t·|X|` (cyclic orderings) or `N_t!·|X|` (all
//! permutations) vectors, from which a hard decision and max-log LLRs are
//! taken.
//!
//! Baselines are exhaustive ML and QR decision feedback (ZF-QR). The [`sim`]
//! module runs paired Monte-Carlo BER sweeps over i.i.d. Rayleigh channels.
//!
//! An MLSE-style alternative that keeps the best incoming path into *every*
//! node of every stage needs `|X|²` branch metrics per stage and
//! `N_t·|X|²` overall once combined with multiple pivots; it is not
//! implemented here.

pub mod channel;
pub mod detect;
mod error;
pub mod linalg;
pub mod modem;
pub mod sim;
pub mod softout;

pub use error::{Error, Result};
pub use num_complex::Complex64;
