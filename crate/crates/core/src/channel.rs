//! Rayleigh channels, AWGN and the random streams behind them.
//!
//! Every draw comes from a ChaCha8 stream selected by `(seed, stream id)`.
//! Gaussians use the Box-Muller transform in its complex form,
//! `z = √(−ln u₁)·e^{j2πu₂}`, which gives `E|z|² = 1` with independent real
//! and imaginary parts of variance ½.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linalg::{condition_number, condition_number_upper_bound, ComplexMatrix, ComplexVector};
use crate::{Error, Result};

/// Draw budget for [`draw_channel_conditioned`].
pub const MAX_CONDITIONED_DRAWS: u64 = 10_000_000;

/// A reproducible random stream keyed by `(seed, stream id)`.
#[derive(Clone)]
pub struct RngStream {
    seed: u64,
    stream: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        RngStream { seed, stream, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform on `[0, 1)` with 53 bits of resolution.
    pub fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// One draw from `CN(0, 1)`.
    pub fn complex_gaussian(&mut self) -> Complex64 {
        // 1 − u lies in (0, 1], keeping the logarithm finite.
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        let r = (-u1.ln()).sqrt();
        let (s, c) = (TAU * u2).sin_cos();
        Complex64::new(r * c, r * s)
    }

    /// `n` fair bits in `{0, 1}`.
    pub fn bits(&mut self, n: usize) -> Vec<u8> {
        let mut out = Vec::with_capacity(n);
        while out.len() < n {
            let word = self.rng.next_u64();
            let take = (n - out.len()).min(64);
            out.extend((0..take).map(|i| ((word >> i) & 1) as u8));
        }
        out
    }
}

impl std::fmt::Debug for RngStream {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RngStream")
            .field("seed", &self.seed)
            .field("stream", &self.stream)
            .finish_non_exhaustive()
    }
}

#[derive(Debug, Clone)]
pub struct ChannelRealization {
    pub h: ComplexMatrix,
    /// 2-norm condition number of `h`.
    pub cond: f64,
}

/// i.i.d. `CN(0, 1)` channel of shape `n_r × n_t`.
pub fn draw_channel(rng: &mut RngStream, n_r: usize, n_t: usize) -> Result<ChannelRealization> {
    if n_t == 0 || n_r < n_t {
        return Err(Error::contract(format!(
            "channel needs n_r >= n_t >= 1, got {n_r}x{n_t}"
        )));
    }
    let data = (0..n_r * n_t).map(|_| rng.complex_gaussian()).collect();
    let h = ComplexMatrix::from_row_major(n_r, n_t, data)?;
    let cond = condition_number(&h);
    Ok(ChannelRealization { h, cond })
}

/// Rejection-samples [`draw_channel`] until the condition number exceeds
/// `min_cond`. `min_cond <= 1` accepts the first draw.
pub fn draw_channel_conditioned(
    rng: &mut RngStream,
    n_r: usize,
    n_t: usize,
    min_cond: f64,
) -> Result<ChannelRealization> {
    if !(min_cond >= 1.0) {
        return Err(Error::contract(format!("min_cond must be >= 1, got {min_cond}")));
    }
    if min_cond <= 1.0 {
        return draw_channel(rng, n_r, n_t);
    }
    if n_t == 0 || n_r < n_t {
        return Err(Error::contract(format!(
            "channel needs n_r >= n_t >= 1, got {n_r}x{n_t}"
        )));
    }
    for _ in 0..MAX_CONDITIONED_DRAWS {
        let data = (0..n_r * n_t).map(|_| rng.complex_gaussian()).collect();
        let h = ComplexMatrix::from_row_major(n_r, n_t, data)?;
        // The bound is rigorous, so skipping the SVD never drops an acceptance.
        if condition_number_upper_bound(&h) <= min_cond * (1.0 - 1e-9) {
            continue;
        }
        let cond = condition_number(&h);
        if cond > min_cond {
            return Ok(ChannelRealization { h, cond });
        }
    }
    Err(Error::GenerationExhausted {
        min_cond,
        attempts: MAX_CONDITIONED_DRAWS,
    })
}

/// `signal + n` with `n ~ CN(0, sigma2·I)`.
pub fn add_noise(signal: &ComplexVector, sigma2: f64, rng: &mut RngStream) -> Result<ComplexVector> {
    if !(sigma2 >= 0.0) || !sigma2.is_finite() {
        return Err(Error::contract(format!("noise variance must be >= 0, got {sigma2}")));
    }
    let sd = sigma2.sqrt();
    let out = signal
        .as_slice()
        .iter()
        .map(|&s| s + rng.complex_gaussian() * sd)
        .collect();
    Ok(ComplexVector::from_vec_unchecked(out))
}

/// Noise variance for an SNR defined as received signal power per receive
/// antenna (`n_t` for unit-energy symbols and unit-variance channel taps)
/// over noise power per receive antenna.
pub fn snr_to_sigma2(snr_db: f64, n_t: usize) -> f64 {
    n_t as f64 / 10f64.powf(snr_db / 10.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{apply_unitary_adjoint, qr_decompose, Permutation};

    #[test]
    fn channel_entry_moments() {
        let mut rng = RngStream::new(7, 0);
        let n = 100_000;
        let (mut pow, mut re, mut im) = (0.0, 0.0, 0.0);
        for _ in 0..n {
            let z = rng.complex_gaussian();
            pow += z.norm_sqr();
            re += z.re;
            im += z.im;
        }
        let n = n as f64;
        assert!((pow / n - 1.0).abs() < 0.02);
        assert!((re / n).abs() < 0.02 && (im / n).abs() < 0.02);
    }

    #[test]
    fn channel_draws_are_reproducible() {
        let a = draw_channel(&mut RngStream::new(42, 3), 4, 4).unwrap();
        let b = draw_channel(&mut RngStream::new(42, 3), 4, 4).unwrap();
        assert_eq!(a.h, b.h);
        assert_eq!(a.cond.to_bits(), b.cond.to_bits());
        let c = draw_channel(&mut RngStream::new(42, 4), 4, 4).unwrap();
        assert_ne!(a.h, c.h);
        assert!(a.cond >= 1.0);
    }

    #[test]
    fn channel_shape_checked() {
        assert!(draw_channel(&mut RngStream::new(1, 0), 2, 3).is_err());
        assert!(draw_channel(&mut RngStream::new(1, 0), 2, 0).is_err());
    }

    #[test]
    fn conditioned_draws() {
        let mut a = RngStream::new(5, 0);
        let mut b = RngStream::new(5, 0);
        let first = draw_channel_conditioned(&mut a, 3, 3, 1.0).unwrap();
        assert_eq!(first.h, draw_channel(&mut b, 3, 3).unwrap().h);

        let mut rng = RngStream::new(9, 1);
        let mut draws = 0u64;
        let accepted = 50;
        for _ in 0..accepted {
            let ch = draw_channel_conditioned(&mut rng, 4, 4, 500.0).unwrap();
            assert!(ch.cond > 500.0);
        }
        // Acceptance rate from an independent count over plain draws.
        let mut rng = RngStream::new(9, 2);
        let mut hits = 0;
        while hits < accepted {
            draws += 1;
            if draw_channel(&mut rng, 4, 4).unwrap().cond > 500.0 {
                hits += 1;
            }
        }
        let rate = hits as f64 / draws as f64;
        eprintln!("4x4 acceptance rate for cond > 500: {rate:.4} ({hits}/{draws})");
        assert!(rate > 0.0 && rate < 0.5);
        assert!(draw_channel_conditioned(&mut rng, 2, 2, 0.5).is_err());
    }

    #[test]
    fn noise_statistics() {
        let zero = ComplexVector::new(vec![Complex64::new(0.0, 0.0); 2]).unwrap();
        let sig = ComplexVector::new(vec![Complex64::new(0.3, -1.2), Complex64::new(2.0, 0.5)]).unwrap();
        let mut rng = RngStream::new(1, 1);
        assert_eq!(add_noise(&sig, 0.0, &mut rng).unwrap(), sig);
        assert!(add_noise(&sig, -1.0, &mut rng).is_err());

        let n = 100_000;
        let (mut v0, mut v1, mut cross) = (0.0, 0.0, Complex64::new(0.0, 0.0));
        for _ in 0..n {
            let w = add_noise(&zero, 2.0, &mut rng).unwrap();
            v0 += w[0].norm_sqr();
            v1 += w[1].norm_sqr();
            cross += w[0] * w[1].conj();
        }
        let n = n as f64;
        assert!((v0 / n - 2.0).abs() < 0.05);
        assert!((v1 / n - 2.0).abs() < 0.05);
        assert!((cross / n).norm() < 0.05);
    }

    #[test]
    fn snr_conversion() {
        assert!((snr_to_sigma2(0.0, 1) - 1.0).abs() < 1e-15);
        assert!((snr_to_sigma2(10.0, 4) - 0.4).abs() < 1e-15);
    }

    #[test]
    fn snr_definition_monte_carlo() {
        let (n_t, n_r) = (4, 4);
        let sigma2 = snr_to_sigma2(10.0, n_t);
        let mut rng = RngStream::new(11, 0);
        let (mut sig, mut noise) = (0.0, 0.0);
        let c = crate::modem::Constellation::build(16).unwrap();
        for _ in 0..100_000 {
            let ch = draw_channel(&mut rng, n_r, n_t).unwrap();
            let x: Vec<Complex64> = (0..n_t)
                .map(|_| c.point((rng.next_u64() % 16) as usize))
                .collect();
            let hx = ComplexVector::new(ch.h.mul_slice(&x)).unwrap();
            sig += hx.norm_sqr();
            let zero = ComplexVector::new(vec![Complex64::new(0.0, 0.0); n_r]).unwrap();
            noise += add_noise(&zero, sigma2, &mut rng).unwrap().norm_sqr();
        }
        let ratio = sig / noise;
        assert!((ratio / 10.0 - 1.0).abs() < 0.03, "{ratio}");
    }

    #[test]
    fn noise_is_white_under_unitary_rotation() {
        let mut rng = RngStream::new(3, 0);
        let ch = draw_channel(&mut rng, 4, 4).unwrap();
        let q = qr_decompose(&ch.h, &Permutation::identity(4)).unwrap().q;
        let zero = ComplexVector::new(vec![Complex64::new(0.0, 0.0); 4]).unwrap();
        let (mut plain, mut rotated) = (0.0, 0.0);
        let n = 100_000;
        for _ in 0..n {
            let w = add_noise(&zero, 1.0, &mut rng).unwrap();
            plain += w.norm_sqr();
            rotated += apply_unitary_adjoint(&q, &w).unwrap().norm_sqr();
        }
        assert!((plain / rotated - 1.0).abs() < 0.01);
    }

    #[test]
    fn bit_stream_is_balanced() {
        let mut rng = RngStream::new(0, 0);
        let bits = rng.bits(100_001);
        assert_eq!(bits.len(), 100_001);
        let ones = bits.iter().filter(|&&b| b == 1).count() as f64;
        assert!((ones / 100_001.0 - 0.5).abs() < 0.01);
    }
}
