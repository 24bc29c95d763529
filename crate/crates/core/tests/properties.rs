use proptest::prelude::*;

use mpmht::channel::{add_noise, draw_channel, snr_to_sigma2, RngStream};
use mpmht::detect::{detect_ml, detect_mpmht, detect_zf_qr, OrderingVariant};
use mpmht::linalg::{residual_norm_sqr, ComplexMatrix, ComplexVector};
use mpmht::modem::Constellation;
use mpmht::softout::{maxlog_llr, scale_llrs, ScalingScheme};

fn trial(seed: u64, n_t: usize, n_r: usize, order: usize, snr: f64) -> (ComplexMatrix, ComplexVector, Constellation) {
    let c = Constellation::build(order).unwrap();
    let mut rng = RngStream::new(seed, 0);
    let h = draw_channel(&mut rng, n_r, n_t).unwrap().h;
    let x: Vec<_> = (0..n_t).map(|_| c.point((rng.next_u64() % order as u64) as usize)).collect();
    let clean = h.mul_vec(&ComplexVector::new(x).unwrap()).unwrap();
    let y = add_noise(&clean, snr_to_sigma2(snr, n_t), &mut rng).unwrap();
    (h, y, c)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ml_dominates_every_detector(
        seed in any::<u64>(),
        n_t in 1usize..=4,
        extra in 0usize..=2,
        order in prop::sample::select(vec![4usize, 16]),
        snr in -5.0f64..25.0,
    ) {
        let (h, y, c) = trial(seed, n_t, n_t + extra, order, snr);
        let ml = detect_ml(&y, &h, &c).unwrap();
        let cyc = detect_mpmht(&y, &h, &c, OrderingVariant::Cyclic).unwrap();
        let full = detect_mpmht(&y, &h, &c, OrderingVariant::Full).unwrap();
        let zf = detect_zf_qr(&y, &h, &c).unwrap();
        let tol = 1e-9 * (1.0 + ml.metric);
        prop_assert!(ml.metric <= full.hard.metric + tol);
        prop_assert!(full.hard.metric <= cyc.hard.metric + tol);
        prop_assert!(ml.metric <= zf.metric + tol);
        // Reported metrics are true residuals.
        for cand in cyc.list.entries.iter().step_by(7) {
            let r = residual_norm_sqr(y.as_slice(), &h, &cand.transmit_vector(&c));
            prop_assert!((r - cand.metric).abs() <= 1e-9 * (1.0 + r));
        }
        if n_t <= 2 {
            prop_assert_eq!(&cyc.hard.symbols, &ml.symbols);
        }
    }

    #[test]
    fn llr_signs_follow_hard_decision(
        seed in any::<u64>(),
        n_t in 2usize..=4,
        order in prop::sample::select(vec![4usize, 16, 64]),
        snr in 0.0f64..30.0,
        beta in 0.0f64..=1.0,
        gamma in 0.01f64..5.0,
    ) {
        let (h, y, c) = trial(seed, n_t, n_t, order, snr);
        let out = detect_mpmht(&y, &h, &c, OrderingVariant::Cyclic).unwrap();
        let llr = maxlog_llr(&out.list, &c).unwrap();
        let bits: Vec<u8> = out.hard.symbols.iter().flat_map(|&s| c.demap(s)).collect();
        for (i, &b) in bits.iter().enumerate() {
            if llr.values[i] != 0.0 {
                prop_assert_eq!(u8::from(llr.values[i] < 0.0), b);
            }
            prop_assert!(llr.competitor_rank[i] >= 2 && llr.competitor_rank[i] <= out.list.len());
        }
        for scheme in [ScalingScheme::linear(beta).unwrap(), ScalingScheme::exponential(gamma).unwrap()] {
            let s = scale_llrs(&llr, out.list.len(), scheme).unwrap();
            for i in 0..s.len() {
                prop_assert!(s.scaled[i].abs() <= s.values[i].abs());
                prop_assert!(s.scaled[i] == 0.0 || s.scaled[i].signum() == s.values[i].signum());
                prop_assert!((0.0..=1.0).contains(&s.alpha[i]));
            }
        }
    }
}
