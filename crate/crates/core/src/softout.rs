//! Max-log soft output and rank-aware LLR scaling.
//!
//! `LLR_{t,b} = d₁ − d₀`, where `d_v` is the smallest metric over candidates
//! whose bit `b` of layer `t` equals `v`. **Positive values favour bit 0.**
//! Values are raw squared-distance differences unless [`LlrVector::normalized`]
//! divides them by the noise variance.
//!
//! The competitor rank `r_{t,b}` is the 1-based position, in the list sorted
//! by metric (then symbol vector), of the best candidate whose bit disagrees
//! with the list's hard decision. With `N_c` candidates, `α = (r−1)/(N_c−1)`
//! and the scaled LLR is `LLR·g(α)` for `g(α) = 1 − βα` (linear) or
//! `g(α) = exp(−γα)` (exponential).

use std::str::FromStr;

use crate::detect::{enumerate_all, Candidate, CandidateList};
use crate::linalg::{ComplexMatrix, ComplexVector};
use crate::modem::Constellation;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct LlrVector {
    layers: usize,
    bits_per_symbol: usize,
    pub values: Vec<f64>,
    pub competitor_rank: Vec<usize>,
    pub alpha: Vec<f64>,
    pub scaled: Vec<f64>,
}

impl LlrVector {
    fn new(layers: usize, bits_per_symbol: usize) -> Self {
        let n = layers * bits_per_symbol;
        LlrVector {
            layers,
            bits_per_symbol,
            values: vec![0.0; n],
            competitor_rank: vec![0; n],
            alpha: vec![0.0; n],
            scaled: vec![0.0; n],
        }
    }

    pub fn layers(&self) -> usize {
        self.layers
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.bits_per_symbol
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    #[inline]
    pub fn index(&self, layer: usize, bit: usize) -> usize {
        layer * self.bits_per_symbol + bit
    }

    pub fn value(&self, layer: usize, bit: usize) -> f64 {
        self.values[self.index(layer, bit)]
    }

    pub fn rank(&self, layer: usize, bit: usize) -> usize {
        self.competitor_rank[self.index(layer, bit)]
    }

    fn set_alpha(&mut self, n_c: usize) {
        let denom = (n_c.max(2) - 1) as f64;
        for (a, &r) in self.alpha.iter_mut().zip(&self.competitor_rank) {
            *a = (r.saturating_sub(1)) as f64 / denom;
        }
    }

    /// Divides raw and scaled values by `sigma2`, giving true max-log LLRs.
    pub fn normalized(mut self, sigma2: f64) -> Result<Self> {
        if !(sigma2 > 0.0) {
            return Err(Error::contract(format!("cannot normalise by sigma2 = {sigma2}")));
        }
        self.values.iter_mut().for_each(|v| *v /= sigma2);
        self.scaled.iter_mut().for_each(|v| *v /= sigma2);
        Ok(self)
    }

    /// Symmetric saturation of raw and scaled values at `±limit`.
    pub fn clipped(mut self, limit: f64) -> Result<Self> {
        if !(limit > 0.0) {
            return Err(Error::contract(format!("clip limit must be positive, got {limit}")));
        }
        self.values.iter_mut().for_each(|v| *v = v.clamp(-limit, limit));
        self.scaled.iter_mut().for_each(|v| *v = v.clamp(-limit, limit));
        Ok(self)
    }

    /// Hard bit implied by the sign of each raw value.
    pub fn hard_bits(&self) -> Vec<u8> {
        self.values.iter().map(|&v| u8::from(v < 0.0)).collect()
    }
}

/// Max-log LLRs and competitor ranks from a candidate list.
pub fn maxlog_llr(list: &CandidateList, c: &Constellation) -> Result<LlrVector> {
    let sorted = list.sorted();
    let Some(hard) = sorted.first() else {
        return Err(Error::contract("empty candidate list"));
    };
    let layers = hard.symbols.len();
    let bps = c.bits_per_symbol();
    let mut out = LlrVector::new(layers, bps);

    let mut d = vec![[f64::INFINITY; 2]; layers * bps];
    for cand in &list.entries {
        for (t, &s) in cand.symbols.iter().enumerate() {
            for b in 0..bps {
                let slot = &mut d[t * bps + b][c.bit(s, b) as usize];
                if cand.metric < *slot {
                    *slot = cand.metric;
                }
            }
        }
    }

    let mut remaining = layers * bps;
    for (pos, cand) in sorted.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        for t in 0..layers {
            for b in 0..bps {
                let i = t * bps + b;
                if out.competitor_rank[i] == 0 && c.bit(cand.symbols[t], b) != c.bit(hard.symbols[t], b) {
                    out.competitor_rank[i] = pos + 1;
                    remaining -= 1;
                }
            }
        }
    }

    for t in 0..layers {
        for b in 0..bps {
            let i = t * bps + b;
            if out.competitor_rank[i] == 0 || !d[i][0].is_finite() || !d[i][1].is_finite() {
                return Err(Error::MissingCompetitor { layer: t, bit: b });
            }
            out.values[i] = d[i][1] - d[i][0];
        }
    }
    out.scaled.copy_from_slice(&out.values);
    out.set_alpha(list.len());
    Ok(out)
}

/// 1-based sorted position of the closest candidate whose bit `(layer, bit)`
/// differs from the list's hard decision.
pub fn competitor_rank(list: &CandidateList, c: &Constellation, layer: usize, bit: usize) -> Result<usize> {
    let sorted = list.sorted();
    let hard = sorted.first().ok_or_else(|| Error::contract("empty candidate list"))?;
    if layer >= hard.symbols.len() || bit >= c.bits_per_symbol() {
        return Err(Error::contract(format!("no bit ({layer}, {bit})")));
    }
    let hard_bit = c.bit(hard.symbols[layer], bit);
    sorted
        .iter()
        .position(|cand| c.bit(cand.symbols[layer], bit) != hard_bit)
        .map(|p| p + 1)
        .ok_or(Error::MissingCompetitor { layer, bit })
}

/// Exact max-log LLRs by exhaustive enumeration of `X^{N_t}`. Ranks refer to
/// the full sorted enumeration, so `α` uses `N_c = |X|^{N_t}`.
pub fn llr_oracle_ml(
    y: &ComplexVector,
    h: &ComplexMatrix,
    c: &Constellation,
    sigma2: Option<f64>,
) -> Result<LlrVector> {
    let layers = h.cols();
    let bps = c.bits_per_symbol();
    let nb = layers * bps;
    let mut d = vec![[f64::INFINITY; 2]; nb];
    // Best candidate per (t, b, bit value), ties to the earlier (smaller) vector.
    let mut arg: Vec<[Option<Candidate>; 2]> = vec![[None, None]; nb];
    let mut total = 0usize;

    enumerate_all(y, h, c, |symbols, metric| {
        total += 1;
        for (t, &s) in symbols.iter().enumerate() {
            for b in 0..bps {
                let i = t * bps + b;
                let v = c.bit(s, b) as usize;
                if metric < d[i][v] {
                    d[i][v] = metric;
                    arg[i][v] = Some(Candidate {
                        symbols: symbols.to_vec(),
                        metric,
                    });
                }
            }
        }
    })?;

    // The ML vector is the better of the two minimisers of any bit.
    let ml = {
        let [a, b] = &arg[0];
        let (a, b) = (a.as_ref().unwrap(), b.as_ref().unwrap());
        if a.rank_cmp(b).is_le() { a.clone() } else { b.clone() }
    };
    let competitors: Vec<Candidate> = (0..nb)
        .map(|i| {
            let t = i / bps;
            let hard_bit = c.bit(ml.symbols[t], i % bps) as usize;
            arg[i][1 - hard_bit].clone().unwrap()
        })
        .collect();

    let mut ahead = vec![0usize; nb];
    enumerate_all(y, h, c, |symbols, metric| {
        for (count, comp) in ahead.iter_mut().zip(&competitors) {
            let before = metric
                .total_cmp(&comp.metric)
                .then_with(|| symbols.cmp(&comp.symbols[..]));
            if before.is_lt() {
                *count += 1;
            }
        }
    })?;

    let mut out = LlrVector::new(layers, bps);
    for i in 0..nb {
        out.values[i] = d[i][1] - d[i][0];
        out.competitor_rank[i] = ahead[i] + 1;
    }
    out.scaled.copy_from_slice(&out.values);
    out.set_alpha(total);
    match sigma2 {
        Some(s) => out.normalized(s),
        None => Ok(out),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScalingScheme {
    None,
    /// `g(α) = 1 − βα`, `β ∈ [0, 1]`.
    Linear { beta: f64 },
    /// `g(α) = exp(−γα)`, `γ > 0`.
    Exponential { gamma: f64 },
}

impl ScalingScheme {
    pub fn linear(beta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&beta) {
            return Err(Error::contract(format!("beta must lie in [0, 1], got {beta}")));
        }
        Ok(ScalingScheme::Linear { beta })
    }

    pub fn exponential(gamma: f64) -> Result<Self> {
        if !(gamma > 0.0) || !gamma.is_finite() {
            return Err(Error::contract(format!("gamma must be positive, got {gamma}")));
        }
        Ok(ScalingScheme::Exponential { gamma })
    }

    pub fn gain(&self, alpha: f64) -> f64 {
        match *self {
            ScalingScheme::None => 1.0,
            ScalingScheme::Linear { beta } => 1.0 - beta * alpha,
            ScalingScheme::Exponential { gamma } => (-gamma * alpha).exp(),
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            ScalingScheme::None => "none",
            ScalingScheme::Linear { .. } => "linear",
            ScalingScheme::Exponential { .. } => "exp",
        }
    }
}

/// Scheme kinds as written in configuration files.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScalingKind {
    None,
    Linear,
    Exponential,
}

impl FromStr for ScalingKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "none" => Ok(ScalingKind::None),
            "linear" => Ok(ScalingKind::Linear),
            "exp" => Ok(ScalingKind::Exponential),
            _ => Err(format!("unknown llr_scale `{s}` (expected none, linear or exp)")),
        }
    }
}

/// Recomputes `α` for a list of `n_c` candidates and applies `scheme`.
pub fn scale_llrs(llrs: &LlrVector, n_c: usize, scheme: ScalingScheme) -> Result<LlrVector> {
    if n_c < 2 {
        return Err(Error::contract(format!("alpha needs n_c >= 2, got {n_c}")));
    }
    let mut out = llrs.clone();
    for i in 0..out.len() {
        let r = out.competitor_rank[i];
        if r == 0 || r > n_c {
            return Err(Error::contract(format!("rank {r} outside 1..={n_c}")));
        }
        let alpha = (r - 1) as f64 / (n_c - 1) as f64;
        out.alpha[i] = alpha;
        out.scaled[i] = out.values[i] * scheme.gain(alpha);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{add_noise, draw_channel, snr_to_sigma2, RngStream};
    use crate::detect::{detect_ml, detect_mpmht, OrderingVariant};
    use crate::linalg::residual_norm_sqr;
    use num_complex::Complex64;

    fn cand(symbols: Vec<usize>, metric: f64) -> Candidate {
        Candidate { symbols, metric }
    }

    fn noisy(seed: u64, n: usize, c: &Constellation, snr: f64) -> (ComplexMatrix, ComplexVector) {
        let mut rng = RngStream::new(seed, 1);
        let h = draw_channel(&mut rng, n, n).unwrap().h;
        let x: Vec<Complex64> = (0..n).map(|_| c.point((rng.next_u64() % c.order() as u64) as usize)).collect();
        let clean = ComplexVector::new(h.mul_slice(&x)).unwrap();
        let y = add_noise(&clean, snr_to_sigma2(snr, n), &mut rng).unwrap();
        (h, y)
    }

    #[test]
    fn two_candidate_llr() {
        let c = Constellation::build(4).unwrap();
        // Symbols 0 (bits 00) and 3 (bits 11) disagree in both bits.
        let list = CandidateList::from_entries(vec![cand(vec![0], 1.0), cand(vec![3], 3.5)]);
        let llr = maxlog_llr(&list, &c).unwrap();
        assert_eq!(llr.values, vec![2.5, 2.5]);
        assert_eq!(llr.competitor_rank, vec![2, 2]);
        // 0 (00) and 1 (01) share bit 0.
        let one_sided = CandidateList::from_entries(vec![cand(vec![0], 1.0), cand(vec![1], 3.5)]);
        assert!(matches!(
            maxlog_llr(&one_sided, &c),
            Err(Error::MissingCompetitor { layer: 0, bit: 0 })
        ));
    }

    #[test]
    fn ranks_and_missing_competitor() {
        let c = Constellation::build(4).unwrap();
        let list = CandidateList::from_entries(vec![
            cand(vec![3], 4.0),
            cand(vec![0], 0.5),
            cand(vec![1], 2.0),
            cand(vec![2], 1.0),
        ]);
        // Sorted: 0 (00), 2 (10), 1 (01), 3 (11).
        assert_eq!(competitor_rank(&list, &c, 0, 0).unwrap(), 2);
        assert_eq!(competitor_rank(&list, &c, 0, 1).unwrap(), 3);
        let llr = maxlog_llr(&list, &c).unwrap();
        assert_eq!(llr.competitor_rank, vec![2, 3]);
        assert!(llr.competitor_rank.iter().all(|&r| r != 1));
        let lonely = CandidateList::from_entries(vec![cand(vec![0], 0.5)]);
        assert!(matches!(
            competitor_rank(&lonely, &c, 0, 1),
            Err(Error::MissingCompetitor { .. })
        ));
    }

    #[test]
    fn oracle_single_layer_noise_free() {
        let c = Constellation::build(4).unwrap();
        let h = ComplexMatrix::identity(1);
        let y = ComplexVector::new(vec![c.point(0)]).unwrap();
        let llr = llr_oracle_ml(&y, &h, &c, None).unwrap();
        let gap = (c.point(0) - c.point(2)).norm_sqr();
        assert!((llr.value(0, 0) - gap).abs() < 1e-12);
        assert!((llr.value(0, 1) - gap).abs() < 1e-12);
        // Sorted: 0 (d=0), 1 and 2 tied at the gap (lexicographic), 3.
        assert_eq!(llr.rank(0, 0), 3);
        assert_eq!(llr.rank(0, 1), 2);
    }

    #[test]
    fn oracle_signs_match_ml_bits() {
        let c = Constellation::build(16).unwrap();
        for seed in 0..20 {
            let (h, y) = noisy(seed, 2, &c, 6.0);
            let ml = detect_ml(&y, &h, &c).unwrap();
            let llr = llr_oracle_ml(&y, &h, &c, None).unwrap();
            let bits: Vec<u8> = ml.symbols.iter().flat_map(|&s| c.demap(s)).collect();
            assert_eq!(llr.hard_bits(), bits);
        }
    }

    #[test]
    fn oracle_matches_nested_enumeration() {
        let c = Constellation::build(16).unwrap();
        let (h, y) = noisy(42, 2, &c, 8.0);
        let llr = llr_oracle_ml(&y, &h, &c, None).unwrap();
        let mut all = Vec::new();
        for a in 0..16 {
            for b in 0..16 {
                let x = [c.point(a), c.point(b)];
                all.push(cand(vec![a, b], residual_norm_sqr(y.as_slice(), &h, &x)));
            }
        }
        all.sort_by(|p, q| p.rank_cmp(q));
        for t in 0..2 {
            for b in 0..4 {
                let min_with = |v: u8| {
                    all.iter()
                        .filter(|x| c.bit(x.symbols[t], b) == v)
                        .map(|x| x.metric)
                        .fold(f64::INFINITY, f64::min)
                };
                let want = min_with(1) - min_with(0);
                assert!((llr.value(t, b) - want).abs() < 1e-12);
                let hard = c.bit(all[0].symbols[t], b);
                let rank = all.iter().position(|x| c.bit(x.symbols[t], b) != hard).unwrap() + 1;
                assert_eq!(llr.rank(t, b), rank);
            }
        }
        // The same full list through the list-based path gives the same LLRs.
        let from_list = maxlog_llr(&CandidateList::from_entries(all), &c).unwrap();
        assert_eq!(from_list.competitor_rank, llr.competitor_rank);
        for (a, b) in from_list.values.iter().zip(&llr.values) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn mpmht_soft_properties() {
        let c = Constellation::build(16).unwrap();
        for seed in 0..20 {
            let (h, y) = noisy(seed, 3, &c, 12.0);
            let out = detect_mpmht(&y, &h, &c, OrderingVariant::Cyclic).unwrap();
            let llr = maxlog_llr(&out.list, &c).unwrap();
            let hard_bits: Vec<u8> = out.hard.symbols.iter().flat_map(|&s| c.demap(s)).collect();
            assert_eq!(llr.hard_bits(), hard_bits);

            let oracle = llr_oracle_ml(&y, &h, &c, None).unwrap();
            let ml_bits = oracle.hard_bits();
            for i in 0..llr.len() {
                if hard_bits[i] == ml_bits[i] {
                    assert!(llr.values[i].abs() >= oracle.values[i].abs() - 1e-9);
                }
            }
        }
    }

    #[test]
    fn scaling_examples() {
        let mut base = LlrVector::new(1, 2);
        base.values = vec![2.0, -3.0];
        base.competitor_rank = vec![1, 10];
        let lin = scale_llrs(&base, 10, ScalingScheme::linear(0.5).unwrap()).unwrap();
        assert_eq!(lin.alpha, vec![0.0, 1.0]);
        assert_eq!(lin.scaled, vec![2.0, -1.5]);
        let exp = scale_llrs(&base, 10, ScalingScheme::exponential(1.0).unwrap()).unwrap();
        assert_eq!(exp.scaled[0], 2.0);
        assert!((exp.scaled[1] - (-3.0 * (-1f64).exp())).abs() < 1e-12);
        let none = scale_llrs(&base, 10, ScalingScheme::None).unwrap();
        assert_eq!(none.scaled, base.values);
        assert!(scale_llrs(&base, 1, ScalingScheme::None).is_err());
        assert!(scale_llrs(&base, 5, ScalingScheme::None).is_err());
        assert!(ScalingScheme::linear(1.5).is_err());
        assert!(ScalingScheme::exponential(0.0).is_err());
    }

    #[test]
    fn normalise_and_clip() {
        let mut v = LlrVector::new(1, 2);
        v.values = vec![4.0, -10.0];
        v.scaled = v.values.clone();
        let n = v.clone().normalized(2.0).unwrap();
        assert_eq!(n.values, vec![2.0, -5.0]);
        let c = v.clipped(5.0).unwrap();
        assert_eq!(c.values, vec![4.0, -5.0]);
        assert_eq!(c.scaled, vec![4.0, -5.0]);
    }
}
