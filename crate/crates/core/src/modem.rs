//! Square QAM with per-axis binary-reflected Gray labels.
//!
//! A symbol index *is* its bit label read as an integer, most significant bit
//! first: the high `k` bits are the in-phase label, the low `k` bits the
//! quadrature label. On each axis label bit value 0 in the most significant
//! position selects the right (or top) half of the plane, so QPSK bits `00`
//! map to `(+1+j)/√2`. All constellations have unit average energy.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Modulation {
    Qpsk,
    Qam16,
    Qam64,
    Qam256,
}

impl Modulation {
    pub const ALL: [Modulation; 4] = [
        Modulation::Qpsk,
        Modulation::Qam16,
        Modulation::Qam64,
        Modulation::Qam256,
    ];

    pub fn order(self) -> usize {
        match self {
            Modulation::Qpsk => 4,
            Modulation::Qam16 => 16,
            Modulation::Qam64 => 64,
            Modulation::Qam256 => 256,
        }
    }

    pub fn from_order(order: usize) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.order() == order)
            .ok_or_else(|| Error::contract(format!("unsupported constellation order {order}")))
    }

    pub fn name(self) -> &'static str {
        match self {
            Modulation::Qpsk => "qpsk",
            Modulation::Qam16 => "qam16",
            Modulation::Qam64 => "qam64",
            Modulation::Qam256 => "qam256",
        }
    }
}

impl fmt::Display for Modulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Modulation {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Self::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| format!("unknown modulation `{s}` (expected qpsk, qam16, qam64 or qam256)"))
    }
}

#[derive(Debug, Clone)]
pub struct Constellation {
    modulation: Modulation,
    bits_per_symbol: usize,
    bits_per_axis: usize,
    levels: usize,
    /// `1/√(2(L²−1)/3)`, the unit-energy amplitude step.
    scale: f64,
    points: Vec<Complex64>,
    /// Axis Gray code of the `j`-th level counted from the most negative.
    code_of_level: Vec<usize>,
}

impl Constellation {
    pub fn new(modulation: Modulation) -> Self {
        let order = modulation.order();
        let bits_per_symbol = order.trailing_zeros() as usize;
        let bits_per_axis = bits_per_symbol / 2;
        let levels = 1usize << bits_per_axis;
        let scale = 1.0 / (2.0 * ((levels * levels - 1) as f64) / 3.0).sqrt();

        // Level position counted from the most positive amplitude carries the
        // Gray code of that position.
        let amplitude_of_code = |code: usize| -> f64 {
            let pos = gray_decode(code);
            (levels as f64 - 1.0 - 2.0 * pos as f64) * scale
        };
        let code_of_level = (0..levels)
            .map(|j| gray_encode(levels - 1 - j))
            .collect();
        let points = (0..order)
            .map(|idx| {
                let i_code = idx >> bits_per_axis;
                let q_code = idx & (levels - 1);
                Complex64::new(amplitude_of_code(i_code), amplitude_of_code(q_code))
            })
            .collect();

        Constellation {
            modulation,
            bits_per_symbol,
            bits_per_axis,
            levels,
            scale,
            points,
            code_of_level,
        }
    }

    /// Constellation of the given order (4, 16, 64 or 256).
    pub fn build(order: usize) -> Result<Self> {
        Ok(Self::new(Modulation::from_order(order)?))
    }

    pub fn modulation(&self) -> Modulation {
        self.modulation
    }

    pub fn order(&self) -> usize {
        self.points.len()
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.bits_per_symbol
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    #[inline]
    pub fn point(&self, index: usize) -> Complex64 {
        self.points[index]
    }

    /// Bit `b` (0 = most significant) of the label of `index`.
    #[inline]
    pub fn bit(&self, index: usize, b: usize) -> u8 {
        ((index >> (self.bits_per_symbol - 1 - b)) & 1) as u8
    }

    pub fn map_bits(&self, bits: &[u8]) -> Result<usize> {
        if bits.len() != self.bits_per_symbol {
            return Err(Error::contract(format!(
                "{} bits supplied for a {}-bit symbol",
                bits.len(),
                self.bits_per_symbol
            )));
        }
        Ok(bits.iter().fold(0, |acc, &b| (acc << 1) | (b & 1) as usize))
    }

    pub fn demap(&self, index: usize) -> Vec<u8> {
        assert!(index < self.order(), "symbol index {index} out of range");
        (0..self.bits_per_symbol).map(|b| self.bit(index, b)).collect()
    }

    /// Nearest constellation point by per-axis rounding. Exact ties go to the
    /// lowest symbol index.
    #[inline]
    pub fn slice(&self, z: Complex64) -> usize {
        let i_code = self.slice_axis(z.re);
        let q_code = self.slice_axis(z.im);
        (i_code << self.bits_per_axis) | q_code
    }

    fn slice_axis(&self, x: f64) -> usize {
        // Amplitude of level j is (2j − (L−1))·scale.
        let top = self.levels - 1;
        let t = (x / self.scale + top as f64) * 0.5;
        if !(t > 0.0) {
            return self.code_of_level[0];
        }
        if t >= top as f64 {
            return self.code_of_level[top];
        }
        let lo = t.floor();
        let j = lo as usize;
        let frac = t - lo;
        if frac > 0.5 {
            self.code_of_level[j + 1]
        } else if frac < 0.5 {
            self.code_of_level[j]
        } else {
            self.code_of_level[j].min(self.code_of_level[j + 1])
        }
    }
}

fn gray_encode(n: usize) -> usize {
    n ^ (n >> 1)
}

fn gray_decode(mut g: usize) -> usize {
    let mut n = g;
    while g > 1 {
        g >>= 1;
        n ^= g;
    }
    n
}
