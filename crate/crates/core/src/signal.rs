//! OFDM symbol construction and the PAPR functional.
//!
//! Conventions used throughout the crate:
//!
//! * The synthesis transform is the unitary `L`-point inverse DFT
//!   (`L = oversampling * n_subcarriers`) restricted to its first `N` columns,
//!   so subcarrier `k` sits on bin `k` and `||synthesize(s)||_2 = ||s||_2`.
//! * Constellations have unit average energy.
//!
//! Gray labelings (bit order is transmission order):
//!
//! | scheme | bits        | point                         |
//! |--------|-------------|-------------------------------|
//! | QPSK   | `b0 b1`     | `((1-2 b0) + j (1-2 b1)) / sqrt(2)` |
//! | 16QAM  | `b0 b1 b2 b3` | `(I(b0 b1) + j Q(b2 b3)) / sqrt(10)` |
//!
//! with the per-axis 16QAM Gray map `00 -> -3`, `01 -> -1`, `11 -> +1`,
//! `10 -> +3`.

use std::ops::{Deref, DerefMut};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dft::{dft_in_place, Direction};
use crate::error::{check_len, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Qpsk,
    Qam16,
}

impl Scheme {
    pub const ALL: [Scheme; 2] = [Scheme::Qpsk, Scheme::Qam16];

    pub fn bits_per_symbol(self) -> usize {
        match self {
            Scheme::Qpsk => 2,
            Scheme::Qam16 => 4,
        }
    }

    /// Display label used in CSV output.
    pub fn label(self) -> &'static str {
        match self {
            Scheme::Qpsk => "QPSK",
            Scheme::Qam16 => "16QAM",
        }
    }

    /// Maps one symbol's worth of bits (`bits_per_symbol` entries) to a point.
    fn map_one(self, bits: &[u8]) -> Complex64 {
        match self {
            Scheme::Qpsk => {
                let level = |b: u8| 1.0 - 2.0 * f64::from(b);
                Complex64::new(level(bits[0]), level(bits[1])) * std::f64::consts::FRAC_1_SQRT_2
            }
            Scheme::Qam16 => {
                let scale = 1.0 / 10f64.sqrt();
                Complex64::new(gray4_level(bits[0], bits[1]), gray4_level(bits[2], bits[3])) * scale
            }
        }
    }

    fn demap_one(self, point: Complex64, out: &mut Vec<u8>) {
        match self {
            Scheme::Qpsk => {
                out.push(u8::from(point.re < 0.0));
                out.push(u8::from(point.im < 0.0));
            }
            Scheme::Qam16 => {
                let scale = 10f64.sqrt();
                out.extend_from_slice(&gray4_decide(point.re * scale));
                out.extend_from_slice(&gray4_decide(point.im * scale));
            }
        }
    }

    /// All constellation points in label order.
    pub fn constellation(self) -> Vec<Complex64> {
        let k = self.bits_per_symbol();
        (0..1u32 << k)
            .map(|label| {
                let bits: Vec<u8> = (0..k).rev().map(|i| ((label >> i) & 1) as u8).collect();
                self.map_one(&bits)
            })
            .collect()
    }
}

fn gray4_level(hi: u8, lo: u8) -> f64 {
    match (hi, lo) {
        (0, 0) => -3.0,
        (0, _) => -1.0,
        (_, 1) => 1.0,
        _ => 3.0,
    }
}

fn gray4_decide(v: f64) -> [u8; 2] {
    if v < -2.0 {
        [0, 0]
    } else if v < 0.0 {
        [0, 1]
    } else if v < 2.0 {
        [1, 1]
    } else {
        [1, 0]
    }
}

/// Scaling of the synthesis transform. Only the unitary convention exists.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IdftScale {
    #[default]
    Unitary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OfdmConfig {
    pub n_subcarriers: usize,
    pub oversampling: usize,
    pub scheme: Scheme,
    pub idft_scale: IdftScale,
}

impl Default for OfdmConfig {
    fn default() -> Self {
        Self {
            n_subcarriers: 512,
            oversampling: 4,
            scheme: Scheme::Qpsk,
            idft_scale: IdftScale::Unitary,
        }
    }
}

impl OfdmConfig {
    pub fn new(n_subcarriers: usize, oversampling: usize, scheme: Scheme) -> Result<Self> {
        let cfg = Self {
            n_subcarriers,
            oversampling,
            scheme,
            idft_scale: IdftScale::Unitary,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_subcarriers < 2 {
            return Err(Error::InvalidParameter {
                name: "n_subcarriers",
                reason: format!("must be at least 2, got {}", self.n_subcarriers),
            });
        }
        if self.oversampling < 1 {
            return Err(Error::InvalidParameter {
                name: "oversampling",
                reason: "must be at least 1".into(),
            });
        }
        Ok(())
    }

    /// Time-domain length `oversampling * n_subcarriers`.
    pub fn time_len(&self) -> usize {
        self.n_subcarriers * self.oversampling
    }

    /// Number of bits carried by one OFDM symbol.
    pub fn bits_per_ofdm_symbol(&self) -> usize {
        self.n_subcarriers * self.scheme.bits_per_symbol()
    }

    pub fn with_scheme(mut self, scheme: Scheme) -> Self {
        self.scheme = scheme;
        self
    }
}

/// Frequency-domain OFDM symbol, one constellation point per subcarrier.
#[derive(Debug, Clone, PartialEq)]
pub struct FreqSymbol(Vec<Complex64>);

impl FreqSymbol {
    pub fn new(values: Vec<Complex64>) -> Self {
        Self(values)
    }

    pub fn into_inner(self) -> Vec<Complex64> {
        self.0
    }
}

impl Deref for FreqSymbol {
    type Target = [Complex64];

    fn deref(&self) -> &[Complex64] {
        &self.0
    }
}

/// Oversampled time-domain sequence. Indexing and in-place edits go through
/// the slice, so the length never changes after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSignal(Vec<Complex64>);

impl TimeSignal {
    pub fn new(values: Vec<Complex64>) -> Self {
        Self(values)
    }

    pub fn zeros(len: usize) -> Self {
        Self(vec![Complex64::new(0.0, 0.0); len])
    }

    pub fn into_inner(self) -> Vec<Complex64> {
        self.0
    }

    pub fn norm_sqr(&self) -> f64 {
        norm_sqr(&self.0)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// `max_i |x_i|`
    pub fn peak(&self) -> f64 {
        self.0
            .iter()
            .map(|v| v.norm_sqr())
            .fold(0.0, f64::max)
            .sqrt()
    }

    pub fn mean_power(&self) -> f64 {
        if self.0.is_empty() {
            0.0
        } else {
            self.norm_sqr() / self.0.len() as f64
        }
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        Self(self.0.iter().map(|v| v * c).collect())
    }
}

impl Deref for TimeSignal {
    type Target = [Complex64];

    fn deref(&self) -> &[Complex64] {
        &self.0
    }
}

impl DerefMut for TimeSignal {
    fn deref_mut(&mut self) -> &mut [Complex64] {
        &mut self.0
    }
}

impl From<Vec<Complex64>> for TimeSignal {
    fn from(values: Vec<Complex64>) -> Self {
        Self(values)
    }
}

pub(crate) fn norm_sqr(v: &[Complex64]) -> f64 {
    v.iter().map(Complex64::norm_sqr).sum()
}

/// Gray-maps `bits` (values 0/1) onto the configured constellation.
pub fn map_bits(bits: &[u8], cfg: &OfdmConfig) -> Result<FreqSymbol> {
    check_len("map_bits", cfg.bits_per_ofdm_symbol(), bits.len())?;
    if bits.iter().any(|&b| b > 1) {
        return Err(Error::InvalidParameter {
            name: "bits",
            reason: "bit values must be 0 or 1".into(),
        });
    }
    let k = cfg.scheme.bits_per_symbol();
    Ok(FreqSymbol(
        bits.chunks_exact(k)
            .map(|c| cfg.scheme.map_one(c))
            .collect(),
    ))
}

/// Hard-decision demapping, the inverse of [`map_bits`] on the noiseless grid.
pub fn demap(points: &[Complex64], scheme: Scheme) -> Vec<u8> {
    let mut out = Vec::with_capacity(points.len() * scheme.bits_per_symbol());
    for &p in points {
        scheme.demap_one(p, &mut out);
    }
    out
}

/// `x = F s`, with `F` the first `N` columns of the unitary `L`-point inverse DFT.
pub fn synthesize(s: &FreqSymbol, cfg: &OfdmConfig) -> Result<TimeSignal> {
    check_len("synthesize", cfg.n_subcarriers, s.len())?;
    let mut buf = vec![Complex64::new(0.0, 0.0); cfg.time_len()];
    buf[..s.len()].copy_from_slice(s);
    dft_in_place(&mut buf, Direction::Inverse)?;
    Ok(TimeSignal(buf))
}

/// Peak-to-average power ratio `max|x_i|^2 / mean|x_i|^2` (linear).
pub fn papr(x: &[Complex64]) -> Result<f64> {
    let total = norm_sqr(x);
    if x.is_empty() || total <= 0.0 {
        return Err(Error::Degenerate("PAPR of an all-zero signal"));
    }
    let peak = x.iter().map(Complex64::norm_sqr).fold(0.0, f64::max);
    Ok(peak / (total / x.len() as f64))
}

pub fn papr_db(x: &[Complex64]) -> Result<f64> {
    papr(x).map(to_db)
}

pub fn to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

pub fn from_db(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn qpsk_zero_bits_map_to_first_quadrant() {
        let cfg = OfdmConfig::new(2, 1, Scheme::Qpsk).unwrap();
        let s = map_bits(&[0, 0, 1, 1], &cfg).unwrap();
        assert!((s[0] - c(FRAC_1_SQRT_2, FRAC_1_SQRT_2)).norm() < 1e-15);
        assert!((s[1] - c(-FRAC_1_SQRT_2, -FRAC_1_SQRT_2)).norm() < 1e-15);
    }

    #[test]
    fn qam16_zero_bits_map_to_corner() {
        let cfg = OfdmConfig::new(2, 1, Scheme::Qam16).unwrap();
        let s = map_bits(&[0, 0, 0, 0, 1, 0, 1, 0], &cfg).unwrap();
        let r = 10f64.sqrt();
        assert!((s[0] - c(-3.0 / r, -3.0 / r)).norm() < 1e-15);
        assert!((s[1] - c(3.0 / r, 3.0 / r)).norm() < 1e-15);
    }

    #[test]
    fn constellations_have_unit_energy() {
        for scheme in Scheme::ALL {
            let pts = scheme.constellation();
            assert_eq!(pts.len(), 1 << scheme.bits_per_symbol());
            let e: f64 = pts.iter().map(|p| p.norm_sqr()).sum::<f64>() / pts.len() as f64;
            assert!((e - 1.0).abs() < 1e-14, "{scheme:?}: {e}");
        }
    }

    #[test]
    fn gray_neighbours_differ_in_one_bit() {
        // Horizontally or vertically adjacent 16QAM points share all but one bit.
        let scheme = Scheme::Qam16;
        let pts = scheme.constellation();
        let step = 2.0 / 10f64.sqrt();
        for (a, pa) in pts.iter().enumerate() {
            for (b, pb) in pts.iter().enumerate() {
                if ((pa - pb).norm() - step).abs() < 1e-9 {
                    assert_eq!((a ^ b).count_ones(), 1, "{a:04b} {b:04b}");
                }
            }
        }
    }

    #[test]
    fn map_bits_rejects_wrong_length() {
        let cfg = OfdmConfig::new(4, 2, Scheme::Qpsk).unwrap();
        assert!(matches!(map_bits(&[0; 7], &cfg), Err(Error::Shape { .. })));
    }

    #[test]
    fn config_validation() {
        assert!(OfdmConfig::new(1, 4, Scheme::Qpsk).is_err());
        assert!(OfdmConfig::new(4, 0, Scheme::Qpsk).is_err());
        assert_eq!(
            OfdmConfig::new(512, 4, Scheme::Qpsk).unwrap().time_len(),
            2048
        );
    }

    #[test]
    fn dc_subcarrier_gives_constant_sequence() {
        let cfg = OfdmConfig::new(4, 2, Scheme::Qpsk).unwrap();
        let mut s = vec![c(0.0, 0.0); 4];
        s[0] = c(1.0, 0.0);
        let x = synthesize(&FreqSymbol::new(s), &cfg).unwrap();
        for v in x.iter() {
            assert!((v.norm() - 1.0 / 8f64.sqrt()).abs() < 1e-15);
        }
    }

    #[test]
    fn synthesis_matches_explicit_matrix_product() {
        let cfg = OfdmConfig::new(4, 2, Scheme::Qpsk).unwrap();
        let s = FreqSymbol::new(vec![c(0.3, -1.1), c(-0.7, 0.2), c(1.5, 0.4), c(-0.2, -0.9)]);
        let x = synthesize(&s, &cfg).unwrap();
        let len = 8;
        for n in 0..len {
            let mut acc = c(0.0, 0.0);
            for (k, sk) in s.iter().enumerate() {
                let f = Complex64::from_polar(
                    1.0 / (len as f64).sqrt(),
                    2.0 * PI * (k * n) as f64 / len as f64,
                );
                acc += f * sk;
            }
            assert!((acc - x[n]).norm() < 1e-14);
        }
    }

    #[test]
    fn papr_examples() {
        assert_eq!(papr(&[c(1.0, 0.0); 4]).unwrap(), 1.0);
        let spike = [c(2.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)];
        assert_eq!(papr(&spike).unwrap(), 4.0);
        assert!((papr_db(&spike).unwrap() - 6.020599913279624).abs() < 1e-12);
        assert_eq!(
            papr(&[c(0.0, 0.0); 3]),
            Err(Error::Degenerate("PAPR of an all-zero signal"))
        );
    }

    #[test]
    fn papr_of_synthesized_all_ones_symbol() {
        let cfg = OfdmConfig::new(4, 2, Scheme::Qpsk).unwrap();
        let s = FreqSymbol::new(vec![c(1.0, 1.0) * FRAC_1_SQRT_2; 4]);
        let x = synthesize(&s, &cfg).unwrap();
        // Direct evaluation on the explicitly computed samples.
        let samples: Vec<Complex64> = (0..8)
            .map(|n| {
                (0..4).fold(c(0.0, 0.0), |acc, k| {
                    acc + s[k]
                        * Complex64::from_polar(1.0 / 8f64.sqrt(), 2.0 * PI * (k * n) as f64 / 8.0)
                })
            })
            .collect();
        let peak = samples.iter().map(|v| v.norm_sqr()).fold(0.0, f64::max);
        let mean = samples.iter().map(|v| v.norm_sqr()).sum::<f64>() / 8.0;
        // The DC sample carries all four subcarriers coherently: |x_0|^2 = 16/8 = 2, mean = 4/8.
        assert!((peak / mean - 4.0).abs() < 1e-12);
        assert!((papr(&x).unwrap() - peak / mean).abs() < 1e-12);
    }

    fn bits_strategy(scheme: Scheme, n: usize) -> impl Strategy<Value = Vec<u8>> {
        proptest::collection::vec(0u8..=1, n * scheme.bits_per_symbol())
    }

    proptest! {
        #[test]
        fn parseval_holds(bits in bits_strategy(Scheme::Qam16, 16), ell in 1usize..=4) {
            let ell = 1 << (ell - 1);
            let cfg = OfdmConfig::new(16, ell, Scheme::Qam16).unwrap();
            let s = map_bits(&bits, &cfg).unwrap();
            let x = synthesize(&s, &cfg).unwrap();
            let ns = norm_sqr(&s).sqrt();
            prop_assert!((x.norm() - ns).abs() <= 1e-10 * ns);
        }

        #[test]
        fn papr_is_scale_invariant(bits in bits_strategy(Scheme::Qpsk, 8), mag in 1e-3f64..1e3, phase in 0.0f64..std::f64::consts::TAU) {
            let cfg = OfdmConfig::new(8, 4, Scheme::Qpsk).unwrap();
            let x = synthesize(&map_bits(&bits, &cfg).unwrap(), &cfg).unwrap();
            let y = x.scaled(Complex64::from_polar(mag, phase));
            let (a, b) = (papr(&x).unwrap(), papr(&y).unwrap());
            prop_assert!((a - b).abs() <= 1e-10 * a);
        }

        #[test]
        fn demap_inverts_map(bits in bits_strategy(Scheme::Qam16, 12), qpsk in any::<bool>()) {
            let scheme = if qpsk { Scheme::Qpsk } else { Scheme::Qam16 };
            let bits = &bits[..12 * scheme.bits_per_symbol()];
            let cfg = OfdmConfig::new(12, 1, scheme).unwrap();
            let s = map_bits(bits, &cfg).unwrap();
            prop_assert_eq!(demap(&s, scheme), bits.to_vec());
        }
    }
}
