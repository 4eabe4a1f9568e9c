//! CCDF of PAPR, ensemble power spectral density, out-of-band emission.

use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::dft::{dft_in_place, Direction};
use crate::error::{check_len, Error, Result};
use crate::signal::{norm_sqr, to_db, OfdmConfig, TimeSignal};

/// dB value reported for bins with exactly zero power.
pub const POWER_FLOOR_DB: f64 = -300.0;

#[derive(Debug, Clone, PartialEq)]
pub struct CcdfCurve {
    pub thresholds_db: Vec<f64>,
    /// `Pr(PAPR > threshold)`
    pub probabilities: Vec<f64>,
}

fn sorted(samples: &[f64]) -> Vec<f64> {
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    s
}

/// Fraction of samples strictly above each threshold.
pub fn ccdf(papr_samples_db: &[f64], thresholds_db: &[f64]) -> Result<CcdfCurve> {
    if papr_samples_db.is_empty() {
        return Err(Error::Empty("ccdf samples"));
    }
    let s = sorted(papr_samples_db);
    let n = s.len() as f64;
    let probabilities = thresholds_db
        .iter()
        .map(|&t| (s.len() - s.partition_point(|&v| v <= t)) as f64 / n)
        .collect();
    Ok(CcdfCurve {
        thresholds_db: thresholds_db.to_vec(),
        probabilities,
    })
}

/// Smallest sample value `t` with `Pr(PAPR > t) <= prob`, i.e. where the
/// empirical CCDF first drops to `prob`.
pub fn ccdf_abscissa(papr_samples_db: &[f64], prob: f64) -> Result<f64> {
    if papr_samples_db.is_empty() {
        return Err(Error::Empty("ccdf samples"));
    }
    if !(0.0..=1.0).contains(&prob) {
        return Err(Error::InvalidParameter {
            name: "prob",
            reason: format!("must lie in [0, 1], got {prob}"),
        });
    }
    let s = sorted(papr_samples_db);
    let allowed_above = (prob * s.len() as f64).floor() as usize;
    Ok(s[s.len() - 1 - allowed_above.min(s.len() - 1)])
}

#[derive(Debug, Clone, PartialEq)]
pub struct PsdCurve {
    /// Normalized frequency in cycles/sample, `[-0.5, 0.5)`, DC at the centre.
    pub freq_bins: Vec<f64>,
    /// Power relative to the peak bin.
    pub power_db: Vec<f64>,
}

/// Periodic Hann window `0.5 - 0.5 cos(2 pi i / len)`.
pub fn hann(len: usize) -> Vec<f64> {
    (0..len)
        .map(|i| 0.5 - 0.5 * (TAU * i as f64 / len as f64).cos())
        .collect()
}

/// Running sum of Hann-windowed periodograms over an ensemble of equal-length
/// signals.
///
/// Each bin is `|DFT(w x)|^2 / mean(w^2)`, so the mean over bins equals the
/// window-weighted mean signal power (exactly the mean power for
/// constant-envelope signals).
#[derive(Debug, Clone)]
pub struct PsdAccumulator {
    window: Vec<f64>,
    compensation: f64,
    sum: Vec<f64>,
    count: usize,
    buf: Vec<Complex64>,
}

impl PsdAccumulator {
    pub fn new(len: usize) -> Self {
        let window = hann(len);
        let compensation = window.iter().map(|w| w * w).sum::<f64>() / len.max(1) as f64;
        Self {
            window,
            compensation,
            sum: vec![0.0; len],
            count: 0,
            buf: vec![Complex64::new(0.0, 0.0); len],
        }
    }

    pub fn add(&mut self, x: &[Complex64]) -> Result<()> {
        check_len("psd", self.sum.len(), x.len())?;
        for ((b, v), w) in self.buf.iter_mut().zip(x).zip(&self.window) {
            *b = v * w;
        }
        dft_in_place(&mut self.buf, Direction::Forward)?;
        for (a, b) in self.sum.iter_mut().zip(&self.buf) {
            *a += b.norm_sqr();
        }
        self.count += 1;
        Ok(())
    }

    /// Folds another accumulator's sums into this one.
    pub fn merge(&mut self, other: &PsdAccumulator) -> Result<()> {
        check_len("psd merge", self.sum.len(), other.sum.len())?;
        for (a, b) in self.sum.iter_mut().zip(&other.sum) {
            *a += b;
        }
        self.count += other.count;
        Ok(())
    }

    pub fn count(&self) -> usize {
        self.count
    }

    /// Averaged periodogram in natural bin order, linear units.
    pub fn periodogram(&self) -> Result<Vec<f64>> {
        if self.count == 0 {
            return Err(Error::Empty("psd needs at least one signal"));
        }
        let scale = 1.0 / (self.compensation * self.count as f64);
        Ok(self.sum.iter().map(|a| a * scale).collect())
    }

    pub fn curve(&self) -> Result<PsdCurve> {
        Ok(centred_curve(&self.periodogram()?))
    }
}

/// Ensemble-averaged Hann periodogram, see [`PsdAccumulator`].
pub fn periodogram(signals: &[TimeSignal]) -> Result<Vec<f64>> {
    let first = signals
        .first()
        .ok_or(Error::Empty("psd needs at least one signal"))?;
    let mut acc = PsdAccumulator::new(first.len());
    for x in signals {
        acc.add(x)?;
    }
    acc.periodogram()
}

/// Peak-normalized PSD with a half-length circular shift (DC centred).
pub fn psd(signals: &[TimeSignal]) -> Result<PsdCurve> {
    Ok(centred_curve(&periodogram(signals)?))
}

fn centred_curve(p: &[f64]) -> PsdCurve {
    let len = p.len();
    let peak = p.iter().copied().fold(0.0, f64::max);
    let half = len / 2;
    let mut freq_bins = Vec::with_capacity(len);
    let mut power_db = Vec::with_capacity(len);
    for j in 0..len {
        let k = (j + len - half) % len;
        freq_bins.push((j as f64 - half as f64) / len as f64);
        power_db.push(if p[k] > 0.0 && peak > 0.0 {
            to_db(p[k] / peak).max(POWER_FLOOR_DB)
        } else {
            POWER_FLOOR_DB
        });
    }
    PsdCurve {
        freq_bins,
        power_db,
    }
}

/// Whether centred bin `j` of a length-`len` curve falls outside subcarriers `0..n`.
fn out_of_band(j: usize, len: usize, n: usize) -> bool {
    (j + len - len / 2) % len >= n
}

/// Maximum PSD level outside the subcarrier band, in dB relative to the peak.
pub fn oobe(curve: &PsdCurve, cfg: &OfdmConfig) -> Result<f64> {
    let len = cfg.time_len();
    check_len("oobe", len, curve.power_db.len())?;
    Ok(curve
        .power_db
        .iter()
        .enumerate()
        .filter(|(j, _)| out_of_band(*j, len, cfg.n_subcarriers))
        .map(|(_, &p)| p)
        .fold(f64::NEG_INFINITY, f64::max))
}

/// Mean out-of-band level in dB relative to the peak bin (linear average of
/// the out-of-band bins). Less dominated by the band-edge bins than [`oobe`].
pub fn out_of_band_mean_db(curve: &PsdCurve, cfg: &OfdmConfig) -> Result<f64> {
    let len = cfg.time_len();
    check_len("out_of_band_mean_db", len, curve.power_db.len())?;
    let (sum, count) = curve
        .power_db
        .iter()
        .enumerate()
        .filter(|(j, _)| out_of_band(*j, len, cfg.n_subcarriers))
        .fold((0.0, 0usize), |(s, c), (_, &p)| {
            (s + 10f64.powf(p / 10.0), c + 1)
        });
    if count == 0 {
        return Err(Error::Empty("no out-of-band bins (oversampling = 1)"));
    }
    Ok(to_db(sum / count as f64).max(POWER_FLOOR_DB))
}

/// `1/2 ||u||^2`
pub fn distortion_energy(u: &[Complex64]) -> f64 {
    0.5 * norm_sqr(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::Scheme;
    use proptest::prelude::*;

    #[test]
    fn ccdf_examples() {
        assert_eq!(ccdf(&[5.0; 3], &[4.0]).unwrap().probabilities, vec![1.0]);
        assert_eq!(ccdf(&[5.0; 3], &[5.0]).unwrap().probabilities, vec![0.0]);
        let c = ccdf(&[3.0, 4.0, 5.0, 6.0], &[3.5, 4.5, 5.5]).unwrap();
        assert_eq!(c.probabilities, vec![0.75, 0.5, 0.25]);
        assert!(matches!(ccdf(&[], &[1.0]), Err(Error::Empty(_))));
    }

    #[test]
    fn abscissa_examples() {
        let samples: Vec<f64> = (1..=100).map(f64::from).collect();
        // 1 sample (100) above 99 -> Pr = 0.01
        assert_eq!(ccdf_abscissa(&samples, 0.01).unwrap(), 99.0);
        assert_eq!(ccdf_abscissa(&samples, 0.0).unwrap(), 100.0);
        assert_eq!(ccdf_abscissa(&samples, 1.0).unwrap(), 1.0);
        let t = ccdf_abscissa(&samples, 0.05).unwrap();
        assert!(ccdf(&samples, &[t]).unwrap().probabilities[0] <= 0.05);
    }

    proptest! {
        #[test]
        fn ccdf_is_monotone_and_bounded(samples in proptest::collection::vec(-5.0f64..15.0, 1..200)) {
            let thresholds: Vec<f64> = (0..80).map(|i| -6.0 + 0.25 * i as f64).collect();
            let c = ccdf(&samples, &thresholds).unwrap();
            for w in c.probabilities.windows(2) {
                prop_assert!(w[1] <= w[0]);
            }
            prop_assert!(c.probabilities.iter().all(|p| (0.0..=1.0).contains(p)));
        }
    }

    #[test]
    fn tone_at_dc_peaks_at_centre() {
        let x = TimeSignal::new(vec![Complex64::new(0.7, 0.7); 64]);
        let c = psd(&[x]).unwrap();
        assert_eq!(c.freq_bins[32], 0.0);
        assert_eq!(c.power_db[32], 0.0);
        assert_eq!(
            c.power_db.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            0.0
        );
    }

    #[test]
    fn periodogram_preserves_power_of_constant_envelope() {
        // Chirp with non-integer sweep: constant modulus, broadband spectrum.
        let len = 256;
        let amp = 1.7;
        let x = TimeSignal::new(
            (0..len)
                .map(|i| {
                    let t = i as f64;
                    Complex64::from_polar(amp, 0.013 * t * t + 0.4 * t)
                })
                .collect(),
        );
        let p = periodogram(&[x.clone(), x.scaled(Complex64::new(0.0, 1.0))]).unwrap();
        let mean = p.iter().sum::<f64>() / len as f64;
        assert!((mean / (amp * amp) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn psd_rejects_mismatched_lengths() {
        let a = TimeSignal::zeros(8);
        let b = TimeSignal::zeros(16);
        assert!(matches!(psd(&[a, b]), Err(Error::Shape { .. })));
        assert!(matches!(psd(&[]), Err(Error::Empty(_))));
    }

    #[test]
    fn oobe_examples() {
        let cfg = OfdmConfig::new(4, 4, Scheme::Qpsk).unwrap();
        let freq_bins: Vec<f64> = (0..16).map(|j| (j as f64 - 8.0) / 16.0).collect();
        // In-band = original bins 0..4 = centred indices 8..12.
        let power_db: Vec<f64> = (0..16)
            .map(|j| if (8..12).contains(&j) { 0.0 } else { -100.0 })
            .collect();
        let curve = PsdCurve {
            freq_bins: freq_bins.clone(),
            power_db,
        };
        assert_eq!(oobe(&curve, &cfg).unwrap(), -100.0);

        let flat = PsdCurve {
            freq_bins: freq_bins.clone(),
            power_db: vec![0.0; 16],
        };
        assert_eq!(oobe(&flat, &cfg).unwrap(), 0.0);

        let power_db: Vec<f64> = (0..16).map(|j| -((j * 37 % 16) as f64) * 3.0).collect();
        let brute = power_db
            .iter()
            .enumerate()
            .filter(|(j, _)| !(8..12).contains(j))
            .map(|(_, &p)| p)
            .fold(f64::NEG_INFINITY, f64::max);
        let curve = PsdCurve {
            freq_bins,
            power_db,
        };
        assert_eq!(oobe(&curve, &cfg).unwrap(), brute);
    }

    #[test]
    fn accumulator_merge_matches_single_pass() {
        let sig = |k: usize| {
            TimeSignal::new(
                (0..32)
                    .map(|i| Complex64::from_polar(1.0 + (i % 3) as f64, 0.3 * (i * k) as f64))
                    .collect(),
            )
        };
        let all: Vec<TimeSignal> = (1..6).map(sig).collect();
        let mut a = PsdAccumulator::new(32);
        let mut b = PsdAccumulator::new(32);
        for x in &all[..2] {
            a.add(x).unwrap();
        }
        for x in &all[2..] {
            b.add(x).unwrap();
        }
        a.merge(&b).unwrap();
        assert_eq!(a.count(), 5);
        let direct = periodogram(&all).unwrap();
        for (p, q) in a.periodogram().unwrap().iter().zip(&direct) {
            assert!((p - q).abs() <= 1e-12 * q.abs().max(1.0));
        }
    }

    #[test]
    fn out_of_band_mean_averages_linear_power() {
        let cfg = OfdmConfig::new(2, 2, Scheme::Qpsk).unwrap();
        // centred indices 2,3 are in-band; 0 and 1 are out-of-band at -10 and -20 dB.
        let curve = PsdCurve {
            freq_bins: vec![-0.5, -0.25, 0.0, 0.25],
            power_db: vec![-10.0, -20.0, 0.0, 0.0],
        };
        let expected = to_db((0.1 + 0.01) / 2.0);
        assert!((out_of_band_mean_db(&curve, &cfg).unwrap() - expected).abs() < 1e-12);
        let cfg1 = OfdmConfig::new(4, 1, Scheme::Qpsk).unwrap();
        assert!(out_of_band_mean_db(&curve, &cfg1).is_err());
    }

    #[test]
    fn distortion_energy_examples() {
        assert_eq!(distortion_energy(&[Complex64::new(0.0, 0.0); 3]), 0.0);
        assert_eq!(
            distortion_energy(&[Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)]),
            1.0
        );
    }
}
