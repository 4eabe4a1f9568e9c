//! Power amplifier, AWGN channel, receiver and BER accounting.
//!
//! Eb/N0 convention: the transmitted waveform has measured mean power `P` per
//! time sample. With the unitary transforms used here, each of the `N` active
//! subcarriers then carries `Es = ell * P` and a complex noise sample of
//! variance `sigma^2` maps to per-bin noise of the same variance, so
//!
//! ```text
//! sigma^2 = ell * P / (bits_per_symbol * 10^(EbN0_dB / 10))
//! ```
//!
//! which gives the textbook `Q(sqrt(2 Eb/N0))` for ideal QPSK.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::admm::SolverParams;
use crate::dft::{dft, Direction};
use crate::error::{check_len, Error, Result};
use crate::icf::IcfParams;
use crate::pipeline::{random_symbol, Method};
use crate::rng::{derive_seed, domain};
use crate::signal::{demap, from_db, norm_sqr, OfdmConfig, TimeSignal};

/// Rapp-model solid-state amplifier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SspaParams {
    /// Smoothness `p`; large values approach a hard limiter.
    pub smoothing: f64,
    /// Input back-off of the mean input power below saturation, in dB.
    pub ibo_db: f64,
}

impl Default for SspaParams {
    fn default() -> Self {
        Self {
            smoothing: 3.0,
            ibo_db: 4.1,
        }
    }
}

impl SspaParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.smoothing.is_finite() && self.smoothing > 0.0) {
            return Err(Error::InvalidParameter {
                name: "smoothing",
                reason: format!("must be a positive finite number, got {}", self.smoothing),
            });
        }
        if !self.ibo_db.is_finite() {
            return Err(Error::InvalidParameter {
                name: "ibo_db",
                reason: "must be finite".into(),
            });
        }
        Ok(())
    }

    /// Input saturation amplitude `A = sqrt(avg_power * 10^(ibo/10))`.
    pub fn saturation_amplitude(&self, avg_power: f64) -> f64 {
        (avg_power * from_db(self.ibo_db)).sqrt()
    }
}

/// Rapp AM/AM characteristic `|x| / (1 + (|x|/A)^{2p})^{1/(2p)}`, zero AM/PM.
pub fn sspa(x: &[Complex64], params: &SspaParams, avg_power: f64) -> TimeSignal {
    let a = params.saturation_amplitude(avg_power);
    let two_p = 2.0 * params.smoothing;
    TimeSignal::new(
        x.iter()
            .map(|&v| {
                let r = v.norm() / a;
                // Written in terms of 1/r above saturation so r^{2p} cannot overflow.
                let gain = if r <= 1.0 {
                    (-(r.powf(two_p)).ln_1p() / two_p).exp()
                } else {
                    (-(r.powf(-two_p)).ln_1p() / two_p).exp() / r
                };
                v * gain
            })
            .collect(),
    )
}

/// Per-sample complex noise variance for the given Eb/N0 (zero when infinite).
pub fn noise_variance(signal_power: f64, ebn0_db: f64, cfg: &OfdmConfig) -> f64 {
    if ebn0_db == f64::INFINITY {
        return 0.0;
    }
    cfg.oversampling as f64 * signal_power
        / (cfg.scheme.bits_per_symbol() as f64 * from_db(ebn0_db))
}

/// Adds circularly-symmetric Gaussian noise; `ebn0_db = +inf` is a noiseless
/// passthrough. The noise level follows the measured power of `x`.
pub fn awgn(x: &[Complex64], ebn0_db: f64, cfg: &OfdmConfig, rng_seed: u64) -> TimeSignal {
    let power = if x.is_empty() {
        0.0
    } else {
        norm_sqr(x) / x.len() as f64
    };
    let variance = noise_variance(power, ebn0_db, cfg);
    if variance == 0.0 {
        return TimeSignal::new(x.to_vec());
    }
    let sigma = (variance / 2.0).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    TimeSignal::new(
        x.iter()
            .map(|&v| {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                v + Complex64::new(re, im) * sigma
            })
            .collect(),
    )
}

/// Forward DFT, subcarrier extraction, blind real AGC, hard decisions.
///
/// The AGC scales the subcarriers to unit mean power. When out-of-band bins
/// exist their mean power is taken as the noise floor and subtracted first.
pub fn receive(y: &[Complex64], cfg: &OfdmConfig) -> Result<Vec<u8>> {
    check_len("receive", cfg.time_len(), y.len())?;
    let spectrum = dft(y, Direction::Forward)?;
    let (in_band, out_band) = spectrum.split_at(cfg.n_subcarriers);
    let mean_power =
        |v: &[Complex64]| v.iter().map(Complex64::norm_sqr).sum::<f64>() / v.len() as f64;

    let total = mean_power(in_band);
    let floor = if out_band.is_empty() {
        0.0
    } else {
        mean_power(out_band)
    };
    let signal = if total - floor > 0.0 {
        total - floor
    } else {
        total
    };
    let gain = if signal > 0.0 {
        signal.sqrt().recip()
    } else {
        1.0
    };

    let points: Vec<Complex64> = in_band.iter().map(|v| v * gain).collect();
    Ok(demap(&points, cfg.scheme))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BerRecord {
    pub ebn0_db: f64,
    pub bits_total: u64,
    pub bits_error: u64,
}

impl BerRecord {
    pub fn ber(&self) -> f64 {
        if self.bits_total == 0 {
            0.0
        } else {
            self.bits_error as f64 / self.bits_total as f64
        }
    }
}

/// One BER sweep: random bits -> symbol -> PAPR method -> SSPA -> AWGN -> receiver.
#[derive(Debug, Clone, PartialEq)]
pub struct BerExperiment {
    pub method: Method,
    pub cfg: OfdmConfig,
    pub solver: SolverParams,
    pub icf: IcfParams,
    /// `None` bypasses the amplifier (linear chain).
    pub sspa: Option<SspaParams>,
    pub ebn0_grid_db: Vec<f64>,
    pub n_symbols: usize,
    pub seed: u64,
}

/// Runs the sweep in parallel over symbols.
///
/// Symbol `i` carries the bits of `(seed, bits, i)`; its noise at grid point
/// `j` comes from `(seed, noise, i, j)`. Each symbol is PAPR-processed and
/// amplified once and reused across the grid. Counts are integer sums, so the
/// result does not depend on thread count or scheduling.
pub fn ber_experiment(exp: &BerExperiment) -> Result<Vec<BerRecord>> {
    if exp.n_symbols == 0 {
        return Err(Error::InvalidParameter {
            name: "n_symbols",
            reason: "must be at least 1".into(),
        });
    }
    if let Some(s) = &exp.sspa {
        s.validate()?;
    }
    let points = exp.ebn0_grid_db.len();
    let per_symbol: Vec<Vec<u64>> = (0..exp.n_symbols as u64)
        .into_par_iter()
        .map(|i| -> Result<Vec<u64>> {
            let (bits, x_o) = random_symbol(&exp.cfg, exp.seed, i)?;
            let processed = exp.method.apply(&x_o, &exp.cfg, &exp.solver, &exp.icf)?;
            let tx = match &exp.sspa {
                Some(p) => sspa(&processed, p, processed.mean_power()),
                None => processed,
            };
            exp.ebn0_grid_db
                .iter()
                .enumerate()
                .map(|(j, &ebn0)| {
                    let seed = derive_seed(exp.seed, domain::NOISE, i, j as u64);
                    let rx = awgn(&tx, ebn0, &exp.cfg, seed);
                    let decided = receive(&rx, &exp.cfg)?;
                    Ok(decided.iter().zip(&bits).filter(|(a, b)| a != b).count() as u64)
                })
                .collect()
        })
        .collect::<Result<_>>()?;

    let bits_per_symbol = exp.cfg.bits_per_ofdm_symbol() as u64;
    Ok((0..points)
        .map(|j| BerRecord {
            ebn0_db: exp.ebn0_grid_db[j],
            bits_total: bits_per_symbol * exp.n_symbols as u64,
            bits_error: per_symbol.iter().map(|e| e[j]).sum(),
        })
        .collect())
}
