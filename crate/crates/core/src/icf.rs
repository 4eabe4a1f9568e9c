//! Iterative clipping and filtering.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::admm::{beta_from_target, project_linf_in_place};
use crate::dft::{dft_in_place, Direction};
use crate::error::{check_len, Error, Result};
use crate::signal::{OfdmConfig, TimeSignal};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IcfParams {
    pub clip_target_db: f64,
    pub iterations: usize,
}

impl Default for IcfParams {
    fn default() -> Self {
        Self {
            clip_target_db: 4.0,
            iterations: 5,
        }
    }
}

impl IcfParams {
    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::InvalidParameter {
                name: "iterations",
                reason: "must be at least 1".into(),
            });
        }
        if !self.clip_target_db.is_finite() {
            return Err(Error::InvalidParameter {
                name: "clip_target_db",
                reason: "must be finite".into(),
            });
        }
        Ok(())
    }
}

/// Zeroes every bin outside the subcarrier band `0..n_subcarriers`.
pub fn band_limit(x: &mut [Complex64], cfg: &OfdmConfig) -> Result<()> {
    dft_in_place(x, Direction::Forward)?;
    for v in &mut x[cfg.n_subcarriers..] {
        *v = Complex64::new(0.0, 0.0);
    }
    dft_in_place(x, Direction::Inverse)
}

/// One clip-and-filter pass at threshold `beta`.
pub fn icf_iteration(x: &mut [Complex64], beta: f64, cfg: &OfdmConfig) -> Result<()> {
    project_linf_in_place(x, beta);
    band_limit(x, cfg)
}

/// Clip to the l-inf threshold derived from `x_o`, then band-limit; repeated
/// `params.iterations` times. The last operation is always the filter, so
/// peaks may regrow above the threshold.
pub fn icf(x_o: &TimeSignal, cfg: &OfdmConfig, params: &IcfParams) -> Result<TimeSignal> {
    params.validate()?;
    check_len("icf", cfg.time_len(), x_o.len())?;
    let beta = beta_from_target(params.clip_target_db, x_o, x_o.len())?;
    let mut x = x_o.clone();
    for _ in 0..params.iterations {
        if x.peak() > beta {
            icf_iteration(&mut x, beta, cfg)?;
        }
    }
    Ok(x)
}
