//! PAPR reduction methods as interchangeable stages of the transmit chain.

use serde::{Deserialize, Serialize};

use crate::admm::{solve, SolverParams, Variant};
use crate::error::Result;
use crate::icf::{icf, IcfParams};
use crate::rng::{domain, random_bits, substream};
use crate::signal::{map_bits, synthesize, OfdmConfig, TimeSignal};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    Original,
    TAdmm,
    TcuAdmm,
    Icf,
}

impl Method {
    pub const ALL: [Method; 4] = [
        Method::Original,
        Method::TAdmm,
        Method::TcuAdmm,
        Method::Icf,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Method::Original => "Original",
            Method::TAdmm => Variant::TAdmm.label(),
            Method::TcuAdmm => Variant::TcuAdmm.label(),
            Method::Icf => "ICF",
        }
    }

    pub fn variant(self) -> Option<Variant> {
        match self {
            Method::TAdmm => Some(Variant::TAdmm),
            Method::TcuAdmm => Some(Variant::TcuAdmm),
            _ => None,
        }
    }

    /// Applies the method to `x_o`. ADMM methods override `solver.variant`.
    pub fn apply(
        self,
        x_o: &TimeSignal,
        cfg: &OfdmConfig,
        solver: &SolverParams,
        icf_params: &IcfParams,
    ) -> Result<TimeSignal> {
        match self {
            Method::Original => Ok(x_o.clone()),
            Method::Icf => icf(x_o, cfg, icf_params),
            Method::TAdmm | Method::TcuAdmm => {
                let params = solver.with_variant(self.variant().expect("ADMM method"));
                Ok(solve(x_o, &params)?.x_final)
            }
        }
    }
}

/// Bits and synthesized waveform of symbol `index` under `seed`.
pub fn random_symbol(cfg: &OfdmConfig, seed: u64, index: u64) -> Result<(Vec<u8>, TimeSignal)> {
    let mut rng = substream(seed, domain::BITS, index, 0);
    let bits = random_bits(&mut rng, cfg.bits_per_ofdm_symbol());
    let x = synthesize(&map_bits(&bits, cfg)?, cfg)?;
    Ok((bits, x))
}
