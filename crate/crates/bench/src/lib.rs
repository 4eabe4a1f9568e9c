//! Shared fixtures for the criterion benchmarks.

use papr_core::{random_symbol, OfdmConfig, Scheme, TimeSignal};

pub const OVERSAMPLING: usize = 4;

/// Time-domain lengths `l*N` covered by the benchmarks.
pub const LENGTHS: [usize; 5] = [512, 1024, 2048, 4096, 8192];

/// A QPSK symbol of time-domain length `ell_n` at the benchmark oversampling.
pub fn fixture(ell_n: usize) -> (OfdmConfig, TimeSignal) {
    let cfg = OfdmConfig::new(ell_n / OVERSAMPLING, OVERSAMPLING, Scheme::Qpsk)
        .expect("valid benchmark length");
    let (_, x) = random_symbol(&cfg, 1, 0).expect("symbol synthesis");
    (cfg, x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_have_requested_length() {
        for len in LENGTHS {
            let (cfg, x) = fixture(len);
            assert_eq!(x.len(), len);
            assert_eq!(cfg.time_len(), len);
        }
    }
}
