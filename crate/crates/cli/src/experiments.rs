//! Experiment drivers. Each `run_*` writes one CSV into the output directory
//! and returns the numbers behind it.
//!
//! Symbol `i` of every experiment is drawn from the `(master_seed, bits, i)`
//! substream, so all methods see the same symbols and results do not depend on
//! the worker count: per-symbol results are collected in index order and
//! reduced sequentially.

use std::path::{Path, PathBuf};
use std::time::Instant;

use papr_core::admm::{beta_from_target, Solver};
use papr_core::channel::sspa;
use papr_core::dft::count_transforms;
use papr_core::icf::icf_iteration;
use papr_core::metrics::out_of_band_mean_db;
use papr_core::{
    ber_experiment, ccdf, oobe, papr_db, random_symbol, solve, BerExperiment, BerRecord, CcdfCurve,
    Method, OfdmConfig, PsdAccumulator, PsdCurve, Scheme, SolverParams, TimeSignal, Variant,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};

/// Symbols per PSD partial sum; fixed so the floating-point reduction order
/// does not depend on the worker count.
const PSD_CHUNK: usize = 64;

pub const RESIDUALS_CSV: &str = "residuals.csv";
pub const CCDF_CSV: &str = "ccdf.csv";
pub const PSD_CSV: &str = "psd.csv";
pub const BER_CSV: &str = "ber.csv";
pub const SCALING_CSV: &str = "scaling.csv";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Convergence,
    Ccdf,
    Psd,
    Ber,
    Scaling,
}

impl Stage {
    pub const ALL: [Stage; 5] = [
        Stage::Convergence,
        Stage::Ccdf,
        Stage::Psd,
        Stage::Ber,
        Stage::Scaling,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Convergence => "convergence",
            Stage::Ccdf => "ccdf",
            Stage::Psd => "psd",
            Stage::Ber => "ber",
            Stage::Scaling => "scaling",
        }
    }

    pub fn file_name(self) -> &'static str {
        match self {
            Stage::Convergence => RESIDUALS_CSV,
            Stage::Ccdf => CCDF_CSV,
            Stage::Psd => PSD_CSV,
            Stage::Ber => BER_CSV,
            Stage::Scaling => SCALING_CSV,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChainPoint {
    PreSspa,
    PostSspa,
}

impl ChainPoint {
    pub fn label(self) -> &'static str {
        match self {
            ChainPoint::PreSspa => "pre_sspa",
            ChainPoint::PostSspa => "post_sspa",
        }
    }
}

#[derive(Debug, Clone)]
pub struct ConvergenceSeries {
    pub variant: Variant,
    pub scheme: Scheme,
    /// Mean residual of iterations `1..=iterations`.
    pub mean_residual: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct CcdfSeries {
    pub method: Method,
    pub scheme: Scheme,
    pub papr_db: Vec<f64>,
    pub curve: CcdfCurve,
}

#[derive(Debug, Clone)]
pub struct CcdfSummary {
    pub series: Vec<CcdfSeries>,
    /// Transform calls made inside the two ADMM solvers.
    pub solver_transforms: u64,
    /// Transform calls made by ICF (nonzero, as a control for the counter).
    pub icf_transforms: u64,
    /// Largest `||x^{k+1}||_inf - beta^{(k)}` over all solver iterations.
    pub max_ball_excess: f64,
}

impl CcdfSummary {
    pub fn get(&self, method: Method, scheme: Scheme) -> Option<&CcdfSeries> {
        self.series
            .iter()
            .find(|s| s.method == method && s.scheme == scheme)
    }
}

#[derive(Debug, Clone)]
pub struct PsdSeries {
    pub method: Method,
    pub scheme: Scheme,
    pub chain_point: ChainPoint,
    pub curve: PsdCurve,
    pub oobe_db: f64,
    pub out_of_band_mean_db: f64,
}

#[derive(Debug, Clone)]
pub struct PsdSummary {
    pub series: Vec<PsdSeries>,
}

impl PsdSummary {
    pub fn get(
        &self,
        method: Method,
        scheme: Scheme,
        chain_point: ChainPoint,
    ) -> Option<&PsdSeries> {
        self.series
            .iter()
            .find(|s| s.method == method && s.scheme == scheme && s.chain_point == chain_point)
    }
}

#[derive(Debug, Clone)]
pub struct BerSeries {
    /// `Ideal` for the unprocessed linear chain, otherwise the method label.
    pub label: String,
    pub method: Method,
    pub scheme: Scheme,
    pub through_sspa: bool,
    pub records: Vec<BerRecord>,
}

#[derive(Debug, Clone)]
pub struct BerSummary {
    pub series: Vec<BerSeries>,
}

impl BerSummary {
    pub fn get(&self, label: &str, scheme: Scheme) -> Option<&BerSeries> {
        self.series
            .iter()
            .find(|s| s.label == label && s.scheme == scheme)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingRow {
    pub variant: String,
    pub ell_n: usize,
    pub ns_per_iteration: f64,
}

#[derive(Debug, Clone)]
pub struct ScalingSummary {
    pub rows: Vec<ScalingRow>,
}

impl ScalingSummary {
    /// `(ell_n, ns_per_iteration)` for one variant label, in grid order.
    pub fn curve(&self, variant: &str) -> Vec<(usize, f64)> {
        self.rows
            .iter()
            .filter(|r| r.variant == variant)
            .map(|r| (r.ell_n, r.ns_per_iteration))
            .collect()
    }
}

#[derive(Serialize)]
struct ResidualRow<'a> {
    variant: &'a str,
    modulation: &'a str,
    iteration: usize,
    mean_residual: f64,
}

#[derive(Serialize)]
struct CcdfRow<'a> {
    method: &'a str,
    modulation: &'a str,
    threshold_db: f64,
    ccdf: f64,
}

#[derive(Serialize)]
struct PsdRow<'a> {
    method: &'a str,
    modulation: &'a str,
    chain_point: &'a str,
    freq_norm: f64,
    power_db: f64,
}

#[derive(Serialize)]
struct BerRow<'a> {
    method: &'a str,
    modulation: &'a str,
    ebn0_db: f64,
    bits: u64,
    errors: u64,
    ber: f64,
}

fn write_csv<R: Serialize>(path: &Path, rows: impl IntoIterator<Item = R>) -> Result<()> {
    let csv_err = |source| HarnessError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    for row in rows {
        w.serialize(row).map_err(csv_err)?;
    }
    w.flush().map_err(|e| HarnessError::io(path, e))
}

/// Experiment runner bound to one config, output directory and worker pool.
pub struct Harness {
    cfg: ExperimentConfig,
    out_dir: PathBuf,
    pool: rayon::ThreadPool,
}

impl Harness {
    /// Validates `cfg` and builds its worker pool. Results go to `cfg.output_dir`.
    pub fn new(cfg: ExperimentConfig) -> Result<Self> {
        cfg.validate()?;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.workers)
            .build()
            .map_err(|e| HarnessError::Pool(e.to_string()))?;
        let out_dir = cfg.output_dir.clone();
        Ok(Self { cfg, out_dir, pool })
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.cfg
    }

    pub fn out_dir(&self) -> &Path {
        &self.out_dir
    }

    pub fn ensure_out_dir(&self) -> Result<()> {
        std::fs::create_dir_all(&self.out_dir).map_err(|e| HarnessError::io(&self.out_dir, e))
    }

    fn scheme_cfg(&self, scheme: Scheme) -> OfdmConfig {
        self.cfg.ofdm.with_scheme(scheme)
    }

    /// Maps `f` over symbol indices on the pool, preserving index order.
    fn per_symbol<T: Send>(
        &self,
        n: usize,
        f: impl Fn(u64) -> papr_core::Result<T> + Sync,
    ) -> Result<Vec<T>> {
        Ok(self.pool.install(|| {
            (0..n as u64)
                .into_par_iter()
                .map(&f)
                .collect::<papr_core::Result<Vec<T>>>()
        })?)
    }

    /// Mean residual per iteration for both variants and both modulations,
    /// running every symbol for `convergence.iterations` iterations.
    pub fn run_convergence(&self) -> Result<Vec<ConvergenceSeries>> {
        self.ensure_out_dir()?;
        let iterations = self.cfg.convergence.iterations;
        let n = self.cfg.convergence_symbols();
        let seed = self.cfg.master_seed;
        let mut series = Vec::new();
        for variant in Variant::ALL {
            for scheme in Scheme::ALL {
                let cfg = self.scheme_cfg(scheme);
                let params = SolverParams {
                    variant,
                    max_iters: iterations,
                    eps_residual: 0.0,
                    ..self.cfg.solver
                };
                let traces = self.per_symbol(n, |i| {
                    let (_, x_o) = random_symbol(&cfg, seed, i)?;
                    Ok(solve(&x_o, &params)?.residual_trace)
                })?;
                let mut sum = vec![0.0; iterations];
                for trace in &traces {
                    // A trace only ends early on an exactly zero residual.
                    for (s, r) in sum.iter_mut().zip(trace) {
                        *s += r;
                    }
                }
                let mean_residual = sum.into_iter().map(|s| s / n as f64).collect();
                series.push(ConvergenceSeries {
                    variant,
                    scheme,
                    mean_residual,
                });
            }
        }
        let rows = series.iter().flat_map(|s| {
            s.mean_residual
                .iter()
                .enumerate()
                .map(move |(k, &r)| ResidualRow {
                    variant: s.variant.label(),
                    modulation: s.scheme.label(),
                    iteration: k + 1,
                    mean_residual: r,
                })
        });
        write_csv(&self.out_dir.join(RESIDUALS_CSV), rows)?;
        Ok(series)
    }

    /// PAPR samples and CCDF curves for every method and modulation.
    pub fn run_ccdf(&self) -> Result<CcdfSummary> {
        self.ensure_out_dir()?;
        struct SymbolOutcome {
            papr_db: [f64; 4],
            solver_transforms: u64,
            icf_transforms: u64,
            ball_excess: f64,
        }
        let seed = self.cfg.master_seed;
        let mut series = Vec::new();
        let mut solver_transforms = 0;
        let mut icf_transforms = 0;
        let mut max_ball_excess = f64::NEG_INFINITY;
        for scheme in Scheme::ALL {
            let cfg = self.scheme_cfg(scheme);
            let outcomes = self.per_symbol(self.cfg.n_symbols, |i| {
                let (_, x_o) = random_symbol(&cfg, seed, i)?;
                let mut out = SymbolOutcome {
                    papr_db: [0.0; 4],
                    solver_transforms: 0,
                    icf_transforms: 0,
                    ball_excess: f64::NEG_INFINITY,
                };
                for (slot, method) in Method::ALL.into_iter().enumerate() {
                    let x = match method.variant() {
                        Some(variant) => {
                            let params = self.cfg.solver.with_variant(variant);
                            let (res, calls) = count_transforms(|| solve(&x_o, &params));
                            let res = res?;
                            out.solver_transforms += calls;
                            out.ball_excess = out.ball_excess.max(res.max_ball_excess());
                            res.x_final
                        }
                        None => {
                            let (res, calls) = count_transforms(|| {
                                method.apply(&x_o, &cfg, &self.cfg.solver, &self.cfg.icf)
                            });
                            if method == Method::Icf {
                                out.icf_transforms += calls;
                            }
                            res?
                        }
                    };
                    out.papr_db[slot] = papr_db(&x)?;
                }
                Ok(out)
            })?;
            for o in &outcomes {
                solver_transforms += o.solver_transforms;
                icf_transforms += o.icf_transforms;
                max_ball_excess = max_ball_excess.max(o.ball_excess);
            }
            for (slot, method) in Method::ALL.into_iter().enumerate() {
                let papr: Vec<f64> = outcomes.iter().map(|o| o.papr_db[slot]).collect();
                let curve = ccdf(&papr, &self.cfg.ccdf_thresholds_db)?;
                series.push(CcdfSeries {
                    method,
                    scheme,
                    papr_db: papr,
                    curve,
                });
            }
        }
        let rows = series.iter().flat_map(|s| {
            s.curve
                .thresholds_db
                .iter()
                .zip(&s.curve.probabilities)
                .map(move |(&t, &p)| CcdfRow {
                    method: s.method.label(),
                    modulation: s.scheme.label(),
                    threshold_db: t,
                    ccdf: p,
                })
        });
        write_csv(&self.out_dir.join(CCDF_CSV), rows)?;
        Ok(CcdfSummary {
            series,
            solver_transforms,
            icf_transforms,
            max_ball_excess,
        })
    }

    /// Ensemble PSDs before and after the amplifier for every method.
    pub fn run_psd(&self) -> Result<PsdSummary> {
        self.ensure_out_dir()?;
        let seed = self.cfg.master_seed;
        let n = self.cfg.n_symbols;
        let chunks = n.div_ceil(PSD_CHUNK);
        let mut series = Vec::new();
        for scheme in Scheme::ALL {
            let cfg = self.scheme_cfg(scheme);
            let len = cfg.time_len();
            for method in Method::ALL {
                let partial = self.per_symbol(chunks, |c| {
                    let mut pre = PsdAccumulator::new(len);
                    let mut post = PsdAccumulator::new(len);
                    let start = c as usize * PSD_CHUNK;
                    for i in start..(start + PSD_CHUNK).min(n) {
                        let (_, x_o) = random_symbol(&cfg, seed, i as u64)?;
                        let x = method.apply(&x_o, &cfg, &self.cfg.solver, &self.cfg.icf)?;
                        pre.add(&x)?;
                        post.add(&sspa(&x, &self.cfg.sspa, x.mean_power()))?;
                    }
                    Ok((pre, post))
                })?;
                let mut pre = PsdAccumulator::new(len);
                let mut post = PsdAccumulator::new(len);
                for (a, b) in &partial {
                    pre.merge(a)?;
                    post.merge(b)?;
                }
                for (chain_point, acc) in
                    [(ChainPoint::PreSspa, &pre), (ChainPoint::PostSspa, &post)]
                {
                    let curve = acc.curve()?;
                    series.push(PsdSeries {
                        method,
                        scheme,
                        chain_point,
                        oobe_db: oobe(&curve, &cfg)?,
                        out_of_band_mean_db: out_of_band_mean_db(&curve, &cfg)?,
                        curve,
                    });
                }
            }
        }
        let rows = series.iter().flat_map(|s| {
            s.curve
                .freq_bins
                .iter()
                .zip(&s.curve.power_db)
                .map(move |(&f, &p)| PsdRow {
                    method: s.method.label(),
                    modulation: s.scheme.label(),
                    chain_point: s.chain_point.label(),
                    freq_norm: f,
                    power_db: p,
                })
        });
        write_csv(&self.out_dir.join(PSD_CSV), rows)?;
        Ok(PsdSummary { series })
    }

    /// BER curves: the unprocessed linear chain (`Ideal`) plus every method
    /// through the amplifier.
    pub fn run_ber(&self) -> Result<BerSummary> {
        self.ensure_out_dir()?;
        let mut series = Vec::new();
        for scheme in Scheme::ALL {
            let cfg = self.scheme_cfg(scheme);
            let runs = std::iter::once(("Ideal".to_string(), Method::Original, false)).chain(
                Method::ALL
                    .into_iter()
                    .map(|m| (m.label().to_string(), m, true)),
            );
            for (label, method, through_sspa) in runs {
                let exp = BerExperiment {
                    method,
                    cfg,
                    solver: self.cfg.solver,
                    icf: self.cfg.icf,
                    sspa: through_sspa.then_some(self.cfg.sspa),
                    ebn0_grid_db: self.cfg.ebn0_grid_db.clone(),
                    n_symbols: self.cfg.n_symbols,
                    seed: self.cfg.master_seed,
                };
                let records = self.pool.install(|| ber_experiment(&exp))?;
                series.push(BerSeries {
                    label,
                    method,
                    scheme,
                    through_sspa,
                    records,
                });
            }
        }
        let rows = series.iter().flat_map(|s| {
            s.records.iter().map(move |r| BerRow {
                method: &s.label,
                modulation: s.scheme.label(),
                ebn0_db: r.ebn0_db,
                bits: r.bits_total,
                errors: r.bits_error,
                ber: r.ber(),
            })
        });
        write_csv(&self.out_dir.join(BER_CSV), rows)?;
        Ok(BerSummary { series })
    }

    /// Per-iteration wall time of both solvers and ICF over `scaling.lengths`.
    ///
    /// Runs on the calling thread. Each measurement times a fixed number of
    /// iterations (`max(4, samples_per_repetition / ell_n)`) from a fresh copy
    /// of the start state. Repetitions are interleaved round-robin over every
    /// (length, variant) point so slow drift of the machine affects all points
    /// alike; one warm-up round is discarded and the median of
    /// `scaling.repetitions` rounds is reported.
    pub fn run_scaling(&self) -> Result<ScalingSummary> {
        self.ensure_out_dir()?;
        let sc = &self.cfg.scaling;
        let ell = self.cfg.ofdm.oversampling;
        let mut points = Vec::new();
        for &ell_n in &sc.lengths {
            let cfg = OfdmConfig::new(ell_n / ell, ell, self.cfg.ofdm.scheme)?;
            let (_, x_o) = random_symbol(&cfg, self.cfg.master_seed, 0)?;
            for kind in [
                Timed::Solver(Variant::TAdmm),
                Timed::Solver(Variant::TcuAdmm),
                Timed::Icf,
            ] {
                points.push(TimedPoint {
                    kind,
                    cfg,
                    x_o: x_o.clone(),
                    iters: (sc.samples_per_repetition / ell_n).max(4),
                    samples: Vec::with_capacity(sc.repetitions),
                });
            }
        }
        for round in 0..=sc.repetitions {
            for p in points.iter_mut() {
                let ns = p.time_once(&self.cfg)?;
                if round > 0 {
                    p.samples.push(ns);
                }
            }
        }
        let rows: Vec<ScalingRow> = points
            .into_iter()
            .map(|p| ScalingRow {
                variant: p.kind.label().to_string(),
                ell_n: p.cfg.time_len(),
                ns_per_iteration: median(p.samples),
            })
            .collect();
        write_csv(&self.out_dir.join(SCALING_CSV), &rows)?;
        Ok(ScalingSummary { rows })
    }

    pub fn run_stage(&self, stage: Stage) -> Result<()> {
        match stage {
            Stage::Convergence => self.run_convergence().map(drop),
            Stage::Ccdf => self.run_ccdf().map(drop),
            Stage::Psd => self.run_psd().map(drop),
            Stage::Ber => self.run_ber().map(drop),
            Stage::Scaling => self.run_scaling().map(drop),
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Timed {
    Solver(Variant),
    Icf,
}

impl Timed {
    fn label(self) -> &'static str {
        match self {
            Timed::Solver(v) => v.label(),
            Timed::Icf => Method::Icf.label(),
        }
    }
}

struct TimedPoint {
    kind: Timed,
    cfg: OfdmConfig,
    x_o: TimeSignal,
    iters: usize,
    samples: Vec<f64>,
}

impl TimedPoint {
    /// Nanoseconds per iteration for one repetition; setup is not timed.
    fn time_once(&self, exp: &ExperimentConfig) -> papr_core::Result<f64> {
        let elapsed = match self.kind {
            Timed::Solver(variant) => {
                let mut solver = Solver::new(&self.x_o, exp.solver.with_variant(variant))?;
                let mut state = solver.initial_state();
                let t = Instant::now();
                for _ in 0..self.iters {
                    solver.step(&mut state)?;
                }
                let elapsed = t.elapsed();
                std::hint::black_box(&state);
                elapsed
            }
            Timed::Icf => {
                let beta = beta_from_target(exp.icf.clip_target_db, &self.x_o, self.x_o.len())?;
                let mut x = self.x_o.clone();
                let t = Instant::now();
                for _ in 0..self.iters {
                    icf_iteration(&mut x, beta, &self.cfg)?;
                }
                let elapsed = t.elapsed();
                std::hint::black_box(&x);
                elapsed
            }
        };
        Ok(elapsed.as_nanos() as f64 / self.iters as f64)
    }
}

fn median(mut samples: Vec<f64>) -> f64 {
    samples.sort_by(f64::total_cmp);
    let mid = samples.len() / 2;
    if samples.len() % 2 == 1 {
        samples[mid]
    } else {
        0.5 * (samples[mid - 1] + samples[mid])
    }
}
