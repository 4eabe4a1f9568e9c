//! T-ADMM and TCU-ADMM for the distortion-minimizing PAPR model
//!
//! ```text
//! minimize  1/2 ||u||^2   subject to  ||x||_inf <= beta,  x = x_o + u
//! ```
//!
//! with augmented Lagrangian
//! `L(u, x, y) = 1/2 ||u||^2 + Re(y^H (x - x_o - u)) + rho/2 ||x - x_o - u||^2`.
//!
//! Every update is elementwise and closed-form; nothing here touches the DFT.
//! One iteration is: u-update, x-target `b = u + x_o - y/rho`, (TCU only)
//! threshold refresh from the previous `x`, projection onto the l-inf ball,
//! multiplier ascent. The sign of the `y/rho` term makes `b` the exact
//! minimizer of `L(u^{k+1}, ., y^k)` before projection.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::signal::{from_db, norm_sqr, TimeSignal};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variant {
    /// Fixed threshold derived once from `x_o`.
    #[serde(rename = "t-admm")]
    TAdmm,
    /// Threshold re-derived from the current iterate every iteration.
    #[serde(rename = "tcu-admm")]
    TcuAdmm,
}

impl Variant {
    pub const ALL: [Variant; 2] = [Variant::TAdmm, Variant::TcuAdmm];

    pub fn label(self) -> &'static str {
        match self {
            Variant::TAdmm => "T-ADMM",
            Variant::TcuAdmm => "TCU-ADMM",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverParams {
    pub rho: f64,
    pub papr_target_db: f64,
    pub max_iters: usize,
    /// Stop once `||x^{k+1}-x^k||^2 + ||u^{k+1}-u^k||^2 <= eps_residual`.
    pub eps_residual: f64,
    pub variant: Variant,
}

impl Default for SolverParams {
    fn default() -> Self {
        Self {
            rho: 2.0,
            papr_target_db: 4.0,
            max_iters: 5,
            eps_residual: 1e-8,
            variant: Variant::TcuAdmm,
        }
    }
}

impl SolverParams {
    pub fn with_variant(mut self, variant: Variant) -> Self {
        self.variant = variant;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rho.is_finite() && self.rho > 0.0) {
            return Err(Error::InvalidParameter {
                name: "rho",
                reason: format!("must be a positive finite number, got {}", self.rho),
            });
        }
        if !self.papr_target_db.is_finite() {
            return Err(Error::InvalidParameter {
                name: "papr_target_db",
                reason: "must be finite".into(),
            });
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidParameter {
                name: "max_iters",
                reason: "must be at least 1".into(),
            });
        }
        if !(self.eps_residual.is_finite() && self.eps_residual >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "eps_residual",
                reason: format!(
                    "must be a nonnegative finite number, got {}",
                    self.eps_residual
                ),
            });
        }
        Ok(())
    }

    /// Non-fatal remarks about the parameter choice.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.rho < 2.0 {
            out.push(format!(
                "rho = {} is below 2; the convergence guarantee for T-ADMM requires rho >= 2",
                self.rho
            ));
        }
        out
    }
}

/// Amplitude ratio `sqrt(10^(db/10))` between the l-inf threshold and the RMS level.
pub fn target_amplitude_ratio(papr_target_db: f64) -> f64 {
    from_db(papr_target_db).sqrt()
}

fn threshold(
    papr_target_db: f64,
    signal: &[Complex64],
    ell_n: usize,
    what: &'static str,
) -> Result<f64> {
    check_len(what, ell_n, signal.len())?;
    let norm = norm_sqr(signal).sqrt();
    if norm <= 0.0 {
        return Err(Error::Degenerate(what));
    }
    Ok(target_amplitude_ratio(papr_target_db) * (1.0 / ell_n as f64).sqrt() * norm)
}

/// `beta = alpha * sqrt(1/ell_n) * ||ref||_2`, alpha the amplitude ratio of the target.
pub fn beta_from_target(
    papr_target_db: f64,
    ref_signal: &[Complex64],
    ell_n: usize,
) -> Result<f64> {
    threshold(
        papr_target_db,
        ref_signal,
        ell_n,
        "beta_from_target: zero reference signal",
    )
}

/// TCU threshold refresh from the current iterate; same formula as [`beta_from_target`].
pub fn beta_adapt(x_k: &[Complex64], papr_target_db: f64, ell_n: usize) -> Result<f64> {
    threshold(papr_target_db, x_k, ell_n, "beta_adapt: zero iterate")
}

// Slice kernels. Each overwrites its output and returns the squared l2 change
// (or residual) it produced, so the solver needs no extra passes or copies.

fn u_update_kernel(
    u: &mut [Complex64],
    x: &[Complex64],
    y: &[Complex64],
    x_o: &[Complex64],
    rho: f64,
) -> f64 {
    let gain = rho / (rho + 1.0);
    let inv_rho = 1.0 / rho;
    let mut change = 0.0;
    for i in 0..u.len() {
        let next = (x[i] - x_o[i] + y[i] * inv_rho) * gain;
        change += (next - u[i]).norm_sqr();
        u[i] = next;
    }
    change
}

fn x_target_kernel(
    b: &mut [Complex64],
    u: &[Complex64],
    x_o: &[Complex64],
    y: &[Complex64],
    rho: f64,
) {
    let inv_rho = 1.0 / rho;
    for i in 0..b.len() {
        b[i] = u[i] + x_o[i] - y[i] * inv_rho;
    }
}

#[inline]
fn clamp_magnitude(v: Complex64, beta: f64) -> Complex64 {
    let power = v.norm_sqr();
    if power > beta * beta {
        v * (beta / power.sqrt())
    } else {
        v
    }
}

fn project_kernel(x: &mut [Complex64], b: &[Complex64], beta: f64) -> f64 {
    let mut change = 0.0;
    for i in 0..x.len() {
        let next = clamp_magnitude(b[i], beta);
        change += (next - x[i]).norm_sqr();
        x[i] = next;
    }
    change
}

fn dual_kernel(
    y: &mut [Complex64],
    x: &[Complex64],
    u: &[Complex64],
    x_o: &[Complex64],
    rho: f64,
) -> f64 {
    let mut feas = 0.0;
    for i in 0..y.len() {
        let r = x[i] - x_o[i] - u[i];
        feas += r.norm_sqr();
        y[i] += r * rho;
    }
    feas
}

fn check_shapes(context: &'static str, len: usize, others: &[&[Complex64]]) -> Result<()> {
    others
        .iter()
        .try_for_each(|o| check_len(context, len, o.len()))
}

/// `u = rho/(rho+1) * (x_k - x_o + y_k/rho)`, the unconstrained minimizer of
/// `L(., x_k, y_k)`.
pub fn u_update(
    x_k: &[Complex64],
    y_k: &[Complex64],
    x_o: &[Complex64],
    rho: f64,
) -> Result<TimeSignal> {
    check_shapes("u_update", x_o.len(), &[x_k, y_k])?;
    let mut u = TimeSignal::zeros(x_o.len());
    u_update_kernel(&mut u, x_k, y_k, x_o, rho);
    Ok(u)
}

/// Elementwise magnitude clamp onto `{x : ||x||_inf <= beta}`, phase preserved.
pub fn project_linf(v: &[Complex64], beta: f64) -> TimeSignal {
    TimeSignal::new(v.iter().map(|&x| clamp_magnitude(x, beta)).collect())
}

pub fn project_linf_in_place(v: &mut [Complex64], beta: f64) {
    for x in v.iter_mut() {
        *x = clamp_magnitude(*x, beta);
    }
}

/// `y + rho (x_next - x_o - u_next)`
pub fn dual_update(
    y_k: &[Complex64],
    x_next: &[Complex64],
    u_next: &[Complex64],
    x_o: &[Complex64],
    rho: f64,
) -> Result<TimeSignal> {
    check_shapes("dual_update", x_o.len(), &[y_k, x_next, u_next])?;
    let mut y = TimeSignal::new(y_k.to_vec());
    dual_kernel(&mut y, x_next, u_next, x_o, rho);
    Ok(y)
}

pub fn augmented_lagrangian(
    u: &[Complex64],
    x: &[Complex64],
    y: &[Complex64],
    x_o: &[Complex64],
    rho: f64,
) -> Result<f64> {
    check_shapes("augmented_lagrangian", x_o.len(), &[u, x, y])?;
    Ok(lagrangian_unchecked(u, x, y, x_o, rho))
}

fn lagrangian_unchecked(
    u: &[Complex64],
    x: &[Complex64],
    y: &[Complex64],
    x_o: &[Complex64],
    rho: f64,
) -> f64 {
    let mut objective = 0.0;
    let mut coupling = 0.0;
    let mut penalty = 0.0;
    for i in 0..x_o.len() {
        let r = x[i] - x_o[i] - u[i];
        objective += u[i].norm_sqr();
        // Re(conj(y) r)
        coupling += y[i].re * r.re + y[i].im * r.im;
        penalty += r.norm_sqr();
    }
    0.5 * objective + coupling + 0.5 * rho * penalty
}

/// Iterate `(u^k, x^k, y^k)` together with the threshold used to produce `x^k`.
#[derive(Debug, Clone, PartialEq)]
pub struct AdmmState {
    pub u: TimeSignal,
    pub x: TimeSignal,
    pub y: TimeSignal,
    pub beta: f64,
    /// 1-based iteration index of this iterate.
    pub k: usize,
}

impl AdmmState {
    /// `u = 0, x = x_o, y = 0`.
    pub fn initial(x_o: &TimeSignal, beta: f64) -> Self {
        Self {
            u: TimeSignal::zeros(x_o.len()),
            x: x_o.clone(),
            y: TimeSignal::zeros(x_o.len()),
            beta,
            k: 1,
        }
    }
}

/// Per-iteration measurements produced by [`Solver::step`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    /// `||x^{k+1}-x^k||^2 + ||u^{k+1}-u^k||^2`
    pub residual: f64,
    /// `||x^{k+1} - x_o - u^{k+1}||_2`
    pub feasibility: f64,
    /// `L(u^{k+1}, x^{k+1}, y^{k+1})`
    pub lagrangian: f64,
    /// Threshold used for this projection.
    pub beta: f64,
    /// `||x^{k+1}||_inf`
    pub peak: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub x_final: TimeSignal,
    pub u_final: TimeSignal,
    pub residual_trace: Vec<f64>,
    pub feas_trace: Vec<f64>,
    pub lagrangian_trace: Vec<f64>,
    pub beta_trace: Vec<f64>,
    pub peak_trace: Vec<f64>,
    pub iters_run: usize,
}

impl SolveResult {
    /// Largest `||x^{k+1}||_inf - beta^{(k)}` over the run (<= 0 when every
    /// projection landed inside its ball).
    pub fn max_ball_excess(&self) -> f64 {
        self.peak_trace
            .iter()
            .zip(&self.beta_trace)
            .map(|(p, b)| p - b)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Reusable solver bound to one reference signal.
#[derive(Debug)]
pub struct Solver<'a> {
    x_o: &'a TimeSignal,
    params: SolverParams,
    beta_0: f64,
    b: Vec<Complex64>,
}

impl<'a> Solver<'a> {
    pub fn new(x_o: &'a TimeSignal, params: SolverParams) -> Result<Self> {
        params.validate()?;
        let beta_0 = beta_from_target(params.papr_target_db, x_o, x_o.len())?;
        Ok(Self {
            x_o,
            params,
            beta_0,
            b: vec![Complex64::new(0.0, 0.0); x_o.len()],
        })
    }

    pub fn params(&self) -> &SolverParams {
        &self.params
    }

    /// Threshold derived from `x_o`; fixed for T-ADMM.
    pub fn initial_beta(&self) -> f64 {
        self.beta_0
    }

    pub fn initial_state(&self) -> AdmmState {
        AdmmState::initial(self.x_o, self.beta_0)
    }

    /// Advances `state` by one iteration in place.
    pub fn step(&mut self, state: &mut AdmmState) -> Result<IterationRecord> {
        let rho = self.params.rho;
        let x_o: &[Complex64] = self.x_o;
        check_shapes("solver state", x_o.len(), &[&state.u, &state.x, &state.y])?;

        let du = u_update_kernel(&mut state.u, &state.x, &state.y, x_o, rho);
        x_target_kernel(&mut self.b, &state.u, x_o, &state.y, rho);
        let beta = match self.params.variant {
            Variant::TAdmm => self.beta_0,
            Variant::TcuAdmm => beta_adapt(&state.x, self.params.papr_target_db, x_o.len())?,
        };
        let dx = project_kernel(&mut state.x, &self.b, beta);
        let feas = dual_kernel(&mut state.y, &state.x, &state.u, x_o, rho);
        state.beta = beta;
        state.k += 1;

        Ok(IterationRecord {
            residual: dx + du,
            feasibility: feas.sqrt(),
            lagrangian: lagrangian_unchecked(&state.u, &state.x, &state.y, x_o, rho),
            beta,
            peak: state.x.peak(),
        })
    }

    fn run(&mut self, mut on_state: impl FnMut(&AdmmState)) -> Result<SolveResult> {
        let mut state = self.initial_state();
        on_state(&state);
        let cap = self.params.max_iters;
        let mut result = SolveResult {
            x_final: TimeSignal::zeros(0),
            u_final: TimeSignal::zeros(0),
            residual_trace: Vec::with_capacity(cap),
            feas_trace: Vec::with_capacity(cap),
            lagrangian_trace: Vec::with_capacity(cap),
            beta_trace: Vec::with_capacity(cap),
            peak_trace: Vec::with_capacity(cap),
            iters_run: 0,
        };
        for _ in 0..cap {
            let rec = self.step(&mut state)?;
            on_state(&state);
            result.residual_trace.push(rec.residual);
            result.feas_trace.push(rec.feasibility);
            result.lagrangian_trace.push(rec.lagrangian);
            result.beta_trace.push(rec.beta);
            result.peak_trace.push(rec.peak);
            result.iters_run += 1;
            if rec.residual <= self.params.eps_residual {
                break;
            }
        }
        result.x_final = state.x;
        result.u_final = state.u;
        Ok(result)
    }
}

/// Runs the configured variant from `u = 0, x = x_o, y = 0` until the residual
/// drops to `eps_residual` or `max_iters` iterations have run.
pub fn solve(x_o: &TimeSignal, params: &SolverParams) -> Result<SolveResult> {
    Solver::new(x_o, *params)?.run(|_| {})
}

/// Like [`solve`], additionally returning every iterate (initial state first,
/// so `states.len() == iters_run + 1`).
pub fn solve_traced(
    x_o: &TimeSignal,
    params: &SolverParams,
) -> Result<(SolveResult, Vec<AdmmState>)> {
    let mut states = Vec::new();
    let result = Solver::new(x_o, *params)?.run(|s| states.push(s.clone()))?;
    Ok((result, states))
}
