//! Numerical instrumentation of the T-ADMM descent argument.
//!
//! For consecutive iterates `k -> k+1` the change in the augmented Lagrangian
//! splits into three partial steps:
//!
//! ```text
//! delta_u = L(u^k,   x^k,   y^k) - L(u^k+1, x^k,   y^k)
//! delta_x = L(u^k+1, x^k,   y^k) - L(u^k+1, x^k+1, y^k)
//! delta_y = L(u^k+1, x^k+1, y^k) - L(u^k+1, x^k+1, y^k+1)
//! ```
//!
//! This module measures each of them and the bounds usually claimed for them.
//! It never asserts; violations are flagged per iteration. Note that
//! substituting the multiplier update gives `delta_y = -(1/rho)||y^k - y^k+1||^2`
//! exactly, which is non-positive, so the claimed total descent bound with a
//! `+(1/rho)||dy||^2` term is reported alongside the algebraic value.

use num_complex::Complex64;

use crate::admm::{augmented_lagrangian, AdmmState};
use crate::error::{check_len, Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Flags {
    /// `delta_u < (rho/2)||du||^2`
    pub u_bound: bool,
    /// `delta_x < (rho/2)||dx||^2` (only meaningful when `start_in_ball`)
    pub x_bound: bool,
    /// claimed total descent bound fails
    pub total_descent: bool,
    /// `L(u^k+1, x^k+1, y^k+1) < 0`
    pub lagrangian_negative: bool,
    /// `L(u^k+1, x^k+1, y^k+1)` below `f(x^k+1 - x_o) + (rho/2 - 1)||r||^2`
    pub lower_bound: bool,
}

impl Flags {
    pub fn any(&self) -> bool {
        self.u_bound
            || self.x_bound
            || self.total_descent
            || self.lagrangian_negative
            || self.lower_bound
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationDiagnostics {
    /// Index of the starting iterate.
    pub k: usize,
    pub delta_u: f64,
    pub delta_x: f64,
    pub delta_y: f64,
    /// `-(1/rho)||y^k - y^k+1||^2`
    pub delta_y_algebraic: f64,
    /// `(rho/2)||u^k - u^k+1||^2`
    pub u_bound: f64,
    /// `(rho/2)||x^k - x^k+1||^2`
    pub x_bound: f64,
    /// `(1/rho)||y^k - y^k+1||^2`
    pub y_term: f64,
    /// `u_bound + x_bound + y_term`, the claimed lower bound on the descent.
    pub claimed_descent_bound: f64,
    /// `L^k - L^k+1`
    pub descent: f64,
    /// `|delta_u + delta_x + delta_y - descent|`
    pub telescoping_error: f64,
    pub lagrangian: f64,
    pub lagrangian_next: f64,
    /// `1/2||x^k+1 - x_o||^2 + (rho/2 - 1)||x^k+1 - x_o - u^k+1||^2`
    pub lower_bound: f64,
    /// `max_i |y^k+1 - u^k+1 - rho (x^k+1 - x^k)|`
    pub identity_error: f64,
    /// `x^k` lies in the ball used to produce `x^k+1`.
    pub start_in_ball: bool,
    pub flags: Flags,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsReport {
    pub rho: f64,
    pub records: Vec<IterationDiagnostics>,
}

impl DiagnosticsReport {
    pub fn flagged(&self) -> impl Iterator<Item = &IterationDiagnostics> {
        self.records.iter().filter(|r| r.flags.any())
    }
}

fn diff_norm_sqr(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q).norm_sqr()).sum()
}

/// Measures the descent quantities for every consecutive pair in `states`.
pub fn diagnose(states: &[AdmmState], x_o: &[Complex64], rho: f64) -> Result<DiagnosticsReport> {
    if states.len() < 2 {
        return Err(Error::Empty(
            "diagnose needs at least two consecutive states",
        ));
    }
    for s in states {
        for v in [&s.u, &s.x, &s.y] {
            check_len("diagnose", x_o.len(), v.len())?;
        }
    }

    let lag =
        |u: &[Complex64], x: &[Complex64], y: &[Complex64]| augmented_lagrangian(u, x, y, x_o, rho);
    let mut records = Vec::with_capacity(states.len() - 1);
    for pair in states.windows(2) {
        let (cur, next) = (&pair[0], &pair[1]);
        let l_k = lag(&cur.u, &cur.x, &cur.y)?;
        let l_u = lag(&next.u, &cur.x, &cur.y)?;
        let l_x = lag(&next.u, &next.x, &cur.y)?;
        let l_next = lag(&next.u, &next.x, &next.y)?;

        let du = diff_norm_sqr(&cur.u, &next.u);
        let dx = diff_norm_sqr(&cur.x, &next.x);
        let dy = diff_norm_sqr(&cur.y, &next.y);

        let delta_u = l_k - l_u;
        let delta_x = l_u - l_x;
        let delta_y = l_x - l_next;
        let descent = l_k - l_next;

        let u_bound = 0.5 * rho * du;
        let x_bound = 0.5 * rho * dx;
        let y_term = dy / rho;
        let claimed = u_bound + x_bound + y_term;

        let mut distortion = 0.0;
        let mut residual = 0.0;
        let mut identity_error: f64 = 0.0;
        for (i, &o) in x_o.iter().enumerate() {
            let d = next.x[i] - o;
            distortion += d.norm_sqr();
            residual += (d - next.u[i]).norm_sqr();
            let gap = next.y[i] - next.u[i] - (next.x[i] - cur.x[i]) * rho;
            identity_error = identity_error.max(gap.norm());
        }
        let lower_bound = 0.5 * distortion + (0.5 * rho - 1.0) * residual;

        let start_in_ball = cur.x.iter().all(|v| v.norm() <= next.beta + 1e-12);
        let tol = 1e-9 * l_k.abs().max(l_next.abs()).max(1.0);
        let flags = Flags {
            u_bound: delta_u < u_bound - tol,
            x_bound: delta_x < x_bound - tol,
            total_descent: descent < claimed - tol,
            lagrangian_negative: l_next < -tol,
            lower_bound: l_next < lower_bound - tol,
        };

        records.push(IterationDiagnostics {
            k: cur.k,
            delta_u,
            delta_x,
            delta_y,
            delta_y_algebraic: -y_term,
            u_bound,
            x_bound,
            y_term,
            claimed_descent_bound: claimed,
            descent,
            telescoping_error: (delta_u + delta_x + delta_y - descent).abs(),
            lagrangian: l_k,
            lagrangian_next: l_next,
            lower_bound,
            identity_error,
            start_in_ball,
            flags,
        });
    }
    Ok(DiagnosticsReport { rho, records })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::admm::{solve_traced, SolverParams, Variant};
    use crate::signal::{map_bits, synthesize, OfdmConfig, Scheme, TimeSignal};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn needs_two_states() {
        let x_o = TimeSignal::new(vec![Complex64::new(1.0, 0.0); 2]);
        let s = AdmmState::initial(&x_o, 1.0);
        assert!(matches!(diagnose(&[s], &x_o, 2.0), Err(Error::Empty(_))));
    }

    #[test]
    fn stationary_trace_is_all_zero() {
        let x_o = TimeSignal::new(vec![Complex64::new(0.5, 0.0), Complex64::new(0.0, -0.5)]);
        let s = AdmmState::initial(&x_o, 1.0);
        let report = diagnose(&[s.clone(), s.clone(), s], &x_o, 2.0).unwrap();
        assert_eq!(report.records.len(), 2);
        for r in &report.records {
            for v in [
                r.delta_u,
                r.delta_x,
                r.delta_y,
                r.descent,
                r.claimed_descent_bound,
                r.lagrangian_next,
                r.lower_bound,
            ] {
                assert_eq!(v, 0.0);
            }
            assert!(!r.flags.any());
        }
    }

    #[test]
    fn telescoping_and_sign_of_delta_y() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let cfg = OfdmConfig::new(8, 2, Scheme::Qpsk).unwrap();
        let bits: Vec<u8> = (0..16).map(|_| rng.random_range(0..=1)).collect();
        let x_o = synthesize(&map_bits(&bits, &cfg).unwrap(), &cfg).unwrap();
        let params = SolverParams {
            variant: Variant::TAdmm,
            max_iters: 30,
            eps_residual: 0.0,
            papr_target_db: 2.0,
            ..Default::default()
        };
        let (_, states) = solve_traced(&x_o, &params).unwrap();
        let report = diagnose(&states, &x_o, params.rho).unwrap();
        assert_eq!(report.records.len(), 30);
        for (r, w) in report.records.iter().zip(states.windows(2)) {
            // Independent evaluation of L at both endpoints.
            let lk = augmented_lagrangian(&w[0].u, &w[0].x, &w[0].y, &x_o, 2.0).unwrap();
            let ln = augmented_lagrangian(&w[1].u, &w[1].x, &w[1].y, &x_o, 2.0).unwrap();
            let scale = lk.abs().max(ln.abs()).max(1.0);
            assert!((r.delta_u + r.delta_x + r.delta_y - (lk - ln)).abs() <= 1e-10 * scale);
            assert!((r.delta_y - r.delta_y_algebraic).abs() <= 1e-10 * scale);
            assert!(r.delta_y <= 1e-12);
            assert!(r.lagrangian_next >= -1e-9);
        }
    }
}
