use papr_core::admm::beta_from_target;
use papr_core::dft::count_transforms;
use papr_core::metrics::distortion_energy;
use papr_core::{
    papr_db, random_symbol, solve, Complex64, OfdmConfig, Scheme, SolverParams, TimeSignal, Variant,
};

fn clip(x: &[Complex64], beta: f64) -> Vec<Complex64> {
    x.iter()
        .map(|&v| {
            if v.norm() > beta {
                v * (beta / v.norm())
            } else {
                v
            }
        })
        .collect()
}

fn half_energy_of_difference(a: &[Complex64], b: &[Complex64]) -> f64 {
    0.5 * a
        .iter()
        .zip(b)
        .map(|(p, q)| (p - q).norm_sqr())
        .sum::<f64>()
}

#[test]
fn feasible_start_is_a_fixed_point() {
    let x_o = TimeSignal::new(
        (0..64)
            .map(|i| Complex64::from_polar(1.0, 0.37 * i as f64))
            .collect(),
    );
    for variant in Variant::ALL {
        let params = SolverParams {
            max_iters: 10,
            eps_residual: 0.0,
            variant,
            ..SolverParams::default()
        };
        let res = solve(&x_o, &params).unwrap();
        assert_eq!(res.residual_trace[0], 0.0);
        assert!(res.u_final.iter().all(|v| *v == Complex64::new(0.0, 0.0)));
        assert_eq!(res.x_final, x_o);
    }
}

#[test]
fn tcu_lands_near_target_in_five_iterations() {
    let cfg = OfdmConfig::default();
    let params = SolverParams::default();
    assert_eq!(params.variant, Variant::TcuAdmm);
    let mut within = 0;
    for i in 0..1000 {
        let (_, x_o) = random_symbol(&cfg, 0x5EED, i).unwrap();
        let out = solve(&x_o, &params).unwrap().x_final;
        if (papr_db(&out).unwrap() - params.papr_target_db).abs() <= 0.5 {
            within += 1;
        }
    }
    assert!(within >= 990, "{within}/1000 within 0.5 dB");
}

#[test]
fn converged_t_admm_distortion_equals_clip_distortion() {
    let cfg = OfdmConfig::new(128, 4, Scheme::Qam16).unwrap();
    let params = SolverParams {
        max_iters: 200,
        eps_residual: 0.0,
        variant: Variant::TAdmm,
        ..SolverParams::default()
    };
    for i in 0..100 {
        let (_, x_o) = random_symbol(&cfg, 0xD1, i).unwrap();
        let beta = beta_from_target(params.papr_target_db, &x_o, x_o.len()).unwrap();
        let res = solve(&x_o, &params).unwrap();
        let reference = half_energy_of_difference(&clip(&x_o, beta), &x_o);
        let achieved = distortion_energy(&res.u_final);
        assert!(
            (achieved - reference).abs() <= 1e-9 * reference.max(1e-12),
            "{achieved} vs {reference}"
        );
    }
}

#[test]
fn tcu_distortion_is_bounded_by_clip_at_its_final_threshold() {
    // Clipping is the minimum-distortion point of any ball, so the TCU result
    // can only approach it from above once its threshold has settled.
    let cfg = OfdmConfig::default();
    let params = SolverParams {
        max_iters: 200,
        eps_residual: 0.0,
        ..SolverParams::default()
    };
    for i in 0..100 {
        let (_, x_o) = random_symbol(&cfg, 0xD2, i).unwrap();
        let res = solve(&x_o, &params).unwrap();
        let beta = *res.beta_trace.last().unwrap();
        let reference = half_energy_of_difference(&clip(&x_o, beta), &x_o);
        let achieved = distortion_energy(&res.u_final);
        assert!(
            achieved >= reference * (1.0 - 1e-9),
            "{achieved} < {reference}"
        );
        assert!(
            achieved <= reference * (1.0 + 1e-6),
            "{achieved} vs {reference}"
        );
    }
}

#[test]
fn solvers_never_call_the_transform() {
    let cfg = OfdmConfig::new(256, 4, Scheme::Qpsk).unwrap();
    let (_, x_o) = random_symbol(&cfg, 3, 0).unwrap();
    for variant in Variant::ALL {
        let params = SolverParams {
            max_iters: 50,
            variant,
            ..SolverParams::default()
        };
        let (res, calls) = count_transforms(|| solve(&x_o, &params));
        res.unwrap();
        assert_eq!(calls, 0);
    }
}

#[test]
fn every_iterate_lies_in_its_ball() {
    let cfg = OfdmConfig::new(64, 4, Scheme::Qam16).unwrap();
    for variant in Variant::ALL {
        for i in 0..50 {
            let (_, x_o) = random_symbol(&cfg, 0xBA11, i).unwrap();
            let params = SolverParams {
                max_iters: 40,
                eps_residual: 0.0,
                variant,
                ..SolverParams::default()
            };
            let res = solve(&x_o, &params).unwrap();
            assert_eq!(res.residual_trace.len(), res.iters_run);
            assert_eq!(res.beta_trace.len(), res.iters_run);
            assert!(res.max_ball_excess() <= 1e-12);
        }
    }
}
