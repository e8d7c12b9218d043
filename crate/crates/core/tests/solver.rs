use num_complex::Complex64;
use wns::grid::{GridSpec, PhysicalField, VelocityState};
use wns::solver::{
    bilinear_b, bilinear_b_spectral, calibrate_constants, existence_time, initial, march, mild_residual, picard_solve, pressure_diagnostic,
    uniform_times, MarchStatus, SolverConfig, Workspace,
};
use wns::special_fn::BesselOrder;
use wns::WnsError;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

fn order(a: f64) -> BesselOrder {
    BesselOrder::new(a).unwrap()
}

fn small(a: f64) -> GridSpec {
    GridSpec::small(order(a))
}

fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn max_abs(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

#[test]
fn bilinear_form_vanishes_on_zero_operands() {
    let g = small(0.0);
    let u = initial::divergence_free_random(&g, 3, 2.0, 1.0).unwrap();
    let z = VelocityState::zeros(&g, 0.0);
    let times = uniform_times(0.05, 4);
    for (a, b) in [(&z, &u), (&u, &z)] {
        let traj_a = vec![a.clone(); times.len()];
        let traj_b = vec![b.clone(); times.len()];
        let out = bilinear_b(&traj_a, &traj_b, 1.0, &times, true).unwrap();
        assert!(out.iter().all(|s| s.magnitudes().iter().all(|&m| m == 0.0)));
    }
}

#[test]
fn bilinear_form_is_divergence_free() {
    for a in [0.0, 0.5] {
        let g = small(a);
        let u = initial::divergence_free_random(&g, 11, 2.0, 1.0).unwrap();
        let v = initial::divergence_free_random(&g, 12, 2.5, 1.0).unwrap();
        let times = uniform_times(0.05, 4);
        let out = bilinear_b(&vec![u; 5], &vec![v; 5], 1.0, &times, true).unwrap();
        for s in &out[1..] {
            let scale = s.lp_norm(2.0).unwrap();
            assert!(scale > 0.0);
            assert!(s.div_norm <= 1e-10 * scale.max(1.0), "div {} at alpha {a}", s.div_norm);
        }
    }
}

#[test]
fn bilinear_form_of_one_mode_matches_closed_form() {
    // u = (cos(x_1) e^{-s r^2}, 0): u_1^2 = (1/2 + cos(2 x_1)/2) e^{-2 s r^2}, whose
    // transform is a sum of periodic deltas times the radial Gaussian pair.
    let a = 0.5;
    let s = 1.0;
    let nu = 0.7;
    let g = small(a);
    let mut u = VelocityState::zeros(&g, 0.0);
    u.components[0] = PhysicalField::from_fn(&g, |x| x[0].cos() * (-s * x[1] * x[1]).exp());
    let times = uniform_times(0.2, 4);
    let ws = Workspace::new(&g, false);
    let spec = vec![ws.to_spectral(&u).unwrap(); 5];
    let out = bilinear_b_spectral(&ws, &spec, &spec, nu, &times).unwrap();
    let f = &ws.freq;
    let cell = g.box_len / (2.0 * std::f64::consts::PI).sqrt();
    let weight = |k: f64| -> f64 {
        if k.abs() < 1e-12 {
            0.5
        } else if (k.abs() - 2.0).abs() < 1e-12 {
            0.25
        } else {
            0.0
        }
    };
    let square: Vec<Complex64> = (0..f.len())
        .map(|n| {
            let (k, lr) = (f.lambda[0][n], f.lambda[1][n]);
            let radial = (4.0 * s).powf(-(a + 1.0)) * (-lr * lr / (8.0 * s)).exp();
            Complex64::new(cell * weight(k) * radial, 0.0)
        })
        .collect();
    // N = P(i lambda_1 F(u_1^2), 0).
    let n: Vec<Vec<Complex64>> = {
        let mut n0 = vec![Complex64::new(0.0, 0.0); f.len()];
        let mut n1 = vec![Complex64::new(0.0, 0.0); f.len()];
        for i in 0..f.len() {
            let l2 = f.lambda_sq[i];
            if l2 == 0.0 {
                continue;
            }
            let (k, lr) = (f.lambda[0][i], f.lambda[1][i]);
            let flux = I * k * square[i];
            n0[i] = flux * (1.0 - k * k / l2);
            n1[i] = -flux * (k * lr / l2);
        }
        vec![n0, n1]
    };
    for (got, &t) in out.iter().zip(&times).skip(1) {
        for j in 0..2 {
            let expect: Vec<Complex64> = (0..f.len())
                .map(|i| {
                    let z = nu * f.lambda_sq[i];
                    let factor = if z == 0.0 { t } else { (1.0 - (-z * t).exp()) / z };
                    n[j][i] * factor
                })
                .collect();
            let scale = max_abs(&expect).max(1e-300);
            let err = max_diff(&got[j], &expect) / scale;
            assert!(err < 1e-6, "component {j} at t = {t}: relative error {err:e}");
        }
    }
}

#[test]
fn bilinear_form_is_bilinear() {
    let g = small(0.0);
    let u = initial::divergence_free_random(&g, 5, 2.0, 1.0).unwrap();
    let v = initial::divergence_free_random(&g, 6, 2.0, 0.7).unwrap();
    let mut w = u.clone();
    for (c, d) in w.components.iter_mut().zip(&v.components) {
        *c = c.axpy(-1.0, d).unwrap();
    }
    let times = uniform_times(0.02, 2);
    let traj = |s: &VelocityState| vec![s.clone(); 3];
    let b = |x: &VelocityState, y: &VelocityState| bilinear_b(&traj(x), &traj(y), 1.0, &times, true).unwrap();
    let (buu, bvv, bwu, bvw) = (b(&u, &u), b(&v, &v), b(&w, &u), b(&v, &w));
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for m in 0..3 {
        for j in 0..2 {
            for i in 0..g.physical_len() {
                let lhs = buu[m].components[j].values[i] - bvv[m].components[j].values[i];
                let rhs = bwu[m].components[j].values[i] + bvw[m].components[j].values[i];
                worst = worst.max((lhs - rhs).abs());
                scale = scale.max(lhs.abs());
            }
        }
    }
    assert!(worst <= 1e-10 * scale.max(1.0), "{worst:e}");
}

#[test]
fn bilinear_form_rejects_mismatched_grids() {
    let a = VelocityState::zeros(&small(0.0), 0.0);
    let b = VelocityState::zeros(&small(0.5), 0.0);
    let times = uniform_times(0.1, 1);
    assert!(bilinear_b(&[a.clone(), a], &[b.clone(), b], 1.0, &times, true).is_err());
}

#[test]
fn picard_of_zero_data_is_zero() {
    let g = small(0.0);
    let cfg = SolverConfig::new(g.clone(), 1.0, 6.0).unwrap();
    let out = picard_solve(&VelocityState::zeros(&g, 0.0), &cfg, 0.1).unwrap();
    assert_eq!(out.iterations, 0);
    assert!(out.trajectory.iter().all(|s| s.magnitudes().iter().all(|&m| m == 0.0)));
}

#[test]
fn linear_picard_matches_heat_closed_form() {
    for a in [0.0, 0.5, 1.5] {
        let g = small(a);
        let mut cfg = SolverConfig::new(g.clone(), 0.8, 2.0 * a + 6.0).unwrap();
        cfg.nonlinear = false;
        let s = 0.5;
        let u0 = initial::gaussian_shear(&g, s, 1.0).unwrap();
        let out = picard_solve(&u0, &cfg, 0.5).unwrap();
        for st in &out.trajectory {
            let exact = initial::gaussian_shear_exact(&g, s, 1.0, cfg.nu, st.t);
            let err = st.components[0]
                .values
                .iter()
                .zip(&exact.values)
                .map(|(x, y)| (x - y).abs())
                .fold(0.0, f64::max);
            assert!(err <= 1e-6 * exact.max_abs(), "alpha {a}, t {}: {err:e}", st.t);
        }
    }
}

#[test]
fn small_data_contracts_and_solves_the_mild_equation() {
    let g = small(0.0);
    let cfg = SolverConfig::new(g.clone(), 1.0, 6.0).unwrap();
    let k = calibrate_constants(&cfg).unwrap();
    let u0 = initial::divergence_free_random(&g, 1, 2.0, 0.5).unwrap();
    let t = 0.5 * existence_time(u0.lp_norm(cfg.p).unwrap(), &cfg, k.c_pad);
    let out = picard_solve(&u0, &cfg, t).unwrap();
    assert!(out.iterations <= cfg.picard_max_iter);
    assert!(out.ratios.iter().all(|&r| r <= 0.5), "{:?}", out.ratios);
    assert!(mild_residual(&out, &cfg).unwrap() <= 10.0 * cfg.picard_tol);
}

#[test]
fn picard_reports_contraction_failure() {
    let g = small(0.0);
    let mut cfg = SolverConfig::new(g.clone(), 0.05, 6.0).unwrap();
    cfg.picard_max_iter = 3;
    let u0 = initial::divergence_free_random(&g, 1, 3.0, 50.0).unwrap();
    match picard_solve(&u0, &cfg, 1.0) {
        Err(WnsError::ContractionFailure { iterations, .. }) => assert_eq!(iterations, 3),
        other => panic!("expected contraction failure, got {other:?}"),
    }
}

#[test]
fn picard_rejects_divergent_data() {
    let g = small(0.0);
    let cfg = SolverConfig::new(g.clone(), 1.0, 6.0).unwrap();
    let mut u0 = VelocityState::zeros(&g, 0.0);
    u0.components[0] = PhysicalField::from_fn(&g, |x| x[0].sin() * (-x[1] * x[1]).exp());
    assert!(matches!(picard_solve(&u0, &cfg, 0.1), Err(WnsError::InvalidArgument(_))));
}

#[test]
fn existence_time_arithmetic() {
    let g = small(0.0);
    let cfg = SolverConfig::new(g, 1.0, 6.0).unwrap();
    assert!((existence_time(1.0, &cfg, 1.0) - 1.0).abs() < 1e-15);
    let ratio = existence_time(1.0, &cfg, 3.0) / existence_time(2.0, &cfg, 3.0);
    assert!((ratio - 16.0).abs() < 1e-12);
    assert!(existence_time(0.0, &cfg, 1.0).is_infinite());
    let big = SolverConfig::new(small(0.0), 1.0, 1e9).unwrap();
    assert!((1.0 / big.theta() - 2.0).abs() < 1e-6);
}

#[test]
fn march_of_zero_data_records_zero_norms() {
    let g = small(0.0);
    let mut cfg = SolverConfig::new(g.clone(), 1.0, 6.0).unwrap();
    cfg.t_end = 0.05;
    let out = march(&VelocityState::zeros(&g, 0.0), &cfg).unwrap();
    assert_eq!(out.status, MarchStatus::Completed);
    assert_eq!(out.series.len(), 6);
    assert!(out.series.lp_norms.iter().chain(&out.series.l2_norms).all(|&v| v == 0.0));
}

#[test]
fn stokes_march_does_not_increase_energy() {
    let g = small(0.5);
    let mut cfg = SolverConfig::new(g.clone(), 1.0, 7.0).unwrap();
    cfg.nonlinear = false;
    cfg.t_end = 0.2;
    let u0 = initial::divergence_free_random(&g, 9, 2.5, 1.0).unwrap();
    let out = march(&u0, &cfg).unwrap();
    for w in out.series.l2_norms.windows(2) {
        assert!(w[1] <= w[0] * (1.0 + 1e-12), "{} -> {}", w[0], w[1]);
    }
}

#[test]
fn shear_flow_march_follows_exact_decay() {
    // The nonlinear term of a shear flow vanishes, so the full solver must
    // reproduce the heat closed form.
    let g = small(0.0);
    let mut cfg = SolverConfig::new(g.clone(), 0.5, 6.0).unwrap();
    cfg.t_end = 0.3;
    cfg.dt = 0.05;
    let u0 = initial::gaussian_shear(&g, 0.5, 0.3).unwrap();
    let out = march(&u0, &cfg).unwrap();
    let exact = initial::gaussian_shear_exact(&g, 0.5, 0.3, cfg.nu, out.final_state.t);
    let err = out.final_state.components[0]
        .values
        .iter()
        .zip(&exact.values)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    assert!(err <= 1e-6 * exact.max_abs(), "{err:e}");
}

#[test]
fn march_preserves_divergence_and_flags_overflow() {
    let g = small(0.0);
    let mut cfg = SolverConfig::new(g.clone(), 1.0, 6.0).unwrap();
    cfg.t_end = 0.05;
    let u0 = initial::divergence_free_random(&g, 4, 2.0, 0.5).unwrap();
    let out = march(&u0, &cfg).unwrap();
    for (div, l2) in out.series.div_norms.iter().zip(&out.series.l2_norms) {
        assert!(*div <= 1e-10 * l2.max(1.0), "{div:e}");
    }
    cfg.overflow_guard = 1e-3;
    let out = march(&u0, &cfg).unwrap();
    assert!(matches!(out.status, MarchStatus::BlowupSuspected { .. }));
}

#[test]
fn pressure_gradient_cancels_the_gradient_part_of_the_flux() {
    let g = small(0.5);
    let ws = Workspace::new(&g, false);
    let u = initial::divergence_free_random(&g, 21, 2.0, 1.0).unwrap();
    let spec = ws.to_spectral(&u).unwrap();
    let flux = ws.flux(&spec, &spec);
    let mut projected = flux.clone();
    ws.project(&mut projected);
    let p = ws.pressure(&spec);
    let f = &ws.freq;
    let scale = flux.iter().map(|c| max_abs(c)).fold(0.0, f64::max);
    for j in 0..2 {
        let residual: Vec<Complex64> = (0..f.len())
            .map(|n| flux[j][n] - projected[j][n] + I * f.lambda[j][n] * p[n])
            .collect();
        assert!(max_abs(&residual) <= 1e-8 * scale, "component {j}");
    }
    let zero = (0..f.len()).find(|&n| f.lambda_sq[n] == 0.0);
    if let Some(n) = zero {
        assert_eq!(p[n], Complex64::new(0.0, 0.0));
    }
    let zero_p = pressure_diagnostic(&VelocityState::zeros(&g, 0.0), true).unwrap();
    assert!(zero_p.values.iter().all(|&v| v == 0.0));
}
