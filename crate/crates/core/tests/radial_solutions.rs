use approx::assert_relative_eq;
use biharmonic_core::exponents::is_singular_solution_stable;
use biharmonic_core::radialode::{
    integrate, log_grid, relative_residual_on, residual, shoot_entire, singular_field, stability_form,
    IntegrationConfig, Termination,
};
use biharmonic_core::ProblemParams;

fn params(n: u32, p: f64) -> ProblemParams {
    ProblemParams::new(n, p).unwrap()
}

#[test]
fn shooting_gives_decaying_entire_solution() {
    let pr = params(13, 3.0);
    let s = shoot_entire(pr, 1.0, &IntegrationConfig::default()).unwrap();
    assert_eq!(s.termination, Termination::ReachedEnd);
    assert!(s.bracket.0 <= s.b_star && s.b_star <= s.bracket.1);
    assert!(s.bracket.1 - s.bracket.0 <= 4.0 * f64::EPSILON * s.b_star.abs());
    assert!((s.decay_exponent + 2.0).abs() < 0.02, "decay {}", s.decay_exponent);
    assert!(s.field.u().iter().all(|&u| u > 0.0));
    let max_u = s.field.u().iter().fold(0.0f64, |m, u| m.max(u.abs()));
    assert!(residual(&s.field).unwrap() <= 1e-6 * (1.0 + max_u.powf(3.0)));
}

#[test]
fn shooting_respects_the_scaling_law() {
    let pr = params(13, 3.0);
    let cfg = IntegrationConfig::default();
    let one = shoot_entire(pr, 1.0, &cfg).unwrap();
    let sixteen = shoot_entire(pr, 16.0, &cfg).unwrap();
    // u_16(r) = 16 u_1(16^{(p-1)/4} r) = 16 u_1(4 r)
    for r in [0.05, 0.3, 1.0, 2.5, 10.0, 20.0] {
        let lhs = sixteen.field.sample(r).unwrap().u;
        let rhs = 16.0 * one.field.sample(4.0 * r).unwrap().u;
        assert_relative_eq!(lhs, rhs, max_relative = 1e-7);
    }
    assert_relative_eq!(sixteen.b_star, 256.0 * one.b_star, max_relative = 1e-9);
}

#[test]
fn shooting_is_deterministic_and_vanishes_with_a() {
    let pr = params(13, 3.0);
    let cfg = IntegrationConfig::default();
    assert_eq!(
        shoot_entire(pr, 1.0, &cfg).unwrap(),
        shoot_entire(pr, 1.0, &cfg).unwrap()
    );
    let tiny = shoot_entire(pr, 1e-4, &cfg).unwrap();
    assert!(tiny.b_star.abs() < 1e-7);
    assert!(shoot_entire(pr, 0.0, &cfg).is_err());
    assert!(shoot_entire(params(8, 2.0), 1.0, &cfg).is_err());
}

#[test]
fn integrator_error_follows_the_tolerance() {
    let pr = params(13, 3.0);
    let run = |tol: f64| {
        let cfg = IntegrationConfig {
            rel_tol: tol,
            abs_tol: tol * 1e-2,
            r_max: 2.0,
            max_step_ratio: 1.0,
            ..Default::default()
        };
        let f = integrate(pr, 1.0, -0.7, &cfg).unwrap().field;
        *f.u().last().unwrap()
    };
    let reference = run(1e-13);
    let errs: Vec<f64> = [1e-5, 1e-7, 1e-9].iter().map(|&t| (run(t) - reference).abs()).collect();
    assert!(errs[1] < errs[0] / 10.0 && errs[2] < errs[1] / 10.0, "{errs:?}");
}

#[test]
fn integration_is_scaling_equivariant() {
    let pr = params(13, 3.0);
    let g = pr.gamma();
    let cfg = IntegrationConfig {
        r_max: 3.0,
        ..Default::default()
    };
    let (a, b) = (1.0, -0.6);
    let base = integrate(pr, a, b, &cfg).unwrap().field;
    for lambda in [0.5f64, 2.0] {
        let scaled = integrate(pr, lambda.powf(g) * a, lambda.powf(g + 2.0) * b, &cfg)
            .unwrap()
            .field;
        for r in [0.1, 0.5, 1.0] {
            let expected = lambda.powf(g) * base.sample(lambda * r).unwrap().u;
            assert_relative_eq!(scaled.sample(r).unwrap().u, expected, max_relative = 1e-9);
        }
    }
}

#[test]
fn singular_residual_is_at_machine_level() {
    for (n, p) in [(13, 3.0), (16, 3.0), (13, 30.0)] {
        let f = singular_field(params(n, p), &log_grid(0.25, 4.0, 4001)).unwrap();
        assert!(relative_residual_on(&f, 0.5, 2.0).unwrap() <= 1e-8);
    }
}

/// `φ = r^{-s} η(log r)` with a smooth bump `η` on `[t0, t1]`.
fn test_profile(grid: &[f64], s: f64, t0: f64, t1: f64) -> Vec<f64> {
    grid.iter()
        .map(|&r| {
            let t = (r.ln() - t0) / (t1 - t0);
            if t <= 0.0 || t >= 1.0 {
                0.0
            } else {
                r.powf(-s) * (-1.0 / (t * (1.0 - t))).exp()
            }
        })
        .collect()
}

#[test]
fn stability_form_sign_matches_the_predicate() {
    let grid = log_grid(1e-3, 1e3, 6001);
    let unstable = params(13, 3.0);
    assert!(!is_singular_solution_stable(unstable).unwrap());
    let f = singular_field(unstable, &grid).unwrap();
    let phi = test_profile(&grid, 4.5, -5.0, 5.0);
    assert!(stability_form(&f, &phi).unwrap() < 0.0);

    let stable = params(19, 3.0);
    assert!(is_singular_solution_stable(stable).unwrap());
    let f = singular_field(stable, &grid).unwrap();
    for s in [7.5, 7.0, 8.0, 6.0, 9.0] {
        for (t0, t1) in [(-6.0, 6.0), (-2.0, 2.0), (-1.0, 3.0), (0.0, 0.5)] {
            let phi = test_profile(&grid, s, t0, t1);
            assert!(stability_form(&f, &phi).unwrap() >= 0.0, "s {s} window ({t0}, {t1})");
        }
    }
}
