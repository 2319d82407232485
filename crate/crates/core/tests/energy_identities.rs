use approx::assert_relative_eq;
use biharmonic_core::blowdown::homogeneity_deviation;
use biharmonic_core::energy::{
    density_estimate, energy_profile, energy_radial, homogeneous_energy, negative_energy_profile,
    negative_energy_radial, negative_homogeneous_profile,
};
use biharmonic_core::exponents::negative_exponent_condition;
use biharmonic_core::radialode::{integrate_with, log_grid, shoot_entire, singular_field, IntegrationConfig};
use biharmonic_core::{Nonlinearity, ProblemParams, RadialField};

fn params(n: u32, p: f64) -> ProblemParams {
    ProblemParams::new(n, p).unwrap()
}

/// E(r) straight from its definition, with the d/dr terms differenced.
fn energy_by_differences(field: &RadialField, r: f64) -> f64 {
    let pr = field.params();
    let (n, g, omega) = (pr.nf(), pr.gamma(), pr.derived().omega);
    let coeff = 0.5 * g * (n - 2.0 - g);
    let s = field.sample(r).unwrap();
    let sphere = |rho: f64, h: &dyn Fn(f64) -> f64| omega * rho.powf(n - 1.0) * h(rho);
    let u = |rho: f64| field.sample(rho).unwrap().u;
    let w = |rho: f64| {
        let t = field.sample(rho).unwrap();
        g * t.u / rho + t.du
    };
    let term_u2 = |rho: f64| rho.powf(2.0 * g + 2.0 - n) * sphere(rho, &|x| u(x) * u(x));
    let term_w2 = |rho: f64| rho.powf(2.0 * g + 1.0 - n) * sphere(rho, &|x| w(x) * w(x));
    let h = 1e-4 * r;
    let d = |f: &dyn Fn(f64) -> f64| (f(r + h) - f(r - h)) / (2.0 * h);
    r.powf(2.0 * g + 4.0 - n) * omega * (0.5 * s.vol_v2 - s.vol_f)
        + coeff * r.powf(2.0 * g + 1.0 - n) * sphere(r, &|x| u(x) * u(x))
        + coeff * d(&term_u2)
        + 0.5 * r.powi(3) * d(&term_w2)
}

#[test]
fn expanded_energy_matches_its_definition() {
    let pr = params(13, 3.0);
    let s = shoot_entire(pr, 1.0, &IntegrationConfig::default()).unwrap();
    for r in [0.05, 0.3, 1.0, 2.0, 5.0, 12.0, 40.0] {
        let e = energy_radial(&s.field, r).unwrap();
        let oracle = energy_by_differences(&s.field, r);
        assert_relative_eq!(e, oracle, max_relative = 1e-6);
    }
    let sing = singular_field(params(16, 3.0), &log_grid(0.2, 5.0, 500)).unwrap();
    for r in [0.5, 1.0, 2.0] {
        assert_relative_eq!(
            energy_radial(&sing, r).unwrap(),
            energy_by_differences(&sing, r),
            max_relative = 1e-6
        );
    }
}

#[test]
fn singular_energy_is_constant_and_homogeneous() {
    let pr = params(16, 3.0);
    let f = singular_field(pr, &log_grid(0.25, 4.0, 800)).unwrap();
    let prof = energy_profile(&f, &log_grid(0.5, 2.0, 41)).unwrap();
    assert!(prof.relative_variation() <= 1e-8);
    assert!(homogeneity_deviation(&f, 0.5, 2.0).unwrap() <= 1e-10);
    assert!(prof.lower_bound.iter().all(|&b| b.abs() < 1e-20));
    let expected = homogeneous_energy(pr, 960f64.sqrt()).unwrap();
    let d = density_estimate(&f, &[2.0, 1.0, 0.5]).unwrap();
    assert_relative_eq!(d.extrapolated, expected, max_relative = 1e-10);
}

#[test]
fn shooting_solution_is_monotone_with_lower_bound() {
    let pr = params(13, 3.0);
    let s = shoot_entire(pr, 1.0, &IntegrationConfig::default()).unwrap();
    let prof = energy_profile(&s.field, &log_grid(0.1, 20.0, 2000)).unwrap();
    assert!(prof.is_monotone());
    assert!(prof.satisfies_lower_bound(), "min defect {}", prof.min_defect());
    // E stays bounded and levels off
    let late = energy_profile(&s.field, &log_grid(30.0, 50.0, 20)).unwrap();
    let spread = late.e.iter().fold(0.0f64, |m, e| m.max(*e)) - late.e[0];
    assert!(spread.abs() < 0.05 * late.e[0].abs());
}

#[test]
fn density_vanishes_for_smooth_solutions() {
    let pr = params(13, 3.0);
    let s = shoot_entire(pr, 1.0, &IntegrationConfig::default()).unwrap();
    let d = density_estimate(&s.field, &[0.04, 0.02, 0.01, 0.005]).unwrap();
    assert!(d.extrapolated.abs() < 1e-8, "{}", d.extrapolated);
    assert!(d.is_consistent(1e-8));
}

#[test]
fn homogeneity_faces_agree() {
    // constant energy on a window coincides with a vanishing defect there
    let pr = params(16, 3.0);
    let f = singular_field(pr, &log_grid(0.25, 4.0, 800)).unwrap();
    let constant = energy_profile(&f, &log_grid(0.5, 2.0, 21))
        .unwrap()
        .relative_variation()
        <= 1e-8;
    let flat = homogeneity_deviation(&f, 0.5, 2.0).unwrap() <= 1e-10;
    assert!(constant && flat);
    let s = shoot_entire(params(13, 3.0), 1.0, &IntegrationConfig::default()).unwrap();
    let constant = energy_profile(&s.field, &log_grid(0.5, 2.0, 21))
        .unwrap()
        .relative_variation()
        <= 1e-8;
    let flat = homogeneity_deviation(&s.field, 0.5, 2.0).unwrap() <= 1e-10;
    assert!(!constant && !flat);
}

fn admissible_negative_exponent(n: u32) -> f64 {
    let mut p: f64 = 1.1;
    while !negative_exponent_condition(n, p).unwrap() {
        p += 0.1;
        assert!(p < 100.0);
    }
    p
}

#[test]
fn negative_exponent_energy() {
    let n = 20;
    let p = admissible_negative_exponent(n);
    let pr = params(n, p);
    let hom = negative_homogeneous_profile(pr, &log_grid(0.1, 10.0, 1000)).unwrap();
    let e: Vec<f64> = log_grid(0.2, 5.0, 15)
        .iter()
        .map(|&r| negative_energy_radial(&hom, r).unwrap())
        .collect();
    for x in &e {
        assert_relative_eq!(*x, e[0], max_relative = 1e-6);
    }
    let cfg = IntegrationConfig {
        r_max: 20.0,
        ..Default::default()
    };
    let generic = integrate_with(pr, Nonlinearity::NegativePower { p }, 1.0, 1.0, &cfg)
        .unwrap()
        .field;
    let prof = negative_energy_profile(&generic, &log_grid(1e-3, 20.0, 200)).unwrap();
    assert!(prof.is_monotone());
    assert!(prof.satisfies_lower_bound());
}
