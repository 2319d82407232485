use biharmonic_core::blowdown::pohozaev_residual;
use biharmonic_core::exponents::min_stable_dimension;
use biharmonic_core::navierbvp::{
    extremal_regularity_probe, trace_branch, BranchControl, ExtremalRegime, NavierProblem,
};
use biharmonic_core::ProblemParams;

fn params(n: u32, p: f64) -> ProblemParams {
    ProblemParams::new(n, p).unwrap()
}

fn control(cells: usize) -> BranchControl {
    BranchControl {
        cells,
        ..BranchControl::default()
    }
}

#[test]
fn branch_has_a_fold_with_stable_minimal_part() {
    let pr = params(6, 3.0);
    let br = trace_branch(pr, &control(50)).unwrap();
    let k = br.fold_index.expect("fold");
    let min = br.minimal();
    assert!(min.len() >= 5);
    for w in min.windows(2) {
        assert!(w[1].lambda > w[0].lambda);
        assert!(w[1].sup_norm > w[0].sup_norm);
        // minimal solutions increase pointwise with λ
        for (a, b) in w[0].profile.iter().zip(&w[1].profile) {
            assert!(b >= a, "{a} {b}");
        }
    }
    assert!(min.iter().all(|p| p.eig_min >= -1e-6));
    assert!(br.points[k..].iter().any(|p| p.eig_min < 0.0));
    assert!(br.lambda_star >= min.last().unwrap().lambda);
    assert!(br.points.iter().all(|p| p.lambda <= br.lambda_star * (1.0 + 1e-9)));
}

#[test]
fn branch_points_solve_the_problem() {
    let pr = params(6, 3.0);
    let br = trace_branch(pr, &control(40)).unwrap();
    let prob = NavierProblem::new(pr, 40).unwrap();
    for pt in &br.points {
        assert!(pt.residual <= 1e-12);
        assert!(prob.backward_error(pt.lambda, &pt.profile[..40]) <= 1e-12);
        let (bu, bv) = pt.boundary_values();
        assert!(bu <= 1e-10 && bv <= 1e-10, "{bu} {bv}");
        // discrete and shooting λ agree to discretization error
        assert!((pt.refined_lambda() - pt.lambda).abs() <= 0.05 * pt.lambda);
        let r = pt.field.r_max();
        let rep = pohozaev_residual(&pt.field, r).unwrap();
        assert!(rep.relative() <= 1e-6, "{:?}", rep);
    }
}

#[test]
fn fold_is_grid_converged_below_the_critical_dimension() {
    for p in [3.0, 2.0] {
        let rep = extremal_regularity_probe(params(6, p), &control(40)).unwrap();
        assert_eq!(rep.regime, ExtremalRegime::Bounded);
        assert!(
            rep.is_bounded_and_converged(0.01),
            "p={p} change {}",
            rep.relative_change
        );
        let rel = (rep.fine.lambda_star - rep.coarse.lambda_star).abs() / rep.fine.lambda_star;
        assert!(rel <= 0.01, "{rel}");
    }
}

#[test]
fn probe_reports_trend_above_the_critical_dimension() {
    let ctl = BranchControl {
        max_points: 40,
        refine: false,
        ..control(20)
    };
    let rep = extremal_regularity_probe(params(19, 3.0), &ctl).unwrap();
    assert_eq!(rep.critical_dimension, 19);
    assert_eq!(rep.regime, ExtremalRegime::TrendOnly);
    assert!(!rep.is_bounded_and_converged(1.0));
}

#[test]
fn rejects_bad_control() {
    let ctl = BranchControl {
        ds_min: 1.0,
        ..BranchControl::default()
    };
    assert!(trace_branch(params(6, 3.0), &ctl).is_err());
}

#[test]
fn refined_branch_stays_monotone_through_a_grid_fold() {
    let pr = params(13, 30.0);
    assert!(min_stable_dimension(30.0).unwrap() <= 13);
    let br = trace_branch(pr, &control(100)).unwrap();
    assert!(!br.unresolved);
    assert!(br.fold_index.is_some());
    for w in br.points.windows(2) {
        assert!(w[1].refined_lambda() > w[0].refined_lambda());
    }
    for pt in &br.points {
        let (bu, bv) = pt.boundary_values();
        assert!(bu <= 1e-10 && bv <= 1e-10, "{bu} {bv}");
    }
}
