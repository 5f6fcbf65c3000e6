use dbarlab::certify::{lemma1_check, theorem2_chain, Verdict, SUP_BOUND, THEOREM2_TOLERANCE};
use dbarlab::dbar::{picard_solve, picard_solve_from, profile_exact, rescale_solution, DbarProblem, DbarSolution};
use dbarlab::grid::make_grid;
use dbarlab::Complex64;

#[test]
fn warm_start_from_profile_converges() {
    let g = make_grid(1.0, 129).unwrap();
    let start = profile_exact(-0.5, g);
    let b = start.at_origin();
    assert!((b - Complex64::new(0.25, 0.0)).norm() < 1e-15);
    let sol = picard_solve_from(&DbarProblem::new(g, b), start).unwrap();
    assert!(sol.converged);
    assert!(sol.residual_sup <= 5.0 * g.spacing(), "{}", sol.residual_sup);
    assert!((sol.f.at_origin() - b).norm() <= 1e-12);
}

#[test]
fn converged_solutions_are_anchored() {
    let g = make_grid(1.0, 65).unwrap();
    for b in [
        Complex64::new(0.05, 0.0),
        Complex64::new(0.0, 0.05),
        Complex64::new(-0.03, 0.04),
        Complex64::new(0.5, 0.0),
    ] {
        let sol = picard_solve(&DbarProblem::new(g, b)).unwrap();
        assert!(sol.converged, "b={b}");
        assert!((sol.f.at_origin() - b).norm() <= 1e-12, "b={b}");
        assert!(sol.passes_gate(), "b={b}: {}", sol.residual_sup);
    }
}

#[test]
fn zero_anchor_gives_zero_solution() {
    let g = make_grid(1.0, 65).unwrap();
    let sol = picard_solve(&DbarProblem::new(g, Complex64::new(0.0, 0.0))).unwrap();
    assert!(sol.converged);
    assert_eq!(sol.residual_sup, 0.0);
    assert!(sol.f.values().iter().all(|v| v.norm() == 0.0));
}

// A solution on D_2 rescaled to D_1 solves the equation there with anchor b/4.
#[test]
fn rescaled_solution_stays_a_solution() {
    let g2 = make_grid(2.0, 129).unwrap();
    let b = Complex64::new(0.2, 0.0);
    let sol = picard_solve(&DbarProblem::new(g2, b)).unwrap();
    assert!(sol.converged);
    let f1 = rescale_solution(&sol.f, 2.0).unwrap();
    assert!((f1.at_origin() - b / 4.0).norm() <= 1e-12);
    let g1 = *f1.grid();
    let wrapped = DbarSolution::from_field(DbarProblem::new(g1, b / 4.0), f1, true).unwrap();
    assert!(wrapped.passes_gate(), "{} vs {}", wrapped.residual_sup, wrapped.residual_gate());
    assert!((wrapped.sup_f - sol.sup_f / 4.0).abs() <= 0.05 * sol.sup_f);
}

#[test]
fn solver_output_satisfies_lemma1() {
    let g = make_grid(1.0, 129).unwrap();
    let sol = picard_solve(&DbarProblem::new(g, Complex64::new(0.05, 0.0))).unwrap();
    let rep = lemma1_check(&sol.f, 1e-3).unwrap();
    assert!(rep.hypothesis_ok);
    assert!(rep.min_slack >= -rep.tolerance_used, "{} < -{}", rep.min_slack, rep.tolerance_used);
}

// Small anchors in eight directions: every converged solution is large.
#[test]
fn no_small_solutions_in_any_direction() {
    let g = make_grid(1.0, 129).unwrap();
    for k in 0..8 {
        let b = Complex64::from_polar(0.01, k as f64 * std::f64::consts::FRAC_PI_4);
        let sol = picard_solve(&DbarProblem::new(g, b)).unwrap();
        if !(sol.converged && sol.passes_gate()) {
            continue;
        }
        assert!(sol.sup_f >= SUP_BOUND - THEOREM2_TOLERANCE, "k={k}: sup {}", sol.sup_f);
        let rep = theorem2_chain(&sol).unwrap();
        assert_eq!(rep.verdict, Verdict::Holds, "k={k}");
    }
}
