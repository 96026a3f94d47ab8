mod common;

use common::soma::*;
use pea_design::*;

/// Instances where an extra duty task pushes the motor rows into the active
/// set. The optimum then sits at the tip of a narrow wedge between a task
/// ellipse and a row, so a 1001² grid only brackets it within its cell bound.
#[test]
fn binding_rows_agree_within_cell_bound() {
    let resolution = 1001;
    let mut rows_active = 0;
    for seed in 0..20 {
        let inst = soma_instance(seed, true);
        let report = solve_soma(&inst.problem, 1e-8).unwrap();
        assert_eq!(report.status, SolveStatus::Optimal, "{}", inst.label);
        assert!(inst.problem.is_feasible(&report.x_star, 1e-8), "{}", inst.label);
        rows_active += report.active_constraints.iter().any(|a| a.kind == ConstraintKind::Linear) as usize;

        let (grid, bounds) = certified_oracle(&inst.problem, resolution).unwrap();
        let f_grid = inst.problem.objective.evaluate(&grid);
        let f_solver = report.objective_value;
        assert!(f_solver <= f_grid + 1e-9 * f_grid.abs(), "{}: solver {f_solver} above grid {f_grid}", inst.label);
        let bound = cell_bound(&inst.problem.objective, &grid, bounds.cell(resolution));
        assert!(f_grid - f_solver <= bound, "{}: gap {} exceeds cell bound {bound}", inst.label, f_grid - f_solver);
    }
    assert!(rows_active >= 5, "only {rows_active} instances with a binding row");
}

/// Every active multiplier is nonnegative and the reported KKT residual is
/// small on the binding-row instances.
#[test]
fn binding_rows_carry_kkt_certificate() {
    for seed in 0..20 {
        let inst = soma_instance(seed, true);
        let report = solve_soma(&inst.problem, 1e-8).unwrap();
        for a in &report.active_constraints {
            assert!(a.multiplier >= 0.0, "{}: negative multiplier {a:?}", inst.label);
        }
        assert!(report.kkt_residual <= 1e-7, "{}: kkt {}", inst.label, report.kkt_residual);
    }
}
