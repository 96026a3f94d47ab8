//! Randomized SOMA instances and a solver-independent grid oracle.

use pea_design::constraints::{feasibility_constraints_with, FeasibilityOptions};
use pea_design::*;
use rand::Rng;

use super::*;

pub struct Instance {
    pub problem: DesignProblem<f64>,
    pub label: String,
}

/// One objective and three constraint tasks scattered around a shared spring,
/// with motor feasibility rows from every task. `with_duty` adds a task
/// that contributes rows only, prefers the opposite spring, and runs close to
/// a lowered peak limit, so the rows bind.
pub fn soma_instance(seed: u64, with_duty: bool) -> Instance {
    let motor = MotorParams::actpack41();
    let mut rng = rng(1000 + seed);
    loop {
        let stiffness: f64 = rng.gen_range(2.0..15.0);
        let preload: f64 = rng.gen_range(-1.0..1.0);
        let mut tasks: Vec<TaskTrajectory<f64>> = (0..4)
            .map(|k| {
                // The objective task prefers a stiffer spring than the others.
                let spread = if k == 0 { rng.gen_range(1.6..2.4) } else { rng.gen_range(0.6..1.1) };
                let shape = TaskShape {
                    stiffness: stiffness * spread,
                    preload: preload + rng.gen_range(-0.5..0.5),
                    position_amplitude: 4.0 / stiffness,
                    noise_amplitude: rng.gen_range(0.2..1.5),
                };
                random_task(&mut rng, &format!("task{k}"), 60, shape)
            })
            .collect();
        if with_duty {
            let shape = TaskShape {
                stiffness: -stiffness,
                preload: -preload,
                position_amplitude: 4.0 / stiffness,
                noise_amplitude: 0.2,
            };
            tasks.push(random_task(&mut rng, "duty", 60, shape));
        }
        let affines: Vec<AffineEffort<f64>> = tasks.iter().map(|t| effort_affine_motor(t, &motor).unwrap()).collect();
        let peak_b = affines.iter().flat_map(|a| a.b.iter()).fold(0.0f64, |m, b| m.max(b.abs()));
        if peak_b >= motor.tau_max() {
            continue;
        }
        let options = FeasibilityOptions {
            tau_max: with_duty.then_some(peak_b * 1.05),
            continuous_rows: false,
        };
        let rows: Vec<LinearConstraints<f64>> = affines
            .iter()
            .map(|a| feasibility_constraints_with(a, &motor, &options).unwrap())
            .collect();
        let objs: Vec<QuadraticObjective<f64>> = affines[..4].iter().map(|a| rms_quadratic(a).unwrap()).collect();
        let problem = DesignProblem {
            objective: objs[0].clone(),
            quad_constraints: objs[1..].to_vec(),
            linear: Some(LinearConstraints::concat(&rows)),
            margins: Vec::new(),
        };
        return Instance {
            problem,
            label: format!("seed {seed}"),
        };
    }
}

/// Bounding box of `{x : xᵀQx + 2qᵀx + offset ≤ 0}`: centre `−Q⁻¹q` with
/// half-widths `√(P_ii)`, `P = Q⁻¹ (qᵀQ⁻¹q − offset)`.
pub fn ellipse_box(obj: &QuadraticObjective<f64>, offset: f64) -> ([f64; 2], [f64; 2]) {
    let m = obj.matrix;
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let inv = [[m[1][1] / det, -m[0][1] / det], [-m[1][0] / det, m[0][0] / det]];
    let c = cramer_center(&m, &obj.vector);
    let level = (-(obj.vector[0] * c[0] + obj.vector[1] * c[1]) - offset).max(0.0);
    let half = [(inv[0][0] * level).sqrt(), (inv[1][1] * level).sqrt()];
    ([c[0] - half[0], c[1] - half[1]], [c[0] + half[0], c[1] + half[1]])
}

/// Box around the intersection of every constraint ellipse and the objective
/// sublevel set `f ≤ level`; any optimum with value at most `level` lies
/// inside.
pub fn oracle_box(problem: &DesignProblem<f64>, level: f64) -> GridBox<f64> {
    let mut lo = [f64::NEG_INFINITY; 2];
    let mut hi = [f64::INFINITY; 2];
    let sets = problem
        .quad_constraints
        .iter()
        .map(|c| (c, 0.0))
        .chain(std::iter::once((&problem.objective, problem.objective.constant - level)));
    for (c, offset) in sets {
        let (l, h) = ellipse_box(c, offset);
        for i in 0..2 {
            lo[i] = lo[i].max(l[i]);
            hi[i] = hi[i].min(h[i]);
        }
    }
    for i in 0..2 {
        lo[i] = lo[i].min(0.0);
        hi[i] = hi[i].max(0.0);
        let pad = 1e-3 * (hi[i] - lo[i]).max(1e-9);
        lo[i] -= pad;
        hi[i] += pad;
    }
    GridBox {
        k_p: (lo[0], hi[0]),
        tau_p: (lo[1], hi[1]),
    }
}

/// Lower bound of `xᵀQx + 2qᵀx + offset` over the cell `center ± half`,
/// valid for PSD `Q`: the quadratic term is dropped and the linear term is
/// bounded by its worst corner.
pub fn cell_lower_bound(m: &[[f64; 2]; 2], q: &[f64; 2], offset: f64, center: &[f64; 2], half: &[f64; 2]) -> f64 {
    let x = center;
    let value = m[0][0] * x[0] * x[0] + 2.0 * m[0][1] * x[0] * x[1] + m[1][1] * x[1] * x[1] + 2.0 * (q[0] * x[0] + q[1] * x[1]) + offset;
    let g = [
        2.0 * (m[0][0] * x[0] + m[0][1] * x[1] + q[0]),
        2.0 * (m[1][0] * x[0] + m[1][1] * x[1] + q[1]),
    ];
    value - g[0].abs() * half[0] - g[1].abs() * half[1]
}

/// True unless interval bounds prove that no point of the cell is feasible
/// with objective at most `level`.
pub fn cell_may_hold(problem: &DesignProblem<f64>, center: &[f64; 2], half: &[f64; 2], level: f64) -> bool {
    let obj = &problem.objective;
    if cell_lower_bound(&obj.matrix, &obj.vector, obj.constant - level, center, half) > 0.0 {
        return false;
    }
    for c in &problem.quad_constraints {
        if cell_lower_bound(&c.matrix, &c.vector, 0.0, center, half) > 0.0 {
            return false;
        }
    }
    if let Some(lin) = &problem.linear {
        for (row, p) in lin.m.iter().zip(&lin.p) {
            let lower = row[0] * center[0] + row[1] * center[1] - row[0].abs() * half[0] - row[1].abs() * half[1];
            if lower > *p {
                return false;
            }
        }
    }
    true
}

/// Smallest box holding the origin and every cell of an `n × n` partition of
/// `bounds` that may contain a feasible point with objective at most `level`.
pub fn refine_box(problem: &DesignProblem<f64>, bounds: &GridBox<f64>, level: f64, n: usize) -> GridBox<f64> {
    let h = [(bounds.k_p.1 - bounds.k_p.0) / n as f64, (bounds.tau_p.1 - bounds.tau_p.0) / n as f64];
    let half = [0.5 * h[0], 0.5 * h[1]];
    let mut lo = [0.0f64; 2];
    let mut hi = [0.0f64; 2];
    for i in 0..n {
        for j in 0..n {
            let center = [bounds.k_p.0 + (i as f64 + 0.5) * h[0], bounds.tau_p.0 + (j as f64 + 0.5) * h[1]];
            if cell_may_hold(problem, &center, &half, level) {
                for d in 0..2 {
                    lo[d] = lo[d].min(center[d] - half[d]);
                    hi[d] = hi[d].max(center[d] + half[d]);
                }
            }
        }
    }
    GridBox {
        k_p: (lo[0], hi[0]),
        tau_p: (lo[1], hi[1]),
    }
}

/// Exhaustive grid search whose box is shrunk, without consulting the
/// solver, to the origin plus an interval-certified cover of the feasible
/// points no worse than the best grid value found so far.
pub fn certified_oracle(problem: &DesignProblem<f64>, resolution: usize) -> pea_design::Result<(DesignPoint<f64>, GridBox<f64>)> {
    let mut bounds = oracle_box(problem, problem.objective.constant);
    let mut best = grid_oracle(problem, &bounds, resolution)?;
    for _ in 0..2 {
        let level = problem.objective.evaluate(&best);
        for _ in 0..4 {
            bounds = refine_box(problem, &bounds, level, 200);
        }
        let candidate = grid_oracle(problem, &bounds, resolution)?;
        if problem.objective.evaluate(&candidate) < level {
            best = candidate;
        }
    }
    Ok((best, bounds))
}

/// Largest objective change across one grid cell around `x`.
pub fn cell_bound(obj: &QuadraticObjective<f64>, x: &DesignPoint<f64>, cell: (f64, f64)) -> f64 {
    let g = obj.gradient(x);
    let h = [cell.0, cell.1];
    let first = g[0].abs() * h[0] + g[1].abs() * h[1];
    let m = obj.matrix;
    let second = m[0][0] * h[0] * h[0] + 2.0 * m[0][1].abs() * h[0] * h[1] + m[1][1] * h[1] * h[1];
    first + second
}
