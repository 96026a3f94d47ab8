//! The pipeline instantiated at `f32`, checked against the `f64` run.

use pea_design::*;

fn sinusoid<T: Scalar>(n: usize) -> TaskTrajectory<T> {
    let t: Vec<T> = (0..n).map(|i| T::from_f64(std::f64::consts::TAU * i as f64 / (n - 1) as f64).unwrap()).collect();
    let q: Vec<T> = t.iter().map(|x| x.sin()).collect();
    TaskTrajectory::new("sin", t, q.clone(), None, None, q).unwrap()
}

fn harmonic<T: Scalar>(n: usize, k: f64, tau0: f64) -> TaskTrajectory<T> {
    let lit = |v: f64| T::from_f64(v).unwrap();
    let t: Vec<f64> = (0..n).map(|i| 1.2 * i as f64 / (n - 1) as f64).collect();
    let w = std::f64::consts::TAU / 1.2;
    let q: Vec<f64> = t.iter().map(|t| 0.2 * (w * t).sin() + 0.05 * (2.0 * w * t + 0.3).sin()).collect();
    let dq: Vec<f64> = t.iter().map(|t| 0.2 * w * (w * t).cos() + 0.1 * w * (2.0 * w * t + 0.3).cos()).collect();
    let ddq: Vec<f64> = t.iter().map(|t| -0.2 * w * w * (w * t).sin() - 0.2 * w * w * (2.0 * w * t + 0.3).sin()).collect();
    let tau: Vec<f64> = t.iter().zip(&q).map(|(t, q)| k * q - tau0 + 0.4 * (3.0 * w * t).sin()).collect();
    let conv = |v: &[f64]| v.iter().map(|x| lit(*x)).collect::<Vec<T>>();
    TaskTrajectory::new("harmonic", conv(&t), conv(&q), Some(conv(&dq)), Some(conv(&ddq)), conv(&tau)).unwrap()
}

#[test]
fn sinusoid_at_single_precision() {
    let obj = rms_quadratic(&effort_affine_generic(&sinusoid::<f32>(2001))).unwrap();
    let pi = std::f32::consts::PI;
    assert!((obj.matrix[0][0] - pi).abs() < 1e-3);
    assert!((obj.matrix[1][1] - 2.0 * pi).abs() < 1e-3);
    assert!((obj.vector[0] + pi).abs() < 1e-3);
    let report = solve_sosa(&obj, None, 1e-5).unwrap();
    assert!((report.x_star.k_p - 1.0).abs() < 1e-4 && report.x_star.tau_p.abs() < 1e-4, "{:?}", report.x_star);
}

#[test]
fn soma_at_single_precision_tracks_double() {
    let m64 = MotorParams::<f64>::actpack41();
    let m32 = MotorParams::<f32>::actpack41();
    let specs = [(4.0, -0.5), (2.0, -0.8), (3.0, 0.3)];
    let solve = |f: &dyn Fn(f64, f64) -> QuadraticObjective<f64>| {
        let objs: Vec<_> = specs.iter().map(|(k, t)| f(*k, *t)).collect();
        DesignProblem::new(objs[0].clone()).with_constraints(objs[1..].to_vec())
    };
    let p64 = solve(&|k, t| rms_quadratic(&effort_affine_motor(&harmonic::<f64>(300, k, t), &m64).unwrap()).unwrap());
    let objs32: Vec<QuadraticObjective<f32>> = specs
        .iter()
        .map(|(k, t)| rms_quadratic(&effort_affine_motor(&harmonic::<f32>(300, *k, *t), &m32).unwrap()).unwrap())
        .collect();
    let p32 = DesignProblem::new(objs32[0].clone()).with_constraints(objs32[1..].to_vec());
    let r64 = solve_soma(&p64, 1e-8).unwrap();
    let r32 = solve_soma(&p32, 1e-5).unwrap();
    assert_eq!(r32.status, SolveStatus::Optimal);
    assert!((r32.x_star.k_p as f64 - r64.x_star.k_p).abs() < 1e-2 * (1.0 + r64.x_star.k_p.abs()));
    assert!((r32.x_star.tau_p as f64 - r64.x_star.tau_p).abs() < 1e-2 * (1.0 + r64.x_star.tau_p.abs()));
    assert!(r32.objective_value <= p32.objective.constant);
}

#[test]
fn energy_at_single_precision() {
    let m32 = MotorParams::<f32>::actpack41();
    let m64 = MotorParams::<f64>::actpack41();
    let t32 = harmonic::<f32>(400, 3.0, -0.4);
    let t64 = harmonic::<f64>(400, 3.0, -0.4);
    let x32 = DesignPoint::new(2.5f32, -0.3);
    let x64 = DesignPoint::new(2.5f64, -0.3);
    let e32 = evaluate_design(&x32, &t32, Some(&m32)).unwrap().energy_per_stride.unwrap();
    let e64 = evaluate_design(&x64, &t64, Some(&m64)).unwrap().energy_per_stride.unwrap();
    assert!((e32 as f64 - e64).abs() <= 1e-4 * e64.abs(), "{e32} vs {e64}");
    let aliases: pea_design::f32::TaskMetrics = evaluate_design(&x32, &t32, None).unwrap();
    assert!(aliases.rms_effort >= 0.0);
}
