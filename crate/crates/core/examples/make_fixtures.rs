//! Regenerates the shipped fixtures under `fixtures/`.
//!
//! ```text
//! cargo run -p pea-design --example make_fixtures -- fixtures
//! ```

use std::f64::consts::TAU;
use std::fs;
use std::path::{Path, PathBuf};

use pea_design::{sign, MotorParams, MotorTrace, TaskTrajectory};

/// Periodic task with analytic derivatives. Position and load torque are
/// sums of harmonics of `1/period`; the load leans on a spring `k` with
/// preload `tau0` so that a parallel spring near `(k, tau0)` helps.
struct Shape {
    name: &'static str,
    period: f64,
    q: &'static [(f64, f64)],
    k: f64,
    tau0: f64,
    extra: &'static [(f64, f64)],
}

fn harmonics(terms: &[(f64, f64)], w: f64, t: f64) -> [f64; 3] {
    let mut out = [0.0; 3];
    for (k, &(amp, phase)) in terms.iter().enumerate() {
        let wk = w * (k + 1) as f64;
        let arg = wk * t + phase;
        out[0] += amp * arg.sin();
        out[1] += amp * wk * arg.cos();
        out[2] -= amp * wk * wk * arg.sin();
    }
    out
}

fn task(shape: &Shape, n: usize) -> TaskTrajectory<f64> {
    let w = TAU / shape.period;
    let t: Vec<f64> = (0..n).map(|i| shape.period * i as f64 / (n - 1) as f64).collect();
    let mut q = Vec::with_capacity(n);
    let mut dq = Vec::with_capacity(n);
    let mut ddq = Vec::with_capacity(n);
    let mut tau = Vec::with_capacity(n);
    for &ti in &t {
        let [p, v, a] = harmonics(shape.q, w, ti);
        q.push(p);
        dq.push(v);
        ddq.push(a);
        tau.push(shape.k * p - shape.tau0 + harmonics(shape.extra, w, ti)[0]);
    }
    TaskTrajectory::new(shape.name, t, q, Some(dq), Some(ddq), tau).expect("fixture task is valid")
}

const SHAPES: [Shape; 4] = [
    Shape {
        name: "walking",
        period: 1.1,
        q: &[(0.18, 0.3), (0.06, -1.1), (0.02, 0.7)],
        k: 3.0,
        tau0: -0.6,
        extra: &[(0.9, 1.4), (0.4, 0.2), (0.2, -0.5)],
    },
    Shape {
        name: "stair_ascent",
        period: 1.3,
        q: &[(0.22, -0.4), (0.05, 0.9), (0.02, 2.1)],
        k: 2.2,
        tau0: -0.9,
        extra: &[(1.1, 0.6), (0.5, -1.3), (0.1, 0.4)],
    },
    Shape {
        name: "stair_descent",
        period: 1.2,
        q: &[(0.25, 0.8), (0.07, 0.1), (0.03, -0.9)],
        k: 3.6,
        tau0: -0.2,
        extra: &[(0.8, -0.7), (0.6, 1.9), (0.2, 0.0)],
    },
    Shape {
        name: "sit_to_stand",
        period: 2.5,
        q: &[(0.12, -1.6), (0.04, 0.5), (0.01, 1.2)],
        k: 1.5,
        tau0: -1.2,
        extra: &[(0.7, 0.9), (0.3, -0.4), (0.1, 1.1)],
    },
];

/// Unloaded-rig trace: position chirp sweeping 0.2 → 5 Hz over 10 s with
/// torques forward-simulated from the motor's friction and inertia.
fn chirp_trace(motor: &MotorParams<f64>) -> MotorTrace<f64> {
    let (n, duration, f0, f1, amp) = (2000usize, 10.0, 0.2, 5.0, 20.0);
    let rate = (f1 - f0) / duration;
    let mut trace = MotorTrace {
        t: Vec::with_capacity(n),
        q_m: Vec::with_capacity(n),
        dq_m: Some(Vec::with_capacity(n)),
        ddq_m: Some(Vec::with_capacity(n)),
        tau_m: Vec::with_capacity(n),
    };
    for i in 0..n {
        let t = duration * i as f64 / (n - 1) as f64;
        let phase = TAU * (f0 * t + 0.5 * rate * t * t);
        let w = TAU * (f0 + rate * t);
        let dw = TAU * rate;
        let q = amp * phase.sin();
        let dq = amp * w * phase.cos();
        let ddq = amp * (dw * phase.cos() - w * w * phase.sin());
        trace.t.push(t);
        trace.q_m.push(q);
        trace.dq_m.as_mut().unwrap().push(dq);
        trace.ddq_m.as_mut().unwrap().push(ddq);
        trace.tau_m.push(motor.j_m * ddq + motor.eta * dq + motor.mu * sign(dq));
    }
    trace
}

fn write(path: &Path, text: &str) {
    fs::write(path, text).unwrap_or_else(|e| panic!("writing {}: {e}", path.display()));
    println!("wrote {}", path.display());
}

fn main() {
    let root = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "fixtures".into()));
    let tasks_dir = root.join("tasks");
    fs::create_dir_all(&tasks_dir).expect("create fixture directory");

    let motor = MotorParams::<f64>::actpack41();
    write(&root.join("actpack41.json"), &(serde_json::to_string_pretty(&motor).unwrap() + "\n"));

    for shape in &SHAPES {
        write(&tasks_dir.join(format!("{}.csv", shape.name)), &task(shape, 201).to_csv());
    }
    write(&tasks_dir.join("walking.json"), &(task(&SHAPES[0], 201).to_json() + "\n"));

    let trace = chirp_trace(&motor);
    write(&root.join("chirp_trace.json"), &(serde_json::to_string(&trace).unwrap() + "\n"));
}
