#![allow(dead_code)]

pub mod soma;

use std::f64::consts::{PI, TAU};

use pea_design::{DesignPoint, MotorParams, TaskTrajectory};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `q = τ = sin t` on `[0, 2π]`.
pub fn sinusoid(n: usize) -> TaskTrajectory<f64> {
    let t: Vec<f64> = (0..n).map(|i| TAU * i as f64 / (n - 1) as f64).collect();
    let q: Vec<f64> = t.iter().map(|x| x.sin()).collect();
    let dq = t.iter().map(|x| x.cos()).collect();
    let ddq = t.iter().map(|x| -x.sin()).collect();
    TaskTrajectory::new("sinusoid", t, q.clone(), Some(dq), Some(ddq), q).unwrap()
}

/// Parameters of a smooth periodic-looking task around a shared spring.
#[derive(Debug, Clone, Copy)]
pub struct TaskShape {
    pub stiffness: f64,
    pub preload: f64,
    pub position_amplitude: f64,
    pub noise_amplitude: f64,
}

impl Default for TaskShape {
    fn default() -> Self {
        TaskShape {
            stiffness: 8.0,
            preload: 0.5,
            position_amplitude: 0.5,
            noise_amplitude: 2.0,
        }
    }
}

/// Random task on a jittered grid: three position harmonics with analytic
/// derivatives and a load torque `k q − τ₀` plus three random harmonics.
pub fn random_task(rng: &mut ChaCha8Rng, name: &str, n: usize, shape: TaskShape) -> TaskTrajectory<f64> {
    let period: f64 = rng.gen_range(0.8..2.0);
    let mut t: Vec<f64> = (0..n)
        .map(|i| {
            let jitter = if i == 0 || i == n - 1 { 0.0 } else { rng.gen_range(-0.3..0.3) };
            period * (i as f64 + jitter) / (n - 1) as f64
        })
        .collect();
    t[0] = 0.0;
    let offset: f64 = rng.gen_range(-0.2..0.2);
    let pos: Vec<(f64, f64)> = (0..3)
        .map(|k| (shape.position_amplitude * rng.gen_range(0.2..1.0) / (k + 1) as f64, rng.gen_range(0.0..TAU)))
        .collect();
    let load: Vec<(f64, f64)> = (0..3)
        .map(|_| (shape.noise_amplitude * rng.gen_range(-1.0..1.0), rng.gen_range(0.0..TAU)))
        .collect();
    let w = TAU / period;
    let mut q = Vec::with_capacity(n);
    let mut dq = Vec::with_capacity(n);
    let mut ddq = Vec::with_capacity(n);
    let mut tau = Vec::with_capacity(n);
    for &ti in &t {
        let (mut p, mut v, mut a, mut noise) = (offset, 0.0, 0.0, 0.0);
        for (k, &(amp, phase)) in pos.iter().enumerate() {
            let wk = w * (k + 1) as f64;
            p += amp * (wk * ti + phase).sin();
            v += amp * wk * (wk * ti + phase).cos();
            a -= amp * wk * wk * (wk * ti + phase).sin();
        }
        for (k, &(amp, phase)) in load.iter().enumerate() {
            noise += amp * (w * (k + 1) as f64 * ti + phase).sin();
        }
        q.push(p);
        dq.push(v);
        ddq.push(a);
        tau.push(shape.stiffness * p - shape.preload + noise);
    }
    TaskTrajectory::new(name, t, q, Some(dq), Some(ddq), tau).unwrap()
}

pub fn random_design(rng: &mut ChaCha8Rng) -> DesignPoint<f64> {
    DesignPoint::new(rng.gen_range(-20.0..20.0), rng.gen_range(-5.0..5.0))
}

/// Motor torque at `x` straight from the rotor dynamics, independent of the
/// affine construction.
pub fn direct_motor_torque(task: &TaskTrajectory<f64>, motor: &MotorParams<f64>, x: &DesignPoint<f64>) -> Vec<f64> {
    let dq = task.dq_l.as_ref().unwrap();
    let ddq = task.ddq_l.as_ref().unwrap();
    (0..task.len())
        .map(|i| {
            let speed = motor.r * dq[i];
            let accel = motor.r * ddq[i];
            let spring = -x.k_p * task.q_l[i] + x.tau_p;
            let friction = if speed > 0.0 {
                motor.mu
            } else if speed < 0.0 {
                -motor.mu
            } else {
                0.0
            };
            motor.j_m * accel + motor.eta * speed + friction - (task.tau_l[i] + spring) / motor.r + motor.tau_u
        })
        .collect()
}

pub fn trapezoid(t: &[f64], f: &[f64]) -> f64 {
    (1..t.len()).map(|i| 0.5 * (t[i] - t[i - 1]) * (f[i] + f[i - 1])).sum()
}

/// Supply energy per stride: Joule heating `τ²/k_m²` plus rotor power
/// `τ · r q̇_l`.
pub fn direct_energy(task: &TaskTrajectory<f64>, motor: &MotorParams<f64>, x: &DesignPoint<f64>) -> f64 {
    let tau = direct_motor_torque(task, motor, x);
    let dq = task.dq_l.as_ref().unwrap();
    let power: Vec<f64> = (0..tau.len())
        .map(|i| tau[i] * tau[i] / (motor.k_m * motor.k_m) + tau[i] * motor.r * dq[i])
        .collect();
    trapezoid(&task.t, &power)
}

pub fn rel_diff(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// Closed-form eigenvalues of a symmetric 2×2 matrix, ascending.
pub fn eigenvalues(m: &[[f64; 2]; 2]) -> [f64; 2] {
    let mean = 0.5 * (m[0][0] + m[1][1]);
    let half_diff = 0.5 * (m[0][0] - m[1][1]);
    let radius = (half_diff * half_diff + m[0][1] * m[0][1]).sqrt();
    [mean - radius, mean + radius]
}

/// `x_c = −Q⁻¹ q` by Cramer's rule.
pub fn cramer_center(m: &[[f64; 2]; 2], q: &[f64; 2]) -> [f64; 2] {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    [-(m[1][1] * q[0] - m[0][1] * q[1]) / det, -(m[0][0] * q[1] - m[1][0] * q[0]) / det]
}

/// Noiseless chirp on an unloaded rotor with analytic kinematics.
pub struct Chirp {
    pub t: Vec<f64>,
    pub q: Vec<f64>,
    pub dq: Vec<f64>,
    pub ddq: Vec<f64>,
}

pub fn chirp(n: usize, duration: f64, f0: f64, f1: f64, amplitude: f64) -> Chirp {
    let rate = (f1 - f0) / duration;
    let mut out = Chirp {
        t: Vec::with_capacity(n),
        q: Vec::with_capacity(n),
        dq: Vec::with_capacity(n),
        ddq: Vec::with_capacity(n),
    };
    for i in 0..n {
        let t = duration * i as f64 / (n - 1) as f64;
        let phase = 2.0 * PI * (f0 * t + 0.5 * rate * t * t);
        let omega = 2.0 * PI * (f0 + rate * t);
        let alpha = 2.0 * PI * rate;
        out.t.push(t);
        out.q.push(amplitude * phase.sin());
        out.dq.push(amplitude * omega * phase.cos());
        out.ddq.push(amplitude * (alpha * phase.cos() - omega * omega * phase.sin()));
    }
    out
}
