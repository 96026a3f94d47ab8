//! Least-squares identification of lumped inertia, viscous and Coulomb
//! friction from a motor-side trace of an unloaded rig:
//! `τ_m = J_m q̈_m + η q̇_m + μ sign(q̇_m)`.

use serde::{Deserialize, Serialize};

use crate::calculus::{first_derivative, second_derivative};
use crate::error::{Error, Result};
use crate::scalar::{sign, Scalar};

pub const MIN_TRACE_LEN: usize = 100;
const PARAMS: [&str; 3] = ["J_m", "eta", "mu"];

/// Motor-side measurement trace. Missing velocity/acceleration channels are
/// obtained by finite differences of `q_m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MotorTrace<T> {
    pub t: Vec<T>,
    pub q_m: Vec<T>,
    #[serde(default)]
    pub dq_m: Option<Vec<T>>,
    #[serde(default)]
    pub ddq_m: Option<Vec<T>>,
    /// Commanded electromagnetic torque (N·m), with any known spring and
    /// load torque already moved to this side.
    pub tau_m: Vec<T>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdentifiedFriction<T> {
    #[serde(rename = "J_m")]
    pub j_m: T,
    pub eta: T,
    pub mu: T,
    pub residual_rms: T,
    /// Condition number of the column-normalized regressor.
    pub condition: T,
}

/// Condition number of the normalized regressor above which a fit is
/// refused.
pub const MAX_CONDITION: f64 = 1e10;

pub fn identify_motor_params<T: Scalar>(trace: &MotorTrace<T>) -> Result<IdentifiedFriction<T>> {
    let n = trace.t.len();
    if n < MIN_TRACE_LEN {
        return Err(Error::TooFewSamples {
            needed: MIN_TRACE_LEN,
            got: n,
        });
    }
    for (name, len) in [
        ("q_m", trace.q_m.len()),
        ("tau_m", trace.tau_m.len()),
        ("dq_m", trace.dq_m.as_ref().map_or(n, Vec::len)),
        ("ddq_m", trace.ddq_m.as_ref().map_or(n, Vec::len)),
    ] {
        if len != n {
            return Err(Error::LengthMismatch {
                column: name.into(),
                expected: n,
                found: len,
            });
        }
    }
    for i in 1..n {
        if trace.t[i] <= trace.t[i - 1] {
            return Err(Error::NonMonotoneTime { row: i + 1 });
        }
    }
    let dq = trace.dq_m.clone().unwrap_or_else(|| first_derivative(&trace.t, &trace.q_m));
    let ddq = trace.ddq_m.clone().unwrap_or_else(|| second_derivative(&trace.t, &trace.q_m));

    if dq.iter().all(|v| *v == T::zero()) {
        return Err(Error::Identifiability {
            parameters: vec!["eta".into(), "mu".into()],
            reason: "velocity is identically zero".into(),
        });
    }
    if ddq.iter().all(|v| *v == T::zero()) {
        return Err(Error::Identifiability {
            parameters: vec!["J_m".into()],
            reason: "acceleration is identically zero".into(),
        });
    }
    let positive = dq.iter().any(|v| *v > T::zero());
    let negative = dq.iter().any(|v| *v < T::zero());
    if !(positive && negative) {
        return Err(Error::Identifiability {
            parameters: vec!["mu".into()],
            reason: "velocity never changes sign".into(),
        });
    }

    let columns: [Vec<T>; 3] = [ddq.clone(), dq.clone(), dq.iter().map(|v| sign(*v)).collect()];
    let fit = least_squares(&columns, &trace.tau_m);
    let (coef, condition, weakest) = fit;
    if !(condition <= T::lit(MAX_CONDITION)) {
        return Err(Error::Identifiability {
            parameters: vec![PARAMS[weakest].into()],
            reason: format!("regressor condition number {condition} exceeds {MAX_CONDITION:e}"),
        });
    }
    let mut sq = T::zero();
    for i in 0..n {
        let model = coef[0] * columns[0][i] + coef[1] * columns[1][i] + coef[2] * columns[2][i];
        let e = trace.tau_m[i] - model;
        sq = sq + e * e;
    }
    Ok(IdentifiedFriction {
        j_m: coef[0],
        eta: coef[1],
        mu: coef[2],
        residual_rms: (sq / T::from_count(n)).sqrt(),
        condition,
    })
}

/// Householder QR least squares on column-normalized data. Returns the
/// coefficients, the condition estimate `max|R_jj| / min|R_jj|` and the
/// index of the weakest column.
fn least_squares<T: Scalar>(columns: &[Vec<T>; 3], y: &[T]) -> ([T; 3], T, usize) {
    let n = y.len();
    let norms: Vec<T> = columns
        .iter()
        .map(|c| c.iter().fold(T::zero(), |acc, v| acc + *v * *v).sqrt())
        .collect();
    // Column-major working copy.
    let mut a: Vec<Vec<T>> = columns
        .iter()
        .zip(&norms)
        .map(|(c, &s)| c.iter().map(|v| if s > T::zero() { *v / s } else { T::zero() }).collect())
        .collect();
    let mut rhs = y.to_vec();
    let mut diag = [T::zero(); 3];
    for k in 0..3 {
        let alpha_sq = (k..n).fold(T::zero(), |acc, i| acc + a[k][i] * a[k][i]);
        let alpha = if a[k][k] > T::zero() { -alpha_sq.sqrt() } else { alpha_sq.sqrt() };
        diag[k] = alpha;
        if alpha == T::zero() {
            continue;
        }
        let mut v: Vec<T> = (k..n).map(|i| a[k][i]).collect();
        v[0] = v[0] - alpha;
        let vnorm_sq = v.iter().fold(T::zero(), |acc, x| acc + *x * *x);
        if vnorm_sq == T::zero() {
            continue;
        }
        let two = T::lit(2.0);
        for col in a.iter_mut().skip(k) {
            let proj = v.iter().zip(k..n).fold(T::zero(), |acc, (vi, i)| acc + *vi * col[i]);
            let f = two * proj / vnorm_sq;
            for (vi, i) in v.iter().zip(k..n) {
                col[i] = col[i] - f * *vi;
            }
        }
        let proj = v.iter().zip(k..n).fold(T::zero(), |acc, (vi, i)| acc + *vi * rhs[i]);
        let f = two * proj / vnorm_sq;
        for (vi, i) in v.iter().zip(k..n) {
            rhs[i] = rhs[i] - f * *vi;
        }
    }
    let mut coef = [T::zero(); 3];
    for k in (0..3).rev() {
        let mut acc = rhs[k];
        for j in (k + 1)..3 {
            acc = acc - a[j][k] * coef[j];
        }
        coef[k] = if a[k][k] != T::zero() { acc / a[k][k] } else { T::zero() };
    }
    for k in 0..3 {
        if norms[k] > T::zero() {
            coef[k] = coef[k] / norms[k];
        }
    }
    let mags: Vec<T> = diag.iter().map(|d| d.abs()).collect();
    let (weakest, min) = mags
        .iter()
        .enumerate()
        .fold((0, T::infinity()), |(bi, bv), (i, v)| if *v < bv { (i, *v) } else { (bi, bv) });
    let max = mags.iter().fold(T::zero(), |acc, v| acc.max(*v));
    let condition = if min > T::zero() { max / min } else { T::infinity() };
    (coef, condition, weakest)
}
