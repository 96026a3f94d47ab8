//! Trapezoidal quadrature and finite-difference derivatives on possibly
//! non-uniform sample grids.

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

/// Quadrature rule used to turn sampled integrands into numbers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum IntegrationRule {
    /// Composite trapezoid on the sample grid.
    #[default]
    Trapezoid,
}

impl IntegrationRule {
    pub fn integrate<T: Scalar>(self, t: &[T], values: impl Fn(usize) -> T) -> T {
        match self {
            IntegrationRule::Trapezoid => trapezoid(t, values),
        }
    }
}

/// `∫ f dt` by the composite trapezoid rule; `values(i)` is `f(t[i])`.
pub fn trapezoid<T: Scalar>(t: &[T], values: impl Fn(usize) -> T) -> T {
    if t.len() < 2 {
        return T::zero();
    }
    let half = T::lit(0.5);
    let mut prev = values(0);
    let mut acc = T::zero();
    for i in 1..t.len() {
        let cur = values(i);
        acc = acc + (t[i] - t[i - 1]) * (prev + cur) * half;
        prev = cur;
    }
    acc
}

/// Finite-difference weights for derivatives of order `0..=max_order` at `z`
/// from samples at `nodes` (Fornberg's recursion). `weights[k][j]` multiplies
/// the sample at `nodes[j]` for the k-th derivative.
pub fn fd_weights<T: Scalar>(z: T, nodes: &[T], max_order: usize) -> Vec<Vec<T>> {
    let n = nodes.len();
    let mut c = vec![vec![T::zero(); n]; max_order + 1];
    c[0][0] = T::one();
    let mut c1 = T::one();
    let mut c4 = nodes[0] - z;
    for i in 1..n {
        let mn = i.min(max_order);
        let mut c2 = T::one();
        let c5 = c4;
        c4 = nodes[i] - z;
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 = c2 * c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (T::from_count(k) * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - T::from_count(k) * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

fn apply_stencil<T: Scalar>(t: &[T], f: &[T], i: usize, window: std::ops::Range<usize>, order: usize) -> T {
    let weights = fd_weights(t[i], &t[window.clone()], order);
    window
        .zip(weights[order].iter())
        .fold(T::zero(), |acc, (j, w)| acc + *w * f[j])
}

/// First derivative: 3-point central stencil inside, 3-point one-sided at the
/// ends. Exact for quadratics on any grid. Requires `t.len() ≥ 3`.
pub fn first_derivative<T: Scalar>(t: &[T], f: &[T]) -> Vec<T> {
    let n = t.len();
    assert!(n >= 3 && f.len() == n);
    (0..n)
        .map(|i| {
            let window = match i {
                0 => 0..3,
                _ if i == n - 1 => n - 3..n,
                _ => i - 1..i + 2,
            };
            apply_stencil(t, f, i, window, 1)
        })
        .collect()
}

/// Second derivative: 3-point central stencil inside, 4-point one-sided at the
/// ends (3-point when only three samples exist). Exact for quadratics.
pub fn second_derivative<T: Scalar>(t: &[T], f: &[T]) -> Vec<T> {
    let n = t.len();
    assert!(n >= 3 && f.len() == n);
    let end = n.min(4);
    (0..n)
        .map(|i| {
            let window = match i {
                0 => 0..end,
                _ if i == n - 1 => n - end..n,
                _ => i - 1..i + 2,
            };
            apply_stencil(t, f, i, window, 2)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trapezoid_exact_on_linear() {
        let t = [0.0_f64, 0.3, 1.0, 2.5];
        let v = trapezoid(&t, |i| 2.0 * t[i] + 1.0);
        assert!((v - (2.5 * 2.5 + 2.5)).abs() < 1e-14);
        assert_eq!(trapezoid(&[1.0], |_| 5.0), 0.0);
    }

    #[test]
    fn weights_match_textbook_central() {
        let w = fd_weights(0.0, &[-1.0, 0.0, 1.0], 2);
        assert_eq!(w[1], vec![-0.5, 0.0, 0.5]);
        assert_eq!(w[2], vec![1.0, -2.0, 1.0]);
    }

    #[test]
    fn derivatives_exact_on_quadratic_nonuniform() {
        let t = [0.0, 0.1, 0.35, 0.4, 0.9, 1.3];
        let f: Vec<f64> = t.iter().map(|x| 3.0 * x * x - 2.0 * x + 0.5).collect();
        let d1 = first_derivative(&t, &f);
        let d2 = second_derivative(&t, &f);
        for i in 0..t.len() {
            assert!((d1[i] - (6.0 * t[i] - 2.0)).abs() < 1e-12, "d1 at {i}");
            assert!((d2[i] - 6.0).abs() < 1e-10, "d2 at {i}");
        }
    }
}
