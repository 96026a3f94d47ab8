//! Fixed-size 2×2 linear algebra and a small dense solver.
//!
//! The design space is two-dimensional, so everything here works on plain
//! arrays instead of a general matrix library.

use crate::scalar::Scalar;

pub type Vec2<T> = [T; 2];
pub type Mat2<T> = [[T; 2]; 2];

pub fn dot<T: Scalar>(a: &Vec2<T>, b: &Vec2<T>) -> T {
    a[0] * b[0] + a[1] * b[1]
}

pub fn norm<T: Scalar>(a: &Vec2<T>) -> T {
    a[0].hypot(a[1])
}

pub fn mat_vec<T: Scalar>(m: &Mat2<T>, v: &Vec2<T>) -> Vec2<T> {
    [
        m[0][0] * v[0] + m[0][1] * v[1],
        m[1][0] * v[0] + m[1][1] * v[1],
    ]
}

/// `vᵀ M v`.
pub fn quad_form<T: Scalar>(m: &Mat2<T>, v: &Vec2<T>) -> T {
    dot(v, &mat_vec(m, v))
}

pub fn det<T: Scalar>(m: &Mat2<T>) -> T {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

pub fn scale<T: Scalar>(m: &Mat2<T>, s: T) -> Mat2<T> {
    [[m[0][0] * s, m[0][1] * s], [m[1][0] * s, m[1][1] * s]]
}

pub fn inverse<T: Scalar>(m: &Mat2<T>) -> Option<Mat2<T>> {
    let d = det(m);
    if d == T::zero() || !d.is_finite() {
        return None;
    }
    Some([[m[1][1] / d, -m[0][1] / d], [-m[1][0] / d, m[0][0] / d]])
}

/// Frobenius norm.
pub fn frobenius<T: Scalar>(m: &Mat2<T>) -> T {
    (m[0][0] * m[0][0] + m[0][1] * m[0][1] + m[1][0] * m[1][0] + m[1][1] * m[1][1]).sqrt()
}

/// Eigen-decomposition of a symmetric 2×2 matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymEigen<T> {
    /// Ascending eigenvalues.
    pub values: [T; 2],
    /// Unit eigenvectors, `vectors[k]` pairs with `values[k]`.
    pub vectors: [Vec2<T>; 2],
}

impl<T: Scalar> SymEigen<T> {
    pub fn new(m: &Mat2<T>) -> Self {
        let two = T::lit(2.0);
        let (a, b, d) = (m[0][0], (m[0][1] + m[1][0]) / two, m[1][1]);
        let mean = (a + d) / two;
        let radius = ((a - d) / two).hypot(b);
        let high = mean + radius;
        // det / high avoids cancellation in the small eigenvalue.
        let low = if high > T::zero() {
            (a * d - b * b) / high
        } else {
            mean - radius
        };
        let theta = (two * b).atan2(a - d) / two;
        let (s, c) = theta.sin_cos();
        SymEigen {
            values: [low, high],
            vectors: [[-s, c], [c, s]],
        }
    }

    /// `λ_max / λ_min`, infinite when `λ_min ≤ 0`.
    pub fn condition_number(&self) -> T {
        if self.values[0] <= T::zero() {
            T::infinity()
        } else {
            self.values[1] / self.values[0]
        }
    }

    /// Rebuilds `V f(Λ) Vᵀ`.
    pub fn map(&self, f: impl Fn(T) -> T) -> Mat2<T> {
        let mut out = [[T::zero(); 2]; 2];
        for k in 0..2 {
            let lambda = f(self.values[k]);
            let v = self.vectors[k];
            for i in 0..2 {
                for j in 0..2 {
                    out[i][j] = out[i][j] + lambda * v[i] * v[j];
                }
            }
        }
        out
    }
}

/// Principal square root of a symmetric positive semidefinite matrix.
pub fn sqrt_psd<T: Scalar>(m: &Mat2<T>) -> Mat2<T> {
    SymEigen::new(m).map(|l| l.max(T::zero()).sqrt())
}

/// Moore–Penrose pseudo-inverse of a symmetric matrix; eigenvalues below
/// `rel_tol · λ_max` are treated as zero.
pub fn pinv_sym<T: Scalar>(m: &Mat2<T>, rel_tol: T) -> Mat2<T> {
    let eig = SymEigen::new(m);
    let cutoff = rel_tol * eig.values[1].abs().max(eig.values[0].abs());
    eig.map(|l| if l.abs() > cutoff { T::one() / l } else { T::zero() })
}

/// Solves a small dense square system by Gaussian elimination with partial
/// pivoting. Returns `None` for a numerically singular matrix.
pub fn solve_dense<T: Scalar>(mut a: Vec<Vec<T>>, mut b: Vec<T>) -> Option<Vec<T>> {
    let n = b.len();
    let scale = a
        .iter()
        .flat_map(|row| row.iter())
        .fold(T::zero(), |acc, v| acc.max(v.abs()));
    if scale == T::zero() {
        return None;
    }
    let tiny = scale * T::epsilon() * T::from_count(n.max(1)) * T::lit(16.0);
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| {
            a[i][col]
                .abs()
                .partial_cmp(&a[j][col].abs())
                .unwrap_or(std::cmp::Ordering::Equal)
        })?;
        if a[pivot][col].abs() <= tiny {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in (col + 1)..n {
            let factor = a[row][col] / a[col][col];
            for k in col..n {
                let v = a[col][k];
                a[row][k] = a[row][k] - factor * v;
            }
            let v = b[col];
            b[row] = b[row] - factor * v;
        }
    }
    let mut x = vec![T::zero(); n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for k in (row + 1)..n {
            acc = acc - a[row][k] * x[k];
        }
        x[row] = acc / a[row][row];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigen_of_diagonal_and_rotated() {
        let e = SymEigen::new(&[[3.0_f64, 0.0], [0.0, 1.0]]);
        assert_eq!(e.values, [1.0, 3.0]);
        assert!((e.vectors[1][0].abs() - 1.0).abs() < 1e-15);

        let m = [[2.0_f64, 1.0], [1.0, 2.0]];
        let e = SymEigen::new(&m);
        assert!((e.values[0] - 1.0).abs() < 1e-14);
        assert!((e.values[1] - 3.0).abs() < 1e-14);
        let rebuilt = e.map(|l| l);
        for i in 0..2 {
            for j in 0..2 {
                assert!((rebuilt[i][j] - m[i][j]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn outer_product_eigenvalues() {
        // a aᵀ with a = (q/r, -1/r) has eigenvalues {0, (1 + q²)/r²}.
        let (q, r) = (0.7_f64, 9.0);
        let a = [q / r, -1.0 / r];
        let m = [[a[0] * a[0], a[0] * a[1]], [a[1] * a[0], a[1] * a[1]]];
        let e = SymEigen::new(&m);
        assert!(e.values[0].abs() < 1e-17);
        assert!((e.values[1] - (1.0 + q * q) / (r * r)).abs() < 1e-16);
    }

    #[test]
    fn sqrt_and_inverse() {
        let m = [[4.0_f64, 1.0], [1.0, 3.0]];
        let s = sqrt_psd(&m);
        let sq = [
            [s[0][0] * s[0][0] + s[0][1] * s[1][0], s[0][0] * s[0][1] + s[0][1] * s[1][1]],
            [s[1][0] * s[0][0] + s[1][1] * s[1][0], s[1][0] * s[0][1] + s[1][1] * s[1][1]],
        ];
        for i in 0..2 {
            for j in 0..2 {
                assert!((sq[i][j] - m[i][j]).abs() < 1e-13);
            }
        }
        let inv = inverse(&m).unwrap();
        let id = mat_vec(&inv, &mat_vec(&m, &[1.0, 2.0]));
        assert!((id[0] - 1.0).abs() < 1e-14 && (id[1] - 2.0).abs() < 1e-14);
        assert!(inverse(&[[1.0, 2.0], [2.0, 4.0]]).is_none());
    }

    #[test]
    fn pinv_of_rank_one() {
        let m = [[1.0_f64, -1.0], [-1.0, 1.0]];
        let p = pinv_sym(&m, 1e-12);
        // pinv of v vᵀ·2 with v = (1,-1)/√2 is v vᵀ / 2.
        assert!((p[0][0] - 0.25).abs() < 1e-15);
        assert!((p[0][1] + 0.25).abs() < 1e-15);
    }

    #[test]
    fn dense_solve() {
        let a = vec![
            vec![2.0_f64, 1.0, 0.0],
            vec![1.0, 3.0, 1.0],
            vec![0.0, 1.0, 4.0],
        ];
        let x = solve_dense(a, vec![3.0, 5.0, 5.0]).unwrap();
        for v in x {
            assert!((v - 1.0).abs() < 1e-14);
        }
        assert!(solve_dense(vec![vec![1.0, 2.0], vec![2.0, 4.0]], vec![1.0, 1.0]).is_none());
    }
}
