//! Dense linear algebra for the tiny (at most 3×3) systems that show up in
//! geodesic shooting, Jacobi fields and Gram recovery.

use crate::scalar::Real;
use num_traits::Num;
use std::ops::Neg;

/// Square matrix of size `n ≤ 3`, stored in a fixed 3×3 array.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat3<T> {
    pub n: usize,
    pub a: [[T; 3]; 3],
}

impl<T: Real> Mat3<T> {
    pub fn zeros(n: usize) -> Self {
        assert!(n <= 3);
        Self { n, a: [[T::zero(); 3]; 3] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.a[i][i] = T::one();
        }
        m
    }

    pub fn mul_vec(&self, v: &[T; 3]) -> [T; 3] {
        let mut out = [T::zero(); 3];
        for (i, o) in out.iter_mut().enumerate().take(self.n) {
            for j in 0..self.n {
                *o = *o + self.a[i][j] * v[j];
            }
        }
        out
    }

    pub fn max_abs(&self) -> T {
        let mut m = T::zero();
        for i in 0..self.n {
            for j in 0..self.n {
                m = m.max(self.a[i][j].abs());
            }
        }
        m
    }

    pub fn det(&self) -> T {
        let a = &self.a;
        match self.n {
            0 => T::one(),
            1 => a[0][0],
            2 => a[0][0] * a[1][1] - a[0][1] * a[1][0],
            _ => {
                a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
                    - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
                    + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
            }
        }
    }

    /// Solves `self · x = b` by Gaussian elimination with partial pivoting.
    /// Returns `None` when a pivot falls below `rel_tol · max|a_ij|`.
    pub fn solve(&self, b: &[T; 3], rel_tol: T) -> Option<[T; 3]> {
        let n = self.n;
        let scale = self.max_abs();
        if scale == T::zero() {
            return None;
        }
        let mut m = self.a;
        let mut rhs = *b;
        for col in 0..n {
            let mut piv = col;
            for row in col + 1..n {
                if m[row][col].abs() > m[piv][col].abs() {
                    piv = row;
                }
            }
            if m[piv][col].abs() <= rel_tol * scale {
                return None;
            }
            m.swap(col, piv);
            rhs.swap(col, piv);
            for row in col + 1..n {
                let factor = m[row][col] / m[col][col];
                for k in col..n {
                    m[row][k] = m[row][k] - factor * m[col][k];
                }
                rhs[row] = rhs[row] - factor * rhs[col];
            }
        }
        let mut x = [T::zero(); 3];
        for row in (0..n).rev() {
            let mut acc = rhs[row];
            for k in row + 1..n {
                acc = acc - m[row][k] * x[k];
            }
            x[row] = acc / m[row][row];
        }
        Some(x)
    }

    pub fn inverse(&self, rel_tol: T) -> Option<Self> {
        let mut inv = Self::zeros(self.n);
        for col in 0..self.n {
            let mut e = [T::zero(); 3];
            e[col] = T::one();
            let x = self.solve(&e, rel_tol)?;
            for row in 0..self.n {
                inv.a[row][col] = x[row];
            }
        }
        Some(inv)
    }

    /// Positive definiteness via Cholesky; `false` on any non-positive pivot.
    pub fn is_positive_definite(&self) -> bool {
        let n = self.n;
        let mut l = [[T::zero(); 3]; 3];
        for i in 0..n {
            for j in 0..=i {
                let mut s = self.a[i][j];
                for k in 0..j {
                    s = s - l[i][k] * l[j][k];
                }
                if i == j {
                    if s <= T::zero() {
                        return false;
                    }
                    l[i][i] = s.sqrt();
                } else {
                    l[i][j] = s / l[j][j];
                }
            }
        }
        true
    }

    /// Eigenvalues of a symmetric matrix (closed form for n ≤ 2, Jacobi
    /// rotations for n = 3), sorted ascending.
    pub fn symmetric_eigenvalues(&self) -> Vec<T> {
        let n = self.n;
        let mut a = self.a;
        if n == 1 {
            return vec![a[0][0]];
        }
        if n == 2 {
            let tr = a[0][0] + a[1][1];
            let diff = a[0][0] - a[1][1];
            let disc = (diff * diff + T::of(4.0) * a[0][1] * a[1][0]).max(T::zero()).sqrt();
            return vec![(tr - disc) * T::half(), (tr + disc) * T::half()];
        }
        for _sweep in 0..64 {
            let off = a[0][1].abs() + a[0][2].abs() + a[1][2].abs();
            if off <= T::epsilon() * self.max_abs() {
                break;
            }
            for p in 0..n {
                for q in p + 1..n {
                    if a[p][q] == T::zero() {
                        continue;
                    }
                    let theta = (a[q][q] - a[p][p]) / (T::two() * a[p][q]);
                    let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                    let c = T::one() / (t * t + T::one()).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let akp = a[k][p];
                        let akq = a[k][q];
                        a[k][p] = c * akp - s * akq;
                        a[k][q] = s * akp + c * akq;
                    }
                    for k in 0..n {
                        let apk = a[p][k];
                        let aqk = a[q][k];
                        a[p][k] = c * apk - s * aqk;
                        a[q][k] = s * apk + c * aqk;
                    }
                }
            }
        }
        let mut ev: Vec<T> = (0..n).map(|i| a[i][i]).collect();
        ev.sort_by(|x, y| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal));
        ev
    }
}

/// Exact 3×3 determinant over any commutative ring (used with rationals).
pub fn det3_exact<N>(m: &[[N; 3]; 3]) -> N
where
    N: Num + Clone,
{
    let c = |i: usize, j: usize| m[i][j].clone();
    c(0, 0) * (c(1, 1) * c(2, 2) - c(1, 2) * c(2, 1)) - c(0, 1) * (c(1, 0) * c(2, 2) - c(1, 2) * c(2, 0))
        + c(0, 2) * (c(1, 0) * c(2, 1) - c(1, 1) * c(2, 0))
}

/// Cramer's rule for a 3×3 system over a field; `None` if singular.
pub fn solve3_exact<N>(m: &[[N; 3]; 3], b: &[N; 3]) -> Option<[N; 3]>
where
    N: Num + Clone + Neg<Output = N>,
{
    let d = det3_exact(m);
    if d.is_zero() {
        return None;
    }
    let mut out: [N; 3] = [N::zero(), N::zero(), N::zero()];
    for (col, o) in out.iter_mut().enumerate() {
        let mut mc = m.clone();
        for row in 0..3 {
            mc[row][col] = b[row].clone();
        }
        *o = det3_exact(&mc) / d.clone();
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Rational64;

    #[test]
    fn solve_recovers_known_solution() {
        let m = Mat3::<f64> { n: 3, a: [[2.0, 1.0, -1.0], [-3.0, -1.0, 2.0], [-2.0, 1.0, 2.0]] };
        let x = m.solve(&[8.0, -11.0, -3.0], 1e-14).unwrap();
        assert!((x[0] - 2.0).abs() < 1e-12);
        assert!((x[1] - 3.0).abs() < 1e-12);
        assert!((x[2] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn singular_is_detected() {
        let m = Mat3 { n: 2, a: [[1.0, 2.0, 0.0], [2.0, 4.0, 0.0], [0.0; 3]] };
        assert!(m.solve(&[1.0, 1.0, 0.0], 1e-12).is_none());
        assert_eq!(m.det(), 0.0);
    }

    #[test]
    fn eigenvalues_of_symmetric_3x3() {
        let m = Mat3::<f64> { n: 3, a: [[2.0, 1.0, 0.0], [1.0, 2.0, 0.0], [0.0, 0.0, 5.0]] };
        let ev = m.symmetric_eigenvalues();
        assert!((ev[0] - 1.0).abs() < 1e-12 && (ev[1] - 3.0).abs() < 1e-12 && (ev[2] - 5.0).abs() < 1e-12);
        assert!(m.is_positive_definite());
        let neg = Mat3 { n: 2, a: [[1.0, 2.0, 0.0], [2.0, 1.0, 0.0], [0.0; 3]] };
        assert!(!neg.is_positive_definite());
    }

    #[test]
    fn exact_cramer_over_rationals() {
        let r = |n: i64, d: i64| Rational64::new(n, d);
        let m = [[r(1, 1), r(1, 1), r(0, 1)], [r(0, 1), r(2, 1), r(1, 1)], [r(1, 1), r(0, 1), r(3, 1)]];
        let x = solve3_exact(&m, &[r(3, 1), r(7, 1), r(10, 1)]).unwrap();
        assert_eq!(x, [r(1, 1), r(2, 1), r(3, 1)]);
    }
}
