//! Small dense matrix helpers on fixed-size arrays.

use num_traits::Float;

pub type Mat<const N: usize> = [[f64; N]; N];

pub fn zeros<const N: usize>() -> Mat<N> {
    [[0.0; N]; N]
}

pub fn identity<const N: usize>() -> Mat<N> {
    let mut m = zeros();
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    m
}

pub fn transpose<const N: usize, const M: usize>(a: &[[f64; M]; N]) -> [[f64; N]; M] {
    let mut t = [[0.0; N]; M];
    for i in 0..N {
        for j in 0..M {
            t[j][i] = a[i][j];
        }
    }
    t
}

pub fn matmul<const N: usize, const K: usize, const M: usize>(a: &[[f64; K]; N], b: &[[f64; M]; K]) -> [[f64; M]; N] {
    let mut c = [[0.0; M]; N];
    for i in 0..N {
        for k in 0..K {
            let aik = a[i][k];
            for j in 0..M {
                c[i][j] += aik * b[k][j];
            }
        }
    }
    c
}

pub fn matvec<const N: usize, const M: usize>(a: &[[f64; M]; N], x: &[f64; M]) -> [f64; N] {
    let mut y = [0.0; N];
    for i in 0..N {
        y[i] = a[i].iter().zip(x).map(|(p, q)| p * q).sum();
    }
    y
}

pub fn frobenius<const N: usize, const M: usize>(a: &[[f64; M]; N]) -> f64 {
    a.iter().flatten().map(|v| v * v).sum::<f64>().sqrt()
}

/// `||a - b||_F / ||b||_F`.
pub fn rel_diff<const N: usize, const M: usize>(a: &[[f64; M]; N], b: &[[f64; M]; N]) -> f64 {
    let mut d = [[0.0; M]; N];
    for i in 0..N {
        for j in 0..M {
            d[i][j] = a[i][j] - b[i][j];
        }
    }
    frobenius(&d) / frobenius(b).max(f64::MIN_POSITIVE)
}

/// LU factorization with partial pivoting.
#[derive(Debug, Clone)]
pub struct Lu<const N: usize> {
    lu: Mat<N>,
    perm: [usize; N],
    sign: f64,
    singular: bool,
}

impl<const N: usize> Lu<N> {
    pub fn new(a: &Mat<N>) -> Self {
        let mut lu = *a;
        let mut perm = [0; N];
        for (i, p) in perm.iter_mut().enumerate() {
            *p = i;
        }
        let mut sign = 1.0;
        let mut singular = false;
        for k in 0..N {
            let p = (k..N).max_by(|&i, &j| lu[i][k].abs().total_cmp(&lu[j][k].abs())).unwrap_or(k);
            if lu[p][k] == 0.0 {
                singular = true;
                continue;
            }
            if p != k {
                lu.swap(p, k);
                perm.swap(p, k);
                sign = -sign;
            }
            for i in k + 1..N {
                let f = lu[i][k] / lu[k][k];
                lu[i][k] = f;
                for j in k + 1..N {
                    lu[i][j] -= f * lu[k][j];
                }
            }
        }
        Lu { lu, perm, sign, singular }
    }

    pub fn det(&self) -> f64 {
        (0..N).fold(self.sign, |acc, i| acc * self.lu[i][i])
    }

    /// Solves `A x = b`; `None` when the matrix is exactly singular.
    pub fn solve(&self, b: &[f64; N]) -> Option<[f64; N]> {
        if self.singular {
            return None;
        }
        let mut x = [0.0; N];
        for i in 0..N {
            x[i] = b[self.perm[i]] - (0..i).map(|j| self.lu[i][j] * x[j]).sum::<f64>();
        }
        for i in (0..N).rev() {
            let s: f64 = (i + 1..N).map(|j| self.lu[i][j] * x[j]).sum();
            x[i] = (x[i] - s) / self.lu[i][i];
        }
        Some(x)
    }

    /// Solves `A X = B` column by column.
    pub fn solve_mat<const M: usize>(&self, b: &[[f64; M]; N]) -> Option<[[f64; M]; N]> {
        let mut out = [[0.0; M]; N];
        for j in 0..M {
            let col: [f64; N] = core::array::from_fn(|i| b[i][j]);
            let x = self.solve(&col)?;
            for i in 0..N {
                out[i][j] = x[i];
            }
        }
        Some(out)
    }
}

/// Cyclic Jacobi eigen-decomposition of a symmetric matrix.
///
/// Returns eigenvalues (unsorted) and the matrix whose columns are the eigenvectors.
pub fn jacobi_eigen<const N: usize>(a: &Mat<N>) -> ([f64; N], Mat<N>) {
    let mut m = *a;
    let mut v = identity::<N>();
    for _sweep in 0..100 {
        let off: f64 = (0..N).flat_map(|i| (0..N).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| m[i][j] * m[i][j]).sum();
        let diag: f64 = (0..N).map(|i| m[i][i] * m[i][i]).sum();
        if off <= 1e-32 * diag || off == 0.0 {
            break;
        }
        for p in 0..N {
            for q in p + 1..N {
                if m[p][q] == 0.0 {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..N {
                    let (mkp, mkq) = (m[k][p], m[k][q]);
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for k in 0..N {
                    let (mpk, mqk) = (m[p][k], m[q][k]);
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
                for k in 0..N {
                    let (vkp, vkq) = (v[k][p], v[k][q]);
                    v[k][p] = c * vkp - s * vkq;
                    v[k][q] = s * vkp + c * vkq;
                }
            }
        }
    }
    (core::array::from_fn(|i| m[i][i]), v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lu_solves_and_determinant() {
        let a: Mat<3> = [[2.0, 1.0, 0.0], [1.0, 3.0, 1.0], [0.0, 1.0, 4.0]];
        let lu = Lu::new(&a);
        assert!((lu.det() - 18.0).abs() < 1e-12);
        let x = lu.solve(&[1.0, 2.0, 3.0]).unwrap();
        let y = matvec(&a, &x);
        for (yi, bi) in y.iter().zip([1.0, 2.0, 3.0]) {
            assert!((yi - bi).abs() < 1e-14);
        }
        let sing: Mat<2> = [[1.0, 2.0], [2.0, 4.0]];
        assert!(Lu::new(&sing).solve(&[1.0, 1.0]).is_none());
    }

    #[test]
    fn jacobi_reconstructs() {
        let a: Mat<4> = [[4.0, 1.0, 0.5, 0.0], [1.0, 3.0, 0.2, 0.1], [0.5, 0.2, 2.0, 0.3], [0.0, 0.1, 0.3, 1.0]];
        let (l, v) = jacobi_eigen(&a);
        let mut d = zeros::<4>();
        for i in 0..4 {
            d[i][i] = l[i];
        }
        let rec = matmul(&matmul(&v, &d), &transpose(&v));
        assert!(rel_diff(&rec, &a) < 1e-14);
        let vtv = matmul(&transpose(&v), &v);
        assert!(rel_diff(&vtv, &identity()) < 1e-14);
    }
}
