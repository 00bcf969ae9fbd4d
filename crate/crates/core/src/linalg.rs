//! Dense linear algebra for the handful of small systems the solvers need.
//!
//! Matrices here are at most a few columns wide (one per covariate), so plain
//! row-major storage and textbook algorithms are sufficient.

use std::ops::{Index, IndexMut};

use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.len(), cols, "ragged rows");
            data.extend_from_slice(r);
        }
        Self {
            rows: rows.len(),
            cols,
            data,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows).map(|i| dot(self.row(i), v)).collect()
    }

    /// `selfᵀ v`
    pub fn tr_mul_vec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(v.len(), self.rows);
        let mut out = vec![T::zero(); self.cols];
        for (i, &vi) in v.iter().enumerate() {
            for (o, &a) in out.iter_mut().zip(self.row(i)) {
                *o += a * vi;
            }
        }
        out
    }

    /// Inverse by Gauss-Jordan elimination with partial pivoting. `None` if a
    /// pivot falls below `tol` times the largest entry of its column.
    pub fn inverse(&self, tol: T) -> Option<Self> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = Self::identity(n);
        for col in 0..n {
            let scale = (0..n).map(|r| a[(r, col)].abs()).fold(T::zero(), T::max);
            let (piv, piv_val) = (col..n)
                .map(|r| (r, a[(r, col)].abs()))
                .fold((col, T::zero()), |best, cur| if cur.1 > best.1 { cur } else { best });
            if !(piv_val > tol * scale.max(T::min_positive_value())) {
                return None;
            }
            if piv != col {
                a.swap_rows(piv, col);
                inv.swap_rows(piv, col);
            }
            let d = a[(col, col)];
            for j in 0..n {
                a[(col, j)] /= d;
                inv[(col, j)] /= d;
            }
            for r in 0..n {
                if r != col {
                    let f = a[(r, col)];
                    if f != T::zero() {
                        for j in 0..n {
                            let av = a[(col, j)];
                            let iv = inv[(col, j)];
                            a[(r, j)] -= f * av;
                            inv[(r, j)] -= f * iv;
                        }
                    }
                }
            }
        }
        Some(inv)
    }

    fn swap_rows(&mut self, i: usize, j: usize) {
        for c in 0..self.cols {
            self.data.swap(i * self.cols + c, j * self.cols + c);
        }
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &T {
        &self.data[r * self.cols + c]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut T {
        &mut self.data[r * self.cols + c]
    }
}

#[inline]
pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

/// Thin QR factorization by Householder reflections.
pub struct Qr<T> {
    /// Reflected matrix: `R` in the upper triangle, reflectors below.
    qr: Matrix<T>,
    tau: Vec<T>,
    rdiag: Vec<T>,
    col_norms: Vec<T>,
}

impl<T: Scalar> Qr<T> {
    pub fn new(mut a: Matrix<T>) -> Self {
        let (m, n) = (a.rows(), a.cols());
        let col_norms: Vec<T> = (0..n)
            .map(|j| (0..m).map(|i| a[(i, j)] * a[(i, j)]).sum::<T>().sqrt())
            .collect();
        let mut tau = vec![T::zero(); n];
        let mut rdiag = vec![T::zero(); n];
        for k in 0..n.min(m) {
            let norm = (k..m).map(|i| a[(i, k)] * a[(i, k)]).sum::<T>().sqrt();
            if norm == T::zero() {
                continue;
            }
            let alpha = if a[(k, k)] > T::zero() { -norm } else { norm };
            let v0 = a[(k, k)] - alpha;
            // v = (v0, a[k+1.., k]); normalise so v[0] = 1
            for i in k + 1..m {
                a[(i, k)] /= v0;
            }
            let vnorm2 = T::one() + (k + 1..m).map(|i| a[(i, k)] * a[(i, k)]).sum::<T>();
            let t = T::lit(2.0) / vnorm2;
            tau[k] = t;
            rdiag[k] = alpha;
            for j in k + 1..n {
                let mut s = a[(k, j)];
                for i in k + 1..m {
                    s += a[(i, k)] * a[(i, j)];
                }
                s *= t;
                a[(k, j)] -= s;
                for i in k + 1..m {
                    let vik = a[(i, k)];
                    a[(i, j)] -= s * vik;
                }
            }
            a[(k, k)] = alpha;
        }
        Self {
            qr: a,
            tau,
            rdiag,
            col_norms,
        }
    }

    /// True when every `|R_kk|` exceeds `tol` times its column's norm.
    pub fn is_full_rank(&self, tol: T) -> bool {
        self.rdiag
            .iter()
            .zip(&self.col_norms)
            .all(|(&d, &c)| d.abs() > tol * c && c > T::zero())
    }

    /// Least-squares solution of `A x ≈ b`.
    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let (m, n) = (self.qr.rows(), self.qr.cols());
        assert_eq!(b.len(), m);
        let mut y = b.to_vec();
        for k in 0..n.min(m) {
            if self.tau[k] == T::zero() {
                continue;
            }
            let mut s = y[k];
            for i in k + 1..m {
                s += self.qr[(i, k)] * y[i];
            }
            s *= self.tau[k];
            y[k] -= s;
            for i in k + 1..m {
                y[i] -= s * self.qr[(i, k)];
            }
        }
        let mut x = vec![T::zero(); n];
        for k in (0..n).rev() {
            let mut s = y[k];
            for j in k + 1..n {
                s -= self.qr[(k, j)] * x[j];
            }
            x[k] = s / self.qr[(k, k)];
        }
        x
    }

    /// `(AᵀA)⁻¹ = R⁻¹ R⁻ᵀ`.
    pub fn gram_inverse(&self) -> Matrix<T> {
        let n = self.qr.cols();
        // R⁻¹ by back substitution, column by column
        let mut rinv = Matrix::zeros(n, n);
        for c in 0..n {
            for k in (0..=c).rev() {
                let mut s = if k == c { T::one() } else { T::zero() };
                for j in k + 1..=c {
                    s -= self.qr[(k, j)] * rinv[(j, c)];
                }
                rinv[(k, c)] = s / self.qr[(k, k)];
            }
        }
        let mut out = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let mut s = T::zero();
                for k in i.max(j)..n {
                    s += rinv[(i, k)] * rinv[(j, k)];
                }
                out[(i, j)] = s;
            }
        }
        out
    }
}

/// Numerical rank of the column space of `a`, together with the columns
/// that were found dependent on earlier ones.
///
/// Columns are normalised to unit length first so that differently scaled
/// covariates (calendar year next to a unit intercept) are judged fairly.
pub fn column_rank<T: Scalar>(a: &Matrix<T>, tol: T) -> (usize, Vec<usize>) {
    let (m, n) = (a.rows(), a.cols());
    let mut basis: Vec<Vec<T>> = Vec::new();
    let mut dependent = Vec::new();
    for j in 0..n {
        let mut v: Vec<T> = (0..m).map(|i| a[(i, j)]).collect();
        let norm = dot(&v, &v).sqrt();
        if norm == T::zero() {
            dependent.push(j);
            continue;
        }
        v.iter_mut().for_each(|x| *x /= norm);
        // two passes of modified Gram-Schmidt
        for _ in 0..2 {
            for q in &basis {
                let d = dot(q, &v);
                v.iter_mut().zip(q).for_each(|(x, &qi)| *x -= d * qi);
            }
        }
        let rest = dot(&v, &v).sqrt();
        if rest > tol {
            v.iter_mut().for_each(|x| *x /= rest);
            basis.push(v);
        } else {
            dependent.push(j);
        }
    }
    (basis.len(), dependent)
}
