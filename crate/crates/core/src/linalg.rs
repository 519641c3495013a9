//! Small complex linear algebra: banded LU (solver matrices) and dense LU
//! (Galerkin systems). Partial pivoting throughout.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{Scalar, C};

/// Complex band matrix with `kl` sub- and `ku` superdiagonals, stored
/// column-wise with `kl` extra rows of fill-in headroom for the LU.
#[derive(Clone, Debug)]
pub struct BandedMatrix<T: Scalar> {
    n: usize,
    kl: usize,
    ku: usize,
    /// `(2*kl + ku + 1) x n`, entry `(i, j)` at row `kl + ku + i - j`.
    ab: Vec<C<T>>,
}

impl<T: Scalar> BandedMatrix<T> {
    pub fn new(n: usize, kl: usize, ku: usize) -> Self {
        let rows = 2 * kl + ku + 1;
        Self { n, kl, ku, ab: vec![Complex::new(T::zero(), T::zero()); rows * n] }
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(i + self.ku + self.kl >= j && j + self.kl >= i, "outside band: ({i},{j})");
        (self.kl + self.ku + i - j) * self.n + j
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: C<T>) {
        let k = self.idx(i, j);
        self.ab[k] = v;
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: C<T>) {
        let k = self.idx(i, j);
        self.ab[k] = self.ab[k] + v;
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C<T> {
        self.ab[self.idx(i, j)]
    }

    /// `y = A x` over the declared band (valid only before factorization).
    pub fn matvec(&self, x: &[C<T>]) -> Vec<C<T>> {
        debug_assert_eq!(x.len(), self.n);
        let mut y = vec![Complex::new(T::zero(), T::zero()); self.n];
        for i in 0..self.n {
            let j_lo = i.saturating_sub(self.kl);
            let j_hi = (i + self.ku).min(self.n - 1);
            let mut acc = Complex::new(T::zero(), T::zero());
            for j in j_lo..=j_hi {
                acc = acc + self.ab[self.idx(i, j)] * x[j];
            }
            y[i] = acc;
        }
        y
    }

    /// In-place LU with partial pivoting (LAPACK gbtrf layout).
    pub fn factor(mut self) -> Result<BandedLu<T>> {
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        let width = kl + ku; // U bandwidth after fill-in
        let mut ipiv = vec![0usize; n];
        for j in 0..n {
            let i_max = (j + kl).min(n - 1);
            let mut p = j;
            let mut best = self.ab[self.idx(j, j)].norm_sqr();
            for i in (j + 1)..=i_max {
                let v = self.ab[self.idx(i, j)].norm_sqr();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if !(best > T::zero()) {
                return Err(Error::SingularOperator { index: j });
            }
            ipiv[j] = p;
            if p != j {
                let k_hi = (j + width).min(n - 1);
                for k in j..=k_hi {
                    let a = self.idx(j, k);
                    let b = self.idx(p, k);
                    self.ab.swap(a, b);
                }
            }
            let piv = self.ab[self.idx(j, j)];
            for i in (j + 1)..=i_max {
                let m = self.ab[self.idx(i, j)] / piv;
                let mi = self.idx(i, j);
                self.ab[mi] = m;
                let k_hi = (j + width).min(n - 1);
                for k in (j + 1)..=k_hi {
                    let a = self.idx(j, k);
                    let b = self.idx(i, k);
                    self.ab[b] = self.ab[b] - m * self.ab[a];
                }
            }
        }
        Ok(BandedLu { mat: self, ipiv })
    }
}

/// Factored band matrix; reusable across right-hand sides.
#[derive(Clone, Debug)]
pub struct BandedLu<T: Scalar> {
    mat: BandedMatrix<T>,
    ipiv: Vec<usize>,
}

impl<T: Scalar> BandedLu<T> {
    pub fn solve(&self, b: &mut [C<T>]) {
        let m = &self.mat;
        let (n, kl, ku) = (m.n, m.kl, m.ku);
        debug_assert_eq!(b.len(), n);
        for j in 0..n {
            let p = self.ipiv[j];
            if p != j {
                b.swap(j, p);
            }
            let i_max = (j + kl).min(n - 1);
            for i in (j + 1)..=i_max {
                let mult = m.ab[m.idx(i, j)];
                b[i] = b[i] - mult * b[j];
            }
        }
        let width = kl + ku;
        for j in (0..n).rev() {
            let k_hi = (j + width).min(n - 1);
            let mut acc = b[j];
            for k in (j + 1)..=k_hi {
                acc = acc - m.ab[m.idx(j, k)] * b[k];
            }
            b[j] = acc / m.ab[m.idx(j, j)];
        }
    }
}

/// Dense complex LU with partial pivoting, for small Galerkin systems.
#[derive(Clone, Debug)]
pub struct DenseLu<T: Scalar> {
    n: usize,
    a: Vec<C<T>>,
    ipiv: Vec<usize>,
}

impl<T: Scalar> DenseLu<T> {
    /// Factor a row-major `n x n` matrix.
    pub fn new(n: usize, mut a: Vec<C<T>>) -> Result<Self> {
        debug_assert_eq!(a.len(), n * n);
        let mut ipiv = vec![0usize; n];
        for j in 0..n {
            let mut p = j;
            let mut best = a[j * n + j].norm_sqr();
            for i in (j + 1)..n {
                let v = a[i * n + j].norm_sqr();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if !(best > T::zero()) {
                return Err(Error::SingularOperator { index: j });
            }
            ipiv[j] = p;
            if p != j {
                for k in 0..n {
                    a.swap(j * n + k, p * n + k);
                }
            }
            let piv = a[j * n + j];
            for i in (j + 1)..n {
                let m = a[i * n + j] / piv;
                a[i * n + j] = m;
                for k in (j + 1)..n {
                    let ajk = a[j * n + k];
                    a[i * n + k] = a[i * n + k] - m * ajk;
                }
            }
        }
        Ok(Self { n, a, ipiv })
    }

    pub fn solve(&self, b: &mut [C<T>]) {
        let n = self.n;
        // the factorization permutes stored multiplier rows along with U, so
        // all row swaps must land on b before the triangular sweeps
        for j in 0..n {
            let p = self.ipiv[j];
            if p != j {
                b.swap(j, p);
            }
        }
        for j in 0..n {
            for i in (j + 1)..n {
                let m = self.a[i * n + j];
                b[i] = b[i] - m * b[j];
            }
        }
        for j in (0..n).rev() {
            let mut acc = b[j];
            for k in (j + 1)..n {
                acc = acc - self.a[j * n + k] * b[k];
            }
            b[j] = acc / self.a[j * n + j];
        }
    }
}
