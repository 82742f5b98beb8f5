use std::ops::{Index, IndexMut};

use num_complex::Complex;
use num_traits::Zero;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::scalar::{Cplx, Real};

/// Dense row-major complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix<T: Real> {
    rows: usize,
    cols: usize,
    data: Vec<Cplx<T>>,
}

impl<T: Real> ComplexMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Cplx::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex::new(T::one(), T::zero());
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<Cplx<T>>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("matrix construction"));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Cplx<T>) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_real_diagonal(diag: &[T]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &v) in diag.iter().enumerate() {
            m[(i, i)] = Complex::new(v, T::zero());
        }
        m
    }

    /// Entries i.i.d. standard complex Gaussian (real and imaginary parts N(0, 1)).
    pub fn random_gaussian<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Self {
        let data = (0..rows * cols)
            .map(|_| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                Complex::new(T::lit(re), T::lit(im))
            })
            .collect();
        Self { rows, cols, data }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn as_slice(&self) -> &[Cplx<T>] {
        &self.data
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [Cplx<T>] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<Cplx<T>> {
        self.data
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[Cplx<T>] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [Cplx<T>] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<Cplx<T>> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn set_column(&mut self, j: usize, v: &[Cplx<T>]) {
        for (i, &z) in v.iter().enumerate() {
            self[(i, j)] = z;
        }
    }

    /// Columns `start..start + count` as a new matrix.
    pub fn columns(&self, start: usize, count: usize) -> Self {
        Self::from_fn(self.rows, count, |i, j| self[(i, start + j)])
    }

    /// Horizontal concatenation `[self | other]`.
    pub fn hstack(&self, other: &Self) -> Result<Self> {
        if self.rows != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "hstack of {} and {} rows",
                self.rows, other.rows
            )));
        }
        let cols = self.cols + other.cols;
        Ok(Self::from_fn(self.rows, cols, |i, j| {
            if j < self.cols {
                self[(i, j)]
            } else {
                other[(i, j - self.cols)]
            }
        }))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn scaled(&self, s: T) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn scale_mut(&mut self, s: T) {
        for z in &mut self.data {
            *z = *z * s;
        }
    }

    pub fn scaled_complex(&self, s: Cplx<T>) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    /// `self += alpha * other`.
    pub fn axpy(&mut self, alpha: T, other: &Self) {
        assert_eq!(self.shape(), other.shape(), "axpy shape mismatch");
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b * alpha;
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.axpy(T::one(), other);
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.axpy(-T::one(), other);
        out
    }

    pub fn frobenius_norm_sq(&self) -> T {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn frobenius_norm(&self) -> T {
        self.frobenius_norm_sq().sqrt()
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().map(|z| z.norm()).fold(T::zero(), T::max)
    }

    pub fn trace(&self) -> Cplx<T> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// Real Frobenius inner product `Re Tr(self† other)`.
    pub fn inner_re(&self, other: &Self) -> T {
        assert_eq!(self.shape(), other.shape(), "inner product shape mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.re * b.re + a.im * b.im)
            .sum()
    }

    /// Matrix product `self · other`.
    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matmul inner dimension mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for (k, &a) in self.row(i).iter().enumerate() {
                if a.is_zero() {
                    continue;
                }
                for (o, &b) in out_row.iter_mut().zip(other.row(k)) {
                    *o += a * b;
                }
            }
        }
        out
    }

    /// `self† · other` without forming the adjoint.
    pub fn adjoint_matmul(&self, other: &Self) -> Self {
        assert_eq!(self.rows, other.rows, "adjoint_matmul row mismatch");
        let mut out = Self::zeros(self.cols, other.cols);
        for k in 0..self.rows {
            let a_row = self.row(k);
            let b_row = other.row(k);
            for (i, a) in a_row.iter().enumerate() {
                let ac = a.conj();
                let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (o, &b) in out_row.iter_mut().zip(b_row) {
                    *o += ac * b;
                }
            }
        }
        out
    }

    /// `self · other†` without forming the adjoint.
    pub fn matmul_adjoint(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.cols, "matmul_adjoint column mismatch");
        let mut out = Self::zeros(self.rows, other.rows);
        for i in 0..self.rows {
            let a = self.row(i);
            for j in 0..other.rows {
                let b = other.row(j);
                out.data[i * other.rows + j] =
                    a.iter().zip(b).map(|(x, y)| x * y.conj()).sum();
            }
        }
        out
    }

    pub fn matvec(&self, v: &[Cplx<T>]) -> Vec<Cplx<T>> {
        assert_eq!(self.cols, v.len(), "matvec length mismatch");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Largest entrywise deviation from Hermiticity.
    pub fn hermitian_deviation(&self) -> T {
        let mut dev = T::zero();
        for i in 0..self.rows {
            for j in i..self.cols {
                dev = dev.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        dev
    }

    /// `(H + H†) / 2`.
    pub fn hermitian_part(&self) -> Self {
        let half = T::lit(0.5);
        Self::from_fn(self.rows, self.cols, |i, j| {
            (self[(i, j)] + self[(j, i)].conj()) * half
        })
    }

    /// Checks squareness, finiteness and Hermiticity, returning the symmetrized matrix.
    pub fn symmetrized_checked(&self) -> Result<Self> {
        if !self.is_square() {
            return Err(Error::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        if !self.is_finite() {
            return Err(Error::NonFinite("Hermitian input"));
        }
        let scale = self.max_abs().max(T::one());
        let dev = self.hermitian_deviation();
        if dev > T::hermitian_tol() * scale {
            return Err(Error::NotHermitian(dev.as_f64()));
        }
        Ok(self.hermitian_part())
    }
}

impl<T: Real> Index<(usize, usize)> for ComplexMatrix<T> {
    type Output = Cplx<T>;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Cplx<T> {
        &self.data[i * self.cols + j]
    }
}

impl<T: Real> IndexMut<(usize, usize)> for ComplexMatrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Cplx<T> {
        &mut self.data[i * self.cols + j]
    }
}

/// `‖A A† − B B†‖_F` via `‖A†A‖² + ‖B†B‖² − 2‖B†A‖²`, in O(d·r²).
pub fn gram_frobenius_distance<T: Real>(a: &ComplexMatrix<T>, b: &ComplexMatrix<T>) -> Result<T> {
    if a.rows() != b.rows() {
        return Err(Error::DimensionMismatch(format!(
            "factors with {} and {} rows",
            a.rows(),
            b.rows()
        )));
    }
    let aa = a.adjoint_matmul(a).frobenius_norm_sq();
    let bb = b.adjoint_matmul(b).frobenius_norm_sq();
    let ba = b.adjoint_matmul(a).frobenius_norm_sq();
    Ok((aa + bb - (ba + ba)).max(T::zero()).sqrt())
}

/// `‖A A† − B B†‖_F` for factors of equal width, written through `Δ = A − B` as
/// `‖ΔB† + AΔ†‖_F` so that nearby factors do not suffer cancellation.
pub fn gram_difference_norm<T: Real>(a: &ComplexMatrix<T>, b: &ComplexMatrix<T>) -> Result<T> {
    if a.shape() != b.shape() {
        return Err(Error::DimensionMismatch(format!(
            "factors of shape {:?} and {:?}",
            a.shape(),
            b.shape()
        )));
    }
    let delta = a.sub(b);
    let dd = delta.adjoint_matmul(&delta);
    let first = dd.inner_re(&b.adjoint_matmul(b));
    let second = dd.inner_re(&a.adjoint_matmul(a));
    let p = delta.adjoint_matmul(a);
    let q = delta.adjoint_matmul(b);
    let r = p.rows();
    let mut cross = T::zero();
    for i in 0..r {
        for j in 0..r {
            cross += (p[(i, j)] * q[(j, i)]).re;
        }
    }
    Ok((first + second + cross + cross).max(T::zero()).sqrt())
}

/// Orthonormalizes the columns in place (modified Gram-Schmidt, two passes).
/// Columns that collapse numerically are replaced by zero vectors; returns how many survived.
pub fn orthonormalize_columns<T: Real>(m: &mut ComplexMatrix<T>) -> usize {
    let (rows, cols) = m.shape();
    let mut kept = 0;
    let mut norms0 = vec![T::zero(); cols];
    for (j, n0) in norms0.iter_mut().enumerate() {
        *n0 = (0..rows).map(|i| m[(i, j)].norm_sqr()).sum::<T>().sqrt();
    }
    for j in 0..cols {
        for _pass in 0..2 {
            for k in 0..j {
                let mut proj = Cplx::zero();
                for i in 0..rows {
                    proj += m[(i, k)].conj() * m[(i, j)];
                }
                if proj.is_zero() {
                    continue;
                }
                for i in 0..rows {
                    let q = m[(i, k)];
                    m[(i, j)] -= q * proj;
                }
            }
        }
        let norm = (0..rows).map(|i| m[(i, j)].norm_sqr()).sum::<T>().sqrt();
        if norm > T::epsilon() * T::lit(64.0) * norms0[j].max(T::min_positive_value()) && norm > T::zero() {
            let inv = norm.recip();
            for i in 0..rows {
                m[(i, j)] = m[(i, j)] * inv;
            }
            kept += 1;
        } else {
            for i in 0..rows {
                m[(i, j)] = Cplx::zero();
            }
        }
    }
    kept
}
