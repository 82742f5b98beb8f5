//! Dense Hermitian eigendecomposition: Householder reduction to a real
//! tridiagonal matrix followed by implicit QL iterations.

use num_complex::Complex;
use num_traits::Zero;

use super::matrix::ComplexMatrix;
use crate::error::{Error, Result};
use crate::scalar::{Cplx, Real};

/// Eigenpairs of a Hermitian matrix, eigenvalues in descending order.
#[derive(Clone, Debug)]
pub struct HermitianEig<T: Real> {
    pub eigenvalues: Vec<T>,
    /// Columns are the eigenvectors, in the same order as `eigenvalues`.
    pub eigenvectors: ComplexMatrix<T>,
}

impl<T: Real> HermitianEig<T> {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// `Φ diag(f(λ)) Φ†`.
    pub fn recompose_with(&self, mut f: impl FnMut(T) -> T) -> ComplexMatrix<T> {
        let lam: Vec<T> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        self.recompose_values(&lam)
    }

    /// `Φ diag(values) Φ†` for replacement eigenvalues.
    pub fn recompose_values(&self, values: &[T]) -> ComplexMatrix<T> {
        assert_eq!(values.len(), self.len());
        let phi = &self.eigenvectors;
        let mut scaled = phi.clone();
        for i in 0..scaled.rows() {
            for (z, &l) in scaled.row_mut(i).iter_mut().zip(values) {
                *z = *z * l;
            }
        }
        scaled.matmul_adjoint(phi)
    }

    pub fn reconstruct(&self) -> ComplexMatrix<T> {
        self.recompose_values(&self.eigenvalues)
    }

    /// Keeps only the first `k` pairs.
    pub fn truncated(&self, k: usize) -> Self {
        let k = k.min(self.len());
        Self {
            eigenvalues: self.eigenvalues[..k].to_vec(),
            eigenvectors: self.eigenvectors.columns(0, k),
        }
    }
}

/// Full eigendecomposition of a Hermitian matrix. The input is symmetrized first.
pub fn hermitian_eig_dense<T: Real>(h: &ComplexMatrix<T>) -> Result<HermitianEig<T>> {
    let a = h.symmetrized_checked()?;
    eig_symmetrized(a)
}

/// Eigenvalues only, descending.
pub fn hermitian_eigenvalues<T: Real>(h: &ComplexMatrix<T>) -> Result<Vec<T>> {
    Ok(hermitian_eig_dense(h)?.eigenvalues)
}

pub(crate) fn eig_symmetrized<T: Real>(mut a: ComplexMatrix<T>) -> Result<HermitianEig<T>> {
    let n = a.rows();
    if n == 0 {
        return Ok(HermitianEig {
            eigenvalues: Vec::new(),
            eigenvectors: ComplexMatrix::zeros(0, 0),
        });
    }
    let reflectors = tridiagonalize(&mut a);

    let mut diag: Vec<T> = (0..n).map(|i| a[(i, i)].re).collect();
    let mut off = vec![T::zero(); n];
    let mut phase = vec![Complex::new(T::one(), T::zero()); n];
    for i in 0..n.saturating_sub(1) {
        let e = a[(i + 1, i)];
        let mag = e.norm();
        off[i] = mag;
        phase[i + 1] = if mag > T::zero() {
            phase[i] * (e / mag)
        } else {
            phase[i]
        };
    }

    // Row j of `zt` is eigenvector j of the real tridiagonal matrix.
    let mut zt = vec![T::zero(); n * n];
    for i in 0..n {
        zt[i * n + i] = T::one();
    }
    tql2(&mut diag, &mut off, &mut zt, n)?;

    let mut u = ComplexMatrix::from_fn(n, n, |r, j| phase[r] * zt[j * n + r]);
    for (k, v) in reflectors.iter().enumerate().rev() {
        apply_reflector_left(&mut u, k + 1, v);
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| diag[j].partial_cmp(&diag[i]).unwrap_or(std::cmp::Ordering::Equal));
    let eigenvalues = order.iter().map(|&i| diag[i]).collect();
    let eigenvectors = ComplexMatrix::from_fn(n, n, |r, j| u[(r, order[j])]);
    Ok(HermitianEig {
        eigenvalues,
        eigenvectors,
    })
}

/// Reduces `a` in place to Hermitian tridiagonal form `Q† a Q`.
/// Returns the unit Householder vectors; vector `k` acts on indices `k+1..n`.
fn tridiagonalize<T: Real>(a: &mut ComplexMatrix<T>) -> Vec<Vec<Cplx<T>>> {
    let n = a.rows();
    let mut reflectors = Vec::with_capacity(n.saturating_sub(2));
    for k in 0..n.saturating_sub(2) {
        let m = n - k - 1;
        let x: Vec<Cplx<T>> = (0..m).map(|i| a[(k + 1 + i, k)]).collect();
        let xnorm = x.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
        let tail = x[1..].iter().map(|z| z.norm_sqr()).sum::<T>();
        if xnorm == T::zero() || tail == T::zero() {
            reflectors.push(vec![Cplx::zero(); m]);
            continue;
        }
        let x0 = x[0];
        let unit = if x0.norm() > T::zero() {
            x0 / x0.norm()
        } else {
            Complex::new(T::one(), T::zero())
        };
        let alpha = -unit * xnorm;
        let mut v = x;
        v[0] -= alpha;
        let vn = v.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
        for z in &mut v {
            *z = *z / vn;
        }

        // p = S v on the trailing block S = a[k+1.., k+1..].
        let mut p = vec![Cplx::zero(); m];
        for (i, pi) in p.iter_mut().enumerate() {
            let row = &a.row(k + 1 + i)[k + 1..];
            *pi = row.iter().zip(&v).map(|(s, vj)| s * vj).sum();
        }
        let kappa: Cplx<T> = v.iter().zip(&p).map(|(vi, pi)| vi.conj() * pi).sum();
        let w: Vec<Cplx<T>> = p.iter().zip(&v).map(|(pi, vi)| pi - vi * kappa.re).collect();
        let two = T::lit(2.0);
        for i in 0..m {
            let (vi, wi) = (v[i], w[i]);
            let row = &mut a.row_mut(k + 1 + i)[k + 1..];
            for j in 0..m {
                row[j] -= (vi * w[j].conj() + wi * v[j].conj()) * two;
            }
        }
        a[(k + 1, k)] = alpha;
        a[(k, k + 1)] = alpha.conj();
        for i in 1..m {
            a[(k + 1 + i, k)] = Cplx::zero();
            a[(k, k + 1 + i)] = Cplx::zero();
        }
        reflectors.push(v);
    }
    reflectors
}

/// `u[start.., :] ← (I − 2vv†) u[start.., :]`.
fn apply_reflector_left<T: Real>(u: &mut ComplexMatrix<T>, start: usize, v: &[Cplx<T>]) {
    if v.iter().all(|z| z.is_zero()) {
        return;
    }
    let cols = u.cols();
    let mut proj = vec![Cplx::<T>::zero(); cols];
    for (i, vi) in v.iter().enumerate() {
        let vc = vi.conj();
        for (pj, &x) in proj.iter_mut().zip(u.row(start + i)) {
            *pj += vc * x;
        }
    }
    let two = T::lit(2.0);
    for (i, &vi) in v.iter().enumerate() {
        let f = vi * two;
        for (x, &pj) in u.row_mut(start + i).iter_mut().zip(&proj) {
            *x -= f * pj;
        }
    }
}

/// Implicit QL on a real symmetric tridiagonal matrix (`d` diagonal, `e[i]` couples i and i+1).
/// `zt` holds eigenvectors as rows and is rotated in place.
fn tql2<T: Real>(d: &mut [T], e: &mut [T], zt: &mut [T], n: usize) -> Result<()> {
    if n == 1 {
        return Ok(());
    }
    e[n - 1] = T::zero();
    let eps = T::epsilon();
    let two = T::lit(2.0);
    let mut f = T::zero();
    let mut tst1 = T::zero();
    let max_sweeps = 60 * n.max(8);
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 && e[m].abs() > eps * tst1 {
            m += 1;
        }
        if m > l {
            let mut sweeps = 0;
            loop {
                sweeps += 1;
                if sweeps > max_sweeps {
                    return Err(Error::NoConvergence {
                        iters: sweeps,
                        residual: e[l].abs().as_f64(),
                    });
                }
                let g = d[l];
                let mut p = (d[l + 1] - g) / (two * e[l]);
                let mut r = p.hypot(T::one());
                if p < T::zero() {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let h = g - d[l];
                for di in d.iter_mut().take(n).skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = T::one();
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = T::zero();
                let mut s2 = T::zero();
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    let h = c * p;
                    let r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    let (lo, hi) = zt.split_at_mut((i + 1) * n);
                    let zi = &mut lo[i * n..];
                    let zi1 = &mut hi[..n];
                    for (a, b) in zi.iter_mut().zip(zi1.iter_mut()) {
                        let hb = *b;
                        *b = s * *a + c * hb;
                        *a = c * *a - s * hb;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = T::zero();
    }
    Ok(())
}
