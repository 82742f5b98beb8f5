//! Matrix-free extremal eigenpairs of Hermitian operators.
//!
//! Block iteration with Rayleigh-Ritz extraction over the span of the current
//! block, its residuals and the previous search directions.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::eig::{eig_symmetrized, HermitianEig};
use super::matrix::ComplexMatrix;
use crate::error::{Error, Result};
use crate::scalar::{Cplx, Real};

/// A Hermitian linear map applied to blocks of column vectors.
pub trait HermitianOperator<T: Real> {
    fn dim(&self) -> usize;

    /// Returns `H X` for a `dim × k` block `X`.
    fn apply_block(&self, x: &ComplexMatrix<T>) -> ComplexMatrix<T>;

    /// Assembles the operator densely by applying it to the identity.
    fn to_dense(&self) -> ComplexMatrix<T> {
        self.apply_block(&ComplexMatrix::identity(self.dim()))
    }
}

impl<T: Real> HermitianOperator<T> for ComplexMatrix<T> {
    fn dim(&self) -> usize {
        self.rows()
    }

    fn apply_block(&self, x: &ComplexMatrix<T>) -> ComplexMatrix<T> {
        self.matmul(x)
    }

    fn to_dense(&self) -> ComplexMatrix<T> {
        self.clone()
    }
}

/// Wraps a closure `X ↦ H X` as an operator.
pub struct FnOperator<F> {
    dim: usize,
    f: F,
}

impl<F> FnOperator<F> {
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<T: Real, F: Fn(&ComplexMatrix<T>) -> ComplexMatrix<T>> HermitianOperator<T> for FnOperator<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply_block(&self, x: &ComplexMatrix<T>) -> ComplexMatrix<T> {
        (self.f)(x)
    }
}

/// `H + shift·I`.
pub struct Shifted<'a, T: Real, O: ?Sized> {
    pub op: &'a O,
    pub shift: T,
}

impl<T: Real, O: HermitianOperator<T> + ?Sized> HermitianOperator<T> for Shifted<'_, T, O> {
    fn dim(&self) -> usize {
        self.op.dim()
    }

    fn apply_block(&self, x: &ComplexMatrix<T>) -> ComplexMatrix<T> {
        let mut y = self.op.apply_block(x);
        y.axpy(self.shift, x);
        y
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct SpectralConfig {
    pub max_iters: usize,
    /// Relative residual target `‖Hv − λv‖ ≤ tol·|λ|`.
    pub tol: f64,
    pub seed: u64,
    /// Minimum block width; the solver oversamples beyond the requested count.
    pub block: usize,
}

impl Default for SpectralConfig {
    fn default() -> Self {
        Self {
            max_iters: 2000,
            tol: 1e-10,
            seed: 0x5eed,
            block: 4,
        }
    }
}

impl SpectralConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::InvalidArgument(format!("spectral tol must be positive, got {}", self.tol)));
        }
        if self.block == 0 {
            return Err(Error::InvalidArgument("spectral block must be at least 1".into()));
        }
        Ok(())
    }
}

/// Which end of the spectrum to extract.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Which {
    /// Largest |λ|.
    Magnitude,
    /// Largest λ.
    Algebraic,
}

/// The `k` eigenpairs of largest magnitude, sorted by descending |λ|.
pub fn top_eigpairs<T: Real, O: HermitianOperator<T> + ?Sized>(
    op: &O,
    k: usize,
    cfg: &SpectralConfig,
) -> Result<HermitianEig<T>> {
    extremal_eigpairs(op, k, cfg, Which::Magnitude, None)
}

/// The `k` algebraically largest eigenpairs, sorted descending.
pub fn top_eigpairs_algebraic<T: Real, O: HermitianOperator<T> + ?Sized>(
    op: &O,
    k: usize,
    cfg: &SpectralConfig,
) -> Result<HermitianEig<T>> {
    extremal_eigpairs(op, k, cfg, Which::Algebraic, None)
}

/// `σ₁` of a Hermitian operator, i.e. `|λ|` of the largest-magnitude eigenvalue.
pub fn top_singular_value<T: Real, O: HermitianOperator<T> + ?Sized>(
    op: &O,
    cfg: &SpectralConfig,
) -> Result<T> {
    let e = top_eigpairs(op, 1, cfg)?;
    Ok(e.eigenvalues[0].abs())
}

/// General entry point. `start` optionally provides initial vectors, filled up with random ones.
pub fn extremal_eigpairs<T: Real, O: HermitianOperator<T> + ?Sized>(
    op: &O,
    k: usize,
    cfg: &SpectralConfig,
    which: Which,
    start: Option<&ComplexMatrix<T>>,
) -> Result<HermitianEig<T>> {
    cfg.validate()?;
    let d = op.dim();
    if k > d {
        return Err(Error::RankTooLarge { rank: k, dim: d });
    }
    if k == 0 {
        return Ok(HermitianEig {
            eigenvalues: Vec::new(),
            eigenvectors: ComplexMatrix::zeros(d, 0),
        });
    }
    let width = (k + (k / 2).max(cfg.block)).min(d);
    if k == d || 3 * width >= d {
        let dense = op.to_dense();
        let eig = eig_symmetrized(dense.hermitian_part())?;
        return Ok(select(&eig, k, which));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut x = ComplexMatrix::random_gaussian(d, width, &mut rng);
    if let Some(s) = start {
        for j in 0..s.cols().min(width) {
            x.set_column(j, &s.column(j));
        }
    }
    let kept = orthonormalize_compact(&mut x);
    if kept < width {
        let extra = ComplexMatrix::random_gaussian(d, width - kept, &mut rng);
        x = x.hstack(&extra)?;
        orthonormalize_compact(&mut x);
    }
    let mut hx = op.apply_block(&x);
    let mut p: Option<ComplexMatrix<T>> = None;

    let tol = T::lit(cfg.tol);
    let floor = T::epsilon() * T::lit(100.0);
    let mut last_res = f64::INFINITY;
    for it in 0..cfg.max_iters {
        // Rayleigh-Ritz on the current block.
        let (ritz, theta) = rayleigh_ritz(&x, &hx, width, which)?;
        x = x.matmul(&ritz);
        hx = hx.matmul(&ritz);

        let scale = theta.iter().fold(T::zero(), |a, t| a.max(t.abs()));
        let mut resid = hx.clone();
        for i in 0..d {
            let xr = x.row(i);
            for (j, r) in resid.row_mut(i).iter_mut().enumerate() {
                *r -= xr[j] * theta[j];
            }
        }
        let mut worst = T::zero();
        let mut converged = true;
        for j in 0..k {
            let rn = (0..d).map(|i| resid[(i, j)].norm_sqr()).sum::<T>().sqrt();
            let bound = tol * theta[j].abs() + floor * scale;
            if rn > bound {
                converged = false;
            }
            let rel = if scale > T::zero() { rn / scale } else { T::zero() };
            worst = worst.max(rel);
        }
        last_res = worst.as_f64();
        if converged {
            let eigenvectors = x.columns(0, k);
            return Ok(HermitianEig {
                eigenvalues: theta[..k].to_vec(),
                eigenvectors,
            });
        }
        if it + 1 == cfg.max_iters {
            break;
        }

        // Extended basis [X | R | P], orthonormalized against X.
        let mut cand = resid;
        if let Some(pp) = &p {
            cand = cand.hstack(pp)?;
        }
        project_out(&mut cand, &x);
        project_out(&mut cand, &x);
        let kept = orthonormalize_compact(&mut cand);
        if kept == 0 {
            // Block is invariant to working precision.
            return Ok(HermitianEig {
                eigenvalues: theta[..k].to_vec(),
                eigenvectors: x.columns(0, k),
            });
        }
        let hc = op.apply_block(&cand);
        let s = x.hstack(&cand)?;
        let hs = hx.hstack(&hc)?;
        let (coef, _) = rayleigh_ritz(&s, &hs, width, which)?;
        let new_x = s.matmul(&coef);
        let new_hx = hs.matmul(&coef);
        // Search direction: the component of the update outside the old block.
        let tail = ComplexMatrix::from_fn(cand.cols(), width, |i, j| coef[(width + i, j)]);
        let new_p = cand.matmul(&tail);
        x = new_x;
        hx = new_hx;
        // Periodic re-orthonormalization guards against drift in the recycled images.
        if it % 16 == 15 {
            orthonormalize_compact(&mut x);
            hx = op.apply_block(&x);
        }
        let mut pn = new_p;
        let norms: Vec<T> = (0..width)
            .map(|j| (0..d).map(|i| pn[(i, j)].norm_sqr()).sum::<T>().sqrt())
            .collect();
        for i in 0..d {
            for j in 0..width {
                if norms[j] > T::zero() {
                    pn[(i, j)] = pn[(i, j)] / norms[j];
                }
            }
        }
        p = Some(pn);
    }
    Err(Error::NoConvergence {
        iters: cfg.max_iters,
        residual: last_res,
    })
}

/// Ritz coefficients for the `keep` best pairs of the compressed matrix `S† H S`.
fn rayleigh_ritz<T: Real>(
    s: &ComplexMatrix<T>,
    hs: &ComplexMatrix<T>,
    keep: usize,
    which: Which,
) -> Result<(ComplexMatrix<T>, Vec<T>)> {
    let g = s.adjoint_matmul(hs).hermitian_part();
    let e = eig_symmetrized(g)?;
    let sel = select(&e, keep.min(e.len()), which);
    Ok((sel.eigenvectors, sel.eigenvalues))
}

fn select<T: Real>(e: &HermitianEig<T>, k: usize, which: Which) -> HermitianEig<T> {
    match which {
        Which::Algebraic => e.truncated(k),
        Which::Magnitude => {
            let mut order: Vec<usize> = (0..e.len()).collect();
            order.sort_by(|&i, &j| {
                e.eigenvalues[j]
                    .abs()
                    .partial_cmp(&e.eigenvalues[i].abs())
                    .unwrap_or(std::cmp::Ordering::Equal)
            });
            order.truncate(k);
            let v = &e.eigenvectors;
            HermitianEig {
                eigenvalues: order.iter().map(|&i| e.eigenvalues[i]).collect(),
                eigenvectors: ComplexMatrix::from_fn(v.rows(), k, |r, j| v[(r, order[j])]),
            }
        }
    }
}

/// `c ← c − Q (Q† c)` for orthonormal `Q`.
fn project_out<T: Real>(c: &mut ComplexMatrix<T>, q: &ComplexMatrix<T>) {
    let coef = q.adjoint_matmul(c);
    let corr = q.matmul(&coef);
    c.axpy(-T::one(), &corr);
}

/// Orthonormalizes columns and drops the ones that collapse.
fn orthonormalize_compact<T: Real>(m: &mut ComplexMatrix<T>) -> usize {
    let kept = super::matrix::orthonormalize_columns(m);
    if kept == m.cols() {
        return kept;
    }
    let live: Vec<usize> = (0..m.cols())
        .filter(|&j| (0..m.rows()).any(|i| m[(i, j)] != Cplx::new(T::zero(), T::zero())))
        .collect();
    *m = ComplexMatrix::from_fn(m.rows(), live.len(), |i, j| m[(i, live[j])]);
    live.len()
}
