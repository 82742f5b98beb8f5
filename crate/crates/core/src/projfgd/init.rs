use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{estimate_lipschitz, InitKind, SolverConfig};
use crate::error::{Error, Result};
use crate::matops::{extremal_eigpairs, hermitian_eig_dense, ComplexMatrix, HermitianEig, Which};
use crate::pauli::{adjoint_dense, AdjointOperator, MeasurementSet, SensingEnsemble};
use crate::projections::{project_frobenius_ball_mut, project_simplex_leq};
use crate::scalar::Real;
use crate::states::Factor;

/// Complex Gaussian `d × r` factor with `‖A‖_F = 1`.
pub fn random_factor<T: Real>(d: usize, r: usize, seed: u64) -> Result<Factor<T>> {
    if r > d {
        return Err(Error::RankTooLarge { rank: r, dim: d });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut a = ComplexMatrix::<T>::random_gaussian(d, r, &mut rng);
    let norm = a.frobenius_norm();
    a.scale_mut(norm.recip());
    Factor::new(a)
}

pub fn initialize<T: Real>(cfg: &SolverConfig, ens: &SensingEnsemble, meas: &MeasurementSet<T>) -> Result<Factor<T>> {
    let l_hat = estimate_lipschitz::<T>(ens, cfg)?;
    initialize_with(cfg, ens, meas, l_hat)
}

/// Initialization with a precomputed `L̂`.
pub fn initialize_with<T: Real>(
    cfg: &SolverConfig,
    ens: &SensingEnsemble,
    meas: &MeasurementSet<T>,
    l_hat: T,
) -> Result<Factor<T>> {
    cfg.validate()?;
    meas.check_against(ens)?;
    let d = ens.dim();
    let r = cfg.rank;
    if r > d {
        return Err(Error::RankTooLarge { rank: r, dim: d });
    }
    if cfg.init_kind == InitKind::Random {
        return random_factor(d, r, cfg.seed);
    }
    let with_trace = cfg.init_kind == InitKind::ProjectedGradientAtZero;
    let (vectors, values) = if ens.n_qubits() <= cfg.dense_cap {
        spectral_dense(ens, meas, l_hat, r, with_trace)?
    } else {
        spectral_matrix_free(cfg, ens, meas, l_hat, r, with_trace)?
    };
    let mut a = vectors;
    for i in 0..d {
        for (z, v) in a.row_mut(i).iter_mut().zip(&values) {
            *z = *z * v.sqrt();
        }
    }
    project_frobenius_ball_mut(&mut a);
    Factor::new(a)
}

/// Projected spectrum of `(1/L̂)·M†(y)` restricted to its leading `r` pairs.
fn shrink<T: Real>(eig: &HermitianEig<T>, r: usize, with_trace: bool) -> Result<(Vec<T>, bool)> {
    let lam = &eig.eigenvalues;
    if with_trace {
        let w = project_simplex_leq(lam, T::one())?;
        // The last computed value lies outside the support, so the threshold seen
        // from these values is the threshold of the full spectrum.
        let complete = lam.len() == eig.eigenvectors.rows();
        let exact = complete || w.last().is_some_and(|x| *x == T::zero());
        Ok((w[..r].to_vec(), exact))
    } else {
        Ok((lam[..r].iter().map(|l| l.max(T::zero())).collect(), true))
    }
}

fn spectral_dense<T: Real>(
    ens: &SensingEnsemble,
    meas: &MeasurementSet<T>,
    l_hat: T,
    r: usize,
    with_trace: bool,
) -> Result<(ComplexMatrix<T>, Vec<T>)> {
    let h = adjoint_dense(ens, &meas.y)?.scaled(l_hat.recip());
    let eig = hermitian_eig_dense(&h)?;
    let (values, _) = shrink(&eig, r, with_trace)?;
    Ok((eig.eigenvectors.columns(0, r), values))
}

/// Grows the number of computed eigenpairs until the simplex threshold is pinned down.
fn spectral_matrix_free<T: Real>(
    cfg: &SolverConfig,
    ens: &SensingEnsemble,
    meas: &MeasurementSet<T>,
    l_hat: T,
    r: usize,
    with_trace: bool,
) -> Result<(ComplexMatrix<T>, Vec<T>)> {
    let d = ens.dim();
    let op = AdjointOperator::new(ens, &meas.y)?;
    let inv = l_hat.recip();
    let mut k = r;
    let mut start: Option<ComplexMatrix<T>> = None;
    loop {
        let mut eig = extremal_eigpairs(&op, k, &cfg.spectral, Which::Algebraic, start.as_ref())?;
        for l in &mut eig.eigenvalues {
            *l *= inv;
        }
        let (values, exact) = shrink(&eig, r, with_trace)?;
        if exact || k == d {
            return Ok((eig.eigenvectors.columns(0, r), values));
        }
        start = Some(eig.eigenvectors);
        k = (2 * k).min(d);
    }
}
