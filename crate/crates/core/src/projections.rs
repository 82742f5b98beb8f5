//! Euclidean projections: Frobenius ball, capped simplex, PSD cone and `{ρ ⪰ 0, Tr ρ ≤ 1}`.

use crate::error::{Error, Result};
use crate::matops::{hermitian_eig_dense, ComplexMatrix, HermitianEig};
use crate::scalar::Real;
use crate::states::Factor;

/// Output of the Frobenius-ball projection: `scaled = xi · input`.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalingResult<T: Real> {
    pub scaled: Factor<T>,
    pub xi: T,
}

/// `ξ(B) = min(1, 1/‖B‖_F)`.
pub fn ball_scale<T: Real>(b: &ComplexMatrix<T>) -> T {
    let norm = b.frobenius_norm();
    if norm > T::one() {
        norm.recip()
    } else {
        T::one()
    }
}

/// Projects onto `{A : ‖A‖_F ≤ 1}`.
pub fn project_frobenius_ball<T: Real>(b: &Factor<T>) -> ScalingResult<T> {
    let xi = ball_scale(b.as_matrix());
    let scaled = if xi < T::one() {
        Factor::new(b.as_matrix().scaled(xi)).expect("scaling keeps the factor finite")
    } else {
        b.clone()
    };
    ScalingResult { scaled, xi }
}

/// In-place variant returning `ξ`.
pub fn project_frobenius_ball_mut<T: Real>(b: &mut ComplexMatrix<T>) -> T {
    let xi = ball_scale(b);
    if xi < T::one() {
        b.scale_mut(xi);
    }
    xi
}

/// Euclidean projection onto `{w ≥ 0, Σ w ≤ budget}`.
pub fn project_simplex_leq<T: Real>(v: &[T], budget: T) -> Result<Vec<T>> {
    if !(budget > T::zero()) {
        return Err(Error::InvalidArgument(format!("simplex budget must be positive, got {budget}")));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("simplex input"));
    }
    let clipped: Vec<T> = v.iter().map(|&x| x.max(T::zero())).collect();
    let total: T = clipped.iter().copied().sum();
    if total <= budget {
        return Ok(clipped);
    }
    let theta = simplex_threshold(v, budget);
    Ok(v.iter().map(|&x| (x - theta).max(T::zero())).collect())
}

/// Threshold `θ` of the projection onto `{w ≥ 0, Σ w = budget}`.
fn simplex_threshold<T: Real>(v: &[T], budget: T) -> T {
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    let mut cum = T::zero();
    let mut theta = T::zero();
    for (k, &x) in sorted.iter().enumerate() {
        cum += x;
        let t = (cum - budget) / T::from_usize_lossy(k + 1);
        if x > t {
            theta = t;
        } else {
            break;
        }
    }
    theta
}

/// Clips negative eigenvalues.
pub fn project_psd<T: Real>(h: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
    let eig = hermitian_eig_dense(h)?;
    Ok(eig.recompose_with(|l| l.max(T::zero())).hermitian_part())
}

/// Projects onto `{ρ ⪰ 0, Tr ρ ≤ 1}` by projecting the spectrum onto the capped simplex.
pub fn project_trace_psd<T: Real>(h: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
    let eig = project_trace_psd_eig(h)?;
    Ok(eig.reconstruct().hermitian_part())
}

/// Spectral form of [`project_trace_psd`]: eigenvectors of `h` with projected eigenvalues, descending.
pub fn project_trace_psd_eig<T: Real>(h: &ComplexMatrix<T>) -> Result<HermitianEig<T>> {
    let mut eig = hermitian_eig_dense(h)?;
    eig.eigenvalues = project_simplex_leq(&eig.eigenvalues, T::one())?;
    Ok(eig)
}
