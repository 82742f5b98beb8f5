use serde::{Deserialize, Serialize};

use super::types::{DensityMatrix, Factor};
use crate::error::{Error, Result};
use crate::matops::{gram_difference_norm, gram_frobenius_distance, hermitian_eig_dense, hermitian_eigenvalues, orthonormalize_columns, ComplexMatrix};
use crate::scalar::Real;

/// Either representation of a state, for metrics that accept both.
#[derive(Clone, Copy, Debug)]
pub enum StateView<'a, T: Real> {
    /// A factor `A` standing for `AA†`.
    Factor(&'a ComplexMatrix<T>),
    Dense(&'a ComplexMatrix<T>),
}

impl<'a, T: Real> StateView<'a, T> {
    pub fn dim(&self) -> usize {
        match self {
            StateView::Factor(a) | StateView::Dense(a) => a.rows(),
        }
    }

    pub fn to_dense(&self) -> ComplexMatrix<T> {
        match self {
            StateView::Factor(a) => a.matmul_adjoint(a),
            StateView::Dense(m) => (*m).clone(),
        }
    }

    fn frobenius_norm(&self) -> T {
        match self {
            StateView::Factor(a) => a.adjoint_matmul(a).frobenius_norm(),
            StateView::Dense(m) => m.frobenius_norm(),
        }
    }
}

impl<'a, T: Real> From<&'a Factor<T>> for StateView<'a, T> {
    fn from(a: &'a Factor<T>) -> Self {
        StateView::Factor(a.as_matrix())
    }
}

impl<'a, T: Real> From<&'a DensityMatrix<T>> for StateView<'a, T> {
    fn from(r: &'a DensityMatrix<T>) -> Self {
        StateView::Dense(r.as_matrix())
    }
}

/// Best rank-r PSD approximation: top-r eigenpairs with negative values clipped.
pub fn best_rank_r<T: Real>(rho: &DensityMatrix<T>, r: usize) -> Result<DensityMatrix<T>> {
    let d = rho.dim();
    if r > d {
        return Err(Error::RankTooLarge { rank: r, dim: d });
    }
    let eig = hermitian_eig_dense(rho.as_matrix())?;
    let vals: Vec<T> = eig
        .eigenvalues
        .iter()
        .enumerate()
        .map(|(i, &l)| if i < r { l.max(T::zero()) } else { T::zero() })
        .collect();
    Ok(DensityMatrix::from_hermitian_unchecked(eig.recompose_values(&vals).hermitian_part()))
}

fn check_same_shape<T: Real>(a: &ComplexMatrix<T>, b: &ComplexMatrix<T>) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(Error::DimensionMismatch(format!(
            "factors of shape {:?} and {:?}",
            a.shape(),
            b.shape()
        )));
    }
    Ok(())
}

struct Polar<T: Real> {
    nuclear: T,
    /// `U V†` from the singular pairs of `C` above `1e-10·σ₁`, with both bases completed
    /// to unitaries. Always a maximizer of `Re Tr(W†C)`.
    w: ComplexMatrix<T>,
    /// Whether `W` is the unique maximizer, i.e. `C` has full rank.
    unique: bool,
}

/// Orthonormal `r × r` basis whose first columns are the given orthonormal ones.
fn complete_basis<T: Real>(cols: ComplexMatrix<T>) -> ComplexMatrix<T> {
    let r = cols.rows();
    let mut m = cols.hstack(&ComplexMatrix::identity(r)).expect("same row count");
    orthonormalize_columns(&mut m);
    let keep: Vec<usize> = (0..m.cols()).filter(|&j| m.column(j).iter().any(|z| z.norm() > T::zero())).collect();
    ComplexMatrix::from_fn(r, r, |i, j| m[(i, keep[j])])
}

/// Singular values and polar factor of `C = B†A` from the Hermitian dilation `[[0, C], [C†, 0]]`.
fn polar<T: Real>(c: &ComplexMatrix<T>) -> Result<Polar<T>> {
    let r = c.rows();
    let dil = ComplexMatrix::from_fn(2 * r, 2 * r, |i, j| match (i < r, j < r) {
        (true, false) => c[(i, j - r)],
        (false, true) => c[(j, i - r)].conj(),
        _ => num_complex::Complex::new(T::zero(), T::zero()),
    });
    let eig = hermitian_eig_dense(&dil)?;
    let sigma: Vec<T> = eig.eigenvalues[..r].iter().map(|s| s.max(T::zero())).collect();
    let nuclear = sigma.iter().copied().sum::<T>();
    let top = sigma[0];
    let k = if top > T::zero() { sigma.iter().filter(|&&s| s > T::lit(1e-10) * top).count() } else { 0 };
    // Eigenvectors of the dilation are [u; v]/√2 with C v = σ u.
    let root2 = T::lit(2.0).sqrt();
    let v = &eig.eigenvectors;
    let u_part = ComplexMatrix::from_fn(r, k, |i, j| v[(i, j)] * root2);
    let v_part = ComplexMatrix::from_fn(r, k, |i, j| v[(r + i, j)] * root2);
    let (uf, vf) = if k == r { (u_part, v_part) } else { (complete_basis(u_part), complete_basis(v_part)) };
    Ok(Polar {
        nuclear,
        w: uf.matmul_adjoint(&vf),
        unique: k == r,
    })
}

/// `DIST(A, B)² = ‖A‖_F² + ‖B‖_F² − 2‖B†A‖_*` without any alignment step.
pub fn dist_procrustes_closed_form<T: Real>(a: &ComplexMatrix<T>, b: &ComplexMatrix<T>) -> Result<T> {
    check_same_shape(a, b)?;
    let nuc = polar(&b.adjoint_matmul(a))?.nuclear;
    let sq = a.frobenius_norm_sq() + b.frobenius_norm_sq() - (nuc + nuc);
    Ok(sq.max(T::zero()).sqrt())
}

/// `min over unitary R of ‖A − BR‖_F`.
///
/// Evaluates `‖A − BW‖_F` with `W` a polar factor of `B†A`, which stays accurate near zero.
/// When `B†A` is rank-deficient any unitary completion of its polar part attains the minimum.
pub fn dist_procrustes<T: Real>(a: &Factor<T>, b: &Factor<T>) -> Result<T> {
    dist_procrustes_matrices(a.as_matrix(), b.as_matrix())
}

pub fn dist_procrustes_matrices<T: Real>(a: &ComplexMatrix<T>, b: &ComplexMatrix<T>) -> Result<T> {
    check_same_shape(a, b)?;
    if a.cols() == 0 {
        return Ok(T::zero());
    }
    let w = polar(&b.adjoint_matmul(a))?.w;
    Ok(a.sub(&b.matmul(&w)).frobenius_norm())
}

/// The unitary `R` attaining `DIST(A, B) = ‖A − BR‖_F`, when unique.
pub fn procrustes_rotation<T: Real>(a: &ComplexMatrix<T>, b: &ComplexMatrix<T>) -> Result<Option<ComplexMatrix<T>>> {
    check_same_shape(a, b)?;
    let p = polar(&b.adjoint_matmul(a))?;
    Ok(p.unique.then_some(p.w))
}

/// `‖ρ̂ − ρ⋆‖_F / ‖ρ⋆‖_F`, through the gram identity when both sides are factors.
pub fn frobenius_rel_error<T: Real>(est: StateView<'_, T>, truth: StateView<'_, T>) -> Result<T> {
    if est.dim() != truth.dim() {
        return Err(Error::DimensionMismatch(format!(
            "estimate of size {} against truth of size {}",
            est.dim(),
            truth.dim()
        )));
    }
    let denom = truth.frobenius_norm();
    if denom == T::zero() {
        return Err(Error::InvalidArgument("truth has zero Frobenius norm".into()));
    }
    let num = match (est, truth) {
        (StateView::Factor(a), StateView::Factor(b)) if a.cols() == b.cols() => {
            // Align first so the difference of the factors is as small as the difference of the states.
            let w = polar(&b.adjoint_matmul(a))?.w;
            gram_difference_norm(a, &b.matmul(&w))?
        }
        (StateView::Factor(a), StateView::Factor(b)) => gram_frobenius_distance(a, b)?,
        (e, t) => e.to_dense().sub(&t.to_dense()).frobenius_norm(),
    };
    Ok(num / denom)
}

fn clip01<T: Real>(x: T) -> T {
    x.max(T::zero()).min(T::one())
}

/// `1 − (Tr √(√ρ⋆ ρ̂ √ρ⋆))²` from two dense states.
///
/// A rank-1 truth uses `F = λ₁⟨v, ρ̂ v⟩`; otherwise the full formula via two eigendecompositions.
pub fn infidelity<T: Real>(est: &DensityMatrix<T>, truth: &DensityMatrix<T>) -> Result<T> {
    if est.dim() != truth.dim() {
        return Err(Error::DimensionMismatch(format!("states of size {} and {}", est.dim(), truth.dim())));
    }
    check_near_state(est)?;
    check_near_state(truth)?;
    let eig = hermitian_eig_dense(truth.as_matrix())?;
    let lam2 = eig.eigenvalues.get(1).copied().unwrap_or(T::zero());
    if lam2.abs() < T::lit(1e-10) {
        let v = eig.eigenvectors.column(0);
        let rv = est.as_matrix().matvec(&v);
        let q: T = v.iter().zip(&rv).map(|(a, b)| (a.conj() * b).re).sum();
        return Ok(clip01(T::one() - eig.eigenvalues[0].max(T::zero()) * q));
    }
    Ok(clip01(T::one() - fidelity_full(est, &eig)?))
}

/// Full fidelity formula without the rank-1 shortcut.
pub fn infidelity_full<T: Real>(est: &DensityMatrix<T>, truth: &DensityMatrix<T>) -> Result<T> {
    let eig = hermitian_eig_dense(truth.as_matrix())?;
    Ok(clip01(T::one() - fidelity_full(est, &eig)?))
}

fn fidelity_full<T: Real>(est: &DensityMatrix<T>, truth_eig: &crate::matops::HermitianEig<T>) -> Result<T> {
    let cut = spectral_floor(&truth_eig.eigenvalues);
    let sqrt_truth = truth_eig.recompose_with(|l| if l > cut { l.sqrt() } else { T::zero() });
    let m = sqrt_truth.matmul(est.as_matrix()).matmul(&sqrt_truth).hermitian_part();
    Ok(sqrt_trace_squared(&hermitian_eigenvalues(&m)?))
}

/// Eigenvalues at or below this level are rounding noise.
fn spectral_floor<T: Real>(vals: &[T]) -> T {
    let top = vals.iter().fold(T::zero(), |a, l| a.max(l.abs()));
    top * T::epsilon() * T::lit(100.0)
}

/// `(Σ √λ)²` over the eigenvalues above the rounding floor.
fn sqrt_trace_squared<T: Real>(vals: &[T]) -> T {
    let cut = spectral_floor(vals);
    let s: T = vals.iter().filter(|l| **l > cut).map(|l| l.sqrt()).sum();
    s * s
}

fn check_near_state<T: Real>(rho: &DensityMatrix<T>) -> Result<()> {
    let tol = T::lit(1e-8);
    if rho.trace() > T::one() + tol {
        return Err(Error::InvalidArgument(format!("trace {} exceeds one", rho.trace())));
    }
    let min = hermitian_eigenvalues(rho.as_matrix())?.last().copied().unwrap_or(T::zero());
    if min < -tol {
        return Err(Error::NotPsd(min.as_f64()));
    }
    Ok(())
}

/// Infidelity against a factored truth `ρ⋆ = FF†`, in `O(d² q)` for dense or `O(d r q)` for factored estimates.
///
/// The nonzero spectrum of `√ρ⋆ ρ̂ √ρ⋆` equals that of `F† ρ̂ F`.
pub fn infidelity_with_factor<T: Real>(est: StateView<'_, T>, truth_factor: &ComplexMatrix<T>) -> Result<T> {
    if est.dim() != truth_factor.rows() {
        return Err(Error::DimensionMismatch(format!(
            "estimate of size {} against factor with {} rows",
            est.dim(),
            truth_factor.rows()
        )));
    }
    let fid = match est {
        StateView::Factor(a) => {
            let c = truth_factor.adjoint_matmul(a);
            let g = c.matmul_adjoint(&c).hermitian_part();
            sqrt_trace_squared(&hermitian_eigenvalues(&g)?)
        }
        StateView::Dense(rho) => {
            let g = truth_factor.adjoint_matmul(&rho.matmul(truth_factor)).hermitian_part();
            sqrt_trace_squared(&hermitian_eigenvalues(&g)?)
        }
    };
    Ok(clip01(T::one() - fid))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumStats {
    pub sigma1: f64,
    pub sigma_r: f64,
    /// `σ₁ / σ_r`.
    pub tau: f64,
    /// `‖ρ‖_F / σ₁`.
    pub srank: f64,
    /// `(1 + δ) / (1 − δ)` when a RIP estimate is supplied.
    pub kappa_proxy: Option<f64>,
}

pub fn spectrum_stats<T: Real>(rho: &DensityMatrix<T>, r: usize, delta: Option<f64>) -> Result<SpectrumStats> {
    let d = rho.dim();
    if r == 0 || r > d {
        return Err(Error::RankTooLarge { rank: r, dim: d });
    }
    let mut sv: Vec<f64> = hermitian_eigenvalues(rho.as_matrix())?
        .iter()
        .map(|l| l.abs().as_f64())
        .collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    stats_from_singular_values(&sv, r, rho.frobenius_norm().as_f64(), delta)
}

/// Same statistics for `ρ = AA†` from the `r × r` gram matrix.
pub fn spectrum_stats_factor<T: Real>(a: &Factor<T>, delta: Option<f64>) -> Result<SpectrumStats> {
    let g = a.as_matrix().adjoint_matmul(a.as_matrix());
    let sv: Vec<f64> = hermitian_eigenvalues(&g)?.iter().map(|l| l.max(T::zero()).as_f64()).collect();
    stats_from_singular_values(&sv, a.rank(), g.frobenius_norm().as_f64(), delta)
}

fn stats_from_singular_values(sv: &[f64], r: usize, frob: f64, delta: Option<f64>) -> Result<SpectrumStats> {
    let sigma1 = sv[0];
    let sigma_r = sv[r - 1];
    if !(sigma_r > 1e-12) {
        return Err(Error::RankDeficient { rank: r, sigma_r });
    }
    Ok(SpectrumStats {
        sigma1,
        sigma_r,
        tau: sigma1 / sigma_r,
        srank: frob / sigma1,
        kappa_proxy: delta.filter(|d| *d < 1.0).map(|d| (1.0 + d) / (1.0 - d)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{random_state, StateSpec};
    use num_complex::Complex;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn diag(v: &[f64]) -> DensityMatrix<f64> {
        DensityMatrix::new(ComplexMatrix::from_real_diagonal(v)).unwrap()
    }

    fn random_psd(d: usize, seed: u64) -> DensityMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = ComplexMatrix::<f64>::random_gaussian(d, d, &mut rng);
        let mut m = g.matmul_adjoint(&g);
        let tr = m.trace().re;
        m.scale_mut(1.0 / tr);
        DensityMatrix::new(m).unwrap()
    }

    #[test]
    fn best_rank_r_examples() {
        let out = best_rank_r(&diag(&[0.7, 0.3]), 1).unwrap();
        assert!(out.as_matrix().sub(diag(&[0.7, 0.0]).as_matrix()).frobenius_norm() < 1e-15);
        let (rho, _) = random_state::<f64>(&StateSpec::pure(3, 1)).unwrap();
        let same = best_rank_r(&rho, 1).unwrap();
        assert!(same.as_matrix().sub(rho.as_matrix()).frobenius_norm() < 1e-12);
        let p = random_psd(8, 2);
        let lam = hermitian_eigenvalues(p.as_matrix()).unwrap();
        let tail: f64 = lam[2..].iter().map(|l| l * l).sum();
        let res = p.as_matrix().sub(best_rank_r(&p, 2).unwrap().as_matrix()).frobenius_norm_sq();
        assert!((res - tail).abs() <= 1e-10 * tail.max(1e-300));
    }

    #[test]
    fn dist_invariance_and_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = Factor::new(ComplexMatrix::<f64>::random_gaussian(8, 2, &mut rng)).unwrap();
        assert!(dist_procrustes(&a, &a).unwrap() < 1e-14);
        // Random unitary from the eigenvectors of a random Hermitian matrix.
        let h = ComplexMatrix::<f64>::random_gaussian(2, 2, &mut rng).hermitian_part();
        let u = hermitian_eig_dense(&h).unwrap().eigenvectors;
        let b = Factor::new(a.as_matrix().matmul(&u)).unwrap();
        assert!(dist_procrustes(&a, &b).unwrap() < 1e-13);
    }

    #[test]
    fn dist_vectors_against_phase_grid() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..5 {
            let a = ComplexMatrix::<f64>::random_gaussian(6, 1, &mut rng);
            let b = ComplexMatrix::<f64>::random_gaussian(6, 1, &mut rng);
            let mut best = f64::INFINITY;
            for k in 0..10_000 {
                let th = 2.0 * std::f64::consts::PI * k as f64 / 10_000.0;
                let rb = b.scaled_complex(Complex::from_polar(1.0, th));
                best = best.min(a.sub(&rb).frobenius_norm());
            }
            let d = dist_procrustes_matrices(&a, &b).unwrap();
            let inner: Complex<f64> = b.as_slice().iter().zip(a.as_slice()).map(|(x, y)| x.conj() * y).sum();
            let formula = (a.frobenius_norm_sq() + b.frobenius_norm_sq() - 2.0 * inner.norm()).sqrt();
            assert!((d - formula).abs() < 1e-12);
            assert!((d - best).abs() < 1e-6, "{d} vs grid {best}");
        }
    }

    #[test]
    fn closed_form_matches_explicit() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for r in 1..=4 {
            let a = ComplexMatrix::<f64>::random_gaussian(16, r, &mut rng);
            let b = ComplexMatrix::<f64>::random_gaussian(16, r, &mut rng);
            let x = dist_procrustes_matrices(&a, &b).unwrap();
            let y = dist_procrustes_closed_form(&a, &b).unwrap();
            assert!((x - y).abs() < 1e-10 * x);
        }
    }

    #[test]
    fn dist_is_accurate_for_tiny_perturbations() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let a = ComplexMatrix::<f64>::random_gaussian(32, 2, &mut rng);
        let e = ComplexMatrix::<f64>::random_gaussian(32, 2, &mut rng).scaled(1e-9);
        let b = a.add(&e);
        let d = dist_procrustes_matrices(&a, &b).unwrap();
        // The Procrustes optimum is at most the unaligned distance and of the same order.
        assert!(d <= e.frobenius_norm() * (1.0 + 1e-6));
        assert!(d > 0.1 * e.frobenius_norm());
    }

    #[test]
    fn dist_shape_mismatch() {
        let a = Factor::<f64>::zeros(4, 1);
        let b = Factor::<f64>::zeros(4, 2);
        assert!(dist_procrustes(&a, &b).is_err());
    }

    #[test]
    fn rel_error_examples() {
        let (rho, a) = random_state::<f64>(&StateSpec::pure(3, 9)).unwrap();
        assert!(frobenius_rel_error((&a).into(), (&rho).into()).unwrap() < 1e-12);
        let zero = Factor::<f64>::zeros(8, 1);
        let e = frobenius_rel_error((&zero).into(), (&a).into()).unwrap();
        assert!((e - 1.0).abs() < 1e-12);
        let (_, b) = random_state::<f64>(&StateSpec::low_rank(3, 2, 10)).unwrap();
        let fast = frobenius_rel_error((&b).into(), (&a).into()).unwrap();
        let dense = b.to_density().as_matrix().sub(a.to_density().as_matrix()).frobenius_norm()
            / a.to_density().frobenius_norm();
        assert!((fast - dense).abs() < 1e-10 * dense);
    }

    #[test]
    fn infidelity_examples() {
        let (rho, a) = random_state::<f64>(&StateSpec::pure(2, 1)).unwrap();
        assert!(infidelity(&rho, &rho).unwrap() < 1e-10);
        let mut e0 = ComplexMatrix::<f64>::zeros(4, 4);
        e0[(0, 0)] = Complex::new(1.0, 0.0);
        let mut e1 = ComplexMatrix::<f64>::zeros(4, 4);
        e1[(1, 1)] = Complex::new(1.0, 0.0);
        let p0 = DensityMatrix::new(e0).unwrap();
        let p1 = DensityMatrix::new(e1).unwrap();
        assert!((infidelity(&p0, &p1).unwrap() - 1.0).abs() < 1e-12);
        let f = infidelity_with_factor((&a).into(), a.as_matrix()).unwrap();
        assert!(f < 1e-10);
    }

    #[test]
    fn mixed_infidelity_against_independent_square_root() {
        // Oracle: √ρ by Denman-Beavers iteration instead of eigendecomposition.
        fn sqrtm(m: &ComplexMatrix<f64>) -> ComplexMatrix<f64> {
            let n = m.rows();
            let mut y = m.clone();
            let mut z = ComplexMatrix::identity(n);
            for _ in 0..60 {
                let yi = inverse(&y);
                let zi = inverse(&z);
                let ny = y.add(&zi).scaled(0.5);
                z = z.add(&yi).scaled(0.5);
                y = ny;
            }
            y
        }
        fn inverse(m: &ComplexMatrix<f64>) -> ComplexMatrix<f64> {
            let n = m.rows();
            let mut a = m.clone();
            let mut inv = ComplexMatrix::identity(n);
            for c in 0..n {
                let p = (c..n).max_by(|&i, &j| a[(i, c)].norm().partial_cmp(&a[(j, c)].norm()).unwrap()).unwrap();
                for j in 0..n {
                    let t = a[(c, j)];
                    a[(c, j)] = a[(p, j)];
                    a[(p, j)] = t;
                    let t = inv[(c, j)];
                    inv[(c, j)] = inv[(p, j)];
                    inv[(p, j)] = t;
                }
                let piv = a[(c, c)];
                for j in 0..n {
                    a[(c, j)] /= piv;
                    inv[(c, j)] /= piv;
                }
                for i in 0..n {
                    if i != c {
                        let f = a[(i, c)];
                        for j in 0..n {
                            let (x, y) = (a[(c, j)], inv[(c, j)]);
                            a[(i, j)] -= f * x;
                            inv[(i, j)] -= f * y;
                        }
                    }
                }
            }
            inv
        }
        for seed in 0..5 {
            let r1 = random_psd(4, 100 + seed);
            let r2 = random_psd(4, 200 + seed);
            let s = sqrtm(r2.as_matrix());
            let m = s.matmul(r1.as_matrix()).matmul(&s);
            let tr = sqrtm(&m).trace().re;
            let oracle = 1.0 - tr * tr;
            let got = infidelity(&r1, &r2).unwrap();
            assert!((got - oracle).abs() < 1e-8, "{got} vs {oracle}");
            let fac = {
                let e = hermitian_eig_dense(r2.as_matrix()).unwrap();
                let mut f = e.eigenvectors.clone();
                for i in 0..4 {
                    for j in 0..4 {
                        f[(i, j)] = f[(i, j)] * e.eigenvalues[j].max(0.0).sqrt();
                    }
                }
                f
            };
            let via_factor = infidelity_with_factor((&r1).into(), &fac).unwrap();
            assert!((via_factor - oracle).abs() < 1e-8);
        }
    }

    #[test]
    fn pure_shortcut_matches_full_formula() {
        for seed in 0..100 {
            let (truth, _) = random_state::<f64>(&StateSpec::pure(2, seed)).unwrap();
            let (est, _) = random_state::<f64>(&StateSpec::low_rank(2, 2, 1000 + seed)).unwrap();
            let a = infidelity(&est, &truth).unwrap();
            let b = infidelity_full(&est, &truth).unwrap();
            assert!((a - b).abs() < 1e-8, "seed {seed}: {a} vs {b}");
        }
    }

    #[test]
    fn spectrum_stats_examples() {
        let (rho, _) = random_state::<f64>(&StateSpec::pure(3, 2)).unwrap();
        let s = spectrum_stats(&rho, 1, None).unwrap();
        assert!((s.tau - 1.0).abs() < 1e-10 && (s.srank - 1.0).abs() < 1e-10);
        assert!(s.kappa_proxy.is_none());
        let s = spectrum_stats(&diag(&[0.5, 0.25, 0.25, 0.0]), 2, Some(0.5)).unwrap();
        assert!((s.sigma1 - 0.5).abs() < 1e-15 && (s.sigma_r - 0.25).abs() < 1e-15);
        assert!((s.tau - 2.0).abs() < 1e-14);
        assert!((s.kappa_proxy.unwrap() - 3.0).abs() < 1e-14);
        assert!(matches!(spectrum_stats(&rho, 2, None), Err(Error::RankDeficient { .. })));
    }
}
