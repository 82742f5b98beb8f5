use num_complex::Complex;
use num_traits::Zero;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::string::{apply_pauli_block, walsh_hadamard, PauliString, MAX_QUBITS};
use crate::error::{Error, Result};
use crate::matops::{ComplexMatrix, HermitianOperator};
use crate::scalar::{times_i_pow, Cplx, Real};

/// Number of partial sums in the adjoint reduction. Chunk boundaries depend only
/// on the ensemble so the summation order never depends on the worker count.
const REDUCTION_PARTS: usize = 32;

fn chunk_len(groups: usize) -> usize {
    groups.div_ceil(REDUCTION_PARTS).max(1)
}

/// The scale applied to every trace: `√(2^n / m)`.
///
/// This is the `2^n/√m` prefactor acting on Hilbert-Schmidt-normalized Paulis
/// `P/√(2^n)`, which makes the complete basis an exact isometry.
pub fn normalization_for(n_qubits: u32, m: usize) -> f64 {
    ((1u64 << n_qubits) as f64 / m as f64).sqrt()
}

/// Strings sharing one `x_mask`: `(z_mask, position in the ensemble)`.
#[derive(Clone, Debug, PartialEq)]
struct XGroup {
    x: usize,
    entries: Vec<(usize, usize)>,
}

/// `m` distinct Pauli strings with the sensing-map normalization.
#[derive(Clone, Debug, PartialEq)]
pub struct SensingEnsemble {
    n_qubits: u32,
    paulis: Vec<PauliString>,
    normalization: f64,
    seed: u64,
    groups: Vec<XGroup>,
}

impl SensingEnsemble {
    /// Builds an ensemble from explicit strings (distinctness is checked).
    pub fn from_paulis(n_qubits: u32, paulis: Vec<PauliString>, seed: u64) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(Error::InvalidArgument(format!("qubit count {n_qubits} unsupported")));
        }
        if paulis.is_empty() {
            return Err(Error::InvalidArgument("ensemble needs at least one Pauli string".into()));
        }
        let mut seen = std::collections::HashSet::with_capacity(paulis.len());
        for p in &paulis {
            if p.n_qubits != n_qubits {
                return Err(Error::DimensionMismatch(format!(
                    "string {p} has {} qubits, ensemble has {n_qubits}",
                    p.n_qubits
                )));
            }
            PauliString::new(p.n_qubits, p.x_mask, p.z_mask)?;
            if !seen.insert(p.index()) {
                return Err(Error::InvalidArgument(format!("duplicate Pauli string {p}")));
            }
        }
        let normalization = normalization_for(n_qubits, paulis.len());
        let groups = build_groups(&paulis);
        Ok(Self {
            n_qubits,
            paulis,
            normalization,
            seed,
            groups,
        })
    }

    /// Like [`from_paulis`](Self::from_paulis) but checks a stored normalization.
    pub fn with_normalization(n_qubits: u32, paulis: Vec<PauliString>, seed: u64, normalization: f64) -> Result<Self> {
        let ens = Self::from_paulis(n_qubits, paulis, seed)?;
        if (ens.normalization - normalization).abs() > 1e-12 * ens.normalization.max(1.0) {
            return Err(Error::InvalidArgument(format!(
                "stored normalization {normalization} disagrees with {}",
                ens.normalization
            )));
        }
        Ok(ens)
    }

    pub fn n_qubits(&self) -> u32 {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1usize << self.n_qubits
    }

    pub fn len(&self) -> usize {
        self.paulis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paulis.is_empty()
    }

    pub fn paulis(&self) -> &[PauliString] {
        &self.paulis
    }

    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Number of distinct `x_mask` values.
    pub fn group_count(&self) -> usize {
        self.groups.len()
    }

    fn check_rows(&self, rows: usize) -> Result<()> {
        if rows != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "{rows} rows for a {}-qubit ensemble",
                self.n_qubits
            )));
        }
        Ok(())
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.len() {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {len} for {} measurements",
                self.len()
            )));
        }
        Ok(())
    }
}

fn build_groups(paulis: &[PauliString]) -> Vec<XGroup> {
    let mut order: Vec<usize> = (0..paulis.len()).collect();
    order.sort_by_key(|&i| (paulis[i].x_mask, paulis[i].z_mask));
    let mut groups: Vec<XGroup> = Vec::new();
    for i in order {
        let p = paulis[i];
        let x = p.x_mask as usize;
        match groups.last_mut() {
            Some(g) if g.x == x => g.entries.push((p.z_mask as usize, i)),
            _ => groups.push(XGroup {
                x,
                entries: vec![(p.z_mask as usize, i)],
            }),
        }
    }
    groups
}

/// Draws `m` distinct strings uniformly without replacement from all `4^n`.
pub fn sample_ensemble(n_qubits: u32, m: usize, seed: u64) -> Result<SensingEnsemble> {
    if n_qubits == 0 || n_qubits > MAX_QUBITS {
        return Err(Error::InvalidArgument(format!("qubit count {n_qubits} unsupported")));
    }
    let available = 1u128 << (2 * n_qubits);
    if m == 0 || m as u128 > available {
        return Err(Error::TooManyMeasurements {
            m,
            n: n_qubits,
            available,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let total = usize::try_from(available).map_err(|_| Error::InvalidArgument("index space too large".into()))?;
    let picks = rand::seq::index::sample(&mut rng, total, m);
    let paulis = picks
        .into_iter()
        .map(|i| PauliString::from_index(n_qubits, i as u64))
        .collect();
    SensingEnsemble::from_paulis(n_qubits, paulis, seed)
}

/// Whether a group is small enough that per-string evaluation beats a full transform.
#[inline]
fn use_direct(group_len: usize, n_qubits: u32) -> bool {
    group_len <= n_qubits as usize
}

/// `Σ_b (−1)^{|z∧b|} u[b]`.
fn signed_sum<T: Real>(u: &[Cplx<T>], z: usize) -> Cplx<T> {
    let mut acc = Cplx::zero();
    for (b, &ub) in u.iter().enumerate() {
        if (z & b).count_ones() & 1 == 1 {
            acc -= ub;
        } else {
            acc += ub;
        }
    }
    acc
}

/// Traces `Tr(P ρ)` for the strings of one group given `u[b] = ρ[b, b ⊕ x]`.
fn group_traces<T: Real>(g: &XGroup, mut u: Vec<Cplx<T>>, n_qubits: u32, scale: T) -> Vec<(usize, T)> {
    let x = g.x;
    let direct = use_direct(g.entries.len(), n_qubits);
    if !direct {
        walsh_hadamard(&mut u);
    }
    g.entries
        .iter()
        .map(|&(z, idx)| {
            let s = if direct { signed_sum(&u, z) } else { u[z] };
            let k = (x & z).count_ones() & 3;
            (idx, times_i_pow(s, k).re * scale)
        })
        .collect()
}

/// `h[b] = Σ_{z ∈ group} c_z · i^{|x∧z|} · (−1)^{|z∧b|}`.
fn group_kernel<T: Real>(g: &XGroup, c: &[T], d: usize, n_qubits: u32) -> Vec<Cplx<T>> {
    let x = g.x;
    if use_direct(g.entries.len(), n_qubits) {
        let mut h = vec![Cplx::zero(); d];
        for &(z, idx) in &g.entries {
            let k = ((x & z).count_ones() & 3) as u32;
            let w = times_i_pow(Complex::new(c[idx], T::zero()), k);
            for (b, hb) in h.iter_mut().enumerate() {
                if (z & b).count_ones() & 1 == 1 {
                    *hb -= w;
                } else {
                    *hb += w;
                }
            }
        }
        h
    } else {
        let mut w = vec![Cplx::zero(); d];
        for &(z, idx) in &g.entries {
            let k = ((x & z).count_ones() & 3) as u32;
            w[z] = times_i_pow(Complex::new(c[idx], T::zero()), k);
        }
        walsh_hadamard(&mut w);
        w
    }
}

fn scatter<T: Real>(m: usize, parts: Vec<Vec<(usize, T)>>) -> Vec<T> {
    let mut out = vec![T::zero(); m];
    for part in parts {
        for (i, v) in part {
            out[i] = v;
        }
    }
    out
}

/// `M(AA†)`: entry `i` is `normalization · Σ_k Re⟨a_k, P_i a_k⟩`.
pub fn measure_factor<T: Real>(ens: &SensingEnsemble, a: &ComplexMatrix<T>) -> Result<Vec<T>> {
    ens.check_rows(a.rows())?;
    let d = ens.dim();
    let scale = T::lit(ens.normalization);
    let parts: Vec<Vec<(usize, T)>> = ens
        .groups
        .par_iter()
        .map(|g| {
            let x = g.x;
            let u: Vec<Cplx<T>> = (0..d)
                .map(|b| {
                    a.row(b)
                        .iter()
                        .zip(a.row(b ^ x))
                        .map(|(p, q)| p * q.conj())
                        .sum()
                })
                .collect();
            group_traces(g, u, ens.n_qubits, scale)
        })
        .collect();
    Ok(scatter(ens.len(), parts))
}

/// `M(ρ)` for a dense matrix.
pub fn measure_dense<T: Real>(ens: &SensingEnsemble, rho: &ComplexMatrix<T>) -> Result<Vec<T>> {
    ens.check_rows(rho.rows())?;
    ens.check_rows(rho.cols())?;
    let d = ens.dim();
    let scale = T::lit(ens.normalization);
    let parts: Vec<Vec<(usize, T)>> = ens
        .groups
        .par_iter()
        .map(|g| {
            let u: Vec<Cplx<T>> = (0..d).map(|b| rho[(b, b ^ g.x)]).collect();
            group_traces(g, u, ens.n_qubits, scale)
        })
        .collect();
    Ok(scatter(ens.len(), parts))
}

/// `M†(c) · A = normalization · Σ_i c_i P_i A` for any `d × k` block `A`.
pub fn adjoint_times_factor<T: Real>(
    ens: &SensingEnsemble,
    c: &[T],
    a: &ComplexMatrix<T>,
) -> Result<ComplexMatrix<T>> {
    ens.check_len(c.len())?;
    ens.check_rows(a.rows())?;
    let d = ens.dim();
    let k = a.cols();
    let n = ens.n_qubits;
    let partials: Vec<ComplexMatrix<T>> = ens
        .groups
        .par_chunks(chunk_len(ens.groups.len()))
        .map(|chunk| {
            let mut acc = ComplexMatrix::zeros(d, k);
            for g in chunk {
                let h = group_kernel(g, c, d, n);
                for (b, &hb) in h.iter().enumerate() {
                    if hb.is_zero() {
                        continue;
                    }
                    let src = a.row(b);
                    for (o, &s) in acc.row_mut(b ^ g.x).iter_mut().zip(src) {
                        *o += hb * s;
                    }
                }
            }
            acc
        })
        .collect();
    let mut out = tree_sum(partials).unwrap_or_else(|| ComplexMatrix::zeros(d, k));
    out.scale_mut(T::lit(ens.normalization));
    Ok(out)
}

/// Dense assembly of `M†(c)`. Groups write disjoint entries `(b ⊕ x, b)`, so no reduction is needed.
pub fn adjoint_dense<T: Real>(ens: &SensingEnsemble, c: &[T]) -> Result<ComplexMatrix<T>> {
    ens.check_len(c.len())?;
    let d = ens.dim();
    let n = ens.n_qubits;
    let kernels: Vec<(usize, Vec<Cplx<T>>)> = ens
        .groups
        .par_iter()
        .map(|g| (g.x, group_kernel(g, c, d, n)))
        .collect();
    let scale = T::lit(ens.normalization);
    let mut out = ComplexMatrix::zeros(d, d);
    for (x, h) in kernels {
        for (b, hb) in h.into_iter().enumerate() {
            out[(b ^ x, b)] = hb * scale;
        }
    }
    Ok(out)
}

fn tree_sum<T: Real>(mut parts: Vec<ComplexMatrix<T>>) -> Option<ComplexMatrix<T>> {
    if parts.is_empty() {
        return None;
    }
    while parts.len() > 1 {
        let mut next = Vec::with_capacity(parts.len().div_ceil(2));
        let mut it = parts.into_iter();
        while let Some(mut a) = it.next() {
            if let Some(b) = it.next() {
                a.axpy(T::one(), &b);
            }
            next.push(a);
        }
        parts = next;
    }
    parts.pop()
}

/// Per-string reference evaluation of `M(AA†)` via `apply_pauli_block`.
pub fn measure_factor_direct<T: Real>(ens: &SensingEnsemble, a: &ComplexMatrix<T>) -> Result<Vec<T>> {
    ens.check_rows(a.rows())?;
    let scale = T::lit(ens.normalization);
    ens.paulis
        .iter()
        .map(|p| {
            let pa = apply_pauli_block(p, a)?;
            let tr: Cplx<T> = a.as_slice().iter().zip(pa.as_slice()).map(|(x, y)| x.conj() * y).sum();
            debug_assert!(tr.im.abs() <= T::lit(1e-8) * (T::one() + tr.re.abs()));
            Ok(tr.re * scale)
        })
        .collect()
}

/// Per-string reference evaluation of `M†(c) · A`.
pub fn adjoint_times_factor_direct<T: Real>(
    ens: &SensingEnsemble,
    c: &[T],
    a: &ComplexMatrix<T>,
) -> Result<ComplexMatrix<T>> {
    ens.check_len(c.len())?;
    ens.check_rows(a.rows())?;
    let mut out = ComplexMatrix::zeros(a.rows(), a.cols());
    for (p, &ci) in ens.paulis.iter().zip(c) {
        let pa = apply_pauli_block(p, a)?;
        out.axpy(ci, &pa);
    }
    out.scale_mut(T::lit(ens.normalization));
    Ok(out)
}

/// The Hermitian operator `X ↦ M†(c) X`.
pub struct AdjointOperator<'a, T: Real> {
    pub ens: &'a SensingEnsemble,
    pub coeffs: &'a [T],
}

impl<T: Real> HermitianOperator<T> for AdjointOperator<'_, T> {
    fn dim(&self) -> usize {
        self.ens.dim()
    }

    fn apply_block(&self, x: &ComplexMatrix<T>) -> ComplexMatrix<T> {
        adjoint_times_factor(self.ens, self.coeffs, x).expect("operator shapes are checked at construction")
    }

    fn to_dense(&self) -> ComplexMatrix<T> {
        adjoint_dense(self.ens, self.coeffs).expect("operator shapes are checked at construction")
    }
}

impl<'a, T: Real> AdjointOperator<'a, T> {
    pub fn new(ens: &'a SensingEnsemble, coeffs: &'a [T]) -> Result<Self> {
        ens.check_len(coeffs.len())?;
        Ok(Self { ens, coeffs })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::dense_pauli;

    #[test]
    fn exhaustive_small_ensembles() {
        let e = sample_ensemble(1, 4, 0).unwrap();
        let mut labels: Vec<String> = e.paulis().iter().map(|p| p.to_string()).collect();
        labels.sort();
        assert_eq!(labels, ["I", "X", "Y", "Z"]);
        let e2 = sample_ensemble(2, 16, 5).unwrap();
        let mut idx: Vec<u64> = e2.paulis().iter().map(|p| p.index()).collect();
        idx.sort();
        assert_eq!(idx, (0..16).collect::<Vec<_>>());
    }

    #[test]
    fn sampling_is_seed_deterministic() {
        let a = sample_ensemble(3, 8, 1).unwrap();
        let b = sample_ensemble(3, 8, 1).unwrap();
        let c = sample_ensemble(3, 8, 2).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.paulis(), c.paulis());
    }

    #[test]
    fn too_many_measurements() {
        assert!(matches!(sample_ensemble(1, 5, 0), Err(Error::TooManyMeasurements { .. })));
        assert!(sample_ensemble(1, 0, 0).is_err());
    }

    #[test]
    fn duplicates_rejected() {
        let p = PauliString::identity(2);
        assert!(SensingEnsemble::from_paulis(2, vec![p, p], 0).is_err());
    }

    #[test]
    fn stored_normalization_checked() {
        let p = vec![PauliString::identity(2)];
        assert!(SensingEnsemble::with_normalization(2, p.clone(), 0, 2.0).is_ok());
        assert!(SensingEnsemble::with_normalization(2, p, 0, 4.0).is_err());
    }

    #[test]
    fn identity_string_scales_trace() {
        let ens = SensingEnsemble::from_paulis(1, vec![PauliString::identity(1)], 0).unwrap();
        let mut a = ComplexMatrix::<f64>::zeros(2, 1);
        a[(0, 0)] = Complex::new(0.6, 0.0);
        a[(1, 0)] = Complex::new(0.0, 0.8);
        let y = measure_factor(&ens, &a).unwrap();
        assert!((y[0] - ens.normalization()).abs() < 1e-15);
    }

    #[test]
    fn z_on_ground_state() {
        let z: PauliString = "Z".parse().unwrap();
        let ens = SensingEnsemble::from_paulis(1, vec![z], 0).unwrap();
        let mut a = ComplexMatrix::<f64>::zeros(2, 1);
        a[(0, 0)] = Complex::new(1.0, 0.0);
        assert!((measure_factor(&ens, &a).unwrap()[0] - ens.normalization()).abs() < 1e-15);
    }

    #[test]
    fn group_paths_agree_with_direct_and_dense() {
        use rand::SeedableRng;
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        // Full ensemble forces transform groups; sparse one forces direct groups.
        for (n, m) in [(4u32, 256usize), (4, 20), (5, 300), (6, 40)] {
            let ens = sample_ensemble(n, m, 9).unwrap();
            let d = ens.dim();
            let a = ComplexMatrix::<f64>::random_gaussian(d, 3, &mut rng);
            let fast = measure_factor(&ens, &a).unwrap();
            let slow = measure_factor_direct(&ens, &a).unwrap();
            let rho = a.matmul_adjoint(&a);
            let dense = measure_dense(&ens, &rho).unwrap();
            for i in 0..m {
                let p: ComplexMatrix<f64> = dense_pauli(&ens.paulis()[i]).unwrap();
                let want = p.matmul(&rho).trace().re * ens.normalization();
                assert!((fast[i] - want).abs() < 1e-10 * (1.0 + want.abs()));
                assert!((slow[i] - want).abs() < 1e-10 * (1.0 + want.abs()));
                assert!((dense[i] - want).abs() < 1e-10 * (1.0 + want.abs()));
            }
            let c: Vec<f64> = (0..m).map(|i| ((i * 37 % 11) as f64) - 5.0).collect();
            let adj_fast = adjoint_times_factor(&ens, &c, &a).unwrap();
            let adj_slow = adjoint_times_factor_direct(&ens, &c, &a).unwrap();
            let g = adjoint_dense(&ens, &c).unwrap();
            let mut oracle = ComplexMatrix::zeros(d, d);
            for (p, &ci) in ens.paulis().iter().zip(&c) {
                oracle.axpy(ci * ens.normalization(), &dense_pauli(p).unwrap());
            }
            let scale = oracle.frobenius_norm();
            assert!(g.sub(&oracle).frobenius_norm() < 1e-10 * scale);
            let want = oracle.matmul(&a);
            assert!(adj_fast.sub(&want).frobenius_norm() < 1e-10 * want.frobenius_norm());
            assert!(adj_slow.sub(&want).frobenius_norm() < 1e-10 * want.frobenius_norm());
        }
    }

    #[test]
    fn adjoint_of_zero_and_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let ens = sample_ensemble(3, 10, 2).unwrap();
        let a = ComplexMatrix::<f64>::random_gaussian(8, 2, &mut rng);
        let z = adjoint_times_factor(&ens, &[0.0; 10], &a).unwrap();
        assert_eq!(z.frobenius_norm(), 0.0);
        let id = SensingEnsemble::from_paulis(3, vec![PauliString::identity(3)], 0).unwrap();
        let out = adjoint_times_factor(&id, &[1.0], &a).unwrap();
        assert!(out.sub(&a.scaled(id.normalization())).frobenius_norm() < 1e-14);
    }

    #[test]
    fn shape_errors() {
        let ens = sample_ensemble(2, 5, 0).unwrap();
        let a = ComplexMatrix::<f64>::zeros(8, 1);
        assert!(measure_factor(&ens, &a).is_err());
        let b = ComplexMatrix::<f64>::zeros(4, 1);
        assert!(adjoint_times_factor(&ens, &[0.0; 4], &b).is_err());
    }
}
