use std::fmt;
use std::str::FromStr;

use num_complex::Complex;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matops::ComplexMatrix;
use crate::scalar::{times_i_pow, Cplx, Real};

/// Largest qubit count for which dense Pauli matrices are built by default.
pub const DEFAULT_DENSE_CAP: u32 = 8;

/// Largest supported qubit count for matrix-free operations.
pub const MAX_QUBITS: u32 = 30;

/// An n-qubit Pauli string in symplectic form.
///
/// Qubit `j` is bit `j` of both masks; per qubit `I=(0,0)`, `X=(1,0)`, `Z=(0,1)`, `Y=(1,1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PauliString {
    pub n_qubits: u32,
    pub x_mask: u32,
    pub z_mask: u32,
}

impl PauliString {
    pub fn new(n_qubits: u32, x_mask: u32, z_mask: u32) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(Error::InvalidArgument(format!(
                "qubit count {n_qubits} outside 1..={MAX_QUBITS}"
            )));
        }
        let limit = 1u64 << n_qubits;
        if u64::from(x_mask) >= limit || u64::from(z_mask) >= limit {
            return Err(Error::InvalidArgument(format!(
                "masks ({x_mask}, {z_mask}) do not fit in {n_qubits} bits"
            )));
        }
        Ok(Self {
            n_qubits,
            x_mask,
            z_mask,
        })
    }

    pub fn identity(n_qubits: u32) -> Self {
        Self {
            n_qubits,
            x_mask: 0,
            z_mask: 0,
        }
    }

    /// Builds the string from a flat index in `0..4^n`, `x` in the high half.
    pub fn from_index(n_qubits: u32, index: u64) -> Self {
        let mask = (1u64 << n_qubits) - 1;
        Self {
            n_qubits,
            x_mask: ((index >> n_qubits) & mask) as u32,
            z_mask: (index & mask) as u32,
        }
    }

    pub fn index(&self) -> u64 {
        (u64::from(self.x_mask) << self.n_qubits) | u64::from(self.z_mask)
    }

    pub fn is_identity(&self) -> bool {
        self.x_mask == 0 && self.z_mask == 0
    }

    pub fn dim(&self) -> usize {
        1usize << self.n_qubits
    }

    /// Exponent `k` of the global phase `i^k` from `Y = iXZ`.
    #[inline]
    pub fn phase_exponent(&self) -> u32 {
        (self.x_mask & self.z_mask).count_ones() & 3
    }

    /// Single-qubit factor at qubit `j` as one of `I`, `X`, `Y`, `Z`.
    pub fn letter(&self, j: u32) -> char {
        match ((self.x_mask >> j) & 1, (self.z_mask >> j) & 1) {
            (0, 0) => 'I',
            (1, 0) => 'X',
            (0, 1) => 'Z',
            _ => 'Y',
        }
    }

    /// Number of non-identity factors.
    pub fn weight(&self) -> u32 {
        (self.x_mask | self.z_mask).count_ones()
    }
}

impl fmt::Display for PauliString {
    /// Leftmost character is the highest qubit, so `"XZ"` is `X ⊗ Z`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for j in (0..self.n_qubits).rev() {
            write!(f, "{}", self.letter(j))?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let n = s.chars().count() as u32;
        let mut x = 0u32;
        let mut z = 0u32;
        for (pos, ch) in s.chars().enumerate() {
            let j = n - 1 - pos as u32;
            let (bx, bz) = match ch.to_ascii_uppercase() {
                'I' => (0, 0),
                'X' => (1, 0),
                'Y' => (1, 1),
                'Z' => (0, 1),
                other => {
                    return Err(Error::InvalidArgument(format!("unknown Pauli letter {other:?}")));
                }
            };
            x |= bx << j;
            z |= bz << j;
        }
        Self::new(n, x, z)
    }
}

/// Applies `P` to a state vector: `(Pv)[b ⊕ x] = i^{|x∧z|} (−1)^{|z∧b|} v[b]`.
pub fn apply_pauli<T: Real>(p: &PauliString, v: &[Cplx<T>]) -> Result<Vec<Cplx<T>>> {
    let d = p.dim();
    if v.len() != d {
        return Err(Error::DimensionMismatch(format!(
            "vector of length {} for {} qubits",
            v.len(),
            p.n_qubits
        )));
    }
    let x = p.x_mask as usize;
    let z = p.z_mask as usize;
    let k = p.phase_exponent();
    let mut out = vec![Cplx::zero(); d];
    for (b, &vb) in v.iter().enumerate() {
        let val = times_i_pow(vb, k);
        out[b ^ x] = if (z & b).count_ones() & 1 == 1 { -val } else { val };
    }
    Ok(out)
}

/// Applies `P` to every column of a `d × k` block.
pub fn apply_pauli_block<T: Real>(p: &PauliString, a: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
    let d = p.dim();
    if a.rows() != d {
        return Err(Error::DimensionMismatch(format!(
            "block with {} rows for {} qubits",
            a.rows(),
            p.n_qubits
        )));
    }
    let x = p.x_mask as usize;
    let z = p.z_mask as usize;
    let k = p.phase_exponent();
    let mut out = ComplexMatrix::zeros(d, a.cols());
    for b in 0..d {
        let neg = (z & b).count_ones() & 1 == 1;
        let src = a.row(b);
        for (o, &s) in out.row_mut(b ^ x).iter_mut().zip(src) {
            let val = times_i_pow(s, k);
            *o = if neg { -val } else { val };
        }
    }
    Ok(out)
}

/// Dense Kronecker product `s_{n−1} ⊗ … ⊗ s_0`, refused above `DEFAULT_DENSE_CAP` qubits.
pub fn dense_pauli<T: Real>(p: &PauliString) -> Result<ComplexMatrix<T>> {
    dense_pauli_capped(p, DEFAULT_DENSE_CAP)
}

pub fn dense_pauli_capped<T: Real>(p: &PauliString, cap: u32) -> Result<ComplexMatrix<T>> {
    if p.n_qubits > cap {
        return Err(Error::AboveDenseCap {
            n: p.n_qubits,
            cap,
        });
    }
    let one = Complex::new(T::one(), T::zero());
    let zero = Cplx::zero();
    let im = Complex::new(T::zero(), T::one());
    let mut acc = ComplexMatrix::from_vec(1, 1, vec![one])?;
    for j in (0..p.n_qubits).rev() {
        let s = match p.letter(j) {
            'I' => [one, zero, zero, one],
            'X' => [zero, one, one, zero],
            'Y' => [zero, -im, im, zero],
            _ => [one, zero, zero, -one],
        };
        acc = kron(&acc, &ComplexMatrix::from_vec(2, 2, s.to_vec())?);
    }
    Ok(acc)
}

fn kron<T: Real>(a: &ComplexMatrix<T>, b: &ComplexMatrix<T>) -> ComplexMatrix<T> {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    ComplexMatrix::from_fn(ar * br, ac * bc, |i, j| a[(i / br, j / bc)] * b[(i % br, j % bc)])
}

/// In-place unnormalized Walsh-Hadamard transform: `v[z] ← Σ_b (−1)^{|z∧b|} v[b]`.
pub(crate) fn walsh_hadamard<T: Real>(v: &mut [Cplx<T>]) {
    let n = v.len();
    debug_assert!(n.is_power_of_two());
    let mut h = 1;
    while h < n {
        for block in v.chunks_mut(2 * h) {
            let (lo, hi) = block.split_at_mut(h);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a, *b);
                *a = x + y;
                *b = x - y;
            }
        }
        h *= 2;
    }
}
