//! Dense oracles built from Kronecker products, independent of the matrix-free code.
#![allow(dead_code)]

use num_complex::Complex64 as C;
use projfgd_core::pauli::{PauliString, SensingEnsemble};
use projfgd_core::Matrix;

pub fn single(letter: char) -> [[C; 2]; 2] {
    let o = C::new(0.0, 0.0);
    let l = C::new(1.0, 0.0);
    let i = C::new(0.0, 1.0);
    match letter {
        'I' => [[l, o], [o, l]],
        'X' => [[o, l], [l, o]],
        'Y' => [[o, -i], [i, o]],
        'Z' => [[l, o], [o, -l]],
        _ => unreachable!(),
    }
}

fn kron(a: &[Vec<C>], b: &[[C; 2]; 2]) -> Vec<Vec<C>> {
    let n = a.len();
    let mut out = vec![vec![C::new(0.0, 0.0); 2 * n]; 2 * n];
    for i in 0..n {
        for j in 0..n {
            for p in 0..2 {
                for q in 0..2 {
                    out[2 * i + p][2 * j + q] = a[i][j] * b[p][q];
                }
            }
        }
    }
    out
}

/// Highest qubit as the leftmost Kronecker factor, so qubit j is bit j of the index.
pub fn kron_pauli(p: &PauliString) -> Matrix {
    let mut m = vec![vec![C::new(1.0, 0.0)]];
    for j in (0..p.n_qubits).rev() {
        m = kron(&m, &single(p.letter(j)));
    }
    let d = m.len();
    Matrix::from_fn(d, d, |i, j| m[i][j])
}

pub fn trace_prod(a: &Matrix, b: &Matrix) -> C {
    let d = a.rows();
    let mut s = C::new(0.0, 0.0);
    for i in 0..d {
        for k in 0..d {
            s += a[(i, k)] * b[(k, i)];
        }
    }
    s
}

/// Dense sensing map with the `√(d/m)` normalization.
pub struct DenseSensing {
    pub paulis: Vec<Matrix>,
    pub scale: f64,
}

impl DenseSensing {
    pub fn new(ens: &SensingEnsemble) -> Self {
        let d = ens.dim() as f64;
        Self {
            paulis: ens.paulis().iter().map(kron_pauli).collect(),
            scale: (d / ens.len() as f64).sqrt(),
        }
    }

    pub fn measure(&self, rho: &Matrix) -> Vec<f64> {
        self.paulis.iter().map(|p| self.scale * trace_prod(p, rho).re).collect()
    }

    pub fn adjoint(&self, c: &[f64]) -> Matrix {
        let d = self.paulis[0].rows();
        let mut out = Matrix::zeros(d, d);
        for (p, &ci) in self.paulis.iter().zip(c) {
            out.axpy(self.scale * ci, p);
        }
        out
    }

    /// `∇f(ρ) = M†(M(ρ) − y)`.
    pub fn gradient(&self, rho: &Matrix, y: &[f64]) -> Matrix {
        let r: Vec<f64> = self.measure(rho).iter().zip(y).map(|(a, b)| a - b).collect();
        self.adjoint(&r)
    }

    pub fn objective(&self, rho: &Matrix, y: &[f64]) -> f64 {
        0.5 * self.measure(rho).iter().zip(y).map(|(a, b)| (a - b).powi(2)).sum::<f64>()
    }
}

pub fn gram(a: &Matrix) -> Matrix {
    a.matmul(&a.adjoint())
}
