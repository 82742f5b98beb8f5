use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::types::{DensityMatrix, Factor};
use crate::error::{Error, Result};
use crate::matops::{orthonormalize_columns, ComplexMatrix};
use crate::pauli::{measure_factor, Measurable, SensingEnsemble};
use crate::scalar::Real;

/// Tail eigenvalues below this fraction of the largest one are dropped.
const TAIL_CUTOFF: f64 = 1e-17;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StateKind {
    Pure,
    LowRank,
    NearLowRank,
}

impl FromStr for StateKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pure" => Ok(StateKind::Pure),
            "low-rank" | "low_rank" => Ok(StateKind::LowRank),
            "near-low-rank" | "near_low_rank" => Ok(StateKind::NearLowRank),
            other => Err(Error::InvalidArgument(format!("unknown state kind {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateSpec {
    pub n_qubits: u32,
    pub rank: usize,
    pub kind: StateKind,
    /// Geometric decay base of the tail eigenvalues.
    pub tail_decay: f64,
    /// `‖ζ‖_F / ‖ρ_r‖_F` before renormalization.
    pub tail_mass: f64,
    pub seed: u64,
}

impl StateSpec {
    pub const DEFAULT_TAIL_DECAY: f64 = 0.5;
    pub const DEFAULT_TAIL_MASS: f64 = 0.05;

    pub fn pure(n_qubits: u32, seed: u64) -> Self {
        Self::low_rank(n_qubits, 1, seed).with_kind(StateKind::Pure)
    }

    pub fn low_rank(n_qubits: u32, rank: usize, seed: u64) -> Self {
        Self {
            n_qubits,
            rank,
            kind: StateKind::LowRank,
            tail_decay: Self::DEFAULT_TAIL_DECAY,
            tail_mass: Self::DEFAULT_TAIL_MASS,
            seed,
        }
    }

    pub fn near_low_rank(n_qubits: u32, rank: usize, seed: u64) -> Self {
        Self::low_rank(n_qubits, rank, seed).with_kind(StateKind::NearLowRank)
    }

    pub fn with_kind(mut self, kind: StateKind) -> Self {
        self.kind = kind;
        self
    }

    pub fn dim(&self) -> usize {
        1usize << self.n_qubits
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_qubits == 0 || self.n_qubits > 16 {
            return Err(Error::InvalidArgument(format!("qubit count {} unsupported", self.n_qubits)));
        }
        if self.rank == 0 {
            return Err(Error::InvalidArgument("rank must be at least 1".into()));
        }
        if self.rank > self.dim() {
            return Err(Error::RankTooLarge {
                rank: self.rank,
                dim: self.dim(),
            });
        }
        if self.kind == StateKind::Pure && self.rank != 1 {
            return Err(Error::InvalidArgument("pure states have rank 1".into()));
        }
        if !(self.tail_decay > 0.0 && self.tail_decay < 1.0) {
            return Err(Error::InvalidArgument(format!("tail_decay {} outside (0, 1)", self.tail_decay)));
        }
        if !(self.tail_mass >= 0.0 && self.tail_mass < 0.5) {
            return Err(Error::InvalidArgument(format!("tail_mass {} outside [0, 0.5)", self.tail_mass)));
        }
        Ok(())
    }
}

/// A generated ground truth `ρ⋆ = A⋆A⋆† + TT†`, the tail `TT†` present only for near-low-rank states.
#[derive(Clone, Debug, PartialEq)]
pub struct GroundTruth<T: Real> {
    pub spec: StateSpec,
    /// Factor of the rank-r part `ρ⋆,r`.
    pub factor: Factor<T>,
    /// Factor of the tail `ζ`, columns orthogonal to the range of `factor`.
    pub tail: Option<ComplexMatrix<T>>,
}

impl<T: Real> GroundTruth<T> {
    pub fn generate(spec: &StateSpec) -> Result<Self> {
        spec.validate()?;
        let d = spec.dim();
        let r = spec.rank;
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        let mut g = ComplexMatrix::<T>::random_gaussian(d, r, &mut rng);
        let tr = g.frobenius_norm_sq();
        g.scale_mut(tr.sqrt().recip());

        if spec.kind != StateKind::NearLowRank || spec.tail_mass == 0.0 || r == d {
            return Ok(Self {
                spec: spec.clone(),
                factor: Factor::new(g)?,
                tail: None,
            });
        }

        let decay = T::lit(spec.tail_decay);
        let mut c = Vec::new();
        let mut v = T::one();
        while c.len() < d - r && v >= T::lit(TAIL_CUTOFF) {
            c.push(v);
            v *= decay;
        }
        let q = c.len();
        let mut basis = g.clone();
        orthonormalize_columns(&mut basis);
        let mut z = ComplexMatrix::<T>::random_gaussian(d, q, &mut rng);
        for _ in 0..2 {
            let proj = basis.matmul(&basis.adjoint_matmul(&z));
            z.axpy(-T::one(), &proj);
        }
        orthonormalize_columns(&mut z);

        let rho_r_norm = g.adjoint_matmul(&g).frobenius_norm();
        let c_norm = c.iter().map(|x| *x * *x).sum::<T>().sqrt();
        let scale = T::lit(spec.tail_mass) * rho_r_norm / c_norm;
        for x in &mut c {
            *x *= scale;
        }
        let total = T::one() + c.iter().copied().sum::<T>();
        let inv = total.sqrt().recip();
        g.scale_mut(inv);
        for i in 0..d {
            for (j, zij) in z.row_mut(i).iter_mut().enumerate() {
                *zij = *zij * (c[j].sqrt() * inv);
            }
        }
        Ok(Self {
            spec: spec.clone(),
            factor: Factor::new(g)?,
            tail: Some(z),
        })
    }

    pub fn dim(&self) -> usize {
        self.factor.dim()
    }

    pub fn rank(&self) -> usize {
        self.factor.rank()
    }

    /// `[A⋆ | T]`, a factor of the full state.
    pub fn full_factor(&self) -> ComplexMatrix<T> {
        match &self.tail {
            Some(t) => self.factor.as_matrix().hstack(t).expect("tail shares the row count"),
            None => self.factor.as_matrix().clone(),
        }
    }

    pub fn density(&self) -> DensityMatrix<T> {
        let f = self.full_factor();
        DensityMatrix::from_hermitian_unchecked(f.matmul_adjoint(&f).hermitian_part())
    }

    pub fn rank_r_density(&self) -> DensityMatrix<T> {
        self.factor.to_density()
    }

    /// `‖ρ⋆‖_F`.
    pub fn frobenius_norm(&self) -> T {
        let f = self.full_factor();
        f.adjoint_matmul(&f).frobenius_norm()
    }
}

impl<T: Real> Measurable<T> for GroundTruth<T> {
    fn measure(&self, ens: &SensingEnsemble) -> Result<Vec<T>> {
        measure_factor(ens, &self.full_factor())
    }
}

/// Dense ground truth and the factor of its rank-r part.
pub fn random_state<T: Real>(spec: &StateSpec) -> Result<(DensityMatrix<T>, Factor<T>)> {
    let gt = GroundTruth::generate(spec)?;
    Ok((gt.density(), gt.factor))
}
